//! Arithmetic of the multiplier `λ`: root-of-unity screening, the
//! resonance order `m`, the index `k'`, small-divisor valuations and the
//! radii `ρ`, `σ`.
//!
//! Over a residue field `F_q` every unit `λ` has `|1-λ^m| < 1` for
//! `m = ord(λ̄)`, and `p ∤ m` because `m | q-1`. The small divisors then
//! obey the closed form
//!
//! ```text
//! v(1-λ^n) = 0            if m ∤ n
//!          = v_m · p^j    if n = m·a·p^j with p ∤ a
//! ```
//!
//! The roots of unity of `F_q((T))` are exactly the constants `F_q*`:
//! if `λ = c(1+w)` with `v(w) > 0` and `w ≠ 0`, then `(1+w)^{q-1}` is `1`
//! plus a series whose lowest term survives every `p`-th power map
//! (Frobenius multiplies its valuation by `p`), so no power of `λ` is `1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::{ceil_units, LaurentSeries, Valuation, Q};
use crate::lucas::int_valuation;
use crate::powerseries::Gauge;

/// Outcome of the root-of-unity screen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootOfUnityFlag {
    No,
    Yes,
    Undetermined,
}

/// The two kinds of indifferent multipliers. Category 1 (`|1-λ^n| = 1` for
/// every `n`) needs an infinite residue field and never arises over `F_q`;
/// it is kept so that the classification is total.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Trivial,
    Resonant,
}

/// Everything the solver and disc analysis need to know about `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierProfile {
    pub lambda: LaurentSeries,
    pub p: u64,
    pub category: Category,
    pub m: u64,
    pub v_m: Q,
    pub k_prime: u64,
    pub root_of_unity: RootOfUnityFlag,
}

/// Valuations of the semi-conjugacy radius `ρ` and the linearization radius `σ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscProfile {
    pub a: Q,
    pub v_rho: Q,
    pub v_sigma: Q,
}

/// Screens `λ` for being a root of unity.
pub fn root_of_unity_screen(lambda: &LaurentSeries) -> RootOfUnityFlag {
    if !lambda.nonconstant_part_vanishes() {
        RootOfUnityFlag::No
    } else if lambda.is_exact() {
        RootOfUnityFlag::Yes
    } else {
        RootOfUnityFlag::Undetermined
    }
}

/// Builds the profile of a unit multiplier that is not a root of unity.
pub fn mult_profile(lambda: &LaurentSeries) -> Result<MultiplierProfile> {
    match lambda.valuation() {
        Valuation::Finite(v) if v == Q::from_integer(0) => {}
        Valuation::Finite(_) => return Err(Error::NonUnitMultiplier),
        _ => return Err(Error::PrecisionExhausted("multiplier is zero to precision".into())),
    }
    match root_of_unity_screen(lambda) {
        RootOfUnityFlag::Yes => return Err(Error::RootOfUnity),
        RootOfUnityFlag::Undetermined => return Err(Error::RootOfUnityUndetermined),
        RootOfUnityFlag::No => {}
    }
    let p = lambda.field().p() as u64;
    let m = lambda.reduce()?.mult_order()?;
    let ram = lambda.ram();
    let one = LaurentSeries::one(lambda.field(), ram);
    let v_m = match one.sub(&lambda.pow(m))?.valuation() {
        Valuation::Finite(v) => v,
        _ => {
            return Err(Error::PrecisionExhausted(format!(
                "1 - λ^{m} vanishes modulo O(U^{})",
                lambda.prec()
            )))
        }
    };
    debug_assert!(v_m > Q::from_integer(0));
    debug_assert!(m % p != 0);
    let k_prime = (1..=m).map(|j| j * p).find(|k| (k - 1) % m == 0).expect("p is invertible mod m");
    Ok(MultiplierProfile {
        lambda: lambda.clone(),
        p,
        category: Category::Resonant,
        m,
        v_m,
        k_prime,
        root_of_unity: RootOfUnityFlag::No,
    })
}

impl MultiplierProfile {
    /// `v(1-λ^n)` from the closed form.
    pub fn small_divisor(&self, n: u64) -> Q {
        if self.category == Category::Trivial || n % self.m != 0 {
            return Q::from_integer(0);
        }
        let j = int_valuation(n / self.m, self.p as u32);
        self.v_m * Q::from_integer((self.p as i64).pow(j))
    }

    /// Number of `l ≤ k` with `p | l` and `m | l-1`.
    pub fn count_resonant(&self, k: u64) -> u64 {
        if self.category == Category::Trivial || k < self.k_prime {
            return 0;
        }
        (k - self.k_prime) / (self.m * self.p) + 1
    }

    /// Whether the small divisor `1-λ^{k-1}` is non-unit and `p | k`.
    pub fn is_resonant(&self, k: u64) -> bool {
        k >= 2 && k % self.p == 0 && (k - 1) % self.m == 0
    }
}

/// `v(1-λ^n)` from the closed form (no series arithmetic).
pub fn small_divisor_valuation(profile: &MultiplierProfile, n: u64) -> Valuation {
    Valuation::Finite(profile.small_divisor(n))
}

/// Largest horizon `small_divisor_direct` will try before giving up.
pub const DIRECT_HORIZON_LIMIT: i64 = 1 << 20;

/// `v(1-λ^n)` computed in the series field by square-and-multiply, doubling
/// the working horizon until a nonzero digit appears. For a truncated `λ`
/// the result may be a lower bound only.
pub fn small_divisor_direct(lambda: &LaurentSeries, n: u64) -> Result<Valuation> {
    if n == 0 {
        return Err(Error::InvalidArgument("small divisor index must be ≥ 1".into()));
    }
    let one = LaurentSeries::one(lambda.field(), lambda.ram());
    let mut cap: i64 = 16;
    loop {
        let d = one.sub(&lambda.pow_capped(n, cap))?;
        let v = d.valuation();
        if !v.is_zero_to_precision() || d.prec() < cap {
            return Ok(v);
        }
        if cap >= DIRECT_HORIZON_LIMIT {
            return Err(Error::PrecisionExhausted(format!(
                "1 - λ^{n} vanishes modulo O(U^{cap})"
            )));
        }
        cap *= 2;
    }
}

/// Both sides of the product formula for `Π_{i ≤ p^{N-1}} (1-λ^{ip})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductFormula {
    pub n: u32,
    pub summed: Q,
    pub closed_form: Q,
}

/// Sums the closed-form valuations `v(1-λ^{ip})` for `i = 1..p^{N-1}` and
/// evaluates `v_1 p^N (1 + (p-1)(N-1)/p)`. Requires `m = 1`.
pub fn product_small_divisors(profile: &MultiplierProfile, n: u32) -> Result<ProductFormula> {
    if profile.m != 1 {
        return Err(Error::HypothesisViolated(format!(
            "product formula needs |1-λ| < 1, but m = {}",
            profile.m
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("N must be ≥ 1".into()));
    }
    let p = profile.p;
    let count = p.pow(n - 1);
    let summed = (1..=count).map(|i| profile.small_divisor(i * p)).sum::<Q>();
    let pn = Q::from_integer((p as i64).pow(n));
    let pq = Q::from_integer(p as i64);
    let closed_form =
        profile.v_m * pn * (Q::from_integer(1) + (pq - 1) * Q::from_integer(n as i64 - 1) / pq);
    if summed != closed_form {
        return Err(Error::HypothesisViolated(format!(
            "product formula mismatch at N = {n}: {summed} vs {closed_form}"
        )));
    }
    Ok(ProductFormula { n, summed, closed_form })
}

/// `max(0, ⌊(k-k')/(mp)⌋ + 1)`.
pub fn count_resonant(profile: &MultiplierProfile, k: u64) -> u64 {
    profile.count_resonant(k)
}

/// `v_ρ = v_m/(mp) - A` and `v_σ = v_m/(k'-1) - A`.
pub fn disc_profile(profile: &MultiplierProfile, gauge: &Gauge) -> Result<DiscProfile> {
    let a = gauge.a;
    if profile.category == Category::Trivial {
        return Ok(DiscProfile { a, v_rho: -a, v_sigma: -a });
    }
    let mp = Q::from_integer((profile.m * profile.p) as i64);
    let v_rho = profile.v_m / mp - a;
    let v_sigma = profile.v_m / Q::from_integer(profile.k_prime as i64 - 1) - a;
    if !(v_sigma > v_rho && v_rho > -a) {
        return Err(Error::HypothesisViolated(format!(
            "radius ordering fails: v_sigma = {v_sigma}, v_rho = {v_rho}, -A = {}",
            -a
        )));
    }
    Ok(DiscProfile { a, v_rho, v_sigma })
}

/// Precomputed `1/(λ(1-λ^n))` for `n = 1..=max_n`, each carrying `rel`
/// digits past its leading one.
///
/// Each `λ^n` is formed with a horizon extended by the closed-form valuation
/// of `1-λ^n`, so the quotient keeps a full `rel` digits even when the
/// divisor is tiny.
#[derive(Clone, Debug)]
pub struct SmallDivisors {
    inv: Vec<LaurentSeries>,
}

impl SmallDivisors {
    pub fn new(profile: &MultiplierProfile, max_n: u64, rel: i64) -> Result<Self> {
        let lambda = &profile.lambda;
        let ram = lambda.ram();
        let field = lambda.field();
        let one = LaurentSeries::one(field, ram);
        let extra = (1..=max_n).map(|n| ceil_units(profile.small_divisor(n), ram)).max().unwrap_or(0);
        let cap = extra + rel + 1;
        let lam = lambda.truncate(cap);
        let lam_inv = if lambda.is_exact() && lambda.len() == 1 { lambda.inv()? } else { lambda.inv_rel(rel)? };
        let mut inv = vec![LaurentSeries::exact_zero(field, ram)];
        let mut power = one.clone();
        for n in 1..=max_n {
            power = power.mul(&lam)?.truncate(cap);
            let d = one.sub(&power)?;
            let expected = profile.small_divisor(n);
            match d.valuation() {
                Valuation::Finite(v) if v == expected => {}
                Valuation::Finite(v) => {
                    return Err(Error::HypothesisViolated(format!(
                        "v(1-λ^{n}) = {v} disagrees with the closed form {expected}"
                    )))
                }
                _ => {
                    return Err(Error::PrecisionExhausted(format!(
                        "small divisor 1-λ^{n} vanishes modulo O(U^{})",
                        d.prec()
                    )))
                }
            }
            inv.push(d.inv_rel(rel)?.mul(&lam_inv)?.truncate_rel(rel));
        }
        Ok(Self { inv })
    }

    /// `1/(λ(1-λ^n))`.
    pub fn inverse(&self, n: u64) -> &LaurentSeries {
        &self.inv[n as usize]
    }

    pub fn max_n(&self) -> u64 {
        self.inv.len() as u64 - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffield::Field;

    fn lam(text: &str, p: u32, r: usize) -> LaurentSeries {
        LaurentSeries::parse_exact(text, &Field::builtin(p, r).unwrap(), 1).unwrap()
    }

    #[test]
    fn profile_examples() {
        let pr = mult_profile(&lam("1+T", 2, 1)).unwrap();
        assert_eq!((pr.m, pr.v_m, pr.k_prime), (1, Q::from_integer(1), 2));
        let pr = mult_profile(&lam("b+T", 2, 2)).unwrap();
        assert_eq!((pr.m, pr.v_m, pr.k_prime), (3, Q::from_integer(1), 4));
        let pr = mult_profile(&lam("2+T", 3, 1)).unwrap();
        assert_eq!((pr.m, pr.k_prime), (2, 3));
    }

    #[test]
    fn lambda_cubed_over_f4() {
        let f4 = Field::builtin(2, 2).unwrap();
        let l = LaurentSeries::parse_exact("b+T", &f4, 1).unwrap();
        let expected = LaurentSeries::parse_exact("1 + b^2*T + b*T^2 + T^3", &f4, 1).unwrap();
        assert_eq!(l.pow(3), expected);
    }

    #[test]
    fn screen_rejects_roots_of_unity() {
        assert_eq!(mult_profile(&lam("1", 2, 1)).unwrap_err(), Error::RootOfUnity);
        assert_eq!(mult_profile(&lam("b", 2, 2)).unwrap_err(), Error::RootOfUnity);
        let f3 = Field::builtin(3, 1).unwrap();
        let t = LaurentSeries::parse("2 + O(T^8)", &f3, 1, 8).unwrap();
        assert_eq!(mult_profile(&t).unwrap_err(), Error::RootOfUnityUndetermined);
        assert_eq!(mult_profile(&lam("T", 2, 1)).unwrap_err(), Error::NonUnitMultiplier);
    }

    #[test]
    fn closed_form_examples() {
        let pr = mult_profile(&lam("1+T", 2, 1)).unwrap();
        assert_eq!(pr.small_divisor(6), Q::from_integer(2));
        assert_eq!(pr.small_divisor(8), Q::from_integer(8));
        let pr3 = mult_profile(&lam("b+T", 2, 2)).unwrap();
        assert_eq!(pr3.small_divisor(5), Q::from_integer(0));
        assert_eq!(pr3.small_divisor(12), Q::from_integer(4));
    }

    #[test]
    fn direct_examples() {
        let l = lam("1+T", 2, 1);
        assert_eq!(small_divisor_direct(&l, 2).unwrap(), Valuation::Finite(Q::from_integer(2)));
        assert_eq!(small_divisor_direct(&l, 1).unwrap(), Valuation::Finite(Q::from_integer(1)));
        let l4 = lam("b+T", 2, 2);
        assert_eq!(small_divisor_direct(&l4, 3).unwrap(), Valuation::Finite(Q::from_integer(1)));
        let f2 = Field::builtin(2, 1).unwrap();
        let trunc = LaurentSeries::parse("1+T+O(T^4)", &f2, 1, 4).unwrap();
        assert_eq!(small_divisor_direct(&trunc, 8).unwrap(), Valuation::AtLeast(Q::from_integer(4)));
    }

    #[test]
    fn closed_form_matches_direct() {
        for (text, p, r) in [("1+T", 2, 1), ("b+T", 2, 2), ("2+T^2", 3, 1), ("3+T+T^3", 5, 1)] {
            let l = lam(text, p, r);
            let pr = mult_profile(&l).unwrap();
            for n in 1..=60 {
                assert_eq!(small_divisor_direct(&l, n).unwrap(), small_divisor_valuation(&pr, n), "{text} n={n}");
            }
        }
    }

    #[test]
    fn product_formula_examples() {
        let pr = mult_profile(&lam("1+T", 2, 1)).unwrap();
        assert_eq!(product_small_divisors(&pr, 3).unwrap().closed_form, Q::from_integer(16));
        assert_eq!(product_small_divisors(&pr, 1).unwrap().summed, Q::from_integer(2));
        let pr = mult_profile(&lam("1+T", 3, 1)).unwrap();
        assert_eq!(product_small_divisors(&pr, 2).unwrap().summed, Q::from_integer(15));
        let pr = mult_profile(&lam("b+T", 2, 2)).unwrap();
        assert!(matches!(product_small_divisors(&pr, 2), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn count_matches_brute_force() {
        for (text, p, r) in [("1+T", 2, 1), ("b+T", 2, 2), ("2+T", 3, 1), ("b+T", 3, 2), ("2+T", 5, 1), ("3+T", 7, 1)] {
            let pr = mult_profile(&lam(text, p, r)).unwrap();
            let (m, p) = (pr.m, pr.p);
            assert_eq!(pr.count_resonant(pr.k_prime - 1), 0);
            assert_eq!(pr.count_resonant(pr.k_prime), 1);
            assert_eq!(pr.count_resonant(pr.k_prime + m * p), 2);
            assert!(pr.k_prime - 1 < m * p);
            for k in 2..=10 * m * p {
                let brute = (1..=k).filter(|l| l % p == 0 && (l - 1) % m == 0).count() as u64;
                assert_eq!(pr.count_resonant(k), brute);
            }
        }
    }

    #[test]
    fn disc_profile_examples() {
        let g0 = Gauge { a: Q::from_integer(0), attained_at: 2 };
        let pr = mult_profile(&lam("1+T", 2, 1)).unwrap();
        let d = disc_profile(&pr, &g0).unwrap();
        assert_eq!((d.v_sigma, d.v_rho), (Q::from_integer(1), Q::new(1, 2)));
        let pr4 = mult_profile(&lam("b+T", 2, 2)).unwrap();
        let d = disc_profile(&pr4, &Gauge { a: Q::from_integer(0), attained_at: 4 }).unwrap();
        assert_eq!((d.v_rho, d.v_sigma), (Q::new(1, 6), Q::new(1, 3)));
        let d = disc_profile(&pr, &Gauge { a: Q::from_integer(1), attained_at: 2 }).unwrap();
        assert_eq!(d.v_sigma, Q::from_integer(0));
    }

    #[test]
    fn small_divisor_table_keeps_relative_precision() {
        let pr = mult_profile(&lam("1+T", 2, 1)).unwrap();
        let sd = SmallDivisors::new(&pr, 64, 32).unwrap();
        for n in 1..=64u64 {
            let x = sd.inverse(n);
            let v = -pr.small_divisor(n);
            assert_eq!(x.valuation(), Valuation::Finite(v));
            assert!(x.rel_precision().unwrap() >= 32);
        }
    }
}
