//! Formal solutions of the Schröder equation `g∘f = λg`, `g(x) = x + Σ b_k x^k`.
//!
//! Three independent routes compute the coefficients:
//!
//! * [`solve_sfe`] matches coefficients of `g∘f` and `λg` degree by degree,
//!   `b_k = Σ_{l<k} b_l [f^l]_k / (λ(1-λ^{k-1}))`;
//! * [`solve_sfe_multinomial`] expands `[f^l]_k` over the integer solutions of
//!   `Σ α_i = l`, `Σ i α_i = k`, with multinomials reduced mod `p`;
//! * [`solve_specialized_p_plus_1`] runs the sparse recursion for
//!   `λx + a x^{p+1}`, where only the degrees `jp+1` survive.
//!
//! The module also checks the structure and size of the coefficients,
//! certifies divergence for `λx + a x^{p+1}` with `|1-λ| < 1`, and measures
//! conjugacy residuals at points of the certified discs.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::{ceil_units, LaurentSeries, Valuation, EXACT, Q};
use crate::lucas::{binomial_mod_p, multinomial_mod_p};
use crate::multiplier::{disc_profile, mult_profile, DiscProfile, MultiplierProfile, SmallDivisors};
use crate::powerseries::{Gauge, PolyTable, PowerSeriesMap};

/// What is known about a coefficient being zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroKind {
    /// Proven zero, by a structure lemma or by exact arithmetic.
    Structural,
    /// All known digits vanish; the valuation is only bounded below.
    ComputedZero,
    Nonzero,
}

impl ZeroKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ZeroKind::Structural => "structural",
            ZeroKind::ComputedZero => "computed-zero",
            ZeroKind::Nonzero => "nonzero",
        }
    }

    fn of(s: &LaurentSeries) -> Self {
        match s.valuation() {
            Valuation::Infinite => ZeroKind::Structural,
            Valuation::AtLeast(_) => ZeroKind::ComputedZero,
            Valuation::Finite(_) => ZeroKind::Nonzero,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverSource {
    TermMatching,
    Multinomial,
    Specialized,
}

/// Solver settings. `rel` is the number of digits kept past the leading one
/// in every coefficient; `structural_zeros` lets the term-matching solver
/// skip degrees that a structure lemma proves to vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub rel: i64,
    pub structural_zeros: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { rel: 64, structural_zeros: true }
    }
}

impl SolveOptions {
    pub fn with_rel(rel: i64) -> Self {
        Self { rel, ..Self::default() }
    }
}

/// The normalized conjugacy `g`, truncated at degree `D`.
#[derive(Clone, Debug)]
pub struct Conjugacy {
    coeffs: Vec<LaurentSeries>,
    zero_kind: Vec<ZeroKind>,
    profile: MultiplierProfile,
    source: SolverSource,
}

impl Conjugacy {
    fn assemble(coeffs: Vec<LaurentSeries>, structural: Vec<bool>, profile: MultiplierProfile, source: SolverSource) -> Self {
        let zero_kind = coeffs
            .iter()
            .zip(&structural)
            .map(|(c, &s)| if s { ZeroKind::Structural } else { ZeroKind::of(c) })
            .collect();
        Self { coeffs, zero_kind, profile, source }
    }

    /// Highest computed degree `D`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `b_k` for `1 ≤ k ≤ D` (`b_0 = 0`).
    pub fn coeff(&self, k: usize) -> &LaurentSeries {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[LaurentSeries] {
        &self.coeffs
    }

    pub fn zero_kind(&self, k: usize) -> ZeroKind {
        self.zero_kind[k]
    }

    pub fn valuation(&self, k: usize) -> Valuation {
        match self.zero_kind[k] {
            ZeroKind::Structural => Valuation::Infinite,
            _ => self.coeffs[k].valuation(),
        }
    }

    pub fn profile(&self) -> &MultiplierProfile {
        &self.profile
    }

    pub fn source(&self) -> SolverSource {
        self.source
    }

    /// `g` as a coefficient table (degree 0 entry is zero).
    pub fn to_table(&self) -> PolyTable {
        let field = self.coeffs[1].field();
        PolyTable::from_coeffs(field, self.coeffs[1].ram(), self.coeffs.clone()).expect("consistent coefficients")
    }

    /// Growth table `k,v_num,v_den,zero_kind` for `k = 1..=D`. Proven zeros
    /// print `inf`; computed zeros print their lower bound.
    pub fn growth_csv(&self) -> String {
        let mut out = String::from("k,v_num,v_den,zero_kind\n");
        for k in 1..=self.degree() {
            let (num, den) = match self.valuation(k) {
                Valuation::Finite(q) | Valuation::AtLeast(q) => (q.numer().to_string(), q.denom().to_string()),
                Valuation::Infinite => ("inf".to_string(), "inf".to_string()),
            };
            let _ = writeln!(out, "{k},{num},{den},{}", self.zero_kind[k].as_str());
        }
        out
    }

    /// Whether two solutions agree: same zero pattern up to precision, same
    /// valuations where both are nonzero, and equal digits wherever both
    /// coefficients are known.
    pub fn agrees_with(&self, other: &Conjugacy) -> bool {
        let d = self.degree().min(other.degree());
        (1..=d).all(|k| {
            let (a, b) = (&self.coeffs[k], &other.coeffs[k]);
            let vals = match (self.valuation(k), other.valuation(k)) {
                (Valuation::Finite(x), Valuation::Finite(y)) => x == y,
                (Valuation::Finite(_), _) | (_, Valuation::Finite(_)) => false,
                _ => true,
            };
            vals && a.agrees_with(b)
        })
    }
}

/// Keeps an exact zero exact while dropping digits at or beyond `h`.
fn cap(s: LaurentSeries, h: i64) -> LaurentSeries {
    if s.valuation() == Valuation::Infinite {
        s
    } else {
        s.truncate(h)
    }
}

fn is_exact_zero(s: &LaurentSeries) -> bool {
    s.valuation() == Valuation::Infinite
}

/// Lowest nonlinear degree, or `None` for a linear map.
fn first_nonzero(f: &PowerSeriesMap) -> Option<usize> {
    f.lowest_nonlinear_degree()
}

/// Whether `b_k` is forced to vanish: below the first nonlinear degree, or
/// off the multiples of `p` for a map with only `p`-divisible nonlinear terms.
pub fn is_structural_zero(f: &PowerSeriesMap, k: usize) -> bool {
    if k < 2 {
        return false;
    }
    match first_nonzero(f) {
        None => true,
        Some(i0) if k < i0 => true,
        _ => f.in_p_divisible_family() && k % f.p() as usize != 0,
    }
}

fn gauge_or_zero(f: &PowerSeriesMap) -> Result<Q> {
    Ok(f.gauge()?.map_or(Q::from_integer(0), |g| g.a))
}

fn zero_vec(f: &PowerSeriesMap, d: usize) -> Vec<LaurentSeries> {
    vec![LaurentSeries::exact_zero(f.field(), f.ram()); d + 1]
}

/// Term-matching solver.
pub fn solve_sfe(f: &PowerSeriesMap, degree: usize, opts: SolveOptions) -> Result<Conjugacy> {
    let profile = mult_profile(f.lambda())?;
    if degree < 1 {
        return Err(Error::InvalidArgument("degree must be ≥ 1".into()));
    }
    let rel = opts.rel;
    let ram = f.ram();
    let a = gauge_or_zero(f)?;
    let sd = SmallDivisors::new(&profile, degree as u64 - 1, rel)?;
    // [f^l]_j carries digits up to (j-l)A + rel, the scale its terms live on.
    let row_cap = |l: usize, j: usize| ceil_units(a * Q::from_integer(j as i64 - l as i64), ram).saturating_add(rel);

    let terms: Vec<(usize, LaurentSeries)> = std::iter::once((1, f.lambda().clone()))
        .chain(f.nonlinear().map(|(d, c)| (d, c.clone())))
        .collect();
    let mut b = zero_vec(f, degree);
    let mut structural = vec![false; degree + 1];
    b[1] = LaurentSeries::one(f.field(), ram);
    let mut row = zero_vec(f, degree);
    for (d, c) in &terms {
        if *d <= degree {
            row[*d] = cap(c.clone(), row_cap(1, *d));
        }
    }
    let mut acc = zero_vec(f, degree);
    for j in 2..=degree {
        acc[j] = row[j].clone();
    }
    let p = f.p() as usize;
    // Rows f^l with l ≤ D/p are kept for the Frobenius step f^{pl} = (f^l)^p.
    let mut kept: Vec<Vec<LaurentSeries>> = vec![Vec::new(), row.clone()];
    for k in 2..=degree {
        if opts.structural_zeros && is_structural_zero(f, k) {
            structural[k] = true;
        } else {
            b[k] = acc[k].mul(sd.inverse(k as u64 - 1))?.truncate_rel(rel);
        }
        let mut next = zero_vec(f, degree);
        if k % p == 0 {
            let base = &kept[k / p];
            for j in (k / p)..=degree / p {
                if !is_exact_zero(&base[j]) {
                    next[j * p] = cap(base[j].frobenius(), row_cap(k, j * p));
                }
            }
        } else {
            for j in k..=degree {
                let mut s = LaurentSeries::exact_zero(f.field(), ram);
                for (d, c) in &terms {
                    if *d > j - (k - 1) {
                        break;
                    }
                    let prev = &row[j - d];
                    if is_exact_zero(prev) {
                        continue;
                    }
                    s = s.add(&c.mul(prev)?)?;
                }
                next[j] = cap(s, row_cap(k, j));
            }
        }
        row = next;
        if k * p <= degree {
            kept.push(row.clone());
        }
        if is_exact_zero(&b[k]) {
            continue;
        }
        for j in k + 1..=degree {
            if !is_exact_zero(&row[j]) {
                acc[j] = acc[j].add(&b[k].mul(&row[j])?)?;
            }
        }
    }
    Ok(Conjugacy::assemble(b, structural, profile, SolverSource::TermMatching))
}

/// Enumerates `α` over the support degrees with `Σ α = l`, `Σ d·α = k`.
fn compositions(support: &[usize], l: u64, k: u64, out: &mut Vec<Vec<u64>>) {
    fn rec(support: &[usize], i: usize, l: u64, k: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i == support.len() {
            if l == 0 && k == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let d = support[i] as u64;
        for t in 0..=l.min(k / d) {
            cur.push(t);
            rec(support, i + 1, l - t, k - t * d, cur, out);
            cur.pop();
        }
    }
    rec(support, 0, l, k, &mut Vec::new(), out);
}

/// Multinomial-expansion solver (independent of [`solve_sfe`]).
pub fn solve_sfe_multinomial(f: &PowerSeriesMap, degree: usize, rel: i64) -> Result<Conjugacy> {
    let profile = mult_profile(f.lambda())?;
    if degree < 1 {
        return Err(Error::InvalidArgument("degree must be ≥ 1".into()));
    }
    let p = f.p();
    let ram = f.ram();
    let terms: Vec<(usize, LaurentSeries)> = std::iter::once((1, f.lambda().clone()))
        .chain(f.nonlinear().filter(|(d, _)| *d <= degree).map(|(d, c)| (d, c.clone())))
        .collect();
    let support: Vec<usize> = terms.iter().map(|t| t.0).collect();
    // powers[i][t] = (coefficient i)^t to relative precision rel
    let mut powers: Vec<Vec<LaurentSeries>> = Vec::new();
    for (_, c) in &terms {
        let mut v = vec![LaurentSeries::one(f.field(), ram)];
        for t in 1..=degree {
            let next = v[t - 1].mul(c)?;
            v.push(if next.is_exact() && next.len() as i64 <= rel { next } else { next.truncate_rel(rel) });
        }
        powers.push(v);
    }
    let mut b = zero_vec(f, degree);
    b[1] = LaurentSeries::one(f.field(), ram);
    let lam = f.lambda();
    let lam_inv = if lam.is_exact() && lam.len() == 1 { lam.inv()? } else { lam.inv_rel(rel)? };
    let one = LaurentSeries::one(f.field(), ram);
    let mut alphas = Vec::new();
    for k in 2..=degree {
        let mut sum = LaurentSeries::exact_zero(f.field(), ram);
        for l in 1..k {
            if is_exact_zero(&b[l]) {
                continue;
            }
            alphas.clear();
            compositions(&support, l as u64, k as u64, &mut alphas);
            for alpha in &alphas {
                let c = multinomial_mod_p(alpha, p);
                if c == 0 {
                    continue;
                }
                let mut prod = b[l].scale_int(c as i64);
                for (i, &t) in alpha.iter().enumerate() {
                    if t > 0 {
                        prod = prod.mul(&powers[i][t as usize])?.truncate_rel(rel);
                    }
                }
                sum = sum.add(&prod)?;
            }
        }
        if is_exact_zero(&sum) {
            continue;
        }
        // Small divisor from its own power, with the horizon widened by the
        // closed-form valuation so the quotient keeps rel digits.
        let n = k as u64 - 1;
        let extra = ceil_units(profile.small_divisor(n), ram);
        let d = one.sub(&lam.pow_capped(n, extra + rel + 1))?;
        b[k] = sum.mul(&d.inv_rel(rel)?)?.mul(&lam_inv)?.truncate_rel(rel);
    }
    let structural = vec![false; degree + 1];
    Ok(Conjugacy::assemble(b, structural, profile, SolverSource::Multinomial))
}

/// Sparse recursion for `f = λx + a x^{p+1}`:
/// `b_{jp+1} = Σ_{i=⌈(j-1)/(p+1)⌉}^{j-1} b_{ip+1} C(ip+1, j-i) λ^{ip+1-(j-i)} a^{j-i} / (λ(1-λ^{jp}))`.
pub fn solve_specialized_p_plus_1(f: &PowerSeriesMap, jmax: usize, rel: i64) -> Result<Conjugacy> {
    if !f.is_p_plus_one_binomial() {
        return Err(Error::ShapeMismatch("expected λx + a x^(p+1)".into()));
    }
    let profile = mult_profile(f.lambda())?;
    let p = f.p() as usize;
    let ram = f.ram();
    let degree = jmax * p + 1;
    let a = f.coeff(p + 1).expect("checked shape");
    let lam = f.lambda();
    let trunc = |s: LaurentSeries| if s.is_exact() && s.len() as i64 <= rel { s } else { s.truncate_rel(rel) };
    let mut lam_pow = vec![LaurentSeries::one(f.field(), ram)];
    for t in 1..=degree {
        lam_pow.push(trunc(lam_pow[t - 1].mul(lam)?));
    }
    let mut a_pow = vec![LaurentSeries::one(f.field(), ram)];
    for t in 1..=jmax {
        a_pow.push(trunc(a_pow[t - 1].mul(a)?));
    }
    let sd = SmallDivisors::new(&profile, (jmax * p) as u64, rel)?;
    let mut b = zero_vec(f, degree);
    let mut structural = vec![true; degree + 1];
    structural[0] = false;
    b[1] = LaurentSeries::one(f.field(), ram);
    structural[1] = false;
    for j in 1..=jmax {
        let lo = (j - 1).div_ceil(p + 1);
        let mut sum = LaurentSeries::exact_zero(f.field(), ram);
        for i in lo..j {
            let bi = &b[i * p + 1];
            if is_exact_zero(bi) {
                continue;
            }
            let t = j - i;
            let c = binomial_mod_p((i * p + 1) as u64, t as u64, p as u32);
            if c == 0 {
                continue;
            }
            let term = bi.scale_int(c as i64).mul(&lam_pow[i * p + 1 - t])?.mul(&a_pow[t])?;
            sum = sum.add(&trunc(term))?;
        }
        b[j * p + 1] = sum.mul(sd.inverse((j * p) as u64))?.truncate_rel(rel);
        structural[j * p + 1] = false;
    }
    Ok(Conjugacy::assemble(b, structural, profile, SolverSource::Specialized))
}

/// Outcome of the structural-zero check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructuralZeroReport {
    pub applicable: bool,
    pub checked_up_to: usize,
    pub violations: Vec<usize>,
}

/// For `p`-divisible families, lists every `k > 1`, `p ∤ k`, whose `b_k` is
/// known to be nonzero (the list must be empty).
pub fn check_structural_zeros(g: &Conjugacy, f: &PowerSeriesMap) -> StructuralZeroReport {
    if !f.in_p_divisible_family() {
        return StructuralZeroReport { applicable: false, checked_up_to: g.degree(), violations: Vec::new() };
    }
    let p = f.p() as usize;
    let violations = (2..=g.degree()).filter(|k| k % p != 0 && g.zero_kind(*k) == ZeroKind::Nonzero).collect();
    StructuralZeroReport { applicable: true, checked_up_to: g.degree(), violations }
}

/// Lower bound `(k-1)A - v_m·count(k)` on `v(b_k)` for `p`-divisible families.
pub fn coefficient_bound(profile: &MultiplierProfile, a: Q, k: u64) -> Q {
    a * Q::from_integer(k as i64 - 1) - profile.v_m * Q::from_integer(profile.count_resonant(k) as i64)
}

/// One row of the coefficient-bound report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundRow {
    pub k: usize,
    pub bound: Q,
    pub valuation: Valuation,
    /// `v(b_k) - bound`; for a computed zero a lower bound on it, `None` for proven zeros.
    pub margin: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    /// Degrees where the bound fails or cannot be confirmed at this precision.
    pub violations: Vec<usize>,
}

impl BoundReport {
    pub fn margin_at(&self, k: usize) -> Option<Q> {
        self.rows.iter().find(|r| r.k == k).and_then(|r| r.margin)
    }
}

/// Checks `v(b_k) ≥ (k-1)A - v_m·count(k)` for every computed `k ≥ 2`.
pub fn check_coefficient_bound(g: &Conjugacy, gauge: &Gauge) -> BoundReport {
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for k in 2..=g.degree() {
        let bound = coefficient_bound(g.profile(), gauge.a, k as u64);
        let valuation = g.valuation(k);
        let margin = valuation.lower_bound().map(|v| v - bound);
        if matches!(margin, Some(m) if m < Q::from_integer(0)) {
            violations.push(k);
        }
        rows.push(BoundRow { k, bound, valuation, margin });
    }
    BoundReport { rows, violations }
}

/// Verdict of the divergence analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceVerdict {
    /// `limsup |b_k|^{1/k} = ∞`, proven from the exact valuations.
    Diverges,
    /// `m > 1`: growth data only.
    Conjectural,
    /// Some computed value disagreed with the prediction.
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceRow {
    pub n: u32,
    pub degree: usize,
    pub computed: Valuation,
    pub predicted: Option<Q>,
    /// `v(b_{p^N+1}) / (p^N+1)`.
    pub slope: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceCertificate {
    pub p: u64,
    pub m: u64,
    pub rows: Vec<DivergenceRow>,
    pub verdict: DivergenceVerdict,
    /// Agreement of the generic solver on every listed degree, when requested.
    pub generic_agrees: Option<bool>,
}

/// `v(b_{p^N+1}) = p^{N-1} v(a) - v_1 p^N (1 + (p-1)(N-1)/p)` for `m = 1`.
pub fn predicted_divergence_valuation(p: u64, v_a: Q, v_1: Q, n: u32) -> Q {
    let pq = Q::from_integer(p as i64);
    let pn = Q::from_integer((p as i64).pow(n));
    let j = Q::from_integer((p as i64).pow(n - 1));
    j * v_a - v_1 * pn * (Q::from_integer(1) + (pq - 1) * Q::from_integer(n as i64 - 1) / pq)
}

/// Divergence certificate for `λx + a x^{p+1}` at `N = 1..=n_max`.
/// With `cross_check` the generic solver is also run to degree `p^{n_max}+1`.
pub fn certify_divergence(f: &PowerSeriesMap, n_max: u32, rel: i64, cross_check: bool) -> Result<DivergenceCertificate> {
    if !f.is_p_plus_one_binomial() {
        return Err(Error::ShapeMismatch("expected λx + a x^(p+1)".into()));
    }
    if n_max < 1 {
        return Err(Error::InvalidArgument("N_max must be ≥ 1".into()));
    }
    let p = f.p() as u64;
    let jmax = p.pow(n_max - 1) as usize;
    let g = solve_specialized_p_plus_1(f, jmax, rel)?;
    let profile = g.profile().clone();
    let v_a = f.coeff(p as usize + 1).unwrap().valuation().finite().expect("nonzero coefficient");
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let degree = p.pow(n) as usize + 1;
        let computed = g.valuation(degree);
        let predicted = (profile.m == 1).then(|| predicted_divergence_valuation(p, v_a, profile.v_m, n));
        let slope = computed.finite().map(|v| v / Q::from_integer(degree as i64));
        rows.push(DivergenceRow { n, degree, computed, predicted, slope });
    }
    let verdict = if profile.m != 1 {
        DivergenceVerdict::Conjectural
    } else {
        let exact = rows.iter().all(|r| r.predicted.is_some() && r.computed == Valuation::Finite(r.predicted.unwrap()));
        let decreasing = rows.windows(2).all(|w| matches!((w[0].slope, w[1].slope), (Some(a), Some(b)) if b < a));
        if exact && decreasing {
            DivergenceVerdict::Diverges
        } else {
            DivergenceVerdict::Failed
        }
    };
    let generic_agrees = if cross_check {
        let top = p.pow(n_max) as usize + 1;
        let h = solve_sfe(f, top, SolveOptions { rel, structural_zeros: false })?;
        Some(rows.iter().all(|r| h.valuation(r.degree) == r.computed) && h.agrees_with(&g))
    } else {
        None
    };
    Ok(DivergenceCertificate { p, m: profile.m, rows, verdict, generic_agrees })
}

/// Disc data of a `p`-divisible map: profile, gauge and radii.
pub fn disc_data(f: &PowerSeriesMap) -> Result<(MultiplierProfile, Option<Gauge>, Option<DiscProfile>)> {
    let profile = mult_profile(f.lambda())?;
    let gauge = f.gauge()?;
    let dp = match &gauge {
        Some(g) => Some(disc_profile(&profile, g)?),
        None => None,
    };
    Ok((profile, gauge, dp))
}

/// Lower bound on `v(Σ_{k>D} b_k x^k)` for `v(x) = v_x ≥ v_ρ` in a
/// `p`-divisible family. The bound `F(k) = (k-1)A - v_m·count(k) + k·v_x`
/// grows by `mp(A+v_x) - v_m ≥ 0` per block of `mp` degrees, so its minimum
/// over `k > D` lies in `(D, D+mp]`.
pub fn conjugacy_tail_bound(profile: &MultiplierProfile, a: Q, degree: usize, v_x: Q) -> Option<Q> {
    let mp = profile.m * profile.p;
    let slope = Q::from_integer(mp as i64) * (a + v_x) - profile.v_m;
    if slope < Q::from_integer(0) {
        return None;
    }
    (degree as u64 + 1..=degree as u64 + mp)
        .map(|k| coefficient_bound(profile, a, k) + v_x * Q::from_integer(k as i64))
        .min()
}

/// Lower bound on `v(Σ_{k>D} c_k x^k)` for the inverse `g^{-1} = Σ c_k x^k`,
/// from `v(c_k) ≥ (1-k)v_σ`; needs `v_x > v_σ`.
pub fn inverse_tail_bound(v_sigma: Q, degree: usize, v_x: Q) -> Option<Q> {
    (v_x > v_sigma).then(|| Q::from_integer(degree as i64 + 1) * (v_x - v_sigma) + v_sigma)
}

fn tail_cap(s: LaurentSeries, tail: Option<Q>) -> LaurentSeries {
    match tail {
        Some(t) => {
            let h = ceil_units(t, s.ram());
            cap(s, h)
        }
        None => s,
    }
}

/// `g(x)` from the truncated table plus a certified tail bound.
fn eval_g(g: &PolyTable, x: &LaurentSeries, tail: Option<Q>) -> Result<LaurentSeries> {
    Ok(tail_cap(g.eval(x)?, tail))
}

fn family_gate(f: &PowerSeriesMap) -> Result<()> {
    if f.in_p_divisible_family() {
        Ok(())
    } else {
        Err(Error::HypothesisViolated("map has a nonlinear degree prime to p".into()))
    }
}

fn point_valuation(x: &LaurentSeries) -> Result<Option<Q>> {
    match x.valuation() {
        Valuation::Finite(v) => Ok(Some(v)),
        Valuation::Infinite => Ok(None),
        Valuation::AtLeast(_) => Err(Error::PrecisionExhausted("sample point is zero to precision".into())),
    }
}

/// `v(g(f(x)) - λg(x))` for `v(x) > v_ρ`; zero to precision when the
/// semi-conjugacy holds.
pub fn semiconjugacy_residual(f: &PowerSeriesMap, g: &Conjugacy, x: &LaurentSeries) -> Result<Valuation> {
    family_gate(f)?;
    let Some(v_x) = point_valuation(x)? else {
        return Ok(Valuation::Infinite);
    };
    let table = g.to_table();
    let lam = f.lambda();
    let fx = f.eval(x)?;
    let (tail_x, tail_fx) = match f.gauge()? {
        None => (None, None),
        Some(gauge) => {
            let dp = disc_profile(g.profile(), &gauge)?;
            if v_x <= dp.v_rho {
                return Err(Error::HypothesisViolated(format!("v(x) = {v_x} is not above v_rho = {}", dp.v_rho)));
            }
            let v_fx = point_valuation(&fx)?.unwrap_or(v_x);
            let t = |v| {
                conjugacy_tail_bound(g.profile(), gauge.a, g.degree(), v)
                    .ok_or_else(|| Error::HypothesisViolated("tail bound unavailable".into()))
            };
            (Some(t(v_x)?), Some(t(v_fx)?))
        }
    };
    let lhs = eval_g(&table, &fx, tail_fx)?;
    let rhs = lam.mul(&eval_g(&table, x, tail_x)?)?;
    Ok(lhs.sub(&rhs)?.valuation())
}

/// `v(g(f(g^{-1}(x))) - λx)` for `v(x) > v_σ`; zero to precision when the
/// full conjugacy holds.
pub fn full_conjugacy_residual(f: &PowerSeriesMap, g: &Conjugacy, x: &LaurentSeries) -> Result<Valuation> {
    family_gate(f)?;
    let Some(v_x) = point_valuation(x)? else {
        return Ok(Valuation::Infinite);
    };
    let table = g.to_table();
    let lam = f.lambda();
    let rel = x.rel_precision().unwrap_or(0).max(g.coeffs().iter().filter_map(|c| c.rel_precision()).max().unwrap_or(64));
    let inverse = table.invert(g.degree(), Some(rel))?;
    let Some(gauge) = f.gauge()? else {
        // g = x exactly.
        let y = f.eval(x)?;
        return Ok(y.sub(&lam.mul(x)?)?.valuation());
    };
    let dp = disc_profile(g.profile(), &gauge)?;
    let tail_inv = inverse_tail_bound(dp.v_sigma, g.degree(), v_x)
        .ok_or_else(|| Error::HypothesisViolated(format!("v(x) = {v_x} is not above v_sigma = {}", dp.v_sigma)))?;
    let y = tail_cap(inverse.eval(x)?, Some(tail_inv));
    // g^{-1} maps the open σ-disc onto itself isometrically.
    let fy = f.eval(&y)?;
    let v_fy = match fy.valuation() {
        Valuation::Finite(v) => v,
        _ => v_x,
    };
    let tail_g = conjugacy_tail_bound(g.profile(), gauge.a, g.degree(), v_fy)
        .ok_or_else(|| Error::HypothesisViolated("tail bound unavailable".into()))?;
    let lhs = eval_g(&table, &fy, Some(tail_g))?;
    Ok(lhs.sub(&lam.mul(x)?)?.valuation())
}

/// Verdict of the `b_{k'} = 0` extension check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ExtensionVerdict {
    /// The full conjugacy holds on at least the ρ-disc.
    Extended { k_double_prime: u64, checked_up_to: usize },
    NotApplicable { reason: String },
    /// The strict inequality `v(b_k) + k v_ρ > v_ρ` failed or could not be confirmed.
    Failed { k: usize },
}

/// When `b_{k'}` vanishes, checks `v(b_k) + k·v_ρ > v_ρ` for every computed
/// `k ≥ 2`, which makes `g` one-to-one on the ρ-disc.
pub fn check_bkprime_zero_extension(g: &Conjugacy, f: &PowerSeriesMap) -> Result<ExtensionVerdict> {
    if !f.in_p_divisible_family() {
        return Ok(ExtensionVerdict::NotApplicable { reason: "map is not in the p-divisible family".into() });
    }
    let pr = g.profile();
    let kp = pr.k_prime as usize;
    if g.degree() < kp {
        return Err(Error::InvalidArgument(format!("conjugacy solved only to degree {} < k' = {kp}", g.degree())));
    }
    if g.zero_kind(kp) != ZeroKind::Structural {
        return Ok(ExtensionVerdict::NotApplicable { reason: format!("b_{kp} is not a proven zero") });
    }
    let Some(gauge) = f.gauge()? else {
        return Ok(ExtensionVerdict::NotApplicable { reason: "linear map".into() });
    };
    let dp = disc_profile(pr, &gauge)?;
    for k in 2..=g.degree() {
        let ok = match g.valuation(k).lower_bound() {
            None => true,
            Some(v) => v + dp.v_rho * Q::from_integer(k as i64) > dp.v_rho,
        };
        if !ok {
            return Ok(ExtensionVerdict::Failed { k });
        }
    }
    Ok(ExtensionVerdict::Extended { k_double_prime: pr.k_prime + pr.m * pr.p, checked_up_to: g.degree() })
}

/// Smallest number of known digits past the lead among the nonzero coefficients.
pub fn min_relative_precision(g: &Conjugacy) -> i64 {
    g.coeffs().iter().filter(|c| !c.is_zero()).filter_map(|c| c.rel_precision()).min().unwrap_or(EXACT)
}
