//! Power-series maps `f(x) = λx + Σ a_i x^i` over `F_q((U))`.
//!
//! Maps are finite coefficient tables, so the gauge
//! `A = min_i v(a_i)/(i-1)` (the valuation of `a = sup |a_i|^{1/(i-1)}`) is
//! always attained. [`PolyTable`] holds truncated power series in `x` with
//! Laurent-series coefficients and is used for conjugacies, compositions
//! and inverses.

use std::collections::BTreeMap;

use crate::coeffield::Field;
use crate::error::{Error, Result};
use crate::laurent::{LaurentSeries, Valuation, Q};
use crate::lucas::int_mod;

/// A polynomial dynamical system with an indifferent fixed point at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeriesMap {
    field: Field,
    ram: u32,
    coeffs: BTreeMap<usize, LaurentSeries>,
}

/// `A = min_{i ≥ 2} v(a_i)/(i-1)` together with the smallest degree attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gauge {
    pub a: Q,
    pub attained_at: usize,
}

impl PowerSeriesMap {
    /// Builds `λx + Σ a_i x^i`. Requires `v(λ) = 0` and nonlinear degrees `≥ 2`;
    /// exactly-zero coefficients are dropped.
    pub fn new(
        lambda: LaurentSeries,
        nonlinear: impl IntoIterator<Item = (usize, LaurentSeries)>,
    ) -> Result<Self> {
        match lambda.valuation() {
            Valuation::Finite(v) if v == Q::from_integer(0) => {}
            Valuation::Finite(_) => return Err(Error::NonUnitMultiplier),
            _ => return Err(Error::PrecisionExhausted("multiplier is zero to precision".into())),
        }
        let field = lambda.field().clone();
        let ram = lambda.ram();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(1, lambda);
        for (deg, c) in nonlinear {
            if deg < 2 {
                return Err(Error::InvalidArgument(format!(
                    "nonlinear term of degree {deg}; the multiplier is given separately"
                )));
            }
            if c.field() != &field || c.ram() != ram {
                return Err(Error::IncompatibleField);
            }
            if c.valuation() == Valuation::Infinite {
                continue;
            }
            if coeffs.insert(deg, c).is_some() {
                return Err(Error::InvalidArgument(format!("degree {deg} given twice")));
            }
        }
        Ok(Self { field, ram, coeffs })
    }

    /// Parses exact literals for `λ` and the nonlinear coefficients.
    pub fn from_literals(field: &Field, ram: u32, lambda: &str, terms: &[(usize, &str)]) -> Result<Self> {
        let lam = LaurentSeries::parse_exact(lambda, field, ram)?;
        let nl = terms
            .iter()
            .map(|(d, t)| Ok((*d, LaurentSeries::parse_exact(t, field, ram)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(lam, nl)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ram(&self) -> u32 {
        self.ram
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn lambda(&self) -> &LaurentSeries {
        &self.coeffs[&1]
    }

    pub fn coeff(&self, deg: usize) -> Option<&LaurentSeries> {
        self.coeffs.get(&deg)
    }

    /// Nonlinear terms in increasing degree.
    pub fn nonlinear(&self) -> impl Iterator<Item = (usize, &LaurentSeries)> {
        self.coeffs.range(2..).map(|(d, c)| (*d, c))
    }

    pub fn degree(&self) -> usize {
        *self.coeffs.keys().next_back().unwrap()
    }

    pub fn is_linear(&self) -> bool {
        self.coeffs.len() == 1
    }

    /// Lowest degree `i₀ ≥ 2` carrying a term.
    pub fn lowest_nonlinear_degree(&self) -> Option<usize> {
        self.nonlinear().next().map(|(d, _)| d)
    }

    /// Whether every nonlinear degree is divisible by `p` (the family whose
    /// conjugacies converge).
    pub fn in_p_divisible_family(&self) -> bool {
        let p = self.p() as usize;
        self.nonlinear().all(|(d, _)| d % p == 0)
    }

    /// Whether the map is exactly `λx + a_{p+1} x^{p+1}`.
    pub fn is_p_plus_one_binomial(&self) -> bool {
        let p = self.p() as usize;
        self.coeffs.len() == 2 && self.coeffs.contains_key(&(p + 1))
    }

    /// Same map with coefficients moved to a ramified tower / larger field.
    pub fn map_coeffs(&self, g: impl Fn(&LaurentSeries) -> Result<LaurentSeries>) -> Result<Self> {
        let lam = g(self.lambda())?;
        let nl = self.nonlinear().map(|(d, c)| Ok((d, g(c)?))).collect::<Result<Vec<_>>>()?;
        Self::new(lam, nl)
    }

    /// The gauge; `None` for a linear map.
    pub fn gauge(&self) -> Result<Option<Gauge>> {
        let mut best: Option<Gauge> = None;
        for (d, c) in self.nonlinear() {
            let v = c.valuation().finite().ok_or_else(|| {
                Error::PrecisionExhausted(format!("coefficient of degree {d} is zero to precision"))
            })?;
            let a = v / Q::from_integer(d as i64 - 1);
            if best.map_or(true, |b| a < b.a) {
                best = Some(Gauge { a, attained_at: d });
            }
        }
        Ok(best)
    }

    /// `f(x) = Σ a_i x^i` by Horner's rule.
    pub fn eval(&self, x: &LaurentSeries) -> Result<LaurentSeries> {
        let deg = self.degree();
        let mut acc = self.coeffs[&deg].clone();
        for d in (1..deg).rev() {
            acc = acc.mul(x)?;
            if let Some(c) = self.coeffs.get(&d) {
                acc = acc.add(c)?;
            }
        }
        acc.mul(x)
    }

    /// `f^{∘n}(x)`.
    pub fn iterate(&self, n: usize, x: &LaurentSeries) -> Result<LaurentSeries> {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.eval(&y)?;
        }
        Ok(y)
    }

    /// `f'(x) = Σ i a_i x^{i-1}` with each `i` reduced mod `p`.
    pub fn derivative_at(&self, x: &LaurentSeries) -> Result<LaurentSeries> {
        let p = self.p();
        let mut acc = LaurentSeries::exact_zero(&self.field, self.ram);
        for (&d, c) in self.coeffs.iter().rev() {
            let m = int_mod(d as i64, p);
            if m == 0 {
                continue;
            }
            let term = c.scale_int(m as i64).mul(&x.pow(d as u64 - 1))?;
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// The map as a coefficient table truncated at degree `degree`.
    pub fn to_table(&self, degree: usize) -> PolyTable {
        let mut t = PolyTable::zero(&self.field, self.ram, degree);
        for (&d, c) in self.coeffs.range(..=degree) {
            t.coeffs[d] = c.clone();
        }
        t
    }
}

/// Truncated power series `Σ_{k ≤ D} c_k x^k` (known modulo `x^{D+1}`).
#[derive(Clone, Debug, PartialEq)]
pub struct PolyTable {
    field: Field,
    ram: u32,
    coeffs: Vec<LaurentSeries>,
}

impl PolyTable {
    pub fn zero(field: &Field, ram: u32, degree: usize) -> Self {
        Self { field: field.clone(), ram, coeffs: vec![LaurentSeries::exact_zero(field, ram); degree + 1] }
    }

    /// `x` modulo `x^{D+1}`.
    pub fn identity(field: &Field, ram: u32, degree: usize) -> Self {
        let mut t = Self::zero(field, ram, degree);
        if degree >= 1 {
            t.coeffs[1] = LaurentSeries::one(field, ram);
        }
        t
    }

    pub fn from_coeffs(field: &Field, ram: u32, coeffs: Vec<LaurentSeries>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("empty coefficient table".into()));
        }
        if coeffs.iter().any(|c| c.field() != field || c.ram() != ram) {
            return Err(Error::IncompatibleField);
        }
        Ok(Self { field: field.clone(), ram, coeffs })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ram(&self) -> u32 {
        self.ram
    }

    /// Highest tracked degree `D`.
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &LaurentSeries {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[LaurentSeries] {
        &self.coeffs
    }

    pub fn set(&mut self, k: usize, c: LaurentSeries) {
        self.coeffs[k] = c;
    }

    pub fn truncate_degree(&self, degree: usize) -> Self {
        let mut out = self.clone();
        out.coeffs.truncate(degree + 1);
        out
    }

    /// Product modulo `x^{D+1}`; coefficient products keep at most `rel`
    /// digits when given.
    pub fn mul_trunc(&self, other: &Self, degree: usize, rel: Option<i64>) -> Result<Self> {
        let mut out = Self::zero(&self.field, self.ram, degree);
        let da = self.degree_bound().min(degree);
        for i in 0..=da {
            let a = &self.coeffs[i];
            if a.valuation() == Valuation::Infinite {
                continue;
            }
            let db = other.degree_bound().min(degree - i);
            for j in 0..=db {
                let b = &other.coeffs[j];
                if b.valuation() == Valuation::Infinite {
                    continue;
                }
                let mut t = a.mul(b)?;
                if let Some(r) = rel {
                    t = t.truncate_rel(r);
                }
                out.coeffs[i + j] = out.coeffs[i + j].add(&t)?;
            }
        }
        Ok(out)
    }

    /// `self ∘ inner` modulo `x^{D+1}`: accumulates `c_l · inner^l` with the
    /// powers of `inner` built incrementally. `inner` must have no constant term.
    pub fn compose(&self, inner: &PolyTable, degree: usize, rel: Option<i64>) -> Result<Self> {
        if inner.coeffs[0].valuation() != Valuation::Infinite {
            return Err(Error::InvalidArgument("inner series has a constant term".into()));
        }
        let mut out = Self::zero(&self.field, self.ram, degree);
        if self.coeffs[0].valuation() != Valuation::Infinite {
            out.coeffs[0] = self.coeffs[0].clone();
        }
        let mut power = Self::identity(&self.field, self.ram, degree).truncate_degree(0);
        power.coeffs[0] = LaurentSeries::one(&self.field, self.ram);
        let inner = inner.truncate_degree(degree.min(inner.degree_bound()));
        for l in 1..=self.degree_bound().min(degree) {
            power = power.mul_trunc(&inner, degree, rel)?;
            let c = &self.coeffs[l];
            if c.valuation() == Valuation::Infinite {
                continue;
            }
            for k in l..=degree {
                let pk = &power.coeffs[k];
                if pk.valuation() == Valuation::Infinite {
                    continue;
                }
                let mut t = c.mul(pk)?;
                if let Some(r) = rel {
                    t = t.truncate_rel(r);
                }
                out.coeffs[k] = out.coeffs[k].add(&t)?;
            }
        }
        Ok(out)
    }

    /// Compositional inverse modulo `x^{D+1}` by degree-by-degree
    /// back-substitution. Requires `c_0 = 0` and a unit `c_1`.
    pub fn invert(&self, degree: usize, rel: Option<i64>) -> Result<Self> {
        if self.coeffs[0].valuation() != Valuation::Infinite {
            return Err(Error::InvalidArgument("series to invert has a constant term".into()));
        }
        if self.degree_bound() < 1 {
            return Err(Error::InvalidArgument("series to invert has no linear term".into()));
        }
        let c1 = &self.coeffs[1];
        if c1.valuation() != Valuation::Finite(Q::from_integer(0)) {
            return Err(Error::NonUnitMultiplier);
        }
        let degree = degree.min(self.degree_bound());
        let rel_inv = rel.unwrap_or(i64::MAX);
        let c1_inv = if c1.is_exact() && c1.len() == 1 { c1.inv()? } else { c1.inv_rel(rel_inv)? };
        let zero = LaurentSeries::exact_zero(&self.field, self.ram);
        let mut h = vec![zero.clone(); degree + 1];
        if degree >= 1 {
            h[1] = c1_inv.clone();
        }
        // pw[l][k] = [x^k] h^l for l ≥ 1.
        let mut pw: Vec<Vec<LaurentSeries>> = vec![vec![zero.clone(); degree + 1]; degree + 1];
        if degree >= 1 {
            pw[1][1] = h[1].clone();
        }
        let trunc = |s: LaurentSeries| match rel {
            Some(r) => s.truncate_rel(r),
            None => s,
        };
        for k in 2..=degree {
            for l in 2..=k {
                let mut acc = zero.clone();
                for j in 1..=k - (l - 1) {
                    let a = &h[j];
                    let b = &pw[l - 1][k - j];
                    if a.valuation() == Valuation::Infinite || b.valuation() == Valuation::Infinite {
                        continue;
                    }
                    acc = acc.add(&trunc(a.mul(b)?))?;
                }
                pw[l][k] = acc;
            }
            let mut rhs = zero.clone();
            for l in 2..=k {
                let c = &self.coeffs[l];
                if c.valuation() == Valuation::Infinite || pw[l][k].valuation() == Valuation::Infinite {
                    continue;
                }
                rhs = rhs.add(&trunc(c.mul(&pw[l][k])?))?;
            }
            h[k] = trunc(rhs.neg().mul(&c1_inv)?);
            pw[1][k] = h[k].clone();
        }
        Ok(Self { field: self.field.clone(), ram: self.ram, coeffs: h })
    }

    /// `Σ_{k ≤ D} c_k x^k` by Horner's rule. The omitted tail is the
    /// caller's responsibility (see the tail bounds in `schroder`).
    pub fn eval(&self, x: &LaurentSeries) -> Result<LaurentSeries> {
        let mut acc = self.coeffs[self.degree_bound()].clone();
        for k in (0..self.degree_bound()).rev() {
            acc = acc.mul(x)?.add(&self.coeffs[k])?;
        }
        Ok(acc)
    }

    /// Whether the two tables agree on every digit both know, degree by degree.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a.agrees_with(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::EXACT;

    fn field(p: u32) -> Field {
        Field::builtin(p, 1).unwrap()
    }

    fn ex(t: &str, f: &Field) -> LaurentSeries {
        LaurentSeries::parse_exact(t, f, 1).unwrap()
    }

    #[test]
    fn gauge_examples() {
        let f2 = field(2);
        let m = PowerSeriesMap::from_literals(&f2, 1, "1+T", &[(2, "1")]).unwrap();
        assert_eq!(m.gauge().unwrap(), Some(Gauge { a: Q::from_integer(0), attained_at: 2 }));
        let m = PowerSeriesMap::from_literals(&f2, 1, "1+T", &[(3, "T")]).unwrap();
        assert_eq!(m.gauge().unwrap(), Some(Gauge { a: Q::new(1, 2), attained_at: 3 }));
        let m = PowerSeriesMap::from_literals(&f2, 1, "1+T", &[(2, "T^-1"), (4, "1")]).unwrap();
        assert_eq!(m.gauge().unwrap(), Some(Gauge { a: Q::from_integer(-1), attained_at: 2 }));
        let lin = PowerSeriesMap::from_literals(&f2, 1, "1+T", &[]).unwrap();
        assert_eq!(lin.gauge().unwrap(), None);
    }

    #[test]
    fn gauge_dominates_every_coefficient() {
        let f3 = field(3);
        let m = PowerSeriesMap::from_literals(&f3, 1, "2+T", &[(2, "T^3"), (3, "T^-2+1"), (6, "T")]).unwrap();
        let g = m.gauge().unwrap().unwrap();
        for (d, c) in m.nonlinear() {
            let v = c.valuation().finite().unwrap();
            assert!(v >= g.a * Q::from_integer(d as i64 - 1));
        }
        let v = m.coeff(g.attained_at).unwrap().valuation().finite().unwrap();
        assert_eq!(v, g.a * Q::from_integer(g.attained_at as i64 - 1));
    }

    #[test]
    fn non_unit_multiplier_rejected() {
        let f2 = field(2);
        assert_eq!(PowerSeriesMap::from_literals(&f2, 1, "T", &[]).unwrap_err(), Error::NonUnitMultiplier);
        assert!(PowerSeriesMap::from_literals(&f2, 1, "1", &[(1, "1")]).is_err());
    }

    #[test]
    fn eval_examples() {
        let f2 = field(2);
        let m = PowerSeriesMap::from_literals(&f2, 1, "1+T", &[(2, "1")]).unwrap();
        assert_eq!(m.eval(&ex("T", &f2)).unwrap(), ex("T", &f2));
        assert_eq!(m.eval(&LaurentSeries::exact_zero(&f2, 1)).unwrap().valuation(), Valuation::Infinite);
        let f3 = field(3);
        let m = PowerSeriesMap::from_literals(&f3, 1, "1+T", &[(3, "1")]).unwrap();
        assert_eq!(m.eval(&ex("T", &f3)).unwrap(), ex("T+T^2+T^3", &f3));
    }

    #[test]
    fn iterate_examples() {
        let f2 = field(2);
        let m = PowerSeriesMap::from_literals(&f2, 1, "1+T", &[(2, "1")]).unwrap();
        let x = ex("T^3+T^5", &f2);
        assert_eq!(m.iterate(0, &x).unwrap(), x);
        assert_eq!(m.iterate(5, &ex("T", &f2)).unwrap(), ex("T", &f2));
        let lin = PowerSeriesMap::from_literals(&f2, 1, "1+T", &[]).unwrap();
        let lam = ex("1+T", &f2);
        assert_eq!(lin.iterate(3, &x).unwrap(), lam.pow(3).mul(&x).unwrap());
    }

    #[test]
    fn derivative_examples() {
        let f2 = field(2);
        let m = PowerSeriesMap::from_literals(&f2, 1, "1+T", &[(2, "T^-1+1"), (4, "T")]).unwrap();
        assert_eq!(m.derivative_at(&ex("T^2+1", &f2)).unwrap(), ex("1+T", &f2));
        let f3 = field(3);
        let m = PowerSeriesMap::from_literals(&f3, 1, "1+T", &[(2, "1")]).unwrap();
        // λ + 2 a_2 T
        assert_eq!(m.derivative_at(&ex("T", &f3)).unwrap(), ex("1+T+2*T", &f3));
    }

    #[test]
    fn compose_examples() {
        let f2 = field(2);
        let f3 = field(3);
        for f in [&f2, &f3] {
            let m = PowerSeriesMap::from_literals(f, 1, "1+T", &[(2, "T^2+1")]).unwrap();
            let id = PolyTable::identity(f, 1, 3);
            assert_eq!(id.compose(&m.to_table(3), 3, None).unwrap(), m.to_table(3));
            let mut sq = PolyTable::zero(f, 1, 3);
            sq.set(2, LaurentSeries::one(f, 1));
            let c = sq.compose(&m.to_table(3), 3, None).unwrap();
            let lam = ex("1+T", f);
            let a2 = ex("T^2+1", f);
            assert_eq!(c.coeff(2), &lam.pow(2));
            assert_eq!(c.coeff(3), &lam.mul(&a2).unwrap().scale_int(2));
            if f.p() == 2 {
                assert_eq!(c.coeff(3).valuation(), Valuation::Infinite);
            }
        }
    }

    #[test]
    fn compose_is_associative_on_truncations() {
        let f3 = field(3);
        let m = PowerSeriesMap::from_literals(&f3, 1, "2+T", &[(2, "T"), (3, "1+T^-1")]).unwrap();
        let ft = m.to_table(8);
        let g = PowerSeriesMap::from_literals(&f3, 1, "1", &[(2, "T^2"), (4, "2")]).unwrap().to_table(8);
        let lhs = g.compose(&ft, 8, None).unwrap().compose(&ft, 8, None).unwrap();
        let ff = ft.compose(&ft, 8, None).unwrap();
        let rhs = g.compose(&ff, 8, None).unwrap();
        assert_eq!(lhs, rhs);
    }

    /// Lagrange-style oracle: coefficients of the inverse of `x + b x^2` over
    /// the integers are `(-1)^{k-1} Catalan(k-1) b^{k-1}`.
    #[test]
    fn invert_matches_catalan_oracle() {
        let catalan = [1i64, 1, 2, 5, 14, 42, 132, 429];
        for p in [3u32, 5, 7] {
            let f = field(p);
            let b = ex("T^-1+2", &f);
            let mut g = PolyTable::identity(&f, 1, 8);
            g.set(2, b.clone());
            let h = g.invert(8, None).unwrap();
            for k in 1..=8usize {
                let sign = if (k - 1) % 2 == 0 { 1 } else { -1 };
                let expected = b.pow(k as u64 - 1).scale_int(sign * catalan[k - 1]);
                assert_eq!(h.coeff(k), &expected, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn invert_round_trips() {
        let f2 = field(2);
        let id = PolyTable::identity(&f2, 1, 6);
        assert_eq!(id.invert(6, None).unwrap(), id);
        let mut g = PolyTable::identity(&f2, 1, 10);
        g.set(1, ex("1+T", &f2));
        g.set(2, ex("T^-1", &f2));
        g.set(5, ex("1+T^3", &f2));
        let h = g.invert(10, Some(40)).unwrap();
        let back = h.invert(10, Some(40)).unwrap();
        assert!(back.agrees_with(&g));
        let comp = g.compose(&h, 10, Some(40)).unwrap();
        assert!(comp.agrees_with(&PolyTable::identity(&f2, 1, 10)));
        for k in 2..=10 {
            assert!(comp.coeff(k).is_zero());
            assert!(comp.coeff(k).prec() < EXACT);
        }
    }
}
