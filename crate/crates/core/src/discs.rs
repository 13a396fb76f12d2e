//! Discs about the fixed point: Weierstrass data of a power series on a
//! disc, classification of the linearization disc, and indifferent periodic
//! points on its boundary sphere.
//!
//! For `h = Σ c_k x^k` converging on a disc of radius `r` (valuation `v_r`),
//! the quantity `min_k v(c_k) + k·v_r` is the valuation of `max |c_k| r^k`.
//! Its largest minimizer `d` is the Weierstrass degree on the closed disc,
//! its smallest minimizer `d'` the degree on the open disc.
//!
//! A periodic point on the sphere `S_σ` is found by substituting `x = π·u`
//! with `v(π) = v_σ`, reducing `f^{∘κ}(πu) - πu` to the residue field,
//! and Newton-lifting simple residue roots.

use serde::Serialize;

use crate::coeffield::{Field, FqElement};
use crate::error::{Error, Result};
use crate::laurent::{fmt_q, LaurentSeries, Valuation, EXACT, Q};
use crate::multiplier::{MultiplierProfile, DiscProfile};
use crate::powerseries::{Gauge, PolyTable, PowerSeriesMap};
use crate::schroder::{
    check_bkprime_zero_extension, check_coefficient_bound, check_structural_zeros, conjugacy_tail_bound,
    disc_data, solve_sfe, Conjugacy, ExtensionVerdict, SolveOptions, ZeroKind,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Open,
    Closed,
}

/// Whether the radius lies in the value group of `K = F_q((T))` or of a
/// ramified extension `F_q((T^{1/e}))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rationality {
    RationalInK,
    /// Smallest ramification index `e` making the radius rational.
    RationalInExtension(u64),
    /// Radius outside every `|F_q((T^{1/e}))^*|`. Rational valuations never
    /// produce it; it keeps the classification total.
    Irrational,
}

impl Rationality {
    pub fn of(v: Q) -> Self {
        match *v.denom() {
            1 => Rationality::RationalInK,
            d => Rationality::RationalInExtension(d as u64),
        }
    }
}

/// Disc `{ v(x) > v_radius }` (open) or `{ v(x) ≥ v_radius }` (closed) about 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Disc {
    pub v_radius: Q,
    pub boundary: Boundary,
    pub rationality: Rationality,
}

impl Disc {
    pub fn new(v_radius: Q, boundary: Boundary) -> Self {
        Self { v_radius, boundary, rationality: Rationality::of(v_radius) }
    }

    pub fn open(v_radius: Q) -> Self {
        Self::new(v_radius, Boundary::Open)
    }

    pub fn closed(v_radius: Q) -> Self {
        Self::new(v_radius, Boundary::Closed)
    }

    /// Whether the boundary sphere has points in the tower of ramification `e`.
    pub fn is_rational_in(&self, e: u32) -> bool {
        (e as i64) % *self.v_radius.denom() == 0
    }

    pub fn contains(&self, v: Valuation) -> bool {
        match (v, self.boundary) {
            (Valuation::Finite(q), Boundary::Open) => q > self.v_radius,
            (Valuation::Finite(q), Boundary::Closed) => q >= self.v_radius,
            (Valuation::Infinite, _) => true,
            (Valuation::AtLeast(q), Boundary::Open) => q > self.v_radius,
            (Valuation::AtLeast(q), Boundary::Closed) => q >= self.v_radius,
        }
    }
}

/// Lower bound on `inf_{k > D} v(c_k) + k·v_r` for the part of a series
/// beyond the computed degree `D`. `None` means no certified bound.
pub trait TailBound {
    fn tail_minimum(&self, degree: usize, v_r: Q) -> Option<Valuation>;
}

impl<F: Fn(usize, Q) -> Option<Valuation>> TailBound for F {
    fn tail_minimum(&self, degree: usize, v_r: Q) -> Option<Valuation> {
        self(degree, v_r)
    }
}

/// The tail of a polynomial: nothing beyond its degree.
pub struct NoTail;

impl TailBound for NoTail {
    fn tail_minimum(&self, _: usize, _: Q) -> Option<Valuation> {
        Some(Valuation::Infinite)
    }
}

/// Tail of a conjugacy from `v(b_k) ≥ (k-1)A - v_m·count(k)`, certified only
/// on discs no larger than the σ-disc.
pub struct ConjugacyTail<'a> {
    pub profile: &'a MultiplierProfile,
    pub a: Q,
    pub v_sigma: Q,
}

impl TailBound for ConjugacyTail<'_> {
    fn tail_minimum(&self, degree: usize, v_r: Q) -> Option<Valuation> {
        if v_r < self.v_sigma {
            return None;
        }
        conjugacy_tail_bound(self.profile, self.a, degree, v_r).map(Valuation::Finite)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassData {
    /// `min_k v(c_k) + k·v_r` over the computed coefficients.
    pub v_s: Q,
    /// Largest minimizer (degree on the closed disc).
    pub d: usize,
    /// Smallest minimizer (degree on the open disc).
    pub d_prime: usize,
    /// The tail beyond the table provably stays above `v_s`.
    pub certified_tail: bool,
    /// Degrees whose coefficient is zero only to precision and might still
    /// reach the minimum.
    pub unresolved: Vec<usize>,
}

/// Minimizes `v(c_k) + k·v_r` over the table; `coeffs[k]` is `c_k`.
pub fn weierstrass_data(coeffs: &[LaurentSeries], v_r: Q, tail: Option<&dyn TailBound>) -> Result<WeierstrassData> {
    let weight = |k: usize| v_r * Q::from_integer(k as i64);
    let mut best: Option<(Q, usize, usize)> = None;
    for (k, c) in coeffs.iter().enumerate() {
        if let Valuation::Finite(v) = c.valuation() {
            let t = v + weight(k);
            best = match best {
                Some((b, lo, _)) if t == b => Some((b, lo, k)),
                Some((b, lo, hi)) if t > b => Some((b, lo, hi)),
                _ => Some((t, k, k)),
            };
        }
    }
    let (v_s, d_prime, d) =
        best.ok_or_else(|| Error::InvalidArgument("no coefficient is known to be nonzero".into()))?;
    let unresolved: Vec<usize> = coeffs
        .iter()
        .enumerate()
        .filter(|(k, c)| matches!(c.valuation(), Valuation::AtLeast(h) if h + weight(*k) <= v_s))
        .map(|(k, _)| k)
        .collect();
    let degree = coeffs.len().saturating_sub(1);
    let tail_ok = tail.and_then(|t| t.tail_minimum(degree, v_r)).is_some_and(|m| m.exceeds(v_s));
    Ok(WeierstrassData { v_s, d, d_prime, certified_tail: tail_ok && unresolved.is_empty(), unresolved })
}

/// `(deg(g, D_σ), deg(g, closed D_σ))` for a `p`-divisible map, with the
/// degree-`k'` criterion `v(b_{k'}) = (k'-1)A - v_m` checked against the
/// Weierstrass data.
pub fn degree_on_sigma(g: &Conjugacy, dp: &DiscProfile, gauge: &Gauge) -> Result<(usize, usize)> {
    let pr = g.profile();
    let kp = pr.k_prime as usize;
    if g.degree() < kp {
        return Err(Error::InvalidArgument(format!("conjugacy solved only to degree {} < k' = {kp}", g.degree())));
    }
    let tail = ConjugacyTail { profile: pr, a: gauge.a, v_sigma: dp.v_sigma };
    let wd = weierstrass_data(g.coeffs(), dp.v_sigma, Some(&tail))?;
    if !wd.certified_tail {
        return Err(Error::PrecisionExhausted(format!(
            "Weierstrass data on the σ-sphere not certified (unresolved degrees {:?})",
            wd.unresolved
        )));
    }
    let extremal = Valuation::Finite(Q::from_integer(kp as i64 - 1) * gauge.a - pr.v_m);
    let criterion = g.valuation(kp) == extremal;
    if (wd.d == kp) != criterion || (wd.d != kp && wd.d != 1) {
        return Err(Error::HypothesisViolated(format!(
            "closed-disc degree {} disagrees with v(b_{kp}) = {}",
            wd.d,
            g.valuation(kp)
        )));
    }
    Ok((wd.d_prime, wd.d))
}

/// `δ(k) = count(k)/(k-1)`, the exponent of `|1-λ^m|^{-1}` in the bound on `|b_k| σ^k`.
pub fn delta_exponent(profile: &MultiplierProfile, k: u64) -> Q {
    Q::new(profile.count_resonant(k) as i64, k as i64 - 1)
}

// ---------------------------------------------------------------------------
// Periodic points
// ---------------------------------------------------------------------------

/// Search space for periodic points: residue degrees up to `r_max` (multiples
/// of the base degree) and the ramified tower `U^e = T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tower {
    pub r_max: usize,
    pub e: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub kappa_max: u32,
    /// Digits of `u` (in `U`-units) produced by the Newton lift.
    pub horizon: i64,
    /// Largest degree of `f^{∘κ}` that will be expanded.
    pub max_degree: usize,
}

impl SearchOptions {
    pub fn new(kappa_max: u32, horizon: i64) -> Self {
        Self { kappa_max, horizon, max_degree: 1024 }
    }
}

/// A periodic point in the tower `F_{p^r}((U))`, `U^e = T`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicPoint {
    pub point: LaurentSeries,
    pub kappa: u32,
    pub r: usize,
    pub e: u32,
    /// The map with coefficients moved into the tower.
    pub map: PowerSeriesMap,
    /// Image of the base generator in the residue field of the tower.
    pub generator_image: FqElement,
    pub residue_root: FqElement,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Found(PeriodicPoint),
    NotFound {
        r_max: usize,
        e: u32,
        kappa_max: u32,
        /// Multiple residue roots met (not lifted).
        multiple_roots: usize,
        /// Periods skipped because `deg f^{∘κ}` exceeded the cap.
        skipped_kappa: Vec<u32>,
    },
}

/// Embedding of `base` into `target`: the generator goes to the first root
/// of the base modulus in the enumeration order of `target`.
fn embedding(base: &Field, target: &Field) -> Result<(FqElement, impl Fn(&FqElement) -> FqElement)> {
    if base.p() != target.p() || target.r() % base.r() != 0 {
        return Err(Error::IncompatibleField);
    }
    let beta = if base == target {
        target.generator()
    } else if base.r() == 1 {
        target.from_int(base.generator().coeffs()[0] as i64)
    } else {
        let m = base.params().modulus();
        target
            .elements()
            .find(|x| {
                let mut acc = target.zero();
                for &c in m.iter().rev() {
                    acc = acc.mul(x).unwrap().add(&target.from_int(c as i64)).unwrap();
                }
                acc.is_zero()
            })
            .ok_or(Error::IncompatibleField)?
    };
    let powers: Vec<FqElement> = (0..base.r()).map(|i| beta.pow(i as u64)).collect();
    let target = target.clone();
    let embed = move |x: &FqElement| {
        let mut acc = target.zero();
        for (c, b) in x.coeffs().iter().zip(&powers) {
            acc = acc.add(&b.scale_int(*c as i64)).unwrap();
        }
        acc
    };
    Ok((beta, embed))
}

/// `f` with coefficients in `F_{p^{r'}}((U))`, `U^e = T`.
pub fn lift_map(f: &PowerSeriesMap, target: &Field, e: u32) -> Result<(PowerSeriesMap, FqElement)> {
    if e % f.ram() != 0 {
        return Err(Error::InvalidArgument(format!("tower e = {e} does not refine ramification {}", f.ram())));
    }
    let (beta, embed) = embedding(f.field(), target)?;
    let step = e / f.ram();
    let lifted = f.map_coeffs(|c| Ok(c.ramify(step)?.map_coeffs(target, &embed)))?;
    Ok((lifted, beta))
}

fn horner(poly: &[LaurentSeries], x: &LaurentSeries) -> Result<LaurentSeries> {
    let mut acc = poly.last().cloned().expect("nonempty polynomial");
    for c in poly.iter().rev().skip(1) {
        acc = acc.mul(x)?.add(c)?;
    }
    Ok(acc)
}

fn residue_horner(poly: &[FqElement], x: &FqElement) -> FqElement {
    let mut acc = poly.last().cloned().expect("nonempty polynomial");
    for c in poly.iter().rev().skip(1) {
        acc = acc.mul(x).unwrap().add(c).unwrap();
    }
    acc
}

fn derivative(poly: &[LaurentSeries]) -> Vec<LaurentSeries> {
    poly.iter().enumerate().skip(1).map(|(j, c)| c.scale_int(j as i64)).collect()
}

/// Newton iteration for a simple root of an integral polynomial, doubling the
/// horizon each step. Returns `u` with `P(u) ≡ 0 mod U^horizon`.
fn newton_lift(poly: &[LaurentSeries], root: &FqElement, horizon: i64) -> Result<LaurentSeries> {
    let field = root.field();
    let ram = poly[0].ram();
    let dpoly = derivative(poly);
    let mut u = LaurentSeries::constant(root, ram);
    let mut h = 1;
    while h < horizon {
        h = (2 * h).min(horizon);
        let ut = u.truncate(h);
        let val = horner(poly, &ut)?.truncate(h);
        let der = horner(&dpoly, &ut)?;
        let delta = val.mul(&der.inv_rel(h)?)?.truncate(h);
        let next = ut.sub(&delta)?.truncate(h);
        u = LaurentSeries::from_terms(field, ram, next.terms().collect::<Vec<_>>(), EXACT);
    }
    let check = horner(poly, &u.truncate(horizon))?;
    if !check.is_zero() {
        return Err(Error::PrecisionExhausted("Newton iteration did not converge".into()));
    }
    Ok(u)
}

/// `f̃(u) = f(πu)/π` as a table, where `π = U^s`.
fn scaled_table(f: &PowerSeriesMap, s: i64) -> PolyTable {
    let mut t = f.to_table(f.degree());
    for (d, c) in f.nonlinear() {
        t.set(d, c.shift(s * (d as i64 - 1)));
    }
    t
}

/// Searches `κ = 1..=kappa_max` for a periodic point on the sphere of
/// `sphere` inside the tower, returning the first hit with minimal `κ`.
pub fn find_periodic_point(
    f: &PowerSeriesMap,
    sphere: &Disc,
    tower: Tower,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    if !sphere.is_rational_in(tower.e) {
        return Err(Error::InvalidArgument(format!(
            "sphere v = {} has no points in the tower e = {}",
            fmt_q(sphere.v_radius),
            tower.e
        )));
    }
    if opts.horizon < 1 {
        return Err(Error::InvalidArgument("search horizon must be positive".into()));
    }
    let base_r = f.field().r();
    let s = (sphere.v_radius * Q::from_integer(tower.e as i64)).to_integer();
    let mut towers = Vec::new();
    for r in (base_r..=tower.r_max.max(base_r)).filter(|r| r % base_r == 0) {
        let target = if r == base_r { f.field().clone() } else { Field::extension(f.p(), r)? };
        let (map, beta) = lift_map(f, &target, tower.e)?;
        let table = scaled_table(&map, s);
        towers.push((r, target, map, beta, table.clone(), table));
    }
    let deg = f.degree();
    let mut multiple_roots = 0;
    let mut skipped = Vec::new();
    for kappa in 1..=opts.kappa_max {
        let top = (deg as u64).checked_pow(kappa).filter(|&n| n <= opts.max_degree as u64);
        let Some(top) = top else {
            skipped.extend(kappa..=opts.kappa_max);
            break;
        };
        for (r, target, map, beta, base, iter) in towers.iter_mut() {
            if kappa > 1 {
                *iter = base.compose(iter, top as usize, None)?;
            }
            let mut q: Vec<LaurentSeries> = iter.coeffs().to_vec();
            q[1] = q[1].sub(&LaurentSeries::one(target, tower.e))?;
            let Some(mu) = q.iter().filter_map(|c| c.lead()).min() else {
                continue;
            };
            let poly: Vec<LaurentSeries> = q.iter().map(|c| c.shift(-mu)).collect();
            let residue = poly.iter().map(|c| c.reduce()).collect::<Result<Vec<_>>>()?;
            let dres: Vec<FqElement> =
                residue.iter().enumerate().skip(1).map(|(j, c)| c.scale_int(j as i64)).collect();
            for u0 in target.elements().skip(1) {
                if !residue_horner(&residue, &u0).is_zero() {
                    continue;
                }
                if residue_horner(&dres, &u0).is_zero() {
                    multiple_roots += 1;
                    continue;
                }
                let u = newton_lift(&poly, &u0, opts.horizon)?;
                let point = LaurentSeries::from_terms(
                    target,
                    tower.e,
                    u.terms().map(|(k, c)| (k + s, c)).collect::<Vec<_>>(),
                    s + opts.horizon,
                );
                return Ok(SearchOutcome::Found(PeriodicPoint {
                    point,
                    kappa,
                    r: *r,
                    e: tower.e,
                    map: map.clone(),
                    generator_image: beta.clone(),
                    residue_root: u0,
                }));
            }
        }
    }
    Ok(SearchOutcome::NotFound {
        r_max: tower.r_max,
        e: tower.e,
        kappa_max: opts.kappa_max,
        multiple_roots,
        skipped_kappa: skipped,
    })
}

/// Periodicity residual and multiplier of a candidate periodic point.
#[derive(Clone, Debug, PartialEq)]
pub struct IndifferentCheck {
    /// `v(f^{∘κ}(x̂) - x̂)`; zero to precision for a periodic point.
    pub residual: Valuation,
    /// `(f^{∘κ})'(x̂)` by the chain rule along the orbit.
    pub multiplier: LaurentSeries,
    pub multiplier_valuation: Valuation,
}

impl IndifferentCheck {
    pub fn is_indifferent_periodic(&self) -> bool {
        self.residual.is_zero_to_precision() && self.multiplier_valuation == Valuation::Finite(Q::from_integer(0))
    }
}

/// Measures `f^{∘κ}(x̂) - x̂` and `(f^{∘κ})'(x̂)`; `f` must live in the
/// tower of the point.
pub fn verify_indifferent(f: &PowerSeriesMap, point: &LaurentSeries, kappa: u32) -> Result<IndifferentCheck> {
    if f.field() != point.field() || f.ram() != point.ram() {
        return Err(Error::IncompatibleField);
    }
    let mut x = point.clone();
    let mut multiplier = LaurentSeries::one(f.field(), f.ram());
    for _ in 0..kappa {
        multiplier = multiplier.mul(&f.derivative_at(&x)?)?;
        x = f.eval(&x)?;
    }
    let residual = x.sub(point)?.valuation();
    let multiplier_valuation = multiplier.valuation();
    Ok(IndifferentCheck { residual, multiplier, multiplier_valuation })
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateLevel {
    /// Full conjugacy on the open σ-disc.
    #[serde(rename = "GENERIC-sigma")]
    GenericSigma,
    /// `b_{k'} = 0`: full conjugacy on at least the ρ-disc.
    #[serde(rename = "EXTENDED-rho")]
    ExtendedRho,
    /// `deg(g, closed D_σ) = k'`: the σ-disc is the linearization disc.
    #[serde(rename = "EXACT-sigma")]
    ExactSigma,
}

impl CertificateLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateLevel::GenericSigma => "GENERIC-sigma",
            CertificateLevel::ExtendedRho => "EXTENDED-rho",
            CertificateLevel::ExactSigma => "EXACT-sigma",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    /// Solve degree; defaults to `k' + 2mp`.
    pub degree: Option<usize>,
    pub rel: i64,
    /// Largest residue degree tried by the periodic-point search; defaults to `2r`.
    pub r_max: Option<usize>,
    /// Defaults to `k'`.
    pub kappa_max: Option<u32>,
    pub horizon: i64,
    pub max_degree: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { degree: None, rel: 64, r_max: None, kappa_max: None, horizon: 128, max_degree: 1024 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PeriodicSearch {
    Found { point: PeriodicPoint, check: IndifferentCheck },
    NotFoundInTower(SearchOutcome),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearizationReport {
    pub level: CertificateLevel,
    pub disc: Disc,
    pub p: u64,
    pub m: u64,
    pub v_m: Q,
    pub k_prime: u64,
    pub a: Q,
    pub v_rho: Q,
    pub v_sigma: Q,
    pub solved_degree: usize,
    pub degree_open_sigma: usize,
    pub degree_closed_sigma: usize,
    pub b_kprime: Valuation,
    pub extension: Option<ExtensionVerdict>,
    /// Present exactly at the EXACT level.
    pub periodic: Option<PeriodicSearch>,
    pub notes: Vec<String>,
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    a / gcd(a, b) * b
}

/// Runs profile, gauge, solver, checks and degree analysis for a
/// `p`-divisible map and certifies the linearization disc.
pub fn classify_linearization_disc(f: &PowerSeriesMap, opts: &ClassifyOptions) -> Result<LinearizationReport> {
    if !f.in_p_divisible_family() {
        return Err(Error::HypothesisViolated("map has a nonlinear degree prime to p".into()));
    }
    let (pr, gauge, dp) = disc_data(f)?;
    let (Some(gauge), Some(dp)) = (gauge, dp) else {
        return Err(Error::HypothesisViolated("linear map: the conjugacy is the identity".into()));
    };
    let kp = pr.k_prime as usize;
    let mp = (pr.m * pr.p) as usize;
    let degree = opts.degree.unwrap_or(kp + 2 * mp).max(kp);
    let g = solve_sfe(f, degree, SolveOptions::with_rel(opts.rel))?;
    let mut notes = Vec::new();

    let sz = check_structural_zeros(&g, f);
    if !sz.violations.is_empty() {
        return Err(Error::HypothesisViolated(format!("structural zeros violated at {:?}", sz.violations)));
    }
    let bounds = check_coefficient_bound(&g, &gauge);
    if !bounds.violations.is_empty() {
        return Err(Error::HypothesisViolated(format!("coefficient bound violated at {:?}", bounds.violations)));
    }
    let (deg_open, deg_closed) = degree_on_sigma(&g, &dp, &gauge)?;
    let b_kprime = g.valuation(kp);

    let mut extension = None;
    let mut periodic = None;
    let (level, disc) = if deg_closed == kp {
        let e = lcm(f.ram() as u64, *dp.v_sigma.denom() as u64 * f.ram() as u64) as u32;
        let e = e / f.ram() * f.ram();
        let sphere = Disc::closed(dp.v_sigma);
        let tower = Tower { r_max: opts.r_max.unwrap_or(2 * f.field().r()), e };
        let search = SearchOptions {
            kappa_max: opts.kappa_max.unwrap_or(pr.k_prime as u32),
            horizon: opts.horizon,
            max_degree: opts.max_degree,
        };
        let outcome = find_periodic_point(f, &sphere, tower, &search)?;
        periodic = Some(match outcome {
            SearchOutcome::Found(point) => {
                let check = verify_indifferent(&point.map, &point.point, point.kappa)?;
                if !check.is_indifferent_periodic() {
                    return Err(Error::HypothesisViolated(format!(
                        "lifted point fails verification: residual {}, multiplier valuation {}",
                        check.residual, check.multiplier_valuation
                    )));
                }
                PeriodicSearch::Found { point, check }
            }
            other => {
                notes.push(
                    "periodic point exists in the completed algebraic closure but was not constructed in the tower"
                        .into(),
                );
                PeriodicSearch::NotFoundInTower(other)
            }
        });
        (CertificateLevel::ExactSigma, Disc::open(dp.v_sigma))
    } else if g.zero_kind(kp) == ZeroKind::Structural {
        let verdict = check_bkprime_zero_extension(&g, f)?;
        let level = match verdict {
            ExtensionVerdict::Extended { .. } => {
                notes.push("full conjugacy holds on a disc at least as large as the rho-disc".into());
                (CertificateLevel::ExtendedRho, Disc::open(dp.v_rho))
            }
            _ => (CertificateLevel::GenericSigma, Disc::open(dp.v_sigma)),
        };
        extension = Some(verdict);
        level
    } else {
        (CertificateLevel::GenericSigma, Disc::open(dp.v_sigma))
    };

    Ok(LinearizationReport {
        level,
        disc,
        p: pr.p,
        m: pr.m,
        v_m: pr.v_m,
        k_prime: pr.k_prime,
        a: gauge.a,
        v_rho: dp.v_rho,
        v_sigma: dp.v_sigma,
        solved_degree: degree,
        degree_open_sigma: deg_open,
        degree_closed_sigma: deg_closed,
        b_kprime,
        extension,
        periodic,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::mult_profile;

    fn map(p: u32, r: usize, lam: &str, terms: &[(usize, &str)]) -> PowerSeriesMap {
        PowerSeriesMap::from_literals(&Field::builtin(p, r).unwrap(), 1, lam, terms).unwrap()
    }

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn weierstrass_example() {
        let f2 = Field::builtin(2, 1).unwrap();
        let c = |t: &str| LaurentSeries::parse_exact(t, &f2, 1).unwrap();
        let h = [c("0"), c("1"), c("T^-1")];
        let wd = weierstrass_data(&h, q(1, 1), Some(&NoTail)).unwrap();
        assert_eq!((wd.v_s, wd.d, wd.d_prime, wd.certified_tail), (q(1, 1), 2, 1, true));
        let lin = [c("0"), c("1")];
        for v in [q(-3, 1), q(0, 1), q(5, 2)] {
            let wd = weierstrass_data(&lin, v, None).unwrap();
            assert_eq!((wd.d, wd.d_prime, wd.certified_tail), (1, 1, false));
        }
    }

    #[test]
    fn conjugacy_minimizers_on_sigma() {
        for (p, r, lam, k) in [(2, 1, "1+T", 2), (2, 2, "b+T", 4), (3, 1, "2+T", 3), (3, 1, "1+T", 3)] {
            let f = map(p, r, lam, &[(k, "1"), (2 * k, "T^-1")]);
            let (pr, gauge, dp) = disc_data(&f).unwrap();
            let (gauge, dp) = (gauge.unwrap(), dp.unwrap());
            let g = solve_sfe(&f, 60, SolveOptions::default()).unwrap();
            let tail = ConjugacyTail { profile: &pr, a: gauge.a, v_sigma: dp.v_sigma };
            let wd = weierstrass_data(g.coeffs(), dp.v_sigma, Some(&tail)).unwrap();
            assert!(wd.certified_tail);
            assert_eq!(wd.v_s, dp.v_sigma);
            assert!(wd.d == 1 || wd.d == pr.k_prime as usize);
            assert_eq!(wd.d_prime, 1);
            // No certificate strictly outside the σ-disc.
            let outside = weierstrass_data(g.coeffs(), (dp.v_sigma + dp.v_rho) / 2, Some(&tail)).unwrap();
            assert!(!outside.certified_tail);
        }
    }

    #[test]
    fn degree_dichotomy() {
        let cases: [(u32, usize, &str, usize); 3] = [(2, 1, "1+T", 2), (2, 2, "b+T", 4), (3, 1, "2+T", 3)];
        for (p, r, lam, kp) in cases {
            let f = map(p, r, lam, &[(kp, "1")]);
            let (_, gauge, dp) = disc_data(&f).unwrap();
            let g = solve_sfe(&f, 40, SolveOptions::default()).unwrap();
            assert_eq!(degree_on_sigma(&g, &dp.unwrap(), &gauge.unwrap()).unwrap(), (1, kp));
        }
        // v(a_{k'}) above the extremal value: degree stays 1.
        let f = map(2, 1, "1+T", &[(2, "T"), (4, "1")]);
        let (_, gauge, dp) = disc_data(&f).unwrap();
        let g = solve_sfe(&f, 40, SolveOptions::default()).unwrap();
        assert_eq!(degree_on_sigma(&g, &dp.unwrap(), &gauge.unwrap()).unwrap(), (1, 1));
        let short = solve_sfe(&map(2, 2, "b+T", &[(4, "1")]), 3, SolveOptions::default()).unwrap();
        let (_, gauge, dp) = disc_data(&map(2, 2, "b+T", &[(4, "1")])).unwrap();
        assert!(degree_on_sigma(&short, &dp.unwrap(), &gauge.unwrap()).is_err());
    }

    #[test]
    fn delta_is_maximal_only_at_k_prime() {
        for (p, r, lam) in [(2, 1, "1+T"), (2, 2, "b+T"), (3, 1, "2+T"), (3, 2, "b+T"), (5, 1, "2+T"), (7, 1, "3+T")] {
            let pr = mult_profile(&LaurentSeries::parse_exact(lam, &Field::builtin(p, r).unwrap(), 1).unwrap())
                .unwrap();
            let top = 10 * pr.m * pr.p + pr.k_prime;
            let best = (2..=top).map(|k| delta_exponent(&pr, k)).max().unwrap();
            let argmax: Vec<u64> = (2..=top).filter(|&k| delta_exponent(&pr, k) == best).collect();
            assert_eq!(argmax, vec![pr.k_prime], "{lam} over F_{p}^{r}");
        }
    }

    #[test]
    fn rationality_bookkeeping() {
        assert_eq!(Rationality::of(q(1, 1)), Rationality::RationalInK);
        assert_eq!(Rationality::of(q(1, 3)), Rationality::RationalInExtension(3));
        let d = Disc::open(q(1, 6));
        assert!(d.is_rational_in(6) && d.is_rational_in(12) && !d.is_rational_in(3));
        for (p, r, lam, terms) in [
            (2, 2, "b+T", vec![(4, "1")]),
            (2, 1, "1+T", vec![(2, "T^-1"), (4, "1")]),
            (3, 1, "2+T", vec![(3, "T"), (6, "T^-2")]),
        ] {
            let f = map(p, r, lam, &terms);
            let (pr, gauge, dp) = disc_data(&f).unwrap();
            let (a, dp) = (gauge.unwrap().a, dp.unwrap());
            let bound = lcm(pr.k_prime - 1, *a.denom() as u64) as i64;
            assert_eq!(bound % dp.v_sigma.denom(), 0);
            assert_eq!(Disc::open(dp.v_sigma).rationality, Rationality::of(dp.v_sigma));
        }
    }

    #[test]
    fn disc_membership() {
        let d = Disc::open(q(1, 2));
        assert!(d.contains(Valuation::Finite(q(1, 1))));
        assert!(!d.contains(Valuation::Finite(q(1, 2))));
        assert!(Disc::closed(q(1, 2)).contains(Valuation::Finite(q(1, 2))));
        assert!(d.contains(Valuation::Infinite));
    }

    #[test]
    fn quadratic_fixed_point() {
        let f = map(2, 1, "1+T", &[(2, "1")]);
        let sphere = Disc::closed(q(1, 1));
        let out = find_periodic_point(&f, &sphere, Tower { r_max: 1, e: 1 }, &SearchOptions::new(1, 128)).unwrap();
        let SearchOutcome::Found(pt) = out else { panic!("not found") };
        assert_eq!(pt.kappa, 1);
        let t = LaurentSeries::parse_exact("T", f.field(), 1).unwrap();
        assert!(pt.point.agrees_with(&t));
        assert!(pt.point.prec() >= 128);
        let check = verify_indifferent(&pt.map, &pt.point, 1).unwrap();
        assert!(check.residual.is_zero_to_precision());
        assert_eq!(check.multiplier, *f.lambda());
        let exact = verify_indifferent(&f, &t, 1).unwrap();
        assert_eq!(exact.residual, Valuation::Infinite);
        let off = verify_indifferent(&f, &LaurentSeries::parse_exact("T+T^2", f.field(), 1).unwrap(), 1).unwrap();
        assert!(matches!(off.residual, Valuation::Finite(v) if v > Q::from_integer(0)));
    }

    #[test]
    fn fixed_points_of_binomials() {
        // x^{k'-1} = (1-λ)/a: (1-λ)/a = T^2 has the square root T.
        let f = map(3, 1, "1+T^2", &[(3, "2")]);
        let (_, _, dp) = disc_data(&f).unwrap();
        let v_sigma = dp.unwrap().v_sigma;
        assert_eq!(v_sigma, q(1, 1));
        let out = find_periodic_point(&f, &Disc::closed(v_sigma), Tower { r_max: 1, e: 1 }, &SearchOptions::new(1, 64))
            .unwrap();
        let SearchOutcome::Found(pt) = out else { panic!("not found") };
        let lam = f.lambda();
        let a = f.coeff(3).unwrap();
        let x2 = pt.point.mul(&pt.point).unwrap();
        let lhs = x2.mul(a).unwrap();
        let rhs = LaurentSeries::one(f.field(), 1).sub(lam).unwrap();
        assert!(lhs.agrees_with(&rhs));
        // (1-λ)/a = 2T over F_3: 2 is not a square, so no fixed point in F_3((T)).
        let g = map(3, 1, "1+T^2", &[(3, "1")]);
        let out = find_periodic_point(&g, &Disc::closed(v_sigma), Tower { r_max: 1, e: 1 }, &SearchOptions::new(1, 64))
            .unwrap();
        assert!(matches!(out, SearchOutcome::NotFound { .. }));
        let out = find_periodic_point(&g, &Disc::closed(v_sigma), Tower { r_max: 2, e: 1 }, &SearchOptions::new(1, 64))
            .unwrap();
        let SearchOutcome::Found(pt) = out else { panic!("not found over F_9") };
        assert_eq!(pt.r, 2);
        let check = verify_indifferent(&pt.map, &pt.point, 1).unwrap();
        assert!(check.is_indifferent_periodic());
    }

    #[test]
    fn linear_map_has_no_periodic_points() {
        let f = map(2, 1, "1+T", &[]);
        for v in [q(1, 1), q(0, 1), q(3, 1)] {
            let out =
                find_periodic_point(&f, &Disc::closed(v), Tower { r_max: 2, e: 1 }, &SearchOptions::new(4, 16)).unwrap();
            assert!(matches!(out, SearchOutcome::NotFound { .. }));
        }
    }

    #[test]
    fn sphere_must_be_rational_in_tower() {
        let f = map(2, 2, "b+T", &[(4, "1")]);
        let err = find_periodic_point(&f, &Disc::closed(q(1, 3)), Tower { r_max: 2, e: 1 }, &SearchOptions::new(1, 8));
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn classify_examples() {
        let rep = classify_linearization_disc(&map(2, 1, "1+T", &[(2, "1")]), &ClassifyOptions::default()).unwrap();
        assert_eq!(rep.level, CertificateLevel::ExactSigma);
        assert_eq!(rep.disc, Disc::open(q(1, 1)));
        assert_eq!(rep.degree_closed_sigma, 2);
        assert!(matches!(rep.periodic, Some(PeriodicSearch::Found { .. })));

        let f = map(2, 1, "1+T", &[(4, "1")]);
        let rep = classify_linearization_disc(&f, &ClassifyOptions::default()).unwrap();
        assert_eq!(rep.level, CertificateLevel::ExtendedRho);
        assert_eq!(rep.disc, Disc::open(q(1, 2)));
        assert!(rep.periodic.is_none());

        let f = map(2, 1, "1+T", &[(2, "T"), (4, "1")]);
        let rep = classify_linearization_disc(&f, &ClassifyOptions::default()).unwrap();
        assert_eq!(rep.level, CertificateLevel::GenericSigma);
        assert_eq!(rep.degree_closed_sigma, 1);
        assert!(rep.periodic.is_none());

        let f = map(2, 1, "1+T", &[(3, "1")]);
        assert!(matches!(
            classify_linearization_disc(&f, &ClassifyOptions::default()),
            Err(Error::HypothesisViolated(_))
        ));
    }
}
