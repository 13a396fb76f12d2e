//! Truncated Laurent series over `F_q` in a uniformizer `U` with `U^e = T`.
//!
//! A series is known modulo `O(U^M)` where `M` is its horizon. Exact inputs
//! (polynomial literals) carry the horizon [`EXACT`]; finite horizons appear
//! as soon as an inverse is taken. Every operation returns the largest
//! horizon justified by its operands, so no digit below a horizon is ever
//! guessed.
//!
//! Valuations are exact rationals `lead / e`; absolute values `ε^v` are never
//! materialized.

use std::cmp::{max, min};
use std::fmt;

use num_rational::Ratio;
use num_traits::Signed;

use crate::coeffield::{FqElement, Field};
use crate::error::{Error, Result};
use crate::literal;

/// Exact rational number used for valuations and radii.
pub type Q = Ratio<i64>;

/// Horizon of a series known exactly.
pub const EXACT: i64 = i64::MAX / 4;

#[inline]
fn clamp(h: i64) -> i64 {
    h.min(EXACT)
}

/// Horizon sum; an exact horizon stays exact.
#[inline]
fn hadd(a: i64, b: i64) -> i64 {
    if a >= EXACT {
        EXACT
    } else {
        clamp(a.saturating_add(b))
    }
}

/// Valuation of a series: exact, a lower bound (zero to the known
/// precision), or `+∞` (proven zero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(Q),
    AtLeast(Q),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<Q> {
        match self {
            Valuation::Finite(q) => Some(q),
            _ => None,
        }
    }

    /// Best known lower bound; `None` stands for `+∞`.
    pub fn lower_bound(self) -> Option<Q> {
        match self {
            Valuation::Finite(q) | Valuation::AtLeast(q) => Some(q),
            Valuation::Infinite => None,
        }
    }

    pub fn is_zero_to_precision(self) -> bool {
        !matches!(self, Valuation::Finite(_))
    }

    /// Whether the valuation is known to exceed `bound` (`+∞` always does).
    pub fn exceeds(self, bound: Q) -> bool {
        match self {
            Valuation::Finite(q) => q > bound,
            Valuation::AtLeast(q) => q > bound,
            Valuation::Infinite => true,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(q) => write!(f, "{}", fmt_q(*q)),
            Valuation::AtLeast(q) => write!(f, ">={}", fmt_q(*q)),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// `num/den` rendering used in every report.
pub fn fmt_q(q: Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Horizon schedule for precision-limited computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub initial: i64,
    pub max: i64,
    pub auto_retry: bool,
}

impl PrecisionPolicy {
    pub fn new(initial: i64, max: i64, auto_retry: bool) -> Result<Self> {
        if initial <= 0 || initial > max {
            return Err(Error::InvalidArgument(format!(
                "precision policy requires 0 < initial ({initial}) <= max ({max})"
            )));
        }
        Ok(Self { initial, max, auto_retry })
    }

    pub fn fixed(horizon: i64) -> Self {
        Self { initial: horizon, max: horizon, auto_retry: false }
    }

    /// Horizons to try: the initial one, then doublings up to `max` when
    /// auto-retry is on.
    pub fn horizons(&self) -> Vec<i64> {
        let mut out = vec![self.initial];
        if self.auto_retry {
            let mut h = self.initial;
            while h < self.max {
                h = (h * 2).min(self.max);
                out.push(h);
            }
        }
        out
    }

    /// Runs `job` at successive horizons until it stops failing with a
    /// precision error.
    pub fn run<T>(&self, mut job: impl FnMut(i64) -> Result<T>) -> Result<T> {
        let mut last = None;
        for h in self.horizons() {
            match job(h) {
                Err(e @ Error::PrecisionExhausted(_)) => last = Some(e),
                other => return other,
            }
        }
        Err(last.expect("at least one horizon"))
    }
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self { initial: 64, max: 1024, auto_retry: true }
    }
}

/// Element of `F_q((U))`, `U^e = T`, known modulo `O(U^prec)`.
///
/// Normal form: if any coefficient is known nonzero, `coeffs` starts with a
/// nonzero slot at exponent `lead` and has no trailing zero slots; all
/// coefficients between the last stored one and `prec` are zero. A series
/// with no known nonzero coefficient stores nothing and has `lead == prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSeries {
    field: Field,
    ram: u32,
    lead: i64,
    coeffs: Vec<u32>,
    prec: i64,
}

impl LaurentSeries {
    // ---- construction ----

    /// Zero known modulo `O(U^prec)`.
    pub fn zero(field: &Field, ram: u32, prec: i64) -> Self {
        let prec = clamp(prec);
        Self { field: field.clone(), ram, lead: prec, coeffs: Vec::new(), prec }
    }

    pub fn exact_zero(field: &Field, ram: u32) -> Self {
        Self::zero(field, ram, EXACT)
    }

    /// Exact monomial `c U^exp`.
    pub fn monomial(c: &FqElement, exp: i64, ram: u32) -> Self {
        Self::from_terms(c.field(), ram, [(exp, c.clone())], EXACT)
    }

    pub fn constant(c: &FqElement, ram: u32) -> Self {
        Self::monomial(c, 0, ram)
    }

    pub fn one(field: &Field, ram: u32) -> Self {
        Self::constant(&field.one(), ram)
    }

    /// Exact `U`.
    pub fn uniformizer(field: &Field, ram: u32) -> Self {
        Self::monomial(&field.one(), 1, ram)
    }

    /// Series from `(exponent in U-units, coefficient)` pairs; terms at or
    /// beyond `prec` are dropped, repeated exponents are summed.
    pub fn from_terms(
        field: &Field,
        ram: u32,
        terms: impl IntoIterator<Item = (i64, FqElement)>,
        prec: i64,
    ) -> Self {
        let prec = clamp(prec);
        let terms: Vec<(i64, FqElement)> =
            terms.into_iter().filter(|(e, c)| *e < prec && !c.is_zero()).collect();
        if terms.is_empty() {
            return Self::zero(field, ram, prec);
        }
        let lo = terms.iter().map(|t| t.0).min().unwrap();
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let r = field.r();
        let mut coeffs = vec![0u32; ((hi - lo + 1) as usize) * r];
        for (e, c) in &terms {
            let i = (e - lo) as usize;
            field.slot_add(&mut coeffs[i * r..(i + 1) * r], c.coeffs());
        }
        Self::normalized(field.clone(), ram, lo, coeffs, prec)
    }

    fn normalized(field: Field, ram: u32, lead: i64, mut coeffs: Vec<u32>, prec: i64) -> Self {
        let r = field.r();
        let n = coeffs.len() / r;
        let first = (0..n).find(|&i| !Field::slot_is_zero(&coeffs[i * r..(i + 1) * r]));
        match first {
            None => Self::zero(&field, ram, prec),
            Some(s) => {
                let last = (0..n).rev().find(|&i| !Field::slot_is_zero(&coeffs[i * r..(i + 1) * r])).unwrap();
                coeffs.truncate((last + 1) * r);
                if s > 0 {
                    coeffs.drain(..s * r);
                }
                Self { field, ram, lead: lead + s as i64, coeffs, prec }
            }
        }
    }

    /// Parses a literal (see [`crate::literal`]) known modulo `O(T^prec)`.
    /// A trailing `O(T^M)` term lowers the horizon to `M`.
    pub fn parse(text: &str, field: &Field, ram: u32, prec: i64) -> Result<Self> {
        if ram == 0 {
            return Err(Error::InvalidArgument("ramification index must be ≥ 1".into()));
        }
        let parsed = literal::parse_laurent(text, field, ram as i64)?;
        let mut h = hadd(prec.saturating_mul(ram as i64), 0);
        if let Some(o) = parsed.big_o {
            h = min(h, o);
        }
        Ok(Self::from_terms(field, ram, parsed.terms, h))
    }

    /// Parses a literal as an exact Laurent polynomial (unless it carries an
    /// explicit `O(T^M)` term).
    pub fn parse_exact(text: &str, field: &Field, ram: u32) -> Result<Self> {
        if ram == 0 {
            return Err(Error::InvalidArgument("ramification index must be ≥ 1".into()));
        }
        let parsed = literal::parse_laurent(text, field, ram as i64)?;
        Ok(Self::from_terms(field, ram, parsed.terms, parsed.big_o.unwrap_or(EXACT)))
    }

    // ---- accessors ----

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ram(&self) -> u32 {
        self.ram
    }

    /// Horizon in `U`-units.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT
    }

    /// Number of stored coefficient slots.
    pub fn len(&self) -> usize {
        self.coeffs.len() / self.field.r()
    }

    /// True when no coefficient is known to be nonzero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `U`-adic valuation of a series known to be nonzero.
    pub fn lead(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.lead)
    }

    /// Number of known digits past the leading one; `None` when exact.
    pub fn rel_precision(&self) -> Option<i64> {
        (!self.is_exact()).then_some(self.prec - self.lead)
    }

    pub fn valuation(&self) -> Valuation {
        let e = self.ram as i64;
        if !self.is_zero() {
            Valuation::Finite(Q::new(self.lead, e))
        } else if self.is_exact() {
            Valuation::Infinite
        } else {
            Valuation::AtLeast(Q::new(self.prec, e))
        }
    }

    /// Coefficient of `U^exp`; `None` when `exp` is at or beyond the horizon.
    pub fn coeff(&self, exp: i64) -> Option<FqElement> {
        if exp >= self.prec {
            return None;
        }
        let r = self.field.r();
        let i = exp - self.lead;
        if self.is_zero() || i < 0 || i as usize >= self.len() {
            return Some(self.field.zero());
        }
        let i = i as usize;
        Some(FqElement::from_slot(&self.field, &self.coeffs[i * r..(i + 1) * r]))
    }

    #[inline]
    fn slot(&self, i: usize) -> &[u32] {
        let r = self.field.r();
        &self.coeffs[i * r..(i + 1) * r]
    }

    /// Known nonzero terms as `(exponent, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (i64, FqElement)> + '_ {
        (0..self.len()).filter_map(move |i| {
            let s = self.slot(i);
            (!Field::slot_is_zero(s)).then(|| (self.lead + i as i64, FqElement::from_slot(&self.field, s)))
        })
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ram == other.ram && self.field == other.field {
            Ok(())
        } else {
            Err(Error::IncompatibleField)
        }
    }

    // ---- arithmetic ----

    fn combine(&self, other: &Self, subtract: bool) -> Self {
        let prec = min(self.prec, other.prec);
        if self.is_zero() && other.is_zero() {
            return Self::zero(&self.field, self.ram, prec);
        }
        let r = self.field.r();
        let end = |s: &Self| if s.is_zero() { i64::MIN } else { s.lead + s.len() as i64 };
        let lo = min(self.lead, other.lead);
        let hi = min(prec, max(end(self), end(other)));
        if hi <= lo {
            return Self::zero(&self.field, self.ram, prec);
        }
        let n = (hi - lo) as usize;
        let mut out = vec![0u32; n * r];
        for (src, neg) in [(self, false), (other, subtract)] {
            if src.is_zero() {
                continue;
            }
            let off = (src.lead - lo) as usize;
            for i in 0..src.len().min(n.saturating_sub(off)) {
                let dst = &mut out[(off + i) * r..(off + i + 1) * r];
                if neg {
                    self.field.slot_sub(dst, src.slot(i));
                } else {
                    self.field.slot_add(dst, src.slot(i));
                }
            }
        }
        Self::normalized(self.field.clone(), self.ram, lo, out, prec)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.combine(other, false))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.combine(other, true))
    }

    pub fn neg(&self) -> Self {
        Self::zero(&self.field, self.ram, EXACT).combine(self, true)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        if (self.is_zero() && self.is_exact()) || (other.is_zero() && other.is_exact()) {
            return Self::exact_zero(&self.field, self.ram);
        }
        let prec = min(hadd(self.prec, other.lead), hadd(other.prec, self.lead));
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.field, self.ram, prec);
        }
        let lead = self.lead + other.lead;
        let (nx, ny) = (self.len(), other.len());
        let n = min((prec - lead).max(0) as usize, nx + ny - 1);
        if n == 0 {
            return Self::zero(&self.field, self.ram, prec);
        }
        let f = &self.field;
        let r = f.r();
        let mut out = vec![0u32; n * r];
        if r == 1 {
            let p = f.p() as u64;
            let (a, b) = (&self.coeffs, &other.coeffs);
            for (k, o) in out.iter_mut().enumerate() {
                let i0 = k.saturating_sub(ny - 1);
                let i1 = min(k, nx - 1);
                let mut acc = 0u64;
                for i in i0..=i1 {
                    acc += a[i] as u64 * b[k - i] as u64;
                }
                *o = (acc % p) as u32;
            }
        } else {
            let mut acc = vec![0u64; f.acc_len()];
            for k in 0..n {
                let i0 = k.saturating_sub(ny - 1);
                let i1 = min(k, nx - 1);
                for i in i0..=i1 {
                    f.acc_mul(&mut acc, self.slot(i), other.slot(k - i));
                }
                f.acc_reduce(&mut acc, &mut out[k * r..(k + 1) * r]);
            }
        }
        Self::normalized(f.clone(), self.ram, lead, out, prec)
    }

    /// Multiplies by a residue-field constant.
    pub fn scale(&self, c: &FqElement) -> Result<Self> {
        if c.field() != &self.field {
            return Err(Error::IncompatibleField);
        }
        Ok(self.mul_unchecked(&Self::constant(c, self.ram)))
    }

    /// Multiplies by an integer through the prime field.
    pub fn scale_int(&self, n: i64) -> Self {
        let p = self.field.p() as i64;
        let n = n.rem_euclid(p) as u64;
        let mut out = self.clone();
        if n == 0 {
            return Self::zero(&self.field, self.ram, self.prec);
        }
        let r = self.field.r();
        for i in 0..out.len() {
            self.field.slot_scale_int(&mut out.coeffs[i * r..(i + 1) * r], n);
        }
        out
    }

    /// Multiplies by `U^k`.
    pub fn shift(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.prec = hadd(out.prec, k);
        out.lead = if out.is_zero() { out.prec } else { out.lead + k };
        out
    }

    /// Forgets every digit at or beyond `horizon`.
    pub fn truncate(&self, horizon: i64) -> Self {
        if horizon >= self.prec {
            return self.clone();
        }
        let keep = (horizon - self.lead).clamp(0, self.len() as i64) as usize;
        let r = self.field.r();
        Self::normalized(self.field.clone(), self.ram, self.lead, self.coeffs[..keep * r].to_vec(), horizon)
    }

    /// Keeps `rel` digits past the leading one (no-op on zero-to-precision).
    pub fn truncate_rel(&self, rel: i64) -> Self {
        match self.lead() {
            Some(l) => self.truncate(l.saturating_add(rel)),
            None => self.clone(),
        }
    }

    /// Inverse keeping at most `rel` digits past the leading one. Exact
    /// monomials invert exactly.
    pub fn inv_rel(&self, rel: i64) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::PrecisionExhausted(format!(
                "inverting a series that is zero modulo O(U^{})",
                self.prec
            )));
        }
        let f = &self.field;
        let r = f.r();
        let c0 = f.slot_inv(self.slot(0))?;
        if self.is_exact() && self.len() == 1 {
            return Ok(Self { field: f.clone(), ram: self.ram, lead: -self.lead, coeffs: c0, prec: EXACT });
        }
        let own = self.prec - self.lead;
        let digits = min(own, rel);
        if digits <= 0 {
            return Err(Error::PrecisionExhausted("no relative precision left to invert".into()));
        }
        if digits > 1 << 24 {
            return Err(Error::InvalidArgument("inverse of an exact series needs a finite horizon".into()));
        }
        let n = digits as usize;
        let nu = self.len();
        let mut out = vec![0u32; n * r];
        out[..r].copy_from_slice(&c0);
        let mut acc = vec![0u64; f.acc_len()];
        let mut tmp = vec![0u32; r];
        for k in 1..n {
            for i in 1..=min(k, nu - 1) {
                f.acc_mul(&mut acc, self.slot(i), &out[(k - i) * r..(k - i + 1) * r]);
            }
            f.acc_reduce(&mut acc, &mut tmp);
            // out_k = -c0 * Σ u_i out_{k-i}
            let prod = f.slot_mul(&tmp, &c0);
            let dst = &mut out[k * r..(k + 1) * r];
            f.slot_sub(dst, &prod);
        }
        Ok(Self::normalized(f.clone(), self.ram, -self.lead, out, -self.lead + digits))
    }

    /// Inverse to the operand's own precision; exact non-monomials are refused.
    pub fn inv(&self) -> Result<Self> {
        if self.is_exact() && self.len() > 1 {
            return Err(Error::InvalidArgument(
                "inverse of an exact non-monomial needs a horizon (use inv_rel)".into(),
            ));
        }
        self.inv_rel(i64::MAX)
    }

    /// `self / other`, with the quotient carrying at most `rel` digits.
    pub fn div_rel(&self, other: &Self, rel: i64) -> Result<Self> {
        self.check(other)?;
        let rel = match self.rel_precision() {
            Some(own) if !self.is_zero() => min(own, rel),
            _ => rel,
        };
        Ok(self.mul_unchecked(&other.inv_rel(rel)?))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if other.is_exact() && other.len() == 1 {
            return Ok(self.mul_unchecked(&other.inv()?));
        }
        match self.rel_precision() {
            Some(rel) if !self.is_zero() => self.div_rel(other, rel),
            _ if self.is_zero() => Ok(self.mul_unchecked(&other.inv_rel(1)?)),
            _ => Err(Error::InvalidArgument("exact quotient needs a horizon (use div_rel)".into())),
        }
    }

    /// `self^n` by square-and-multiply, forgetting digits at or beyond the
    /// absolute horizon `cap` after each step.
    pub fn pow_capped(&self, mut n: u64, cap: i64) -> Self {
        let mut acc = Self::one(&self.field, self.ram).truncate(cap);
        let mut base = self.truncate(cap);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_unchecked(&base).truncate(cap);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_unchecked(&base).truncate(cap);
            }
        }
        acc
    }

    pub fn pow(&self, n: u64) -> Self {
        self.pow_capped(n, EXACT)
    }

    /// `self^p`, computed coefficientwise: `(Σ c_j U^j)^p = Σ c_j^p U^{jp}`.
    pub fn frobenius(&self) -> Self {
        let p = self.field.p() as i64;
        let prec = if self.is_exact() { EXACT } else { clamp(self.prec.saturating_mul(p)) };
        if self.is_zero() {
            return Self::zero(&self.field, self.ram, prec);
        }
        let terms: Vec<_> = self.terms().map(|(e, c)| (e * p, c.frobenius())).collect();
        Self::from_terms(&self.field, self.ram, terms, prec)
    }

    // ---- residue structure ----

    /// Image of an integral element in the residue field.
    pub fn reduce(&self) -> Result<FqElement> {
        match self.lead() {
            Some(l) if l < 0 => Err(Error::NotIntegral),
            Some(l) if l > 0 => Ok(self.field.zero()),
            Some(_) => Ok(FqElement::from_slot(&self.field, self.slot(0))),
            None if self.prec > 0 => Ok(self.field.zero()),
            None => Err(Error::PrecisionExhausted("constant term beyond horizon".into())),
        }
    }

    /// Reinterprets the series in the tower `U'^{e} = U` (exponents scale by `e`).
    pub fn ramify(&self, e: u32) -> Result<Self> {
        if e < 1 {
            return Err(Error::InvalidArgument("ramification index must be ≥ 1".into()));
        }
        let e64 = e as i64;
        let prec = if self.is_exact() { EXACT } else { self.prec * e64 };
        let terms: Vec<_> = self.terms().map(|(x, c)| (x * e64, c)).collect();
        Ok(Self::from_terms(&self.field, self.ram * e, terms, prec))
    }

    /// Moves the coefficients into a larger residue field through `embed`.
    pub fn map_coeffs(&self, field: &Field, embed: impl Fn(&FqElement) -> FqElement) -> Self {
        let terms: Vec<_> = self.terms().map(|(x, c)| (x, embed(&c))).collect();
        Self::from_terms(field, self.ram, terms, self.prec)
    }

    /// Whether every known coefficient at a nonzero exponent vanishes.
    pub fn nonconstant_part_vanishes(&self) -> bool {
        self.terms().all(|(e, _)| e == 0)
    }

    /// Whether the two series agree on every digit both of them know.
    pub fn agrees_with(&self, other: &Self) -> bool {
        if self.check(other).is_err() {
            return false;
        }
        let h = min(self.prec, other.prec);
        self.truncate(h) == other.truncate(h)
    }

    /// Rational valuation of the uniformizer power `U^k`.
    pub fn exponent_to_q(&self, k: i64) -> Q {
        Q::new(k, self.ram as i64)
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = if self.ram == 1 { "T" } else { "U" };
        let mut parts: Vec<String> = Vec::new();
        for (e, c) in self.terms() {
            let coeff = if c.is_compound() { format!("({c})") } else { c.to_string() };
            parts.push(match (e, c.is_one()) {
                (0, _) => coeff,
                (1, true) => var.to_string(),
                (1, false) => format!("{coeff}*{var}"),
                (e, true) => format!("{var}^{e}"),
                (e, false) => format!("{coeff}*{var}^{e}"),
            });
        }
        if !self.is_exact() {
            parts.push(format!("O({var}^{})", self.prec));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Smallest `U`-exponent `≥ v·e` (ceil), for converting rational bounds to horizons.
pub fn ceil_units(v: Q, ram: u32) -> i64 {
    let x = v * Q::from_integer(ram as i64);
    if x.is_integer() {
        x.to_integer()
    } else if x.is_negative() {
        x.trunc().to_integer()
    } else {
        x.trunc().to_integer() + 1
    }
}

/// `⌊v·e⌋`.
pub fn floor_units(v: Q, ram: u32) -> i64 {
    let x = v * Q::from_integer(ram as i64);
    x.floor().to_integer()
}
