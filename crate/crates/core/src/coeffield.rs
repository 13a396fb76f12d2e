//! Finite residue fields `F_{p^r}` in a polynomial basis.
//!
//! An element is a vector of `r` coordinates in `[0, p)` with respect to the
//! basis `1, b, ..., b^{r-1}`, where `b` is a root of the field modulus.
//! Field parameters are shared immutably through [`Field`], a cheap handle.
//!
//! Besides the value type [`FqElement`], this module exposes crate-internal
//! slice kernels used by the Laurent-series layer. Those kernels accumulate
//! products unreduced in `u64` and reduce once per output coefficient, which
//! is why `p` is capped at `2^16`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest characteristic accepted; keeps delayed `u64` accumulation exact.
pub const MAX_CHARACTERISTIC: u32 = 1 << 16;

/// Upper bound on `p^r` so that enumeration and order computations stay cheap.
const MAX_FIELD_ORDER: u64 = 1 << 24;

/// Parameters of `F_{p^r}`: prime `p`, degree `r`, and a monic irreducible
/// modulus of degree `r` (little-endian, `r + 1` coefficients).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldParams {
    p: u32,
    r: usize,
    modulus: Vec<u32>,
}

/// Fixed moduli for `p ∈ {2,3,5,7}`, `r ≤ 4` (Conway polynomials), stored
/// little-endian without the leading 1.
fn builtin_modulus(p: u32, r: usize) -> Option<Vec<u32>> {
    let tail: &[u32] = match (p, r) {
        (2, 1) => &[1],
        (2, 2) => &[1, 1],
        (2, 3) => &[1, 1, 0],
        (2, 4) => &[1, 1, 0, 0],
        (3, 1) => &[1],
        (3, 2) => &[2, 2],
        (3, 3) => &[1, 2, 0],
        (3, 4) => &[2, 0, 0, 2],
        (5, 1) => &[3],
        (5, 2) => &[2, 4],
        (5, 3) => &[3, 3, 0],
        (5, 4) => &[2, 4, 4, 0],
        (7, 1) => &[4],
        (7, 2) => &[3, 6],
        (7, 3) => &[4, 0, 6],
        (7, 4) => &[3, 4, 5, 0],
        _ => return None,
    };
    let mut m = tail.to_vec();
    m.push(1);
    Some(m)
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors of `n` by trial division.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// ---- polynomial arithmetic over F_p (little-endian, trimmed) ----

fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    // p is prime, so a^(p-2) is the inverse.
    pow_mod_p(a, p as u64 - 2, p)
}

fn pow_mod_p(a: u32, mut e: u64, p: u32) -> u32 {
    let p = p as u64;
    let mut base = a as u64 % p;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc as u32
}

/// Remainder of `a` modulo `b` over F_p; `b` must be nonzero.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let inv_lead = inv_mod_p(b[db], p) as u64;
    let p64 = p as u64;
    while r.len() > db {
        let dr = r.len() - 1;
        let c = r[dr] as u64 * inv_lead % p64;
        if c != 0 {
            for (j, &bj) in b.iter().enumerate() {
                let idx = dr - db + j;
                r[idx] = ((r[idx] as u64 + p64 * p64 - c * bj as u64) % p64) as u32;
            }
        }
        trim(&mut r);
    }
    r
}

fn poly_divmod(a: &[u32], b: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let p64 = p as u64;
    let inv_lead = inv_mod_p(b[db], p) as u64;
    let mut q = vec![0u32; r.len().saturating_sub(db).max(1)];
    while r.len() > db {
        let dr = r.len() - 1;
        let c = r[dr] as u64 * inv_lead % p64;
        q[dr - db] = c as u32;
        for (j, &bj) in b.iter().enumerate() {
            let idx = dr - db + j;
            r[idx] = ((r[idx] as u64 + p64 * p64 - c * bj as u64) % p64) as u32;
        }
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let p64 = p as u64;
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p64;
        }
    }
    let mut out: Vec<u32> = out.into_iter().map(|v| v as u32).collect();
    trim(&mut out);
    out
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let mut out: Vec<u32> = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

impl FieldParams {
    /// Validates `p` prime, `r ≥ 1`, and `modulus` monic irreducible of degree `r`.
    pub fn new(p: u32, r: usize, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if p >= MAX_CHARACTERISTIC {
            return Err(Error::InvalidField(format!(
                "characteristic {p} exceeds {MAX_CHARACTERISTIC}"
            )));
        }
        if r == 0 {
            return Err(Error::InvalidField("extension degree must be ≥ 1".into()));
        }
        let q = (p as u64).checked_pow(r as u32).unwrap_or(u64::MAX);
        if q > MAX_FIELD_ORDER {
            return Err(Error::InvalidField(format!("field order {p}^{r} too large")));
        }
        if modulus.len() != r + 1 {
            return Err(Error::InvalidField(format!(
                "modulus must have {} coefficients, got {}",
                r + 1,
                modulus.len()
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidField("modulus coefficient not reduced mod p".into()));
        }
        if modulus[r] != 1 {
            return Err(Error::InvalidField("modulus must be monic".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::ReducibleModulus { p });
        }
        Ok(Self { p, r, modulus })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Field order `q = p^r`.
    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.r as u32)
    }
}

/// Trial division by every monic polynomial of degree `1..=r/2`.
fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let r = modulus.len() - 1;
    for d in 1..=r / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut cand = Vec::with_capacity(d + 1);
            let mut t = idx;
            for _ in 0..d {
                cand.push((t % p as u64) as u32);
                t /= p as u64;
            }
            cand.push(1);
            if poly_rem(modulus, &cand, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Shared handle on [`FieldParams`].
#[derive(Clone, Debug)]
pub struct Field(Arc<FieldParams>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(params: FieldParams) -> Self {
        Self(Arc::new(params))
    }

    /// `F_{p^r}` with the built-in modulus for `p ∈ {2,3,5,7}`, `r ≤ 4`.
    pub fn builtin(p: u32, r: usize) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        let modulus = builtin_modulus(p, r).ok_or_else(|| {
            Error::InvalidField(format!("no built-in modulus for p = {p}, r = {r}"))
        })?;
        Ok(Self::new(FieldParams::new(p, r, modulus)?))
    }

    /// `F_{p^r}` with the built-in modulus when one exists, otherwise the
    /// lexicographically first monic irreducible polynomial of degree `r`.
    pub fn extension(p: u32, r: usize) -> Result<Self> {
        if let Ok(f) = Self::builtin(p, r) {
            return Ok(f);
        }
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if r == 0 {
            return Err(Error::InvalidField("extension degree must be ≥ 1".into()));
        }
        let q = (p as u64).checked_pow(r as u32).unwrap_or(u64::MAX);
        if q > MAX_FIELD_ORDER {
            return Err(Error::InvalidField(format!("field order {p}^{r} too large")));
        }
        for mut idx in 0..q {
            let mut m = Vec::with_capacity(r + 1);
            for _ in 0..r {
                m.push((idx % p as u64) as u32);
                idx /= p as u64;
            }
            m.push(1);
            if m[0] != 0 && is_irreducible(&m, p) {
                return Ok(Self::new(FieldParams::new(p, r, m)?));
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    /// Prime field `F_p` for any supported prime.
    pub fn prime(p: u32) -> Result<Self> {
        if let Ok(f) = Self::builtin(p, 1) {
            return Ok(f);
        }
        Ok(Self::new(FieldParams::new(p, 1, vec![0, 1])?))
    }

    /// Field with a user modulus (little-endian, monic).
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Self> {
        let r = modulus.len().saturating_sub(1);
        Ok(Self::new(FieldParams::new(p, r, modulus)?))
    }

    pub fn params(&self) -> &FieldParams {
        &self.0
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn r(&self) -> usize {
        self.0.r
    }

    pub fn order(&self) -> u64 {
        self.0.order()
    }

    pub fn zero(&self) -> FqElement {
        FqElement { field: self.clone(), coeffs: vec![0; self.r()] }
    }

    pub fn one(&self) -> FqElement {
        self.from_int(1)
    }

    /// Image of an integer through the prime field.
    pub fn from_int(&self, n: i64) -> FqElement {
        let mut e = self.zero();
        e.coeffs[0] = n.rem_euclid(self.p() as i64) as u32;
        e
    }

    /// The generator `b` (root of the modulus). For `r = 1` this is the root
    /// of the degree-1 modulus, an element of `F_p`.
    pub fn generator(&self) -> FqElement {
        if self.r() == 1 {
            let m = self.params().modulus();
            return self.from_int(-(m[0] as i64));
        }
        let mut e = self.zero();
        e.coeffs[1] = 1;
        e
    }

    /// Element from polynomial-basis coordinates; entries must lie in `[0, p)`.
    pub fn element(&self, coeffs: Vec<u32>) -> Result<FqElement> {
        if coeffs.len() != self.r() || coeffs.iter().any(|&c| c >= self.p()) {
            return Err(Error::CoefficientNotInField(format!("{coeffs:?}")));
        }
        Ok(FqElement { field: self.clone(), coeffs })
    }

    /// All `q` elements in a fixed order (lexicographic on coordinates, zero first).
    pub fn elements(&self) -> impl Iterator<Item = FqElement> + '_ {
        let p = self.p() as u64;
        let r = self.r();
        (0..self.order()).map(move |mut idx| {
            let mut coeffs = Vec::with_capacity(r);
            for _ in 0..r {
                coeffs.push((idx % p) as u32);
                idx /= p;
            }
            FqElement { field: self.clone(), coeffs }
        })
    }

    /// Parses an element literal: an integer when `r = 1`, otherwise a
    /// polynomial in the generator `b` such as `b+1` or `2*b^2+b`.
    pub fn parse_element(&self, text: &str) -> Result<FqElement> {
        crate::literal::parse_element(text, self)
    }

    // ---- crate-internal slice kernels ----
    //
    // A packed element is a slice of length r. An accumulator holds an
    // unreduced product polynomial of length 2r-1 in u64.

    pub(crate) fn acc_len(&self) -> usize {
        2 * self.r() - 1
    }

    #[inline]
    pub(crate) fn acc_mul(&self, acc: &mut [u64], a: &[u32], b: &[u32]) {
        let r = self.r();
        if r == 1 {
            acc[0] += a[0] as u64 * b[0] as u64;
            return;
        }
        for i in 0..r {
            let ai = a[i] as u64;
            if ai == 0 {
                continue;
            }
            for j in 0..r {
                acc[i + j] += ai * b[j] as u64;
            }
        }
    }

    /// Reduces an accumulator into `out` (length r) and clears it.
    #[inline]
    pub(crate) fn acc_reduce(&self, acc: &mut [u64], out: &mut [u32]) {
        let p = self.p() as u64;
        let r = self.r();
        if r == 1 {
            out[0] = (acc[0] % p) as u32;
            acc[0] = 0;
            return;
        }
        for v in acc.iter_mut() {
            *v %= p;
        }
        let m = self.params().modulus();
        for deg in (r..acc.len()).rev() {
            let c = acc[deg];
            if c == 0 {
                continue;
            }
            acc[deg] = 0;
            for j in 0..r {
                let idx = deg - r + j;
                acc[idx] = (acc[idx] + (p - c) * m[j] as u64) % p;
            }
        }
        for i in 0..r {
            out[i] = acc[i] as u32;
            acc[i] = 0;
        }
    }

    #[inline]
    pub(crate) fn slot_add(&self, out: &mut [u32], a: &[u32]) {
        let p = self.p();
        for (o, &x) in out.iter_mut().zip(a) {
            let s = *o + x;
            *o = if s >= p { s - p } else { s };
        }
    }

    #[inline]
    pub(crate) fn slot_sub(&self, out: &mut [u32], a: &[u32]) {
        let p = self.p();
        for (o, &x) in out.iter_mut().zip(a) {
            *o = if *o >= x { *o - x } else { *o + p - x };
        }
    }

    #[inline]
    pub(crate) fn slot_is_zero(a: &[u32]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    pub(crate) fn slot_mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let mut acc = vec![0u64; self.acc_len()];
        let mut out = vec![0u32; self.r()];
        self.acc_mul(&mut acc, a, b);
        self.acc_reduce(&mut acc, &mut out);
        out
    }

    /// Multiplies a packed element by an integer reduced mod p.
    pub(crate) fn slot_scale_int(&self, a: &mut [u32], n: u64) {
        let p = self.p() as u64;
        let n = n % p;
        for x in a.iter_mut() {
            *x = (*x as u64 * n % p) as u32;
        }
    }

    pub(crate) fn slot_inv(&self, a: &[u32]) -> Result<Vec<u32>> {
        let p = self.p();
        let mut x = a.to_vec();
        trim(&mut x);
        if x.is_empty() {
            return Err(Error::DivisionByZero);
        }
        if self.r() == 1 {
            return Ok(vec![inv_mod_p(a[0], p)]);
        }
        // Extended Euclid: find s with s*x ≡ 1 mod modulus.
        let m = self.params().modulus().to_vec();
        let (mut r0, mut r1) = (m, x);
        let (mut s0, mut s1): (Vec<u32>, Vec<u32>) = (Vec::new(), vec![1]);
        while !r1.is_empty() {
            let (q, rem) = poly_divmod(&r0, &r1, p);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1, p), p);
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r0 is a nonzero constant since the modulus is irreducible.
        let c = inv_mod_p(r0[0], p) as u64;
        let mut out = vec![0u32; self.r()];
        for (i, &v) in s0.iter().enumerate() {
            out[i] = (v as u64 * c % p as u64) as u32;
        }
        Ok(out)
    }

    /// `a^p`.
    pub(crate) fn slot_frobenius(&self, a: &[u32]) -> Vec<u32> {
        if self.r() == 1 {
            return a.to_vec();
        }
        self.slot_pow(a, self.p() as u64)
    }

    pub(crate) fn slot_pow(&self, a: &[u32], mut e: u64) -> Vec<u32> {
        let mut base = a.to_vec();
        let mut acc = vec![0u32; self.r()];
        acc[0] = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.slot_mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.slot_mul(&base, &base);
            }
        }
        acc
    }
}

/// An element of `F_{p^r}` in polynomial-basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqElement {
    field: Field,
    coeffs: Vec<u32>,
}

impl FqElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        Field::slot_is_zero(&self.coeffs)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::IncompatibleField)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        self.field.slot_add(&mut out.coeffs, &other.coeffs);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        self.field.slot_sub(&mut out.coeffs, &other.coeffs);
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.field.zero();
        self.field.slot_sub(&mut out.coeffs, &self.coeffs);
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self { field: self.field.clone(), coeffs: self.field.slot_mul(&self.coeffs, &other.coeffs) })
    }

    /// Inverse by the extended Euclidean algorithm on polynomials.
    pub fn inv(&self) -> Result<Self> {
        Ok(Self { field: self.field.clone(), coeffs: self.field.slot_inv(&self.coeffs)? })
    }

    pub fn pow(&self, e: u64) -> Self {
        Self { field: self.field.clone(), coeffs: self.field.slot_pow(&self.coeffs, e) }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        let mut out = self.clone();
        let p = self.field.p() as i64;
        self.field.slot_scale_int(&mut out.coeffs, n.rem_euclid(p) as u64);
        out
    }

    pub fn frobenius(&self) -> Self {
        Self { field: self.field.clone(), coeffs: self.field.slot_frobenius(&self.coeffs) }
    }

    /// Multiplicative order: the least `n ≥ 1` with `x^n = 1`. Computed by
    /// factoring `q - 1` and stripping prime factors while the power stays 1.
    pub fn mult_order(&self) -> Result<u64> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let group = self.field.order() - 1;
        let mut n = group;
        for ell in prime_factors(group) {
            while n % ell == 0 && self.pow(n / ell).is_one() {
                n /= ell;
            }
        }
        Ok(n)
    }

    /// Integer representative when the element lies in the prime field.
    pub fn as_prime_field(&self) -> Option<u32> {
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }

    pub(crate) fn from_slot(field: &Field, coeffs: &[u32]) -> Self {
        Self { field: field.clone(), coeffs: coeffs.to_vec() }
    }

    /// Whether the element needs parentheses when used as a coefficient.
    pub(crate) fn is_compound(&self) -> bool {
        self.coeffs.iter().filter(|&&c| c != 0).count() > 1
    }
}

impl fmt::Display for FqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.r() == 1 {
            return write!(f, "{}", self.coeffs[0]);
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "b")?,
                (1, c) => write!(f, "{c}*b")?,
                (i, 1) => write!(f, "b^{i}")?,
                (i, c) => write!(f, "{c}*b^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> Field {
        Field::builtin(2, 2).unwrap()
    }

    #[test]
    fn builtin_moduli_are_irreducible() {
        for p in [2, 3, 5, 7] {
            for r in 1..=4 {
                let f = Field::builtin(p, r).unwrap();
                assert_eq!(f.order(), (p as u64).pow(r as u32));
            }
        }
    }

    #[test]
    fn f4_modulus_is_b2_b_1() {
        assert_eq!(f4().params().modulus(), &[1, 1, 1]);
    }

    #[test]
    fn addition_examples() {
        let f2 = Field::builtin(2, 1).unwrap();
        assert!(f2.one().add(&f2.one()).unwrap().is_zero());
        let f = f4();
        let b = f.generator();
        let b1 = b.add(&f.one()).unwrap();
        assert!(b.add(&b1).unwrap().is_one());
        let f3 = Field::builtin(3, 1).unwrap();
        assert_eq!(f3.from_int(2).add(&f3.from_int(2)).unwrap(), f3.from_int(1));
    }

    #[test]
    fn multiplication_examples() {
        let f = f4();
        let b = f.generator();
        let b1 = b.add(&f.one()).unwrap();
        assert_eq!(b.mul(&b).unwrap(), b1);
        assert_eq!(b.mul(&f.one()).unwrap(), b);
        let f3 = Field::builtin(3, 1).unwrap();
        assert!(f3.from_int(2).mul(&f3.from_int(2)).unwrap().is_one());
    }

    #[test]
    fn inverse_examples() {
        let f = f4();
        let b = f.generator();
        assert_eq!(b.inv().unwrap(), b.add(&f.one()).unwrap());
        assert!(f.one().inv().unwrap().is_one());
        let f5 = Field::builtin(5, 1).unwrap();
        assert_eq!(f5.from_int(2).inv().unwrap(), f5.from_int(3));
        assert_eq!(f.zero().inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn order_examples() {
        assert_eq!(f4().generator().mult_order().unwrap(), 3);
        assert_eq!(f4().one().mult_order().unwrap(), 1);
        let f5 = Field::builtin(5, 1).unwrap();
        assert_eq!(f5.from_int(2).mult_order().unwrap(), 4);
        assert_eq!(f5.zero().mult_order(), Err(Error::DivisionByZero));
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let a = Field::builtin(2, 2).unwrap().one();
        let b = Field::builtin(3, 1).unwrap().one();
        assert_eq!(a.add(&b), Err(Error::IncompatibleField));
        assert_eq!(a.mul(&b), Err(Error::IncompatibleField));
    }

    #[test]
    fn reducible_and_bad_moduli_rejected() {
        // b^2 + 1 = (b+1)^2 over F_2
        assert_eq!(Field::with_modulus(2, vec![1, 0, 1]), Err(Error::ReducibleModulus { p: 2 }));
        assert!(matches!(Field::with_modulus(4, vec![1, 1]), Err(Error::NotPrime(4))));
        assert!(matches!(Field::with_modulus(3, vec![1, 1, 2]), Err(Error::InvalidField(_))));
        // x^2 + 1 is irreducible over F_3
        assert_eq!(Field::with_modulus(3, vec![1, 0, 1]).unwrap().order(), 9);
    }

    #[test]
    fn element_literals() {
        let f = f4();
        assert_eq!(f.parse_element("b+1").unwrap().to_string(), "b+1");
        assert_eq!(f.parse_element("b*b").unwrap().to_string(), "b+1");
        let f9 = Field::builtin(3, 2).unwrap();
        assert_eq!(f9.parse_element("2*b+1").unwrap().coeffs(), &[1, 2]);
        let f3 = Field::builtin(3, 1).unwrap();
        assert_eq!(f3.parse_element("-1").unwrap(), f3.from_int(2));
        assert!(matches!(f3.parse_element("b"), Err(Error::CoefficientNotInField(_))));
    }

    /// Brute-force oracle: multiply coordinate polynomials as integers, then
    /// reduce by long division with the modulus.
    fn oracle_mul(f: &Field, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = f.p() as i64;
        let r = f.r();
        let mut prod = vec![0i64; 2 * r];
        for i in 0..r {
            for j in 0..r {
                prod[i + j] += a[i] as i64 * b[j] as i64;
            }
        }
        let m = f.params().modulus();
        for deg in (r..2 * r).rev() {
            let c = prod[deg].rem_euclid(p);
            for j in 0..=r {
                prod[deg - r + j] -= c * m[j] as i64;
            }
        }
        prod[..r].iter().map(|v| v.rem_euclid(p) as u32).collect()
    }

    #[test]
    fn tables_match_oracle() {
        for (p, r) in [(2, 1), (3, 1), (2, 2), (5, 1), (2, 3), (3, 2)] {
            let f = Field::builtin(p, r).unwrap();
            let elems: Vec<_> = f.elements().collect();
            for x in &elems {
                for y in &elems {
                    let sum: Vec<u32> = x.coeffs().iter().zip(y.coeffs()).map(|(a, b)| (a + b) % p).collect();
                    assert_eq!(x.add(y).unwrap().coeffs(), &sum[..]);
                    assert_eq!(x.mul(y).unwrap().coeffs(), &oracle_mul(&f, x.coeffs(), y.coeffs())[..]);
                }
            }
        }
    }

    #[test]
    fn fermat_inverse_and_order_divisibility() {
        for (p, r) in [(2, 1), (2, 2), (3, 2), (2, 4), (5, 2), (2, 8)] {
            let f = if r == 8 {
                // b^8 + b^4 + b^3 + b + 1
                Field::with_modulus(2, vec![1, 1, 0, 1, 1, 0, 0, 0, 1]).unwrap()
            } else {
                Field::builtin(p, r).unwrap()
            };
            let q = f.order();
            for x in f.elements().skip(1) {
                assert!(x.pow(q - 1).is_one());
                let inv = x.inv().unwrap();
                assert!(x.mul(&inv).unwrap().is_one());
                assert!(inv.mul(&x).unwrap().is_one());
                let ord = x.mult_order().unwrap();
                assert_eq!((q - 1) % ord, 0);
                assert!(x.pow(ord).is_one());
            }
        }
    }
}
