//! Random instances shared by the integration tests.

#![allow(dead_code)]

use charp_linearize::{Field, FqElement, LaurentSeries, PowerSeriesMap};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_nonzero(rng: &mut impl Rng, field: &Field) -> FqElement {
    loop {
        let coeffs = (0..field.r()).map(|_| rng.gen_range(0..field.p())).collect();
        let x = field.element(coeffs).unwrap();
        if !x.is_zero() {
            return x;
        }
    }
}

/// Exact Laurent polynomial with lowest exponent `lead` and up to `extra`
/// further random terms.
pub fn random_poly(rng: &mut impl Rng, field: &Field, lead: i64, extra: usize) -> LaurentSeries {
    let mut terms = vec![(lead, random_nonzero(rng, field))];
    for _ in 0..rng.gen_range(0..=extra) {
        let e = lead + rng.gen_range(1..=4);
        terms.push((e, random_nonzero(rng, field)));
    }
    let mut s = LaurentSeries::exact_zero(field, 1);
    for (e, c) in terms {
        s = s.add(&LaurentSeries::monomial(&c, e, 1)).unwrap();
    }
    if s.is_zero() {
        LaurentSeries::monomial(&field.one(), lead, 1)
    } else {
        s
    }
}

/// Unit multiplier `c + (terms of positive degree)` with a nonzero
/// nonconstant part, so it is never a root of unity.
pub fn random_multiplier(rng: &mut impl Rng, field: &Field) -> LaurentSeries {
    let c = LaurentSeries::constant(&random_nonzero(rng, field), 1);
    let lead = rng.gen_range(1..=3);
    c.add(&random_poly(rng, field, lead, 2)).unwrap()
}

/// Random `λx + Σ a_i x^i` with `1..=terms` nonlinear degrees drawn from `degrees`.
pub fn random_map(rng: &mut impl Rng, field: &Field, degrees: &[usize], terms: usize) -> PowerSeriesMap {
    let lambda = random_multiplier(rng, field);
    let n = rng.gen_range(1..=terms.min(degrees.len()));
    let chosen: Vec<usize> = degrees.choose_multiple(rng, n).copied().collect();
    let mut nl = Vec::new();
    for d in chosen {
        let lead = rng.gen_range(-2..=2);
        nl.push((d, random_poly(rng, field, lead, 2)));
    }
    PowerSeriesMap::new(lambda, nl).unwrap()
}

/// Random member of the `p`-divisible family with nonlinear degrees `≤ max_degree`.
pub fn random_family_map(rng: &mut impl Rng, field: &Field, max_degree: usize) -> PowerSeriesMap {
    let p = field.p() as usize;
    let degrees: Vec<usize> = (p..=max_degree).step_by(p).collect();
    random_map(rng, field, &degrees, 3)
}

pub fn exact(text: &str, field: &Field) -> LaurentSeries {
    LaurentSeries::parse_exact(text, field, 1).unwrap()
}

pub fn map(p: u32, r: usize, lambda: &str, terms: &[(usize, &str)]) -> PowerSeriesMap {
    PowerSeriesMap::from_literals(&Field::builtin(p, r).unwrap(), 1, lambda, terms).unwrap()
}
