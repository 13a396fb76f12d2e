//! Integer multipliers reduced through the prime field.
//!
//! Binomial and multinomial coefficients are never formed as machine
//! integers: their residues mod `p` come from base-`p` digits (Lucas), and a
//! multinomial vanishes mod `p` exactly when adding its parts in base `p`
//! carries, i.e. when `v_p(l!) > Σ v_p(α_i!)`.

/// `n mod p` for a possibly negative integer.
pub fn int_mod(n: i64, p: u32) -> u32 {
    n.rem_euclid(p as i64) as u32
}

fn digits(mut n: u64, p: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while n > 0 {
        out.push(n % p);
        n /= p;
    }
    out
}

fn small_factorial_mod(n: u64, p: u64) -> u64 {
    (1..=n).fold(1, |acc, i| acc * i % p)
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut e = p - 2;
    let mut base = a % p;
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// `C(n, k) mod p` by Lucas' theorem.
pub fn binomial_mod_p(n: u64, k: u64, p: u32) -> u32 {
    if k > n {
        return 0;
    }
    let p = p as u64;
    let (mut n, mut k) = (n, k);
    let mut acc = 1u64;
    while n > 0 || k > 0 {
        let (nd, kd) = (n % p, k % p);
        if kd > nd {
            return 0;
        }
        let c = small_factorial_mod(nd, p)
            * inv_mod(small_factorial_mod(kd, p) * small_factorial_mod(nd - kd, p) % p, p)
            % p;
        acc = acc * c % p;
        n /= p;
        k /= p;
    }
    acc as u32
}

/// Legendre's formula: `v_p(n!)`.
pub fn factorial_valuation(mut n: u64, p: u32) -> u64 {
    let p = p as u64;
    let mut v = 0;
    while n > 0 {
        n /= p;
        v += n;
    }
    v
}

/// `l! / (α_1! ⋯ α_k!) mod p` where `l = Σ α_i`.
pub fn multinomial_mod_p(parts: &[u64], p: u32) -> u32 {
    let l: u64 = parts.iter().sum();
    let carry = factorial_valuation(l, p) - parts.iter().map(|&a| factorial_valuation(a, p)).sum::<u64>();
    if carry > 0 {
        return 0;
    }
    // No carries: the multinomial factors digit by digit.
    let pp = p as u64;
    let ld = digits(l, pp);
    let pd: Vec<Vec<u64>> = parts.iter().map(|&a| digits(a, pp)).collect();
    let mut acc = 1u64;
    for (pos, &d) in ld.iter().enumerate() {
        let mut denom = 1u64;
        for a in &pd {
            denom = denom * small_factorial_mod(a.get(pos).copied().unwrap_or(0), pp) % pp;
        }
        acc = acc * small_factorial_mod(d, pp) % pp * inv_mod(denom, pp) % pp;
    }
    acc as u32
}

/// `p`-adic valuation of a positive integer.
pub fn int_valuation(mut n: u64, p: u32) -> u32 {
    let p = p as u64;
    let mut v = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_binomial(n: u64, k: u64) -> u128 {
        if k > n {
            return 0;
        }
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc
    }

    fn exact_factorial(n: u64) -> u128 {
        (1..=n as u128).product()
    }

    #[test]
    fn lucas_matches_integer_binomials() {
        for p in [2u32, 3, 5, 7] {
            for n in 0..40u64 {
                for k in 0..=n + 1 {
                    assert_eq!(binomial_mod_p(n, k, p) as u128, exact_binomial(n, k) % p as u128, "C({n},{k}) mod {p}");
                }
            }
        }
    }

    #[test]
    fn multinomial_matches_integer_division() {
        let cases: &[&[u64]] = &[&[2], &[0, 2], &[1, 1], &[1, 0, 1], &[3, 2, 1], &[4, 4], &[5, 3, 2, 1], &[9, 0, 3]];
        for p in [2u32, 3, 5] {
            for parts in cases {
                let l: u64 = parts.iter().sum();
                let denom: u128 = parts.iter().map(|&a| exact_factorial(a)).product();
                let exact = exact_factorial(l) / denom;
                assert_eq!(multinomial_mod_p(parts, p) as u128, exact % p as u128, "{parts:?} mod {p}");
            }
        }
    }

    #[test]
    fn char_two_kills() {
        // 2!/2! = 1 survives, 2!/(1!1!) = 2 vanishes in characteristic 2
        assert_eq!(multinomial_mod_p(&[0, 2], 2), 1);
        assert_eq!(multinomial_mod_p(&[1, 0, 1], 2), 0);
    }

    #[test]
    fn valuations() {
        assert_eq!(factorial_valuation(10, 2), 8);
        assert_eq!(int_valuation(24, 2), 3);
        assert_eq!(int_valuation(7, 2), 0);
        assert_eq!(int_mod(-1, 5), 4);
    }
}
