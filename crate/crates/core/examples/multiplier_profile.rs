//! Resonance data of a multiplier: m, v(1-λ^m), k', small divisors, radii.

use charp_linearize::multiplier::{disc_profile, mult_profile, product_small_divisors, small_divisor_direct};
use charp_linearize::{fmt_q, Field, LaurentSeries, PowerSeriesMap, Result};

fn main() -> Result<()> {
    for (p, r, lam) in [(2, 1, "1+T"), (2, 2, "b+T"), (3, 1, "2+T"), (5, 1, "3+T+T^2")] {
        let field = Field::builtin(p, r)?;
        let lambda = LaurentSeries::parse_exact(lam, &field, 1)?;
        let pr = mult_profile(&lambda)?;
        println!("λ = {lam} over F_{}: m = {}, v_m = {}, k' = {}", field.order(), pr.m, fmt_q(pr.v_m), pr.k_prime);
        let table: Vec<String> = (1..=12).map(|n| format!("{}", small_divisor_direct(&lambda, n).unwrap())).collect();
        println!("  v(1-λ^n), n = 1..12: {}", table.join(" "));
        let f = PowerSeriesMap::new(lambda.clone(), [(pr.k_prime as usize, LaurentSeries::one(&field, 1))])?;
        let dp = disc_profile(&pr, &f.gauge()?.unwrap())?;
        println!("  λx + x^{}: v_rho = {}, v_sigma = {}", pr.k_prime, fmt_q(dp.v_rho), fmt_q(dp.v_sigma));
        if pr.m == 1 {
            let pf = product_small_divisors(&pr, 3)?;
            println!("  Σ v(1-λ^(ip)), i ≤ p^2: {} (closed form {})", fmt_q(pf.summed), fmt_q(pf.closed_form));
        }
    }
    Ok(())
}
