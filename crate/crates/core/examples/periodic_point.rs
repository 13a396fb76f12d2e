//! Indifferent periodic points on the boundary sphere S_σ, found by Hensel
//! lifting in ramified towers F_{p^r}((T^{1/e})).

use charp_linearize::discs::{find_periodic_point, verify_indifferent, Disc, SearchOptions, SearchOutcome, Tower};
use charp_linearize::schroder::disc_data;
use charp_linearize::{fmt_q, Field, PowerSeriesMap, Result};

fn main() -> Result<()> {
    let cases = [(2, 1, "1+T", 2, 1), (2, 2, "b+T", 4, 2), (3, 1, "2+T", 3, 2)];
    for (p, r, lam, k, r_max) in cases {
        let f = PowerSeriesMap::from_literals(&Field::builtin(p, r)?, 1, lam, &[(k, "1")])?;
        let (_, _, dp) = disc_data(&f)?;
        let v_sigma = dp.unwrap().v_sigma;
        let e = *v_sigma.denom() as u32;
        let tower = Tower { r_max, e };
        println!("λ = {lam} over F_{}^{r}, f = λx + x^{k}, sphere v = {}", p, fmt_q(v_sigma));
        match find_periodic_point(&f, &Disc::closed(v_sigma), tower, &SearchOptions::new(k as u32, 32))? {
            SearchOutcome::Found(pt) => {
                let check = verify_indifferent(&pt.map, &pt.point, pt.kappa)?;
                println!("  period {} in F_{}^{}((T^(1/{})))", pt.kappa, p, pt.r, pt.e);
                println!("  x = {}", pt.point);
                println!("  multiplier {} (valuation {}), residual {}", check.multiplier, check.multiplier_valuation, check.residual);
            }
            SearchOutcome::NotFound { .. } => println!("  not found in the tower"),
        }
    }
    Ok(())
}
