//! Solves g∘f = λg three ways and checks structure and size of the coefficients.

use charp_linearize::schroder::{
    check_coefficient_bound, check_structural_zeros, solve_sfe, solve_sfe_multinomial, solve_specialized_p_plus_1,
    SolveOptions,
};
use charp_linearize::{fmt_q, Field, PowerSeriesMap, Result};

fn main() -> Result<()> {
    let f3 = Field::builtin(3, 1)?;
    let f = PowerSeriesMap::from_literals(&f3, 1, "2+T", &[(3, "1"), (6, "T^-1")])?;
    let g = solve_sfe(&f, 60, SolveOptions::default())?;
    print!("{}", g.growth_csv().lines().take(13).collect::<Vec<_>>().join("\n"));
    println!("\n...");
    let sz = check_structural_zeros(&g, &f);
    let bounds = check_coefficient_bound(&g, &f.gauge()?.unwrap());
    println!("structural-zero violations: {:?}", sz.violations);
    println!("bound violations: {:?}, margin at k' = 3: {}", bounds.violations, bounds.margin_at(3).map_or("none".into(), fmt_q));

    let m = solve_sfe_multinomial(&f, 20, 64)?;
    println!("multinomial route agrees to degree 20: {}", m.agrees_with(&g));

    let h = PowerSeriesMap::from_literals(&f3, 1, "1+T", &[(4, "1")])?;
    let s = solve_specialized_p_plus_1(&h, 30, 64)?;
    let t = solve_sfe(&h, 91, SolveOptions::default())?;
    println!("specialized route agrees to degree 91: {}", s.agrees_with(&t));
    Ok(())
}
