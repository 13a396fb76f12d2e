//! Certifies the linearization disc for the three certificate levels.

use charp_linearize::discs::{classify_linearization_disc, ClassifyOptions};
use charp_linearize::{fmt_q, Field, PowerSeriesMap, Result};

fn main() -> Result<()> {
    let f2 = Field::builtin(2, 1)?;
    let cases = [
        ("λx + x^2", PowerSeriesMap::from_literals(&f2, 1, "1+T", &[(2, "1")])?),
        ("λx + x^4", PowerSeriesMap::from_literals(&f2, 1, "1+T", &[(4, "1")])?),
        ("λx + T x^2 + x^4", PowerSeriesMap::from_literals(&f2, 1, "1+T", &[(2, "T"), (4, "1")])?),
    ];
    for (name, f) in cases {
        let rep = classify_linearization_disc(&f, &ClassifyOptions::default())?;
        println!(
            "{name}: {} on the open disc v > {}, deg(g, D_σ) = {}, deg(g, closed D_σ) = {}",
            rep.level.as_str(),
            fmt_q(rep.disc.v_radius),
            rep.degree_open_sigma,
            rep.degree_closed_sigma
        );
        for note in &rep.notes {
            println!("  {note}");
        }
    }
    Ok(())
}
