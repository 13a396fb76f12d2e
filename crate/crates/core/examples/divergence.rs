//! Divergence certificate for λx + x^(p+1) with |1-λ| < 1.

use charp_linearize::schroder::certify_divergence;
use charp_linearize::{Field, PowerSeriesMap, Result, Valuation};

fn main() -> Result<()> {
    for (p, n_max) in [(2, 8), (3, 4)] {
        let field = Field::builtin(p, 1)?;
        let f = PowerSeriesMap::from_literals(&field, 1, "1+T", &[(p as usize + 1, "1")])?;
        let cert = certify_divergence(&f, n_max, 64, true)?;
        println!("p = {p}: verdict {:?}, generic solver agrees: {:?}", cert.verdict, cert.generic_agrees);
        for row in &cert.rows {
            let predicted = row.predicted.map(Valuation::Finite).map_or("-".to_string(), |v| v.to_string());
            println!("  N = {}  v(b_{}) = {}  predicted {}", row.n, row.degree, row.computed, predicted);
        }
    }
    Ok(())
}
