//! Truncated Laurent series over F_q((T)) with tracked precision.

use charp_linearize::{Field, LaurentSeries, Result};

fn main() -> Result<()> {
    let f2 = Field::builtin(2, 1)?;
    let x = LaurentSeries::parse("T^-1 + 1 + T^3", &f2, 1, 10)?;
    let y = LaurentSeries::parse_exact("1 + T", &f2, 1)?;
    println!("x = {x}");
    println!("v(x) = {}", x.valuation());
    println!("x*y = {}", x.mul(&y)?);
    println!("1/(1+T) to 12 digits = {}", y.inv_rel(12)?);
    println!("x^2 = {}", x.pow(2));
    println!("frobenius(x) = {}", x.frobenius());

    // Cancellation lowers the horizon honestly: the difference is zero to precision.
    let z = x.sub(&x.truncate(6))?;
    println!("x - trunc6(x) = {z}, valuation {}", z.valuation());

    // Ramified tower U^3 = T.
    let u = LaurentSeries::parse_exact("U + T", &f2, 3)?;
    println!("in F_2((T^(1/3))): ({u})^3 = {}, v = {}", u.pow(3), u.pow(3).valuation());
    Ok(())
}
