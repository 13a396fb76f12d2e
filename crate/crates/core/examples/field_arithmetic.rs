//! Arithmetic in F_{p^r}: Conway moduli, inverses, Frobenius, orders.

use charp_linearize::{Field, Result};

fn main() -> Result<()> {
    let f4 = Field::builtin(2, 2)?;
    let b = f4.generator();
    println!("F_4 modulus (little-endian): {:?}", f4.params().modulus());
    println!("b^2 = {}", b.pow(2));
    println!("1/b = {}", b.inv()?);
    println!("frobenius(b) = {}", b.frobenius());
    println!("ord(b) = {}", b.mult_order()?);

    let f9 = Field::builtin(3, 2)?;
    let x = f9.parse_element("2*b+1")?;
    println!("in F_9: ({x})^-1 = {}, order {}", x.inv()?, x.mult_order()?);

    let f27 = Field::with_modulus(3, vec![1, 2, 0, 1])?;
    let orders: Vec<u64> = f27.elements().skip(1).map(|e| e.mult_order().unwrap()).collect();
    let generators = orders.iter().filter(|&&o| o == 26).count();
    println!("F_27 has {generators} primitive elements");
    Ok(())
}
