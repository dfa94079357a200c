//! Products, parity and functions of Grassmann numbers.

use supergeom::GrassmannNumber;

fn main() -> supergeom::Result<()> {
    let n = 4;
    let xi = |i| GrassmannNumber::generator(n, i);
    let a = &GrassmannNumber::scalar(n, 2.0) + &(&xi(0)? * &xi(1)?);
    let theta = &xi(2)? + &xi(3)?.scale(0.5);

    println!("a = {a}");
    println!("theta = {theta}, parity {:?}", theta.parity());
    println!("theta * theta = {}", &theta * &theta);
    println!("xi0 xi1 + xi1 xi0 = {}", &(&xi(0)? * &xi(1)?) + &(&xi(1)? * &xi(0)?));
    // the series stops once the soul power vanishes
    println!("1/a = {}", a.recip()?);
    println!("sqrt(a) = {}", a.sqrt()?);
    println!("sqrt(a)^2 - a = {}", &(&a.sqrt()? * &a.sqrt()?) - &a);
    Ok(())
}
