//! Berezin integral over the super circle, in standard and adapted
//! coordinates.

use supergeom::berezin::{berezin_integrate, BerezinDomain};
use supergeom::superdomain::{Embedding, SuperFunction};
use supergeom::{GrassmannNumber, Grid, GridField};

fn main() -> supergeom::Result<()> {
    let n = 3;
    let g = Grid::circle(64);
    let xi = |i| GrassmannNumber::generator(n, i);
    let f0 = GridField::from_fn(&g, n, |x| x[0].cos());
    let f1 = GridField::constant_times(&g, &xi(0)?, |x| 1.0 + x[0].sin().powi(2));
    let f = SuperFunction::from_terms(&g, 1, n, [(vec![], f0), (vec![0], f1)])?;

    let standard = berezin_integrate(&f, &BerezinDomain::new(g.clone(), 1))?;
    println!(
        "standard embedding: {standard}  (3π ξ0 = {:.12})",
        3.0 * std::f64::consts::PI
    );

    let image = GridField::constant_times(&g, &xi(2)?, |x| x[0].cos());
    let adapted = BerezinDomain::new(g, 1).with_embedding(Embedding::new(vec![image])?);
    println!("adapted embedding:  {}", berezin_integrate(&f, &adapted)?);
    Ok(())
}
