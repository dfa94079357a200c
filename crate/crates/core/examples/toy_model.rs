//! The 1|1-dimensional toy model: both forms of the action and the
//! supersymmetry check.

use supergeom::fixtures::{self, FIELD_GENERATORS, SUSY_GENERATOR};
use supergeom::toy_model::{self, ToyFields};
use supergeom::{GrassmannNumber, Grid};

fn main() -> supergeom::Result<()> {
    let n = 6;
    let g = Grid::circle(64);
    let mut r = fixtures::rng(1);
    let f = ToyFields::new(
        fixtures::trig_even(&mut r, &g, n, 4, FIELD_GENERATORS),
        fixtures::trig_odd(&mut r, &g, n, 4, FIELD_GENERATORS),
    )?;
    let component = toy_model::toy_action_component(&f)?;
    let superfield = toy_model::toy_action_superfield(&f.superfield())?;
    println!("component  A = {component}");
    println!("difference   = {:.2e}", (&component - &superfield).max_abs());

    let q = GrassmannNumber::generator(n, SUSY_GENERATOR)?;
    println!(
        "invariance residual = {:.2e}",
        toy_model::toy_invariance_residual(&f, &q)?
    );
    println!("residual with the other fermion sign = {:.2e}", {
        let conv = toy_model::ToyConventions {
            fermion_sign: 1.0,
            ..Default::default()
        };
        toy_model::toy_invariance_residual_with(&f, &q, &conv)?
    });
    Ok(())
}
