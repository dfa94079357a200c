//! The odd derivations D and Q on the super circle, and an odd coordinate
//! change.

use supergeom::superdomain::{apply_d, apply_q, pullback_coordinate_change, CoordinateChange, SuperFunction};
use supergeom::{GrassmannNumber, Grid, GridField};

fn main() -> supergeom::Result<()> {
    let n = 4;
    let g = Grid::circle(32);
    let xi = |i| GrassmannNumber::generator(n, i);
    let phi = GridField::from_fn(&g, n, |x| x[0].sin());
    let psi = GridField::constant_times(&g, &xi(0)?, |x| x[0].cos());
    let f = SuperFunction::from_terms(&g, 1, n, [(vec![], phi), (vec![0], psi)])?;

    let dd = apply_d(&apply_d(&f)?)?;
    println!("|D²f − ∂f| = {:.2e}", dd.try_sub(&f.partial_even(0)?)?.max_abs());

    let q = xi(1)?;
    let dq = apply_d(&apply_q(&f, &q)?)?;
    let qd = apply_q(&apply_d(&f)?, &q)?;
    println!("|DQf − QDf| = {:.2e}", dq.try_sub(&qd)?.max_abs());

    let mut change = CoordinateChange::identity(&g, n);
    change.gamma0 = GridField::constant(&g, &xi(2)?);
    let pulled = pullback_coordinate_change(&f, &change)?;
    println!(
        "after η = ξ2 + η̃, the body coefficient at x = 0 is {}",
        pulled.coeff(0).at(0)
    );
    Ok(())
}
