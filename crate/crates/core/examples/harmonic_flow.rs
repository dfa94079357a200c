//! Harmonic map flow from a perturbed identity map of the torus.

use supergeom::sigma2d::{harmonic_flow, FlowParams, MapField, Target};
use supergeom::{Grid, GridField};

fn main() -> supergeom::Result<()> {
    let n = 6;
    let g = Grid::torus(16);
    let mut phi = MapField::identity(&g, n);
    phi.periodic[0] = GridField::from_fn(&g, n, |x| 0.1 * (x[0] + 2.0 * x[1]).sin());
    phi.periodic[1] = GridField::from_fn(&g, n, |x| 0.05 * x[0].cos() * x[1].sin());
    let params = FlowParams {
        tol: 1e-5,
        ..Default::default()
    };
    let res = harmonic_flow(&phi, &Target::Flat { dim: 2 }, params)?;
    println!(
        "energy {:.10} -> {:.10} in {} steps (8π² = {:.10})",
        res.initial_energy,
        res.energy,
        res.steps,
        8.0 * std::f64::consts::PI.powi(2)
    );
    Ok(())
}
