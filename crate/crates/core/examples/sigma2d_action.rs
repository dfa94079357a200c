//! The 2D action: classical value on sin(x¹), and superfield against
//! component form on random fields.

use supergeom::fixtures::{self, FIELD_GENERATORS};
use supergeom::sigma2d::{self, ActionCoefficients, ComponentFields, MapField, Target};
use supergeom::spin_surface::{GravitinoField, SurfaceGeometry};
use supergeom::{Grid, GridField};

fn main() -> supergeom::Result<()> {
    let n = 6;
    let g = Grid::torus(32);
    let geom = SurfaceGeometry::flat(&g, n)?;
    let chi = GravitinoField::zeros(&g, n);
    let coeffs = ActionCoefficients {
        c4: -2.0,
        ..Default::default()
    };

    let sin = MapField::periodic(vec![GridField::from_fn(&g, n, |x| x[0].sin())]);
    let a = sigma2d::action_component(
        &geom,
        &chi,
        &ComponentFields::bosonic(sin),
        &Target::Flat { dim: 1 },
        &coeffs,
    )?;
    println!(
        "A(sin x1) = {:.12}, 2π² = {:.12}",
        a.body(),
        2.0 * std::f64::consts::PI.powi(2)
    );

    let mut r = fixtures::rng(5);
    let fields = sigma2d::random_component_fields(&mut r, &g, n, 2, 3, FIELD_GENERATORS, true);
    let component = sigma2d::action_component(&geom, &chi, &fields, &Target::Flat { dim: 2 }, &coeffs)?;
    let superfield = sigma2d::action_superfield_flat(&sigma2d::superfield_of(&fields)?)?;
    println!("superfield − component = {:.2e}", (&superfield - &component).max_abs());
    Ok(())
}
