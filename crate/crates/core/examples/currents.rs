//! Energy-momentum tensor and super current on a critical configuration.

use supergeom::sigma2d::{self, ActionCoefficients, ComponentFields, MapField, Target};
use supergeom::spin_surface::{GravitinoField, SpinorField, SurfaceGeometry};
use supergeom::{GrassmannNumber, Grid, GridField};

fn main() -> supergeom::Result<()> {
    let n = 6;
    let g = Grid::torus(16);
    let geom = SurfaceGeometry::flat(&g, n)?;
    let chi = GravitinoField::zeros(&g, n);
    let coeffs = ActionCoefficients {
        c4: -2.0,
        ..Default::default()
    };
    let xi = |i| GrassmannNumber::generator(n, i);

    // affine φ and constant ψ are critical at χ = 0
    let phi = MapField::affine(&g, n, vec![[1.0, -0.5]]);
    let psi = SpinorField::constant(&g, [&xi(0)?, &xi(1)?.scale(0.5)]);
    let fields = ComponentFields::new(phi.clone(), vec![psi], vec![GridField::zeros(&g, n)])?;
    let t = Target::Flat { dim: 1 };

    let em = sigma2d::energy_momentum(
        &geom,
        &chi,
        &ComponentFields::bosonic(phi),
        &t,
        &coeffs,
        sigma2d::METRIC_STEP,
    )?;
    let (re, im) = em.dbar_t_zz()?;
    println!("T11 = {}, T12 = {}", em.t11.at(0), em.t12.at(0));
    println!(
        "|tr T| = {:.2e}, |∂̄T_zz| = {:.2e}",
        em.trace()?.max_abs(),
        re.max_abs().max(im.max_abs())
    );

    let j = sigma2d::super_current(&geom, &chi, &fields, &t, &coeffs)?;
    let (wr, wi) = sigma2d::complex_component(&sigma2d::spin_three_halves(&j)?);
    let (dr, di) = sigma2d::dbar(&wr, &wi)?;
    println!("J_1 = ({}, {})", j.comps[0].comps[0].at(0), j.comps[0].comps[1].at(0));
    println!(
        "|γ·J| = {:.2e}, |∂̄w| = {:.2e}",
        j.gamma_trace()?.max_abs(),
        dr.max_abs().max(di.max_abs())
    );
    Ok(())
}
