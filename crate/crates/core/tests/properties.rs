use proptest::prelude::*;
use supergeom::berezin::{berezin_integrate, BerezinDomain};
use supergeom::cli_reports::{run_decompose, DecomposeFixture};
use supergeom::fixtures::{self, FIELD_GENERATORS, SUSY_GENERATOR};
use supergeom::sigma2d::{self, GravitinoMode, MapField};
use supergeom::spin_surface::SurfaceGeometry;
use supergeom::superdomain::{apply_d, apply_q, SuperFunction};
use supergeom::toy_model::{self, ToyFields};
use supergeom::{GrassmannNumber, Grid, GridField};

const N: usize = 6;

fn superfield(seed: u64, g: &Grid, parity_odd: bool) -> SuperFunction {
    let mut r = fixtures::rng(seed);
    let even = fixtures::trig_even(&mut r, g, N, 3, FIELD_GENERATORS);
    let odd = fixtures::trig_odd(&mut r, g, N, 3, FIELD_GENERATORS);
    let terms = if parity_odd {
        [(vec![], odd), (vec![0], even)]
    } else {
        [(vec![], even), (vec![0], odd)]
    };
    SuperFunction::from_terms(g, 1, N, terms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grassmann_ring_laws(seed in any::<u64>()) {
        let mut r = fixtures::rng(seed);
        let a = fixtures::random_element(&mut r, N);
        let b = fixtures::random_element(&mut r, N);
        let c = fixtures::random_element(&mut r, N);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&GrassmannNumber::one(N) * &a, a.clone());
    }

    #[test]
    fn grassmann_graded_commutativity(seed in any::<u64>(), pa: bool, pb: bool) {
        let mut r = fixtures::rng(seed);
        let x = fixtures::random_homogeneous(&mut r, N, pa);
        let y = fixtures::random_homogeneous(&mut r, N, pb);
        let sign = if pa && pb { -1.0 } else { 1.0 };
        prop_assert_eq!(&x * &y, (&y * &x).scale(sign));
        if pa {
            prop_assert!((&x * &x).is_zero());
        }
    }

    #[test]
    fn invertible_elements_have_inverses(seed in any::<u64>(), body in 0.5f64..4.0) {
        let mut r = fixtures::rng(seed);
        let a = &fixtures::random_element(&mut r, N).soul() + &GrassmannNumber::scalar(N, body);
        let prod = &a * &a.recip().unwrap();
        prop_assert!((&prod - &GrassmannNumber::one(N)).max_abs() < 1e-9);
    }

    #[test]
    fn d_is_a_graded_derivation(seed in any::<u64>(), odd_f: bool, odd_g: bool) {
        let g = Grid::circle(32);
        let f = superfield(seed, &g, odd_f);
        let h = superfield(seed ^ 0x5a5a, &g, odd_g);
        let lhs = apply_d(&f.try_mul(&h).unwrap()).unwrap();
        let sign = if odd_f { -1.0 } else { 1.0 };
        let rhs = apply_d(&f).unwrap().try_mul(&h).unwrap()
            .try_add(&f.try_mul(&apply_d(&h).unwrap()).unwrap().scale(sign)).unwrap();
        prop_assert!(lhs.try_sub(&rhs).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn d_squares_to_translation_and_commutes_with_q(seed in any::<u64>()) {
        let g = Grid::circle(32);
        let f = superfield(seed, &g, false);
        let dd = apply_d(&apply_d(&f).unwrap()).unwrap();
        prop_assert!(dd.try_sub(&f.partial_even(0).unwrap()).unwrap().max_abs() < 1e-9);
        let q = GrassmannNumber::generator(N, SUSY_GENERATOR).unwrap();
        let dq = apply_d(&apply_q(&f, &q).unwrap()).unwrap();
        let qd = apply_q(&apply_d(&f).unwrap(), &q).unwrap();
        prop_assert!(dq.try_sub(&qd).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn berezin_integral_of_a_d_image_vanishes(seed in any::<u64>()) {
        let g = Grid::circle(32);
        let f = superfield(seed, &g, true);
        let i = berezin_integrate(&apply_d(&f).unwrap(), &BerezinDomain::new(g, 1)).unwrap();
        prop_assert!(i.max_abs() < 1e-10);
    }

    #[test]
    fn toy_action_is_invariant_for_any_parameter(seed in any::<u64>(), c in -2.0f64..2.0) {
        let g = Grid::circle(32);
        let mut r = fixtures::rng(seed);
        let f = ToyFields::new(
            fixtures::trig_even(&mut r, &g, N, 4, FIELD_GENERATORS),
            fixtures::trig_odd(&mut r, &g, N, 4, FIELD_GENERATORS),
        ).unwrap();
        let q = GrassmannNumber::generator(N, SUSY_GENERATOR).unwrap().scale(c);
        prop_assert!(toy_model::toy_invariance_residual(&f, &q).unwrap() < 1e-10);
    }

    #[test]
    fn dirichlet_energy_is_weyl_invariant(seed in any::<u64>()) {
        let g = Grid::torus(12);
        let mut r = fixtures::rng(seed);
        let phi = MapField::periodic(vec![fixtures::trig_even(&mut r, &g, N, 3, FIELD_GENERATORS)]);
        let log = fixtures::trig_real(&mut r, &g, N, 2, 0.4).body();
        let lambda = GridField::from_real(&g, N, log.iter().map(|v| v.exp()).collect());
        let flat = SurfaceGeometry::flat(&g, N).unwrap();
        let a = sigma2d::harmonic_action(&flat, &phi).unwrap();
        let b = sigma2d::harmonic_action(&flat.weyl(&lambda).unwrap(), &phi).unwrap();
        prop_assert!((&a - &b).max_abs() < 1e-8);
    }

    #[test]
    fn superfield_and_component_actions_agree(seed in any::<u64>()) {
        let g = Grid::torus(12);
        let mut r = fixtures::rng(seed);
        let fields = sigma2d::random_component_fields(&mut r, &g, N, 2, 2, FIELD_GENERATORS, true);
        let sf = sigma2d::superfield_of(&fields).unwrap();
        let a = sigma2d::action_superfield_flat(&sf).unwrap();
        let chi = supergeom::spin_surface::GravitinoField::zeros(&g, N);
        let coeffs = sigma2d::ActionCoefficients { c4: -2.0, ..Default::default() };
        let b = sigma2d::action_component(
            &SurfaceGeometry::flat(&g, N).unwrap(), &chi, &fields, &sigma2d::Target::Flat { dim: 2 }, &coeffs,
        ).unwrap();
        prop_assert!((&a - &b).max_abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn linear_gravitino_invariance_at_calibrated_signs(seed in any::<u64>()) {
        let g = Grid::torus(8);
        let coeffs = sigma2d::ActionCoefficients { c4: -2.0, c5: -0.5, s3: -1.0, ..Default::default() };
        for fx in sigma2d::susy_battery(seed, &g, 1, GravitinoMode::Linear) {
            prop_assert!(sigma2d::susy_invariance_residual(&fx.config, &fx.q, &coeffs).unwrap() < 1e-8);
        }
    }

    #[test]
    fn decomposition_reassembles(seed in any::<u64>(), a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let fx = DecomposeFixture { grid: 16, seed, true_even: [a, b], ..Default::default() };
        let out = run_decompose(&fx, -1.0).unwrap();
        let r = out.summary.residuals;
        prop_assert!(r.reassembly_even < 1e-8 && r.reassembly_odd < 1e-8);
        prop_assert!(out.planted_even_error < 1e-8 && out.planted_odd_error < 1e-8);
    }
}
