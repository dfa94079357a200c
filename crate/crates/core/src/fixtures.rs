//! Seeded random band-limited fixtures.
//!
//! Generator allocation used throughout: field content lives on generators
//! `0..4`, supersymmetry parameters on generator 4 and the probe used to
//! extract fermionic currents on generator 5.

use std::ops::Range;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grassmann::GrassmannNumber;
use crate::grid::{Grid, GridField};
use crate::spin_surface::SpinorField;

pub const DEFAULT_GENERATORS: usize = 6;
pub const FIELD_GENERATORS: Range<usize> = 0..4;
pub const SUSY_GENERATOR: usize = 4;
pub const PROBE_GENERATOR: usize = 5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Σ cᵢ ξᵢ` over the given generators with uniform coefficients in [−1, 1].
pub fn random_odd<R: Rng>(rng: &mut R, generators: usize, gens: Range<usize>) -> GrassmannNumber {
    GrassmannNumber::from_terms(generators, gens.map(|g| (1u64 << g, rng.gen_range(-1.0..1.0))))
}

/// Random element of Λ_N with every monomial present (used by the algebra
/// law checks); coefficients are small integers so products stay exact.
pub fn random_element<R: Rng>(rng: &mut R, generators: usize) -> GrassmannNumber {
    GrassmannNumber::from_terms(
        generators,
        (0..1u64 << generators).map(|m| (m, rng.gen_range(-4..=4) as f64)),
    )
}

/// Random homogeneous element of the requested parity, integer coefficients.
pub fn random_homogeneous<R: Rng>(rng: &mut R, generators: usize, odd: bool) -> GrassmannNumber {
    GrassmannNumber::from_terms(
        generators,
        (0..1u64 << generators)
            .filter(|m| (m.count_ones() % 2 == 1) == odd)
            .map(|m| (m, rng.gen_range(-4..=4) as f64)),
    )
}

/// All integer wave vectors with |kᵢ| ≤ kmax, listed once per ±k pair
/// (the zero vector included).
pub fn half_modes(dims: usize, kmax: i64) -> Vec<Vec<i64>> {
    let mut all: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..dims {
        all = all
            .into_iter()
            .flat_map(|k| {
                (-kmax..=kmax).map(move |v| {
                    let mut k = k.clone();
                    k.push(v);
                    k
                })
            })
            .collect();
    }
    all.into_iter()
        .filter(|k| {
            let first = k.iter().find(|&&v| v != 0);
            first.is_none_or(|&v| v > 0)
        })
        .collect()
}

/// Trigonometric polynomial `Σ_k a_k cos(k·x) + b_k sin(k·x)` with Grassmann
/// coefficients drawn from `coeff`. Wave numbers are scaled by 2π/P per axis.
pub fn trig_field<R: Rng>(
    rng: &mut R,
    grid: &Grid,
    generators: usize,
    kmax: i64,
    mut coeff: impl FnMut(&mut R) -> GrassmannNumber,
) -> GridField {
    let mut out = GridField::zeros(grid, generators);
    let scale: Vec<f64> = grid.periods.iter().map(|p| 2.0 * std::f64::consts::PI / p).collect();
    for k in half_modes(grid.dims(), kmax) {
        let kx = {
            let k = k.clone();
            let scale = scale.clone();
            move |x: &[f64]| -> f64 { k.iter().zip(x).zip(&scale).map(|((&k, &x), s)| k as f64 * s * x).sum() }
        };
        let a = coeff(rng);
        out = &out + &GridField::constant_times(grid, &a, |x| kx(x).cos());
        if k.iter().any(|&v| v != 0) {
            let b = coeff(rng);
            out = &out + &GridField::constant_times(grid, &b, |x| kx(x).sin());
        }
    }
    out
}

/// Real band-limited field with amplitudes in [−amp, amp].
pub fn trig_real<R: Rng>(rng: &mut R, grid: &Grid, generators: usize, kmax: i64, amp: f64) -> GridField {
    trig_field(rng, grid, generators, kmax, |r| {
        GrassmannNumber::scalar(generators, r.gen_range(-amp..amp))
    })
}

/// Odd band-limited field with coefficients on the given generators.
pub fn trig_odd<R: Rng>(rng: &mut R, grid: &Grid, generators: usize, kmax: i64, gens: Range<usize>) -> GridField {
    trig_field(rng, grid, generators, kmax, |r| random_odd(r, generators, gens.clone()))
}

/// Even band-limited field with body and quadratic soul on the given generators.
pub fn trig_even<R: Rng>(rng: &mut R, grid: &Grid, generators: usize, kmax: i64, gens: Range<usize>) -> GridField {
    trig_field(rng, grid, generators, kmax, |r| {
        let mut c = GrassmannNumber::scalar(generators, r.gen_range(-1.0..1.0));
        for i in gens.clone() {
            for j in (i + 1)..gens.end {
                c.add_term((1 << i) | (1 << j), r.gen_range(-1.0..1.0));
            }
        }
        c
    })
}

/// Odd spinor with both components drawn by [`trig_odd`].
pub fn trig_spinor<R: Rng>(rng: &mut R, grid: &Grid, generators: usize, kmax: i64, gens: Range<usize>) -> SpinorField {
    let a = trig_odd(rng, grid, generators, kmax, gens.clone());
    let b = trig_odd(rng, grid, generators, kmax, gens);
    SpinorField { comps: [a, b] }
}

/// Odd spinor `ξ_g · (u₁, u₂)` with real band-limited profiles.
pub fn trig_parameter<R: Rng>(rng: &mut R, grid: &Grid, generators: usize, kmax: i64, g: usize) -> SpinorField {
    let xi = GrassmannNumber::generator(generators, g).expect("generator index in range");
    let a = trig_real(rng, grid, generators, kmax, 1.0).left_mul_const(&xi);
    let b = trig_real(rng, grid, generators, kmax, 1.0).left_mul_const(&xi);
    SpinorField { comps: [a, b] }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_modes_cover_each_pair_once() {
        let m = half_modes(2, 2);
        assert_eq!(m.len(), (25 - 1) / 2 + 1);
        assert!(m.contains(&vec![0, 0]));
        assert!(m.contains(&vec![1, -2]) && !m.contains(&vec![-1, 2]));
    }

    #[test]
    fn fixtures_are_deterministic_and_typed() {
        let g = Grid::circle(16);
        let a = trig_odd(&mut rng(7), &g, 6, 3, FIELD_GENERATORS);
        let b = trig_odd(&mut rng(7), &g, 6, 3, FIELD_GENERATORS);
        assert_eq!(a, b);
        assert!(a.has_parity(crate::grassmann::Parity::Odd));
        let e = trig_even(&mut rng(1), &g, 6, 2, FIELD_GENERATORS);
        assert!(e.has_parity(crate::grassmann::Parity::Even));
    }
}
