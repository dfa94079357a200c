//! Infinitesimal deformations `(δg, δχ)` of the flat torus and their split
//! into Weyl, diffeomorphism, super Weyl, supersymmetry and true parts:
//!
//! ```text
//! δg = λg + L_X g + susy_g(q) + D
//! δχ = γt + L_X χ + susy_χ(q) + 𝔇
//! ```
//!
//! The χ-independent part of the operator acts monomial by monomial and mode
//! by mode, so it is inverted per Fourier mode with an SVD pseudo-inverse.
//! Everything that involves χ strictly raises the Grassmann degree, and the
//! full problem is solved by a fixed-point iteration that terminates after at
//! most N + 1 rounds. The true parts are the L²-orthogonal complements of the
//! χ-independent image: D is trace- and divergence-free, 𝔇 gamma-trace- and
//! divergence-free. The kernel directions (constant X, constant q) are fixed
//! to zero, so a planted parameter is recovered when it has zero mean.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::sigma2d::SymmetricTensor;
use crate::spin_surface::{susy_metric_gravitino, GravitinoField, SpinorField, SurfaceGeometry, GAMMA, GAMMA12};

pub type MetricDeformation = SymmetricTensor;
pub type GravitinoDeformation = GravitinoField;

/// Settings of [`decompose`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionParams {
    /// Largest |k| per axis of the parameter spaces; `None` means n/4.
    pub cutoff: Option<usize>,
    /// Relative singular-value cutoff of the pseudo-inverse.
    pub rcond: f64,
    /// Sign of the frame variation, as in the calibrated action coefficients.
    pub frame_sign: f64,
}

impl Default for DecompositionParams {
    fn default() -> Self {
        Self {
            cutoff: None,
            rcond: 1e-10,
            frame_sign: 1.0,
        }
    }
}

/// Residual norms of a decomposition (max-abs over all coefficients).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResiduals {
    pub reassembly_even: f64,
    pub reassembly_odd: f64,
    pub trace: f64,
    pub divergence: f64,
    pub gamma_trace: f64,
    pub divergence_odd: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub lambda: GridField,
    pub x: [GridField; 2],
    pub q: SpinorField,
    pub t: SpinorField,
    pub d: MetricDeformation,
    pub d_odd: GravitinoDeformation,
    pub residuals: DecompositionResiduals,
}

fn tensor_add(a: &SymmetricTensor, b: &SymmetricTensor) -> Result<SymmetricTensor> {
    Ok(SymmetricTensor {
        t11: a.t11.try_add(&b.t11)?,
        t12: a.t12.try_add(&b.t12)?,
        t22: a.t22.try_add(&b.t22)?,
    })
}

fn tensor_sub(a: &SymmetricTensor, b: &SymmetricTensor) -> Result<SymmetricTensor> {
    tensor_add(a, &tensor_scale(b, -1.0))
}

fn tensor_scale(a: &SymmetricTensor, c: f64) -> SymmetricTensor {
    SymmetricTensor {
        t11: a.t11.scale(c),
        t12: a.t12.scale(c),
        t22: a.t22.scale(c),
    }
}

fn gravitino_sub(a: &GravitinoField, b: &GravitinoField) -> Result<GravitinoField> {
    a.try_add(&b.scale(-1.0))
}

/// `λ g` on the flat torus.
pub fn weyl_direction(lambda: &GridField) -> SymmetricTensor {
    SymmetricTensor {
        t11: lambda.clone(),
        t12: GridField::zeros(lambda.grid(), lambda.generators()),
        t22: lambda.clone(),
    }
}

/// `(L_X g)_{μν} = ∂_μX_ν + ∂_νX_μ` on the flat torus.
pub fn lie_derivative_metric(x: &[GridField; 2]) -> Result<SymmetricTensor> {
    Ok(SymmetricTensor {
        t11: x[0].derivative(0)?.scale(2.0),
        t12: x[1].derivative(0)?.try_add(&x[0].derivative(1)?)?,
        t22: x[1].derivative(1)?.scale(2.0),
    })
}

/// Lie derivative of the spinor-valued 1-form χ along X (Kosmann lift):
/// `X^ν∂_νχ_a + χ_b ∂_a X^b − ¼(∂₁X₂ − ∂₂X₁)γ¹γ²χ_a`.
pub fn lie_derivative_gravitino(chi: &GravitinoField, x: &[GridField; 2]) -> Result<GravitinoField> {
    let dx = [
        [x[0].derivative(0)?, x[0].derivative(1)?],
        [x[1].derivative(0)?, x[1].derivative(1)?],
    ];
    let rot = dx[1][0].try_sub(&dx[0][1])?.scale(-0.25);
    let mut out = GravitinoField::zeros(x[0].grid(), x[0].generators());
    for a in 0..2 {
        let mut acc = chi.comps[a].apply_matrix(&GAMMA12).left_mul(&rot)?;
        for nu in 0..2 {
            acc = acc.try_add(&chi.comps[a].derivative(nu)?.left_mul(&x[nu])?)?;
            acc = acc.try_add(&chi.comps[nu].left_mul(&dx[nu][a])?)?;
        }
        out.comps[a] = acc;
    }
    Ok(out)
}

/// Metric and gravitino images of a supersymmetry with parameter q at the
/// flat frame; the metric moves as `δg_{μν} = −(δf_μ^ν + δf_ν^μ)`.
pub fn susy_images(
    chi: &GravitinoField,
    q: &SpinorField,
    frame_sign: f64,
) -> Result<(SymmetricTensor, GravitinoField)> {
    let geom = SurfaceGeometry::flat(q.grid(), q.generators())?;
    let var = susy_metric_gravitino(&geom, chi, q, frame_sign)?;
    let f = &var.frame;
    Ok((
        SymmetricTensor {
            t11: f[0][0].scale(-2.0),
            t12: f[0][1].try_add(&f[1][0])?.scale(-1.0),
            t22: f[1][1].scale(-2.0),
        },
        var.chi,
    ))
}

/// The full forward map `(λ, X, q, t) ↦ (δg, δχ)` without true parts.
pub fn assemble(
    chi: &GravitinoField,
    lambda: &GridField,
    x: &[GridField; 2],
    q: &SpinorField,
    t: &SpinorField,
    frame_sign: f64,
) -> Result<(SymmetricTensor, GravitinoField)> {
    let (sg, schi) = susy_images(chi, q, frame_sign)?;
    let even = tensor_add(&tensor_add(&weyl_direction(lambda), &lie_derivative_metric(x)?)?, &sg)?;
    let sw = GravitinoField {
        comps: [t.clifford(0), t.clifford(1)],
    };
    let odd = sw.try_add(&lie_derivative_gravitino(chi, x)?)?.try_add(&schi)?;
    Ok((even, odd))
}

struct Fft2 {
    n0: usize,
    n1: usize,
    planner: FftPlanner<f64>,
}

impl Fft2 {
    fn new(grid: &Grid) -> Self {
        Self {
            n0: grid.shape[0],
            n1: grid.shape[1],
            planner: FftPlanner::new(),
        }
    }

    fn run(&mut self, data: &mut [Complex64], inverse: bool) {
        let (n0, n1) = (self.n0, self.n1);
        let rows = if inverse {
            self.planner.plan_fft_inverse(n1)
        } else {
            self.planner.plan_fft_forward(n1)
        };
        for row in data.chunks_mut(n1) {
            rows.process(row);
        }
        let cols = if inverse {
            self.planner.plan_fft_inverse(n0)
        } else {
            self.planner.plan_fft_forward(n0)
        };
        let mut col = vec![Complex64::new(0.0, 0.0); n0];
        for j in 0..n1 {
            for i in 0..n0 {
                col[i] = data[i * n1 + j];
            }
            cols.process(&mut col);
            for i in 0..n0 {
                data[i * n1 + j] = col[i];
            }
        }
        if inverse {
            let s = 1.0 / (n0 * n1) as f64;
            data.iter_mut().for_each(|v| *v *= s);
        }
    }

    fn forward(&mut self, real: &[f64]) -> Vec<Complex64> {
        let mut d: Vec<Complex64> = real.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.run(&mut d, false);
        d
    }

    fn inverse_real(&mut self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.run(&mut spec, true);
        spec.into_iter().map(|v| v.re).collect()
    }
}

/// Per-mode operator of the χ-independent part. Even block: columns
/// (λ, X₁, X₂), rows (g₁₁, √2 g₁₂, g₂₂). Odd block: columns (t₁, t₂, q₁, q₂),
/// rows χ_{aα} in order (1,1), (1,2), (2,1), (2,2).
fn mode_blocks(k: [f64; 2]) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let c = |v: f64| Complex64::new(v, 0.0);
    let ik = [Complex64::new(0.0, k[0]), Complex64::new(0.0, k[1])];
    let zero = c(0.0);
    let r2 = std::f64::consts::SQRT_2;
    let even = DMatrix::from_row_slice(
        3,
        3,
        &[
            c(1.0),
            ik[0] * 2.0,
            zero,
            zero,
            ik[1] * r2,
            ik[0] * r2,
            c(1.0),
            zero,
            ik[1] * 2.0,
        ],
    );
    let mut odd = DMatrix::from_element(4, 4, zero);
    for a in 0..2 {
        for al in 0..2 {
            let row = 2 * a + al;
            for be in 0..2 {
                odd[(row, be)] = c(GAMMA[a][al][be]);
            }
            odd[(row, 2 + al)] = ik[a];
        }
    }
    (even, odd)
}

fn pinv(m: DMatrix<Complex64>, rcond: f64) -> DMatrix<Complex64> {
    let svd = m.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.pseudo_inverse(rcond * smax.max(f64::MIN_POSITIVE))
        .expect("u and v were computed")
}

fn rank(m: DMatrix<Complex64>, rcond: f64) -> usize {
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rcond * smax).count()
}

fn mode_wavevectors(grid: &Grid, cutoff: usize) -> Vec<Option<[f64; 2]>> {
    let scale = [
        2.0 * std::f64::consts::PI / grid.periods[0],
        2.0 * std::f64::consts::PI / grid.periods[1],
    ];
    (0..grid.len())
        .map(|idx| {
            let m = grid.multi_index(idx);
            let k = [grid.wavenumber(0, m[0]), grid.wavenumber(1, m[1])];
            (k[0].unsigned_abs() as usize <= cutoff && k[1].unsigned_abs() as usize <= cutoff)
                .then(|| [k[0] as f64 * scale[0], k[1] as f64 * scale[1]])
        })
        .collect()
}

fn check_grid(grid: &Grid) -> Result<usize> {
    if grid.dims() != 2 {
        return Err(Error::Shape("deformations live on a 2D torus".into()));
    }
    Ok(grid.shape[0].min(grid.shape[1]))
}

/// Pseudo-inverse of the χ-independent operator.
struct ClassicalInverse {
    grid: Grid,
    generators: usize,
    modes: Vec<Option<(DMatrix<Complex64>, DMatrix<Complex64>)>>,
    fft: Fft2,
}

impl ClassicalInverse {
    fn new(grid: &Grid, generators: usize, cutoff: usize, rcond: f64) -> Self {
        let modes = mode_wavevectors(grid, cutoff)
            .into_iter()
            .map(|k| {
                k.map(|k| {
                    let (e, o) = mode_blocks(k);
                    (pinv(e, rcond), pinv(o, rcond))
                })
            })
            .collect();
        Self {
            grid: grid.clone(),
            generators,
            modes,
            fft: Fft2::new(grid),
        }
    }

    fn masks(fields: &[&GridField]) -> BTreeSet<u64> {
        fields.iter().flat_map(|f| f.components().map(|(m, _)| m)).collect()
    }

    fn spectra(&mut self, f: &GridField, mask: u64) -> Vec<Complex64> {
        match f.component(mask) {
            Some(v) => self.fft.forward(v),
            None => vec![Complex64::new(0.0, 0.0); self.grid.len()],
        }
    }

    /// `(λ, X) = L₀⁺ δg` monomial by monomial.
    fn solve_even(&mut self, dg: &SymmetricTensor) -> Result<(GridField, [GridField; 2])> {
        let (g, n) = (self.grid.clone(), self.generators);
        let mut out = [
            GridField::zeros(&g, n),
            GridField::zeros(&g, n),
            GridField::zeros(&g, n),
        ];
        let r2 = std::f64::consts::SQRT_2;
        for mask in Self::masks(&[&dg.t11, &dg.t12, &dg.t22]) {
            let rhs = [
                self.spectra(&dg.t11, mask),
                self.spectra(&dg.t12, mask),
                self.spectra(&dg.t22, mask),
            ];
            let mut sol = vec![vec![Complex64::new(0.0, 0.0); g.len()]; 3];
            for (p, m) in self.modes.iter().enumerate() {
                if let Some((pe, _)) = m {
                    let b = nalgebra::DVector::from_vec(vec![rhs[0][p], rhs[1][p] * r2, rhs[2][p]]);
                    let u = pe * b;
                    for j in 0..3 {
                        sol[j][p] = u[j];
                    }
                }
            }
            for (j, s) in sol.into_iter().enumerate() {
                let v = self.fft.inverse_real(s);
                out[j] = out[j].try_add(&GridField::from_component(&g, n, mask, v))?;
            }
        }
        let [l, x1, x2] = out;
        Ok((l, [x1, x2]))
    }

    /// `(t, q) = L₀⁺ δχ` monomial by monomial.
    fn solve_odd(&mut self, dchi: &GravitinoField) -> Result<(SpinorField, SpinorField)> {
        let (g, n) = (self.grid.clone(), self.generators);
        let comps = [
            &dchi.comps[0].comps[0],
            &dchi.comps[0].comps[1],
            &dchi.comps[1].comps[0],
            &dchi.comps[1].comps[1],
        ];
        let mut out: [GridField; 4] = std::array::from_fn(|_| GridField::zeros(&g, n));
        for mask in Self::masks(&comps) {
            let rhs: Vec<Vec<Complex64>> = comps.iter().map(|c| self.spectra(c, mask)).collect();
            let mut sol = vec![vec![Complex64::new(0.0, 0.0); g.len()]; 4];
            for (p, m) in self.modes.iter().enumerate() {
                if let Some((_, po)) = m {
                    let b = nalgebra::DVector::from_iterator(4, rhs.iter().map(|r| r[p]));
                    let u = po * b;
                    for j in 0..4 {
                        sol[j][p] = u[j];
                    }
                }
            }
            for (j, s) in sol.into_iter().enumerate() {
                let v = self.fft.inverse_real(s);
                out[j] = out[j].try_add(&GridField::from_component(&g, n, mask, v))?;
            }
        }
        let [t1, t2, q1, q2] = out;
        Ok((SpinorField { comps: [t1, t2] }, SpinorField { comps: [q1, q2] }))
    }
}

fn max_diff(a: &[&GridField], b: &[&GridField]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (*x - *y).max_abs()).fold(0.0, f64::max)
}

/// Split `(δg, δχ)` around the gravitino χ on the flat square torus.
pub fn decompose(
    chi: &GravitinoField,
    dg: &MetricDeformation,
    dchi: &GravitinoDeformation,
    params: &DecompositionParams,
) -> Result<DecompositionResult> {
    let grid = dg.t11.grid().clone();
    let n = dg.t11.generators();
    let min_n = check_grid(&grid)?;
    chi.validate()?;
    dchi.validate()?;
    for f in [&dg.t11, &dg.t12, &dg.t22] {
        if !f.has_parity(crate::grassmann::Parity::Even) {
            return Err(Error::Parity {
                what: "metric deformation",
                expected: crate::grassmann::Parity::Even,
                found: f.parity(),
            });
        }
    }
    let cutoff = params.cutoff.unwrap_or(min_n / 4);
    let mut inv = ClassicalInverse::new(&grid, n, cutoff, params.rcond);
    let zero_chi = GravitinoField::zeros(&grid, n);

    let (mut lambda, mut x) = inv.solve_even(dg)?;
    let (mut t, mut q) = inv.solve_odd(dchi)?;
    let mut iterations = 1;
    if !chi.is_zero() {
        for _ in 0..=n + 1 {
            // L₁ = L − L₀ raises the Grassmann degree
            let (full_e, full_o) = assemble(chi, &lambda, &x, &q, &t, params.frame_sign)?;
            let (cl_e, cl_o) = assemble(&zero_chi, &lambda, &x, &q, &t, params.frame_sign)?;
            let rhs_e = tensor_add(&tensor_sub(dg, &full_e)?, &cl_e)?;
            let rhs_o = dchi.try_add(&gravitino_sub(&cl_o, &full_o)?)?;
            let (l2, x2) = inv.solve_even(&rhs_e)?;
            let (t2, q2) = inv.solve_odd(&rhs_o)?;
            let change = max_diff(
                &[
                    &l2,
                    &x2[0],
                    &x2[1],
                    &t2.comps[0],
                    &t2.comps[1],
                    &q2.comps[0],
                    &q2.comps[1],
                ],
                &[
                    &lambda,
                    &x[0],
                    &x[1],
                    &t.comps[0],
                    &t.comps[1],
                    &q.comps[0],
                    &q.comps[1],
                ],
            );
            (lambda, x, t, q) = (l2, x2, t2, q2);
            iterations += 1;
            if change == 0.0 {
                break;
            }
        }
    }

    let (fit_e, fit_o) = assemble(chi, &lambda, &x, &q, &t, params.frame_sign)?;
    let d = tensor_sub(dg, &fit_e)?;
    let d_odd = gravitino_sub(dchi, &fit_o)?;
    let residuals = true_part_residuals(
        chi,
        dg,
        dchi,
        &lambda,
        &x,
        &q,
        &t,
        &d,
        &d_odd,
        params.frame_sign,
        iterations,
    )?;
    Ok(DecompositionResult {
        lambda,
        x,
        q,
        t,
        d,
        d_odd,
        residuals,
    })
}

#[allow(clippy::too_many_arguments)]
fn true_part_residuals(
    chi: &GravitinoField,
    dg: &SymmetricTensor,
    dchi: &GravitinoField,
    lambda: &GridField,
    x: &[GridField; 2],
    q: &SpinorField,
    t: &SpinorField,
    d: &SymmetricTensor,
    d_odd: &GravitinoField,
    frame_sign: f64,
    iterations: usize,
) -> Result<DecompositionResiduals> {
    let (fit_e, fit_o) = assemble(chi, lambda, x, q, t, frame_sign)?;
    let re = tensor_add(&fit_e, d)?;
    let ro = fit_o.try_add(d_odd)?;
    let div = d.divergence()?;
    let div_odd = d_odd.comps[0].derivative(0)?.try_add(&d_odd.comps[1].derivative(1)?)?;
    Ok(DecompositionResiduals {
        reassembly_even: max_diff(&[&re.t11, &re.t12, &re.t22], &[&dg.t11, &dg.t12, &dg.t22]),
        reassembly_odd: gravitino_sub(&ro, dchi)?.max_abs(),
        trace: d.trace()?.max_abs(),
        divergence: div[0].max_abs().max(div[1].max_abs()),
        gamma_trace: d_odd.gamma_trace()?.max_abs(),
        divergence_odd: div_odd.max_abs(),
        iterations,
    })
}

/// Real dimensions of the spaces of true deformations (even, odd) within the
/// band-limited space of the grid: the nullities of the adjoint constraint
/// operators (trace + divergence; gamma-trace + divergence), mode by mode.
pub fn true_deformation_dimensions(grid: &Grid, cutoff: Option<usize>, rcond: f64) -> Result<(usize, usize)> {
    let min_n = check_grid(grid)?;
    let cutoff = cutoff.unwrap_or(min_n / 4);
    let mut even = 0;
    let mut odd = 0;
    for k in mode_wavevectors(grid, cutoff).into_iter().flatten() {
        let (e, o) = mode_blocks(k);
        even += 3 - rank(e, rcond);
        odd += 4 - rank(o, rcond);
    }
    Ok((even, odd))
}

/// Serializable digest of a [`DecompositionResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub lambda_max: f64,
    pub x_max: f64,
    pub q_max: f64,
    pub t_max: f64,
    pub true_even_max: f64,
    pub true_odd_max: f64,
    pub residuals: DecompositionResiduals,
}

impl DecompositionResult {
    pub fn summary(&self) -> DecompositionSummary {
        DecompositionSummary {
            lambda_max: self.lambda.max_abs(),
            x_max: self.x[0].max_abs().max(self.x[1].max_abs()),
            q_max: self.q.max_abs(),
            t_max: self.t.max_abs(),
            true_even_max: self.d.max_abs(),
            true_odd_max: self.d_odd.max_abs(),
            residuals: self.residuals,
        }
    }
}
