//! The two-dimensional supersymmetric sigma model on a flat torus.
//!
//! Component action
//!
//! ```text
//! A = ∫ c₁‖dφ‖² + c₂⟨ψ, D̸ψ⟩ + c₃⟨F,F⟩ + c₄⟨γ^aγ^bχ_a f_b(φ), ψ⟩
//!       + c₅⟨χ_a, γ^bγ^aχ_b⟩⟨ψ,ψ⟩ + c₆ ε^{αβ}ε^{γδ}⟨R(ψ_α,ψ_γ)ψ_δ, ψ_β⟩ dvol
//! ```
//!
//! with `ψ = s^α ⊗ ψ_α` stored as one spinor per target coordinate, and its
//! flat superfield counterpart on ℝ^{2|2}.

use serde::{Deserialize, Serialize};

use crate::berezin::{berezin_integrate, quadrature, BerezinDomain};
use crate::error::{Error, Result};
use crate::fixtures::{self, PROBE_GENERATOR};
use crate::grassmann::{GrassmannNumber, Parity};
use crate::grid::{Grid, GridField};
use crate::spin_surface::{
    mat_mul, spin_connection_derivative, susy_metric_gravitino, GravitinoField, SpinorField, SurfaceGeometry, GAMMA,
    GAMMA12,
};
use crate::superdomain::{SuperFunction, SuperVectorField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Flat { dim: usize },
    Sphere { curvature: f64 },
}

impl Target {
    /// Number of coordinates used for the target (ambient ℝ³ for the sphere).
    pub fn ambient_dim(&self) -> usize {
        match self {
            Target::Flat { dim } => *dim,
            Target::Sphere { .. } => 3,
        }
    }

    pub fn curvature(&self) -> f64 {
        match self {
            Target::Flat { .. } => 0.0,
            Target::Sphere { curvature } => *curvature,
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, Target::Flat { .. })
    }
}

/// A map from the torus: per target coordinate, a linear part `slope·x`
/// plus a periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct MapField {
    pub slopes: Vec<[f64; 2]>,
    pub periodic: Vec<GridField>,
}

impl MapField {
    pub fn periodic(periodic: Vec<GridField>) -> Self {
        Self {
            slopes: vec![[0.0; 2]; periodic.len()],
            periodic,
        }
    }

    pub fn affine(grid: &Grid, generators: usize, slopes: Vec<[f64; 2]>) -> Self {
        let periodic = vec![GridField::zeros(grid, generators); slopes.len()];
        Self { slopes, periodic }
    }

    /// Identity map of the torus onto itself.
    pub fn identity(grid: &Grid, generators: usize) -> Self {
        Self::affine(grid, generators, vec![[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn dim(&self) -> usize {
        self.periodic.len()
    }

    pub fn grid(&self) -> &Grid {
        self.periodic[0].grid()
    }

    pub fn generators(&self) -> usize {
        self.periodic[0].generators()
    }

    pub fn is_periodic(&self) -> bool {
        self.slopes.iter().all(|s| s[0] == 0.0 && s[1] == 0.0)
    }

    /// `∂_μ φ^i`.
    pub fn derivative(&self, i: usize, mu: usize) -> Result<GridField> {
        let d = self.periodic[i].derivative(mu)?;
        let s = self.slopes[i][mu];
        if s == 0.0 {
            return Ok(d);
        }
        d.try_add(&GridField::constant(
            d.grid(),
            &GrassmannNumber::scalar(d.generators(), s),
        ))
    }

    /// Sample values `φ^i(x)`; the linear part is evaluated at the grid points.
    pub fn values(&self, i: usize) -> GridField {
        let s = self.slopes[i];
        if s == [0.0, 0.0] {
            return self.periodic[i].clone();
        }
        let lin = GridField::from_fn(self.grid(), self.generators(), |x| s[0] * x[0] + s[1] * x[1]);
        &self.periodic[i] + &lin
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let slope: f64 = self
            .slopes
            .iter()
            .zip(&other.slopes)
            .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
            .fold(0.0, f64::max);
        self.periodic
            .iter()
            .zip(&other.periodic)
            .map(|(a, b)| (a - b).max_abs())
            .fold(slope, f64::max)
    }
}

/// Component fields `(φ, ψ, F)`; `psi[i]` is the spinor `(ψ₁^i, ψ₂^i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentFields {
    pub phi: MapField,
    pub psi: Vec<SpinorField>,
    pub f: Vec<GridField>,
}

impl ComponentFields {
    pub fn new(phi: MapField, psi: Vec<SpinorField>, f: Vec<GridField>) -> Result<Self> {
        let out = Self { phi, psi, f };
        out.validate()?;
        Ok(out)
    }

    /// Only the map, with ψ = 0 and F = 0.
    pub fn bosonic(phi: MapField) -> Self {
        let (g, n, d) = (phi.grid().clone(), phi.generators(), phi.dim());
        Self {
            psi: vec![SpinorField::zeros(&g, n); d],
            f: vec![GridField::zeros(&g, n); d],
            phi,
        }
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    pub fn generators(&self) -> usize {
        self.phi.generators()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.phi.dim();
        if d == 0 || self.psi.len() != d || self.f.len() != d || self.phi.slopes.len() != d {
            return Err(Error::Shape(
                "φ, ψ and F must have one entry per target coordinate".into(),
            ));
        }
        if self.phi.grid().dims() != 2 {
            return Err(Error::Shape("component fields live on a 2D torus".into()));
        }
        let reference = &self.phi.periodic[0];
        for i in 0..d {
            for (field, p, what) in [
                (&self.phi.periodic[i], Parity::Even, "phi"),
                (&self.psi[i].comps[0], Parity::Odd, "psi"),
                (&self.psi[i].comps[1], Parity::Odd, "psi"),
                (&self.f[i], Parity::Even, "F"),
            ] {
                field.check_compatible(reference)?;
                if !field.has_parity(p) {
                    return Err(Error::Parity {
                        what,
                        expected: p,
                        found: field.parity(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Largest difference of any component.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m = self.phi.max_abs_diff(&other.phi);
        for i in 0..self.dim().min(other.dim()) {
            m = m.max(
                self.psi[i]
                    .try_sub(&other.psi[i])
                    .map_or(f64::INFINITY, |d| d.max_abs()),
            );
            m = m.max((&self.f[i] - &other.f[i]).max_abs());
        }
        m
    }

    fn support_mask(&self) -> u64 {
        let mut m = 0;
        for i in 0..self.dim() {
            m |= self.phi.periodic[i].support_mask() | self.f[i].support_mask();
            m |= self.psi[i].comps[0].support_mask() | self.psi[i].comps[1].support_mask();
        }
        m
    }
}

/// Term prefactors and SUSY-variation signs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub s1: f64,
    pub s2: f64,
    /// Sign of the frame variation `δf_a = s₃H_ab f_b`.
    pub s3: f64,
}

impl ActionCoefficients {
    /// Nominal values (1, 1, −¼, 2, ½, ⅙) with all variation signs +1.
    pub const NOMINAL: ActionCoefficients = ActionCoefficients {
        c1: 1.0,
        c2: 1.0,
        c3: -0.25,
        c4: 2.0,
        c5: 0.5,
        c6: 1.0 / 6.0,
        s1: 1.0,
        s2: 1.0,
        s3: 1.0,
    };

    fn signs(&self) -> [f64; 5] {
        [self.s1, self.s2, self.s3, self.c4.signum(), self.c5.signum()]
    }

    fn with_signs(signs: [f64; 5]) -> Self {
        let p = Self::NOMINAL;
        Self {
            s1: signs[0],
            s2: signs[1],
            s3: signs[2],
            c4: signs[3] * p.c4.abs(),
            c5: signs[4] * p.c5.abs(),
            ..p
        }
    }

    /// Number of signs differing from the nominal assignment.
    pub fn flips(&self) -> usize {
        let p = Self::NOMINAL.signs();
        self.signs().iter().zip(p).filter(|(a, b)| *a != b).count()
    }
}

impl Default for ActionCoefficients {
    fn default() -> Self {
        Self::NOMINAL
    }
}

/// `f_a φ^i` for every target coordinate i and frame index a.
fn frame_gradient(geom: &SurfaceGeometry, phi: &MapField) -> Result<Vec<[GridField; 2]>> {
    (0..phi.dim())
        .map(|i| {
            let d0 = phi.derivative(i, 0)?;
            let d1 = phi.derivative(i, 1)?;
            let fa = |a: usize| -> Result<GridField> {
                geom.frame[a][0].try_mul(&d0)?.try_add(&geom.frame[a][1].try_mul(&d1)?)
            };
            Ok([fa(0)?, fa(1)?])
        })
        .collect()
}

/// Tangential projection `v − K φ⟨φ, v⟩` for sphere targets.
fn project(target: &Target, phi: &MapField, v: &[GridField]) -> Result<Vec<GridField>> {
    let k = target.curvature();
    if target.is_flat() || k == 0.0 {
        return Ok(v.to_vec());
    }
    let vals: Vec<GridField> = (0..phi.dim()).map(|i| phi.values(i)).collect();
    let mut dot = GridField::zeros(phi.grid(), phi.generators());
    for (p, w) in vals.iter().zip(v) {
        dot = dot.try_add(&p.try_mul(w)?)?;
    }
    vals.iter()
        .zip(v)
        .map(|(p, w)| w.try_sub(&p.try_mul(&dot)?.scale(k)))
        .collect()
}

/// `D̸ψ = γ^a ∇_{f_a} ψ` with the gravitino-corrected spin connection and,
/// for sphere targets, the pulled-back Levi-Civita connection.
pub fn dirac(
    geom: &SurfaceGeometry,
    chi: &GravitinoField,
    psi: &[SpinorField],
    phi: &MapField,
    target: &Target,
) -> Result<Vec<SpinorField>> {
    let mut out: Vec<SpinorField> = Vec::with_capacity(psi.len());
    for p in psi {
        let mut acc = SpinorField::zeros(p.grid(), p.generators());
        for a in 0..2 {
            acc = acc.try_add(&spin_connection_derivative(geom, chi, p, a)?.clifford(a))?;
        }
        out.push(acc);
    }
    if target.is_flat() {
        return Ok(out);
    }
    let mut projected = out.clone();
    for alpha in 0..2 {
        let comps: Vec<GridField> = out.iter().map(|s| s.comps[alpha].clone()).collect();
        for (i, c) in project(target, phi, &comps)?.into_iter().enumerate() {
            projected[i].comps[alpha] = c;
        }
    }
    Ok(projected)
}

fn sum_pairs(a: &[SpinorField], b: &[SpinorField]) -> Result<GridField> {
    let mut out = GridField::zeros(a[0].grid(), a[0].generators());
    for (s, t) in a.iter().zip(b) {
        out = out.try_add(&s.pair(t)?)?;
    }
    Ok(out)
}

/// Sample-wise Euclidean product of two target vectors, keeping order.
fn dot(x: &[GridField], y: &[GridField]) -> Result<GridField> {
    let mut out = GridField::zeros(x[0].grid(), x[0].generators());
    for (a, b) in x.iter().zip(y) {
        out = out.try_add(&a.try_mul(b)?)?;
    }
    Ok(out)
}

/// The six terms before prefactors and volume form.
fn action_terms(
    geom: &SurfaceGeometry,
    chi: &GravitinoField,
    fields: &ComponentFields,
    target: &Target,
) -> Result<[GridField; 6]> {
    let grid = fields.grid();
    let n = fields.generators();
    let zero = GridField::zeros(grid, n);
    let grad = frame_gradient(geom, &fields.phi)?;

    let mut t1 = zero.clone();
    for g in &grad {
        for ga in g {
            t1 = t1.try_add(&ga.try_mul(ga)?)?;
        }
    }

    let psi_nonzero = fields.psi.iter().any(|s| !s.is_zero());
    let t2 = if psi_nonzero {
        sum_pairs(&fields.psi, &dirac(geom, chi, &fields.psi, &fields.phi, target)?)?
    } else {
        zero.clone()
    };

    let t3 = dot(&fields.f, &fields.f)?;

    let chi_nonzero = !chi.is_zero();
    let t4 = if chi_nonzero && psi_nonzero {
        let mut u = Vec::with_capacity(fields.dim());
        for g in &grad {
            let mut acc = SpinorField::zeros(grid, n);
            for a in 0..2 {
                for b in 0..2 {
                    let m = mat_mul(&GAMMA[a], &GAMMA[b]);
                    acc = acc.try_add(&chi.comps[a].apply_matrix(&m).left_mul(&g[b])?)?;
                }
            }
            u.push(acc);
        }
        sum_pairs(&u, &fields.psi)?
    } else {
        zero.clone()
    };

    let t5 = if chi_nonzero && psi_nonzero {
        let mut cc = zero.clone();
        for a in 0..2 {
            for b in 0..2 {
                let m = mat_mul(&GAMMA[b], &GAMMA[a]);
                cc = cc.try_add(&chi.comps[a].pair(&chi.comps[b].apply_matrix(&m))?)?;
            }
        }
        cc.try_mul(&sum_pairs(&fields.psi, &fields.psi)?)?
    } else {
        zero.clone()
    };

    let k = target.curvature();
    let t6 = if k != 0.0 && psi_nonzero {
        // ψ_α as a target vector
        let vec_of = |alpha: usize| -> Vec<GridField> { fields.psi.iter().map(|s| s.comps[alpha].clone()).collect() };
        let psis = [vec_of(0), vec_of(1)];
        // R(X,Y)Z = K(⟨Y,Z⟩X − ⟨X,Z⟩Y)
        let curvature = |x: &[GridField], y: &[GridField], z: &[GridField]| -> Result<Vec<GridField>> {
            let yz = dot(y, z)?;
            let xz = dot(x, z)?;
            x.iter()
                .zip(y)
                .map(|(xi, yi)| Ok(yz.try_mul(xi)?.try_sub(&xz.try_mul(yi)?)?.scale(k)))
                .collect()
        };
        let eps = |a: usize, b: usize| GAMMA12[a][b];
        let mut acc = zero.clone();
        for al in 0..2 {
            for be in 0..2 {
                for ga in 0..2 {
                    for de in 0..2 {
                        let e = eps(al, be) * eps(ga, de);
                        if e == 0.0 {
                            continue;
                        }
                        let r = curvature(&psis[al], &psis[ga], &psis[de])?;
                        acc = acc.try_add(&dot(&r, &psis[be])?.scale(e))?;
                    }
                }
            }
        }
        acc
    } else {
        zero
    };
    Ok([t1, t2, t3, t4, t5, t6])
}

/// Action density with respect to dx¹dx², i.e. including dvol.
pub fn action_density(
    geom: &SurfaceGeometry,
    chi: &GravitinoField,
    fields: &ComponentFields,
    target: &Target,
    coeffs: &ActionCoefficients,
) -> Result<GridField> {
    fields.validate()?;
    if fields.dim() != target.ambient_dim() {
        return Err(Error::Shape(format!(
            "fields have {} target coordinates, target needs {}",
            fields.dim(),
            target.ambient_dim()
        )));
    }
    let terms = action_terms(geom, chi, fields, target)?;
    let c = [coeffs.c1, coeffs.c2, coeffs.c3, coeffs.c4, coeffs.c5, coeffs.c6];
    let mut out = GridField::zeros(fields.grid(), fields.generators());
    for (t, c) in terms.iter().zip(c) {
        if c != 0.0 && !t.is_zero() {
            out = out.try_add(&t.scale(c))?;
        }
    }
    geom.dvol()?.try_mul(&out)
}

pub fn action_component(
    geom: &SurfaceGeometry,
    chi: &GravitinoField,
    fields: &ComponentFields,
    target: &Target,
    coeffs: &ActionCoefficients,
) -> Result<GrassmannNumber> {
    Ok(quadrature(&action_density(geom, chi, fields, target, coeffs)?))
}

/// Dirichlet energy `∫ ‖dφ‖² dvol`.
pub fn harmonic_action(geom: &SurfaceGeometry, phi: &MapField) -> Result<GrassmannNumber> {
    let fields = ComponentFields::bosonic(phi.clone());
    let target = Target::Flat { dim: phi.dim() };
    let coeffs = ActionCoefficients {
        c1: 1.0,
        c2: 0.0,
        c3: 0.0,
        c4: 0.0,
        c5: 0.0,
        c6: 0.0,
        ..ActionCoefficients::NOMINAL
    };
    let chi = GravitinoField::zeros(phi.grid(), phi.generators());
    action_component(geom, &chi, &fields, &target, &coeffs)
}

/// `(γ^aγ¹γ²)`, the η-linear coefficient matrices of the flat odd frame.
fn superspace_matrix(a: usize) -> [[f64; 2]; 2] {
    mat_mul(&GAMMA[a], &GAMMA12)
}

/// Flat odd frame `D_α = ∂_{η^α} + Σ_β (γ^aγ¹γ²)_{βα} η^β ∂_{x^a}` on ℝ^{2|2}.
pub fn flat_odd_frame(grid: &Grid, generators: usize, alpha: usize) -> Result<SuperVectorField> {
    if grid.dims() != 2 || alpha > 1 {
        return Err(Error::Shape("flat odd frame lives on ℝ^(2|2)".into()));
    }
    let eta = [
        SuperFunction::odd_coordinate(grid, 2, generators, 0)?,
        SuperFunction::odd_coordinate(grid, 2, generators, 1)?,
    ];
    let mut even = Vec::new();
    for a in 0..2 {
        let m = superspace_matrix(a);
        even.push(eta[0].scale(m[0][alpha]).try_add(&eta[1].scale(m[1][alpha]))?);
    }
    let one = SuperFunction::constant(grid, 2, &GrassmannNumber::one(generators));
    let zero = SuperFunction::zeros(grid, 2, generators);
    let odd = if alpha == 0 { vec![one, zero] } else { vec![zero, one] };
    Ok(SuperVectorField {
        even_components: even,
        odd_components: odd,
    })
}

/// `Δ^𝒟Φ = ε^{αβ} D_α D_β Φ`.
pub fn d_laplace_flat(phi: &SuperFunction) -> Result<SuperFunction> {
    let d1 = flat_odd_frame(phi.grid(), phi.generators(), 0)?;
    let d2 = flat_odd_frame(phi.grid(), phi.generators(), 1)?;
    d1.apply(&d2.apply(phi)?)?.try_sub(&d2.apply(&d1.apply(phi)?)?)
}

/// Normalization relating `∫ε^{αβ}⟨D_αΦ, D_βΦ⟩` to the component action.
pub const SUPERFIELD_NORMALIZATION: f64 = -0.5;

/// `∫ ε^{αβ}⟨D_αΦ, D_βΦ⟩ [dx dη]` for a flat target, without normalization.
pub fn action_superfield_flat_raw(phi: &[SuperFunction]) -> Result<GrassmannNumber> {
    let first = phi.first().ok_or_else(|| Error::Shape("empty superfield".into()))?;
    let d1 = flat_odd_frame(first.grid(), first.generators(), 0)?;
    let d2 = flat_odd_frame(first.grid(), first.generators(), 1)?;
    let mut integrand = SuperFunction::zeros(first.grid(), 2, first.generators());
    for p in phi {
        let (a, b) = (d1.apply(p)?, d2.apply(p)?);
        integrand = integrand.try_add(&a.try_mul(&b)?.try_sub(&b.try_mul(&a)?)?)?;
    }
    berezin_integrate(&integrand, &BerezinDomain::new(first.grid().clone(), 2))
}

/// Superfield action in the flat model, normalized to the component action.
pub fn action_superfield_flat(phi: &[SuperFunction]) -> Result<GrassmannNumber> {
    Ok(action_superfield_flat_raw(phi)?.scale(SUPERFIELD_NORMALIZATION))
}

/// `Φ^i = φ^i + η^μψ_μ^i + η¹η² F_slot^i` with `F_slot = −F/2`, so that the
/// component fields read back by [`component_fields_of`] are the inputs.
pub fn superfield_of(fields: &ComponentFields) -> Result<Vec<SuperFunction>> {
    fields.validate()?;
    if !fields.phi.is_periodic() {
        return Err(Error::UnsupportedRegime("superfields need a periodic map".into()));
    }
    let g = fields.grid();
    (0..fields.dim())
        .map(|i| {
            SuperFunction::from_terms(
                g,
                2,
                fields.generators(),
                [
                    (vec![], fields.phi.periodic[i].clone()),
                    (vec![0], fields.psi[i].comps[0].clone()),
                    (vec![1], fields.psi[i].comps[1].clone()),
                    (vec![0, 1], fields.f[i].scale(-0.5)),
                ],
            )
        })
        .collect()
}

/// `φ = Φ|, ψ_α = (D_αΦ)|, F = (Δ^𝒟Φ)|` along the standard embedding.
pub fn component_fields_of(phi: &[SuperFunction]) -> Result<ComponentFields> {
    let first = phi.first().ok_or_else(|| Error::Shape("empty superfield".into()))?;
    let d1 = flat_odd_frame(first.grid(), first.generators(), 0)?;
    let d2 = flat_odd_frame(first.grid(), first.generators(), 1)?;
    let mut maps = Vec::new();
    let mut psi = Vec::new();
    let mut f = Vec::new();
    for p in phi {
        maps.push(p.restrict_standard());
        psi.push(SpinorField::new(
            d1.apply(p)?.restrict_standard(),
            d2.apply(p)?.restrict_standard(),
        )?);
        f.push(d_laplace_flat(p)?.restrict_standard());
    }
    ComponentFields::new(MapField::periodic(maps), psi, f)
}

/// Matter variations `(δφ, δψ)` for F = 0 and a flat target:
/// `δφ = s₁⟨q,ψ⟩`, `δψ = s₂(f_kφ − ⟨ψ,χ_k⟩)γ^k q`.
pub fn susy_fields(
    geom: &SurfaceGeometry,
    chi: &GravitinoField,
    fields: &ComponentFields,
    target: &Target,
    q: &SpinorField,
    coeffs: &ActionCoefficients,
) -> Result<(Vec<GridField>, Vec<SpinorField>)> {
    if !target.is_flat() {
        return Err(Error::UnsupportedRegime(
            "supersymmetry variations need a flat target".into(),
        ));
    }
    if fields.f.iter().any(|f| !f.is_zero()) {
        return Err(Error::UnsupportedRegime("supersymmetry variations need F = 0".into()));
    }
    if !q.has_parity(Parity::Odd) {
        return Err(Error::Parity {
            what: "supersymmetry parameter",
            expected: Parity::Odd,
            found: q.parity(),
        });
    }
    let grad = frame_gradient(geom, &fields.phi)?;
    let gq = [q.clifford(0), q.clifford(1)];
    let mut dphi = Vec::new();
    let mut dpsi = Vec::new();
    for (i, psi) in fields.psi.iter().enumerate() {
        dphi.push(q.pair(psi)?.scale(coeffs.s1));
        let mut acc = SpinorField::zeros(fields.grid(), fields.generators());
        for k in 0..2 {
            let coeff = grad[i][k].try_sub(&psi.pair(&chi.comps[k])?)?;
            acc = acc.try_add(&gq[k].left_mul(&coeff)?)?;
        }
        dpsi.push(acc.scale(coeffs.s2));
    }
    Ok((dphi, dpsi))
}

/// Everything that varies under a local supersymmetry.
#[derive(Debug, Clone)]
pub struct SusyConfiguration {
    pub geom: SurfaceGeometry,
    pub chi: GravitinoField,
    pub fields: ComponentFields,
}

/// The configuration moved by `t` times the supersymmetry with parameter q.
pub fn susy_shift(
    config: &SusyConfiguration,
    q: &SpinorField,
    coeffs: &ActionCoefficients,
    t: f64,
) -> Result<SusyConfiguration> {
    let target = Target::Flat {
        dim: config.fields.dim(),
    };
    let (dphi, dpsi) = susy_fields(&config.geom, &config.chi, &config.fields, &target, q, coeffs)?;
    let var = susy_metric_gravitino(&config.geom, &config.chi, q, coeffs.s3)?;
    let mut out = config.clone();
    for i in 0..config.fields.dim() {
        out.fields.phi.periodic[i] = out.fields.phi.periodic[i].try_add(&dphi[i].scale(t))?;
        out.fields.psi[i] = out.fields.psi[i].try_add(&dpsi[i].scale(t))?;
    }
    for a in 0..2 {
        for mu in 0..2 {
            out.geom.frame[a][mu] = out.geom.frame[a][mu].try_add(&var.frame[a][mu].scale(t))?;
        }
    }
    out.chi = out.chi.try_add(&var.chi.scale(t))?;
    Ok(out)
}

/// Largest coefficient of the part of δA odd in q, as
/// `½(A(config + δ) − A(config − δ))`.
pub fn susy_invariance_residual(
    config: &SusyConfiguration,
    q: &SpinorField,
    coeffs: &ActionCoefficients,
) -> Result<f64> {
    let target = Target::Flat {
        dim: config.fields.dim(),
    };
    let eval = |c: &SusyConfiguration| action_component(&c.geom, &c.chi, &c.fields, &target, coeffs);
    let plus = eval(&susy_shift(config, q, coeffs, 1.0)?)?;
    let minus = eval(&susy_shift(config, q, coeffs, -1.0)?)?;
    Ok((&plus - &minus).scale(0.5).max_abs())
}

/// One entry of a calibration battery.
#[derive(Debug, Clone)]
pub struct SusyFixture {
    pub config: SusyConfiguration,
    pub q: SpinorField,
}

/// Residual of every sign assignment on a battery, in search order.
pub fn calibration_table(battery: &[SusyFixture]) -> Result<Vec<(ActionCoefficients, f64)>> {
    let mut out = Vec::new();
    for bits in 0..32u32 {
        let signs: [f64; 5] = std::array::from_fn(|k| if bits >> k & 1 == 0 { 1.0 } else { -1.0 });
        let coeffs = ActionCoefficients::with_signs(signs);
        let mut worst: f64 = 0.0;
        for fx in battery {
            worst = worst.max(susy_invariance_residual(&fx.config, &fx.q, &coeffs)?);
        }
        out.push((coeffs, worst));
    }
    Ok(out)
}

/// Brute-force search over the signs of s₁, s₂, s₃, c₄, c₅. Among assignments
/// reaching `tol`, the one closest to the nominal signs wins.
pub fn calibrate_conventions(battery: &[SusyFixture], tol: f64) -> Result<ActionCoefficients> {
    let table = calibration_table(battery)?;
    let best = table.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min);
    let worst = table.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    if worst - best <= 1e-12 * worst.max(1.0) {
        return Err(Error::CalibrationUnderdetermined);
    }
    table
        .iter()
        .filter(|(_, r)| *r <= tol)
        .min_by(|a, b| a.0.flips().cmp(&b.0.flips()).then(a.1.total_cmp(&b.1)))
        .map(|(c, _)| *c)
        .ok_or(Error::CalibrationFailed { best, tolerance: tol })
}

/// How the gravitino of a generated SUSY fixture is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GravitinoMode {
    Zero,
    /// χ carried by a single generator, so only terms linear in χ survive.
    Linear,
    Generic,
}

/// Band-limited component fields with periodic φ on `dim` target
/// coordinates, Grassmann content on `gens`; F is zero unless `with_f`.
pub fn random_component_fields<R: rand::Rng>(
    rng: &mut R,
    grid: &Grid,
    generators: usize,
    dim: usize,
    kmax: i64,
    gens: std::ops::Range<usize>,
    with_f: bool,
) -> ComponentFields {
    let mut phi = Vec::new();
    let mut psi = Vec::new();
    let mut f = Vec::new();
    for _ in 0..dim {
        phi.push(fixtures::trig_even(rng, grid, generators, kmax, gens.clone()));
        psi.push(fixtures::trig_spinor(rng, grid, generators, kmax, gens.clone()));
        f.push(if with_f {
            fixtures::trig_even(rng, grid, generators, kmax, gens.clone())
        } else {
            GridField::zeros(grid, generators)
        });
    }
    ComponentFields {
        phi: MapField::periodic(phi),
        psi,
        f,
    }
}

/// Seeded SUSY fixtures on a flat frame: two target coordinates, F = 0 and
/// q on the SUSY generator.
pub fn susy_battery(seed: u64, grid: &Grid, count: usize, mode: GravitinoMode) -> Vec<SusyFixture> {
    let n = fixtures::DEFAULT_GENERATORS;
    let mut rng = fixtures::rng(seed);
    (0..count)
        .map(|_| {
            let field_gens = match mode {
                GravitinoMode::Linear => 0..3,
                _ => fixtures::FIELD_GENERATORS,
            };
            let fields = random_component_fields(&mut rng, grid, n, 2, 2, field_gens, false);
            let chi = match mode {
                GravitinoMode::Zero => GravitinoField::zeros(grid, n),
                GravitinoMode::Linear => GravitinoField {
                    comps: [
                        fixtures::trig_parameter(&mut rng, grid, n, 1, 3),
                        fixtures::trig_parameter(&mut rng, grid, n, 1, 3),
                    ],
                },
                GravitinoMode::Generic => GravitinoField {
                    comps: [
                        fixtures::trig_spinor(&mut rng, grid, n, 1, fixtures::FIELD_GENERATORS),
                        fixtures::trig_spinor(&mut rng, grid, n, 1, fixtures::FIELD_GENERATORS),
                    ],
                },
            };
            let q = fixtures::trig_parameter(&mut rng, grid, n, 2, fixtures::SUSY_GENERATOR);
            let geom = SurfaceGeometry::flat(grid, n).expect("flat frame on a 2D grid");
            SusyFixture {
                config: SusyConfiguration { geom, chi, fields },
                q,
            }
        })
        .collect()
}

/// Symmetric 2-tensor field `T^{μν}`.
#[derive(Debug, Clone)]
pub struct SymmetricTensor {
    pub t11: GridField,
    pub t12: GridField,
    pub t22: GridField,
}

impl SymmetricTensor {
    pub fn trace(&self) -> Result<GridField> {
        self.t11.try_add(&self.t22)
    }

    /// `∂_μ T^{μν}` on the flat torus.
    pub fn divergence(&self) -> Result<[GridField; 2]> {
        Ok([
            self.t11.derivative(0)?.try_add(&self.t12.derivative(1)?)?,
            self.t12.derivative(0)?.try_add(&self.t22.derivative(1)?)?,
        ])
    }

    /// `T_zz = ¼(T₁₁ − T₂₂ − 2iT₁₂)` as (real, imaginary) parts.
    pub fn t_zz(&self) -> Result<(GridField, GridField)> {
        Ok((self.t11.try_sub(&self.t22)?.scale(0.25), self.t12.scale(-0.5)))
    }

    /// `∂_z̄ T_zz` with `∂_z̄ = ½(∂₁ + i∂₂)`.
    pub fn dbar_t_zz(&self) -> Result<(GridField, GridField)> {
        let (re, im) = self.t_zz()?;
        dbar(&re, &im)
    }

    pub fn max_abs(&self) -> f64 {
        self.t11.max_abs().max(self.t12.max_abs()).max(self.t22.max_abs())
    }
}

/// `½(∂₁ + i∂₂)(u + iv)` as (real, imaginary) parts.
pub fn dbar(re: &GridField, im: &GridField) -> Result<(GridField, GridField)> {
    Ok((
        re.derivative(0)?.try_sub(&im.derivative(1)?)?.scale(0.5),
        re.derivative(1)?.try_add(&im.derivative(0)?)?.scale(0.5),
    ))
}

/// Default finite-difference step for metric variations.
pub const METRIC_STEP: f64 = 1e-5;

/// Energy-momentum tensor defined by `δA = ∫ δ(g^{μν}) T_{μν} dvol` under
/// variations of the cometric `g^{μν} = Σ_a f_a^μ f_a^ν`, by central
/// differences of the pointwise action density. The frame perturbation is
/// `δf = ½ h f^{−T} S` built from the body of the frame.
pub fn energy_momentum(
    geom: &SurfaceGeometry,
    chi: &GravitinoField,
    fields: &ComponentFields,
    target: &Target,
    coeffs: &ActionCoefficients,
    h: f64,
) -> Result<SymmetricTensor> {
    let grid = &geom.grid;
    let n = geom.generators();
    let bodies: Vec<Vec<f64>> = geom.frame.iter().flatten().map(GridField::body).collect();
    let dvol = geom.dvol()?;
    let inv_dvol = dvol.map_points(|d| d.recip())?;
    let basis: [[[f64; 2]; 2]; 3] = [
        [[1.0, 0.0], [0.0, 0.0]],
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, 0.0], [0.0, 1.0]],
    ];
    let mut comps = Vec::new();
    for s in &basis {
        // δF[a][μ] = ½h Σ_ν (F^{−T})[a][ν] S[ν][μ], per point
        let mut delta: [[Vec<f64>; 2]; 2] = Default::default();
        for p in 0..grid.len() {
            let f = [[bodies[0][p], bodies[1][p]], [bodies[2][p], bodies[3][p]]];
            let det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
            let inv_t = [[f[1][1] / det, -f[1][0] / det], [-f[0][1] / det, f[0][0] / det]];
            for a in 0..2 {
                for mu in 0..2 {
                    let v = 0.5 * (inv_t[a][0] * s[0][mu] + inv_t[a][1] * s[1][mu]);
                    delta[a][mu].push(v);
                }
            }
        }
        let shifted = |sign: f64| -> Result<SurfaceGeometry> {
            let mut g = geom.clone();
            for a in 0..2 {
                for mu in 0..2 {
                    let d = GridField::from_real(grid, n, delta[a][mu].iter().map(|v| sign * h * v).collect());
                    g.frame[a][mu] = g.frame[a][mu].try_add(&d)?;
                }
            }
            Ok(g)
        };
        let plus = action_density(&shifted(1.0)?, chi, fields, target, coeffs)?;
        let minus = action_density(&shifted(-1.0)?, chi, fields, target, coeffs)?;
        comps.push(inv_dvol.try_mul(&plus.try_sub(&minus)?)?.scale(1.0 / (2.0 * h)));
    }
    Ok(SymmetricTensor {
        t11: comps[0].clone(),
        t12: comps[1].scale(0.5),
        t22: comps[2].clone(),
    })
}

/// Closed form `dφ⊗dφ − ½|dφ|²g` of the Dirichlet term on a flat frame.
pub fn dirichlet_energy_momentum(phi: &MapField) -> Result<SymmetricTensor> {
    let z = GridField::zeros(phi.grid(), phi.generators());
    let mut d = Vec::new();
    for i in 0..phi.dim() {
        d.push([phi.derivative(i, 0)?, phi.derivative(i, 1)?]);
    }
    let mut t = [[z.clone(), z.clone()], [z.clone(), z]];
    for di in &d {
        for m in 0..2 {
            for v in 0..2 {
                t[m][v] = t[m][v].try_add(&di[m].try_mul(&di[v])?)?;
            }
        }
    }
    let half_trace = t[0][0].try_add(&t[1][1])?.scale(0.5);
    Ok(SymmetricTensor {
        t11: t[0][0].try_sub(&half_trace)?,
        t12: t[0][1].clone(),
        t22: t[1][1].try_sub(&half_trace)?,
    })
}

/// Super current defined by `δA = ∫ Σ_{a,α} δχ_{aα} J_{aα} dvol`, read off
/// exactly by shifting each gravitino component by the probe generator.
pub fn super_current(
    geom: &SurfaceGeometry,
    chi: &GravitinoField,
    fields: &ComponentFields,
    target: &Target,
    coeffs: &ActionCoefficients,
) -> Result<GravitinoField> {
    let n = fields.generators();
    if PROBE_GENERATOR >= n {
        return Err(Error::GeneratorOutOfRange {
            index: PROBE_GENERATOR,
            generators: n,
        });
    }
    let probe_bit = 1u64 << PROBE_GENERATOR;
    let chi_mask = chi
        .comps
        .iter()
        .flat_map(|s| s.comps.iter())
        .fold(0, |m, c| m | c.support_mask());
    if (fields.support_mask() | chi_mask) & probe_bit != 0 {
        return Err(Error::Shape("fields already use the probe generator".into()));
    }
    let grid = fields.grid();
    let zeta = GridField::constant(grid, &GrassmannNumber::generator(n, PROBE_GENERATOR)?);
    let inv_dvol = geom.dvol()?.map_points(|d| d.recip())?;
    let mut out = GravitinoField::zeros(grid, n);
    for a in 0..2 {
        for alpha in 0..2 {
            let mut shifted = chi.clone();
            shifted.comps[a].comps[alpha] = shifted.comps[a].comps[alpha].try_add(&zeta)?;
            let density = action_density(geom, &shifted, fields, target, coeffs)?;
            let j = density.left_derivative(PROBE_GENERATOR);
            out.comps[a].comps[alpha] = inv_dvol.try_mul(&j)?;
        }
    }
    Ok(out)
}

/// `J_a − ½γ_aγ^bJ_b`, the gamma-trace-free part.
pub fn spin_three_halves(j: &GravitinoField) -> Result<GravitinoField> {
    let trace = j.gamma_trace()?;
    Ok(GravitinoField {
        comps: [
            j.comps[0].try_sub(&trace.clifford(0).scale(0.5))?,
            j.comps[1].try_sub(&trace.clifford(1).scale(0.5))?,
        ],
    })
}

/// Complex component `w = J₁₁ − iJ₁₂` of a gamma-trace-free current; the
/// whole field is determined by it.
pub fn complex_component(j: &GravitinoField) -> (GridField, GridField) {
    (j.comps[0].comps[0].clone(), j.comps[0].comps[1].scale(-1.0))
}

/// Outcome of a harmonic map flow.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub phi: MapField,
    pub steps: usize,
    pub energy: f64,
    pub initial_energy: f64,
    pub gradient_norm: f64,
    pub converged: bool,
}

/// Parameters of [`harmonic_flow`].
#[derive(Debug, Clone, Copy)]
pub struct FlowParams {
    pub steps: usize,
    pub dt: f64,
    pub tol: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            steps: 5000,
            dt: 1e-3,
            tol: 1e-9,
        }
    }
}

fn laplacian(u: &GridField) -> Result<GridField> {
    u.derivative(0)?
        .derivative(0)?
        .try_add(&u.derivative(1)?.derivative(1)?)
}

fn renormalize(phi: &mut MapField, k: f64) -> Result<()> {
    let mut norm2 = GridField::zeros(phi.grid(), phi.generators());
    for p in &phi.periodic {
        norm2 = norm2.try_add(&p.try_mul(p)?)?;
    }
    let s = norm2.map_points(|v| v.scale(k).powf(-0.5))?;
    for p in phi.periodic.iter_mut() {
        *p = s.try_mul(p)?;
    }
    Ok(())
}

/// Explicit gradient descent `φ ← φ + 2dt τ(φ)` on the Dirichlet energy of
/// a map from the flat torus, with τ the tension field. Sphere targets are
/// reprojected after every step.
pub fn harmonic_flow(phi0: &MapField, target: &Target, params: FlowParams) -> Result<FlowResult> {
    if phi0.dim() != target.ambient_dim() {
        return Err(Error::Shape("map does not match the target".into()));
    }
    let k = target.curvature();
    if !target.is_flat() && !phi0.is_periodic() {
        return Err(Error::UnsupportedRegime("sphere-valued maps must be periodic".into()));
    }
    let geom = SurfaceGeometry::flat(phi0.grid(), phi0.generators())?;
    let energy_of = |p: &MapField| -> Result<f64> { Ok(harmonic_action(&geom, p)?.body()) };
    let mut phi = phi0.clone();
    if !target.is_flat() {
        renormalize(&mut phi, k)?;
    }
    let initial_energy = energy_of(&phi)?;
    let mut energy = initial_energy;
    let mut rising = 0usize;
    let mut gradient_norm = f64::INFINITY;
    for step in 0..=params.steps {
        let lap: Vec<GridField> = phi.periodic.iter().map(laplacian).collect::<Result<_>>()?;
        let tension = project(target, &phi, &lap)?;
        gradient_norm = tension.iter().map(GridField::max_abs).fold(0.0, f64::max);
        if gradient_norm < params.tol {
            return Ok(FlowResult {
                phi,
                steps: step,
                energy,
                initial_energy,
                gradient_norm,
                converged: true,
            });
        }
        if step == params.steps {
            break;
        }
        for (p, t) in phi.periodic.iter_mut().zip(&tension) {
            *p = p.try_add(&t.scale(2.0 * params.dt))?;
        }
        if !target.is_flat() {
            renormalize(&mut phi, k)?;
        }
        let e = energy_of(&phi)?;
        if !e.is_finite() {
            return Err(Error::FlowDiverged { step, energy: e });
        }
        rising = if e > energy { rising + 1 } else { 0 };
        energy = e;
        if rising >= 10 {
            return Err(Error::FlowDiverged { step, energy: e });
        }
    }
    Ok(FlowResult {
        phi,
        steps: params.steps,
        energy,
        initial_energy,
        gradient_norm,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::fixtures::{rng, FIELD_GENERATORS, SUSY_GENERATOR};

    const N: usize = 6;

    fn xi(i: usize) -> GrassmannNumber {
        GrassmannNumber::generator(N, i).unwrap()
    }

    fn real(g: &Grid, f: impl Fn(&[f64]) -> f64) -> GridField {
        GridField::from_fn(g, N, f)
    }

    fn flat(g: &Grid) -> SurfaceGeometry {
        SurfaceGeometry::flat(g, N).unwrap()
    }

    fn no_chi(g: &Grid) -> GravitinoField {
        GravitinoField::zeros(g, N)
    }

    #[test]
    fn sin_map_has_action_two_pi_squared() {
        let g = Grid::torus(16);
        let phi = MapField::periodic(vec![real(&g, |x| x[0].sin())]);
        let fields = ComponentFields::bosonic(phi.clone());
        let a = action_component(
            &flat(&g),
            &no_chi(&g),
            &fields,
            &Target::Flat { dim: 1 },
            &Default::default(),
        )
        .unwrap();
        assert!((a.body() - 2.0 * PI * PI).abs() < 1e-10);
        assert!(a.soul().is_zero());
        assert!((harmonic_action(&flat(&g), &phi).unwrap().body() - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn only_the_f_term_survives_for_constant_map() {
        let g = Grid::torus(8);
        let c = 1.7;
        let phi = MapField::periodic(vec![real(&g, |_| 0.3)]);
        let fields = ComponentFields::new(phi, vec![SpinorField::zeros(&g, N)], vec![real(&g, |_| c)]).unwrap();
        let a = action_component(
            &flat(&g),
            &no_chi(&g),
            &fields,
            &Target::Flat { dim: 1 },
            &Default::default(),
        )
        .unwrap();
        assert!((a.body() + 0.25 * c * c * 4.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn curvature_term_vanishes_only_on_flat_targets() {
        let g = Grid::torus(8);
        let mut r = rng(5);
        let fields = random_component_fields(&mut r, &g, N, 3, 2, FIELD_GENERATORS, false);
        let terms = action_terms(&flat(&g), &no_chi(&g), &fields, &Target::Flat { dim: 3 }).unwrap();
        assert!(terms[5].is_zero());
        let sphere = terms_on_sphere(&g);
        assert!(!sphere[5].is_zero());
        assert!(sphere[5].has_parity(Parity::Even));
    }

    fn terms_on_sphere(g: &Grid) -> [GridField; 6] {
        // φ = (cos x¹, sin x¹, 0) on the unit sphere, ψ along two generators
        let phi = MapField::periodic(vec![real(g, |x| x[0].cos()), real(g, |x| x[0].sin()), real(g, |_| 0.0)]);
        let mut r = rng(17);
        let psi: Vec<SpinorField> = (0..3)
            .map(|_| fixtures::trig_spinor(&mut r, g, N, 1, FIELD_GENERATORS))
            .collect();
        let fields = ComponentFields::new(phi, psi, vec![GridField::zeros(g, N); 3]).unwrap();
        action_terms(&flat(g), &no_chi(g), &fields, &Target::Sphere { curvature: 1.0 }).unwrap()
    }

    #[test]
    fn dirac_examples() {
        let g = Grid::torus(16);
        let t = Target::Flat { dim: 1 };
        let phi = MapField::periodic(vec![GridField::zeros(&g, N)]);
        let c = SpinorField::constant(&g, [&xi(0), &xi(1)]);
        let d = dirac(&flat(&g), &no_chi(&g), &[c], &phi, &t).unwrap();
        assert!(d[0].max_abs() < 1e-12);

        let psi = SpinorField::new(
            GridField::constant_times(&g, &xi(0), |x| x[0].sin()),
            GridField::zeros(&g, N),
        )
        .unwrap();
        let d = dirac(&flat(&g), &no_chi(&g), &[psi], &phi, &t).unwrap();
        let expected = GridField::constant_times(&g, &xi(0), |x| x[0].cos());
        assert!((&d[0].comps[0] - &expected).max_abs() < 1e-12);
        assert!(d[0].comps[1].max_abs() < 1e-12);
    }

    #[test]
    fn dirac_squares_to_the_laplacian() {
        let g = Grid::torus(16);
        let t = Target::Flat { dim: 1 };
        let phi = MapField::periodic(vec![GridField::zeros(&g, N)]);
        let psi = fixtures::trig_spinor(&mut rng(2), &g, N, 3, FIELD_GENERATORS);
        let once = dirac(&flat(&g), &no_chi(&g), &[psi.clone()], &phi, &t).unwrap();
        let twice = dirac(&flat(&g), &no_chi(&g), &once, &phi, &t).unwrap();
        for k in 0..2 {
            let lap = laplacian(&psi.comps[k]).unwrap();
            assert!((&twice[0].comps[k] - &lap).max_abs() < 1e-9);
        }
    }

    #[test]
    fn superfield_action_matches_component_action() {
        let g = Grid::torus(12);
        let mut r = rng(11);
        let t = Target::Flat { dim: 2 };
        for _ in 0..5 {
            let fields = random_component_fields(&mut r, &g, N, 2, 2, FIELD_GENERATORS, true);
            let sf = superfield_of(&fields).unwrap();
            assert!(component_fields_of(&sf).unwrap().max_abs_diff(&fields) < 1e-12);
            let a = action_superfield_flat(&sf).unwrap();
            let b = action_component(&flat(&g), &no_chi(&g), &fields, &t, &Default::default()).unwrap();
            assert!((&a - &b).max_abs() < 1e-8, "{}", (&a - &b).max_abs());
        }
    }

    #[test]
    fn superfield_pieces_match_single_terms() {
        let g = Grid::torus(12);
        let mut r = rng(4);
        let t = Target::Flat { dim: 1 };
        let full = random_component_fields(&mut r, &g, N, 1, 2, FIELD_GENERATORS, true);
        let zero = GridField::zeros(&g, N);
        let pieces = [
            ComponentFields::bosonic(full.phi.clone()),
            ComponentFields::new(
                MapField::periodic(vec![zero.clone()]),
                full.psi.clone(),
                vec![zero.clone()],
            )
            .unwrap(),
            ComponentFields::new(
                MapField::periodic(vec![zero.clone()]),
                vec![SpinorField::zeros(&g, N)],
                full.f.clone(),
            )
            .unwrap(),
        ];
        for p in &pieces {
            let a = action_superfield_flat(&superfield_of(p).unwrap()).unwrap();
            let b = action_component(&flat(&g), &no_chi(&g), p, &t, &Default::default()).unwrap();
            assert!((&a - &b).max_abs() < 1e-9);
        }
    }

    #[test]
    fn d_laplace_examples() {
        let g = Grid::torus(8);
        let c = SuperFunction::constant(&g, 2, &xi(0));
        assert!(d_laplace_flat(&c).unwrap().coeffs().all(|(_, f)| f.max_abs() < 1e-12));
        let mut r = rng(9);
        let a = superfield_of(&random_component_fields(&mut r, &g, N, 1, 2, FIELD_GENERATORS, true)).unwrap();
        let b = superfield_of(&random_component_fields(&mut r, &g, N, 1, 2, FIELD_GENERATORS, true)).unwrap();
        let lhs = d_laplace_flat(&a[0].try_add(&b[0].scale(2.0)).unwrap()).unwrap();
        let rhs = d_laplace_flat(&a[0])
            .unwrap()
            .try_add(&d_laplace_flat(&b[0]).unwrap().scale(2.0))
            .unwrap();
        assert!(lhs.try_sub(&rhs).unwrap().coeffs().all(|(_, f)| f.max_abs() < 1e-10));
    }

    #[test]
    fn susy_field_examples() {
        let g = Grid::torus(8);
        let t = Target::Flat { dim: 1 };
        let q = fixtures::trig_parameter(&mut rng(1), &g, N, 1, SUSY_GENERATOR);
        let phi = MapField::periodic(vec![real(&g, |x| x[0].sin() + (2.0 * x[1]).cos())]);
        let fields = ComponentFields::bosonic(phi.clone());
        let c = ActionCoefficients::default();
        let (dphi, dpsi) = susy_fields(&flat(&g), &no_chi(&g), &fields, &t, &q, &c).unwrap();
        assert!(dphi[0].is_zero());
        let expected = q
            .clifford(0)
            .left_mul(&phi.derivative(0, 0).unwrap())
            .unwrap()
            .try_add(&q.clifford(1).left_mul(&phi.derivative(0, 1).unwrap()).unwrap())
            .unwrap();
        assert!(dpsi[0].try_sub(&expected).unwrap().max_abs() < 1e-12);

        let zero_q = SpinorField::zeros(&g, N);
        let (dphi, dpsi) = susy_fields(&flat(&g), &no_chi(&g), &fields, &t, &zero_q, &c).unwrap();
        assert!(dphi[0].is_zero() && dpsi[0].is_zero());

        // constant fields: only the gravitino term is left
        let psi = SpinorField::constant(&g, [&xi(0), &xi(1)]);
        let chi = GravitinoField::new(
            SpinorField::constant(&g, [&xi(2), &xi(3)]),
            SpinorField::constant(&g, [&xi(3), &xi(2).scale(-1.0)]),
        )
        .unwrap();
        let cfields = ComponentFields::new(
            MapField::periodic(vec![real(&g, |_| 1.0)]),
            vec![psi.clone()],
            vec![GridField::zeros(&g, N)],
        )
        .unwrap();
        let (_, dpsi) = susy_fields(&flat(&g), &chi, &cfields, &t, &q, &c).unwrap();
        let mut expected = SpinorField::zeros(&g, N);
        for k in 0..2 {
            let coeff = psi.pair(&chi.comps[k]).unwrap().scale(-1.0);
            expected = expected.try_add(&q.clifford(k).left_mul(&coeff).unwrap()).unwrap();
        }
        assert!(dpsi[0].try_sub(&expected).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn susy_fields_reject_unsupported_regimes() {
        let g = Grid::torus(8);
        let q = fixtures::trig_parameter(&mut rng(1), &g, N, 1, SUSY_GENERATOR);
        let c = ActionCoefficients::default();
        let with_f = random_component_fields(&mut rng(2), &g, N, 1, 1, FIELD_GENERATORS, true);
        let err = susy_fields(&flat(&g), &no_chi(&g), &with_f, &Target::Flat { dim: 1 }, &q, &c);
        assert!(matches!(err, Err(Error::UnsupportedRegime(_))));
        let three = random_component_fields(&mut rng(2), &g, N, 3, 1, FIELD_GENERATORS, false);
        let err = susy_fields(
            &flat(&g),
            &no_chi(&g),
            &three,
            &Target::Sphere { curvature: 1.0 },
            &q,
            &c,
        );
        assert!(matches!(err, Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn calibration_on_chi_free_battery() {
        let g = Grid::torus(8);
        let battery = susy_battery(3, &g, 2, GravitinoMode::Zero);
        let c = calibrate_conventions(&battery, 1e-6).unwrap();
        assert_eq!((c.s1, c.s2, c.c4), (1.0, 1.0, -2.0));
        for fx in &battery {
            assert!(susy_invariance_residual(&fx.config, &fx.q, &c).unwrap() < 1e-8);
        }
        // the nominal signs fail on the same battery
        let nominal =
            susy_invariance_residual(&battery[0].config, &battery[0].q, &ActionCoefficients::NOMINAL).unwrap();
        assert!(nominal > 1e-3);
    }

    #[test]
    fn calibration_with_linear_gravitino_fixes_frame_sign() {
        let g = Grid::torus(8);
        let mut battery = susy_battery(3, &g, 1, GravitinoMode::Zero);
        battery.extend(susy_battery(4, &g, 2, GravitinoMode::Linear));
        let c = calibrate_conventions(&battery, 1e-6).unwrap();
        assert_eq!((c.s1, c.s2, c.s3, c.c4, c.c5), (1.0, 1.0, -1.0, -2.0, -0.5));
    }

    #[test]
    fn degenerate_battery_is_underdetermined() {
        let g = Grid::torus(8);
        let mut battery = susy_battery(3, &g, 1, GravitinoMode::Zero);
        let fx = &mut battery[0];
        fx.config.fields = ComponentFields::bosonic(MapField::periodic(vec![GridField::zeros(&g, N); 2]));
        assert!(matches!(
            calibrate_conventions(&battery, 1e-6),
            Err(Error::CalibrationUnderdetermined)
        ));
        assert!(matches!(
            calibrate_conventions(&[], 1e-6),
            Err(Error::CalibrationUnderdetermined)
        ));
    }

    #[test]
    fn zero_parameter_gives_zero_residual() {
        let g = Grid::torus(8);
        let fx = &susy_battery(8, &g, 1, GravitinoMode::Generic)[0];
        let r = susy_invariance_residual(&fx.config, &SpinorField::zeros(&g, N), &Default::default()).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn dirichlet_energy_is_conformally_invariant() {
        let g = Grid::torus(16);
        let phi = MapField::periodic(vec![
            real(&g, |x| x[0].sin() * x[1].cos()),
            real(&g, |x| (2.0 * x[1]).sin()),
        ]);
        let lambda = real(&g, |x| (0.4 * x[0].sin() + 0.2 * x[1].cos()).exp());
        let a = harmonic_action(&flat(&g), &phi).unwrap().body();
        let b = harmonic_action(&flat(&g).weyl(&lambda).unwrap(), &phi).unwrap().body();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn energy_momentum_matches_closed_form() {
        let g = Grid::torus(16);
        let phi = MapField::periodic(vec![real(&g, |x| x[0].sin() * x[1].cos() + 0.3 * (2.0 * x[0]).cos())]);
        let fields = ComponentFields::bosonic(phi.clone());
        let t = energy_momentum(
            &flat(&g),
            &no_chi(&g),
            &fields,
            &Target::Flat { dim: 1 },
            &Default::default(),
            METRIC_STEP,
        )
        .unwrap();
        let exact = dirichlet_energy_momentum(&phi).unwrap();
        let scale = exact.max_abs();
        for (a, b) in [(&t.t11, &exact.t11), (&t.t12, &exact.t12), (&t.t22, &exact.t22)] {
            assert!((a - b).max_abs() < 1e-6 * scale);
        }
    }

    #[test]
    fn energy_momentum_of_linear_and_constant_maps() {
        let g = Grid::torus(8);
        let lin = MapField::affine(&g, N, vec![[1.0, 0.5]]);
        let t = energy_momentum(
            &flat(&g),
            &no_chi(&g),
            &ComponentFields::bosonic(lin),
            &Target::Flat { dim: 1 },
            &Default::default(),
            METRIC_STEP,
        )
        .unwrap();
        assert!(t.trace().unwrap().max_abs() < 1e-8);
        assert!(t.divergence().unwrap().iter().all(|d| d.max_abs() < 1e-8));
        let (re, im) = t.dbar_t_zz().unwrap();
        assert!(re.max_abs() < 1e-8 && im.max_abs() < 1e-8);
        assert!((t.t11.body()[3] - 0.375).abs() < 1e-8 && (t.t12.body()[5] - 0.5).abs() < 1e-8);

        let c = MapField::periodic(vec![real(&g, |_| 2.0)]);
        let t = dirichlet_energy_momentum(&c).unwrap();
        assert!(t.max_abs() < 1e-20);
    }

    #[test]
    fn super_current_vanishes_without_matter_fermions() {
        let g = Grid::torus(8);
        let fx = &susy_battery(1, &g, 1, GravitinoMode::Generic)[0];
        let fields = ComponentFields::bosonic(fx.config.fields.phi.clone());
        let j = super_current(
            &fx.config.geom,
            &fx.config.chi,
            &fields,
            &Target::Flat { dim: 2 },
            &Default::default(),
        )
        .unwrap();
        assert!(j.is_zero());
    }

    #[test]
    fn super_current_at_zero_gravitino_is_the_coupling_term() {
        let g = Grid::torus(8);
        let mut r = rng(21);
        let fields = random_component_fields(&mut r, &g, N, 1, 2, 0..4, false);
        let c = ActionCoefficients::default();
        let j = super_current(&flat(&g), &no_chi(&g), &fields, &Target::Flat { dim: 1 }, &c).unwrap();
        // J_{aα} = c₄ Σ_b ∂_bφ ((γ^aγ^b)ᵀ C ψ)_α
        for a in 0..2 {
            let mut expected = SpinorField::zeros(&g, N);
            for b in 0..2 {
                let m = mat_mul(&GAMMA[a], &GAMMA[b]);
                let mt = [[m[0][0], m[1][0]], [m[0][1], m[1][1]]];
                let v = fields.psi[0].apply_matrix(&GAMMA12).apply_matrix(&mt);
                expected = expected
                    .try_add(&v.left_mul(&fields.phi.derivative(0, b).unwrap()).unwrap())
                    .unwrap();
            }
            let diff = j.comps[a].try_sub(&expected.scale(c.c4)).unwrap();
            assert!(diff.max_abs() < 1e-12);
        }
    }

    #[test]
    fn super_current_gamma_trace_and_holomorphy_on_critical_fields() {
        let g = Grid::torus(8);
        // affine φ and constant ψ solve the χ = 0 field equations
        let phi = MapField::affine(&g, N, vec![[1.0, -0.5]]);
        let psi = SpinorField::constant(&g, [&xi(0), &xi(1).scale(0.5)]);
        let fields = ComponentFields::new(phi, vec![psi], vec![GridField::zeros(&g, N)]).unwrap();
        let j = super_current(
            &flat(&g),
            &no_chi(&g),
            &fields,
            &Target::Flat { dim: 1 },
            &Default::default(),
        )
        .unwrap();
        assert!(!j.is_zero());
        assert!(j.gamma_trace().unwrap().max_abs() < 1e-8);
        let (re, im) = complex_component(&spin_three_halves(&j).unwrap());
        let (dr, di) = dbar(&re, &im).unwrap();
        assert!(dr.max_abs() < 1e-8 && di.max_abs() < 1e-8);
    }

    #[test]
    fn gamma_trace_of_current_vanishes_off_shell_too() {
        let g = Grid::torus(8);
        let fx = &susy_battery(6, &g, 1, GravitinoMode::Generic)[0];
        let j = super_current(
            &fx.config.geom,
            &fx.config.chi,
            &fx.config.fields,
            &Target::Flat { dim: 2 },
            &Default::default(),
        )
        .unwrap();
        assert!(j.gamma_trace().unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn identity_and_constant_maps_are_fixed_points() {
        let g = Grid::torus(16);
        let id = harmonic_flow(
            &MapField::identity(&g, N),
            &Target::Flat { dim: 2 },
            FlowParams::default(),
        )
        .unwrap();
        assert!(id.converged && id.steps == 0);
        assert!((id.energy - 8.0 * PI * PI).abs() < 1e-9);
        let c = MapField::periodic(vec![real(&g, |_| 0.7)]);
        let res = harmonic_flow(&c, &Target::Flat { dim: 1 }, FlowParams::default()).unwrap();
        assert!(res.converged && res.energy.abs() < 1e-12);
    }

    #[test]
    fn perturbed_identity_flows_back() {
        let g = Grid::torus(16);
        let mut phi = MapField::identity(&g, N);
        phi.periodic[0] = real(&g, |x| 0.1 * (x[0] + 2.0 * x[1]).sin());
        phi.periodic[1] = real(&g, |x| 0.05 * x[0].cos() * x[1].sin());
        let res = harmonic_flow(&phi, &Target::Flat { dim: 2 }, FlowParams::default()).unwrap();
        assert!(res.steps <= 5000);
        assert!((res.energy - 8.0 * PI * PI).abs() < 1e-6, "{}", res.energy);
        assert!(res.energy < res.initial_energy);
    }

    #[test]
    fn oversized_step_diverges() {
        let g = Grid::torus(16);
        let phi = MapField::periodic(vec![real(&g, |x| (7.0 * x[0]).sin())]);
        let params = FlowParams {
            dt: 0.1,
            ..Default::default()
        };
        assert!(matches!(
            harmonic_flow(&phi, &Target::Flat { dim: 1 }, params),
            Err(Error::FlowDiverged { .. })
        ));
    }

    #[test]
    fn sphere_flow_lowers_energy_and_stays_on_sphere() {
        let g = Grid::torus(16);
        let phi = MapField::periodic(vec![
            real(&g, |x| x[0].cos() + 0.2 * x[1].sin()),
            real(&g, |x| x[0].sin()),
            real(&g, |x| 0.3 * x[1].cos()),
        ]);
        let params = FlowParams {
            steps: 200,
            ..Default::default()
        };
        let res = harmonic_flow(&phi, &Target::Sphere { curvature: 1.0 }, params).unwrap();
        assert!(res.energy < res.initial_energy);
        let norm: Vec<f64> = (0..g.len())
            .map(|p| res.phi.periodic.iter().map(|c| c.body()[p].powi(2)).sum())
            .collect();
        assert!(norm.iter().all(|n| (n - 1.0).abs() < 1e-12));
    }
}
