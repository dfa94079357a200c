//! The supersymmetric sigma model on the circle ℝ^{1|1} with target ℝ.
//!
//! Component form `½∫ φ′² + s·ψψ′ dx` and superfield form
//! `c∫ ∂_xΦ·DΦ [dx dη]` for `Φ = φ + ηψ`. With `D = ∂_η + η∂_x`, the top
//! coefficient of `∂_xΦ·DΦ` is `φ′² + ψ′ψ`, so the two agree exactly when
//! `c = ½` and `s = −1`; that is also the only fermion sign for which the
//! transformation `δφ = qψ, δψ = qφ′` leaves the action invariant. See
//! [`calibrate_fermion_sign`].

use crate::berezin::{berezin_integrate, quadrature, BerezinDomain};
use crate::error::{Error, Result};
use crate::grassmann::{GrassmannNumber, Parity};
use crate::grid::GridField;
use crate::superdomain::{apply_d, apply_q, check_odd, Embedding, SuperFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct ToyFields {
    pub phi: GridField,
    pub psi: GridField,
}

impl ToyFields {
    pub fn new(phi: GridField, psi: GridField) -> Result<Self> {
        let f = Self { phi, psi };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        self.phi.check_compatible(&self.psi)?;
        if self.phi.grid().dims() != 1 {
            return Err(Error::Shape("toy model fields live on the circle".into()));
        }
        for (f, p, what) in [(&self.phi, Parity::Even, "phi"), (&self.psi, Parity::Odd, "psi")] {
            if !f.has_parity(p) {
                return Err(Error::Parity {
                    what,
                    expected: p,
                    found: f.parity(),
                });
            }
        }
        Ok(())
    }

    /// `Φ = φ + ηψ`.
    pub fn superfield(&self) -> SuperFunction {
        SuperFunction::from_terms(
            self.phi.grid(),
            1,
            self.phi.generators(),
            [(vec![], self.phi.clone()), (vec![0], self.psi.clone())],
        )
        .expect("validated fields")
    }

    /// Components along an embedding: `(i#Φ, i#DΦ)`.
    pub fn from_superfield(phi: &SuperFunction, embedding: &Embedding) -> Result<Self> {
        Self::new(phi.restrict(embedding)?, apply_d(phi)?.restrict(embedding)?)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            phi: self.phi.try_add(&other.phi)?,
            psi: self.psi.try_add(&other.psi)?,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            phi: self.phi.scale(c),
            psi: self.psi.scale(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyConventions {
    /// Sign of the ψψ′ term in the component action.
    pub fermion_sign: f64,
    /// Prefactor of the superfield action.
    pub superfield_coefficient: f64,
}

impl Default for ToyConventions {
    fn default() -> Self {
        Self {
            fermion_sign: -1.0,
            superfield_coefficient: 0.5,
        }
    }
}

/// `½∫ φ′² + s·ψψ′ dx`.
pub fn toy_action_component_with(f: &ToyFields, conv: &ToyConventions) -> Result<GrassmannNumber> {
    f.validate()?;
    let dphi = f.phi.derivative(0)?;
    let dpsi = f.psi.derivative(0)?;
    let density = dphi
        .try_mul(&dphi)?
        .try_add(&f.psi.try_mul(&dpsi)?.scale(conv.fermion_sign))?;
    Ok(quadrature(&density).scale(0.5))
}

pub fn toy_action_component(f: &ToyFields) -> Result<GrassmannNumber> {
    toy_action_component_with(f, &ToyConventions::default())
}

/// `c∫ ∂_xΦ·DΦ [dx dη]`.
pub fn toy_action_superfield_with(phi: &SuperFunction, conv: &ToyConventions) -> Result<GrassmannNumber> {
    let integrand = phi.partial_even(0)?.try_mul(&apply_d(phi)?)?;
    let dom = BerezinDomain::new(phi.grid().clone(), 1);
    Ok(berezin_integrate(&integrand, &dom)?.scale(conv.superfield_coefficient))
}

pub fn toy_action_superfield(phi: &SuperFunction) -> Result<GrassmannNumber> {
    toy_action_superfield_with(phi, &ToyConventions::default())
}

/// `(δφ, δψ) = (qψ, q∂_xφ)`.
pub fn toy_susy(f: &ToyFields, q: &GrassmannNumber) -> Result<ToyFields> {
    f.validate()?;
    check_odd(q, "supersymmetry parameter")?;
    let qf = GridField::constant(f.phi.grid(), q);
    Ok(ToyFields {
        phi: qf.try_mul(&f.psi)?,
        psi: qf.try_mul(&f.phi.derivative(0)?)?,
    })
}

/// The same variation read off geometrically: `(i*QΦ, i*QDΦ)` along the
/// standard embedding.
pub fn toy_susy_geometric(f: &ToyFields, q: &GrassmannNumber) -> Result<ToyFields> {
    let phi = f.superfield();
    let qphi = apply_q(&phi, q)?;
    let qdphi = apply_q(&apply_d(&phi)?, q)?;
    ToyFields::new(qphi.restrict_standard(), qdphi.restrict_standard())
}

/// Largest coefficient of the part of `A(f + δf) − A(f)` odd in q, computed
/// as `½(A(f + δf) − A(f − δf))`; exact for the quadratic action.
pub fn toy_invariance_residual_with(f: &ToyFields, q: &GrassmannNumber, conv: &ToyConventions) -> Result<f64> {
    let delta = toy_susy(f, q)?;
    let plus = toy_action_component_with(&f.try_add(&delta)?, conv)?;
    let minus = toy_action_component_with(&f.try_add(&delta.scale(-1.0))?, conv)?;
    Ok((&plus - &minus).scale(0.5).max_abs())
}

pub fn toy_invariance_residual(f: &ToyFields, q: &GrassmannNumber) -> Result<f64> {
    toy_invariance_residual_with(f, q, &ToyConventions::default())
}

/// Pick the fermion sign for which the component action is invariant on all
/// fixtures. Errors if both signs behave alike or neither reaches `tol`.
pub fn calibrate_fermion_sign(fixtures: &[(ToyFields, GrassmannNumber)], tol: f64) -> Result<ToyConventions> {
    let mut scored = Vec::new();
    for sign in [1.0, -1.0] {
        let conv = ToyConventions {
            fermion_sign: sign,
            ..ToyConventions::default()
        };
        let mut worst: f64 = 0.0;
        for (f, q) in fixtures {
            worst = worst.max(toy_invariance_residual_with(f, q, &conv)?);
        }
        scored.push((worst, conv));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (best, conv) = scored[0];
    if (scored[1].0 - best).abs() <= tol {
        return Err(Error::CalibrationUnderdetermined);
    }
    if best > tol {
        return Err(Error::CalibrationFailed { best, tolerance: tol });
    }
    Ok(conv)
}

/// Component action of the components of `Φ` taken along an embedding with
/// constant odd image `ξ`.
pub fn toy_action_along_embedding(phi: &SuperFunction, xi: &GrassmannNumber) -> Result<GrassmannNumber> {
    check_odd(xi, "embedding image")?;
    let emb = Embedding::new(vec![GridField::constant(phi.grid(), xi)])?;
    toy_action_component(&ToyFields::from_superfield(phi, &emb)?)
}
