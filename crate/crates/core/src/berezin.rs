//! Berezin integration over periodic superdomains ℝ^{m|n}.

use crate::error::{Error, Result};
use crate::grassmann::GrassmannNumber;
use crate::grid::{Grid, GridField};
use crate::superdomain::{Embedding, SuperFunction};

/// Even torus, odd dimension and the embedding the integral is adapted to.
#[derive(Debug, Clone)]
pub struct BerezinDomain {
    pub grid: Grid,
    pub odd_dim: usize,
    pub embedding: Option<Embedding>,
}

impl BerezinDomain {
    pub fn new(grid: Grid, odd_dim: usize) -> Self {
        Self {
            grid,
            odd_dim,
            embedding: None,
        }
    }

    pub fn with_embedding(mut self, embedding: Embedding) -> Self {
        self.embedding = Some(embedding);
        self
    }
}

/// Trapezoid rule on the periodic grid, coefficient-wise in Λ_N.
pub fn quadrature(g: &GridField) -> GrassmannNumber {
    g.integrate()
}

/// Rewrite `f` in coordinates `η̃ = η − ξ` adapted to the embedding.
fn to_adapted(f: &SuperFunction, emb: &Embedding) -> Result<SuperFunction> {
    let n = f.odd_dim();
    let shifted: Vec<SuperFunction> = (0..n)
        .map(|a| {
            let eta = SuperFunction::odd_coordinate(f.grid(), n, f.generators(), a)?;
            eta.try_add(&SuperFunction::from_even(n, emb.xi[a].clone()))
        })
        .collect::<Result<_>>()?;
    let mut out = SuperFunction::zeros(f.grid(), n, f.generators());
    for (gamma, c) in f.coeffs() {
        if c.is_zero() {
            continue;
        }
        let mut term = SuperFunction::constant(f.grid(), n, &GrassmannNumber::one(f.generators()));
        for a in crate::grassmann::mask_indices(gamma) {
            term = term.try_mul(&shifted[a])?;
        }
        out = out.try_add(&term.try_mul(&SuperFunction::from_even(n, c.clone()))?)?;
    }
    Ok(out)
}

/// `∫ f [dx¹⋯dx^m dη¹⋯dη^n]`: quadrature of the coefficient of η¹⋯ηⁿ in
/// coordinates adapted to the domain's embedding.
pub fn berezin_integrate(f: &SuperFunction, dom: &BerezinDomain) -> Result<GrassmannNumber> {
    if f.grid() != &dom.grid || f.odd_dim() != dom.odd_dim {
        return Err(Error::Shape(format!(
            "superfunction on {:?} with {} odd coordinates does not live on {:?} with {}",
            f.grid().shape,
            f.odd_dim(),
            dom.grid.shape,
            dom.odd_dim
        )));
    }
    match &dom.embedding {
        Some(emb) if emb.xi.iter().any(|x| !x.is_zero()) => {
            if emb.xi.len() != dom.odd_dim {
                return Err(Error::Shape("embedding does not match the odd dimension".into()));
            }
            Ok(quadrature(to_adapted(f, emb)?.top()))
        }
        _ => Ok(quadrature(f.top())),
    }
}
