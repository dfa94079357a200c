//! Superfunctions on ℝ^{m|n} over a Grassmann parameter algebra.
//!
//! A superfunction is the finite expansion `f = Σ_γ η^γ f_γ(x)` over
//! strictly increasing odd multi-indices γ, with the odd coordinates written
//! to the left of their coefficient fields. Coefficients are
//! [`GridField`]s, i.e. Λ_N-valued periodic samples; the odd coordinates and
//! the generators of Λ_N anticommute with each other.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::grassmann::{mask_indices, monomial_product, GrassmannNumber, Parity};
use crate::grid::{Grid, GridField, TrigInterpolant};

#[derive(Debug, Clone, PartialEq)]
pub struct SuperFunction {
    odd_dim: usize,
    grid: Grid,
    generators: usize,
    /// Indexed by the odd multi-index bitmask, length 2^odd_dim.
    coeffs: Vec<GridField>,
}

impl SuperFunction {
    pub fn zeros(grid: &Grid, odd_dim: usize, generators: usize) -> Self {
        assert!(odd_dim <= 8, "odd dimension too large for a dense expansion");
        Self {
            odd_dim,
            grid: grid.clone(),
            generators,
            coeffs: vec![GridField::zeros(grid, generators); 1 << odd_dim],
        }
    }

    /// The function `f₀` with no odd dependence.
    pub fn from_even(odd_dim: usize, f0: GridField) -> Self {
        let mut out = Self::zeros(f0.grid(), odd_dim, f0.generators());
        out.coeffs[0] = f0;
        out
    }

    /// Build from `(odd multi-index, coefficient)` pairs; indices are listed
    /// in increasing order.
    pub fn from_terms(
        grid: &Grid,
        odd_dim: usize,
        generators: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, GridField)>,
    ) -> Result<Self> {
        let mut out = Self::zeros(grid, odd_dim, generators);
        for (idx, f) in terms {
            let mut mask = 0u64;
            for &i in &idx {
                if i >= odd_dim {
                    return Err(Error::OddIndexOutOfRange { index: i, odd_dim });
                }
                if mask >> i != 0 {
                    return Err(Error::Shape("odd multi-index must be strictly increasing".into()));
                }
                mask |= 1 << i;
            }
            f.check_compatible(&out.coeffs[0])?;
            out.coeffs[mask as usize] = out.coeffs[mask as usize].try_add(&f)?;
        }
        Ok(out)
    }

    /// The odd coordinate η^α as a superfunction.
    pub fn odd_coordinate(grid: &Grid, odd_dim: usize, generators: usize, alpha: usize) -> Result<Self> {
        if alpha >= odd_dim {
            return Err(Error::OddIndexOutOfRange { index: alpha, odd_dim });
        }
        let one = GridField::constant(grid, &GrassmannNumber::one(generators));
        Self::from_terms(grid, odd_dim, generators, [(vec![alpha], one)])
    }

    /// A constant Grassmann number on ℝ^{m|n}.
    pub fn constant(grid: &Grid, odd_dim: usize, c: &GrassmannNumber) -> Self {
        Self::from_even(odd_dim, GridField::constant(grid, c))
    }

    pub fn odd_dim(&self) -> usize {
        self.odd_dim
    }

    pub fn even_dim(&self) -> usize {
        self.grid.dims()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    /// Coefficient field f_γ for the multi-index bitmask γ.
    pub fn coeff(&self, gamma: u64) -> &GridField {
        &self.coeffs[gamma as usize]
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (u64, &GridField)> {
        self.coeffs.iter().enumerate().map(|(g, f)| (g as u64, f))
    }

    /// Coefficient of the top monomial η¹⋯ηⁿ.
    pub fn top(&self) -> &GridField {
        self.coeffs.last().expect("at least one coefficient")
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(GridField::max_abs).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(GridField::is_zero)
    }

    /// Total parity, counting each η as odd.
    pub fn parity(&self) -> Parity {
        let mut seen: Option<Parity> = None;
        for (gamma, f) in self.coeffs() {
            if f.is_zero() {
                continue;
            }
            let p = f.parity();
            let total = if gamma.count_ones() % 2 == 0 { p } else { p.flip() };
            seen = match seen {
                None => Some(total),
                Some(q) if q == total => Some(q),
                Some(_) => return Parity::Mixed,
            };
        }
        seen.unwrap_or(Parity::Even)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.odd_dim != other.odd_dim {
            return Err(Error::Shape(format!(
                "odd dimensions {} and {} differ",
                self.odd_dim, other.odd_dim
            )));
        }
        self.coeffs[0].check_compatible(&other.coeffs[0])
    }

    fn map(&self, f: impl Fn(&GridField) -> Result<GridField>) -> Result<Self> {
        Ok(Self {
            odd_dim: self.odd_dim,
            grid: self.grid.clone(),
            generators: self.generators,
            coeffs: self.coeffs.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|f| Ok(f.scale(c))).expect("scaling cannot fail")
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (o, f) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o = o.try_add(f)?;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(-1.0))
    }

    /// Product of superfunctions. Moving η^δ to the left past f_γ costs the
    /// parity automorphism applied |δ| times.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zeros(&self.grid, self.odd_dim, self.generators);
        let twisted: Vec<GridField> = self.coeffs.iter().map(GridField::twist).collect();
        for (g, fg) in self.coeffs.iter().enumerate() {
            if fg.is_zero() {
                continue;
            }
            for (d, gd) in other.coeffs.iter().enumerate() {
                if gd.is_zero() {
                    continue;
                }
                let Some((m, s)) = monomial_product(g as u64, d as u64) else {
                    continue;
                };
                let left = if (d as u64).count_ones() % 2 == 0 {
                    fg
                } else {
                    &twisted[g]
                };
                let term = left.try_mul(gd)?.scale(s);
                out.coeffs[m as usize] = out.coeffs[m as usize].try_add(&term)?;
            }
        }
        Ok(out)
    }

    /// `c · f` with a constant Grassmann number on the left.
    pub fn left_mul_const(&self, c: &GrassmannNumber) -> Result<Self> {
        Self::constant(&self.grid, self.odd_dim, c).try_mul(self)
    }

    /// ∂/∂x^a applied coefficient-wise.
    pub fn partial_even(&self, axis: usize) -> Result<Self> {
        self.grid.check_axis(axis)?;
        self.map(|f| f.derivative(axis))
    }

    /// Left derivative ∂/∂η^α.
    pub fn partial_odd(&self, alpha: usize) -> Result<Self> {
        if alpha >= self.odd_dim {
            return Err(Error::OddIndexOutOfRange {
                index: alpha,
                odd_dim: self.odd_dim,
            });
        }
        let bit = 1u64 << alpha;
        let mut out = Self::zeros(&self.grid, self.odd_dim, self.generators);
        for (g, f) in self.coeffs() {
            if g & bit == 0 || f.is_zero() {
                continue;
            }
            let sign = if (g & (bit - 1)).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            out.coeffs[(g & !bit) as usize] = f.scale(sign);
        }
        Ok(out)
    }

    /// Pull back along an embedding of the underlying even manifold:
    /// `i#f = Σ_γ ξ^γ f_γ` with ξ^γ the ordered product of the images.
    pub fn restrict(&self, embedding: &Embedding) -> Result<GridField> {
        if embedding.xi.len() != self.odd_dim {
            return Err(Error::Shape(format!(
                "embedding has {} odd images for odd dimension {}",
                embedding.xi.len(),
                self.odd_dim
            )));
        }
        let mut out = GridField::zeros(&self.grid, self.generators);
        for (g, f) in self.coeffs() {
            if f.is_zero() {
                continue;
            }
            let mut prod = GridField::constant(&self.grid, &GrassmannNumber::one(self.generators));
            for a in mask_indices(g) {
                prod = prod.try_mul(&embedding.xi[a])?;
            }
            out = out.try_add(&prod.try_mul(f)?)?;
        }
        Ok(out)
    }

    /// Restriction along the standard embedding η = 0.
    pub fn restrict_standard(&self) -> GridField {
        self.coeffs[0].clone()
    }
}

impl<'a> Add<&'a SuperFunction> for &'a SuperFunction {
    type Output = SuperFunction;
    fn add(self, rhs: &'a SuperFunction) -> SuperFunction {
        self.try_add(rhs).expect("incompatible superfunctions")
    }
}

impl<'a> Sub<&'a SuperFunction> for &'a SuperFunction {
    type Output = SuperFunction;
    fn sub(self, rhs: &'a SuperFunction) -> SuperFunction {
        self.try_sub(rhs).expect("incompatible superfunctions")
    }
}

impl<'a> Mul<&'a SuperFunction> for &'a SuperFunction {
    type Output = SuperFunction;
    fn mul(self, rhs: &'a SuperFunction) -> SuperFunction {
        self.try_mul(rhs).expect("incompatible superfunctions")
    }
}

impl Neg for &SuperFunction {
    type Output = SuperFunction;
    fn neg(self) -> SuperFunction {
        self.scale(-1.0)
    }
}

/// Embedding of the underlying even manifold, given by the odd images
/// `i#η^α = ξ_α`.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub xi: Vec<GridField>,
}

impl Embedding {
    pub fn new(xi: Vec<GridField>) -> Result<Self> {
        for x in &xi {
            if !x.has_parity(Parity::Odd) {
                return Err(Error::Parity {
                    what: "embedding image",
                    expected: Parity::Odd,
                    found: x.parity(),
                });
            }
        }
        Ok(Self { xi })
    }

    /// The embedding with all ξ_α = 0.
    pub fn standard(grid: &Grid, odd_dim: usize, generators: usize) -> Self {
        Self {
            xi: vec![GridField::zeros(grid, generators); odd_dim],
        }
    }
}

/// `V = Σ V^a ∂_{x^a} + Σ V^α ∂_{η^α}` with superfunction coefficients
/// written to the left of the derivations.
#[derive(Debug, Clone)]
pub struct SuperVectorField {
    pub even_components: Vec<SuperFunction>,
    pub odd_components: Vec<SuperFunction>,
}

impl SuperVectorField {
    pub fn apply(&self, f: &SuperFunction) -> Result<SuperFunction> {
        if self.even_components.len() != f.even_dim() || self.odd_components.len() != f.odd_dim() {
            return Err(Error::Shape("vector field does not match the superdomain".into()));
        }
        let mut out = SuperFunction::zeros(f.grid(), f.odd_dim(), f.generators());
        for (a, v) in self.even_components.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            out = out.try_add(&v.try_mul(&f.partial_even(a)?)?)?;
        }
        for (alpha, v) in self.odd_components.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            out = out.try_add(&v.try_mul(&f.partial_odd(alpha)?)?)?;
        }
        Ok(out)
    }

    /// Parity of the vector field: V^a carry their own parity, V^α one more.
    pub fn parity(&self) -> Parity {
        let mut parts: Vec<Parity> = Vec::new();
        for v in &self.even_components {
            if !v.is_zero() {
                parts.push(v.parity());
            }
        }
        for v in &self.odd_components {
            if !v.is_zero() {
                parts.push(v.parity().flip());
            }
        }
        match parts.split_first() {
            None => Parity::Even,
            Some((first, rest)) => {
                if rest.iter().all(|p| p == first) {
                    *first
                } else {
                    Parity::Mixed
                }
            }
        }
    }

    /// D = ∂_η + η∂_x on ℝ^{1|1}.
    pub fn d_operator(grid: &Grid, generators: usize) -> Result<Self> {
        check_r11(grid)?;
        let eta = SuperFunction::odd_coordinate(grid, 1, generators, 0)?;
        let one = SuperFunction::constant(grid, 1, &GrassmannNumber::one(generators));
        Ok(Self {
            even_components: vec![eta],
            odd_components: vec![one],
        })
    }

    /// Q = q(∂_η − η∂_x) on ℝ^{1|1} for an odd parameter q.
    pub fn q_operator(grid: &Grid, q: &GrassmannNumber) -> Result<Self> {
        check_r11(grid)?;
        check_odd(q, "supersymmetry parameter")?;
        let n = q.generators();
        let eta = SuperFunction::odd_coordinate(grid, 1, n, 0)?;
        let qf = SuperFunction::constant(grid, 1, q);
        Ok(Self {
            even_components: vec![qf.try_mul(&eta)?.scale(-1.0)],
            odd_components: vec![qf],
        })
    }
}

fn check_r11(grid: &Grid) -> Result<()> {
    if grid.dims() != 1 {
        return Err(Error::Shape(format!(
            "operator lives on ℝ^(1|1) but the grid has {} even dimensions",
            grid.dims()
        )));
    }
    Ok(())
}

pub(crate) fn check_odd(q: &GrassmannNumber, what: &'static str) -> Result<()> {
    if q.has_parity(Parity::Odd) {
        Ok(())
    } else {
        Err(Error::Parity {
            what,
            expected: Parity::Odd,
            found: q.parity(),
        })
    }
}

fn check_r11_function(f: &SuperFunction) -> Result<()> {
    if f.odd_dim() != 1 {
        return Err(Error::Shape("expected a superfunction on ℝ^(1|1)".into()));
    }
    check_r11(f.grid())
}

/// D f = ∂_η f + η ∂_x f.
pub fn apply_d(f: &SuperFunction) -> Result<SuperFunction> {
    check_r11_function(f)?;
    SuperVectorField::d_operator(f.grid(), f.generators())?.apply(f)
}

/// Q f = q(∂_η f − η ∂_x f).
pub fn apply_q(f: &SuperFunction, q: &GrassmannNumber) -> Result<SuperFunction> {
    check_r11_function(f)?;
    SuperVectorField::q_operator(f.grid(), q)?.apply(f)
}

/// A coordinate change `x = g₀(x̃) + η̃ g₁(x̃)`, `η = γ₀(x̃) + η̃ γ₁(x̃)` on
/// ℝ^{1|1} over the circle. The body map is stored as a displacement,
/// `g₀(x̃) = x̃ + g0_shift(x̃)`.
#[derive(Debug, Clone)]
pub struct CoordinateChange {
    pub g0_shift: GridField,
    pub g1: GridField,
    pub gamma0: GridField,
    pub gamma1: GridField,
}

impl CoordinateChange {
    pub fn identity(grid: &Grid, generators: usize) -> Self {
        Self {
            g0_shift: GridField::zeros(grid, generators),
            g1: GridField::zeros(grid, generators),
            gamma0: GridField::zeros(grid, generators),
            gamma1: GridField::constant(grid, &GrassmannNumber::one(generators)),
        }
    }

    /// Change with spatially constant data.
    pub fn constant(
        grid: &Grid,
        shift: &GrassmannNumber,
        g1: &GrassmannNumber,
        gamma0: &GrassmannNumber,
        gamma1: &GrassmannNumber,
    ) -> Self {
        Self {
            g0_shift: GridField::constant(grid, shift),
            g1: GridField::constant(grid, g1),
            gamma0: GridField::constant(grid, gamma0),
            gamma1: GridField::constant(grid, gamma1),
        }
    }

    fn validate(&self) -> Result<()> {
        for (f, p, what) in [
            (&self.g0_shift, Parity::Even, "g0"),
            (&self.g1, Parity::Odd, "g1"),
            (&self.gamma0, Parity::Odd, "gamma0"),
            (&self.gamma1, Parity::Even, "gamma1"),
        ] {
            if !f.has_parity(p) {
                return Err(Error::Parity {
                    what,
                    expected: p,
                    found: f.parity(),
                });
            }
        }
        let slope = GridField::from_real(self.g0_shift.grid(), 1, self.g0_shift.body()).derivative(0)?;
        let min = slope.body().iter().fold(f64::INFINITY, |a, &d| a.min(1.0 + d));
        if min <= 0.0 {
            return Err(Error::NonInvertibleBodyMap(min));
        }
        Ok(())
    }

    fn constant_value(f: &GridField) -> Option<GrassmannNumber> {
        let first = f.at(0);
        (1..f.grid().len()).all(|i| f.at(i) == first).then_some(first)
    }

    /// Inverse of a change with spatially constant data (a rigid rotation of
    /// the circle combined with constant odd parts).
    pub fn inverse(&self) -> Result<Self> {
        let (Some(c), Some(g1), Some(gamma0), Some(gamma1)) = (
            Self::constant_value(&self.g0_shift),
            Self::constant_value(&self.g1),
            Self::constant_value(&self.gamma0),
            Self::constant_value(&self.gamma1),
        ) else {
            return Err(Error::UnsupportedRegime(
                "closed-form inverse needs spatially constant coordinate change data".into(),
            ));
        };
        let inv1 = gamma1.recip()?;
        let shift = &(-&c) + &(&(&gamma0 * &inv1) * &g1);
        Ok(Self::constant(
            self.g0_shift.grid(),
            &shift,
            &-(&inv1 * &g1),
            &-(&gamma0 * &inv1),
            &inv1,
        ))
    }

    /// Evaluate `f ∘ g₀` by a nilpotent Taylor expansion around the body of
    /// g₀, with trigonometric interpolation for the body map.
    fn compose_body(&self, f: &GridField) -> Result<GridField> {
        let grid = f.grid().clone();
        let n = f.generators();
        let body_points: Vec<f64> = self
            .g0_shift
            .body()
            .iter()
            .enumerate()
            .map(|(i, d)| grid.coords(i)[0] + d)
            .collect();
        let soul = self.g0_shift.filter(|m| m != 0);
        let mut out = GridField::zeros(&grid, n);
        let mut deriv = f.clone();
        let mut soul_power = GridField::constant(&grid, &GrassmannNumber::one(n));
        let mut factorial = 1.0;
        for k in 0..=n {
            if k > 0 {
                deriv = deriv.derivative(0)?;
                soul_power = soul_power.try_mul(&soul)?;
                factorial *= k as f64;
                if soul_power.is_zero() {
                    break;
                }
            }
            let mut evaluated = GridField::zeros(&grid, n);
            for (mask, values) in deriv.components() {
                let interp = TrigInterpolant::new(values, grid.periods[0]);
                let samples = body_points.iter().map(|&x| interp.eval(x)).collect();
                evaluated = evaluated.try_add(&GridField::from_component(&grid, n, mask, samples))?;
            }
            out = out.try_add(&soul_power.try_mul(&evaluated)?.scale(1.0 / factorial))?;
        }
        Ok(out)
    }
}

/// Express `f = f₀ + η f₁` in the coordinates (x̃, η̃) of `change`:
/// `f₀(g₀) + γ₀ f₁(g₀) + η̃ (g₁ f₀′(g₀) + γ₁ f₁(g₀) − γ₀ g₁ f₁′(g₀))`.
pub fn pullback_coordinate_change(f: &SuperFunction, change: &CoordinateChange) -> Result<SuperFunction> {
    check_r11_function(f)?;
    change.validate()?;
    let f0 = f.coeff(0);
    let f1 = f.coeff(1);
    let f0_at = change.compose_body(f0)?;
    let f1_at = change.compose_body(f1)?;
    let df0_at = change.compose_body(&f0.derivative(0)?)?;
    let df1_at = change.compose_body(&f1.derivative(0)?)?;

    let new0 = f0_at.try_add(&change.gamma0.try_mul(&f1_at)?)?;
    let new1 = change
        .g1
        .try_mul(&df0_at)?
        .try_add(&change.gamma1.try_mul(&f1_at)?)?
        .try_sub(&change.gamma0.try_mul(&change.g1)?.try_mul(&df1_at)?)?;
    SuperFunction::from_terms(f.grid(), 1, f.generators(), [(vec![], new0), (vec![0], new1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: usize = 4;

    fn xi(i: usize) -> GrassmannNumber {
        GrassmannNumber::generator(N, i).unwrap()
    }

    fn real(grid: &Grid, f: impl Fn(f64) -> f64) -> GridField {
        GridField::from_fn(grid, N, |x| f(x[0]))
    }

    fn odd(grid: &Grid, g: usize, f: impl Fn(f64) -> f64) -> GridField {
        GridField::constant_times(grid, &xi(g), |x| f(x[0]))
    }

    fn phi_psi(grid: &Grid, phi: GridField, psi: GridField) -> SuperFunction {
        SuperFunction::from_terms(grid, 1, N, [(vec![], phi), (vec![0], psi)]).unwrap()
    }

    #[test]
    fn partial_even_of_sine() {
        let g = Grid::circle(32);
        let f = SuperFunction::from_even(1, real(&g, f64::sin));
        let df = f.partial_even(0).unwrap();
        assert!((df.coeff(0) - &real(&g, f64::cos)).max_abs() < 1e-12);
        let c = SuperFunction::constant(&g, 1, &xi(1));
        assert!(c.partial_even(0).unwrap().max_abs() < 1e-12);
        assert!(f.partial_even(1).is_err());
    }

    #[test]
    fn partial_odd_examples() {
        let g = Grid::circle(8);
        let phi = real(&g, f64::sin);
        let psi = odd(&g, 0, f64::cos);
        let f = phi_psi(&g, phi.clone(), psi.clone());
        let d = f.partial_odd(0).unwrap();
        assert_eq!(d.coeff(0), &psi);
        assert!(SuperFunction::from_even(1, phi).partial_odd(0).unwrap().is_zero());

        // ∂_{η¹}(η²η¹ h) = −η² h
        let h = real(&g, f64::cos);
        let e1 = SuperFunction::odd_coordinate(&g, 2, N, 0).unwrap();
        let e2 = SuperFunction::odd_coordinate(&g, 2, N, 1).unwrap();
        let f = &(&e2 * &e1) * &SuperFunction::from_even(2, h.clone());
        let d = f.partial_odd(0).unwrap();
        let expected = (&e2 * &SuperFunction::from_even(2, h)).scale(-1.0);
        assert_eq!(d, expected);
        assert!(f.partial_odd(2).is_err());
    }

    #[test]
    fn q_reproduces_supersymmetry() {
        let g = Grid::circle(32);
        let q = xi(3);
        let phi = real(&g, |x| x.sin() + 0.2 * (2.0 * x).cos());
        let psi = odd(&g, 0, |x| x.cos());
        let f = phi_psi(&g, phi.clone(), psi.clone());
        let qf = apply_q(&f, &q).unwrap();
        let qc = GridField::constant(&g, &q);
        assert!((qf.coeff(0) - &(&qc * &psi)).max_abs() < 1e-12);
        assert!((qf.coeff(1) - &(&qc * &phi.derivative(0).unwrap())).max_abs() < 1e-12);
        assert!(matches!(
            apply_q(&f, &GrassmannNumber::one(N)),
            Err(Error::Parity { .. })
        ));
    }

    #[test]
    fn d_squares_to_translation() {
        let g = Grid::circle(32);
        let f = phi_psi(
            &g,
            real(&g, |x| (2.0 * x).sin()),
            odd(&g, 1, |x| x.cos() + (3.0 * x).sin()),
        );
        let dd = apply_d(&apply_d(&f).unwrap()).unwrap();
        assert!((&dd - &f.partial_even(0).unwrap()).max_abs() < 1e-11);
        let df = apply_d(&f).unwrap();
        assert_eq!(df.coeff(0), f.coeff(1));
        assert!((df.coeff(1) - &f.coeff(0).derivative(0).unwrap()).max_abs() < 1e-12);
    }

    #[test]
    fn restrict_examples() {
        let g = Grid::circle(8);
        let f = phi_psi(&g, real(&g, f64::sin), odd(&g, 0, f64::cos));
        let std = Embedding::standard(&g, 1, N);
        assert_eq!(f.restrict(&std).unwrap(), *f.coeff(0));

        let x = GridField::constant(&g, &xi(2));
        let emb = Embedding::new(vec![x.clone()]).unwrap();
        let eta = SuperFunction::odd_coordinate(&g, 1, N, 0).unwrap();
        assert_eq!(eta.restrict(&emb).unwrap(), x);

        let big = GridField::from_fn(&g, N, |p| 1.0 + p[0]);
        let f2 = SuperFunction::from_terms(&g, 2, N, [(vec![0, 1], big.clone())]).unwrap();
        let (x1, x2) = (GridField::constant(&g, &xi(0)), GridField::constant(&g, &xi(1)));
        let emb2 = Embedding::new(vec![x1.clone(), x2.clone()]).unwrap();
        assert_eq!(f2.restrict(&emb2).unwrap(), &(&x1 * &x2) * &big);

        assert!(Embedding::new(vec![GridField::constant(&g, &GrassmannNumber::one(N))]).is_err());
    }

    #[test]
    fn pullback_examples() {
        let g = Grid::circle(32);
        let phi = real(&g, |x| x.sin() + 0.3 * (2.0 * x).cos());
        let psi = odd(&g, 0, |x| x.cos());
        let f = phi_psi(&g, phi.clone(), psi.clone());

        let id = CoordinateChange::identity(&g, N);
        assert!((&pullback_coordinate_change(&f, &id).unwrap() - &f).max_abs() < 1e-12);

        // γ₀ = ξ, γ₁ = 1: φ + ηψ ↦ (φ + ξψ) + η̃ψ
        let mut ch = CoordinateChange::identity(&g, N);
        ch.gamma0 = GridField::constant(&g, &xi(2));
        let out = pullback_coordinate_change(&f, &ch).unwrap();
        let expected0 = &phi + &(&ch.gamma0 * &psi);
        assert!((out.coeff(0) - &expected0).max_abs() < 1e-12);
        assert!((out.coeff(1) - &psi).max_abs() < 1e-12);

        // γ₀ = 0, g₁ odd: η̃ coefficient becomes φ′g₁ + ψ
        let mut ch = CoordinateChange::identity(&g, N);
        ch.g1 = odd(&g, 3, |x| 1.0 + 0.5 * x.sin());
        let out = pullback_coordinate_change(&f, &ch).unwrap();
        let expected1 = &(&ch.g1 * &phi.derivative(0).unwrap()) + &psi;
        assert!((out.coeff(1) - &expected1).max_abs() < 1e-12);
    }

    #[test]
    fn non_invertible_body_map_is_rejected() {
        let g = Grid::circle(16);
        let f = SuperFunction::from_even(1, real(&g, f64::sin));
        let mut ch = CoordinateChange::identity(&g, N);
        ch.g0_shift = real(&g, |x| 2.0 * x.sin());
        assert!(matches!(
            pullback_coordinate_change(&f, &ch),
            Err(Error::NonInvertibleBodyMap(_))
        ));
    }

    #[test]
    fn rigid_change_composed_with_inverse_is_identity() {
        let g = Grid::circle(32);
        let f = phi_psi(
            &g,
            real(&g, |x| x.sin() + 0.4 * (3.0 * x).cos()),
            odd(&g, 0, |x| x.cos() - (2.0 * x).sin()),
        );
        let shift = &GrassmannNumber::scalar(N, 0.7) + &(&xi(1) * &xi(2)).scale(0.5);
        let gamma1 = &GrassmannNumber::scalar(N, 1.3) + &(&xi(2) * &xi(3));
        let ch = CoordinateChange::constant(&g, &shift, &xi(3).scale(0.4), &xi(2).scale(-0.8), &gamma1);
        let there = pullback_coordinate_change(&f, &ch).unwrap();
        let back = pullback_coordinate_change(&there, &ch.inverse().unwrap()).unwrap();
        assert!((&back - &f).max_abs() < 1e-8, "{}", (&back - &f).max_abs());
    }
}
