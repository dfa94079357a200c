//! Uniform periodic grids and Grassmann-valued fields sampled on them.
//!
//! A [`GridField`] stores one real array per Grassmann monomial that occurs
//! in the field, so products only touch monomial pairs that are actually
//! present. Derivatives use the dense periodic spectral differentiation
//! matrix; quadrature is the periodic trapezoid rule. Both are exact for
//! trigonometric polynomials below the Nyquist frequency.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{monomial_product, GrassmannNumber, Parity};

/// A periodic box `[0,P₀) × [0,P₁) × …` sampled at `shape[a]` points per axis.
/// Points are stored row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub shape: Vec<usize>,
    pub periods: Vec<f64>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, periods: Vec<f64>) -> Result<Self> {
        if shape.len() != periods.len() || shape.is_empty() {
            return Err(Error::Shape(format!(
                "grid shape {shape:?} and periods {periods:?} disagree"
            )));
        }
        if shape.iter().any(|&n| n < 2) || periods.iter().any(|&p| p <= 0.0) {
            return Err(Error::Shape("grid needs ≥ 2 points and positive periods".into()));
        }
        Ok(Self { shape, periods })
    }

    /// The circle `[0, 2π)` with `n` points.
    pub fn circle(n: usize) -> Self {
        Self::new(vec![n], vec![2.0 * PI]).expect("valid circle")
    }

    /// The square torus `[0, 2π)²` with `n × n` points.
    pub fn torus(n: usize) -> Self {
        Self::new(vec![n, n], vec![2.0 * PI, 2.0 * PI]).expect("valid torus")
    }

    pub fn dims(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.periods[axis] / self.shape[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.periods.iter().product()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims()];
        for a in (0..self.dims()).rev() {
            out[a] = idx % self.shape[a];
            idx /= self.shape[a];
        }
        out
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(a, &i)| i as f64 * self.spacing(a))
            .collect()
    }

    /// Integer wave numbers of the real DFT ordering along `axis`.
    pub fn wavenumber(&self, axis: usize, i: usize) -> i64 {
        let n = self.shape[axis] as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dims() {
            Err(Error::AxisOutOfRange {
                axis,
                dims: self.dims(),
            })
        } else {
            Ok(())
        }
    }
}

/// Dense spectral differentiation matrix for `n` equispaced points on a
/// period `period`, row-major.
pub fn differentiation_matrix(n: usize, period: f64) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let scale = 2.0 * PI / period;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let k = i as i64 - j as i64;
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let arg = k as f64 * h / 2.0;
            let v = if n % 2 == 0 {
                0.5 * sign / arg.tan()
            } else {
                0.5 * sign / arg.sin()
            };
            d[i * n + j] = v * scale;
        }
    }
    d
}

/// Apply a dense `n × n` matrix along one axis of a row-major array.
fn apply_along_axis(grid: &Grid, axis: usize, matrix: &[f64], values: &[f64]) -> Vec<f64> {
    let n = grid.shape[axis];
    let stride = grid.stride(axis);
    let outer = grid.len() / (n * stride);
    let mut out = vec![0.0; values.len()];
    let mut line = vec![0.0; n];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * n * stride + s;
            for (j, l) in line.iter_mut().enumerate() {
                *l = values[base + j * stride];
            }
            for i in 0..n {
                let row = &matrix[i * n..(i + 1) * n];
                let acc: f64 = row.iter().zip(&line).map(|(a, b)| a * b).sum();
                out[base + i * stride] = acc;
            }
        }
    }
    out
}

/// A Grassmann-valued field on a periodic grid.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    grid: Grid,
    generators: usize,
    #[serde(with = "component_map")]
    comps: BTreeMap<u64, Vec<f64>>,
}

mod component_map {
    //! `{"<mask>": [values…]}` with decimal string keys.
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<u64, Vec<f64>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let as_str: BTreeMap<String, &Vec<f64>> = m.iter().map(|(k, v)| (k.to_string(), v)).collect();
        as_str.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<u64, Vec<f64>>, D::Error> {
        let raw: BTreeMap<String, Vec<f64>> = BTreeMap::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| k.parse::<u64>().map(|k| (k, v)).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl std::fmt::Debug for GridField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridField")
            .field("shape", &self.grid.shape)
            .field("generators", &self.generators)
            .field("monomials", &self.comps.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl GridField {
    pub fn zeros(grid: &Grid, generators: usize) -> Self {
        Self {
            grid: grid.clone(),
            generators,
            comps: BTreeMap::new(),
        }
    }

    /// Real-valued field from samples of `f` at the grid points.
    pub fn from_fn(grid: &Grid, generators: usize, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Self::from_real(grid, generators, values)
    }

    pub fn from_real(grid: &Grid, generators: usize, values: Vec<f64>) -> Self {
        Self::from_component(grid, generators, 0, values)
    }

    /// `monomial(mask) · values`.
    pub fn from_component(grid: &Grid, generators: usize, mask: u64, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "sample count must match the grid");
        let mut out = Self::zeros(grid, generators);
        out.insert(mask, values);
        out
    }

    pub fn constant(grid: &Grid, value: &GrassmannNumber) -> Self {
        let mut out = Self::zeros(grid, value.generators());
        for (m, c) in value.terms() {
            out.insert(m, vec![c; grid.len()]);
        }
        out
    }

    /// `value · f(x)` for a real profile `f`.
    pub fn constant_times(grid: &Grid, value: &GrassmannNumber, f: impl Fn(&[f64]) -> f64) -> Self {
        let profile: Vec<f64> = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        let mut out = Self::zeros(grid, value.generators());
        for (m, c) in value.terms() {
            out.insert(m, profile.iter().map(|p| p * c).collect());
        }
        out
    }

    pub fn from_points(grid: &Grid, generators: usize, points: &[GrassmannNumber]) -> Self {
        assert_eq!(points.len(), grid.len());
        let mut comps: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            for (m, c) in p.terms() {
                comps.entry(m).or_insert_with(|| vec![0.0; grid.len()])[i] = c;
            }
        }
        let mut out = Self::zeros(grid, generators);
        for (m, v) in comps {
            out.insert(m, v);
        }
        out
    }

    fn insert(&mut self, mask: u64, values: Vec<f64>) {
        if values.iter().any(|&v| v != 0.0) {
            self.comps.insert(mask, values);
        } else {
            self.comps.remove(&mask);
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn component(&self, mask: u64) -> Option<&[f64]> {
        self.comps.get(&mask).map(|v| v.as_slice())
    }

    pub fn components(&self) -> impl Iterator<Item = (u64, &[f64])> {
        self.comps.iter().map(|(&m, v)| (m, v.as_slice()))
    }

    pub fn body(&self) -> Vec<f64> {
        self.component(0)
            .map(|v| v.to_vec())
            .unwrap_or_else(|| vec![0.0; self.grid.len()])
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn at(&self, idx: usize) -> GrassmannNumber {
        GrassmannNumber::from_terms(self.generators, self.comps.iter().map(|(&m, v)| (m, v[idx])))
    }

    pub fn parity(&self) -> Parity {
        let even = self.comps.keys().any(|m| m.count_ones() % 2 == 0);
        let odd = self.comps.keys().any(|m| m.count_ones() % 2 == 1);
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            _ => Parity::Mixed,
        }
    }

    pub fn has_parity(&self, p: Parity) -> bool {
        self.is_zero() || self.parity() == p
    }

    /// Largest coefficient magnitude over all points and monomials.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .values()
            .flat_map(|v| v.iter())
            .fold(0.0, |a, &c| a.max(c.abs()))
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape(format!(
                "grids {:?} and {:?} differ",
                self.grid.shape, other.grid.shape
            )));
        }
        if self.generators != other.generators {
            return Err(Error::GeneratorMismatch {
                left: self.generators,
                right: other.generators,
            });
        }
        Ok(())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_components(|_, v| v.iter().map(|x| x * c).collect())
    }

    fn map_components(&self, f: impl Fn(u64, &[f64]) -> Vec<f64>) -> Self {
        let mut out = Self::zeros(&self.grid, self.generators);
        for (&m, v) in &self.comps {
            out.insert(m, f(m, v));
        }
        out
    }

    /// The parity automorphism applied pointwise.
    pub fn twist(&self) -> Self {
        self.map_components(|m, v| {
            if m.count_ones() % 2 == 0 {
                v.to_vec()
            } else {
                v.iter().map(|x| -x).collect()
            }
        })
    }

    pub fn even_part(&self) -> Self {
        self.filter(|m| m.count_ones() % 2 == 0)
    }

    pub fn odd_part(&self) -> Self {
        self.filter(|m| m.count_ones() % 2 == 1)
    }

    pub fn filter(&self, keep: impl Fn(u64) -> bool) -> Self {
        let mut out = Self::zeros(&self.grid, self.generators);
        for (&m, v) in &self.comps {
            if keep(m) {
                out.comps.insert(m, v.clone());
            }
        }
        out
    }

    /// Monomials containing generator `g`.
    pub fn containing(&self, g: usize) -> Self {
        self.filter(|m| m & (1 << g) != 0)
    }

    /// Pointwise left derivative with respect to generator `g`.
    pub fn left_derivative(&self, g: usize) -> Self {
        let bit = 1u64 << g;
        let mut out = Self::zeros(&self.grid, self.generators);
        for (&m, v) in &self.comps {
            if m & bit != 0 {
                let s = if (m & (bit - 1)).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                out.accumulate(m & !bit, s, v);
            }
        }
        out.prune();
        out
    }

    fn accumulate(&mut self, mask: u64, c: f64, v: &[f64]) {
        let n = self.grid.len();
        let entry = self.comps.entry(mask).or_insert_with(|| vec![0.0; n]);
        for (e, x) in entry.iter_mut().zip(v) {
            *e += c * x;
        }
    }

    fn prune(&mut self) {
        self.comps.retain(|_, v| v.iter().any(|&x| x != 0.0));
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (&m, v) in &other.comps {
            out.accumulate(m, 1.0, v);
        }
        out.prune();
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(-1.0))
    }

    /// Pointwise Grassmann product.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.grid.len();
        let mut acc: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for (&a, va) in &self.comps {
            for (&b, vb) in &other.comps {
                if let Some((m, s)) = monomial_product(a, b) {
                    let e = acc.entry(m).or_insert_with(|| vec![0.0; n]);
                    for ((e, x), y) in e.iter_mut().zip(va).zip(vb) {
                        *e += s * x * y;
                    }
                }
            }
        }
        let mut out = Self::zeros(&self.grid, self.generators);
        for (m, v) in acc {
            out.insert(m, v);
        }
        Ok(out)
    }

    /// `c · self` with a constant Grassmann number on the left.
    pub fn left_mul_const(&self, c: &GrassmannNumber) -> Self {
        Self::constant(&self.grid, c) * self
    }

    /// Multiply pointwise by a real profile.
    pub fn mul_real(&self, profile: &[f64]) -> Self {
        self.map_components(|_, v| v.iter().zip(profile).map(|(a, b)| a * b).collect())
    }

    /// Spectral derivative along `axis`, applied to every monomial.
    pub fn derivative(&self, axis: usize) -> Result<Self> {
        self.grid.check_axis(axis)?;
        let d = differentiation_matrix(self.grid.shape[axis], self.grid.periods[axis]);
        let mut out = self.map_components(|_, v| apply_along_axis(&self.grid, axis, &d, v));
        out.prune();
        Ok(out)
    }

    /// Periodic trapezoid rule over the whole box.
    pub fn integrate(&self) -> GrassmannNumber {
        let w = self.grid.cell_volume();
        GrassmannNumber::from_terms(
            self.generators,
            self.comps.iter().map(|(&m, v)| (m, w * v.iter().sum::<f64>())),
        )
    }

    /// Apply a Grassmann-level function at every point.
    pub fn map_points(&self, f: impl Fn(&GrassmannNumber) -> Result<GrassmannNumber>) -> Result<Self> {
        let pts = (0..self.grid.len())
            .map(|i| f(&self.at(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_points(&self.grid, self.generators, &pts))
    }

    /// Union of the generators used anywhere in the field.
    pub fn support_mask(&self) -> u64 {
        self.comps.keys().fold(0, |a, &m| a | m)
    }
}

impl<'a> Add<&'a GridField> for &'a GridField {
    type Output = GridField;
    fn add(self, rhs: &'a GridField) -> GridField {
        self.try_add(rhs).expect("incompatible grid fields")
    }
}

impl<'a> Sub<&'a GridField> for &'a GridField {
    type Output = GridField;
    fn sub(self, rhs: &'a GridField) -> GridField {
        self.try_sub(rhs).expect("incompatible grid fields")
    }
}

impl<'a> Mul<&'a GridField> for &'a GridField {
    type Output = GridField;
    fn mul(self, rhs: &'a GridField) -> GridField {
        self.try_mul(rhs).expect("incompatible grid fields")
    }
}

impl Mul<&GridField> for GridField {
    type Output = GridField;
    fn mul(self, rhs: &GridField) -> GridField {
        &self * rhs
    }
}

impl Add<&GridField> for GridField {
    type Output = GridField;
    fn add(self, rhs: &GridField) -> GridField {
        &self + rhs
    }
}

impl Sub<&GridField> for GridField {
    type Output = GridField;
    fn sub(self, rhs: &GridField) -> GridField {
        &self - rhs
    }
}

impl Neg for &GridField {
    type Output = GridField;
    fn neg(self) -> GridField {
        self.scale(-1.0)
    }
}

impl Neg for GridField {
    type Output = GridField;
    fn neg(self) -> GridField {
        self.scale(-1.0)
    }
}

/// Trigonometric interpolant of periodic samples on a 1-D grid.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    period: f64,
    /// (wave number, cos coefficient, sin coefficient)
    modes: Vec<(f64, f64, f64)>,
}

impl TrigInterpolant {
    pub fn new(values: &[f64], period: f64) -> Self {
        let n = values.len();
        let mut modes = Vec::with_capacity(n / 2 + 1);
        for k in 0..=n / 2 {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let t = 2.0 * PI * (k * j) as f64 / n as f64;
                a += v * t.cos();
                b += v * t.sin();
            }
            let w = if k == 0 || (n % 2 == 0 && k == n / 2) {
                1.0 / n as f64
            } else {
                2.0 / n as f64
            };
            // Nyquist sine part is unresolved on the grid and dropped
            let b = if n % 2 == 0 && k == n / 2 { 0.0 } else { b };
            modes.push((k as f64, a * w, b * w));
        }
        Self { period, modes }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let omega = 2.0 * PI / self.period;
        self.modes
            .iter()
            .map(|&(k, a, b)| a * (k * omega * x).cos() + b * (k * omega * x).sin())
            .sum()
    }
}
