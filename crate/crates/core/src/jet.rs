//! Second-order forward-mode jets and the scalar-field abstraction.
//!
//! A [`Jet2`] carries the value, gradient and full Hessian of a scalar
//! expression with respect to the `2n` real coordinates `(x, y)` of `ℂⁿ`.
//! Model functions are written once, generically over [`Scalar`], and can be
//! evaluated either as plain `f64` or as a jet.

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FieldError, LabError};

/// A point of `ℂⁿ = ℝⁿ_x ⊕ √−1 ℝⁿ_y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, LabError> {
        if x.len() != y.len() || x.is_empty() {
            return Err(LabError::Dimension(format!(
                "point needs equal-length nonempty x and y, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        Ok(Self { x, y })
    }

    /// Builds a point from stacked coordinates `(x₁..xₙ, y₁..yₙ)`.
    pub fn from_coords(coords: &[f64]) -> Result<Self, LabError> {
        if coords.len() % 2 != 0 {
            return Err(LabError::Dimension(format!(
                "stacked coordinates must have even length, got {}",
                coords.len()
            )));
        }
        let n = coords.len() / 2;
        Self::new(coords[..n].to_vec(), coords[n..].to_vec())
    }

    pub fn origin(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            y: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(self.y.iter()).copied().collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            x: self.x.iter().map(|v| v * factor).collect(),
            y: self.y.iter().map(|v| v * factor).collect(),
        }
    }

    /// Returns a copy with stacked coordinate `i` shifted by `delta`.
    pub fn shifted(&self, i: usize, delta: f64) -> Self {
        let mut p = self.clone();
        let n = self.n();
        if i < n {
            p.x[i] += delta;
        } else {
            p.y[i - n] += delta;
        }
        p
    }

    pub fn norm(&self) -> f64 {
        self.x
            .iter()
            .chain(self.y.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Value, gradient and Hessian of a scalar expression at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Self {
            value,
            gradient: DVector::zeros(dim),
            hessian: DMatrix::zeros(dim, dim),
        }
    }

    /// The coordinate function `ξ ↦ ξᵢ` evaluated at `value`.
    pub fn variable(index: usize, value: f64, dim: usize) -> Self {
        let mut gradient = DVector::zeros(dim);
        gradient[index] = 1.0;
        Self {
            value,
            gradient,
            hessian: DMatrix::zeros(dim, dim),
        }
    }

    /// Seeds one jet per stacked coordinate of `p`, split into x and y blocks.
    pub fn seed(p: &Point) -> (Vec<Jet2>, Vec<Jet2>) {
        let n = p.n();
        let dim = 2 * n;
        let x = (0..n).map(|i| Self::variable(i, p.x[i], dim)).collect();
        let y = (0..n).map(|i| Self::variable(n + i, p.y[i], dim)).collect();
        (x, y)
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    /// Composes with a univariate function given its value and first two
    /// derivatives at `self.value`.
    ///
    /// Infinite derivatives multiplied by an exactly vanishing gradient are
    /// treated as zero; that is the limit for the `t^{3/2}`-type compositions
    /// used on fields that vanish to second order.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let grad_zero = self.gradient.iter().all(|g| *g == 0.0);
        let gradient = if grad_zero {
            DVector::zeros(self.dim())
        } else {
            &self.gradient * df
        };
        let mut hessian = if df == 0.0 || (grad_zero && !df.is_finite()) {
            DMatrix::zeros(self.dim(), self.dim())
        } else {
            &self.hessian * df
        };
        if !grad_zero && d2f != 0.0 {
            hessian.ger(d2f, &self.gradient, &self.gradient, 1.0);
        }
        Self {
            value: f,
            gradient,
            hessian,
        }
    }

    /// Forces exact symmetry of the Hessian.
    pub fn symmetrized(mut self) -> Self {
        let t = self.hessian.transpose();
        self.hessian = (&self.hessian + t) * 0.5;
        self
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            gradient: self.gradient + rhs.gradient,
            hessian: self.hessian + rhs.hessian,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            gradient: self.gradient - rhs.gradient,
            hessian: self.hessian - rhs.hessian,
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let mut hessian = &self.hessian * rhs.value + &rhs.hessian * self.value;
        hessian.ger(1.0, &self.gradient, &rhs.gradient, 1.0);
        hessian.ger(1.0, &rhs.gradient, &self.gradient, 1.0);
        Jet2 {
            value: self.value * rhs.value,
            gradient: &self.gradient * rhs.value + &rhs.gradient * self.value,
            hessian,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        let v = rhs.value;
        let recip = rhs.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
        self * recip
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 {
            value: -self.value,
            gradient: -self.gradient,
            hessian: -self.hessian,
        }
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: f64) -> Jet2 {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, rhs: f64) -> Jet2 {
        self.value -= rhs;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        Jet2 {
            value: self.value * rhs,
            gradient: self.gradient * rhs,
            hessian: self.hessian * rhs,
        }
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: f64) -> Jet2 {
        self * (1.0 / rhs)
    }
}

/// Arithmetic carrier for model formulas: implemented by `f64` (values only)
/// and [`Jet2`] (value, gradient, Hessian).
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(&self) -> f64;

    /// A constant living in the same space as `self`.
    fn lift(&self, c: f64) -> Self;

    /// See [`Jet2::chain`].
    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self;

    fn sqrt(&self) -> Self {
        let v = self.value();
        let s = v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * v))
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.chain(e, e, e)
    }

    /// `t ↦ t^{3/2}` on `t ≥ 0`.
    fn pow_three_halves(&self) -> Self {
        let v = self.value().max(0.0);
        let s = v.sqrt();
        self.chain(v * s, 1.5 * s, 0.75 / s)
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn chain(&self, f: f64, _df: f64, _d2f: f64) -> Self {
        f
    }
}

impl Scalar for Jet2 {
    fn value(&self) -> f64 {
        self.value
    }
    fn lift(&self, c: f64) -> Self {
        Jet2::constant(c, self.dim())
    }
    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        Jet2::chain(self, f, df, d2f)
    }
}

/// Second-order jet in two real variables, stored on the stack.
///
/// Used to pull fields back along maps from a planar domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneJet {
    pub value: f64,
    pub gradient: [f64; 2],
    /// `(∂₁₁, ∂₁₂, ∂₂₂)`.
    pub hessian: [f64; 3],
}

impl PlaneJet {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            gradient: [0.0; 2],
            hessian: [0.0; 3],
        }
    }

    pub fn laplacian(&self) -> f64 {
        self.hessian[0] + self.hessian[2]
    }

    fn map(self, o: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            value: f(self.value, o.value),
            gradient: [
                f(self.gradient[0], o.gradient[0]),
                f(self.gradient[1], o.gradient[1]),
            ],
            hessian: [
                f(self.hessian[0], o.hessian[0]),
                f(self.hessian[1], o.hessian[1]),
                f(self.hessian[2], o.hessian[2]),
            ],
        }
    }

    fn scale(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            gradient: [self.gradient[0] * c, self.gradient[1] * c],
            hessian: [
                self.hessian[0] * c,
                self.hessian[1] * c,
                self.hessian[2] * c,
            ],
        }
    }
}

impl Add for PlaneJet {
    type Output = PlaneJet;
    fn add(self, rhs: PlaneJet) -> PlaneJet {
        self.map(rhs, |a, b| a + b)
    }
}

impl Sub for PlaneJet {
    type Output = PlaneJet;
    fn sub(self, rhs: PlaneJet) -> PlaneJet {
        self.map(rhs, |a, b| a - b)
    }
}

impl Mul for PlaneJet {
    type Output = PlaneJet;
    fn mul(self, rhs: PlaneJet) -> PlaneJet {
        let (u, v) = (self.value, rhs.value);
        let (g, k) = (self.gradient, rhs.gradient);
        let (h, l) = (self.hessian, rhs.hessian);
        PlaneJet {
            value: u * v,
            gradient: [g[0] * v + k[0] * u, g[1] * v + k[1] * u],
            hessian: [
                h[0] * v + l[0] * u + 2.0 * g[0] * k[0],
                h[1] * v + l[1] * u + g[0] * k[1] + g[1] * k[0],
                h[2] * v + l[2] * u + 2.0 * g[1] * k[1],
            ],
        }
    }
}

impl Div for PlaneJet {
    type Output = PlaneJet;
    fn div(self, rhs: PlaneJet) -> PlaneJet {
        let v = rhs.value;
        self * rhs.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

impl Neg for PlaneJet {
    type Output = PlaneJet;
    fn neg(self) -> PlaneJet {
        self.scale(-1.0)
    }
}

impl Add<f64> for PlaneJet {
    type Output = PlaneJet;
    fn add(mut self, rhs: f64) -> PlaneJet {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for PlaneJet {
    type Output = PlaneJet;
    fn sub(mut self, rhs: f64) -> PlaneJet {
        self.value -= rhs;
        self
    }
}

impl Mul<f64> for PlaneJet {
    type Output = PlaneJet;
    fn mul(self, rhs: f64) -> PlaneJet {
        self.scale(rhs)
    }
}

impl Div<f64> for PlaneJet {
    type Output = PlaneJet;
    fn div(self, rhs: f64) -> PlaneJet {
        self.scale(1.0 / rhs)
    }
}

impl Scalar for PlaneJet {
    fn value(&self) -> f64 {
        self.value
    }
    fn lift(&self, c: f64) -> Self {
        PlaneJet::constant(c)
    }
    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let g = self.gradient;
        if g == [0.0; 2] {
            let h = if df == 0.0 || !df.is_finite() {
                [0.0; 3]
            } else {
                self.hessian.map(|v| v * df)
            };
            return PlaneJet {
                value: f,
                gradient: [0.0; 2],
                hessian: h,
            };
        }
        let h = if df == 0.0 {
            [0.0; 3]
        } else {
            self.hessian.map(|v| v * df)
        };
        PlaneJet {
            value: f,
            gradient: [g[0] * df, g[1] * df],
            hessian: [
                h[0] + d2f * g[0] * g[0],
                h[1] + d2f * g[0] * g[1],
                h[2] + d2f * g[1] * g[1],
            ],
        }
    }
}

/// Sum of squares of a slice of scalars; `None` for an empty slice.
pub(crate) fn sum_squares<S: Scalar>(terms: &[S]) -> Option<S> {
    terms.iter().map(|t| t.square()).reduce(|acc, t| acc + t)
}

/// A scalar formula on `ℂⁿ`, written generically over the arithmetic carrier.
///
/// Every `Formula` is a [`ScalarField`] through a blanket impl.
pub trait Formula: Send + Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    /// Rejects points where the formula is not twice differentiable.
    fn guard(&self, _p: &Point) -> Result<(), FieldError> {
        Ok(())
    }

    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> S;
}

/// A twice-differentiable scalar field with a declared smooth domain.
pub trait ScalarField: Send + Sync {
    fn name(&self) -> String;

    /// Complex dimension `n`.
    fn dim(&self) -> usize;

    fn check_domain(&self, p: &Point) -> Result<(), FieldError>;

    fn value_unchecked(&self, p: &Point) -> f64;

    fn jet_unchecked(&self, p: &Point) -> Jet2;

    fn value(&self, p: &Point) -> Result<f64, FieldError> {
        self.check_domain(p)?;
        Ok(self.value_unchecked(p))
    }

    fn eval(&self, p: &Point) -> Result<Jet2, FieldError> {
        self.check_domain(p)?;
        Ok(self.jet_unchecked(p))
    }
}

impl<F: Formula> ScalarField for F {
    fn name(&self) -> String {
        Formula::name(self)
    }

    fn dim(&self) -> usize {
        Formula::dim(self)
    }

    fn check_domain(&self, p: &Point) -> Result<(), FieldError> {
        if p.n() != Formula::dim(self) {
            return Err(FieldError::DimensionMismatch {
                field: Formula::name(self),
                expected: Formula::dim(self),
                got: p.n(),
            });
        }
        if p.x.iter().chain(p.y.iter()).any(|c| !c.is_finite()) {
            return Err(FieldError::NonFinite(Formula::name(self)));
        }
        self.guard(p)
    }

    fn value_unchecked(&self, p: &Point) -> f64 {
        self.evaluate(&p.x, &p.y)
    }

    fn jet_unchecked(&self, p: &Point) -> Jet2 {
        let (x, y) = Jet2::seed(p);
        self.evaluate(&x, &y).symmetrized()
    }
}

/// Central-difference Hessian with one Richardson extrapolation step
/// (`step` and `step / 2`), built from checked field values only.
///
/// Every stencil point must lie in the smooth domain of `f`.
pub fn fd_hessian(f: &dyn ScalarField, p: &Point, step: f64) -> Result<DMatrix<f64>, LabError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(LabError::InvalidArgument(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let coarse = central_hessian(f, p, step)?;
    let fine = central_hessian(f, p, 0.5 * step)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

fn central_hessian(f: &dyn ScalarField, p: &Point, h: f64) -> Result<DMatrix<f64>, LabError> {
    let dim = 2 * p.n();
    let eval = |q: &Point| -> Result<f64, LabError> {
        f.value(q).map_err(|source| LabError::StencilLeavesDomain {
            field: f.name(),
            source,
        })
    };
    let center = eval(p)?;
    let mut hess = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let plus = eval(&p.shifted(i, h))?;
        let minus = eval(&p.shifted(i, -h))?;
        hess[(i, i)] = (plus - 2.0 * center + minus) / (h * h);
        for j in 0..i {
            let pp = eval(&p.shifted(i, h).shifted(j, h))?;
            let pm = eval(&p.shifted(i, h).shifted(j, -h))?;
            let mp = eval(&p.shifted(i, -h).shifted(j, h))?;
            let mm = eval(&p.shifted(i, -h).shifted(j, -h))?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Cubic;

    impl Formula for Cubic {
        fn name(&self) -> String {
            "cubic".into()
        }
        fn dim(&self) -> usize {
            1
        }
        fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
            x[0].clone() * x[0].clone() * y[0].clone() + y[0].exp()
        }
    }

    #[test]
    fn product_and_exp_rules() {
        let p = Point::new(vec![0.7], vec![-0.3]).unwrap();
        let j = Cubic.eval(&p).unwrap();
        let (x, y) = (0.7_f64, -0.3_f64);
        assert_relative_eq!(j.value, x * x * y + y.exp(), epsilon = 1e-15);
        assert_relative_eq!(j.gradient[0], 2.0 * x * y, epsilon = 1e-15);
        assert_relative_eq!(j.gradient[1], x * x + y.exp(), epsilon = 1e-15);
        assert_relative_eq!(j.hessian[(0, 0)], 2.0 * y, epsilon = 1e-15);
        assert_relative_eq!(j.hessian[(0, 1)], 2.0 * x, epsilon = 1e-15);
        assert_relative_eq!(j.hessian[(1, 1)], y.exp(), epsilon = 1e-15);
    }

    #[test]
    fn division_matches_quotient_rule() {
        let a = Jet2::variable(0, 2.0, 1);
        let q = a.lift(1.0) / a;
        assert_relative_eq!(q.value, 0.5);
        assert_relative_eq!(q.gradient[0], -0.25);
        assert_relative_eq!(q.hessian[(0, 0)], 0.25);
    }

    #[test]
    fn three_halves_power_at_zero_is_flat() {
        // t = ξ² at ξ = 0: (ξ²)^{3/2} = |ξ|³ has zero Hessian there.
        let xi = Jet2::variable(0, 0.0, 1);
        let t = xi.square();
        let c = t.pow_three_halves();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.gradient[0], 0.0);
        assert_eq!(c.hessian[(0, 0)], 0.0);
    }

    #[test]
    fn fd_matches_ad_on_cubic() {
        let p = Point::new(vec![0.4], vec![0.9]).unwrap();
        let ad = Cubic.eval(&p).unwrap().hessian;
        let fd = fd_hessian(&Cubic, &p, 1e-3).unwrap();
        assert!((ad - fd).amax() < 1e-8);
    }

    #[test]
    fn fd_rejects_bad_step() {
        let p = Point::origin(1);
        assert!(fd_hessian(&Cubic, &p, 0.0).is_err());
    }

    #[test]
    fn point_constructors_validate() {
        assert!(Point::from_coords(&[1.0, 2.0, 3.0]).is_err());
        assert!(Point::new(vec![1.0], vec![]).is_err());
        let p = Point::from_coords(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.x, vec![1.0, 2.0]);
        assert_eq!(p.y, vec![3.0, 4.0]);
        assert_eq!(p.shifted(3, 1.0).y, vec![3.0, 5.0]);
    }
}
