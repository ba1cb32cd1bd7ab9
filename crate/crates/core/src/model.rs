//! Model functions on the flat chart `ℂⁿ` with the two Lagrangian planes
//! `L₁ = {x = 0}` and `L₂ = {xᵢ = 0 (i ≤ k), yⱼ = 0 (j > k)}`.

use serde::{Deserialize, Serialize};

use crate::error::{FieldError, LabError};
use crate::jet::{sum_squares, Formula, Point, Scalar};

/// Parameters of the local model: dimensions, radii and constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n: usize,
    pub k: usize,
    pub r: f64,
    pub d: f64,
    pub c0: f64,
    pub s: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    1e-6
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n: 2,
            k: 0,
            r: 0.5,
            d: 0.1,
            c0: 10.0,
            s: 0.02,
            eps: default_eps(),
        }
    }
}

impl ModelParams {
    /// Checks the invariants, clamping `d > 1/2` to `1/2`.
    ///
    /// Returns the warnings produced by clamping.
    pub fn validate(&mut self) -> Result<Vec<String>, LabError> {
        let mut warnings = Vec::new();
        if self.n == 0 {
            return Err(LabError::Params("n must be at least 1".into()));
        }
        if self.k > self.n {
            return Err(LabError::Params(format!(
                "k must satisfy 0 <= k <= n, got k = {} > n = {}",
                self.k, self.n
            )));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(LabError::Params(format!(
                "r must be positive, got {}",
                self.r
            )));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(LabError::Params(format!(
                "D must lie in (0, 1/2], got {}",
                self.d
            )));
        }
        if self.d > 0.5 {
            warnings.push(format!("D = {} exceeds 1/2; clamped to 1/2", self.d));
            self.d = 0.5;
        }
        if !(self.c0 >= 0.0 && self.c0.is_finite()) {
            return Err(LabError::Params(format!(
                "C0 must be nonnegative, got {}",
                self.c0
            )));
        }
        if !(self.s > 0.0 && self.s < self.d * self.r) {
            return Err(LabError::Params(format!(
                "s must satisfy 0 < s < D*r = {}, got {}",
                self.d * self.r,
                self.s
            )));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(LabError::Params(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        Ok(warnings)
    }

    pub fn validated(mut self) -> Result<Self, LabError> {
        self.validate()?;
        Ok(self)
    }
}

/// `ρ₁ = Σ xᵢ²`.
pub fn rho1(p: &Point) -> f64 {
    p.x.iter().map(|v| v * v).sum()
}

/// `ρ₂ = Σ_{i≤k} xᵢ² + Σ_{i>k} yᵢ²`.
pub fn rho2(p: &Point, k: usize) -> f64 {
    p.x[..k].iter().map(|v| v * v).sum::<f64>() + p.y[k..].iter().map(|v| v * v).sum::<f64>()
}

fn rho1_s<S: Scalar>(x: &[S]) -> S {
    sum_squares(x).expect("n >= 1")
}

fn rho2_s<S: Scalar>(x: &[S], y: &[S], k: usize) -> S {
    let zero = x[0].lift(0.0);
    let a = sum_squares(&x[..k]).unwrap_or_else(|| zero.clone());
    let b = sum_squares(&y[k..]).unwrap_or(zero);
    a + b
}

/// Transition profile of a cutoff function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProfile {
    /// Identity below 1/2, one above 3/4, smooth blend in between.
    Blend,
    /// `exp(−1/t)` for `t > 0`, zero otherwise.
    Exp,
}

impl CutoffProfile {
    /// Value and first two derivatives at `t`.
    pub fn eval(self, t: f64) -> (f64, f64, f64) {
        match self {
            CutoffProfile::Blend => chi(t),
            CutoffProfile::Exp => exp_cutoff(t),
        }
    }

    pub fn apply<S: Scalar>(self, t: &S) -> S {
        let (f, df, d2f) = self.eval(t.value());
        t.chain(f, df, d2f)
    }
}

/// The cutoff χ with knees at 1/2 and 3/4: value, χ′, χ″.
///
/// Negative arguments are clamped to zero, where χ is the identity.
pub fn chi(t: f64) -> (f64, f64, f64) {
    let t = t.max(0.0);
    if t <= 0.5 {
        return (t, 1.0, 0.0);
    }
    if t >= 0.75 {
        return (1.0, 0.0, 0.0);
    }
    let u = 4.0 * (t - 0.5);
    let (psi, dpsi, d2psi) = blend(u);
    let value = t + psi * (1.0 - t);
    let d1 = 1.0 - psi + 4.0 * dpsi * (1.0 - t);
    let d2 = 16.0 * d2psi * (1.0 - t) - 8.0 * dpsi;
    (value, d1, d2)
}

/// Checked version of [`chi`] that rejects negative input.
pub fn chi_checked(t: f64) -> Result<(f64, f64, f64), LabError> {
    if t < 0.0 || t.is_nan() {
        return Err(LabError::InvalidArgument(format!(
            "cutoff argument must be nonnegative, got {t}"
        )));
    }
    Ok(chi(t))
}

/// `ψ(u) = e^{−1/u} / (e^{−1/u} + e^{−1/(1−u)})` on `(0, 1)` with two derivatives.
fn blend(u: f64) -> (f64, f64, f64) {
    let q = 1.0 / u - 1.0 / (1.0 - u);
    let (psi, one_minus) = if q > 0.0 {
        let e = (-q).exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    } else {
        let e = q.exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    };
    let pp = psi * one_minus;
    if pp == 0.0 {
        return (psi, 0.0, 0.0);
    }
    let w = 1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u));
    let dw = -2.0 / (u * u * u) + 2.0 / ((1.0 - u) * (1.0 - u) * (1.0 - u));
    let d1 = pp * w;
    let d2 = d1 * (one_minus - psi) * w + pp * dw;
    (psi, d1, d2)
}

fn exp_cutoff(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let e = (-1.0 / t).exp();
    let t2 = t * t;
    (e, e / t2, e * (1.0 / (t2 * t2) - 2.0 / (t2 * t)))
}

/// `2χ² + χχ″ − 2(χ′)²` for the given profile at `t`.
pub fn deficiency(profile: CutoffProfile, t: f64) -> f64 {
    let (c, d1, d2) = profile.eval(t);
    2.0 * c * c + c * d2 - 2.0 * d1 * d1
}

/// Branch of the piecewise interpolant that applies at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegionLabel {
    Core,
    CollarL1,
    CollarL2,
    Intermediate,
    Outside,
}

/// Classifies `p` against `U = {ρ₁ < (Dr)²} ∪ {ρ₂ < (Dr)²}`.
///
/// `Core` is `B_r = {max(√ρ₁, √ρ₂) < r/2}`; the collars are the parts of the
/// tubes with the other distance at least `r`.
pub fn region_classify(p: &Point, params: &ModelParams) -> RegionLabel {
    let s1 = rho1(p).sqrt();
    let s2 = rho2(p, params.k).sqrt();
    let dr = params.d * params.r;
    if s1 >= dr && s2 >= dr {
        RegionLabel::Outside
    } else if s1.max(s2) < 0.5 * params.r {
        RegionLabel::Core
    } else if s1 < dr && s2 >= params.r {
        RegionLabel::CollarL1
    } else if s2 < dr && s1 >= params.r {
        RegionLabel::CollarL2
    } else {
        RegionLabel::Intermediate
    }
}

pub fn in_neighborhood(p: &Point, params: &ModelParams) -> bool {
    region_classify(p, params) != RegionLabel::Outside
}

/// `β_r(p) = r² χ(ρ₁/r²) χ(ρ₂/r²)`.
pub fn beta_r(p: &Point, k: usize, r: f64) -> f64 {
    let r2 = r * r;
    r2 * chi(rho1(p) / r2).0 * chi(rho2(p, k) / r2).0
}

/// The piecewise interpolant `h̃` on `U` and the branch that produced it.
pub fn hpre_labeled(p: &Point, params: &ModelParams) -> Result<(f64, RegionLabel), LabError> {
    let label = region_classify(p, params);
    let a = rho1(p);
    let b = rho2(p, params.k);
    let value = match label {
        RegionLabel::Outside => {
            return Err(FieldError::OutsideNeighborhood {
                field: "hpre".into(),
            }
            .into())
        }
        RegionLabel::Core => a * b / (params.r * params.r),
        RegionLabel::CollarL1 => a,
        RegionLabel::CollarL2 => b,
        RegionLabel::Intermediate => beta_r(p, params.k, params.r),
    };
    Ok((value, label))
}

pub fn hpre(p: &Point, params: &ModelParams) -> Result<f64, LabError> {
    Ok(hpre_labeled(p, params)?.0)
}

/// `h = (√h̃ + C₀ r⁻¹ h̃)²` on `U`.
pub fn h_duval(p: &Point, params: &ModelParams) -> Result<f64, LabError> {
    let t = hpre(p, params)?;
    Ok((t.sqrt() + params.c0 / params.r * t).powi(2))
}

fn tube_guard(field: &str, p: &Point, k: usize, eps: f64) -> Result<(), FieldError> {
    let distance = rho1(p).sqrt().min(rho2(p, k).sqrt());
    if distance < eps {
        Err(FieldError::ExclusionTube {
            field: field.to_string(),
            distance,
            eps,
        })
    } else {
        Ok(())
    }
}

fn u_guard(field: &str, p: &Point, params: &ModelParams) -> Result<(), FieldError> {
    if in_neighborhood(p, params) {
        Ok(())
    } else {
        Err(FieldError::OutsideNeighborhood {
            field: field.to_string(),
        })
    }
}

/// `ρ₁`.
#[derive(Clone, Debug)]
pub struct Rho1 {
    pub n: usize,
}

impl Formula for Rho1 {
    fn name(&self) -> String {
        "rho1".into()
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn evaluate<S: Scalar>(&self, x: &[S], _y: &[S]) -> S {
        rho1_s(x)
    }
}

/// `ρ₂`.
#[derive(Clone, Debug)]
pub struct Rho2 {
    pub n: usize,
    pub k: usize,
}

impl Formula for Rho2 {
    fn name(&self) -> String {
        "rho2".into()
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        rho2_s(x, y, self.k)
    }
}

/// `|y|²`.
#[derive(Clone, Debug)]
pub struct YNormSquared {
    pub n: usize,
}

impl Formula for YNormSquared {
    fn name(&self) -> String {
        "|y|^2".into()
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn evaluate<S: Scalar>(&self, _x: &[S], y: &[S]) -> S {
        sum_squares(y).expect("n >= 1")
    }
}

/// `ρ₁ρ₂`, written `αβ` in the eigenstructure lemmas.
#[derive(Clone, Debug)]
pub struct RhoProduct {
    pub n: usize,
    pub k: usize,
}

impl Formula for RhoProduct {
    fn name(&self) -> String {
        "rho1*rho2".into()
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        rho1_s(x) * rho2_s(x, y, self.k)
    }
}

/// `√(ρ₁ρ₂)`, smooth off an `eps`-tube around `L₁ ∪ L₂`.
#[derive(Clone, Debug)]
pub struct SqrtRhoProduct {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
}

impl Formula for SqrtRhoProduct {
    fn name(&self) -> String {
        "sqrt(rho1*rho2)".into()
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn guard(&self, p: &Point) -> Result<(), FieldError> {
        tube_guard("sqrt(rho1*rho2)", p, self.k, self.eps)
    }
    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        (rho1_s(x) * rho2_s(x, y, self.k)).sqrt()
    }
}

/// `β_r = r² χ(ρ₁/r²) χ(ρ₂/r²)`; `r = 1` gives `β₁`.
#[derive(Clone, Debug)]
pub struct Beta {
    pub n: usize,
    pub k: usize,
    pub r: f64,
}

impl Beta {
    pub fn unit(n: usize, k: usize) -> Self {
        Self { n, k, r: 1.0 }
    }
}

fn beta_s<S: Scalar>(x: &[S], y: &[S], k: usize, r: f64) -> S {
    let r2 = r * r;
    let a = CutoffProfile::Blend.apply(&(rho1_s(x) / r2));
    let b = CutoffProfile::Blend.apply(&(rho2_s(x, y, k) / r2));
    a * b * r2
}

impl Formula for Beta {
    fn name(&self) -> String {
        format!("beta_r(r={})", self.r)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        beta_s(x, y, self.k, self.r)
    }
}

/// `√β_r + C₀ r⁻¹ β_r`, smooth off an `eps`-tube around `L₁ ∪ L₂`.
#[derive(Clone, Debug)]
pub struct SqrtBetaModified {
    pub n: usize,
    pub k: usize,
    pub r: f64,
    pub c0: f64,
    pub eps: f64,
}

impl Formula for SqrtBetaModified {
    fn name(&self) -> String {
        format!("sqrt(beta_r)+C0/r*beta_r(r={},C0={})", self.r, self.c0)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn guard(&self, p: &Point) -> Result<(), FieldError> {
        tube_guard("sqrt(beta_r)+C0/r*beta_r", p, self.k, self.eps)
    }
    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let b = beta_s(x, y, self.k, self.r);
        b.sqrt() + b * (self.c0 / self.r)
    }
}

/// `(√β_r + C₀ r⁻¹ β_r)²`, expanded as `β + 2cβ^{3/2} + c²β²` with `c = C₀/r`.
///
/// This is the square of the modified function on all of `ℂⁿ`; it is `C²`
/// across `L₁ ∪ L₂`, so no exclusion tube is needed.
#[derive(Clone, Debug)]
pub struct SquaredSqrtModel {
    pub n: usize,
    pub k: usize,
    pub r: f64,
    pub c0: f64,
}

fn squared_model_s<S: Scalar>(x: &[S], y: &[S], k: usize, r: f64, c0: f64) -> S {
    let c = c0 / r;
    let b = beta_s(x, y, k, r);
    b.clone() + b.pow_three_halves() * (2.0 * c) + b.square() * (c * c)
}

impl Formula for SquaredSqrtModel {
    fn name(&self) -> String {
        format!("(sqrt(beta_r)+C0/r*beta_r)^2(r={},C0={})", self.r, self.c0)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        squared_model_s(x, y, self.k, self.r, self.c0)
    }
}

/// The interpolant `h̃` as a field on `U`.
///
/// All branches of the piecewise definition agree with `β_r` on their
/// regions, so the jet is that of `β_r`.
#[derive(Clone, Debug)]
pub struct HPre {
    pub params: ModelParams,
}

impl Formula for HPre {
    fn name(&self) -> String {
        "hpre".into()
    }
    fn dim(&self) -> usize {
        self.params.n
    }
    fn guard(&self, p: &Point) -> Result<(), FieldError> {
        u_guard("hpre", p, &self.params)
    }
    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        beta_s(x, y, self.params.k, self.params.r)
    }
}

/// `h = (√h̃ + C₀ r⁻¹ h̃)²` as a field on `U`.
#[derive(Clone, Debug)]
pub struct HDuval {
    pub params: ModelParams,
}

impl Formula for HDuval {
    fn name(&self) -> String {
        "h".into()
    }
    fn dim(&self) -> usize {
        self.params.n
    }
    fn guard(&self, p: &Point) -> Result<(), FieldError> {
        u_guard("h", p, &self.params)
    }
    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let pr = &self.params;
        squared_model_s(x, y, pr.k, pr.r, pr.c0)
    }
}

/// `√h` on `U` off the `eps`-tube.
#[derive(Clone, Debug)]
pub struct SqrtHDuval {
    pub params: ModelParams,
}

impl Formula for SqrtHDuval {
    fn name(&self) -> String {
        "sqrt(h)".into()
    }
    fn dim(&self) -> usize {
        self.params.n
    }
    fn guard(&self, p: &Point) -> Result<(), FieldError> {
        u_guard("sqrt(h)", p, &self.params)?;
        tube_guard("sqrt(h)", p, self.params.k, self.params.eps)
    }
    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let pr = &self.params;
        let b = beta_s(x, y, pr.k, pr.r);
        b.sqrt() + b * (pr.c0 / pr.r)
    }
}

/// `χ(x₁)|y|²` with a cutoff acting on the first real coordinate.
#[derive(Clone, Debug)]
pub struct AbouzaidRho {
    pub n: usize,
    pub cutoff: CutoffProfile,
    pub eps: f64,
}

impl Formula for AbouzaidRho {
    fn name(&self) -> String {
        format!("chi(x1)|y|^2({:?})", self.cutoff)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn guard(&self, p: &Point) -> Result<(), FieldError> {
        // The blend profile has a kink at x₁ = 0.
        if self.cutoff == CutoffProfile::Blend && p.x[0].abs() < self.eps {
            return Err(FieldError::ExclusionTube {
                field: Formula::name(self),
                distance: p.x[0].abs(),
                eps: self.eps,
            });
        }
        Ok(())
    }
    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let c = if x[0].value() <= 0.0 {
            x[0].lift(0.0)
        } else {
            self.cutoff.apply(&x[0])
        };
        c * sum_squares(y).expect("n >= 1")
    }
}

/// `χ(x₁)|y|²` evaluated directly.
pub fn abouzaid_rho(p: &Point, cutoff: CutoffProfile) -> f64 {
    if p.x[0] <= 0.0 {
        return 0.0;
    }
    cutoff.eval(p.x[0]).0 * p.y.iter().map(|v| v * v).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(x: &[f64], y: &[f64]) -> Point {
        Point::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn rho_values() {
        let p = pt(&[1.0], &[1.0]);
        assert_eq!((rho1(&p), rho2(&p, 0)), (1.0, 1.0));
        let q = pt(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!((rho1(&q), rho2(&q, 1)), (5.0, 17.0));
        assert_eq!(rho1(&pt(&[0.0, 0.0], &[3.0, 1.0])), 0.0);
    }

    #[test]
    fn chi_knees() {
        assert_eq!(chi(0.25), (0.25, 1.0, 0.0));
        assert_eq!(chi(0.9), (1.0, 0.0, 0.0));
        let (v, d1, _) = chi(0.625);
        assert!(v > 0.625 && v < 1.0 && d1 > 0.0);
        // ψ(1/2) = 1/2 by symmetry, so χ(5/8) = 5/8 + 3/16.
        assert_relative_eq!(v, 0.8125, epsilon = 1e-15);
        assert!(chi_checked(-0.1).is_err());
    }

    #[test]
    fn chi_derivatives_match_differences() {
        for &t in &[0.51, 0.55, 0.6, 0.625, 0.7, 0.74] {
            let h = 1e-5;
            let (_, d1, d2) = chi(t);
            let fd1 = (chi(t + h).0 - chi(t - h).0) / (2.0 * h);
            let fd2 = (chi(t + h).0 - 2.0 * chi(t).0 + chi(t - h).0) / (h * h);
            assert_relative_eq!(d1, fd1, epsilon = 1e-7, max_relative = 1e-7);
            assert_relative_eq!(d2, fd2, epsilon = 1e-3, max_relative = 1e-4);
        }
    }

    #[test]
    fn chi_flat_near_knees() {
        let (v, d1, d2) = chi(0.5 + 1e-12);
        assert_relative_eq!(v, 0.5, epsilon = 1e-11);
        assert_eq!((d1, d2), (1.0, 0.0));
        let (v, d1, d2) = chi(0.75 - 1e-12);
        assert_relative_eq!(v, 1.0, epsilon = 1e-11);
        assert!(d1.abs() < 1e-12 && d2.abs() < 1e-9);
    }

    #[test]
    fn exp_deficiency_negative_near_zero() {
        assert!(deficiency(CutoffProfile::Exp, 0.1) < 0.0);
        let t: f64 = 0.1;
        let c = (-1.0 / t).exp();
        let expect = c * c * (2.0 - 1.0 / t.powi(4) - 2.0 / t.powi(3));
        assert_relative_eq!(
            deficiency(CutoffProfile::Exp, t),
            expect,
            max_relative = 1e-12
        );
    }

    #[test]
    fn params_validation() {
        let mut p = ModelParams {
            k: 3,
            ..ModelParams::default()
        };
        assert!(p.validate().unwrap_err().to_string().contains("k <= n"));
        let mut p = ModelParams {
            d: 0.9,
            s: 0.01,
            ..ModelParams::default()
        };
        assert_eq!(p.validate().unwrap().len(), 1);
        assert_eq!(p.d, 0.5);
        let mut p = ModelParams {
            s: 0.2,
            ..ModelParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn regions_and_branches() {
        let params = ModelParams {
            n: 1,
            k: 0,
            r: 1.0,
            d: 0.25,
            c0: 0.0,
            s: 0.1,
            eps: 1e-6,
        };
        let core = pt(&[0.2], &[0.3]);
        assert_eq!(region_classify(&core, &params), RegionLabel::Core);
        assert_relative_eq!(hpre(&core, &params).unwrap(), 0.04 * 0.09, epsilon = 1e-15);
        // Near L₂ = ℝ, far along x: the collar value is ρ₂ = |y|².
        let collar = pt(&[1.5], &[0.0625]);
        assert_eq!(region_classify(&collar, &params), RegionLabel::CollarL2);
        assert_eq!(hpre(&collar, &params).unwrap(), 0.0625 * 0.0625);
        let far = pt(&[1.0], &[1.0]);
        assert_eq!(region_classify(&far, &params), RegionLabel::Outside);
        assert!(hpre(&far, &params).is_err());
        assert!(h_duval(&far, &params).is_err());
    }

    #[test]
    fn seam_continuity_at_x_equals_r() {
        let params = ModelParams {
            n: 1,
            k: 0,
            r: 1.0,
            d: 0.25,
            c0: 1.0,
            s: 0.1,
            eps: 1e-6,
        };
        let y = params.r * params.d / 4.0;
        let minus = pt(&[params.r - 1e-12], &[y]);
        let plus = pt(&[params.r + 1e-12], &[y]);
        let (a, la) = hpre_labeled(&minus, &params).unwrap();
        let (b, lb) = hpre_labeled(&plus, &params).unwrap();
        assert_eq!((la, lb), (RegionLabel::Intermediate, RegionLabel::CollarL2));
        assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn duval_collapses_at_zero_c0() {
        let params = ModelParams {
            c0: 0.0,
            ..ModelParams::default()
        };
        let p = pt(&[0.04, 0.01], &[0.3, -0.2]);
        assert_relative_eq!(h_duval(&p, &params).unwrap(), hpre(&p, &params).unwrap());
    }

    #[test]
    fn abouzaid_vanishes_off_support() {
        let p = pt(&[-0.2, 0.3], &[1.0, 0.5]);
        assert_eq!(abouzaid_rho(&p, CutoffProfile::Exp), 0.0);
        let q = pt(&[0.2, 0.3], &[0.0, 0.0]);
        assert_eq!(abouzaid_rho(&q, CutoffProfile::Exp), 0.0);
    }
}
