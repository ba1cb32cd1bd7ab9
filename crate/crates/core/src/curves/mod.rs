//! Explicit holomorphic curves in `ℂⁿ` with boundary arcs on the model
//! Lagrangian planes.

pub mod measure;
pub mod quadrature;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::jet::{PlaneJet, Point};
use crate::model::{rho1, rho2};

pub use measure::{
    area_g, area_h, estimate_k, length_g, verify_monotonicity, KRow, KTable, MonotonicityReport,
};
pub use quadrature::QuadratureSpec;

/// Boundary and label residual tolerance.
pub const CURVE_TOL: f64 = 1e-10;

/// One component `ℂ → ℂ` of a curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolomorphicExpr {
    /// `Σ cⱼ zʲ`.
    Polynomial { coeffs: Vec<Complex64> },
    /// `c · z^{m/2}` with `arg z ∈ (−π/2, 3π/2]`.
    HalfPower { c: Complex64, m: u32 },
}

fn branch_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -FRAC_PI_2 {
        a + 2.0 * PI
    } else {
        a
    }
}

impl HolomorphicExpr {
    pub fn value(&self, z: Complex64) -> Complex64 {
        match self {
            HolomorphicExpr::Polynomial { coeffs } => coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c),
            HolomorphicExpr::HalfPower { c, m } => {
                if z == Complex64::new(0.0, 0.0) {
                    return z;
                }
                let p = *m as f64 / 2.0;
                c * Complex64::from_polar(z.norm().powf(p), p * branch_arg(z))
            }
        }
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        match self {
            HolomorphicExpr::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, (j, c)| {
                    acc * z + c * j as f64
                }),
            HolomorphicExpr::HalfPower { c, m } => {
                let p = *m as f64 / 2.0;
                c * p * Complex64::from_polar(z.norm().powf(p - 1.0), (p - 1.0) * branch_arg(z))
            }
        }
    }

    pub fn second_derivative(&self, z: Complex64) -> Complex64 {
        match self {
            HolomorphicExpr::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, (j, c)| {
                    acc * z + c * (j * (j - 1)) as f64
                }),
            HolomorphicExpr::HalfPower { c, m } => {
                let p = *m as f64 / 2.0;
                c * (p * (p - 1.0))
                    * Complex64::from_polar(z.norm().powf(p - 2.0), (p - 2.0) * branch_arg(z))
            }
        }
    }

    /// Arguments in `(0, angle)` whose rays the component maps into a
    /// coordinate axis; integrands can lose smoothness there.
    fn axis_rays(&self, angle: f64) -> Vec<f64> {
        match self {
            HolomorphicExpr::HalfPower { c, m } if *m > 0 => {
                let p = *m as f64 / 2.0;
                let phase = c.arg();
                let mut out = Vec::new();
                for j in -8..=16 {
                    let th = (j as f64 * FRAC_PI_2 - phase) / p;
                    if th > 1e-12 && th < angle - 1e-12 {
                        out.push(th);
                    }
                }
                out
            }
            _ => Vec::new(),
        }
    }
}

/// Planar parameter domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum DomainShape {
    /// `{ρe^{iθ} : 0 ≤ θ ≤ angle, ρ ≤ radius}`.
    Sector { angle: f64, radius: f64 },
    /// `[0, width] × [0, height]`.
    Rectangle { width: f64, height: f64 },
    /// `{Im z ≥ 0, |z| ≤ radius}`.
    UpperHalfDisk { radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub shape: DomainShape,
    /// Radius of the excised neighborhood of the corner at the origin
    /// (polar shapes only).
    pub truncation: f64,
}

impl DomainSpec {
    pub fn sector(angle: f64, radius: f64) -> Self {
        Self {
            shape: DomainShape::Sector { angle, radius },
            truncation: 1e-9 * radius,
        }
    }

    pub fn upper_half_disk(radius: f64) -> Self {
        Self {
            shape: DomainShape::UpperHalfDisk { radius },
            truncation: 1e-9 * radius,
        }
    }

    pub fn rectangle(width: f64, height: f64) -> Self {
        Self {
            shape: DomainShape::Rectangle { width, height },
            truncation: 0.0,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.shape {
            DomainShape::Sector { angle, radius } => {
                if angle >= PI {
                    2.0 * radius
                } else {
                    radius.max(2.0 * radius * (0.5 * angle).sin())
                }
            }
            DomainShape::UpperHalfDisk { radius } => 2.0 * radius,
            DomainShape::Rectangle { width, height } => width.hypot(height),
        }
    }

    /// `(angle, radius)` for polar shapes.
    pub fn polar(&self) -> Option<(f64, f64)> {
        match self.shape {
            DomainShape::Sector { angle, radius } => Some((angle, radius)),
            DomainShape::UpperHalfDisk { radius } => Some((PI, radius)),
            DomainShape::Rectangle { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let ok = match self.shape {
            DomainShape::Sector { angle, radius } => {
                angle > 0.0 && angle <= 2.0 * PI && radius > 0.0
            }
            DomainShape::UpperHalfDisk { radius } => radius > 0.0,
            DomainShape::Rectangle { width, height } => width > 0.0 && height > 0.0,
        };
        if !ok {
            return Err(LabError::InvalidCurve(format!(
                "degenerate domain {:?}",
                self.shape
            )));
        }
        if !(self.truncation >= 0.0 && self.truncation < self.diameter() / 10.0) {
            return Err(LabError::InvalidCurve(format!(
                "truncation {} must be below a tenth of the diameter {}",
                self.truncation,
                self.diameter()
            )));
        }
        Ok(())
    }

    /// Interior sample points away from corners.
    pub fn interior_samples(&self, count: usize) -> Vec<Complex64> {
        let side = (count as f64).sqrt().ceil() as usize;
        let mut out = Vec::new();
        for i in 0..side {
            for j in 0..side {
                let a = (i as f64 + 0.5) / side as f64;
                let b = (j as f64 + 0.5) / side as f64;
                out.push(match self.shape {
                    DomainShape::Rectangle { width, height } => {
                        Complex64::new(a * width, b * height)
                    }
                    _ => {
                        let (angle, radius) = self.polar().expect("polar");
                        Complex64::from_polar(radius * (0.1 + 0.8 * a), angle * b)
                    }
                });
            }
        }
        out
    }
}

/// Target plane of a boundary arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lagrangian {
    L1,
    L2,
}

/// Distance from `p` to the plane.
pub fn plane_distance(p: &Point, k: usize, plane: Lagrangian) -> f64 {
    match plane {
        Lagrangian::L1 => rho1(p).sqrt(),
        Lagrangian::L2 => rho2(p, k).sqrt(),
    }
}

/// A straight boundary segment of the domain, `z(τ) = from + (to − from)τ²`
/// for `τ ∈ [0, 1]` (the quadratic parameter tames endpoint singularities
/// at `from`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArc {
    pub from: Complex64,
    pub to: Complex64,
    pub label: Lagrangian,
}

impl BoundaryArc {
    pub fn at(&self, tau: f64) -> Complex64 {
        self.from + (self.to - self.from) * (tau * tau)
    }

    /// `dz/dτ`.
    pub fn velocity(&self, tau: f64) -> Complex64 {
        (self.to - self.from) * (2.0 * tau)
    }
}

/// A holomorphic map from a planar domain to `ℂⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub name: String,
    /// Index `k` of the model pair the labels refer to.
    pub k: usize,
    pub components: Vec<HolomorphicExpr>,
    pub domain: DomainSpec,
    pub arcs: Vec<BoundaryArc>,
}

/// Residuals of the curve invariants.
#[derive(Clone, Debug, Serialize)]
pub struct CurveResiduals {
    pub cauchy_riemann: f64,
    pub derivative_mismatch: f64,
    pub boundary_label: f64,
}

impl CurveResiduals {
    pub fn ok(&self) -> bool {
        self.cauchy_riemann <= CURVE_TOL && self.boundary_label <= CURVE_TOL
    }
}

fn richardson(f: impl Fn(f64) -> Complex64, h: f64) -> Complex64 {
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (d(0.5 * h) * 4.0 - d(h)) / 3.0
}

impl CurveSpec {
    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        self.components.iter().map(|c| c.value(z)).collect()
    }

    pub fn derivative(&self, z: Complex64) -> Vec<Complex64> {
        self.components.iter().map(|c| c.derivative(z)).collect()
    }

    pub fn point(&self, z: Complex64) -> Point {
        to_point(&self.eval(z))
    }

    /// Coordinates of `u` as plane jets in `(Re z, Im z)`, split into the
    /// real and imaginary blocks.
    pub fn pullback_jets(&self, z: Complex64) -> (Vec<PlaneJet>, Vec<PlaneJet>) {
        let mut x = Vec::with_capacity(self.n());
        let mut y = Vec::with_capacity(self.n());
        for c in &self.components {
            let (u, d, dd) = (c.value(z), c.derivative(z), c.second_derivative(z));
            // ∂_a u = u′, ∂_b u = iu′, ∂_aa u = u″, ∂_ab u = iu″, ∂_bb u = −u″.
            x.push(PlaneJet {
                value: u.re,
                gradient: [d.re, -d.im],
                hessian: [dd.re, -dd.im, -dd.re],
            });
            y.push(PlaneJet {
                value: u.im,
                gradient: [d.im, d.re],
                hessian: [dd.im, dd.re, -dd.im],
            });
        }
        (x, y)
    }

    /// `Σⱼ |uⱼ′(z)|²`.
    pub fn energy_density(&self, z: Complex64) -> f64 {
        self.derivative(z).iter().map(|d| d.norm_sqr()).sum()
    }

    /// Outer-coordinate values where some component maps a ray into an axis.
    pub fn breakpoints(&self) -> Vec<f64> {
        let Some((angle, _)) = self.domain.polar() else {
            return Vec::new();
        };
        let mut b: Vec<f64> = self
            .components
            .iter()
            .flat_map(|c| c.axis_rays(angle))
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Cauchy–Riemann residual `|∂_y u − i ∂_x u| / max(1, |∂_x u|)` from
    /// Richardson-extrapolated central differences, the mismatch between the
    /// difference quotient and the analytic derivative, and the boundary
    /// label residual.
    pub fn residuals(&self, samples: usize) -> CurveResiduals {
        let h = 1e-3 * self.domain.diameter();
        let mut cr = 0.0_f64;
        let mut mismatch = 0.0_f64;
        for z in self.domain.interior_samples(samples) {
            for (c, d) in self.components.iter().zip(self.derivative(z)) {
                let ux = richardson(|t| c.value(z + Complex64::new(t, 0.0)), h);
                let uy = richardson(|t| c.value(z + Complex64::new(0.0, t)), h);
                let scale = ux.norm().max(1.0);
                cr = cr.max((uy - Complex64::i() * ux).norm() / scale);
                mismatch = mismatch.max((ux - d).norm() / scale);
            }
        }
        let mut label = 0.0_f64;
        for arc in &self.arcs {
            for i in 0..=samples {
                let p = self.point(arc.at(i as f64 / samples as f64));
                label = label.max(plane_distance(&p, self.k, arc.label) / p.norm().max(1.0));
            }
        }
        CurveResiduals {
            cauchy_riemann: cr,
            derivative_mismatch: mismatch,
            boundary_label: label,
        }
    }

    /// Rejects curves violating the holomorphy or boundary invariants.
    pub fn validated(self) -> Result<Self, LabError> {
        self.domain.validate()?;
        if self.components.is_empty() || self.k > self.n() {
            return Err(LabError::InvalidCurve(format!(
                "{}: need n >= 1 components and k <= n",
                self.name
            )));
        }
        let r = self.residuals(64);
        if !r.ok() {
            return Err(LabError::InvalidCurve(format!(
                "{}: Cauchy-Riemann residual {:.2e}, boundary residual {:.2e}",
                self.name, r.cauchy_riemann, r.boundary_label
            )));
        }
        Ok(self)
    }
}

pub fn to_point(u: &[Complex64]) -> Point {
    Point {
        x: u.iter().map(|c| c.re).collect(),
        y: u.iter().map(|c| c.im).collect(),
    }
}

/// Straight boundary rays of a polar domain, from the corner outwards.
fn polar_rays(domain: &DomainSpec) -> Vec<Complex64> {
    let (angle, radius) = domain.polar().expect("polar domain");
    vec![
        Complex64::new(radius, 0.0),
        Complex64::from_polar(radius, angle),
    ]
}

/// Labels each ray by the plane containing its image, or rejects the curve.
fn label_rays(
    name: &str,
    k: usize,
    components: &[HolomorphicExpr],
    ends: Vec<Complex64>,
) -> Result<Vec<BoundaryArc>, LabError> {
    let mut arcs = Vec::new();
    for end in ends {
        let images: Vec<Point> = (1..=32)
            .map(|i| {
                to_point(
                    &components
                        .iter()
                        .map(|c| c.value(end * (i as f64 / 32.0)))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        let fits = |plane| {
            images
                .iter()
                .all(|p| plane_distance(p, k, plane) <= CURVE_TOL * p.norm().max(1.0))
        };
        let label = if fits(Lagrangian::L1) {
            Lagrangian::L1
        } else if fits(Lagrangian::L2) {
            Lagrangian::L2
        } else {
            return Err(LabError::InvalidCurve(format!(
                "{name}: boundary ray to {end} is not mapped into a model plane"
            )));
        };
        arcs.push(BoundaryArc {
            from: Complex64::new(0.0, 0.0),
            to: end,
            label,
        });
    }
    Ok(arcs)
}

/// `u(z) = z` on the quarter disk of radius `R`.
pub fn make_sector_inclusion(radius: f64) -> Result<CurveSpec, LabError> {
    make_polynomial_curve(
        "sector",
        &[vec![0.0, 1.0]],
        DomainSpec::sector(FRAC_PI_2, radius),
        0,
    )
}

/// `u(z) = c·z^{m/2}` on the upper half disk of radius `R`.
pub fn make_power_curve(m: u32, c: f64, radius: f64) -> Result<CurveSpec, LabError> {
    make_power_curve_on(
        m,
        Complex64::new(c, 0.0),
        DomainSpec::upper_half_disk(radius),
    )
}

/// `u(z) = c·z^{m/2}` on a polar domain.
pub fn make_power_curve_on(
    m: u32,
    c: Complex64,
    domain: DomainSpec,
) -> Result<CurveSpec, LabError> {
    if m == 0 || c == Complex64::new(0.0, 0.0) {
        return Err(LabError::InvalidCurve(
            "power curve needs m >= 1 and c != 0".into(),
        ));
    }
    if domain.polar().is_none() {
        return Err(LabError::InvalidCurve(
            "power curves live on polar domains".into(),
        ));
    }
    let name = if m % 2 == 0 {
        format!("z^{}", m / 2)
    } else {
        format!("z^({m}/2)")
    };
    let components = vec![HolomorphicExpr::HalfPower { c, m }];
    let arcs = label_rays(&name, 0, &components, polar_rays(&domain))?;
    CurveSpec {
        name,
        k: 0,
        components,
        domain,
        arcs,
    }
    .validated()
}

/// Real-coefficient polynomial of a single parity on the quarter disk: the
/// real axis maps to `ℝ` and the imaginary axis to `ℝ` (even) or `√−1ℝ` (odd).
pub fn make_reflected_polynomial(coeffs: &[f64], radius: f64) -> Result<CurveSpec, LabError> {
    let name = format!("poly{coeffs:?}");
    make_polynomial_curve(
        &name,
        &[coeffs.to_vec()],
        DomainSpec::sector(FRAC_PI_2, radius),
        0,
    )
}

/// Polynomial components with real coefficients on a polar domain.
pub fn make_polynomial_curve(
    name: &str,
    coeffs: &[Vec<f64>],
    domain: DomainSpec,
    k: usize,
) -> Result<CurveSpec, LabError> {
    if domain.polar().is_none() {
        return Err(LabError::InvalidCurve(
            "polynomial curves live on polar domains".into(),
        ));
    }
    let components: Vec<HolomorphicExpr> = coeffs
        .iter()
        .map(|c| HolomorphicExpr::Polynomial {
            coeffs: c.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        })
        .collect();
    let arcs = label_rays(name, k, &components, polar_rays(&domain))?;
    CurveSpec {
        name: name.to_string(),
        k,
        components,
        domain,
        arcs,
    }
    .validated()
}

/// The default family for `n = 1, k = 0`: the sector inclusion, `z^{1/2}`
/// and `z^{3/2}` on the upper half disk, `z²` and `z + z³/5` on the quarter
/// disk.
pub fn default_family(radius: f64) -> Result<Vec<CurveSpec>, LabError> {
    let mut square = make_reflected_polynomial(&[0.0, 0.0, 1.0], radius)?;
    square.name = "z^2".into();
    let mut cubic = make_reflected_polynomial(&[0.0, 1.0, 0.0, 0.2], radius)?;
    cubic.name = "z+z^3/5".into();
    Ok(vec![
        make_sector_inclusion(radius)?,
        make_power_curve(1, 1.0, radius)?,
        make_power_curve(3, 1.0, radius)?,
        square,
        cubic,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn branch_of_half_powers() {
        let e = HolomorphicExpr::HalfPower {
            c: Complex64::new(1.0, 0.0),
            m: 1,
        };
        let v = e.value(Complex64::new(-4.0, 0.0));
        assert_relative_eq!(v.re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(v.im, 2.0, epsilon = 1e-15);
        let e3 = HolomorphicExpr::HalfPower {
            c: Complex64::new(1.0, 0.0),
            m: 3,
        };
        let v = e3.value(Complex64::new(-1.0, 0.0));
        assert_relative_eq!(v.im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn family_is_valid() {
        let fam = default_family(1.0).unwrap();
        assert_eq!(fam.len(), 5);
        for c in &fam {
            let r = c.residuals(64);
            assert!(r.ok(), "{}: {r:?}", c.name);
            assert!(r.derivative_mismatch < 1e-8, "{}: {r:?}", c.name);
        }
        let labels: Vec<Lagrangian> = fam[3].arcs.iter().map(|a| a.label).collect();
        assert_eq!(labels, vec![Lagrangian::L2, Lagrangian::L2]);
        let labels: Vec<Lagrangian> = fam[1].arcs.iter().map(|a| a.label).collect();
        assert_eq!(labels, vec![Lagrangian::L2, Lagrangian::L1]);
    }

    #[test]
    fn second_derivatives() {
        let z = Complex64::new(0.3, 0.4);
        let exprs = [
            HolomorphicExpr::HalfPower {
                c: Complex64::new(1.0, 0.5),
                m: 3,
            },
            HolomorphicExpr::Polynomial {
                coeffs: vec![
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 2.0),
                    Complex64::new(3.0, 0.0),
                    Complex64::new(0.5, 0.0),
                ],
            },
        ];
        for e in exprs {
            let fd = richardson(|t| e.derivative(z + Complex64::new(t, 0.0)), 1e-3);
            assert!((fd - e.second_derivative(z)).norm() < 1e-9);
        }
    }

    #[test]
    fn mixed_parity_polynomial_rejected() {
        assert!(make_reflected_polynomial(&[0.0, 1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn z_three_halves_axis_ray() {
        let c = make_power_curve(3, 1.0, 1.0).unwrap();
        let b = c.breakpoints();
        assert_eq!(b.len(), 2);
        assert_relative_eq!(b[0], PI / 3.0, epsilon = 1e-15);
        assert_relative_eq!(b[1], 2.0 * PI / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn truncation_bound_enforced() {
        let mut d = DomainSpec::sector(FRAC_PI_2, 1.0);
        d.truncation = 0.5;
        assert!(d.validate().is_err());
    }
}
