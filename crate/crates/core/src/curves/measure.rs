//! Lengths, areas and the isoperimetric ratio of curves against model regions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::quadrature::{
    adaptive, inside_intervals, outer_integral, Estimate, LinePredicate, QuadratureSpec,
};
use super::{CurveSpec, DomainShape};
use crate::error::LabError;
use crate::jet::{Formula, Point, ScalarField};
use crate::levi::apply_j;
use crate::model::{rho1, rho2, SquaredSqrtModel};

/// Target-space region a measurement is restricted to.
#[derive(Clone, Debug)]
pub enum RegionSpec {
    /// All of `ℂⁿ`.
    All,
    /// `U_s = {ρ₁ < s²} ∪ {ρ₂ < s²}`.
    Tubes { s: f64 },
    /// `B = {max(√ρ₁, √ρ₂) < radius}`.
    Ball { radius: f64 },
    /// Complement of [`RegionSpec::Ball`].
    OutsideBall { radius: f64 },
    /// `{h ≤ t²}`.
    Sublevel { t: f64, h: SquaredSqrtModel },
}

impl RegionSpec {
    pub fn contains(&self, p: &Point, k: usize) -> bool {
        match self {
            RegionSpec::All => true,
            RegionSpec::Tubes { s } => rho1(p) < s * s || rho2(p, k) < s * s,
            RegionSpec::Ball { radius } => rho1(p).max(rho2(p, k)) < radius * radius,
            RegionSpec::OutsideBall { radius } => rho1(p).max(rho2(p, k)) >= radius * radius,
            RegionSpec::Sublevel { t, h } => h.value_unchecked(p) <= t * t,
        }
    }

    /// Which defining constraint is closest to binding at `p`.
    pub fn branch(&self, p: &Point, k: usize) -> u8 {
        let (a, b) = (rho1(p), rho2(p, k));
        match self {
            RegionSpec::All | RegionSpec::Sublevel { .. } => 0,
            RegionSpec::Tubes { s } => u8::from((b - s * s).abs() < (a - s * s).abs()),
            RegionSpec::Ball { .. } | RegionSpec::OutsideBall { .. } => u8::from(b > a),
        }
    }
}

/// An integral with its quadrature error estimate and the bound on the
/// contribution of the excised corner neighborhood.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Measurement {
    pub value: f64,
    pub error: f64,
    pub excision: f64,
}

struct Line<'a> {
    curve: &'a CurveSpec,
    region: &'a RegionSpec,
    at: Box<dyn Fn(f64) -> Complex64 + 'a>,
}

impl LinePredicate for Line<'_> {
    fn inside(&self, t: f64) -> Result<bool, LabError> {
        Ok(self
            .region
            .contains(&self.curve.point((self.at)(t)), self.curve.k))
    }

    fn branch(&self, t: f64) -> Result<u8, LabError> {
        Ok(self
            .region
            .branch(&self.curve.point((self.at)(t)), self.curve.k))
    }
}

/// Integral of `density(z)` over `{z ∈ domain : u(z) ∈ region}` in the
/// planar measure.
fn domain_integral<F>(
    curve: &CurveSpec,
    region: &RegionSpec,
    density: F,
    spec: &QuadratureSpec,
) -> Result<Measurement, LabError>
where
    F: Fn(Complex64) -> Result<f64, LabError>,
{
    // (outer range, inner range, point map, jacobian)
    let (outer, inner_lo, inner_hi, polar) = match curve.domain.shape {
        DomainShape::Rectangle { width, height } => ((0.0, width), 0.0, height, false),
        _ => {
            let (angle, radius) = curve.domain.polar().expect("polar");
            ((0.0, angle), curve.domain.truncation, radius, true)
        }
    };
    let to_z = move |o: f64, i: f64| {
        if polar {
            Complex64::from_polar(i, o)
        } else {
            Complex64::new(o, i)
        }
    };
    let inner_tol = QuadratureSpec {
        tol: spec.tol / (16.0 * (outer.1 - outer.0)),
        ..*spec
    };
    let line = |o: f64| Line {
        curve,
        region,
        at: Box::new(move |i| to_z(o, i)),
    };
    let inner = |o: f64| -> Result<f64, LabError> {
        let (intervals, _) = inside_intervals(&line(o), inner_lo, inner_hi, spec.line_samples)?;
        let mut sum = 0.0;
        for (a, b) in intervals {
            sum += adaptive(
                |i| Ok(density(to_z(o, i))? * if polar { i } else { 1.0 }),
                a,
                b,
                &inner_tol,
            )?
            .value;
        }
        Ok(sum)
    };
    let signature =
        |o: f64| Ok(inside_intervals(&line(o), inner_lo, inner_hi, spec.line_samples)?.1);
    let Estimate { value, error } = outer_integral(
        inner,
        signature,
        outer.0,
        outer.1,
        &curve.breakpoints(),
        spec,
    )?;

    let mut excision = 0.0;
    if polar && inner_lo > 0.0 {
        // Radial profiles `ρ·density` of the supported curves are monotone
        // near the corner, so the sup on the cut circle bounds the excised part.
        let angle = outer.1;
        let mut peak = 0.0_f64;
        for j in 0..=64 {
            let z = to_z(angle * j as f64 / 64.0, inner_lo);
            peak = peak.max(density(z)?.abs() * inner_lo);
        }
        excision = angle * inner_lo * peak;
    }
    Ok(Measurement {
        value,
        error,
        excision,
    })
}

/// g-area `∫∫ Σⱼ|uⱼ′|²` of the part of the domain mapped into `region`,
/// counted with multiplicity.
pub fn area_g(
    curve: &CurveSpec,
    region: &RegionSpec,
    spec: &QuadratureSpec,
) -> Result<Measurement, LabError> {
    domain_integral(curve, region, |z| Ok(curve.energy_density(z)), spec)
}

/// g-length of the image of the straight boundary arcs restricted to `region`.
pub fn length_g(
    curve: &CurveSpec,
    region: &RegionSpec,
    spec: &QuadratureSpec,
) -> Result<Measurement, LabError> {
    let mut total = Measurement::default();
    let tol = QuadratureSpec {
        tol: spec.tol / curve.arcs.len().max(1) as f64,
        ..*spec
    };
    for arc in &curve.arcs {
        let line = Line {
            curve,
            region,
            at: Box::new(|t| arc.at(t)),
        };
        let (intervals, _) = inside_intervals(&line, 0.0, 1.0, spec.line_samples)?;
        let share = QuadratureSpec {
            tol: tol.tol / intervals.len().max(1) as f64,
            ..tol
        };
        for (a, b) in intervals {
            let e = adaptive(
                |t| Ok(curve.energy_density(arc.at(t)).sqrt() * arc.velocity(t).norm()),
                a,
                b,
                &share,
            )?;
            total.value += e.value;
            total.error += e.error;
        }
    }
    Ok(total)
}

/// `vᵀ(H + JᵀHJ)v` for the Hessian `H` of `h` at `u(z)`, with `v` the real
/// coordinates of `u′(z)`.
pub fn levi_density(curve: &CurveSpec, h: &dyn ScalarField, z: Complex64) -> Result<f64, LabError> {
    let d = curve.derivative(z);
    let v: Vec<f64> = d
        .iter()
        .map(|c| c.re)
        .chain(d.iter().map(|c| c.im))
        .collect();
    let jv = apply_j(&v)?;
    let hess = h.eval(&curve.point(z))?.hessian;
    let quad = |w: &[f64]| -> f64 {
        let mut s = 0.0;
        for (i, wi) in w.iter().enumerate() {
            for (j, wj) in w.iter().enumerate() {
                s += wi * hess[(i, j)] * wj;
            }
        }
        s
    };
    Ok(quad(&v) + quad(&jv))
}

/// Laplacian of `h ∘ u` at `z`; for holomorphic `u` this equals
/// [`levi_density`].
pub fn pullback_laplacian<F: Formula>(curve: &CurveSpec, h: &F, z: Complex64) -> f64 {
    let (x, y) = curve.pullback_jets(z);
    h.evaluate(&x, &y).laplacian()
}

/// `∫∫_{h(u) ≤ t²} dd^c h` evaluated on the curve tangent.
pub fn area_h(
    curve: &CurveSpec,
    h: &SquaredSqrtModel,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<Measurement, LabError> {
    if h.n != curve.n() || h.k != curve.k {
        return Err(LabError::Dimension(format!(
            "h is defined for (n, k) = ({}, {}), curve {} has ({}, {})",
            h.n,
            h.k,
            curve.name,
            curve.n(),
            curve.k
        )));
    }
    let region = RegionSpec::Sublevel { t, h: h.clone() };
    domain_integral(
        curve,
        &region,
        |z| Ok(pullback_laplacian(curve, h, z)),
        spec,
    )
}

/// Check that `t ↦ area_h(t) / t` is nondecreasing on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub curve: String,
    pub t: Vec<f64>,
    pub normalized: Vec<f64>,
    /// Largest decrease between consecutive grid values.
    pub max_drop: f64,
    pub tol: f64,
    pub passed: bool,
}

pub const MONOTONICITY_TOL: f64 = 1e-6;

pub fn verify_monotonicity(
    curve: &CurveSpec,
    h: &SquaredSqrtModel,
    t_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<MonotonicityReport, LabError> {
    if t_grid.is_empty() || t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::InvalidArgument(
            "t grid must be positive and strictly increasing".into(),
        ));
    }
    let normalized = t_grid
        .par_iter()
        .map(|&t| Ok(area_h(curve, h, t, spec)?.value / t))
        .collect::<Result<Vec<f64>, LabError>>()?;
    let max_drop = normalized
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(0.0_f64, f64::max);
    Ok(MonotonicityReport {
        curve: curve.name.clone(),
        t: t_grid.to_vec(),
        normalized,
        max_drop,
        tol: MONOTONICITY_TOL,
        passed: max_drop <= MONOTONICITY_TOL,
    })
}

/// `n` equally spaced values in `(0, top]`.
pub fn t_grid(top: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| top * i as f64 / n as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KRow {
    pub curve: String,
    pub s: f64,
    pub length: f64,
    pub area: f64,
    /// `s · length / area`, or 0 when the area vanishes.
    pub k: f64,
    /// Set when the tube area is negligible and the ratio is not meaningful.
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct KTable {
    pub rows: Vec<KRow>,
    pub sup: f64,
    /// Largest relative change of `K` between consecutive `s` values per curve.
    pub drift: Vec<(String, f64)>,
    pub max_drift: f64,
}

/// Area below which the ratio is flagged rather than reported.
pub const AREA_FLOOR: f64 = 1e-12;

/// `K(s, u) = s · length_g(∂u ∩ Bᶜ) / area_g(u ∩ U_s)` over a family and
/// an `s` grid.
pub fn estimate_k(
    family: &[CurveSpec],
    s_grid: &[f64],
    ball_radius: f64,
    spec: &QuadratureSpec,
) -> Result<KTable, LabError> {
    if family.is_empty() {
        return Err(LabError::InvalidArgument("empty curve family".into()));
    }
    if s_grid.is_empty() || s_grid.iter().any(|&s| s <= 0.0) {
        return Err(LabError::InvalidArgument(
            "s values must be positive".into(),
        ));
    }
    let lengths = family
        .par_iter()
        .map(|c| {
            Ok(length_g(
                c,
                &RegionSpec::OutsideBall {
                    radius: ball_radius,
                },
                spec,
            )?
            .value)
        })
        .collect::<Result<Vec<f64>, LabError>>()?;
    let jobs: Vec<(usize, f64)> = (0..family.len())
        .flat_map(|i| s_grid.iter().map(move |&s| (i, s)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, s)| {
            let area = area_g(&family[i], &RegionSpec::Tubes { s }, spec)?.value;
            let flagged = area < AREA_FLOOR;
            Ok(KRow {
                curve: family[i].name.clone(),
                s,
                length: lengths[i],
                area,
                k: if flagged { 0.0 } else { s * lengths[i] / area },
                flagged,
            })
        })
        .collect::<Result<Vec<KRow>, LabError>>()?;
    let sup = rows.iter().map(|r| r.k).fold(0.0_f64, f64::max);
    let mut drift = Vec::new();
    for (i, c) in family.iter().enumerate() {
        let ks: Vec<f64> = rows[i * s_grid.len()..(i + 1) * s_grid.len()]
            .iter()
            .map(|r| r.k)
            .collect();
        let d = ks
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| ((w[1] - w[0]) / w[0]).abs())
            .fold(0.0_f64, f64::max);
        drift.push((c.name.clone(), d));
    }
    let max_drift = drift.iter().map(|d| d.1).fold(0.0_f64, f64::max);
    Ok(KTable {
        rows,
        sup,
        drift,
        max_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{make_power_curve, make_sector_inclusion};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn sector_totals() {
        let c = make_sector_inclusion(1.0).unwrap();
        let spec = QuadratureSpec::default();
        let a = area_g(&c, &RegionSpec::All, &spec).unwrap();
        assert_relative_eq!(a.value + a.excision, FRAC_PI_4, epsilon = 1e-8);
        let l = length_g(&c, &RegionSpec::All, &spec).unwrap();
        assert_relative_eq!(l.value, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn sqrt_curve_length() {
        let c = make_power_curve(1, 1.0, 1.0).unwrap();
        let l = length_g(&c, &RegionSpec::All, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(l.value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn laplacian_matches_levi_form() {
        let h = SquaredSqrtModel {
            n: 1,
            k: 0,
            r: 1.0,
            c0: 5.0,
        };
        for c in crate::curves::default_family(1.0).unwrap() {
            for z in c.domain.interior_samples(25) {
                let a = levi_density(&c, &h, z).unwrap();
                let b = pullback_laplacian(&c, &h, z);
                assert!(
                    (a - b).abs() <= 1e-10 * a.abs().max(1.0),
                    "{} {z}: {a} vs {b}",
                    c.name
                );
            }
        }
    }

    #[test]
    fn identity_levi_density_of_rho1() {
        let c = make_sector_inclusion(1.0).unwrap();
        let f = crate::model::Rho1 { n: 1 };
        let v = levi_density(&c, &f, Complex64::new(0.3, 0.2)).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-14);
    }
}
