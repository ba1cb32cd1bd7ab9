//! Adaptive Gauss–Legendre quadrature over regions cut out by a predicate.
//!
//! Two-dimensional integrals are iterated: an adaptive outer rule over one
//! coordinate, and for each outer node a set of inner intervals on which the
//! predicate holds, each integrated adaptively. Outer panels are split where
//! the combinatorics of the inner intervals change, so every outer panel
//! integrates a smooth function.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

const ORDER: usize = 16;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(NonZeroUsize::new(ORDER).expect("nonzero"))
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Tolerances for the adaptive rules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Absolute error target for one integral.
    pub tol: f64,
    /// Maximum bisection depth of a panel.
    pub max_depth: usize,
    /// Uniform samples per line when locating region boundaries.
    pub line_samples: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_depth: 16,
            line_samples: 64,
        }
    }
}

/// Value and accumulated error estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }
}

fn gl<F>(f: &mut F, a: f64, b: f64) -> Result<f64, LabError>
where
    F: FnMut(f64) -> Result<f64, LabError>,
{
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut sum = 0.0;
    for &(x, w) in rule() {
        sum += w * f(mid + half * x)?;
    }
    Ok(half * sum)
}

/// Adaptive Gauss–Legendre on `[a, b]`: a panel is accepted when its rule
/// and the sum over its halves agree to `max(tol / 2^depth, tol / 64)`.
/// Panels still above that at `max_depth` are kept, and the call fails if
/// the summed error estimate exceeds `tol`.
pub fn adaptive<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate, LabError>
where
    F: FnMut(f64) -> Result<f64, LabError>,
{
    if b <= a {
        return Ok(Estimate::default());
    }
    let whole = gl(&mut f, a, b)?;
    let e = recurse(&mut f, a, b, whole, spec.tol, 0, spec)?;
    if e.error > spec.tol {
        return Err(LabError::Quadrature(format!(
            "error estimate {:.2e} above target {:.2e} on [{a}, {b}] after {} levels",
            e.error, spec.tol, spec.max_depth
        )));
    }
    Ok(e)
}

fn recurse<F>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    spec: &QuadratureSpec,
) -> Result<Estimate, LabError>
where
    F: FnMut(f64) -> Result<f64, LabError>,
{
    let m = 0.5 * (a + b);
    let left = gl(f, a, m)?;
    let right = gl(f, m, b)?;
    let err = (left + right - whole).abs();
    let cell_tol = tol.max(spec.tol / 64.0);
    if err <= cell_tol || m <= a || m >= b || depth >= spec.max_depth {
        return Ok(Estimate {
            value: left + right,
            error: err,
        });
    }
    let l = recurse(f, a, m, left, 0.5 * tol, depth + 1, spec)?;
    let r = recurse(f, m, b, right, 0.5 * tol, depth + 1, spec)?;
    Ok(l + r)
}

/// Indicator of a region along a line, with an identifier of the constraint
/// that is closest to binding. The identifier feeds the structural signature
/// used to split outer panels.
pub trait LinePredicate {
    fn inside(&self, t: f64) -> Result<bool, LabError>;
    fn branch(&self, t: f64) -> Result<u8, LabError>;
}

/// Maximal subintervals of `[lo, hi]` where the predicate holds, together
/// with a signature recording, per endpoint, whether it is a domain end or a
/// crossing and which constraint binds there.
pub fn inside_intervals(
    pred: &dyn LinePredicate,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<(Vec<(f64, f64)>, Vec<u8>), LabError> {
    let mut ts: Vec<f64> = (0..=samples)
        .map(|i| lo + (hi - lo) * i as f64 / samples as f64)
        .collect();
    if lo > 0.0 && hi / lo > 4.0 {
        let geo = samples / 2;
        let ratio = (hi / lo).ln();
        ts.extend((1..geo).map(|i| lo * (ratio * i as f64 / geo as f64).exp()));
        ts.sort_by(f64::total_cmp);
        ts.dedup();
    }
    let flags = ts
        .iter()
        .map(|&t| pred.inside(t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut intervals = Vec::new();
    let mut signature = Vec::new();
    let mut start = if flags[0] { Some(lo) } else { None };
    if flags[0] {
        signature.push(0);
    }
    for i in 1..ts.len() {
        if flags[i] == flags[i - 1] {
            continue;
        }
        let (mut a, mut b) = (ts[i - 1], ts[i]);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if pred.inside(m)? == flags[i - 1] {
                a = m;
            } else {
                b = m;
            }
        }
        let crossing = 0.5 * (a + b);
        signature.push(1 + pred.branch(crossing)?);
        if flags[i] {
            start = Some(crossing);
        } else if let Some(s) = start.take() {
            intervals.push((s, crossing));
        }
    }
    if let Some(s) = start {
        intervals.push((s, hi));
        signature.push(0);
    }
    Ok((intervals, signature))
}

/// Adaptive outer integral of `inner(θ)` over `[a, b]`, with panels split at
/// changes of the signature returned by `signature(θ)` and at `breaks`.
pub fn outer_integral<I, S>(
    mut inner: I,
    mut signature: S,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate, LabError>
where
    I: FnMut(f64) -> Result<f64, LabError>,
    S: FnMut(f64) -> Result<Vec<u8>, LabError>,
{
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut fine = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        fine.push(lo);
        let probes = 32;
        let mut prev_t = lo + (hi - lo) * 1e-9;
        let mut prev = signature(prev_t)?;
        for i in 1..=probes {
            let t = if i == probes {
                hi - (hi - lo) * 1e-9
            } else {
                lo + (hi - lo) * i as f64 / probes as f64
            };
            let cur = signature(t)?;
            if cur != prev {
                let (mut x, mut y) = (prev_t, t);
                for _ in 0..80 {
                    let m = 0.5 * (x + y);
                    if m <= x || m >= y {
                        break;
                    }
                    if signature(m)? == prev {
                        x = m;
                    } else {
                        y = m;
                    }
                }
                fine.push(0.5 * (x + y));
            }
            prev = cur;
            prev_t = t;
        }
    }
    fine.push(b);
    fine.dedup();

    let share = QuadratureSpec {
        tol: spec.tol / (fine.len() - 1) as f64,
        ..*spec
    };
    let mut total = Estimate::default();
    for w in fine.windows(2) {
        total = total + adaptive(&mut inner, w[0], w[1], &share)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Below(f64);
    impl LinePredicate for Below {
        fn inside(&self, t: f64) -> Result<bool, LabError> {
            Ok(t < self.0)
        }
        fn branch(&self, _t: f64) -> Result<u8, LabError> {
            Ok(0)
        }
    }

    #[test]
    fn polynomial_exact() {
        let spec = QuadratureSpec::default();
        let e = adaptive(|x| Ok(x.powi(7) - 3.0 * x), 0.0, 2.0, &spec).unwrap();
        assert_relative_eq!(e.value, 32.0 - 6.0, epsilon = 1e-12);
    }

    #[test]
    fn interval_location() {
        let (iv, sig) = inside_intervals(&Below(0.37), 0.0, 1.0, 16).unwrap();
        assert_eq!(iv.len(), 1);
        assert_relative_eq!(iv[0].1, 0.37, epsilon = 1e-15);
        assert_eq!(sig, vec![0, 1]);
    }

    #[test]
    fn kinked_outer_integrand() {
        // ∫₀¹ min(t, 0.3) dt split at the kink found through the signature.
        let spec = QuadratureSpec::default();
        let e = outer_integral(
            |t| Ok(t.min(0.3)),
            |t| Ok(vec![u8::from(t < 0.3)]),
            0.0,
            1.0,
            &[],
            &spec,
        )
        .unwrap();
        assert_relative_eq!(e.value, 0.045 + 0.21, epsilon = 1e-13);
    }

    #[test]
    fn stalls_report_error() {
        let spec = QuadratureSpec {
            tol: 1e-14,
            max_depth: 2,
            line_samples: 8,
        };
        assert!(adaptive(|x: f64| Ok(x.abs().sqrt()), -1.0, 1.0, &spec).is_err());
    }
}
