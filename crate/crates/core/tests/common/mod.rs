//! Shared sampling and oracle helpers for the integration tests.
#![allow(dead_code)]

use psh_lab::model::{
    AbouzaidRho, Beta, CutoffProfile, HDuval, HPre, Rho1, Rho2, RhoProduct, SqrtBetaModified,
    SqrtHDuval, SqrtRhoProduct, SquaredSqrtModel, YNormSquared,
};
use psh_lab::{fd_hessian, ModelParams, Point, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half..half)).collect()
}

/// Uniform point in `[−half, half]²ⁿ`.
pub fn box_point(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Point {
    Point::new(uniform(rng, n, half), uniform(rng, n, half)).unwrap()
}

fn unit(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let v = uniform(rng, m, 1.0);
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 0.1 && norm <= 1.0 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// A point at distance `delta` from `L₁` (`plane = 0`) or `L₂` (`plane = 1`),
/// with its foot in the box of radius `half`.
pub fn near_plane(
    rng: &mut ChaCha8Rng,
    n: usize,
    k: usize,
    plane: u8,
    delta: f64,
    half: f64,
) -> Point {
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    if plane == 0 {
        y = uniform(rng, n, half);
        x = unit(rng, n).into_iter().map(|c| c * delta).collect();
    } else {
        for i in 0..n {
            if i < k {
                y[i] = rng.gen_range(-half..half);
            } else {
                x[i] = rng.gen_range(-half..half);
            }
        }
        let u = unit(rng, n);
        for i in 0..n {
            if i < k {
                x[i] = u[i] * delta;
            } else {
                y[i] = u[i] * delta;
            }
        }
    }
    Point::new(x, y).unwrap()
}

/// `√min(ρ₁, ρ₂)`.
pub fn plane_distance(p: &Point, k: usize) -> f64 {
    psh_lab::model::rho1(p)
        .min(psh_lab::model::rho2(p, k))
        .sqrt()
}

pub struct FieldCase {
    pub field: Box<dyn ScalarField>,
    pub k: usize,
    pub sample: Box<dyn Fn(&mut ChaCha8Rng) -> Point>,
    /// Finite-difference step for a sample.
    pub step: Box<dyn Fn(&Point) -> f64>,
}

fn case(
    field: impl ScalarField + 'static,
    k: usize,
    sample: impl Fn(&mut ChaCha8Rng) -> Point + 'static,
    step: impl Fn(&Point) -> f64 + 'static,
) -> FieldCase {
    FieldCase {
        field: Box::new(field),
        k,
        sample: Box::new(sample),
        step: Box::new(step),
    }
}

/// Every implemented field, each with a sampler covering its smooth domain.
pub fn field_cases() -> Vec<FieldCase> {
    let mut out = Vec::new();
    let flat = |_: &Point| 4e-3;
    for (n, k) in [(1, 0), (2, 1), (3, 1)] {
        let boxed = move |r: &mut ChaCha8Rng| box_point(r, n, 1.0);
        let away = move |r: &mut ChaCha8Rng| loop {
            let p = box_point(r, n, 1.0);
            if plane_distance(&p, k) >= 0.02 {
                return p;
            }
        };
        let scaled = move |p: &Point| 4e-3 * (10.0 * plane_distance(p, k)).min(1.0);
        out.push(case(Rho1 { n }, k, boxed, flat));
        out.push(case(Rho2 { n, k }, k, boxed, flat));
        out.push(case(YNormSquared { n }, k, boxed, flat));
        out.push(case(RhoProduct { n, k }, k, boxed, flat));
        out.push(case(SqrtRhoProduct { n, k, eps: 1e-6 }, k, away, scaled));
        out.push(case(Beta { n, k, r: 0.5 }, k, boxed, flat));
        out.push(case(
            SquaredSqrtModel {
                n,
                k,
                r: 0.5,
                c0: 3.0,
            },
            k,
            boxed,
            flat,
        ));
        out.push(case(
            SqrtBetaModified {
                n,
                k,
                r: 0.5,
                c0: 3.0,
                eps: 1e-6,
            },
            k,
            away,
            scaled,
        ));
        let params = ModelParams {
            n,
            k,
            r: 0.5,
            d: 0.1,
            c0: 10.0,
            s: 0.02,
            eps: 1e-6,
        };
        let in_u = move |r: &mut ChaCha8Rng| {
            let plane = r.gen_range(0..2u8);
            let delta = r.gen_range(0.005..0.04);
            near_plane(r, n, k, plane, delta, 1.0)
        };
        out.push(case(
            HPre {
                params: params.clone(),
            },
            k,
            in_u,
            |_| 4e-4,
        ));
        out.push(case(
            HDuval {
                params: params.clone(),
            },
            k,
            in_u,
            |_| 4e-4,
        ));
        out.push(case(SqrtHDuval { params }, k, in_u, scaled));
    }
    for n in [1, 2] {
        for cutoff in [CutoffProfile::Exp, CutoffProfile::Blend] {
            let sample = move |r: &mut ChaCha8Rng| loop {
                let p = box_point(r, n, 1.5);
                if p.x[0].abs() >= 0.02 {
                    return p;
                }
            };
            out.push(case(
                AbouzaidRho {
                    n,
                    cutoff,
                    eps: 1e-6,
                },
                0,
                sample,
                |p: &Point| 4e-3 * (10.0 * p.x[0].abs()).min(1.0),
            ));
        }
    }
    out
}

/// Twice-extrapolated finite-difference Hessian with the step chosen from a geometric sequence
/// starting at `base`: the coarser member of the consecutive pair that agrees best.
pub fn fd_hessian_adaptive(f: &dyn ScalarField, p: &Point, base: f64) -> nalgebra::DMatrix<f64> {
    let estimates: Vec<_> = (0..10)
        .map(|j| {
            let h = base * 0.7_f64.powi(j);
            let coarse = fd_hessian(f, p, h).unwrap();
            let fine = fd_hessian(f, p, 0.5 * h).unwrap();
            (fine * 16.0 - coarse) / 15.0
        })
        .collect();
    let best = (0..estimates.len() - 1)
        .min_by(|&a, &b| {
            let da = (&estimates[a] - &estimates[a + 1]).norm();
            let db = (&estimates[b] - &estimates[b + 1]).norm();
            da.total_cmp(&db)
        })
        .unwrap();
    estimates[best].clone()
}

/// `‖H_AD − H_FD‖ / max(1, ‖H_AD‖)` maximized over `count` samples.
pub fn fd_ad_max_relative(case: &FieldCase, count: usize, seed: u64) -> (f64, Point) {
    use rayon::prelude::*;
    let mut r = rng(seed);
    let samples: Vec<(Point, f64)> = (0..count)
        .map(|_| {
            let p = (case.sample)(&mut r);
            let h = (case.step)(&p);
            (p, h)
        })
        .collect();
    let field = case.field.as_ref();
    samples
        .into_par_iter()
        .map(|(p, h)| {
            let ad = field.eval(&p).unwrap().hessian;
            let fd = fd_hessian_adaptive(field, &p, h);
            ((&ad - &fd).norm() / ad.norm().max(1.0), p)
        })
        .reduce_with(|a, b| if b.0 > a.0 { b } else { a })
        .unwrap()
}
