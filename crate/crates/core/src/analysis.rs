//! Eigenstructure of `dd^c √(αβ)` and `d√(αβ) ∧ d^c√(αβ)`, the product
//! identity for `dd^c(αβ)`, the degeneracy variety `V`, and the cutoff
//! counterexample scan. Throughout, `α = ρ₁` and `β = ρ₂`.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::LabError;
use crate::jet::{Point, ScalarField};
use crate::levi::{apply_j_vec, grad_form_from_gradient, levi_matrix, levi_of_jet, LeviMatrix};
use crate::model::{
    deficiency, rho1, rho2, AbouzaidRho, CutoffProfile, RhoProduct, SqrtRhoProduct,
};

/// A predicted eigenpair `(λ, v)` and its relative residual
/// `‖Mv − λv‖ / max(1, ‖M‖‖v‖)`.
#[derive(Clone, Debug, Serialize)]
pub struct EigenClaim {
    pub point: Point,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub lambda: f64,
    pub residual: f64,
}

/// Outcome of checking one of the two eigenstructure lemmas at a point.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaCheck {
    pub claim: EigenClaim,
    /// Eigenvalue predicted on `span{v, w}^⊥`.
    pub complement_lambda: f64,
    pub complement_residual: f64,
    /// `v` vanished, so only the complement check was performed.
    pub degenerate: bool,
}

impl LemmaCheck {
    pub fn max_residual(&self) -> f64 {
        self.claim.residual.max(self.complement_residual)
    }
}

fn sum_low(p: &Point, k: usize) -> f64 {
    p.x[..k].iter().map(|v| v * v).sum()
}

fn tube_check(p: &Point, k: usize, eps: f64) -> Result<(), LabError> {
    let f = SqrtRhoProduct { n: p.n(), k, eps };
    f.check_domain(p)?;
    Ok(())
}

/// `v₀ = (α yᵢ [i>k] | (β − α[i≤k]) xᵢ)` and `w₀ = −J v₀`.
pub fn eigvectors_m0(
    p: &Point,
    k: usize,
    eps: f64,
) -> Result<(DVector<f64>, DVector<f64>), LabError> {
    tube_check(p, k, eps)?;
    let n = p.n();
    let (a, b) = (rho1(p), rho2(p, k));
    let v = DVector::from_fn(2 * n, |i, _| {
        if i < n {
            if i >= k {
                a * p.y[i]
            } else {
                0.0
            }
        } else {
            let j = i - n;
            let low = if j < k { a } else { 0.0 };
            (b - low) * p.x[j]
        }
    });
    let w = -apply_j_vec(&v);
    Ok((v, w))
}

/// `v₁ = (α yᵢ [i>k] | −(β + α[i≤k]) xᵢ)` and `w₁ = J v₁`.
pub fn eigvectors_m1(
    p: &Point,
    k: usize,
    eps: f64,
) -> Result<(DVector<f64>, DVector<f64>), LabError> {
    tube_check(p, k, eps)?;
    let n = p.n();
    let (a, b) = (rho1(p), rho2(p, k));
    let v = DVector::from_fn(2 * n, |i, _| {
        if i < n {
            if i >= k {
                a * p.y[i]
            } else {
                0.0
            }
        } else {
            let j = i - n;
            let low = if j < k { a } else { 0.0 };
            -(b + low) * p.x[j]
        }
    });
    let w = apply_j_vec(&v);
    Ok((v, w))
}

fn pair_residual(m: &LeviMatrix, v: &DVector<f64>, lambda: f64) -> f64 {
    (m.apply(v) - v * lambda).norm() / (m.norm() * v.norm()).max(1.0)
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)`, by
/// Gram–Schmidt on the standard basis.
pub fn complement_basis(vectors: &[DVector<f64>], dim: usize) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut u = v.clone();
        for b in &basis {
            u -= b * b.dot(&u);
        }
        let norm = u.norm();
        if norm > 1e-12 * v.norm().max(f64::MIN_POSITIVE) {
            basis.push(u / norm);
        }
    }
    let spanned = basis.len();
    for i in 0..dim {
        let mut u = DVector::zeros(dim);
        u[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                u -= b * b.dot(&u);
            }
        }
        let norm = u.norm();
        if norm > 1e-8 {
            basis.push(u / norm);
        }
        if basis.len() == dim {
            break;
        }
    }
    basis.split_off(spanned)
}

fn complement_residual(m: &LeviMatrix, vectors: &[DVector<f64>], lambda: f64) -> f64 {
    let scale = m.norm().max(1.0);
    complement_basis(vectors, 2 * m.n)
        .iter()
        .map(|u| (m.apply(u) - u * lambda).norm() / scale)
        .fold(0.0, f64::max)
}

fn is_negligible(v: &DVector<f64>, p: &Point, k: usize) -> bool {
    let scale = (rho1(p) + rho2(p, k)) * p.norm();
    v.norm() <= 1e-12 * scale
}

fn check_pair(
    p: &Point,
    k: usize,
    m: &LeviMatrix,
    (v, w): (DVector<f64>, DVector<f64>),
    lambda: f64,
    complement_lambda: f64,
) -> LemmaCheck {
    let degenerate = is_negligible(&v, p, k);
    let (residual, span) = if degenerate {
        (0.0, Vec::new())
    } else {
        let r = pair_residual(m, &v, lambda).max(pair_residual(m, &w, lambda));
        (r, vec![v.clone(), w.clone()])
    };
    LemmaCheck {
        claim: EigenClaim {
            point: p.clone(),
            v: v.iter().copied().collect(),
            w: w.iter().copied().collect(),
            lambda,
            residual,
        },
        complement_lambda,
        complement_residual: complement_residual(m, &span, complement_lambda),
        degenerate,
    }
}

/// `M₀ = dd^c √(αβ)`: eigenvalue `2Σ_{i≤k}xᵢ²/√(αβ)` on `span{v₀, w₀}` and
/// `(α+β)/√(αβ)` on its orthogonal complement.
pub fn verify_lemma_m0(p: &Point, k: usize, eps: f64) -> Result<LemmaCheck, LabError> {
    let pair = eigvectors_m0(p, k, eps)?;
    let f = SqrtRhoProduct { n: p.n(), k, eps };
    let m = levi_matrix(&f, p)?;
    let (a, b) = (rho1(p), rho2(p, k));
    let root = (a * b).sqrt();
    Ok(check_pair(
        p,
        k,
        &m,
        pair,
        2.0 * sum_low(p, k) / root,
        (a + b) / root,
    ))
}

/// `M₁ = d√(αβ) ∧ d^c√(αβ)`: eigenvalue `2Σ_{i≤k}xᵢ² + α + β` on
/// `span{v₁, w₁}` and zero on the complement.
pub fn verify_lemma_m1(p: &Point, k: usize, eps: f64) -> Result<LemmaCheck, LabError> {
    let pair = eigvectors_m1(p, k, eps)?;
    let m = m1_matrix(p, k, eps)?;
    let (a, b) = (rho1(p), rho2(p, k));
    Ok(check_pair(p, k, &m, pair, 2.0 * sum_low(p, k) + a + b, 0.0))
}

fn m1_matrix(p: &Point, k: usize, eps: f64) -> Result<LeviMatrix, LabError> {
    let f = SqrtRhoProduct { n: p.n(), k, eps };
    Ok(grad_form_from_gradient(&f.eval(p)?.gradient))
}

/// Ratio of the third-largest eigenvalue of `M₁` to `‖M₁‖`; zero for `n = 1`.
pub fn m1_rank_ratio(p: &Point, k: usize, eps: f64) -> Result<f64, LabError> {
    let m = m1_matrix(p, k, eps)?;
    let s = m.spectrum()?;
    let len = s.eigenvalues.len();
    if len < 3 {
        return Ok(0.0);
    }
    Ok(s.eigenvalues[len - 3].abs() / m.norm().max(f64::MIN_POSITIVE))
}

/// `‖Levi(αβ) − 2√(αβ) M₀ − 2 M₁‖ / max(1, ‖Levi(αβ)‖)`.
pub fn verify_ddcf2(p: &Point, k: usize, eps: f64) -> Result<f64, LabError> {
    let n = p.n();
    let root = SqrtRhoProduct { n, k, eps }.eval(p)?;
    let prod = RhoProduct { n, k }.eval(p)?;
    let lhs = levi_of_jet(&prod);
    let m0 = levi_of_jet(&root);
    let m1 = grad_form_from_gradient(&root.gradient);
    let rhs = &m0.scaled(2.0 * root.value) + &m1.scaled(2.0);
    Ok((&lhs - &rhs).norm() / lhs.norm().max(1.0))
}

/// A point together with its residuals against the equations of `V`:
/// `max_{i≤k} |xᵢ|`, `|Σ_{j>k} xⱼyⱼ|`, `|α − β|`.
#[derive(Clone, Debug, Serialize)]
pub struct VarietySample {
    pub point: Point,
    pub on_variety: bool,
    pub residuals: [f64; 3],
}

pub const VARIETY_TOL: f64 = 1e-10;

pub fn variety_residuals(p: &Point, k: usize) -> [f64; 3] {
    let r1 = p.x[..k].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let r2 = p.x[k..]
        .iter()
        .zip(&p.y[k..])
        .map(|(a, b)| a * b)
        .sum::<f64>()
        .abs();
    let r3 = (rho1(p) - rho2(p, k)).abs();
    [r1, r2, r3]
}

pub fn classify_variety(p: Point, k: usize) -> VarietySample {
    let residuals = variety_residuals(&p, k);
    VarietySample {
        on_variety: residuals.iter().all(|r| *r <= VARIETY_TOL),
        residuals,
        point: p,
    }
}

fn uniform_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Constructive samples of `V`.
///
/// For `n − k = 2` the points alternate between the two planes
/// `{xᵢ = 0 (i ≤ k), xₙ = ±y_{n−1}, yₙ = ∓x_{n−1}}`; for `n − k > 2` a random
/// `a` and a random `b ⟂ a` with `|b| = |a|` fill the last `n − k` slots; for
/// `n − k ≤ 1` the variety is `L₁ ∩ L₂`.
pub fn sample_variety_v(
    n: usize,
    k: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<VarietySample>, LabError> {
    if n == 0 || k > n {
        return Err(LabError::Params(format!(
            "need 0 <= k <= n, n >= 1; got n={n}, k={k}"
        )));
    }
    let m = n - k;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        y[..k].copy_from_slice(&uniform_vec(rng, k));
        match m {
            0 | 1 => {}
            2 => {
                let sigma = if out.len() % 2 == 0 { 1.0 } else { -1.0 };
                let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                x[n - 2] = a;
                y[n - 2] = b;
                x[n - 1] = sigma * b;
                y[n - 1] = -sigma * a;
            }
            _ => {
                let a = DVector::from_vec(uniform_vec(rng, m));
                let mut b = DVector::from_vec(uniform_vec(rng, m));
                let an = a.norm_squared();
                if an < 1e-4 {
                    continue;
                }
                b -= &a * (a.dot(&b) / an);
                let bn = b.norm();
                if bn < 1e-3 {
                    continue;
                }
                b *= an.sqrt() / bn;
                x[k..].copy_from_slice(a.as_slice());
                y[k..].copy_from_slice(b.as_slice());
            }
        }
        out.push(classify_variety(Point { x, y }, k));
    }
    Ok(out)
}

/// Rejection samples in `[−1, 1]²ⁿ` at distance at least `margin` from
/// `L₁ ∪ L₂` and with some defining equation of `V` violated by `margin`.
pub fn sample_off_v(
    n: usize,
    k: usize,
    count: usize,
    margin: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<VarietySample>, LabError> {
    if n == 0 || k > n {
        return Err(LabError::Params(format!(
            "need 0 <= k <= n, n >= 1; got n={n}, k={k}"
        )));
    }
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) {
            return Err(LabError::Infeasible(format!(
                "could not find off-V points at margin {margin}"
            )));
        }
        let p = Point {
            x: uniform_vec(rng, n),
            y: uniform_vec(rng, n),
        };
        if rho1(&p).sqrt().min(rho2(&p, k).sqrt()) < margin {
            continue;
        }
        let s = classify_variety(p, k);
        if s.residuals.iter().cloned().fold(0.0, f64::max) >= margin {
            out.push(s);
        }
    }
    Ok(out)
}

/// Uniform points in `[−1, 1]²ⁿ` with `min(√ρ₁, √ρ₂) ≥ margin`.
pub fn sample_off_tube(
    n: usize,
    k: usize,
    count: usize,
    margin: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Point> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = Point {
            x: uniform_vec(rng, n),
            y: uniform_vec(rng, n),
        };
        if rho1(&p).sqrt().min(rho2(&p, k).sqrt()) >= margin {
            out.push(p);
        }
    }
    out
}

/// Weak and strict plurisubharmonicity of `√(ρ₁ρ₂)` and `ρ₁ρ₂`.
#[derive(Clone, Debug, Serialize)]
pub struct StrictPshReport {
    pub n: usize,
    pub k: usize,
    /// Smallest `min-eig / max(1, spectral radius)` of `Levi(√(ρ₁ρ₂))`.
    pub weak_sqrt_min: f64,
    pub weak_sqrt_witness: Option<Point>,
    /// Largest `min |eig| / spectral radius` of `Levi(ρ₁ρ₂)` over on-V samples.
    pub on_v_max_small_eig: f64,
    pub on_v_witness: Option<Point>,
    /// Smallest min-eig of `Levi(ρ₁ρ₂)` over off-V samples.
    pub off_v_min_eig: f64,
    pub off_v_witness: Option<Point>,
    pub weak_ok: bool,
    pub degenerate_on_v_ok: bool,
    pub strict_off_v_ok: bool,
}

impl StrictPshReport {
    pub fn passed(&self) -> bool {
        self.weak_ok && self.degenerate_on_v_ok && self.strict_off_v_ok
    }
}

fn worst_by<T: Send>(
    items: Vec<(f64, T)>,
    better: impl Fn(f64, f64) -> bool,
    init: f64,
) -> (f64, Option<T>) {
    items.into_iter().fold((init, None), |acc, (v, t)| {
        if better(v, acc.0) || acc.1.is_none() {
            (v, Some(t))
        } else {
            acc
        }
    })
}

pub fn verify_strict_psh_prod(
    n: usize,
    k: usize,
    grid: &[Point],
    on_v: &[VarietySample],
    off_v: &[VarietySample],
    eps: f64,
) -> Result<StrictPshReport, LabError> {
    let root = SqrtRhoProduct { n, k, eps };
    let prod = RhoProduct { n, k };
    let weak: Vec<(f64, Point)> = grid
        .par_iter()
        .filter(|p| root.check_domain(p).is_ok())
        .map(|p| {
            let s = levi_matrix(&root, p)?.spectrum()?;
            Ok((s.eigenvalues[0] / s.spectral_radius.max(1.0), p.clone()))
        })
        .collect::<Result<_, LabError>>()?;
    let (weak_sqrt_min, weak_sqrt_witness) = worst_by(weak, |a, b| a < b, f64::INFINITY);

    let on: Vec<(f64, Point)> = on_v
        .par_iter()
        .map(|s| {
            let sp = levi_matrix(&prod, &s.point)?.spectrum()?;
            let small = sp
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |m, v| m.min(v.abs()));
            let ratio = if sp.spectral_radius == 0.0 {
                0.0
            } else {
                small / sp.spectral_radius
            };
            Ok((ratio, s.point.clone()))
        })
        .collect::<Result<_, LabError>>()?;
    let (on_v_max_small_eig, on_v_witness) = worst_by(on, |a, b| a > b, 0.0);

    let off: Vec<(f64, Point)> = off_v
        .par_iter()
        .map(|s| {
            Ok((
                levi_matrix(&prod, &s.point)?.min_eigenvalue()?,
                s.point.clone(),
            ))
        })
        .collect::<Result<_, LabError>>()?;
    let (off_v_min_eig, off_v_witness) = worst_by(off, |a, b| a < b, f64::INFINITY);

    Ok(StrictPshReport {
        n,
        k,
        weak_ok: weak_sqrt_min >= -1e-9,
        degenerate_on_v_ok: on_v_max_small_eig <= 1e-8,
        strict_off_v_ok: off_v_min_eig > 0.0,
        weak_sqrt_min,
        weak_sqrt_witness,
        on_v_max_small_eig,
        on_v_witness,
        off_v_min_eig,
        off_v_witness,
    })
}

/// Aggregate residuals of the eigenstructure lemmas and the product identity
/// over a random sweep.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaSweep {
    pub n: usize,
    pub k: usize,
    pub points: usize,
    pub m0_max_residual: f64,
    pub m1_max_residual: f64,
    pub m1_max_rank_ratio: f64,
    pub ddcf2_max_residual: f64,
    /// Points where `v₀` vanished (only the complement check applied).
    pub m0_degenerate: usize,
    pub worst_point: Option<Point>,
}

pub fn lemma_sweep(points: &[Point], n: usize, k: usize, eps: f64) -> Result<LemmaSweep, LabError> {
    type Row = (f64, f64, f64, f64, bool);
    let rows: Vec<Row> = points
        .par_iter()
        .map(|p| {
            let m0 = verify_lemma_m0(p, k, eps)?;
            let m1 = verify_lemma_m1(p, k, eps)?;
            Ok((
                m0.max_residual(),
                m1.max_residual(),
                m1_rank_ratio(p, k, eps)?,
                verify_ddcf2(p, k, eps)?,
                m0.degenerate,
            ))
        })
        .collect::<Result<_, LabError>>()?;
    let mut sweep = LemmaSweep {
        n,
        k,
        points: points.len(),
        m0_max_residual: 0.0,
        m1_max_residual: 0.0,
        m1_max_rank_ratio: 0.0,
        ddcf2_max_residual: 0.0,
        m0_degenerate: 0,
        worst_point: None,
    };
    let mut worst = -1.0;
    for (p, r) in points.iter().zip(rows) {
        sweep.m0_max_residual = sweep.m0_max_residual.max(r.0);
        sweep.m1_max_residual = sweep.m1_max_residual.max(r.1);
        sweep.m1_max_rank_ratio = sweep.m1_max_rank_ratio.max(r.2);
        sweep.ddcf2_max_residual = sweep.ddcf2_max_residual.max(r.3);
        sweep.m0_degenerate += usize::from(r.4);
        let m = r.0.max(r.1).max(r.3);
        if m > worst {
            worst = m;
            sweep.worst_point = Some(p.clone());
        }
    }
    Ok(sweep)
}

/// Grid for the cutoff counterexample in `ℂ²`: `x₁` in an interval of the
/// positive axis, `y` on circles of radius in a band, `x₂ = 0` (the model
/// does not depend on `x₂`).
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleGrid {
    pub x1_range: (f64, f64),
    pub x1_steps: usize,
    pub y_radius_range: (f64, f64),
    pub y_radius_steps: usize,
    pub angle_steps: usize,
    /// Restrict to the slice `y₁ = 0, y₂ = 1`.
    #[serde(default)]
    pub slice_only: bool,
}

impl Default for CounterexampleGrid {
    fn default() -> Self {
        Self {
            x1_range: (0.01, 0.99),
            x1_steps: 99,
            y_radius_range: (0.5, 1.5),
            y_radius_steps: 11,
            angle_steps: 16,
            slice_only: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleResult {
    pub cutoff: CutoffProfile,
    pub witness: Point,
    pub min_eigenvalue: f64,
    /// `2χ² + χχ″ − 2(χ′)²` at the witness `x₁`.
    pub deficiency_at_witness: f64,
    /// Smallest deficiency over the `x₁` grid, with its location.
    pub min_deficiency: f64,
    pub min_deficiency_t: f64,
    /// Smallest min-eig of the Levi matrix on the slice `y₁ = 0, y₂ = 1`.
    pub slice_min_eigenvalue: f64,
    pub points_scanned: usize,
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Scans `Levi(χ(x₁)|y|²)` in `ℂ²` for negative eigenvalues.
pub fn counterexample_scan(
    cutoff: CutoffProfile,
    grid: &CounterexampleGrid,
) -> Result<CounterexampleResult, LabError> {
    let (lo, hi) = grid.x1_range;
    if !(lo > 0.0 && hi >= lo) || grid.x1_steps == 0 {
        return Err(LabError::InvalidArgument(format!(
            "x1 range must lie in the positive axis, got ({lo}, {hi})"
        )));
    }
    let xs = linspace(lo, hi, grid.x1_steps);
    if xs.iter().all(|&t| cutoff.eval(t).0 == 0.0) {
        return Err(LabError::InvalidArgument(
            "scan grid lies entirely where the cutoff vanishes".into(),
        ));
    }
    let slice = |x1: f64| Point {
        x: vec![x1, 0.0],
        y: vec![0.0, 1.0],
    };
    let mut points: Vec<Point> = xs.iter().map(|&x1| slice(x1)).collect();
    if !grid.slice_only {
        let radii = linspace(
            grid.y_radius_range.0,
            grid.y_radius_range.1,
            grid.y_radius_steps,
        );
        let angles = grid.angle_steps.max(1);
        for &x1 in &xs {
            for &rad in &radii {
                for a in 0..angles {
                    let th = std::f64::consts::TAU * a as f64 / angles as f64;
                    points.push(Point {
                        x: vec![x1, 0.0],
                        y: vec![rad * th.cos(), rad * th.sin()],
                    });
                }
            }
        }
    }
    let field = AbouzaidRho {
        n: 2,
        cutoff,
        eps: 1e-9,
    };
    let eigs: Vec<f64> = points
        .par_iter()
        .map(|p| levi_matrix(&field, p)?.min_eigenvalue())
        .collect::<Result<_, LabError>>()?;
    let (mut best, mut best_i) = (f64::INFINITY, 0);
    for (i, &e) in eigs.iter().enumerate() {
        if e < best {
            best = e;
            best_i = i;
        }
    }
    let slice_min_eigenvalue = eigs[..xs.len()]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let (mut min_def, mut min_def_t) = (f64::INFINITY, xs[0]);
    for &t in &xs {
        let d = deficiency(cutoff, t);
        if d < min_def {
            min_def = d;
            min_def_t = t;
        }
    }
    let witness = points[best_i].clone();
    Ok(CounterexampleResult {
        cutoff,
        deficiency_at_witness: deficiency(cutoff, witness.x[0]),
        witness,
        min_eigenvalue: best,
        min_deficiency: min_def,
        min_deficiency_t: min_def_t,
        slice_min_eigenvalue,
        points_scanned: points.len(),
    })
}
