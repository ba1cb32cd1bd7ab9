//! Feasibility searches for the interpolation fraction `D` and the constant
//! `C₀`, and grid estimates of the constants in the Duval conditions.
//!
//! Grids are built in reduced coordinates. The unitary maps preserving both
//! model planes act transitively on points with the same
//! `(√ρ₁, √ρ₂, |x_{≤k}|, ∠(x_{>k}, y_{>k}))`, and every function here depends
//! only on `ρ₁, ρ₂`, so sampling these four numbers covers the chart.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::jet::{Point, ScalarField};
use crate::levi::{levi_matrix, levi_of_jet, LeviMatrix};
use crate::model::{
    rho1, rho2, Beta, HDuval, ModelParams, SqrtBetaModified, SqrtHDuval, SquaredSqrtModel,
};

/// Relative PSD tolerance for grid checks.
pub const PSD_TOL: f64 = 1e-9;
/// Margin applied to grid maxima when reporting constants.
pub const INFLATION: f64 = 1.1;
/// Bounding box radius, in units of `r`.
pub const BOX_RADIUS: f64 = 2.0;

/// Grid resolution in reduced coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Samples of the distance to the far plane, in `(0, 2r]`.
    pub radial: usize,
    /// Samples of the distance to the near plane, in `(0, Dr)`.
    pub tube: usize,
    /// Samples of `|x_{≤k}|` relative to its maximum (used when `0 < k < n`).
    pub tau: usize,
    /// Samples of the angle between `x_{>k}` and `y_{>k}` (used when `n − k ≥ 2`).
    pub theta: usize,
    /// Extra radial samples clustered around the cutoff transition.
    pub seam: usize,
}

impl GridSpec {
    /// An `N × N × N/8`-type grid.
    pub fn cube(n: usize) -> Self {
        Self {
            radial: n,
            tube: n,
            tau: (n / 8).max(3),
            theta: (n / 8).max(3),
            seam: n / 2,
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::cube(32)
    }
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// The point with `√ρ₁ = s1`, `√ρ₂ = s2`, `|x_{≤k}| = τ·min(s1, s2)` and
/// angle `θ` between `x_{>k}` and `y_{>k}`.
pub fn reduced_point(n: usize, k: usize, s1: f64, s2: f64, tau: f64, theta: f64) -> Point {
    let m = n - k;
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    if m == 0 {
        x[0] = s1;
        return Point { x, y };
    }
    let a = if k == 0 { 0.0 } else { tau * s1.min(s2) };
    if k > 0 {
        x[0] = a;
    }
    x[k] = (s1 * s1 - a * a).max(0.0).sqrt();
    let c = (s2 * s2 - a * a).max(0.0).sqrt();
    if m >= 2 {
        y[k] = c * theta.cos();
        y[k + 1] = c * theta.sin();
    } else {
        y[k] = c;
    }
    Point { x, y }
}

/// Grid of `V_{fr} = {√ρ₁ < fr} ∪ {√ρ₂ < fr}` inside the box of radius `2r`,
/// with radial seam refinement around the cutoff knees.
pub fn tube_grid(n: usize, k: usize, r: f64, fraction: f64, spec: &GridSpec) -> Vec<Point> {
    let m = n - k;
    let near: Vec<f64> = (0..spec.tube)
        .map(|i| fraction * r * (i as f64 + 0.5) / spec.tube as f64)
        .collect();
    if m == 0 {
        return near
            .iter()
            .map(|&s| reduced_point(n, k, s, s, 0.0, 0.0))
            .collect();
    }
    let mut far: Vec<f64> = (1..=spec.radial)
        .map(|i| BOX_RADIUS * r * i as f64 / spec.radial as f64)
        .collect();
    let (lo, hi) = (0.5f64.sqrt() * r, 0.75f64.sqrt() * r);
    far.extend(linspace(lo - 0.02 * r, hi + 0.02 * r, spec.seam));
    far.extend([0.5 * r, r]);
    far.sort_by(f64::total_cmp);
    far.dedup();
    let taus = if k > 0 {
        linspace(0.0, 1.0, spec.tau)
    } else {
        vec![0.0]
    };
    let thetas = if m >= 2 {
        linspace(0.0, FRAC_PI_2, spec.theta)
    } else {
        vec![0.0]
    };
    let mut out = Vec::with_capacity(2 * near.len() * far.len() * taus.len() * thetas.len());
    for &a in &near {
        for &b in &far {
            for &t in &taus {
                for &th in &thetas {
                    out.push(reduced_point(n, k, a, b, t, th));
                    out.push(reduced_point(n, k, b, a, t, th));
                }
            }
        }
    }
    out
}

/// Minimum of `min-eig / max(1, spectral radius)` over a grid, with witness.
#[derive(Clone, Debug, Serialize)]
pub struct GridMin {
    pub value: f64,
    pub witness: Option<Point>,
    pub points: usize,
}

pub fn grid_min_relative_eig(f: &dyn ScalarField, points: &[Point]) -> Result<GridMin, LabError> {
    let vals: Vec<f64> = points
        .par_iter()
        .map(|p| {
            let s = levi_matrix(f, p)?.spectrum()?;
            Ok(s.eigenvalues[0] / s.spectral_radius.max(1.0))
        })
        .collect::<Result<_, LabError>>()?;
    let mut best = GridMin {
        value: f64::INFINITY,
        witness: None,
        points: points.len(),
    };
    for (p, v) in points.iter().zip(vals) {
        if v < best.value {
            best.value = v;
            best.witness = Some(p.clone());
        }
    }
    Ok(best)
}

/// Outcome of the search for `D`.
#[derive(Clone, Debug, Serialize)]
pub struct DSearch {
    pub n: usize,
    pub k: usize,
    pub d_star: f64,
    /// `(D, feasible, min relative eigenvalue)` for every evaluated `D`.
    pub schedule: Vec<(f64, bool, f64)>,
    /// Every dyadic value below `d_star` that was checked is feasible.
    pub monotone: bool,
    pub min_relative_eig: f64,
}

/// Largest `D` such that `β₁` is weakly psh on the grid of `V_D`.
///
/// Dyadic descent from `1/2` to the first feasible value, then bisection
/// between it and its infeasible parent. By the scaling identity for `β_r`,
/// the result holds for every `r`.
pub fn search_d(
    n: usize,
    k: usize,
    spec: &GridSpec,
    refinements: usize,
) -> Result<DSearch, LabError> {
    const FLOOR: f64 = 1e-3;
    let beta = Beta::unit(n, k);
    let mut schedule = Vec::new();
    let check = |d: f64, schedule: &mut Vec<(f64, bool, f64)>| -> Result<bool, LabError> {
        let g = grid_min_relative_eig(&beta, &tube_grid(n, k, 1.0, d, spec))?;
        let ok = g.value >= -PSD_TOL;
        schedule.push((d, ok, g.value));
        Ok(ok)
    };
    let mut d = 0.5;
    let mut infeasible_parent = None;
    while !check(d, &mut schedule)? {
        infeasible_parent = Some(d);
        d *= 0.5;
        if d < FLOOR {
            return Err(LabError::Infeasible(format!(
                "no feasible D above {FLOOR} for n = {n}, k = {k}"
            )));
        }
    }
    let mut lo = d;
    if let Some(mut hi) = infeasible_parent {
        for _ in 0..refinements {
            let mid = 0.5 * (lo + hi);
            if check(mid, &mut schedule)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let mut monotone = true;
    let mut below = d * 0.5;
    for _ in 0..2 {
        if below < FLOOR {
            break;
        }
        monotone &= check(below, &mut schedule)?;
        below *= 0.5;
    }
    let min_relative_eig = schedule
        .iter()
        .find(|(dd, _, _)| *dd == lo)
        .map(|t| t.2)
        .unwrap_or(f64::NAN);
    Ok(DSearch {
        n,
        k,
        d_star: lo,
        schedule,
        monotone,
        min_relative_eig,
    })
}

/// `‖Levi(β_r)(p) − Levi(β₁)(p/r)‖ / max(1, ‖Levi(β₁)(p/r)‖)`.
pub fn verify_beta_scaling(p: &Point, r: f64, k: usize) -> Result<f64, LabError> {
    let n = p.n();
    let lhs = levi_matrix(&Beta { n, k, r }, p)?;
    let rhs = levi_matrix(&Beta::unit(n, k), &p.scaled(1.0 / r))?;
    Ok((&lhs - &rhs).norm() / rhs.norm().max(1.0))
}

/// Max scaling residual over random points of the box of radius `2r`.
pub fn beta_scaling_sweep(
    n: usize,
    k: usize,
    r: f64,
    count: usize,
    seed: u64,
) -> Result<f64, LabError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let c: Vec<f64> = (0..2 * n)
            .map(|_| rng.gen_range(-BOX_RADIUS..BOX_RADIUS) * r)
            .collect();
        worst = worst.max(verify_beta_scaling(&Point::from_coords(&c)?, r, k)?);
    }
    Ok(worst)
}

/// Outcome of the search for `C₀`.
#[derive(Clone, Debug, Serialize)]
pub struct C0Search {
    pub n: usize,
    pub k: usize,
    pub r: f64,
    pub d: f64,
    pub c0_star: f64,
    /// Feasibility held at every tested value above `c0_star`.
    pub monotone: bool,
    /// Points whose Levi matrix of `√β_r` alone is not PSD.
    pub active_points: usize,
    pub grid_points: usize,
    pub witness: Option<Point>,
    /// Smallest relative eigenvalue at `c0_star` for each tube radius
    /// `δ ∈ {10⁻³, …, 10⁻⁶}·r`.
    pub tube_limit: Vec<(f64, f64)>,
    pub tube_limit_ok: bool,
}

struct PairGrid {
    points: Vec<Point>,
    sqrt_part: Vec<LeviMatrix>,
    beta_part: Vec<LeviMatrix>,
}

impl PairGrid {
    fn build(n: usize, k: usize, r: f64, points: Vec<Point>, eps: f64) -> Result<Self, LabError> {
        let root = SqrtBetaModified {
            n,
            k,
            r,
            c0: 0.0,
            eps,
        };
        let beta = Beta { n, k, r };
        let pairs: Vec<(LeviMatrix, LeviMatrix)> = points
            .par_iter()
            .map(|p| Ok((levi_matrix(&root, p)?, levi_matrix(&beta, p)?)))
            .collect::<Result<_, LabError>>()?;
        let (sqrt_part, beta_part) = pairs.into_iter().unzip();
        Ok(Self {
            points,
            sqrt_part,
            beta_part,
        })
    }

    fn relative_min(&self, i: usize, c: f64, r: f64) -> Result<f64, LabError> {
        let m = &self.sqrt_part[i] + &self.beta_part[i].scaled(c / r);
        let s = m.spectrum()?;
        Ok(s.eigenvalues[0] / s.spectral_radius.max(1.0))
    }

    /// First infeasible index among `order`, if any.
    fn first_violation(&self, order: &[usize], c: f64, r: f64) -> Result<Option<usize>, LabError> {
        for &i in order {
            if self.relative_min(i, c, r)? < -PSD_TOL {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

/// Smallest `C₀ ∈ [0, 10³]` with `√β_r + C₀ r⁻¹ β_r` weakly psh on the grid of
/// `V_{Dr}` minus the exclusion tube.
pub fn search_c0(
    n: usize,
    k: usize,
    r: f64,
    d: f64,
    spec: &GridSpec,
    eps: f64,
) -> Result<C0Search, LabError> {
    const CAP: f64 = 1e3;
    const STEPS: usize = 24;
    let grid = PairGrid::build(n, k, r, tube_grid(n, k, r, d, spec), eps)?;
    let total = grid.points.len();
    let mut active: Vec<usize> = (0..total)
        .filter(|&i| {
            grid.relative_min(i, 0.0, r)
                .map(|v| v < -PSD_TOL)
                .unwrap_or(true)
                || !grid.beta_part[i].is_psd(PSD_TOL).unwrap_or(false)
        })
        .collect();
    let active_points = active.len();
    let mut witness = None;
    let c0_star = if active.is_empty() {
        0.0
    } else {
        if let Some(i) = grid.first_violation(&active, CAP, r)? {
            return Err(LabError::Infeasible(format!(
                "C0 = {CAP} is not enough at {:?} (n = {n}, k = {k}, r = {r}, D = {d})",
                grid.points[i]
            )));
        }
        let (mut lo, mut hi) = (0.0, CAP);
        for _ in 0..STEPS {
            let mid = 0.5 * (lo + hi);
            match grid.first_violation(&active, mid, r)? {
                Some(i) => {
                    lo = mid;
                    witness = Some(grid.points[i].clone());
                    let pos = active.iter().position(|&j| j == i).expect("present");
                    active.swap(0, pos);
                }
                None => hi = mid,
            }
        }
        hi
    };
    let all: Vec<usize> = (0..total).collect();
    let mut monotone = true;
    for factor in [1.0, 2.0, 10.0] {
        let c = (c0_star * factor).min(CAP);
        monotone &= grid.first_violation(&all, c, r)?.is_none();
    }
    let (tube_limit, tube_limit_ok) = tube_limit_check(n, k, r, c0_star, spec)?;
    Ok(C0Search {
        n,
        k,
        r,
        d,
        c0_star,
        monotone,
        active_points,
        grid_points: total,
        witness,
        tube_limit,
        tube_limit_ok,
    })
}

/// Smallest relative eigenvalue of `Levi(√β_r + C₀r⁻¹β_r)` on shells at
/// distance `δ·r` from the model planes, for shrinking `δ`.
fn tube_limit_check(
    n: usize,
    k: usize,
    r: f64,
    c0: f64,
    spec: &GridSpec,
) -> Result<(Vec<(f64, f64)>, bool), LabError> {
    let deltas = [1e-3, 1e-4, 1e-5, 1e-6];
    let field = SqrtBetaModified {
        n,
        k,
        r,
        c0,
        eps: 0.5e-6 * r,
    };
    let m = n - k;
    let far: Vec<f64> = (1..=spec.radial)
        .map(|i| BOX_RADIUS * r * i as f64 / spec.radial as f64)
        .collect();
    let mut rows = Vec::new();
    let mut ok = true;
    for delta in deltas {
        let s = delta * r;
        let mut points = Vec::new();
        if m == 0 {
            points.push(reduced_point(n, k, s, s, 0.0, 0.0));
        } else {
            for &b in &far {
                for th in [0.0, 0.25 * FRAC_PI_2, FRAC_PI_2] {
                    points.push(reduced_point(n, k, s, b, 0.5, th));
                    points.push(reduced_point(n, k, b, s, 0.5, th));
                }
            }
        }
        let g = grid_min_relative_eig(&field, &points)?;
        ok &= g.value >= -PSD_TOL;
        rows.push((delta, g.value));
    }
    Ok((rows, ok))
}

/// `C₀*(r)` over a list of radii, searched on `r`-scaled grids.
#[derive(Clone, Debug, Serialize)]
pub struct C0Independence {
    pub rows: Vec<C0Search>,
    pub ratio: f64,
    pub ok: bool,
}

pub fn verify_c0_r_independence(
    radii: &[f64],
    n: usize,
    k: usize,
    d: f64,
    spec: &GridSpec,
    eps: f64,
) -> Result<C0Independence, LabError> {
    let rows = radii
        .iter()
        .map(|&r| search_c0(n, k, r, d, spec, eps))
        .collect::<Result<Vec<_>, _>>()?;
    let ratio = max_min_ratio(rows.iter().map(|s| s.c0_star));
    Ok(C0Independence {
        ok: ratio <= 2.0,
        rows,
        ratio,
    })
}

/// `max / min` of a list; `1` when every value is zero.
pub fn max_min_ratio(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if hi == 0.0 {
        1.0
    } else if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Grid estimates of the constants of the Duval conditions.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ConstantEstimates {
    pub d_star: f64,
    pub c0_star: f64,
    pub c1: f64,
    pub c2: f64,
    pub a1: f64,
    /// Minimum eigenvalue of `Levi(h)` per region label.
    pub region_min_eigs: BTreeMap<String, f64>,
}

impl ConstantEstimates {
    /// Grid maxima inflated by the discretization margin.
    pub fn inflated(&self) -> Self {
        Self {
            c1: self.c1 * INFLATION,
            c2: self.c2 * INFLATION,
            a1: self.a1 * INFLATION,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    /// The region the condition quantifies over is empty.
    pub vacuous: bool,
    pub value: f64,
    pub witness: Option<Point>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DuvalReport {
    pub params: ModelParams,
    pub conditions: Vec<ConditionResult>,
    pub constants: ConstantEstimates,
}

impl DuvalReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }
}

fn in_b_r(p: &Point, k: usize, r: f64) -> bool {
    rho1(p).sqrt().max(rho2(p, k).sqrt()) < 0.5 * r
}

/// Random points on `L₁` and on `L₂` inside the box of radius `2r`.
pub fn sample_planes(
    n: usize,
    k: usize,
    r: f64,
    count: usize,
    seed: u64,
) -> (Vec<Point>, Vec<Point>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || rng.gen_range(-BOX_RADIUS..BOX_RADIUS) * r;
    let mut l1 = Vec::with_capacity(count);
    let mut l2 = Vec::with_capacity(count);
    for _ in 0..count {
        l1.push(Point {
            x: vec![0.0; n],
            y: (0..n).map(|_| draw()).collect(),
        });
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        for i in 0..n {
            if i < k {
                y[i] = draw();
            } else {
                x[i] = draw();
            }
        }
        l2.push(Point { x, y });
    }
    (l1, l2)
}

/// Checks the five Duval conditions for `h = (√h̃ + C₀r⁻¹h̃)²` on a grid of
/// `U` and estimates `C₁`, `C₂`, `A₁`.
pub fn verify_duval_conditions(
    params: &ModelParams,
    spec: &GridSpec,
    seed: u64,
) -> Result<DuvalReport, LabError> {
    let (n, k, r) = (params.n, params.k, params.r);
    let h = HDuval {
        params: params.clone(),
    };
    let root = SqrtHDuval {
        params: params.clone(),
    };
    let grid = tube_grid(n, k, r, params.d, spec);
    let grid: Vec<Point> = grid
        .into_iter()
        .filter(|p| crate::model::in_neighborhood(p, params))
        .collect();

    let (l1, l2) = sample_planes(n, k, r, 100, seed);
    let mut zero_max = 0.0_f64;
    let mut zero_witness = None;
    for p in l1.iter().chain(&l2) {
        let v = h.value(p)?;
        if v > zero_max || zero_witness.is_none() {
            zero_max = zero_max.max(v);
            zero_witness = Some(p.clone());
        }
    }

    struct Row {
        root_rel: f64,
        min_eig: f64,
        max_eig: f64,
        grad_ratio: f64,
        outside_b: bool,
    }
    let rows: Vec<Row> = grid
        .par_iter()
        .map(|p| {
            let jet = h.eval(p)?;
            let s = levi_of_jet(&jet).spectrum()?;
            let rs = levi_matrix(&root, p)?.spectrum()?;
            Ok(Row {
                root_rel: rs.eigenvalues[0] / rs.spectral_radius.max(1.0),
                min_eig: s.eigenvalues[0],
                max_eig: *s.eigenvalues.last().expect("nonempty"),
                grad_ratio: jet.gradient.norm() / jet.value.sqrt(),
                outside_b: !in_b_r(p, k, r),
            })
        })
        .collect::<Result<_, LabError>>()?;

    let mut weak = (f64::INFINITY, None);
    let mut strict = (f64::INFINITY, None);
    let mut c1 = (0.0_f64, None);
    let mut c2 = (1.0_f64, None);
    let mut a1 = (0.0_f64, None);
    let mut region_min = BTreeMap::new();
    let mut outside_count = 0usize;
    for (p, row) in grid.iter().zip(&rows) {
        if row.root_rel < weak.0 {
            weak = (row.root_rel, Some(p.clone()));
        }
        if row.max_eig / 2.0 > c1.0 {
            c1 = (row.max_eig / 2.0, Some(p.clone()));
        }
        let label = format!("{:?}", crate::model::region_classify(p, params));
        let e = region_min.entry(label).or_insert(f64::INFINITY);
        *e = f64::min(*e, row.min_eig);
        if row.outside_b {
            outside_count += 1;
            if row.min_eig < strict.0 {
                strict = (row.min_eig, Some(p.clone()));
            }
            let equiv = (row.max_eig / 2.0).max(2.0 / row.min_eig);
            let equiv = if row.min_eig > 0.0 {
                equiv
            } else {
                f64::INFINITY
            };
            if equiv > c2.0 {
                c2 = (equiv, Some(p.clone()));
            }
            if row.grad_ratio > a1.0 {
                a1 = (row.grad_ratio, Some(p.clone()));
            }
        }
    }
    let vacuous = outside_count == 0;
    let conditions = vec![
        ConditionResult {
            id: 1,
            name: "h vanishes on L1 and L2".into(),
            passed: zero_max <= 1e-12,
            vacuous: false,
            value: zero_max,
            witness: zero_witness,
        },
        ConditionResult {
            id: 2,
            name: "sqrt(h) weakly psh on U, h strictly psh on U minus B_r".into(),
            passed: weak.0 >= -PSD_TOL && (vacuous || strict.0 > 0.0),
            vacuous: false,
            value: if vacuous {
                weak.0
            } else {
                weak.0.min(strict.0)
            },
            witness: if weak.0 < -PSD_TOL || vacuous {
                weak.1
            } else {
                strict.1.clone()
            },
        },
        ConditionResult {
            id: 3,
            name: "Levi(h) dominated by C1 g".into(),
            passed: c1.0.is_finite(),
            vacuous: false,
            value: c1.0,
            witness: c1.1,
        },
        ConditionResult {
            id: 4,
            name: "C2^-1 g <= Levi(h) <= C2 g on U minus B_r".into(),
            passed: c2.0.is_finite(),
            vacuous,
            value: c2.0,
            witness: c2.1,
        },
        ConditionResult {
            id: 5,
            name: "A1 sqrt(h) >= |grad h| outside B_r".into(),
            passed: a1.0.is_finite(),
            vacuous,
            value: a1.0,
            witness: a1.1,
        },
    ];
    Ok(DuvalReport {
        params: params.clone(),
        conditions,
        constants: ConstantEstimates {
            d_star: params.d,
            c0_star: params.c0,
            c1: c1.0,
            c2: c2.0,
            a1: a1.0,
            region_min_eigs: region_min,
        },
    })
}

/// `C₁′` and `C₂′` for the square of `√β_r + C₀r⁻¹β_r`.
#[derive(Clone, Debug, Serialize)]
pub struct MetricDomination {
    pub r: f64,
    /// `max max-eig / 2` on the grid of `V_r`.
    pub c1_prime: f64,
    /// Equivalence constant on the grid of `V_{Dr} ∖ B_r`.
    pub c2_prime: f64,
}

pub fn verify_metric_domination_sqrt_model(
    params: &ModelParams,
    spec: &GridSpec,
) -> Result<MetricDomination, LabError> {
    let (n, k, r) = (params.n, params.k, params.r);
    let f = SquaredSqrtModel {
        n,
        k,
        r,
        c0: params.c0,
    };
    let spectra = |pts: Vec<Point>| -> Result<Vec<(f64, f64)>, LabError> {
        pts.par_iter()
            .map(|p| {
                let s = levi_matrix(&f, p)?.spectrum()?;
                Ok((s.eigenvalues[0], *s.eigenvalues.last().expect("nonempty")))
            })
            .collect()
    };
    let c1_prime = spectra(tube_grid(n, k, r, 1.0, spec))?
        .iter()
        .fold(0.0_f64, |m, (_, hi)| m.max(hi / 2.0));
    let collar: Vec<Point> = tube_grid(n, k, r, params.d, spec)
        .into_iter()
        .filter(|p| !in_b_r(p, k, r))
        .collect();
    let c2_prime = spectra(collar)?.iter().fold(1.0_f64, |m, &(lo, hi)| {
        let e = if lo > 0.0 {
            (hi / 2.0).max(2.0 / lo)
        } else {
            f64::INFINITY
        };
        m.max(e)
    });
    Ok(MetricDomination {
        r,
        c1_prime,
        c2_prime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reduced_point_hits_targets() {
        for (n, k) in [(1, 0), (2, 0), (2, 1), (3, 1), (2, 2)] {
            let (s1, s2) = if n == k { (0.3, 0.3) } else { (0.3, 0.7) };
            let p = reduced_point(n, k, s1, s2, 0.6, 0.4);
            assert_relative_eq!(rho1(&p).sqrt(), s1, epsilon = 1e-14);
            assert_relative_eq!(rho2(&p, k).sqrt(), s2, epsilon = 1e-14);
        }
    }

    #[test]
    fn unit_scale_scaling_is_exact() {
        let p = Point::new(vec![0.03], vec![0.05]).unwrap();
        assert_eq!(verify_beta_scaling(&p, 1.0, 0).unwrap(), 0.0);
        assert!(verify_beta_scaling(&p, 0.1, 0).unwrap() <= 1e-9);
    }

    #[test]
    fn core_needs_no_constant() {
        // Inside B_r the square root is |x||y|/r, already weakly psh.
        let f = SqrtBetaModified {
            n: 1,
            k: 0,
            r: 1.0,
            c0: 0.0,
            eps: 1e-6,
        };
        let pts: Vec<Point> = (1..10)
            .flat_map(|i| {
                (1..10)
                    .map(move |j| reduced_point(1, 0, 0.04 * i as f64, 0.04 * j as f64, 0.0, 0.0))
            })
            .collect();
        assert!(grid_min_relative_eig(&f, &pts).unwrap().value >= -PSD_TOL);
    }

    #[test]
    fn ratio_helper() {
        assert_eq!(max_min_ratio([2.0, 4.0, 3.0].into_iter()), 2.0);
        assert_eq!(max_min_ratio([0.0, 0.0].into_iter()), 1.0);
    }
}
