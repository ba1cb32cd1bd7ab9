//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::FRAC_PI_4;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use psh_lab::analysis::{
    counterexample_scan, lemma_sweep, sample_off_tube, sample_off_v, sample_variety_v,
    verify_strict_psh_prod, CounterexampleGrid,
};
use psh_lab::construction::{
    beta_scaling_sweep, max_min_ratio, search_c0, search_d, verify_duval_conditions,
    verify_metric_domination_sqrt_model, GridSpec, PSD_TOL,
};
use psh_lab::curves::measure::{
    area_g, estimate_k, length_g, t_grid, verify_monotonicity, RegionSpec, MONOTONICITY_TOL,
};
use psh_lab::curves::{default_family, make_sector_inclusion, QuadratureSpec};
use psh_lab::model::{CutoffProfile, SquaredSqrtModel};
use psh_lab::{LabError, ModelParams};

const SEED: u64 = 20240611;
const EPS: f64 = 1e-6;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Result<Outcome, LabError>) -> Outcome {
    let start = Instant::now();
    let mut out = f().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
    let elapsed = start.elapsed();
    out.detail = format!("{} [{:.1}s]", out.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed > limit {
            out.ok = false;
            out.detail += &format!(" exceeds {}s", limit.as_secs());
        }
    }
    out
}

struct Sweep {
    m0: f64,
    m1: f64,
    rank: f64,
    ddcf2: f64,
    elapsed: Duration,
}

fn lemma_sweeps() -> Result<Sweep, LabError> {
    let start = Instant::now();
    let mut s = Sweep {
        m0: 0.0,
        m1: 0.0,
        rank: 0.0,
        ddcf2: 0.0,
        elapsed: Duration::ZERO,
    };
    for n in 1..=4 {
        for k in 0..=n {
            let mut rng = common::rng(SEED + (10 * n + k) as u64);
            let points = sample_off_tube(n, k, 10_000, 1e-3, &mut rng);
            let r = lemma_sweep(&points, n, k, EPS)?;
            s.m0 = s.m0.max(r.m0_max_residual);
            s.m1 = s.m1.max(r.m1_max_residual);
            s.rank = s.rank.max(r.m1_max_rank_ratio);
            s.ddcf2 = s.ddcf2.max(r.ddcf2_max_residual);
        }
    }
    s.elapsed = start.elapsed();
    Ok(s)
}

fn strict_psh() -> Result<Outcome, LabError> {
    let mut worst = (f64::INFINITY, 0.0_f64, f64::INFINITY);
    let mut ok = true;
    for n in 1..=4 {
        for k in 0..=n {
            let mut rng = common::rng(SEED + 100 + (10 * n + k) as u64);
            let points = sample_off_tube(n, k, 1000, 1e-3, &mut rng);
            let on_v = sample_variety_v(n, k, 100, &mut rng)?;
            let off_v = sample_off_v(n, k, 100, 0.1, &mut rng)?;
            let r = verify_strict_psh_prod(n, k, &points, &on_v, &off_v, EPS)?;
            ok &= r.passed();
            worst.0 = worst.0.min(r.weak_sqrt_min);
            worst.1 = worst.1.max(r.on_v_max_small_eig);
            worst.2 = worst.2.min(r.off_v_min_eig);
        }
    }
    Ok(outcome(
        ok,
        format!(
            "min rel eig sqrt {:.2e} (>= {:.0e}), on-V small eig {:.2e} (<= 1e-8), off-V min eig {:.3e} (> 0)",
            worst.0, -PSD_TOL, worst.1, worst.2
        ),
    ))
}

fn counterexample() -> Result<Outcome, LabError> {
    let r = counterexample_scan(CutoffProfile::Exp, &CounterexampleGrid::default())?;
    let w = &r.witness;
    let y = (w.y[0] * w.y[0] + w.y[1] * w.y[1]).sqrt();
    let in_window = w.x[0] > 0.0 && w.x[0] < 1.0 && (0.5..=1.5).contains(&y);
    let ok = r.min_eigenvalue <= -1e-6 && in_window && r.deficiency_at_witness < 0.0;
    Ok(outcome(
        ok,
        format!(
            "min eig {:.4e} at x1={:.3} |y|={y:.3}, deficiency {:.4e}",
            r.min_eigenvalue, w.x[0], r.deficiency_at_witness
        ),
    ))
}

const PAIRS: [(usize, usize); 4] = [(1, 0), (1, 1), (2, 0), (2, 1)];

fn construction(grid: &GridSpec) -> Result<Outcome, LabError> {
    let mut scaling = 0.0_f64;
    for (i, &(n, k)) in PAIRS.iter().enumerate() {
        for (j, r) in [0.3, 0.1, 0.03].into_iter().enumerate() {
            scaling = scaling.max(beta_scaling_sweep(
                n,
                k,
                r,
                100,
                SEED + (10 * i + j) as u64,
            )?);
        }
    }
    let mut ok = scaling <= 1e-9;
    let mut parts = vec![format!("scaling {scaling:.2e}")];
    for (n, k) in PAIRS {
        let s = search_d(n, k, grid, 6)?;
        ok &= s.d_star >= 1e-2 && s.min_relative_eig >= -PSD_TOL;
        parts.push(format!(
            "D*({n},{k})={:.4} eig {:.1e}",
            s.d_star, s.min_relative_eig
        ));
    }
    Ok(outcome(ok, parts.join(", ")))
}

fn duval(grid: &GridSpec) -> Result<Outcome, LabError> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, k) in PAIRS {
        let d = 0.5 * search_d(n, k, grid, 6)?.d_star;
        let c0 = search_c0(n, k, 0.5, d, grid, EPS)?;
        let params = ModelParams {
            n,
            k,
            r: 0.5,
            d,
            c0: 2.0 * c0.c0_star,
            s: 0.5 * d * 0.5,
            eps: EPS,
        }
        .validated()?;
        let rep = verify_duval_conditions(&params, grid, SEED)?;
        let c = &rep.constants;
        let finite = [c.c1, c.c2, c.a1].iter().all(|v| v.is_finite());
        let all = rep.conditions.iter().all(|c| c.passed);
        let mut c0s = Vec::new();
        let mut c1s = Vec::new();
        for r in [0.4, 0.2, 0.1, 0.05] {
            c0s.push(search_c0(n, k, r, d, grid, EPS)?.c0_star);
            let p = ModelParams {
                r,
                ..params.clone()
            };
            c1s.push(verify_metric_domination_sqrt_model(&p, grid)?.c1_prime);
        }
        let (rc0, rc1) = (
            max_min_ratio(c0s.into_iter()),
            max_min_ratio(c1s.into_iter()),
        );
        ok &= c0.c0_star <= 1e3 && finite && all && rc0 < 2.0 && rc1 < 2.0;
        parts.push(format!(
            "({n},{k}) C0*={:.3} conditions {} ratios {rc0:.3}/{rc1:.3}",
            c0.c0_star,
            if all { "ok" } else { "FAILED" }
        ));
    }
    Ok(outcome(ok, parts.join(", ")))
}

fn quadrature_oracles(spec: &QuadratureSpec) -> Result<Outcome, LabError> {
    let sector = make_sector_inclusion(1.0)?;
    let s = 0.1_f64;
    let tube_cf = s * (1.0 - s * s).sqrt() + s.asin() - s * s;
    let errs = [
        (area_g(&sector, &RegionSpec::All, spec)?.value - FRAC_PI_4).abs(),
        (length_g(&sector, &RegionSpec::All, spec)?.value - 2.0).abs(),
        (area_g(&sector, &RegionSpec::Tubes { s }, spec)?.value - tube_cf).abs(),
    ];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Ok(outcome(
        worst <= 1e-6,
        format!("max error {worst:.2e} (<= 1e-6)"),
    ))
}

fn k_table(spec: &QuadratureSpec) -> Result<Outcome, LabError> {
    let family = default_family(1.0)?;
    let table = estimate_k(&family, &[0.05, 0.025, 0.0125], 0.1, spec)?;
    let finite = table.rows.iter().all(|r| r.k.is_finite() && !r.flagged);
    let sector = make_sector_inclusion(1.0)?;
    let s = 0.02_f64;
    let k = estimate_k(&[sector], &[s], 0.1, spec)?.rows[0].k;
    let oracle = s * 1.8 / (s * (1.0 - s * s).sqrt() + s.asin() - s * s);
    let ok = finite && table.sup <= 2.0 && table.max_drift < 0.1 && (k - oracle).abs() <= 0.01;
    Ok(outcome(
        ok,
        format!(
            "sup {:.4} (<= 2), max drift {:.4} (< 0.1), K(0.02) {k:.6} vs {oracle:.6}",
            table.sup, table.max_drift
        ),
    ))
}

fn monotonicity(grid: &GridSpec, spec: &QuadratureSpec) -> Result<Outcome, LabError> {
    let d = 0.5 * search_d(1, 0, grid, 6)?.d_star;
    let c0 = 2.0 * search_c0(1, 0, 1.0, d, grid, EPS)?.c0_star;
    let h = SquaredSqrtModel {
        n: 1,
        k: 0,
        r: 1.0,
        c0,
    };
    let ts = t_grid(d, 20);
    let mut ok = true;
    let mut drop = 0.0_f64;
    for c in default_family(1.0)? {
        let rep = verify_monotonicity(&c, &h, &ts, spec)?;
        ok &= rep.passed;
        drop = drop.max(rep.max_drop);
    }
    Ok(outcome(
        ok,
        format!("D={d:.4} C0={c0:.3} max drop {drop:.2e} (<= {MONOTONICITY_TOL:.0e})"),
    ))
}

fn fd_vs_ad() -> Result<Outcome, LabError> {
    let mut worst = (0.0_f64, String::new());
    for (i, case) in common::field_cases().iter().enumerate() {
        let (err, _) = common::fd_ad_max_relative(case, 1000, 100 + i as u64);
        if err > worst.0 {
            worst = (err, case.field.name());
        }
    }
    Ok(outcome(
        worst.0 <= 1e-6,
        format!("max relative error {:.2e} ({})", worst.0, worst.1),
    ))
}

fn main() -> ExitCode {
    let grid = GridSpec::default();
    let spec = QuadratureSpec::default();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();

    match lemma_sweeps() {
        Ok(s) => {
            let secs = s.elapsed.as_secs_f64();
            results.push((
                1,
                "M0 eigenstructure",
                outcome(
                    s.m0 <= 1e-8 && secs < 30.0,
                    format!("max residual {:.2e} [sweep {secs:.1}s, limit 30s]", s.m0),
                ),
            ));
            results.push((
                2,
                "M1 eigenstructure and rank",
                outcome(
                    s.m1 <= 1e-8 && s.rank <= 1e-8,
                    format!("max residual {:.2e}, rank ratio {:.2e}", s.m1, s.rank),
                ),
            ));
            results.push((
                3,
                "product identity",
                outcome(s.ddcf2 <= 1e-8, format!("max residual {:.2e}", s.ddcf2)),
            ));
        }
        Err(e) => {
            for (i, name) in [
                (1, "M0 eigenstructure"),
                (2, "M1 eigenstructure and rank"),
                (3, "product identity"),
            ] {
                results.push((i, name, outcome(false, format!("error: {e}"))));
            }
        }
    }
    results.push((
        4,
        "plurisubharmonicity of the product",
        timed(None, strict_psh),
    ));
    results.push((
        5,
        "cutoff counterexample",
        timed(Some(Duration::from_secs(10)), counterexample),
    ));
    results.push((
        6,
        "beta scaling and D search",
        timed(None, || construction(&grid)),
    ));
    results.push((
        7,
        "C0 search and Duval conditions",
        timed(None, || duval(&grid)),
    ));
    results.push((
        8,
        "quadrature oracles",
        timed(None, || quadrature_oracles(&spec)),
    ));
    results.push((
        9,
        "K table",
        timed(Some(Duration::from_secs(120)), || k_table(&spec)),
    ));
    results.push((
        10,
        "monotonicity",
        timed(None, || monotonicity(&grid, &spec)),
    ));
    results.push((11, "AD against finite differences", timed(None, fd_vs_ad)));

    let mut all = true;
    for (i, name, o) in &results {
        all &= o.ok;
        println!(
            "criterion {i:>2} {}: {name}: {}",
            if o.ok { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
