//! Pinned constants per `(n, k)`; drift beyond the fixture tolerance fails.

use psh_lab::construction::{search_c0, search_d, verify_duval_conditions, GridSpec};
use psh_lab::ModelParams;
use serde::Deserialize;

#[derive(Deserialize)]
struct Entry {
    n: usize,
    k: usize,
    d_star: f64,
    c0_star: f64,
    c1: f64,
    c2: f64,
    a1: f64,
}

#[derive(Deserialize)]
struct Baselines {
    grid: GridSpec,
    r: f64,
    d_refinements: usize,
    tolerance: f64,
    entries: Vec<Entry>,
}

fn close(name: &str, got: f64, want: f64, tol: f64) {
    let ok = if want == 0.0 {
        got.abs() <= 1e-9
    } else {
        ((got - want) / want).abs() <= tol
    };
    assert!(ok, "{name}: got {got}, baseline {want}");
}

#[test]
fn constants_match_baselines() {
    let text = include_str!("fixtures/baselines.json");
    let b: Baselines = serde_json::from_str(text).unwrap();
    for e in &b.entries {
        let d = search_d(e.n, e.k, &b.grid, b.d_refinements).unwrap().d_star;
        let c0 = search_c0(e.n, e.k, b.r, 0.5 * d, &b.grid, 1e-6)
            .unwrap()
            .c0_star;
        let params = ModelParams {
            n: e.n,
            k: e.k,
            r: b.r,
            d: 0.5 * d,
            c0: 2.0 * c0,
            s: 0.01,
            eps: 1e-6,
        }
        .validated()
        .unwrap();
        let duval = verify_duval_conditions(&params, &b.grid, 1).unwrap();
        assert!(duval.passed(), "({}, {}) Duval conditions", e.n, e.k);
        let tag = |s: &str| format!("({}, {}) {s}", e.n, e.k);
        close(&tag("D*"), d, e.d_star, b.tolerance);
        close(&tag("C0*"), c0, e.c0_star, b.tolerance);
        close(&tag("C1"), duval.constants.c1, e.c1, b.tolerance);
        close(&tag("C2"), duval.constants.c2, e.c2, b.tolerance);
        close(&tag("A1"), duval.constants.a1, e.a1, b.tolerance);
    }
}
