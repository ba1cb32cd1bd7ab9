//! Verification suites assembled into a [`VerificationReport`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    counterexample_scan, lemma_sweep, sample_off_tube, sample_off_v, sample_variety_v,
    verify_strict_psh_prod, VARIETY_TOL,
};
use crate::config::{HChoice, RunConfig, Suite};
use crate::construction::{
    beta_scaling_sweep, max_min_ratio, search_c0, search_d, verify_duval_conditions,
    verify_metric_domination_sqrt_model, ConstantEstimates, PSD_TOL,
};
use crate::curves::measure::{
    area_g, estimate_k, length_g, t_grid, verify_monotonicity, RegionSpec, MONOTONICITY_TOL,
};
use crate::curves::{make_sector_inclusion, CURVE_TOL};
use crate::error::LabError;
use crate::model::{ModelParams, SquaredSqrtModel};
use crate::report::{CheckRecord, CurveRow, RadiusRow, VerificationReport};

/// Residual bound of the eigenstructure and identity checks.
pub const LEMMA_TOL: f64 = 1e-8;
/// Eigenvalue that counts as a failure of weak plurisubharmonicity.
pub const NEGATIVITY_TOL: f64 = 1e-6;
/// Smallest acceptable `D*`.
pub const D_FLOOR: f64 = 1e-2;
/// Largest acceptable `max / min` ratio over `r`.
pub const R_RATIO_CAP: f64 = 2.0;
/// Tolerance of the closed-form oracles for areas and lengths.
pub const ORACLE_TOL: f64 = 1e-6;
/// Tolerance of the sector `K` oracle.
pub const K_ORACLE_TOL: f64 = 0.01;
/// `s` of the sector `K` oracle.
pub const K_ORACLE_S: f64 = 0.02;

/// Sector `K` from the closed forms: length `2(R − b)`, tube area
/// `2∫₀^s √(R² − x²) dx − s²`.
pub fn sector_k_closed_form(radius: f64, ball: f64, s: f64) -> (f64, f64, f64) {
    let half = 0.5 * (s * (radius * radius - s * s).sqrt() + radius * radius * (s / radius).asin());
    let area = 2.0 * half - s * s;
    let length = 2.0 * (radius - ball);
    (length, area, s * length / area)
}

struct Runner<'a> {
    config: &'a RunConfig,
    report: VerificationReport,
    log: &'a mut dyn FnMut(&CheckRecord),
    d_star: Option<f64>,
}

impl Runner<'_> {
    fn push(&mut self, check: CheckRecord) {
        (self.log)(&check);
        self.report.push(check);
    }

    fn model(&self) -> &ModelParams {
        &self.config.model
    }

    fn d_star(&mut self) -> Result<f64, LabError> {
        if let Some(d) = self.d_star {
            return Ok(d);
        }
        let m = self.model();
        let s = search_d(
            m.n,
            m.k,
            &self.config.grids.construction,
            self.config.constants.d_refinements,
        )?;
        self.d_star = Some(s.d_star);
        Ok(s.d_star)
    }

    fn lemmas(&mut self) -> Result<(), LabError> {
        const S: &str = "lemmas";
        let (n, k, eps) = (self.model().n, self.model().k, self.model().eps);
        let g = &self.config.grids;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let points = sample_off_tube(n, k, g.lemma_points, g.tube_margin, &mut rng);
        let sweep = lemma_sweep(&points, n, k, eps)?;
        let w = sweep.worst_point.as_ref();
        let detail = format!("n={n} k={k} points={}", sweep.points);
        self.push(
            CheckRecord::at_most(S, "m0_eigenstructure", sweep.m0_max_residual, LEMMA_TOL)
                .with_witness(w)
                .with_detail(detail.clone()),
        );
        self.push(
            CheckRecord::at_most(S, "m1_eigenstructure", sweep.m1_max_residual, LEMMA_TOL)
                .with_witness(w)
                .with_detail(detail.clone()),
        );
        self.push(
            CheckRecord::at_most(S, "m1_rank_two", sweep.m1_max_rank_ratio, LEMMA_TOL)
                .with_detail(detail.clone()),
        );
        self.push(
            CheckRecord::at_most(S, "product_identity", sweep.ddcf2_max_residual, LEMMA_TOL)
                .with_witness(w)
                .with_detail(detail),
        );
        if sweep.m0_degenerate > 0 {
            self.push(
                CheckRecord::flagged(S, "m0_vector_vanishes", sweep.m0_degenerate as f64)
                    .with_detail("k = n: v0 is zero, only the complement was checked"),
            );
        }

        let on_v = sample_variety_v(n, k, g.variety_points, &mut rng)?;
        let off_v = sample_off_v(n, k, g.variety_points, 0.1, &mut rng)?;
        let on_res = on_v
            .iter()
            .flat_map(|s| s.residuals)
            .fold(0.0_f64, f64::max);
        self.push(CheckRecord::at_most(
            S,
            "variety_samples",
            on_res,
            VARIETY_TOL,
        ));
        let psh = verify_strict_psh_prod(n, k, &points, &on_v, &off_v, eps)?;
        self.push(
            CheckRecord::at_least(S, "sqrt_product_weakly_psh", psh.weak_sqrt_min, -PSD_TOL)
                .with_witness(psh.weak_sqrt_witness.as_ref()),
        );
        self.push(
            CheckRecord::at_most(
                S,
                "product_degenerate_on_v",
                psh.on_v_max_small_eig,
                LEMMA_TOL,
            )
            .with_witness(psh.on_v_witness.as_ref()),
        );
        self.push(
            CheckRecord::new(
                S,
                "product_strict_off_v",
                psh.strict_off_v_ok,
                psh.off_v_min_eig,
                Some(0.0),
            )
            .with_witness(psh.off_v_witness.as_ref()),
        );
        Ok(())
    }

    fn counterexample(&mut self) -> Result<(), LabError> {
        const S: &str = "counterexample";
        let cfg = &self.config.counterexample;
        let grid = &self.config.grids.counterexample;
        let res = counterexample_scan(cfg.cutoff, grid)?;
        let name = format!("{:?}", cfg.cutoff).to_lowercase();
        self.push(
            CheckRecord::at_most(
                S,
                "negative_eigenvalue",
                res.min_eigenvalue,
                -NEGATIVITY_TOL,
            )
            .with_witness(Some(&res.witness))
            .with_detail(format!("cutoff={name} points={}", res.points_scanned)),
        );
        self.push(CheckRecord::at_most(
            S,
            "negative_on_slice_y1_0_y2_1",
            res.slice_min_eigenvalue,
            -NEGATIVITY_TOL,
        ));
        self.push(
            CheckRecord::new(
                S,
                "deficiency_negative_at_witness",
                res.deficiency_at_witness < 0.0,
                res.deficiency_at_witness,
                Some(0.0),
            )
            .with_detail(format!(
                "min deficiency {:.3e} at t={:.4}",
                res.min_deficiency, res.min_deficiency_t
            )),
        );
        for &other in &cfg.explore {
            let r = counterexample_scan(other, grid)?;
            let name = format!("{other:?}").to_lowercase();
            self.push(
                CheckRecord::flagged(S, &format!("explore_{name}"), r.min_eigenvalue)
                    .with_witness(Some(&r.witness))
                    .with_detail(format!("min deficiency {:.3e}", r.min_deficiency)),
            );
        }
        Ok(())
    }

    fn construction(&mut self) -> Result<(), LabError> {
        const S: &str = "construction";
        let (n, k) = (self.model().n, self.model().k);
        for (i, &r) in self.config.constants.scaling_r_values.iter().enumerate() {
            let res = beta_scaling_sweep(n, k, r, 100, self.config.seed.wrapping_add(i as u64))?;
            self.push(CheckRecord::at_most(
                S,
                &format!("beta_scaling_r={r}"),
                res,
                1e-9,
            ));
        }
        let search = match search_d(
            n,
            k,
            &self.config.grids.construction,
            self.config.constants.d_refinements,
        ) {
            Ok(s) => s,
            Err(LabError::Infeasible(msg)) => {
                self.push(
                    CheckRecord::new(S, "d_star", false, 0.0, Some(D_FLOOR)).with_detail(msg),
                );
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        self.d_star = Some(search.d_star);
        self.push(
            CheckRecord::at_least(S, "d_star", search.d_star, D_FLOOR)
                .with_detail(format!("n={n} k={k} evaluations={}", search.schedule.len())),
        );
        self.push(CheckRecord::new(
            S,
            "d_search_monotone",
            search.monotone,
            f64::from(u8::from(search.monotone)),
            None,
        ));
        self.push(CheckRecord::at_least(
            S,
            "beta_weakly_psh_on_v_dstar",
            search.min_relative_eig,
            -PSD_TOL,
        ));
        Ok(())
    }

    fn constants(&mut self) -> Result<(), LabError> {
        const S: &str = "constants";
        let m = self.model().clone();
        let grid = self.config.grids.construction;
        let d_star = match self.d_star() {
            Ok(d) => d,
            Err(LabError::Infeasible(msg)) => {
                self.push(
                    CheckRecord::new(S, "c0_feasible", false, f64::NAN, None).with_detail(msg),
                );
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        let d = 0.5 * d_star;
        let c0 = match search_c0(m.n, m.k, m.r, d, &grid, m.eps) {
            Ok(c) => c,
            Err(LabError::Infeasible(msg)) => {
                self.push(
                    CheckRecord::new(S, "c0_feasible", false, f64::NAN, Some(1e3)).with_detail(msg),
                );
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        self.push(
            CheckRecord::at_most(S, "c0_feasible", c0.c0_star, 1e3)
                .with_witness(c0.witness.as_ref())
                .with_detail(format!(
                    "D={d:.4} active={}/{}",
                    c0.active_points, c0.grid_points
                )),
        );
        self.push(CheckRecord::new(
            S,
            "c0_search_monotone",
            c0.monotone,
            c0.c0_star,
            None,
        ));
        let tube_min = c0
            .tube_limit
            .iter()
            .map(|t| t.1)
            .fold(f64::INFINITY, f64::min);
        self.push(
            CheckRecord::flagged(S, "c0_tube_limit", tube_min)
                .with_detail(format!("weakly psh down to 1e-6 r: {}", c0.tube_limit_ok)),
        );

        let recommended = ModelParams {
            d,
            c0: 2.0 * c0.c0_star,
            s: m.s.min(0.5 * d * m.r),
            ..m.clone()
        }
        .validated()?;
        let duval = verify_duval_conditions(&recommended, &grid, self.config.seed)?;
        for c in &duval.conditions {
            self.push(
                CheckRecord::new(
                    S,
                    &format!("duval_condition_{}", c.id),
                    c.passed,
                    c.value,
                    None,
                )
                .with_witness(c.witness.as_ref())
                .with_detail(if c.vacuous {
                    format!("{}; vacuous", c.name)
                } else {
                    c.name.clone()
                }),
            );
        }
        self.report.constants = Some(ConstantEstimates {
            d_star,
            c0_star: c0.c0_star,
            ..duval.constants.inflated()
        });

        let mut rows = Vec::new();
        for &r in &self.config.constants.r_values {
            let c = search_c0(m.n, m.k, r, d, &grid, m.eps)?;
            let params = ModelParams {
                r,
                ..recommended.clone()
            };
            let dom = verify_metric_domination_sqrt_model(&params, &grid)?;
            rows.push(RadiusRow {
                r,
                c0_star: c.c0_star,
                c1_prime: dom.c1_prime,
                c2_prime: dom.c2_prime,
            });
        }
        let c0_ratio = max_min_ratio(rows.iter().map(|r| r.c0_star));
        let c1_ratio = max_min_ratio(rows.iter().map(|r| r.c1_prime));
        self.push(CheckRecord::at_most(
            S,
            "c0_r_independence",
            c0_ratio,
            R_RATIO_CAP,
        ));
        self.push(CheckRecord::at_most(
            S,
            "c1_prime_r_independence",
            c1_ratio,
            R_RATIO_CAP,
        ));
        self.report.radius_table = rows;

        let user = verify_duval_conditions(&m, &grid, self.config.seed)?;
        let failed: Vec<u8> = user
            .conditions
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id)
            .collect();
        self.push(
            CheckRecord::flagged(S, "configured_params_duval", failed.len() as f64).with_detail(
                format!("D={} C0={}: failing conditions {failed:?}", m.d, m.c0),
            ),
        );
        Ok(())
    }

    fn curves(&mut self) -> Result<(), LabError> {
        const S: &str = "curves";
        let cfg = &self.config.curves;
        let family = cfg.build_family()?;
        for c in &family {
            let r = c.residuals(64);
            self.push(
                CheckRecord::at_most(
                    S,
                    &format!("residuals/{}", c.name),
                    r.cauchy_riemann.max(r.boundary_label),
                    CURVE_TOL,
                )
                .with_detail(format!(
                    "analytic derivative mismatch {:.1e}",
                    r.derivative_mismatch
                )),
            );
        }

        let sector = make_sector_inclusion(cfg.radius)?;
        let (len_cf, area_cf, k_cf) = sector_k_closed_form(cfg.radius, cfg.ball_radius, K_ORACLE_S);
        let area = area_g(
            &sector,
            &RegionSpec::Tubes { s: K_ORACLE_S },
            &cfg.quadrature,
        )?
        .value;
        let len = length_g(
            &sector,
            &RegionSpec::OutsideBall {
                radius: cfg.ball_radius,
            },
            &cfg.quadrature,
        )?
        .value;
        self.push(CheckRecord::at_most(
            S,
            "sector_area_oracle",
            (area - area_cf).abs(),
            ORACLE_TOL,
        ));
        self.push(CheckRecord::at_most(
            S,
            "sector_length_oracle",
            (len - len_cf).abs(),
            ORACLE_TOL,
        ));
        self.push(
            CheckRecord::at_most(
                S,
                "sector_k_oracle",
                (K_ORACLE_S * len / area - k_cf).abs(),
                K_ORACLE_TOL,
            )
            .with_detail(format!(
                "K({K_ORACLE_S}) = {:.6}, closed form {k_cf:.6}",
                K_ORACLE_S * len / area
            )),
        );

        let table = estimate_k(&family, &cfg.s_values, cfg.ball_radius, &cfg.quadrature)?;
        for row in table.rows.iter().filter(|r| r.flagged) {
            self.push(
                CheckRecord::flagged(S, &format!("negligible_tube_area/{}", row.curve), row.area)
                    .with_detail(format!("s={}", row.s)),
            );
        }
        let finite = table.rows.iter().all(|r| r.k.is_finite());
        self.push(CheckRecord::new(S, "k_finite", finite, table.sup, None));
        self.push(CheckRecord::at_most(S, "k_sup", table.sup, cfg.k_cap));
        self.push(
            CheckRecord::at_most(S, "k_drift_under_halving", table.max_drift, cfg.max_drift)
                .with_detail(
                    table
                        .drift
                        .iter()
                        .map(|(n, d)| format!("{n}:{d:.4}"))
                        .collect::<Vec<_>>()
                        .join(" "),
                ),
        );

        let (d, c0) = match cfg.h {
            HChoice::Fixed { d, c0 } => (d, c0),
            HChoice::Searched => {
                let grid = self.config.grids.construction;
                let ds = search_d(1, 0, &grid, self.config.constants.d_refinements)?.d_star;
                let c = search_c0(1, 0, cfg.h_r, 0.5 * ds, &grid, self.model().eps)?;
                (0.5 * ds, 2.0 * c.c0_star)
            }
        };
        let h = SquaredSqrtModel {
            n: 1,
            k: 0,
            r: cfg.h_r,
            c0,
        };
        let ts = t_grid(d * cfg.h_r, cfg.t_points);
        let mut monotone = Vec::new();
        for c in &family {
            let rep = verify_monotonicity(c, &h, &ts, &cfg.quadrature)?;
            self.push(
                CheckRecord::at_most(
                    S,
                    &format!("monotonicity/{}", c.name),
                    rep.max_drop,
                    MONOTONICITY_TOL,
                )
                .with_detail(format!("D={d:.4} C0={c0:.4} t_max={:.4}", d * cfg.h_r)),
            );
            monotone.push((c.name.clone(), rep.passed));
        }
        self.report.curve_rows = table
            .rows
            .into_iter()
            .map(|row| {
                let ok = monotone.iter().any(|(n, ok)| *n == row.curve && *ok);
                CurveRow {
                    k: row,
                    monotonic: ok,
                }
            })
            .collect();
        Ok(())
    }
}

/// Runs `suites` in a fixed order, calling `log` on every check as it is
/// recorded.
pub fn run_suites(
    config: &RunConfig,
    suites: &[Suite],
    warnings: Vec<String>,
    log: &mut dyn FnMut(&CheckRecord),
) -> Result<VerificationReport, LabError> {
    let mut ordered = suites.to_vec();
    ordered.sort();
    ordered.dedup();
    let mut runner = Runner {
        config,
        report: VerificationReport::new(config),
        log,
        d_star: None,
    };
    runner.report.warnings = warnings;
    for s in ordered {
        runner.report.suites.push(s.name().into());
        match s {
            Suite::Lemmas => runner.lemmas()?,
            Suite::Construction => runner.construction()?,
            Suite::Counterexample => runner.counterexample()?,
            Suite::Constants => runner.constants()?,
            Suite::Curves => runner.curves()?,
        }
    }
    Ok(runner.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sector_closed_form_value() {
        let (len, area, k) = sector_k_closed_form(1.0, 0.1, 0.02);
        assert_relative_eq!(len, 1.8, epsilon = 1e-15);
        // ∫₀^s √(1 − x²) dx = s − s³/6 − s⁵/40 − …
        let s: f64 = 0.02;
        let series = 2.0 * (s - s.powi(3) / 6.0 - s.powi(5) / 40.0) - s * s;
        assert_relative_eq!(area, series, epsilon = 1e-12);
        assert!((k - 0.909).abs() < 0.01);
    }
}
