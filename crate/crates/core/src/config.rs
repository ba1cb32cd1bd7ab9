//! Run configuration, read from a single JSON document.

use serde::{Deserialize, Serialize};

use crate::analysis::CounterexampleGrid;
use crate::construction::GridSpec;
use crate::curves::{
    make_power_curve, make_reflected_polynomial, make_sector_inclusion, CurveSpec, QuadratureSpec,
};
use crate::error::LabError;
use crate::model::{CutoffProfile, ModelParams};

/// A verification suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemmas,
    Construction,
    Counterexample,
    Constants,
    Curves,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Lemmas,
        Suite::Construction,
        Suite::Counterexample,
        Suite::Constants,
        Suite::Curves,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemmas => "lemmas",
            Suite::Construction => "construction",
            Suite::Counterexample => "counterexample",
            Suite::Constants => "constants",
            Suite::Curves => "curves",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grids {
    /// Random points per lemma sweep.
    pub lemma_points: usize,
    /// Points on and off the degeneracy variety.
    pub variety_points: usize,
    /// Minimum distance of sweep points from both planes.
    pub tube_margin: f64,
    /// Reduced-coordinate grid for the construction searches.
    pub construction: GridSpec,
    pub counterexample: CounterexampleGrid,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            lemma_points: 10_000,
            variety_points: 100,
            tube_margin: 1e-3,
            construction: GridSpec::default(),
            counterexample: CounterexampleGrid::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    /// Radii of the `r`-independence sweep.
    pub r_values: Vec<f64>,
    /// Radii of the `β` scaling check.
    pub scaling_r_values: Vec<f64>,
    /// Bisection steps refining `D*`.
    pub d_refinements: usize,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            r_values: vec![0.4, 0.2, 0.1, 0.05],
            scaling_r_values: vec![0.3, 0.1, 0.03],
            d_refinements: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CounterexampleConfig {
    /// Cutoff whose failure is asserted.
    pub cutoff: CutoffProfile,
    /// Cutoffs scanned and recorded without assertion.
    pub explore: Vec<CutoffProfile>,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            cutoff: CutoffProfile::Exp,
            explore: vec![CutoffProfile::Blend],
        }
    }
}

/// One member of a curve family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveEntry {
    /// `z` on the quarter disk.
    Sector {},
    /// `c·z^{m/2}` on the upper half disk.
    Power { m: u32, c: f64 },
    /// Real polynomial of one parity on the quarter disk.
    Polynomial {
        coeffs: Vec<f64>,
        #[serde(default)]
        name: Option<String>,
    },
}

impl CurveEntry {
    pub fn build(&self, radius: f64) -> Result<CurveSpec, LabError> {
        match self {
            CurveEntry::Sector {} => make_sector_inclusion(radius),
            CurveEntry::Power { m, c } => make_power_curve(*m, *c, radius),
            CurveEntry::Polynomial { coeffs, name } => {
                let mut c = make_reflected_polynomial(coeffs, radius)?;
                if let Some(n) = name {
                    c.name.clone_from(n);
                }
                Ok(c)
            }
        }
    }
}

/// Parameters of the function `h` used for the monotonicity check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum HChoice {
    /// `D = D*/2`, `C₀ = 2·C₀*` from the searches for `n = 1, k = 0`.
    Searched,
    Fixed {
        d: f64,
        c0: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurvesConfig {
    /// Domain radius `R`.
    pub radius: f64,
    /// Radius of the excised neighborhood `B` of the intersection.
    pub ball_radius: f64,
    pub s_values: Vec<f64>,
    /// Empirical cap on `K`.
    pub k_cap: f64,
    /// Allowed relative change of `K` between consecutive `s` values.
    pub max_drift: f64,
    /// Scale `r` of the function `h`.
    pub h_r: f64,
    pub h: HChoice,
    /// Points of the monotonicity grid in `(0, D·r]`.
    pub t_points: usize,
    pub family: Vec<CurveEntry>,
    pub quadrature: QuadratureSpec,
}

impl Default for CurvesConfig {
    fn default() -> Self {
        Self {
            radius: 1.0,
            ball_radius: 0.1,
            s_values: vec![0.05, 0.025, 0.0125],
            k_cap: 2.0,
            max_drift: 0.1,
            h_r: 1.0,
            h: HChoice::Searched,
            t_points: 20,
            family: vec![
                CurveEntry::Sector {},
                CurveEntry::Power { m: 1, c: 1.0 },
                CurveEntry::Power { m: 3, c: 1.0 },
                CurveEntry::Polynomial {
                    coeffs: vec![0.0, 0.0, 1.0],
                    name: Some("z^2".into()),
                },
                CurveEntry::Polynomial {
                    coeffs: vec![0.0, 1.0, 0.0, 0.2],
                    name: Some("z+z^3/5".into()),
                },
            ],
            quadrature: QuadratureSpec::default(),
        }
    }
}

impl CurvesConfig {
    pub fn build_family(&self) -> Result<Vec<CurveSpec>, LabError> {
        if self.family.is_empty() {
            return Err(LabError::Config("curve family is empty".into()));
        }
        self.family.iter().map(|e| e.build(self.radius)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Report file name inside the output directory.
    pub report: String,
    /// Sweep CSV file name inside the output directory.
    pub csv: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            report: "report.json".into(),
            csv: "curves.csv".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelParams,
    /// Suites run by `all`.
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub grids: Grids,
    pub constants: ConstantsConfig,
    pub counterexample: CounterexampleConfig,
    pub curves: CurvesConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            suites: Suite::ALL.to_vec(),
            seed: 20240611,
            grids: Grids::default(),
            constants: ConstantsConfig::default(),
            counterexample: CounterexampleConfig::default(),
            curves: CurvesConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let mut cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks every invariant; returns warnings from parameter clamping.
    pub fn validate(&mut self) -> Result<Vec<String>, LabError> {
        let warnings = self.model.validate()?;
        if self.suites.is_empty() {
            return Err(LabError::Config("no suites selected".into()));
        }
        if self.grids.lemma_points == 0 || self.grids.variety_points == 0 {
            return Err(LabError::Config("sample counts must be positive".into()));
        }
        if !(self.grids.tube_margin > 0.0 && self.grids.tube_margin < 0.5) {
            return Err(LabError::Config("tube_margin must lie in (0, 1/2)".into()));
        }
        let g = &self.grids.construction;
        if g.radial < 2 || g.tube < 2 {
            return Err(LabError::Config(
                "construction grid needs at least 2 radial and tube samples".into(),
            ));
        }
        if self.constants.r_values.is_empty()
            || self
                .constants
                .r_values
                .iter()
                .chain(&self.constants.scaling_r_values)
                .any(|r| !(*r > 0.0 && r.is_finite()))
        {
            return Err(LabError::Config("radii must be positive".into()));
        }
        let c = &self.curves;
        if c.family.is_empty() {
            return Err(LabError::Config("curve family is empty".into()));
        }
        if !(c.radius > 0.0 && c.ball_radius >= 0.0 && c.h_r > 0.0 && c.k_cap > 0.0) {
            return Err(LabError::Config(
                "curve radii and K cap must be positive".into(),
            ));
        }
        if c.s_values.is_empty() || c.s_values.iter().any(|s| !(*s > 0.0)) {
            return Err(LabError::Config("s values must be positive".into()));
        }
        if c.t_points < 2 {
            return Err(LabError::Config("t_points must be at least 2".into()));
        }
        if let HChoice::Fixed { d, c0 } = c.h {
            if !(d > 0.0 && d <= 0.5 && c0 >= 0.0) {
                return Err(LabError::Config(
                    "fixed h needs D in (0, 1/2] and C0 >= 0".into(),
                ));
            }
        }
        if !(c.quadrature.tol > 0.0 && c.quadrature.line_samples >= 4) {
            return Err(LabError::Config(
                "quadrature needs tol > 0 and line_samples >= 4".into(),
            ));
        }
        Ok(warnings)
    }

    /// Canonical JSON of the effective configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_json(&cfg.canonical_json()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_json(r#"{"modle": {}}"#).is_err());
        assert!(
            RunConfig::from_json(r#"{"curves": {"family": [{"kind": "sector", "x": 1}]}}"#)
                .is_err()
        );
    }

    #[test]
    fn k_above_n_names_invariant() {
        let err = RunConfig::from_json(
            r#"{"model": {"n": 1, "k": 2, "r": 0.5, "d": 0.1, "c0": 1, "s": 0.01}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("k must satisfy 0 <= k <= n"));
    }

    #[test]
    fn empty_family_rejected() {
        assert!(RunConfig::from_json(r#"{"curves": {"family": []}}"#).is_err());
    }
}
