//! Run configuration: a single TOML file drives every command. Defaults are
//! chosen so that an empty file is a complete, runnable sublinear demo.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{NonlinearitySpec, PotentialSpec, RadialFn, SignConvention};
use crate::exponents::GrowthParams;
use crate::grid::{build_grid, DimensionContext, GridError, RadialGrid, SpacingMode};
use crate::solve::SolverConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    /// "log" or "uniform"
    pub spacing: String,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            r_min: 1e-4,
            r_max: 50.0,
            points: 2048,
            spacing: "log".into(),
        }
    }
}

/// Optional growth data for one end of the half-line, mirroring
/// [`GrowthParams`] with config-level validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl GrowthConfig {
    fn build(&self) -> Result<GrowthParams, ConfigError> {
        match self.gamma {
            Some(g) => GrowthParams::with_floor(self.alpha, self.beta, g),
            None => GrowthParams::new(self.alpha, self.beta),
        }
        .map_err(|e| invalid(e.to_string()))
    }
}

/// Additive forcing term Q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingConfig {
    /// "none", "constant", "power", "exp_decay" or "gaussian"
    pub kind: String,
    pub coeff: f64,
    /// decay rate (exp_decay), width (gaussian) or exponent (power)
    pub rate: f64,
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self {
            kind: "none".into(),
            coeff: 0.0,
            rate: 1.0,
        }
    }
}

impl ForcingConfig {
    fn build(&self) -> Result<RadialFn, ConfigError> {
        match self.kind.as_str() {
            "none" => Ok(RadialFn::Zero),
            "constant" => Ok(RadialFn::Constant(self.coeff)),
            "power" => Ok(RadialFn::Power {
                coeff: self.coeff,
                exponent: self.rate,
            }),
            "exp_decay" => Ok(RadialFn::ExpDecay {
                coeff: self.coeff,
                rate: self.rate,
            }),
            "gaussian" => Ok(RadialFn::Gaussian {
                coeff: self.coeff,
                width: self.rate,
            }),
            other => Err(invalid(format!("unknown forcing kind \"{other}\""))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    /// "power_law", "builtin" or "table"
    pub kind: String,
    /// power_law: V = r^{-a}, K = r^{1-a}; needs 0 <= a <= 4
    pub a: f64,
    /// builtin: "unit" (V = K = 1) or "exp_k" (V = 1, K = e^{-r})
    pub name: String,
    /// table: two-column CSV files (r,value), linearly interpolated
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_file: Option<String>,
    pub forcing: ForcingConfig,
    /// growth data overrides; power_law fills both ends automatically
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<GrowthConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infinity: Option<GrowthConfig>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            kind: "power_law".into(),
            a: 2.0,
            name: "unit".into(),
            v_file: None,
            k_file: None,
            forcing: ForcingConfig::default(),
            origin: None,
            infinity: None,
        }
    }
}

fn read_table(path: &str) -> Result<RadialFn, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.into(),
        source,
    })?;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let bad = || invalid(format!("{path}:{}: expected \"r,value\"", lineno + 1));
        let r: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let v: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        if !(r.is_finite() && r > 0.0 && v.is_finite()) {
            return Err(bad());
        }
        radii.push(r);
        values.push(v);
    }
    if radii.len() < 2 {
        return Err(invalid(format!("{path}: need at least two samples")));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(format!("{path}: radii must be strictly increasing")));
    }
    Ok(RadialFn::Table {
        radii: Arc::from(radii),
        values: Arc::from(values),
    })
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec, ConfigError> {
        let mut spec = match self.kind.as_str() {
            "power_law" => {
                if !(self.a.is_finite() && (0.0..=4.0).contains(&self.a)) {
                    return Err(invalid(format!(
                        "power_law exponent a = {} outside [0, 4]",
                        self.a
                    )));
                }
                let mut s = PotentialSpec::power_law(self.a);
                let params = GrowthParams::with_floor(1.0 - self.a, 0.0, self.a)
                    .map_err(|e| invalid(e.to_string()))?;
                s.origin = Some(params);
                s.infinity = Some(params);
                s
            }
            "builtin" => match self.name.as_str() {
                "unit" => {
                    let mut s = PotentialSpec::new(
                        RadialFn::Constant(1.0),
                        RadialFn::Constant(1.0),
                        RadialFn::Zero,
                    );
                    let params =
                        GrowthParams::with_floor(0.0, 0.0, 0.0).map_err(|e| invalid(e.to_string()))?;
                    s.origin = Some(params);
                    s.infinity = Some(params);
                    s
                }
                "exp_k" => {
                    let mut s = PotentialSpec::new(
                        RadialFn::Constant(1.0),
                        RadialFn::ExpDecay { coeff: 1.0, rate: 1.0 },
                        RadialFn::Zero,
                    );
                    let params =
                        GrowthParams::with_floor(0.0, 0.0, 0.0).map_err(|e| invalid(e.to_string()))?;
                    s.origin = Some(params);
                    s.infinity = Some(params);
                    s
                }
                other => return Err(invalid(format!("unknown builtin potential \"{other}\""))),
            },
            "table" => {
                let v_file = self.v_file.as_deref().ok_or_else(|| {
                    invalid("table potential needs v_file")
                })?;
                let k_file = self.k_file.as_deref().ok_or_else(|| {
                    invalid("table potential needs k_file")
                })?;
                PotentialSpec::new(read_table(v_file)?, read_table(k_file)?, RadialFn::Zero)
            }
            other => return Err(invalid(format!("unknown potential kind \"{other}\""))),
        };
        spec.q = self.forcing.build()?;
        if let Some(o) = &self.origin {
            spec.origin = Some(o.build()?);
        }
        if let Some(i) = &self.infinity {
            spec.infinity = Some(i.build()?);
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearityConfig {
    /// "none", "pure_power" or "capped_pair"
    pub kind: String,
    pub q: f64,
    /// capped_pair parameters
    pub m: f64,
    pub q1: f64,
    pub q2: f64,
    /// "zero_on_negatives" or "odd"
    pub sign: String,
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        Self {
            kind: "pure_power".into(),
            q: 1.5,
            m: 1.0,
            q1: 1.3,
            q2: 1.8,
            sign: "zero_on_negatives".into(),
        }
    }
}

impl NonlinearityConfig {
    pub fn build(&self) -> Result<NonlinearitySpec, ConfigError> {
        let sign = match self.sign.as_str() {
            "zero_on_negatives" => SignConvention::ZeroOnNegatives,
            "odd" => SignConvention::Odd,
            other => return Err(invalid(format!("unknown sign convention \"{other}\""))),
        };
        match self.kind.as_str() {
            "none" => Ok(NonlinearitySpec::zero()),
            "pure_power" => {
                NonlinearitySpec::pure_power(self.q, sign).map_err(|e| invalid(e.to_string()))
            }
            "capped_pair" => NonlinearitySpec::capped_pair(self.m, self.q1, self.q2, sign)
                .map_err(|e| invalid(e.to_string())),
            other => Err(invalid(format!("unknown nonlinearity kind \"{other}\""))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerificationConfig {
    /// slack on ratio tests: pass iff max_ratio <= 1 + slack
    pub slack: f64,
    /// random fields for the pointwise and decay checks
    pub fields: usize,
    /// trials per embedding estimate (at least 100)
    pub trials: usize,
    pub radii_origin: Vec<f64>,
    pub radii_infinity: Vec<f64>,
    /// exponents sampled on each side
    pub origin_q: Vec<f64>,
    pub infinity_q: Vec<f64>,
    /// split radius between the inner and outer decay checks
    pub decay_split: f64,
    /// negative-control hook: scales every bound constant; 1.0 = honest
    pub constant_scale: f64,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            slack: 1e-3,
            fields: 50,
            trials: 200,
            radii_origin: (0..6).map(|k| 2f64.powi(k - 6)).collect(),
            radii_infinity: (1..7).map(|k| 2f64.powi(k)).collect(),
            origin_q: vec![5.0],
            infinity_q: vec![2.5],
            decay_split: 1.0,
            constant_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub a_values: Vec<f64>,
    pub q_values: Vec<f64>,
    /// when positive, also sample the origin functional trend per pair
    pub estimate_trials: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            a_values: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            q_values: vec![1.5, 2.5, 4.0, 5.0],
            estimate_trials: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: u32,
    /// master seed; every randomized trial derives its own stream from it
    pub seed: u64,
    pub out_dir: String,
    /// "auto", "minimize" or "mountain_pass"
    pub method: String,
    pub grid: GridConfig,
    pub potential: PotentialConfig,
    pub nonlinearity: NonlinearityConfig,
    pub solver: SolverConfig,
    pub verification: VerificationConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dimension: 5,
            seed: 1,
            out_dir: "out".into(),
            method: "auto".into(),
            grid: GridConfig::default(),
            potential: PotentialConfig::default(),
            nonlinearity: NonlinearityConfig::default(),
            solver: SolverConfig::default(),
            verification: VerificationConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Full structural validation; every command runs this before computing.
    pub fn validate(&self) -> Result<(), ConfigError> {
        DimensionContext::new(self.dimension).map_err(|e| invalid(e.to_string()))?;
        if !(self.grid.r_min.is_finite() && self.grid.r_min > 0.0) {
            return Err(invalid("grid.r_min must be positive"));
        }
        if !(self.grid.r_max.is_finite() && self.grid.r_max > self.grid.r_min) {
            return Err(invalid("grid.r_max must exceed grid.r_min"));
        }
        if self.grid.points < 16 {
            return Err(invalid("grid.points must be at least 16"));
        }
        self.spacing_mode()?;
        if !matches!(self.method.as_str(), "auto" | "minimize" | "mountain_pass") {
            return Err(invalid(format!("unknown method \"{}\"", self.method)));
        }
        self.potential.build()?;
        self.nonlinearity.build()?;
        self.solver.validate().map_err(|e| invalid(e.to_string()))?;

        let v = &self.verification;
        if !(v.slack.is_finite() && v.slack > 0.0) {
            return Err(invalid("verification.slack must be positive"));
        }
        if v.fields == 0 {
            return Err(invalid("verification.fields must be positive"));
        }
        if v.trials < 100 {
            return Err(invalid("verification.trials must be at least 100"));
        }
        for (name, radii) in [
            ("radii_origin", &v.radii_origin),
            ("radii_infinity", &v.radii_infinity),
        ] {
            if radii.is_empty()
                || radii.iter().any(|&r| !(r.is_finite() && r > 0.0))
                || radii.windows(2).any(|w| w[0] >= w[1])
            {
                return Err(invalid(format!(
                    "verification.{name} must be positive and strictly increasing"
                )));
            }
        }
        if v.origin_q.iter().chain(&v.infinity_q).any(|&q| !(q.is_finite() && q > 1.0)) {
            return Err(invalid("verification exponents must be finite and > 1"));
        }
        if !(v.decay_split.is_finite() && v.decay_split > 0.0) {
            return Err(invalid("verification.decay_split must be positive"));
        }
        if !(v.constant_scale.is_finite() && v.constant_scale > 0.0) {
            return Err(invalid("verification.constant_scale must be positive"));
        }

        if self.sweep.a_values.is_empty() || self.sweep.q_values.is_empty() {
            return Err(invalid("sweep value lists must be nonempty"));
        }
        if self
            .sweep
            .a_values
            .iter()
            .any(|&a| !(a.is_finite() && (0.0..=4.0).contains(&a)))
        {
            return Err(invalid("sweep.a_values must lie in [0, 4]"));
        }
        if self.sweep.q_values.iter().any(|&q| !q.is_finite()) {
            return Err(invalid("sweep.q_values must be finite"));
        }
        if self.sweep.estimate_trials != 0 && self.sweep.estimate_trials < 100 {
            return Err(invalid("sweep.estimate_trials must be 0 (off) or at least 100"));
        }
        Ok(())
    }

    fn spacing_mode(&self) -> Result<SpacingMode, ConfigError> {
        match self.grid.spacing.as_str() {
            "log" => Ok(SpacingMode::Logarithmic),
            "uniform" => Ok(SpacingMode::Uniform),
            other => Err(invalid(format!("unknown grid spacing \"{other}\""))),
        }
    }

    pub fn dimension_ctx(&self) -> Result<DimensionContext, ConfigError> {
        DimensionContext::new(self.dimension).map_err(|e| invalid(e.to_string()))
    }

    pub fn build_grid(&self) -> Result<RadialGrid, ConfigError> {
        let ctx = self.dimension_ctx()?;
        let mode = self.spacing_mode()?;
        build_grid(ctx, self.grid.r_min, self.grid.r_max, self.grid.points, mode)
            .map_err(|e: GridError| invalid(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg, back);
        // and once more through the serializer for fixed-point behavior
        assert_eq!(text, back.to_toml());
    }

    #[test]
    fn empty_file_is_the_default_config() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let cfg = RunConfig::parse(
            "seed = 7\n[potential]\nkind = \"power_law\"\na = 4.0\n[grid]\npoints = 256\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.potential.a, 4.0);
        assert_eq!(cfg.grid.points, 256);
        assert_eq!(cfg.grid.r_max, 50.0);
        assert_eq!(cfg.dimension, 5);
    }

    #[test]
    fn rejects_out_of_hypothesis_power_law() {
        let err = RunConfig::parse("[potential]\nkind = \"power_law\"\na = 5.0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)), "{err}");
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::parse("no_such_key = 1").is_err());
        assert!(RunConfig::parse("[grid]\npoints = 4").is_err());
        assert!(RunConfig::parse("[grid]\nspacing = \"cubic\"").is_err());
        assert!(RunConfig::parse("[nonlinearity]\nkind = \"pure_power\"\nq = 0.5").is_err());
        assert!(RunConfig::parse("[verification]\ntrials = 10").is_err());
        assert!(RunConfig::parse("[verification]\nconstant_scale = 0.0").is_err());
        assert!(RunConfig::parse("method = \"bisect\"").is_err());
        assert!(RunConfig::parse("[sweep]\na_values = [5.0]").is_err());
    }

    #[test]
    fn power_law_fills_growth_data() {
        let cfg = RunConfig::parse("[potential]\nkind = \"power_law\"\na = 2.0\n").unwrap();
        let spec = cfg.potential.build().unwrap();
        let o = spec.origin.unwrap();
        assert_eq!(o.alpha, -1.0);
        assert_eq!(o.beta, 0.0);
        assert_eq!(o.gamma, Some(2.0));
        assert_eq!(spec.infinity.unwrap(), o);
    }

    #[test]
    fn explicit_growth_overrides_power_law() {
        let cfg = RunConfig::parse(
            "[potential]\nkind = \"power_law\"\na = 2.0\n[potential.origin]\nalpha = 1.0\nbeta = 0.25\n",
        )
        .unwrap();
        let spec = cfg.potential.build().unwrap();
        let o = spec.origin.unwrap();
        assert_eq!(o.alpha, 1.0);
        assert_eq!(o.beta, 0.25);
        assert_eq!(o.gamma, None);
        assert_eq!(spec.infinity.unwrap().gamma, Some(2.0));
    }

    #[test]
    fn table_potential_reads_csv_files() {
        let dir = tempfile::tempdir().unwrap();
        let v_path = dir.path().join("v.csv");
        let k_path = dir.path().join("k.csv");
        std::fs::write(&v_path, "# radius, value\n0.1, 1.0\n1.0, 1.0\n10.0, 1.0\n").unwrap();
        std::fs::write(&k_path, "0.1, 2.0\n10.0, 2.0\n").unwrap();
        let text = format!(
            "[potential]\nkind = \"table\"\nv_file = {:?}\nk_file = {:?}\n",
            v_path, k_path
        );
        let cfg = RunConfig::parse(&text).unwrap();
        let spec = cfg.potential.build().unwrap();
        assert_eq!(spec.v.eval(0.5), 1.0);
        assert_eq!(spec.k.eval(5.0), 2.0);
        // clamped outside the table range
        assert_eq!(spec.k.eval(100.0), 2.0);

        std::fs::write(&k_path, "1.0, 2.0\n0.5, 2.0\n").unwrap();
        assert!(cfg.potential.build().is_err());
    }

    #[test]
    fn forcing_kinds_build() {
        for (kind, expect_zero) in [("none", true), ("exp_decay", false), ("gaussian", false)] {
            let text = format!(
                "[potential.forcing]\nkind = \"{kind}\"\ncoeff = 0.5\nrate = 2.0\n"
            );
            let cfg = RunConfig::parse(&text).unwrap();
            let spec = cfg.potential.build().unwrap();
            assert_eq!(spec.q.is_zero(), expect_zero, "{kind}");
        }
        assert!(RunConfig::parse("[potential.forcing]\nkind = \"saw\"").is_err());
    }

    #[test]
    fn builders_produce_consistent_objects() {
        let cfg = RunConfig::default();
        let grid = cfg.build_grid().unwrap();
        assert_eq!(grid.len(), 2048);
        let pot = cfg.potential.build().unwrap();
        pot.sample(&grid).unwrap();
        let nl = cfg.nonlinearity.build().unwrap();
        assert_eq!(nl.effective_theta(), Some(1.5));
    }
}
