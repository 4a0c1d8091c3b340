//! Experiment configuration files.
//!
//! A config is one flat JSON object. Fields that the chosen experiment does
//! not use are rejected along with unknown keys, so a typo never silently
//! falls back to a default.

use std::path::{Path, PathBuf};

use cpree_core::background::{BackgroundLaw, InitLaw};
use cpree_core::estimators::FstcVariant;
use cpree_core::renormalization::BlockGeometry;
use cpree_core::stats::config_digest;
use cpree_core::{Boundary, Lattice, LatticeBox, Params, Site};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_VERSION: u32 = 1;
pub const SEED_ENV: &str = "CPREE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Survival,
    Duality,
    UpperDensity,
    CriticalScan,
    Fstc,
    Orthant,
    Blocks,
    Field,
    OpCompare,
    OracleCompare,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Survival => "survival",
            ExperimentKind::Duality => "duality",
            ExperimentKind::UpperDensity => "upper-density",
            ExperimentKind::CriticalScan => "critical-scan",
            ExperimentKind::Fstc => "fstc",
            ExperimentKind::Orthant => "orthant",
            ExperimentKind::Blocks => "blocks",
            ExperimentKind::Field => "field",
            ExperimentKind::OpCompare => "op-compare",
            ExperimentKind::OracleCompare => "oracle-compare",
        }
    }

    /// Experiment-specific keys, beyond the common ones.
    fn keys(self) -> (&'static [&'static str], &'static [&'static str]) {
        // (required, optional)
        match self {
            ExperimentKind::Survival => (&["params", "box", "horizon"], &["init"]),
            ExperimentKind::Duality => (&["params", "box", "t", "A", "B"], &[]),
            ExperimentKind::UpperDensity => (&["params", "box", "t_grid"], &[]),
            ExperimentKind::CriticalScan => (&["params", "box", "horizon", "p_grid", "threshold"], &["init"]),
            ExperimentKind::Fstc => (&["params", "n", "L", "T", "variant"], &[]),
            ExperimentKind::Orthant => (&["params", "n", "L", "T", "N", "M"], &[]),
            ExperimentKind::Blocks => (&["params", "geometry"], &["start"]),
            ExperimentKind::Field => (&["params", "geometry", "field_rows", "p_target"], &[]),
            ExperimentKind::OpCompare => (&["p_grid", "depth"], &[]),
            ExperimentKind::OracleCompare => (&["params", "box", "t"], &["A", "B"]),
        }
    }

    /// Whether the main artifact is the JSON report rather than CSV.
    pub fn writes_json(self) -> bool {
        self == ExperimentKind::Field
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Block geometry in config form; the dimension comes from `params`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub n: u32,
    pub a: u32,
    pub b: f64,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockStart {
    pub x: Site,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Params>,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub lattice_box: Option<LatticeBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitLaw>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub set_a: Option<Vec<Site>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub set_b: Option<Vec<Site>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<OneOrMany<u32>>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub big_t: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<FstcVariant>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub volume_levels: Option<Vec<u64>>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub side_levels: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<BlockStart>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    pub replicates: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// Command-line overrides, highest priority.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

/// A validated config with every run setting resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub workers: usize,
    pub output_path: PathBuf,
    /// Hash of the canonical config with the seed filled in and the
    /// settings that cannot change results (workers, output path) removed.
    pub digest: String,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn core_invalid(e: cpree_core::Error) -> CliError {
    CliError::Validation(e.to_string())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn present_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut mark = |present: bool, key: &'static str| {
            if present {
                keys.push(key);
            }
        };
        mark(self.params.is_some(), "params");
        mark(self.lattice_box.is_some(), "box");
        mark(self.horizon.is_some(), "horizon");
        mark(self.init.is_some(), "init");
        mark(self.set_a.is_some(), "A");
        mark(self.set_b.is_some(), "B");
        mark(self.t.is_some(), "t");
        mark(self.t_grid.is_some(), "t_grid");
        mark(self.p_grid.is_some(), "p_grid");
        mark(self.threshold.is_some(), "threshold");
        mark(self.n.is_some(), "n");
        mark(self.l.is_some(), "L");
        mark(self.big_t.is_some(), "T");
        mark(self.variant.is_some(), "variant");
        mark(self.volume_levels.is_some(), "N");
        mark(self.side_levels.is_some(), "M");
        mark(self.geometry.is_some(), "geometry");
        mark(self.start.is_some(), "start");
        mark(self.field_rows.is_some(), "field_rows");
        mark(self.p_target.is_some(), "p_target");
        mark(self.depth.is_some(), "depth");
        keys
    }

    pub fn params(&self) -> Params {
        self.params.expect("validated")
    }

    pub fn lattice_box(&self) -> LatticeBox {
        self.lattice_box.expect("validated")
    }

    pub fn init(&self) -> InitLaw {
        self.init
            .clone()
            .unwrap_or_else(|| InitLaw::new(BackgroundLaw::Stationary, vec![vec![0; self.params().d]]))
    }

    pub fn block_geometry(&self) -> Result<BlockGeometry, CliError> {
        let g = self.geometry.ok_or_else(|| invalid("missing geometry"))?;
        BlockGeometry::new(self.params().d, g.n, g.a, g.b, g.k).map_err(core_invalid)
    }

    /// `(L, T)` pairs of an fstc staircase, ordered by `(L, T)`.
    pub fn staircase(&self) -> Vec<(u32, f64)> {
        let ls = self.l.as_ref().map(OneOrMany::to_vec).unwrap_or_default();
        let ts = self.big_t.as_ref().map(OneOrMany::to_vec).unwrap_or_default();
        let mut pairs: Vec<(u32, f64)> = ls.into_iter().zip(ts).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pairs
    }

    /// Checks everything that can be checked without simulating.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != CONFIG_VERSION {
            return Err(invalid(format!("unsupported config version {}, expected {CONFIG_VERSION}", self.version)));
        }
        let (required, optional) = self.experiment.keys();
        let present = self.present_keys();
        for key in required {
            if !present.contains(key) {
                return Err(invalid(format!("{} needs \"{key}\"", self.experiment.name())));
            }
        }
        if let Some(extra) = present.iter().find(|k| !required.contains(k) && !optional.contains(k)) {
            return Err(invalid(format!("\"{extra}\" is not used by {}", self.experiment.name())));
        }
        if self.replicates == 0 {
            return Err(invalid("replicates must be positive"));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be positive"));
        }
        if let Some(p) = &self.params {
            p.validate().map_err(core_invalid)?;
        }
        let lattice = match (&self.params, &self.lattice_box) {
            (Some(p), Some(b)) => Some(Lattice::new(p.d, *b).map_err(core_invalid)?),
            _ => None,
        };
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(invalid(format!("{name} must be positive, got {x}"))),
            _ => Ok(()),
        };
        positive("horizon", self.horizon)?;
        positive("t", self.t)?;
        if let (Some(lat), Some(init)) = (&lattice, &self.init) {
            init.validate(lat).map_err(core_invalid)?;
        }
        if let Some(lat) = &lattice {
            for s in self.set_a.iter().chain(&self.set_b).flatten() {
                lat.index(s).map_err(core_invalid)?;
            }
            if self.init.is_none()
                && matches!(self.experiment, ExperimentKind::Survival | ExperimentKind::CriticalScan)
            {
                self.init().validate(lat).map_err(core_invalid)?;
            }
        }
        if self.set_a.as_ref().is_some_and(Vec::is_empty) || self.set_b.as_ref().is_some_and(Vec::is_empty) {
            return Err(invalid("A and B must be nonempty"));
        }
        if let Some(grid) = &self.t_grid {
            if grid.is_empty() || grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return Err(invalid("t_grid must be a nonempty list of nonnegative times"));
            }
        }
        if let Some(grid) = &self.p_grid {
            if grid.is_empty()
                || grid.iter().any(|p| !(0.0..=1.0).contains(p))
                || grid.windows(2).any(|w| w[0] >= w[1])
            {
                return Err(invalid("p_grid must increase strictly within [0, 1]"));
            }
        }
        if let Some(th) = self.threshold {
            if !(th > 0.0 && th < 1.0) {
                return Err(invalid(format!("threshold must lie in (0, 1), got {th}")));
            }
        }
        match self.experiment {
            ExperimentKind::Fstc | ExperimentKind::Orthant => self.validate_boxes()?,
            ExperimentKind::Blocks | ExperimentKind::Field => {
                let geom = self.block_geometry()?;
                if let Some(s) = &self.start {
                    let a = geom.a as i32;
                    if s.x.len() != geom.d || s.x.iter().any(|c| c.abs() > a) || !(0.0..=geom.b).contains(&s.t) {
                        return Err(invalid("start must lie in [-a, a]^d x [0, b]"));
                    }
                }
                if let Some(rows) = self.field_rows {
                    if rows < 3 {
                        return Err(invalid("field_rows must be at least 3"));
                    }
                }
                if let Some(p) = self.p_target {
                    if !(0.25..1.0).contains(&p) {
                        return Err(invalid(format!("p_target must lie in [1/4, 1), got {p}")));
                    }
                }
            }
            ExperimentKind::OpCompare => {
                if self.depth == Some(0) {
                    return Err(invalid("depth must be at least 1"));
                }
            }
            ExperimentKind::OracleCompare => {
                let p = self.params();
                let b = self.lattice_box();
                let sites = 2 * b.half_width as usize + 1;
                if p.d != 1 || sites > cpree_core::oracle::MAX_SITES {
                    return Err(invalid(format!(
                        "oracle-compare needs d = 1 and at most {} sites",
                        cpree_core::oracle::MAX_SITES
                    )));
                }
                if b.boundary == Boundary::Periodic && sites < 3 {
                    return Err(invalid("a periodic oracle ring needs at least 3 sites"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn validate_boxes(&self) -> Result<(), CliError> {
        let n = self.n.expect("required");
        let ls = self.l.as_ref().map(OneOrMany::to_vec).unwrap_or_default();
        let ts = self.big_t.as_ref().map(OneOrMany::to_vec).unwrap_or_default();
        if ls.is_empty() || ls.len() != ts.len() {
            return Err(invalid("L and T must have the same nonzero length"));
        }
        if self.experiment == ExperimentKind::Orthant && ls.len() != 1 {
            return Err(invalid("orthant takes a single L and T"));
        }
        for (&l, &t) in ls.iter().zip(&ts) {
            if n >= l {
                return Err(CliError::Validation(format!("geometry does not fit: need n < L, got n = {n}, L = {l}")));
            }
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(format!("T must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Applies overrides and the seed fallback chain, then validates.
    pub fn resolve(mut self, overrides: &Overrides) -> Result<Resolved, CliError> {
        self.validate()?;
        let env_seed = match std::env::var(SEED_ENV) {
            Ok(v) => Some(v.trim().parse::<u64>().map_err(|_| invalid(format!("{SEED_ENV}={v} is not a u64")))?),
            Err(_) => None,
        };
        let master_seed = overrides.seed.or(self.master_seed).or(env_seed).unwrap_or(0);
        let workers = overrides.workers.or(self.workers).unwrap_or(1);
        if workers == 0 {
            return Err(invalid("workers must be positive"));
        }
        let ext = if self.experiment.writes_json() { "json" } else { "csv" };
        let output_path = overrides
            .out
            .clone()
            .or_else(|| self.output_path.clone())
            .unwrap_or_else(|| PathBuf::from(format!("{}.{ext}", self.experiment.name())));
        self.master_seed = Some(master_seed);
        let mut canonical = self.clone();
        canonical.workers = None;
        canonical.output_path = None;
        let digest = config_digest(&canonical);
        Ok(Resolved { config: self, master_seed, workers, output_path, digest })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SURVIVAL: &str = r#"{
        "version": 1, "experiment": "survival",
        "params": {"d": 1, "gamma": 1.0, "delta0": 1.0, "delta1": 0.5, "p": 0.5},
        "box": {"half_width": 5}, "horizon": 2.0, "replicates": 10
    }"#;

    #[test]
    fn parses_and_resolves() {
        let cfg = ExperimentConfig::parse(SURVIVAL).unwrap();
        let r = cfg.resolve(&Overrides { seed: Some(9), ..Default::default() }).unwrap();
        assert_eq!(r.master_seed, 9);
        assert_eq!(r.workers, 1);
        assert_eq!(r.output_path, PathBuf::from("survival.csv"));
        assert_eq!(r.digest.len(), 16);
    }

    #[test]
    fn digest_ignores_workers_and_output() {
        let cfg = ExperimentConfig::parse(SURVIVAL).unwrap();
        let a = cfg.clone().resolve(&Overrides { seed: Some(1), workers: Some(8), out: Some("x.csv".into()) });
        let b = cfg.resolve(&Overrides { seed: Some(1), ..Default::default() });
        assert_eq!(a.unwrap().digest, b.unwrap().digest);
    }

    #[test]
    fn rejects_unknown_and_unused_keys() {
        let unknown = SURVIVAL.replace("\"replicates\"", "\"replicatez\": 3, \"replicates\"");
        assert!(matches!(ExperimentConfig::parse(&unknown), Err(CliError::Validation(_))));
        let unused = SURVIVAL.replace("\"replicates\"", "\"depth\": 3, \"replicates\"");
        let cfg = ExperimentConfig::parse(&unused).unwrap();
        assert!(cfg.validate().is_err());
        let wrong_version = SURVIVAL.replace("\"version\": 1", "\"version\": 2");
        assert!(ExperimentConfig::parse(&wrong_version).unwrap().validate().is_err());
    }

    #[test]
    fn staircase_is_sorted() {
        let text = r#"{"version": 1, "experiment": "fstc",
            "params": {"d": 1, "gamma": 1.0, "delta0": 1.0, "delta1": 0.5, "p": 0.5},
            "n": 1, "L": [6, 4, 4], "T": [2.0, 3.0, 1.0], "variant": "fstc1", "replicates": 5}"#;
        let cfg = ExperimentConfig::parse(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.staircase(), vec![(4, 1.0), (4, 3.0), (6, 2.0)]);
    }

    #[test]
    fn geometry_misfit_is_a_validation_error() {
        let text = r#"{"version": 1, "experiment": "orthant",
            "params": {"d": 1, "gamma": 1.0, "delta0": 1.0, "delta1": 0.5, "p": 0.5},
            "n": 8, "L": 8, "T": 8.0, "N": [1], "M": [1], "replicates": 5}"#;
        let err = ExperimentConfig::parse(text).unwrap().validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
