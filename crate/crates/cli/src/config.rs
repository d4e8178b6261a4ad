//! Scenario configuration, read from TOML.

use std::collections::BTreeMap;
use std::path::Path;

use clap::ValueEnum;
use hilbund_core::{ManifoldModel, ModelKind};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Check suites, in the order they run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Suite {
    Partition,
    Opspace,
    Stdmodule,
    Stabilize,
    InverseSqrt,
    ImageBundle,
    Equivalence,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Partition,
        Suite::Opspace,
        Suite::Stdmodule,
        Suite::Stabilize,
        Suite::InverseSqrt,
        Suite::ImageBundle,
        Suite::Equivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Partition => "partition",
            Suite::Opspace => "opspace",
            Suite::Stdmodule => "stdmodule",
            Suite::Stabilize => "stabilize",
            Suite::InverseSqrt => "inverse_sqrt",
            Suite::ImageBundle => "image_bundle",
            Suite::Equivalence => "equivalence",
        }
    }

    /// Position in [`Suite::ALL`], also used as the RNG stream id.
    pub fn index(self) -> u64 {
        Suite::ALL.iter().position(|s| *s == self).expect("suite is listed") as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Torus,
    Box,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    pub kind: ManifoldKind,
    pub extents: Vec<f64>,
    /// One entry per axis, or a single entry used for every axis.
    pub grid: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    /// Defaults to a quarter of the injectivity radius on a torus and an
    /// eighth of the shortest extent on a box.
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleGenerator {
    Trivial,
    Gauge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BundleConfig {
    pub generator: BundleGenerator,
    pub fiber_dim: usize,
    pub degree: u32,
    pub amplitude: f64,
}

impl Default for BundleConfig {
    fn default() -> Self {
        Self {
            generator: BundleGenerator::Trivial,
            fiber_dim: 2,
            degree: 1,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionGenerator {
    Constant,
    Rotating,
    SpinningLine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionConfig {
    pub generator: ProjectionGenerator,
    pub fiber_dim: usize,
    pub rank: usize,
    pub max_freq: i32,
    /// Half-turns per period for `spinning_line`.
    pub omega: i32,
    /// Upper cap `s` in the radius rule.
    pub radius_cap: f64,
    /// Multiplier applied to the selected radius; values above 1 break the rule on purpose.
    pub radius_scale: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            generator: ProjectionGenerator::Constant,
            fiber_dim: 3,
            rank: 1,
            max_freq: 1,
            omega: 1,
            radius_cap: 1.0,
            radius_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    /// Random fields per check.
    pub count: usize,
    pub fiber_dim: usize,
    pub degree: u32,
    pub amplification_level: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            count: 10,
            fiber_dim: 4,
            degree: 3,
            amplification_level: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub nodes: usize,
    pub matrices: usize,
    pub max_dim: usize,
    pub condition: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: 200,
            matrices: 10,
            max_dim: 8,
            condition: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Required whenever a selected suite draws random data.
    #[serde(default)]
    pub seed: Option<u64>,
    pub manifold: ManifoldConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default)]
    pub bundle: BundleConfig,
    #[serde(default)]
    pub projection: ProjectionConfig,
    #[serde(default)]
    pub corpus: CorpusConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    /// Per-check tolerance overrides, keyed by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "all_suites")]
    pub suites: Vec<Suite>,
}

fn all_suites() -> Vec<Suite> {
    Suite::ALL.to_vec()
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub suites: Vec<Suite>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub quad_nodes: Option<usize>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(path.display().to_string(), e))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if !o.suites.is_empty() {
            self.suites = o.suites.clone();
        }
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if let Some(n) = o.grid {
            self.manifold.grid = vec![n];
        }
        if let Some(n) = o.quad_nodes {
            self.quadrature.nodes = n;
        }
    }

    /// Selected suites, deduplicated, in run order.
    pub fn ordered_suites(&self) -> Vec<Suite> {
        let mut s = self.suites.clone();
        s.sort();
        s.dedup();
        s
    }

    fn randomized(&self, suite: Suite) -> bool {
        match suite {
            Suite::Partition => false,
            Suite::Opspace | Suite::Stdmodule | Suite::InverseSqrt | Suite::Equivalence => true,
            Suite::Stabilize => self.bundle.generator == BundleGenerator::Gauge,
            Suite::ImageBundle => self.projection.generator == ProjectionGenerator::Rotating,
        }
    }

    pub fn model(&self) -> Result<ManifoldModel, ConfigError> {
        let m = &self.manifold;
        let dim = m.extents.len();
        let grid = match m.grid.len() {
            1 => vec![m.grid[0]; dim],
            _ => m.grid.clone(),
        };
        let kind = match m.kind {
            ManifoldKind::Torus => ModelKind::FlatTorus,
            ManifoldKind::Box => ModelKind::EuclideanBox,
        };
        ManifoldModel::new(kind, dim, &m.extents, &grid).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn epsilon(&self, model: &ManifoldModel) -> f64 {
        self.partition.epsilon.unwrap_or_else(|| {
            let r = model.injectivity_radius();
            if r.is_finite() {
                r / 4.0
            } else {
                self.manifold.extents.iter().copied().fold(f64::INFINITY, f64::min) / 8.0
            }
        })
    }

    /// Checks everything that can be checked without running a suite.
    pub fn validate(&self) -> Result<ManifoldModel, ConfigError> {
        if self.suites.is_empty() {
            return Err(ConfigError::Invalid("no suites selected".into()));
        }
        if let Some(s) = self.ordered_suites().into_iter().find(|s| self.randomized(*s)) {
            if self.seed.is_none() {
                return Err(ConfigError::Invalid(format!("suite {} draws random data and needs a seed", s.name())));
            }
        }
        let model = self.model()?;
        let eps = self.epsilon(&model);
        if !(eps > 0.0 && eps <= model.injectivity_radius() / 2.0) {
            return Err(ConfigError::Invalid(format!(
                "partition epsilon {eps} must lie in (0, r_inj/2] with r_inj = {}",
                model.injectivity_radius()
            )));
        }
        let p = &self.projection;
        if p.rank == 0 || p.rank > p.fiber_dim {
            return Err(ConfigError::Invalid(format!("projection rank {} must lie in 1..={}", p.rank, p.fiber_dim)));
        }
        if !(p.radius_cap > 0.0 && p.radius_scale > 0.0) {
            return Err(ConfigError::Invalid("radius_cap and radius_scale must be positive".into()));
        }
        if self.bundle.fiber_dim == 0 || self.corpus.fiber_dim == 0 {
            return Err(ConfigError::Invalid("fiber dimensions must be positive".into()));
        }
        let q = &self.quadrature;
        if q.nodes < hilbund_core::invsqrt::MIN_NODES || q.max_dim == 0 || !(q.condition >= 1.0) {
            return Err(ConfigError::Invalid(format!(
                "quadrature needs at least {} nodes, max_dim ≥ 1 and condition ≥ 1",
                hilbund_core::invsqrt::MIN_NODES
            )));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v >= 0.0)) {
            return Err(ConfigError::Invalid(format!("tolerance override {k} = {v} is not a non-negative number")));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "m"
[manifold]
kind = "torus"
extents = [6.283185307179586]
grid = [64]
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.suites, Suite::ALL.to_vec());
        assert_eq!(c.quadrature.nodes, 200);
        assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn seedless_deterministic_suites_validate() {
        let mut c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        c.suites = vec![Suite::Partition, Suite::Stabilize];
        let m = c.validate().unwrap();
        assert_eq!(m.n_points(), 64);
        assert!((c.epsilon(&m) - std::f64::consts::PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_keys_and_generators() {
        assert!(ScenarioConfig::from_toml(&format!("{MINIMAL}\nbogus = 1\n")).is_err());
        let bad = MINIMAL.replace("torus", "sphere");
        assert!(ScenarioConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let mut c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        c.apply(&Overrides {
            suites: vec![Suite::Equivalence, Suite::Partition, Suite::Partition],
            seed: Some(3),
            grid: Some(32),
            quad_nodes: Some(64),
        });
        assert_eq!(c.ordered_suites(), vec![Suite::Partition, Suite::Equivalence]);
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.model().unwrap().n_points(), 32);
        assert_eq!(c.quadrature.nodes, 64);
    }

    #[test]
    fn epsilon_out_of_range_is_rejected() {
        let mut c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        c.suites = vec![Suite::Partition];
        c.partition.epsilon = Some(2.0);
        assert!(c.validate().is_err());
    }
}
