//! Job configuration: JSON schema, defaults and resolution into core types.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use da_thermo::mane::{build_mane, DAMap, ManeParams, Profile};
use da_thermo::potential::Potential;
use da_thermo::pressure::PressureOptions;
use da_thermo::torus::{demo_matrix, ToralAutomorphism};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    Linear {
        #[serde(default)]
        matrix: Option<Vec<Vec<i64>>>,
    },
    Mane {
        #[serde(default)]
        matrix: Option<Vec<Vec<i64>>>,
        #[serde(default)]
        q: Option<Vec<f64>>,
        rho: f64,
        lambda_c: f64,
        #[serde(default)]
        profile: Option<Profile>,
        #[serde(default)]
        eta: Option<f64>,
    },
}

impl Default for MapSpec {
    fn default() -> Self {
        MapSpec::Mane { matrix: None, q: None, rho: 0.05, lambda_c: 1.05, profile: None, eta: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Constant {
        value: f64,
    },
    Expression {
        expr: String,
        #[serde(default = "one")]
        alpha: f64,
    },
    Geometric {
        #[serde(default = "n_back")]
        n_back: usize,
    },
}

fn one() -> f64 {
    1.0
}

fn n_back() -> usize {
    da_thermo::mane::DEFAULT_N_BACK
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scales {
    pub eta: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub r: f64,
    /// Ball radius for linear maps, which carry none of their own.
    pub rho: f64,
}

impl Default for Scales {
    fn default() -> Self {
        Scales { eta: 0.05, epsilon: 0.05, delta: 0.01, r: 0.1, rho: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub n_min: usize,
    pub n_max: usize,
    pub target_count: usize,
    pub max_orbit_points: usize,
    pub segments: usize,
    pub segment_n_max: usize,
    pub n_seeds: usize,
    pub n_sample: usize,
    pub n_transient: usize,
    pub bins: usize,
    pub bootstrap: usize,
    pub lyapunov_n: usize,
    pub l_n_max: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        let p = PressureOptions::default();
        Budgets {
            n_min: 6,
            n_max: 14,
            target_count: p.target_count,
            max_orbit_points: p.max_orbit_points,
            segments: 1000,
            segment_n_max: 20,
            n_seeds: 1000,
            n_sample: 10_000,
            n_transient: 200,
            bins: 32,
            bootstrap: 1000,
            lyapunov_n: 10_000,
            l_n_max: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSpec {
    pub alpha: f64,
    /// Lipschitz constant of the deformation.
    pub k: f64,
    pub diam: Option<f64>,
    pub q: f64,
    pub delta: f64,
    /// Overrides of `log ρ`, `log r` for scales below `f64` range.
    pub ln_rho: Option<f64>,
    pub ln_r: Option<f64>,
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec { alpha: 1.0, k: 2.0, diam: None, q: 5.0, delta: 0.25, ln_rho: None, ln_r: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaGapSpec {
    pub v: f64,
    pub tau: u32,
    pub range: f64,
    pub seminorm: f64,
    pub q: f64,
}

impl Default for DeltaGapSpec {
    fn default() -> Self {
        DeltaGapSpec { v: 0.0, tau: 1, range: 0.0, seminorm: 1.0, q: 3.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriteriaSpec {
    /// Fixed `L`; estimated from the base map when absent.
    pub l: Option<f64>,
    /// Fixed `V(φ)`; sampled at scale `η` when absent.
    pub v: Option<f64>,
    pub threshold: ThresholdSpec,
    pub delta_gap: DeltaGapSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShadowSpec {
    pub length: usize,
    pub error: f64,
    pub orbits: usize,
    /// Defaults to the automorphism's `η` bound.
    pub eta: Option<f64>,
}

impl Default for ShadowSpec {
    fn default() -> Self {
        ShadowSpec { length: 100, error: 1e-4, orbits: 100, eta: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub x: Vec<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlueSpec {
    pub k: usize,
    pub min_n: usize,
    pub max_n: usize,
    pub pairs: usize,
    pub tau_max: u32,
    /// Explicit segments; sampled from `G` when absent.
    pub segments: Option<Vec<SegmentSpec>>,
}

impl Default for GlueSpec {
    fn default() -> Self {
        GlueSpec { k: 3, min_n: 4, max_n: 8, pairs: 64, tau_max: 24, segments: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdpSpec {
    pub psi: String,
    pub epsilon: f64,
    pub n_grid: Vec<usize>,
    pub samples: usize,
    pub mean: Option<f64>,
}

impl Default for LdpSpec {
    fn default() -> Self {
        LdpSpec {
            psi: "sin(2*pi*x)".into(),
            epsilon: 0.1,
            n_grid: vec![50, 100, 200, 400],
            samples: 100_000,
            mean: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSpec {
    /// Defaults to `h ± 0.1`.
    pub chi_min: Option<f64>,
    pub chi_max: Option<f64>,
    pub chi_steps: usize,
    pub a: f64,
    pub t_steps: usize,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        SpectrumSpec { chi_min: None, chi_max: None, chi_steps: 41, a: 0.5, t_steps: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    pub map: MapSpec,
    /// Command default when absent: zero for pressures, geometric for curves.
    pub potential: Option<PotentialSpec>,
    pub scales: Scales,
    pub budgets: Budgets,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub t_grid: Option<Vec<f64>>,
    pub criteria: CriteriaSpec,
    pub shadow: ShadowSpec,
    pub glue: GlueSpec,
    pub ldp: LdpSpec,
    pub spectrum: SpectrumSpec,
}

impl Default for JobConfig {
    fn default() -> Self {
        JobConfig {
            map: MapSpec::default(),
            potential: None,
            scales: Scales::default(),
            budgets: Budgets::default(),
            seed: 7,
            workers: None,
            out: None,
            t_grid: None,
            criteria: CriteriaSpec::default(),
            shadow: ShadowSpec::default(),
            glue: GlueSpec::default(),
            ldp: LdpSpec::default(),
            spectrum: SpectrumSpec::default(),
        }
    }
}

fn schema(path: &str, msg: impl Into<String>) -> CliError {
    CliError::Schema { path: path.into(), msg: msg.into() }
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: JobConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            schema(if path == "." { "<root>" } else { &path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks not expressible in the serde schema.
    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.scales;
        for (name, v) in
            [("scales.eta", s.eta), ("scales.epsilon", s.epsilon), ("scales.delta", s.delta), ("scales.rho", s.rho)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(schema(name, format!("must be positive, got {v}")));
            }
        }
        if !(s.r > 0.0 && s.r < 1.0) {
            return Err(schema("scales.r", format!("must lie in (0,1), got {}", s.r)));
        }
        let b = &self.budgets;
        if b.n_min == 0 || b.n_min >= b.n_max {
            return Err(schema("budgets.n_min", format!("need 1 ≤ n_min < n_max, got {}..{}", b.n_min, b.n_max)));
        }
        if b.n_seeds == 0 || b.n_sample == 0 || b.bins == 0 {
            return Err(schema("budgets", "n_seeds, n_sample and bins must be positive"));
        }
        if self.workers == Some(0) {
            return Err(schema("workers", "must be positive"));
        }
        if let Some(ts) = &self.t_grid {
            if ts.len() < 2 || ts.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(schema("t_grid", "need at least two strictly increasing values"));
            }
        }
        if self.ldp.n_grid.is_empty() {
            return Err(schema("ldp.n_grid", "empty"));
        }
        Ok(())
    }

    /// Hash input: everything that can change results.
    pub fn canonical(&self) -> JobConfig {
        JobConfig { workers: None, out: None, ..self.clone() }
    }

    pub fn pressure_options(&self) -> PressureOptions {
        PressureOptions {
            target_count: self.budgets.target_count,
            max_orbit_points: self.budgets.max_orbit_points,
            seed: self.seed,
            ..PressureOptions::default()
        }
    }

    pub fn t_grid(&self) -> Vec<f64> {
        self.t_grid.clone().unwrap_or_else(|| (0..=8).map(|k| k as f64 * 0.25).collect())
    }

    pub fn build_map(&self) -> Result<DAMap, CliError> {
        let base = |m: &Option<Vec<Vec<i64>>>| {
            ToralAutomorphism::new(m.clone().unwrap_or_else(demo_matrix))
                .map_err(|e| schema("map.matrix", e.to_string()))
        };
        match &self.map {
            MapSpec::Linear { matrix } => Ok(DAMap::linear(base(matrix)?)),
            MapSpec::Mane { matrix, q, rho, lambda_c, profile, eta } => {
                let a = base(matrix)?;
                let params = ManeParams {
                    q: q.clone().unwrap_or_else(|| vec![0.0; a.dim()]),
                    rho: *rho,
                    lambda_c_target: *lambda_c,
                    profile: profile.unwrap_or_default(),
                    eta: *eta,
                };
                build_mane(a, params).map_err(|e| CliError::from_core(e, "map"))
            }
        }
    }

    /// `(q, ρ)`: the deformation's, or the origin and `scales.rho` for linear maps.
    pub fn ball(&self, map: &DAMap) -> (Vec<f64>, f64) {
        match (map.q(), map.rho()) {
            (Some(q), Some(rho)) => (q.to_vec(), rho),
            _ => (vec![0.0; map.dim()], self.scales.rho),
        }
    }

    pub fn potential(&self, map: &DAMap, default: PotentialSpec) -> Result<Potential, CliError> {
        let spec = self.potential.clone().unwrap_or(default);
        resolve_potential(&spec, map, "potential")
    }
}

pub fn resolve_potential(spec: &PotentialSpec, map: &DAMap, path: &str) -> Result<Potential, CliError> {
    let d = map.dim();
    match spec {
        PotentialSpec::Zero => Ok(Potential::zero(d)),
        PotentialSpec::Constant { value } => Ok(Potential::constant(*value, d)),
        PotentialSpec::Expression { expr, alpha } => {
            Potential::expression(expr, d, *alpha).map_err(|e| schema(&format!("{path}.expr"), e.to_string()))
        }
        PotentialSpec::Geometric { n_back } => Ok(Potential::geometric(map, *n_back)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_demo() {
        let c = JobConfig::from_json("{}").unwrap();
        assert_eq!(c, JobConfig::default());
        assert!(c.build_map().unwrap().mane().is_some());
    }

    #[test]
    fn schema_errors_carry_paths() {
        match JobConfig::from_json(r#"{"scales": {"epsilon": "big"}}"#) {
            Err(CliError::Schema { path, .. }) => assert_eq!(path, "scales.epsilon"),
            other => panic!("{other:?}"),
        }
        match JobConfig::from_json(r#"{"map": {"kind": "linear", "matrx": []}}"#) {
            Err(CliError::Schema { path, .. }) => assert!(path.starts_with("map"), "{path}"),
            other => panic!("{other:?}"),
        }
        match JobConfig::from_json(r#"{"scales": {"r": 1.5}}"#) {
            Err(CliError::Schema { path, .. }) => assert_eq!(path, "scales.r"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn canonical_drops_execution_fields() {
        let c = JobConfig { workers: Some(3), out: Some("x".into()), ..JobConfig::default() };
        assert_eq!(c.canonical(), JobConfig::default());
    }
}
