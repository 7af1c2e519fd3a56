use std::fs;
use std::path::{Path, PathBuf};

use plpca::data::{HeaderMode, LabelSource, Normalization, Orientation, OutlierSpec, SplitPlan};
use plpca::eval::{default_dims, AucMode, EvalMode};
use plpca::reduction::{Method, SolverConfig};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

/// Fully resolved run description. Written verbatim to `config.json`; the
/// output directory is deliberately not part of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub dataset: DatasetConfig,
    pub solver: SolverConfig,
    /// Methods compared by `evaluate`, `rs` and `bench-outliers`; empty means
    /// `solver.method` (all seven for `bench-outliers`).
    pub methods: Vec<Method>,
    pub plan: SplitPlan,
    pub dims: Vec<usize>,
    pub k_neighbors: usize,
    pub mode: EvalMode,
    pub auc_mode: AucMode,
    pub grid: GridConfig,
    pub synth: OutlierSpec,
    pub bench: BenchConfig,
    /// Dimension used by `rs`.
    pub rs_k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// Expression CSV; when absent the `synth` dataset is generated.
    pub path: Option<PathBuf>,
    pub orientation: Orientation,
    pub header: HeaderMode,
    pub labels: LabelSource,
    pub normalization: Normalization,
}

/// Value lists searched by `gridsearch`. An empty list keeps the solver's value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub p: Vec<usize>,
    /// Raw filtration weights, renormalized by the solver.
    pub zeta: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub outliers: Vec<usize>,
    /// Empty means every default dimension up to the feature count.
    pub dims: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            dataset: DatasetConfig {
                path: None,
                orientation: Orientation::GenesBySamples,
                header: HeaderMode::Auto,
                labels: LabelSource::Column("label".into()),
                normalization: Normalization::Minmax,
            },
            solver: SolverConfig::default(),
            methods: Vec::new(),
            plan: SplitPlan::default(),
            dims: default_dims(),
            k_neighbors: 5,
            mode: EvalMode::Inductive,
            auc_mode: AucMode::Hard,
            grid: GridConfig::default(),
            synth: OutlierSpec::default(),
            bench: BenchConfig {
                outliers: vec![2, 4, 8],
                dims: Vec::new(),
            },
            rs_k: 2,
        }
    }
}

pub const PRESETS: [&str; 6] = [
    "coad-plpca",
    "coad-plpca-shared-gamma",
    "coad-plpca-simple",
    "multisource-plpca",
    "multisource-plpca-shared-gamma",
    "multisource-plpca-simple",
];

/// Partial configuration for a named preset. The PLPCA presets use the
/// method-specific γ = 1e-4; the `-shared-gamma` variants use the dataset γ
/// that the simple variant also uses.
pub fn preset(name: &str) -> CliResult<Value> {
    let solver = |method: &str, alpha: f64, gamma: f64, zeta: &[f64]| {
        json!({
            "solver": {
                "method": method,
                "alpha": alpha,
                "beta": 0.5,
                "gamma": gamma,
                "graph": { "p": 6, "zeta": zeta },
            },
            "methods": [method],
        })
    };
    let coad_full = [0.5, 3.0, 1.0, 2.0, 2.0, 1.0];
    let coad_simple = [2.0, 3.0, 0.0, 0.0, 2.0, 1.0];
    let multi_full = [0.5, 0.0, 0.0, 3.0, 0.0, 6.0];
    let multi_simple = [0.5, 0.0, 0.0, 3.0, 2.0, 6.0];
    let (mut v, rs_k) = match name {
        "coad-plpca" => (solver("PLPCA_FULL", 1e-5, 1e-4, &coad_full), 100),
        "coad-plpca-shared-gamma" => (solver("PLPCA_FULL", 1e-5, 1000.0, &coad_full), 100),
        "coad-plpca-simple" => (solver("PLPCA_SIMPLE", 1e-5, 1000.0, &coad_simple), 100),
        "multisource-plpca" => (solver("PLPCA_FULL", 1e-4, 1e-4, &multi_full), 65),
        "multisource-plpca-shared-gamma" => (solver("PLPCA_FULL", 1e-4, 0.1, &multi_full), 65),
        "multisource-plpca-simple" => (solver("PLPCA_SIMPLE", 1e-4, 0.1, &multi_simple), 65),
        other => {
            return Err(CliError::Config(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESETS.join(", ")
            )))
        }
    };
    v["preset"] = json!(name);
    v["rs_k"] = json!(rs_k);
    Ok(v)
}

/// Objects merge key by key; anything else in `patch` replaces `base`.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        // single-key maps are enum variants; a different variant replaces the old one
        (Value::Object(b), Value::Object(p))
            if b.len() == 1 && p.len() == 1 && b.keys().next() != p.keys().next() =>
        {
            *b = p;
        }
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

pub fn read_config_file(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        let v: toml::Value =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::to_value(v).map_err(|e| CliError::Config(e.to_string()))
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Defaults, then the preset (from the flag or the file), then the file,
/// then flag overrides.
pub fn resolve(file: Option<Value>, preset_flag: Option<&str>, flags: Value) -> CliResult<RunConfig> {
    let mut v = serde_json::to_value(RunConfig::default()).expect("default config serializes");
    let named = preset_flag.map(str::to_owned).or_else(|| {
        file.as_ref()
            .and_then(|f| f.get("preset"))
            .and_then(Value::as_str)
            .map(str::to_owned)
    });
    if let Some(name) = &named {
        merge(&mut v, preset(name)?);
    }
    if let Some(f) = file {
        merge(&mut v, f);
    }
    if let Some(name) = preset_flag {
        merge(&mut v, json!({ "preset": name }));
    }
    merge(&mut v, flags);
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
}

impl RunConfig {
    pub fn methods_or_solver(&self) -> Vec<Method> {
        if self.methods.is_empty() {
            vec![self.solver.method]
        } else {
            self.methods.clone()
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for name in PRESETS {
            let c = resolve(None, Some(name), json!({})).unwrap();
            assert_eq!(c.preset.as_deref(), Some(name));
            assert_eq!(c.solver.graph.p, 6);
            assert_eq!(c.solver.beta, 0.5);
        }
        let c = resolve(None, Some("coad-plpca"), json!({})).unwrap();
        assert_eq!(c.solver.method, Method::PlpcaFull);
        assert_eq!(c.solver.graph.zeta, vec![0.5, 3.0, 1.0, 2.0, 2.0, 1.0]);
        assert_eq!((c.solver.alpha, c.solver.gamma), (1e-5, 1e-4));
        let c = resolve(None, Some("multisource-plpca-simple"), json!({})).unwrap();
        assert_eq!(c.solver.method, Method::PlpcaSimple);
        assert_eq!(c.solver.graph.zeta, vec![0.5, 0.0, 0.0, 3.0, 2.0, 6.0]);
        assert_eq!(c.solver.gamma, 0.1);
        assert!(resolve(None, Some("nope"), json!({})).is_err());
    }

    #[test]
    fn flags_beat_file_beat_preset() {
        let file = json!({ "preset": "coad-plpca", "solver": { "gamma": 2.0, "k": 7 } });
        let c = resolve(Some(file), None, json!({ "solver": { "k": 3 } })).unwrap();
        assert_eq!(c.solver.gamma, 2.0);
        assert_eq!(c.solver.k, 3);
        assert_eq!(c.solver.alpha, 1e-5);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(resolve(Some(json!({ "solverr": {} })), None, json!({})).is_err());
    }

    #[test]
    fn round_trip() {
        let c = resolve(None, Some("multisource-plpca"), json!({ "plan": { "seed": 9 } })).unwrap();
        let again = resolve(Some(serde_json::from_str(&c.to_json()).unwrap()), None, json!({})).unwrap();
        assert_eq!(c, again);
    }
}
