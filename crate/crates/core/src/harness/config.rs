use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::broadcast::Visibility;
use crate::error::{Error, Result};
use crate::estimators::{Estimator, StructParams};
use crate::tree::Model;

/// Upper limits keeping every per-trial random stream id distinct.
pub const MAX_Q_GRID: usize = 1000;
pub const MAX_ESTIMATORS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `"urrt"` or `"pa"`.
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub n: usize,
    pub q_grid: Vec<f64>,
    pub estimators: Vec<String>,
    #[serde(default = "default_visibility")]
    pub visibility: Visibility,
    pub trials: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub struct_params: Option<StructParams>,
}

fn default_visibility() -> Visibility {
    Visibility::AllVertices
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub model: Model,
    pub n: usize,
    pub q_grid: Vec<f64>,
    pub estimators: Vec<Estimator>,
    pub visibility: Visibility,
    pub trials: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn plan(&self) -> Result<Plan> {
        let cfg = |msg: String| Error::Config(msg);
        let model = match (self.model.as_str(), self.beta) {
            ("urrt", None) => Model::Urrt,
            ("urrt", Some(_)) => return Err(cfg("beta is only meaningful for model \"pa\"".into())),
            ("pa", Some(beta)) if beta > 0.0 && beta.is_finite() => Model::Pa { beta },
            ("pa", Some(beta)) => return Err(cfg(format!("beta must be > 0, got {beta}"))),
            ("pa", None) => return Err(cfg("model \"pa\" requires beta".into())),
            (other, _) => return Err(cfg(format!("unknown model {other:?}"))),
        };
        if self.trials == 0 {
            return Err(cfg("trials must be at least 1".into()));
        }
        if self.q_grid.is_empty() || self.q_grid.len() > MAX_Q_GRID {
            return Err(cfg(format!("q_grid must have 1..={MAX_Q_GRID} entries")));
        }
        if let Some(q) = self.q_grid.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return Err(cfg(format!("q = {q} is outside [0, 1]")));
        }
        if self.estimators.is_empty() || self.estimators.len() > MAX_ESTIMATORS {
            return Err(cfg(format!("estimators must list 1..={MAX_ESTIMATORS} names")));
        }
        let estimators = self
            .estimators
            .iter()
            .map(|name| {
                let e = Estimator::from_name(name, self.struct_params).map_err(|e| match e {
                    Error::Config(m) => Error::Config(m),
                    other => Error::Config(other.to_string()),
                })?;
                e.check_visibility(self.visibility)
                    .map_err(|_| cfg(format!("estimator {name:?} needs all vertex bits")))?;
                Ok(e)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Plan {
            model,
            n: self.n,
            q_grid: self.q_grid.clone(),
            estimators,
            visibility: self.visibility,
            trials: self.trials,
            seed: self.seed,
        })
    }
}
