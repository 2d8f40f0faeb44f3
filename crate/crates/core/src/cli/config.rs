//! Run configuration (`"schema": 1`) and the builders that turn it into library inputs.

use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::blacklitterman::Posterior;
use crate::envelope::{build, EnvelopeSpec, RiskEnvelope};
use crate::error::{Error, Result};
use crate::geometry::SteinerConfig;
use crate::probspace::{center_market, ingest_csv, FiniteProbSpace, MarketModel};
use crate::selector::SelectorKind;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceConfig {
    Uniform(usize),
    Weights(Vec<f64>),
}

fn default_samples() -> usize {
    crate::geometry::steiner::DEFAULT_SAMPLES
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(default)]
    pub space: Option<SpaceConfig>,
    /// Raw returns, one row per asset.
    #[serde(default)]
    pub returns: Option<Vec<Vec<f64>>>,
    /// Raw returns as CSV: one line per scenario, one column per asset.
    #[serde(default)]
    pub returns_csv: Option<PathBuf>,
    /// Centered returns, one row per asset; pairs with `mu`.
    #[serde(default)]
    pub centered: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub mu: Option<Vec<f64>>,
    #[serde(default)]
    pub r0: f64,
    #[serde(default)]
    pub measure: Option<EnvelopeSpec>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub x_m: Option<Vec<f64>>,
    /// A scenario vector X for the selector command.
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub views: Option<Posterior>,
    #[serde(default)]
    pub agents: Option<Vec<EnvelopeSpec>>,
    #[serde(default)]
    pub capital: Option<f64>,
    #[serde(default)]
    pub selector: SelectorKind,
    #[serde(default)]
    pub subportfolios: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            row: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if cfg.schema != SCHEMA {
            return Err(Error::InvalidParameter(format!(
                "unsupported config schema {} (expected {SCHEMA})",
                cfg.schema
            )));
        }
        let sources = [
            cfg.returns.is_some(),
            cfg.returns_csv.is_some(),
            cfg.centered.is_some(),
        ];
        if sources.iter().filter(|s| **s).count() > 1 {
            return Err(Error::InvalidParameter(
                "give exactly one of returns, returns_csv, centered".into(),
            ));
        }
        if cfg.mc_samples < 2 {
            return Err(Error::InvalidParameter("mc_samples must be at least 2".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn steiner(&self) -> SteinerConfig {
        SteinerConfig {
            samples: self.mc_samples,
            seed: self.seed,
        }
    }

    pub fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T> {
        field
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter(format!("config is missing \"{name}\"")))
    }

    fn explicit_space(&self, n: usize) -> Result<Arc<FiniteProbSpace>> {
        let space = match &self.space {
            None => FiniteProbSpace::uniform(n)?,
            Some(SpaceConfig::Uniform(k)) => FiniteProbSpace::uniform(*k)?,
            Some(SpaceConfig::Weights(w)) => FiniteProbSpace::new(w.clone())?,
        };
        Ok(Arc::new(space))
    }

    /// The configured space; its size is inferred from `hint` when only returns are given.
    pub fn space(&self, hint: Option<usize>) -> Result<Arc<FiniteProbSpace>> {
        match (&self.space, hint) {
            (Some(_), _) => self.explicit_space(0),
            (None, Some(n)) => self.explicit_space(n),
            (None, None) => Err(Error::InvalidParameter("config is missing \"space\"".into())),
        }
    }

    /// Raw (uncentered) asset rows from `returns` or `returns_csv`.
    pub fn raw_returns(&self) -> Result<Option<Vec<Vec<f64>>>> {
        if let Some(r) = &self.returns {
            return Ok(Some(r.clone()));
        }
        if let Some(p) = &self.returns_csv {
            let path = match &self.base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.clone(),
            };
            return Ok(Some(ingest_csv(path)?.returns));
        }
        Ok(None)
    }

    fn scenario_hint(rows: &[Vec<f64>]) -> Option<usize> {
        rows.first().map(Vec::len)
    }

    pub fn market(&self) -> Result<MarketModel> {
        if let Some(centered) = &self.centered {
            let space = self.space(Self::scenario_hint(centered))?;
            let mu = self.mu.clone().unwrap_or_else(|| vec![0.0; centered.len()]);
            return MarketModel::from_centered(space, centered.clone(), mu, self.r0);
        }
        let raw = self
            .raw_returns()?
            .ok_or_else(|| Error::InvalidParameter("config has no returns".into()))?;
        let space = self.space(Self::scenario_hint(&raw))?;
        let mut market = center_market(&raw, space, self.r0)?;
        if let Some(mu) = &self.mu {
            crate::error::check_len(market.assets(), mu.len())?;
            market.mu = mu.clone();
        }
        Ok(market)
    }

    pub fn measure(&self) -> Result<&EnvelopeSpec> {
        Self::require(&self.measure, "measure")
    }

    pub fn envelope(&self, space: Arc<FiniteProbSpace>) -> Result<RiskEnvelope> {
        build(space, self.measure()?)
    }
}
