//! Finite probability spaces, scenario vectors and centered market models.

use std::path::Path;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::linalg;

const WEIGHT_TOL: f64 = 1e-12;

/// Ω = {1..N} with strictly positive scenario weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProbSpace {
    weights: Vec<f64>,
    uniform: bool,
}

impl FiniteProbSpace {
    /// Validates positivity and that the weights sum to one within 1e-12.
    /// Weights inside the tolerance are renormalized, anything else is rejected.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("probability weights"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w <= 0.0)
        {
            return Err(Error::InvalidProbabilities(format!(
                "weight {i} is {w}, must be strictly positive"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidProbabilities(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let uniform = weights
            .iter()
            .all(|w| (w - weights[0]).abs() <= WEIGHT_TOL);
        Ok(Self { weights, uniform })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("probability weights"));
        }
        Ok(Self {
            weights: vec![1.0 / n as f64; n],
            uniform: true,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// E[X] for a raw scenario vector.
    pub fn mean(&self, values: &[f64]) -> Result<f64> {
        check_len(self.len(), values.len())?;
        Ok(linalg::dot(&self.weights, values))
    }

    /// E[XY] for two raw scenario vectors.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_len(self.len(), x.len())?;
        check_len(self.len(), y.len())?;
        Ok(x
            .iter()
            .zip(y)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b * w)
            .sum())
    }
}

/// A payoff vector indexed by scenario, tied to its space.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariable {
    space: Arc<FiniteProbSpace>,
    values: Vec<f64>,
}

impl RandomVariable {
    pub fn new(space: Arc<FiniteProbSpace>, values: Vec<f64>) -> Result<Self> {
        check_len(space.len(), values.len())?;
        Ok(Self { space, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn space(&self) -> &Arc<FiniteProbSpace> {
        &self.space
    }

    pub fn mean(&self) -> f64 {
        linalg::dot(self.space.weights(), &self.values)
    }
}

pub fn expectation(space: &FiniteProbSpace, rv: &RandomVariable) -> Result<f64> {
    if rv.space.as_ref() != space {
        return Err(Error::SpaceMismatch);
    }
    space.mean(&rv.values)
}

/// Centered returns R̂ (n rows of N scenario values), excess means μ and the riskless rate.
#[derive(Debug, Clone)]
pub struct MarketModel {
    pub space: Arc<FiniteProbSpace>,
    pub centered: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    pub r0: f64,
}

impl MarketModel {
    /// Build from already-centered returns; checks centering and rank.
    pub fn from_centered(
        space: Arc<FiniteProbSpace>,
        centered: Vec<Vec<f64>>,
        mu: Vec<f64>,
        r0: f64,
    ) -> Result<Self> {
        if centered.is_empty() {
            return Err(Error::Empty("asset returns"));
        }
        check_len(centered.len(), mu.len())?;
        for row in &centered {
            check_len(space.len(), row.len())?;
            let m = space.mean(row)?;
            let scale = row.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            if m.abs() > 1e-10 * scale {
                return Err(Error::InvalidParameter(format!(
                    "centered return row has mean {m}"
                )));
            }
        }
        check_rank(&centered)?;
        Ok(Self {
            space,
            centered,
            mu,
            r0,
        })
    }

    pub fn assets(&self) -> usize {
        self.centered.len()
    }

    pub fn scenarios(&self) -> usize {
        self.space.len()
    }

    /// Centered portfolio return R̂ᵀx as a scenario vector.
    pub fn portfolio(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.assets(), x.len())?;
        let mut out = vec![0.0; self.scenarios()];
        for (row, xi) in self.centered.iter().zip(x) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += xi * r;
            }
        }
        Ok(out)
    }
}

fn check_rank(rows: &[Vec<f64>]) -> Result<()> {
    let r = linalg::rank(rows, 1e-10);
    if r < rows.len() {
        return Err(Error::RankDeficient {
            rank: r,
            assets: rows.len(),
        });
    }
    Ok(())
}

/// Center raw returns (n rows × N scenarios): μᵢ = E[rᵢ] − r₀, R̂ = r − E[r].
pub fn center_market(
    raw: &[Vec<f64>],
    space: Arc<FiniteProbSpace>,
    r0: f64,
) -> Result<MarketModel> {
    if raw.is_empty() {
        return Err(Error::Empty("asset returns"));
    }
    let mut centered = Vec::with_capacity(raw.len());
    let mut mu = Vec::with_capacity(raw.len());
    for row in raw {
        check_len(space.len(), row.len())?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite return".into()));
        }
        let m = space.mean(row)?;
        mu.push(m - r0);
        centered.push(row.iter().map(|v| v - m).collect::<Vec<_>>());
    }
    check_rank(&centered)?;
    Ok(MarketModel {
        space,
        centered,
        mu,
        r0,
    })
}

/// Scenario rows (one per line, one column per asset) transposed to asset rows.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub returns: Vec<Vec<f64>>,
    pub space: Arc<FiniteProbSpace>,
    pub header: Option<Vec<String>>,
}

pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Ingested> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io(e.to_string()))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut header = None;
    let mut scenarios: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: idx + 1,
            column: 0,
            message: e.to_string(),
        })?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::Ragged {
                row: idx + 1,
                expected: w,
                found: rec.len(),
            });
        }
        let parsed: Vec<std::result::Result<f64, usize>> = rec
            .iter()
            .enumerate()
            .map(|(c, f)| f.parse::<f64>().map_err(|_| c + 1))
            .collect();
        if idx == 0 && parsed.iter().any(|p| p.is_err()) {
            header = Some(rec.iter().map(str::to_string).collect());
            continue;
        }
        let mut row = Vec::with_capacity(w);
        for (c, p) in parsed.into_iter().enumerate() {
            match p {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(Error::Parse {
                        row: idx + 1,
                        column: c + 1,
                        message: format!("not a finite number: {:?}", &rec[c]),
                    })
                }
            }
        }
        scenarios.push(row);
    }
    if scenarios.is_empty() {
        return Err(Error::Empty("csv contains no scenarios"));
    }
    let n = scenarios[0].len();
    let returns = (0..n)
        .map(|i| scenarios.iter().map(|s| s[i]).collect())
        .collect();
    Ok(Ingested {
        returns,
        space: Arc::new(FiniteProbSpace::uniform(scenarios.len())?),
        header,
    })
}
