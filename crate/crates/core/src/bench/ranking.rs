use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::record::RunRecord;
use super::BenchError;

/// Weights of error, gate count, depth and time per episode in the score.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct RankingWeights {
    pub w_e: f64,
    pub w_g: f64,
    pub w_d: f64,
    pub w_t: f64,
}

impl RankingWeights {
    pub fn new(w_e: f64, w_g: f64, w_d: f64, w_t: f64) -> Result<Self, BenchError> {
        let w = Self { w_e, w_g, w_d, w_t };
        let all = [w_e, w_g, w_d, w_t];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(BenchError::Weights(format!("weights must be finite and non-negative: {all:?}")));
        }
        if all.iter().all(|&v| v == 0.0) {
            return Err(BenchError::Weights("at least one weight must be positive".into()));
        }
        Ok(w)
    }

    /// Accuracy-heavy weights used without noise.
    pub fn noiseless() -> Self {
        Self { w_e: 0.5, w_g: 0.2, w_d: 0.2, w_t: 0.1 }
    }

    /// Weights used under hardware noise; runtime is ignored.
    pub fn noisy() -> Self {
        Self { w_e: 0.6, w_g: 0.1, w_d: 0.3, w_t: 0.0 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.w_e, self.w_g, self.w_d, self.w_t]
    }
}

impl TryFrom<[f64; 4]> for RankingWeights {
    type Error = BenchError;

    fn try_from(v: [f64; 4]) -> Result<Self, BenchError> {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

impl From<RankingWeights> for [f64; 4] {
    fn from(w: RankingWeights) -> Self {
        w.as_array()
    }
}

impl FromStr for RankingWeights {
    type Err = BenchError;

    /// `"wE,wG,wD,wT"`.
    fn from_str(s: &str) -> Result<Self, BenchError> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| BenchError::Weights(format!("'{s}': {e}")))?;
        let arr: [f64; 4] = parts
            .try_into()
            .map_err(|_| BenchError::Weights(format!("'{s}': expected four comma-separated numbers")))?;
        Self::try_from(arr)
    }
}

/// How seeds of one (task, agent) pair are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Mean,
    /// The seed with the lowest error (then fewer gates, lower depth, less time).
    Best,
}

impl FromStr for Aggregation {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "best" => Ok(Aggregation::Best),
            other => Err(BenchError::Config(format!("aggregate must be 'mean' or 'best', got '{other}'"))),
        }
    }
}

/// Per-agent metrics before normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentMetrics {
    pub agent: String,
    pub e: f64,
    pub g: f64,
    pub d: f64,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedAgent {
    pub metrics: AgentMetrics,
    pub s: f64,
    /// 1-based.
    pub rank: usize,
}

/// Min-max normalization to `[0, 1]`; a degenerate range maps to zeros.
/// `labels[i]` names the source of `values[i]` in errors.
pub fn normalize_metric(values: &[f64], labels: &[String]) -> Result<Vec<f64>, BenchError> {
    if values.is_empty() {
        return Err(BenchError::Data("cannot normalize an empty metric column".into()));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        let who = labels.get(i).cloned().unwrap_or_else(|| format!("entry {i}"));
        return Err(BenchError::Data(format!("non-finite metric {} from {who}", values[i])));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    Ok(values.iter().map(|v| if range > 0.0 { (v - min) / range } else { 0.0 }).collect())
}

/// Weighted sum of normalized metrics, sorted ascending (lower is better);
/// ties go to lower error, then agent id.
pub fn composite_score(metrics: &[AgentMetrics], w: &RankingWeights) -> Result<Vec<RankedAgent>, BenchError> {
    if metrics.is_empty() {
        return Ok(Vec::new());
    }
    let labels: Vec<String> = metrics.iter().map(|m| m.agent.clone()).collect();
    let col = |f: fn(&AgentMetrics) -> f64| normalize_metric(&metrics.iter().map(f).collect::<Vec<_>>(), &labels);
    let (e, g, d, t) = (col(|m| m.e)?, col(|m| m.g)?, col(|m| m.d)?, col(|m| m.t)?);
    let mut ranked: Vec<RankedAgent> = metrics
        .iter()
        .enumerate()
        .map(|(i, m)| RankedAgent {
            metrics: m.clone(),
            s: w.w_e * e[i] + w.w_g * g[i] + w.w_d * d[i] + w.w_t * t[i],
            rank: 0,
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.s.total_cmp(&b.s)
            .then(a.metrics.e.total_cmp(&b.metrics.e))
            .then_with(|| a.metrics.agent.cmp(&b.metrics.agent))
    });
    for (i, r) in ranked.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(ranked)
}

/// Combines the seeds of every agent on one task.
pub fn aggregate(records: &[&RunRecord], how: Aggregation) -> Vec<AgentMetrics> {
    let mut by_agent: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_agent.entry(r.agent.as_str()).or_default().push(r);
    }
    by_agent
        .into_iter()
        .map(|(agent, runs)| match how {
            Aggregation::Mean => {
                let n = runs.len() as f64;
                let mean = |f: fn(&RunRecord) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / n;
                AgentMetrics {
                    agent: agent.to_string(),
                    e: mean(|r| r.error),
                    g: mean(|r| r.gates as f64),
                    d: mean(|r| r.depth as f64),
                    t: mean(|r| r.time_per_episode),
                }
            }
            Aggregation::Best => {
                let best = runs
                    .iter()
                    .min_by(|a, b| {
                        a.error
                            .total_cmp(&b.error)
                            .then(a.gates.cmp(&b.gates))
                            .then(a.depth.cmp(&b.depth))
                            .then(a.time_per_episode.partial_cmp(&b.time_per_episode).unwrap_or(Ordering::Equal))
                    })
                    .expect("non-empty group");
                AgentMetrics {
                    agent: agent.to_string(),
                    e: best.error,
                    g: best.gates as f64,
                    d: best.depth as f64,
                    t: best.time_per_episode,
                }
            }
        })
        .collect()
}
