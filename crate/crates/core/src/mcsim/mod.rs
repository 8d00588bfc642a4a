//! Independent oracles for the algebraic results: an exact dynamic program
//! for first-passage laws, and seeded Monte Carlo simulation.
//!
//! Simulation draws each path from its own ChaCha8 stream, selected by the
//! path index under a common seed, so results do not depend on thread
//! scheduling. Transition probabilities are converted to `f64` thresholds
//! once; only the dynamic program is exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::chain::{Chain, ChainError};
use crate::exactalg::{format_rational, rational::to_f64, Rational};
use crate::matrix::Matrix;

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("path {path} exceeded the step cap of {max_steps}")]
    StepCapExceeded { path: usize, max_steps: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub n_paths: usize,
    /// Safety cap per path; hitting times are a.s. finite, so reaching it
    /// signals a misconfiguration.
    pub max_steps: u64,
}

impl SimConfig {
    pub fn new(seed: u64, n_paths: usize) -> Self {
        Self {
            seed,
            n_paths,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    fn validate(&self, d: usize) -> Result<(), SimError> {
        if self.n_paths == 0 {
            return Err(SimError::InvalidConfig("n_paths must be at least 1".into()));
        }
        if self.max_steps < d as u64 {
            return Err(SimError::InvalidConfig(format!(
                "max_steps = {} is below the number of states {d}",
                self.max_steps
            )));
        }
        Ok(())
    }

    fn path_rng(&self, path: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path as u64);
        rng
    }
}

/// Exact first-passage law `P_u(tau_v^{>=0} = m)` for every start `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpTable {
    pub v: usize,
    /// `taboo[(u, m)]` for `m = 0..=m_max`.
    pub taboo: Matrix<Rational>,
}

impl DpTable {
    pub fn m_max(&self) -> usize {
        self.taboo.cols() - 1
    }

    pub fn law(&self, u: usize) -> &[Rational] {
        self.taboo.row(u)
    }
}

/// Taboo recursion: `f(u, 0) = [u = v]`; for `m >= 1`, `f(v, m) = 0` and
/// `f(u, m) = sum_w M[u, w] f(w, m - 1)` when `u != v`, so mass reaching `v`
/// is absorbed at the first arrival.
pub fn dp_hitting_oracle(chain: &Chain, v: usize, m_max: usize) -> Result<DpTable, SimError> {
    let d = chain.dim();
    if v >= d {
        return Err(ChainError::UnknownState(format!("#{v}")).into());
    }
    let mut taboo = Matrix::from_fn(d, m_max + 1, |_, _| Rational::zero());
    taboo[(v, 0)] = Rational::from_integer(1.into());
    for m in 1..=m_max {
        for u in (0..d).filter(|&u| u != v) {
            let s: Rational = (0..d)
                .filter(|&w| !chain.entry(u, w).is_zero())
                .map(|w| chain.entry(u, w) * &taboo[(w, m - 1)])
                .sum();
            taboo[(u, m)] = s;
        }
    }
    Ok(DpTable { v, taboo })
}

/// Cumulative `f64` thresholds for sampling one row.
#[derive(Debug, Clone)]
struct RowSampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl RowSampler {
    fn new(probs: &[Rational]) -> Self {
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += to_f64(p);
                acc
            })
            .collect();
        let last_positive = probs.iter().rposition(|p| !p.is_zero()).unwrap_or(0);
        Self {
            cumulative,
            last_positive,
        }
    }

    fn sample(&self, r: f64) -> usize {
        self.cumulative
            .iter()
            .position(|&c| r < c)
            .unwrap_or(self.last_positive)
    }
}

fn samplers(chain: &Chain) -> Vec<RowSampler> {
    (0..chain.dim())
        .map(|i| RowSampler::new(chain.matrix().row(i)))
        .collect()
}

/// Which state the hitting time targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    State(usize),
    /// A fresh target per path drawn from the stationary law, independent of
    /// the chain.
    Stationary,
}

/// Empirical law of a simulated hitting time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingSummary {
    pub n_paths: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// Observed value -> count.
    pub histogram: BTreeMap<u64, u64>,
}

impl HittingSummary {
    fn from_samples(samples: &[u64]) -> Self {
        let n = samples.len();
        let mut histogram = BTreeMap::new();
        let mut sum: u128 = 0;
        let mut sum_sq: u128 = 0;
        for &s in samples {
            *histogram.entry(s).or_insert(0) += 1;
            sum += s as u128;
            sum_sq += (s as u128) * (s as u128);
        }
        let nf = n as f64;
        let mean = sum as f64 / nf;
        let variance = if n > 1 {
            ((sum_sq as f64) - nf * mean * mean).max(0.0) / (nf - 1.0)
        } else {
            0.0
        };
        Self {
            n_paths: n,
            mean,
            variance,
            std_error: (variance / nf).sqrt(),
            histogram,
        }
    }

    /// `(empirical - exact) / std_error`; zero when both the difference and
    /// the standard error vanish.
    pub fn z_score(&self, exact: f64) -> f64 {
        let diff = self.mean - exact;
        if self.std_error == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(diff)
            }
        } else {
            diff / self.std_error
        }
    }
}

/// Simulates `tau^{>=t}` of the target from `C_0 = u` over `cfg.n_paths`
/// independent paths.
pub fn simulate_hitting(
    chain: &Chain,
    u: usize,
    target: Target,
    t: u64,
    cfg: &SimConfig,
) -> Result<HittingSummary, SimError> {
    let d = chain.dim();
    cfg.validate(d)?;
    if u >= d {
        return Err(ChainError::UnknownState(format!("#{u}")).into());
    }
    let rows = samplers(chain);
    let target_sampler = match target {
        Target::State(v) if v >= d => return Err(ChainError::UnknownState(format!("#{v}")).into()),
        Target::State(_) => None,
        Target::Stationary => {
            let rho = crate::hitting::stationary(chain)
                .map_err(|e| SimError::InvalidArgument(e.to_string()))?;
            Some(RowSampler::new(&rho))
        }
    };
    let samples: Vec<u64> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = cfg.path_rng(path);
            let v = match (&target_sampler, target) {
                (Some(s), _) => s.sample(rng.random::<f64>()),
                (None, Target::State(v)) => v,
                (None, Target::Stationary) => unreachable!(),
            };
            let mut state = u;
            let mut k: u64 = 0;
            loop {
                if k >= t && state == v {
                    return Ok(k);
                }
                if k >= cfg.max_steps {
                    return Err(SimError::StepCapExceeded {
                        path,
                        max_steps: cfg.max_steps,
                    });
                }
                state = rows[state].sample(rng.random::<f64>());
                k += 1;
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(HittingSummary::from_samples(&samples))
}

/// Empirical law of the chain observed at an independent geometric time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeoStopSummary {
    pub n_paths: usize,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    /// Binomial standard error `sqrt(p (1 - p) / n)` per state.
    pub std_errors: Vec<f64>,
}

/// Runs the chain from `u` for `K` steps, `P(K = k) = x0^k (1 - x0)`, and
/// records the final state.
pub fn simulate_geometric_stop(
    chain: &Chain,
    u: usize,
    x0: &Rational,
    cfg: &SimConfig,
) -> Result<GeoStopSummary, SimError> {
    let d = chain.dim();
    cfg.validate(d)?;
    if u >= d {
        return Err(ChainError::UnknownState(format!("#{u}")).into());
    }
    let xf = to_f64(x0);
    if !(xf > 0.0 && xf < 1.0) {
        return Err(SimError::InvalidArgument(format!("x0 = {x0} is not in (0, 1)")));
    }
    let rows = samplers(chain);
    let finals: Vec<usize> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = cfg.path_rng(path);
            let mut state = u;
            let mut k = 0;
            while rng.random::<f64>() < xf {
                if k >= cfg.max_steps {
                    return Err(SimError::StepCapExceeded {
                        path,
                        max_steps: cfg.max_steps,
                    });
                }
                state = rows[state].sample(rng.random::<f64>());
                k += 1;
            }
            Ok(state)
        })
        .collect::<Result<_, _>>()?;
    let mut counts = vec![0u64; d];
    for s in finals {
        counts[s] += 1;
    }
    let n = cfg.n_paths as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let std_errors = frequencies.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(GeoStopSummary {
        n_paths: cfg.n_paths,
        counts,
        frequencies,
        std_errors,
    })
}

/// `m,count,exact_probability` rows; the last column is empty when no exact
/// law is supplied or `m` lies beyond it.
pub fn histogram_csv(summary: &HittingSummary, exact: Option<&[Rational]>) -> String {
    let mut out = String::from("m,count,exact_probability\n");
    let last = summary.histogram.keys().next_back().copied().unwrap_or(0);
    for m in 0..=last {
        let count = summary.histogram.get(&m).copied().unwrap_or(0);
        let p = exact
            .and_then(|e| e.get(m as usize))
            .map(format_rational)
            .unwrap_or_default();
        let _ = writeln!(out, "{m},{count},{p}");
    }
    out
}
