//! Multi-instance, multi-seed campaigns: success probability, time to
//! solution (TTS), box statistics and exponential scaling fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{sasat_run, walksat_run, SasatConfig, WalksatConfig};
use crate::cnf::Instance;
use crate::integrator::{run_trial, Mode, TrialOptions, TrialResult};
use crate::lagrange::SystemConfig;
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("no trials to estimate from")]
    NoTrials,
    #[error("scaling fit needs at least 3 points, got {0}")]
    InsufficientPoints(usize),
    #[error("time to solution must be positive and finite")]
    NonPositiveTts,
    #[error("invalid t_max schedule: {0}")]
    InvalidSchedule(String),
}

/// Target probability of the TTS definition.
pub const TTS_TARGET: f64 = 0.99;

/// `successes/trials`, clamped to `[1/(2T), 1 − 1/(2T)]`.
pub fn clamped_probability(successes: usize, trials: usize) -> Result<f64, BenchError> {
    if trials == 0 {
        return Err(BenchError::NoTrials);
    }
    let half = 0.5 / trials as f64;
    Ok((successes as f64 / trials as f64).clamp(half, 1.0 - half))
}

/// `t_max · ln(0.01) / ln(1 − p_s)`; `p_s` must already lie in (0, 1).
pub fn tts(t_max: f64, p_s: f64) -> f64 {
    t_max * (1.0 - TTS_TARGET).ln() / (1.0 - p_s).ln()
}

/// TTS from raw counts, applying the clamp.
pub fn tts_from_counts(t_max: f64, successes: usize, trials: usize) -> Result<f64, BenchError> {
    Ok(tts(t_max, clamped_probability(successes, trials)?))
}

pub fn estimate_success(results: &[TrialResult]) -> Result<f64, BenchError> {
    clamped_probability(results.iter().filter(|r| r.solved).count(), results.len())
}

/// Success probability counting only solutions found by `budget`.
pub fn estimate_success_within(results: &[TrialResult], budget: f64) -> Result<f64, BenchError> {
    clamped_probability(
        results.iter().filter(|r| r.solved_within(budget)).count(),
        results.len(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtsEstimate {
    pub instance_name: String,
    pub solver: String,
    pub num_vars: usize,
    pub num_clauses: usize,
    pub t_max: f64,
    pub trials: usize,
    pub successes: usize,
    pub p_s: f64,
    pub tts: f64,
    /// Trials that returned an error; they count as failures.
    pub errors: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingModel {
    /// `TTS ~ exp(aN + b)`
    ExpLinear,
    /// `TTS ~ exp(c√N + d)`
    ExpSqrt,
}

impl ScalingModel {
    pub fn abscissa(self, n: f64) -> f64 {
        match self {
            ScalingModel::ExpLinear => n,
            ScalingModel::ExpSqrt => n.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: ScalingModel,
    /// `(slope, intercept)` in log space.
    pub params: (f64, f64),
    /// RMS residual of `ln TTS`.
    pub residual: f64,
    pub points: usize,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        (self.params.0 * self.model.abscissa(n) + self.params.1).exp()
    }
}

/// Least-squares line through `(x, ln tts)` for points `(N, tts)`.
pub fn fit_exp_scaling(points: &[(f64, f64)], model: ScalingModel) -> Result<ScalingFit, BenchError> {
    if points.len() < 3 {
        return Err(BenchError::InsufficientPoints(points.len()));
    }
    if points.iter().any(|&(_, t)| !(t > 0.0 && t.is_finite())) {
        return Err(BenchError::NonPositiveTts);
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| model.abscissa(n)).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, t)| t.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(BenchError::InsufficientPoints(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(ScalingFit {
        model,
        params: (slope, intercept),
        residual: (sse / k).sqrt(),
        points: points.len(),
    })
}

/// Min, quartiles (linear interpolation between order statistics), max, mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            count: v.len(),
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}

/// Quantile of sorted data at position `q·(n−1)`, interpolated.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn median(values: &[f64]) -> Option<f64> {
    BoxStats::from_values(values).map(|b| b.median)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "snake_case")]
pub enum SolverSpec {
    Lagonn {
        config: SystemConfig<f64>,
        options: TrialOptions<f64>,
    },
    OnnOnly {
        config: SystemConfig<f64>,
        options: TrialOptions<f64>,
    },
    Sasat(SasatConfig),
    Walksat(WalksatConfig),
}

impl SolverSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SolverSpec::Lagonn { .. } => "lagonn",
            SolverSpec::OnnOnly { .. } => "onn_only",
            SolverSpec::Sasat(_) => "sasat",
            SolverSpec::Walksat(_) => "walksat",
        }
    }

    /// One trial with time budget `t_max` (cycles or flips).
    pub fn run(&self, inst: &Instance, t_max: f64, seed: u64) -> Result<TrialResult, String> {
        match self {
            SolverSpec::Lagonn { config, options } | SolverSpec::OnnOnly { config, options } => {
                let mode = if matches!(self, SolverSpec::Lagonn { .. }) {
                    Mode::Lagonn
                } else {
                    Mode::OnnOnly
                };
                let opts = TrialOptions {
                    mode,
                    t_max,
                    ..*options
                };
                run_trial(inst, config, &opts, seed).map_err(|e| e.to_string())
            }
            SolverSpec::Sasat(cfg) => {
                let cfg = SasatConfig {
                    max_steps: Some(t_max.floor() as u64),
                    ..*cfg
                };
                sasat_run(inst, &cfg, seed).map_err(|e| e.to_string())
            }
            SolverSpec::Walksat(cfg) => {
                let cfg = WalksatConfig {
                    max_flips: t_max.floor() as u64,
                    ..*cfg
                };
                walksat_run(inst, &cfg, seed).map_err(|e| e.to_string())
            }
        }
    }
}

/// Geometric ladder of time budgets: `initial · factor^k`, `k < rungs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmaxSchedule {
    pub initial: f64,
    pub factor: f64,
    pub rungs: usize,
}

impl TmaxSchedule {
    pub fn new(initial: f64, rungs: usize) -> Self {
        Self {
            initial,
            factor: 4.0,
            rungs,
        }
    }

    /// A single budget with no retries.
    pub fn fixed(t_max: f64) -> Self {
        Self::new(t_max, 1)
    }

    pub fn budgets(&self) -> Vec<f64> {
        (0..self.rungs)
            .map(|k| self.initial * self.factor.powi(k as i32))
            .collect()
    }

    fn validate(&self) -> Result<(), BenchError> {
        if !(self.initial > 0.0 && self.initial.is_finite()) {
            return Err(BenchError::InvalidSchedule("initial t_max must be positive".into()));
        }
        if !(self.factor > 1.0) && self.rungs > 1 {
            return Err(BenchError::InvalidSchedule("factor must exceed 1".into()));
        }
        if self.rungs == 0 {
            return Err(BenchError::InvalidSchedule("need at least one rung".into()));
        }
        Ok(())
    }
}

/// Band of success probability the ladder aims for.
pub const P_S_BAND: (f64, f64) = (0.1, 0.9);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub estimate: TtsEstimate,
    /// Outcome per trial index; `Err` holds the solver's message.
    pub trials: Vec<Result<TrialResult, String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub num_vars: usize,
    pub instances: usize,
    pub tts: BoxStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub solver: String,
    pub instances: Vec<InstanceOutcome>,
    pub by_size: Vec<SizeSummary>,
}

impl CampaignResult {
    pub fn estimates(&self) -> impl Iterator<Item = &TtsEstimate> {
        self.instances.iter().map(|o| &o.estimate)
    }

    pub fn median_tts(&self) -> Option<f64> {
        median(&self.estimates().map(|e| e.tts).collect::<Vec<_>>())
    }

    /// `(N, median TTS)` per problem size, for scaling fits.
    pub fn scaling_points(&self) -> Vec<(f64, f64)> {
        self.by_size
            .iter()
            .map(|s| (s.num_vars as f64, s.tts.median))
            .collect()
    }
}

/// Seed for trial `index` on instance `position` of a campaign.
pub fn trial_seed(master_seed: u64, inst: &Instance, position: usize, index: usize) -> u64 {
    if inst.name().is_empty() {
        derive_seed(master_seed, &format!("instance-{position}"), index as u64)
    } else {
        derive_seed(master_seed, inst.name(), index as u64)
    }
}

/// Runs `trials_per_instance` seeded trials on every instance.
///
/// Trials are run at the first budget of `schedule`; while the success
/// probability is at or below 0.1 and a larger budget remains, the unsolved
/// trials are re-run from the same seed at the next budget. Trials are
/// deterministic in their seed, so a trial solved at one budget is solved at
/// every larger one. The reported budget is the first whose probability lies
/// strictly inside (0.1, 0.9), otherwise the one closest to 0.5.
pub fn run_campaign(
    instances: &[Instance],
    solver: &SolverSpec,
    trials_per_instance: usize,
    schedule: &TmaxSchedule,
    master_seed: u64,
) -> Result<CampaignResult, BenchError> {
    if trials_per_instance == 0 {
        return Err(BenchError::NoTrials);
    }
    schedule.validate()?;
    let budgets = schedule.budgets();
    let outcomes: Vec<InstanceOutcome> = instances
        .par_iter()
        .enumerate()
        .map(|(pos, inst)| run_instance(inst, pos, solver, trials_per_instance, &budgets, master_seed))
        .collect();

    let mut sizes: Vec<usize> = outcomes.iter().map(|o| o.estimate.num_vars).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let by_size = sizes
        .into_iter()
        .map(|n| {
            let tts: Vec<f64> = outcomes
                .iter()
                .filter(|o| o.estimate.num_vars == n)
                .map(|o| o.estimate.tts)
                .collect();
            SizeSummary {
                num_vars: n,
                instances: tts.len(),
                tts: BoxStats::from_values(&tts).expect("size has an instance"),
            }
        })
        .collect();
    Ok(CampaignResult {
        solver: solver.name().to_string(),
        instances: outcomes,
        by_size,
    })
}

fn run_instance(
    inst: &Instance,
    pos: usize,
    solver: &SolverSpec,
    trials: usize,
    budgets: &[f64],
    master_seed: u64,
) -> InstanceOutcome {
    let seeds: Vec<u64> = (0..trials).map(|i| trial_seed(master_seed, inst, pos, i)).collect();
    let mut results: Vec<Option<Result<TrialResult, String>>> = vec![None; trials];
    let mut rows: Vec<(f64, usize)> = Vec::new();

    for &budget in budgets {
        let pending: Vec<usize> = (0..trials)
            .filter(|&i| match &results[i] {
                Some(Ok(r)) => !r.solved_within(budget),
                Some(Err(_)) => false,
                None => true,
            })
            .collect();
        let fresh: Vec<(usize, Result<TrialResult, String>)> = pending
            .par_iter()
            .map(|&i| (i, solver.run(inst, budget, seeds[i])))
            .collect();
        for (i, r) in fresh {
            results[i] = Some(r);
        }
        let successes = results
            .iter()
            .filter(|r| matches!(r, Some(Ok(t)) if t.solved_within(budget)))
            .count();
        rows.push((budget, successes));
        let p = successes as f64 / trials as f64;
        if p > P_S_BAND.0 {
            break;
        }
    }

    let in_band = rows.iter().find(|&&(_, s)| {
        let p = s as f64 / trials as f64;
        p > P_S_BAND.0 && p < P_S_BAND.1
    });
    let &(t_max, successes) = in_band.unwrap_or_else(|| {
        rows.iter()
            .min_by(|a, b| {
                let da = (a.1 as f64 / trials as f64 - 0.5).abs();
                let db = (b.1 as f64 / trials as f64 - 0.5).abs();
                da.total_cmp(&db)
            })
            .expect("at least one rung")
    });
    let trials_out: Vec<Result<TrialResult, String>> =
        results.into_iter().map(|r| r.expect("every trial ran")).collect();
    let errors = trials_out.iter().filter(|r| r.is_err()).count();
    let p_s = clamped_probability(successes, trials).expect("trials > 0");
    InstanceOutcome {
        estimate: TtsEstimate {
            instance_name: inst.name().to_string(),
            solver: solver.name().to_string(),
            num_vars: inst.num_vars(),
            num_clauses: inst.num_clauses(),
            t_max,
            trials,
            successes,
            p_s,
            tts: tts(t_max, p_s),
            errors,
        },
        trials: trials_out,
    }
}
