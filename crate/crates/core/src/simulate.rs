//! Monte Carlo sampling of the single-round estimator `T` under simple
//! source models.
//!
//! A round picks the setting `b` with probability `q` (`Z = 0`) or `a`
//! otherwise (`Z = 1`) and returns
//! `T = t_l + Δ_ν(1 − c)/q` or `T = t_l + Λ_ν² z/(1 − q)`. The per-round
//! values `c`, `z` are model choices: there is no physical single-shot
//! distribution here, only enough structure to exercise the bounds.
//!
//! Trial `i` of a seeded run draws from ChaCha8 stream `i` of that seed, so
//! results do not depend on how trials are spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StdNormal};

use crate::bounds::{estimator_config, EstimatorConfig};
use crate::error::{BellError, Result};
use crate::witness::{violation_nu, WitnessPoint};

/// Per-round moments drawn from normals clamped to `c ∈ [−1, 1]`, `z ∈ [0, N]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPoint {
    pub c_b: f64,
    pub zeta2: f64,
    pub sd_c: f64,
    pub sd_z: f64,
}

impl GaussianPoint {
    pub fn exact(point: WitnessPoint) -> Self {
        Self {
            c_b: point.c_b,
            zeta2: point.zeta2,
            sd_c: 0.0,
            sd_z: 0.0,
        }
    }

    /// Fully polarised product state seen along `a`: `c = −1`, `z = N`.
    /// Every round then yields `1/4 + Δ_ν + Λ_ν²(N − 1)`.
    pub fn polarized_product(n: u64) -> Self {
        Self {
            c_b: -1.0,
            zeta2: n as f64,
            sd_c: 0.0,
            sd_z: 0.0,
        }
    }

    fn validate(&self, config: &EstimatorConfig) -> Result<()> {
        let n = config.n_spins as f64;
        if !(-1.0..=1.0).contains(&self.c_b) {
            return Err(BellError::Model(format!("c_b={} outside [-1, 1]", self.c_b)));
        }
        if !(0.0..=n).contains(&self.zeta2) {
            return Err(BellError::Model(format!("zeta2={} outside [0, N={n}]", self.zeta2)));
        }
        if !(self.sd_c >= 0.0 && self.sd_c.is_finite() && self.sd_z >= 0.0 && self.sd_z.is_finite()) {
            return Err(BellError::Model("standard deviations must be finite and >= 0".into()));
        }
        Ok(())
    }

    fn mean_c(&self) -> f64 {
        clamped_normal_mean(self.c_b, self.sd_c, -1.0, 1.0)
    }

    fn mean_z(&self, n: u64) -> f64 {
        clamped_normal_mean(self.zeta2, self.sd_z, 0.0, n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SourceModel {
    /// `T ∈ {t_l, t_u}` with mean `mu`: the maximal-variance local source.
    BinomialEdge { mu: f64 },
    /// Mean-zero `T ∈ {t_l, 0, t_u}` with mass `p_u` on `t_u`.
    ThreePeak { p_u: f64 },
    GaussianPoint(GaussianPoint),
    /// With probability `q_mix` the round comes from `product`, otherwise
    /// from `bell`.
    MixtureCounterexample {
        q_mix: f64,
        bell: GaussianPoint,
        product: GaussianPoint,
    },
}

impl SourceModel {
    pub fn validate(&self, config: &EstimatorConfig) -> Result<()> {
        match *self {
            SourceModel::BinomialEdge { mu } => {
                if !(0.0..=config.t_u).contains(&mu) {
                    return Err(BellError::Model(format!(
                        "binomial_edge mean {mu} outside [0, t_u={}]",
                        config.t_u
                    )));
                }
            }
            SourceModel::ThreePeak { p_u } => {
                let p_l = -p_u * config.t_u / config.t_l;
                if !(p_u > 0.0 && p_l + p_u <= 1.0) {
                    return Err(BellError::Model(format!(
                        "three_peak p_u={p_u} must lie in (0, {}]",
                        -config.t_l / (config.t_u - config.t_l)
                    )));
                }
            }
            SourceModel::GaussianPoint(g) => g.validate(config)?,
            SourceModel::MixtureCounterexample { q_mix, bell, product } => {
                if !(0.0..=1.0).contains(&q_mix) {
                    return Err(BellError::Model(format!("q_mix={q_mix} outside [0, 1]")));
                }
                bell.validate(config)?;
                product.validate(config)?;
            }
        }
        Ok(())
    }
}

/// Mean of `clamp(X, lo, hi)` for `X ~ N(mu, sd²)`.
pub fn clamped_normal_mean(mu: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if sd == 0.0 {
        return mu.clamp(lo, hi);
    }
    let std = StdNormal::standard();
    let a = (lo - mu) / sd;
    let b = (hi - mu) / sd;
    let (fa, fb) = (std.cdf(a), std.cdf(b));
    lo * fa + hi * (1.0 - fb) + mu * (fb - fa) + sd * (std.pdf(a) - std.pdf(b))
}

fn gaussian_mean(g: &GaussianPoint, config: &EstimatorConfig) -> f64 {
    config.t_l
        + config.delta_nu * (1.0 - g.mean_c())
        + config.lambda_nu * config.lambda_nu * g.mean_z(config.n_spins)
}

/// Analytic expectation of a single round.
pub fn model_mean(model: &SourceModel, config: &EstimatorConfig) -> Result<f64> {
    model.validate(config)?;
    Ok(match *model {
        SourceModel::BinomialEdge { mu } => mu,
        SourceModel::ThreePeak { .. } => 0.0,
        SourceModel::GaussianPoint(g) => gaussian_mean(&g, config),
        SourceModel::MixtureCounterexample { q_mix, bell, product } => {
            (1.0 - q_mix) * gaussian_mean(&bell, config) + q_mix * gaussian_mean(&product, config)
        }
    })
}

fn clamped_draw<R: Rng + ?Sized>(rng: &mut R, mu: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if sd == 0.0 {
        return mu.clamp(lo, hi);
    }
    let x = Normal::new(mu, sd).expect("validated sd").sample(rng);
    x.clamp(lo, hi)
}

fn sample_gaussian<R: Rng + ?Sized>(g: &GaussianPoint, config: &EstimatorConfig, rng: &mut R) -> f64 {
    if rng.random::<f64>() < config.q {
        let c = clamped_draw(rng, g.c_b, g.sd_c, -1.0, 1.0);
        config.t_l + config.delta_nu * (1.0 - c) / config.q
    } else {
        let z = clamped_draw(rng, g.zeta2, g.sd_z, 0.0, config.n_spins as f64);
        config.t_l + config.lambda_nu * config.lambda_nu * z / (1.0 - config.q)
    }
}

fn sample_unchecked<R: Rng + ?Sized>(model: &SourceModel, config: &EstimatorConfig, rng: &mut R) -> f64 {
    match *model {
        SourceModel::BinomialEdge { mu } => {
            let p_u = (mu - config.t_l) / (config.t_u - config.t_l);
            if rng.random::<f64>() < p_u {
                config.t_u
            } else {
                config.t_l
            }
        }
        SourceModel::ThreePeak { p_u } => {
            let p_l = -p_u * config.t_u / config.t_l;
            let r = rng.random::<f64>();
            if r < p_u {
                config.t_u
            } else if r < p_u + p_l {
                config.t_l
            } else {
                0.0
            }
        }
        SourceModel::GaussianPoint(g) => sample_gaussian(&g, config, rng),
        SourceModel::MixtureCounterexample { q_mix, bell, product } => {
            if rng.random::<f64>() < q_mix {
                sample_gaussian(&product, config, rng)
            } else {
                sample_gaussian(&bell, config, rng)
            }
        }
    }
}

/// One realisation of `T`.
pub fn sample_round<R: Rng + ?Sized>(
    model: &SourceModel,
    config: &EstimatorConfig,
    rng: &mut R,
) -> Result<f64> {
    model.validate(config)?;
    Ok(sample_unchecked(model, config, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// `t0`, the mean of `m_runs` rounds.
    pub t_estimate: f64,
    pub m_runs: u64,
    pub seed: u64,
    pub config: EstimatorConfig,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn mean_of_rounds(model: &SourceModel, config: &EstimatorConfig, m_runs: u64, rng: &mut ChaCha8Rng) -> f64 {
    let mut sum = 0.0;
    for _ in 0..m_runs {
        sum += sample_unchecked(model, config, rng);
    }
    sum / m_runs as f64
}

fn check_runs(m_runs: u64) -> Result<()> {
    if m_runs < 1 {
        return Err(BellError::domain("m_runs", 0.0, "[1, inf)"));
    }
    Ok(())
}

/// Average of `m_runs` rounds drawn from stream 0 of `seed`.
pub fn run_experiment(
    model: &SourceModel,
    config: &EstimatorConfig,
    m_runs: u64,
    seed: u64,
) -> Result<TrialRecord> {
    model.validate(config)?;
    check_runs(m_runs)?;
    let mut rng = trial_rng(seed, 0);
    Ok(TrialRecord {
        t_estimate: mean_of_rounds(model, config, m_runs, &mut rng),
        m_runs,
        seed,
        config: *config,
    })
}

/// `t0` of `n_trials` independent experiments, in trial order.
pub fn run_trials(
    model: &SourceModel,
    config: &EstimatorConfig,
    m_runs: u64,
    n_trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    model.validate(config)?;
    check_runs(m_runs)?;
    Ok((0..n_trials)
        .into_par_iter()
        .map(|i| mean_of_rounds(model, config, m_runs, &mut trial_rng(seed, i)))
        .collect())
}

/// Fraction of `n_trials` experiments whose estimate is `≤ t0`.
pub fn empirical_pvalue(
    model: &SourceModel,
    config: &EstimatorConfig,
    t0: f64,
    m_runs: u64,
    n_trials: u64,
    seed: u64,
) -> Result<f64> {
    if n_trials < 1 {
        return Err(BellError::domain("n_trials", 0.0, "[1, inf)"));
    }
    let hits = run_trials(model, config, m_runs, n_trials, seed)?
        .into_iter()
        .filter(|&t| t <= t0)
        .count();
    Ok(hits as f64 / n_trials as f64)
}

/// Summary statistics of a simulated source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    /// Analytic single-round mean.
    pub mean_t: f64,
    /// Mean of the trial estimates.
    pub empirical_mean: f64,
    pub empirical_p: f64,
}

pub fn simulate_summary(
    model: &SourceModel,
    config: &EstimatorConfig,
    t0: f64,
    m_runs: u64,
    n_trials: u64,
    seed: u64,
) -> Result<SimulationSummary> {
    if n_trials < 1 {
        return Err(BellError::domain("n_trials", 0.0, "[1, inf)"));
    }
    let trials = run_trials(model, config, m_runs, n_trials, seed)?;
    let below = trials.iter().filter(|&&t| t <= t0).count();
    Ok(SimulationSummary {
        mean_t: model_mean(model, config)?,
        empirical_mean: trials.iter().sum::<f64>() / n_trials as f64,
        empirical_p: below as f64 / n_trials as f64,
    })
}

/// Violating point used for the entangled component of the counterexample.
pub const DEMO_BELL_POINT: WitnessPoint = WitnessPoint {
    c_b: 0.98,
    zeta2: 0.272,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub mean_t: f64,
    pub false_violation_rate: f64,
    pub config: EstimatorConfig,
}

/// Estimator configuration for the demo: `ν` optimal for the witness at the
/// Bell component.
pub fn demo_config(n: u64) -> Result<EstimatorConfig> {
    estimator_config(violation_nu(&DEMO_BELL_POINT)?, n)
}

pub fn demo_model(n: u64, q_mix: f64) -> SourceModel {
    SourceModel::MixtureCounterexample {
        q_mix,
        bell: GaussianPoint::exact(DEMO_BELL_POINT),
        product: GaussianPoint::polarized_product(n),
    }
}

/// Smallest `q_mix` at which mixing `bell` with the polarised product state
/// gives a non-negative mean. Zero if `bell` alone is not violating.
pub fn neutral_mixing_for(bell: &GaussianPoint, config: &EstimatorConfig) -> Result<f64> {
    let product = GaussianPoint::polarized_product(config.n_spins);
    let model = |q| SourceModel::MixtureCounterexample { q_mix: q, bell: *bell, product };
    let w_bell = model_mean(&SourceModel::GaussianPoint(*bell), config)?;
    if w_bell >= 0.0 {
        return Ok(0.0);
    }
    let w_prod = gaussian_mean(&product, config);
    let mut q = -w_bell / (w_prod - w_bell);
    // round up until the evaluated mean is non-negative
    while model_mean(&model(q), config)? < 0.0 {
        q = q.next_up();
    }
    Ok(q)
}

/// Mixing weight at which the demo mixture has mean exactly zero.
pub fn neutral_mixing(n: u64) -> Result<f64> {
    neutral_mixing_for(&GaussianPoint::exact(DEMO_BELL_POINT), &demo_config(n)?)
}

/// A mixture of a violating state and a fully polarised product state: its
/// mean is non-negative, yet short experiments often see `t0 < 0` because
/// the product rounds are rare and large.
pub fn counterexample_demo(
    n: u64,
    q_mix: f64,
    m_runs: u64,
    n_trials: u64,
    seed: u64,
) -> Result<CounterexampleReport> {
    let config = demo_config(n)?;
    let model = demo_model(n, q_mix);
    let mean_t = model_mean(&model, &config)?;
    if mean_t < 0.0 {
        return Err(BellError::Model(format!(
            "mixture mean {mean_t:e} is negative; q_mix={q_mix} describes a violating source, \
             not a counterexample (need q_mix >= {})",
            neutral_mixing(n)?
        )));
    }
    if n_trials < 1 {
        return Err(BellError::domain("n_trials", 0.0, "[1, inf)"));
    }
    let below = run_trials(&model, &config, m_runs, n_trials, seed)?
        .into_iter()
        .filter(|&t| t < 0.0)
        .count();
    Ok(CounterexampleReport {
        mean_t,
        false_violation_rate: below as f64 / n_trials as f64,
        config,
    })
}
