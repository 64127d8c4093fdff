//! Finite-statistics machinery: the single-round estimator of `W_stat`,
//! worst-case p-values from concentration inequalities, sufficient run counts
//! and the choice of `ν` that minimises them.
//!
//! Every worst-case p-value is evaluated for the extremal local source: mean
//! `μ = 0` and variance `σ_bi² = −t_l t_u`, the largest variance any
//! distribution on `[t_l, t_u]` with that mean can have. The [`raw`] module
//! exposes the underlying tail bounds for arbitrary `(μ, σ²)`.

use serde::{Deserialize, Serialize};

use crate::error::{BellError, Result};
use crate::numeric::{bisect, golden_section, log_grid};
use crate::witness::{limit_constants, violation_nu, w_stat_with, WitnessPoint};

/// Search interval for `ν` in [`optimize_nu`].
pub const NU_SEARCH_MIN: f64 = 1e-3;
pub const NU_SEARCH_MAX: f64 = 1e3;
const NU_GRID_PER_DECADE: usize = 43;
const NU_REL_WIDTH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Chernoff,
    Bernstein,
    Uspensky,
    BerryEsseen,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Chernoff => "chernoff",
            BoundKind::Bernstein => "bernstein",
            BoundKind::Uspensky => "uspensky",
            BoundKind::BerryEsseen => "berry_esseen",
        }
    }
}

impl std::str::FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "chernoff" => Ok(BoundKind::Chernoff),
            "bernstein" => Ok(BoundKind::Bernstein),
            "uspensky" => Ok(BoundKind::Uspensky),
            "berry_esseen" => Ok(BoundKind::BerryEsseen),
            _ => Err(format!("unknown bound '{s}'")),
        }
    }
}

/// How the estimator's upper support bound is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportMode {
    /// `t_u = 1/4 + Δ_ν + Λ_ν²(N+1)`.
    #[default]
    Printed,
    /// `t_u = 1/4 + Δ_ν + Λ_ν²(N−1)`, the maximum the estimator actually
    /// reaches when `X/q` and `Y/(1−q)` share the same maximum.
    Derived,
}

/// Parameters of the single-round estimator
/// `T = χ(Z=0) X/q + χ(Z=1) Y/(1−q) + t_l`, with `X = Δ_ν(1 − C_b)` and
/// `Y = Λ_ν² ζ_a²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub nu: f64,
    pub n_spins: u64,
    /// Probability of measuring along `b`.
    pub q: f64,
    pub t_l: f64,
    pub t_u: f64,
    pub lambda_nu: f64,
    pub delta_nu: f64,
    pub mode: SupportMode,
}

impl EstimatorConfig {
    /// `σ_bi² = −t_l t_u`.
    pub fn sigma_bi_sq(&self) -> f64 {
        -self.t_l * self.t_u
    }

    pub fn width(&self) -> f64 {
        self.t_u - self.t_l
    }

    /// Largest value a single round can take for a physical spin state,
    /// `1/4 + Δ_ν + Λ_ν²(N−1)`; equals `t_u` in derived mode.
    pub fn attainable_max(&self) -> f64 {
        0.25 + self.delta_nu + self.lambda_nu * self.lambda_nu * (self.n_spins as f64 - 1.0)
    }
}

pub fn estimator_config(nu: f64, n: u64) -> Result<EstimatorConfig> {
    estimator_config_with(nu, n, SupportMode::Printed)
}

pub fn estimator_config_with(nu: f64, n: u64, mode: SupportMode) -> Result<EstimatorConfig> {
    if n < 1 {
        return Err(BellError::domain("n", n as f64, "[1, inf)"));
    }
    let lc = limit_constants(nu)?;
    let (big_l2, delta) = (lc.lambda_nu * lc.lambda_nu, lc.delta_nu);
    let nf = n as f64;
    let q = 1.0 / (1.0 + big_l2 * nf / (2.0 * delta));
    let t_l = 0.25 - delta - big_l2;
    let extra = match mode {
        SupportMode::Printed => nf + 1.0,
        SupportMode::Derived => nf - 1.0,
    };
    Ok(EstimatorConfig {
        nu,
        n_spins: n,
        q,
        t_l,
        t_u: 0.25 + delta + big_l2 * extra,
        lambda_nu: lc.lambda_nu,
        delta_nu: delta,
        mode,
    })
}

/// `(t_u − μ)(μ − t_l)`: the largest variance of a distribution on `[t_l, t_u]`
/// with mean `μ`, attained by the two-point distribution on the endpoints.
pub fn worst_case_variance(t_l: f64, t_u: f64, mu: f64) -> Result<f64> {
    if !(t_l <= mu && mu <= t_u) {
        return Err(BellError::domain("mu", mu, "[t_l, t_u]"));
    }
    Ok((t_u - mu) * (mu - t_l))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub p_value: f64,
    pub runs_required: Option<u64>,
}

fn check_t0(t0: f64) -> Result<()> {
    if !(t0 < 0.0) {
        return Err(BellError::NoViolation(format!(
            "observed estimate t0={t0} is not negative"
        )));
    }
    Ok(())
}

/// Tail bounds for the mean of `M` independent rounds with arbitrary mean and
/// variance.
pub mod raw {
    use statrs::distribution::{ContinuousCDF, Normal};

    /// `P[X̄ ≤ x0] ≤ exp(−(μ−x0)² M / (4σ0²))`.
    pub fn chernoff(mu: f64, x0: f64, sigma0_sq: f64, m: f64) -> f64 {
        let d = mu - x0;
        (-(d * d) * m / (4.0 * sigma0_sq)).exp().min(1.0)
    }

    /// `P[X̄ ≤ x0] ≤ exp(−(μ−x0)² M / (2σ0² + ⅔(b−a)(μ−x0)))`.
    pub fn bernstein(mu: f64, x0: f64, sigma0_sq: f64, width: f64, m: f64) -> f64 {
        let d = mu - x0;
        (-(d * d) * m / (2.0 * sigma0_sq + 2.0 / 3.0 * width * d))
            .exp()
            .min(1.0)
    }

    /// `P[X̄ ≤ x0] ≤ σ0² / (σ0² + (x0−μ)² M)`.
    pub fn uspensky(mu: f64, x0: f64, sigma0_sq: f64, m: f64) -> f64 {
        let d = x0 - mu;
        if sigma0_sq == 0.0 {
            return 0.0;
        }
        sigma0_sq / (sigma0_sq + d * d * m)
    }

    /// Gap term of the Berry–Esseen theorem with the refined constant,
    /// `0.33554(ρ + 0.415σ³)/(σ³√M)`.
    pub fn berry_esseen_gap(sigma_sq: f64, rho: f64, m: f64) -> f64 {
        let s3 = sigma_sq * sigma_sq.sqrt();
        0.33554 * (rho + 0.415 * s3) / (s3 * m.sqrt())
    }

    /// `P[X̄ ≤ x0] ≤ Φ(√(M/σ²)(x0−μ)) + gap`, clipped to 1.
    pub fn berry_esseen(mu: f64, x0: f64, sigma_sq: f64, rho: f64, m: f64) -> f64 {
        let z = (m / sigma_sq).sqrt() * (x0 - mu);
        let phi = Normal::standard().cdf(z);
        (phi + berry_esseen_gap(sigma_sq, rho, m)).min(1.0)
    }
}

/// Worst-case p-value at source mean `mu ∈ [0, t_u]`, with the variance set
/// to its extremal value `σ_bi²(μ)`. Berry–Esseen is always 1.
pub fn p_value_at_mean(
    kind: BoundKind,
    t0: f64,
    m_runs: u64,
    config: &EstimatorConfig,
    mu: f64,
) -> Result<f64> {
    check_t0(t0)?;
    if !(0.0..=config.t_u).contains(&mu) {
        return Err(BellError::domain("mu", mu, "[0, t_u]"));
    }
    let var = worst_case_variance(config.t_l, config.t_u, mu)?;
    let m = m_runs as f64;
    Ok(match kind {
        BoundKind::Chernoff => raw::chernoff(mu, t0, var, m),
        BoundKind::Bernstein => raw::bernstein(mu, t0, var, config.width(), m),
        BoundKind::Uspensky => raw::uspensky(mu, t0, var, m),
        BoundKind::BerryEsseen => 1.0,
    })
}

/// Largest p-value any non-Bell-correlated i.i.d. source can produce for an
/// observed estimate `t0 < 0` after `m_runs` rounds.
pub fn p_value(
    kind: BoundKind,
    t0: f64,
    m_runs: u64,
    config: &EstimatorConfig,
) -> Result<BoundReport> {
    let p = p_value_at_mean(kind, t0, m_runs, config, 0.0)?;
    Ok(BoundReport {
        kind,
        p_value: p,
        runs_required: None,
    })
}

/// [`p_value`] together with the run count needed to reach `epsilon`.
pub fn bound_report(
    kind: BoundKind,
    t0: f64,
    m_runs: u64,
    config: &EstimatorConfig,
    epsilon: f64,
) -> Result<BoundReport> {
    let mut report = p_value(kind, t0, m_runs, config)?;
    report.runs_required = match kind {
        BoundKind::BerryEsseen => None,
        _ => Some(runs_required(kind, t0, config, epsilon)?),
    };
    Ok(report)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(BellError::domain("epsilon", epsilon, "(0, 1)"));
    }
    Ok(())
}

/// Real-valued run count at which the worst-case p-value equals `epsilon`.
pub fn runs_required_real(
    kind: BoundKind,
    t0: f64,
    config: &EstimatorConfig,
    epsilon: f64,
) -> Result<f64> {
    check_t0(t0)?;
    check_epsilon(epsilon)?;
    let sigma2 = config.sigma_bi_sq();
    let ln_inv = -epsilon.ln();
    let t2 = t0 * t0;
    match kind {
        BoundKind::Chernoff => Ok(4.0 * sigma2 / t2 * ln_inv),
        BoundKind::Bernstein => Ok((2.0 * sigma2 - 2.0 / 3.0 * config.width() * t0) / t2 * ln_inv),
        BoundKind::Uspensky => Ok(sigma2 * (1.0 - epsilon) / (epsilon * t2)),
        BoundKind::BerryEsseen => Err(BellError::Unbounded("berry_esseen")),
    }
}

/// Smallest integer `M` with worst-case p-value `≤ epsilon`.
pub fn runs_required(
    kind: BoundKind,
    t0: f64,
    config: &EstimatorConfig,
    epsilon: f64,
) -> Result<u64> {
    let real = runs_required_real(kind, t0, config, epsilon)?;
    if !real.is_finite() || real > 1e18 {
        return Err(BellError::Convergence(format!(
            "run count {real:e} exceeds the representable range"
        )));
    }
    let p = |m: u64| p_value_at_mean(kind, t0, m, config, 0.0);
    let mut m = (real.ceil() as u64).max(1);
    // The closed form is exact in real arithmetic; fix up ±1 rounding drift.
    while p(m)? > epsilon {
        m += 1;
    }
    while m > 1 && p(m - 1)? <= epsilon {
        m -= 1;
    }
    Ok(m)
}

/// `ρ/σ³` of the mean-zero distribution with mass `p_u` at `x_u`,
/// `p_l = −p_u x_u / x_l` at `x_l` and the rest at 0.
pub fn three_peak_ratio(x_l: f64, x_u: f64, p_u: f64) -> Result<f64> {
    if !(x_l < 0.0) {
        return Err(BellError::domain("x_l", x_l, "(-inf, 0)"));
    }
    if !(x_u > 0.0) {
        return Err(BellError::domain("x_u", x_u, "(0, inf)"));
    }
    let p_l = -p_u * x_u / x_l;
    if !(p_u > 0.0 && p_u < 1.0 && p_l < 1.0 && p_l + p_u <= 1.0 + 1e-15) {
        return Err(BellError::domain("p_u", p_u, "(0, -x_l/(x_u-x_l)]"));
    }
    let w = x_u - x_l;
    Ok((x_u * x_u + x_l * x_l) / (p_u * x_u * w * w * w).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuOptimum {
    pub nu: f64,
    pub runs: u64,
    pub runs_real: f64,
    pub t0: f64,
    pub config: EstimatorConfig,
}

/// Bernstein run count for the settings `ν` at `point`; `+∞` when `ν` gives
/// no violation.
pub fn bernstein_runs_for_nu(point: &WitnessPoint, n: u64, epsilon: f64, nu: f64) -> f64 {
    match estimator_config(nu, n) {
        Ok(cfg) => {
            let lc = limit_constants(nu).expect("validated by estimator_config");
            let t0 = w_stat_with(&lc, point);
            runs_required_real(BoundKind::Bernstein, t0, &cfg, epsilon).unwrap_or(f64::INFINITY)
        }
        Err(_) => f64::INFINITY,
    }
}

/// Evaluate the Bernstein run count at a fixed `ν`.
pub fn runs_at_nu(point: &WitnessPoint, n: u64, epsilon: f64, nu: f64) -> Result<NuOptimum> {
    let config = estimator_config(nu, n)?;
    let lc = limit_constants(nu)?;
    let t0 = w_stat_with(&lc, point);
    let runs_real = runs_required_real(BoundKind::Bernstein, t0, &config, epsilon)?;
    let runs = runs_required(BoundKind::Bernstein, t0, &config, epsilon)?;
    Ok(NuOptimum {
        nu,
        runs,
        runs_real,
        t0,
        config,
    })
}

/// Choose `ν` to minimise the Bernstein run count at `point`.
///
/// A log grid over `[1e−3, 1e3]`, seeded with the witness-optimal `ν`,
/// picks the basin; golden-section in `ln ν` then refines it.
pub fn optimize_nu(point: &WitnessPoint, n: u64, epsilon: f64) -> Result<NuOptimum> {
    check_epsilon(epsilon)?;
    if n < 1 {
        return Err(BellError::domain("n", n as f64, "[1, inf)"));
    }
    let objective = |nu: f64| bernstein_runs_for_nu(point, n, epsilon, nu);

    let mut grid = log_grid(NU_SEARCH_MIN, NU_SEARCH_MAX, NU_GRID_PER_DECADE);
    if let Ok(seed) = violation_nu(point) {
        if (NU_SEARCH_MIN..=NU_SEARCH_MAX).contains(&seed) {
            grid.push(seed);
            grid.sort_by(f64::total_cmp);
        }
    }
    let values: Vec<f64> = grid.iter().map(|&nu| objective(nu)).collect();
    let (best_idx, best_val) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    if !best_val.is_finite() {
        return Err(BellError::NoViolation(format!(
            "no nu in [{NU_SEARCH_MIN}, {NU_SEARCH_MAX}] gives W_stat < 0 at C_b={}, zeta2={}",
            point.c_b, point.zeta2
        )));
    }
    let lo = grid[best_idx.saturating_sub(1)].ln();
    let hi = grid[(best_idx + 1).min(grid.len() - 1)].ln();
    let (ln_nu, val) = golden_section(|l| objective(l.exp()), lo, hi, NU_REL_WIDTH);
    let nu = if val <= best_val { ln_nu.exp() } else { grid[best_idx] };
    runs_at_nu(point, n, epsilon, nu)
}

/// `(1−ε)/(ε ln(1/ε))`, strictly decreasing from `∞` to 1 on `(0, 1)`.
pub fn uspensky_bernstein_ratio(epsilon: f64) -> f64 {
    (1.0 - epsilon) / (epsilon * -epsilon.ln())
}

/// `ε` at which the Bernstein and Uspensky run counts coincide, for the
/// ratio `r = (t_u − t_l)|t0|/σ_bi²`.
pub fn crossover_epsilon_for_ratio(ratio: f64) -> Result<f64> {
    let rhs = 2.0 + 2.0 / 3.0 * ratio;
    if !(rhs > 1.0) || !rhs.is_finite() {
        return Err(BellError::NoCrossover { rhs });
    }
    bisect(
        |e| uspensky_bernstein_ratio(e) - rhs,
        1e-300,
        1.0 - 1e-16,
        1e-15,
    )
}

/// Crossover `ε` for a concrete estimator support and observed `t0`.
pub fn crossover_epsilon(t_l: f64, t_u: f64, t0: f64) -> Result<f64> {
    if !(t_l < 0.0) {
        return Err(BellError::domain("t_l", t_l, "(-inf, 0)"));
    }
    if !(t_u > 0.0) {
        return Err(BellError::domain("t_u", t_u, "(0, inf)"));
    }
    check_t0(t0)?;
    let sigma2 = -t_l * t_u;
    crossover_epsilon_for_ratio((t_u - t_l) * (-t0) / sigma2)
}
