//! Subcommands other than `figure`.

use bellstat_core::bounds::{runs_at_nu, runs_required_real};
use bellstat_core::inequality::DEFAULT_ENUMERATION_CAP;
use bellstat_core::simulate::{neutral_mixing_for, simulate_summary, DEMO_BELL_POINT};
use bellstat_core::squeezing::max_violation_point;
use bellstat_core::{
    brute_force_minimum, classical_bound, critical_zeta, crossover_epsilon,
    crossover_epsilon_for_ratio, estimator_config, limit_constants, min_zeta_finite_runs,
    optimal_witness, optimize_nu, p_value, runs_required, violation_nu, w_stat,
    z_star_asymptotic, BellError, BellScenario, BoundKind, GaussianPoint, Settings, SourceModel,
    WitnessPoint,
};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::output::{num, opt_num, Output};

type Result<T> = std::result::Result<T, BellError>;

pub const DEFAULT_EPSILON: f64 = 0.01;

pub(crate) fn ser_display<T: std::fmt::Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn record<const K: usize>(fields: [(&str, Value); K]) -> Output {
    Output::Record(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

fn table(columns: &[&str], rows: Vec<Vec<Value>>) -> Output {
    Output::Table {
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    }
}

/// `points` values evenly spaced on `[lo, hi]`, or on a log scale.
pub(crate) fn grid(lo: f64, hi: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(BellError::Domain { name: "points", value: 0.0, domain: "[1, inf)" });
    }
    if !(lo <= hi) || (log && !(lo > 0.0)) {
        return Err(BellError::Domain { name: "range", value: lo, domain: "lo <= hi (lo > 0 on log axes)" });
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = if log { (lo.ln(), hi.ln()) } else { (lo, hi) };
    let mut g: Vec<f64> = (0..points)
        .map(|i| {
            let x = a + (b - a) * i as f64 / (points - 1) as f64;
            if log { x.exp() } else { x }
        })
        .collect();
    g[points - 1] = hi;
    Ok(g)
}

/// Distinct integers on a log grid over `[lo, hi]`.
pub(crate) fn int_log_grid(lo: u64, hi: u64, points: usize) -> Result<Vec<u64>> {
    let mut ns: Vec<u64> = grid(lo as f64, hi as f64, points, true)?
        .into_iter()
        .map(|x| x.round() as u64)
        .collect();
    ns.dedup();
    Ok(ns)
}

// ---------------------------------------------------------------- bound

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct BoundArgs {
    /// Number of parties.
    #[arg(long)]
    pub n: u64,
    /// Settings per party.
    #[arg(long)]
    pub m: usize,
    /// Enumerate all local deterministic strategies.
    #[arg(long)]
    pub brute_force: bool,
    /// Refuse enumerations with more multisets than this.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP as u64)]
    pub cap: u64,
}

fn big(x: u128) -> Value {
    u64::try_from(x).map(Value::from).unwrap_or_else(|_| Value::String(x.to_string()))
}

pub fn bound(a: &BoundArgs) -> Result<Output> {
    let scenario = BellScenario::new(a.n, a.m)?;
    let beta_c = classical_bound(&scenario);
    let mut fields = vec![
        ("n".to_string(), json!(a.n)),
        ("m".to_string(), json!(a.m)),
        ("beta_c".to_string(), json!(beta_c)),
    ];
    if a.brute_force {
        let r = brute_force_minimum(&scenario, Some(a.cap as u128))?;
        let local_bound = -r.min_value;
        fields.extend([
            ("brute_force_min".to_string(), json!(local_bound)),
            ("match".to_string(), json!(local_bound == beta_c as i64)),
            ("min_value".to_string(), json!(r.min_value)),
            ("minimizer_count".to_string(), json!(r.minimizers.len())),
            ("visited".to_string(), big(r.visited)),
        ]);
    }
    Ok(Output::Record(fields))
}

// ---------------------------------------------------------------- witness

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct WitnessArgs {
    /// Even number of settings, or `inf`.
    #[arg(long)]
    #[serde(serialize_with = "ser_display")]
    pub m: Settings,
    #[arg(long, allow_hyphen_values = true)]
    pub cb: f64,
    #[arg(long)]
    pub zeta2: f64,
    /// Scale of the m = inf witness; defaults to the optimal one.
    #[arg(long)]
    pub nu: Option<f64>,
}

fn zeta2_critical(settings: Settings, c_b: f64) -> Value {
    opt_num(critical_zeta(settings, c_b.abs()).ok())
}

pub fn witness(a: &WitnessArgs) -> Result<Output> {
    let point = WitnessPoint::new(a.cb, a.zeta2)?;
    match a.m {
        Settings::Finite(m) => {
            let w = optimal_witness(m, &point)?;
            let (lambda, angles) = match &w.angles {
                Some(set) => (opt_num(set.lambda), Value::Array(set.thetas.iter().map(|&t| num(t)).collect())),
                None => (Value::Null, Value::Null),
            };
            Ok(record([
                ("m", json!(m)),
                ("cb", num(a.cb)),
                ("zeta2", num(a.zeta2)),
                ("value", num(w.value)),
                ("lambda", lambda),
                ("angles", angles),
                ("zeta2_critical", zeta2_critical(a.m, a.cb)),
                ("violated", json!(w.value < 0.0)),
            ]))
        }
        Settings::Infinite => {
            let nu = match a.nu {
                Some(nu) => nu,
                None => violation_nu(&point)?,
            };
            let value = w_stat(nu, &point)?;
            let lc = limit_constants(nu)?;
            Ok(record([
                ("m", json!("inf")),
                ("cb", num(a.cb)),
                ("zeta2", num(a.zeta2)),
                ("value", num(value)),
                ("nu", num(nu)),
                ("lambda_nu", num(lc.lambda_nu)),
                ("delta_nu", num(lc.delta_nu)),
                ("zeta2_critical", zeta2_critical(a.m, a.cb)),
                ("violated", json!(value < 0.0)),
            ]))
        }
    }
}

// ---------------------------------------------------------------- curve

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CurveArgs {
    #[arg(long)]
    #[serde(serialize_with = "ser_display")]
    pub m: Settings,
    #[arg(long, default_value_t = 0.0)]
    pub cb_min: f64,
    #[arg(long, default_value_t = 0.99)]
    pub cb_max: f64,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
}

pub fn curve(a: &CurveArgs) -> Result<Output> {
    let cbs = grid(a.cb_min, a.cb_max, a.points, false)?;
    let rows = cbs
        .par_iter()
        .map(|&c| Ok(vec![num(c), num(critical_zeta(a.m, c)?)]))
        .collect::<Result<Vec<_>>>()?;
    Ok(table(&["cb", "zeta2_critical"], rows))
}

// ---------------------------------------------------------------- squeeze

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SqueezeArgs {
    /// Number of spins (single-point mode).
    #[arg(long, required_unless_present = "n_min", conflicts_with_all = ["n_min", "n_max"])]
    pub n: Option<u64>,
    /// Sweep N on a log grid from here...
    #[arg(long, requires = "n_max")]
    pub n_min: Option<u64>,
    /// ...to here.
    #[arg(long, requires = "n_min")]
    pub n_max: Option<u64>,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Also report the largest zeta2 certifiable within this many runs.
    #[arg(long)]
    pub runs_budget: Option<u64>,
    /// C_b used with --runs-budget.
    #[arg(long, default_value_t = DEMO_BELL_POINT.c_b)]
    pub cb: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
}

pub(crate) fn squeeze_row(n: u64) -> Result<Vec<Value>> {
    let b = max_violation_point(n)?;
    Ok(vec![json!(n), num(b.c_b_star), num(b.zeta2_star), num(z_star_asymptotic(n)?)])
}

pub fn squeeze(a: &SqueezeArgs) -> Result<Output> {
    if let (Some(lo), Some(hi)) = (a.n_min, a.n_max) {
        let ns = int_log_grid(lo, hi, a.points)?;
        let rows = ns.par_iter().map(|&n| squeeze_row(n)).collect::<Result<Vec<_>>>()?;
        return Ok(table(&["n", "cb_star", "zeta2_star", "zeta2_star_asymptotic"], rows));
    }
    let n = a.n.expect("clap requires --n without a sweep");
    let b = max_violation_point(n)?;
    let mut fields = vec![
        ("n".to_string(), json!(n)),
        ("cb_star".to_string(), num(b.c_b_star)),
        ("cb_gap".to_string(), num(b.c_b_gap)),
        ("zeta2_star".to_string(), num(b.zeta2_star)),
        ("zeta2_star_asymptotic".to_string(), num(z_star_asymptotic(n)?)),
    ];
    if let Some(budget) = a.runs_budget {
        let z = min_zeta_finite_runs(n, a.cb, a.epsilon, budget)?;
        fields.extend([
            ("runs_budget".to_string(), json!(budget)),
            ("cb".to_string(), num(a.cb)),
            ("epsilon".to_string(), num(a.epsilon)),
            ("zeta2_max_finite_runs".to_string(), num(z)),
        ]);
    }
    Ok(Output::Record(fields))
}

// ---------------------------------------------------------------- runs

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunsArgs {
    #[arg(long)]
    pub cb: f64,
    #[arg(long)]
    pub zeta2: f64,
    /// Number of spins.
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Fixed witness scale; by default it is chosen to minimise the Bernstein run count.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Concentration bound used for the run count.
    #[arg(long, default_value = "bernstein")]
    #[serde(serialize_with = "ser_bound")]
    pub bound: BoundKind,
}

fn ser_bound<S: Serializer>(b: &BoundKind, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(b.name())
}

pub fn runs(a: &RunsArgs) -> Result<Output> {
    let point = WitnessPoint::new(a.cb, a.zeta2)?;
    let opt = match a.nu {
        Some(nu) => runs_at_nu(&point, a.n, a.epsilon, nu)?,
        None => optimize_nu(&point, a.n, a.epsilon)?,
    };
    let (runs, runs_real) = match a.bound {
        BoundKind::Bernstein => (opt.runs, opt.runs_real),
        kind => (
            runs_required(kind, opt.t0, &opt.config, a.epsilon)?,
            runs_required_real(kind, opt.t0, &opt.config, a.epsilon)?,
        ),
    };
    let nf = a.n as f64;
    Ok(record([
        ("cb", num(a.cb)),
        ("zeta2", num(a.zeta2)),
        ("n", json!(a.n)),
        ("epsilon", num(a.epsilon)),
        ("bound", json!(a.bound.name())),
        ("nu", num(opt.nu)),
        ("t0", num(opt.t0)),
        ("t_l", num(opt.config.t_l)),
        ("t_u", num(opt.config.t_u)),
        ("runs", json!(runs)),
        ("runs_real", num(runs_real)),
        ("runs_per_spin", num(runs as f64 / nf)),
        ("scaled_runs", num(runs_real / (nf * -a.epsilon.ln()))),
    ]))
}

// ---------------------------------------------------------------- crossover

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CrossoverArgs {
    /// (t_u - t_l)|t0| / sigma^2; 2 is the largest possible value.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["t_l", "t_u", "t0"])]
    pub ratio: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["t_u", "t0"])]
    pub t_l: Option<f64>,
    #[arg(long, requires_all = ["t_l", "t0"])]
    pub t_u: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["t_l", "t_u"])]
    pub t0: Option<f64>,
}

pub fn crossover(a: &CrossoverArgs) -> Result<Output> {
    if let (Some(t_l), Some(t_u), Some(t0)) = (a.t_l, a.t_u, a.t0) {
        let eps = crossover_epsilon(t_l, t_u, t0)?;
        let ratio = (t_u - t_l) * t0.abs() / (-t_l * t_u);
        return Ok(record([("ratio", num(ratio)), ("epsilon_star", num(eps))]));
    }
    let ratio = a.ratio.unwrap_or(2.0);
    Ok(record([
        ("ratio", num(ratio)),
        ("epsilon_star", num(crossover_epsilon_for_ratio(ratio)?)),
    ]))
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Two-point source on {t_l, t_u} with mean --mu.
    Binomial,
    /// Mean-zero source on {t_l, 0, t_u} with mass --p-u on t_u.
    ThreePeak,
    /// Moments drawn around (--cb, --zeta2) with spreads --sd-c, --sd-z.
    Gaussian,
    /// The point (--cb, --zeta2) mixed with a polarised product state.
    Mixture,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long, default_value_t = DEMO_BELL_POINT.c_b)]
    pub cb: f64,
    #[arg(long, default_value_t = DEMO_BELL_POINT.zeta2)]
    pub zeta2: f64,
    /// Number of spins.
    #[arg(long)]
    pub n: u64,
    /// Witness scale; defaults to the optimal one at (--cb, --zeta2).
    #[arg(long)]
    pub nu: Option<f64>,
    /// Rounds per experiment.
    #[arg(long)]
    pub runs: u64,
    /// Independent experiments.
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Threshold for the empirical p-value; defaults to W_stat at (--cb, --zeta2).
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    /// Defaults to half the largest admissible mass.
    #[arg(long)]
    pub p_u: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub sd_c: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sd_z: f64,
    /// Product-state weight; defaults to the smallest one giving mean >= 0.
    #[arg(long)]
    pub q_mix: Option<f64>,
}

pub fn simulate(a: &SimulateArgs, seed: u64) -> Result<Output> {
    let point = WitnessPoint::new(a.cb, a.zeta2)?;
    let nu = match a.nu {
        Some(nu) => nu,
        None => violation_nu(&point)?,
    };
    let config = estimator_config(nu, a.n)?;
    let bell = GaussianPoint { c_b: a.cb, zeta2: a.zeta2, sd_c: a.sd_c, sd_z: a.sd_z };
    let model = match a.model {
        ModelKind::Binomial => SourceModel::BinomialEdge { mu: a.mu },
        ModelKind::ThreePeak => {
            let p_max = -config.t_l / (config.t_u - config.t_l);
            SourceModel::ThreePeak { p_u: a.p_u.unwrap_or(p_max / 2.0) }
        }
        ModelKind::Gaussian => SourceModel::GaussianPoint(bell),
        ModelKind::Mixture => SourceModel::MixtureCounterexample {
            q_mix: match a.q_mix {
                Some(q) => q,
                None => neutral_mixing_for(&bell, &config)?,
            },
            bell,
            product: GaussianPoint::polarized_product(a.n),
        },
    };
    let t0 = match a.t0 {
        Some(t) => t,
        None => w_stat(nu, &point)?,
    };
    let summary = simulate_summary(&model, &config, t0, a.runs, a.trials, seed)?;
    let analytic = p_value(BoundKind::Bernstein, t0, a.runs, &config).ok().map(|r| r.p_value);
    let model_json = serde_json::to_value(model).expect("model is serialisable");
    let q_mix = model_json.get("q_mix").cloned().unwrap_or(Value::Null);
    let p_u = model_json.get("p_u").cloned().unwrap_or(Value::Null);
    Ok(record([
        ("model", json!(a.model)),
        ("n", json!(a.n)),
        ("nu", num(nu)),
        ("t_l", num(config.t_l)),
        ("t_u", num(config.t_u)),
        ("runs", json!(a.runs)),
        ("trials", json!(a.trials)),
        ("t0", num(t0)),
        ("q_mix", q_mix),
        ("p_u", p_u),
        ("mean_t", num(summary.mean_t)),
        ("empirical_mean", num(summary.empirical_mean)),
        ("empirical_p", num(summary.empirical_p)),
        ("analytic_bernstein_p", opt_num(analytic)),
        ("seed", json!(seed)),
    ]))
}
