//! Datasets behind the five figures.
//!
//! Every figure is a CSV table; unset flags fall back to the ranges the
//! figures were drawn with.

use bellstat_core::bounds::runs_at_nu;
use bellstat_core::simulate::DEMO_BELL_POINT;
use bellstat_core::{
    critical_zeta, min_zeta_finite_runs, optimize_nu, violation_nu, BellError, Settings,
    WitnessPoint,
};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::{grid, int_log_grid, squeeze_row, DEFAULT_EPSILON};
use crate::output::{num, opt_num, Output};

type Result<T> = std::result::Result<T, BellError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureName {
    /// Critical curves Z_2, Z_4, Z_inf and the reference point.
    Fig1,
    /// Largest violating zeta2 against N.
    Fig2,
    /// Runs per spin over a (C_b, zeta2) grid.
    Fig3,
    /// Runs against N with optimised and witness-optimal nu.
    Fig4,
    /// Largest certifiable zeta2 against N for fixed run budgets.
    Fig5,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub name: FigureName,
    /// Grid points per axis.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub cb_min: Option<f64>,
    #[arg(long)]
    pub cb_max: Option<f64>,
    #[arg(long)]
    pub zeta2_min: Option<f64>,
    #[arg(long)]
    pub zeta2_max: Option<f64>,
    /// Number of spins (fig3).
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub n_min: Option<u64>,
    #[arg(long)]
    pub n_max: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Reference point (fig4, fig5 use its C_b).
    #[arg(long)]
    pub cb: Option<f64>,
    #[arg(long)]
    pub zeta2: Option<f64>,
}

fn table(columns: &[&str], rows: Vec<Vec<Value>>) -> Output {
    Output::Table {
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    }
}

pub fn figure(a: &FigureArgs) -> Result<Output> {
    match a.name {
        FigureName::Fig1 => fig1(a),
        FigureName::Fig2 => fig2(a),
        FigureName::Fig3 => fig3(a),
        FigureName::Fig4 => fig4(a),
        FigureName::Fig5 => fig5(a),
    }
}

/// Long format `series,cb,zeta2`: one series per curve, then the point.
fn fig1(a: &FigureArgs) -> Result<Output> {
    let cbs = grid(a.cb_min.unwrap_or(0.0), a.cb_max.unwrap_or(0.999), a.points.unwrap_or(200), false)?;
    let mut rows = Vec::with_capacity(3 * cbs.len() + 1);
    for (label, settings) in [("z2", Settings::Finite(2)), ("z4", Settings::Finite(4)), ("zinf", Settings::Infinite)] {
        let values = cbs
            .par_iter()
            .map(|&c| critical_zeta(settings, c))
            .collect::<Result<Vec<_>>>()?;
        rows.extend(cbs.iter().zip(values).map(|(&c, z)| vec![json!(label), num(c), num(z)]));
    }
    let p = reference_point(a)?;
    rows.push(vec![json!("reference"), num(p.c_b), num(p.zeta2)]);
    Ok(table(&["series", "cb", "zeta2"], rows))
}

fn reference_point(a: &FigureArgs) -> Result<WitnessPoint> {
    WitnessPoint::new(a.cb.unwrap_or(DEMO_BELL_POINT.c_b), a.zeta2.unwrap_or(DEMO_BELL_POINT.zeta2))
}

fn n_axis(a: &FigureArgs, lo: u64, hi: u64, points: usize) -> Result<Vec<u64>> {
    int_log_grid(a.n_min.unwrap_or(lo), a.n_max.unwrap_or(hi), a.points.unwrap_or(points))
}

fn fig2(a: &FigureArgs) -> Result<Output> {
    let ns = n_axis(a, 10, 1_000_000, 60)?;
    let rows = ns.par_iter().map(|&n| squeeze_row(n)).collect::<Result<Vec<_>>>()?;
    Ok(table(&["n", "cb_star", "zeta2_star", "zeta2_star_asymptotic"], rows))
}

/// `M*/(N ln(1/ε))` over a grid; cells without a violation are empty.
fn fig3(a: &FigureArgs) -> Result<Output> {
    let points = a.points.unwrap_or(100);
    let cbs = grid(a.cb_min.unwrap_or(0.9), a.cb_max.unwrap_or(0.995), points, false)?;
    let zs = grid(a.zeta2_min.unwrap_or(0.0), a.zeta2_max.unwrap_or(0.35), points, false)?;
    let n = a.n.unwrap_or(100_000);
    let eps = a.epsilon.unwrap_or(DEFAULT_EPSILON);
    let nf = n as f64;
    let cells: Vec<(f64, f64)> = cbs.iter().flat_map(|&c| zs.iter().map(move |&z| (c, z))).collect();
    let rows = cells
        .par_iter()
        .map(|&(c, z)| {
            let point = WitnessPoint::new(c, z)?;
            Ok(match optimize_nu(&point, n, eps) {
                Ok(opt) => vec![
                    num(c),
                    num(z),
                    json!(opt.runs),
                    num(opt.runs as f64 / nf),
                    num(opt.runs_real / (nf * -eps.ln())),
                ],
                Err(BellError::NoViolation(_)) => vec![num(c), num(z), Value::Null, Value::Null, Value::Null],
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(table(&["cb", "zeta2", "runs", "runs_per_spin", "scaled_runs"], rows))
}

fn fig4(a: &FigureArgs) -> Result<Output> {
    let ns = n_axis(a, 10, 1_000_000, 60)?;
    let point = reference_point(a)?;
    let eps = a.epsilon.unwrap_or(DEFAULT_EPSILON);
    let nu_w = violation_nu(&point)?;
    let rows = ns
        .par_iter()
        .map(|&n| {
            let opt = optimize_nu(&point, n, eps)?;
            let fixed = runs_at_nu(&point, n, eps, nu_w)?;
            Ok(vec![
                json!(n),
                json!(opt.runs),
                num(opt.nu),
                json!(fixed.runs),
                num(nu_w),
                num(opt.runs_real / fixed.runs_real),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(table(
        &["n", "runs_optimized", "nu_optimized", "runs_violation_nu", "nu_violation", "ratio"],
        rows,
    ))
}

pub const FIG5_BUDGETS: [u64; 3] = [10_000, 100_000, 1_000_000];
const FIG5_EPSILON: f64 = 0.1;

/// Largest certifiable `ζ_a²`; empty where the budget cannot be met at all.
fn fig5(a: &FigureArgs) -> Result<Output> {
    let ns = n_axis(a, 10, 100_000, 50)?;
    let c_b = a.cb.unwrap_or(DEMO_BELL_POINT.c_b);
    let eps = a.epsilon.unwrap_or(FIG5_EPSILON);
    let cells: Vec<(u64, u64)> = FIG5_BUDGETS.iter().flat_map(|&m| ns.iter().map(move |&n| (n, m))).collect();
    let rows = cells
        .par_iter()
        .map(|&(n, budget)| {
            let z = match min_zeta_finite_runs(n, c_b, eps, budget) {
                Ok(z) => Some(z),
                Err(BellError::Infeasible(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(vec![json!(n), json!(budget), opt_num(z)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(table(&["n", "budget", "zeta2_max"], rows))
}
