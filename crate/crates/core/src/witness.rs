//! Bell-correlation witnesses built from two collective spin measurements.
//!
//! With `m` coplanar measurement directions at angles `ϑ_k` (antisymmetric,
//! `ϑ_{m−k−1} = −ϑ_k`) the witness reads
//!
//! ```text
//! W_m = C_b Σ_{k<m/2} α_k sin ϑ_k − (1 − ζ_a²) [Σ_{k<m/2} cos ϑ_k]² + m²/4 ≥ 0
//! ```
//!
//! for states that are not Bell-correlated. Minimising over the angles gives
//! `ϑ_k = −arctan(λ α_k)` with `λ` fixed by a self-consistency equation, and
//! the critical curves `Z_m(C_b)` below which the witness is violated.

use serde::{Deserialize, Serialize};

use crate::error::{BellError, Result};
use crate::numeric::{arsinh, artanh, bisect, bisect_expanding, log_grid};

/// Below this `ν` the limit constants switch to their Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

const LAMBDA_GRID_LO: f64 = 1e-6;
const LAMBDA_GRID_HI: f64 = 1e6;
const LAMBDA_GRID_PER_DECADE: usize = 64;

/// Relative tolerance of the outer `ζ_a²` bisection for `Z_m`.
const OUTER_TOL: f64 = 1e-13;
/// Inner `λ` tolerance, 100× tighter than the outer one.
const INNER_TOL: f64 = 1e-15;

/// Number of measurement settings: an even count or the `m → ∞` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Settings {
    Finite(usize),
    Infinite,
}

impl Settings {
    fn even(self) -> Result<Option<usize>> {
        match self {
            Settings::Finite(m) => check_even(m).map(Some),
            Settings::Infinite => Ok(None),
        }
    }
}

impl std::str::FromStr for Settings {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Settings::Infinite),
            other => other
                .parse::<usize>()
                .map(Settings::Finite)
                .map_err(|_| format!("expected an even integer or 'inf', got '{s}'")),
        }
    }
}

impl std::fmt::Display for Settings {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Settings::Finite(m) => write!(f, "{m}"),
            Settings::Infinite => write!(f, "inf"),
        }
    }
}

fn check_even(m: usize) -> Result<usize> {
    if m == 0 || m % 2 == 1 {
        Err(BellError::UnsupportedSettingCount(m))
    } else {
        Ok(m)
    }
}

/// Measured pair `(C_b, ζ_a²)`: scaled collective spin along `b` and scaled
/// second moment along `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub c_b: f64,
    pub zeta2: f64,
}

impl WitnessPoint {
    pub fn new(c_b: f64, zeta2: f64) -> Result<Self> {
        if !(c_b.abs() <= 1.0) {
            return Err(BellError::domain("c_b", c_b, "[-1, 1]"));
        }
        if !(zeta2 >= 0.0) || !zeta2.is_finite() {
            return Err(BellError::domain("zeta2", zeta2, "[0, inf)"));
        }
        Ok(Self { c_b, zeta2 })
    }

    fn require_violation_domain(&self) -> Result<()> {
        if !(self.c_b > 0.0 && self.c_b < 1.0) {
            return Err(BellError::domain("c_b", self.c_b, "(0, 1)"));
        }
        if !(self.zeta2 < 1.0) {
            return Err(BellError::domain("zeta2", self.zeta2, "[0, 1)"));
        }
        Ok(())
    }
}

/// The `m/2` independent angles `ϑ_0..ϑ_{m/2−1}` (radians).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSet {
    pub thetas: Vec<f64>,
    /// Scale `λ_m` when the angles follow the arctan family.
    pub lambda: Option<f64>,
}

impl AngleSet {
    pub fn new(thetas: Vec<f64>) -> Self {
        Self {
            thetas,
            lambda: None,
        }
    }

    /// `ϑ_k = −arctan(λ (m − 2k − 1))`.
    pub fn from_lambda(m: usize, lambda: f64) -> Self {
        let thetas = (0..m / 2)
            .map(|k| -(lambda * (m - 2 * k - 1) as f64).atan())
            .collect();
        Self {
            thetas,
            lambda: Some(lambda),
        }
    }

    /// Angles for the point with `C_b → −C_b` (`ϑ_k → −ϑ_k`).
    pub fn reflected(&self) -> Self {
        Self {
            thetas: self.thetas.iter().map(|t| -t).collect(),
            lambda: self.lambda.map(|l| -l),
        }
    }
}

pub fn witness_value(m: usize, angles: &AngleSet, point: &WitnessPoint) -> Result<f64> {
    check_even(m)?;
    if angles.thetas.len() != m / 2 {
        return Err(BellError::DimensionMismatch {
            expected: m / 2,
            got: angles.thetas.len(),
        });
    }
    let (mut sin_part, mut cos_sum) = (0.0, 0.0);
    for (k, &t) in angles.thetas.iter().enumerate() {
        sin_part += (m - 2 * k - 1) as f64 * t.sin();
        cos_sum += t.cos();
    }
    let mf = m as f64;
    Ok(point.c_b * sin_part - (1.0 - point.zeta2) * cos_sum * cos_sum + mf * mf / 4.0)
}

/// `(Λ_m(λ), Δ_m(λ))` with `Λ_m = Σ 1/√(1+λ²a²)`, `Δ_m = Σ λa²/√(1+λ²a²)`,
/// `a = 2k−1`, `k = 1..m/2`.
pub fn finite_constants(m: usize, lambda: f64) -> Result<(f64, f64)> {
    check_even(m)?;
    if !(lambda > 0.0) {
        return Err(BellError::domain("lambda", lambda, "(0, inf)"));
    }
    Ok(finite_constants_unchecked(m, lambda))
}

fn finite_constants_unchecked(m: usize, lambda: f64) -> (f64, f64) {
    let (mut big_lambda, mut delta) = (0.0, 0.0);
    for k in 1..=m / 2 {
        let a = (2 * k - 1) as f64;
        let r = (1.0 + (lambda * a).powi(2)).sqrt();
        big_lambda += 1.0 / r;
        delta += lambda * a * a / r;
    }
    (big_lambda, delta)
}

/// `W_m` on the arctan angle family, `−C_b Δ_m(λ) − (1−ζ_a²) Λ_m(λ)² + m²/4`.
pub fn witness_at_lambda(m: usize, lambda: f64, point: &WitnessPoint) -> f64 {
    let (big_lambda, delta) = finite_constants_unchecked(m, lambda);
    let mf = m as f64;
    -point.c_b * delta - (1.0 - point.zeta2) * big_lambda * big_lambda + mf * mf / 4.0
}

/// `λ` times the self-consistency residual,
/// `C_b/(2(1−ζ_a²)) − λ Λ_m(λ)`; decreasing in `λ`.
fn scaled_residual(m: usize, lambda: f64, point: &WitnessPoint) -> f64 {
    let (big_lambda, _) = finite_constants_unchecked(m, lambda);
    point.c_b / (2.0 * (1.0 - point.zeta2)) - lambda * big_lambda
}

/// All roots of the self-consistency equation found by a log-grid scan with
/// bracket expansion at both ends.
fn self_consistency_roots(m: usize, point: &WitnessPoint, tol: f64) -> Result<Vec<f64>> {
    let grid = log_grid(LAMBDA_GRID_LO, LAMBDA_GRID_HI, LAMBDA_GRID_PER_DECADE);
    let values: Vec<f64> = grid.iter().map(|&l| scaled_residual(m, l, point)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        if values[i] == 0.0 {
            roots.push(grid[i]);
        } else if values[i].signum() != values[i + 1].signum() && values[i + 1] != 0.0 {
            roots.push(bisect(
                |l| scaled_residual(m, l, point),
                grid[i],
                grid[i + 1],
                tol,
            )?);
        }
    }
    if !roots.is_empty() {
        return Ok(roots);
    }
    let f = |l: f64| scaled_residual(m, l, point);
    let first = values[0];
    let last = values[values.len() - 1];
    if first < 0.0 {
        // root below the grid: shrink by halving (doubling in 1/λ)
        let inv = bisect_expanding(|u| f(1.0 / u), 1.0 / LAMBDA_GRID_LO, 2.0 / LAMBDA_GRID_LO, tol)?;
        return Ok(vec![1.0 / inv]);
    }
    // Residual at λ→∞ tends to C_b/(2(1−ζ)) − Σ 1/(2k−1).
    let harmonic: f64 = (1..=m / 2).map(|k| 1.0 / (2 * k - 1) as f64).sum();
    if last > 0.0 && point.c_b / (2.0 * (1.0 - point.zeta2)) < harmonic {
        return Ok(vec![bisect_expanding(f, LAMBDA_GRID_HI, 2.0 * LAMBDA_GRID_HI, tol)?]);
    }
    Ok(Vec::new())
}

/// Solve the self-consistency equation `C_b/(2λ(1−ζ_a²)) = Λ_m(λ)` and return
/// the induced optimal angles.
pub fn solve_lambda(m: usize, point: &WitnessPoint) -> Result<AngleSet> {
    check_even(m)?;
    point.require_violation_domain()?;
    let roots = self_consistency_roots(m, point, INNER_TOL)?;
    let best = roots
        .into_iter()
        .map(|l| (l, witness_at_lambda(m, l, point)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| {
            BellError::Convergence(format!(
                "self-consistency equation has no root for m={m}, C_b={}, zeta2={}: \
                 C_b/(2(1-zeta2)) exceeds the large-lambda limit",
                point.c_b, point.zeta2
            ))
        })?;
    Ok(AngleSet::from_lambda(m, best.0))
}

/// Minimum of `W_m` over the arctan family, with the minimising `λ` when it is
/// attained at a finite value.
pub fn min_witness(m: usize, point: &WitnessPoint) -> Result<(f64, Option<f64>)> {
    check_even(m)?;
    let mf = m as f64;
    // λ → ∞ limit: Δ_m → m²/4, Λ_m → 0.
    let at_infinity = mf * mf / 4.0 * (1.0 - point.c_b);
    if point.c_b <= 0.0 || point.zeta2 >= 1.0 {
        // no sign-changing self-consistency root; W_m ≥ m²/4·ζ_a² ≥ 0 at λ→0
        let at_zero = mf * mf / 4.0 * point.zeta2;
        return Ok((at_zero.min(at_infinity), None));
    }
    let roots = self_consistency_roots(m, point, INNER_TOL)?;
    let mut best = (at_infinity, None);
    for l in roots {
        let v = witness_at_lambda(m, l, point);
        if v < best.0 {
            best = (v, Some(l));
        }
    }
    Ok(best)
}

/// Optimal witness value and angles for any `C_b ∈ [−1, 1]`, using the
/// joint symmetry `C_b → −C_b`, `ϑ_k → −ϑ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalWitness {
    pub value: f64,
    pub angles: Option<AngleSet>,
}

pub fn optimal_witness(m: usize, point: &WitnessPoint) -> Result<OptimalWitness> {
    check_even(m)?;
    let mirrored = WitnessPoint {
        c_b: point.c_b.abs(),
        zeta2: point.zeta2,
    };
    let (value, lambda) = min_witness(m, &mirrored)?;
    let angles = lambda.map(|l| {
        let a = AngleSet::from_lambda(m, l);
        if point.c_b < 0.0 {
            a.reflected()
        } else {
            a
        }
    });
    Ok(OptimalWitness { value, angles })
}

/// Limit (`m → ∞`) constants at a fixed `ν = lim λ_m m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConstants {
    pub nu: f64,
    pub lambda_nu: f64,
    pub delta_nu: f64,
}

/// `Λ_ν = arsinh(ν)/(2ν)`, `Δ_ν = √(1+ν²)/(4ν) − arsinh(ν)/(4ν²)`.
pub fn limit_constants(nu: f64) -> Result<LimitConstants> {
    if !(nu > 0.0) {
        return Err(BellError::domain("nu", nu, "(0, inf]"));
    }
    let (lambda_nu, delta_nu) = if nu == f64::INFINITY {
        (0.0, 0.25)
    } else if nu < SERIES_THRESHOLD {
        let n2 = nu * nu;
        (
            0.5 - n2 / 12.0 + 3.0 * n2 * n2 / 80.0,
            nu / 6.0 - nu * n2 / 20.0 + 3.0 * nu * n2 * n2 / 112.0,
        )
    } else {
        let ash = arsinh(nu);
        let root = if nu > 1e150 { nu } else { (1.0 + nu * nu).sqrt() };
        (ash / (2.0 * nu), root / (4.0 * nu) - ash / (4.0 * nu * nu))
    };
    Ok(LimitConstants {
        nu,
        lambda_nu,
        delta_nu,
    })
}

/// `W_stat = −C_b Δ_ν − (1 − ζ_a²) Λ_ν² + 1/4`.
pub fn w_stat(nu: f64, point: &WitnessPoint) -> Result<f64> {
    let lc = limit_constants(nu)?;
    Ok(w_stat_with(&lc, point))
}

pub(crate) fn w_stat_with(lc: &LimitConstants, point: &WitnessPoint) -> f64 {
    -point.c_b * lc.delta_nu - (1.0 - point.zeta2) * lc.lambda_nu * lc.lambda_nu + 0.25
}

/// `ν = sinh(C_b/(1−ζ_a²))`, the stationary point of `W_stat` in `ν`.
pub fn violation_nu(point: &WitnessPoint) -> Result<f64> {
    point.require_violation_domain()?;
    Ok((point.c_b / (1.0 - point.zeta2)).sinh())
}

/// `Z_∞(C_b) = 1 − C_b/artanh(C_b)`.
fn z_infinity(c_b: f64) -> f64 {
    if c_b == 0.0 {
        0.0
    } else if c_b < 1e-4 {
        let c2 = c_b * c_b;
        c2 / 3.0 + 4.0 * c2 * c2 / 45.0
    } else {
        1.0 - c_b / artanh(c_b)
    }
}

/// `Z_∞` in terms of the gap `δ = 1 − C_b`, accurate for `C_b → 1`.
pub fn critical_zeta_inf_from_gap(gap: f64) -> f64 {
    if gap > 0.5 {
        return z_infinity(1.0 - gap);
    }
    let atanh = 0.5 * ((2.0 - gap) / gap).ln();
    1.0 - (1.0 - gap) / atanh
}

/// `Z_2(C_b) = ½(1 − √(1 − C_b²))`.
fn z_two(c_b: f64) -> f64 {
    // c²/(2(1+√(1−c²))) avoids cancellation at small C_b.
    let c2 = c_b * c_b;
    0.5 * c2 / (1.0 + (1.0 - c2).sqrt())
}

fn check_cb(c_b: f64) -> Result<()> {
    if !(0.0..1.0).contains(&c_b) {
        return Err(BellError::domain("c_b", c_b, "[0, 1)"));
    }
    Ok(())
}

/// Critical second moment `Z_m(C_b)`: the witness is violated for `ζ_a² < Z_m`.
///
/// Closed forms for `m = 2` and `m = ∞`; nested numeric solve otherwise.
pub fn critical_zeta(settings: Settings, c_b: f64) -> Result<f64> {
    check_cb(c_b)?;
    match settings.even()? {
        None => Ok(z_infinity(c_b)),
        Some(2) => Ok(z_two(c_b)),
        Some(m) => critical_zeta_numeric(m, c_b),
    }
}

/// `Z_m(C_b)` from the zero of `min_λ W_m(ζ_a²)` by outer bisection in `ζ_a²`.
pub fn critical_zeta_numeric(m: usize, c_b: f64) -> Result<f64> {
    check_even(m)?;
    check_cb(c_b)?;
    if c_b == 0.0 {
        return Ok(0.0);
    }
    let objective = |z: f64| -> f64 {
        min_witness(m, &WitnessPoint { c_b, zeta2: z })
            .map(|r| r.0)
            .unwrap_or(f64::NAN)
    };
    bisect(objective, 0.0, 1.0, OUTER_TOL)
}

/// `Z_∞(C_b)` by solving `W_stat(ν*(ζ), ζ) = 0` with the self-consistent
/// `ν* = sinh(C_b/(1−ζ_a²))`. Independent of the artanh closed form.
pub fn critical_zeta_inf_via_nu(c_b: f64) -> Result<f64> {
    check_cb(c_b)?;
    if c_b == 0.0 {
        return Ok(0.0);
    }
    let objective = |z: f64| -> f64 {
        let point = WitnessPoint { c_b, zeta2: z };
        let nu = (c_b / (1.0 - z)).sinh();
        w_stat(nu, &point).unwrap_or(f64::NAN)
    };
    bisect(objective, 0.0, 1.0 - 1e-15, OUTER_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn pt(c: f64, z: f64) -> WitnessPoint {
        WitnessPoint::new(c, z).unwrap()
    }

    #[test]
    fn zero_angles_give_scaled_second_moment() {
        for m in [2, 4, 8] {
            let angles = AngleSet::new(vec![0.0; m / 2]);
            let p = pt(0.37, 0.42);
            let w = witness_value(m, &angles, &p).unwrap();
            assert!((w - 0.42 * (m * m) as f64 / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn m2_quarter_angle() {
        let w = witness_value(2, &AngleSet::new(vec![-FRAC_PI_4]), &pt(1.0, 0.0)).unwrap();
        assert!((w - (1.0 - 2f64.sqrt()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn point_zero_one_is_inert() {
        for m in [2, 6] {
            let angles = AngleSet::new((0..m / 2).map(|k| -0.3 * k as f64 - 0.1).collect());
            let w = witness_value(m, &angles, &pt(0.0, 1.0)).unwrap();
            assert!((w - (m * m) as f64 / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_m_rejected() {
        assert_eq!(
            witness_value(3, &AngleSet::new(vec![0.0]), &pt(0.5, 0.5)),
            Err(BellError::UnsupportedSettingCount(3))
        );
        assert!(solve_lambda(5, &pt(0.5, 0.1)).is_err());
    }

    #[test]
    fn m2_self_consistency_residual() {
        let p = pt(0.7, 0.2);
        let a = solve_lambda(2, &p).unwrap();
        let l = a.lambda.unwrap();
        let resid = p.c_b / (2.0 * l * (1.0 - p.zeta2)) - 1.0 / (1.0 + l * l).sqrt();
        assert!(resid.abs() <= 1e-10);
    }

    #[test]
    fn solved_angles_follow_arctan_family() {
        let a = solve_lambda(6, &pt(0.8, 0.3)).unwrap();
        let l = a.lambda.unwrap();
        for (k, t) in a.thetas.iter().enumerate() {
            assert_eq!(*t, -(l * (6 - 2 * k - 1) as f64).atan());
        }
    }

    #[test]
    fn solve_lambda_domain() {
        assert!(matches!(
            solve_lambda(2, &pt(0.0, 0.1)),
            Err(BellError::Domain { .. })
        ));
        assert!(matches!(
            solve_lambda(2, &pt(0.5, 1.0)),
            Err(BellError::Domain { .. })
        ));
    }

    #[test]
    fn witness_vanishes_on_z2() {
        let c = 0.6;
        let p = pt(c, critical_zeta(Settings::Finite(2), c).unwrap());
        let a = solve_lambda(2, &p).unwrap();
        assert!(witness_value(2, &a, &p).unwrap().abs() < 1e-8);
    }

    #[test]
    fn finite_constants_edges() {
        let (l, d) = finite_constants(8, 1e-12).unwrap();
        assert!((l - 4.0).abs() < 1e-12 && d.abs() < 1e-10);
        let lam = 0.7;
        let (l, d) = finite_constants(2, lam).unwrap();
        let r = (1.0 + lam * lam).sqrt();
        assert!((l - 1.0 / r).abs() < 1e-15 && (d - lam / r).abs() < 1e-15);
        assert!(finite_constants(2, 0.0).is_err());
    }

    #[test]
    fn limit_constants_small_nu() {
        let lc = limit_constants(1e-9).unwrap();
        assert!((lc.lambda_nu - 0.5).abs() < 1e-15);
        assert!(lc.delta_nu.abs() < 1e-9);
        assert!(limit_constants(0.0).is_err());
        assert!(limit_constants(-1.0).is_err());
        // the series and the closed form agree across the switch
        let below = limit_constants(SERIES_THRESHOLD * (1.0 - 1e-9)).unwrap();
        let above = limit_constants(SERIES_THRESHOLD * (1.0 + 1e-9)).unwrap();
        assert!((below.lambda_nu - above.lambda_nu).abs() < 1e-12);
        assert!((below.delta_nu - above.delta_nu).abs() < 1e-12);
    }

    #[test]
    fn limit_constants_at_one() {
        let lc = limit_constants(1.0).unwrap();
        let ash = 1f64.asinh();
        assert!((lc.lambda_nu - ash / 2.0).abs() < 1e-15);
        assert!((lc.delta_nu - (2f64.sqrt() / 4.0 - ash / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn w_stat_edges() {
        for nu in [0.01, 1.0, 50.0] {
            assert!((w_stat(nu, &pt(0.0, 1.0)).unwrap() - 0.25).abs() < 1e-15);
        }
        let p = pt(0.9, 0.3);
        assert!((w_stat(1e-7, &p).unwrap() - 0.3 / 4.0).abs() < 1e-7);
        assert!(w_stat(-1.0, &p).is_err());
    }

    #[test]
    fn reference_point_violates_w_stat() {
        let p = pt(0.98, 0.272);
        let nu = violation_nu(&p).unwrap();
        assert!((nu - (0.98f64 / 0.728).sinh()).abs() < 1e-15);
        assert!(w_stat(nu, &p).unwrap() < 0.0);
    }

    #[test]
    fn violation_nu_is_stationary() {
        let p = pt(0.98, 0.272);
        let nu = violation_nu(&p).unwrap();
        let h = 1e-5 * nu;
        let d = (w_stat(nu + h, &p).unwrap() - w_stat(nu - h, &p).unwrap()) / (2.0 * h);
        assert!(d.abs() <= 1e-6, "derivative {d}");
        let small = violation_nu(&pt(1e-9, 0.5)).unwrap();
        assert!(small > 0.0 && small < 1e-8);
    }

    #[test]
    fn critical_zeta_examples() {
        assert!((critical_zeta(Settings::Finite(2), 0.6).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(critical_zeta(Settings::Infinite, 0.0).unwrap(), 0.0);
        let near_one = critical_zeta(Settings::Infinite, 1.0 - 1e-15).unwrap();
        assert!(near_one > 0.94);
        assert!(critical_zeta(Settings::Infinite, 1.0).is_err());
        assert!(critical_zeta(Settings::Infinite, -0.1).is_err());
        assert!(critical_zeta(Settings::Finite(3), 0.5).is_err());
    }

    #[test]
    fn gap_form_matches_direct_form() {
        for c in [0.3, 0.7, 0.98, 0.9999] {
            let a = z_infinity(c);
            let b = critical_zeta_inf_from_gap(1.0 - c);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_cb_reflects_angles() {
        let p = pt(0.8, 0.2);
        let q = pt(-0.8, 0.2);
        let a = optimal_witness(4, &p).unwrap();
        let b = optimal_witness(4, &q).unwrap();
        assert!((a.value - b.value).abs() < 1e-15);
        let (ta, tb) = (a.angles.unwrap(), b.angles.unwrap());
        for (x, y) in ta.thetas.iter().zip(&tb.thetas) {
            assert_eq!(*x, -*y);
        }
        let w = witness_value(4, &tb, &q).unwrap();
        assert!((w - b.value).abs() < 1e-12);
    }

    #[test]
    fn settings_parse() {
        assert_eq!("inf".parse::<Settings>().unwrap(), Settings::Infinite);
        assert_eq!("4".parse::<Settings>().unwrap(), Settings::Finite(4));
        assert!("x".parse::<Settings>().is_err());
    }
}
