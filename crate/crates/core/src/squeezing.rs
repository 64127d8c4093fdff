//! How much squeezing an `N`-spin state needs before the `m → ∞` witness can
//! be violated.
//!
//! Spin states obey `ζ_a² ≥ 1 − (N/2)[√((1−C_b²)((1+2/N)² − C_b²)) + C_b² − 1]`.
//! This is the corrected form of the constraint; the expression in the
//! original reference contains an error. Intersecting it with `Z_∞(C_b)`
//! gives the largest `ζ_a²` that still admits a violation, `Z*_N`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::bounds::optimize_nu;
use crate::error::{BellError, Result};
use crate::numeric::bisect;
use crate::witness::{critical_zeta, critical_zeta_inf_from_gap, Settings, WitnessPoint};

const GAP_SCAN_MIN: f64 = 1e-300;
const GAP_SCAN_MAX: f64 = 0.999;
const GAP_SCAN_POINTS: usize = 4000;
const BRANCH_TOL: f64 = 4.0 * f64::EPSILON;

/// Least `ζ_a²` reachable by `N` spins with collective spin `C_b`, written in
/// terms of `u = 1 − C_b²` as `1 − (2 + 2/N)√u/(√(u+a) + √u)`,
/// `a = 4/N + 4/N²`, which avoids the cancellation in the bracket.
fn spin_constraint_u(n: u64, u: f64) -> f64 {
    let nf = n as f64;
    let a = 4.0 / nf + 4.0 / (nf * nf);
    let su = u.sqrt();
    1.0 - (2.0 + 2.0 / nf) * su / ((u + a).sqrt() + su)
}

pub fn min_zeta_spin_constraint(n: u64, c_b: f64) -> Result<f64> {
    if n < 1 {
        return Err(BellError::domain("n", n as f64, "[1, inf)"));
    }
    if !(0.0..=1.0).contains(&c_b) {
        return Err(BellError::domain("c_b", c_b, "[0, 1]"));
    }
    Ok(spin_constraint_u(n, (1.0 - c_b) * (1.0 + c_b)))
}

/// [`min_zeta_spin_constraint`] at `C_b = 1 − gap`, resolving gaps far below
/// the spacing of doubles near 1.
pub fn min_zeta_spin_constraint_from_gap(n: u64, gap: f64) -> Result<f64> {
    if n < 1 {
        return Err(BellError::domain("n", n as f64, "[1, inf)"));
    }
    if !(0.0..=1.0).contains(&gap) {
        return Err(BellError::domain("gap", gap, "[0, 1]"));
    }
    Ok(spin_constraint_u(n, gap * (2.0 - gap)))
}

/// Intersection of the spin constraint with `Z_∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingBound {
    pub n_spins: u64,
    /// Largest `C_b` admitting a violation.
    pub c_b_star: f64,
    /// `1 − c_b_star`, kept separately because it can be tiny.
    pub c_b_gap: f64,
    /// `Z*_N = Z_∞(c_b_star)`.
    pub zeta2_star: f64,
}

/// Spin constraint minus `Z_∞`, as a function of the gap `1 − C_b`.
/// Positive where no spin state violates the witness.
pub fn violation_margin_from_gap(n: u64, gap: f64) -> Result<f64> {
    Ok(min_zeta_spin_constraint_from_gap(n, gap)? - critical_zeta_inf_from_gap(gap))
}

/// Number of sign changes of [`violation_margin_from_gap`] on a log grid of
/// gaps in `[1e−300, 0.999]`.
pub fn margin_sign_changes(n: u64, points: usize) -> Result<usize> {
    let grid = gap_grid(points);
    let mut prev: Option<f64> = None;
    let mut changes = 0;
    for g in grid {
        let v = violation_margin_from_gap(n, g)?;
        if v == 0.0 {
            continue;
        }
        if let Some(p) = prev {
            if p.signum() != v.signum() {
                changes += 1;
            }
        }
        prev = Some(v);
    }
    Ok(changes)
}

fn gap_grid(points: usize) -> Vec<f64> {
    let (lo, hi) = (GAP_SCAN_MIN.ln(), GAP_SCAN_MAX.ln());
    (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

pub fn max_violation_point(n: u64) -> Result<SqueezingBound> {
    if n < 2 {
        return Err(BellError::domain("n", n as f64, "[2, inf)"));
    }
    let margin = |g: f64| violation_margin_from_gap(n, g).unwrap_or(f64::NAN);
    let grid = gap_grid(GAP_SCAN_POINTS);
    let mut prev = (grid[0], margin(grid[0]));
    for &g in &grid[1..] {
        let v = margin(g);
        if prev.1 > 0.0 && v <= 0.0 {
            let gap = bisect(margin, prev.0, g, 1e-15)?;
            return Ok(SqueezingBound {
                n_spins: n,
                c_b_star: 1.0 - gap,
                c_b_gap: gap,
                zeta2_star: critical_zeta_inf_from_gap(gap),
            });
        }
        prev = (g, v);
    }
    Err(BellError::Infeasible(format!(
        "spin constraint never drops below Z_inf for N={n}"
    )))
}

/// Lower branch `W_{−1}(x)` of the Lambert function on `[−1/e, 0)`.
pub fn lambert_w_lower(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(BellError::domain("x", x, "[-1/e, 0)"));
    }
    let ex1 = x.mul_add(E, 1.0);
    // −1/e itself is not representable; anything within rounding of it is
    // the branch point.
    if ex1 < -BRANCH_TOL {
        return Err(BellError::domain("x", x, "[-1/e, 0)"));
    }
    if ex1 <= BRANCH_TOL {
        return Ok(-1.0);
    }
    let p = -(2.0 * ex1).sqrt();
    let mut w = if p > -0.5 {
        // branch-point series
        let p2 = p * p;
        -1.0 + p - p2 / 3.0 + 11.0 / 72.0 * p2 * p - 43.0 / 540.0 * p2 * p2
            + 769.0 / 17280.0 * p2 * p2 * p
            - 221.0 / 8505.0 * p2 * p2 * p2
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    if p > -1e-3 {
        // Series error is far below f64 resolution; Halley would divide by ~0.
        return Ok(w);
    }
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let fp = ew * (w + 1.0);
        let step = f / (fp - (w + 2.0) * f / (2.0 * (w + 1.0)));
        w -= step;
        if step.abs() <= 1e-15 * w.abs() {
            break;
        }
    }
    Ok(w)
}

/// `ω = W_{−1}(−1/(2√(N+1)))`.
pub fn asymptotic_omega(n: u64) -> Result<f64> {
    if n < 1 {
        return Err(BellError::domain("n", n as f64, "[1, inf)"));
    }
    lambert_w_lower(-0.5 / (n as f64 + 1.0).sqrt())
}

/// Large-`N` expansion of `Z*_N` through `ω⁻⁴`:
/// `1 + 1/ω + 1/(2ω³) − 3/(4ω⁴)`.
///
/// The signs are fixed by expanding `Z_∞` at the root; with `ω < −1` every
/// term then moves the value below 1 as it must.
pub fn z_star_asymptotic(n: u64) -> Result<f64> {
    let w = asymptotic_omega(n)?;
    let w3 = w * w * w;
    Ok(1.0 + 1.0 / w + 0.5 / w3 - 0.75 / (w3 * w))
}

/// Largest `ζ_a²` at which the `ν`-optimised Bernstein run count at
/// `(c_b, ζ_a²)` fits within `m_budget`.
pub fn min_zeta_finite_runs(n: u64, c_b: f64, epsilon: f64, m_budget: u64) -> Result<f64> {
    if !(c_b > 0.0 && c_b < 1.0) {
        return Err(BellError::domain("c_b", c_b, "(0, 1)"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(BellError::domain("epsilon", epsilon, "(0, 1)"));
    }
    if m_budget < 1 {
        return Err(BellError::domain("m_budget", m_budget as f64, "[1, inf)"));
    }
    let budget = m_budget as f64;
    let log_excess = |z: f64| -> f64 {
        let point = WitnessPoint { c_b, zeta2: z };
        match optimize_nu(&point, n, epsilon) {
            Ok(opt) => opt.runs_real.ln() - budget.ln(),
            Err(_) => f64::INFINITY,
        }
    };
    let at_zero = log_excess(0.0);
    if at_zero > 0.0 {
        return Err(BellError::Infeasible(format!(
            "even zeta2=0 needs more than {m_budget} runs at N={n}, C_b={c_b}"
        )));
    }
    let z_inf = critical_zeta(Settings::Infinite, c_b)?;
    bisect(log_excess, 0.0, z_inf, 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_endpoints() {
        for n in [1, 10, 1000] {
            assert!((min_zeta_spin_constraint(n, 1.0).unwrap() - 1.0).abs() < 1e-15);
            assert!(min_zeta_spin_constraint(n, 0.0).unwrap().abs() < 1e-15);
        }
        assert!(min_zeta_spin_constraint(10, 1.5).is_err());
        assert!(min_zeta_spin_constraint(10, -0.1).is_err());
    }

    #[test]
    fn constraint_matches_printed_form_in_the_bulk() {
        for n in [3u64, 50, 1000] {
            let nf = n as f64;
            for c in [0.1, 0.5, 0.9] {
                let c2: f64 = c * c;
                let a = 1.0 + 2.0 / nf;
                let printed = 1.0 - nf / 2.0 * (((1.0 - c2) * (a * a - c2)).sqrt() + c2 - 1.0);
                let v = min_zeta_spin_constraint(n, c).unwrap();
                assert!((v - printed).abs() < 1e-10, "{n} {c}: {v} vs {printed}");
            }
        }
    }

    #[test]
    fn constraint_nonincreasing_in_n() {
        for i in 1..100 {
            let c = i as f64 / 100.0;
            let mut prev = f64::INFINITY;
            for n in [2u64, 10, 100, 1000, 10_000] {
                let v = min_zeta_spin_constraint(n, c).unwrap();
                assert!(v <= prev + 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn lambert_branch_point_and_identity() {
        assert_eq!(lambert_w_lower(-1.0 / E).unwrap(), -1.0);
        let w = lambert_w_lower(-0.1).unwrap();
        assert!(w < -1.0);
        assert!((w * w.exp() + 0.1).abs() <= 1e-12 * 0.1);
        assert!(lambert_w_lower(0.0).is_err());
        assert!(lambert_w_lower(-0.5).is_err());
        let near = -1.0 / E + 1e-10;
        let w = lambert_w_lower(near).unwrap();
        assert!((w * w.exp() - near).abs() <= 1e-12 * near.abs());
    }

    #[test]
    fn asymptotic_is_below_one() {
        for n in [1u64, 10, 1000, 1_000_000, 1_000_000_000] {
            assert!(asymptotic_omega(n).unwrap() < -1.0);
            assert!(z_star_asymptotic(n).unwrap() < 1.0);
        }
    }

    #[test]
    fn max_violation_root_is_consistent() {
        let b = max_violation_point(1000).unwrap();
        assert!(b.c_b_star > 0.0 && b.c_b_star < 1.0);
        assert!(b.zeta2_star > 0.0 && b.zeta2_star < 1.0);
        let z_inf = critical_zeta(Settings::Infinite, b.c_b_star).unwrap();
        let spin = min_zeta_spin_constraint(1000, b.c_b_star).unwrap();
        assert!((z_inf - spin).abs() < 1e-10);
        assert!(max_violation_point(1).is_err());
    }

    #[test]
    fn finite_runs_respects_z_infinity() {
        let z = min_zeta_finite_runs(100, 0.9, 0.1, 100_000).unwrap();
        assert!(z >= 0.0 && z < critical_zeta(Settings::Infinite, 0.9).unwrap());
        assert!(matches!(
            min_zeta_finite_runs(1000, 0.98, 0.1, 10),
            Err(BellError::Infeasible(_))
        ));
    }
}
