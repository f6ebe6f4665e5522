//! Numerical checks of the circle-sum estimates and of the gap functional
//! `g_n = (π²/16·n² − w_n)/n`.
//!
//! For a perfect square `N`, first-order Euler–Maclaurin applied to
//! `f(t) = √(N − t²)` on `[0, √N]` gives
//!
//! `Σ_{1 ≤ m ≤ √N} √(N − m²) = (π/4)N − √N/2 − Σ_{k=0}^{√N−1} I_k`,
//! `I_k = ∫_k^{k+1} t({t} − 1/2)/√(N − t²) dt`,
//!
//! and each `I_k ≥ 0`, hence the circle sum is at most `(π/4)N − √N/2`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::constructors::GREEN_COEFFICIENT;
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::report::{csv_string, fmt_f64};
use crate::sequences::{counting_function, ComplementCandidate};

/// Absolute tolerance requested from each `I_k` quadrature.
pub const INTEGRAL_TOLERANCE: f64 = 1e-12;

/// `π/4`, the earlier lower bound for the limsup of the gap functional.
pub const DING_CONSTANT: f64 = PI / 4.0;

/// `π/4 + c·π²/8`.
pub fn theorem2_constant(c: f64) -> f64 {
    PI / 4.0 + c * PI * PI / 8.0
}

fn exact_sqrt(n: u64) -> Result<u64> {
    let r = n.isqrt();
    if r * r == n {
        Ok(r)
    } else {
        Err(Error::NotSquare(n))
    }
}

/// `Σ_{1 ≤ m ≤ √N} √(N − m²)` in double-double arithmetic.
pub fn circle_sum_dd(n: u64) -> TwoFloat {
    let mut acc = TwoFloat::from(0.0);
    for m in 1..=n.isqrt() {
        acc += TwoFloat::from(n - m * m).sqrt();
    }
    acc
}

pub fn circle_sum(n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("circle sum needs N >= 1".into()));
    }
    Ok(f64::from(circle_sum_dd(n)))
}

/// `(π/4)N − √N/2 − circle_sum(N)`, evaluated without leaving
/// double-double precision.
fn em_gap_dd(n: u64) -> TwoFloat {
    let nn = TwoFloat::from(n);
    twofloat::consts::FRAC_PI_4 * nn - nn.sqrt() / 2.0 - circle_sum_dd(n)
}

/// Distance of the circle sum below `(π/4)N − √N/2`; nonnegative for
/// every square `N`.
pub fn em_bound_margin(n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    exact_sqrt(n)?;
    Ok(f64::from(em_gap_dd(n)))
}

/// The same quantity for arbitrary `N`. Experimental: the sign is only
/// established for squares.
pub fn em_bound_margin_relaxed(n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    Ok(f64::from(em_gap_dd(n)))
}

/// `I_k = ∫_k^{k+1} t({t} − 1/2)/√(N − t²) dt` for square `N`.
///
/// Interior intervals are integrated directly. On the last interval the
/// integrand blows up like `(N − t²)^{-1/2}` at `t = √N`; the substitution
/// `t = √N·sin θ` turns it into the smooth
/// `√N sin θ (√N sin θ − k − 1/2)` on `[asin(k/√N), π/2]`.
pub fn fractional_integral(k: u64, n: u64) -> Result<f64> {
    let root = exact_sqrt(n)?;
    if root == 0 || k > root - 1 {
        return Err(Error::Domain(format!(
            "k = {k} outside [0, {}] for N = {n}",
            root.saturating_sub(1)
        )));
    }
    let kf = k as f64;
    let nf = n as f64;
    let r = root as f64;
    let result = if k + 1 == root {
        let theta0 = (kf / r).asin();
        adaptive_simpson(
            |theta| {
                let t = r * theta.sin();
                t * (t - kf - 0.5)
            },
            theta0,
            PI / 2.0,
            INTEGRAL_TOLERANCE,
        )
    } else {
        adaptive_simpson(
            |t| t * (t - kf - 0.5) / (nf - t * t).sqrt(),
            kf,
            kf + 1.0,
            INTEGRAL_TOLERANCE,
        )
    };
    Ok(result.value)
}

/// All `I_k` for `k = 0..√N`, in order.
pub fn fractional_integrals(n: u64) -> Result<Vec<f64>> {
    let root = exact_sqrt(n)?;
    (0..root)
        .into_par_iter()
        .map(|k| fractional_integral(k, n))
        .collect()
}

/// `|circle_sum(N) − ((π/4)N − √N/2 − Σ_k I_k)|`.
pub fn em_identity_residual(n: u64) -> Result<f64> {
    let integrals = fractional_integrals(n)?;
    Ok(residual_from(n, &integrals))
}

fn residual_from(n: u64, integrals: &[f64]) -> f64 {
    let sum: f64 = integrals.iter().sum();
    let nn = TwoFloat::from(n);
    let rhs = twofloat::consts::FRAC_PI_4 * nn - nn.sqrt() / 2.0 - sum;
    f64::from(circle_sum_dd(n) - rhs).abs()
}

/// One line of the Euler–Maclaurin table for a square `N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmRow {
    pub n: u64,
    pub circle_sum: f64,
    pub margin: f64,
    /// Present when the quadratures were run for this `N`.
    pub residual: Option<f64>,
    /// Smallest `I_k` seen, when computed.
    pub min_integral: Option<f64>,
}

/// Rows for every square `N ≤ max_n`; quadrature-based columns only for
/// `N ≤ residual_max_n`.
pub fn em_table(max_n: u64, residual_max_n: u64) -> Result<Vec<EmRow>> {
    (1..=max_n.isqrt())
        .into_par_iter()
        .map(|m| {
            let n = m * m;
            let circle = circle_sum(n)?;
            let margin = em_bound_margin(n)?;
            let (residual, min_integral) = if n <= residual_max_n {
                let integrals = fractional_integrals(n)?;
                let min = integrals.iter().copied().fold(f64::INFINITY, f64::min);
                (Some(residual_from(n, &integrals)), Some(min))
            } else {
                (None, None)
            };
            Ok(EmRow {
                n,
                circle_sum: circle,
                margin,
                residual,
                min_integral,
            })
        })
        .collect()
}

pub fn em_table_csv(rows: &[EmRow]) -> Result<String> {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    csv_string(
        &["N", "circle_sum", "margin", "residual"],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.circle_sum),
                fmt_f64(r.margin),
                opt(r.residual),
            ]
        }),
    )
}

/// Long format `series,x,y` for plotting.
pub fn em_table_long_csv(rows: &[EmRow]) -> Result<String> {
    let mut out = Vec::new();
    for r in rows {
        out.push(vec!["circle_sum".into(), r.n.to_string(), fmt_f64(r.circle_sum)]);
        out.push(vec!["margin".into(), r.n.to_string(), fmt_f64(r.margin)]);
        if let Some(res) = r.residual {
            out.push(vec!["residual".into(), r.n.to_string(), fmt_f64(res)]);
        }
    }
    csv_string(&["series", "x", "y"], out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapStatistics {
    pub n_max: usize,
    /// `values[n − 1] = g_n`.
    pub values: Vec<f64>,
    /// `running_max[n − 1] = max(g_1, …, g_n)`.
    pub running_max: Vec<f64>,
}

impl GapStatistics {
    /// First `n` with `running_max ≥ threshold`.
    pub fn first_reaching(&self, threshold: f64) -> Option<usize> {
        self.running_max.iter().position(|&g| g >= threshold).map(|i| i + 1)
    }

    pub fn max(&self) -> Option<f64> {
        self.running_max.last().copied()
    }

    pub fn to_csv(&self) -> Result<String> {
        csv_string(
            &["n", "g_n", "running_max"],
            self.values
                .iter()
                .zip(&self.running_max)
                .enumerate()
                .map(|(i, (g, m))| vec![(i + 1).to_string(), fmt_f64(*g), fmt_f64(*m)]),
        )
    }

    /// Long format with the two reference lines.
    pub fn to_long_csv(&self) -> Result<String> {
        let reference = theorem2_constant(0.193);
        let mut rows = Vec::with_capacity(self.n_max * 4);
        for (i, (g, m)) in self.values.iter().zip(&self.running_max).enumerate() {
            let x = (i + 1).to_string();
            rows.push(vec!["g_n".into(), x.clone(), fmt_f64(*g)]);
            rows.push(vec!["running_max".into(), x.clone(), fmt_f64(*m)]);
            rows.push(vec!["pi_over_4".into(), x.clone(), fmt_f64(DING_CONSTANT)]);
            rows.push(vec!["theorem2".into(), x, fmt_f64(reference)]);
        }
        csv_string(&["series", "x", "y"], rows)
    }
}

pub fn gap_statistics(w: &ComplementCandidate, n_max: usize) -> Result<GapStatistics> {
    if w.len() < n_max {
        return Err(Error::InsufficientElements {
            needed: n_max,
            available: w.len(),
        });
    }
    let values: Vec<f64> = w.elements()[..n_max]
        .iter()
        .enumerate()
        .map(|(i, &wn)| {
            let n = (i + 1) as f64;
            (GREEN_COEFFICIENT * n * n - wn as f64) / n
        })
        .collect();
    let mut running_max = Vec::with_capacity(n_max);
    let mut best = f64::NEG_INFINITY;
    for &g in &values {
        best = best.max(g);
        running_max.push(best);
    }
    Ok(GapStatistics {
        n_max,
        values,
        running_max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CountBoundCheck {
    /// `w_n ≥ (π²/16)(n − 8γ/π² + 4σ/π²)²` for every `n` with `w_n ≤ x`.
    pub hypothesis_holds_up_to_x: bool,
    /// `W(x) ≤ (4/π)√x + 8γ/π² − 4σ/π²`.
    pub bound_holds: bool,
    pub count: u64,
    pub bound: f64,
}

impl CountBoundCheck {
    /// The implication hypothesis ⇒ bound.
    pub fn implication_holds(&self) -> bool {
        !self.hypothesis_holds_up_to_x || self.bound_holds
    }
}

/// Tolerance on the counting bound, absorbing rounding in `√x`.
const BOUND_TOLERANCE: f64 = 1e-9;

pub fn conditional_count_bound_check(
    w: &ComplementCandidate,
    gamma: f64,
    sigma: f64,
    x: u64,
) -> Result<CountBoundCheck> {
    if !(sigma > 0.0 && gamma > sigma && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need gamma > sigma > 0, got gamma={gamma}, sigma={sigma}"
        )));
    }
    if x < 1 {
        return Err(Error::InvalidArgument("x must be >= 1".into()));
    }
    let pi2 = PI * PI;
    let shift = 8.0 * gamma / pi2 - 4.0 * sigma / pi2;
    let count = counting_function(w, x);
    let hypothesis = w.elements()[..count as usize]
        .iter()
        .enumerate()
        .all(|(i, &wn)| {
            let d = (i + 1) as f64 - shift;
            wn as f64 >= GREEN_COEFFICIENT * d * d
        });
    let bound = 4.0 / PI * (x as f64).sqrt() + shift;
    Ok(CountBoundCheck {
        hypothesis_holds_up_to_x: hypothesis,
        bound_holds: count as f64 <= bound + BOUND_TOLERANCE,
        count,
        bound,
    })
}
