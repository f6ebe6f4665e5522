//! Maximizing `f(δ, δ₀) = (4/π)√δ₀ − 8δ` over the feasibility system
//! `δ² + δ₀ ≤ 1`, `δ₀²/(16δ²) + δ₀ < 1`.
//!
//! The search is a uniform grid on `(0, 1)²` followed by rounds of local
//! grid refinement around the incumbent. Candidates are ranked by objective,
//! then by smaller `δ₀`, then by smaller `δ`, which makes the parallel
//! reduction independent of scheduling.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::counting::FOUR_OVER_PI;
use crate::error::{Error, Result};
use crate::lemma::{constraint_values, STRICT_SLACK};
use crate::report::{csv_string, fmt_f64};

/// The admissible pair reported alongside the bound `0.19302`.
pub const REFERENCE_POINT: (f64, f64) = (0.022, 0.084);

/// The value any reported optimum has to reach.
pub const TARGET_OBJECTIVE: f64 = 0.19302;

/// Distance from a constraint's limit that still counts as tight.
pub const ACTIVE_TOLERANCE: f64 = 1e-3;

const LOCAL_HALF_WIDTH: i32 = 10;
const MAX_LOCAL_MOVES: usize = 10_000;

pub fn objective(delta: f64, delta0: f64) -> f64 {
    FOUR_OVER_PI * delta0.sqrt() - 8.0 * delta
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ActiveConstraints {
    pub first: bool,
    pub second: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub delta: f64,
    pub delta0: f64,
    pub objective: f64,
    pub feasible: bool,
    /// `δ² + δ₀`.
    pub constraint1: f64,
    /// `δ₀²/(16δ²) + δ₀`.
    pub constraint2: f64,
    pub boundary_active: ActiveConstraints,
}

impl OptimizationResult {
    /// Evaluates an arbitrary point.
    pub fn evaluate(delta: f64, delta0: f64) -> Result<Self> {
        let c = constraint_values(delta, delta0)?;
        Ok(Self {
            delta,
            delta0,
            objective: objective(delta, delta0),
            feasible: c.satisfied(),
            constraint1: c.first,
            constraint2: c.second,
            boundary_active: ActiveConstraints {
                first: (1.0 - c.first).abs() <= ACTIVE_TOLERANCE,
                second: (1.0 - STRICT_SLACK - c.second).abs() <= ACTIVE_TOLERANCE,
            },
        })
    }

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            fmt_f64(self.delta),
            fmt_f64(self.delta0),
            fmt_f64(self.objective),
            fmt_f64(self.constraint1),
            fmt_f64(self.constraint2),
        ]
    }
}

pub fn results_csv(rows: &[OptimizationResult]) -> Result<String> {
    csv_string(
        &["delta", "delta0", "objective", "constraint1", "constraint2"],
        rows.iter().map(OptimizationResult::csv_row),
    )
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    delta: f64,
    delta0: f64,
    value: f64,
}

/// `Greater` means `a` is the better candidate.
fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then_with(|| b.delta0.total_cmp(&a.delta0))
        .then_with(|| b.delta.total_cmp(&a.delta))
}

fn better(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if rank(&x, &y) == Ordering::Less { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn candidate(delta: f64, delta0: f64) -> Option<Candidate> {
    if !(delta > 0.0 && delta < 1.0 && delta0 > 0.0 && delta0 < 1.0) {
        return None;
    }
    let feasible = constraint_values(delta, delta0).map(|c| c.satisfied()).unwrap_or(false);
    feasible.then(|| Candidate {
        delta,
        delta0,
        value: objective(delta, delta0),
    })
}

fn local_search(center: Candidate, step: f64) -> Candidate {
    let span = -LOCAL_HALF_WIDTH..=LOCAL_HALF_WIDTH;
    span.clone()
        .into_par_iter()
        .map(|a| {
            let delta0 = center.delta0 + a as f64 * step;
            span.clone()
                .map(|b| candidate(center.delta + b as f64 * step, delta0))
                .fold(None, better)
        })
        .reduce(|| None, better)
        .map_or(center, |c| better(Some(center), Some(c)).unwrap())
}

/// Grid search with `grid_steps` points per axis, then `refine_rounds`
/// rounds that each repeat a local search until it stops moving and then
/// shrink the step tenfold.
pub fn optimize_constants(grid_steps: u32, refine_rounds: u32) -> Result<OptimizationResult> {
    if grid_steps < 100 {
        return Err(Error::InvalidArgument("grid_steps must be >= 100".into()));
    }
    let g = grid_steps as f64;
    let coarse = (1..grid_steps)
        .into_par_iter()
        .map(|j| {
            let delta0 = j as f64 / g;
            (1..grid_steps)
                .map(|i| candidate(i as f64 / g, delta0))
                .fold(None, better)
        })
        .reduce(|| None, better)
        .ok_or_else(|| Error::Domain("no feasible grid point".into()))?;

    let mut best = coarse;
    let mut step = 1.0 / g;
    for _ in 0..refine_rounds {
        step /= LOCAL_HALF_WIDTH as f64;
        for _ in 0..MAX_LOCAL_MOVES {
            let next = local_search(best, step);
            if next.delta == best.delta && next.delta0 == best.delta0 {
                break;
            }
            best = next;
        }
    }
    OptimizationResult::evaluate(best.delta, best.delta0)
}

/// Same search with `δ₀` pinned: a 1-D grid over `δ` plus refinement.
pub fn optimize_fixed_delta0(
    delta0: f64,
    grid_steps: u32,
    refine_rounds: u32,
) -> Result<OptimizationResult> {
    if grid_steps < 100 {
        return Err(Error::InvalidArgument("grid_steps must be >= 100".into()));
    }
    let g = grid_steps as f64;
    let mut best = (1..grid_steps)
        .map(|i| candidate(i as f64 / g, delta0))
        .fold(None, better)
        .ok_or_else(|| Error::Domain(format!("no feasible delta for delta0={delta0}")))?;
    let mut step = 1.0 / g;
    for _ in 0..refine_rounds {
        step /= LOCAL_HALF_WIDTH as f64;
        loop {
            let next = (-LOCAL_HALF_WIDTH..=LOCAL_HALF_WIDTH)
                .map(|b| candidate(best.delta + b as f64 * step, delta0))
                .fold(Some(best), better)
                .unwrap();
            if next.delta == best.delta {
                break;
            }
            best = next;
        }
    }
    OptimizationResult::evaluate(best.delta, best.delta0)
}

/// Optimum along the binding constraint: for each `δ₀` the smallest
/// admissible `δ` is `δ₀ / (4√(1 − STRICT_SLACK − δ₀))`, and the reduced
/// objective is maximized over `δ₀` by golden-section search.
pub fn boundary_optimum() -> Result<OptimizationResult> {
    let delta_for = |d0: f64| {
        let mut delta = d0 / (4.0 * (1.0 - STRICT_SLACK - d0).sqrt());
        while !constraint_values(delta, d0).map(|c| c.satisfied()).unwrap_or(false) {
            delta = delta.next_up();
        }
        delta
    };
    let reduced = |d0: f64| objective(delta_for(d0), d0);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1e-6, 0.5);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (reduced(x1), reduced(x2));
    while hi - lo > 1e-13 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = reduced(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = reduced(x1);
        }
    }
    let d0 = 0.5 * (lo + hi);
    OptimizationResult::evaluate(delta_for(d0), d0)
}

/// Evaluation of the published admissible pair.
pub fn reference_point() -> OptimizationResult {
    OptimizationResult::evaluate(REFERENCE_POINT.0, REFERENCE_POINT.1).expect("positive parameters")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lemma::check_constraints;

    #[test]
    fn objective_examples() {
        // 4/pi * sqrt(0.084) - 0.176, 30-digit reference
        let v = objective(0.022, 0.084);
        assert!((v - 0.193_019_878_618_079_3).abs() < 1e-15);
        assert_eq!(objective(0.0, 0.0), 0.0);
        assert_eq!(objective(0.3, 0.0), -2.4);
    }

    #[test]
    fn reference_point_is_feasible_and_inactive() {
        let p = reference_point();
        assert!(p.feasible);
        assert!(!p.boundary_active.first && !p.boundary_active.second);
    }

    #[test]
    fn optimizer_reaches_target() {
        let r = optimize_constants(400, 3).unwrap();
        assert!(r.feasible);
        assert!(check_constraints(r.delta, r.delta0).unwrap());
        assert!(r.objective >= TARGET_OBJECTIVE);
        assert!(r.boundary_active.second);
        assert!(!r.boundary_active.first);
        assert!((objective(r.delta, r.delta0) - r.objective).abs() < 1e-12);
    }

    #[test]
    fn boundary_optimum_matches_grid() {
        let b = boundary_optimum().unwrap();
        let g = optimize_constants(1000, 4).unwrap();
        assert!(b.feasible);
        assert!(b.objective >= g.objective - 1e-9);
        assert!((b.delta0 - g.delta0).abs() < 1e-3);
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(optimize_constants(99, 1).is_err());
    }

    #[test]
    fn tie_break_prefers_small_delta0() {
        let a = Candidate { delta: 0.1, delta0: 0.2, value: 1.0 };
        let b = Candidate { delta: 0.05, delta0: 0.3, value: 1.0 };
        let best = better(Some(b), Some(a)).unwrap();
        assert_eq!(best.delta0, 0.2);
        let c = Candidate { delta: 0.05, delta0: 0.2, value: 1.0 };
        assert_eq!(better(Some(a), Some(c)).unwrap().delta, 0.05);
    }

    #[test]
    fn csv_layout() {
        let s = results_csv(&[reference_point()]).unwrap();
        assert!(s.starts_with("delta,delta0,objective,constraint1,constraint2\n0.022,0.084,0.193019878618,"));
    }
}
