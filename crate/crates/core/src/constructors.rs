//! Complement candidates: greedy covers of `[1, N]`, the quadratic model
//! `w_n ≈ c·n²`, and greedy repair of an arbitrary candidate.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sequences::{coverage_mask, mark_from, ComplementCandidate};

/// `π²/16`, the leading coefficient for which `S + {c·n²}` has average
/// representation count tending to one.
pub const GREEN_COEFFICIENT: f64 = PI * PI / 16.0;

/// Which square the greedy rule subtracts from an uncovered `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreedyStrategy {
    /// `w = n − ⌊√n⌋²`, the smallest admissible new element.
    LargestSquare,
    /// `w = n − 1`.
    UnitSquare,
}

impl FromStr for GreedyStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "largest_square" | "largest-square" => Ok(Self::LargestSquare),
            "unit_square" | "unit-square" => Ok(Self::UnitSquare),
            other => Err(Error::InvalidArgument(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Ceil,
    Floor,
    Nearest,
}

impl FromStr for Rounding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ceil" => Ok(Self::Ceil),
            "floor" => Ok(Self::Floor),
            "nearest" => Ok(Self::Nearest),
            other => Err(Error::InvalidArgument(format!("unknown rounding {other:?}"))),
        }
    }
}

fn greedy_fill(
    covered: &mut [bool],
    limit: u64,
    strategy: GreedyStrategy,
    added: &mut Vec<u64>,
) -> Result<()> {
    for n in 1..=limit {
        if covered[n as usize] {
            continue;
        }
        let square = match strategy {
            GreedyStrategy::LargestSquare => {
                let r = n.isqrt();
                r * r
            }
            GreedyStrategy::UnitSquare => 1,
        };
        let w = n - square;
        mark_from(covered, w, limit)?;
        added.push(w);
    }
    Ok(())
}

/// Scans `n = 1..=N` and, for each `n` not yet representable as `k² + w`,
/// inserts `w = n − s` for the square `s` chosen by `strategy`.
pub fn greedy_complement(limit: u64, strategy: GreedyStrategy) -> Result<ComplementCandidate> {
    if limit < 1 {
        return Err(Error::InvalidArgument("greedy limit must be >= 1".into()));
    }
    let mut covered = coverage_mask(&ComplementCandidate::empty(""), limit)?;
    let mut added = Vec::new();
    greedy_fill(&mut covered, limit, strategy, &mut added)?;
    let label = match strategy {
        GreedyStrategy::LargestSquare => format!("greedy largest_square N={limit}"),
        GreedyStrategy::UnitSquare => format!("greedy unit_square N={limit}"),
    };
    Ok(ComplementCandidate::from_unsorted(added, label))
}

/// `{round(c·n²) : 1 ≤ n ≤ n_max}`, deduplicated.
pub fn quadratic_model(n_max: u64, c: f64, rounding: Rounding) -> Result<ComplementCandidate> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument(format!("coefficient must be positive, got {c}")));
    }
    // 2^64 as f64; anything at or above it does not fit in u64
    const U64_BOUND: f64 = 18_446_744_073_709_551_616.0;
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let nf = n as f64;
        let v = c * nf * nf;
        let r = match rounding {
            Rounding::Ceil => v.ceil(),
            Rounding::Floor => v.floor(),
            Rounding::Nearest => v.round(),
        };
        if !(r.is_finite() && r < U64_BOUND) {
            return Err(Error::Overflow("c * n^2"));
        }
        out.push(r as u64);
    }
    let label = format!("quadratic c={c} n_max={n_max} {rounding:?}").to_lowercase();
    Ok(ComplementCandidate::from_unsorted(out, label))
}

/// Adds greedy (largest-square) fixes for every uncovered `n ∈ [1, N]`.
pub fn repair_to_complement(w: &ComplementCandidate, limit: u64) -> Result<ComplementCandidate> {
    if limit < 1 {
        return Err(Error::InvalidArgument("repair limit must be >= 1".into()));
    }
    let mut covered = coverage_mask(w, limit)?;
    let mut added = Vec::new();
    greedy_fill(&mut covered, limit, GreedyStrategy::LargestSquare, &mut added)?;
    if added.is_empty() {
        return Ok(w.clone());
    }
    added.extend_from_slice(w.elements());
    let label = format!("{} repaired N={limit}", w.label());
    Ok(ComplementCandidate::from_unsorted(added, label))
}
