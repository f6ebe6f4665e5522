//! Exact representation counts `R(n) = #{(k, w) : n = k² + w, k ≥ 1, w ∈ W}`,
//! their partial sums, and the comparison quantities built from them.
//!
//! The sieve walks each `w < N` over `w + k²` and is split over disjoint
//! blocks of `n`, so every worker owns its slice of the counts array and the
//! result does not depend on the number of threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{csv_string, fmt_f64};
use crate::sequences::{counting_function, ComplementCandidate};

/// Coefficient of `√N` in the lower bound for the excess of a complement.
pub const THEOREM1_CONSTANT: f64 = 0.193;

/// `4/π`, the best known value of `liminf W(N)/√N` over complements.
pub const FOUR_OVER_PI: f64 = 4.0 / std::f64::consts::PI;

/// Largest `N` for which a full counts array is materialized.
pub const MAX_MATERIALIZED: u64 = 1 << 30;

/// Default block length for the streamed summary.
pub const DEFAULT_BLOCK: u64 = 1 << 24;

const PARALLEL_BLOCK: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationProfile {
    pub limit: u64,
    /// `counts[n] = R(n)` for `0 ≤ n ≤ limit`.
    pub counts: Vec<u32>,
    pub total: u64,
    pub excess: i64,
}

/// Smallest `k ≥ 1` with `k² ≥ d`.
fn ceil_sqrt_at_least_one(d: u64) -> u64 {
    if d <= 1 {
        return 1;
    }
    let r = d.isqrt();
    if r * r == d {
        r
    } else {
        r + 1
    }
}

/// Adds the contribution of every `w < hi` to `counts`, which covers
/// `[lo, lo + counts.len())`.
fn fill_block(elements: &[u64], lo: u64, counts: &mut [u32]) -> Result<()> {
    let hi = lo + counts.len() as u64 - 1;
    for &w in elements {
        if w >= hi {
            break;
        }
        let k_lo = if w >= lo { 1 } else { ceil_sqrt_at_least_one(lo - w) };
        let k_hi = (hi - w).isqrt();
        for k in k_lo..=k_hi {
            let n = k
                .checked_mul(k)
                .and_then(|sq| sq.checked_add(w))
                .ok_or(Error::Overflow("w + k^2"))?;
            let slot = &mut counts[(n - lo) as usize];
            *slot = slot.checked_add(1).ok_or(Error::Overflow("R(n) counter"))?;
        }
    }
    Ok(())
}

impl RepresentationProfile {
    /// `Σ_{n ≤ m} R(n)` for any `m ≤ limit`.
    pub fn total_at(&self, m: u64) -> u64 {
        self.counts[..=m as usize].iter().map(|&c| c as u64).sum()
    }

    /// `Σ_{n ≤ m} R(n) − m`.
    pub fn excess_at(&self, m: u64) -> i64 {
        self.total_at(m) as i64 - m as i64
    }

    /// Prefix excess for every `m ∈ [0, limit]`.
    pub fn excess_series(&self) -> Vec<i64> {
        let mut acc: i64 = 0;
        self.counts
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                acc += c as i64;
                acc - m as i64
            })
            .collect()
    }

    /// `Σ_{n ≤ N, R(n) ≥ 1} (R(n) − 1)`.
    pub fn surplus(&self) -> u64 {
        self.counts
            .iter()
            .filter(|&&c| c >= 1)
            .map(|&c| (c - 1) as u64)
            .sum()
    }

    pub fn write_counts_csv(&self) -> Result<String> {
        csv_string(
            &["n", "count"],
            self.counts
                .iter()
                .enumerate()
                .map(|(n, c)| vec![n.to_string(), c.to_string()]),
        )
    }
}

/// Sieve for `R(n)` on `[0, N]`.
pub fn representation_profile(w: &ComplementCandidate, limit: u64) -> Result<RepresentationProfile> {
    if limit < 1 {
        return Err(Error::InvalidArgument("profile limit must be >= 1".into()));
    }
    if limit > MAX_MATERIALIZED {
        return Err(Error::ProfileTooLarge(limit));
    }
    let elements = w.below(limit);
    let mut counts = vec![0u32; limit as usize + 1];
    counts
        .par_chunks_mut(PARALLEL_BLOCK)
        .enumerate()
        .try_for_each(|(i, block)| fill_block(elements, (i * PARALLEL_BLOCK) as u64, block))?;
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    let excess = total as i64 - limit as i64;
    Ok(RepresentationProfile {
        limit,
        counts,
        total,
        excess,
    })
}

/// Aggregates of a profile computed block by block without keeping the
/// whole counts array.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileSummary {
    pub limit: u64,
    pub total: u64,
    pub excess: i64,
    /// `#{1 ≤ n ≤ N : R(n) ≥ 1}`.
    pub covered: u64,
    pub max_count: u32,
}

pub fn profile_summary(w: &ComplementCandidate, limit: u64, block: u64) -> Result<ProfileSummary> {
    if limit < 1 || block < 1 {
        return Err(Error::InvalidArgument("limit and block must be >= 1".into()));
    }
    let elements = w.below(limit);
    let n_blocks = (limit + 1).div_ceil(block);
    let parts: Vec<(u64, u64, u32)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| -> Result<(u64, u64, u32)> {
            let lo = b * block;
            let hi = (lo + block - 1).min(limit);
            let mut counts = vec![0u32; (hi - lo + 1) as usize];
            fill_block(elements, lo, &mut counts)?;
            let total = counts.iter().map(|&c| c as u64).sum();
            let covered = counts.iter().filter(|&&c| c > 0).count() as u64;
            let max = counts.iter().copied().max().unwrap_or(0);
            Ok((total, covered, max))
        })
        .collect::<Result<_>>()?;
    let total: u64 = parts.iter().map(|p| p.0).sum();
    Ok(ProfileSummary {
        limit,
        total,
        excess: total as i64 - limit as i64,
        covered: parts.iter().map(|p| p.1).sum(),
        max_count: parts.iter().map(|p| p.2).max().unwrap_or(0),
    })
}

/// The three routes to `Σ_{n ≤ N} R(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SumIdentity {
    pub via_profile: u64,
    pub via_counting_function: u64,
    pub via_elements: u64,
}

impl SumIdentity {
    pub fn agrees(&self) -> bool {
        self.via_profile == self.via_counting_function && self.via_profile == self.via_elements
    }
}

pub fn sum_identity(w: &ComplementCandidate, limit: u64) -> Result<SumIdentity> {
    let via_profile = representation_profile(w, limit)?.total;
    let via_counting_function = (1..=limit.isqrt())
        .map(|m| counting_function(w, limit - m * m))
        .sum();
    let via_elements = w.below(limit).iter().map(|&e| (limit - e).isqrt()).sum();
    Ok(SumIdentity {
        via_profile,
        via_counting_function,
        via_elements,
    })
}

/// `Σ R(n) = Σ_{m ≤ √N} W(N − m²) = Σ_{w < N} ⌊√(N − w)⌋`, exactly.
pub fn sum_identity_check(w: &ComplementCandidate, limit: u64) -> Result<bool> {
    Ok(sum_identity(w, limit)?.agrees())
}

/// `excess − 0.193·√N` for a precomputed excess.
pub fn margin_from_excess(excess: i64, limit: u64) -> f64 {
    excess as f64 - THEOREM1_CONSTANT * (limit as f64).sqrt()
}

pub fn theorem1_margin(w: &ComplementCandidate, limit: u64) -> Result<f64> {
    let profile = representation_profile(w, limit)?;
    Ok(margin_from_excess(profile.excess, limit))
}

/// `(1/(2 log 4))·m·log m` with `m = W(⌊2√N⌋)`; zero when `m ≤ 1`.
pub fn chen_fang_bound(w: &ComplementCandidate, limit: u64) -> f64 {
    let m = counting_function(w, (4 * limit).isqrt());
    chen_fang_value(m)
}

pub fn chen_fang_value(m: u64) -> f64 {
    if m <= 1 {
        return 0.0;
    }
    let m = m as f64;
    m * m.ln() / (2.0 * 4f64.ln())
}

/// `W(N)/√N`, to be read against `4/π`.
pub fn cilleruelo_ratio(w: &ComplementCandidate, limit: u64) -> f64 {
    counting_function(w, limit) as f64 / (limit as f64).sqrt()
}

/// One summary line for a given `N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub limit: u64,
    pub total: u64,
    pub excess: i64,
    pub margin: f64,
    pub chen_fang: f64,
    pub cilleruelo_ratio: f64,
    /// `excess / N`, tracked against the conjectured value 1.
    pub excess_ratio: f64,
}

impl SummaryRow {
    pub fn from_profile(w: &ComplementCandidate, profile: &RepresentationProfile, limit: u64) -> Self {
        let excess = profile.excess_at(limit);
        Self {
            limit,
            total: profile.total_at(limit),
            excess,
            margin: margin_from_excess(excess, limit),
            chen_fang: chen_fang_bound(w, limit),
            cilleruelo_ratio: cilleruelo_ratio(w, limit),
            excess_ratio: excess as f64 / limit as f64,
        }
    }

    fn csv_fields(&self) -> Vec<String> {
        vec![
            self.limit.to_string(),
            self.total.to_string(),
            self.excess.to_string(),
            fmt_f64(self.margin),
            fmt_f64(self.chen_fang),
            fmt_f64(self.cilleruelo_ratio),
        ]
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    csv_string(
        &["N", "total", "excess", "margin", "chen_fang", "cilleruelo_ratio"],
        rows.iter().map(SummaryRow::csv_fields),
    )
}

/// Where `excess(N) − 0.193√N` becomes positive along `N = 1..=limit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MarginScan {
    pub limit: u64,
    /// First `N` with a positive margin.
    pub first_positive: Option<u64>,
    /// Smallest `N` such that the margin is positive on all of `[N, limit]`.
    pub positive_from: Option<u64>,
}

pub fn margin_scan(profile: &RepresentationProfile) -> MarginScan {
    let excess = profile.excess_series();
    let mut first_positive = None;
    let mut positive_from = None;
    for (m, &e) in excess.iter().enumerate().skip(1) {
        let positive = margin_from_excess(e, m as u64) > 0.0;
        if positive {
            first_positive.get_or_insert(m as u64);
            positive_from.get_or_insert(m as u64);
        } else {
            positive_from = None;
        }
    }
    MarginScan {
        limit: profile.limit,
        first_positive,
        positive_from,
    }
}
