//! Residue families modulo `4K` and the explicit square-difference witnesses
//! that force repeated representations.
//!
//! For a family `D` whose elements are congruent modulo `4K`, write
//! `d_s − d_1 = 4K·n_s`. Then `x = K + n_s`, `y = |K − n_s|` solve
//! `x² − y² = d_s − d_1`, so `n = x² + d_1 = y² + d_s` is represented twice
//! (once via `d_1`, once via `d_s`) as long as `y ≥ 1`. Under the feasibility
//! system on `(δ, δ₀)` every such `n` stays below `N` whenever
//! `d_s ≤ δ₀N`, which yields
//!
//! `Σ_{n ≤ N, R_D(n) ≥ 1} (R_D(n) − 1) ≥ D(δ₀N) − 2`.
//!
//! Applying this to every class `W_j = {w ≡ j mod 4K}` and summing gives the
//! lower bound `W(δ₀N) − 8K − N₀` for the excess of a complement.

use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{representation_profile, FOUR_OVER_PI};
use crate::error::{Error, Result};
use crate::report::{csv_string, fmt_f64};
use crate::sequences::{counting_function, coverage_report, ComplementCandidate};

/// Room required below 1 in the strict constraint.
pub const STRICT_SLACK: f64 = 1e-9;

/// Values of the two constraint expressions at `(δ, δ₀)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstraintValues {
    /// `δ² + δ₀`, must be `≤ 1`.
    pub first: f64,
    /// `δ₀²/(16δ²) + δ₀`, must be `< 1` (enforced as `≤ 1 − STRICT_SLACK`).
    pub second: f64,
}

impl ConstraintValues {
    pub fn satisfied(&self) -> bool {
        self.first <= 1.0 && self.second <= 1.0 - STRICT_SLACK
    }
}

pub fn constraint_values(delta: f64, delta0: f64) -> Result<ConstraintValues> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    if !(delta0.is_finite() && delta0 > 0.0) {
        return Err(Error::Domain(format!("delta0 must be positive, got {delta0}")));
    }
    Ok(ConstraintValues {
        first: delta * delta + delta0,
        second: delta0 * delta0 / (16.0 * delta * delta) + delta0,
    })
}

pub fn check_constraints(delta: f64, delta0: f64) -> Result<bool> {
    Ok(constraint_values(delta, delta0)?.satisfied())
}

/// `(δ, δ₀, N)` with `K = ⌊δ√N⌋ ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LemmaParameters {
    delta: f64,
    delta0: f64,
    n: u64,
    k: u64,
    feasible: bool,
}

fn floor_delta_sqrt(delta: f64, n: u64) -> u64 {
    (delta * (n as f64).sqrt()).floor() as u64
}

impl LemmaParameters {
    pub fn new(delta: f64, delta0: f64, n: u64) -> Result<Self> {
        let feasible = check_constraints(delta, delta0)?;
        let k = floor_delta_sqrt(delta, n);
        if k == 0 {
            return Err(Error::KTooSmall { delta, n });
        }
        Ok(Self {
            delta,
            delta0,
            n,
            k,
            feasible,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn feasible(&self) -> bool {
        self.feasible
    }

    pub fn modulus(&self) -> u64 {
        4 * self.k
    }

    /// `⌊δ₀N⌋`.
    pub fn window(&self) -> u64 {
        (self.delta0 * self.n as f64).floor() as u64
    }

    /// Recomputes `K` from `δ` and `N`.
    pub fn recompute_k(&self) -> u64 {
        floor_delta_sqrt(self.delta, self.n)
    }
}

/// Classes `W_j = {w ≡ j (mod m)}` for `j = 1..=m`; the last class holds
/// residue 0.
pub fn residue_partition(w: &ComplementCandidate, modulus: u64) -> Result<Vec<ComplementCandidate>> {
    if modulus < 1 {
        return Err(Error::InvalidArgument("modulus must be >= 1".into()));
    }
    let m = usize::try_from(modulus).map_err(|_| Error::Overflow("modulus"))?;
    let mut classes: Vec<Vec<u64>> = vec![Vec::new(); m];
    for &e in w.elements() {
        let r = (e % modulus) as usize;
        let j = if r == 0 { m } else { r };
        classes[j - 1].push(e);
    }
    classes
        .into_iter()
        .enumerate()
        .map(|(i, c)| ComplementCandidate::new(c, format!("{} mod {modulus} = {}", w.label(), (i + 1) as u64 % modulus)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaSolution {
    pub d1: u64,
    pub ds: u64,
    pub n_s: u64,
    pub x: u64,
    pub y: u64,
    /// `n_s = K`, so `y = 0` and the witness needs `0 ∈ S`.
    pub degenerate: bool,
}

impl LemmaSolution {
    /// `x² + d_1`.
    pub fn value(&self) -> Result<u64> {
        self.x
            .checked_mul(self.x)
            .and_then(|sq| sq.checked_add(self.d1))
            .ok_or(Error::Overflow("x^2 + d1"))
    }

    /// `x² + d_1 = y² + d_s` and `x² − y² = d_s − d_1`, in exact arithmetic.
    pub fn is_consistent(&self) -> bool {
        let lhs = self.x as u128 * self.x as u128 + self.d1 as u128;
        let rhs = self.y as u128 * self.y as u128 + self.ds as u128;
        let diff = (self.x as u128 * self.x as u128) as i128 - (self.y as u128 * self.y as u128) as i128;
        lhs == rhs && diff == self.ds as i128 - self.d1 as i128
    }
}

pub fn lemma_solution(d1: u64, ds: u64, k: u64) -> Result<LemmaSolution> {
    if ds <= d1 {
        return Err(Error::InvalidArgument(format!("need ds > d1, got d1={d1}, ds={ds}")));
    }
    if k < 1 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    let modulus = k.checked_mul(4).ok_or(Error::Overflow("4K"))?;
    let diff = ds - d1;
    if !diff.is_multiple_of(modulus) {
        return Err(Error::Divisibility { d1, ds, modulus });
    }
    let n_s = diff / modulus;
    let x = k.checked_add(n_s).ok_or(Error::Overflow("K + n_s"))?;
    let y = k.abs_diff(n_s);
    Ok(LemmaSolution {
        d1,
        ds,
        n_s,
        x,
        y,
        degenerate: n_s == k,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub solution: LemmaSolution,
    /// `x² + d_1`.
    pub value: u64,
    /// Identity holds and `value < N`.
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub class_size: usize,
    /// `Σ_{n ≤ N, R_D(n) ≥ 1} (R_D(n) − 1)`.
    pub lhs: u64,
    /// `D(⌊δ₀N⌋) − 2`.
    pub rhs: i64,
    pub holds: bool,
    pub witnesses: Vec<Witness>,
    /// Members of `D ∩ [0, δ₀N]` beyond `d_1` whose witness is degenerate.
    pub degenerate: usize,
}

impl LemmaReport {
    pub fn witnesses_valid(&self) -> bool {
        self.witnesses.iter().all(|w| w.valid)
    }
}

/// Checks the residue-family inequality on `D` by exact counting and lists
/// the witnesses the argument constructs.
pub fn verify_lemma(d: &ComplementCandidate, params: &LemmaParameters) -> Result<LemmaReport> {
    if !params.feasible() {
        return Err(Error::Infeasible {
            delta: params.delta(),
            delta0: params.delta0(),
        });
    }
    let modulus = params.modulus();
    let elements = d.elements();
    if let Some(&d1) = elements.first() {
        if let Some(&bad) = elements.iter().find(|&&e| (e - d1) % modulus != 0) {
            return Err(Error::Divisibility {
                d1,
                ds: bad,
                modulus,
            });
        }
    }

    let window = params.window();
    let in_window = d.below(window.saturating_add(1));
    let rhs = in_window.len() as i64 - 2;

    let profile = representation_profile(d, params.n())?;
    let lhs = profile.surplus();

    let mut witnesses = Vec::new();
    let mut degenerate = 0;
    if let Some((&d1, rest)) = in_window.split_first() {
        for &ds in rest {
            let solution = lemma_solution(d1, ds, params.k())?;
            if solution.degenerate {
                degenerate += 1;
                continue;
            }
            let value = solution.value()?;
            let valid = solution.is_consistent() && value < params.n();
            witnesses.push(Witness {
                solution,
                value,
                valid,
            });
        }
    }

    Ok(LemmaReport {
        class_size: elements.len(),
        lhs,
        rhs,
        holds: lhs as i64 >= rhs,
        witnesses,
        degenerate,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassRow {
    pub j: u64,
    pub class_size: usize,
    pub lhs: u64,
    pub rhs: i64,
    pub holds: bool,
    pub witnesses_valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub delta: f64,
    pub delta0: f64,
    pub n: u64,
    pub k: u64,
    pub per_class: Vec<ClassRow>,
    /// `Σ_j lhs_j`.
    pub class_surplus: u64,
    /// `Σ_j (W_j(δ₀N) − 2) = W(δ₀N) − 8K`.
    pub lemma_bound: i64,
    /// Coverage threshold used as `N₀`.
    pub n0: u64,
    /// `N` itself is uncovered, so `N₀` was set to `N + 1`.
    pub n0_flagged: bool,
    /// `W(δ₀N) − 8K − N₀`.
    pub lower_bound: i64,
    pub measured_excess: i64,
    /// `measured_excess ≥ class_surplus − N₀`.
    pub chain_holds: bool,
    pub bound_holds: bool,
    pub all_classes_hold: bool,
    /// `W(⌊δ₀N⌋)`.
    pub window_count: u64,
    /// `(4/π)·√(δ₀N)`.
    pub window_density: f64,
    /// `((4/π)√δ₀ − 8δ)·√N`.
    pub asymptotic_bound: f64,
}

impl PipelineReport {
    pub fn consistent(&self) -> bool {
        self.chain_holds && self.bound_holds && self.all_classes_hold
    }

    pub fn per_class_csv(&self) -> Result<String> {
        csv_string(
            &["j", "class_size", "lhs", "rhs", "holds"],
            self.per_class.iter().map(|r| {
                vec![
                    r.j.to_string(),
                    r.class_size.to_string(),
                    r.lhs.to_string(),
                    r.rhs.to_string(),
                    r.holds.to_string(),
                ]
            }),
        )
    }

    pub fn summary_csv(&self) -> Result<String> {
        csv_string(
            &[
                "N",
                "K",
                "class_surplus",
                "lemma_bound",
                "n0",
                "lower_bound",
                "measured_excess",
                "asymptotic_bound",
                "consistent",
            ],
            [vec![
                self.n.to_string(),
                self.k.to_string(),
                self.class_surplus.to_string(),
                self.lemma_bound.to_string(),
                self.n0.to_string(),
                self.lower_bound.to_string(),
                self.measured_excess.to_string(),
                fmt_f64(self.asymptotic_bound),
                self.consistent().to_string(),
            ]],
        )
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

/// Splits `W` into classes mod `4K`, verifies each class, and compares the
/// aggregated lower bound with the measured excess of `W`.
pub fn theorem1_pipeline(
    w: &ComplementCandidate,
    delta: f64,
    delta0: f64,
    n: u64,
) -> Result<PipelineReport> {
    let params = LemmaParameters::new(delta, delta0, n)?;
    if !params.feasible() {
        return Err(Error::Infeasible { delta, delta0 });
    }
    let classes = residue_partition(w, params.modulus())?;
    let per_class: Vec<ClassRow> = classes
        .par_iter()
        .enumerate()
        .map(|(i, class)| {
            let r = verify_lemma(class, &params)?;
            Ok(ClassRow {
                j: i as u64 + 1,
                class_size: r.class_size,
                lhs: r.lhs,
                rhs: r.rhs,
                holds: r.holds,
                witnesses_valid: r.witnesses_valid(),
            })
        })
        .collect::<Result<_>>()?;

    let coverage = coverage_report(w, n)?;
    let (n0, n0_flagged) = match coverage.threshold {
        Some(t) => (t, false),
        None => (n + 1, true),
    };
    let measured_excess = representation_profile(w, n)?.excess;
    let class_surplus: u64 = per_class.iter().map(|r| r.lhs).sum();
    let lemma_bound: i64 = per_class.iter().map(|r| r.rhs).sum();
    let lower_bound = lemma_bound - n0 as i64;
    let window_count = counting_function(w, params.window());
    let sqrt_n = (n as f64).sqrt();

    Ok(PipelineReport {
        delta,
        delta0,
        n,
        k: params.k(),
        chain_holds: measured_excess >= class_surplus as i64 - n0 as i64,
        bound_holds: measured_excess >= lower_bound,
        all_classes_hold: per_class.iter().all(|r| r.holds && r.witnesses_valid),
        per_class,
        class_surplus,
        lemma_bound,
        n0,
        n0_flagged,
        lower_bound,
        measured_excess,
        window_count,
        window_density: FOUR_OVER_PI * (delta0 * n as f64).sqrt(),
        asymptotic_bound: (FOUR_OVER_PI * delta0.sqrt() - 8.0 * delta) * sqrt_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{greedy_complement, GreedyStrategy};

    fn cand(v: &[u64]) -> ComplementCandidate {
        ComplementCandidate::new(v.to_vec(), "t").unwrap()
    }

    #[test]
    fn constraint_examples() {
        assert!(check_constraints(0.022, 0.084).unwrap());
        assert!(!check_constraints(0.5, 0.9).unwrap());
        assert!(check_constraints(0.1, 1e-12).unwrap());
        assert!(check_constraints(0.999, 1e-12).unwrap());
        assert!(!check_constraints(1.0, 1e-12).unwrap());
        assert!(matches!(check_constraints(0.0, 0.1), Err(Error::Domain(_))));
        assert!(matches!(check_constraints(0.1, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn strict_constraint_uses_slack() {
        // delta0 = 0.5: second = 1/(64 δ²) + 1/2 = 1 at δ = 1/√32
        let delta = (1.0f64 / 32.0).sqrt();
        assert!(!check_constraints(delta, 0.5).unwrap());
        assert!(check_constraints(delta * 1.001, 0.5).unwrap());
    }

    #[test]
    fn parameters_derive_k() {
        let p = LemmaParameters::new(0.022, 0.084, 8265).unwrap();
        assert_eq!(p.k(), 2);
        assert_eq!(p.modulus(), 8);
        assert_eq!(p.recompute_k(), p.k());
        assert!(p.feasible());
        let p = LemmaParameters::new(0.022, 0.084, 1_000_000).unwrap();
        assert_eq!(p.k(), 22);
        assert_eq!(p.window(), 84_000);
        assert!(matches!(
            LemmaParameters::new(0.022, 0.084, 100),
            Err(Error::KTooSmall { .. })
        ));
    }

    #[test]
    fn partition_examples() {
        let w = cand(&[1, 2, 9, 10]);
        let classes = residue_partition(&w, 8).unwrap();
        assert_eq!(classes.len(), 8);
        assert_eq!(classes[0].elements(), &[1, 9]);
        assert_eq!(classes[1].elements(), &[2, 10]);
        assert!(classes[2..].iter().all(|c| c.is_empty()));

        let one = residue_partition(&w, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].elements(), w.elements());
        assert!(residue_partition(&w, 0).is_err());
    }

    #[test]
    fn residue_zero_lands_in_last_class() {
        let classes = residue_partition(&cand(&[0, 3, 8, 16]), 8).unwrap();
        assert_eq!(classes[7].elements(), &[0, 8, 16]);
        assert_eq!(classes[2].elements(), &[3]);
    }

    #[test]
    fn greedy_partition_sizes() {
        let w = greedy_complement(10_000, GreedyStrategy::LargestSquare).unwrap();
        let classes = residue_partition(&w, 8).unwrap();
        assert_eq!(classes.iter().map(|c| c.len()).sum::<usize>(), w.len());
    }

    #[test]
    fn solution_examples() {
        let s = lemma_solution(1, 9, 2).unwrap();
        assert_eq!((s.n_s, s.x, s.y, s.degenerate), (1, 3, 1, false));
        assert_eq!(s.value().unwrap(), 10);
        assert!(s.is_consistent());

        let s = lemma_solution(1, 17, 2).unwrap();
        assert_eq!((s.n_s, s.y), (2, 0));
        assert!(s.degenerate);

        assert!(matches!(
            lemma_solution(0, 5, 2),
            Err(Error::Divisibility { d1: 0, ds: 5, modulus: 8 })
        ));
        assert!(lemma_solution(5, 5, 2).is_err());
        assert!(lemma_solution(1, 9, 0).is_err());
    }

    #[test]
    fn small_family_witnesses() {
        let params = LemmaParameters::new(0.022, 0.084, 8265).unwrap();
        let d = cand(&[1, 9, 33]);
        let r = verify_lemma(&d, &params).unwrap();
        let values: Vec<u64> = r.witnesses.iter().map(|w| w.value).collect();
        assert_eq!(values, vec![10, 37]);
        let xy: Vec<(u64, u64)> = r.witnesses.iter().map(|w| (w.solution.x, w.solution.y)).collect();
        assert_eq!(xy, vec![(3, 1), (6, 2)]);
        assert!(r.witnesses_valid());
        assert_eq!(r.rhs, 1);
        assert!(r.lhs >= 2);
        assert!(r.holds);
    }

    #[test]
    fn trivial_family_holds() {
        let params = LemmaParameters::new(0.022, 0.084, 8265).unwrap();
        for d in [vec![], vec![5], vec![5, 13]] {
            let r = verify_lemma(&cand(&d), &params).unwrap();
            assert!(r.rhs <= 0);
            assert!(r.holds);
        }
    }

    #[test]
    fn verify_rejects_bad_input() {
        let params = LemmaParameters::new(0.022, 0.084, 8265).unwrap();
        let err = verify_lemma(&cand(&[1, 9, 12]), &params).unwrap_err();
        assert!(matches!(err, Error::Divisibility { d1: 1, ds: 12, .. }));

        let infeasible = LemmaParameters::new(0.5, 0.9, 10_000).unwrap();
        assert!(!infeasible.feasible());
        assert!(matches!(
            verify_lemma(&cand(&[1]), &infeasible),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn pipeline_on_empty_set() {
        let r = theorem1_pipeline(&ComplementCandidate::empty(""), 0.022, 0.084, 10_000).unwrap();
        assert_eq!(r.k, 2);
        assert_eq!(r.lemma_bound, -8 * r.k as i64);
        assert!(r.n0_flagged);
        assert_eq!(r.n0, 10_001);
        assert_eq!(r.measured_excess, -10_000);
        assert!(r.consistent());
    }

    #[test]
    fn pipeline_on_greedy() {
        let n = 40_000;
        let w = greedy_complement(n, GreedyStrategy::LargestSquare).unwrap();
        let r = theorem1_pipeline(&w, 0.022, 0.084, n).unwrap();
        assert_eq!(r.k, 4);
        assert_eq!(r.per_class.len(), 16);
        assert_eq!(r.n0, 1);
        assert!(!r.n0_flagged);
        assert_eq!(
            r.lemma_bound,
            counting_function(&w, r.window_count_arg()) as i64 - 8 * r.k as i64
        );
        assert!(r.consistent(), "{r:?}");
        let csv = r.per_class_csv().unwrap();
        assert!(csv.starts_with("j,class_size,lhs,rhs,holds\n1,"));
        assert!(r.to_toml().unwrap().contains("measured_excess"));
    }

    impl PipelineReport {
        fn window_count_arg(&self) -> u64 {
            (self.delta0 * self.n as f64).floor() as u64
        }
    }

    #[test]
    fn pipeline_rejects_infeasible() {
        let w = cand(&[0]);
        assert!(matches!(
            theorem1_pipeline(&w, 0.5, 0.9, 10_000),
            Err(Error::Infeasible { .. })
        ));
    }
}
