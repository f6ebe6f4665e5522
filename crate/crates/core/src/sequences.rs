//! Integer sequences standing in for the complement `W`, the counting
//! function `W(x)`, and coverage of `[0, N]` by `S + W` where
//! `S = {1², 2², 3², …}`.
//!
//! Conventions used everywhere in the crate:
//! - `0` may belong to `W`, but `0 ∉ S` (squares start at `1²`).
//! - `W(x)` counts elements `w ≤ x` (inclusive).
//! - Elements are stored ascending and 0-based; the sequence term `w_n`
//!   (1-based) is `elements[n - 1]`.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// A strictly increasing, finite list of non-negative integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplementCandidate {
    elements: Vec<u64>,
    label: String,
}

impl ComplementCandidate {
    /// Builds a candidate from already-sorted elements, rejecting any
    /// non-increasing step.
    pub fn new(elements: Vec<u64>, label: impl Into<String>) -> Result<Self> {
        for (i, pair) in elements.windows(2).enumerate() {
            if pair[0] >= pair[1] {
                return Err(Error::NotIncreasing {
                    index: i + 1,
                    prev: pair[0],
                    next: pair[1],
                });
            }
        }
        Ok(Self {
            elements,
            label: label.into(),
        })
    }

    /// Sorts and deduplicates arbitrary input.
    pub fn from_unsorted(mut elements: Vec<u64>, label: impl Into<String>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        Self {
            elements,
            label: label.into(),
        }
    }

    pub fn empty(label: impl Into<String>) -> Self {
        Self {
            elements: Vec::new(),
            label: label.into(),
        }
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The 1-based term `w_n`.
    pub fn term(&self, n: usize) -> Option<u64> {
        n.checked_sub(1).and_then(|i| self.elements.get(i).copied())
    }

    pub fn contains(&self, value: u64) -> bool {
        self.elements.binary_search(&value).is_ok()
    }

    /// Elements strictly below `bound`.
    pub fn below(&self, bound: u64) -> &[u64] {
        let end = self.elements.partition_point(|&w| w < bound);
        &self.elements[..end]
    }

    pub fn into_elements(self) -> Vec<u64> {
        self.elements
    }

    /// Parses the newline-delimited sequence format. An optional first line
    /// starting with `#` carries the label; blank lines are ignored.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut label = String::new();
        let mut elements = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            if let Some(rest) = text.strip_prefix('#') {
                if idx == 0 {
                    label = rest.trim().to_string();
                    continue;
                }
                return Err(Error::Parse {
                    line: line_no,
                    msg: "label header is only allowed on the first line".into(),
                });
            }
            let value: u64 = text.parse().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("invalid integer {text:?}: {e}"),
            })?;
            if let Some(&last) = elements.last() {
                if value <= last {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("{value} does not exceed previous value {last}"),
                    });
                }
            }
            elements.push(value);
        }
        Ok(Self { elements, label })
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        if !self.label.is_empty() {
            writeln!(out, "# {}", self.label)?;
        }
        for w in &self.elements {
            writeln!(out, "{w}")?;
        }
        Ok(())
    }
}

/// `W(x) = #{w ∈ W : w ≤ x}`.
pub fn counting_function(w: &ComplementCandidate, x: u64) -> u64 {
    w.elements.partition_point(|&e| e <= x) as u64
}

/// Uncovered integers of `[0, N]` under `S + W`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub limit: u64,
    pub uncovered: Vec<u64>,
    /// Smallest `M` with every `n ∈ [M, N]` covered; `None` when `N` itself
    /// is uncovered.
    pub threshold: Option<u64>,
}

impl CoverageReport {
    /// Uncovered values restricted to `[lo, hi]`.
    pub fn uncovered_in(&self, lo: u64, hi: u64) -> &[u64] {
        let start = self.uncovered.partition_point(|&n| n < lo);
        let end = self.uncovered.partition_point(|&n| n <= hi);
        &self.uncovered[start..end]
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["uncovered"])?;
        for n in &self.uncovered {
            wtr.write_record([n.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Marks every `n ≤ N` of the form `k² + w` (`k ≥ 1`, `w ∈ W`).
pub(crate) fn coverage_mask(w: &ComplementCandidate, limit: u64) -> Result<Vec<bool>> {
    let len = usize::try_from(limit)
        .ok()
        .and_then(|l| l.checked_add(1))
        .ok_or(Error::Overflow("coverage array length"))?;
    let mut covered = vec![false; len];
    for &e in w.below(limit) {
        mark_from(&mut covered, e, limit)?;
    }
    Ok(covered)
}

/// Marks `e + k²` for `k = 1, 2, …` while the sum stays `≤ limit`.
pub(crate) fn mark_from(covered: &mut [bool], e: u64, limit: u64) -> Result<()> {
    let mut k: u64 = 1;
    loop {
        let sq = k.checked_mul(k).ok_or(Error::Overflow("k^2"))?;
        let n = e.checked_add(sq).ok_or(Error::Overflow("w + k^2"))?;
        if n > limit {
            return Ok(());
        }
        covered[n as usize] = true;
        k += 1;
    }
}

pub fn coverage_report(w: &ComplementCandidate, limit: u64) -> Result<CoverageReport> {
    if limit < 1 {
        return Err(Error::InvalidArgument("coverage limit must be >= 1".into()));
    }
    let covered = coverage_mask(w, limit)?;
    let uncovered: Vec<u64> = covered
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(n, _)| n as u64)
        .collect();
    let threshold = match uncovered.last() {
        Some(&last) if last == limit => None,
        Some(&last) => Some(last + 1),
        None => Some(0),
    };
    Ok(CoverageReport {
        limit,
        uncovered,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(v: &[u64]) -> ComplementCandidate {
        ComplementCandidate::new(v.to_vec(), "t").unwrap()
    }

    #[test]
    fn counting_function_examples() {
        let w = cand(&[0, 3, 5]);
        assert_eq!(counting_function(&w, 4), 2);
        assert_eq!(counting_function(&w, 0), 1);
        assert_eq!(counting_function(&w, 5), 3);
        assert_eq!(counting_function(&ComplementCandidate::empty(""), 100), 0);
    }

    #[test]
    fn rejects_non_increasing() {
        let err = ComplementCandidate::new(vec![1, 4, 4], "x").unwrap_err();
        assert!(matches!(err, Error::NotIncreasing { index: 2, prev: 4, next: 4 }));
        assert!(ComplementCandidate::new(vec![5, 2], "x").is_err());
    }

    #[test]
    fn term_is_one_based() {
        let w = cand(&[2, 7, 11]);
        assert_eq!(w.term(0), None);
        assert_eq!(w.term(1), Some(2));
        assert_eq!(w.term(3), Some(11));
        assert_eq!(w.term(4), None);
    }

    #[test]
    fn coverage_of_zero_only_is_the_squares() {
        let r = coverage_report(&cand(&[0]), 20).unwrap();
        let expected: Vec<u64> = (0..=20).filter(|n| ![1, 4, 9, 16].contains(n)).collect();
        assert_eq!(r.uncovered, expected);
        assert_eq!(r.threshold, None);
    }

    #[test]
    fn coverage_of_dense_set() {
        let w = cand(&(0..=50).collect::<Vec<_>>());
        let r = coverage_report(&w, 50).unwrap();
        assert_eq!(r.uncovered, vec![0]);
        assert_eq!(r.threshold, Some(1));
    }

    #[test]
    fn coverage_rejects_zero_limit() {
        assert!(coverage_report(&cand(&[0]), 0).is_err());
    }

    #[test]
    fn elements_above_limit_are_ignored() {
        let w = cand(&[u64::MAX - 2]);
        assert_eq!(coverage_report(&w, 3).unwrap().uncovered, vec![0, 1, 2, 3]);
    }

    #[test]
    fn file_format_roundtrip_and_errors() {
        let w = cand(&[0, 1, 2, 3, 4]).with_label("greedy 10");
        let mut buf = Vec::new();
        w.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "# greedy 10\n0\n1\n2\n3\n4\n");
        let back = ComplementCandidate::read_from(&buf[..]).unwrap();
        assert_eq!(back, w);

        let err = ComplementCandidate::read_from("# x\n1\n2\nfoo\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }));
        let err = ComplementCandidate::read_from("3\n2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn report_serializers() {
        let r = coverage_report(&cand(&[0, 1]), 6).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "uncovered\n0\n3\n6\n");
        let text = r.to_toml().unwrap();
        assert!(text.contains("limit = 6"));
        assert!(text.contains("uncovered = [0, 3, 6]"));
    }
}
