use serde::{Deserialize, Serialize};

use crate::error::EstimationError;

/// What to do with tied observations inside a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiePolicy {
    Error,
    /// Tied blocks share the average of the ranks they span.
    #[default]
    MidRank,
}

/// Paired ranks `(R_i, S_i)` of a bivariate sample.
///
/// Ranks are stored doubled so that mid-ranks stay integral and every rank
/// statistic can be accumulated exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedSample {
    r2: Vec<u64>,
    s2: Vec<u64>,
    ties: bool,
}

impl RankedSample {
    /// Builds a sample from rank vectors (mid-ranks allowed). Each column
    /// must contain multiples of ½ in `[1, n]` summing to n(n+1)/2.
    pub fn from_ranks(r: &[f64], s: &[f64]) -> Result<Self, EstimationError> {
        if r.len() != s.len() {
            return Err(EstimationError::LengthMismatch(r.len(), s.len()));
        }
        let n = r.len();
        if n < 2 {
            return Err(EstimationError::TooFewObservations(n));
        }
        let r2 = doubled(r)?;
        let s2 = doubled(s)?;
        Self::from_doubled(r2, s2)
    }

    /// Builds a sample from two permutations of `1..=n`.
    pub fn from_permutations(r: &[usize], s: &[usize]) -> Result<Self, EstimationError> {
        let r: Vec<f64> = r.iter().map(|&x| x as f64).collect();
        let s: Vec<f64> = s.iter().map(|&x| x as f64).collect();
        let out = Self::from_ranks(&r, &s)?;
        if out.ties {
            return Err(EstimationError::InvalidRanks(
                "columns are not permutations of 1..=n".into(),
            ));
        }
        Ok(out)
    }

    pub(crate) fn from_doubled(r2: Vec<u64>, s2: Vec<u64>) -> Result<Self, EstimationError> {
        let n = r2.len() as u64;
        let ties = !is_permutation(&r2) || !is_permutation(&s2);
        for col in [&r2, &s2] {
            if col.iter().any(|&x| x < 2 || x > 2 * n) {
                return Err(EstimationError::InvalidRanks(format!(
                    "ranks must lie in [1, {n}]"
                )));
            }
            if col.iter().sum::<u64>() != n * (n + 1) {
                return Err(EstimationError::InvalidRanks(format!(
                    "ranks must sum to {}",
                    n * (n + 1) / 2
                )));
            }
        }
        Ok(Self { r2, s2, ties })
    }

    pub fn n(&self) -> usize {
        self.r2.len()
    }

    /// Whether either column contains mid-ranks.
    pub fn has_ties(&self) -> bool {
        self.ties
    }

    /// `(R_i, S_i)`.
    pub fn rank(&self, i: usize) -> (f64, f64) {
        (self.r2[i] as f64 / 2.0, self.s2[i] as f64 / 2.0)
    }

    pub fn ranks(&self) -> Vec<(f64, f64)> {
        (0..self.n()).map(|i| self.rank(i)).collect()
    }

    /// Twice the ranks, which are always integers.
    pub fn doubled_ranks(&self) -> (&[u64], &[u64]) {
        (&self.r2, &self.s2)
    }

    /// `(R_i / (n + 1), S_i / (n + 1))`.
    pub fn pseudo_observation(&self, i: usize) -> (f64, f64) {
        let d = 2.0 * (self.n() as f64 + 1.0);
        (self.r2[i] as f64 / d, self.s2[i] as f64 / d)
    }

    pub fn pseudo_observations(&self) -> Vec<(f64, f64)> {
        (0..self.n()).map(|i| self.pseudo_observation(i)).collect()
    }

    /// Ranks with the columns swapped.
    pub fn transposed(&self) -> Self {
        Self {
            r2: self.s2.clone(),
            s2: self.r2.clone(),
            ties: self.ties,
        }
    }

    /// `(n + 1 − R, n + 1 − S)`.
    pub fn survival(&self) -> Self {
        Self {
            r2: reflect(&self.r2),
            s2: reflect(&self.s2),
            ties: self.ties,
        }
    }

    /// `(R, n + 1 − S)`.
    pub fn tilde(&self) -> Self {
        Self {
            r2: self.r2.clone(),
            s2: reflect(&self.s2),
            ties: self.ties,
        }
    }
}

fn reflect(col: &[u64]) -> Vec<u64> {
    let top = 2 * (col.len() as u64 + 1);
    col.iter().map(|&x| top - x).collect()
}

fn doubled(ranks: &[f64]) -> Result<Vec<u64>, EstimationError> {
    ranks
        .iter()
        .map(|&x| {
            let d = 2.0 * x;
            if d.is_finite() && d >= 0.0 && d.fract() == 0.0 && d < 2f64.powi(53) {
                Ok(d as u64)
            } else {
                Err(EstimationError::InvalidRanks(format!(
                    "{x} is not a multiple of 1/2"
                )))
            }
        })
        .collect()
}

fn is_permutation(doubled: &[u64]) -> bool {
    let n = doubled.len();
    let mut seen = vec![false; n];
    for &x in doubled {
        if x % 2 != 0 || x < 2 {
            return false;
        }
        let k = (x / 2 - 1) as usize;
        if k >= n || seen[k] {
            return false;
        }
        seen[k] = true;
    }
    true
}

/// Ranks both columns of a bivariate sample.
pub fn rank_data(
    xs: &[f64],
    ys: &[f64],
    policy: TiePolicy,
) -> Result<RankedSample, EstimationError> {
    if xs.len() != ys.len() {
        return Err(EstimationError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(EstimationError::TooFewObservations(xs.len()));
    }
    if let Some(row) = xs
        .iter()
        .zip(ys)
        .position(|(x, y)| !x.is_finite() || !y.is_finite())
    {
        return Err(EstimationError::NonFinite { row });
    }
    let r2 = rank_column(xs, 0, policy)?;
    let s2 = rank_column(ys, 1, policy)?;
    RankedSample::from_doubled(r2, s2)
}

fn rank_column(
    values: &[f64],
    column: usize,
    policy: TiePolicy,
) -> Result<Vec<u64>, EstimationError> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut out = vec![0u64; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        // -0.0 and 0.0 tie.
        while end + 1 < n && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        if end > start && policy == TiePolicy::Error {
            let row = order[start..=end]
                .iter()
                .copied()
                .min()
                .unwrap_or(order[start]);
            return Err(EstimationError::Ties { column, row });
        }
        // Positions start..=end carry ranks start+1..=end+1; twice their mean.
        let mid2 = (start + end + 2) as u64;
        for &i in &order[start..=end] {
            out[i] = mid2;
        }
        start = end + 1;
    }
    Ok(out)
}
