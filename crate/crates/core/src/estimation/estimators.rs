use serde::{Deserialize, Serialize};

use super::ranks::RankedSample;

/// Normalisation of the footrule estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FootruleNorm {
    /// 1 − 3Σ|R − S| / (n(n + 1)), equal to 1 on comonotone ranks.
    #[default]
    Pseudo,
    /// 1 − 3Σ|R − S| / (n² − 1).
    Classical,
}

// Σ(2(n+1) − 2R − 2S)^+ and Σ|2R − 2S|, both exact.
fn sums(rs: &RankedSample) -> (u128, u128) {
    let (r2, s2) = rs.doubled_ranks();
    let top = 2 * (rs.n() as u64 + 1);
    let mut anti = 0u128;
    let mut diag = 0u128;
    for (&r, &s) in r2.iter().zip(s2) {
        anti += top.saturating_sub(r + s) as u128;
        diag += r.abs_diff(s) as u128;
    }
    (anti, diag)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Φ̂ as a reduced fraction `(numerator, denominator)`.
pub fn phi_hat_rational(rs: &RankedSample) -> (i128, u128) {
    let (anti, _) = sums(rs);
    let n = rs.n() as u128;
    let d = n * (n + 1);
    // 6/(n(n+1)) · anti/2 − 1
    let num = 3 * anti as i128 - d as i128;
    let g = gcd(num.unsigned_abs(), d).max(1);
    (num / g as i128, d / g)
}

/// Φ̂ = 6/(n(n+1)) Σ(n + 1 − R_i − S_i)^+ − 1, computed with a single
/// rounding.
pub fn phi_hat(rs: &RankedSample) -> f64 {
    let (num, den) = phi_hat_rational(rs);
    num as f64 / den as f64
}

/// Rank estimator of Spearman's footrule.
pub fn footrule_hat(rs: &RankedSample, norm: FootruleNorm) -> f64 {
    let (_, diag) = sums(rs);
    let n = rs.n() as u128;
    let d = match norm {
        FootruleNorm::Pseudo => n * (n + 1),
        FootruleNorm::Classical => n * n - 1,
    };
    // 1 − 3·(diag/2)/d
    let num = 2 * d as i128 - 3 * diag as i128;
    let den = 2 * d;
    let g = gcd(num.unsigned_abs(), den).max(1);
    (num / g as i128) as f64 / (den / g) as f64
}

/// γ̂ = (2/3)(φ̂ + Φ̂).
pub fn gini_hat(rs: &RankedSample, norm: FootruleNorm) -> f64 {
    match norm {
        FootruleNorm::Pseudo => {
            // In doubled-rank sums γ̂ = (2·anti − diag) / (n(n+1)).
            let (anti, diag) = sums(rs);
            let n = rs.n() as u128;
            let num = 2 * anti as i128 - diag as i128;
            let den = n * (n + 1);
            let g = gcd(num.unsigned_abs(), den).max(1);
            (num / g as i128) as f64 / (den / g) as f64
        }
        FootruleNorm::Classical => 2.0 / 3.0 * (footrule_hat(rs, norm) + phi_hat(rs)),
    }
}
