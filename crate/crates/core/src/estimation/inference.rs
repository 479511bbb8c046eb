use serde::Serialize;

use crate::error::EstimationError;
use crate::normal;
use crate::par::Execution;

use super::estimators::{footrule_hat, gini_hat, phi_hat, FootruleNorm};
use super::influence::{default_bandwidth, InfluenceFunction, DEFAULT_GRID};
use super::ranks::{rank_data, RankedSample, TiePolicy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationOptions {
    pub alpha: f64,
    /// Finite-difference step; `None` uses [`default_bandwidth`].
    pub bandwidth: Option<f64>,
    pub grid: usize,
    pub footrule: FootruleNorm,
    pub execution: Execution,
}

impl Default for EstimationOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            bandwidth: None,
            grid: DEFAULT_GRID,
            footrule: FootruleNorm::Pseudo,
            execution: Execution::Sequential,
        }
    }
}

impl EstimationOptions {
    pub fn bandwidth_for(&self, n: usize) -> f64 {
        self.bandwidth.unwrap_or_else(|| default_bandwidth(n))
    }
}

fn check_alpha(alpha: f64) -> Result<(), EstimationError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(EstimationError::Alpha(alpha))
    }
}

/// σ̂_Φ = sqrt(36/(n−1) Σ (ĵ(Û_i, V̂_i) − mean)²).
pub fn sigma_hat(rs: &RankedSample, opts: &EstimationOptions) -> Result<f64, EstimationError> {
    let f = InfluenceFunction::new(rs, opts.bandwidth_for(rs.n()), opts.grid, opts.execution)?;
    let j: Vec<f64> = rs
        .pseudo_observations()
        .iter()
        .map(|&(u, v)| f.evaluate(u, v))
        .collect();
    let n = j.len() as f64;
    let mean = j.iter().sum::<f64>() / n;
    let ss: f64 = j.iter().map(|x| (x - mean).powi(2)).sum();
    Ok((36.0 * ss / (n - 1.0)).sqrt())
}

/// Φ̂ ± z_{α/2} σ̂ / √n, intersected with [−1, 1/2].
pub fn confidence_interval(
    phi: f64,
    sigma: f64,
    n: usize,
    alpha: f64,
) -> Result<(f64, f64), EstimationError> {
    check_alpha(alpha)?;
    let half = normal::inverse_cdf(1.0 - alpha / 2.0) * sigma / (n as f64).sqrt();
    Ok(((phi - half).max(-1.0), (phi + half).min(0.5)))
}

/// Outcome of the one-sided test of H₀: C = W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestVerdict {
    /// T_n = √n(Φ̂ + 1)/σ̂; +∞ when σ̂ = 0 and Φ̂ > −1.
    pub statistic: f64,
    pub p_value: f64,
    pub critical_value: f64,
    pub reject: bool,
    /// Φ̂ = −1 exactly: the sample is countermonotone and H₀ is kept.
    pub boundary: bool,
}

pub fn countermonotonicity_test(
    phi: f64,
    sigma: f64,
    n: usize,
    alpha: f64,
) -> Result<TestVerdict, EstimationError> {
    check_alpha(alpha)?;
    let critical_value = normal::inverse_cdf(1.0 - alpha);
    if phi <= -1.0 {
        return Ok(TestVerdict {
            statistic: 0.0,
            p_value: 0.5,
            critical_value,
            reject: false,
            boundary: true,
        });
    }
    let statistic = if sigma > 0.0 {
        (n as f64).sqrt() * (phi + 1.0) / sigma
    } else {
        f64::INFINITY
    };
    Ok(TestVerdict {
        statistic,
        p_value: normal::cdf(-statistic).clamp(0.0, 1.0),
        critical_value,
        reject: statistic > critical_value,
        boundary: false,
    })
}

/// Everything the estimator reports for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport {
    pub n: usize,
    pub phi_hat: f64,
    pub footrule_hat: f64,
    pub gini_hat: f64,
    pub sigma_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub test_stat: f64,
    pub p_value: f64,
    pub reject: bool,
    pub boundary: bool,
    pub alpha: f64,
    pub bandwidth: f64,
    pub ties: bool,
}

pub fn estimate(
    rs: &RankedSample,
    opts: &EstimationOptions,
) -> Result<EstimateReport, EstimationError> {
    check_alpha(opts.alpha)?;
    let n = rs.n();
    let phi = phi_hat(rs);
    let sigma = sigma_hat(rs, opts)?;
    let (ci_low, ci_high) = confidence_interval(phi, sigma, n, opts.alpha)?;
    let verdict = countermonotonicity_test(phi, sigma, n, opts.alpha)?;
    Ok(EstimateReport {
        n,
        phi_hat: phi,
        footrule_hat: footrule_hat(rs, opts.footrule),
        gini_hat: gini_hat(rs, opts.footrule),
        sigma_hat: sigma,
        ci_low,
        ci_high,
        test_stat: verdict.statistic,
        p_value: verdict.p_value,
        reject: verdict.reject,
        boundary: verdict.boundary,
        alpha: opts.alpha,
        bandwidth: opts.bandwidth_for(n),
        ties: rs.has_ties(),
    })
}

/// Largest change of Φ̂ that a single replaced observation can cause.
pub fn hampel_bound(n: usize) -> f64 {
    12.0 / n as f64
}

/// Replaces pseudo-observation `index` by `replacement`, re-ranks with
/// mid-ranks and returns |ΔΦ̂|.
pub fn perturbation_bound_check(
    rs: &RankedSample,
    index: usize,
    replacement: (f64, f64),
) -> Result<f64, EstimationError> {
    let n = rs.n();
    if index >= n {
        return Err(EstimationError::Index { index, n });
    }
    let (mut us, mut vs): (Vec<f64>, Vec<f64>) = rs.pseudo_observations().into_iter().unzip();
    us[index] = replacement.0;
    vs[index] = replacement.1;
    let perturbed = rank_data(&us, &vs, TiePolicy::MidRank)?;
    Ok((phi_hat(&perturbed) - phi_hat(rs)).abs())
}
