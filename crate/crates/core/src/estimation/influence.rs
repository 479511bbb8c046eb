use serde::Serialize;

use crate::copula::UnitSquarePoint;
use crate::error::EstimationError;
use crate::par::Execution;

use super::empirical::{EmpiricalCopula, Partial};
use super::ranks::RankedSample;

pub const DEFAULT_GRID: usize = 512;

/// Default finite-difference step: n^{-1/2}, kept within [1/n, 1/4].
pub fn default_bandwidth(n: usize) -> f64 {
    let n = n as f64;
    n.powf(-0.5).max(1.0 / n).min(0.25)
}

/// Plug-in estimate of the influence function of Φ (up to the factor 6):
///
/// ĵ(u, v) = (1 − u − v)^+ − ∫_u^1 Ĉ₁(s, 1 − s) ds − ∫_0^{1−v} Ĉ₂(s, 1 − s) ds.
///
/// Both anti-diagonal integrands are sampled at the midpoints of a regular
/// grid; the integrals are cumulative sums interpolated linearly between
/// grid edges.
#[derive(Debug, Clone)]
pub struct InfluenceFunction {
    bandwidth: f64,
    // cum1[m] ≈ ∫_0^{m/G} Ĉ₁(s, 1 − s) ds, likewise cum2 for Ĉ₂.
    cum1: Vec<f64>,
    cum2: Vec<f64>,
}

impl InfluenceFunction {
    pub fn new(
        rs: &RankedSample,
        bandwidth: f64,
        grid: usize,
        exec: Execution,
    ) -> Result<Self, EstimationError> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(EstimationError::Bandwidth(bandwidth));
        }
        if grid < 2 {
            return Err(EstimationError::GridSize(grid));
        }
        let cn = EmpiricalCopula::new(rs);
        let g = grid as f64;
        let derivs = exec.map(grid, |k| {
            let s = (k as f64 + 0.5) / g;
            (
                cn.partial(Partial::D1, s, 1.0 - s, bandwidth),
                cn.partial(Partial::D2, s, 1.0 - s, bandwidth),
            )
        });
        let mut cum1 = Vec::with_capacity(grid + 1);
        let mut cum2 = Vec::with_capacity(grid + 1);
        let (mut a, mut b) = (0.0, 0.0);
        cum1.push(0.0);
        cum2.push(0.0);
        for (d1, d2) in derivs {
            a += d1 / g;
            b += d2 / g;
            cum1.push(a);
            cum2.push(b);
        }
        Ok(Self {
            bandwidth,
            cum1,
            cum2,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn grid(&self) -> usize {
        self.cum1.len() - 1
    }

    /// ĵ(u, v); always within [−2, 1].
    pub fn evaluate(&self, u: f64, v: f64) -> f64 {
        let total1 = self.cum1[self.grid()];
        let i1 = total1 - interpolate(&self.cum1, u);
        let i2 = interpolate(&self.cum2, 1.0 - v);
        (1.0 - u - v).max(0.0) - i1 - i2
    }

    /// ĵ on the `size × size` lattice {i/(size−1)}².
    pub fn lattice(&self, size: usize) -> Result<InfluenceGrid, EstimationError> {
        if size < 2 {
            return Err(EstimationError::GridSize(size));
        }
        let step = 1.0 / (size - 1) as f64;
        let mut points = Vec::with_capacity(size * size);
        for i in 0..size {
            for k in 0..size {
                let (u, v) = (i as f64 * step, k as f64 * step);
                points.push((u, v, self.evaluate(u, v)));
            }
        }
        Ok(InfluenceGrid {
            size,
            bandwidth: self.bandwidth,
            points,
        })
    }
}

fn interpolate(cum: &[f64], x: f64) -> f64 {
    let g = cum.len() - 1;
    let t = x.clamp(0.0, 1.0) * g as f64;
    let m = (t.floor() as usize).min(g - 1);
    let frac = t - m as f64;
    cum[m] + frac * (cum[m + 1] - cum[m])
}

/// ĵ tabulated on a regular lattice.
#[derive(Debug, Clone, Serialize)]
pub struct InfluenceGrid {
    pub size: usize,
    pub bandwidth: f64,
    /// `(u, v, ĵ(u, v))`, row-major in `u`.
    pub points: Vec<(f64, f64, f64)>,
}

impl InfluenceGrid {
    /// sup |6ĵ| over the lattice.
    pub fn sup_abs_influence(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (6.0 * p.2).abs())
            .fold(0.0, f64::max)
    }
}

/// ĵ(u, v) with the default bandwidth and grid.
pub fn influence_hat(rs: &RankedSample, p: UnitSquarePoint) -> Result<f64, EstimationError> {
    let f = InfluenceFunction::new(
        rs,
        default_bandwidth(rs.n()),
        DEFAULT_GRID,
        Execution::Sequential,
    )?;
    Ok(f.evaluate(p.u(), p.v()))
}
