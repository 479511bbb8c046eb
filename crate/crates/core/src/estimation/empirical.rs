use crate::copula::UnitSquarePoint;
use crate::error::EstimationError;

use super::ranks::RankedSample;

/// Which partial derivative of the copula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partial {
    /// ∂C/∂u
    D1,
    /// ∂C/∂v
    D2,
}

/// The empirical copula C_n of a ranked sample.
#[derive(Debug, Clone)]
pub struct EmpiricalCopula {
    points: Vec<(f64, f64)>,
}

impl EmpiricalCopula {
    pub fn new(rs: &RankedSample) -> Self {
        Self {
            points: rs.pseudo_observations(),
        }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// C_n(u, v) = (1/n)·#{i : Û_i ≤ u, V̂_i ≤ v}.
    pub fn at(&self, u: f64, v: f64) -> f64 {
        let count = self
            .points
            .iter()
            .filter(|&&(a, b)| a <= u && b <= v)
            .count();
        count as f64 / self.points.len() as f64
    }

    /// Finite-difference partial derivative with step `h`: central in the
    /// interior, one-sided within `h` of the boundary, clipped to `[0, 1]`.
    pub fn partial(&self, which: Partial, u: f64, v: f64, h: f64) -> f64 {
        let f = |x: f64| match which {
            Partial::D1 => self.at(x.clamp(0.0, 1.0), v),
            Partial::D2 => self.at(u, x.clamp(0.0, 1.0)),
        };
        let x = match which {
            Partial::D1 => u,
            Partial::D2 => v,
        };
        let d = if x < h {
            (f(x + h) - f(x)) / h
        } else if x > 1.0 - h {
            (f(x) - f(x - h)) / h
        } else {
            (f(x + h) - f(x - h)) / (2.0 * h)
        };
        d.clamp(0.0, 1.0)
    }
}

pub fn empirical_copula(rs: &RankedSample, p: UnitSquarePoint) -> f64 {
    EmpiricalCopula::new(rs).at(p.u(), p.v())
}

pub fn partial_derivative_hat(
    rs: &RankedSample,
    which: Partial,
    p: UnitSquarePoint,
    h: f64,
) -> Result<f64, EstimationError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(EstimationError::Bandwidth(h));
    }
    Ok(EmpiricalCopula::new(rs).partial(which, p.u(), p.v(), h))
}
