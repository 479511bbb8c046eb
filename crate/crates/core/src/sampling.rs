//! Exact i.i.d. sampling on the copula scale.
//!
//! * Gaussian: correlated normals mapped through Φ.
//! * Clayton: Marshall–Olkin with a Gamma(1/θ) frailty.
//! * Gumbel: Marshall–Olkin with a positive stable frailty of index 1/θ,
//!   drawn by Chambers–Mallows–Stuck.
//! * Frank: closed-form inversion of the conditional distribution.
//!
//! No sampler uses rejection, so a fixed stream always consumes the same
//! number of variates per pair.

use std::f64::consts::PI;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::Serialize;

use crate::copula::{Copula, Family};
use crate::error::SamplingError;
use crate::normal;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub pairs: Vec<(f64, f64)>,
    pub seed: u64,
    pub spec: Copula,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn columns(&self) -> (Vec<f64>, Vec<f64>) {
        self.pairs.iter().copied().unzip()
    }
}

/// Whether [`sample`] supports this copula. Tilde and mixture copulas are
/// evaluable but not samplable.
pub fn is_samplable(spec: &Copula) -> bool {
    match spec.family() {
        Family::Transpose(inner) | Family::Survival(inner) => is_samplable(inner),
        Family::Tilde(_) | Family::Mixture { .. } => false,
        _ => true,
    }
}

/// Draws `n` i.i.d. pairs from `spec` using the stream `(seed, 0, 0)`.
pub fn sample(spec: &Copula, n: usize, seed: u64) -> Result<SampleBatch, SamplingError> {
    let mut rng = rng::stream(seed, 0, 0);
    let pairs = sample_with(spec, n, &mut rng)?;
    Ok(SampleBatch {
        pairs,
        seed,
        spec: spec.clone(),
    })
}

/// Draws `n` i.i.d. pairs from `spec` with a caller-supplied generator.
pub fn sample_with<R: Rng + ?Sized>(
    spec: &Copula,
    n: usize,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>, SamplingError> {
    if n == 0 {
        return Err(SamplingError::EmptySample);
    }
    if !is_samplable(spec) {
        return Err(SamplingError::NotSamplable(spec.to_string()));
    }
    let sampler = Sampler::new(spec);
    Ok((0..n)
        .map(|_| {
            let (u, v) = sampler.draw(rng);
            (interior(u), interior(v))
        })
        .collect())
}

// Moves an exact 0 or 1 one ulp inside the open interval.
fn interior(x: f64) -> f64 {
    if x <= 0.0 {
        f64::from_bits(1)
    } else if x >= 1.0 {
        1.0 - f64::EPSILON / 2.0
    } else {
        x
    }
}

fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

/// A copula with its per-pair constants resolved once.
enum Sampler {
    Independence,
    Lower,
    Upper,
    Gaussian { rho: f64, rho_c: f64 },
    Clayton { theta: f64, frailty: Gamma<f64> },
    Gumbel { alpha: f64 },
    Frank { theta: f64, c: f64, reflect: bool },
    TwoSegment,
    Transpose(Box<Sampler>),
    Survival(Box<Sampler>),
}

impl Sampler {
    // Only called on samplable specs.
    fn new(spec: &Copula) -> Self {
        match spec.family() {
            Family::Independence => Sampler::Independence,
            Family::LowerBound => Sampler::Lower,
            Family::UpperBound => Sampler::Upper,
            Family::Gaussian { rho } if *rho >= 1.0 => Sampler::Upper,
            Family::Gaussian { rho } if *rho <= -1.0 => Sampler::Lower,
            Family::Gaussian { rho } => Sampler::Gaussian {
                rho: *rho,
                rho_c: (1.0 - rho * rho).sqrt(),
            },
            Family::Clayton { theta } => Sampler::Clayton {
                theta: *theta,
                frailty: Gamma::new(1.0 / theta, 1.0).expect("theta > 0 gives a valid shape"),
            },
            Family::Gumbel { theta } => Sampler::Gumbel { alpha: 1.0 / theta },
            Family::Frank { theta } => {
                let t = theta.abs();
                Sampler::Frank {
                    theta: t,
                    c: (-t).exp_m1(),
                    reflect: *theta < 0.0,
                }
            }
            Family::TwoSegment => Sampler::TwoSegment,
            Family::Transpose(inner) => Sampler::Transpose(Box::new(Sampler::new(inner))),
            Family::Survival(inner) => Sampler::Survival(Box::new(Sampler::new(inner))),
            Family::Tilde(_) | Family::Mixture { .. } => {
                unreachable!("checked by is_samplable")
            }
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self {
            Sampler::Independence => (open01(rng), open01(rng)),
            Sampler::Lower => {
                let u = open01(rng);
                (u, 1.0 - u)
            }
            Sampler::Upper => {
                let u = open01(rng);
                (u, u)
            }
            Sampler::Gaussian { rho, rho_c } => {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                (normal::cdf(z1), normal::cdf(rho * z1 + rho_c * z2))
            }
            Sampler::Clayton { theta, frailty } => {
                let g = frailty.sample(rng);
                let e1: f64 = Exp1.sample(rng);
                let e2: f64 = Exp1.sample(rng);
                let psi = |t: f64| (-(t / g).ln_1p() / theta).exp();
                (psi(e1), psi(e2))
            }
            Sampler::Gumbel { alpha } => {
                let s = positive_stable(*alpha, rng);
                let e1: f64 = Exp1.sample(rng);
                let e2: f64 = Exp1.sample(rng);
                let psi = |t: f64| (-(t / s).powf(*alpha)).exp();
                (psi(e1), psi(e2))
            }
            Sampler::Frank { theta, c, reflect } => {
                let u = open01(rng);
                let w = open01(rng);
                let ratio = w * c / (w + (1.0 - w) * (-theta * u).exp());
                let v = -ratio.ln_1p() / theta;
                if *reflect {
                    (u, 1.0 - v)
                } else {
                    (u, v)
                }
            }
            Sampler::TwoSegment => {
                let t = 0.5 * open01(rng);
                if rng.random::<bool>() {
                    (t, t)
                } else {
                    (0.5 + t, 1.0 - t)
                }
            }
            Sampler::Transpose(inner) => {
                let (u, v) = inner.draw(rng);
                (v, u)
            }
            Sampler::Survival(inner) => {
                let (u, v) = inner.draw(rng);
                (1.0 - u, 1.0 - v)
            }
        }
    }
}

/// Positive stable variate with Laplace transform `exp(-t^alpha)`,
/// `alpha ∈ (0, 1]`, by the Chambers–Mallows–Stuck (Kanter) construction.
fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let theta = PI * open01(rng);
    let w: f64 = Exp1.sample(rng);
    let a = (alpha * theta).sin() / theta.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * theta).sin() / w).powf((1.0 - alpha) / alpha);
    a * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadratureOptions};

    // Knight's O(n log n) Kendall tau for continuous data.
    fn kendall_tau(pairs: &[(f64, f64)]) -> f64 {
        let mut p = pairs.to_vec();
        p.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut ys: Vec<f64> = p.iter().map(|x| x.1).collect();
        let mut buf = ys.clone();
        let inversions = merge_count(&mut ys, &mut buf);
        let n = pairs.len() as f64;
        let total = n * (n - 1.0) / 2.0;
        1.0 - 2.0 * inversions as f64 / total
    }

    fn merge_count(a: &mut [f64], buf: &mut [f64]) -> u64 {
        let n = a.len();
        if n < 2 {
            return 0;
        }
        let mid = n / 2;
        let mut count = {
            let (l, r) = a.split_at_mut(mid);
            let (bl, br) = buf.split_at_mut(mid);
            merge_count(l, bl) + merge_count(r, br)
        };
        let (mut i, mut j, mut k) = (0, mid, 0);
        while i < mid && j < n {
            if a[i] <= a[j] {
                buf[k] = a[i];
                i += 1;
            } else {
                buf[k] = a[j];
                count += (mid - i) as u64;
                j += 1;
            }
            k += 1;
        }
        buf[k..k + mid - i].copy_from_slice(&a[i..mid]);
        k += mid - i;
        buf[k..k + n - j].copy_from_slice(&a[j..n]);
        a.copy_from_slice(&buf[..n]);
        count
    }

    fn ks_uniform(xs: &mut [f64]) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n).max((i as f64 + 1.0) / n - x))
            .fold(0.0, f64::max)
    }

    fn debye1(theta: f64) -> f64 {
        let opts = QuadratureOptions {
            abs_tol: 1e-13,
            ..Default::default()
        };
        let f = |t: f64| if t == 0.0 { 1.0 } else { t / t.exp_m1() };
        integrate(f, 0.0, theta, &opts).unwrap().value / theta
    }

    #[test]
    fn bounds_are_exact() {
        let w = sample(&Copula::lower_bound(), 5, 7).unwrap();
        assert!(w.pairs.iter().all(|&(u, v)| v == 1.0 - u));
        let m = sample(&Copula::upper_bound(), 5, 7).unwrap();
        assert!(m.pairs.iter().all(|&(u, v)| v == u));
        let g = sample(&Copula::gaussian(1.0).unwrap(), 5, 7).unwrap();
        assert!(g.pairs.iter().all(|&(u, v)| v == u));
    }

    #[test]
    fn gaussian_kendall_tau() {
        let batch = sample(&Copula::gaussian(-0.9).unwrap(), 1_000_000, 11).unwrap();
        let expected = 2.0 / PI * f64::asin(-0.9);
        assert!((expected + 0.7129).abs() < 1e-4);
        assert!((kendall_tau(&batch.pairs) - expected).abs() < 0.01);
    }

    #[test]
    fn archimedean_kendall_tau() {
        let n = 200_000;
        let cases = [
            (Copula::clayton(2.0).unwrap(), 0.5),
            (Copula::clayton(5.0).unwrap(), 5.0 / 7.0),
            (Copula::gumbel(3.0).unwrap(), 2.0 / 3.0),
            (Copula::gumbel(5.0).unwrap(), 0.8),
            (Copula::gumbel(1.0).unwrap(), 0.0),
            (
                Copula::frank(5.0).unwrap(),
                1.0 - 4.0 / 5.0 * (1.0 - debye1(5.0)),
            ),
            // τ(−θ) = −τ(θ) for Frank.
            (
                Copula::frank(-5.0).unwrap(),
                -(1.0 - 4.0 / 5.0 * (1.0 - debye1(5.0))),
            ),
            (
                Copula::frank(-10.0).unwrap(),
                -(1.0 - 4.0 / 10.0 * (1.0 - debye1(10.0))),
            ),
        ];
        for (i, (c, tau)) in cases.into_iter().enumerate() {
            let batch = sample(&c, n, 100 + i as u64).unwrap();
            let got = kendall_tau(&batch.pairs);
            assert!((got - tau).abs() < 0.006, "{c}: tau {got} vs {tau}");
        }
    }

    #[test]
    fn two_segment_support() {
        let batch = sample(&Copula::two_segment(), 1_000_000, 3).unwrap();
        let lower: Vec<_> = batch.pairs.iter().filter(|p| p.0 < 0.5).collect();
        let frac = lower.len() as f64 / batch.len() as f64;
        assert!((frac - 0.5).abs() < 0.002);
        assert!(lower.iter().all(|&&(u, v)| u == v));
        assert!(batch
            .pairs
            .iter()
            .filter(|p| p.0 >= 0.5)
            .all(|&(u, v)| (u + v - 1.5).abs() < 1e-15));
    }

    #[test]
    fn margins_are_uniform() {
        let n = 100_000;
        let critical = 1.9495 / (n as f64).sqrt();
        let specs = [
            Copula::independence(),
            Copula::gaussian(-0.9).unwrap(),
            Copula::clayton(5.0).unwrap(),
            Copula::gumbel(5.0).unwrap(),
            Copula::frank(-10.0).unwrap(),
            Copula::frank(3.0).unwrap(),
            Copula::two_segment(),
            Copula::survival(Copula::clayton(2.0).unwrap()),
        ];
        for (i, c) in specs.iter().enumerate() {
            let (mut us, mut vs) = sample(c, n, 40 + i as u64).unwrap().columns();
            let du = ks_uniform(&mut us);
            let dv = ks_uniform(&mut vs);
            assert!(
                du < critical && dv < critical,
                "{c}: KS {du} {dv} >= {critical}"
            );
        }
    }

    #[test]
    fn determinism_and_interior() {
        let c = Copula::clayton(5.0).unwrap();
        let a = sample(&c, 1000, 5).unwrap();
        let b = sample(&c, 1000, 5).unwrap();
        assert_eq!(a, b);
        let d = sample(&c, 1000, 6).unwrap();
        assert_ne!(a.pairs, d.pairs);
        assert_eq!(a.len(), 1000);
        assert!(a
            .pairs
            .iter()
            .all(|&(u, v)| u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0));
    }

    #[test]
    fn relabelled_samplers() {
        let inner = Copula::gumbel(3.0).unwrap();
        let base = sample(&inner, 500, 9).unwrap();
        let surv = sample(&Copula::survival(inner.clone()), 500, 9).unwrap();
        let tr = sample(&Copula::transpose(inner), 500, 9).unwrap();
        for ((b, s), t) in base.pairs.iter().zip(&surv.pairs).zip(&tr.pairs) {
            assert_eq!(*s, (1.0 - b.0, 1.0 - b.1));
            assert_eq!(*t, (b.1, b.0));
        }
    }

    #[test]
    fn unsupported_specs() {
        let tilde = Copula::tilde(Copula::independence());
        assert!(matches!(
            sample(&tilde, 10, 1),
            Err(SamplingError::NotSamplable(_))
        ));
        let mix = Copula::mixture(0.5, Copula::lower_bound(), Copula::upper_bound()).unwrap();
        assert!(matches!(
            sample(&mix, 10, 1),
            Err(SamplingError::NotSamplable(_))
        ));
        let nested = Copula::survival(tilde);
        assert!(!is_samplable(&nested));
        assert_eq!(
            sample(&Copula::independence(), 0, 1),
            Err(SamplingError::EmptySample)
        );
    }

    #[test]
    fn stable_laplace_transform() {
        // E[exp(-S)] = exp(-1) for every alpha.
        let mut rng = rng::stream(1, 2, 3);
        for alpha in [0.2, 0.5, 0.8] {
            let n = 200_000;
            let m: f64 = (0..n)
                .map(|_| (-positive_stable(alpha, &mut rng)).exp())
                .sum::<f64>()
                / n as f64;
            assert!((m - (-1f64).exp()).abs() < 0.003, "alpha {alpha}: {m}");
        }
    }
}
