//! Population values of the W-footrule Φ_C, Spearman's footrule φ_C and
//! Gini's γ_C.
//!
//! Benchmarks and the Gaussian family have closed forms. Everything else is
//! integrated along the anti-diagonal (Φ) or the diagonal (φ) with adaptive
//! Gauss–Kronrod, split at the kinks of the singular copulas.

use std::f64::consts::PI;

use serde::Serialize;

use crate::copula::{Copula, Family};
use crate::error::TruthError;
use crate::quadrature::{integrate, QuadratureOptions};
use crate::sampling;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const MIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarloOracle,
}

/// A value together with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounded {
    pub value: f64,
    pub error_bound: f64,
    pub method: Method,
}

impl Bounded {
    fn exact(value: f64) -> Self {
        Self {
            value,
            error_bound: 0.0,
            method: Method::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrueValues {
    pub phi_w: f64,
    pub footrule: f64,
    pub gini: f64,
    pub method: Method,
    pub abs_error_bound: f64,
}

/// Monte Carlo estimate of Φ_C from 3·E|1 − U − V| − 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_mc: usize,
}

// Exact (Φ, φ) where known without integration.
fn closed_form(spec: &Copula) -> Option<(f64, f64)> {
    match spec.family() {
        Family::Independence => Some((0.0, 0.0)),
        Family::LowerBound => Some((-1.0, -0.5)),
        Family::UpperBound => Some((0.5, 1.0)),
        Family::TwoSegment => Some((0.5, 0.625)),
        Family::Gaussian { rho } => Some((gaussian_phi(*rho), gaussian_footrule(*rho))),
        _ => None,
    }
}

/// Φ for the Gaussian copula with correlation `rho`.
pub fn gaussian_phi(rho: f64) -> f64 {
    0.5 + 3.0 / PI * ((rho - 1.0) / 2.0).clamp(-1.0, 1.0).asin()
}

/// φ for the Gaussian copula with correlation `rho`. On the diagonal the
/// orthant probability has correlation (1 + rho) / 2.
pub fn gaussian_footrule(rho: f64) -> f64 {
    -0.5 + 3.0 / PI * ((rho + 1.0) / 2.0).clamp(-1.0, 1.0).asin()
}

fn check_tol(tol: f64) -> Result<(), TruthError> {
    if tol >= MIN_TOL && tol.is_finite() {
        Ok(())
    } else {
        Err(TruthError::ToleranceTooSmall(tol))
    }
}

// scale·∫₀¹ f − shift, with the integral resolved to tol / scale.
fn scaled_integral<F: Fn(f64) -> f64>(
    f: F,
    scale: f64,
    shift: f64,
    tol: f64,
) -> Result<Bounded, TruthError> {
    let opts = QuadratureOptions {
        abs_tol: tol / scale,
        breakpoints: vec![0.25, 0.5, 0.75],
        ..Default::default()
    };
    match integrate(f, 0.0, 1.0, &opts) {
        Ok(r) => Ok(Bounded {
            value: scale * r.value - shift,
            error_bound: scale * r.abs_error,
            method: Method::Quadrature,
        }),
        Err(e) => Err(TruthError::NoConvergence {
            estimate: scale * e.estimate - shift,
            achieved: scale * e.abs_error,
            tol,
        }),
    }
}

/// Φ_C = 6∫₀¹ C(u, 1 − u) du − 1 by quadrature, ignoring closed forms.
pub fn phi_quadrature(spec: &Copula, tol: f64) -> Result<Bounded, TruthError> {
    check_tol(tol)?;
    scaled_integral(|u| spec.cdf_at(u, 1.0 - u), 6.0, 1.0, tol)
}

/// φ_C = 6∫₀¹ C(u, u) du − 2 by quadrature, ignoring closed forms.
pub fn footrule_quadrature(spec: &Copula, tol: f64) -> Result<Bounded, TruthError> {
    check_tol(tol)?;
    scaled_integral(|u| spec.cdf_at(u, u), 6.0, 2.0, tol)
}

/// γ_C = 4∫₀¹ [C(u, u) + C(u, 1 − u)] du − 2 by quadrature.
pub fn gini_quadrature(spec: &Copula, tol: f64) -> Result<Bounded, TruthError> {
    check_tol(tol)?;
    scaled_integral(
        |u| spec.cdf_at(u, u) + spec.cdf_at(u, 1.0 - u),
        4.0,
        2.0,
        tol,
    )
}

/// Φ_C to absolute accuracy `tol` (at least [`MIN_TOL`]).
pub fn phi_true(spec: &Copula, tol: f64) -> Result<Bounded, TruthError> {
    check_tol(tol)?;
    match closed_form(spec) {
        Some((phi, _)) => Ok(Bounded::exact(phi)),
        None => phi_quadrature(spec, tol),
    }
}

/// φ_C to absolute accuracy `tol`.
pub fn footrule_true(spec: &Copula, tol: f64) -> Result<Bounded, TruthError> {
    check_tol(tol)?;
    match closed_form(spec) {
        Some((_, footrule)) => Ok(Bounded::exact(footrule)),
        None => footrule_quadrature(spec, tol),
    }
}

/// γ_C by direct quadrature, cross-checked against (2/3)(φ_C + Φ_C).
/// A disagreement beyond the combined error bounds is an error.
pub fn gini_true(spec: &Copula, tol: f64) -> Result<Bounded, TruthError> {
    let phi = phi_true(spec, tol)?;
    let footrule = footrule_true(spec, tol)?;
    let decomposed = 2.0 / 3.0 * (phi.value + footrule.value);
    let decomposed_bound = 2.0 / 3.0 * (phi.error_bound + footrule.error_bound);
    if phi.method == Method::ClosedForm
        && footrule.method == Method::ClosedForm
        && !matches!(spec.family(), Family::Gaussian { .. })
    {
        return Ok(Bounded::exact(decomposed));
    }
    let direct = gini_quadrature(spec, tol)?;
    let bound = direct.error_bound + decomposed_bound + 1e-12;
    if (direct.value - decomposed).abs() > bound {
        return Err(TruthError::DecompositionMismatch {
            direct: direct.value,
            decomposed,
            bound,
        });
    }
    Ok(direct)
}

/// All three coefficients. The method is `ClosedForm` only when every
/// component is.
pub fn true_values(spec: &Copula, tol: f64) -> Result<TrueValues, TruthError> {
    let phi = phi_true(spec, tol)?;
    let footrule = footrule_true(spec, tol)?;
    let gini = gini_true(spec, tol)?;
    let method = if [phi, footrule, gini]
        .iter()
        .all(|b| b.method == Method::ClosedForm)
    {
        Method::ClosedForm
    } else {
        Method::Quadrature
    };
    Ok(TrueValues {
        phi_w: phi.value,
        footrule: footrule.value,
        gini: gini.value,
        method,
        abs_error_bound: phi
            .error_bound
            .max(footrule.error_bound)
            .max(gini.error_bound),
    })
}

/// Estimates Φ_C from `n_mc` draws of the copula through the L¹ form.
pub fn phi_oracle_l1(spec: &Copula, n_mc: usize, seed: u64) -> Result<OracleEstimate, TruthError> {
    let batch = sampling::sample(spec, n_mc, seed)?;
    let d: Vec<f64> = batch
        .pairs
        .iter()
        .map(|&(u, v)| (1.0 - u - v).abs())
        .collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = if d.len() > 1 {
        d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(OracleEstimate {
        estimate: 3.0 * mean - 1.0,
        std_error: 3.0 * (var / n).sqrt(),
        n_mc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(s: &str) -> Copula {
        s.parse().unwrap()
    }

    #[test]
    fn benchmarks() {
        for (s, phi, fr, g) in [
            ("pi", 0.0, 0.0, 0.0),
            ("w", -1.0, -0.5, -1.0),
            ("m", 0.5, 1.0, 1.0),
            ("twosegment", 0.5, 0.625, 0.75),
        ] {
            let tv = true_values(&c(s), DEFAULT_TOL).unwrap();
            assert_abs_diff_eq!(tv.phi_w, phi, epsilon = 1e-15);
            assert_abs_diff_eq!(tv.footrule, fr, epsilon = 1e-15);
            assert_abs_diff_eq!(tv.gini, g, epsilon = 1e-15);
            assert_eq!(tv.method, Method::ClosedForm);
        }
    }

    #[test]
    fn constants_agree_with_quadrature() {
        for s in ["pi", "w", "m", "twosegment"] {
            let spec = c(s);
            let (phi, fr) = closed_form(&spec).unwrap();
            assert_abs_diff_eq!(
                phi_quadrature(&spec, 1e-12).unwrap().value,
                phi,
                epsilon = 1e-11
            );
            assert_abs_diff_eq!(
                footrule_quadrature(&spec, 1e-12).unwrap().value,
                fr,
                epsilon = 1e-11
            );
        }
    }

    #[test]
    fn gaussian_closed_forms_match_quadrature() {
        for rho in [-0.95, -0.5, -0.1, 0.2, 0.6, 0.9] {
            let spec = Copula::gaussian(rho).unwrap();
            let q = phi_quadrature(&spec, 1e-11).unwrap().value;
            assert_abs_diff_eq!(q, gaussian_phi(rho), epsilon = 1e-8);
            let q = footrule_quadrature(&spec, 1e-11).unwrap().value;
            assert_abs_diff_eq!(q, gaussian_footrule(rho), epsilon = 1e-8);
        }
        assert_eq!(gaussian_phi(1.0), 0.5);
        assert_eq!(gaussian_footrule(1.0), 1.0);
        assert_abs_diff_eq!(gaussian_phi(-1.0), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn tolerance_validation() {
        let spec = c("pi");
        assert!(matches!(
            phi_true(&spec, 1e-13),
            Err(TruthError::ToleranceTooSmall(_))
        ));
        assert!(matches!(
            phi_true(&spec, f64::NAN),
            Err(TruthError::ToleranceTooSmall(_))
        ));
        assert!(phi_true(&spec, 1e-12).is_ok());
    }

    #[test]
    fn quadrature_bound_respected() {
        let spec = c("clayton:theta=5");
        let b = phi_true(&spec, 1e-9).unwrap();
        assert_eq!(b.method, Method::Quadrature);
        assert!(b.error_bound <= 1e-9);
        let fine = phi_true(&spec, 1e-12).unwrap();
        assert!((b.value - fine.value).abs() <= 1e-9 + 1e-12);
    }

    #[test]
    fn transforms() {
        let tol = 1e-10;
        for s in [
            "clayton:theta=2",
            "gumbel:theta=3",
            "frank:theta=-5",
            "gaussian:rho=-0.7",
        ] {
            let inner = c(s);
            let phi = phi_true(&inner, tol).unwrap().value;
            let fr = footrule_true(&inner, tol).unwrap().value;
            let t = phi_true(&Copula::transpose(inner.clone()), tol)
                .unwrap()
                .value;
            let sv = phi_true(&Copula::survival(inner.clone()), tol)
                .unwrap()
                .value;
            let tl = phi_true(&Copula::tilde(inner.clone()), tol).unwrap().value;
            assert_abs_diff_eq!(t, phi, epsilon = 3e-10);
            assert_abs_diff_eq!(sv, phi, epsilon = 3e-10);
            assert_abs_diff_eq!(tl, -fr, epsilon = 3e-10);
        }
    }

    #[test]
    fn mixture_is_linear() {
        let tol = 1e-10;
        let a = c("frank:theta=-10");
        let b = c("twosegment");
        for w in [0.0, 0.3, 0.75, 1.0] {
            let mix = Copula::mixture(w, a.clone(), b.clone()).unwrap();
            let got = phi_true(&mix, tol).unwrap().value;
            let want =
                w * phi_true(&a, tol).unwrap().value + (1.0 - w) * phi_true(&b, tol).unwrap().value;
            assert_abs_diff_eq!(got, want, epsilon = 3e-10);
        }
    }

    #[test]
    fn l1_oracle_on_bounds() {
        let w = phi_oracle_l1(&c("w"), 1000, 3).unwrap();
        assert_eq!(w.estimate, -1.0);
        assert_eq!(w.std_error, 0.0);
        let m = phi_oracle_l1(&c("m"), 1_000_000, 4).unwrap();
        assert!((m.estimate - 0.5).abs() <= 3.0 * m.std_error);
        assert!(matches!(
            phi_oracle_l1(&Copula::tilde(c("pi")), 10, 1),
            Err(TruthError::Sampling(_))
        ));
    }

    #[test]
    fn true_values_serialize() {
        let tv = true_values(&c("gaussian:rho=-0.9"), DEFAULT_TOL).unwrap();
        assert_eq!(tv.method, Method::Quadrature);
        assert_abs_diff_eq!(
            tv.gini,
            2.0 / 3.0 * (tv.phi_w + tv.footrule),
            epsilon = 1e-9
        );
        assert_eq!(
            toml::Value::try_from(tv.method).unwrap().as_str(),
            Some("quadrature")
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn gaussian_phi_is_increasing(a in -0.99f64..0.99, d in 0.001f64..0.5) {
            let b = (a + d).min(0.999);
            prop_assume!(b > a);
            prop_assert!(gaussian_phi(a) < gaussian_phi(b));
            let qa = phi_quadrature(&Copula::gaussian(a).unwrap(), 1e-10).unwrap().value;
            let qb = phi_quadrature(&Copula::gaussian(b).unwrap(), 1e-10).unwrap().value;
            prop_assert!(qa < qb);
        }

        #[test]
        fn values_stay_in_range(theta in 0.05f64..20.0, kind in 0usize..3) {
            let spec = match kind {
                0 => Copula::clayton(theta).unwrap(),
                1 => Copula::gumbel(1.0 + theta).unwrap(),
                _ => Copula::frank(-theta).unwrap(),
            };
            let tv = true_values(&spec, 1e-9).unwrap();
            prop_assert!((-1.0..=0.5).contains(&tv.phi_w) && tv.phi_w > -1.0);
            prop_assert!((-0.5..=1.0).contains(&tv.footrule));
            prop_assert!((-1.0..=1.0).contains(&tv.gini));
            prop_assert!((tv.gini - 2.0 / 3.0 * (tv.footrule + tv.phi_w)).abs() <= 2.0 * tv.abs_error_bound + 1e-12);
        }
    }
}
