//! Bivariate copulas: the Fréchet–Hoeffding bounds, independence, four
//! parametric families, a two-segment singular copula, and structural
//! transforms built on top of any of them.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::CopulaError;
use crate::normal;

/// A point `(u, v)` of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitSquarePoint {
    u: f64,
    v: f64,
}

impl UnitSquarePoint {
    pub fn new(u: f64, v: f64) -> Result<Self, CopulaError> {
        if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) {
            Ok(Self { u, v })
        } else {
            Err(CopulaError::OutOfUnitSquare { u, v })
        }
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }
}

/// The shape of a copula. Read it through [`Copula::family`]; build copulas
/// with the validating constructors on [`Copula`].
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Π(u, v) = uv.
    Independence,
    /// W(u, v) = max(u + v − 1, 0).
    LowerBound,
    /// M(u, v) = min(u, v).
    UpperBound,
    Gaussian {
        rho: f64,
    },
    Clayton {
        theta: f64,
    },
    Gumbel {
        theta: f64,
    },
    Frank {
        theta: f64,
    },
    /// Uniform mass on the segments (0,0)–(½,½) and (½,1)–(1,½).
    TwoSegment,
    Transpose(Box<Copula>),
    Survival(Box<Copula>),
    Tilde(Box<Copula>),
    Mixture {
        weight: f64,
        left: Box<Copula>,
        right: Box<Copula>,
    },
}

/// A validated copula. Immutable once built, so it can be shared freely
/// across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Copula {
    family: Family,
}

impl Copula {
    pub fn independence() -> Self {
        Self {
            family: Family::Independence,
        }
    }

    pub fn lower_bound() -> Self {
        Self {
            family: Family::LowerBound,
        }
    }

    pub fn upper_bound() -> Self {
        Self {
            family: Family::UpperBound,
        }
    }

    pub fn two_segment() -> Self {
        Self {
            family: Family::TwoSegment,
        }
    }

    /// Gaussian copula with correlation `rho ∈ [−1, 1]`. The endpoints
    /// evaluate as W and M.
    pub fn gaussian(rho: f64) -> Result<Self, CopulaError> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(CopulaError::InvalidParameter {
                family: "gaussian",
                value: rho,
                range: "[-1, 1]",
            });
        }
        Ok(Self {
            family: Family::Gaussian { rho },
        })
    }

    /// Clayton copula, `theta > 0`.
    pub fn clayton(theta: f64) -> Result<Self, CopulaError> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(CopulaError::InvalidParameter {
                family: "clayton",
                value: theta,
                range: "(0, inf)",
            });
        }
        Ok(Self {
            family: Family::Clayton { theta },
        })
    }

    /// Gumbel copula, `theta ≥ 1`.
    pub fn gumbel(theta: f64) -> Result<Self, CopulaError> {
        if !(theta >= 1.0 && theta.is_finite()) {
            return Err(CopulaError::InvalidParameter {
                family: "gumbel",
                value: theta,
                range: "[1, inf)",
            });
        }
        Ok(Self {
            family: Family::Gumbel { theta },
        })
    }

    /// Frank copula, `theta ≠ 0`. Use [`Copula::independence`] for the limit.
    pub fn frank(theta: f64) -> Result<Self, CopulaError> {
        if theta == 0.0 || !theta.is_finite() {
            return Err(CopulaError::InvalidParameter {
                family: "frank",
                value: theta,
                range: "R \\ {0}",
            });
        }
        Ok(Self {
            family: Family::Frank { theta },
        })
    }

    /// `C^T(u, v) = C(v, u)`.
    pub fn transpose(inner: Copula) -> Self {
        Self {
            family: Family::Transpose(Box::new(inner)),
        }
    }

    /// `Ĉ(u, v) = u + v − 1 + C(1 − u, 1 − v)`.
    pub fn survival(inner: Copula) -> Self {
        Self {
            family: Family::Survival(Box::new(inner)),
        }
    }

    /// `C̃(u, v) = u − C(u, 1 − v)`.
    pub fn tilde(inner: Copula) -> Self {
        Self {
            family: Family::Tilde(Box::new(inner)),
        }
    }

    /// `weight · left + (1 − weight) · right`.
    pub fn mixture(weight: f64, left: Copula, right: Copula) -> Result<Self, CopulaError> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(CopulaError::InvalidWeight(weight));
        }
        Ok(Self {
            family: Family::Mixture {
                weight,
                left: Box::new(left),
                right: Box::new(right),
            },
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Short lowercase family name as used in manifests and CSV output.
    pub fn family_name(&self) -> &'static str {
        match &self.family {
            Family::Independence => "pi",
            Family::LowerBound => "w",
            Family::UpperBound => "m",
            Family::Gaussian { .. } => "gaussian",
            Family::Clayton { .. } => "clayton",
            Family::Gumbel { .. } => "gumbel",
            Family::Frank { .. } => "frank",
            Family::TwoSegment => "twosegment",
            Family::Transpose(_) => "transpose",
            Family::Survival(_) => "survival",
            Family::Tilde(_) => "tilde",
            Family::Mixture { .. } => "mixture",
        }
    }

    /// The scalar parameter of a parametric family.
    pub fn parameter(&self) -> Option<f64> {
        match self.family {
            Family::Gaussian { rho } => Some(rho),
            Family::Clayton { theta } | Family::Gumbel { theta } | Family::Frank { theta } => {
                Some(theta)
            }
            Family::Mixture { weight, .. } => Some(weight),
            _ => None,
        }
    }

    /// Builds a family from its manifest name and optional parameter.
    pub fn from_parts(family: &str, param: Option<f64>) -> Result<Self, CopulaError> {
        let need = |name: &str| {
            param.ok_or_else(|| CopulaError::Parse {
                input: name.to_string(),
                reason: "missing parameter".into(),
            })
        };
        match family.trim().to_ascii_lowercase().as_str() {
            "pi" | "independence" => Ok(Self::independence()),
            "w" => Ok(Self::lower_bound()),
            "m" => Ok(Self::upper_bound()),
            "twosegment" => Ok(Self::two_segment()),
            "gaussian" => Self::gaussian(need("gaussian")?),
            "clayton" => Self::clayton(need("clayton")?),
            "gumbel" => Self::gumbel(need("gumbel")?),
            "frank" => Self::frank(need("frank")?),
            other => Err(CopulaError::Parse {
                input: other.to_string(),
                reason: "unknown family".into(),
            }),
        }
    }

    /// C(u, v). Inputs are clamped to `[0, 1]`; the result is clamped into
    /// the Fréchet–Hoeffding band `[W(u, v), M(u, v)]`.
    pub fn cdf_at(&self, u: f64, v: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let v = v.clamp(0.0, 1.0);
        let hi = u.min(v);
        let lo = (u + v - 1.0).max(0.0).min(hi);
        self.raw(u, v).clamp(lo, hi)
    }

    pub fn cdf(&self, p: UnitSquarePoint) -> f64 {
        self.cdf_at(p.u, p.v)
    }

    /// Like [`Copula::cdf`] but reports a precision error when the raw value
    /// is not finite or leaves the Fréchet band by more than 1e-9.
    pub fn try_cdf(&self, p: UnitSquarePoint) -> Result<f64, CopulaError> {
        let (u, v) = (p.u, p.v);
        let value = self.raw(u, v);
        let hi = u.min(v);
        let lo = (u + v - 1.0).max(0.0).min(hi);
        if !value.is_finite() || value < lo - 1e-9 || value > hi + 1e-9 {
            return Err(CopulaError::Precision { u, v, value });
        }
        Ok(value.clamp(lo, hi))
    }

    fn raw(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v;
        }
        if v >= 1.0 {
            return u;
        }
        match &self.family {
            Family::Independence => u * v,
            Family::LowerBound => (u + v - 1.0).max(0.0),
            Family::UpperBound => u.min(v),
            Family::Gaussian { rho } => gaussian_cdf(u, v, *rho),
            Family::Clayton { theta } => clayton_cdf(u, v, *theta),
            Family::Gumbel { theta } => gumbel_cdf(u, v, *theta),
            Family::Frank { theta } => frank_cdf(u, v, *theta),
            Family::TwoSegment => {
                if u >= 0.5 && v >= 0.5 {
                    (u + v - 1.0).max(0.5)
                } else {
                    u.min(v)
                }
            }
            Family::Transpose(inner) => inner.raw(v, u),
            Family::Survival(inner) => u + v - 1.0 + inner.raw(1.0 - u, 1.0 - v),
            Family::Tilde(inner) => u - inner.raw(u, 1.0 - v),
            Family::Mixture {
                weight,
                left,
                right,
            } => weight * left.raw(u, v) + (1.0 - weight) * right.raw(u, v),
        }
    }
}

fn gaussian_cdf(u: f64, v: f64, rho: f64) -> f64 {
    if rho >= 1.0 {
        u.min(v)
    } else if rho <= -1.0 {
        (u + v - 1.0).max(0.0)
    } else if rho == 0.0 {
        u * v
    } else {
        normal::bivariate_cdf(normal::inverse_cdf(u), normal::inverse_cdf(v), rho)
    }
}

fn clayton_cdf(u: f64, v: f64, theta: f64) -> f64 {
    // (u^-θ + v^-θ - 1)^(-1/θ) rewritten around the smaller argument so that
    // nothing overflows near the origin.
    let (a, b) = if u <= v { (u, v) } else { (v, u) };
    let x = (a / b).powf(theta) - a.powf(theta);
    a * (-x.ln_1p() / theta).exp()
}

fn gumbel_cdf(u: f64, v: f64, theta: f64) -> f64 {
    let s = (-u.ln()).powf(theta) + (-v.ln()).powf(theta);
    (-s.powf(1.0 / theta)).exp()
}

fn frank_cdf(u: f64, v: f64, theta: f64) -> f64 {
    if theta < 0.0 {
        // C_{-t}(u, v) = u - C_t(u, 1 - v)
        return u - frank_cdf(u, 1.0 - v, -theta);
    }
    let a = (-theta * u).exp_m1();
    let b = (-theta * v).exp_m1();
    let c = (-theta).exp_m1();
    -(a * b / c).ln_1p() / theta
}

impl fmt::Display for Copula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Independence => write!(f, "pi"),
            Family::LowerBound => write!(f, "w"),
            Family::UpperBound => write!(f, "m"),
            Family::TwoSegment => write!(f, "twosegment"),
            Family::Gaussian { rho } => write!(f, "gaussian:rho={rho}"),
            Family::Clayton { theta } => write!(f, "clayton:theta={theta}"),
            Family::Gumbel { theta } => write!(f, "gumbel:theta={theta}"),
            Family::Frank { theta } => write!(f, "frank:theta={theta}"),
            Family::Transpose(c) => write!(f, "transpose({c})"),
            Family::Survival(c) => write!(f, "survival({c})"),
            Family::Tilde(c) => write!(f, "tilde({c})"),
            Family::Mixture {
                weight,
                left,
                right,
            } => write!(f, "mixture({weight};{left};{right})"),
        }
    }
}

impl Serialize for Copula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parses `gaussian:rho=-0.9`, `clayton:theta=5`, `gumbel:theta=3`,
/// `frank:theta=-5`, `pi`, `w`, `m` and `twosegment`, case-insensitively.
impl FromStr for Copula {
    type Err = CopulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let input = s.trim().to_ascii_lowercase();
        let parse_err = |reason: &str| CopulaError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (name, rest) = match input.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r.trim())),
            None => (input.as_str(), None),
        };
        let expected_key = match name {
            "gaussian" => Some("rho"),
            "clayton" | "gumbel" | "frank" => Some("theta"),
            "pi" | "independence" | "w" | "m" | "twosegment" => None,
            _ => return Err(parse_err("unknown family")),
        };
        let param = match (expected_key, rest) {
            (None, None) => None,
            (None, Some(_)) => return Err(parse_err("family takes no parameter")),
            (Some(key), None) => return Err(parse_err(&format!("missing `{key}=<value>`"))),
            (Some(key), Some(assignment)) => {
                let (k, value) = assignment
                    .split_once('=')
                    .ok_or_else(|| parse_err(&format!("expected `{key}=<value>`")))?;
                if k.trim() != key {
                    return Err(parse_err(&format!("expected parameter `{key}`")));
                }
                let x: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| parse_err("parameter is not a decimal number"))?;
                if !x.is_finite() {
                    return Err(parse_err("parameter must be finite"));
                }
                Some(x)
            }
        };
        Copula::from_parts(name, param)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pt(u: f64, v: f64) -> UnitSquarePoint {
        UnitSquarePoint::new(u, v).unwrap()
    }

    pub(crate) fn zoo() -> Vec<Copula> {
        let base = vec![
            Copula::independence(),
            Copula::lower_bound(),
            Copula::upper_bound(),
            Copula::two_segment(),
            Copula::gaussian(-0.9).unwrap(),
            Copula::gaussian(0.4).unwrap(),
            Copula::gaussian(1.0).unwrap(),
            Copula::clayton(2.0).unwrap(),
            Copula::clayton(5.0).unwrap(),
            Copula::gumbel(1.0).unwrap(),
            Copula::gumbel(3.0).unwrap(),
            Copula::frank(-5.0).unwrap(),
            Copula::frank(10.0).unwrap(),
        ];
        let mut all = base.clone();
        all.push(Copula::transpose(Copula::clayton(3.0).unwrap()));
        all.push(Copula::survival(Copula::gumbel(2.0).unwrap()));
        all.push(Copula::tilde(Copula::clayton(2.0).unwrap()));
        all.push(Copula::tilde(Copula::two_segment()));
        all.push(
            Copula::mixture(
                0.3,
                Copula::frank(-4.0).unwrap(),
                Copula::gaussian(0.5).unwrap(),
            )
            .unwrap(),
        );
        all
    }

    #[test]
    fn benchmark_values() {
        assert_eq!(Copula::independence().cdf(pt(0.5, 0.5)), 0.25);
        assert_eq!(Copula::lower_bound().cdf(pt(0.3, 0.4)), 0.0);
        assert_eq!(Copula::upper_bound().cdf(pt(0.3, 0.4)), 0.3);
        assert_eq!(Copula::two_segment().cdf(pt(0.75, 0.5)), 0.5);
        assert_abs_diff_eq!(
            Copula::two_segment().cdf(pt(0.9, 0.8)),
            0.7,
            epsilon = 1e-15
        );
        assert_eq!(Copula::two_segment().cdf(pt(0.3, 0.8)), 0.3);
    }

    #[test]
    fn gaussian_zero_is_independence() {
        let g = Copula::gaussian(0.0).unwrap();
        for i in 1..10 {
            for j in 1..10 {
                let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                assert_abs_diff_eq!(g.cdf(pt(u, v)), u * v, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn gaussian_endpoints_are_bounds() {
        let m = Copula::gaussian(1.0).unwrap();
        let w = Copula::gaussian(-1.0).unwrap();
        assert_eq!(m.cdf(pt(0.2, 0.7)), 0.2);
        assert_eq!(w.cdf(pt(0.2, 0.7)), 0.0);
        assert_abs_diff_eq!(w.cdf(pt(0.6, 0.7)), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_matches_orthant_probability() {
        // C(1/2, 1/2) = 1/4 + asin(ρ)/(2π)
        for &rho in &[-0.95, -0.5, 0.2, 0.8] {
            let c = Copula::gaussian(rho).unwrap().cdf(pt(0.5, 0.5));
            let exact = 0.25 + f64::asin(rho) / (2.0 * std::f64::consts::PI);
            assert_abs_diff_eq!(c, exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn closed_forms_against_textbook_formulas() {
        let (u, v): (f64, f64) = (0.37, 0.81);
        let theta: f64 = 2.5;
        let clayton = (u.powf(-theta) + v.powf(-theta) - 1.0).powf(-1.0 / theta);
        assert_abs_diff_eq!(
            Copula::clayton(theta).unwrap().cdf(pt(u, v)),
            clayton,
            epsilon = 1e-15
        );
        for &t in &[-10.0, -5.0, 0.5, 7.0] {
            let f: f64 = t;
            let direct = -1.0 / f
                * (1.0
                    + (f64::exp(-f * u) - 1.0) * (f64::exp(-f * v) - 1.0) / (f64::exp(-f) - 1.0))
                    .ln();
            assert_abs_diff_eq!(
                Copula::frank(t).unwrap().cdf(pt(u, v)),
                direct,
                epsilon = 1e-13
            );
        }
        let gumbel = f64::exp(-((-u.ln()).powf(3.0) + (-v.ln()).powf(3.0)).powf(1.0 / 3.0));
        assert_abs_diff_eq!(
            Copula::gumbel(3.0).unwrap().cdf(pt(u, v)),
            gumbel,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            Copula::gumbel(1.0).unwrap().cdf(pt(u, v)),
            u * v,
            epsilon = 1e-15
        );
    }

    #[test]
    fn transforms() {
        let s = Copula::survival(Copula::independence());
        assert_abs_diff_eq!(s.cdf(pt(0.3, 0.6)), 0.18, epsilon = 1e-15);
        let t = Copula::tilde(Copula::upper_bound());
        for &(u, v) in &[(0.2, 0.3), (0.7, 0.6), (0.5, 0.5)] {
            let w: f64 = u + v - 1.0;
            assert_abs_diff_eq!(t.cdf(pt(u, v)), w.max(0.0), epsilon = 1e-15);
        }
        let mix = Copula::mixture(0.5, Copula::lower_bound(), Copula::upper_bound()).unwrap();
        assert_eq!(mix.cdf(pt(0.5, 0.5)), 0.25);
        let c = Copula::clayton(2.0).unwrap();
        let tr = Copula::transpose(c.clone());
        assert_eq!(tr.cdf(pt(0.2, 0.9)), c.cdf(pt(0.9, 0.2)));
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(Copula::gaussian(1.01).is_err());
        assert!(Copula::gaussian(f64::NAN).is_err());
        assert!(Copula::clayton(0.0).is_err());
        assert!(Copula::clayton(-0.5).is_err());
        assert!(Copula::gumbel(0.99).is_err());
        assert!(Copula::frank(0.0).is_err());
        assert!(Copula::frank(f64::INFINITY).is_err());
        assert!(Copula::mixture(1.5, Copula::lower_bound(), Copula::upper_bound()).is_err());
        assert!(UnitSquarePoint::new(-0.1, 0.5).is_err());
        assert!(UnitSquarePoint::new(0.5, f64::NAN).is_err());
    }

    #[test]
    fn parse_grammar() {
        let c: Copula = "Gaussian:rho=-0.9".parse().unwrap();
        assert_eq!(c, Copula::gaussian(-0.9).unwrap());
        assert_eq!(
            "clayton:theta=5".parse::<Copula>().unwrap(),
            Copula::clayton(5.0).unwrap()
        );
        assert_eq!(
            "GUMBEL:theta=3".parse::<Copula>().unwrap(),
            Copula::gumbel(3.0).unwrap()
        );
        assert_eq!(
            "frank:theta=-5".parse::<Copula>().unwrap(),
            Copula::frank(-5.0).unwrap()
        );
        assert_eq!("pi".parse::<Copula>().unwrap(), Copula::independence());
        assert_eq!("W".parse::<Copula>().unwrap(), Copula::lower_bound());
        assert_eq!("m".parse::<Copula>().unwrap(), Copula::upper_bound());
        assert_eq!(
            "twosegment".parse::<Copula>().unwrap(),
            Copula::two_segment()
        );
        for bad in [
            "gauss:rho=1",
            "clayton",
            "clayton:rho=2",
            "clayton:theta=x",
            "w:theta=1",
            "frank:theta=0",
            "gaussian:rho=nan",
        ] {
            assert!(bad.parse::<Copula>().is_err(), "{bad} should not parse");
        }
        for c in zoo().into_iter().take(13) {
            assert_eq!(c.to_string().parse::<Copula>().unwrap(), c);
        }
    }

    #[test]
    fn try_cdf_accepts_valid_values() {
        for c in zoo() {
            for &(u, v) in &[(0.1, 0.9), (0.5, 0.5), (0.93, 0.4)] {
                let exact = c.try_cdf(pt(u, v)).unwrap();
                assert_eq!(exact, c.cdf(pt(u, v)));
            }
        }
    }

    proptest! {
        #[test]
        fn margins(u in 0.0f64..=1.0) {
            for c in zoo() {
                prop_assert!((c.cdf_at(u, 1.0) - u).abs() <= 1e-12);
                prop_assert!((c.cdf_at(1.0, u) - u).abs() <= 1e-12);
                prop_assert_eq!(c.cdf_at(u, 0.0), 0.0);
                prop_assert_eq!(c.cdf_at(0.0, u), 0.0);
            }
        }

        #[test]
        fn two_increasing(a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0, d in 0.0f64..=1.0) {
            let (u1, u2) = (a.min(b), a.max(b));
            let (v1, v2) = (c.min(d), c.max(d));
            for cop in zoo() {
                let vol = cop.cdf_at(u2, v2) - cop.cdf_at(u2, v1) - cop.cdf_at(u1, v2) + cop.cdf_at(u1, v1);
                prop_assert!(vol >= -1e-12, "{} volume {}", cop, vol);
            }
        }

        #[test]
        fn frechet_sandwich(u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
            for cop in zoo() {
                let (lo, hi) = ((u + v - 1.0).max(0.0), u.min(v));
                let raw = cop.raw(u, v);
                prop_assert!(raw >= lo - 1e-12 && raw <= hi + 1e-12, "{} raw {}", cop, raw);
            }
        }

        #[test]
        fn survival_involution(u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
            for cop in zoo() {
                let twice = Copula::survival(Copula::survival(cop.clone()));
                prop_assert!((twice.cdf_at(u, v) - cop.cdf_at(u, v)).abs() <= 1e-12);
            }
        }
    }
}
