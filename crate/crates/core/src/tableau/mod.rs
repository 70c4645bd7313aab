//! Embedded-pair tableaux: exact representation, structural validation,
//! serialization, and the built-in pair registry.

mod builtin;
mod format;

pub use builtin::{builtin, builtin_names};
pub use format::{load_path, load_str, save_path, save_string, TableauParseError};

use thiserror::Error;

use crate::scalar::{Mode, Scalar};
use crate::stage::{dot, mat_vec, ones, zeros, StageMatrix, StageVec, STAGES};

/// Float-mode structural validation tolerance (absolute).
pub const FLOAT_VALIDATE_TOL: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum TableauError {
    #[error("unknown pair `{name}`; available: {}", available.join(", "))]
    UnknownPair {
        name: String,
        available: Vec<String>,
    },
    #[error(transparent)]
    Parse(#[from] TableauParseError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Coefficients of a degree-4 continuous extension: `beta[k-1][j]` is the
/// coefficient of `theta^k` in `beta_j(theta)`, `k = 1..=4`. No constant term
/// is stored, so `beta_j(0) = 0` holds structurally.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpolant<S: Scalar> {
    pub beta: [StageVec<S>; 4],
}

impl<S: Scalar> Interpolant<S> {
    /// `beta_j(theta)` for all stages.
    pub fn weights_at(&self, theta: &S) -> StageVec<S> {
        let mut acc = zeros::<S>();
        let mut power = theta.clone();
        for row in &self.beta {
            for j in 0..STAGES {
                acc[j] = acc[j].clone() + row[j].clone() * power.clone();
            }
            power = power * theta.clone();
        }
        acc
    }

    /// `d/dtheta beta_j(theta)` for all stages.
    pub fn derivative_at(&self, theta: &S) -> StageVec<S> {
        let mut acc = zeros::<S>();
        let mut power = S::one();
        for (k, row) in self.beta.iter().enumerate() {
            let factor = S::from_int((k + 1) as i64);
            for j in 0..STAGES {
                acc[j] = acc[j].clone() + factor.clone() * row[j].clone() * power.clone();
            }
            power = power * theta.clone();
        }
        acc
    }

    pub fn to_float(&self) -> Interpolant<f64> {
        Interpolant {
            beta: std::array::from_fn(|k| crate::stage::map(&self.beta[k], S::to_f64)),
        }
    }
}

/// An embedded (4,5) pair of explicit 7-stage Runge-Kutta methods.
///
/// `b` holds the 5th-order weights and `d` the difference between the 4th- and
/// 5th-order weights, so the 4th-order weights are `b + d`. Pairs of 6-stage
/// methods are stored in 7-stage FSAL form with `d[6] = 0`. The one supported
/// non-FSAL shape (`fsal = false`) keeps a genuine 7th row and `b[6] != 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherPair<S: Scalar> {
    pub name: String,
    pub family: String,
    pub source: String,
    pub c: StageVec<S>,
    pub a: StageMatrix<S>,
    pub b: StageVec<S>,
    pub d: StageVec<S>,
    pub interpolant: Option<Interpolant<S>>,
    pub fsal: bool,
}

/// A structural invariant violated by a tableau.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NotLowerTriangular { row: usize, col: usize },
    RowSum { row: usize, residual: f64 },
    FirstNodeNotZero,
    LastNodeNotOne,
    LastWeightNotZero,
    FsalRow { col: usize },
    DifferenceWeightsZero,
    DifferenceWeightsSum { residual: f64 },
    NonFiniteEntry { what: &'static str },
    InterpolantEndpoint { stage: usize, residual: f64 },
    InterpolantDerivative { stage: usize, residual: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NotLowerTriangular { row, col } => {
                write!(f, "a[{row}][{col}] must be zero (explicit method)")
            }
            Violation::RowSum { row, residual } => {
                write!(f, "row {row}: sum of a[{row}][..] - c[{row}] = {residual:e}")
            }
            Violation::FirstNodeNotZero => write!(f, "c1 != 0"),
            Violation::LastNodeNotOne => write!(f, "c7 != 1"),
            Violation::LastWeightNotZero => write!(f, "b7 != 0 on an FSAL pair"),
            Violation::FsalRow { col } => write!(f, "FSAL row: a[7][{col}] != b[{col}]"),
            Violation::DifferenceWeightsZero => write!(f, "d = 0"),
            Violation::DifferenceWeightsSum { residual } => {
                write!(f, "sum of d = {residual:e} (must be 0)")
            }
            Violation::NonFiniteEntry { what } => write!(f, "non-finite entry in {what}"),
            Violation::InterpolantEndpoint { stage, residual } => {
                write!(f, "interpolant: beta_{stage}(1) - b_{stage} = {residual:e}")
            }
            Violation::InterpolantDerivative { stage, residual } => {
                write!(f, "interpolant: beta'_{stage}(1) mismatch = {residual:e}")
            }
        }
    }
}

impl<S: Scalar> ButcherPair<S> {
    pub const fn stages(&self) -> usize {
        STAGES
    }

    pub fn mode(&self) -> Mode {
        S::MODE
    }

    /// 6 when the 7th stage carries no information of its own (`d7 = 0`; the
    /// FSAL row then merely repeats `b`), otherwise 7.
    pub fn effective_stages(&self) -> usize {
        if self.fsal && self.d[6].is_zero() {
            6
        } else {
            7
        }
    }

    /// `c' = A c`.
    pub fn cp(&self) -> StageVec<S> {
        mat_vec(&self.a, &self.c)
    }

    /// `c'' = A c'`.
    pub fn cpp(&self) -> StageVec<S> {
        mat_vec(&self.a, &self.cp())
    }

    /// `c''' = A c'' = A^4 1`.
    pub fn cppp(&self) -> StageVec<S> {
        mat_vec(&self.a, &self.cpp())
    }

    /// 4th-order weights `b + d`.
    pub fn fourth_order_weights(&self) -> StageVec<S> {
        std::array::from_fn(|j| self.b[j].clone() + self.d[j].clone())
    }

    pub fn to_float(&self) -> ButcherPair<f64> {
        ButcherPair {
            name: self.name.clone(),
            family: self.family.clone(),
            source: self.source.clone(),
            c: crate::stage::map(&self.c, S::to_f64),
            a: std::array::from_fn(|i| crate::stage::map(&self.a[i], S::to_f64)),
            b: crate::stage::map(&self.b, S::to_f64),
            d: crate::stage::map(&self.d, S::to_f64),
            interpolant: self.interpolant.as_ref().map(Interpolant::to_float),
            fsal: self.fsal,
        }
    }

    /// Checks every structural invariant; returns the violations found.
    /// Exact checks in rational mode, `FLOAT_VALIDATE_TOL` otherwise.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let near_zero = |x: &S| {
            if S::exact() {
                x.is_zero()
            } else {
                x.to_f64().abs() <= FLOAT_VALIDATE_TOL
            }
        };
        for (what, finite) in [
            ("c", self.c.iter().all(S::is_finite)),
            ("A", self.a.iter().flatten().all(S::is_finite)),
            ("b", self.b.iter().all(S::is_finite)),
            ("d", self.d.iter().all(S::is_finite)),
        ] {
            if !finite {
                out.push(Violation::NonFiniteEntry { what });
            }
        }
        for i in 0..STAGES {
            for j in i..STAGES {
                if !self.a[i][j].is_zero() {
                    out.push(Violation::NotLowerTriangular {
                        row: i + 1,
                        col: j + 1,
                    });
                }
            }
        }
        for i in 0..STAGES {
            let sum = dot(&self.a[i], &ones());
            let residual = sum - self.c[i].clone();
            if !near_zero(&residual) {
                out.push(Violation::RowSum {
                    row: i + 1,
                    residual: residual.to_f64(),
                });
            }
        }
        if !self.c[0].is_zero() {
            out.push(Violation::FirstNodeNotZero);
        }
        if !near_zero(&(self.c[6].clone() - S::one())) {
            out.push(Violation::LastNodeNotOne);
        }
        if self.fsal {
            if !near_zero(&self.b[6]) {
                out.push(Violation::LastWeightNotZero);
            }
            for j in 0..STAGES {
                let r = self.a[6][j].clone() - self.b[j].clone();
                if !near_zero(&r) {
                    out.push(Violation::FsalRow { col: j + 1 });
                }
            }
        }
        if self.d.iter().all(&near_zero) {
            out.push(Violation::DifferenceWeightsZero);
        }
        let dsum = dot(&self.d, &ones());
        if !near_zero(&dsum) {
            out.push(Violation::DifferenceWeightsSum {
                residual: dsum.to_f64(),
            });
        }
        if let Some(interp) = &self.interpolant {
            let at_one = interp.weights_at(&S::one());
            let deriv_one = interp.derivative_at(&S::one());
            for j in 0..STAGES {
                let r = at_one[j].clone() - self.b[j].clone();
                if !near_zero(&r) {
                    out.push(Violation::InterpolantEndpoint {
                        stage: j + 1,
                        residual: r.to_f64(),
                    });
                }
                let target = if j == 6 { S::one() } else { S::zero() };
                let r = deriv_one[j].clone() - target;
                if !near_zero(&r) {
                    out.push(Violation::InterpolantDerivative {
                        stage: j + 1,
                        residual: r.to_f64(),
                    });
                }
            }
        }
        out
    }
}

/// A pair in whichever mode its data supports. Exact tableaux stay rational;
/// anything produced by a numeric root-find (or shipped as decimals) is float.
#[derive(Clone, Debug)]
pub enum AnyPair {
    Rational(ButcherPair<crate::scalar::Rational>),
    Float(ButcherPair<f64>),
}

impl AnyPair {
    pub fn name(&self) -> &str {
        match self {
            AnyPair::Rational(p) => &p.name,
            AnyPair::Float(p) => &p.name,
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            AnyPair::Rational(_) => Mode::Rational,
            AnyPair::Float(_) => Mode::Float,
        }
    }

    pub fn fsal(&self) -> bool {
        match self {
            AnyPair::Rational(p) => p.fsal,
            AnyPair::Float(p) => p.fsal,
        }
    }

    pub fn to_float(&self) -> ButcherPair<f64> {
        match self {
            AnyPair::Rational(p) => p.to_float(),
            AnyPair::Float(p) => p.clone(),
        }
    }

    pub fn as_rational(&self) -> Option<&ButcherPair<crate::scalar::Rational>> {
        match self {
            AnyPair::Rational(p) => Some(p),
            AnyPair::Float(_) => None,
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        match self {
            AnyPair::Rational(p) => p.validate(),
            AnyPair::Float(p) => p.validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    #[test]
    fn type_b_pair_is_valid_and_six_stage() {
        let pair = builtin("typeB").unwrap();
        assert!(pair.validate().is_empty());
        let p = pair.as_rational().unwrap();
        assert_eq!(p.a[1][0], ratio(1, 6));
        assert_eq!(p.c[1], ratio(1, 6));
        assert_eq!(p.effective_stages(), 6);
    }

    #[test]
    fn fsal_violation_reported() {
        let pair = builtin("typeB").unwrap();
        let mut p = pair.as_rational().unwrap().clone();
        p.b[6] = ratio(1, 2);
        let violations = p.validate();
        assert!(violations.contains(&Violation::LastWeightNotZero));
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::FsalRow { .. })));
    }

    #[test]
    fn aprime_interpolant_endpoint_identity() {
        let pair = builtin("aprime").unwrap();
        assert!(pair.validate().is_empty());
        let p = pair.as_rational().unwrap();
        let interp = p.interpolant.as_ref().unwrap();
        let w = interp.weights_at(&<Rational as Scalar>::one());
        assert_eq!(w[0], ratio(1441, 14742));
        assert_eq!(w, p.b);
        let w0 = interp.weights_at(&<Rational as Scalar>::zero());
        assert!(w0.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn fsal_consequences_hold_for_builtins() {
        for name in builtin_names() {
            let pair = builtin(name).unwrap();
            if !pair.fsal() {
                continue;
            }
            match &pair {
                AnyPair::Rational(p) => {
                    assert_eq!(p.cp()[6], ratio(1, 2), "{name}: c'7");
                    assert_eq!(p.cpp()[6], ratio(1, 6), "{name}: c''7");
                    assert_eq!(p.cppp()[6], ratio(1, 24), "{name}: c'''7");
                }
                AnyPair::Float(p) => {
                    assert!((p.cp()[6] - 0.5).abs() < 1e-13, "{name}: c'7");
                    assert!((p.cpp()[6] - 1.0 / 6.0).abs() < 1e-13, "{name}: c''7");
                    assert!((p.cppp()[6] - 1.0 / 24.0).abs() < 1e-13, "{name}: c'''7");
                }
            }
        }
    }
}
