//! The gamma/lambda/mu/eta combinations that compress the residual order
//! conditions. Everything is indexed by a stage `m` in `4..=7` and a weight
//! kind naming the tree the condition came from.

use crate::scalar::{int, ratio, Scalar};
use crate::stage::StageVec;

/// Which residual order condition a quantity belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    /// `c*c`
    CSq,
    /// `c*c*c`
    CCube,
    /// `c*c*c*c`
    CQuart,
    /// `c'*c`
    CpC,
    /// `c'*c*c`
    CpCSq,
    /// `c'*c'`
    CpSq,
    /// `c''*c`
    CppC,
}

pub const WEIGHT_KINDS: [WeightKind; 7] = [
    WeightKind::CSq,
    WeightKind::CCube,
    WeightKind::CQuart,
    WeightKind::CpC,
    WeightKind::CpCSq,
    WeightKind::CpSq,
    WeightKind::CppC,
];

impl WeightKind {
    fn index(self) -> usize {
        match self {
            WeightKind::CSq => 0,
            WeightKind::CCube => 1,
            WeightKind::CQuart => 2,
            WeightKind::CpC => 3,
            WeightKind::CpCSq => 4,
            WeightKind::CpSq => 5,
            WeightKind::CppC => 6,
        }
    }
}

fn pow<S: Scalar>(x: &S, n: u32) -> S {
    let mut acc = S::one();
    for _ in 0..n {
        acc = acc * x.clone();
    }
    acc
}

/// `gamma_{m, c^{n+1}} = c'3 c_m (c_m^n - c2^n) - c'_m c3 (c3^n - c2^n)`.
pub fn gamma_c_pow<S: Scalar>(cp3: &S, c2: &S, c3: &S, cm: &S, cpm: &S, n: u32) -> S {
    cp3.clone() * cm.clone() * (pow(cm, n) - pow(c2, n))
        - cpm.clone() * c3.clone() * (pow(c3, n) - pow(c2, n))
}

/// `gamma_{m, c' c^n} = c'_m (c_m^n - c3^n)`.
pub fn gamma_cp_c_pow<S: Scalar>(c3: &S, cm: &S, cpm: &S, n: u32) -> S {
    cpm.clone() * (pow(cm, n) - pow(c3, n))
}

/// `gamma_{m, c'^2} = c'_m (c'_m - c'3)`.
pub fn gamma_cp_sq<S: Scalar>(cp3: &S, cpm: &S) -> S {
    cpm.clone() * (cpm.clone() - cp3.clone())
}

/// `gamma_{m, c'' c} = c''_m (c_m - c4)`.
pub fn gamma_cpp_c<S: Scalar>(c4: &S, cm: &S, cppm: &S) -> S {
    cppm.clone() * (cm.clone() - c4.clone())
}

/// `gamma_{A c^2} = c''_4 c3 (c3 - c2)`.
pub fn gamma_a_csq<S: Scalar>(c2: &S, c3: &S, cpp4: &S) -> S {
    cpp4.clone() * c3.clone() * (c3.clone() - c2.clone())
}

/// `eta_{c^{n+1}} = c3 (c3^n - c2^n) + 4 c'3 (c2^n - 3/(4n+2))`.
pub fn eta_c_pow<S: Scalar>(cp3: &S, c2: &S, c3: &S, n: u32) -> S {
    c3.clone() * (pow(c3, n) - pow(c2, n))
        + int::<S>(4) * cp3.clone() * (pow(c2, n) - ratio::<S>(3, 4 * n as i64 + 2))
}

/// `eta_{c' c} = c3 - 3/5`.
pub fn eta_cp_c<S: Scalar>(c3: &S) -> S {
    c3.clone() - ratio::<S>(3, 5)
}

/// `eta_{A c^2} = c'3 (c2 - 2/5)`.
pub fn eta_a_csq<S: Scalar>(cp3: &S, c2: &S) -> S {
    cp3.clone() * (c2.clone() - ratio::<S>(2, 5))
}

/// mu correction term added to gamma, per kind.
fn mu_addend<S: Scalar>(kind: WeightKind, cp3: &S, c2: &S, c3: &S, cm: &S, cppm: &S) -> S {
    let four_cppm = int::<S>(4) * cppm.clone();
    match kind {
        WeightKind::CSq | WeightKind::CCube | WeightKind::CQuart => {
            let n = match kind {
                WeightKind::CSq => 1,
                WeightKind::CCube => 2,
                _ => 3,
            };
            four_cppm
                * (c3.clone() * (pow(c3, n) - pow(c2, n))
                    + int::<S>(3) * cp3.clone() * (pow(c2, n) - ratio::<S>(2, n as i64 + 2)))
        }
        WeightKind::CpC | WeightKind::CpCSq => {
            let n = if kind == WeightKind::CpC { 1 } else { 2 };
            four_cppm * (pow(c3, n) - ratio::<S>(3, n as i64 + 3))
        }
        WeightKind::CpSq => four_cppm * (cp3.clone() - ratio::<S>(3, 10)),
        // mu_{m, c''c} = c''_m (c_m - 4/5) stands alone, no gamma term
        WeightKind::CppC => cppm.clone() * (cm.clone() - ratio::<S>(4, 5)),
    }
}

/// All gamma/lambda/mu values for stages 4..=7 plus the eta family.
#[derive(Clone, Debug)]
pub struct AuxQuantities<S: Scalar> {
    gamma: [[S; 7]; 4],
    lambda: [[S; 7]; 4],
    mu: [[S; 7]; 4],
    pub gamma_a_csq: S,
    pub eta_csq: S,
    pub eta_ccube: S,
    pub eta_cquart: S,
    pub eta_cpc: S,
    pub eta_a_csq: S,
}

impl<S: Scalar> AuxQuantities<S> {
    /// `gamma_{m, kind}` for `m` in `4..=7`.
    pub fn gamma(&self, m: usize, kind: WeightKind) -> &S {
        &self.gamma[m - 4][kind.index()]
    }

    /// `lambda_{m, kind} = c''4 gamma_{m, kind} - c''_m gamma_{4, kind}`.
    pub fn lambda(&self, m: usize, kind: WeightKind) -> &S {
        &self.lambda[m - 4][kind.index()]
    }

    /// `mu_{m, kind}`.
    pub fn mu(&self, m: usize, kind: WeightKind) -> &S {
        &self.mu[m - 4][kind.index()]
    }

    pub fn eta(&self, kind: WeightKind) -> &S {
        match kind {
            WeightKind::CSq => &self.eta_csq,
            WeightKind::CCube => &self.eta_ccube,
            WeightKind::CQuart => &self.eta_cquart,
            WeightKind::CpC => &self.eta_cpc,
            _ => panic!("eta is defined for c^2, c^3, c^4, c'c, and A c^2 only"),
        }
    }
}

/// Evaluates every auxiliary quantity from the node data. `c`, `cp`, `cpp`
/// must be full stage vectors (with `c7 = 1`, `c'7 = 1/2`, `c''7 = 1/6` for a
/// consistent FSAL pair).
pub fn aux_quantities<S: Scalar>(
    c: &StageVec<S>,
    cp: &StageVec<S>,
    cpp: &StageVec<S>,
) -> AuxQuantities<S> {
    let (c2, c3, c4) = (&c[1], &c[2], &c[3]);
    let cp3 = &cp[2];
    let cpp4 = &cpp[3];
    let gamma: [[S; 7]; 4] = std::array::from_fn(|i| {
        let m = i + 3; // stage index m-1 in 0-based arrays; stage m = i + 4
        let (cm, cpm, cppm) = (&c[m], &cp[m], &cpp[m]);
        std::array::from_fn(|k| match WEIGHT_KINDS[k] {
            WeightKind::CSq => gamma_c_pow(cp3, c2, c3, cm, cpm, 1),
            WeightKind::CCube => gamma_c_pow(cp3, c2, c3, cm, cpm, 2),
            WeightKind::CQuart => gamma_c_pow(cp3, c2, c3, cm, cpm, 3),
            WeightKind::CpC => gamma_cp_c_pow(c3, cm, cpm, 1),
            WeightKind::CpCSq => gamma_cp_c_pow(c3, cm, cpm, 2),
            WeightKind::CpSq => gamma_cp_sq(cp3, cpm),
            WeightKind::CppC => gamma_cpp_c(c4, cm, cppm),
        })
    });
    let lambda: [[S; 7]; 4] = std::array::from_fn(|i| {
        std::array::from_fn(|k| {
            cpp4.clone() * gamma[i][k].clone() - cpp[i + 3].clone() * gamma[0][k].clone()
        })
    });
    let mu: [[S; 7]; 4] = std::array::from_fn(|i| {
        let m = i + 3;
        let (cm, cppm) = (&c[m], &cpp[m]);
        std::array::from_fn(|k| {
            let kind = WEIGHT_KINDS[k];
            let addend = mu_addend(kind, cp3, c2, c3, cm, cppm);
            if kind == WeightKind::CppC {
                addend
            } else {
                gamma[i][k].clone() + addend
            }
        })
    });
    AuxQuantities {
        gamma,
        lambda,
        mu,
        gamma_a_csq: gamma_a_csq(c2, c3, cpp4),
        eta_csq: eta_c_pow(cp3, c2, c3, 1),
        eta_ccube: eta_c_pow(cp3, c2, c3, 2),
        eta_cquart: eta_c_pow(cp3, c2, c3, 3),
        eta_cpc: eta_cp_c(c3),
        eta_a_csq: eta_a_csq(cp3, c2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::tableau::builtin;

    fn aux_of(name: &str) -> AuxQuantities<Rational> {
        let pair = builtin(name).unwrap();
        let p = pair.as_rational().unwrap().clone();
        aux_quantities(&p.c, &p.cp(), &p.cpp())
    }

    #[test]
    fn lambda_at_stage_four_vanishes() {
        let aux = aux_of("typeB");
        for kind in WEIGHT_KINDS {
            assert!(aux.lambda(4, kind).is_zero(), "{kind:?}");
        }
    }

    #[test]
    fn gamma_cpp_c_vanishes_at_stage_four() {
        let aux = aux_of("aprime");
        assert!(aux.gamma(4, WeightKind::CppC).is_zero());
    }

    #[test]
    fn eta_cp_c_zero_at_three_fifths() {
        let v = eta_cp_c(&ratio::<Rational>(3, 5));
        assert!(v.is_zero());
    }

    #[test]
    fn lambda_identity_holds_everywhere() {
        let pair = builtin("dopri").unwrap();
        let p = pair.as_rational().unwrap().clone();
        let (cp, cpp) = (p.cp(), p.cpp());
        let aux = aux_quantities(&p.c, &cp, &cpp);
        for m in 4..=7 {
            for kind in WEIGHT_KINDS {
                let expect = cpp[3].clone() * aux.gamma(m, kind).clone()
                    - cpp[m - 1].clone() * aux.gamma(4, kind).clone();
                assert_eq!(*aux.lambda(m, kind), expect);
            }
        }
    }
}
