//! The general construction of embedded (4,5) pairs from the six free
//! parameters `(c2, c3, c4, c5, c6, c'3)`, plus the specializations to the
//! five families A, A', B, B', C.
//!
//! For generic parameters the construction meets every fifth-order condition
//! except the four residual ones; choosing `c4` by [`c4_six_stage`] or setting
//! `c6 = 1` fixes three of them, and the family constraint on `c'3` (or on the
//! remaining node) fixes the last, `b . (c'*c') = 1/20`.

pub mod families;
pub mod matrices;
pub mod quantities;

pub use families::{
    construct_bprime_general, construct_family, BPrimeGeneralResult, BPrimeGeneralSpec, CRoot,
    Family,
};
pub use quantities::{aux_quantities, AuxQuantities, WeightKind};

use thiserror::Error;

use crate::scalar::{int, ratio, Scalar};
use crate::stage::{dot, zero_matrix, zeros, StageVec, STAGES};
use crate::tableau::ButcherPair;
use crate::trees::{elementary_weight, enumerate_trees};
use quantities::*;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeriveError {
    #[error("degenerate parameters: {factor} vanishes")]
    Degenerate { factor: &'static str },
    #[error("construction check failed: {0}")]
    ConstructionCheck(String),
    #[error("inconsistent pair: the order-4 difference system only admits d = 0")]
    InconsistentPair,
    #[error("no real solution: the type C discriminant is negative")]
    NoRealSolution,
    #[error("{what} is irrational at these parameters; use float mode")]
    IrrationalInExactMode { what: &'static str },
    #[error("bracket [{lo}, {hi}] does not enclose a sign change of the residual")]
    BracketNoSignChange { lo: f64, hi: f64 },
    #[error("root-finding failed: {0}")]
    RootFind(String),
}

/// The six free parameters of the general construction.
#[derive(Clone, Debug)]
pub struct GeneralParams<S: Scalar> {
    pub c2: S,
    pub c3: S,
    pub c4: S,
    pub c5: S,
    pub c6: S,
    pub cp3: S,
}

impl<S: Scalar> GeneralParams<S> {
    pub fn new(c2: S, c3: S, c4: S, c5: S, c6: S, cp3: S) -> Self {
        GeneralParams {
            c2,
            c3,
            c4,
            c5,
            c6,
            cp3,
        }
    }

    /// Node vector `[0, c2, .., c6, 1]`.
    pub fn nodes(&self) -> StageVec<S> {
        [
            S::zero(),
            self.c2.clone(),
            self.c3.clone(),
            self.c4.clone(),
            self.c5.clone(),
            self.c6.clone(),
            S::one(),
        ]
    }
}

/// Everything the back substitution needs beyond the nodes: `c'`, `c''`,
/// `c'''_5`, `c'''_6`, `a65`, and the trailing weights `b5`, `b6`.
#[derive(Clone, Debug)]
pub struct ExtendedNodes<S: Scalar> {
    pub cp: StageVec<S>,
    pub cpp: StageVec<S>,
    pub cppp5: S,
    pub cppp6: S,
    pub a65: S,
    pub b5: S,
    pub b6: S,
}

pub(crate) fn nonzero<S: Scalar>(x: &S, factor: &'static str) -> Result<(), DeriveError> {
    if x.is_zero() || !x.is_finite() {
        Err(DeriveError::Degenerate { factor })
    } else {
        Ok(())
    }
}

/// Solves `f(x) = 0` for an affine map given exactly two evaluations, with a
/// third-point affinity check in exact mode.
fn solve_affine<S: Scalar>(
    f: impl Fn(&S) -> S,
    equation: &'static str,
) -> Result<S, DeriveError> {
    let f0 = f(&S::zero());
    let f1 = f(&S::one());
    let slope = f1.clone() - f0.clone();
    nonzero(&slope, equation)?;
    if S::exact() {
        let f2 = f(&int::<S>(2));
        let check = f2 - (int::<S>(2) * f1 - f0.clone());
        if !check.is_zero() {
            return Err(DeriveError::ConstructionCheck(format!(
                "{equation}: expected an affine relation"
            )));
        }
    }
    Ok(-f0 / slope)
}

/// Runs the elimination: from the six parameters to the full extended node
/// data. `c'4`/`c''4` come from their closed forms, `c''5` and `c''6` from
/// one linear equation each, and `b5`, `b6`, `a65`, `c'''5`, `c'''6` from
/// closed forms (with the six-stage branch handled separately, where rows 3
/// and 4 of the construction matrix become proportional).
pub fn extended_nodes<S: Scalar>(params: &GeneralParams<S>) -> Result<ExtendedNodes<S>, DeriveError> {
    let GeneralParams {
        c2,
        c3,
        c4,
        c5,
        c6,
        cp3,
    } = params;
    nonzero(c2, "c2")?;
    nonzero(cp3, "c'3 (equivalently a32)")?;

    // closed forms for c'4, c''4
    let u = c3.clone() * c3.clone() - int::<S>(2) * cp3.clone();
    let v = c3.clone() - c2.clone();
    let d4 = c4.clone()
        * (int::<S>(2) * cp3.clone() * cp3.clone() * c2.clone()
            + c3.clone() * v.clone() * v.clone() * u.clone())
        - cp3.clone()
            * c2.clone()
            * c3.clone()
            * (int::<S>(2) * cp3.clone() - c3.clone() * v.clone());
    nonzero(&d4, "the c'4/c''4 denominator")?;
    let cp4 = cp3.clone()
        * c4.clone()
        * c4.clone()
        * (c4.clone() - c2.clone())
        * (c3.clone() * c3.clone() * v.clone()
            + cp3.clone() * (int::<S>(3) * c2.clone() - int::<S>(2) * c3.clone()))
        / d4.clone();
    let cpp4 = cp3.clone()
        * cp3.clone()
        * c2.clone()
        * c4.clone()
        * c4.clone()
        * (c4.clone() - c2.clone())
        * (c4.clone() - c3.clone())
        / d4;
    nonzero(&cpp4, "c''4 (equivalently a43)")?;

    // node identity: c'_m = (P(c_m) + Q c''_m) / R(c_m)
    let q_coef = int::<S>(3) * v.clone() * u.clone();
    let r_of = |cm: &S| {
        c3.clone() * c3.clone() * c3.clone() * (cm.clone() - c2.clone())
            - c2.clone() * (cm.clone() - c3.clone()) * u.clone()
    };
    let p_of = |cm: &S| cp3.clone() * c3.clone() * cm.clone() * cm.clone() * (cm.clone() - c2.clone());

    let eta_csq = eta_c_pow(cp3, c2, c3, 1);
    let eta_cpc_v = eta_cp_c(c3);
    let gamma4_csq = gamma_c_pow(cp3, c2, c3, c4, &cp4, 1);
    let gamma4_cquart = gamma_c_pow(cp3, c2, c3, c4, &cp4, 3);
    let gamma4_cpc = gamma_cp_c_pow(c3, c4, &cp4, 1);
    let m11 = gamma4_csq.clone() + int::<S>(5) * cpp4.clone() * eta_csq.clone();
    let m14 = gamma_a_csq(c2, c3, &cpp4) + int::<S>(5) * cpp4.clone() * eta_a_csq(cp3, c2);
    nonzero(&m11, "m11 = gamma_{4,c^2} + 5 c''4 eta_{c^2}")?;
    nonzero(&gamma4_csq, "gamma_{4,c^2}")?;

    // stage 5: c''5 from the linear equation q3 = 0
    let r5 = r_of(c5);
    nonzero(&r5, "the c'5 node-identity denominator")?;
    let p5 = p_of(c5);
    let cpp5 = solve_affine(
        |y: &S| {
            let cp5 = (p5.clone() + q_coef.clone() * y.clone()) / r5.clone();
            let g5_cpc = gamma_cp_c_pow(c3, c5, &cp5, 1);
            let g5_csq = gamma_c_pow(cp3, c2, c3, c5, &cp5, 1);
            cp3.clone()
                * c2.clone()
                * (g5_cpc + int::<S>(5) * y.clone() * eta_cpc_v.clone())
                * m11.clone()
                - c3.clone() * m14.clone() * (g5_csq + int::<S>(5) * y.clone() * eta_csq.clone())
        },
        "the q3 = 0 equation for c''5",
    )?;
    let cp5 = (p5 + q_coef.clone() * cpp5.clone()) / r5;

    // stage-5 aux values
    let g5_csq = gamma_c_pow(cp3, c2, c3, c5, &cp5, 1);
    let g5_cquart = gamma_c_pow(cp3, c2, c3, c5, &cp5, 3);
    let g5_cpc = gamma_cp_c_pow(c3, c5, &cp5, 1);
    let l5_csq = cpp4.clone() * g5_csq.clone() - cpp5.clone() * gamma4_csq.clone();
    let l5_cquart = cpp4.clone() * g5_cquart - cpp5.clone() * gamma4_cquart.clone();
    let l5_cpc = cpp4.clone() * g5_cpc - cpp5.clone() * gamma4_cpc.clone();
    nonzero(&l5_csq, "lambda_{5,c^2}")?;
    let mu4_csq = gamma4_csq.clone()
        + int::<S>(4)
            * cpp4.clone()
            * (c3.clone() * v.clone()
                + int::<S>(3) * cp3.clone() * (c2.clone() - ratio::<S>(2, 3)));
    let mu4_cquart = gamma4_cquart.clone()
        + int::<S>(4)
            * cpp4.clone()
            * (c3.clone() * (c3.clone() * c3.clone() * c3.clone() - c2.clone() * c2.clone() * c2.clone())
                + int::<S>(3)
                    * cp3.clone()
                    * (c2.clone() * c2.clone() * c2.clone() - ratio::<S>(2, 5)));
    let mu4_cpc =
        gamma4_cpc.clone() + int::<S>(4) * cpp4.clone() * (c3.clone() - ratio::<S>(3, 4));

    // stage 6: c''6 from the linear image of b . (c*c*c*c) = 1/5
    let r6 = r_of(c6);
    nonzero(&r6, "the c'6 node-identity denominator")?;
    let p6 = p_of(c6);
    let b6_numer = (mu4_csq.clone() * l5_cpc.clone() - mu4_cpc.clone() * l5_csq.clone())
        / int::<S>(24);
    let stage6 = |x: &S| {
        let cp6 = (p6.clone() + q_coef.clone() * x.clone()) / r6.clone();
        let g6_csq = gamma_c_pow(cp3, c2, c3, c6, &cp6, 1);
        let g6_cquart = gamma_c_pow(cp3, c2, c3, c6, &cp6, 3);
        let g6_cpc = gamma_cp_c_pow(c3, c6, &cp6, 1);
        let l6_csq = cpp4.clone() * g6_csq - x.clone() * gamma4_csq.clone();
        let l6_cquart = cpp4.clone() * g6_cquart - x.clone() * gamma4_cquart.clone();
        let l6_cpc = cpp4.clone() * g6_cpc - x.clone() * gamma4_cpc.clone();
        let delta = l5_csq.clone() * l6_cpc.clone() - l5_cpc.clone() * l6_csq.clone();
        let alpha = -(mu4_csq.clone() * l6_cpc - mu4_cpc.clone() * l6_csq.clone())
            / int::<S>(24);
        (alpha, delta, l6_csq, l6_cquart)
    };
    let cpp6 = solve_affine(
        |x: &S| {
            let (alpha, delta, _, l6_cquart) = stage6(x);
            alpha * l5_cquart.clone()
                + b6_numer.clone() * l6_cquart
                + delta * mu4_cquart.clone() / int::<S>(24)
        },
        "the quartic-condition equation for c''6",
    )?;
    let cp6 = (p6.clone() + q_coef.clone() * cpp6.clone()) / r6.clone();
    let (alpha, delta, l6_csq, _) = stage6(&cpp6);

    let six_stage = if S::exact() {
        delta.is_zero()
    } else {
        let scale = (l5_csq.to_f64() * l6_csq.to_f64()).abs().max(1e-300);
        (delta.to_f64() / scale).abs() < 1e-9
    };
    let cp = [
        S::zero(),
        S::zero(),
        cp3.clone(),
        cp4.clone(),
        cp5.clone(),
        cp6.clone(),
        ratio::<S>(1, 2),
    ];
    let cpp = [
        S::zero(),
        S::zero(),
        S::zero(),
        cpp4.clone(),
        cpp5.clone(),
        cpp6.clone(),
        ratio::<S>(1, 6),
    ];
    let (b5, b6) = if !six_stage {
        (alpha / delta.clone(), b6_numer / delta)
    } else {
        // rows 3, 4 of M are proportional; the remaining linear relation plus
        // the quartic condition itself pin b5 and b6
        let nodes4 = [
            S::zero(),
            c2.clone(),
            c3.clone(),
            c4.clone(),
            c5.clone(),
            c6.clone(),
        ];
        let quartic = |b5v: &S, b6v: &S| {
            let b4v = (ratio::<S>(1, 24) - b5v.clone() * cpp5.clone() - b6v.clone() * cpp6.clone())
                / cpp4.clone();
            let b3v = (ratio::<S>(1, 6)
                - b4v.clone() * cp4.clone()
                - b5v.clone() * cp5.clone()
                - b6v.clone() * cp6.clone())
                / cp3.clone();
            let b2v = (ratio::<S>(1, 2)
                - b3v.clone() * c3.clone()
                - b4v.clone() * c4.clone()
                - b5v.clone() * c5.clone()
                - b6v.clone() * c6.clone())
                / c2.clone();
            let b1v = S::one() - b2v.clone() - b3v.clone() - b4v.clone() - b5v.clone() - b6v.clone();
            let ws = [b1v, b2v, b3v, b4v, b5v.clone(), b6v.clone()];
            let mut acc = -ratio::<S>(1, 5);
            for (w, x) in ws.iter().zip(nodes4.iter()) {
                let x2 = x.clone() * x.clone();
                acc = acc + w.clone() * x2.clone() * x2;
            }
            acc
        };
        let q00 = quartic(&S::zero(), &S::zero());
        let q10 = quartic(&S::one(), &S::zero()) - q00.clone();
        let q01 = quartic(&S::zero(), &S::one()) - q00.clone();
        let det = l5_csq.clone() * q01.clone() - l6_csq.clone() * q10.clone();
        nonzero(&det, "the six-stage b5/b6 system determinant")?;
        let rhs = mu4_csq.clone() / int::<S>(24);
        let b5 = (l6_csq.clone() * q00.clone() - rhs.clone() * q01) / det.clone();
        let b6 = (rhs * q10 - l5_csq.clone() * q00) / det;
        (b5, b6)
    };
    nonzero(&b6, "b6")?;
    let cppp5 = l5_csq.clone() * m14 / (gamma4_csq * m11.clone());
    nonzero(&cppp5, "c'''5 (equivalently a54)")?;
    let a65 = -(m11 / (int::<S>(120) * b6.clone() * l5_csq));
    nonzero(&a65, "a65")?;
    let cppp6 = (ratio::<S>(1, 120) - b5.clone() * cppp5.clone()) / b6.clone();

    let nodes = ExtendedNodes {
        cp,
        cpp,
        cppp5,
        cppp6,
        a65,
        b5,
        b6,
    };
    check_construction(params, &nodes)?;
    Ok(nodes)
}

/// Postcondition: q1 = q3 = q4 = 0 on the transformed construction matrix.
fn check_construction<S: Scalar>(
    params: &GeneralParams<S>,
    nodes: &ExtendedNodes<S>,
) -> Result<(), DeriveError> {
    let c = params.nodes();
    let aux = aux_quantities(&c, &nodes.cp, &nodes.cpp);
    let m = matrices::construction_matrix(
        &aux,
        &nodes.cpp[3],
        &nodes.cppp5,
        &nodes.cppp6,
        &nodes.a65,
    );
    let t = matrices::transform_construction_matrix(&m, &params.c2, &params.c3, &nodes.cpp);
    let qs = matrices::q_values(&t, &params.c2, &params.c3, &params.cp3);
    for (i, q) in qs.iter().enumerate() {
        let row = [0usize, 2, 3][i];
        let scale = (params.cp3.to_f64() * params.c2.to_f64() * t[row][2].to_f64()).abs()
            + (params.c3.to_f64() * t[row][3].to_f64()).abs();
        let ok = if S::exact() {
            q.is_zero()
        } else {
            q.to_f64().abs() <= 1e-9 * scale.max(1e-30)
        };
        if !ok {
            return Err(DeriveError::ConstructionCheck(format!(
                "q{} = {:e} (must vanish)",
                [1, 3, 4][i],
                q.to_f64()
            )));
        }
    }
    Ok(())
}

/// Fills the coefficient matrix and weights from the extended node data. The
/// result carries zero difference weights; [`solve_d`] supplies them.
pub fn back_substitute<S: Scalar>(
    params: &GeneralParams<S>,
    nodes: &ExtendedNodes<S>,
) -> Result<ButcherPair<S>, DeriveError> {
    let c = params.nodes();
    let ExtendedNodes {
        cp,
        cpp,
        cppp5,
        cppp6,
        a65,
        b5,
        b6,
    } = nodes;
    let (c2, c3, c4, c5, c6) = (&c[1], &c[2], &c[3], &c[4], &c[5]);
    let (cp3, cp4, cp5, cp6) = (&cp[2], &cp[3], &cp[4], &cp[5]);
    let (cpp4, cpp5, cpp6) = (&cpp[3], &cpp[4], &cpp[5]);
    nonzero(c2, "c2")?;
    nonzero(cp3, "c'3")?;
    nonzero(cpp4, "c''4")?;

    let mut a = zero_matrix::<S>();
    a[1][0] = c2.clone();
    a[2][1] = cp3.clone() / c2.clone();
    a[2][0] = c3.clone() - a[2][1].clone();
    a[3][2] = cpp4.clone() / cp3.clone();
    a[3][1] = (cp4.clone() - a[3][2].clone() * c3.clone()) / c2.clone();
    a[3][0] = c4.clone() - a[3][1].clone() - a[3][2].clone();
    a[4][3] = cppp5.clone() / cpp4.clone();
    a[4][2] = (cpp5.clone() - a[4][3].clone() * cp4.clone()) / cp3.clone();
    a[4][1] = (cp5.clone() - a[4][2].clone() * c3.clone() - a[4][3].clone() * c4.clone())
        / c2.clone();
    a[4][0] = c5.clone() - a[4][1].clone() - a[4][2].clone() - a[4][3].clone();
    a[5][4] = a65.clone();
    a[5][3] = (cppp6.clone() - a65.clone() * cpp5.clone()) / cpp4.clone();
    a[5][2] = (cpp6.clone() - a[5][3].clone() * cp4.clone() - a65.clone() * cp5.clone())
        / cp3.clone();
    a[5][1] = (cp6.clone()
        - a[5][2].clone() * c3.clone()
        - a[5][3].clone() * c4.clone()
        - a65.clone() * c5.clone())
        / c2.clone();
    a[5][0] = c6.clone()
        - a[5][1].clone()
        - a[5][2].clone()
        - a[5][3].clone()
        - a[5][4].clone();

    let b4 = (ratio::<S>(1, 24) - b5.clone() * cpp5.clone() - b6.clone() * cpp6.clone())
        / cpp4.clone();
    let b3 = (ratio::<S>(1, 6)
        - b4.clone() * cp4.clone()
        - b5.clone() * cp5.clone()
        - b6.clone() * cp6.clone())
        / cp3.clone();
    let b2 = (ratio::<S>(1, 2)
        - b3.clone() * c3.clone()
        - b4.clone() * c4.clone()
        - b5.clone() * c5.clone()
        - b6.clone() * c6.clone())
        / c2.clone();
    let b1 = S::one() - b2.clone() - b3.clone() - b4.clone() - b5.clone() - b6.clone();
    let b = [b1, b2, b3, b4, b5.clone(), b6.clone(), S::zero()];
    for j in 0..STAGES {
        a[6][j] = b[j].clone();
    }
    Ok(ButcherPair {
        name: String::new(),
        family: String::new(),
        source: String::new(),
        c,
        a,
        b,
        d: zeros(),
        interpolant: None,
        fsal: true,
    })
}

/// How constrained the difference weights are.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DFreedom {
    Unique,
    /// Null space dimension above one; the returned vector is the canonical
    /// basis element of the reduced system.
    Extra { dimension: usize },
}

/// Difference weights: a nonzero null vector of the order-4 condition matrix,
/// normalized so the largest-magnitude component is 1 and the first nonzero
/// component is positive. Exact elimination in rational mode; the smallest
/// singular vector in float mode.
pub fn solve_d<S: Scalar>(pair: &ButcherPair<S>) -> Result<(StageVec<S>, DFreedom), DeriveError> {
    let table = enumerate_trees(4).expect("order 4 is in range");
    let rows: Vec<StageVec<S>> = table
        .entries()
        .iter()
        .map(|e| elementary_weight(&e.tree, &pair.a))
        .collect();
    let (vec, freedom) = if S::exact() {
        exact_null_vector(&rows)?
    } else {
        float_null_vector(&rows)?
    };
    Ok((normalize_d(vec), freedom))
}

fn normalize_d<S: Scalar>(mut d: StageVec<S>) -> StageVec<S> {
    let mut max_idx = 0;
    for j in 1..STAGES {
        if d[j].abs_cmp(&d[max_idx]) == std::cmp::Ordering::Greater {
            max_idx = j;
        }
    }
    let scale = d[max_idx].abs();
    if !scale.is_zero() {
        for x in d.iter_mut() {
            *x = x.clone() / scale.clone();
        }
    }
    if let Some(first) = d.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in d.iter_mut() {
                *x = -x.clone();
            }
        }
    }
    d
}

fn exact_null_vector<S: Scalar>(
    rows: &[StageVec<S>],
) -> Result<(StageVec<S>, DFreedom), DeriveError> {
    let nr = rows.len();
    let mut m: Vec<Vec<S>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..STAGES {
        let Some(p) = (r..nr).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() / pv.clone();
        }
        for i in 0..nr {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..STAGES {
                    let upd = m[r][j].clone();
                    m[i][j] = m[i][j].clone() - f.clone() * upd;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == nr {
            break;
        }
    }
    let free: Vec<usize> = (0..STAGES).filter(|c| !pivots.contains(c)).collect();
    if free.is_empty() {
        return Err(DeriveError::InconsistentPair);
    }
    let fc = free[0];
    let mut v = zeros::<S>();
    v[fc] = S::one();
    for (ri, &pc) in pivots.iter().enumerate() {
        v[pc] = -m[ri][fc].clone();
    }
    let freedom = if free.len() == 1 {
        DFreedom::Unique
    } else {
        DFreedom::Extra {
            dimension: free.len(),
        }
    };
    Ok((v, freedom))
}

fn float_null_vector<S: Scalar>(
    rows: &[StageVec<S>],
) -> Result<(StageVec<S>, DFreedom), DeriveError> {
    // Gram matrix in f64, Jacobi eigendecomposition, smallest eigenvector
    let rf: Vec<[f64; STAGES]> = rows
        .iter()
        .map(|r| std::array::from_fn(|j| r[j].to_f64()))
        .collect();
    let mut g = [[0.0f64; STAGES]; STAGES];
    for row in &rf {
        for i in 0..STAGES {
            for j in 0..STAGES {
                g[i][j] += row[i] * row[j];
            }
        }
    }
    let (evals, evecs) = jacobi_eigen(&mut g);
    let mut order: Vec<usize> = (0..STAGES).collect();
    order.sort_by(|&i, &j| evals[i].abs().partial_cmp(&evals[j].abs()).unwrap());
    let max_eval = evals[order[STAGES - 1]].abs().max(1e-300);
    if evals[order[0]].abs() > 1e-16 * max_eval {
        return Err(DeriveError::InconsistentPair);
    }
    let freedom = if evals[order[1]].abs() <= 1e-16 * max_eval {
        DFreedom::Extra { dimension: 2 }
    } else {
        DFreedom::Unique
    };
    let k = order[0];
    let v: StageVec<f64> = std::array::from_fn(|i| evecs[i][k]);
    // S is f64 here by construction; go through parse-free conversion
    let vs: StageVec<S> = std::array::from_fn(|i| {
        // to_f64 is identity for f64 mode; from_ratio cannot represent
        // arbitrary floats, so this path is only reachable when S = f64
        float_to_scalar::<S>(v[i])
    });
    Ok((vs, freedom))
}

fn float_to_scalar<S: Scalar>(x: f64) -> S {
    debug_assert!(!S::exact(), "float null vector requested in exact mode");
    // encode through a ratio of two i64 values scaled to preserve precision
    let scaled = (x * (1u64 << 60) as f64) as i64;
    S::from_ratio(scaled, 1i64 << 60)
}

/// Cyclic Jacobi eigendecomposition for small symmetric matrices.
/// Returns eigenvalues and the matrix of column eigenvectors.
fn jacobi_eigen(a: &mut [[f64; STAGES]; STAGES]) -> ([f64; STAGES], [[f64; STAGES]; STAGES]) {
    let mut v = [[0.0; STAGES]; STAGES];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..STAGES {
            for j in (i + 1)..STAGES {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-300 {
            break;
        }
        for p in 0..STAGES {
            for q in (p + 1)..STAGES {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..STAGES {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..STAGES {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..STAGES {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    (std::array::from_fn(|i| a[i][i]), v)
}

/// The unique `c4` making rows 3 and 4 of the untransformed construction
/// matrix proportional, which forces `d7 = 0`: effectively a pair of 6-stage
/// methods.
pub fn c4_six_stage<S: Scalar>(c2: &S, c3: &S, cp3: &S) -> Result<S, DeriveError> {
    let two = int::<S>(2);
    let num = cp3.clone()
        * c2.clone()
        * (two.clone() * cp3.clone() - c3.clone() * (c3.clone() - c2.clone()));
    let lhs = two.clone() * cp3.clone() * (S::one() - two.clone() * c2.clone())
        - c3.clone() * (c3.clone() - c2.clone());
    let den = lhs.clone() * lhs
        + int::<S>(4) * cp3.clone() * cp3.clone() * c2.clone() * c2.clone();
    nonzero(&den, "the six-stage c4 denominator")?;
    Ok(num / den)
}

/// The simplifying-assumption branch selector for the 6-stage families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbFamily {
    A,
    B,
}

/// `c'3` on the type A or type B branch (where `b . (c'*c') = 1/20` holds).
pub fn family_cp3<S: Scalar>(family: AbFamily, c2: &S, c3: &S) -> Result<S, DeriveError> {
    match family {
        AbFamily::A => Ok(c3.clone() * c3.clone() / int::<S>(2)),
        AbFamily::B => {
            let den = int::<S>(3) - int::<S>(12) * c2.clone()
                + int::<S>(10) * c2.clone() * c2.clone();
            nonzero(&den, "3 - 12 c2 + 10 c2^2")?;
            Ok(int::<S>(3)
                * (c3.clone() - c2.clone())
                * (c2.clone() + c3.clone() - int::<S>(4) * c2.clone() * c3.clone())
                / (int::<S>(2) * den))
        }
    }
}

/// Both roots of the type C condition, which is quadratic in `c'3` with
/// coefficients bilinear in `c5` and `c6`. Returns the `+` root first, an
/// empty list when the roots are complex.
pub fn type_c_roots<S: Scalar>(
    c2: &S,
    c3: &S,
    c5: &S,
    c6: &S,
) -> Result<Vec<S>, DeriveError> {
    let z = |a0: i64, a1: i64, a2: i64| {
        int::<S>(a0) - int::<S>(a1) * (c5.clone() + c6.clone())
            + int::<S>(a2) * c5.clone() * c6.clone()
    };
    let v = c3.clone() - c2.clone();
    let k0 = (int::<S>(3) * z(12, 15, 20) - int::<S>(3) * (c2.clone() + c3.clone()) * z(33, 40, 50)
        + int::<S>(2) * c2.clone() * c3.clone() * z(138, 165, 200))
        * c3.clone()
        * c3.clone()
        * v.clone()
        * v.clone();
    let k1 = ((int::<S>(12) + int::<S>(50) * c2.clone() * c2.clone())
        * (z(12, 15, 20) - c3.clone() * z(33, 40, 50))
        - int::<S>(3) * c2.clone() * z(207, 260, 350)
        + int::<S>(2) * c2.clone() * c3.clone() * z(852, 1035, 1300))
        * c3.clone()
        * v;
    let k2 = (int::<S>(2) + int::<S>(10) * c2.clone() * c3.clone()) * z(12, 15, 20)
        - int::<S>(15) * c2.clone() * z(3, 4, 6)
        - int::<S>(2) * c3.clone() * z(33, 40, 50);
    let k2 = k2
        * int::<S>(2)
        * (int::<S>(3) - int::<S>(12) * c2.clone() + int::<S>(10) * c2.clone() * c2.clone());
    if k2.is_zero() {
        nonzero(&k1, "the type C quadratic (both leading coefficients)")?;
        return Ok(vec![k0 / k1]);
    }
    let disc = k1.clone() * k1.clone() - int::<S>(4) * k2.clone() * k0;
    if disc.is_negative() {
        return Ok(vec![]);
    }
    let root = disc
        .try_sqrt()
        .ok_or(DeriveError::IrrationalInExactMode {
            what: "the type C discriminant square root",
        })?;
    let two_k2 = int::<S>(2) * k2;
    Ok(vec![
        (k1.clone() + root.clone()) / two_k2.clone(),
        (k1 - root) / two_k2,
    ])
}

/// Convenience: general construction straight to a pair with difference
/// weights solved and normalized.
pub fn construct_general<S: Scalar>(
    params: &GeneralParams<S>,
) -> Result<ButcherPair<S>, DeriveError> {
    let nodes = extended_nodes(params)?;
    let mut pair = back_substitute(params, &nodes)?;
    let (d, _) = solve_d(&pair)?;
    pair.d = d;
    Ok(pair)
}

/// Residual of `b . (c'*c') - 1/20`, the one fifth-order condition the
/// general construction leaves open.
pub fn cp_sq_residual<S: Scalar>(pair: &ButcherPair<S>) -> S {
    let cp = pair.cp();
    let cpcp: StageVec<S> = std::array::from_fn(|i| cp[i].clone() * cp[i].clone());
    dot(&pair.b, &cpcp) - ratio::<S>(1, 20)
}
