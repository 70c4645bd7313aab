//! The five families of embedded pairs. Types A and B (6-stage, with the
//! four-parameter freedom `(c2, c3, c5, c6)`) use their printed closed forms;
//! type C and the FSAL-side families A' and B' run through the general
//! construction. The general type B' constraint is not available in closed
//! form, so it is solved numerically as the root of `b.(c'*c') - 1/20 = 0`
//! over one designated parameter.

use crate::derive::{
    back_substitute, c4_six_stage, construct_general, cp_sq_residual, extended_nodes, family_cp3,
    nonzero, solve_d, AbFamily, DeriveError, ExtendedNodes, GeneralParams,
};
use crate::scalar::{int, ratio, Scalar};
use crate::tableau::ButcherPair;

/// Which root of the type C quadratic to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CRoot {
    Plus,
    Minus,
}

/// Family specification with the free parameters of each branch.
#[derive(Clone, Debug)]
pub enum Family<S: Scalar> {
    A {
        c2: S,
        c3: S,
        c5: S,
        c6: S,
    },
    APrime {
        c2: S,
        c3: S,
        c4: S,
        c5: S,
    },
    B {
        c2: S,
        c3: S,
        c5: S,
        c6: S,
    },
    C {
        c2: S,
        c3: S,
        c5: S,
        c6: S,
        root: CRoot,
    },
    BPrimeC3Zero {
        c2: S,
        c4: S,
        c5: S,
    },
    /// `c'3` is a free shape parameter of this slice (no order condition
    /// constrains it); `None` picks `c2 * c5`, the choice of the reference
    /// tableau.
    BPrimeC3EqC2 {
        c2: S,
        c5: S,
        cp3: Option<S>,
    },
}

impl<S: Scalar> Family<S> {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::A { .. } => "A",
            Family::APrime { .. } => "Aprime",
            Family::B { .. } => "B",
            Family::C { .. } => "C",
            Family::BPrimeC3Zero { .. } => "Bprime-c3-0",
            Family::BPrimeC3EqC2 { .. } => "Bprime-c3-c2",
        }
    }
}

/// Builds a fully validated pair of the requested family: all 17 fifth-order
/// weight conditions and 8 fourth-order difference conditions hold (exactly
/// in rational mode, to 1e-12 in float mode), and the difference weights come
/// from [`solve_d`]'s normalization.
pub fn construct_family<S: Scalar>(spec: &Family<S>) -> Result<ButcherPair<S>, DeriveError> {
    let mut pair = match spec {
        Family::A { c2, c3, c5, c6 } => appendix_a(c2, c3, c5, c6)?,
        Family::B { c2, c3, c5, c6 } => appendix_b(c2, c3, c5, c6)?,
        Family::APrime { c2, c3, c4, c5 } => {
            let cp3 = family_cp3(AbFamily::A, c2, c3)?;
            let params = GeneralParams::new(
                c2.clone(),
                c3.clone(),
                c4.clone(),
                c5.clone(),
                S::one(),
                cp3,
            );
            construct_general(&params)?
        }
        Family::C {
            c2,
            c3,
            c5,
            c6,
            root,
        } => {
            let roots = crate::derive::type_c_roots(c2, c3, c5, c6)?;
            if roots.is_empty() {
                return Err(DeriveError::NoRealSolution);
            }
            let cp3 = match root {
                CRoot::Plus => roots[0].clone(),
                CRoot::Minus => roots.last().unwrap().clone(),
            };
            let c4 = c4_six_stage(c2, c3, &cp3)?;
            let params =
                GeneralParams::new(c2.clone(), c3.clone(), c4, c5.clone(), c6.clone(), cp3);
            construct_general(&params)?
        }
        Family::BPrimeC3Zero { c2, c4, c5 } => appendix_c3_zero(c2, c4, c5)?,
        Family::BPrimeC3EqC2 { c2, c5, cp3 } => {
            let cp3 = cp3
                .clone()
                .unwrap_or_else(|| c2.clone() * c5.clone());
            appendix_c3_eq_c2(c2, c5, &cp3)?
        }
    };
    let (d, _) = solve_d(&pair)?;
    pair.d = d;
    pair.family = spec.tag().to_string();
    pair.name = format!("derived-{}", spec.tag());
    pair.source = "derived".to_string();
    check_pair_conditions(&pair)?;
    Ok(pair)
}

/// Full order-condition check used as the families' exit gate.
pub(crate) fn check_pair_conditions<S: Scalar>(pair: &ButcherPair<S>) -> Result<(), DeriveError> {
    let report = crate::analyze::residuals(pair, 5).expect("order 5 in range");
    let bad = report.worst_abs_residual();
    let ok = if S::exact() {
        report.satisfied_through(5, 4)
    } else {
        bad < 1e-12
    };
    if !ok {
        return Err(DeriveError::ConstructionCheck(format!(
            "order conditions violated; worst residual {bad:e}"
        )));
    }
    Ok(())
}

fn assemble<S: Scalar>(
    params: &GeneralParams<S>,
    nodes: &ExtendedNodes<S>,
) -> Result<ButcherPair<S>, DeriveError> {
    back_substitute(params, nodes)
}

/// Formulas for pairs of type A (six-stage, simplifying assumption).
fn appendix_a<S: Scalar>(c2: &S, c3: &S, c5: &S, c6: &S) -> Result<ButcherPair<S>, DeriveError> {
    let one = S::one();
    let two = int::<S>(2);
    let quad = one.clone() - int::<S>(4) * c3.clone() + int::<S>(5) * c3.clone() * c3.clone();
    nonzero(&quad, "1 - 4 c3 + 5 c3^2")?;
    let c4 = c3.clone() / (two.clone() * quad.clone());
    let den = int::<S>(3) - int::<S>(12) * c3.clone() + int::<S>(10) * c3.clone() * c3.clone();
    nonzero(&den, "3 - 12 c3 + 10 c3^2")?;
    let cs = [
        S::zero(),
        c2.clone(),
        c3.clone(),
        c4.clone(),
        c5.clone(),
        c6.clone(),
        one.clone(),
    ];
    let half = ratio::<S>(1, 2);
    let cp: [S; 7] = std::array::from_fn(|i| match i {
        0 | 1 => S::zero(),
        6 => half.clone(),
        _ => cs[i].clone() * cs[i].clone() / two.clone(),
    });
    let cpp_of = |cm: &S| {
        cm.clone()
            * (cm.clone() - c3.clone())
            * (c3.clone() + cm.clone() - int::<S>(4) * c3.clone() * cm.clone())
            / (two.clone() * den.clone())
    };
    let cpp = [
        S::zero(),
        S::zero(),
        S::zero(),
        cpp_of(&c4),
        cpp_of(c5),
        cpp_of(c6),
        ratio::<S>(1, 6),
    ];
    let cppp5 = c3.clone()
        * c5.clone()
        * (c5.clone() - c3.clone())
        * (c5.clone() - c4.clone())
        / (int::<S>(4) * den.clone());
    nonzero(&cppp5, "c'''5")?;
    let g = int::<S>(8) * c3.clone() - int::<S>(15) * c3.clone() * c3.clone()
        - int::<S>(4) * c5.clone() * quad.clone()
        + two.clone()
            * c6.clone()
            * (two.clone() - int::<S>(13) * c3.clone()
                + int::<S>(20) * c3.clone() * c3.clone());
    let g_den = int::<S>(8) - int::<S>(15) * c3.clone() - int::<S>(10) * c5.clone()
        + int::<S>(20) * c3.clone() * c5.clone();
    nonzero(&g_den, "8 - 15 c3 - 10 c5 + 20 c3 c5")?;
    let cppp6 = g.clone()
        * c6.clone()
        * (c6.clone() - c3.clone())
        * (c6.clone() - c4.clone())
        / (int::<S>(4) * den.clone() * g_den);
    nonzero(&cppp6, "c'''6 (g or a node difference vanishes)")?;
    let k6 = c4.clone() * (two.clone() - int::<S>(5) * c3.clone()) / int::<S>(240);
    let c6_minus_c5 = c6.clone() - c5.clone();
    nonzero(&c6_minus_c5, "c6 - c5")?;
    let b6_cppp6 = g / (int::<S>(480) * c6_minus_c5 * quad);
    let b6 = b6_cppp6.clone() / cppp6.clone();
    nonzero(&b6, "b6")?;
    let b5 = (ratio::<S>(1, 120) - b6_cppp6) / cppp5.clone();
    let a65 = k6 / (b6.clone() * cppp5.clone());
    nonzero(&a65, "a65")?;
    let params = GeneralParams::new(
        c2.clone(),
        c3.clone(),
        c4,
        c5.clone(),
        c6.clone(),
        cp[2].clone(),
    );
    assemble(
        &params,
        &ExtendedNodes {
            cp,
            cpp,
            cppp5,
            cppp6,
            a65,
            b5,
            b6,
        },
    )
}

/// Formulas for pairs of type B (six-stage, no simplifying assumption).
fn appendix_b<S: Scalar>(c2: &S, c3: &S, c5: &S, c6: &S) -> Result<ButcherPair<S>, DeriveError> {
    let two = int::<S>(2);
    let d2 = int::<S>(3) - int::<S>(12) * c2.clone() + int::<S>(10) * c2.clone() * c2.clone();
    let d3 = int::<S>(3) - int::<S>(12) * c3.clone() + int::<S>(10) * c3.clone() * c3.clone();
    nonzero(&d2, "3 - 12 c2 + 10 c2^2")?;
    nonzero(&d3, "3 - 12 c3 + 10 c3^2")?;
    let s = c2.clone() + c3.clone() - int::<S>(4) * c2.clone() * c3.clone();
    let g = d2.clone() * d3.clone() + int::<S>(15) * s.clone() * s.clone();
    nonzero(&g, "g")?;
    let c4 = int::<S>(3)
        * (int::<S>(3) - int::<S>(10) * c2.clone() * c3.clone())
        * s.clone()
        / (two.clone() * g.clone());
    let cs = [
        S::zero(),
        c2.clone(),
        c3.clone(),
        c4.clone(),
        c5.clone(),
        c6.clone(),
        S::one(),
    ];
    let cp_of = |cm: &S| {
        int::<S>(3)
            * (cm.clone() - c2.clone())
            * (c2.clone() + cm.clone() - int::<S>(4) * c2.clone() * cm.clone())
            / (two.clone() * d2.clone())
    };
    let cp = [
        S::zero(),
        S::zero(),
        cp_of(c3),
        cp_of(&c4),
        cp_of(c5),
        cp_of(c6),
        ratio::<S>(1, 2),
    ];
    nonzero(&cp[2], "c'3 (type B formula)")?;
    let h_of = |cm: &S| {
        int::<S>(3) * c2.clone() + int::<S>(3) * c3.clone() + int::<S>(3) * cm.clone()
            - int::<S>(12) * c2.clone() * c3.clone()
            - int::<S>(12) * c2.clone() * cm.clone()
            - int::<S>(12) * c3.clone() * cm.clone()
            + int::<S>(38) * c2.clone() * c3.clone() * cm.clone()
    };
    let cpp_of = |cm: &S| {
        (cm.clone() - c2.clone()) * (cm.clone() - c3.clone()) * h_of(cm)
            / (two.clone() * d2.clone() * d3.clone())
    };
    let cpp = [
        S::zero(),
        S::zero(),
        S::zero(),
        cpp_of(&c4),
        cpp_of(c5),
        cpp_of(c6),
        ratio::<S>(1, 6),
    ];
    let cppp5 = int::<S>(3)
        * (c5.clone() - c2.clone())
        * (c5.clone() - c3.clone())
        * (c5.clone() - c4.clone())
        * s.clone()
        / (int::<S>(4) * d2.clone() * d3.clone());
    nonzero(&cppp5, "c'''5")?;
    let base = int::<S>(24) - int::<S>(45) * c2.clone() - int::<S>(45) * c3.clone()
        + int::<S>(100) * c2.clone() * c3.clone();
    let p = base.clone()
        - int::<S>(10)
            * (int::<S>(3) - int::<S>(6) * c2.clone() - int::<S>(6) * c3.clone()
                + int::<S>(14) * c2.clone() * c3.clone())
            * c5.clone();
    nonzero(&p, "p")?;
    let q = int::<S>(3) * s.clone() * base
        - (int::<S>(4) * d2.clone() * d3.clone() + int::<S>(60) * s.clone() * s.clone())
            * c5.clone()
        + (int::<S>(4) * d2.clone() * d3.clone()
            - int::<S>(30)
                * s.clone()
                * (int::<S>(3) - int::<S>(8) * c2.clone() - int::<S>(8) * c3.clone()
                    + int::<S>(22) * c2.clone() * c3.clone()))
            * c6.clone();
    let cppp6 = (c6.clone() - c2.clone())
        * (c6.clone() - c3.clone())
        * (c6.clone() - c4.clone())
        * q.clone()
        / (int::<S>(4) * d2.clone() * d3.clone() * p);
    nonzero(&cppp6, "c'''6 (q or a node difference vanishes)")?;
    let k6 = s.clone()
        * (int::<S>(6) - int::<S>(15) * c2.clone() - int::<S>(15) * c3.clone()
            + int::<S>(40) * c2.clone() * c3.clone())
        / (int::<S>(160) * g.clone());
    let c6_minus_c5 = c6.clone() - c5.clone();
    nonzero(&c6_minus_c5, "c6 - c5")?;
    let b6_cppp6 = q / (int::<S>(480) * c6_minus_c5 * g);
    let b6 = b6_cppp6.clone() / cppp6.clone();
    nonzero(&b6, "b6")?;
    let b5 = (ratio::<S>(1, 120) - b6_cppp6) / cppp5.clone();
    let a65 = k6 / (b6.clone() * cppp5.clone());
    nonzero(&a65, "a65")?;
    let params = GeneralParams::new(
        c2.clone(),
        c3.clone(),
        cs[3].clone(),
        c5.clone(),
        c6.clone(),
        cp[2].clone(),
    );
    assemble(
        &params,
        &ExtendedNodes {
            cp,
            cpp,
            cppp5,
            cppp6,
            a65,
            b5,
            b6,
        },
    )
}

/// Alternating-sign coefficient table of the type B' (c3 = 0) `g` polynomial:
/// `alpha[n][2l + m]` for `n = 0..=2`, `l = 0..=3`, `m = 0..=1`.
const C3_ZERO_ALPHA: [[i64; 8]; 3] = [
    [144, 180, 180, 228, 72, 93, 9, 12],
    [360, 940, 512, 940, 222, 366, 30, 48],
    [200, 1100, 340, 960, 162, 360, 24, 48],
];

fn c3_zero_pq<S: Scalar>(c2: &S, c4: &S, c5: &S) -> (S, S) {
    let p = int::<S>(3) - int::<S>(5) * c2.clone() - int::<S>(5) * c4.clone()
        + int::<S>(10) * c2.clone() * c4.clone();
    let q = int::<S>(12)
        - int::<S>(15) * c2.clone()
        - int::<S>(15) * c4.clone()
        - int::<S>(15) * c5.clone()
        + int::<S>(20) * c2.clone() * c4.clone()
        + int::<S>(20) * c2.clone() * c5.clone()
        + int::<S>(20) * c4.clone() * c5.clone()
        - int::<S>(30) * c2.clone() * c4.clone() * c5.clone();
    (p, q)
}

fn c3_zero_cppp<S: Scalar>(c2: &S, c4: &S, c5: &S, p: &S, q: &S) -> (S, S, S) {
    let cppp5 = c4.clone()
        * c5.clone()
        * (c5.clone() - c2.clone())
        * (c5.clone() - c4.clone())
        * (int::<S>(2) - int::<S>(5) * c2.clone())
        / (int::<S>(4) * p.clone());
    let cppp6 = (S::one() - c2.clone())
        * (S::one() - c4.clone())
        * (int::<S>(2) - int::<S>(2) * c4.clone() - int::<S>(2) * c5.clone()
            + int::<S>(5) * c2.clone() * c4.clone())
        / (int::<S>(4) * q.clone());
    let k6 = c4.clone() * (int::<S>(2) - int::<S>(5) * c2.clone()) / int::<S>(240);
    (cppp5, cppp6, k6)
}

/// Formulas for pairs of type B' with c3 = 0.
fn appendix_c3_zero<S: Scalar>(c2: &S, c4: &S, c5: &S) -> Result<ButcherPair<S>, DeriveError> {
    let (p, q) = c3_zero_pq(c2, c4, c5);
    nonzero(&p, "p")?;
    nonzero(&q, "q")?;
    let mut sum = S::zero();
    let five_c2 = int::<S>(5) * c2.clone();
    for (n, row) in C3_ZERO_ALPHA.iter().enumerate() {
        for l in 0..4usize {
            for m in 0..2usize {
                let sign = if (l + m + n) % 2 == 0 { 1 } else { -1 };
                let mut term = int::<S>(sign * row[2 * l + m]);
                for _ in 0..l {
                    term = term * five_c2.clone();
                }
                for _ in 0..m {
                    term = term * c4.clone();
                }
                for _ in 0..n {
                    term = term * c5.clone();
                }
                sum = sum + term;
            }
        }
    }
    let g = int::<S>(5)
        * (c2.clone() * c2.clone() + int::<S>(4) * c4.clone() * c4.clone())
        * c5.clone()
        * (int::<S>(3) - int::<S>(5) * c5.clone())
        - c2.clone() * c4.clone() * sum;
    let lin = int::<S>(6) - int::<S>(15) * c2.clone() - int::<S>(10) * c5.clone()
        + int::<S>(30) * c2.clone() * c5.clone();
    nonzero(&lin, "6 - 15 c2 - 10 c5 + 30 c2 c5")?;
    let cp3 = int::<S>(3) * g / (int::<S>(2) * lin * p.clone() * q.clone());
    nonzero(&cp3, "c'3 (g vanishes)")?;
    let cp4 = int::<S>(3) * c4.clone() * (c4.clone() - c2.clone()) / int::<S>(2);
    let cp5 = int::<S>(3)
        * (c5.clone() - c2.clone())
        * (c5.clone()
            + c4.clone()
                * (int::<S>(2) - int::<S>(5) * c2.clone() - int::<S>(5) * c5.clone()
                    + int::<S>(10) * c2.clone() * c5.clone()))
        / (int::<S>(2) * p.clone());
    let cp6 = int::<S>(3)
        * (S::one() - c2.clone())
        * (int::<S>(4) - int::<S>(7) * c4.clone() - int::<S>(5) * c5.clone()
            + int::<S>(5) * c2.clone() * c4.clone()
            + int::<S>(10) * (S::one() - c2.clone()) * c4.clone() * c5.clone())
        / (int::<S>(2) * q.clone());
    let third = ratio::<S>(1, 3);
    let cpp = [
        S::zero(),
        S::zero(),
        S::zero(),
        cp4.clone() * c4.clone() * third.clone(),
        cp5.clone() * c5.clone() * third.clone(),
        cp6.clone() * third,
        ratio::<S>(1, 6),
    ];
    let (cppp5, cppp6, k6) = c3_zero_cppp(c2, c4, c5, &p, &q);
    nonzero(&cppp5, "c'''5")?;
    nonzero(&cppp6, "c'''6")?;
    let one_minus_c5 = S::one() - c5.clone();
    nonzero(&one_minus_c5, "1 - c5")?;
    let b6_cppp6 = (int::<S>(2) - int::<S>(2) * c4.clone() - int::<S>(2) * c5.clone()
        + int::<S>(5) * c2.clone() * c4.clone())
        / (int::<S>(240) * one_minus_c5);
    let b6 = b6_cppp6.clone() / cppp6.clone();
    nonzero(&b6, "b6")?;
    let b5 = (ratio::<S>(1, 120) - b6_cppp6) / cppp5.clone();
    let a65 = k6 / (b6.clone() * cppp5.clone());
    nonzero(&a65, "a65")?;
    let cp = [
        S::zero(),
        S::zero(),
        cp3.clone(),
        cp4,
        cp5,
        cp6,
        ratio::<S>(1, 2),
    ];
    let params = GeneralParams::new(
        c2.clone(),
        S::zero(),
        c4.clone(),
        c5.clone(),
        S::one(),
        cp3,
    );
    assemble(
        &params,
        &ExtendedNodes {
            cp,
            cpp,
            cppp5,
            cppp6,
            a65,
            b5,
            b6,
        },
    )
}

/// Formulas for pairs of type B' with c3 = c2. The whole weight vector
/// depends on c5 only; c'3 is a free shape parameter.
fn appendix_c3_eq_c2<S: Scalar>(c2: &S, c5: &S, cp3: &S) -> Result<ButcherPair<S>, DeriveError> {
    nonzero(cp3, "c'3")?;
    let two = int::<S>(2);
    let one_minus_2c5 = S::one() - two.clone() * c5.clone();
    nonzero(&one_minus_2c5, "1 - 2 c5")?;
    let c4 = (int::<S>(3) - int::<S>(5) * c5.clone()) / (int::<S>(5) * one_minus_2c5);
    let (p, q) = c3_zero_pq(c2, &c4, c5);
    nonzero(&p, "p")?;
    nonzero(&q, "q")?;
    let cp = [
        S::zero(),
        S::zero(),
        cp3.clone(),
        c4.clone() * c4.clone() / two.clone(),
        c5.clone() * c5.clone() / two.clone(),
        ratio::<S>(1, 2),
        ratio::<S>(1, 2),
    ];
    let cpp5 = c5.clone()
        * (c5.clone() - c2.clone())
        * (c5.clone()
            + c4.clone()
                * (two.clone() - int::<S>(5) * c2.clone() - int::<S>(5) * c5.clone()
                    + int::<S>(10) * c2.clone() * c5.clone()))
        / (two.clone() * p.clone());
    let cpp6 = (S::one() - c2.clone())
        * (int::<S>(4) - int::<S>(7) * c4.clone() - int::<S>(5) * c5.clone()
            + int::<S>(5) * c2.clone() * c4.clone()
            + int::<S>(10) * (S::one() - c2.clone()) * c4.clone() * c5.clone())
        / (two.clone() * q.clone());
    let cpp = [
        S::zero(),
        S::zero(),
        S::zero(),
        c4.clone() * c4.clone() * (c4.clone() - c2.clone()) / two.clone(),
        cpp5,
        cpp6,
        ratio::<S>(1, 6),
    ];
    let (cppp5, cppp6, k6) = c3_zero_cppp(c2, &c4, c5, &p, &q);
    nonzero(&cppp5, "c'''5")?;
    nonzero(&cppp6, "c'''6")?;
    let small_quad = int::<S>(3) - int::<S>(10) * c5.clone()
        + int::<S>(10) * c5.clone() * c5.clone();
    let one_minus_c5 = S::one() - c5.clone();
    let five_c5_minus_2 = int::<S>(5) * c5.clone() - two.clone();
    nonzero(&small_quad, "3 - 10 c5 + 10 c5^2")?;
    nonzero(&one_minus_c5, "1 - c5")?;
    nonzero(&five_c5_minus_2, "5 c5 - 2")?;
    nonzero(c5, "c5")?;
    let b5 = S::one()
        / (int::<S>(12) * c5.clone() * one_minus_c5.clone() * small_quad);
    let b6 = -(int::<S>(3) - int::<S>(12) * c5.clone() + int::<S>(10) * c5.clone() * c5.clone())
        / (int::<S>(12) * one_minus_c5 * five_c5_minus_2);
    nonzero(&b6, "b6")?;
    let a65 = k6 / (b6.clone() * cppp5.clone());
    nonzero(&a65, "a65")?;
    let params = GeneralParams::new(
        c2.clone(),
        c2.clone(),
        c4,
        c5.clone(),
        S::one(),
        cp3.clone(),
    );
    assemble(
        &params,
        &ExtendedNodes {
            cp,
            cpp,
            cppp5,
            cppp6,
            a65,
            b5,
            b6,
        },
    )
}

/// General type B' derivation: fix `(c2, c3, c4, c'3)`, set `c6 = 1`, and
/// solve `b.(c'*c') - 1/20 = 0` for `c5` inside a caller-supplied bracket.
/// Float-only: the solved node is irrational in general.
#[derive(Clone, Debug)]
pub struct BPrimeGeneralSpec {
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub cp3: f64,
    /// `c5` bracket containing the wanted root (and no pole of the residual).
    pub bracket: (f64, f64),
}

#[derive(Clone, Debug)]
pub struct BPrimeGeneralResult {
    pub pair: ButcherPair<f64>,
    pub c5: f64,
    pub residual: f64,
}

/// Residual tolerance accepted by the general B' root-finder.
pub const BPRIME_RESIDUAL_TOL: f64 = 1e-14;

pub fn construct_bprime_general(
    spec: &BPrimeGeneralSpec,
) -> Result<BPrimeGeneralResult, DeriveError> {
    let params_at = |c5: f64| GeneralParams::new(spec.c2, spec.c3, spec.c4, c5, 1.0, spec.cp3);
    let residual_at = |c5: f64| -> Result<f64, DeriveError> {
        let params = params_at(c5);
        let nodes = extended_nodes(&params)?;
        let pair = back_substitute(&params, &nodes)?;
        Ok(cp_sq_residual(&pair))
    };
    let (lo, hi) = spec.bracket;
    if !(hi > lo) {
        return Err(DeriveError::RootFind(format!(
            "empty bracket [{lo}, {hi}]"
        )));
    }
    let flo = residual_at(lo)?;
    let fhi = residual_at(hi)?;
    if flo == 0.0 || fhi == 0.0 {
        let c5 = if flo == 0.0 { lo } else { hi };
        return finish_bprime(spec, c5, 0.0, &params_at);
    }
    if flo.signum() == fhi.signum() {
        return Err(DeriveError::BracketNoSignChange { lo, hi });
    }
    // bisection to a tight interval, then a few secant steps to polish
    let (mut lo, mut hi, mut flo) = (lo, hi, flo);
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = residual_at(mid)?;
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let mut x0 = lo;
    let mut x1 = hi;
    let mut f0 = residual_at(x0)?;
    let mut f1 = residual_at(x1)?;
    for _ in 0..4 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !x2.is_finite() {
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = residual_at(x1)?;
        if f1 == 0.0 {
            break;
        }
    }
    let (c5, residual) = if f1.abs() <= f0.abs() { (x1, f1) } else { (x0, f0) };
    if residual.abs() > BPRIME_RESIDUAL_TOL {
        return Err(DeriveError::RootFind(format!(
            "residual {residual:e} above tolerance {BPRIME_RESIDUAL_TOL:e} at c5 = {c5} \
             (the bracket may enclose a pole rather than a root)"
        )));
    }
    finish_bprime(spec, c5, residual, &params_at)
}

fn finish_bprime(
    spec: &BPrimeGeneralSpec,
    c5: f64,
    residual: f64,
    params_at: &impl Fn(f64) -> GeneralParams<f64>,
) -> Result<BPrimeGeneralResult, DeriveError> {
    let params = params_at(c5);
    let mut pair = construct_general(&params)?;
    pair.family = "Bprime".to_string();
    pair.name = format!(
        "derived-Bprime(c2={}, c3={}, c4={}, c'3={})",
        spec.c2, spec.c3, spec.c4, spec.cp3
    );
    pair.source = "derived".to_string();
    check_pair_conditions(&pair)?;
    Ok(BPrimeGeneralResult {
        pair,
        c5,
        residual,
    })
}
