//! The 5x4 construction matrix of the difference-weight system and the 12x2
//! rank-one matrix carrying the residual fifth-order conditions.

use crate::derive::quantities::{AuxQuantities, WeightKind};
use crate::scalar::{int, ratio, Scalar};
use crate::stage::StageVec;

pub type ConstructionMatrix<S> = [[S; 4]; 5];
pub type RankMatrix<S> = [[S; 2]; 12];

/// Untransformed construction matrix `M`. Rows pair with the weight vectors
/// `[1/120, 0, b6 a65, 0, 0]`, `[0, 1/24, b5, b6, 0]`, `[0, 0, d5, d6, d7]`,
/// all of which annihilate it for a valid pair.
pub fn construction_matrix<S: Scalar>(
    aux: &AuxQuantities<S>,
    cpp4: &S,
    cppp5: &S,
    cppp6: &S,
    a65: &S,
) -> ConstructionMatrix<S> {
    use WeightKind::*;
    let g4 = |k: WeightKind| aux.gamma(4, k).clone();
    let row1 = |k: WeightKind, eta: &S| g4(k) + int::<S>(5) * cpp4.clone() * eta.clone();
    [
        [
            row1(CSq, &aux.eta_csq),
            row1(CCube, &aux.eta_ccube),
            row1(CpC, &aux.eta_cpc),
            aux.gamma_a_csq.clone() + int::<S>(5) * cpp4.clone() * aux.eta_a_csq.clone(),
        ],
        [
            aux.mu(4, CSq).clone(),
            aux.mu(4, CCube).clone(),
            aux.mu(4, CpC).clone(),
            cpp4.clone() * aux.eta_csq.clone(),
        ],
        [
            aux.lambda(5, CSq).clone(),
            aux.lambda(5, CCube).clone(),
            aux.lambda(5, CpC).clone(),
            cppp5.clone() * g4(CSq),
        ],
        [
            aux.lambda(6, CSq).clone(),
            aux.lambda(6, CCube).clone(),
            aux.lambda(6, CpC).clone(),
            cppp6.clone() * g4(CSq) + a65.clone() * aux.lambda(5, CSq).clone(),
        ],
        [
            aux.lambda(7, CSq).clone(),
            aux.lambda(7, CCube).clone(),
            aux.lambda(7, CpC).clone(),
            (g4(CSq) - aux.mu(4, CSq).clone()) / int::<S>(24),
        ],
    ]
}

/// The elementary row and column operations bringing `M` to the form whose
/// second row is `[c3(c3-c2), 2 c2 c'3, c3, c'3 c2]` and fifth row
/// `[c'3, -c3 c'3, 0, 0]`. The operation order matters. (The second column
/// carries a benign overall factor of `c'3`; every rank statement and the
/// `q_i` combinations are insensitive to column scaling.)
pub fn transform_construction_matrix<S: Scalar>(
    m: &ConstructionMatrix<S>,
    c2: &S,
    c3: &S,
    cpp: &StageVec<S>,
) -> ConstructionMatrix<S> {
    let cpp4 = &cpp[3];
    let mut m = m.clone();
    for i in 0..5 {
        m[i][1] = m[i][1].clone() - (c2.clone() + c3.clone()) * m[i][0].clone();
    }
    for stage in [5usize, 6, 7] {
        let row = stage - 3; // 0-based row index of rows 3, 4, 5
        for j in 0..4 {
            m[row][j] =
                (m[row][j].clone() + cpp[stage - 1].clone() * m[0][j].clone()) / cpp4.clone();
        }
    }
    for j in 0..4 {
        m[1][j] = (m[0][j].clone() - m[1][j].clone()) / cpp4.clone();
    }
    for j in 0..4 {
        m[4][j] = (m[1][j].clone() - int::<S>(3) * m[4][j].clone()) / c2.clone();
    }
    for j in 0..4 {
        m[1][j] = m[1][j].clone() + int::<S>(2) * (S::one() - int::<S>(4) * c2.clone()) * m[4][j].clone();
    }
    m
}

/// The 12x2 matrix whose rank-1 property encodes the eleven residual order
/// conditions once the subspace conditions hold; its first row is
/// `[b6, 1/120]` and each later row must be proportional to it.
pub fn rank_matrix<S: Scalar>(
    aux: &AuxQuantities<S>,
    cpp4: &S,
    cppp5: &S,
    cppp6: &S,
    a65: &S,
    b6: &S,
) -> RankMatrix<S> {
    use WeightKind::*;
    let five = int::<S>(5);
    let mut rows: Vec<[S; 2]> = Vec::with_capacity(12);
    rows.push([b6.clone(), ratio::<S>(1, 120)]);
    for kind in crate::derive::quantities::WEIGHT_KINDS {
        rows.push([
            aux.lambda(5, kind).clone() + five.clone() * cppp5.clone() * aux.mu(4, kind).clone(),
            cppp6.clone() * aux.lambda(5, kind).clone()
                - cppp5.clone() * aux.lambda(6, kind).clone(),
        ]);
    }
    for kind in [CSq, CCube, CpC] {
        rows.push([
            aux.gamma(4, kind).clone() + five.clone() * cpp4.clone() * aux.eta(kind).clone(),
            -(a65.clone() * aux.lambda(5, kind).clone()),
        ]);
    }
    rows.push([
        aux.gamma_a_csq.clone() + five.clone() * cpp4.clone() * aux.eta_a_csq.clone(),
        -(a65.clone() * cppp5.clone() * aux.gamma(4, CSq).clone()),
    ]);
    rows.try_into().map_err(|_| unreachable!()).unwrap()
}

/// 2x2 cross products of each row of the 12x2 matrix against the first;
/// all zero exactly when the matrix has rank 1.
pub fn rank_matrix_cross_products<S: Scalar>(rows: &RankMatrix<S>) -> Vec<S> {
    (1..12)
        .map(|i| rows[i][0].clone() * rows[0][1].clone() - rows[i][1].clone() * rows[0][0].clone())
        .collect()
}

/// The combinations `q_i = c'3 c2 m_{i3} - c3 m_{i4}` of the transformed
/// matrix, for rows 1, 3, 4; all must vanish for a consistent construction.
pub fn q_values<S: Scalar>(transformed: &ConstructionMatrix<S>, c2: &S, c3: &S, cp3: &S) -> [S; 3] {
    let q = |i: usize| {
        cp3.clone() * c2.clone() * transformed[i][2].clone()
            - c3.clone() * transformed[i][3].clone()
    };
    [q(0), q(2), q(3)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derive::quantities::aux_quantities;
    use crate::scalar::{ratio, Rational};
    use crate::tableau::builtin;

    fn matrices_of(name: &str) -> (ConstructionMatrix<Rational>, ConstructionMatrix<Rational>) {
        let pair = builtin(name).unwrap();
        let p = pair.as_rational().unwrap().clone();
        let (cp, cpp, cppp) = (p.cp(), p.cpp(), p.cppp());
        let aux = aux_quantities(&p.c, &cp, &cpp);
        let m = construction_matrix(&aux, &cpp[3], &cppp[4], &cppp[5], &p.a[5][4]);
        let t = transform_construction_matrix(&m, &p.c[1], &p.c[2], &cpp);
        (m, t)
    }

    #[test]
    fn transformed_rows_two_and_five_have_printed_form() {
        for name in ["typeB", "aprime", "bprime-c3-c2", "dopri", "cash-karp"] {
            let pair = builtin(name).unwrap();
            let p = pair.as_rational().unwrap().clone();
            let (c2, c3) = (p.c[1].clone(), p.c[2].clone());
            let cp3 = p.cp()[2].clone();
            let (_, t) = matrices_of(name);
            assert_eq!(
                t[1],
                [
                    c3.clone() * (c3.clone() - c2.clone()),
                    ratio::<Rational>(2, 1) * c2.clone() * cp3.clone(),
                    c3.clone(),
                    cp3.clone() * c2.clone()
                ],
                "{name}: row 2"
            );
            assert_eq!(
                t[4],
                [
                    cp3.clone(),
                    -(c3.clone() * cp3.clone()),
                    ratio(0, 1),
                    ratio(0, 1)
                ],
                "{name}: row 5"
            );
        }
    }

    #[test]
    fn q_values_vanish_for_valid_pairs() {
        for name in ["typeB", "aprime", "bprime-c3-0", "bprime-c3-c2", "dopri"] {
            let pair = builtin(name).unwrap();
            let p = pair.as_rational().unwrap().clone();
            let (_, t) = matrices_of(name);
            let q = q_values(&t, &p.c[1], &p.c[2], &p.cp()[2]);
            for (i, v) in q.iter().enumerate() {
                assert!(v.is_zero(), "{name}: q[{i}] = {v:?}");
            }
        }
    }

    #[test]
    fn rank_matrix_has_rank_one_for_valid_pairs() {
        for name in ["typeB", "aprime", "bprime-c3-0", "bprime-c3-c2", "fehlberg"] {
            let pair = builtin(name).unwrap();
            let p = pair.as_rational().unwrap().clone();
            let (cp, cpp, cppp) = (p.cp(), p.cpp(), p.cppp());
            let aux = aux_quantities(&p.c, &cp, &cpp);
            let rows = rank_matrix(&aux, &cpp[3], &cppp[4], &cppp[5], &p.a[5][4], &p.b[5]);
            for (i, v) in rank_matrix_cross_products(&rows).iter().enumerate() {
                assert!(v.is_zero(), "{name}: cross product {i} = {v:?}");
            }
        }
    }

    #[test]
    fn rows_one_and_three_of_m_are_proportional() {
        for name in ["typeB", "aprime", "dopri"] {
            let (m, _) = matrices_of(name);
            for j in 0..4 {
                for k in 0..4 {
                    let cross = m[0][j].clone() * m[2][k].clone()
                        - m[0][k].clone() * m[2][j].clone();
                    assert!(cross.is_zero(), "{name}: minor ({j},{k})");
                }
            }
        }
    }
}
