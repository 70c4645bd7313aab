//! Quality metrics and diagnostics for any pair: order-condition residuals,
//! the `T6`/`T7` error norms, stability polynomial and region boundary,
//! comparison metrics, stage-order classification, interpolant checks, and
//! construction-matrix diagnostics.

use num_complex::Complex64;
use thiserror::Error;

use crate::derive::{
    aux_quantities, back_substitute, extended_nodes, matrices, solve_d, DeriveError, GeneralParams,
};
use crate::scalar::{int, ratio, Scalar};
use crate::stage::{dot, mat_vec, ones, StageVec, STAGES};
use crate::tableau::ButcherPair;
use crate::trees::{elementary_weight, enumerate_trees, RootedTree, TreeError};

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error("operation requires an FSAL-shaped 7-stage pair")]
    NotFsal,
    #[error("pair has no interpolant")]
    MissingInterpolant,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Derive(#[from] DeriveError),
}

fn near_zero<S: Scalar>(x: &S, tol: f64) -> bool {
    if S::exact() {
        x.is_zero()
    } else {
        x.to_f64().abs() <= tol
    }
}

/// One row of a residual report.
#[derive(Clone, Debug)]
pub struct ResidualEntry<S: Scalar> {
    pub tree: RootedTree,
    pub density: u64,
    /// `b . phi(t) - 1/t!`
    pub b_residual: S,
    /// `d . phi(t)`
    pub d_residual: S,
}

#[derive(Clone, Debug)]
pub struct ResidualReport<S: Scalar> {
    pub entries: Vec<ResidualEntry<S>>,
}

impl<S: Scalar> ResidualReport<S> {
    /// True when every weight residual through `b_order` and every difference
    /// residual through `d_order` vanishes (exactly in rational mode, to
    /// 1e-13 in float mode).
    pub fn satisfied_through(&self, b_order: u32, d_order: u32) -> bool {
        self.entries.iter().all(|e| {
            (e.tree.order() > b_order || near_zero(&e.b_residual, 1e-13))
                && (e.tree.order() > d_order || near_zero(&e.d_residual, 1e-13))
        })
    }

    /// Largest residual magnitude counting weight residuals through order 5
    /// and difference residuals through order 4.
    pub fn worst_abs_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for e in &self.entries {
            if e.tree.order() <= 5 {
                worst = worst.max(e.b_residual.to_f64().abs());
            }
            if e.tree.order() <= 4 {
                worst = worst.max(e.d_residual.to_f64().abs());
            }
        }
        worst
    }

    pub fn violated_trees(&self, b_order: u32, d_order: u32) -> Vec<&ResidualEntry<S>> {
        self.entries
            .iter()
            .filter(|e| {
                (e.tree.order() <= b_order && !near_zero(&e.b_residual, 1e-13))
                    || (e.tree.order() <= d_order && !near_zero(&e.d_residual, 1e-13))
            })
            .collect()
    }
}

/// Order-condition residuals for every rooted tree of order <= p.
pub fn residuals<S: Scalar>(pair: &ButcherPair<S>, p: u32) -> Result<ResidualReport<S>, TreeError> {
    let table = enumerate_trees(p)?;
    let entries = table
        .entries()
        .iter()
        .map(|e| {
            let phi = elementary_weight(&e.tree, &pair.a);
            ResidualEntry {
                tree: e.tree.clone(),
                density: e.density,
                b_residual: dot(&pair.b, &phi) - ratio::<S>(1, e.density as i64),
                d_residual: dot(&pair.d, &phi),
            }
        })
        .collect();
    Ok(ResidualReport { entries })
}

/// The scaled local-error norms of the fifth-order weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    pub t6: f64,
    pub t7: f64,
}

/// `T_p = sqrt( sum over order-p trees of ((b.phi - 1/t!)/sigma)^2 )`,
/// computed in float from exact residuals when available.
pub fn error_norm<S: Scalar>(pair: &ButcherPair<S>, p: u32) -> Result<f64, TreeError> {
    if !(6..=7).contains(&p) {
        return Err(TreeError::OrderOutOfRange(p));
    }
    let table = enumerate_trees(p)?;
    let mut sum = 0.0f64;
    for e in table.of_order(p) {
        let phi = elementary_weight(&e.tree, &pair.a);
        let residual = dot(&pair.b, &phi) - ratio::<S>(1, e.density as i64);
        let tau = residual.to_f64() / e.symmetry as f64;
        sum += tau * tau;
    }
    Ok(sum.sqrt())
}

pub fn error_norms<S: Scalar>(pair: &ButcherPair<S>) -> Result<ErrorNorms, TreeError> {
    Ok(ErrorNorms {
        t6: error_norm(pair, 6)?,
        t7: error_norm(pair, 7)?,
    })
}

/// The comparison metrics: largest coefficient magnitude, smallest nonzero
/// weight, and the stability coefficient `k6 = b6 a65 c'''5` (absent for
/// non-FSAL shapes, whose stability region it does not determine).
#[derive(Clone, Debug)]
pub struct Metrics<S: Scalar> {
    pub max_abs_a: S,
    pub min_nonzero_b: S,
    pub k6: Option<S>,
}

pub fn metrics<S: Scalar>(pair: &ButcherPair<S>) -> Metrics<S> {
    let mut max_abs_a = S::zero();
    for row in &pair.a {
        for x in row {
            if x.abs_cmp(&max_abs_a) == std::cmp::Ordering::Greater {
                max_abs_a = x.clone();
            }
        }
    }
    let mut min_nonzero_b: Option<S> = None;
    for x in &pair.b {
        if x.is_zero() {
            continue;
        }
        min_nonzero_b = Some(match min_nonzero_b {
            None => x.clone(),
            Some(cur) => {
                if x.to_f64() < cur.to_f64() {
                    x.clone()
                } else {
                    cur
                }
            }
        });
    }
    let k6 = pair.fsal.then(|| {
        let mut v = ones::<S>();
        for _ in 0..5 {
            v = mat_vec(&pair.a, &v);
        }
        dot(&pair.b, &v)
    });
    Metrics {
        max_abs_a: max_abs_a.abs(),
        min_nonzero_b: min_nonzero_b.expect("weights cannot all vanish"),
        k6,
    }
}

/// `R(z) = 1 + z b^T (I - z A)^{-1} 1` as coefficients of `z^0..z^6`; for an
/// FSAL pair the degree-7 term vanishes with `b7 = 0`.
#[derive(Clone, Debug)]
pub struct StabilityPoly<S: Scalar> {
    pub coeffs: [S; 7],
}

impl<S: Scalar> StabilityPoly<S> {
    pub fn k6(&self) -> &S {
        &self.coeffs[6]
    }

    pub fn to_float(&self) -> StabilityPoly<f64> {
        StabilityPoly {
            coeffs: std::array::from_fn(|i| self.coeffs[i].to_f64()),
        }
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + Complex64::new(c.to_f64(), 0.0);
        }
        acc
    }

    fn derivative_complex(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * z + Complex64::new(k as f64 * c.to_f64(), 0.0);
        }
        acc
    }
}

/// Stability polynomial via `coeff(z^k) = b^T A^{k-1} 1`.
pub fn stability<S: Scalar>(pair: &ButcherPair<S>) -> Result<StabilityPoly<S>, AnalyzeError> {
    if !pair.fsal {
        return Err(AnalyzeError::NotFsal);
    }
    let mut coeffs: [S; 7] = std::array::from_fn(|_| S::zero());
    coeffs[0] = S::one();
    let mut v = ones::<S>();
    for k in 1..7 {
        coeffs[k] = dot(&pair.b, &v);
        v = mat_vec(&pair.a, &v);
    }
    Ok(StabilityPoly { coeffs })
}

/// Boundary of the absolute stability region: the curve `|R(z)| = 1` traced
/// by solving `R(z) = e^{i phi}` over a uniform phase grid with Newton
/// continuation from `z = 0`. The phase keeps increasing past `2 pi` until
/// the curve returns to the origin (the argument of `R` winds once around
/// per enclosed zero of `R`). By conjugate symmetry the midpoint of a closed
/// trace is the curve's negative real-axis crossing.
#[derive(Clone, Debug)]
pub struct BoundaryTrace {
    pub points: Vec<(f64, f64)>,
    /// False when the continuation diverged or never closed; the trace is
    /// then partial.
    pub complete: bool,
}

impl BoundaryTrace {
    /// The negative real-axis crossing of a closed trace.
    pub fn real_axis_crossing(&self) -> Option<f64> {
        if !self.complete {
            return None;
        }
        let (x, y) = self.points[self.points.len() / 2];
        (y.abs() < 1e-8).then_some(x)
    }
}

/// Maximum number of `2 pi` phase laps attempted before giving up on closure.
const MAX_BOUNDARY_LAPS: usize = 8;

pub fn stability_boundary(poly: &StabilityPoly<f64>, n_points: usize) -> BoundaryTrace {
    let n_points = n_points.max(8);
    let mut points = vec![(0.0, 0.0)];
    let mut z = Complex64::new(0.0, 0.0);
    for lap in 0..MAX_BOUNDARY_LAPS {
        for k in 1..=n_points {
            let phi = 2.0 * std::f64::consts::PI * (lap as f64 + k as f64 / n_points as f64);
            let target = Complex64::new(phi.cos(), phi.sin());
            let mut converged = false;
            for _ in 0..60 {
                let f = poly.eval_complex(z) - target;
                if f.norm() < 1e-12 {
                    converged = true;
                    break;
                }
                let df = poly.derivative_complex(z);
                if df.norm() < 1e-300 {
                    break;
                }
                z -= f / df;
            }
            if !converged || !z.re.is_finite() || !z.im.is_finite() {
                return BoundaryTrace {
                    points,
                    complete: false,
                };
            }
            points.push((z.re, z.im));
        }
        if z.norm() < 1e-8 {
            return BoundaryTrace {
                points,
                complete: true,
            };
        }
    }
    BoundaryTrace {
        points,
        complete: false,
    }
}

/// Dominant stage order of the two methods in the pair: 2 when every stage
/// weighted by the method satisfies `c'_m = c_m^2 / 2`, else 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DsoReport {
    pub fifth: u8,
    pub fourth: u8,
}

pub fn dso<S: Scalar>(pair: &ButcherPair<S>) -> DsoReport {
    let cp = pair.cp();
    let violates: Vec<bool> = (0..STAGES)
        .map(|m| {
            let r = cp[m].clone() - pair.c[m].clone() * pair.c[m].clone() / int::<S>(2);
            !near_zero(&r, 1e-12)
        })
        .collect();
    let dso_of = |weights: &StageVec<S>| -> u8 {
        let touched = (0..STAGES).any(|m| violates[m] && !near_zero(&weights[m], 1e-12));
        if touched {
            1
        } else {
            2
        }
    };
    DsoReport {
        fifth: dso_of(&pair.b),
        fourth: dso_of(&pair.fourth_order_weights()),
    }
}

/// Residuals of the continuous order conditions
/// `sum_j beta_j(theta) phi_j(t) = theta^order / t!` for all trees of order
/// <= 4, at each requested theta, plus the endpoint derivative identity.
#[derive(Clone, Debug)]
pub struct InterpolantReport<S: Scalar> {
    /// `(theta, per-tree residuals)`
    pub rows: Vec<(S, Vec<ResidualEntry<S>>)>,
    /// `beta'_j(1) - delta_{j7}` per stage.
    pub endpoint_derivative: StageVec<S>,
}

impl<S: Scalar> InterpolantReport<S> {
    pub fn worst_abs_residual(&self) -> f64 {
        let rows = self
            .rows
            .iter()
            .flat_map(|(_, v)| v.iter())
            .map(|e| e.b_residual.to_f64().abs());
        let ends = self.endpoint_derivative.iter().map(|x| x.to_f64().abs());
        rows.chain(ends).fold(0.0, f64::max)
    }

    pub fn all_zero(&self) -> bool {
        self.rows
            .iter()
            .all(|(_, v)| v.iter().all(|e| e.b_residual.is_zero()))
            && self.endpoint_derivative.iter().all(|x| x.is_zero())
    }
}

pub fn interpolant_check<S: Scalar>(
    pair: &ButcherPair<S>,
    thetas: &[S],
) -> Result<InterpolantReport<S>, AnalyzeError> {
    let interp = pair
        .interpolant
        .as_ref()
        .ok_or(AnalyzeError::MissingInterpolant)?;
    let table = enumerate_trees(4)?;
    let mut rows = Vec::with_capacity(thetas.len());
    for theta in thetas {
        let weights = interp.weights_at(theta);
        let mut entries = Vec::with_capacity(table.len());
        for e in table.entries() {
            let phi = elementary_weight(&e.tree, &pair.a);
            let mut target = ratio::<S>(1, e.density as i64);
            for _ in 0..e.tree.order() {
                target = target * theta.clone();
            }
            entries.push(ResidualEntry {
                tree: e.tree.clone(),
                density: e.density,
                b_residual: dot(&weights, &phi) - target,
                d_residual: S::zero(),
            });
        }
        rows.push((theta.clone(), entries));
    }
    let deriv = interp.derivative_at(&S::one());
    let endpoint_derivative: StageVec<S> =
        std::array::from_fn(|j| deriv[j].clone() - if j == 6 { S::one() } else { S::zero() });
    Ok(InterpolantReport {
        rows,
        endpoint_derivative,
    })
}

/// Construction-matrix diagnostics for a parameter point.
#[derive(Clone, Debug)]
pub struct MDiagnostics {
    /// `q1, q3, q4` of the transformed matrix (all zero for a consistent
    /// construction).
    pub q_values: [f64; 3],
    /// Rank of the 12x2 residual-condition matrix (1 for a valid pair).
    pub rank_12x2: usize,
    /// Rank of the construction matrix (at most 2 for valid parameters).
    pub rank_m: usize,
    /// Rows 1 and 3 of the untransformed matrix are proportional.
    pub rows_1_3_proportional: bool,
    /// `m51 m24 - m21 m54 = c'3^2 c2` on the transformed matrix.
    pub rank_identity_ok: bool,
    pub d7_zero: bool,
    /// For six-stage points (`d7 = 0`): the matrix without its fifth row has
    /// rank 1.
    pub six_stage_rank1: Option<bool>,
}

pub fn m_diagnostics<S: Scalar>(params: &GeneralParams<S>) -> Result<MDiagnostics, AnalyzeError> {
    let nodes = extended_nodes(params)?;
    let mut pair = back_substitute(params, &nodes)?;
    let (d, _) = solve_d(&pair)?;
    pair.d = d;
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
    let rank12 = matrices::rank_matrix(
        &aux,
        &nodes.cpp[3],
        &nodes.cppp5,
        &nodes.cppp6,
        &nodes.a65,
        &nodes.b6,
    );
    let rank_12x2 = if matrices::rank_matrix_cross_products(&rank12)
        .iter()
        .all(|x| near_zero(x, 1e-10))
    {
        1
    } else {
        2
    };
    let rank_m = matrix_rank(&m);
    let rows_1_3_proportional = proportional(&m[0], &m[2]);
    let identity = t[4][0].clone() * t[1][3].clone()
        - t[1][0].clone() * t[4][3].clone()
        - params.cp3.clone() * params.cp3.clone() * params.c2.clone();
    let d7_zero = near_zero(&pair.d[6], 1e-12);
    let six_stage_rank1 = d7_zero.then(|| {
        let rows = [&m[0], &m[1], &m[2], &m[3]];
        let mut rank1 = true;
        for i in 0..4 {
            for j in (i + 1)..4 {
                if !proportional(rows[i], rows[j]) {
                    rank1 = false;
                }
            }
        }
        rank1
    });
    Ok(MDiagnostics {
        q_values: std::array::from_fn(|i| qs[i].to_f64()),
        rank_12x2,
        rank_m,
        rows_1_3_proportional,
        rank_identity_ok: near_zero(&identity, 1e-10),
        d7_zero,
        six_stage_rank1,
    })
}

fn proportional<S: Scalar>(u: &[S; 4], v: &[S; 4]) -> bool {
    for i in 0..4 {
        for j in (i + 1)..4 {
            let cross = u[i].clone() * v[j].clone() - u[j].clone() * v[i].clone();
            if !near_zero(&cross, 1e-10) {
                return false;
            }
        }
    }
    true
}

fn matrix_rank<S: Scalar>(m: &[[S; 4]; 5]) -> usize {
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .map(|row| row.iter().map(S::to_f64).collect())
        .collect();
    let scale: f64 = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(1e-300);
    let mut rank = 0;
    for col in 0..4 {
        let p = (rank..5).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let Some(p) = p else { break };
        if a[p][col].abs() <= 1e-10 * scale {
            continue;
        }
        a.swap(rank, p);
        let pivot = a[rank][col];
        for i in 0..5 {
            if i != rank {
                let f = a[i][col] / pivot;
                for j in 0..4 {
                    a[i][j] -= f * a[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}
