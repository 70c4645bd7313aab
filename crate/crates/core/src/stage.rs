//! Fixed-size stage vectors and matrices for 7-stage methods.

use crate::scalar::Scalar;

pub const STAGES: usize = 7;

pub type StageVec<S> = [S; STAGES];
pub type StageMatrix<S> = [[S; STAGES]; STAGES];

pub fn zeros<S: Scalar>() -> StageVec<S> {
    std::array::from_fn(|_| S::zero())
}

pub fn ones<S: Scalar>() -> StageVec<S> {
    std::array::from_fn(|_| S::one())
}

pub fn zero_matrix<S: Scalar>() -> StageMatrix<S> {
    std::array::from_fn(|_| zeros())
}

pub fn mat_vec<S: Scalar>(a: &StageMatrix<S>, v: &StageVec<S>) -> StageVec<S> {
    std::array::from_fn(|i| {
        let mut acc = S::zero();
        for j in 0..STAGES {
            if !a[i][j].is_zero() && !v[j].is_zero() {
                acc = acc + a[i][j].clone() * v[j].clone();
            }
        }
        acc
    })
}

pub fn hadamard<S: Scalar>(u: &StageVec<S>, v: &StageVec<S>) -> StageVec<S> {
    std::array::from_fn(|i| u[i].clone() * v[i].clone())
}

pub fn dot<S: Scalar>(u: &StageVec<S>, v: &StageVec<S>) -> S {
    let mut acc = S::zero();
    for i in 0..STAGES {
        if !u[i].is_zero() && !v[i].is_zero() {
            acc = acc + u[i].clone() * v[i].clone();
        }
    }
    acc
}

pub fn map<S: Scalar, T: Scalar>(v: &StageVec<S>, f: impl Fn(&S) -> T) -> StageVec<T> {
    std::array::from_fn(|i| f(&v[i]))
}
