#![allow(dead_code)]

use flatdpp::linalg::SymMatrix;
use flatdpp::Nnp;
use nalgebra::DMatrix;
use rand::Rng;

pub fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// A pair `(BBᵀ + VSᵀ + SVᵀ, V)` with `B` of width `q`, so that `L̃` has rank
/// at most `q` while `L` itself is indefinite.
pub fn random_nnp<R: Rng>(rng: &mut R, n: usize, p: usize, q: usize) -> Nnp {
    let v = uniform_matrix(rng, n, p);
    let b = uniform_matrix(rng, n, q);
    let s = uniform_matrix(rng, n, p);
    let vs = &v * s.transpose();
    let l = SymMatrix::symmetrize(&b * b.transpose() + &vs + vs.transpose()).unwrap();
    Nnp::new(l, v).unwrap()
}

pub fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0usize..1 << n).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
}

pub fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    subsets(n).filter(|x| x.len() == k).collect()
}
