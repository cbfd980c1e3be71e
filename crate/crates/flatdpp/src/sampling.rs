//! Exact samplers built on the mixture representation: draw a set of
//! eigenvectors from a diagonal ensemble, then sample the projection DPP they
//! span by the chain rule.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::linalg::is_orthonormal;
use crate::nnp::Nnp;

/// The generator used by every seeded entry point.
pub type RngState = ChaCha20Rng;

/// Sorted, distinct ground-set indices.
pub type Sample = Vec<usize>;

pub fn rng_from_seed(seed: u64) -> RngState {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Negative residual diagonals above this magnitude abort the chain rule.
const CLAMP_TOL: f64 = 1e-10;

const ORTHO_TOL: f64 = 1e-8;

/// Each index enters independently with probability `λᵢ/(1+λᵢ)`.
pub fn sample_bernoulli_diag<R: Rng + ?Sized>(lambdas: &[f64], rng: &mut R) -> Result<Sample> {
    check_nonnegative(lambdas)?;
    Ok(lambdas
        .iter()
        .enumerate()
        .filter(|&(_, &l)| {
            let u: f64 = rng.random();
            u * (1.0 + l) < l
        })
        .map(|(i, _)| i)
        .collect())
}

/// Draws `m` indices with probability proportional to `Π_{i∈Y} λᵢ`.
pub fn sample_fixed_diag<R: Rng + ?Sized>(
    lambdas: &[f64],
    m: usize,
    rng: &mut R,
) -> Result<Sample> {
    check_nonnegative(lambdas)?;
    let positive = lambdas.iter().filter(|&&l| l > 0.0).count();
    if m > positive {
        return Err(Error::Domain(format!(
            "cannot draw {m} items from {positive} with positive weight"
        )));
    }
    let n = lambdas.len();
    let scale = lambdas.iter().fold(0.0_f64, |a, &b| a.max(b));
    let lam: Vec<f64> = if scale > 0.0 {
        lambdas.iter().map(|&l| l / scale).collect()
    } else {
        lambdas.to_vec()
    };
    // tail[i][k] = e_k(λ_i, …, λ_{n−1})
    let mut tail = vec![vec![0.0; m + 1]; n + 1];
    tail[n][0] = 1.0;
    for i in (0..n).rev() {
        tail[i][0] = 1.0;
        for k in 1..=m {
            tail[i][k] = tail[i + 1][k] + lam[i] * tail[i + 1][k - 1];
        }
    }
    let mut out = Vec::with_capacity(m);
    let mut k = m;
    for i in 0..n {
        if k == 0 {
            break;
        }
        let prob = lam[i] * tail[i + 1][k - 1] / tail[i][k];
        let u: f64 = rng.random();
        if u < prob {
            out.push(i);
            k -= 1;
        }
    }
    if k != 0 {
        return Err(Error::Numerical(format!(
            "sequential sampler ended with {k} slots unfilled"
        )));
    }
    Ok(out)
}

/// Samples the projection DPP with kernel `UUᵀ` for orthonormal `U`.
pub fn sample_projection<R: Rng + ?Sized>(u: &DMatrix<f64>, rng: &mut R) -> Result<Sample> {
    if !is_orthonormal(u, ORTHO_TOL) {
        return Err(Error::Precondition("columns of U are not orthonormal".into()));
    }
    let (n, m) = u.shape();
    let mut diag: Vec<f64> = (0..n).map(|i| u.row(i).norm_squared()).collect();
    let mut dirs: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        for d in diag.iter_mut() {
            if *d < -CLAMP_TOL {
                return Err(Error::Numerical(format!(
                    "negative residual diagonal {d:e} in chain rule"
                )));
            }
            *d = d.max(0.0);
        }
        let total: f64 = diag.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Numerical("residual kernel vanished".into()));
        }
        let i = categorical(&diag, total, rng);
        out.push(i);
        let mut w: DVector<f64> = u.row(i).transpose();
        for e in &dirs {
            let c = e.dot(&w);
            w -= c * e;
        }
        let norm = w.norm();
        if !(norm > 0.0) {
            return Err(Error::Numerical("degenerate chain-rule direction".into()));
        }
        w /= norm;
        for (k, d) in diag.iter_mut().enumerate() {
            let c = u.row(k).transpose().dot(&w);
            *d -= c * c;
        }
        diag[i] = 0.0;
        dirs.push(w);
    }
    out.sort_unstable();
    Ok(out)
}

/// Samples the extended L-ensemble without a size constraint.
pub fn sample_dpp<R: Rng + ?Sized>(nnp: &Nnp, rng: &mut R) -> Result<Sample> {
    let y = sample_bernoulli_diag(nnp.lambdatilde(), rng)?;
    sample_projection(&mixture_basis(nnp, &y), rng)
}

/// Samples the extended L-ensemble conditioned on `|X| = m`.
pub fn sample_fixed_dpp<R: Rng + ?Sized>(nnp: &Nnp, m: usize, rng: &mut R) -> Result<Sample> {
    let (p, q) = (nnp.p(), nnp.q());
    if m < p || m > p + q {
        return Err(Error::Domain(format!(
            "size {m} outside the admissible range [{p}, {}]",
            p + q
        )));
    }
    let y = sample_fixed_diag(nnp.lambdatilde(), m - p, rng)?;
    sample_projection(&mixture_basis(nnp, &y), rng)
}

fn mixture_basis(nnp: &Nnp, y: &[usize]) -> DMatrix<f64> {
    let q = nnp.basis();
    let u = nnp.utilde();
    let mut m = DMatrix::zeros(nnp.n(), q.ncols() + y.len());
    m.columns_mut(0, q.ncols()).copy_from(q);
    for (j, &k) in y.iter().enumerate() {
        m.column_mut(q.ncols() + j).copy_from(&u.column(k));
    }
    m
}

fn categorical<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if target < acc {
            return i;
        }
    }
    last
}

fn check_nonnegative(lambdas: &[f64]) -> Result<()> {
    match lambdas.iter().find(|&&l| !(l >= 0.0) || !l.is_finite()) {
        Some(&bad) => Err(Error::Domain(format!("weights must be nonnegative, got {bad}"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;

    #[test]
    fn bernoulli_examples() {
        let mut rng = rng_from_seed(1);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| !sample_bernoulli_diag(&[1.0], &mut rng).unwrap().is_empty())
            .count();
        let sigma = (0.25 / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - 0.5).abs() < 3.0 * sigma);

        for _ in 0..100 {
            assert!(sample_bernoulli_diag(&[0.0, 0.0, 0.0], &mut rng).unwrap().is_empty());
        }
        let empty = (0..n)
            .filter(|_| sample_bernoulli_diag(&[1.0, 1.0], &mut rng).unwrap().is_empty())
            .count();
        let sigma = (0.25 * 0.75 / n as f64).sqrt();
        assert!((empty as f64 / n as f64 - 0.25).abs() < 3.0 * sigma);
        assert!(sample_bernoulli_diag(&[-1.0], &mut rng).is_err());
    }

    #[test]
    fn fixed_diag_examples() {
        let mut rng = rng_from_seed(2);
        let n = 60_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let s = sample_fixed_diag(&[2.0, 1.0, 1.0], 1, &mut rng).unwrap();
            counts[s[0]] += 1;
        }
        let sigma = (0.25 / n as f64).sqrt();
        assert!((counts[0] as f64 / n as f64 - 0.5).abs() < 3.0 * sigma);

        assert_eq!(
            sample_fixed_diag(&[0.0, 3.0, 0.0, 1.0], 2, &mut rng).unwrap(),
            vec![1, 3]
        );
        assert!(matches!(
            sample_fixed_diag(&[1.0, 0.0], 2, &mut rng),
            Err(Error::Domain(_))
        ));
        for _ in 0..200 {
            assert_eq!(sample_fixed_diag(&[1.0; 6], 4, &mut rng).unwrap().len(), 4);
        }
    }

    #[test]
    fn projection_examples() {
        let mut rng = rng_from_seed(3);
        let full = DMatrix::identity(4, 4);
        assert_eq!(sample_projection(&full, &mut rng).unwrap(), vec![0, 1, 2, 3]);

        let mut e = DMatrix::zeros(4, 2);
        e[(0, 0)] = 1.0;
        e[(2, 1)] = 1.0;
        for _ in 0..50 {
            assert_eq!(sample_projection(&e, &mut rng).unwrap(), vec![0, 2]);
        }
        let bad = DMatrix::from_element(3, 1, 1.0);
        assert!(matches!(
            sample_projection(&bad, &mut rng),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn mixture_sampler_sizes() {
        let mut rng = rng_from_seed(4);
        let v = DMatrix::from_fn(5, 2, |i, j| (i as f64).powi(j as i32));
        let l = SymMatrix::from_diagonal(&[1.0, 2.0, 0.5, 3.0, 1.0]);
        let nnp = Nnp::new(l, v).unwrap();
        for _ in 0..500 {
            assert!(sample_dpp(&nnp, &mut rng).unwrap().len() >= 2);
            assert_eq!(sample_fixed_dpp(&nnp, 3, &mut rng).unwrap().len(), 3);
        }
        assert!(matches!(sample_fixed_dpp(&nnp, 1, &mut rng), Err(Error::Domain(_))));
    }

    #[test]
    fn seeded_streams_repeat() {
        let nnp = Nnp::l_ensemble(SymMatrix::from_diagonal(&[1.0, 2.0, 0.5])).unwrap();
        let draw = |seed| {
            let mut rng = rng_from_seed(seed);
            (0..100)
                .map(|_| sample_dpp(&nnp, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }
}
