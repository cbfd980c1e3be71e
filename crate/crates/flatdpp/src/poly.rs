//! Monomial bases in graded lexicographic order, multivariate Vandermonde
//! matrices, monomial counts and kernel Wronskians.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{GroundSet, KernelSpec};

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// `(𝓗_{k,d}, 𝓟_{k,d})`: the number of monomials of degree exactly `k` and of
/// degree at most `k` in `d` variables. Both vanish for `k = −1`.
pub fn counts(k: i64, d: usize) -> (usize, usize) {
    if k < 0 || d == 0 {
        return (0, 0);
    }
    let k = k as usize;
    (binomial(k + d - 1, d - 1), binomial(k + d, d))
}

/// `𝓟_{k,d}` with the `k = −1` convention.
pub fn dim_poly(k: i64, d: usize) -> usize {
    counts(k, d).1
}

/// The sizes `𝓟_{k,d} ≤ n`, `k ≥ 0`.
pub fn magic_numbers(d: usize, n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let p = dim_poly(k, d);
        if p > n || d == 0 {
            break;
        }
        out.push(p);
        k += 1;
    }
    out
}

/// Smallest `k` with `𝓟_{k,d} ≥ m`.
pub fn degree_for_size(m: usize, d: usize) -> usize {
    let mut k = 0;
    while dim_poly(k as i64, d) < m {
        k += 1;
    }
    k
}

/// Multi-indices of total degree at most `max_degree`, ordered by degree and,
/// within a degree, by decreasing lexicographic order of the exponent tuple
/// (`x₁² , x₁x₂, x₂²`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    d: usize,
    max_degree: usize,
    exponents: Vec<Vec<u32>>,
}

fn push_degree(d: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == d {
        prefix.push(deg);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=deg).rev() {
        prefix.push(first);
        push_degree(d, deg - first, prefix, out);
        prefix.pop();
    }
}

impl MonomialBasis {
    pub fn new(d: usize, max_degree: usize) -> Self {
        let mut exponents = Vec::new();
        if d > 0 {
            for deg in 0..=max_degree {
                push_degree(d, deg as u32, &mut Vec::with_capacity(d), &mut exponents);
            }
        }
        MonomialBasis {
            d,
            max_degree,
            exponents,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// Column range of the monomials of degree exactly `deg`.
    pub fn block(&self, deg: usize) -> std::ops::Range<usize> {
        dim_poly(deg as i64 - 1, self.d)..dim_poly(deg as i64, self.d)
    }

    /// Human-readable names such as `1`, `x1`, `x1^2*x2`.
    pub fn labels(&self) -> Vec<String> {
        self.exponents
            .iter()
            .map(|e| {
                let parts: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a > 0)
                    .map(|(i, &a)| {
                        if a == 1 {
                            format!("x{}", i + 1)
                        } else {
                            format!("x{}^{a}", i + 1)
                        }
                    })
                    .collect();
                if parts.is_empty() {
                    "1".to_string()
                } else {
                    parts.join("*")
                }
            })
            .collect()
    }
}

fn monomial_columns(gs: &GroundSet, exps: &[Vec<u32>]) -> DMatrix<f64> {
    let pts = gs.points();
    DMatrix::from_fn(gs.n(), exps.len(), |i, j| {
        exps[j]
            .iter()
            .enumerate()
            .map(|(c, &a)| pts[(i, c)].powi(a as i32))
            .product()
    })
}

/// `V_{≤k}`: monomials of degree at most `k` evaluated at each point.
pub fn vandermonde(gs: &GroundSet, k: usize) -> DMatrix<f64> {
    let basis = MonomialBasis::new(gs.d(), k);
    monomial_columns(gs, basis.exponents())
}

/// `V_k`: the degree-`k` block of the Vandermonde matrix.
pub fn vandermonde_block(gs: &GroundSet, k: usize) -> DMatrix<f64> {
    let basis = MonomialBasis::new(gs.d(), k);
    monomial_columns(gs, &basis.exponents()[basis.block(k)])
}

/// Taylor coefficients of `κ(x, y)` at the origin in the monomials `x^α y^β`,
/// for `|α|, |β| ≤ k`.
#[derive(Clone, Debug)]
pub struct Wronskian {
    pub basis: MonomialBasis,
    pub matrix: DMatrix<f64>,
}

impl Wronskian {
    pub fn k(&self) -> usize {
        self.basis.max_degree()
    }

    pub fn d(&self) -> usize {
        self.basis.d()
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * f64::from(i))
}

/// Coefficient of `x^α y^β` in `f_{2m} ‖x − y‖^{2m}` (zero unless every
/// `αᵢ + βᵢ` is even).
fn wronskian_entry(kernel: &KernelSpec, a: &[u32], b: &[u32]) -> Result<f64> {
    let mut half_total = 0;
    let mut denom = 1.0;
    let mut numer = 1.0;
    for (&ai, &bi) in a.iter().zip(b) {
        let s = ai + bi;
        if s % 2 == 1 {
            return Ok(0.0);
        }
        let j = s / 2;
        half_total += j;
        denom *= factorial(j);
        numer *= binomial(s as usize, ai as usize) as f64;
        if bi % 2 == 1 {
            numer = -numer;
        }
    }
    let f = kernel.coeff(2 * half_total as usize)?;
    Ok(f * factorial(half_total) / denom * numer)
}

pub fn wronskian(kernel: &KernelSpec, k: usize, d: usize) -> Result<Wronskian> {
    if !kernel.r().allows_wronskian(k) {
        return Err(Error::InsufficientSmoothness {
            k,
            r: kernel.r().finite().unwrap_or(usize::MAX),
        });
    }
    if d == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let basis = MonomialBasis::new(d, k);
    let e = basis.exponents();
    let len = e.len();
    let mut matrix = DMatrix::zeros(len, len);
    for i in 0..len {
        for j in i..len {
            let v = wronskian_entry(kernel, &e[i], &e[j])?;
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    Ok(Wronskian { basis, matrix })
}

/// Schur complement of the leading `split × split` block:
/// `M₂₂ − M₂₁ M₁₁⁻¹ M₁₂`.
pub fn schur_complement(m: &DMatrix<f64>, split: usize) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n || split > n {
        return Err(Error::Dimension(format!(
            "cannot split a {}x{} matrix at {split}",
            m.nrows(),
            m.ncols()
        )));
    }
    let tail = n - split;
    let m22 = m.view((split, split), (tail, tail)).into_owned();
    if split == 0 {
        return Ok(m22);
    }
    let m11 = m.view((0, 0), (split, split)).into_owned();
    let m12 = m.view((0, split), (split, tail)).into_owned();
    let m21 = m.view((split, 0), (tail, split)).into_owned();
    let sol = m11
        .lu()
        .solve(&m12)
        .ok_or_else(|| Error::Singular("leading Wronskian block is singular".into()))?;
    let s = m22 - m21 * sol;
    Ok((&s + s.transpose()) * 0.5)
}

/// `W̄`: the Schur complement of the degree-`< k` block inside `W_{≤k}`,
/// an `𝓗_{k,d} × 𝓗_{k,d}` matrix.
pub fn wbar_schur(w: &Wronskian) -> Result<DMatrix<f64>> {
    let split = dim_poly(w.k() as i64 - 1, w.d());
    schur_complement(&w.matrix, split)
}
