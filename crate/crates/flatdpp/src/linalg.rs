//! Dense symmetric linear algebra: eigendecompositions with a deterministic sign
//! convention, log-domain determinants, saddle-point determinants and the
//! elementary symmetric polynomials of a spectrum.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative threshold below which an eigenvalue or singular value counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Eigenvalues within this factor above the rank threshold are too close to call.
const AMBIGUITY_FACTOR: f64 = 1e3;

/// A square matrix whose entries are exactly symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Wraps `m`, rejecting non-square or non-symmetric input.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square(&m)?;
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::Precondition(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SymMatrix(m))
    }

    /// Replaces `m` by `(m + mᵀ)/2`.
    pub fn symmetrize(m: DMatrix<f64>) -> Result<Self> {
        check_square(&m)?;
        let s = (&m + m.transpose()) * 0.5;
        Ok(SymMatrix(s))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Builds `U diag(d) Uᵀ`.
    pub fn from_spectral(u: &DMatrix<f64>, d: &[f64]) -> Self {
        let mut scaled = u.clone();
        for (j, &dj) in d.iter().enumerate() {
            scaled.column_mut(j).scale_mut(dj);
        }
        let m = &scaled * u.transpose();
        SymMatrix((&m + m.transpose()) * 0.5)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Principal submatrix on the index set `idx`.
    pub fn principal(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix(self.0.select_rows(idx).select_columns(idx))
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix(&self.0 * c)
    }
}

impl Deref for SymMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    /// Largest eigenvalue magnitude, zero for an empty spectrum.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    /// Number of eigenvalues above `tol * max|λ|`.
    pub fn rank(&self, tol: f64) -> usize {
        let cut = tol * self.max_abs();
        self.values.iter().filter(|&&v| v > cut).count()
    }
}

/// Flips each column so that its largest-magnitude entry is positive.
///
/// Near-ties are broken towards the smallest row index so the choice is stable
/// under rounding.
pub fn apply_sign_convention(u: &mut DMatrix<f64>) {
    for j in 0..u.ncols() {
        let col = u.column(j);
        let max = col.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        if max == 0.0 {
            continue;
        }
        let lead = col
            .iter()
            .position(|&x| x.abs() >= max * (1.0 - 1e-10))
            .unwrap_or(0);
        if u[(lead, j)] < 0.0 {
            u.column_mut(j).neg_mut();
        }
    }
}

pub fn sym_eig(s: &SymMatrix) -> Result<Spectrum> {
    let n = s.n();
    if n == 0 {
        return Ok(Spectrum {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(s.as_matrix().clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    let mut vectors = eig.eigenvectors.select_columns(&order);
    apply_sign_convention(&mut vectors);
    Ok(Spectrum { values, vectors })
}

/// Orthonormal basis of the column span of a full-column-rank `v`.
pub fn orthonormal_basis(v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, p) = v.shape();
    if p == 0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    if p > n {
        return Err(Error::Rank(format!("{n}x{p} matrix cannot have full column rank")));
    }
    let sv = v.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin <= DEFAULT_RANK_TOL * smax {
        return Err(Error::Rank(format!(
            "singular values span [{smin:e}, {smax:e}]"
        )));
    }
    let mut q = v.clone().qr().q();
    apply_sign_convention(&mut q);
    Ok(q)
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q`.
pub fn orth_complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = q.shape();
    if p == 0 {
        return DMatrix::identity(n, n);
    }
    let proj = DMatrix::identity(n, n) - q * q.transpose();
    let spec = sym_eig(&SymMatrix((&proj + proj.transpose()) * 0.5))
        .expect("eigensolver on a projector");
    spec.vectors.columns(0, n - p).into_owned()
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix, truncating eigenvalues
/// below `tol * max|λ|`.
pub fn pinv_sym(s: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    let spec = sym_eig(s)?;
    let cut = tol * spec.max_abs();
    let inv: Vec<f64> = spec
        .values
        .iter()
        .map(|&v| if v.abs() > cut { 1.0 / v } else { 0.0 })
        .collect();
    Ok(SymMatrix::from_spectral(&spec.vectors, &inv))
}

pub fn is_orthonormal(u: &DMatrix<f64>, tol: f64) -> bool {
    let g = u.transpose() * u;
    (g - DMatrix::identity(u.ncols(), u.ncols())).amax() <= tol
}

/// A determinant stored as sign and log-magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet {
    pub sign: i8,
    pub log_abs: f64,
}

impl LogDet {
    pub const ONE: LogDet = LogDet {
        sign: 1,
        log_abs: 0.0,
    };
    pub const ZERO: LogDet = LogDet {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };

    pub fn new(sign: i8, log_abs: f64) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            LogDet::ZERO
        } else {
            LogDet {
                sign: sign.signum(),
                log_abs,
            }
        }
    }

    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            LogDet::ZERO
        } else {
            LogDet {
                sign: if x > 0.0 { 1 } else { -1 },
                log_abs: x.abs().ln(),
            }
        }
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_abs.exp()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn mul(self, other: LogDet) -> LogDet {
        LogDet::new(self.sign * other.sign, self.log_abs + other.log_abs)
    }

    pub fn neg(self) -> LogDet {
        LogDet::new(-self.sign, self.log_abs)
    }

    /// Multiplies by `(-1)^k`.
    pub fn with_parity(self, k: usize) -> LogDet {
        if k % 2 == 1 {
            self.neg()
        } else {
            self
        }
    }

    /// The ratio `self / other`; `other` must be nonzero.
    pub fn ratio(self, other: LogDet) -> f64 {
        debug_assert!(!other.is_zero());
        f64::from(self.sign * other.sign) * (self.log_abs - other.log_abs).exp()
    }
}

pub fn log_det(s: &DMatrix<f64>) -> LogDet {
    assert_eq!(s.nrows(), s.ncols(), "log_det needs a square matrix");
    if s.nrows() == 0 {
        return LogDet::ONE;
    }
    let lu = s.clone().lu();
    let mut sign: i8 = lu.p().determinant::<f64>().signum() as i8;
    let mut log_abs = 0.0;
    let u = lu.u();
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        if d == 0.0 || !d.is_finite() {
            return LogDet::ZERO;
        }
        if d < 0.0 {
            sign = -sign;
        }
        log_abs += d.abs().ln();
    }
    LogDet::new(sign, log_abs)
}

pub fn det_minor(s: &DMatrix<f64>, x: &[usize]) -> LogDet {
    if x.is_empty() {
        return LogDet::ONE;
    }
    log_det(&s.select_rows(x).select_columns(x))
}

/// Determinant of the bordered matrix `[[L, V], [Vᵀ, 0]]`.
pub fn saddle_point_det(l: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<LogDet> {
    let m = l.nrows();
    let p = v.ncols();
    if l.ncols() != m || v.nrows() != m {
        return Err(Error::Dimension(format!(
            "L is {}x{}, V is {}x{}",
            l.nrows(),
            l.ncols(),
            v.nrows(),
            p
        )));
    }
    if p > m {
        return Err(Error::Dimension(format!("V has {p} columns but only {m} rows")));
    }
    Ok(log_det(&bordered(l, v)))
}

pub(crate) fn bordered(l: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let m = l.nrows();
    let p = v.ncols();
    let mut b = DMatrix::zeros(m + p, m + p);
    b.view_mut((0, 0), (m, m)).copy_from(l);
    b.view_mut((0, m), (m, p)).copy_from(v);
    b.view_mut((m, 0), (p, m)).copy_from(&v.transpose());
    b
}

/// The coefficient of `t^p` in `det(L + t V Vᵀ)`, where `p` is the number of
/// columns of `V`.
pub fn coeff_tp_det(l: &DMatrix<f64>, v: &DMatrix<f64>) -> LogDet {
    let p = v.ncols();
    match saddle_point_det(l, v) {
        Ok(d) => d.with_parity(p),
        Err(_) => LogDet::ZERO,
    }
}

/// `det(A + U W Uᵀ)` evaluated as `det A · det W · det(W⁻¹ + Uᵀ A⁻¹ U)`.
pub fn det_update(a: &SymMatrix, u: &DMatrix<f64>, w: &SymMatrix) -> Result<LogDet> {
    if u.nrows() != a.n() || u.ncols() != w.n() {
        return Err(Error::Dimension(format!(
            "A is {n}x{n}, U is {}x{}, W is {k}x{k}",
            u.nrows(),
            u.ncols(),
            n = a.n(),
            k = w.n()
        )));
    }
    let a_inv = a
        .as_matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("A is not invertible".into()))?;
    let w_inv = w
        .as_matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("W is not invertible".into()))?;
    let inner = w_inv + u.transpose() * a_inv * u;
    Ok(log_det(a).mul(log_det(w)).mul(log_det(&inner)))
}

/// `L_{x,x} − L_{x,Y} L_Y⁻¹ L_{Y,x}`.
pub fn schur_conditional(l: &DMatrix<f64>, y: &[usize], x: usize) -> Result<f64> {
    if y.contains(&x) {
        return Err(Error::Precondition(format!("index {x} already belongs to Y")));
    }
    if y.is_empty() {
        return Ok(l[(x, x)]);
    }
    let ly = l.select_rows(y).select_columns(y);
    let b = DVector::from_iterator(y.len(), y.iter().map(|&i| l[(i, x)]));
    let sol = ly
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("L_Y is not invertible".into()))?;
    Ok(l[(x, x)] - b.dot(&sol))
}

/// `e_0, …, e_n` of `lambdas` by the Newton-triangle recurrence.
pub fn elementary_symmetric_all(lambdas: &[f64]) -> Vec<f64> {
    let n = lambdas.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (i, &lam) in lambdas.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += lam * e[k - 1];
        }
    }
    e
}

pub fn elementary_symmetric(lambdas: &[f64], m: usize) -> f64 {
    if m > lambdas.len() {
        return 0.0;
    }
    elementary_symmetric_all(lambdas)[m]
}

/// Limiting eigenbasis of the pencil `A₀ + εA₁`.
#[derive(Clone, Debug)]
pub struct PencilBasis {
    /// Orthonormal basis of range(A₀), ordered by decreasing eigenvalue of A₀.
    pub u0: DMatrix<f64>,
    /// Eigenvectors of the compression of A₁ to the null space of A₀.
    pub u1tilde: DMatrix<f64>,
    /// First-order eigenvalues associated with `u1tilde`, descending.
    pub lambda1: Vec<f64>,
}

pub fn pencil_limit_basis(a0: &SymMatrix, a1: &SymMatrix, tol: f64) -> Result<PencilBasis> {
    let n = a0.n();
    if a1.n() != n {
        return Err(Error::Dimension(format!("A0 is {n}x{n}, A1 is {0}x{0}", a1.n())));
    }
    let spec = sym_eig(a0)?;
    let scale = spec.max_abs();
    let cut = tol * scale;
    if let Some(&neg) = spec.values.iter().find(|&&v| v < -cut) {
        return Err(Error::Precondition(format!(
            "A0 is not PSD (eigenvalue {neg:e})"
        )));
    }
    if let Some(&amb) = spec
        .values
        .iter()
        .find(|&&v| v > cut && v <= AMBIGUITY_FACTOR * cut)
    {
        return Err(Error::RankAmbiguity { value: amb });
    }
    let p = spec.values.iter().filter(|&&v| v > cut).count();
    let u0 = spec.vectors.columns(0, p).into_owned();
    let b = spec.vectors.columns(p, n - p).into_owned();
    let compressed = SymMatrix::symmetrize(b.transpose() * a1.as_matrix() * &b)?;
    let inner = sym_eig(&compressed)?;
    let mut u1tilde = &b * inner.vectors;
    apply_sign_convention(&mut u1tilde);
    Ok(PencilBasis {
        u0,
        u1tilde,
        lambda1: inner.values,
    })
}
