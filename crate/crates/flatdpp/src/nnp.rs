//! Extended L-ensembles parameterized by nonnegative pairs `(L, V)`.
//!
//! A pair is valid when `V` has full column rank and `L` is positive
//! semi-definite on the orthogonal complement of `span V`. The mass of a subset
//! `X` is `(−1)^p det [[L_X, V_X], [V_Xᵀ, 0]]`, where `p` is the number of
//! columns of `V`. When `p = 0` this is an ordinary L-ensemble.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    elementary_symmetric, log_det, orth_complement, orthonormal_basis, saddle_point_det,
    sym_eig, LogDet, SymMatrix,
};

/// Default relative tolerance for the conditional PSD check and spectral truncation.
pub const DEFAULT_CPD_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "NnpDoc", into = "NnpDoc")]
pub struct Nnp {
    l: SymMatrix,
    v: DMatrix<f64>,
    q: DMatrix<f64>,
    ltilde: SymMatrix,
    /// Eigenvectors of `L̃` spanning the complement of `span V`, descending.
    u: DMatrix<f64>,
    /// Matching eigenvalues, clamped at zero.
    lambda: Vec<f64>,
    rank: usize,
    det_vtv: LogDet,
    tol: f64,
}

impl Nnp {
    pub fn new(l: SymMatrix, v: DMatrix<f64>) -> Result<Self> {
        Self::with_tol(l, v, DEFAULT_CPD_TOL)
    }

    /// Builds the pair with a relative tolerance `tol`, scaled by the Frobenius
    /// norm of `L`.
    pub fn with_tol(l: SymMatrix, v: DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = l.n();
        if v.nrows() != n {
            return Err(Error::Dimension(format!(
                "L is {n}x{n} but V has {} rows",
                v.nrows()
            )));
        }
        if !(tol >= 0.0) {
            return Err(Error::Domain(format!("tolerance must be nonnegative, got {tol}")));
        }
        if l.iter().any(|x| !x.is_finite()) || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite entry in L or V".into()));
        }
        let q = orthonormal_basis(&v)?;
        let b = orth_complement(&q);
        let compressed = SymMatrix::symmetrize(b.transpose() * l.as_matrix() * &b)?;
        let spec = sym_eig(&compressed)?;
        let cut = tol * l.norm();
        if let Some(&min) = spec.values.last() {
            if min < -cut {
                return Err(Error::NotConditionallyPsd { min_eig: min, tol: cut });
            }
        }
        let lambda: Vec<f64> = spec.values.iter().map(|&x| x.max(0.0)).collect();
        let rank = lambda.iter().filter(|&&x| x > cut).count();
        let u = &b * &spec.vectors;
        let ltilde = SymMatrix::symmetrize(
            &u * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&lambda))
                * u.transpose(),
        )?;
        let det_vtv = log_det(&(v.transpose() * &v));
        Ok(Nnp {
            l,
            v,
            q,
            ltilde,
            u,
            lambda,
            rank,
            det_vtv,
            tol,
        })
    }

    /// The ordinary L-ensemble `DPP(L)`.
    pub fn l_ensemble(l: SymMatrix) -> Result<Self> {
        let n = l.n();
        Self::new(l, DMatrix::zeros(n, 0))
    }

    /// The projection DPP onto `span V`.
    pub fn projection(v: DMatrix<f64>) -> Result<Self> {
        let n = v.nrows();
        Self::new(SymMatrix::zeros(n), v)
    }

    pub fn n(&self) -> usize {
        self.l.n()
    }

    /// Number of columns of `V`.
    pub fn p(&self) -> usize {
        self.v.ncols()
    }

    /// Numerical rank of `L̃`.
    pub fn q(&self) -> usize {
        self.rank
    }

    pub fn l(&self) -> &SymMatrix {
        &self.l
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Orthonormal basis of `span V`.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// `(I − QQᵀ) L (I − QQᵀ)`.
    pub fn ltilde(&self) -> &SymMatrix {
        &self.ltilde
    }

    /// Leading `q` eigenvectors of `L̃`.
    pub fn utilde(&self) -> DMatrix<f64> {
        self.u.columns(0, self.rank).into_owned()
    }

    /// Leading `q` eigenvalues of `L̃`.
    pub fn lambdatilde(&self) -> &[f64] {
        &self.lambda[..self.rank]
    }

    /// All `n − p` eigenvalues of `L̃` on the complement of `span V`.
    pub fn projected_spectrum(&self) -> &[f64] {
        &self.lambda
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn det_vtv(&self) -> LogDet {
        self.det_vtv
    }

    /// Unnormalized mass of `X`, always nonnegative.
    pub fn pmf_unnorm(&self, x: &[usize]) -> LogDet {
        let p = self.p();
        if x.len() < p {
            return LogDet::ZERO;
        }
        let lx = self.l.principal(x).into_inner();
        let vx = self.v.select_rows(x);
        let d = saddle_point_det(&lx, &vx)
            .expect("dimensions checked")
            .with_parity(p);
        if d.sign < 0 {
            LogDet::ZERO
        } else {
            d
        }
    }

    /// Total unnormalized mass, over subsets of size `m` if given.
    pub fn log_normalization(&self, m: Option<usize>) -> Result<LogDet> {
        let p = self.p();
        match m {
            Some(m) => {
                if m < p || m > self.n() {
                    return Err(Error::Domain(format!(
                        "size {m} outside [{p}, {}]",
                        self.n()
                    )));
                }
                let e = elementary_symmetric(&self.lambda, m - p);
                Ok(LogDet::from_value(e).mul(self.det_vtv))
            }
            None => {
                let log_abs: f64 = self.lambda.iter().map(|&x| x.ln_1p()).sum();
                Ok(LogDet::new(1, log_abs).mul(self.det_vtv))
            }
        }
    }

    pub fn normalization(&self, m: Option<usize>) -> Result<f64> {
        self.log_normalization(m).map(|d| d.value())
    }

    /// `K = QQᵀ + L̃(I + L̃)⁻¹`.
    pub fn marginal_kernel(&self) -> SymMatrix {
        let mut k = &self.q * self.q.transpose();
        for (j, &lam) in self.lambda.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            let c = self.u.column(j);
            k += (lam / (1.0 + lam)) * c * c.transpose();
        }
        SymMatrix::symmetrize(k).expect("square")
    }

    pub fn size_law(&self) -> SizeLaw {
        let pis: Vec<f64> = self.lambda.iter().map(|&l| l / (1.0 + l)).collect();
        let mut probs = vec![0.0; self.n() + 1];
        let bern = poisson_binomial(&pis);
        for (k, pk) in bern.into_iter().enumerate() {
            probs[self.p() + k] = pk;
        }
        SizeLaw { probs }
    }

    /// The law of the complement `Ω ∖ X`, as the pair `(L̃†, Z)` with `Z` a
    /// basis of the directions outside both `span V` and the range of `L̃`.
    pub fn complement(&self) -> Result<Nnp> {
        let n = self.n();
        let u = self.utilde();
        let inv: Vec<f64> = self.lambdatilde().iter().map(|&l| 1.0 / l).collect();
        let pinv = SymMatrix::from_spectral(&u, &inv);
        let mut joint = DMatrix::zeros(n, self.p() + self.rank);
        joint.columns_mut(0, self.p()).copy_from(&self.q);
        joint.columns_mut(self.p(), self.rank).copy_from(&u);
        let z = orth_complement(&joint);
        Nnp::with_tol(pinv, z, self.tol)
    }

    /// Reparameterizes as `(L + V Sᵀ + S Vᵀ, V R)` with `S = (Xm + Ym)/2`.
    /// Both changes leave the process unchanged.
    pub fn apply_invariances(
        &self,
        r: &DMatrix<f64>,
        xm: &DMatrix<f64>,
        ym: &DMatrix<f64>,
    ) -> Result<Nnp> {
        let (n, p) = self.v.shape();
        if r.shape() != (p, p) || xm.shape() != (n, p) || ym.shape() != (n, p) {
            return Err(Error::Dimension(format!(
                "expected R {p}x{p} and perturbations {n}x{p}"
            )));
        }
        if p > 0 && log_det(r).is_zero() {
            return Err(Error::Rank("R is singular".into()));
        }
        let s = (xm + ym) * 0.5;
        let st = &self.v * s.transpose();
        let l = SymMatrix::symmetrize(self.l.as_matrix() + &st + st.transpose())?;
        Nnp::with_tol(l, &self.v * r, self.tol)
    }
}

/// Builds the pair whose process has marginal kernel `K`.
///
/// Unit eigenvectors of `K` form `V`; the remaining spectrum gives
/// `L = K (I − K)†`.
pub fn nnp_from_kernel(k: &SymMatrix, tol: f64) -> Result<Nnp> {
    let spec = sym_eig(k)?;
    let n = k.n();
    if let Some(&bad) = spec
        .values
        .iter()
        .find(|&&x| x < -tol || x > 1.0 + tol)
    {
        return Err(Error::InvalidKernel { value: bad });
    }
    let ones: Vec<usize> = (0..n).filter(|&i| spec.values[i] >= 1.0 - tol).collect();
    let rest: Vec<usize> = (0..n).filter(|&i| spec.values[i] < 1.0 - tol).collect();
    let v = spec.vectors.select_columns(&ones);
    let u = spec.vectors.select_columns(&rest);
    let lam: Vec<f64> = rest
        .iter()
        .map(|&i| {
            let x = spec.values[i];
            if x <= tol {
                0.0
            } else {
                x / (1.0 - x)
            }
        })
        .collect();
    Nnp::new(SymMatrix::from_spectral(&u, &lam), v)
}

/// Distribution of the sample size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeLaw {
    pub probs: Vec<f64>,
}

impl SizeLaw {
    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(m, p)| m as f64 * p).sum()
    }

    /// Sizes carrying probability at least `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        (0..self.probs.len())
            .filter(|&m| self.probs[m] >= threshold)
            .collect()
    }

    /// Sum of absolute differences, padding the shorter law with zeros.
    pub fn tv(&self, other: &SizeLaw) -> f64 {
        let len = self.probs.len().max(other.probs.len());
        (0..len)
            .map(|m| {
                let a = self.probs.get(m).copied().unwrap_or(0.0);
                let b = other.probs.get(m).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .sum()
    }
}

/// Law of the number of successes among independent Bernoulli trials.
pub fn poisson_binomial(pis: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; pis.len() + 1];
    out[0] = 1.0;
    for (i, &pi) in pis.iter().enumerate() {
        for k in (0..=i + 1).rev() {
            let stay = out[k] * (1.0 - pi);
            let step = if k > 0 { out[k - 1] * pi } else { 0.0 };
            out[k] = stay + step;
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct NnpDoc {
    n: usize,
    p: usize,
    #[serde(rename = "L")]
    l: Vec<f64>,
    #[serde(rename = "V")]
    v: Vec<f64>,
}

impl TryFrom<NnpDoc> for Nnp {
    type Error = Error;

    fn try_from(doc: NnpDoc) -> Result<Self> {
        if doc.l.len() != doc.n * doc.n || doc.v.len() != doc.n * doc.p {
            return Err(Error::Parse(format!(
                "expected {} entries in L and {} in V, got {} and {}",
                doc.n * doc.n,
                doc.n * doc.p,
                doc.l.len(),
                doc.v.len()
            )));
        }
        let l = SymMatrix::new(DMatrix::from_row_slice(doc.n, doc.n, &doc.l))?;
        let v = DMatrix::from_row_slice(doc.n, doc.p, &doc.v);
        Nnp::new(l, v)
    }
}

impl From<Nnp> for NnpDoc {
    fn from(nnp: Nnp) -> Self {
        let row_major = |m: &DMatrix<f64>| m.transpose().iter().copied().collect::<Vec<_>>();
        NnpDoc {
            n: nnp.n(),
            p: nnp.p(),
            l: row_major(nnp.l.as_matrix()),
            v: row_major(&nnp.v),
        }
    }
}
