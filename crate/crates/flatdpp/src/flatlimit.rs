//! Limits of kernel L-ensembles as the length-scale diverges, and limits of
//! matrix pencils `εA + VVᵀ`.
//!
//! Every constructor returns a [`ProcessDescriptor`]; the limit pmf is then
//! available through enumeration and the limit process can be sampled.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{distance_matrix, GroundSet, KernelSpec, Smoothness};
use crate::linalg::{LogDet, SymMatrix};
use crate::nnp::{Nnp, SizeLaw};
use crate::poly::{degree_for_size, dim_poly, vandermonde, vandermonde_block, wbar_schur, wronskian};
use crate::sampling::{sample_dpp, sample_fixed_dpp, Sample};
use crate::verify::{enumerate_pmf, indices_mask, PmfTable};

/// A limiting point process.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum ProcessDescriptor {
    /// Projection DPP onto `span V`; the pair has `L = 0`.
    #[serde(rename = "ProjectionDPP")]
    ProjectionDpp { nnp: Nnp },
    /// `|DPP|_m(L)` for a PSD `L`.
    #[serde(rename = "FixedSizeLEnsemble")]
    FixedSizeLEnsemble { nnp: Nnp, m: usize },
    /// `|ppDPP|_m⟨L, V⟩`.
    #[serde(rename = "PPDPPFixed")]
    PpDppFixed { nnp: Nnp, m: usize },
    /// `DPP⟨L, V⟩`. The scale `alpha` is already folded into `L` and is kept
    /// for reference.
    #[serde(rename = "PPDPPVarying")]
    PpDppVarying { nnp: Nnp, alpha: f64 },
    /// The whole ground set, almost surely.
    #[serde(rename = "DeterministicFull")]
    DeterministicFull { n: usize },
}

impl ProcessDescriptor {
    pub fn tag(&self) -> &'static str {
        match self {
            ProcessDescriptor::ProjectionDpp { .. } => "ProjectionDPP",
            ProcessDescriptor::FixedSizeLEnsemble { .. } => "FixedSizeLEnsemble",
            ProcessDescriptor::PpDppFixed { .. } => "PPDPPFixed",
            ProcessDescriptor::PpDppVarying { .. } => "PPDPPVarying",
            ProcessDescriptor::DeterministicFull { .. } => "DeterministicFull",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ProcessDescriptor::DeterministicFull { n } => *n,
            _ => self.nnp().expect("carries a pair").n(),
        }
    }

    pub fn nnp(&self) -> Option<&Nnp> {
        match self {
            ProcessDescriptor::ProjectionDpp { nnp }
            | ProcessDescriptor::FixedSizeLEnsemble { nnp, .. }
            | ProcessDescriptor::PpDppFixed { nnp, .. }
            | ProcessDescriptor::PpDppVarying { nnp, .. } => Some(nnp),
            ProcessDescriptor::DeterministicFull { .. } => None,
        }
    }

    /// The sample size when it is deterministic.
    pub fn fixed_size(&self) -> Option<usize> {
        match self {
            ProcessDescriptor::ProjectionDpp { nnp } => Some(nnp.p()),
            ProcessDescriptor::FixedSizeLEnsemble { m, .. }
            | ProcessDescriptor::PpDppFixed { m, .. } => Some(*m),
            ProcessDescriptor::PpDppVarying { .. } => None,
            ProcessDescriptor::DeterministicFull { n } => Some(*n),
        }
    }

    /// Unnormalized mass of `X`.
    pub fn mass(&self, x: &[usize]) -> LogDet {
        match (self.nnp(), self.fixed_size()) {
            (_, Some(m)) if x.len() != m => LogDet::ZERO,
            (Some(nnp), _) => nnp.pmf_unnorm(x),
            (None, _) => LogDet::ONE,
        }
    }

    pub fn pmf_table(&self) -> Result<PmfTable> {
        match self {
            ProcessDescriptor::DeterministicFull { n } => {
                let mut probs = vec![0.0; 1 << n];
                probs[indices_mask(&(0..*n).collect::<Vec<_>>())] = 1.0;
                PmfTable::from_probs(*n, &probs)
            }
            _ => enumerate_pmf(self.nnp().expect("carries a pair"), self.fixed_size()),
        }
    }

    pub fn size_law(&self) -> SizeLaw {
        let n = self.n();
        match (self, self.fixed_size()) {
            (ProcessDescriptor::PpDppVarying { nnp, .. }, _) => nnp.size_law(),
            (_, Some(m)) => {
                let mut probs = vec![0.0; n + 1];
                probs[m] = 1.0;
                SizeLaw { probs }
            }
            _ => unreachable!("every other variant has a fixed size"),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Sample> {
        match self {
            ProcessDescriptor::ProjectionDpp { nnp } => sample_dpp(nnp, rng),
            ProcessDescriptor::FixedSizeLEnsemble { nnp, m }
            | ProcessDescriptor::PpDppFixed { nnp, m } => sample_fixed_dpp(nnp, *m, rng),
            ProcessDescriptor::PpDppVarying { nnp, .. } => sample_dpp(nnp, rng),
            ProcessDescriptor::DeterministicFull { n } => Ok((0..*n).collect()),
        }
    }
}

/// Which limit theorem a fixed-size limit comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedRegime {
    /// `m` is a magic number below the smoothness: a universal projection DPP.
    Projection,
    /// `m` exceeds the polynomial space the kernel can resolve.
    FiniteSmoothness,
    /// `m` falls strictly between two magic numbers.
    Wronskian,
}

impl fmt::Display for FixedRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixedRegime::Projection => "projection",
            FixedRegime::FiniteSmoothness => "finite-smoothness",
            FixedRegime::Wronskian => "wronskian",
        })
    }
}

pub fn fixed_regime(r: Smoothness, d: usize, m: usize) -> FixedRegime {
    if let Some(r) = r.finite() {
        if m >= dim_poly(r as i64 - 1, d) {
            return if m == dim_poly(r as i64 - 1, d) {
                FixedRegime::Projection
            } else {
                FixedRegime::FiniteSmoothness
            };
        }
    }
    let k = degree_for_size(m, d);
    if dim_poly(k as i64, d) == m {
        FixedRegime::Projection
    } else {
        FixedRegime::Wronskian
    }
}

/// Limit of `|DPP|_m(L(ε))` as `ε → 0`.
pub fn fixed_limit(kernel: &KernelSpec, gs: &GroundSet, m: usize) -> Result<ProcessDescriptor> {
    let (n, d) = (gs.n(), gs.d());
    if m == 0 || m > n {
        return Err(Error::Domain(format!("size {m} outside [1, {n}]")));
    }
    match fixed_regime(kernel.r(), d, m) {
        FixedRegime::Projection => {
            let k = degree_for_size(m, d);
            let nnp = Nnp::projection(vandermonde(gs, k)).map_err(degenerate)?;
            Ok(ProcessDescriptor::ProjectionDpp { nnp })
        }
        FixedRegime::FiniteSmoothness => {
            let r = kernel.r().finite().expect("finite smoothness");
            let nnp = finite_smoothness_pair(gs, r, 1.0)?;
            Ok(ProcessDescriptor::PpDppFixed { nnp, m })
        }
        FixedRegime::Wronskian => {
            let k = degree_for_size(m, d);
            let nnp = wronskian_pair(kernel, gs, k, 1.0)?;
            Ok(ProcessDescriptor::PpDppFixed { nnp, m })
        }
    }
}

/// A scaling `α ε^{−scale_power}` of the kernel matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub scale_power: u32,
    pub alpha: f64,
}

impl PhasePoint {
    pub fn new(scale_power: u32, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        Ok(PhasePoint { scale_power, alpha })
    }

    /// `l`: whichever of `p/2` and `(p+1)/2` is an integer.
    pub fn l(&self) -> usize {
        (self.scale_power as usize).div_ceil(2)
    }
}

/// Region of the phase diagram of the varying-size limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VaryingRegime {
    /// The whole ground set is selected.
    Full,
    /// Odd scale power below the smoothness: a projection DPP.
    Projection,
    /// Even scale power below the smoothness: sizes between two magic numbers.
    Mixture,
    /// Scale power matched to the smoothness.
    Critical,
}

impl fmt::Display for VaryingRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VaryingRegime::Full => "full",
            VaryingRegime::Projection => "projection",
            VaryingRegime::Mixture => "mixture",
            VaryingRegime::Critical => "critical",
        })
    }
}

pub fn varying_regime(r: Smoothness, n: usize, d: usize, phase: PhasePoint) -> VaryingRegime {
    let p = phase.scale_power as usize;
    let l = phase.l();
    if dim_poly(l as i64 - 1, d) >= n {
        return VaryingRegime::Full;
    }
    match r.finite() {
        Some(r) if 2 * r < p + 1 => VaryingRegime::Full,
        Some(r) if 2 * r == p + 1 => VaryingRegime::Critical,
        _ if p % 2 == 1 => VaryingRegime::Projection,
        _ => VaryingRegime::Mixture,
    }
}

/// Sizes that the limit of `DPP(α ε^{−p} L(ε))` can take.
pub fn predicted_sizes(r: Smoothness, n: usize, d: usize, phase: PhasePoint) -> Vec<usize> {
    let l = phase.l() as i64;
    match varying_regime(r, n, d, phase) {
        VaryingRegime::Full => vec![n],
        VaryingRegime::Projection => vec![dim_poly(l - 1, d)],
        VaryingRegime::Mixture => (dim_poly(l - 1, d)..=dim_poly(l, d).min(n)).collect(),
        VaryingRegime::Critical => (dim_poly(l - 1, d)..=n).collect(),
    }
}

/// Limit of `DPP(α ε^{−p} L(ε))` as `ε → 0`.
pub fn varying_limit(
    kernel: &KernelSpec,
    gs: &GroundSet,
    phase: PhasePoint,
) -> Result<ProcessDescriptor> {
    PhasePoint::new(phase.scale_power, phase.alpha)?;
    let (n, d) = (gs.n(), gs.d());
    let l = phase.l();
    match varying_regime(kernel.r(), n, d, phase) {
        VaryingRegime::Full => Ok(ProcessDescriptor::DeterministicFull { n }),
        VaryingRegime::Projection => {
            let nnp = Nnp::projection(vandermonde(gs, l - 1)).map_err(degenerate)?;
            Ok(ProcessDescriptor::ProjectionDpp { nnp })
        }
        VaryingRegime::Mixture => {
            let nnp = wronskian_pair(kernel, gs, l, phase.alpha)?;
            Ok(ProcessDescriptor::PpDppVarying {
                nnp,
                alpha: phase.alpha,
            })
        }
        VaryingRegime::Critical => {
            let r = kernel.r().finite().expect("critical regime has finite r");
            let f = kernel.coeff(2 * r - 1)?;
            let nnp = finite_smoothness_pair(gs, r, phase.alpha * f.abs())?;
            Ok(ProcessDescriptor::PpDppVarying {
                nnp,
                alpha: phase.alpha,
            })
        }
    }
}

/// `γ` in the univariate even-power regime, where the limit has size `l`
/// with probability `1/(1 + αγ)` and `l + 1` otherwise.
pub fn gamma_even_case(kernel: &KernelSpec, gs: &GroundSet, l: usize) -> Result<f64> {
    if gs.d() != 1 {
        return Err(Error::Precondition("γ is defined for univariate ground sets".into()));
    }
    let v = vandermonde(gs, l);
    let gram_inv = (v.transpose() * &v)
        .try_inverse()
        .ok_or_else(|| Error::DegeneratePoints("V_{≤l}ᵀV_{≤l} is singular".into()))?;
    let w = wronskian(kernel, l, 1)?;
    let w_inv = w
        .matrix
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("Wronskian is singular".into()))?;
    Ok(1.0 / (gram_inv[(l, l)] * w_inv[(l, l)]))
}

/// Limit of `|DPP|_m(εA + VVᵀ)` as `ε → 0`.
pub fn pencil_fixed_limit(
    a: &SymMatrix,
    v: &DMatrix<f64>,
    m: usize,
) -> Result<ProcessDescriptor> {
    let (n, p) = v.shape();
    check_pencil(a, v)?;
    if m == 0 || m > n {
        return Err(Error::Domain(format!("size {m} outside [1, {n}]")));
    }
    if m < p {
        let nnp = Nnp::l_ensemble(SymMatrix::symmetrize(v * v.transpose())?)?;
        Ok(ProcessDescriptor::FixedSizeLEnsemble { nnp, m })
    } else if m == p {
        Ok(ProcessDescriptor::ProjectionDpp {
            nnp: Nnp::projection(v.clone())?,
        })
    } else {
        Ok(ProcessDescriptor::PpDppFixed {
            nnp: Nnp::new(a.clone(), v.clone())?,
            m,
        })
    }
}

/// Limit of `DPP(εA + VVᵀ)`, or of `DPP(ε⁻¹(εA + VVᵀ))` when `rescaled`.
pub fn pencil_varying_limit(
    a: &SymMatrix,
    v: &DMatrix<f64>,
    rescaled: bool,
) -> Result<ProcessDescriptor> {
    check_pencil(a, v)?;
    let nnp = if v.ncols() == 0 {
        Nnp::l_ensemble(a.clone())?
    } else if rescaled {
        Nnp::new(a.clone(), v.clone())?
    } else {
        Nnp::l_ensemble(SymMatrix::symmetrize(v * v.transpose())?)?
    };
    Ok(ProcessDescriptor::PpDppVarying { nnp, alpha: 1.0 })
}

/// The scale `β` with `Σ βλᵢ/(1 + βλᵢ) = m`.
pub fn solve_scaling(eigenvalues: &[f64], m: f64) -> Result<f64> {
    let positive = eigenvalues.iter().filter(|&&l| l > 0.0).count();
    if !(m > 0.0) || m >= positive as f64 {
        return Err(Error::Domain(format!(
            "target size {m} must lie in (0, {positive})"
        )));
    }
    let s = |beta: f64| -> f64 {
        eigenvalues
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| beta * l / (1.0 + beta * l))
            .sum()
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while s(hi) < m {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical("scaling bracket diverged".into()));
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if s(mid) < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = if (s(lo) - m).abs() < (s(hi) - m).abs() { lo } else { hi };
    Ok(beta)
}

/// `(c (−1)^r D^(2r−1), V_{≤r−1})`.
fn finite_smoothness_pair(gs: &GroundSet, r: usize, c: f64) -> Result<Nnp> {
    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
    let l = distance_matrix(gs, (2 * r - 1) as u32).scale(c * sign);
    Nnp::new(l, vandermonde(gs, r - 1)).map_err(degenerate)
}

/// `(c V_k W̄ V_kᵀ, V_{≤k−1})`.
fn wronskian_pair(kernel: &KernelSpec, gs: &GroundSet, k: usize, c: f64) -> Result<Nnp> {
    let w = wronskian(kernel, k, gs.d())?;
    let wbar = wbar_schur(&w)?;
    let vk = vandermonde_block(gs, k);
    let l = SymMatrix::symmetrize(&vk * wbar * vk.transpose() * c)?;
    let v = if k == 0 {
        DMatrix::zeros(gs.n(), 0)
    } else {
        vandermonde(gs, k - 1)
    };
    Nnp::new(l, v).map_err(degenerate)
}

fn check_pencil(a: &SymMatrix, v: &DMatrix<f64>) -> Result<()> {
    if v.nrows() != a.n() {
        return Err(Error::Dimension(format!(
            "A is {n}x{n} but V has {} rows",
            v.nrows(),
            n = a.n()
        )));
    }
    Ok(())
}

fn degenerate(e: Error) -> Error {
    match e {
        Error::Rank(msg) => Error::DegeneratePoints(format!(
            "points are not unisolvent for the polynomial space: {msg}"
        )),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{mask_indices, tv_distance};
    use approx::assert_relative_eq;

    #[test]
    fn univariate_smooth_limit_is_the_vandermonde_projection() {
        let xs = [0.0, 0.2, 0.45, 0.7, 1.0];
        let gs = GroundSet::line(&xs).unwrap();
        let lim = fixed_limit(&KernelSpec::gaussian(), &gs, 3).unwrap();
        assert_eq!(lim.tag(), "ProjectionDPP");
        let t = lim.pmf_table().unwrap();
        let mut raw = vec![0.0; 32];
        for (mask, r) in raw.iter_mut().enumerate() {
            let x = mask_indices(mask);
            if x.len() == 3 {
                *r = x
                    .iter()
                    .enumerate()
                    .flat_map(|(a, &i)| x[a + 1..].iter().map(move |&j| (xs[i] - xs[j]).powi(2)))
                    .product();
            }
        }
        let oracle = PmfTable::from_probs(5, &raw).unwrap();
        assert!(tv_distance(&t, &oracle).unwrap() < 1e-12);
    }

    #[test]
    fn exponential_limit_uses_minus_distance() {
        let gs = GroundSet::line(&[0.0, 0.3, 0.5, 0.9]).unwrap();
        for m in 1..=4 {
            let lim = fixed_limit(&KernelSpec::exponential(), &gs, m).unwrap();
            let nnp = lim.nnp().unwrap();
            assert_eq!(nnp.p(), 1);
            if m > 1 {
                assert_relative_eq!(
                    nnp.l().as_matrix(),
                    &(distance_matrix(&gs, 1).scale(-1.0).into_inner()),
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn bivariate_sizes_between_magic_numbers() {
        let gs = GroundSet::uniform(8, 2, 7).unwrap();
        let a = fixed_limit(&KernelSpec::matern32(), &gs, 2).unwrap();
        assert_eq!(a.tag(), "PPDPPFixed");
        assert_eq!(fixed_regime(Smoothness::Finite(2), 2, 2), FixedRegime::Wronskian);
        for m in [1, 3] {
            assert_eq!(fixed_limit(&KernelSpec::matern32(), &gs, m).unwrap().tag(), "ProjectionDPP");
        }
        assert_eq!(fixed_limit(&KernelSpec::matern32(), &gs, 4).unwrap().tag(), "PPDPPFixed");

        // For k = 1 the Schur complement is a multiple of the identity, so the
        // kernel drops out; from k = 2 on it does not.
        let g = fixed_limit(&KernelSpec::gaussian(), &gs, 2).unwrap();
        let ta = a.pmf_table().unwrap();
        assert!(tv_distance(&ta, &g.pmf_table().unwrap()).unwrap() < 1e-10);
        let g4 = fixed_limit(&KernelSpec::gaussian(), &gs, 4).unwrap();
        let m4 = fixed_limit(&KernelSpec::matern52(), &gs, 4).unwrap();
        assert_eq!(m4.tag(), "PPDPPFixed");
        assert!(tv_distance(&g4.pmf_table().unwrap(), &m4.pmf_table().unwrap()).unwrap() > 1e-6);
    }

    #[test]
    fn phase_examples() {
        let gs = GroundSet::line(&[0.0, 0.2, 0.35, 0.6, 0.8, 1.0]).unwrap();
        let g = KernelSpec::gaussian();
        let lim = varying_limit(&g, &gs, PhasePoint::new(3, 1.0).unwrap()).unwrap();
        assert_eq!(lim.tag(), "ProjectionDPP");
        assert_eq!(lim.fixed_size(), Some(2));

        let e = KernelSpec::exponential();
        let lim = varying_limit(&e, &gs, PhasePoint::new(1, 2.0).unwrap()).unwrap();
        assert_eq!(lim.tag(), "PPDPPVarying");
        let nnp = lim.nnp().unwrap();
        assert_relative_eq!(
            nnp.l().as_matrix(),
            &distance_matrix(&gs, 1).scale(-2.0).into_inner(),
            epsilon = 1e-15
        );

        let lim = varying_limit(&g, &gs, PhasePoint::new(11, 1.0).unwrap()).unwrap();
        assert_eq!(lim.tag(), "DeterministicFull");
        assert_eq!(lim.pmf_table().unwrap().prob(63), 1.0);
        assert_eq!(
            varying_regime(Smoothness::Finite(1), 6, 1, PhasePoint::new(2, 1.0).unwrap()),
            VaryingRegime::Full
        );
        assert_eq!(predicted_sizes(Smoothness::Infinite, 10, 2, PhasePoint::new(4, 1.0).unwrap()), vec![3, 4, 5, 6]);
        assert!(PhasePoint::new(1, 0.0).is_err());
    }

    #[test]
    fn exponential_critical_pmf_is_proportional_to_gaps() {
        // DPP⟨−αD^(1), 𝟙⟩ gives mass ∝ (2α)^{m−1} Π gaps for sorted subsets.
        let xs = [0.0, 0.1, 0.4, 0.55, 0.9];
        let gs = GroundSet::line(&xs).unwrap();
        let alpha = 1.7;
        let lim = varying_limit(&KernelSpec::exponential(), &gs, PhasePoint::new(1, alpha).unwrap()).unwrap();
        let t = lim.pmf_table().unwrap();
        let mut raw = vec![0.0; 32];
        for (mask, r) in raw.iter_mut().enumerate() {
            let x = mask_indices(mask);
            if !x.is_empty() {
                let gaps: f64 = x.windows(2).map(|w| xs[w[1]] - xs[w[0]]).product();
                *r = (2.0 * alpha).powi(x.len() as i32 - 1) * gaps;
            }
        }
        let oracle = PmfTable::from_probs(5, &raw).unwrap();
        assert!(tv_distance(&t, &oracle).unwrap() < 1e-12);
    }

    #[test]
    fn gamma_forms_agree() {
        let gs = GroundSet::line(&[0.0, 0.15, 0.5, 0.6, 0.85, 1.0, 0.3]).unwrap();
        let k = KernelSpec::gaussian();
        for l in 1..=3 {
            let gamma = gamma_even_case(&k, &gs, l).unwrap();
            let det_ratio = |j: usize| {
                let v = vandermonde(&gs, j);
                (v.transpose() * &v).determinant() * wronskian(&k, j, 1).unwrap().matrix.determinant()
            };
            assert_relative_eq!(gamma, det_ratio(l) / det_ratio(l - 1), max_relative = 1e-10);
            let lim = varying_limit(&k, &gs, PhasePoint::new(2 * l as u32, 1.0).unwrap()).unwrap();
            let law = lim.size_law();
            assert_relative_eq!(law.probs[l], 1.0 / (1.0 + gamma), max_relative = 1e-9);
            let doubled = varying_limit(&k, &gs, PhasePoint::new(2 * l as u32, 2.0).unwrap())
                .unwrap()
                .size_law();
            assert_relative_eq!(
                doubled.probs[l] / doubled.probs[l + 1],
                0.5 * law.probs[l] / law.probs[l + 1],
                max_relative = 1e-9
            );
        }
        let flat = GroundSet::uniform(5, 2, 1).unwrap();
        assert!(gamma_even_case(&k, &flat, 1).is_err());
    }

    #[test]
    fn zero_power_gamma_is_n_f0() {
        let gs = GroundSet::line(&[0.0, 0.3, 0.5, 1.0]).unwrap();
        let k = KernelSpec::matern52();
        let lim = varying_limit(&k, &gs, PhasePoint::new(0, 0.5).unwrap()).unwrap();
        let law = lim.size_law();
        let gamma = 4.0 * k.taylor()[0];
        assert_relative_eq!(law.probs[0], 1.0 / (1.0 + 0.5 * gamma), epsilon = 1e-12);
    }

    #[test]
    fn pencil_examples() {
        let v = DMatrix::from_row_slice(5, 2, &[1.0, 0.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.5, 1.0, 2.5]);
        let a = SymMatrix::from_diagonal(&[1.0, 2.0, 0.5, 1.5, 1.0]);
        let lim = pencil_fixed_limit(&a, &v, 2).unwrap();
        assert_eq!(lim.tag(), "ProjectionDPP");
        let t = lim.pmf_table().unwrap();
        let mut raw = vec![0.0; 32];
        for (mask, r) in raw.iter_mut().enumerate() {
            let x = mask_indices(mask);
            if x.len() == 2 {
                *r = v.select_rows(&x).determinant().powi(2);
            }
        }
        assert!(tv_distance(&t, &PmfTable::from_probs(5, &raw).unwrap()).unwrap() < 1e-12);
        assert_eq!(pencil_fixed_limit(&a, &v, 1).unwrap().tag(), "FixedSizeLEnsemble");
        assert_eq!(pencil_fixed_limit(&a, &v, 3).unwrap().tag(), "PPDPPFixed");

        let plain = pencil_varying_limit(&a, &v, false).unwrap();
        assert!(plain.size_law().mean() <= 2.0);
        let scaled = pencil_varying_limit(&a, &v, true).unwrap();
        let nnp = scaled.nnp().unwrap();
        let expected = 2.0 + nnp.lambdatilde().iter().map(|l| l / (1.0 + l)).sum::<f64>();
        assert_relative_eq!(scaled.size_law().mean(), expected, epsilon = 1e-12);
        let empty = pencil_varying_limit(&a, &DMatrix::zeros(5, 0), true).unwrap();
        assert_eq!(empty.nnp().unwrap().l(), &a);
    }

    #[test]
    fn scaling_examples() {
        assert_relative_eq!(solve_scaling(&[1.0, 1.0], 1.0).unwrap(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(solve_scaling(&[1.0], 0.5).unwrap(), 1.0, epsilon = 1e-10);
        assert!(solve_scaling(&[1.0, 0.0], 1.0).is_err());
        let lam = [3.0, 1.2, 0.4, 0.05, 2.2, 0.9];
        let beta = solve_scaling(&lam, 2.5).unwrap();
        let s = |b: f64| lam.iter().map(|&l| b * l / (1.0 + b * l)).sum::<f64>();
        assert!((s(beta) - 2.5).abs() < 1e-10);
        let grid = (1..200_000)
            .map(|i| i as f64 * 1e-5)
            .min_by(|a, b| (s(*a) - 2.5).abs().total_cmp(&(s(*b) - 2.5).abs()))
            .unwrap();
        assert!((grid - beta).abs() < 2e-5);
    }

    #[test]
    fn descriptor_json_round_trip() {
        let gs = GroundSet::line(&[0.0, 0.5, 1.0]).unwrap();
        let lim = fixed_limit(&KernelSpec::exponential(), &gs, 2).unwrap();
        let s = serde_json::to_string(&lim).unwrap();
        assert!(s.starts_with(r#"{"tag":"PPDPPFixed","nnp":{"n":3,"p":1"#));
        let back: ProcessDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(back.fixed_size(), Some(2));
    }
}
