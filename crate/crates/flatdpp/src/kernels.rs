//! Stationary kernels `κ(x, y) = f(‖x − y‖)` with their Taylor data, plus
//! kernel, distance and truncated-expansion matrices on a ground set.

use std::fmt;
use std::sync::Arc;

use astro_float::BigFloat;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hp::Hp;
use crate::linalg::SymMatrix;

/// Number of Taylor coefficients stored for builtin kernels.
pub const TAYLOR_LEN: usize = 48;

/// Smoothness order: index of the first nonzero odd Taylor coefficient
/// `f_{2r−1}`, or infinite when every odd coefficient vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Smoothness {
    Finite(usize),
    Infinite,
}

impl Smoothness {
    pub fn finite(self) -> Option<usize> {
        match self {
            Smoothness::Finite(r) => Some(r),
            Smoothness::Infinite => None,
        }
    }

    /// Whether the Wronskian of order `k` is defined, i.e. `k ≤ r − 1`.
    pub fn allows_wronskian(self, k: usize) -> bool {
        match self {
            Smoothness::Finite(r) => k < r,
            Smoothness::Infinite => true,
        }
    }

    /// `r ≥ m`, with `∞ ≥ m` for every `m`.
    pub fn at_least(self, m: usize) -> bool {
        match self {
            Smoothness::Finite(r) => r >= m,
            Smoothness::Infinite => true,
        }
    }
}

impl fmt::Display for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothness::Finite(r) => write!(f, "{r}"),
            Smoothness::Infinite => write!(f, "inf"),
        }
    }
}

pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Gaussian,
    Exponential,
    Matern32,
    Matern52,
    DampedSine,
    Custom(Profile),
}

/// A stationary kernel given by its radial profile `f` and Taylor coefficients
/// `f_i = f⁽ⁱ⁾(0)/i!`.
#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    shape: Shape,
    taylor: Vec<f64>,
    r: Smoothness,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("name", &self.name)
            .field("r", &self.r)
            .field("taylor", &&self.taylor[..self.taylor.len().min(6)])
            .finish()
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

fn alternating(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Smoothness order implied by the stored coefficients.
fn detect_smoothness(taylor: &[f64]) -> Smoothness {
    for (i, &c) in taylor.iter().enumerate() {
        if i % 2 == 1 && c != 0.0 {
            return Smoothness::Finite(i.div_ceil(2));
        }
    }
    Smoothness::Infinite
}

impl KernelSpec {
    fn builtin(name: &str, shape: Shape, coeff: impl Fn(usize) -> f64) -> Self {
        let taylor: Vec<f64> = (0..TAYLOR_LEN).map(coeff).collect();
        let r = detect_smoothness(&taylor);
        KernelSpec {
            name: name.to_string(),
            shape,
            taylor,
            r,
        }
    }

    /// `exp(−t²)`, r = ∞.
    pub fn gaussian() -> Self {
        Self::builtin("gaussian", Shape::Gaussian, |k| {
            if k % 2 == 0 {
                alternating(k / 2) / factorial(k / 2)
            } else {
                0.0
            }
        })
    }

    /// `exp(−t)`, r = 1.
    pub fn exponential() -> Self {
        Self::builtin("exponential", Shape::Exponential, |k| {
            alternating(k) / factorial(k)
        })
    }

    /// `(1 + t) exp(−t)`, r = 2.
    pub fn matern32() -> Self {
        Self::builtin("matern32", Shape::Matern32, |k| {
            alternating(k) * (1.0 - k as f64) / factorial(k)
        })
    }

    /// `(3 + 3t + t²) exp(−t)`, r = 3.
    pub fn matern52() -> Self {
        Self::builtin("matern52", Shape::Matern52, |k| {
            let k_f = k as f64;
            alternating(k) * (k_f - 1.0) * (k_f - 3.0) / factorial(k)
        })
    }

    /// `sin(t + π/4) exp(−t)`, r = 2.
    pub fn damped_sine() -> Self {
        // Coefficients of Im(e^{(−1+i)t} e^{iπ/4}) built from powers of (−1 + i).
        let mut powers = Vec::with_capacity(TAYLOR_LEN);
        let (mut re, mut im) = (1.0_f64, 0.0_f64);
        for _ in 0..TAYLOR_LEN {
            powers.push((re, im));
            (re, im) = (-re - im, re - im);
        }
        Self::builtin("damped-sine", Shape::DampedSine, |k| {
            let (re, im) = powers[k];
            (re + im) * std::f64::consts::FRAC_1_SQRT_2 / factorial(k)
        })
    }

    /// A user-supplied kernel. The declared smoothness must agree with the
    /// coefficients: `f_{2i−1} = 0` for `i < r`, `f_{2r−1}` present and nonzero,
    /// and of sign `(−1)^r`. For `r = ∞` every stored odd coefficient must be 0.
    pub fn custom(
        name: impl Into<String>,
        profile: Profile,
        taylor: Vec<f64>,
        r: Smoothness,
    ) -> Result<Self> {
        if taylor.is_empty() {
            return Err(Error::Domain("a kernel needs at least f₀".into()));
        }
        match r {
            Smoothness::Finite(0) => {
                return Err(Error::Domain("smoothness order starts at 1".into()))
            }
            Smoothness::Finite(rr) => {
                if taylor.len() < 2 * rr {
                    return Err(Error::Domain(format!(
                        "r = {rr} needs coefficients up to f_{}",
                        2 * rr - 1
                    )));
                }
            }
            Smoothness::Infinite => {}
        }
        let detected = detect_smoothness(&taylor);
        if detected != r {
            return Err(Error::Domain(format!(
                "declared smoothness {r} but coefficients imply {detected}"
            )));
        }
        let spec = KernelSpec {
            name: name.into(),
            shape: Shape::Custom(profile),
            taylor,
            r,
        };
        spec.check_sign()?;
        Ok(spec)
    }

    fn check_sign(&self) -> Result<()> {
        if let Smoothness::Finite(r) = self.r {
            let c = self.taylor[2 * r - 1];
            if c * alternating(r) <= 0.0 {
                return Err(Error::Domain(format!(
                    "f_{} = {c} must have sign (−1)^{r}",
                    2 * r - 1
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn r(&self) -> Smoothness {
        self.r
    }

    pub fn taylor(&self) -> &[f64] {
        &self.taylor
    }

    pub fn coeff(&self, i: usize) -> Result<f64> {
        self.taylor.get(i).copied().ok_or_else(|| {
            Error::Domain(format!(
                "kernel {} stores {} Taylor coefficients, f_{i} requested",
                self.name,
                self.taylor.len()
            ))
        })
    }

    /// Whether the profile has an arbitrary-precision evaluator.
    pub fn is_builtin(&self) -> bool {
        !matches!(self.shape, Shape::Custom(_))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Gaussian => (-t * t).exp(),
            Shape::Exponential => (-t).exp(),
            Shape::Matern32 => (1.0 + t) * (-t).exp(),
            Shape::Matern52 => (3.0 + 3.0 * t + t * t) * (-t).exp(),
            Shape::DampedSine => (t + std::f64::consts::FRAC_PI_4).sin() * (-t).exp(),
            Shape::Custom(f) => f(t),
        }
    }

    /// Evaluates the profile at working precision. Custom profiles are
    /// evaluated in double precision and promoted.
    pub(crate) fn eval_hp(&self, t: &BigFloat, hp: &mut Hp) -> BigFloat {
        let neg = t.neg();
        match &self.shape {
            Shape::Gaussian => {
                let sq = hp.mul(t, t);
                hp.exp(&sq.neg())
            }
            Shape::Exponential => hp.exp(&neg),
            Shape::Matern32 => {
                let e = hp.exp(&neg);
                let one_t = hp.add(&hp.num(1.0), t);
                hp.mul(&one_t, &e)
            }
            Shape::Matern52 => {
                let e = hp.exp(&neg);
                let t2 = hp.mul(t, t);
                let three_t = hp.mul(&hp.num(3.0), t);
                let poly = hp.add(&hp.add(&hp.num(3.0), &three_t), &t2);
                hp.mul(&poly, &e)
            }
            Shape::DampedSine => {
                let e = hp.exp(&neg);
                let pi = hp.pi();
                let quarter_pi = hp.div(&pi, &hp.num(4.0));
                let s = hp.sin(&hp.add(t, &quarter_pi));
                hp.mul(&s, &e)
            }
            Shape::Custom(f) => {
                let x = hp.to_log(t).value();
                hp.num(f(x))
            }
        }
    }
}

pub fn builtin_kernels() -> Vec<KernelSpec> {
    vec![
        KernelSpec::gaussian(),
        KernelSpec::exponential(),
        KernelSpec::matern32(),
        KernelSpec::matern52(),
        KernelSpec::damped_sine(),
    ]
}

pub fn kernel_by_name(name: &str) -> Result<KernelSpec> {
    builtin_kernels()
        .into_iter()
        .find(|k| k.name() == name)
        .ok_or_else(|| {
            let known: Vec<String> = builtin_kernels().iter().map(|k| k.name.clone()).collect();
            Error::Domain(format!("unknown kernel '{name}' (known: {})", known.join(", ")))
        })
}

/// `n` distinct points in `ℝᵈ`, one per row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct GroundSet {
    points: DMatrix<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for GroundSet {
    type Error = Error;

    fn try_from(points: Vec<Vec<f64>>) -> Result<Self> {
        GroundSet::new(points)
    }
}

impl From<GroundSet> for Vec<Vec<f64>> {
    fn from(gs: GroundSet) -> Self {
        (0..gs.n()).map(|i| gs.point(i)).collect()
    }
}

impl GroundSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        let d = points.first().map_or(0, Vec::len);
        if n > 0 && d == 0 {
            return Err(Error::Domain("points must have at least one coordinate".into()));
        }
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::Dimension("points have differing dimensions".into()));
        }
        let m = DMatrix::from_fn(n, d, |i, j| points[i][j]);
        Self::from_matrix(m)
    }

    pub fn from_matrix(points: DMatrix<f64>) -> Result<Self> {
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("point coordinates must be finite".into()));
        }
        let n = points.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if points.row(i) == points.row(j) {
                    return Err(Error::DegeneratePoints(format!(
                        "points {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(GroundSet { points })
    }

    /// Univariate ground set.
    pub fn line(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| vec![x]).collect())
    }

    /// `n` points drawn uniformly from `[0, 1]ᵈ`.
    pub fn uniform(n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, d, |_, _| rng.random::<f64>());
        Self::from_matrix(m)
    }

    /// Regular grid with `per_axis` points per coordinate on `[0, 1]ᵈ`.
    pub fn grid(per_axis: usize, d: usize) -> Result<Self> {
        if per_axis == 0 || d == 0 {
            return Err(Error::Domain("grid needs at least one point per axis".into()));
        }
        let step = if per_axis > 1 {
            1.0 / (per_axis - 1) as f64
        } else {
            0.0
        };
        let n = per_axis.pow(d as u32);
        let m = DMatrix::from_fn(n, d, |i, j| {
            let idx = (i / per_axis.pow(j as u32)) % per_axis;
            idx as f64 * step
        });
        Self::from_matrix(m)
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn d(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (self.points.row(i) - self.points.row(j)).norm()
    }

    pub fn subset(&self, idx: &[usize]) -> GroundSet {
        GroundSet {
            points: self.points.select_rows(idx),
        }
    }
}

pub fn kernel_matrix(kernel: &KernelSpec, gs: &GroundSet, eps: f64) -> Result<SymMatrix> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("ε must be positive, got {eps}")));
    }
    let n = gs.n();
    let f0 = kernel.eval(0.0);
    let mut m = DMatrix::from_element(n, n, f0);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = kernel.eval(eps * gs.distance(i, j));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    SymMatrix::new(m)
}

/// Kernel matrix at working precision, as dense rows.
pub(crate) fn kernel_matrix_hp(
    kernel: &KernelSpec,
    gs: &GroundSet,
    eps: f64,
    hp: &mut Hp,
) -> Vec<Vec<BigFloat>> {
    let n = gs.n();
    let eps_hp = hp.num(eps);
    let f0 = kernel.eval_hp(&hp.num(0.0), hp);
    let mut m = vec![vec![f0.clone(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sq = hp.num(0.0);
            for c in 0..gs.d() {
                let diff = hp.sub(&hp.num(gs.points[(i, c)]), &hp.num(gs.points[(j, c)]));
                sq = hp.add(&sq, &hp.mul(&diff, &diff));
            }
            let t = hp.mul(&eps_hp, &hp.sqrt(&sq));
            let v = kernel.eval_hp(&t, hp);
            m[i][j] = v.clone();
            m[j][i] = v;
        }
    }
    m
}

/// `D^(p) = [‖xᵢ − xⱼ‖^p]`, with `D^(0)` the all-ones matrix.
pub fn distance_matrix(gs: &GroundSet, power: u32) -> SymMatrix {
    let n = gs.n();
    let mut m = DMatrix::from_element(n, n, if power == 0 { 1.0 } else { 0.0 });
    for i in 0..n {
        for j in (i + 1)..n {
            let v = gs.distance(i, j).powi(power as i32);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    SymMatrix::new(m).expect("distance matrix is symmetric by construction")
}

/// Truncated expansion `Σ_{i ≤ order} εⁱ fᵢ D^(i)`.
pub fn taylor_expand_matrix(
    kernel: &KernelSpec,
    gs: &GroundSet,
    eps: f64,
    order: usize,
) -> Result<SymMatrix> {
    let n = gs.n();
    let mut acc = DMatrix::zeros(n, n);
    for i in 0..=order {
        let c = kernel.coeff(i)?;
        if c != 0.0 {
            acc += distance_matrix(gs, i as u32).as_matrix() * (c * eps.powi(i as i32));
        }
    }
    SymMatrix::new(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Power-series oracle: coefficients of `poly(t) · exp(a t)` by Cauchy product.
    fn series_poly_times_exp(poly: &[f64], a: f64, len: usize) -> Vec<f64> {
        let exp: Vec<f64> = (0..len).map(|k| a.powi(k as i32) / factorial(k)).collect();
        (0..len)
            .map(|k| {
                poly.iter()
                    .enumerate()
                    .filter(|(j, _)| *j <= k)
                    .map(|(j, &c)| c * exp[k - j])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn taylor_matches_series_products() {
        let len = 20;
        let cases: Vec<(KernelSpec, Vec<f64>)> = vec![
            (KernelSpec::exponential(), series_poly_times_exp(&[1.0], -1.0, len)),
            (KernelSpec::matern32(), series_poly_times_exp(&[1.0, 1.0], -1.0, len)),
            (KernelSpec::matern52(), series_poly_times_exp(&[3.0, 3.0, 1.0], -1.0, len)),
        ];
        for (k, expected) in cases {
            for i in 0..len {
                assert_relative_eq!(k.taylor()[i], expected[i], epsilon = 1e-15, max_relative = 1e-12);
            }
        }
        // exp(−t²) = Σ (−t²)^j / j!
        let g = KernelSpec::gaussian();
        for j in 0..10 {
            assert_relative_eq!(g.taylor()[2 * j], alternating(j) / factorial(j));
            assert_eq!(g.taylor()[2 * j + 1], 0.0);
        }
        // sin(t + π/4) e^{−t} = (sin t + cos t) e^{−t} / √2
        let sin_plus_cos: Vec<f64> = (0..len)
            .map(|k| match k % 4 {
                0 | 1 => 1.0,
                _ => -1.0,
            } / factorial(k))
            .collect();
        let exp_neg: Vec<f64> = (0..len).map(|k| alternating(k) / factorial(k)).collect();
        let ds = KernelSpec::damped_sine();
        for k in 0..len {
            let c: f64 = (0..=k).map(|j| sin_plus_cos[j] * exp_neg[k - j]).sum::<f64>()
                * std::f64::consts::FRAC_1_SQRT_2;
            assert_relative_eq!(ds.taylor()[k], c, epsilon = 1e-15, max_relative = 1e-12);
        }
    }

    #[test]
    fn documented_coefficients() {
        let e = KernelSpec::exponential();
        assert_eq!(e.taylor()[1], -1.0);
        assert_eq!(e.r(), Smoothness::Finite(1));

        let m32 = KernelSpec::matern32();
        assert_eq!(m32.taylor()[1], 0.0);
        assert_relative_eq!(m32.taylor()[2], -0.5);
        assert_relative_eq!(m32.taylor()[3], 1.0 / 3.0);
        assert_eq!(m32.r(), Smoothness::Finite(2));

        let m52 = KernelSpec::matern52();
        assert_eq!(&m52.taylor()[..4], &[3.0, 0.0, -0.5, 0.0]);
        assert_relative_eq!(m52.taylor()[4], 1.0 / 8.0);
        assert_relative_eq!(m52.taylor()[5], -1.0 / 15.0);
        assert_eq!(m52.r(), Smoothness::Finite(3));

        let ds = KernelSpec::damped_sine();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(ds.taylor()[0], h);
        assert_eq!(ds.taylor()[1], 0.0);
        assert_relative_eq!(ds.taylor()[2], -h);
        assert_relative_eq!(ds.taylor()[3], 2.0 / 3.0 * h);
        assert_eq!(ds.r(), Smoothness::Finite(2));

        assert_eq!(KernelSpec::gaussian().r(), Smoothness::Infinite);
    }

    #[test]
    fn odd_coefficient_sign_rule() {
        for k in builtin_kernels() {
            if let Smoothness::Finite(r) = k.r() {
                assert!(k.taylor()[2 * r - 1] * alternating(r) > 0.0, "{}", k.name());
            }
            assert_relative_eq!(k.eval(0.0), k.taylor()[0], max_relative = 1e-15);
        }
    }

    #[test]
    fn finite_difference_cross_check() {
        // Central differences of order ≤ 2 at step 1e−4; profiles extend
        // analytically to t < 0.
        let h = 1e-4;
        for k in builtin_kernels() {
            let f = |t: f64| k.eval(t);
            let d1 = (f(h) - f(-h)) / (2.0 * h);
            let d2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
            assert!((d1 - k.taylor()[1]).abs() < 1e-5, "{} f1", k.name());
            assert!((d2 / 2.0 - k.taylor()[2]).abs() < 1e-5, "{} f2", k.name());
        }
        // Third order needs a wider step to stay above rounding noise.
        let h = 1e-2;
        for k in builtin_kernels() {
            let f = |t: f64| k.eval(t);
            let d3 = (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h);
            assert!((d3 / 6.0 - k.taylor()[3]).abs() < 1e-3, "{} f3", k.name());
        }
    }

    #[test]
    fn custom_kernel_validation() {
        let f: Profile = Arc::new(|t: f64| (-t).exp());
        assert!(KernelSpec::custom("exp", f.clone(), vec![1.0, -1.0], Smoothness::Finite(1)).is_ok());
        assert!(KernelSpec::custom("bad-sign", f.clone(), vec![1.0, 1.0], Smoothness::Finite(1)).is_err());
        assert!(KernelSpec::custom("bad-r", f.clone(), vec![1.0, -1.0], Smoothness::Finite(2)).is_err());
        assert!(KernelSpec::custom("short", f, vec![1.0, 0.0, -1.0], Smoothness::Finite(2)).is_err());
    }

    #[test]
    fn kernel_matrix_examples() {
        let gs = GroundSet::line(&[0.0, 1.0]).unwrap();
        let l = kernel_matrix(&KernelSpec::exponential(), &gs, 1.0).unwrap();
        assert_eq!(l[(0, 0)], 1.0);
        assert_relative_eq!(l[(0, 1)], (-1.0f64).exp());
        let gs = GroundSet::uniform(5, 2, 3).unwrap();
        let l = kernel_matrix(&KernelSpec::gaussian(), &gs, 1e-6).unwrap();
        assert!((l.as_matrix() - DMatrix::from_element(5, 5, 1.0)).amax() < 1e-11);
        assert!(kernel_matrix(&KernelSpec::gaussian(), &gs, 0.0).is_err());
    }

    #[test]
    fn distance_matrix_examples() {
        let gs = GroundSet::line(&[0.0, 1.0, 3.0]).unwrap();
        assert_eq!(distance_matrix(&gs, 0).as_matrix(), &DMatrix::from_element(3, 3, 1.0));
        let d1 = distance_matrix(&gs, 1);
        assert_eq!(
            d1.as_matrix(),
            &DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 3.0, 1.0, 0.0, 2.0, 3.0, 2.0, 0.0])
        );
        let d3 = distance_matrix(&gs, 3);
        assert_eq!(d3.as_matrix(), &d1.map(|x| x * x * x));
    }

    #[test]
    fn taylor_expansion_examples() {
        let gs = GroundSet::line(&[0.0, 1.0]).unwrap();
        let g = KernelSpec::gaussian();
        let t0 = taylor_expand_matrix(&g, &gs, 0.3, 0).unwrap();
        assert_eq!(t0.as_matrix(), &DMatrix::from_element(2, 2, 1.0));
        let t3 = taylor_expand_matrix(&g, &gs, 0.3, 3).unwrap();
        assert_relative_eq!(t3[(0, 1)], 1.0 - 0.09, epsilon = 1e-15);
        let t1 = taylor_expand_matrix(&KernelSpec::exponential(), &gs, 0.3, 1).unwrap();
        assert_relative_eq!(t1[(0, 1)], 0.7, epsilon = 1e-15);
        assert!(taylor_expand_matrix(&g, &gs, 0.3, TAYLOR_LEN).is_err());
    }

    #[test]
    fn taylor_remainder_has_the_next_order() {
        let gs = GroundSet::uniform(5, 2, 9).unwrap();
        for k in builtin_kernels() {
            for order in 0..4 {
                let err = |eps: f64| {
                    let l = kernel_matrix(&k, &gs, eps).unwrap();
                    let t = taylor_expand_matrix(&k, &gs, eps, order).unwrap();
                    (l.as_matrix() - t.as_matrix()).amax()
                };
                let (e1, e2) = (err(1e-2), err(5e-3));
                if e1 < 1e-14 {
                    continue;
                }
                // Ratio 2^{order+1} or better when the next term vanishes.
                let slope = (e1 / e2).log2();
                assert!(slope > order as f64 + 0.8, "{} order {order}: slope {slope}", k.name());
            }
        }
    }

    #[test]
    fn high_precision_profile_agrees_with_double() {
        let mut hp = Hp::new(256);
        for k in builtin_kernels() {
            for t in [0.0, 0.37, 2.5] {
                let v = k.eval_hp(&hp.num(t), &mut hp);
                assert_relative_eq!(hp.to_log(&v).value(), k.eval(t), max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn ground_set_validation() {
        assert!(GroundSet::line(&[0.0, 1.0, 0.0]).is_err());
        assert!(GroundSet::new(vec![vec![0.0], vec![1.0, 2.0]]).is_err());
        let g = GroundSet::grid(3, 2).unwrap();
        assert_eq!(g.n(), 9);
        assert_eq!(g.point(4), vec![0.5, 0.5]);
        let json = serde_json::to_string(&g).unwrap();
        let back: GroundSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }
}
