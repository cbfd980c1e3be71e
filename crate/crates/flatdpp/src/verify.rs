//! Brute-force oracles: exact subset enumeration, total variation, inclusion
//! probabilities, Monte-Carlo tables and spanning-forest roots.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hp::Hp;
use crate::kernels::{kernel_matrix_hp, GroundSet, KernelSpec};
use crate::linalg::{det_minor, pinv_sym, LogDet, SymMatrix};
use crate::nnp::{Nnp, SizeLaw};
use crate::sampling::Sample;

/// Largest ground set accepted by exhaustive enumeration.
pub const MAX_ENUM_N: usize = 20;

/// Indices of the set bits of `mask`, ascending.
pub fn mask_indices(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize)
        .filter(|&i| mask >> i & 1 == 1)
        .collect()
}

pub fn indices_mask(x: &[usize]) -> usize {
    x.iter().fold(0, |m, &i| m | 1 << i)
}

/// Anything that assigns a nonnegative unnormalized mass to subsets.
pub trait MassFunction {
    fn n(&self) -> usize;
    fn log_mass(&self, x: &[usize]) -> LogDet;
}

impl MassFunction for Nnp {
    fn n(&self) -> usize {
        Nnp::n(self)
    }

    fn log_mass(&self, x: &[usize]) -> LogDet {
        self.pmf_unnorm(x)
    }
}

/// A plain L-ensemble: mass `det L_X`.
impl MassFunction for SymMatrix {
    fn n(&self) -> usize {
        SymMatrix::n(self)
    }

    fn log_mass(&self, x: &[usize]) -> LogDet {
        det_minor(self.as_matrix(), x)
    }
}

/// Exact normalized probabilities of every subset, indexed by bitmask.
#[derive(Clone, Debug)]
pub struct PmfTable {
    n: usize,
    log_prob: Vec<f64>,
    log_normalizer: f64,
}

impl PmfTable {
    /// Normalizes raw masses given as `LogDet`s indexed by bitmask. Negative
    /// masses are treated as zero.
    pub fn from_log_masses(n: usize, masses: &[LogDet]) -> Result<Self> {
        check_capacity(n)?;
        if masses.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "expected {} masses, got {}",
                1usize << n,
                masses.len()
            )));
        }
        let logs: Vec<f64> = masses
            .iter()
            .map(|d| if d.sign > 0 { d.log_abs } else { f64::NEG_INFINITY })
            .collect();
        let z = log_sum_exp(&logs);
        if !z.is_finite() {
            return Err(Error::Numerical("total mass is zero or infinite".into()));
        }
        Ok(PmfTable {
            n,
            log_prob: logs.iter().map(|&l| l - z).collect(),
            log_normalizer: z,
        })
    }

    pub fn from_probs(n: usize, probs: &[f64]) -> Result<Self> {
        let masses: Vec<LogDet> = probs.iter().map(|&p| LogDet::from_value(p)).collect();
        Self::from_log_masses(n, &masses)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    pub fn normalizer(&self) -> f64 {
        self.log_normalizer.exp()
    }

    pub fn log_prob(&self, mask: usize) -> f64 {
        self.log_prob[mask]
    }

    pub fn prob(&self, mask: usize) -> f64 {
        self.log_prob[mask].exp()
    }

    pub fn prob_of(&self, x: &[usize]) -> f64 {
        self.prob(indices_mask(x))
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_prob.iter().map(|l| l.exp()).collect()
    }

    /// `P(A ⊆ X)`.
    pub fn prob_contains(&self, a: &[usize]) -> f64 {
        let am = indices_mask(a);
        (0..self.log_prob.len())
            .filter(|&mask| mask & am == am)
            .map(|mask| self.prob(mask))
            .sum()
    }

    pub fn inclusion_probs(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (mask, &lp) in self.log_prob.iter().enumerate() {
            let p = lp.exp();
            for (i, o) in out.iter_mut().enumerate() {
                if mask >> i & 1 == 1 {
                    *o += p;
                }
            }
        }
        out
    }

    pub fn size_law(&self) -> SizeLaw {
        let mut probs = vec![0.0; self.n + 1];
        for (mask, &lp) in self.log_prob.iter().enumerate() {
            probs[mask.count_ones() as usize] += lp.exp();
        }
        SizeLaw { probs }
    }

    /// Law of the extra point given that `X = Y ∪ {x}` for some `x ∉ Y`,
    /// as a vector over all indices (zero on `Y`).
    pub fn completion_probs(&self, y: &[usize]) -> Vec<f64> {
        let ym = indices_mask(y);
        let mut out: Vec<f64> = (0..self.n)
            .map(|i| {
                if ym >> i & 1 == 1 {
                    0.0
                } else {
                    self.prob(ym | 1 << i)
                }
            })
            .collect();
        let total: f64 = out.iter().sum();
        if total > 0.0 {
            out.iter_mut().for_each(|p| *p /= total);
        }
        out
    }

    /// Most probable subset.
    pub fn mode(&self) -> Vec<usize> {
        let best = (0..self.log_prob.len())
            .max_by(|&a, &b| self.log_prob[a].total_cmp(&self.log_prob[b]))
            .unwrap_or(0);
        mask_indices(best)
    }
}

/// Exhaustive table of a mass function, restricted to subsets of size `m`
/// when given.
pub fn enumerate_pmf<F: MassFunction + ?Sized>(f: &F, m: Option<usize>) -> Result<PmfTable> {
    let n = f.n();
    check_capacity(n)?;
    let masses: Vec<LogDet> = (0..1usize << n)
        .map(|mask| match m {
            Some(m) if mask.count_ones() as usize != m => LogDet::ZERO,
            _ => f.log_mass(&mask_indices(mask)),
        })
        .collect();
    PmfTable::from_log_masses(n, &masses)
}

/// Sum of absolute differences; the `½` factor is deliberately omitted, so
/// the range is `[0, 2]`.
pub fn tv_distance(a: &PmfTable, b: &PmfTable) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::Dimension(format!(
            "tables over {} and {} items",
            a.n, b.n
        )));
    }
    Ok(a
        .log_prob
        .iter()
        .zip(&b.log_prob)
        .map(|(x, y)| (x.exp() - y.exp()).abs())
        .sum())
}

pub fn inclusion_probs(table: &PmfTable) -> Vec<f64> {
    table.inclusion_probs()
}

/// Frequency table of `draws` samples.
pub fn empirical_pmf<R, S>(n: usize, draws: usize, mut sampler: S, rng: &mut R) -> Result<PmfTable>
where
    R: Rng + ?Sized,
    S: FnMut(&mut R) -> Result<Sample>,
{
    check_capacity(n)?;
    if draws == 0 {
        return Err(Error::Domain("need at least one draw".into()));
    }
    let mut counts = vec![0u64; 1 << n];
    for _ in 0..draws {
        let s = sampler(rng)?;
        counts[indices_mask(&s)] += 1;
    }
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / draws as f64).collect();
    PmfTable::from_probs(n, &probs)
}

/// Every principal minor `det L(ε)_X` of a kernel matrix, computed at enough
/// precision to survive the cancellation of the flat limit.
#[derive(Clone, Debug)]
pub struct KernelMinors {
    n: usize,
    log_minors: Vec<LogDet>,
}

impl KernelMinors {
    pub fn new(kernel: &KernelSpec, gs: &GroundSet, eps: f64) -> Result<Self> {
        let n = gs.n();
        check_capacity(n)?;
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("ε must be positive, got {eps}")));
        }
        let loss = if eps < 1.0 { (1.0 / eps).log2().ceil() as usize } else { 0 };
        let mut hp = Hp::new(192 + loss * n * n.saturating_sub(1));
        let l = kernel_matrix_hp(kernel, gs, eps, &mut hp);
        let log_minors = (0..1usize << n)
            .map(|mask| {
                let x = mask_indices(mask);
                let sub: Vec<Vec<_>> = x
                    .iter()
                    .map(|&i| x.iter().map(|&j| l[i][j].clone()).collect())
                    .collect();
                hp.to_log(&hp.det(sub))
            })
            .collect();
        Ok(KernelMinors { n, log_minors })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_minor(&self, mask: usize) -> LogDet {
        self.log_minors[mask]
    }

    /// Table of the L-ensemble `DPP(c · L(ε))` with `ln c = log_scale`,
    /// restricted to size `m` when given.
    pub fn table(&self, m: Option<usize>, log_scale: f64) -> Result<PmfTable> {
        let masses: Vec<LogDet> = self
            .log_minors
            .iter()
            .enumerate()
            .map(|(mask, d)| {
                let k = mask.count_ones() as usize;
                match m {
                    Some(m) if k != m => LogDet::ZERO,
                    _ if d.is_zero() => LogDet::ZERO,
                    _ => LogDet::new(d.sign, d.log_abs + k as f64 * log_scale),
                }
            })
            .collect();
        PmfTable::from_log_masses(self.n, &masses)
    }
}

/// An undirected graph with positive edge weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(Error::Domain(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::Domain(format!("self-loop at vertex {u}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Domain(format!("edge ({u}, {v}) has weight {w}")));
            }
        }
        Ok(Graph { n, edges })
    }

    /// Parses lines `u v weight`; blank lines and `#` comments are skipped.
    /// The vertex count is one more than the largest index, unless `n` is given.
    pub fn from_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected `u v weight`, got {line:?}",
                    lineno + 1
                )));
            }
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what}", lineno + 1));
            let u: usize = fields[0].parse().map_err(|_| bad("vertex"))?;
            let v: usize = fields[1].parse().map_err(|_| bad("vertex"))?;
            let w: f64 = fields[2].parse().map_err(|_| bad("weight"))?;
            edges.push((u, v, w));
        }
        let max = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
        Graph::new(n.unwrap_or(max).max(max), edges)
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (i - 1, i, 1.0)).collect()).expect("valid path")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j, 1.0)))
            .collect();
        Graph::new(n, edges).expect("valid complete graph")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn laplacian(&self) -> SymMatrix {
        let mut l = DMatrix::zeros(self.n, self.n);
        for &(u, v, w) in &self.edges {
            l[(u, u)] += w;
            l[(v, v)] += w;
            l[(u, v)] -= w;
            l[(v, u)] -= w;
        }
        SymMatrix::new(l).expect("symmetric by construction")
    }

    /// Connected components as sorted vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, w) in &self.edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        adj
    }
}

/// The pair `(q 𝓛†, Z)` whose process is the root set of a random spanning
/// forest, with `Z` the indicator vectors of the connected components.
pub fn forest_nnp(g: &Graph, q: f64) -> Result<Nnp> {
    check_rate(q)?;
    let comps = g.components();
    let mut z = DMatrix::zeros(g.n(), comps.len());
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            z[(v, c)] = 1.0;
        }
    }
    let pinv = pinv_sym(&g.laplacian(), 1e-10)?;
    Nnp::new(pinv.scale(q), z)
}

/// Root set of a random spanning forest drawn by Wilson's algorithm on the
/// graph augmented with an absorbing vertex joined to every vertex with
/// weight `q`.
pub fn wilson_forest_roots<R: Rng + ?Sized>(g: &Graph, q: f64, rng: &mut R) -> Result<Sample> {
    check_rate(q)?;
    let n = g.n();
    let adj = g.adjacency();
    let degree: Vec<f64> = adj.iter().map(|a| a.iter().map(|&(_, w)| w).sum()).collect();
    let sink = n;
    let mut in_tree = vec![false; n + 1];
    in_tree[sink] = true;
    let mut next = vec![sink; n];
    for start in 0..n {
        let mut u = start;
        while !in_tree[u] {
            let total = q + degree[u];
            let mut target = rng.random::<f64>() * total;
            let mut step = sink;
            if target >= q {
                target -= q;
                for &(v, w) in &adj[u] {
                    step = v;
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            next[u] = step;
            u = step;
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    Ok((0..n).filter(|&i| next[i] == sink).collect())
}

fn check_rate(q: f64) -> Result<()> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Domain(format!("forest rate q must be positive, got {q}")));
    }
    Ok(())
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_ENUM_N {
        return Err(Error::Capacity { n, max: MAX_ENUM_N });
    }
    Ok(())
}

fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + logs.iter().map(|&l| (l - max).exp()).sum::<f64>().ln()
}
