use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use flatdpp::flatlimit::{predicted_sizes, varying_regime};
use flatdpp::poly::{dim_poly, MonomialBasis};
use flatdpp::verify::wilson_forest_roots;
use flatdpp::{
    fixed_limit, kernel_by_name, kernel_matrix, rng_from_seed, tv_distance, varying_limit, Graph,
    GroundSet, KernelMinors, KernelSpec, LogDet, Nnp, PhasePoint, PmfTable, ProcessDescriptor,
};
use nalgebra::DMatrix;
use serde_json::json;

use crate::config::{ExperimentConfig, Target};
use crate::CliError;

const DEFAULT_EPS: [f64; 4] = [4.0, 1.5, 0.5, 0.1];
const PHASE_KERNELS: [&str; 4] = ["exponential", "matern32", "matern52", "gaussian"];

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io)?;
            }
            fs::write(p, text).map_err(io)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn limit_of(kernel: &KernelSpec, gs: &GroundSet, target: Target) -> Result<ProcessDescriptor, CliError> {
    Ok(match target {
        Target::Fixed(m) => fixed_limit(kernel, gs, m)?,
        Target::Varying(phase) => varying_limit(kernel, gs, phase)?,
    })
}

/// `ln(α ε^{−p})` for a phase point, zero for fixed-size targets.
fn log_scale(target: Target, eps: f64) -> f64 {
    match target {
        Target::Fixed(_) => 0.0,
        Target::Varying(ph) => ph.alpha.ln() - ph.scale_power as f64 * eps.ln(),
    }
}

fn kernel_table(minors: &KernelMinors, target: Target, eps: f64) -> Result<PmfTable, CliError> {
    let m = match target {
        Target::Fixed(m) => Some(m),
        Target::Varying(_) => None,
    };
    Ok(minors.table(m, log_scale(target, eps))?)
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

fn wrap(nnp: Nnp, m: Option<usize>) -> ProcessDescriptor {
    match m {
        Some(m) => ProcessDescriptor::PpDppFixed { nnp, m },
        None => ProcessDescriptor::PpDppVarying { nnp, alpha: 1.0 },
    }
}

pub fn sample(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let draws = cfg.draws.unwrap_or(1000);
    let process = if let Some(path) = &cfg.nnp {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let nnp: Nnp = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        wrap(nnp, cfg.m)
    } else if let Some(eps) = cfg.eps.as_deref() {
        let &[eps] = eps else {
            return Err(CliError::Validation("sampling takes a single ε".into()));
        };
        let l = kernel_matrix(&cfg.kernel()?, &cfg.ground_set()?, eps)?;
        let scale = cfg.phase()?.map_or(1.0, |ph| log_scale(Target::Varying(ph), eps).exp());
        wrap(Nnp::l_ensemble(l.scale(scale))?, cfg.m)
    } else {
        limit_of(&cfg.kernel()?, &cfg.ground_set()?, cfg.target()?)?
    };
    let mut rng = rng_from_seed(seed);
    let mut out = String::from("draw_id,indices\n");
    for id in 0..draws {
        let x = process.sample(&mut rng)?;
        writeln!(out, "{id},{}", join(&x, " ")).expect("writing to a String");
    }
    emit(cfg.output.as_deref(), &out)
}

pub fn limit(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let gs = cfg.ground_set()?;
    let descriptor = limit_of(&cfg.kernel()?, &gs, cfg.target()?)?;
    let mut text = serde_json::to_string_pretty(&descriptor)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    text.push('\n');
    emit(cfg.output.as_deref(), &text)?;
    if let Some(path) = &cfg.basis_csv {
        let v = descriptor
            .nnp()
            .map(|n| n.v().clone())
            .unwrap_or_else(|| DMatrix::zeros(gs.n(), 0));
        emit(Some(path), &basis_csv(&v, gs.d()))?;
    }
    Ok(())
}

fn basis_csv(v: &DMatrix<f64>, d: usize) -> String {
    let p = v.ncols();
    let labels = (0..=p)
        .find(|&k| dim_poly(k as i64, d) == p)
        .map(|k| MonomialBasis::new(d, k).labels())
        .filter(|l| l.len() == p)
        .unwrap_or_else(|| (1..=p).map(|j| format!("v{j}")).collect());
    let mut out = join(&labels, ",");
    out.push('\n');
    for row in v.row_iter() {
        out.push_str(&join(&row.iter().collect::<Vec<_>>(), ","));
        out.push('\n');
    }
    out
}

fn stem_path(output: &Path, suffix: &str) -> PathBuf {
    let stem = output.file_stem().map_or_else(|| "converge".into(), |s| s.to_string_lossy());
    output.with_file_name(format!("{stem}_{suffix}.csv"))
}

pub fn converge(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let output = cfg.output()?;
    let kernel = cfg.kernel()?;
    let gs = cfg.ground_set()?;
    let target = cfg.target()?;
    let eps_list = cfg.eps.clone().unwrap_or_else(|| DEFAULT_EPS.to_vec());
    if eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(CliError::Validation("ε values must be positive".into()));
    }
    let limit = limit_of(&kernel, &gs, target)?.pmf_table()?;

    let mut tv_csv = String::from("eps,tv\n");
    let mut inclusion: Vec<Vec<f64>> = Vec::new();
    for &eps in &eps_list {
        let table = kernel_table(&KernelMinors::new(&kernel, &gs, eps)?, target, eps)?;
        writeln!(tv_csv, "{eps},{}", tv_distance(&table, &limit)?).expect("writing to a String");
        inclusion.push(table.inclusion_probs());
    }
    inclusion.push(limit.inclusion_probs());
    emit(Some(&stem_path(output, "tv")), &tv_csv)?;

    let mut header: Vec<String> = vec!["index".into()];
    header.extend((1..=gs.d()).map(|j| format!("x{j}")));
    header.extend(eps_list.iter().map(|e| format!("eps={e}")));
    header.push("limit".into());
    let mut inc_csv = join(&header, ",") + "\n";
    for i in 0..gs.n() {
        let mut row: Vec<String> = vec![i.to_string()];
        row.extend(gs.point(i).iter().map(f64::to_string));
        row.extend(inclusion.iter().map(|col| col[i].to_string()));
        inc_csv.push_str(&(join(&row, ",") + "\n"));
    }
    emit(Some(&stem_path(output, "inclusion")), &inc_csv)?;

    if let Some(y) = &cfg.condition {
        let csv = conditional(&kernel, y, target, &eps_list, cfg.grid_size.unwrap_or(201))?;
        emit(Some(&stem_path(output, "conditional")), &csv)?;
    }
    Ok(())
}

/// Density of the last point of a size-`|Y|+1` sample given that the others
/// are `Y`, on a grid over `[0, 1]`.
fn conditional(
    kernel: &KernelSpec,
    y: &[f64],
    target: Target,
    eps_list: &[f64],
    grid_size: usize,
) -> Result<String, CliError> {
    let m = y.len() + 1;
    if !matches!(target, Target::Fixed(t) if t == m) {
        return Err(CliError::Validation(format!(
            "conditional densities need m = |Y| + 1 = {m}"
        )));
    }
    if grid_size < 2 {
        return Err(CliError::Validation("grid_size must be at least 2".into()));
    }
    let dx = 1.0 / (grid_size - 1) as f64;
    let xs: Vec<f64> = (0..grid_size)
        .map(|i| i as f64 * dx)
        .filter(|x| y.iter().all(|&yi| (x - yi).abs() > 1e-12))
        .collect();
    let full = (1usize << m) - 1;
    let all: Vec<usize> = (0..m).collect();
    let mut columns = vec![Vec::with_capacity(xs.len()); eps_list.len() + 1];
    for &x in &xs {
        let mut pts = y.to_vec();
        pts.push(x);
        let gs = GroundSet::line(&pts)?;
        for (j, &eps) in eps_list.iter().enumerate() {
            columns[j].push(KernelMinors::new(kernel, &gs, eps)?.log_minor(full));
        }
        columns[eps_list.len()].push(fixed_limit(kernel, &gs, m)?.mass(&all));
    }
    let densities: Vec<Vec<f64>> = columns.iter().map(|c| normalize_density(c, dx)).collect();
    let mut header = vec!["x".to_string()];
    header.extend(eps_list.iter().map(|e| format!("eps={e}")));
    header.push("limit".into());
    let mut csv = join(&header, ",") + "\n";
    for (i, x) in xs.iter().enumerate() {
        let mut row = vec![x.to_string()];
        row.extend(densities.iter().map(|d| d[i].to_string()));
        csv.push_str(&(join(&row, ",") + "\n"));
    }
    Ok(csv)
}

fn normalize_density(masses: &[LogDet], dx: f64) -> Vec<f64> {
    let logs: Vec<f64> = masses
        .iter()
        .map(|d| if d.sign > 0 { d.log_abs } else { f64::NEG_INFINITY })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return vec![0.0; logs.len()];
    }
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum::<f64>() * dx;
    w.iter().map(|v| v / total).collect()
}

pub fn phase(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let gs = cfg.ground_set()?;
    let (n, d) = (gs.n(), gs.d());
    let names: Vec<String> = match (&cfg.kernels, &cfg.kernel) {
        (Some(list), _) => list.clone(),
        (None, Some(k)) => vec![k.clone()],
        (None, None) => PHASE_KERNELS.iter().map(|s| s.to_string()).collect(),
    };
    let eps = cfg.phase_eps.unwrap_or(1e-3);
    let threshold = cfg.support_threshold.unwrap_or(1e-3);
    let max_power = cfg.max_scale_power.unwrap_or(2 * n as u32);
    let alpha = cfg.alpha.unwrap_or(1.0);
    let mut csv = String::from(
        "scale_power,r,kernel,regime,region,predicted_support,observed_support,tv\n",
    );
    for name in &names {
        let kernel = kernel_by_name(name)?;
        let minors = KernelMinors::new(&kernel, &gs, eps)?;
        for p in 0..=max_power {
            let phase = PhasePoint::new(p, alpha)?;
            let target = Target::Varying(phase);
            let descriptor = varying_limit(&kernel, &gs, phase)?;
            let observed = kernel_table(&minors, target, eps)?;
            let tv = tv_distance(&observed, &descriptor.pmf_table()?)?;
            writeln!(
                csv,
                "{p},{},{name},{},{},{},{},{tv}",
                kernel.r(),
                descriptor.tag(),
                varying_regime(kernel.r(), n, d, phase),
                join(&predicted_sizes(kernel.r(), n, d, phase), " "),
                join(&observed.size_law().support(threshold), " "),
            )
            .expect("writing to a String");
        }
    }
    emit(cfg.output.as_deref(), &csv)
}

pub fn forest(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let path = cfg
        .edges
        .as_deref()
        .ok_or_else(|| CliError::Validation("missing edge-list path".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let graph = Graph::from_edge_list(&text, cfg.vertices)?;
    let q = cfg.q.unwrap_or(1.0);
    let draws = cfg.draws.unwrap_or(100_000);
    if draws == 0 {
        return Err(CliError::Validation("draws must be positive".into()));
    }
    let seed = cfg.seed()?;
    let n = graph.n();

    let mut rng = rng_from_seed(seed);
    let mut counts = vec![0usize; n];
    let mut min_roots = usize::MAX;
    for _ in 0..draws {
        let roots = wilson_forest_roots(&graph, q, &mut rng)?;
        min_roots = min_roots.min(roots.len());
        for r in roots {
            counts[r] += 1;
        }
    }
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / draws as f64).collect();
    let shifted = graph.laplacian().into_inner() + DMatrix::identity(n, n) * q;
    let inverse = shifted
        .try_inverse()
        .ok_or_else(|| flatdpp::Error::Singular("qI + Laplacian".into()))?;
    let theoretical: Vec<f64> = (0..n).map(|i| q * inverse[(i, i)]).collect();
    let sigma: Vec<f64> = theoretical
        .iter()
        .map(|t| (t * (1.0 - t) / draws as f64).sqrt())
        .collect();
    let deviations: Vec<f64> = empirical.iter().zip(&theoretical).map(|(e, t)| (e - t).abs()).collect();
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let sigma_bound = 3.0 * sigma.iter().copied().fold(0.0, f64::max);
    let report = json!({
        "vertices": n,
        "q": q,
        "draws": draws,
        "seed": seed,
        "empirical": empirical,
        "theoretical": theoretical,
        "sigma": sigma,
        "max_deviation": max_deviation,
        "sigma_bound": sigma_bound,
        "within_bound": deviations.iter().zip(&sigma).all(|(d, s)| *d <= 3.0 * s),
        "min_roots": min_roots,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("JSON values serialize");
    text.push('\n');
    emit(cfg.output.as_deref(), &text)
}
