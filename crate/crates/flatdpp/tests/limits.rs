use flatdpp::flatlimit::predicted_sizes;
use flatdpp::{
    builtin_kernels, fixed_limit, kernel_by_name, tv_distance, varying_limit, GroundSet,
    KernelMinors, PhasePoint,
};

fn fixed_tv(name: &str, gs: &GroundSet, m: usize, eps: f64) -> f64 {
    let kernel = kernel_by_name(name).unwrap();
    let limit = fixed_limit(&kernel, gs, m).unwrap().pmf_table().unwrap();
    let table = KernelMinors::new(&kernel, gs, eps).unwrap().table(Some(m), 0.0).unwrap();
    tv_distance(&table, &limit).unwrap()
}

#[test]
fn fixed_size_limits_on_bivariate_configuration() {
    let gs = GroundSet::uniform(8, 2, 44).unwrap();
    for (name, m) in [("matern32", 3), ("matern52", 6), ("damped-sine", 3)] {
        let coarse = fixed_tv(name, &gs, m, 1e-1);
        let fine = fixed_tv(name, &gs, m, 1e-3);
        assert!(fine < 1e-2, "{name} m={m}: {fine}");
        assert!(fine < coarse / 10.0, "{name} m={m}: {coarse} -> {fine}");
    }
}

#[test]
fn fixed_size_limits_every_kernel_and_size() {
    let gs = GroundSet::uniform(6, 2, 7).unwrap();
    for kernel in builtin_kernels() {
        for m in 1..=6 {
            let tv = fixed_tv(kernel.name(), &gs, m, 1e-4);
            assert!(tv < 1e-2, "{} m={m}: {tv}", kernel.name());
        }
    }
}

#[test]
fn varying_limits_approached_as_eps_shrinks() {
    let gs = GroundSet::uniform(6, 1, 43).unwrap();
    for name in ["exponential", "matern32", "matern52", "gaussian"] {
        let kernel = kernel_by_name(name).unwrap();
        let eps_grid = [1e-3, 1e-8, 1e-16];
        let minors: Vec<_> = eps_grid
            .iter()
            .map(|&e| KernelMinors::new(&kernel, &gs, e).unwrap())
            .collect();
        for p in 0..=12u32 {
            let phase = PhasePoint::new(p, 1.0).unwrap();
            let limit = varying_limit(&kernel, &gs, phase).unwrap().pmf_table().unwrap();
            let tvs: Vec<f64> = eps_grid
                .iter()
                .zip(&minors)
                .map(|(&e, mk)| {
                    let t = mk.table(None, -(p as f64) * e.ln()).unwrap();
                    tv_distance(&t, &limit).unwrap()
                })
                .collect();
            assert!(tvs[2] < 0.02, "{name} p={p}: {tvs:?}");
            assert!(tvs[2] <= tvs[0] + 1e-12, "{name} p={p}: {tvs:?}");
            let support = limit.size_law().support(1e-12);
            let predicted = predicted_sizes(kernel.r(), 6, 1, phase);
            assert!(support.iter().all(|s| predicted.contains(s)), "{name} p={p}");
        }
    }
}
