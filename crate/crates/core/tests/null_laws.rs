use csr_spacings::gfun::builtin;
use csr_spacings::moments::compute_moments;
use csr_spacings::numeric::mean_var;
use csr_spacings::rng::derive_seed;
use csr_spacings::sim::{
    generate, mc_pvalue, null_statistics, power_estimate, sample_null_spacings_moran,
    sample_uniform_pattern, GeneratorSpec, Sampler,
};
use csr_spacings::spacings::compute_grid;

const REPS: u64 = 5000;

fn uniform_grids(m: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..REPS)
        .map(|r| {
            let g =
                compute_grid(&sample_uniform_pattern(m, derive_seed(seed, r)).unwrap()).unwrap();
            (g.dx().to_vec(), g.dy().to_vec())
        })
        .collect()
}

fn within_three_se(values: &[f64], expected: f64) -> bool {
    let (mean, var) = mean_var(values);
    (mean - expected).abs() <= 3.0 * (var / values.len() as f64).sqrt()
}

#[test]
fn spacing_means_are_one_over_n() {
    let m = 9;
    let n = m + 1;
    let grids = uniform_grids(m, 41);
    for i in [0, 4, n - 1] {
        let dx: Vec<f64> = grids.iter().map(|g| g.0[i]).collect();
        let dy: Vec<f64> = grids.iter().map(|g| g.1[i]).collect();
        assert!(within_three_se(&dx, 1.0 / n as f64), "dx[{i}]");
        assert!(within_three_se(&dy, 1.0 / n as f64), "dy[{i}]");
    }
}

#[test]
fn axis_spacings_are_uncorrelated() {
    let grids = uniform_grids(9, 42);
    let a: Vec<f64> = grids.iter().map(|g| g.0[0]).collect();
    let b: Vec<f64> = grids.iter().map(|g| g.1[0]).collect();
    let (ma, va) = mean_var(&a);
    let (mb, vb) = mean_var(&b);
    let cov = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / (REPS - 1) as f64;
    let corr = cov / (va * vb).sqrt();
    assert!(corr.abs() <= 3.0 / (REPS as f64).sqrt(), "corr {corr}");
}

#[test]
fn moran_spacings_share_first_moments() {
    // E D = 1/n and Var D = (n − 1) / (n²(n + 1)) for uniform spacings.
    let n = 12usize;
    let first: Vec<f64> = (0..REPS)
        .map(|r| {
            sample_null_spacings_moran(n, derive_seed(43, r))
                .unwrap()
                .dx()[0]
        })
        .collect();
    assert!(within_three_se(&first, 1.0 / n as f64));
    let nf = n as f64;
    let (_, var) = mean_var(&first);
    let expected = (nf - 1.0) / (nf * nf * (nf + 1.0));
    assert!(
        (var / expected - 1.0).abs() < 0.15,
        "var {var} vs {expected}"
    );
}

#[test]
fn samplers_agree_on_small_grids() {
    let g = builtin("absdev").unwrap();
    for n in [4usize, 16] {
        let u = null_statistics(&g, n, 4000, 44, Sampler::Uniform).unwrap();
        let v = null_statistics(&g, n, 4000, 45, Sampler::Moran).unwrap();
        let (mu, vu) = mean_var(&u);
        let (mv, vv) = mean_var(&v);
        let se = ((vu + vv) / 4000.0).sqrt();
        assert!((mu - mv).abs() <= 3.0 * se, "n={n}: {mu} vs {mv}");
    }
}

#[test]
fn power_matches_explicit_pvalue_loop() {
    let g = builtin("square").unwrap();
    let m = compute_moments(&g, 64).unwrap();
    let spec = GeneratorSpec::uniform(30);
    let (reps, b, seed, level) = (12usize, 99usize, 46u64, 0.3);
    let rejected = (0..reps as u64)
        .filter(|&r| {
            let outer = derive_seed(seed, r);
            let pattern = generate(&spec, derive_seed(outer, 0)).unwrap();
            mc_pvalue(&pattern, &g, &m, b, derive_seed(outer, 1), Sampler::Moran).unwrap() <= level
        })
        .count();
    let power = power_estimate(&spec, &g, &m, level, reps, b, seed, Sampler::Moran).unwrap();
    assert_eq!(power, rejected as f64 / reps as f64);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let g = builtin("neglog").unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| null_statistics(&g, 33, 300, 47, Sampler::Uniform).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(7));
}
