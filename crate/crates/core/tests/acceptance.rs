//! Acceptance criteria. Each prints one PASS/FAIL line; the process fails
//! if any criterion fails. Seeds and tolerances are fixed constants.
//!
//! Run a subset by passing criterion numbers:
//! `cargo test -p csr-spacings --test acceptance -- 2 3`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use csr_spacings::gfun::{builtin, GFunction};
use csr_spacings::moments::{compute_moments, mc_estimates, quadrature_moments, Estimate};
use csr_spacings::numeric::{ks_distance, mean_var};
use csr_spacings::rng::derive_seed;
use csr_spacings::sim::{
    generate, mc_pvalue, normality_diagnostic, null_statistics, power_estimate,
    remainder_diagnostic, sample_uniform_pattern, GeneratorKind, GeneratorSpec, Sampler,
};
use csr_spacings::spacings::compute_grid;
use csr_spacings::stat::{decompose_sr, scaled_mean_estimate, v2_statistic, ExponentialSamplePair};
use csr_spacings::Result;

const GAMMA: f64 = 0.577_215_664_901_532_9;

// Seeds, one per criterion.
const SEED_EXACTNESS: u64 = 1001;
const SEED_CLOSED_MC: u64 = 1002;
const SEED_ABSDEV_MC: u64 = 1003;
const SEED_MORAN: u64 = 1004;
const SEED_NORMALITY: u64 = 1005;
const SEED_DECOMPOSITION: u64 = 1006;
const SEED_REMAINDER: u64 = 1007;
const SEED_SCALED_MEAN: u64 = 1008;
const SEED_SIZE: u64 = 1009;
/// Must match `tests/fixtures/gradient_power.json`.
const SEED_POWER: u64 = 1010;
const SEED_CLI: u64 = 1011;

// Tolerances.
const IDENTITY_REL_TOL: f64 = 1e-9;
const GRID_SUM_TOL: f64 = 1e-12;
const EXACTNESS_SECONDS: f64 = 1.0;
const CLOSED_FORM_TOL: f64 = 1e-12;
const SQUARE_QUAD_TOL: f64 = 1e-6;
const NEGLOG_QUAD_TOL: f64 = 1e-5;
const SE_BAND: f64 = 3.0;
const MC_SAMPLES: u64 = 1_000_000;
const MORAN_REPS: usize = 2000;
const MEAN_Z_TOL: f64 = 0.10;
const VAR_Z_TOL: f64 = 0.15;
const KS_TOL: f64 = 0.06;
const NORMALITY_REPS: usize = 2000;
const DECOMP_REL_TOL: f64 = 1e-8;
const S_VARIANCE_REL_TOL: f64 = 0.15;
const SCALED_MEAN_REPS: usize = 100_000;
const SIZE_BAND: (f64, f64) = (0.03, 0.07);
const POWER_MARGIN: f64 = 0.05;
const PVALUE_KS_TOL: f64 = 0.08;
const OUTER_REPS: usize = 500;
const B: usize = 999;
const LEVEL: f64 = 0.05;
const M_POWER: usize = 199;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn square() -> GFunction {
    builtin("square").unwrap()
}

fn exactness() -> Result<Outcome> {
    let start = Instant::now();
    let g = builtin("identity")?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_EXACTNESS);
    let (mut worst_rel, mut worst_sum) = (0.0f64, 0.0f64);
    for k in 0..1000 {
        let m = rng.random_range(1..=500usize);
        let grid = compute_grid(&sample_uniform_pattern(m, derive_seed(SEED_EXACTNESS, k))?)?;
        let n2 = ((m + 1) * (m + 1)) as f64;
        worst_rel = worst_rel.max((v2_statistic(&grid, &g)? - n2).abs() / n2);
        let sx: f64 = grid.dx().iter().sum();
        let sy: f64 = grid.dy().iter().sum();
        worst_sum = worst_sum.max((sx - 1.0).abs()).max((sy - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_rel <= IDENTITY_REL_TOL && worst_sum <= GRID_SUM_TOL && secs < EXACTNESS_SECONDS,
        format!("max rel err {worst_rel:.2e}, max |sum-1| {worst_sum:.2e}, {secs:.3} s"),
    )
}

fn within_se(truth: f64, est: &Estimate) -> bool {
    (truth - est.value).abs() <= SE_BAND * est.err
}

fn closed_forms() -> Result<Outcome> {
    let z2 = PI * PI / 6.0;
    let cases = [
        ("square", [4.0, 80.0, 8.0, 32.0], SQUARE_QUAD_TOL),
        (
            "neglog",
            [2.0 * GAMMA, z2, -1.0, 2.0 * (z2 - 1.0)],
            NEGLOG_QUAD_TOL,
        ),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (i, (name, truth, quad_tol)) in cases.into_iter().enumerate() {
        let g = builtin(name)?;
        let m = compute_moments(&g, 128)?;
        let closed = [m.mu, m.eta, m.c, m.sigma2];
        let q = quadrature_moments(&g, 128)?;
        let quad = [q.mu, q.eta, q.c, q.sigma2];
        let closed_err = (0..4)
            .map(|k| (closed[k] - truth[k]).abs())
            .fold(0.0, f64::max);
        let quad_err = (0..4)
            .map(|k| (quad[k] - truth[k]).abs())
            .fold(0.0, f64::max);
        let mc = mc_estimates(&g, MC_SAMPLES, derive_seed(SEED_CLOSED_MC, i as u64))?;
        let mc_ok = within_se(truth[0], &mc.mu)
            && within_se(truth[1], &mc.eta)
            && within_se(truth[2], &mc.c);
        let ok = closed_err <= CLOSED_FORM_TOL && quad_err <= quad_tol && mc_ok;
        pass &= ok;
        let _ = write!(
            detail,
            "{name}: closed {closed_err:.1e}, quad {quad_err:.1e}, mc (mu {:+.2}, eta {:+.2}, c {:+.2} SE); ",
            (mc.mu.value - truth[0]) / mc.mu.err,
            (mc.eta.value - truth[1]) / mc.eta.err,
            (mc.c.value - truth[2]) / mc.c.err,
        );
    }
    outcome(pass, detail.trim_end_matches("; ").to_string())
}

fn absdev_oracle() -> Result<Outcome> {
    let g = builtin("absdev")?;
    let q = quadrature_moments(&g, 128)?;
    let mc = mc_estimates(&g, MC_SAMPLES, SEED_ABSDEV_MC)?;
    let pass = within_se(q.mu, &mc.mu) && within_se(q.eta, &mc.eta) && within_se(q.c, &mc.c);
    outcome(
        pass,
        format!(
            "quad (mu {:.10}, eta {:.10}, c {:.10}); mc deviations mu {:+.2}, eta {:+.2}, c {:+.2} SE",
            q.mu,
            q.eta,
            q.c,
            (mc.mu.value - q.mu) / mc.mu.err,
            (mc.eta.value - q.eta) / mc.eta.err,
            (mc.c.value - q.c) / mc.c.err,
        ),
    )
}

/// Mean, variance and their standard errors.
fn summary(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let (mean, var) = mean_var(xs);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var_se = ((m4 - var * var).max(0.0) / n).sqrt();
    (mean, (var / n).sqrt(), var, var_se)
}

fn moran_identity() -> Result<Outcome> {
    let mut pass = true;
    let mut detail = String::new();
    let mut k = 0;
    for name in ["square", "absdev"] {
        let g = builtin(name)?;
        for n in [16usize, 64, 256] {
            let uni = null_statistics(
                &g,
                n,
                MORAN_REPS,
                derive_seed(SEED_MORAN, k),
                Sampler::Uniform,
            )?;
            let mor = null_statistics(
                &g,
                n,
                MORAN_REPS,
                derive_seed(SEED_MORAN, k + 1),
                Sampler::Moran,
            )?;
            k += 2;
            let (m1, se_m1, v1, se_v1) = summary(&uni);
            let (m2, se_m2, v2, se_v2) = summary(&mor);
            let zm = (m1 - m2) / se_m1.hypot(se_m2);
            let zv = (v1 - v2) / se_v1.hypot(se_v2);
            pass &= zm.abs() <= SE_BAND && zv.abs() <= SE_BAND;
            let _ = write!(detail, "{name}/{n}: mean {zm:+.2}, var {zv:+.2} SE; ");
        }
    }
    outcome(pass, detail.trim_end_matches("; ").to_string())
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn normality() -> Result<Outcome> {
    let g = square();
    let m = compute_moments(&g, 128)?;
    let main = normality_diagnostic(&g, &m, 256, NORMALITY_REPS, derive_seed(SEED_NORMALITY, 0))?;
    let mut ks16 = Vec::new();
    let mut ks256 = vec![main.ks_distance];
    for k in 0..5u64 {
        let seed = derive_seed(SEED_NORMALITY, k);
        ks16.push(normality_diagnostic(&g, &m, 16, NORMALITY_REPS, seed)?.ks_distance);
        if k > 0 {
            ks256.push(normality_diagnostic(&g, &m, 256, NORMALITY_REPS, seed)?.ks_distance);
        }
    }
    let (med16, med256) = (median(ks16), median(ks256));
    let pass = main.mean_z.abs() <= MEAN_Z_TOL
        && (main.var_z - 1.0).abs() <= VAR_Z_TOL
        && main.ks_distance <= KS_TOL
        && med256 < med16;
    outcome(
        pass,
        format!(
            "n=256: mean_z {:+.4}, var_z {:.4}, ks {:.4}; median ks n=16 {med16:.4} vs n=256 {med256:.4}",
            main.mean_z, main.var_z, main.ks_distance
        ),
    )
}

/// Literal double sums, independent of the library's summation.
fn brute_centered(pair: &ExponentialSamplePair, g: &GFunction, mu: f64, c: f64) -> (f64, f64) {
    let n = pair.n() as f64;
    let scale = pair.xbar() * pair.ybar();
    let (mut gn, mut s) = (0.0, 0.0);
    for &x in pair.xs() {
        for &y in pair.ys() {
            gn += g.apply(x * y / scale);
            s += g.apply(x * y) - mu - c * (x - 1.0) - c * (y - 1.0);
        }
    }
    (gn - n * n * mu, s)
}

fn decomposition() -> Result<Outcome> {
    let kernels: Vec<GFunction> = ["square", "absdev", "neglog", "identity"]
        .iter()
        .map(|n| builtin(n).unwrap())
        .collect();
    let moments: Vec<_> = kernels
        .iter()
        .map(|g| compute_moments(g, 128))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_DECOMPOSITION);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let (g, m) = (&kernels[k % 4], &moments[k % 4]);
        let n = rng.random_range(1..=200usize);
        let pair = ExponentialSamplePair::sample(n, &mut rng);
        let d = decompose_sr(&pair, g, m)?;
        let (centered, s) = brute_centered(&pair, g, m.mu, m.c);
        let scale = centered.abs().max(s.abs()).max(1.0);
        worst = worst
            .max((d.s + d.r - centered).abs() / scale)
            .max((d.s - s).abs() / scale);
    }

    let g = square();
    let m = compute_moments(&g, 128)?;
    let n = 256usize;
    let norm = (n as f64).powf(1.5);
    let s_values: Vec<f64> = (0..2000u64)
        .map(|r| {
            let mut rng = csr_spacings::rng::stream(derive_seed(SEED_DECOMPOSITION, 1), r);
            let pair = ExponentialSamplePair::sample(n, &mut rng);
            decompose_sr(&pair, &g, &m).map(|d| d.s / norm)
        })
        .collect::<Result<_>>()?;
    let var = mean_var(&s_values).1;
    let rel = (var - m.sigma2).abs() / m.sigma2;
    outcome(
        worst <= DECOMP_REL_TOL && rel <= S_VARIANCE_REL_TOL,
        format!(
            "max identity rel err {worst:.2e}; var(S/n^1.5) at n=256 {var:.3} vs {} ({:.1}%)",
            m.sigma2,
            100.0 * rel
        ),
    )
}

fn remainder() -> Result<Outcome> {
    let g = square();
    let m = compute_moments(&g, 128)?;
    let points = remainder_diagnostic(&g, &m, &[32, 128, 512], 500, SEED_REMAINDER)?;
    let values: Vec<f64> = points.iter().map(|p| p.mean_r2_over_n3).collect();
    outcome(
        values.windows(2).all(|w| w[1] < w[0]),
        points
            .iter()
            .map(|p| format!("n={}: {:.4} ± {:.4}", p.n, p.mean_r2_over_n3, p.std_error))
            .collect::<Vec<_>>()
            .join(", "),
    )
}

fn scaled_mean() -> Result<Outcome> {
    let g = square();
    let mut pass = true;
    let mut detail = String::new();
    let mut k = 0;
    for t in [1.0f64, 2.0] {
        let mut last_dev = f64::INFINITY;
        for n in [10usize, 100, 1000] {
            let est =
                scaled_mean_estimate(&g, t, n, SCALED_MEAN_REPS, derive_seed(SEED_SCALED_MEAN, k))?;
            k += 1;
            let ratio = (n as f64 + 1.0) / n as f64;
            let exact = t * t * ratio * ratio;
            let z = (est.mean - exact) / est.std_error;
            let dev = (est.mean - t * t).abs();
            pass &= z.abs() <= SE_BAND && dev < last_dev;
            last_dev = dev;
            let _ = write!(detail, "t={t},n={n}: {z:+.2} SE, |dev| {dev:.4}; ");
        }
    }
    outcome(pass, detail.trim_end_matches("; ").to_string())
}

/// The measured gradient power recorded in the fixture.
fn fixture_power() -> f64 {
    let text = include_str!("fixtures/gradient_power.json");
    let v: serde_json::Value = serde_json::from_str(text).expect("fixture is JSON");
    assert_eq!(v["seed"].as_u64(), Some(SEED_POWER), "fixture seed");
    v["power"].as_f64().expect("fixture power")
}

fn size_and_power() -> Result<Outcome> {
    let g = square();
    let m = compute_moments(&g, 128)?;
    let null_spec = GeneratorSpec::uniform(M_POWER);
    // Same seed derivation as power_estimate, keeping the p-values.
    let pvalues: Vec<f64> = (0..OUTER_REPS as u64)
        .map(|r| {
            let outer = derive_seed(SEED_SIZE, r);
            let pattern = generate(&null_spec, derive_seed(outer, 0))?;
            mc_pvalue(&pattern, &g, &m, B, derive_seed(outer, 1), Sampler::Moran)
        })
        .collect::<Result<_>>()?;
    let size = pvalues.iter().filter(|&&p| p <= LEVEL).count() as f64 / OUTER_REPS as f64;
    let ks = ks_distance(&pvalues, |x| x.clamp(0.0, 1.0));

    let alt = GeneratorSpec::new(GeneratorKind::Gradient { beta: 2.0 }, M_POWER)?;
    let power = power_estimate(
        &alt,
        &g,
        &m,
        LEVEL,
        OUTER_REPS,
        B,
        SEED_POWER,
        Sampler::Moran,
    )?;
    let recorded = fixture_power();
    let pass = size >= SIZE_BAND.0
        && size <= SIZE_BAND.1
        && power >= size + POWER_MARGIN
        && ks <= PVALUE_KS_TOL
        && power == recorded;
    outcome(
        pass,
        format!("null size {size:.3}, p-value KS {ks:.4}, gradient power {power:.3} (fixture {recorded:.3})"),
    )
}

fn cli_determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let input = dir.path().join("pattern.csv");
    let pattern = sample_uniform_pattern(60, SEED_CLI)?;
    let mut csv = String::from("x,y\n");
    for p in pattern.points() {
        let _ = writeln!(csv, "{},{}", p.x, p.y);
    }
    std::fs::write(&input, csv)?;
    let input = input.to_str().expect("utf-8 temp path").to_string();
    let seed = SEED_CLI.to_string();

    let invocations: Vec<Vec<&str>> = vec![
        vec![
            "test", "--input", &input, "--g", "square", "--mc", "199", "--seed", &seed,
        ],
        vec![
            "test",
            "--input",
            &input,
            "--g",
            "absdev",
            "--mc",
            "99",
            "--sampler",
            "uniform",
            "--seed",
            &seed,
        ],
        vec![
            "moments",
            "--g",
            "absdev",
            "--mc-samples",
            "200000",
            "--seed",
            &seed,
        ],
        vec!["moments", "--g", "absdev"],
        vec![
            "simulate", "--g", "square", "--n", "64", "--reps", "300", "--seed", &seed,
        ],
        vec![
            "diagnose-remainder",
            "--g",
            "neglog",
            "--n-grid",
            "8,32",
            "--reps",
            "200",
            "--seed",
            &seed,
        ],
        vec![
            "power",
            "--kind",
            "ssi",
            "--inhibition",
            "0.03",
            "--m",
            "40",
            "--g",
            "square",
            "--level",
            "0.05",
            "--reps",
            "20",
            "--B",
            "99",
            "--seed",
            &seed,
        ],
        vec!["spacings", "--input", &input],
    ];
    let bin = env!("CARGO_BIN_EXE_csr-spacings");
    let mut pass = true;
    let mut bytes = 0;
    for args in &invocations {
        let mut outputs = Vec::new();
        for threads in ["1", "3", "1"] {
            let out = Command::new(bin)
                .args(["--threads", threads])
                .args(args)
                .output()?;
            pass &= out.status.success();
            outputs.push(out.stdout);
        }
        pass &= outputs.windows(2).all(|w| w[0] == w[1]) && !outputs[0].is_empty();
        bytes += outputs[0].len();
    }
    outcome(
        pass,
        format!(
            "{} seeded invocations x threads {{1,3,1}}, {bytes} bytes compared",
            invocations.len()
        ),
    )
}

type Criterion = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("exactness oracle", exactness),
        ("closed-form moments", closed_forms),
        ("absdev oracle agreement", absdev_oracle),
        ("exponential representation", moran_identity),
        ("asymptotic normality", normality),
        ("decomposition", decomposition),
        ("remainder decay", remainder),
        ("mean of g(t X̄Ȳ)", scaled_mean),
        ("size and power", size_and_power),
        ("CLI determinism", cli_determinism),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();

    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} {id:>2} {name} [{:.1} s]: {detail}",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
