//! The additive spacings statistic and its asymptotic normal test.
//!
//! For a grid with `n` spacings per axis the statistic is
//! `V = Σ_i Σ_j g((n dx_i)(n dy_j))`. Under complete spatial randomness it
//! has the same law as `G = Σ_i Σ_j g(X_i Y_j / (X̄ Ȳ))` for independent unit
//! exponential samples, and `n^{−3/2}(V − n²mu)` is asymptotically
//! `N(0, sigma2)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfun::{GFunction, Kernel};
use crate::moments::MomentSet;
use crate::numeric::{self, CompensatedSum};
use crate::pattern::{rescale_to_unit, PointPattern};
use crate::rng;
use crate::spacings::{compute_grid, SpacingsGrid};

/// Patterns with fewer points get a `small-sample` warning.
pub const SMALL_SAMPLE_POINTS: usize = 50;

/// Two independent samples of positive reals, typically unit exponentials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentialSamplePair {
    xs: Vec<f64>,
    ys: Vec<f64>,
    xbar: f64,
    ybar: f64,
}

impl ExponentialSamplePair {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::InvalidArgument(format!(
                "samples must be non-empty and of equal length (got {} and {})",
                xs.len(),
                ys.len()
            )));
        }
        if xs.iter().chain(&ys).any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(
                "sample entries must be finite and positive".into(),
            ));
        }
        let n = xs.len() as f64;
        let xbar = numeric::compensated_sum(xs.iter().copied()) / n;
        let ybar = numeric::compensated_sum(ys.iter().copied()) / n;
        Ok(ExponentialSamplePair { xs, ys, xbar, ybar })
    }

    /// Two independent unit-exponential samples of size `n`.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let xs: Vec<f64> = (0..n).map(|_| rng.sample(Exp1)).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.sample(Exp1)).collect();
            // An exact zero has probability 2^-53 per draw; redraw if it happens.
            if let Ok(pair) = Self::new(xs, ys) {
                return pair;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }
    pub fn ys(&self) -> &[f64] {
        &self.ys
    }
    pub fn xbar(&self) -> f64 {
        self.xbar
    }
    pub fn ybar(&self) -> f64 {
        self.ybar
    }
}

/// `Σ_i Σ_j g(a_i b_j)` in i-major order with compensated accumulation.
pub fn product_sum(a: &[f64], b: &[f64], kernel: Kernel) -> f64 {
    match kernel {
        Kernel::Square => product_sum_with(a, b, |t| t * t),
        Kernel::Absdev => product_sum_with(a, b, |t| (t - 1.0).abs()),
        Kernel::Neglog => product_sum_with(a, b, |t| -t.ln()),
        Kernel::Identity => product_sum_with(a, b, |t| t),
    }
}

#[inline(always)]
fn product_sum_with<F: Fn(f64) -> f64>(a: &[f64], b: &[f64], f: F) -> f64 {
    let mut total = CompensatedSum::new();
    for &x in a {
        for &y in b {
            total.add(f(x * y));
        }
    }
    total.value()
}

/// `V = Σ_i Σ_j g(n² A_ij)`.
pub fn v2_statistic(grid: &SpacingsGrid, g: &GFunction) -> Result<f64> {
    if g.requires_positive && grid.has_zero_spacing() {
        return Err(g.degenerate_error());
    }
    let (a, b) = grid.scaled_spacings();
    Ok(product_sum(&a, &b, g.kernel))
}

/// `G = Σ_i Σ_j g((x_i / x̄)(y_j / ȳ))`.
pub fn gn_statistic(sample: &ExponentialSamplePair, g: &GFunction) -> Result<f64> {
    let a: Vec<f64> = sample.xs.iter().map(|x| x / sample.xbar).collect();
    let b: Vec<f64> = sample.ys.iter().map(|y| y / sample.ybar).collect();
    if g.requires_positive && a.iter().chain(&b).any(|&v| v == 0.0) {
        return Err(g.degenerate_error());
    }
    Ok(product_sum(&a, &b, g.kernel))
}

/// `(v − n² mu) / (n^{3/2} sigma)`.
pub fn standardize(v: f64, n: usize, moments: &MomentSet) -> Result<f64> {
    if moments.degenerate {
        return Err(Error::DegenerateStatistic(format!(
            "sigma2 = {}",
            moments.sigma2
        )));
    }
    let n = n as f64;
    Ok((v - n * n * moments.mu) / (n * n.sqrt() * moments.sigma()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sided {
    #[default]
    Two,
    Upper,
    Lower,
}

impl Sided {
    pub fn p_value(self, z: f64) -> f64 {
        let p = match self {
            Sided::Two => 2.0 * numeric::normal_sf(z.abs()),
            Sided::Upper => numeric::normal_sf(z),
            Sided::Lower => numeric::normal_cdf(z),
        };
        p.clamp(0.0, 1.0)
    }
}

impl FromStr for Sided {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" => Ok(Sided::Two),
            "upper" => Ok(Sided::Upper),
            "lower" => Ok(Sided::Lower),
            _ => Err(Error::InvalidArgument(format!(
                "sidedness must be two, upper or lower, got '{s}'"
            ))),
        }
    }
}

impl fmt::Display for Sided {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sided::Two => "two",
            Sided::Upper => "upper",
            Sided::Lower => "lower",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub n: usize,
    pub z: f64,
    pub p_asymptotic: f64,
    pub p_monte_carlo: Option<f64>,
    pub g_name: String,
    pub moments: MomentSet,
    pub warnings: Vec<String>,
}

/// Observed statistic, its size `n` and standardized value for a pattern.
pub(crate) fn observed(
    pattern: &PointPattern,
    g: &GFunction,
    moments: &MomentSet,
) -> Result<(f64, usize, f64)> {
    let grid = compute_grid(&rescale_to_unit(pattern))?;
    let v = v2_statistic(&grid, g)?;
    let z = standardize(v, grid.n(), moments)?;
    Ok((v, grid.n(), z))
}

pub fn asymptotic_test(
    pattern: &PointPattern,
    g: &GFunction,
    moments: &MomentSet,
    sided: Sided,
) -> Result<TestResult> {
    let (statistic, n, z) = observed(pattern, g, moments)?;
    let mut warnings = Vec::new();
    if pattern.len() < SMALL_SAMPLE_POINTS {
        warnings.push("small-sample".to_string());
    }
    if !g.conditions.all() {
        warnings.push("kernel-conditions".to_string());
    }
    Ok(TestResult {
        statistic,
        n,
        z,
        p_asymptotic: sided.p_value(z),
        p_monte_carlo: None,
        g_name: g.name.to_string(),
        moments: *moments,
        warnings,
    })
}

/// `G − n²mu = s + r`, with `s` the two-sample U-statistic part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub s: f64,
    pub r: f64,
}

/// `s = Σ_i Σ_j [g(x_i y_j) − mu − c(x_i − 1) − c(y_j − 1)]` and
/// `r = G − n²mu − s`.
pub fn decompose_sr(
    sample: &ExponentialSamplePair,
    g: &GFunction,
    moments: &MomentSet,
) -> Result<Decomposition> {
    let gn = gn_statistic(sample, g)?;
    let n = sample.n() as f64;
    let raw = product_sum(&sample.xs, &sample.ys, g.kernel);
    // The linear terms sum over the other index to n times the axis total.
    let dx = numeric::compensated_sum(sample.xs.iter().map(|x| x - 1.0));
    let dy = numeric::compensated_sum(sample.ys.iter().map(|y| y - 1.0));
    let centered = gn - n * n * moments.mu;
    let s = numeric::compensated_sum([
        raw,
        -n * n * moments.mu,
        -moments.c * n * dx,
        -moments.c * n * dy,
    ]);
    Ok(Decomposition { s, r: centered - s })
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of `E g(t X̄ Ȳ)` with `X̄`, `Ȳ` means of `n`
/// independent unit exponentials; it tends to `g(t)` as `n` grows.
pub fn scaled_mean_estimate(
    g: &GFunction,
    t: f64,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t must be positive, got {t}"
        )));
    }
    if n == 0 || reps < 2 {
        return Err(Error::InvalidArgument(
            "need n >= 1 and at least two replicates".into(),
        ));
    }
    let values: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, r);
            let xbar = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).sum::<f64>() / n as f64;
            let ybar = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).sum::<f64>() / n as f64;
            g.evaluate(t * xbar * ybar)
        })
        .collect::<Result<_>>()?;
    let (mean, var) = numeric::mean_var(&values);
    Ok(MeanEstimate {
        mean,
        std_error: (var / reps as f64).sqrt(),
    })
}
