//! Null samplers, Monte Carlo p-values, convergence diagnostics and
//! alternative point processes for power studies.
//!
//! Every replicate draws from its own substream keyed by `(seed, index)`
//! and results are aggregated in replicate order, so outputs depend only on
//! the inputs and the seed, never on the number of worker threads.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfun::GFunction;
use crate::moments::MomentSet;
use crate::numeric;
use crate::pattern::{Point, PointPattern, Window};
use crate::rng::{self, Stream};
use crate::spacings::{compute_grid, SpacingsGrid};
use crate::stat::{self, decompose_sr, standardize, v2_statistic, ExponentialSamplePair};

pub const MIN_MC_REPLICATES: usize = 99;
pub const MIN_DIAGNOSTIC_REPS: usize = 200;
/// Consecutive rejected proposals after which inhibition sampling gives up.
pub const SSI_MAX_REJECTIONS: u64 = 1_000_000;

fn uniform_pattern_with(m: usize, rng: &mut Stream) -> PointPattern {
    let points = (0..m)
        .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    PointPattern::new(Window::unit(), points).expect("uniform points lie in the unit square")
}

/// `m` iid uniform points on the unit square.
pub fn sample_uniform_pattern(m: usize, seed: u64) -> Result<PointPattern> {
    if m == 0 {
        return Err(Error::EmptyPattern);
    }
    Ok(uniform_pattern_with(m, &mut rng::stream(seed, 0)))
}

/// Grid with `dx_i = E_i / Σ E` and `dy_j = F_j / Σ F`.
pub fn moran_grid_from_exponentials(ex: &[f64], ey: &[f64]) -> Result<SpacingsGrid> {
    let normalize = |e: &[f64]| -> Vec<f64> {
        let total = numeric::compensated_sum(e.iter().copied());
        e.iter().map(|v| v / total).collect()
    };
    if ex.iter().chain(ey).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(
            "exponential variates must be finite and positive".into(),
        ));
    }
    SpacingsGrid::from_spacings(normalize(ex), normalize(ey))
}

fn moran_grid_with(n: usize, rng: &mut Stream) -> SpacingsGrid {
    loop {
        let ex: Vec<f64> = (0..n).map(|_| rng.sample(Exp1)).collect();
        let ey: Vec<f64> = (0..n).map(|_| rng.sample(Exp1)).collect();
        if let Ok(grid) = moran_grid_from_exponentials(&ex, &ey) {
            return grid;
        }
    }
}

/// Null spacings grid of size `n` drawn through normalized exponentials,
/// without sorting.
pub fn sample_null_spacings_moran(n: usize, seed: u64) -> Result<SpacingsGrid> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Moran sampler needs n >= 2, got {n}"
        )));
    }
    Ok(moran_grid_with(n, &mut rng::stream(seed, 0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    Uniform,
    #[default]
    Moran,
}

impl Sampler {
    /// A null spacings grid with `n` spacings per axis.
    pub fn grid(self, n: usize, rng: &mut Stream) -> SpacingsGrid {
        match self {
            Sampler::Uniform => compute_grid(&uniform_pattern_with(n - 1, rng))
                .expect("uniform pattern is on the unit window"),
            Sampler::Moran => moran_grid_with(n, rng),
        }
    }
}

impl FromStr for Sampler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Sampler::Uniform),
            "moran" => Ok(Sampler::Moran),
            _ => Err(Error::InvalidArgument(format!(
                "sampler must be uniform or moran, got '{s}'"
            ))),
        }
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampler::Uniform => "uniform",
            Sampler::Moran => "moran",
        })
    }
}

/// `count` null statistics of size `n`, replicate `i` drawn from
/// substream `(seed, i)`.
pub fn null_statistics(
    g: &GFunction,
    n: usize,
    count: usize,
    seed: u64,
    sampler: Sampler,
) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    (0..count as u64)
        .into_par_iter()
        .map(|i| v2_statistic(&sampler.grid(n, &mut rng::stream(seed, i)), g))
        .collect()
}

/// Add-one Monte Carlo p-value `(1 + #{|z_b| ≥ |z_obs|}) / (B + 1)`.
pub fn mc_pvalue(
    pattern: &PointPattern,
    g: &GFunction,
    moments: &MomentSet,
    replicates: usize,
    seed: u64,
    sampler: Sampler,
) -> Result<f64> {
    if replicates < MIN_MC_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo test needs at least {MIN_MC_REPLICATES} replicates, got {replicates}"
        )));
    }
    let (_, n, z_obs) = stat::observed(pattern, g, moments)?;
    let threshold = z_obs.abs();
    let null = null_statistics(g, n, replicates, seed, sampler)?;
    let mut exceed = 0usize;
    for v in null {
        if standardize(v, n, moments)?.abs() >= threshold {
            exceed += 1;
        }
    }
    Ok((1 + exceed) as f64 / (replicates + 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub n: usize,
    pub reps: usize,
    pub g_name: String,
    pub mean_z: f64,
    pub var_z: f64,
    pub ks_distance: f64,
    pub seed: u64,
}

/// Standardized null statistics (Moran sampler) compared with `N(0, 1)`.
pub fn normality_diagnostic(
    g: &GFunction,
    moments: &MomentSet,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<NormalityReport> {
    if reps < MIN_DIAGNOSTIC_REPS {
        return Err(Error::InvalidArgument(format!(
            "normality diagnostic needs at least {MIN_DIAGNOSTIC_REPS} replicates, got {reps}"
        )));
    }
    if moments.degenerate {
        return Err(Error::DegenerateStatistic(g.name.to_string()));
    }
    let z: Vec<f64> = null_statistics(g, n, reps, seed, Sampler::Moran)?
        .into_iter()
        .map(|v| standardize(v, n, moments))
        .collect::<Result<_>>()?;
    let (mean_z, var_z) = numeric::mean_var(&z);
    Ok(NormalityReport {
        n,
        reps,
        g_name: g.name.to_string(),
        mean_z,
        var_z,
        ks_distance: numeric::ks_distance(&z, numeric::normal_cdf),
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemainderPoint {
    pub n: usize,
    /// Mean of `r² / n³` over the replicates.
    pub mean_r2_over_n3: f64,
    pub std_error: f64,
}

/// Average normalized squared remainder `r²/n³` of the S/R decomposition
/// for each sample size in `n_grid`. Replicates for size `n` use
/// substreams keyed by `n`, so a size gives the same value whatever grid it
/// appears in.
pub fn remainder_diagnostic(
    g: &GFunction,
    moments: &MomentSet,
    n_grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<RemainderPoint>> {
    if reps < MIN_DIAGNOSTIC_REPS {
        return Err(Error::InvalidArgument(format!(
            "remainder diagnostic needs at least {MIN_DIAGNOSTIC_REPS} replicates, got {reps}"
        )));
    }
    if n_grid.is_empty() || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n grid must be non-empty, positive and strictly ascending".into(),
        ));
    }
    n_grid
        .iter()
        .map(|&n| {
            let n_seed = rng::derive_seed(seed, n as u64);
            let n3 = (n as f64).powi(3);
            let values: Vec<f64> = (0..reps as u64)
                .into_par_iter()
                .map(|r| {
                    let pair = ExponentialSamplePair::sample(n, &mut rng::stream(n_seed, r));
                    decompose_sr(&pair, g, moments).map(|d| d.r * d.r / n3)
                })
                .collect::<Result<_>>()?;
            let (mean, var) = numeric::mean_var(&values);
            Ok(RemainderPoint {
                n,
                mean_r2_over_n3: mean,
                std_error: (var / reps as f64).sqrt(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Uniform,
    /// Parents uniform on the square; each has Poisson(`offspring_mean`)
    /// offspring uniform in a disk of `radius`, kept inside the square by
    /// rejection.
    MaternCluster {
        parent_count: usize,
        offspring_mean: f64,
        radius: f64,
    },
    /// Simple sequential inhibition: proposals closer than
    /// `inhibition_distance` to an accepted point are rejected.
    Ssi {
        inhibition_distance: f64,
    },
    /// Density proportional to `x^beta`.
    Gradient {
        beta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub m: usize,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, m: usize) -> Result<Self> {
        let spec = GeneratorSpec { kind, m };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform(m: usize) -> Self {
        GeneratorSpec {
            kind: GeneratorKind::Uniform,
            m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.m == 0 {
            return Err(Error::EmptyPattern);
        }
        match self.kind {
            GeneratorKind::Uniform => Ok(()),
            GeneratorKind::MaternCluster {
                parent_count,
                offspring_mean,
                radius,
            } => {
                if parent_count == 0 {
                    bad("cluster process needs at least one parent".into())
                } else if !(offspring_mean > 0.0 && offspring_mean.is_finite()) {
                    bad(format!(
                        "offspring mean must be positive, got {offspring_mean}"
                    ))
                } else if !(radius > 0.0 && radius.is_finite()) {
                    bad(format!("cluster radius must be positive, got {radius}"))
                } else {
                    Ok(())
                }
            }
            // Zero distance and zero exponent are allowed; both reduce to
            // the uniform process.
            GeneratorKind::Ssi {
                inhibition_distance: d,
            } => {
                if d >= 0.0 && d.is_finite() {
                    Ok(())
                } else {
                    bad(format!("inhibition distance must be nonnegative, got {d}"))
                }
            }
            GeneratorKind::Gradient { beta } => {
                if beta >= 0.0 && beta.is_finite() {
                    Ok(())
                } else {
                    bad(format!("gradient exponent must be nonnegative, got {beta}"))
                }
            }
        }
    }
}

fn offspring(parent: Point, radius: f64, rng: &mut Stream) -> Point {
    loop {
        let r = radius * rng.random::<f64>().sqrt();
        let theta = 2.0 * PI * rng.random::<f64>();
        let p = Point::new(parent.x + r * theta.cos(), parent.y + r * theta.sin());
        if Window::unit().contains(p) {
            return p;
        }
    }
}

fn generate_with(spec: &GeneratorSpec, rng: &mut Stream) -> Result<PointPattern> {
    let m = spec.m;
    let points = match spec.kind {
        GeneratorKind::Uniform => return Ok(uniform_pattern_with(m, rng)),
        GeneratorKind::MaternCluster {
            parent_count,
            offspring_mean,
            radius,
        } => {
            let parents: Vec<Point> = (0..parent_count)
                .map(|_| Point::new(rng.random(), rng.random()))
                .collect();
            let counts =
                Poisson::new(offspring_mean).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let mut pool = Vec::new();
            for &p in &parents {
                let k = counts.sample(rng) as usize;
                for _ in 0..k {
                    pool.push(offspring(p, radius, rng));
                }
            }
            if pool.len() > m {
                // The chosen subset is the first slice, stored at the end.
                pool = pool.partial_shuffle(rng, m).0.to_vec();
            }
            while pool.len() < m {
                let p = parents[rng.random_range(0..parents.len())];
                pool.push(offspring(p, radius, rng));
            }
            pool
        }
        GeneratorKind::Ssi {
            inhibition_distance: d,
        } => {
            let mut accepted: Vec<Point> = Vec::with_capacity(m);
            let mut rejections = 0u64;
            while accepted.len() < m {
                let p = Point::new(rng.random(), rng.random());
                let blocked = accepted.iter().any(|q| (q.x - p.x).hypot(q.y - p.y) < d);
                if blocked {
                    rejections += 1;
                    if rejections >= SSI_MAX_REJECTIONS {
                        return Err(Error::Infeasible {
                            inhibition_distance: d,
                            attempts: rejections,
                        });
                    }
                } else {
                    accepted.push(p);
                    rejections = 0;
                }
            }
            accepted
        }
        GeneratorKind::Gradient { beta } => (0..m)
            .map(|_| {
                let x = loop {
                    let u: f64 = rng.random();
                    if rng.random::<f64>() <= u.powf(beta) {
                        break u;
                    }
                };
                Point::new(x, rng.random())
            })
            .collect(),
    };
    PointPattern::new(Window::unit(), points)
}

/// Exactly `spec.m` points from the requested process on the unit square.
pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<PointPattern> {
    spec.validate()?;
    generate_with(spec, &mut rng::stream(seed, 0))
}

/// Fraction of `reps` generated patterns whose Monte Carlo p-value is at
/// most `level`. Outer replicate `r` generates its pattern and runs its
/// test from seeds derived from `(seed, r)`.
#[allow(clippy::too_many_arguments)]
pub fn power_estimate(
    spec: &GeneratorSpec,
    g: &GFunction,
    moments: &MomentSet,
    level: f64,
    reps: usize,
    replicates: usize,
    seed: u64,
    sampler: Sampler,
) -> Result<f64> {
    spec.validate()?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument(
            "power needs at least one replicate".into(),
        ));
    }
    let rejected: Vec<bool> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let outer = rng::derive_seed(seed, r);
            let pattern = generate(spec, rng::derive_seed(outer, 0))?;
            let p = mc_pvalue(
                &pattern,
                g,
                moments,
                replicates,
                rng::derive_seed(outer, 1),
                sampler,
            )?;
            Ok(p <= level)
        })
        .collect::<Result<_>>()?;
    Ok(rejected.iter().filter(|&&r| r).count() as f64 / reps as f64)
}
