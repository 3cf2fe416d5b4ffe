//! Command-line front end.
//!
//! Every subcommand renders its full report in memory before writing, so a
//! failing invocation never leaves partial output on stdout. Exit status is
//! 0 on success, 1 on domain or numerical errors and 2 on usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfun::{self, GFunction};
use crate::moments::{self, MomentSet, DEFAULT_NODES, MIN_MC_SAMPLES, MIN_NODES};
use crate::pattern::{self, PointPattern, Window};
use crate::sim::{
    self, GeneratorKind, GeneratorSpec, Sampler, MIN_DIAGNOSTIC_REPS, MIN_MC_REPLICATES,
};
use crate::spacings::compute_grid;
use crate::stat::{self, Sided};

#[derive(Debug, Parser)]
#[command(
    name = "csr-spacings",
    version,
    about = "Complete spatial randomness tests based on two-dimensional spacings"
)]
pub struct Cli {
    /// Worker threads for Monte Carlo work (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test a point pattern for complete spatial randomness.
    Test(TestArgs),
    /// Limiting moments mu, eta, c and sigma2 of a kernel.
    Moments(MomentsArgs),
    /// Normality diagnostic of the standardized null statistic.
    Simulate(SimulateArgs),
    /// Decay of the normalized remainder of the S/R decomposition.
    DiagnoseRemainder(RemainderArgs),
    /// Monte Carlo power against an alternative point process.
    Power(PowerArgs),
    /// Dump the two-dimensional spacings grid of a pattern.
    Spacings(SpacingsArgs),
}

#[derive(Debug, Args)]
struct KernelArgs {
    /// Kernel name: square, absdev, neglog or identity.
    #[arg(long = "g", value_name = "NAME")]
    g: String,

    /// Quadrature nodes per axis for kernels without closed-form moments.
    #[arg(long, default_value_t = DEFAULT_NODES)]
    nodes: usize,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[arg(long)]
    input: PathBuf,

    /// Observation window as x0:x1,y0:y1.
    #[arg(long, default_value = "0:1,0:1")]
    window: Window,

    #[command(flatten)]
    kernel: KernelArgs,

    #[arg(long, default_value = "two")]
    sided: Sided,

    /// Also compute a Monte Carlo p-value from this many null replicates.
    #[arg(long = "mc", value_name = "B")]
    mc: Option<usize>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Null sampler for the Monte Carlo p-value.
    #[arg(long, default_value = "moran")]
    sampler: Sampler,
}

#[derive(Debug, Args)]
struct MomentsArgs {
    #[command(flatten)]
    kernel: KernelArgs,

    /// Estimate by Monte Carlo with this many samples instead.
    #[arg(long)]
    mc_samples: Option<u64>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Use quadrature even when closed forms are known.
    #[arg(long)]
    quadrature: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    kernel: KernelArgs,

    #[arg(long)]
    n: usize,

    #[arg(long)]
    reps: usize,

    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Args)]
struct RemainderArgs {
    #[command(flatten)]
    kernel: KernelArgs,

    /// Ascending sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "32,128,512")]
    n_grid: Vec<usize>,

    #[arg(long)]
    reps: usize,

    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Uniform,
    MaternCluster,
    Ssi,
    Gradient,
}

#[derive(Debug, Args)]
struct PowerArgs {
    #[arg(long, value_enum)]
    kind: Kind,

    /// Gradient exponent: density proportional to x^beta.
    #[arg(long, default_value_t = 2.0)]
    beta: f64,

    #[arg(long, default_value_t = 10)]
    parents: usize,

    #[arg(long, default_value_t = 20.0)]
    offspring_mean: f64,

    #[arg(long, default_value_t = 0.05)]
    radius: f64,

    #[arg(long, default_value_t = 0.02)]
    inhibition: f64,

    /// Points per generated pattern.
    #[arg(long)]
    m: usize,

    #[command(flatten)]
    kernel: KernelArgs,

    #[arg(long, default_value_t = 0.05)]
    level: f64,

    #[arg(long)]
    reps: usize,

    /// Null replicates per Monte Carlo test.
    #[arg(long = "B", default_value_t = 999)]
    b: usize,

    #[arg(long)]
    seed: u64,

    #[arg(long, default_value = "moran")]
    sampler: Sampler,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct SpacingsArgs {
    #[arg(long)]
    input: PathBuf,

    #[arg(long, default_value = "0:1,0:1")]
    window: Window,

    #[arg(long, value_enum, default_value = "csv")]
    output: Output,
}

/// A failure classified by exit status.
enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn kernel(args: &KernelArgs) -> std::result::Result<GFunction, Failure> {
    if args.nodes < MIN_NODES {
        return Err(usage(format!("--nodes must be at least {MIN_NODES}")));
    }
    gfun::builtin(&args.g).map_err(|e| usage(e.to_string()))
}

fn read_pattern(path: &PathBuf, window: Window) -> Result<PointPattern> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    pattern::load_pattern(BufReader::new(file), window)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize to JSON");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct RemainderReport {
    g_name: String,
    reps: usize,
    seed: u64,
    points: Vec<sim::RemainderPoint>,
}

#[derive(Serialize)]
struct PowerReport {
    generator: GeneratorSpec,
    g_name: String,
    level: f64,
    reps: usize,
    #[serde(rename = "B")]
    replicates: usize,
    sampler: Sampler,
    seed: u64,
    power: f64,
}

#[derive(Serialize)]
struct GridReport {
    n: usize,
    dx: Vec<f64>,
    dy: Vec<f64>,
    areas: Vec<Vec<f64>>,
}

fn execute(command: &Command) -> std::result::Result<String, Failure> {
    match command {
        Command::Test(a) => {
            let g = kernel(&a.kernel)?;
            if matches!(a.mc, Some(b) if b < MIN_MC_REPLICATES) {
                return Err(usage(format!("--mc must be at least {MIN_MC_REPLICATES}")));
            }
            let pattern = read_pattern(&a.input, a.window)?;
            let m = moments::compute_moments(&g, a.kernel.nodes)?;
            let mut result = stat::asymptotic_test(&pattern, &g, &m, a.sided)?;
            if let Some(b) = a.mc {
                result.p_monte_carlo =
                    Some(sim::mc_pvalue(&pattern, &g, &m, b, a.seed, a.sampler)?);
            }
            Ok(json(&result))
        }
        Command::Moments(a) => {
            let g = kernel(&a.kernel)?;
            let m: MomentSet = match a.mc_samples {
                Some(s) if s < MIN_MC_SAMPLES => {
                    return Err(usage(format!(
                        "--mc-samples must be at least {MIN_MC_SAMPLES}"
                    )))
                }
                Some(s) => moments::mc_oracle(&g, s, a.seed)?,
                None if a.quadrature => moments::quadrature_moments(&g, a.kernel.nodes)?,
                None => moments::compute_moments(&g, a.kernel.nodes)?,
            };
            Ok(json(&m))
        }
        Command::Simulate(a) => {
            let g = kernel(&a.kernel)?;
            if a.n < 2 {
                return Err(usage("--n must be at least 2"));
            }
            if a.reps < MIN_DIAGNOSTIC_REPS {
                return Err(usage(format!(
                    "--reps must be at least {MIN_DIAGNOSTIC_REPS}"
                )));
            }
            let m = moments::compute_moments(&g, a.kernel.nodes)?;
            Ok(json(&sim::normality_diagnostic(
                &g, &m, a.n, a.reps, a.seed,
            )?))
        }
        Command::DiagnoseRemainder(a) => {
            let g = kernel(&a.kernel)?;
            if a.reps < MIN_DIAGNOSTIC_REPS {
                return Err(usage(format!(
                    "--reps must be at least {MIN_DIAGNOSTIC_REPS}"
                )));
            }
            if a.n_grid.is_empty() || a.n_grid[0] == 0 || a.n_grid.windows(2).any(|w| w[0] >= w[1])
            {
                return Err(usage("--n-grid must be positive and strictly ascending"));
            }
            let m = moments::compute_moments(&g, a.kernel.nodes)?;
            let points = sim::remainder_diagnostic(&g, &m, &a.n_grid, a.reps, a.seed)?;
            Ok(json(&RemainderReport {
                g_name: g.name.to_string(),
                reps: a.reps,
                seed: a.seed,
                points,
            }))
        }
        Command::Power(a) => {
            let g = kernel(&a.kernel)?;
            let kind = match a.kind {
                Kind::Uniform => GeneratorKind::Uniform,
                Kind::MaternCluster => GeneratorKind::MaternCluster {
                    parent_count: a.parents,
                    offspring_mean: a.offspring_mean,
                    radius: a.radius,
                },
                Kind::Ssi => GeneratorKind::Ssi {
                    inhibition_distance: a.inhibition,
                },
                Kind::Gradient => GeneratorKind::Gradient { beta: a.beta },
            };
            let spec = GeneratorSpec::new(kind, a.m).map_err(|e| usage(e.to_string()))?;
            if !(a.level > 0.0 && a.level < 1.0) {
                return Err(usage("--level must lie in (0, 1)"));
            }
            if a.reps == 0 {
                return Err(usage("--reps must be positive"));
            }
            if a.b < MIN_MC_REPLICATES {
                return Err(usage(format!("--B must be at least {MIN_MC_REPLICATES}")));
            }
            let m = moments::compute_moments(&g, a.kernel.nodes)?;
            let power =
                sim::power_estimate(&spec, &g, &m, a.level, a.reps, a.b, a.seed, a.sampler)?;
            Ok(json(&PowerReport {
                generator: spec,
                g_name: g.name.to_string(),
                level: a.level,
                reps: a.reps,
                replicates: a.b,
                sampler: a.sampler,
                seed: a.seed,
                power,
            }))
        }
        Command::Spacings(a) => {
            let pattern = read_pattern(&a.input, a.window)?;
            let grid = compute_grid(&pattern::rescale_to_unit(&pattern))?;
            Ok(match a.output {
                Output::Csv => {
                    let mut out = String::from("i,j,a_ij\n");
                    for (i, j, area) in grid.areas() {
                        out.push_str(&format!("{},{},{}\n", i + 1, j + 1, area));
                    }
                    out
                }
                Output::Json => json(&GridReport {
                    n: grid.n(),
                    areas: grid
                        .dx()
                        .iter()
                        .map(|a| grid.dy().iter().map(|b| a * b).collect())
                        .collect(),
                    dx: grid.dx().to_vec(),
                    dy: grid.dy().to_vec(),
                }),
            })
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };

    let outcome = match cli.threads {
        Some(0) => Err(usage("--threads must be positive")),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(&cli.command)),
            Err(e) => Err(Failure::Domain(Error::Io(e.to_string()))),
        },
        None => execute(&cli.command),
    };

    match outcome {
        Ok(text) => match stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
        {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "error: io_error: {e}");
                1
            }
        },
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(stderr, "error: {}: {e}", e.name());
            1
        }
    }
}
