//! Limiting moments of a kernel under independent unit exponentials `X, Y, Y′`:
//!
//! * `mu    = E g(XY)`
//! * `eta   = Cov(g(XY), g(XY′))`
//! * `c     = Cov(g(XY), X)`
//! * `sigma2 = 2 (eta − c²)`, the variance of the normal limit of
//!   `n^{−3/2}(V − n²mu)`.
//!
//! Three routes are available: closed forms carried by the kernel, a
//! product quadrature with exponential weight, and a Monte Carlo oracle
//! that shares no code with the quadrature.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfun::GFunction;
use crate::numeric::CompensatedSum;
use crate::quadrature::ExpQuadrature;
use crate::rng;

pub const DEFAULT_NODES: usize = 128;
pub const MIN_NODES: usize = 16;
pub const MIN_MC_SAMPLES: u64 = 10_000;

/// `sigma2` below this is treated as zero.
pub const DEGENERATE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSet {
    pub mu: f64,
    pub eta: f64,
    pub c: f64,
    pub sigma2: f64,
    pub method: Method,
    pub err: f64,
    pub degenerate: bool,
}

impl MomentSet {
    /// Assembles a moment set, deriving `sigma2`. Rounding-level negative
    /// variances clamp to zero; anything more negative is an error.
    pub fn new(mu: f64, eta: f64, c: f64, method: Method, err: f64) -> Result<Self> {
        let raw = 2.0 * (eta - c * c);
        let sigma2 = if raw >= 0.0 {
            raw
        } else if raw > -DEGENERATE_THRESHOLD {
            0.0
        } else {
            return Err(Error::NumericalConsistency { sigma2: raw });
        };
        Ok(MomentSet {
            mu,
            eta,
            c,
            sigma2,
            method,
            err,
            degenerate: sigma2 < DEGENERATE_THRESHOLD,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// A value with its error estimate: the node-halving difference for
/// quadrature, one standard error for Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

/// Raw integrals from one product rule.
#[derive(Debug, Clone, Copy)]
struct Integrals {
    /// `E g(XY)`
    mean: f64,
    /// `E[g(XY) g(XY′)]`
    cross: f64,
    /// `E[X g(XY)]`
    x_weighted: f64,
    /// `E[Y g(XY)]`
    y_weighted: f64,
}

fn integrals(g: &GFunction, nodes: usize) -> Result<Integrals> {
    let quad = ExpQuadrature::new(nodes);
    let outer = quad.rule(&[]);
    let shared_inner = g.kinks.is_empty().then(|| quad.rule(&[]));

    let mut mean = CompensatedSum::new();
    let mut cross = CompensatedSum::new();
    let mut x_weighted = CompensatedSum::new();
    let mut y_weighted = CompensatedSum::new();
    let mut kinks = Vec::with_capacity(g.kinks.len());
    for &(x, wx) in &outer {
        let local;
        let inner = match &shared_inner {
            Some(rule) => rule,
            None => {
                // The kernel's kink at t = k sits at y = k / x.
                kinks.clear();
                kinks.extend(g.kinks.iter().map(|k| k / x));
                local = quad.rule(&kinks);
                &local
            }
        };
        let mut h = CompensatedSum::new();
        let mut hy = CompensatedSum::new();
        for &(y, wy) in inner {
            let v = g.apply(x * y);
            if !v.is_finite() {
                return Err(Error::NumericalDomain {
                    kernel: g.name.to_string(),
                    node: x * y,
                });
            }
            h.add(wy * v);
            hy.add(wy * y * v);
        }
        let h = h.value();
        mean.add(wx * h);
        cross.add(wx * h * h);
        x_weighted.add(wx * x * h);
        y_weighted.add(wx * hy.value());
    }
    Ok(Integrals {
        mean: mean.value(),
        cross: cross.value(),
        x_weighted: x_weighted.value(),
        y_weighted: y_weighted.value(),
    })
}

fn check_nodes(nodes: usize) -> Result<()> {
    if nodes < MIN_NODES {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs at least {MIN_NODES} nodes, got {nodes}"
        )));
    }
    Ok(())
}

fn estimate(g: &GFunction, nodes: usize, pick: impl Fn(&Integrals) -> f64) -> Result<Estimate> {
    check_nodes(nodes)?;
    let fine = pick(&integrals(g, nodes)?);
    let coarse = pick(&integrals(g, nodes / 2)?);
    Ok(Estimate {
        value: fine,
        err: (fine - coarse).abs(),
    })
}

/// `mu = ∬ g(xy) e^{−x−y} dy dx`.
pub fn mu_quadrature(g: &GFunction, nodes: usize) -> Result<Estimate> {
    estimate(g, nodes, |i| i.mean)
}

/// `eta = ∫ e^{−x} h(x)² dx − mu²` with `h(x) = ∫ g(xy) e^{−y} dy`.
pub fn eta_quadrature(g: &GFunction, nodes: usize) -> Result<Estimate> {
    estimate(g, nodes, |i| i.cross - i.mean * i.mean)
}

/// `c = ∬ x g(xy) e^{−x−y} dy dx − mu`.
pub fn c_quadrature(g: &GFunction, nodes: usize) -> Result<Estimate> {
    estimate(g, nodes, |i| i.x_weighted - i.mean)
}

/// `Cov(g(XY), Y)` through the inner variable; equals `c` by symmetry.
pub fn c_quadrature_swapped(g: &GFunction, nodes: usize) -> Result<Estimate> {
    estimate(g, nodes, |i| i.y_weighted - i.mean)
}

/// All three moments by quadrature, `err` being the largest node-halving
/// difference.
pub fn quadrature_moments(g: &GFunction, nodes: usize) -> Result<MomentSet> {
    check_nodes(nodes)?;
    let fine = integrals(g, nodes)?;
    let coarse = integrals(g, nodes / 2)?;
    let triple = |i: &Integrals| [i.mean, i.cross - i.mean * i.mean, i.x_weighted - i.mean];
    let (f, c) = (triple(&fine), triple(&coarse));
    let err = f
        .iter()
        .zip(&c)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    MomentSet::new(f[0], f[1], f[2], Method::Quadrature, err)
}

/// Closed form when the kernel has one, quadrature otherwise.
pub fn compute_moments(g: &GFunction, nodes: usize) -> Result<MomentSet> {
    match g.closed_moments {
        Some(m) => Ok(m),
        None => quadrature_moments(g, nodes),
    }
}

const MC_BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, Default)]
struct McSums {
    count: u64,
    g: CompensatedSum,
    g2: CompensatedSum,
    p: CompensatedSum,
    p2: CompensatedSum,
    pg: CompensatedSum,
    q: CompensatedSum,
    q2: CompensatedSum,
}

/// Monte Carlo estimates of `mu`, `eta` and `c`, each with its standard
/// error, and the moment set assembled from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimates {
    pub mu: Estimate,
    pub eta: Estimate,
    pub c: Estimate,
    pub moments: MomentSet,
}

/// Monte Carlo estimate of `(mu, eta, c)` from iid exponential triples.
///
/// Standard errors use the linearized influence of each estimator:
/// `g(XY)` for `mu`, `g(XY)g(XY′) − 2 mu g(XY)` for `eta` and
/// `(X − 1) g(XY)` for `c`. The moment set's `err` is three times the
/// largest of them. Sampling noise can push `2(eta − c²)` below zero for
/// kernels with zero limiting variance; such estimates clamp to zero and
/// are flagged degenerate.
pub fn mc_oracle(g: &GFunction, samples: u64, seed: u64) -> Result<MomentSet> {
    mc_estimates(g, samples, seed).map(|e| e.moments)
}

/// [`mc_oracle`] with per-moment standard errors.
pub fn mc_estimates(g: &GFunction, samples: u64, seed: u64) -> Result<McEstimates> {
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo oracle needs at least {MIN_MC_SAMPLES} samples, got {samples}"
        )));
    }
    let blocks = samples.div_ceil(MC_BLOCK);
    let partials: Vec<Result<McSums>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, b);
            let len = MC_BLOCK.min(samples - b * MC_BLOCK);
            let mut s = McSums {
                count: len,
                ..McSums::default()
            };
            for _ in 0..len {
                let x: f64 = rng.sample(Exp1);
                let y: f64 = rng.sample(Exp1);
                let y2: f64 = rng.sample(Exp1);
                let (a, b) = (x * y, x * y2);
                if g.requires_positive && (a == 0.0 || b == 0.0) {
                    return Err(g.degenerate_error());
                }
                let gv = g.apply(a);
                let p = gv * g.apply(b);
                let q = (x - 1.0) * gv;
                s.g.add(gv);
                s.g2.add(gv * gv);
                s.p.add(p);
                s.p2.add(p * p);
                s.pg.add(p * gv);
                s.q.add(q);
                s.q2.add(q * q);
            }
            Ok(s)
        })
        .collect();

    let mut total = McSums::default();
    for part in partials {
        let part = part?;
        total.count += part.count;
        total.g.add(part.g.value());
        total.g2.add(part.g2.value());
        total.p.add(part.p.value());
        total.p2.add(part.p2.value());
        total.pg.add(part.pg.value());
        total.q.add(part.q.value());
        total.q2.add(part.q2.value());
    }
    let n = total.count as f64;
    let mean = |s: &CompensatedSum| s.value() / n;
    let (eg, eg2, ep, ep2, epg, eq, eq2) = (
        mean(&total.g),
        mean(&total.g2),
        mean(&total.p),
        mean(&total.p2),
        mean(&total.pg),
        mean(&total.q),
        mean(&total.q2),
    );

    let mu = eg;
    let eta = ep - mu * mu;
    let c = eq;
    let var_g = (eg2 - eg * eg).max(0.0);
    // Var(P − 2 mu G)
    let var_eta = (ep2 - ep * ep - 4.0 * mu * (epg - ep * eg) + 4.0 * mu * mu * var_g).max(0.0);
    let var_c = (eq2 - eq * eq).max(0.0);
    let se = [var_g, var_eta, var_c].map(|v| (v / n).sqrt());

    let raw = 2.0 * (eta - c * c);
    Ok(McEstimates {
        mu: Estimate {
            value: mu,
            err: se[0],
        },
        eta: Estimate {
            value: eta,
            err: se[1],
        },
        c: Estimate {
            value: c,
            err: se[2],
        },
        moments: MomentSet {
            mu,
            eta,
            c,
            sigma2: raw.max(0.0),
            method: Method::MonteCarlo,
            err: 3.0 * se.iter().copied().fold(0.0, f64::max),
            degenerate: raw < DEGENERATE_THRESHOLD,
        },
    })
}
