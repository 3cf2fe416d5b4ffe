//! Statistic kernels `g` applied to the rescaled cell areas `n²A_ij`.
//!
//! Each built-in carries the regularity conditions under which the
//! asymptotic normal approximation is known to hold. The flags are asserted
//! metadata: the domination conditions involve existence of auxiliary
//! functions and cannot be checked mechanically.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::{Method, MomentSet};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub const BUILTIN_NAMES: [&str; 4] = ["square", "absdev", "neglog", "identity"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `t²`; its statistic is the (scaled) sum of squared areas.
    Square,
    /// `|t − 1|`, absolute deviation of the scaled areas from their mean.
    Absdev,
    /// `−ln t`, undefined at zero.
    Neglog,
    /// `t`; the statistic is identically `n²`, so it has no test.
    Identity,
}

impl Kernel {
    /// Raw kernel value with no domain checks.
    #[inline(always)]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Kernel::Square => t * t,
            Kernel::Absdev => (t - 1.0).abs(),
            Kernel::Neglog => -t.ln(),
            Kernel::Identity => t,
        }
    }
}

/// Which of the four regularity conditions the kernel satisfies:
/// continuity on the closed half-line, a finite second moment of
/// `g(X₁Y₁)`, and the small- and large-argument domination bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Conditions {
    pub continuous: bool,
    pub square_integrable: bool,
    pub dominated_below: bool,
    pub dominated_above: bool,
}

impl Conditions {
    pub fn all(&self) -> bool {
        self.continuous && self.square_integrable && self.dominated_below && self.dominated_above
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GFunction {
    pub name: &'static str,
    pub kernel: Kernel,
    pub requires_positive: bool,
    pub conditions: Conditions,
    pub closed_moments: Option<MomentSet>,
    /// Arguments where `g` is not smooth; the quadrature splits there.
    #[serde(skip)]
    pub kinks: &'static [f64],
}

impl GFunction {
    /// Checked evaluation.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "kernel argument must be nonnegative, got {t}"
            )));
        }
        if t == 0.0 && self.requires_positive {
            return Err(Error::DegenerateSpacing {
                kernel: self.name.to_string(),
                t,
            });
        }
        Ok(self.kernel.apply(t))
    }

    #[inline(always)]
    pub fn apply(&self, t: f64) -> f64 {
        self.kernel.apply(t)
    }

    pub(crate) fn degenerate_error(&self) -> Error {
        Error::DegenerateSpacing {
            kernel: self.name.to_string(),
            t: 0.0,
        }
    }
}

impl fmt::Display for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

pub fn builtin(name: &str) -> Result<GFunction> {
    let all = Conditions {
        continuous: true,
        square_integrable: true,
        dominated_below: true,
        dominated_above: true,
    };
    let g = match name {
        "square" => GFunction {
            name: "square",
            kernel: Kernel::Square,
            requires_positive: false,
            conditions: all,
            closed_moments: Some(closed(4.0, 80.0, 8.0)),
            kinks: &[],
        },
        "absdev" => GFunction {
            name: "absdev",
            kernel: Kernel::Absdev,
            requires_positive: false,
            conditions: all,
            closed_moments: None,
            kinks: &[1.0],
        },
        // Continuous only on the open half-line; the normal limit is
        // checked empirically for this kernel.
        "neglog" => GFunction {
            name: "neglog",
            kernel: Kernel::Neglog,
            requires_positive: true,
            conditions: Conditions {
                continuous: false,
                ..all
            },
            closed_moments: Some(closed(2.0 * EULER_GAMMA, PI * PI / 6.0, -1.0)),
            kinks: &[],
        },
        "identity" => GFunction {
            name: "identity",
            kernel: Kernel::Identity,
            requires_positive: false,
            conditions: all,
            closed_moments: Some(closed(1.0, 1.0, 1.0)),
            kinks: &[],
        },
        _ => {
            return Err(Error::UnknownKernel {
                name: name.to_string(),
                available: BUILTIN_NAMES.join(", "),
            })
        }
    };
    Ok(g)
}

fn closed(mu: f64, eta: f64, c: f64) -> MomentSet {
    MomentSet::new(mu, eta, c, Method::ClosedForm, 0.0).expect("closed-form moments are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        assert_eq!(builtin("square").unwrap().evaluate(2.0).unwrap(), 4.0);
        assert_eq!(builtin("absdev").unwrap().evaluate(1.0).unwrap(), 0.0);
        assert_eq!(builtin("neglog").unwrap().evaluate(1.0).unwrap(), 0.0);
        assert_eq!(builtin("identity").unwrap().evaluate(3.5).unwrap(), 3.5);
    }

    #[test]
    fn evaluate_edges() {
        assert_eq!(builtin("square").unwrap().evaluate(0.0).unwrap(), 0.0);
        assert_eq!(builtin("absdev").unwrap().evaluate(0.5).unwrap(), 0.5);
        assert!(matches!(
            builtin("neglog").unwrap().evaluate(0.0),
            Err(Error::DegenerateSpacing { .. })
        ));
        assert!(matches!(
            builtin("square").unwrap().evaluate(-1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn unknown_name_lists_builtins() {
        let err = builtin("cube").unwrap_err();
        match &err {
            Error::UnknownKernel { available, .. } => {
                for n in BUILTIN_NAMES {
                    assert!(available.contains(n));
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn finite_at_zero_unless_flagged() {
        for name in BUILTIN_NAMES {
            let g = builtin(name).unwrap();
            if !g.requires_positive {
                assert!(g.evaluate(0.0).unwrap().is_finite(), "{name}");
            }
        }
    }

    #[test]
    fn continuity_on_sampled_grid() {
        // square has slope 200 at t = 100, so its adjacent-sample jump is
        // bounded by 200 * 1e-4 rather than 1e-2.
        for (name, bound) in [("square", 2.0001e-2), ("absdev", 1e-2), ("identity", 1e-2)] {
            let g = builtin(name).unwrap();
            let mut prev = g.evaluate(0.0).unwrap();
            let mut max_jump: f64 = 0.0;
            for k in 1..=1_000_000u32 {
                let v = g.evaluate(f64::from(k) * 1e-4).unwrap();
                max_jump = max_jump.max((v - prev).abs());
                prev = v;
            }
            assert!(max_jump < bound, "{name}: jump {max_jump}");
        }
    }

    #[test]
    fn only_neglog_is_flagged() {
        for name in BUILTIN_NAMES {
            let g = builtin(name).unwrap();
            assert_eq!(g.conditions.all(), name != "neglog", "{name}");
        }
    }
}
