//! Quadrature for `∫₀^∞ f(y) e^{−y} dy` with integrable endpoint
//! singularities and interior kinks.
//!
//! A rule with `nodes` points is assembled from three kinds of pieces, each
//! using `nodes / 2` points:
//!
//! * a head `[0, p₁]` integrated by Gauss–Legendre after the substitution
//!   `y = p₁ u⁴`, which smooths `ln y` and `ln² y` singularities at zero;
//! * Gauss–Legendre panels between consecutive breakpoints;
//! * a Gauss–Laguerre tail `[p_k, ∞)`, shifted so that the exponential
//!   weight is the rule's own weight.
//!
//! The breakpoints are `1` plus any kinks of the integrand below
//! [`KINK_CUTOFF`]. For a polynomial integrand the tail is exact and the
//! head and panels converge geometrically.

use std::num::NonZeroUsize;

use gauss_quad::laguerre::GaussLaguerre;
use gauss_quad::legendre::GaussLegendre;

/// Kinks beyond this point carry weight below `e^{−40}` and are ignored.
pub const KINK_CUTOFF: f64 = 40.0;

const GRADING_POWER: i32 = 4;

#[derive(Debug, Clone)]
pub struct ExpQuadrature {
    legendre: Vec<(f64, f64)>,
    laguerre: Vec<(f64, f64)>,
}

impl ExpQuadrature {
    /// `nodes` must be at least 4.
    pub fn new(nodes: usize) -> Self {
        assert!(nodes >= 4, "quadrature needs at least 4 nodes, got {nodes}");
        let half = NonZeroUsize::new(nodes / 2).expect("nodes >= 4");
        let legendre = GaussLegendre::new(half).as_node_weight_pairs().to_vec();
        let laguerre = GaussLaguerre::new(half, 0.0.try_into().expect("alpha = 0 is valid"))
            .as_node_weight_pairs()
            .to_vec();
        ExpQuadrature { legendre, laguerre }
    }

    /// Nodes `y_k` and weights `w_k` (including the factor `e^{−y_k}`) such
    /// that `Σ w_k f(y_k) ≈ ∫₀^∞ f(y) e^{−y} dy` for `f` smooth away from
    /// zero and `kinks`.
    pub fn rule(&self, kinks: &[f64]) -> Vec<(f64, f64)> {
        let mut points = vec![1.0];
        points.extend(
            kinks
                .iter()
                .copied()
                .filter(|&k| k > 0.0 && k < KINK_CUTOFF && k.is_finite()),
        );
        points.sort_by(f64::total_cmp);
        points.dedup();

        let per_piece = self.legendre.len();
        let mut out = Vec::with_capacity(per_piece * (points.len() + 1));

        let head = points[0];
        for &(s, w) in &self.legendre {
            let u = 0.5 * (s + 1.0);
            let y = head * u.powi(GRADING_POWER);
            let jac = head * f64::from(GRADING_POWER) * u.powi(GRADING_POWER - 1);
            out.push((y, 0.5 * w * jac * (-y).exp()));
        }
        for pair in points.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half_width = 0.5 * (b - a);
            for &(s, w) in &self.legendre {
                let y = a + half_width * (s + 1.0);
                out.push((y, half_width * w * (-y).exp()));
            }
        }
        let tail = *points.last().expect("at least one breakpoint");
        let scale = (-tail).exp();
        for &(u, w) in &self.laguerre {
            out.push((tail + u, scale * w));
        }
        out
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, kinks: &[f64], mut f: F) -> f64 {
        self.rule(kinks).into_iter().map(|(y, w)| w * f(y)).sum()
    }
}
