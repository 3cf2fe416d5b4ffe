//! Axis spacings and the two-dimensional spacings grid.
//!
//! For `m` points on the unit square, the sorted x-coordinates augmented
//! with 0 and 1 give `n = m + 1` x-spacings, likewise for y. The cell areas
//! `A_ij = dx[i] * dy[j]` are exposed through [`SpacingsGrid::area`] and
//! never stored, so memory stays O(n).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pattern::PointPattern;

/// Tolerance on `Σ dx = 1` accepted when building a grid from raw spacings.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Gaps between consecutive order statistics of `coords`, with 0 and 1
/// appended as endpoints. Ties give exact zeros.
pub fn axis_spacings(coords: &[f64]) -> Result<Vec<f64>> {
    if let Some(&bad) = coords.iter().find(|&&c| !(0.0..=1.0).contains(&c)) {
        return Err(Error::CoordinateDomain(bad));
    }
    let mut sorted = coords.to_vec();
    // NaN is excluded by the range check above.
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));

    let mut out = Vec::with_capacity(sorted.len() + 1);
    let mut prev = 0.0;
    for &c in &sorted {
        out.push(c - prev);
        prev = c;
    }
    out.push(1.0 - prev);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingsGrid {
    dx: Vec<f64>,
    dy: Vec<f64>,
}

impl SpacingsGrid {
    /// Builds a grid from explicit spacings, checking nonnegativity, equal
    /// length and unit sums.
    pub fn from_spacings(dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if dx.is_empty() || dx.len() != dy.len() {
            return Err(Error::InvalidArgument(format!(
                "spacings must be non-empty and of equal length (got {} and {})",
                dx.len(),
                dy.len()
            )));
        }
        for s in [&dx, &dy] {
            if s.iter().any(|&d| d < 0.0 || !d.is_finite()) {
                return Err(Error::InvalidArgument(
                    "spacings must be finite and nonnegative".into(),
                ));
            }
            let total: f64 = s.iter().sum();
            if (total - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "spacings sum to {total}, expected 1"
                )));
            }
        }
        Ok(SpacingsGrid { dx, dy })
    }

    pub fn n(&self) -> usize {
        self.dx.len()
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    pub fn dy(&self) -> &[f64] {
        &self.dy
    }

    /// Area of cell `(i, j)`, zero-based.
    #[inline]
    pub fn area(&self, i: usize, j: usize) -> f64 {
        self.dx[i] * self.dy[j]
    }

    /// Row-major iterator over `(i, j, A_ij)`, zero-based.
    pub fn areas(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.dx
            .iter()
            .enumerate()
            .flat_map(move |(i, &a)| self.dy.iter().enumerate().map(move |(j, &b)| (i, j, a * b)))
    }

    /// `(n·dx, n·dy)`; the kernel argument is `n²A_ij = (n·dx[i])(n·dy[j])`.
    pub fn scaled_spacings(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n() as f64;
        (
            self.dx.iter().map(|d| n * d).collect(),
            self.dy.iter().map(|d| n * d).collect(),
        )
    }

    pub fn has_zero_spacing(&self) -> bool {
        self.dx.iter().chain(&self.dy).any(|&d| d == 0.0)
    }
}

/// Spacings grid of a pattern on the unit window; rescale first otherwise.
pub fn compute_grid(pattern: &PointPattern) -> Result<SpacingsGrid> {
    if !pattern.window().is_unit() {
        return Err(Error::NonUnitWindow);
    }
    let dx = axis_spacings(&pattern.xs())?;
    let dy = axis_spacings(&pattern.ys())?;
    Ok(SpacingsGrid { dx, dy })
}
