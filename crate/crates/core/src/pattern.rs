//! Planar point patterns observed in axis-aligned rectangular windows.
//!
//! Patterns are ingested from comma-separated `x,y` lines. The window is
//! never read from the file; callers supply it (the CLI takes it as
//! `--window x0:x1,y0:y1`).

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]` with `x0 < x1`, `y0 < y1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Window {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidWindow("bounds must be finite".into()));
        }
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::InvalidWindow(format!(
                "need x0 < x1 and y0 < y1, got {x0}:{x1},{y0}:{y1}"
            )));
        }
        Ok(Window { x0, x1, y0, y1 })
    }

    pub fn unit() -> Self {
        Window {
            x0: 0.0,
            x1: 1.0,
            y0: 0.0,
            y1: 1.0,
        }
    }

    pub fn is_unit(&self) -> bool {
        *self == Window::unit()
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn x1(&self) -> f64 {
        self.x1
    }
    pub fn y0(&self) -> f64 {
        self.y0
    }
    pub fn y1(&self) -> f64 {
        self.y1
    }

    /// Closed-rectangle membership.
    pub fn contains(&self, p: Point) -> bool {
        self.x0 <= p.x && p.x <= self.x1 && self.y0 <= p.y && p.y <= self.y1
    }
}

impl Default for Window {
    fn default() -> Self {
        Window::unit()
    }
}

/// Parses `x0:x1,y0:y1`.
impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidWindow(format!("expected x0:x1,y0:y1, got '{s}'"));
        let (xs, ys) = s.split_once(',').ok_or_else(bad)?;
        let range = |r: &str| -> Result<(f64, f64)> {
            let (a, b) = r.split_once(':').ok_or_else(bad)?;
            let a = a.trim().parse::<f64>().map_err(|_| bad())?;
            let b = b.trim().parse::<f64>().map_err(|_| bad())?;
            Ok((a, b))
        };
        let (x0, x1) = range(xs)?;
        let (y0, y1) = range(ys)?;
        Window::new(x0, x1, y0, y1)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{},{}:{}", self.x0, self.x1, self.y0, self.y1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// A non-empty set of events inside a closed window.
///
/// Duplicate and boundary points are accepted; they produce zero spacings
/// downstream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointPattern {
    window: Window,
    points: Vec<Point>,
}

impl PointPattern {
    pub fn new(window: Window, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPattern);
        }
        for (i, p) in points.iter().enumerate() {
            if !window.contains(*p) {
                return Err(Error::OutsideWindow {
                    index: i + 1,
                    x: p.x,
                    y: p.y,
                });
            }
        }
        Ok(PointPattern { window, points })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Number of events `m`; the spacings grid has `m + 1` cells per axis.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.y).collect()
    }
}

/// Reads `x,y` lines. A single leading header line is skipped when its
/// first field is not a number; blank lines are ignored.
pub fn load_pattern<R: BufRead>(source: R, window: Window) -> Result<PointPattern> {
    let mut points = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let mut fields = text.split(',');
        let first = fields.next().unwrap_or("").trim();
        if lineno == 1 && is_header_token(first) {
            continue;
        }
        let parse = |field: Option<&str>| -> Result<f64> {
            let field = field.map(str::trim).ok_or_else(|| Error::Parse {
                line: lineno,
                message: "expected two comma-separated values".into(),
            })?;
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    line: lineno,
                    message: format!("'{field}' is not a finite real"),
                }),
            }
        };
        let x = parse(Some(first))?;
        let y = parse(fields.next())?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: "expected exactly two values".into(),
            });
        }
        points.push(Point::new(x, y));
    }
    PointPattern::new(window, points)
}

pub fn load_pattern_str(text: &str, window: Window) -> Result<PointPattern> {
    load_pattern(text.as_bytes(), window)
}

fn is_header_token(token: &str) -> bool {
    // "nan" and "inf" parse as floats but are still data lines (and get
    // rejected as non-finite).
    token.parse::<f64>().is_err()
}

/// Maps the window affinely onto `[0, 1]²`.
pub fn rescale_to_unit(pattern: &PointPattern) -> PointPattern {
    let w = pattern.window;
    if w.is_unit() {
        return pattern.clone();
    }
    let (sx, sy) = (w.x1 - w.x0, w.y1 - w.y0);
    let points = pattern
        .points
        .iter()
        .map(|p| {
            // Clamp guards the closed-window invariant against rounding at x1/y1.
            Point::new(
                ((p.x - w.x0) / sx).clamp(0.0, 1.0),
                ((p.y - w.y0) / sy).clamp(0.0, 1.0),
            )
        })
        .collect();
    PointPattern {
        window: Window::unit(),
        points,
    }
}
