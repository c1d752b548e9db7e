use std::fmt;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::integrators::HPState;
use crate::lie::Group;

/// Names of the observable vector: `mu_i`, `xi_i`, then `g_ij` row-major.
pub fn observable_names(group: Group) -> Vec<String> {
    let d = group.algebra_dim();
    let n = group.matrix_dim();
    let mut names: Vec<String> = (0..d).map(|i| format!("mu_{i}")).collect();
    names.extend((0..d).map(|i| format!("xi_{i}")));
    for i in 0..n {
        for j in 0..n {
            names.push(format!("g_{i}{j}"));
        }
    }
    names
}

pub fn observable_vector(state: &HPState) -> Vec<f64> {
    let g = state.g.matrix();
    let n = g.nrows();
    let mut v: Vec<f64> = state.mu.coords().iter().chain(state.xi.coords().iter()).copied().collect();
    for i in 0..n {
        for j in 0..n {
            v.push(g[(i, j)]);
        }
    }
    v
}

/// A hyperplane `observable[coordinate] = level` crossed in `direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionSpec {
    pub coordinate: String,
    pub level: f64,
    /// `+1` for upward crossings, `−1` for downward ones.
    pub direction: i32,
}

impl Default for SectionSpec {
    fn default() -> Self {
        Self {
            coordinate: "xi_0".into(),
            level: 0.0,
            direction: 1,
        }
    }
}

impl SectionSpec {
    pub fn new(coordinate: impl Into<String>, level: f64, direction: i32) -> Result<Self> {
        let spec = Self {
            coordinate: coordinate.into(),
            level,
            direction,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.direction != 1 && self.direction != -1 {
            errors.push(format!("section.direction must be +1 or -1, got {}", self.direction));
        }
        if !self.level.is_finite() {
            errors.push("section.level must be finite".into());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errors))
        }
    }

    /// Index of the coordinate in the observable vector of `group`.
    pub fn index(&self, group: Group) -> Result<usize> {
        observable_names(group).iter().position(|n| *n == self.coordinate).ok_or_else(|| {
            Error::InvalidConfig(vec![format!(
                "section.coordinate '{}' is not an observable of {} (known: {})",
                self.coordinate,
                group.name(),
                observable_names(group).join(", ")
            )])
        })
    }
}

impl fmt::Display for SectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {:?} crossing {}", self.coordinate, self.level, if self.direction > 0 { "upward" } else { "downward" })
    }
}

/// Interpolated crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionPoint {
    pub t: f64,
    pub values: Vec<f64>,
}

/// Crossings of `values[k][index] = level` located by linear interpolation
/// between consecutive samples.
pub fn poincare_section_series(times: &[f64], values: &[Vec<f64>], index: usize, level: f64, direction: i32) -> Vec<SectionPoint> {
    let mut out = Vec::new();
    let sign = direction as f64;
    for k in 1..times.len().min(values.len()) {
        let a = (values[k - 1][index] - level) * sign;
        let b = (values[k][index] - level) * sign;
        if a < 0.0 && b >= 0.0 {
            let s = a / (a - b);
            let lerp = |x: f64, y: f64| x + s * (y - x);
            out.push(SectionPoint {
                t: lerp(times[k - 1], times[k]),
                values: values[k - 1].iter().zip(&values[k]).map(|(&x, &y)| lerp(x, y)).collect(),
            });
        }
    }
    out
}

pub fn poincare_section(traj: &Trajectory, spec: &SectionSpec) -> Result<Vec<SectionPoint>> {
    spec.validate()?;
    let index = spec.index(traj.states[0].group())?;
    let values: Vec<Vec<f64>> = traj.states.iter().map(observable_vector).collect();
    Ok(poincare_section_series(&traj.times(), &values, index, spec.level, spec.direction))
}

/// Per-coordinate `(min, max)` of a point cloud.
pub fn cloud_extent(points: &[SectionPoint], coordinates: &[usize]) -> Vec<(f64, f64)> {
    coordinates
        .iter()
        .map(|&c| {
            points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.values[c]), hi.max(p.values[c])))
        })
        .collect()
}

/// Largest per-coordinate Hausdorff distance between the two bounding
/// intervals, relative to the larger interval length.
pub fn extent_difference(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&(a0, a1), &(b0, b1))| {
            let range = (a1 - a0).max(b1 - b0);
            let dist = (a0 - b0).abs().max((a1 - b1).abs());
            if range > 0.0 {
                dist / range
            } else if dist == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}
