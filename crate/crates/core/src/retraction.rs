//! Retractions `τ: 𝔤 → G` and their right-trivialized tangents.
//!
//! Three kinds are provided:
//! - `Exp`: the exponential map (closed forms on both groups, with an
//!   optional truncated Bernoulli series for dexp⁻¹),
//! - `Cayley`: `(e − ξ/2)⁻¹(e + ξ/2)`,
//! - `SkewSqrt`: `ξ + (ξ² + e)^{1/2}`, the inverse of the skew-symmetric
//!   projection. SO(3) only.
//!
//! All tangent maps are returned as explicit `d×d` coordinate matrices;
//! their duals are the transposes. `dtau_matrix(ξ)` is `dτ_ξ` with
//! `Dτ(ξ)·δ = dτ_ξ(δ)·τ(ξ)`, and `dtau_inv_matrix(ξ)` is its inverse.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3, Vector6};

use crate::config::{NumericsConfig, MAX_SERIES_Q};
use crate::error::{Error, Result};
use crate::lie::{self, se3, so3, AlgebraElement, Group, GroupElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RetractionKind {
    Exp,
    Cayley,
    SkewSqrt,
}

impl RetractionKind {
    pub const ALL: [RetractionKind; 3] = [RetractionKind::Exp, RetractionKind::Cayley, RetractionKind::SkewSqrt];

    pub fn name(self) -> &'static str {
        match self {
            RetractionKind::Exp => "exp",
            RetractionKind::Cayley => "cayley",
            RetractionKind::SkewSqrt => "skew_sqrt",
        }
    }

    pub fn supports(self, group: Group) -> bool {
        !(self == RetractionKind::SkewSqrt && group == Group::SE3)
    }
}

impl fmt::Display for RetractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RetractionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exp" => Ok(RetractionKind::Exp),
            "cayley" | "cay" => Ok(RetractionKind::Cayley),
            "skew_sqrt" | "skew" => Ok(RetractionKind::SkewSqrt),
            other => Err(format!("unknown retraction '{other}' (expected exp, cayley or skew_sqrt)")),
        }
    }
}

/// Bernoulli numbers `B₀..B₁₅` with the convention `B₁ = −1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliTable {
    pub values: [f64; 16],
}

pub const BERNOULLI: BernoulliTable = BernoulliTable {
    values: [
        1.0,
        -1.0 / 2.0,
        1.0 / 6.0,
        0.0,
        -1.0 / 30.0,
        0.0,
        1.0 / 42.0,
        0.0,
        -1.0 / 30.0,
        0.0,
        5.0 / 66.0,
        0.0,
        -691.0 / 2730.0,
        0.0,
        7.0 / 6.0,
        0.0,
    ],
};

impl Default for BernoulliTable {
    fn default() -> Self {
        BERNOULLI
    }
}

/// `Σ_{j=0}^{q} B_j/j! ad_ξʲ` as a coordinate matrix.
pub fn dexp_inv_series(table: &BernoulliTable, xi: &AlgebraElement, q: usize) -> DMatrix<f64> {
    let d = xi.group().algebra_dim();
    let ad = lie::ad_matrix(xi);
    let mut power = DMatrix::identity(d, d);
    let mut sum = DMatrix::identity(d, d) * table.values[0];
    let mut factorial = 1.0;
    for j in 1..=q.min(MAX_SERIES_Q as usize) {
        power = &power * &ad;
        factorial *= j as f64;
        if table.values[j] != 0.0 {
            sum += &power * (table.values[j] / factorial);
        }
    }
    sum
}

/// `Σ_{j=0}^{q} ad_ξʲ/(j+1)!` as a coordinate matrix.
pub fn dexp_series(xi: &AlgebraElement, q: usize) -> DMatrix<f64> {
    let d = xi.group().algebra_dim();
    let ad = lie::ad_matrix(xi);
    let mut term = DMatrix::identity(d, d);
    let mut sum = term.clone();
    for j in 1..=q {
        term = &term * &ad / (j + 1) as f64;
        sum += &term;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retraction {
    pub kind: RetractionKind,
    /// Truncation index used when dexp⁻¹ is evaluated by its series.
    pub series_q: usize,
    /// Evaluate dexp⁻¹ by the truncated Bernoulli series instead of the
    /// closed form. Only meaningful for `Exp`.
    pub use_series: bool,
    /// Largest admissible angular norm of the argument `hξ`.
    pub domain_guard: f64,
}

impl Retraction {
    pub fn new(kind: RetractionKind, numerics: &NumericsConfig) -> Self {
        let guards = numerics.domain_guards;
        Self {
            kind,
            series_q: numerics.series_index(),
            use_series: false,
            domain_guard: match kind {
                RetractionKind::Exp => guards.exp,
                RetractionKind::Cayley => guards.cayley,
                RetractionKind::SkewSqrt => guards.skew_sqrt,
            },
        }
    }

    pub fn exp() -> Self {
        Self::new(RetractionKind::Exp, &NumericsConfig::default())
    }

    pub fn cayley() -> Self {
        Self::new(RetractionKind::Cayley, &NumericsConfig::default())
    }

    pub fn skew_sqrt() -> Self {
        Self::new(RetractionKind::SkewSqrt, &NumericsConfig::default())
    }

    /// Switches dexp⁻¹ to the Bernoulli series truncated at `q`.
    pub fn with_series(mut self, q: usize) -> Self {
        self.use_series = true;
        self.series_q = q.min(MAX_SERIES_Q as usize);
        self
    }

    fn check_group(&self, group: Group) -> Result<()> {
        if self.kind.supports(group) {
            Ok(())
        } else {
            Err(Error::UnsupportedGroup {
                what: "skew_sqrt retraction",
                group,
            })
        }
    }

    /// Rejects arguments outside the guarded neighborhood of zero on which
    /// the steppers operate.
    pub fn check_domain(&self, arg: &AlgebraElement) -> Result<()> {
        self.check_group(arg.group())?;
        let n = arg.angular_norm();
        if n < self.domain_guard {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                what: "retraction step guard",
                detail: format!(
                    "{} retraction needs |h xi| < {} but got {n}; reduce the step size",
                    self.kind, self.domain_guard
                ),
            })
        }
    }

    pub fn tau(&self, xi: &AlgebraElement) -> Result<GroupElement> {
        let group = xi.group();
        self.check_group(group)?;
        let c = xi.coords();
        match (self.kind, group) {
            (RetractionKind::Exp, Group::SO3) => Ok(GroupElement::from_rotation(&so3::exp(&v3(c)))),
            (RetractionKind::Exp, Group::SE3) => {
                let (r, p) = se3::exp(&v6(c));
                Ok(GroupElement::from_rotation_translation(&r, &p))
            }
            (RetractionKind::Cayley, _) => {
                let n = group.matrix_dim();
                let x = lie::hat(xi) * 0.5;
                let eye = DMatrix::<f64>::identity(n, n);
                let minus_inv = (&eye - &x).try_inverse().ok_or(Error::OutOfDomain {
                    what: "Cayley transform",
                    detail: "e - xi/2 is singular".to_string(),
                })?;
                Ok(GroupElement::from_matrix_unchecked(group, minus_inv * (&eye + &x)))
            }
            (RetractionKind::SkewSqrt, _) => {
                let x = so3::hat(&v3(c));
                let s = symmetric_sqrt(&(x * x + Matrix3::identity()))?;
                Ok(GroupElement::from_rotation(&(x + s)))
            }
        }
    }

    pub fn tau_inv(&self, g: &GroupElement) -> Result<AlgebraElement> {
        let group = g.group();
        self.check_group(group)?;
        match (self.kind, group) {
            (RetractionKind::Exp, Group::SO3) => {
                let w = so3::log(&g.rotation())?;
                AlgebraElement::from_slice(group, w.as_slice())
            }
            (RetractionKind::Exp, Group::SE3) => {
                let x = se3::log(&g.rotation(), &g.translation())?;
                AlgebraElement::from_slice(group, x.as_slice())
            }
            (RetractionKind::Cayley, _) => {
                let n = group.matrix_dim();
                let eye = DMatrix::<f64>::identity(n, n);
                let plus_inv = (g.matrix() + &eye).try_inverse().ok_or(Error::OutOfDomain {
                    what: "inverse Cayley transform",
                    detail: "g has eigenvalue -1".to_string(),
                })?;
                let x = (g.matrix() - &eye) * plus_inv * 2.0;
                lie::vee(group, &x)
            }
            (RetractionKind::SkewSqrt, _) => lie::vee(group, g.matrix()),
        }
    }

    /// Coordinate matrix of `y ↦ dτ⁻¹_ξ(y)`.
    pub fn dtau_inv_matrix(&self, xi: &AlgebraElement) -> Result<DMatrix<f64>> {
        let group = xi.group();
        self.check_group(group)?;
        match self.kind {
            RetractionKind::Exp if self.use_series => Ok(dexp_inv_series(&BERNOULLI, xi, self.series_q)),
            RetractionKind::Exp => Ok(match group {
                Group::SO3 => dyn3(&so3::dexp_inv(&v3(xi.coords()))),
                Group::SE3 => dyn6(&se3::dexp_inv(&v6(xi.coords()))),
            }),
            RetractionKind::Cayley => {
                let n = group.matrix_dim();
                let x = lie::hat(xi) * 0.5;
                let eye = DMatrix::<f64>::identity(n, n);
                let left = &eye - &x;
                let right = &eye + &x;
                Ok(basis_image(group, |e| &left * e * &right))
            }
            RetractionKind::SkewSqrt => {
                let t = self.tau(xi)?;
                let tm = t.matrix();
                Ok(basis_image(group, |e| e * tm))
            }
        }
    }

    /// Coordinate matrix of `δ ↦ dτ_ξ(δ)`.
    pub fn dtau_matrix(&self, xi: &AlgebraElement) -> Result<DMatrix<f64>> {
        let group = xi.group();
        self.check_group(group)?;
        match self.kind {
            RetractionKind::Exp => Ok(match group {
                Group::SO3 => dyn3(&so3::dexp(&v3(xi.coords()))),
                Group::SE3 => dyn6(&se3::dexp(&v6(xi.coords()))),
            }),
            RetractionKind::Cayley => {
                let n = group.matrix_dim();
                let x = lie::hat(xi) * 0.5;
                let eye = DMatrix::<f64>::identity(n, n);
                let singular = || Error::OutOfDomain {
                    what: "Cayley tangent",
                    detail: "e -/+ xi/2 is singular".to_string(),
                };
                let left = (&eye - &x).try_inverse().ok_or_else(singular)?;
                let right = (&eye + &x).try_inverse().ok_or_else(singular)?;
                Ok(basis_image(group, |e| &left * e * &right))
            }
            RetractionKind::SkewSqrt => self
                .dtau_inv_matrix(xi)?
                .try_inverse()
                .ok_or(Error::Singular("skew_sqrt tangent")),
        }
    }
}

impl fmt::Display for Retraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.use_series {
            write!(f, "{}(series q={})", self.kind, self.series_q)
        } else {
            write!(f, "{}", self.kind)
        }
    }
}

/// Principal square root of a symmetric positive definite matrix.
pub fn symmetric_sqrt(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let eig = m.symmetric_eigen();
    if let Some(&lo) = eig.eigenvalues.iter().find(|&&l| l <= 0.0) {
        return Err(Error::OutOfDomain {
            what: "skew_sqrt retraction",
            detail: format!("xi^2 + e has non-positive eigenvalue {lo}; needs |xi| < 1"),
        });
    }
    let root = eig.eigenvalues.map(f64::sqrt);
    let s = eig.eigenvectors * Matrix3::from_diagonal(&root) * eig.eigenvectors.transpose();
    Ok((s + s.transpose()) * 0.5)
}

/// Coordinate matrix of a linear map given on algebra matrices.
fn basis_image(group: Group, map: impl Fn(&DMatrix<f64>) -> DMatrix<f64>) -> DMatrix<f64> {
    let d = group.algebra_dim();
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut e = DVector::zeros(d);
        e[j] = 1.0;
        let image = map(&lie::hat_coords(group, &e));
        out.set_column(j, &lie::vee_coords(group, &image));
    }
    out
}

fn v3(c: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(c[0], c[1], c[2])
}

fn v6(c: &DVector<f64>) -> Vector6<f64> {
    Vector6::from_column_slice(c.as_slice())
}

fn dyn3(m: &Matrix3<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(3, 3, m.as_slice())
}

fn dyn6(m: &nalgebra::Matrix6<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(6, 6, m.as_slice())
}
