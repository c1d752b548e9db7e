//! Matrix Lie groups SO(3) and SE(3) with their algebras and dual spaces.
//!
//! Conventions:
//! - so(3) coordinates `(w1, w2, w3)` map to the cross-product matrix, so
//!   `hat(e1) = [[0,0,0],[0,0,-1],[0,1,0]]`.
//! - se(3) coordinates are ordered `(angular, linear)` and map to the 4x4
//!   twist `[[hat(w), v], [0, 0]]`.
//! - The pairing between the algebra and its dual is the coordinate dot
//!   product, so every starred operator is the transpose of the coordinate
//!   matrix of its primal map.
//!
//! Group elements are never reorthonormalized. `group_residual` measures
//! how far a matrix has drifted from the group.

pub mod se3;
pub mod so3;

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};

/// Tolerance on `group_residual` accepted by [`GroupElement::new`].
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    SO3,
    SE3,
}

impl Group {
    /// Size of the square matrix representation.
    pub fn matrix_dim(self) -> usize {
        match self {
            Group::SO3 => 3,
            Group::SE3 => 4,
        }
    }

    /// Dimension of the Lie algebra.
    pub fn algebra_dim(self) -> usize {
        match self {
            Group::SO3 => 3,
            Group::SE3 => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Group::SO3 => "SO3",
            Group::SE3 => "SE3",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn ensure_same(left: Group, right: Group) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::GroupMismatch { left, right })
    }
}

/// An element of SO(3) or SE(3) in its matrix representation.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    group: Group,
    matrix: DMatrix<f64>,
}

impl GroupElement {
    /// Builds an element after checking the membership invariants.
    pub fn new(group: Group, matrix: DMatrix<f64>) -> Result<Self> {
        let n = group.matrix_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        let g = Self { group, matrix };
        let residual = g.residual();
        let det = g.rotation().determinant();
        if !(residual <= MEMBERSHIP_TOL) || det <= 0.0 {
            return Err(Error::NotInGroup { group, residual });
        }
        Ok(g)
    }

    /// Wraps a matrix without validating membership. Used for the outputs of
    /// methods that are allowed to drift off the group (the RK4 comparator).
    pub fn from_matrix_unchecked(group: Group, matrix: DMatrix<f64>) -> Self {
        debug_assert_eq!(matrix.nrows(), group.matrix_dim());
        Self { group, matrix }
    }

    pub fn identity(group: Group) -> Self {
        let n = group.matrix_dim();
        Self {
            group,
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn from_rotation(r: &Matrix3<f64>) -> Self {
        Self {
            group: Group::SO3,
            matrix: DMatrix::from_fn(3, 3, |i, j| r[(i, j)]),
        }
    }

    pub fn from_rotation_translation(r: &Matrix3<f64>, p: &Vector3<f64>) -> Self {
        let mut m = DMatrix::identity(4, 4);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = r[(i, j)];
            }
            m[(i, 3)] = p[i];
        }
        Self {
            group: Group::SE3,
            matrix: m,
        }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// The 3x3 rotation block.
    pub fn rotation(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.matrix[(i, j)])
    }

    /// The translation column (zero for SO(3)).
    pub fn translation(&self) -> Vector3<f64> {
        match self.group {
            Group::SO3 => Vector3::zeros(),
            Group::SE3 => Vector3::new(self.matrix[(0, 3)], self.matrix[(1, 3)], self.matrix[(2, 3)]),
        }
    }

    /// Membership defect: `‖RᵀR − I‖_F` of the rotation block, plus the
    /// bottom-row defect for SE(3).
    pub fn residual(&self) -> f64 {
        group_residual(self)
    }
}

/// Membership defect of `g`; zero for exact group elements.
pub fn group_residual(g: &GroupElement) -> f64 {
    let r = g.rotation();
    let orth = (r.transpose() * r - Matrix3::identity()).norm();
    match g.group {
        Group::SO3 => orth,
        Group::SE3 => {
            let m = &g.matrix;
            let bottom = m[(3, 0)].powi(2) + m[(3, 1)].powi(2) + m[(3, 2)].powi(2) + (m[(3, 3)] - 1.0).powi(2);
            orth + bottom.sqrt()
        }
    }
}

pub fn compose(g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    ensure_same(g.group, h.group)?;
    Ok(GroupElement {
        group: g.group,
        matrix: &g.matrix * &h.matrix,
    })
}

/// Group inverse: transpose for SO(3), `(Rᵀ, −Rᵀp)` for SE(3).
pub fn inverse(g: &GroupElement) -> GroupElement {
    match g.group {
        Group::SO3 => GroupElement {
            group: Group::SO3,
            matrix: g.matrix.transpose(),
        },
        Group::SE3 => {
            let rt = g.rotation().transpose();
            let p = -(rt * g.translation());
            GroupElement::from_rotation_translation(&rt, &p)
        }
    }
}

/// Coordinates of an element of the Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    group: Group,
    coords: DVector<f64>,
}

/// Coordinates of an element of the dual of the Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct Momentum {
    group: Group,
    coords: DVector<f64>,
}

macro_rules! coordinate_vector {
    ($ty:ident) => {
        impl $ty {
            pub fn new(group: Group, coords: DVector<f64>) -> Result<Self> {
                let d = group.algebra_dim();
                if coords.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: coords.len(),
                    });
                }
                Ok(Self { group, coords })
            }

            pub fn from_slice(group: Group, coords: &[f64]) -> Result<Self> {
                Self::new(group, DVector::from_column_slice(coords))
            }

            /// Caller guarantees `coords.len() == group.algebra_dim()`.
            pub(crate) fn from_coords(group: Group, coords: DVector<f64>) -> Self {
                debug_assert_eq!(coords.len(), group.algebra_dim());
                Self { group, coords }
            }

            pub fn zero(group: Group) -> Self {
                Self {
                    group,
                    coords: DVector::zeros(group.algebra_dim()),
                }
            }

            pub fn group(&self) -> Group {
                self.group
            }

            pub fn coords(&self) -> &DVector<f64> {
                &self.coords
            }

            pub fn into_coords(self) -> DVector<f64> {
                self.coords
            }

            pub fn norm(&self) -> f64 {
                self.coords.norm()
            }

            pub fn scaled(&self, s: f64) -> Self {
                Self {
                    group: self.group,
                    coords: &self.coords * s,
                }
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                ensure_same(self.group, other.group)?;
                Ok(Self {
                    group: self.group,
                    coords: &self.coords + &other.coords,
                })
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                ensure_same(self.group, other.group)?;
                Ok(Self {
                    group: self.group,
                    coords: &self.coords - &other.coords,
                })
            }
        }
    };
}

coordinate_vector!(AlgebraElement);
coordinate_vector!(Momentum);

impl AlgebraElement {
    /// Norm of the angular part. This is what governs the injectivity
    /// domain of every retraction on both groups.
    pub fn angular_norm(&self) -> f64 {
        self.coords.rows(0, 3).norm()
    }
}

/// `⟨μ, ξ⟩` as the coordinate dot product.
pub fn pair(mu: &Momentum, xi: &AlgebraElement) -> Result<f64> {
    ensure_same(mu.group, xi.group)?;
    Ok(mu.coords.dot(&xi.coords))
}

pub fn hat(xi: &AlgebraElement) -> DMatrix<f64> {
    hat_coords(xi.group, &xi.coords)
}

pub(crate) fn hat_coords(group: Group, c: &DVector<f64>) -> DMatrix<f64> {
    match group {
        Group::SO3 => {
            let s = so3::hat(&Vector3::new(c[0], c[1], c[2]));
            DMatrix::from_fn(3, 3, |i, j| s[(i, j)])
        }
        Group::SE3 => {
            let s = so3::hat(&Vector3::new(c[0], c[1], c[2]));
            let mut m = DMatrix::zeros(4, 4);
            for i in 0..3 {
                for j in 0..3 {
                    m[(i, j)] = s[(i, j)];
                }
                m[(i, 3)] = c[3 + i];
            }
            m
        }
    }
}

/// Inverse of [`hat`]. Reads the skew part of the rotation block, so it
/// also acts as a projection for matrices slightly off the algebra.
pub fn vee(group: Group, m: &DMatrix<f64>) -> Result<AlgebraElement> {
    let n = group.matrix_dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.nrows(),
        });
    }
    Ok(AlgebraElement::from_coords(group, vee_coords(group, m)))
}

pub(crate) fn vee_coords(group: Group, m: &DMatrix<f64>) -> DVector<f64> {
    let w = [
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    ];
    match group {
        Group::SO3 => DVector::from_column_slice(&w),
        Group::SE3 => DVector::from_column_slice(&[w[0], w[1], w[2], m[(0, 3)], m[(1, 3)], m[(2, 3)]]),
    }
}

/// Coordinate matrix of `η ↦ ad_ξ η = [ξ, η]`.
pub fn ad_matrix(xi: &AlgebraElement) -> DMatrix<f64> {
    ad_matrix_coords(xi.group, &xi.coords)
}

pub(crate) fn ad_matrix_coords(group: Group, c: &DVector<f64>) -> DMatrix<f64> {
    let w = so3::hat(&Vector3::new(c[0], c[1], c[2]));
    match group {
        Group::SO3 => DMatrix::from_fn(3, 3, |i, j| w[(i, j)]),
        Group::SE3 => {
            let v = so3::hat(&Vector3::new(c[3], c[4], c[5]));
            let mut m = DMatrix::zeros(6, 6);
            for i in 0..3 {
                for j in 0..3 {
                    m[(i, j)] = w[(i, j)];
                    m[(i + 3, j + 3)] = w[(i, j)];
                    m[(i + 3, j)] = v[(i, j)];
                }
            }
            m
        }
    }
}

/// Coordinate matrix of `ξ ↦ Ad_g ξ = g ξ g⁻¹`.
pub fn adjoint_matrix(g: &GroupElement) -> DMatrix<f64> {
    let r = g.rotation();
    match g.group {
        Group::SO3 => DMatrix::from_fn(3, 3, |i, j| r[(i, j)]),
        Group::SE3 => {
            let pr = so3::hat(&g.translation()) * r;
            let mut m = DMatrix::zeros(6, 6);
            for i in 0..3 {
                for j in 0..3 {
                    m[(i, j)] = r[(i, j)];
                    m[(i + 3, j + 3)] = r[(i, j)];
                    m[(i + 3, j)] = pr[(i, j)];
                }
            }
            m
        }
    }
}

/// `Ad_g ξ`.
pub fn adjoint(g: &GroupElement, xi: &AlgebraElement) -> Result<AlgebraElement> {
    ensure_same(g.group, xi.group)?;
    Ok(AlgebraElement::from_coords(xi.group, adjoint_matrix(g) * &xi.coords))
}

/// `Ad*_g μ`, defined by `⟨Ad*_g μ, ξ⟩ = ⟨μ, Ad_g ξ⟩`.
pub fn adjoint_star(g: &GroupElement, mu: &Momentum) -> Result<Momentum> {
    ensure_same(g.group, mu.group)?;
    Ok(Momentum::from_coords(mu.group, adjoint_matrix(g).tr_mul(&mu.coords)))
}

/// `ad_ξ η = [ξ, η]`.
pub fn ad(xi: &AlgebraElement, eta: &AlgebraElement) -> Result<AlgebraElement> {
    ensure_same(xi.group, eta.group)?;
    Ok(AlgebraElement::from_coords(xi.group, ad_matrix(xi) * &eta.coords))
}

/// `ad*_ξ μ`, the transpose of `ad_ξ` applied to `μ`.
pub fn ad_star(xi: &AlgebraElement, mu: &Momentum) -> Result<Momentum> {
    ensure_same(xi.group, mu.group)?;
    Ok(Momentum::from_coords(mu.group, ad_matrix(xi).tr_mul(&mu.coords)))
}
