use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Coefficients `(a, b, c)` of an s-stage Runge-Kutta scheme.
///
/// `c` is always computed as the row sums of `a`, and every weight `b_i`
/// must be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    name: String,
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
}

impl ButcherTableau {
    pub fn new(name: impl Into<String>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let s = b.len();
        if s == 0 {
            return Err(Error::InvalidTableau("at least one stage is required".into()));
        }
        if a.nrows() != s || a.ncols() != s {
            return Err(Error::InvalidTableau(format!(
                "a must be {s}x{s} to match b, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if let Some(v) = a.iter().chain(b.iter()).find(|v| !v.is_finite()) {
            return Err(Error::InvalidTableau(format!("non-finite coefficient {v}")));
        }
        if let Some(i) = b.iter().position(|&v| v == 0.0) {
            return Err(Error::InvalidTableau(format!("weight b_{} is zero; every b_i must be nonzero", i + 1)));
        }
        let c = DVector::from_fn(s, |i, _| a.row(i).sum());
        Ok(Self {
            name: name.into(),
            a,
            b,
            c,
        })
    }

    /// Builds a tableau from row-major `a` and `b`.
    pub fn from_rows(name: impl Into<String>, a: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        let s = b.len();
        if a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::InvalidTableau(format!("a must be {s}x{s} to match b")));
        }
        let flat: Vec<f64> = a.iter().flatten().copied().collect();
        Self::new(name, DMatrix::from_row_slice(s, s, &flat), DVector::from_column_slice(b))
    }

    pub fn forward_euler() -> Self {
        Self::from_rows("forward_euler", &[vec![0.0]], &[1.0]).unwrap()
    }

    pub fn backward_euler() -> Self {
        Self::from_rows("backward_euler", &[vec![1.0]], &[1.0]).unwrap()
    }

    pub fn implicit_midpoint() -> Self {
        Self::from_rows("implicit_midpoint", &[vec![0.5]], &[1.0]).unwrap()
    }

    /// Lobatto IIIA two-stage tableau; yields Störmer-Verlet.
    pub fn implicit_trapezoidal() -> Self {
        Self::from_rows("implicit_trapezoidal", &[vec![0.0, 0.0], vec![0.5, 0.5]], &[0.5, 0.5]).unwrap()
    }

    /// Two-stage Gauss-Legendre, order 4.
    pub fn gauss2() -> Self {
        let r = 3f64.sqrt() / 6.0;
        Self::from_rows("gauss2", &[vec![0.25, 0.25 - r], vec![0.25 + r, 0.25]], &[0.5, 0.5]).unwrap()
    }

    /// Classical explicit fourth-order method.
    pub fn rk4() -> Self {
        Self::from_rows(
            "rk4",
            &[
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        )
        .unwrap()
    }

    pub const NAMES: [&'static str; 6] = [
        "forward_euler",
        "backward_euler",
        "implicit_midpoint",
        "implicit_trapezoidal",
        "gauss2",
        "rk4",
    ];

    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "forward_euler" => Self::forward_euler(),
            "backward_euler" => Self::backward_euler(),
            "implicit_midpoint" => Self::implicit_midpoint(),
            "implicit_trapezoidal" | "sv" => Self::implicit_trapezoidal(),
            "gauss2" => Self::gauss2(),
            "rk4" => Self::rk4(),
            _ => return None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    /// `a_ij = 0` for all `j ≥ i`.
    pub fn is_explicit(&self) -> bool {
        let s = self.stages();
        (0..s).all(|i| (i..s).all(|j| self.a[(i, j)] == 0.0))
    }
}

impl fmt::Display for ButcherTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_sums_define_c() {
        let t = ButcherTableau::gauss2();
        assert!((t.c()[0] - (0.5 - 3f64.sqrt() / 6.0)).abs() < 1e-16);
        assert!((t.c()[1] - (0.5 + 3f64.sqrt() / 6.0)).abs() < 1e-16);
        assert_eq!(ButcherTableau::implicit_trapezoidal().c().as_slice(), &[0.0, 1.0]);
        assert_eq!(ButcherTableau::rk4().c().as_slice(), &[0.0, 0.5, 0.5, 1.0]);
    }

    #[test]
    fn zero_weight_rejected() {
        // Lobatto IIIA three-stage tableau has no zero weights, but a tableau
        // with b₁ = 0 must be refused.
        let err = ButcherTableau::from_rows("bad", &[vec![0.0, 0.0], vec![0.5, 0.5]], &[0.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("b_1"));
    }

    #[test]
    fn shape_checked() {
        assert!(ButcherTableau::from_rows("bad", &[vec![0.0, 0.0]], &[1.0]).is_err());
        assert!(ButcherTableau::from_rows("bad", &[], &[]).is_err());
    }

    #[test]
    fn explicitness() {
        assert!(ButcherTableau::forward_euler().is_explicit());
        assert!(ButcherTableau::rk4().is_explicit());
        assert!(!ButcherTableau::implicit_trapezoidal().is_explicit());
        assert!(!ButcherTableau::backward_euler().is_explicit());
    }

    #[test]
    fn names_resolve() {
        for name in ButcherTableau::NAMES {
            assert_eq!(ButcherTableau::by_name(name).unwrap().name(), name);
        }
        assert!(ButcherTableau::by_name("nope").is_none());
    }
}
