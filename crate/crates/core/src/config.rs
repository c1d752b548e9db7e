//! Solver constants shared by the steppers and the diagnostics.

/// Largest admissible `‖hξ‖` (angular part) per retraction kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainGuards {
    pub exp: f64,
    pub cayley: f64,
    pub skew_sqrt: f64,
}

impl Default for DomainGuards {
    fn default() -> Self {
        Self {
            exp: std::f64::consts::PI - 0.1,
            cayley: 10.0,
            skew_sqrt: 0.99,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericsConfig {
    /// Newton stopping tolerance on the ∞-norm of the residual.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Relative perturbation of the finite-difference Newton Jacobian,
    /// scaled by `1 + ‖x‖`.
    pub newton_fd_step: f64,
    /// Step of the central differences used by gradient checks.
    pub fd_step: f64,
    /// Perturbation of the chart coordinates in the symplecticity test.
    pub chart_fd_step: f64,
    pub domain_guards: DomainGuards,
    /// Truncation index of the dexp⁻¹ Bernoulli series when it is used.
    pub series_q: i64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-12,
            newton_max_iter: 50,
            newton_fd_step: 1e-7,
            fd_step: 1e-6,
            chart_fd_step: 1e-5,
            domain_guards: DomainGuards::default(),
            series_q: 8,
        }
    }
}

/// Largest supported truncation index (the Bernoulli table holds B₀..B₁₅).
pub const MAX_SERIES_Q: i64 = 15;

impl NumericsConfig {
    /// Returns every violated invariant, naming the offending field.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errors = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(format!("{name} must be positive and finite (got {v})"));
            }
        };
        positive("newton_tol", self.newton_tol);
        positive("newton_fd_step", self.newton_fd_step);
        positive("fd_step", self.fd_step);
        positive("chart_fd_step", self.chart_fd_step);
        positive("domain_guards.exp", self.domain_guards.exp);
        positive("domain_guards.cayley", self.domain_guards.cayley);
        positive("domain_guards.skew_sqrt", self.domain_guards.skew_sqrt);
        if self.newton_max_iter < 1 {
            errors.push("newton_max_iter must be at least 1".to_string());
        }
        if !(0..=MAX_SERIES_Q).contains(&self.series_q) {
            errors.push(format!("series_q must lie in 0..={MAX_SERIES_Q} (got {})", self.series_q));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    pub(crate) fn series_index(&self) -> usize {
        self.series_q.clamp(0, MAX_SERIES_Q) as usize
    }
}
