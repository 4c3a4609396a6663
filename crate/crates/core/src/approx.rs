//! Norm-budgeted approximation of `δ_ξ` on a window of Λ by functions of
//! `PW_S`, and the measure/density inequality checks.
//!
//! The minimizer of `‖f|_Λ − δ_ξ‖² + μ‖f‖²` over all of `PW_S` lies in the
//! span of the window atoms, and with `f = Σ c_j K_S(· − λ_j)` it solves
//! `(G + μI)c = e_ξ`. Everything below runs off one eigendecomposition
//! `G = U diag(s) Uᴴ`: with `w = Uᴴe_ξ`,
//!
//! ```text
//! error²(μ) = Σ_k |w_k|² (μ / (s_k + μ))²
//! norm²(μ)  = Σ_k |w_k|² s_k / (s_k + μ)²
//! ```
//!
//! so the ridge path is monotone in `μ` by construction.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gram::GramMatrix;
use crate::linalg::CVector;
use crate::spectrum::SpectrumSet;

pub const BUDGET_REL_TOL: f64 = 1e-6;
pub const BUDGET_MAX_ITER: usize = 80;

/// Margins at or above this value count as satisfied.
pub const MARGIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct ApproxSolution {
    pub xi_index: usize,
    #[serde(skip)]
    pub coefficients: CVector,
    /// `‖Gc − e_ξ‖` over the window.
    pub error: f64,
    /// `‖f‖_{L²(ℝ)} = (cᴴGc)^{1/2}`.
    pub norm: f64,
    pub mu: f64,
    /// Set when `μ = 0` and the pseudo-inverse dropped eigenvalues.
    pub rank_deficient: bool,
}

impl ApproxSolution {
    /// Recomputes `(error, norm)` directly from the coefficients.
    pub fn recompute(&self, gram: &GramMatrix) -> (f64, f64) {
        let mut r = gram.samples(&self.coefficients);
        r[self.xi_index] -= Complex64::new(1.0, 0.0);
        (r.norm(), gram.quadratic_form(&self.coefficients).max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub mu: f64,
    pub error: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TradeoffCurve {
    pub points: Vec<TradeoffPoint>,
}

impl TradeoffCurve {
    /// Checks that error is nondecreasing and norm nonincreasing in `μ`,
    /// up to a relative tolerance.
    pub fn is_monotone(&self, rel_tol: f64) -> bool {
        self.points.windows(2).all(|w| {
            // points are ordered with μ descending
            let (hi, lo) = (w[0], w[1]);
            hi.error >= lo.error * (1.0 - rel_tol) - rel_tol && hi.norm <= lo.norm * (1.0 + rel_tol) + rel_tol
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu,error,norm\n");
        for p in &self.points {
            out.push_str(&format!("{:e},{:e},{:e}\n", p.mu, p.error, p.norm));
        }
        out
    }
}

/// Ridge solver over one Gram matrix; the factorization is shared by all
/// targets and regularization weights.
#[derive(Debug, Clone, Copy)]
pub struct DeltaSolver<'g> {
    gram: &'g GramMatrix,
}

impl<'g> DeltaSolver<'g> {
    pub fn new(gram: &'g GramMatrix) -> Self {
        Self { gram }
    }

    pub fn gram(&self) -> &'g GramMatrix {
        self.gram
    }

    fn check_target(&self, xi: usize) -> Result<()> {
        if xi >= self.gram.dim() {
            return invalid(format!("target index {xi} outside window of size {}", self.gram.dim()));
        }
        Ok(())
    }

    /// Pseudo-inverse cutoff used at `μ = 0`.
    fn rank_cutoff(&self) -> f64 {
        let e = self.gram.eigen();
        e.values[0] * f64::EPSILON * self.gram.dim() as f64
    }

    /// `|w_k|² = |U[ξ,k]|²`.
    fn weights(&self, xi: usize) -> Vec<f64> {
        let v = &self.gram.eigen().vectors;
        (0..v.ncols()).map(|k| v[(xi, k)].norm_sqr()).collect()
    }

    /// Spectral filter `c = U diag(h(s)) Uᴴ e_ξ`.
    fn filtered(&self, xi: usize, h: impl Fn(f64) -> f64) -> CVector {
        let e = self.gram.eigen();
        let n = self.gram.dim();
        let mut c = CVector::zeros(n);
        for (k, &s) in e.values.iter().enumerate() {
            let g = h(s);
            if g == 0.0 {
                continue;
            }
            let coef = e.vectors[(xi, k)].conj() * g;
            for i in 0..n {
                c[i] += e.vectors[(i, k)] * coef;
            }
        }
        c
    }

    fn ridge_error_norm(&self, w: &[f64], mu: f64) -> (f64, f64) {
        let vals = &self.gram.eigen().values;
        let mut err2 = 0.0;
        let mut norm2 = 0.0;
        for (&wk, &s) in w.iter().zip(vals) {
            let den = s + mu;
            err2 += wk * (mu / den).powi(2);
            norm2 += wk * s / (den * den);
        }
        (err2.sqrt(), norm2.sqrt())
    }

    /// Minimizes `‖Gc − e_ξ‖² + μ cᴴGc`.
    pub fn solve_delta(&self, xi: usize, mu: f64) -> Result<ApproxSolution> {
        self.check_target(xi)?;
        if !(mu >= 0.0) || !mu.is_finite() {
            return invalid(format!("regularization weight must be finite and ≥ 0, got {mu}"));
        }
        let w = self.weights(xi);
        if mu > 0.0 {
            let (error, norm) = self.ridge_error_norm(&w, mu);
            return Ok(ApproxSolution {
                xi_index: xi,
                coefficients: self.filtered(xi, |s| 1.0 / (s + mu)),
                error,
                norm,
                mu,
                rank_deficient: false,
            });
        }
        let cutoff = self.rank_cutoff();
        let vals = &self.gram.eigen().values;
        let mut err2 = 0.0;
        let mut norm2 = 0.0;
        let mut dropped = false;
        for (&wk, &s) in w.iter().zip(vals) {
            if s > cutoff {
                norm2 += wk / s;
            } else {
                err2 += wk;
                dropped = true;
            }
        }
        Ok(ApproxSolution {
            xi_index: xi,
            coefficients: self.filtered(xi, |s| if s > cutoff { 1.0 / s } else { 0.0 }),
            error: err2.sqrt(),
            norm: norm2.sqrt(),
            mu: 0.0,
            rank_deficient: dropped,
        })
    }

    /// One solve per weight; `mu_grid` must be positive and descending.
    pub fn tradeoff(&self, xi: usize, mu_grid: &[f64]) -> Result<TradeoffCurve> {
        self.check_target(xi)?;
        if mu_grid.is_empty() {
            return invalid("empty μ grid");
        }
        if mu_grid.iter().any(|&m| !(m > 0.0)) || mu_grid.windows(2).any(|w| w[0] <= w[1]) {
            return invalid("μ grid must be positive and strictly descending");
        }
        let w = self.weights(xi);
        let points: Vec<TradeoffPoint> = mu_grid
            .iter()
            .map(|&mu| {
                let (error, norm) = self.ridge_error_norm(&w, mu);
                TradeoffPoint { mu, error, norm }
            })
            .collect();
        let curve = TradeoffCurve { points };
        if !curve.is_monotone(1e-12) {
            return Err(Error::Certificate("ridge path lost monotonicity".into()));
        }
        Ok(curve)
    }

    /// Smallest window error among solutions with `‖f‖ ≤ budget`.
    ///
    /// Bisection in `log μ`: the ridge norm is continuous and strictly
    /// decreasing in `μ`, and `norm(μ) ≤ 1/(2√μ)`, so `μ = 1/(4R²)` is
    /// always feasible.
    pub fn min_error_with_budget(&self, xi: usize, budget: f64) -> Result<ApproxSolution> {
        self.check_target(xi)?;
        if !(budget > 0.0) || !budget.is_finite() {
            return invalid(format!("norm budget must be positive, got {budget}"));
        }
        let exact = self.solve_delta(xi, 0.0)?;
        if exact.norm <= budget {
            return Ok(exact);
        }
        let w = self.weights(xi);
        let smax = self.gram.eigen().values[0];
        // nudged so rounding cannot put the starting point on the wrong side
        let mut hi = (1.0 + 1e-9) / (4.0 * budget * budget);
        let mut lo = (smax * 1e-18).max(f64::MIN_POSITIVE);
        if self.ridge_error_norm(&w, lo).1 <= budget {
            return self.solve_delta(xi, lo);
        }
        for _ in 0..BUDGET_MAX_ITER {
            let mid = (lo * hi).sqrt();
            let norm = self.ridge_error_norm(&w, mid).1;
            if norm <= budget {
                hi = mid;
                if budget - norm <= BUDGET_REL_TOL * budget {
                    break;
                }
            } else {
                lo = mid;
            }
        }
        self.solve_delta(xi, hi)
    }

    /// Largest budgeted error over all targets in the window.
    pub fn max_error_with_budget(&self, budget: f64) -> Result<(usize, f64)> {
        let mut worst = (0, 0.0);
        for xi in 0..self.gram.dim() {
            let e = self.min_error_with_budget(xi, budget)?.error;
            if e > worst.1 {
                worst = (xi, e);
            }
        }
        Ok(worst)
    }
}

/// `m(S) ≥ 2π(1 − d²)·density`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BoundCheck {
    pub measure_s: f64,
    pub density: f64,
    pub d: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    /// Density and error come from finite windows; a negative margin is then
    /// a statement about the window, not about the limit.
    pub finite_window: bool,
}

impl BoundCheck {
    pub fn new(measure_s: f64, d: f64, density: f64, finite_window: bool) -> Result<Self> {
        if !(d > 0.0 && d < 1.0) {
            return invalid(format!("d must lie in (0, 1), got {d}"));
        }
        if !(measure_s > 0.0) || !(density >= 0.0) {
            return invalid(format!("need m(S) > 0 and density ≥ 0, got {measure_s}, {density}"));
        }
        let rhs = 2.0 * PI * (1.0 - d * d) * density;
        let margin = measure_s - rhs;
        Ok(Self { measure_s, density, d, rhs, margin, satisfied: margin >= -MARGIN_TOL, finite_window })
    }

    /// Same check parameterized by `d²`, avoiding a square root round trip.
    pub fn from_d_sq(measure_s: f64, d_sq: f64, density: f64, finite_window: bool) -> Result<Self> {
        if !(d_sq > 0.0 && d_sq < 1.0) {
            return invalid(format!("d² must lie in (0, 1), got {d_sq}"));
        }
        let mut check = Self::new(measure_s, d_sq.sqrt(), density, finite_window)?;
        check.rhs = 2.0 * PI * (1.0 - d_sq) * density;
        check.margin = measure_s - check.rhs;
        check.satisfied = check.margin >= -MARGIN_TOL;
        Ok(check)
    }

    /// Re-derives `rhs`, `margin` and `satisfied` from the raw fields.
    pub fn verify(&self) -> bool {
        let rhs = 2.0 * PI * (1.0 - self.d * self.d) * self.density;
        let margin = self.measure_s - rhs;
        (rhs - self.rhs).abs() <= 1e-12 * rhs.abs().max(1.0)
            && (margin - self.margin).abs() <= 1e-12 * self.measure_s.max(1.0)
            && self.satisfied == (self.margin >= -MARGIN_TOL)
    }
}

/// The measure/density inequality for spectrum `S`; `density` may be an
/// estimate of either `D⁺` or `D*`.
pub fn check_theorem1(spectrum: &SpectrumSet, d: f64, density: f64, finite_window: bool) -> Result<BoundCheck> {
    BoundCheck::new(spectrum.measure(), d, density, finite_window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::DiscreteSet;

    fn identity_gram() -> GramMatrix {
        GramMatrix::build(&DiscreteSet::integers(-50, 50).unwrap(), &SpectrumSet::symmetric(PI).unwrap()).unwrap()
    }

    #[test]
    fn identity_interpolation() {
        let g = identity_gram();
        let sol = DeltaSolver::new(&g).solve_delta(50, 0.0).unwrap();
        assert!(sol.error < 1e-12);
        assert!((sol.norm - 1.0).abs() < 1e-12);
        assert!((sol.coefficients[50].re - 1.0).abs() < 1e-12);
        assert!(!sol.rank_deficient);
    }

    #[test]
    fn identity_ridge_closed_form() {
        let g = identity_gram();
        let solver = DeltaSolver::new(&g);
        let grid = [10.0, 1.0, 0.5, 0.1];
        let curve = solver.tradeoff(7, &grid).unwrap();
        for p in &curve.points {
            assert!((p.error - p.mu / (1.0 + p.mu)).abs() < 1e-12);
            assert!((p.norm - 1.0 / (1.0 + p.mu)).abs() < 1e-12);
        }
        let single = solver.tradeoff(7, &[0.3]).unwrap();
        let direct = solver.solve_delta(7, 0.3).unwrap();
        assert!((single.points[0].error - direct.error).abs() < 1e-15);
        assert!(solver.tradeoff(7, &[0.1, 1.0]).is_err());
        assert!(solver.tradeoff(7, &[]).is_err());
    }

    #[test]
    fn large_penalty_kills_solution() {
        let g =
            GramMatrix::build(&DiscreteSet::integers(-10, 10).unwrap(), &SpectrumSet::symmetric(1.0).unwrap()).unwrap();
        let sol = DeltaSolver::new(&g).solve_delta(10, 1e12).unwrap();
        assert!(sol.norm < 1e-10);
        assert!((sol.error - 1.0).abs() < 1e-10);
    }

    #[test]
    fn budget_examples_on_identity() {
        let g = identity_gram();
        let s = DeltaSolver::new(&g);
        let full = s.min_error_with_budget(3, 1.0).unwrap();
        assert!(full.error < 1e-12);
        let half = s.min_error_with_budget(3, 0.5).unwrap();
        assert!((half.norm - 0.5).abs() <= 0.5 * BUDGET_REL_TOL);
        assert!(half.norm <= 0.5);
        assert!((half.error - 0.5).abs() < 1e-5);
        assert!(s.min_error_with_budget(3, 0.0).is_err());
    }

    #[test]
    fn coefficients_reproduce_reported_values() {
        let g = GramMatrix::build(&DiscreteSet::integers(-16, 16).unwrap(), &SpectrumSet::symmetric(PI / 2.0).unwrap())
            .unwrap();
        let s = DeltaSolver::new(&g);
        for mu in [1.0, 1e-2, 1e-4] {
            let sol = s.solve_delta(16, mu).unwrap();
            let (e, n) = sol.recompute(&g);
            assert!((e - sol.error).abs() < 1e-10 * sol.norm.max(1.0), "mu {mu}: {e} vs {}", sol.error);
            // relative: clipped round-off eigenvalues are amplified by 1/μ²
            assert!((n - sol.norm).abs() < 1e-10 * sol.norm.max(1.0), "mu {mu}: {n} vs {}", sol.norm);
            assert!(sol.error <= 1.0);
        }
    }

    #[test]
    fn rank_deficiency_flagged() {
        // two points 1e-9 apart: numerically rank one
        let pts = DiscreteSet::new(vec![0.0, 1e-9]).unwrap();
        let g = GramMatrix::build(&pts, &SpectrumSet::symmetric(1.0).unwrap()).unwrap();
        let sol = DeltaSolver::new(&g).solve_delta(0, 0.0).unwrap();
        assert!(sol.rank_deficient);
        assert!(sol.error > 0.5 && sol.error <= 1.0);
    }

    #[test]
    fn bound_check_examples() {
        let eq = BoundCheck::from_d_sq(PI, 0.5, 1.0, false).unwrap();
        assert!(eq.margin.abs() < 1e-12 && eq.satisfied && eq.verify());

        let interp = check_theorem1(&SpectrumSet::symmetric(PI).unwrap(), 0.01, 1.0, false).unwrap();
        assert!((interp.rhs - 2.0 * PI * 0.9999).abs() < 1e-12);
        assert!(interp.margin > 0.0);

        let t2 = BoundCheck::new(0.4, 0.9, 1.0, true).unwrap();
        assert!((t2.rhs - 2.0 * PI * 0.19).abs() < 1e-12);
        assert!(!t2.satisfied && t2.verify());

        assert!(BoundCheck::new(PI, 0.0, 1.0, false).is_err());
        assert!(BoundCheck::new(PI, 1.0, 1.0, false).is_err());
    }

    #[test]
    fn verify_detects_tampering() {
        let mut c = BoundCheck::new(PI, 0.5, 1.0, false).unwrap();
        c.margin += 0.1;
        assert!(!c.verify());
    }
}
