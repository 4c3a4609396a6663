//! Finite-scale run of the density argument: localized interpolating
//! atoms on a window, a well-conditioned coefficient subspace, its
//! concentration on the enlarged window, and the dimension count that
//! turns into a density bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::concentration::{ConcentrationProblem, Lemma1Check};
use crate::constructions::{fejer, spectral_leakage, SupportCheck};
use crate::error::{invalid, Error, Result};
use crate::lattice::DiscreteSet;
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::quadrature;
use crate::spectrum::SpectrumSet;
use crate::width::{extract_subspace, PerturbedBasis};

/// Relative energy fraction tolerated outside `S(δ)` by the localization check.
pub const LEAKAGE_TOL: f64 = 1e-6;
/// Target for the analytic bound on the energy beyond the quadrature range.
const TAIL_TOL: f64 = 1e-8;
const PANEL_NODES: usize = 16;
const CHUNK: usize = 2048;

#[derive(Debug, Clone, Serialize)]
pub struct PipelineParams {
    pub spectrum: SpectrumSet,
    #[serde(skip)]
    pub points: DiscreteSet,
    pub d: f64,
    pub alpha: f64,
    pub delta: f64,
    pub eps: f64,
    pub r: f64,
    /// Window centre `a`.
    pub center: f64,
    /// The atoms are `f_ξ = scale · K_S(· − ξ)`.
    pub scale: f64,
}

impl PipelineParams {
    pub fn new(spectrum: SpectrumSet, points: DiscreteSet, d: f64, alpha: f64, delta: f64, eps: f64, r: f64) -> Self {
        Self { spectrum, points, d, alpha, delta, eps, r, center: 0.0, scale: 1.0 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d < 1.0) {
            return invalid(format!("d must lie in (0, 1), got {}", self.d));
        }
        if !(self.alpha > 1.0 && self.alpha * self.d < 1.0) {
            return invalid(format!("α must lie in (1, 1/d) = (1, {}), got {}", 1.0 / self.d, self.alpha));
        }
        if !(self.delta > 0.0) || !(self.eps > 0.0 && self.eps < 1.0) || !(self.r > 0.0) {
            return invalid(format!(
                "need δ > 0, 0 < ε < 1, r > 0; got δ = {}, ε = {}, r = {}",
                self.delta, self.eps, self.r
            ));
        }
        if !(self.scale > 0.0) || !self.center.is_finite() {
            return invalid("atom scale must be positive and the centre finite");
        }
        Ok(())
    }

    /// `g_ξ(x) = f_ξ(x)·φ(x − ξ)`.
    fn atom(&self, xi: f64, x: f64) -> Complex64 {
        let u = x - xi;
        self.spectrum.kernel(u) * (self.scale * fejer(self.delta, u))
    }

    /// `|g_ξ(x)| ≤ bound / |x − ξ|³`, from `|K_S(u)| ≤ n/(π|u|)` and
    /// `φ(u) ≤ 4/(δu)²`.
    fn decay_constant(&self) -> f64 {
        let n = self.spectrum.intervals().len() as f64;
        4.0 * n * self.scale / (PI * self.delta * self.delta)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationStage {
    pub measure_s_delta: f64,
    /// Largest `‖g_ξ|_window − δ_ξ‖` over the window atoms.
    pub max_drift: f64,
    pub d: f64,
    pub support: SupportCheck,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WidthStage {
    pub nu: usize,
    pub k: usize,
    pub dimension_bound: f64,
    pub certified_sigma: f64,
    pub sigma_bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationStage {
    /// `(a − r(1+δ), a + r(1+δ))`.
    pub inner_window: (f64, f64),
    /// Quadrature range; the energy beyond it is bounded analytically.
    pub outer_window: (f64, f64),
    pub nodes: usize,
    /// `min ‖g‖² / ‖c‖²` over `c ∈ X`.
    pub synthesis_min: f64,
    /// Smallest quadrature concentration ratio over `X`.
    pub measured: f64,
    /// Bound on the energy beyond the quadrature range, per unit `‖c‖²`.
    pub tail_bound: f64,
    /// `measured / (1 + tail_bound / synthesis_min)`.
    pub certified: f64,
    pub level: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountStage {
    pub dim_x: usize,
    /// Dimension bound for `(1−ε)`-concentrated subspaces of `PW_{S(δ)}`.
    pub lemma1: Lemma1Check,
    /// Eigenvalues `≥ 1 − ε` of the concentration operator of `(S(δ), I')`.
    pub operator_count: usize,
    pub passed: bool,
}

/// `card/(2r) ≤ (1+δ)m(S(δ)) / (2π(1−ε)(1−α²d²)) + 1/(2r(1−α²d²))`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ImpliedInequality {
    pub card: usize,
    pub r: f64,
    pub measure_s: f64,
    pub measure_s_delta: f64,
    pub d: f64,
    pub alpha: f64,
    pub delta: f64,
    pub eps: f64,
    pub lhs: f64,
    pub delta_factor: f64,
    pub eps_factor: f64,
    pub width_factor: f64,
    pub main_term: f64,
    pub finite_r_term: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `m(S)/(2π(1−d²))`, the density bound in the limit.
    pub limit_bound: f64,
    /// The finite-`r` bound is never below the limit bound.
    pub consistent: bool,
}

impl ImpliedInequality {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        card: usize,
        r: f64,
        measure_s: f64,
        measure_s_delta: f64,
        d: f64,
        alpha: f64,
        delta: f64,
        eps: f64,
    ) -> Self {
        let lhs = card as f64 / (2.0 * r);
        let delta_factor = 1.0 + delta;
        let eps_factor = 1.0 - eps;
        let width_factor = 1.0 - alpha * alpha * d * d;
        let main_term = delta_factor * measure_s_delta / (2.0 * PI * eps_factor * width_factor);
        let finite_r_term = 1.0 / (2.0 * r * width_factor);
        let rhs = main_term + finite_r_term;
        let limit_bound = measure_s / (2.0 * PI * (1.0 - d * d));
        Self {
            card,
            r,
            measure_s,
            measure_s_delta,
            d,
            alpha,
            delta,
            eps,
            lhs,
            delta_factor,
            eps_factor,
            width_factor,
            main_term,
            finite_r_term,
            rhs,
            holds: lhs <= rhs,
            limit_bound,
            consistent: rhs >= limit_bound,
        }
    }

    /// Recomputes every derived field from the raw inputs.
    pub fn verify(&self) -> bool {
        *self
            == Self::new(
                self.card,
                self.r,
                self.measure_s,
                self.measure_s_delta,
                self.d,
                self.alpha,
                self.delta,
                self.eps,
            )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub params: PipelineParams,
    pub localization: LocalizationStage,
    pub width: WidthStage,
    pub concentration: ConcentrationStage,
    pub count: CountStage,
    pub inequality: ImpliedInequality,
    pub passed: bool,
}

/// Runs every stage and reports them; fails only on invalid input or when
/// a stage cannot be carried out at all.
pub fn run(params: &PipelineParams) -> Result<PipelineReport> {
    params.validate()?;
    let p = params;
    let window = p.points.window(p.center, p.r)?;
    let lam = window.points();
    let nu = lam.len();
    if nu == 0 {
        return invalid(format!("no points in ({}, {})", p.center - p.r, p.center + p.r));
    }
    let s_delta = p.spectrum.dilate(p.delta)?;

    // localization
    let t1 = CMatrix::from_fn(nu, nu, |k, j| p.atom(lam[j], lam[k]));
    let basis = PerturbedBasis::new(t1.clone(), p.d).map_err(|_| {
        let drift = drift_of(&t1);
        Error::InvalidInput(format!(
            "localized atoms miss δ_ξ on the window by {drift} > d = {}; the family does not satisfy the hypothesis",
            p.d
        ))
    })?;
    let mid = lam[nu / 2];
    let support = spectral_leakage(|x| p.atom(mid, x), &s_delta, p.delta / 20.0, LEAKAGE_TOL)?;
    let localization = LocalizationStage {
        measure_s_delta: s_delta.measure(),
        max_drift: basis.max_drift(),
        d: p.d,
        passed: support.passed,
        support,
    };

    // width
    let cert = extract_subspace(&basis, p.alpha)?;
    let width = WidthStage {
        nu,
        k: cert.k,
        dimension_bound: cert.dimension_bound(),
        certified_sigma: cert.certified_sigma,
        sigma_bound: cert.sigma_bound(),
        passed: cert.holds(),
    };

    // concentration on I'
    let concentration = concentrate(p, lam, &cert.basis)?;

    // dimension count
    let inner = SpectrumSet::interval(concentration.inner_window.0, concentration.inner_window.1)?;
    let level = 1.0 - p.eps;
    let op = ConcentrationProblem::new(&s_delta, &inner)?.spectrum()?;
    let operator_count = op.count_at_least(level);
    let lemma1 = Lemma1Check::new(level, cert.k, op.time_bandwidth);
    let count =
        CountStage { dim_x: cert.k, passed: lemma1.satisfied && cert.k <= operator_count, operator_count, lemma1 };

    let inequality =
        ImpliedInequality::new(nu, p.r, p.spectrum.measure(), s_delta.measure(), p.d, p.alpha, p.delta, p.eps);
    let passed = localization.passed
        && width.passed
        && concentration.passed
        && count.passed
        && inequality.holds
        && inequality.consistent
        && inequality.verify();
    Ok(PipelineReport { params: p.clone(), localization, width, concentration, count, inequality, passed })
}

fn drift_of(t: &CMatrix) -> f64 {
    let id = CMatrix::identity(t.nrows(), t.ncols());
    (t - id).column_iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Gram matrices of `g = Σ c_j g_{λ_j}`, `c = Xb`, inside and outside `I'`.
fn concentrate(p: &PipelineParams, lam: &[f64], x: &CMatrix) -> Result<ConcentrationStage> {
    let nu = lam.len();
    let k = x.ncols();
    let half = p.r * (1.0 + p.delta);
    let (lo, hi) = (p.center - half, p.center + half);

    // each atom contributes at most 2C²/(5D⁵) beyond distance D, and
    // ‖Σ c_j h_j‖² ≤ ν‖c‖² max‖h_j‖²
    let c = p.decay_constant();
    let reach = (2.0 * c * c * nu as f64 / (5.0 * TAIL_TOL)).powf(0.2).max(p.delta * p.r);
    let far_lo = p.center - p.r - reach;
    let far_hi = p.center + p.r + reach;
    let tail_bound = nu as f64 * 2.0 * c * c / (5.0 * reach.powi(5));

    let mut inside = CMatrix::zeros(k, k);
    let mut outside = CMatrix::zeros(k, k);
    let mut nodes = 0;
    for (a, b, is_inside) in [(far_lo, lo, false), (lo, hi, true), (hi, far_hi, false)] {
        let panels = ((b - a).ceil() as usize).max(1);
        let (xs, ws) = quadrature::composite(a, b, panels, PANEL_NODES);
        nodes += xs.len();
        let target = if is_inside { &mut inside } else { &mut outside };
        for (xc, wc) in xs.chunks(CHUNK).zip(ws.chunks(CHUNK)) {
            let b = CMatrix::from_fn(xc.len(), nu, |m, j| p.atom(lam[j], xc[m]) * wc[m].sqrt());
            let y = b * x;
            *target += y.adjoint() * y;
        }
    }
    let full = &inside + &outside;
    let eig = hermitian_eigen(&full);
    let synthesis_min = *eig.values.last().unwrap();
    if !(synthesis_min > 0.0) {
        return Err(Error::Certificate(format!("restricted Gram matrix is singular (λ_min = {synthesis_min})")));
    }
    // M^{-1/2}·inside·M^{-1/2}
    let inv_sqrt = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        k,
        eig.values.iter().map(|v| Complex64::new(v.powf(-0.5), 0.0)),
    ));
    let w = &eig.vectors * inv_sqrt * eig.vectors.adjoint();
    let ratio = hermitian_eigen(&(&w * &inside * &w));
    let measured = *ratio.values.last().unwrap();
    let certified = measured / (1.0 + tail_bound / synthesis_min);
    let level = 1.0 - p.eps;
    Ok(ConcentrationStage {
        inner_window: (lo, hi),
        outer_window: (far_lo, far_hi),
        nodes,
        synthesis_min,
        measured,
        tail_bound,
        certified,
        level,
        passed: certified >= level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(d_sq: f64, alpha: f64, r: f64) -> PipelineParams {
        PipelineParams::new(
            SpectrumSet::symmetric(PI / 2.0).unwrap(),
            DiscreteSet::integers(-400, 400).unwrap(),
            d_sq.sqrt(),
            alpha,
            0.1,
            0.2,
            r,
        )
    }

    #[test]
    fn small_window_runs() {
        let rep = run(&base(0.6, 1.1, 16.0)).unwrap();
        assert_eq!(rep.width.nu, 31);
        assert_eq!(rep.width.k, 31 - (1.1f64 * 1.1 * 0.6 * 31.0).floor() as usize);
        assert!(rep.localization.passed);
        assert!(rep.width.passed);
        assert!(rep.inequality.verify());
        assert!(rep.inequality.consistent);
    }

    #[test]
    fn rejects_alpha_beyond_one_over_d() {
        assert!(run(&base(0.6, 1.3, 16.0)).is_err());
        assert!(run(&base(0.6, 1.0, 16.0)).is_err());
    }

    #[test]
    fn rejects_family_with_large_error() {
        // error² of the kernel family is 0.5 on ℤ, so d² = 0.3 is too small
        let err = run(&base(0.3, 1.1, 16.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn inequality_arithmetic() {
        let q = ImpliedInequality::new(127, 64.0, PI, PI + 0.2, 0.6f64.sqrt(), 1.1, 0.1, 0.2);
        assert!((q.width_factor - (1.0 - 1.21 * 0.6)).abs() < 1e-15);
        assert!((q.limit_bound - 1.25).abs() < 1e-15);
        assert!(q.holds && q.consistent && q.verify());
        let mut tampered = q.clone();
        tampered.rhs *= 0.5;
        assert!(!tampered.verify());
    }
}
