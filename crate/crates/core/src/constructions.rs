//! Explicit function families: the sinc atoms that make the measure bound
//! tight, the Fejér localizer, a fast-decaying band-limited mollifier built
//! as an infinite sinc product, and the two-sideband family on perturbed
//! integers whose norms grow exponentially.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::spectrum::SpectrumSet;

/// `sin(y)/y`, with the removable singularity filled in.
pub fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-4 {
        let y2 = y * y;
        1.0 - y2 / 6.0 + y2 * y2 / 120.0
    } else {
        y.sin() / y
    }
}

/// `(sin(δx/2) / (δx/2))²`; spectrum in `[-δ, δ]`, value 1 at the origin.
pub fn fejer(delta: f64, x: f64) -> f64 {
    sinc(0.5 * delta * x).powi(2)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FejerLocalizer {
    pub delta: f64,
}

impl FejerLocalizer {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return invalid(format!("Fejér width must be positive, got {delta}"));
        }
        Ok(Self { delta })
    }

    pub fn value(&self, x: f64) -> f64 {
        fejer(self.delta, x)
    }
}

/// Atoms `f_j(x) = sin(a(x − j)) / (π(x − j))` on `Λ = ℤ`, spectrum `[-a, a]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SharpExample {
    pub a: f64,
}

impl SharpExample {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < PI) {
            return invalid(format!("a must lie in (0, π), got {a}"));
        }
        Ok(Self { a })
    }

    pub fn spectrum(&self) -> SpectrumSet {
        SpectrumSet::symmetric(self.a).expect("a > 0")
    }

    pub fn atom(&self, j: i64, x: f64) -> f64 {
        let u = x - j as f64;
        self.a / PI * sinc(self.a * u)
    }

    /// `‖f_j|_ℤ − δ_j‖² = 1 − a/π`.
    pub fn analytic_error_sq(&self) -> f64 {
        1.0 - self.a / PI
    }

    /// `‖f_j‖²_{L²} = a/π`.
    pub fn norm_sq(&self) -> f64 {
        self.a / PI
    }

    /// Partial sum over `|k| ≤ K` plus the centre term, and the bound
    /// `2/(π²K)` on the omitted tail.
    pub fn numeric_error_sq(&self, k_max: u64) -> (f64, f64) {
        // smallest terms first
        let mut sum = 0.0;
        for k in (1..=k_max).rev() {
            let t = (self.a * k as f64).sin() / (PI * k as f64);
            sum += 2.0 * t * t;
        }
        sum += (self.a / PI - 1.0).powi(2);
        (sum, 2.0 / (PI * PI * k_max as f64))
    }
}

/// Sum of `j^{-s}` over `j ≥ start`, `s > 1`.
fn power_tail(s: f64, start: u64) -> f64 {
    const DIRECT: u64 = 64;
    let mut sum = 0.0;
    for j in start..start + DIRECT {
        sum += (j as f64).powf(-s);
    }
    // Euler–Maclaurin from m = start + DIRECT
    let m = (start + DIRECT) as f64;
    sum + m.powf(1.0 - s) / (s - 1.0) + 0.5 * m.powf(-s) + s * m.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * m.powf(-s - 3.0) / 720.0
}

/// `ψ(x) = Π_j sinc(δ_j x)` with `δ_j = δ·j^{-1/β}/ζ(1/β)`, so `Σ δ_j = δ`
/// and `ψ ∈ PW_{[-δ, δ]}`. Factors with `δ_j|x| < 10⁻³` are folded into
/// a two-term series for `log sinc`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FastDecayMollifier {
    pub delta: f64,
    pub beta: f64,
    normalizer: f64,
}

/// Factors below this value of `δ_j|x|` go into the tail series.
const MOLLIFIER_CUT: f64 = 1e-3;

impl FastDecayMollifier {
    pub fn new(delta: f64, beta: f64) -> Result<Self> {
        if !(delta > 0.0) || !(beta > 0.0 && beta < 1.0) {
            return invalid(format!("need δ > 0 and 0 < β < 1, got δ = {delta}, β = {beta}"));
        }
        Ok(Self { delta, beta, normalizer: power_tail(1.0 / beta, 1) })
    }

    /// `δ_j`, `j ≥ 1`.
    pub fn width(&self, j: u64) -> f64 {
        self.delta * (j as f64).powf(-1.0 / self.beta) / self.normalizer
    }

    /// Number of explicit factors used at `x`.
    pub fn explicit_factors(&self, x: f64) -> u64 {
        let t = self.delta * x.abs() / (self.normalizer * MOLLIFIER_CUT);
        if t <= 1.0 {
            0
        } else {
            t.powf(self.beta).ceil() as u64
        }
    }

    /// `(log|ψ(x)|, sign)`; `log = -∞` at zeros.
    pub fn log_abs(&self, x: f64) -> (f64, f64) {
        let mut acc = SignedLog::one();
        let j_cut = self.explicit_factors(x) + 1;
        for j in 1..j_cut {
            acc.mul(sinc(self.width(j) * x));
        }
        // log sinc(y) = -y²/6 - y⁴/180 - …
        let s = 1.0 / self.beta;
        let scale = self.delta / self.normalizer;
        let t2 = scale.powi(2) * power_tail(2.0 * s, j_cut);
        let t4 = scale.powi(4) * power_tail(4.0 * s, j_cut);
        let x2 = x * x;
        acc.log -= x2 * t2 / 6.0 + x2 * x2 * t4 / 180.0;
        (acc.log, acc.sign)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (l, s) = self.log_abs(x);
        s * l.exp()
    }
}

/// Product accumulated as `sign · exp(log)`.
#[derive(Debug, Clone, Copy)]
struct SignedLog {
    log: f64,
    sign: f64,
}

impl SignedLog {
    fn one() -> Self {
        Self { log: 0.0, sign: 1.0 }
    }

    fn mul(&mut self, v: f64) {
        if v == 0.0 {
            self.log = f64::NEG_INFINITY;
            self.sign = 0.0;
        } else {
            self.log += v.abs().ln();
            if v < 0.0 {
                self.sign = -self.sign;
            }
        }
    }

    fn div(&mut self, v: f64) {
        self.log -= v.abs().ln();
        if v < 0.0 {
            self.sign = -self.sign;
        }
    }

    fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log.exp()
        }
    }
}

/// Bandwidth given to the sine factor of node `j` inside `f_{λ_n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FactorWidths {
    /// Every factor of `f_{λ_n}` uses `ν(n)`; the `4|n| + 1` factors then
    /// add up to exactly `ε`, keeping `f_{λ_n}` inside the two sidebands.
    Shared,
    /// Factor `j` uses `ν(j)`. The total bandwidth then exceeds `ε`
    /// (the `j = 0` factor alone uses all of it); kept for comparison.
    PerIndex,
}

/// A point `m + frac` with `m` integer; lattice points keep their tiny
/// offsets exact this way.
#[derive(Debug, Clone, Copy)]
struct SplitPoint {
    int: i64,
    frac: f64,
}

impl SplitPoint {
    fn of(x: f64) -> Self {
        let m = x.round();
        Self { int: m as i64, frac: x - m }
    }

    fn minus(&self, other: &SplitPoint) -> f64 {
        (self.int - other.int) as f64 + (self.frac - other.frac)
    }

    /// `sin(π·self)`.
    fn sin_pi(&self) -> f64 {
        let s = (PI * self.frac).sin();
        if self.int.rem_euclid(2) == 0 {
            s
        } else {
            -s
        }
    }
}

/// `Λ = {n + R^{-|n|-1}}`, `S = [-π-ε, -π+ε] ∪ [π-ε, π+ε]` and
///
/// ```text
/// f_{λ_n}(x) = sin(πx)/sin(πλ_n) · sinc(ν(n)(x − λ_n))
///              · Π_{|j| ≤ 2|n|, j ≠ n} sin(w_j(x − λ_j)) / sin(w_j(λ_n − λ_j))
/// ```
///
/// with `ν(n) = ε/(4|n| + 1)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Theorem2Family {
    pub eps: f64,
    pub base: f64,
    pub n_max: i64,
    pub widths: FactorWidths,
}

pub const DEFAULT_N_MAX: i64 = 6;
pub const DEFAULT_WINDOW: i64 = 24;

/// `|sin(πλ_n)|` below this is refused.
const MIN_DENOMINATOR: f64 = 1e-300;

#[derive(Debug, Clone, Serialize)]
pub struct T2Error {
    pub n: i64,
    pub window: i64,
    /// `(Σ_{|k| ≤ K} |f_{λ_n}(λ_k) − δ_{nk}|²)^{1/2}`.
    pub error: f64,
    /// `f_{λ_n}(λ_k) − δ_{nk}` for `k = -K..=K`.
    pub residuals: Vec<(i64, f64)>,
    /// `max_{|x| ≤ K} |f_{λ_n}(x)|` on a fine grid.
    pub growth_proxy: f64,
    /// `max_{|k| ≤ 2|n|} |f_{λ_n}(λ_k) − δ_{nk}|`.
    pub interpolation_defect: f64,
}

impl Theorem2Family {
    pub fn new(eps: f64, base: f64, n_max: i64) -> Result<Self> {
        Self::with_widths(eps, base, n_max, FactorWidths::Shared)
    }

    pub fn with_widths(eps: f64, base: f64, n_max: i64, widths: FactorWidths) -> Result<Self> {
        if !(eps > 0.0 && eps < PI / 2.0) {
            return invalid(format!("ε must lie in (0, π/2), got {eps}"));
        }
        if !(base > 1.0) || !base.is_finite() {
            return invalid(format!("R must exceed 1, got {base}"));
        }
        if n_max < 0 {
            return invalid(format!("n_max must be nonnegative, got {n_max}"));
        }
        let fam = Self { eps, base, n_max, widths };
        for n in -n_max..=n_max {
            let d = fam.node(n).sin_pi().abs();
            if d < MIN_DENOMINATOR {
                return invalid(format!(
                    "|sin πλ_{n}| = {d:e} underflows; decrease R or n_max (R^(n_max+1) must stay below 1e299)"
                ));
            }
        }
        Ok(fam)
    }

    pub fn spectrum(&self) -> SpectrumSet {
        SpectrumSet::from_pairs(&[(-PI - self.eps, -PI + self.eps), (PI - self.eps, PI + self.eps)])
            .expect("ε < π/2 keeps the sidebands disjoint")
    }

    pub fn nu(&self, n: i64) -> f64 {
        self.eps / (4 * n.abs() + 1) as f64
    }

    pub fn offset(&self, n: i64) -> f64 {
        self.base.powi(-(n.unsigned_abs() as i32) - 1)
    }

    pub fn lambda(&self, n: i64) -> f64 {
        n as f64 + self.offset(n)
    }

    fn node(&self, n: i64) -> SplitPoint {
        SplitPoint { int: n, frac: self.offset(n) }
    }

    fn factor_width(&self, n: i64, j: i64) -> f64 {
        match self.widths {
            FactorWidths::Shared => self.nu(n),
            FactorWidths::PerIndex => self.nu(j),
        }
    }

    /// Half-width of the frequency support of `f_{λ_n}` around `±π`.
    pub fn total_bandwidth(&self, n: i64) -> f64 {
        let m = n.abs();
        self.nu(n) + (-2 * m..=2 * m).filter(|&j| j != n).map(|j| self.factor_width(n, j)).sum::<f64>()
    }

    /// Points `λ_k`, `|k| ≤ half_width`.
    pub fn points(&self, half_width: i64) -> Result<crate::lattice::DiscreteSet> {
        crate::lattice::DiscreteSet::new((-half_width..=half_width).map(|k| self.lambda(k)).collect())
    }

    fn check_n(&self, n: i64) -> Result<()> {
        if n.abs() > self.n_max {
            return invalid(format!("|n| = {} exceeds n_max = {}", n.abs(), self.n_max));
        }
        Ok(())
    }

    fn eval_split(&self, n: i64, x: SplitPoint) -> f64 {
        let ln = self.node(n);
        let mut acc = SignedLog::one();
        acc.mul(x.sin_pi());
        acc.div(ln.sin_pi());
        acc.mul(sinc(self.nu(n) * x.minus(&ln)));
        let m = n.abs();
        for j in (-2 * m..=2 * m).filter(|&j| j != n) {
            let lj = self.node(j);
            let w = self.factor_width(n, j);
            acc.mul((w * x.minus(&lj)).sin());
            acc.div((w * ln.minus(&lj)).sin());
        }
        acc.value()
    }

    /// `f_{λ_n}(λ_k)`, with the tiny offsets of both points kept exact.
    pub fn eval_at_node(&self, n: i64, k: i64) -> Result<f64> {
        self.check_n(n)?;
        Ok(self.eval_split(n, self.node(k)))
    }

    /// `f_{λ_n}(x)`.
    pub fn eval(&self, n: i64, x: f64) -> Result<f64> {
        self.check_n(n)?;
        Ok(self.eval_split(n, SplitPoint::of(x)))
    }

    pub fn error(&self, n: i64, window: i64) -> Result<T2Error> {
        self.check_n(n)?;
        if window < 2 * n.abs() {
            return invalid(format!("window half-width {window} must be at least 2|n| = {}", 2 * n.abs()));
        }
        let residuals: Vec<(i64, f64)> = (-window..=window)
            .map(|k| {
                let v = self.eval_split(n, self.node(k));
                (k, if k == n { v - 1.0 } else { v })
            })
            .collect();
        let error = residuals.iter().map(|(_, r)| r * r).sum::<f64>().sqrt();
        let interpolation_defect =
            residuals.iter().filter(|(k, _)| k.abs() <= 2 * n.abs()).map(|(_, r)| r.abs()).fold(0.0, f64::max);
        let steps = 32 * window.max(1);
        let growth_proxy = (-steps..=steps)
            .map(|i| self.eval_split(n, SplitPoint::of(i as f64 / 32.0)).abs())
            .chain(residuals.iter().map(|&(k, r)| (r + if k == n { 1.0 } else { 0.0 }).abs()))
            .fold(0.0, f64::max);
        Ok(T2Error { n, window, error, residuals, growth_proxy, interpolation_defect })
    }

    /// Successive ratio `|r_{k+1}| / |r_k|` at the outermost pair of the
    /// window on each side; the larger of the two. Needs `K > 2|n| + 1`.
    pub fn edge_tail_ratio(&self, n: i64, window: i64) -> Result<f64> {
        self.check_n(n)?;
        if window <= 2 * n.abs() + 1 {
            return invalid(format!("window {window} leaves no tail pair beyond 2|n| + 1"));
        }
        let r = |k: i64| self.eval_split(n, self.node(k)).abs();
        let right = r(window) / r(window - 1);
        let left = r(-window) / r(-window + 1);
        Ok(right.max(left))
    }

    /// The constant `C` for which `|f_{λ_n}(λ_k)| = 16 (C/ε)^{4|n|+1} R^{|n|−|k|}`.
    pub fn fitted_constant(&self, n: i64, k: i64) -> Result<f64> {
        let v = self.eval_at_node(n, k)?.abs();
        let log_scaled = v.ln() + (k.abs() - n.abs()) as f64 * self.base.ln() - 16f64.ln();
        Ok(self.eps * (log_scaled / (4 * n.abs() + 1) as f64).exp())
    }

    /// Energy fraction of `f_{λ_n}` found outside the sidebands.
    pub fn support_check(&self, n: i64, tol: f64) -> Result<SupportCheck> {
        self.check_n(n)?;
        let margin = self.eps / 20.0;
        let f = |x: f64| Complex64::new(self.eval_split(n, SplitPoint::of(x)), 0.0);
        spectral_leakage(f, &self.spectrum(), margin, tol)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportCheck {
    /// Fraction of the windowed sample energy farther than `margin` from the support.
    pub outside_fraction: f64,
    pub margin: f64,
    pub samples: usize,
    pub step: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Estimates how much of the spectrum of `f` lies outside `support`.
///
/// `f` is sampled on a uniform grid fine enough that `support` sits well
/// inside the Nyquist band, tapered by a Gaussian of width `σ = 8/margin`
/// (whose transform is below `e^{-32}` at distance `margin`), and
/// transformed. With `f(x) = ∫ e^{itx} F(t) dt`, bin `q` sits at
/// `t = 2πq/(Mh)`.
pub fn spectral_leakage(
    f: impl Fn(f64) -> Complex64,
    support: &SpectrumSet,
    margin: f64,
    tol: f64,
) -> Result<SupportCheck> {
    if !(margin > 0.0) {
        return invalid(format!("leakage margin must be positive, got {margin}"));
    }
    let nyquist = 2.0 * (support.max_abs_endpoint() + margin);
    let step = PI / nyquist;
    let sigma = 8.0 / margin;
    let len = (16.0 * sigma / step).ceil() as usize;
    let m = len.next_power_of_two();
    let half = (m / 2) as f64;
    let mut buf: Vec<Complex64> = (0..m)
        .map(|i| {
            let x = (i as f64 - half) * step;
            f(x) * (-0.5 * (x / sigma).powi(2)).exp()
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let mut total = 0.0;
    let mut outside = 0.0;
    for (q, z) in buf.iter().enumerate() {
        let qs = if q < m / 2 { q as f64 } else { q as f64 - m as f64 };
        let t = 2.0 * PI * qs / (m as f64 * step);
        let e = z.norm_sqr();
        total += e;
        if support.distance(t) > margin {
            outside += e;
        }
    }
    let outside_fraction = if total > 0.0 { outside / total } else { 0.0 };
    Ok(SupportCheck { outside_fraction, margin, samples: m, step, tol, passed: outside_fraction <= tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharp_example_values() {
        let s = SharpExample::new(PI / 2.0).unwrap();
        assert!((s.analytic_error_sq() - 0.5).abs() < 1e-15);
        assert!((s.atom(3, 3.0) - 0.5).abs() < 1e-15);
        let near_full = SharpExample::new(PI - 1e-9).unwrap();
        assert!(near_full.analytic_error_sq() < 1e-9);
        assert!(SharpExample::new(0.0).is_err());
        assert!(SharpExample::new(PI).is_err());
    }

    #[test]
    fn fejer_values() {
        assert_eq!(fejer(0.7, 0.0), 1.0);
        assert!(fejer(2.0, PI).abs() < 1e-30);
        let expected = ((0.5f64).sin() / 0.5).powi(2);
        assert!((fejer(1.0, 1.0) - expected).abs() < 1e-15);
        assert!((fejer(1.0, 1.0) - 0.919395).abs() < 1e-6);
        assert!(FejerLocalizer::new(0.0).is_err());
    }

    #[test]
    fn mollifier_basics() {
        let m = FastDecayMollifier::new(0.5, 0.5).unwrap();
        assert_eq!(m.eval(0.0), 1.0);
        let total: f64 = (1..200_000).map(|j| m.width(j)).sum();
        assert!(total < 0.5 && total > 0.4999);
        assert!(FastDecayMollifier::new(0.5, 1.0).is_err());
        assert!(FastDecayMollifier::new(0.0, 0.5).is_err());
    }

    #[test]
    fn power_tail_matches_zeta() {
        assert!((power_tail(2.0, 1) - PI * PI / 6.0).abs() < 1e-13);
        assert!((power_tail(4.0, 1) - PI.powi(4) / 90.0).abs() < 1e-13);
        let direct: f64 = (5..2_000_000u64).map(|j| (j as f64).powi(-3)).sum();
        assert!((power_tail(3.0, 5) - direct).abs() < 1e-12);
    }

    #[test]
    fn t2_interpolation_conditions() {
        let fam = Theorem2Family::new(0.1, 20.0, 3).unwrap();
        for n in -3..=3 {
            assert!((fam.eval_at_node(n, n).unwrap() - 1.0).abs() < 1e-12);
            if n != 0 {
                for k in -2 * n.abs()..=2 * n.abs() {
                    if k != n {
                        assert_eq!(fam.eval_at_node(n, k).unwrap(), 0.0);
                    }
                }
            }
        }
        assert!(fam.eval_at_node(4, 0).is_err());
    }

    #[test]
    fn t2_bandwidth_bookkeeping() {
        let fam = Theorem2Family::new(0.1, 20.0, 6).unwrap();
        for n in -6..=6 {
            assert!(fam.total_bandwidth(n) <= fam.eps * (1.0 + 1e-12));
        }
        let literal = Theorem2Family::with_widths(0.1, 20.0, 6, FactorWidths::PerIndex).unwrap();
        assert!(literal.total_bandwidth(1) > 1.6 * literal.eps);
        assert!((fam.spectrum().measure() - 0.4).abs() < 1e-14);
    }

    #[test]
    fn t2_minimal_window_is_exact() {
        let fam = Theorem2Family::new(0.1, 20.0, 6).unwrap();
        for n in -3..=3 {
            let e = fam.error(n, 2 * n.abs()).unwrap();
            assert!(e.error < 1e-13, "n = {n}: {}", e.error);
        }
        assert!(fam.error(2, 3).is_err());
    }

    #[test]
    fn t2_generic_eval_agrees_at_nodes() {
        let fam = Theorem2Family::new(0.1, 20.0, 3).unwrap();
        // away from integers the split and plain evaluations coincide
        let x = 2.37;
        let direct = {
            let n = 1i64;
            let l = |j: i64| fam.lambda(j);
            let mut v = (PI * x).sin() / (PI * l(n)).sin() * sinc(fam.nu(n) * (x - l(n)));
            for j in -2..=2 {
                if j != n {
                    v *= (fam.nu(n) * (x - l(j))).sin() / (fam.nu(n) * (l(n) - l(j))).sin();
                }
            }
            v
        };
        assert!((fam.eval(1, x).unwrap() - direct).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn rejects_underflowing_denominator() {
        assert!(Theorem2Family::new(0.1, 1e60, 6).is_err());
        assert!(Theorem2Family::new(0.1, 1.0, 2).is_err());
    }

    #[test]
    fn leakage_of_pure_sinc() {
        let s = SpectrumSet::symmetric(1.0).unwrap();
        let f = |x: f64| Complex64::new(sinc(x), 0.0);
        let chk = spectral_leakage(f, &s, 0.02, 1e-6).unwrap();
        assert!(chk.passed, "{}", chk.outside_fraction);
        let narrow = SpectrumSet::symmetric(0.5).unwrap();
        let chk = spectral_leakage(f, &narrow, 0.02, 1e-6).unwrap();
        assert!(!chk.passed);
    }

    #[test]
    fn leakage_sees_modulation_direction() {
        // e^{2ix}·sinc(x) has spectrum [1, 3] under f = ∫ e^{itx} F
        let f = |x: f64| Complex64::from_polar(sinc(x), 2.0 * x);
        let right = SpectrumSet::interval(1.0, 3.0).unwrap();
        let left = SpectrumSet::interval(-3.0, -1.0).unwrap();
        assert!(spectral_leakage(f, &right, 0.05, 1e-6).unwrap().passed);
        assert!(!spectral_leakage(f, &left, 0.05, 1e-6).unwrap().passed);
    }
}
