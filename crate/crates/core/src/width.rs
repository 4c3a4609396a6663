//! Well-conditioned subspaces for families of vectors close to an
//! orthonormal basis.
//!
//! Given columns `v_j` with `‖v_j − u_j‖ ≤ d` and `1 < α < 1/d`, the span of
//! the top `k = n − ⌊α²d²n⌋` right singular vectors of `T₁ = [v_1 … v_n]`
//! is a subspace `X` with `dim X > (1 − α²d²)n − 1` on which
//! `‖Σ c_j v_j‖ ≥ s_k(T₁)‖c‖ ≥ (1 − 1/α)‖c‖`.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{singular_values as svals, CMatrix};

/// Tolerance on `‖v_j − u_j‖ ≤ d`, relative to `d`.
const DRIFT_TOL: f64 = 1e-12;

/// Singular values of a square complex matrix, descending.
pub fn singular_values(t: &CMatrix) -> Vec<f64> {
    svals(t)
}

/// `n` vectors of `ℂⁿ` (the columns of `T₁`) within `d` of the standard basis.
#[derive(Debug, Clone)]
pub struct PerturbedBasis {
    vectors: CMatrix,
    d: f64,
}

impl PerturbedBasis {
    pub fn new(vectors: CMatrix, d: f64) -> Result<Self> {
        if !vectors.is_square() || vectors.nrows() == 0 {
            return invalid(format!("need a nonempty square matrix, got {}×{}", vectors.nrows(), vectors.ncols()));
        }
        if !(d > 0.0 && d < 1.0) {
            return invalid(format!("perturbation bound must lie in (0, 1), got {d}"));
        }
        let worst = Self::drift_of(&vectors);
        if worst > d * (1.0 + DRIFT_TOL) {
            return invalid(format!("column drift {worst} exceeds d = {d}"));
        }
        Ok(Self { vectors, d })
    }

    /// `v_j = u_j + d·w_j` with independent uniformly random unit `w_j`,
    /// so every constraint holds with equality.
    pub fn saturating_random<R: Rng>(n: usize, d: f64, rng: &mut R) -> Result<Self> {
        let mut m = CMatrix::identity(n, n);
        for j in 0..n {
            let w = random_unit(n, rng);
            for i in 0..n {
                m[(i, j)] += w[i] * d;
            }
        }
        Self::new(m, d)
    }

    /// `v_j = u_j − d·w` for one fixed unit vector `w`.
    pub fn rank_one_drift(w: &[Complex64], d: f64) -> Result<Self> {
        let n = w.len();
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return invalid("drift direction must be nonzero");
        }
        let mut m = CMatrix::identity(n, n);
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] -= w[i] * (d / norm);
            }
        }
        Self::new(m, d)
    }

    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.vectors
    }

    /// `T₂ = I − T₁`.
    pub fn defect(&self) -> CMatrix {
        CMatrix::identity(self.n(), self.n()) - &self.vectors
    }

    /// `max_j ‖v_j − u_j‖`.
    pub fn max_drift(&self) -> f64 {
        Self::drift_of(&self.vectors)
    }

    fn drift_of(m: &CMatrix) -> f64 {
        (0..m.ncols())
            .map(|j| {
                (0..m.nrows())
                    .map(|i| {
                        let u = if i == j { 1.0 } else { 0.0 };
                        (m[(i, j)] - u).norm_sqr()
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

pub fn random_unit<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    // complex Gaussian direction via Box–Muller
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            let r = (-2.0 * u1.ln()).sqrt();
            let t = 2.0 * std::f64::consts::PI * u2;
            Complex64::new(r * t.cos(), r * t.sin())
        })
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct WidthCertificate {
    pub n: usize,
    pub d: f64,
    pub alpha: f64,
    /// `n − ⌊α²d²n⌋`.
    pub k: usize,
    /// Orthonormal `n × k` basis of `X`.
    #[serde(skip)]
    pub basis: CMatrix,
    /// `s_k(T₁)`, the exact minimum of `‖T₁c‖` over unit `c ∈ X`.
    pub certified_sigma: f64,
    #[serde(skip)]
    pub singular_values: Vec<f64>,
}

impl WidthCertificate {
    /// `(1 − α²d²)n − 1`, which `k` strictly exceeds.
    pub fn dimension_bound(&self) -> f64 {
        (1.0 - self.alpha * self.alpha * self.d * self.d) * self.n as f64 - 1.0
    }

    /// `1 − 1/α`.
    pub fn sigma_bound(&self) -> f64 {
        1.0 - 1.0 / self.alpha
    }

    pub fn holds(&self) -> bool {
        self.k as f64 > self.dimension_bound() && self.certified_sigma >= self.sigma_bound()
    }

    /// Minimum of `‖T c‖` over unit `c ∈ X`, recomputed from the basis.
    pub fn synthesis_min(&self, t: &CMatrix) -> f64 {
        let restricted = t * &self.basis;
        let s = restricted.singular_values();
        s.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Numerical rank of `T₁` at a relative cutoff, for comparison with the
    /// classical `(1 − d²)n` lower bound on the span dimension.
    pub fn span_rank(&self, rel_cutoff: f64) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values.iter().filter(|&&s| s > rel_cutoff * smax).count()
    }
}

/// Builds `X` from the top-`k` right singular vectors of `T₁`.
pub fn extract_subspace(basis: &PerturbedBasis, alpha: f64) -> Result<WidthCertificate> {
    let d = basis.d();
    if !(alpha > 1.0 && alpha * d < 1.0) {
        return invalid(format!("α must lie in (1, 1/d) = (1, {}), got {alpha}", 1.0 / d));
    }
    let n = basis.n();
    let k = n - (alpha * alpha * d * d * n as f64).floor() as usize;
    let svd = basis.matrix().clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    // rows of Vᴴ are conjugated right singular vectors
    let x_basis = CMatrix::from_fn(n, k, |i, j| v_t[(order[j], i)].conj());
    let cert =
        WidthCertificate { n, d, alpha, k, basis: x_basis, certified_sigma: singular_values[k - 1], singular_values };
    if !cert.holds() {
        return Err(Error::Certificate(format!(
            "s_k(T₁) = {} < 1 − 1/α = {} (k = {k}, n = {n})",
            cert.certified_sigma,
            cert.sigma_bound()
        )));
    }
    Ok(cert)
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylReport {
    pub holds: bool,
    /// Largest `s_{k+j−1}(T₁+T₂) − s_k(T₁) − s_j(T₂)` over all pairs.
    pub worst_violation: f64,
    pub pairs_checked: usize,
}

/// Checks `s_{k+j−1}(T₁ + T₂) ≤ s_k(T₁) + s_j(T₂)` for all valid `(k, j)`.
pub fn weyl_check(t1: &CMatrix, t2: &CMatrix, tol: f64) -> Result<WeylReport> {
    if t1.shape() != t2.shape() {
        return invalid(format!("shape mismatch {:?} vs {:?}", t1.shape(), t2.shape()));
    }
    Ok(weyl_from_values(&singular_values(t1), &singular_values(t2), &singular_values(&(t1 + t2)), tol))
}

/// [`weyl_check`] on descending singular values that are already known.
pub fn weyl_from_values(s1: &[f64], s2: &[f64], s12: &[f64], tol: f64) -> WeylReport {
    let n = s12.len().min(s1.len()).min(s2.len());
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0;
    for k in 1..=n {
        for j in 1..=(n + 1 - k) {
            worst = worst.max(s12[k + j - 2] - s1[k - 1] - s2[j - 1]);
            pairs += 1;
        }
    }
    WeylReport { holds: worst <= tol, worst_violation: worst, pairs_checked: pairs }
}
