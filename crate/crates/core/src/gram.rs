//! Gram matrix of reproducing-kernel atoms `K_S(· − λ_j)` over a finite
//! window of Λ.
//!
//! For `f = Σ c_j K_S(· − λ_j)` the two identities
//! `‖f‖² = cᴴGc` and `f(λ_k) = (Gc)_k` are exact, which is what lets
//! the solvers in [`crate::approx`] work entirely in coefficient space.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::lattice::DiscreteSet;
use crate::linalg::{hermitian_eigen, CMatrix, CVector, HermitianEigen};
use crate::spectrum::SpectrumSet;

/// Eigenvalues in `[-PSD_CLIP·λ_max, 0)` are treated as round-off and set to 0.
pub const PSD_CLIP: f64 = 1e-10;

#[derive(Debug)]
pub struct GramMatrix {
    points: DiscreteSet,
    spectrum: SpectrumSet,
    entries: CMatrix,
    eigen: OnceLock<GramEigen>,
}

/// Clipped eigendecomposition of a Gram matrix.
#[derive(Debug, Clone)]
pub struct GramEigen {
    /// Descending, clipped to be nonnegative.
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    /// Smallest eigenvalue before clipping.
    pub raw_min: f64,
}

impl GramEigen {
    /// True when the raw spectrum was PSD up to the clipping tolerance.
    pub fn is_numerically_psd(&self) -> bool {
        let max = self.values.first().copied().unwrap_or(0.0);
        self.raw_min >= -PSD_CLIP * max
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    pub max: f64,
    pub min: f64,
}

impl GramMatrix {
    pub fn build(points: &DiscreteSet, spectrum: &SpectrumSet) -> Result<Self> {
        if points.is_empty() {
            return invalid("Gram matrix needs at least one point");
        }
        let p = points.points();
        let n = p.len();
        let diag = Complex64::new(spectrum.measure() / (2.0 * std::f64::consts::PI), 0.0);
        let mut entries = CMatrix::from_element(n, n, diag);
        for j in 0..n {
            for k in 0..j {
                let v = spectrum.kernel(p[j] - p[k]);
                entries[(j, k)] = v;
                entries[(k, j)] = v.conj();
            }
        }
        Ok(Self { points: points.clone(), spectrum: spectrum.clone(), entries, eigen: OnceLock::new() })
    }

    pub fn points(&self) -> &DiscreteSet {
        &self.points
    }

    pub fn spectrum(&self) -> &SpectrumSet {
        &self.spectrum
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Eigendecomposition, computed once on first use.
    pub fn eigen(&self) -> &GramEigen {
        self.eigen.get_or_init(|| {
            let HermitianEigen { values, vectors } = hermitian_eigen(&self.entries);
            let raw_min = values.last().copied().unwrap_or(0.0);
            // anything below -PSD_CLIP·λ_max is reported through `raw_min`
            let values = values.into_iter().map(|v| v.max(0.0)).collect();
            GramEigen { values, vectors, raw_min }
        })
    }

    pub fn summary(&self) -> SpectralSummary {
        let e = self.eigen();
        SpectralSummary { eigenvalues: e.values.clone(), max: e.values[0], min: *e.values.last().unwrap() }
    }

    /// `λ_max(G)`: the largest ratio `Σ_k |f(λ_k)|² / ‖f‖²` over the atom
    /// span of this window. A lower estimate of the Bessel constant of Λ.
    pub fn bessel_constant(&self) -> f64 {
        self.eigen().values[0]
    }

    /// `λ_min(G)` after clipping. Only the window atom span is tested, so this
    /// is an upper estimate of the lower frame bound of the infinite set.
    pub fn frame_lower_bound(&self) -> f64 {
        *self.eigen().values.last().unwrap()
    }

    /// `cᴴGc = ‖Σ c_j K_S(· − λ_j)‖²`.
    pub fn quadratic_form(&self, c: &CVector) -> f64 {
        c.dotc(&(&self.entries * c)).re
    }

    /// `(Gc)_k = f(λ_k)` for `f = Σ c_j K_S(· − λ_j)`.
    pub fn samples(&self, c: &CVector) -> CVector {
        &self.entries * c
    }

    /// Evaluates `Σ c_j K_S(x − λ_j)` at an arbitrary point.
    pub fn synthesize(&self, c: &CVector, x: f64) -> Complex64 {
        self.points.points().iter().zip(c.iter()).map(|(&l, &cj)| cj * self.spectrum.kernel(x - l)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_defect;
    use std::f64::consts::PI;

    #[test]
    fn single_point() {
        let a = 0.8;
        let g = GramMatrix::build(&DiscreteSet::new(vec![0.0]).unwrap(), &SpectrumSet::symmetric(a).unwrap()).unwrap();
        assert_eq!(g.dim(), 1);
        assert!((g.entries()[(0, 0)].re - a / PI).abs() < 1e-15);
        assert!(GramMatrix::build(&DiscreteSet::empty(), &SpectrumSet::symmetric(a).unwrap()).is_err());
    }

    #[test]
    fn full_band_integers_is_identity() {
        let z = DiscreteSet::integers(-50, 50).unwrap();
        let g = GramMatrix::build(&z, &SpectrumSet::symmetric(PI).unwrap()).unwrap();
        let id = CMatrix::identity(101, 101);
        assert!((g.entries() - id).camax() < 1e-15);
        assert!((g.bessel_constant() - 1.0).abs() < 1e-12);
        assert!((g.frame_lower_bound() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_spectrum_gives_real_toeplitz() {
        let a = 1.1;
        let z = DiscreteSet::integers(-10, 10).unwrap();
        let g = GramMatrix::build(&z, &SpectrumSet::symmetric(a).unwrap()).unwrap();
        for j in 0..21 {
            for k in 0..21 {
                let u = j as f64 - k as f64;
                let expected = if u == 0.0 { a / PI } else { (a * u).sin() / (PI * u) };
                assert!((g.entries()[(j, k)] - Complex64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn hermitian_and_psd_for_two_band_spectrum() {
        let s = SpectrumSet::from_pairs(&[(-2.0, -0.3), (0.5, 1.7)]).unwrap();
        let pts = DiscreteSet::new(vec![-3.1, -1.0, 0.0, 0.4, 2.2, 5.0]).unwrap();
        let g = GramMatrix::build(&pts, &s).unwrap();
        assert!(hermitian_defect(g.entries()) < 1e-15);
        assert!(g.eigen().is_numerically_psd());
        for k in 0..g.dim() {
            assert!((g.entries()[(k, k)].re - s.measure() / (2.0 * PI)).abs() < 1e-15);
        }
    }

    #[test]
    fn close_pair_matches_two_by_two_oracle() {
        let pts = DiscreteSet::new(vec![0.0, 0.01]).unwrap();
        let g = GramMatrix::build(&pts, &SpectrumSet::symmetric(PI).unwrap()).unwrap();
        let rho = (0.01 * PI).sin() / (0.01 * PI);
        assert!((g.bessel_constant() - (1.0 + rho)).abs() < 1e-12);
        assert!((g.frame_lower_bound() - (1.0 - rho)).abs() < 1e-12);
        let far = DiscreteSet::new(vec![0.0, 0.01, 1000.5, 2000.5]).unwrap();
        let g = GramMatrix::build(&far, &SpectrumSet::symmetric(PI).unwrap()).unwrap();
        assert!((g.bessel_constant() - (1.0 + rho)).abs() < 1e-3);
    }

    #[test]
    fn window_bounds_for_oversampled_band() {
        let a = 2.0;
        let s = SpectrumSet::symmetric(a).unwrap();
        let mut last = (0.0, f64::INFINITY);
        for n in [16i64, 32, 64] {
            let g = GramMatrix::build(&DiscreteSet::integers(-n, n).unwrap(), &s).unwrap();
            let (hi, lo) = (g.bessel_constant(), g.frame_lower_bound());
            assert!(hi > a / PI && hi < 1.0 + 1e-12);
            assert!(lo >= 0.0 && lo < a / PI);
            assert!(hi >= last.0 && lo <= last.1);
            last = (hi, lo);
        }
    }

    #[test]
    fn even_integers_with_full_band() {
        // K(2m) = sin(2πm)/(2πm) vanishes, so the Gram matrix is the identity
        let evens = DiscreteSet::arithmetic(-100.0, 2.0, 101).unwrap();
        let g = GramMatrix::build(&evens, &SpectrumSet::symmetric(PI).unwrap()).unwrap();
        assert!((g.frame_lower_bound() - 1.0).abs() < 1e-12);
        assert!((g.bessel_constant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn summary_is_descending() {
        let z = DiscreteSet::integers(-20, 20).unwrap();
        let g = GramMatrix::build(&z, &SpectrumSet::symmetric(1.0).unwrap()).unwrap();
        let s = g.summary();
        assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(s.max, s.eigenvalues[0]);
        assert!(s.min >= 0.0);
    }
}
