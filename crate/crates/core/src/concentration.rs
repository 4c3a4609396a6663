//! Band-then-time limiting: eigenvalues of the concentration operator of
//! `(S, Q)` and the dimension bound for `c`-concentrated subspaces.
//!
//! For `f(x) = ∫_S e^{itx} F(t) dt`, the ratio `∫_Q |f|² / ‖f‖²` is the
//! Rayleigh quotient of the integral operator on `L²(S)` with kernel
//! `k_Q(t − s) = (1/2π) ∫_Q e^{ix(t−s)} dx`. It is discretized with
//! composite Gauss–Legendre on each interval of `S` and symmetrized as
//! `√(w_m w_n) k_Q(t_m − t_n)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::quadrature;
use crate::spectrum::SpectrumSet;

/// Default nodes per unit of time–bandwidth product, per interval.
pub const DEFAULT_NODE_DENSITY: f64 = 6.0;
/// Below this many nodes per unit of time–bandwidth product the operator is refused.
pub const MIN_NODE_DENSITY: f64 = 4.0;
pub const MIN_NODES_PER_INTERVAL: usize = 32;
const PANEL_NODES: usize = 16;

/// Grid used for `counts`.
pub const C_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Raw eigenvalues outside `[-EIG_TOL, 1 + EIG_TOL]` are a discretization failure.
pub const EIG_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ConcentrationProblem {
    band: SpectrumSet,
    time: SpectrumSet,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    nodes_per_interval: Vec<usize>,
}

impl ConcentrationProblem {
    /// Default quadrature: `max(32, ⌈6·|S_i|·m(Q)/2π⌉)` nodes on interval `S_i`.
    pub fn new(band: &SpectrumSet, time: &SpectrumSet) -> Result<Self> {
        let counts = band
            .intervals()
            .iter()
            .map(|iv| {
                let tb = iv.length() * time.measure() / (2.0 * PI);
                ((DEFAULT_NODE_DENSITY * tb).ceil() as usize).max(MIN_NODES_PER_INTERVAL)
            })
            .collect();
        Self::with_nodes(band, time, counts)
    }

    /// Same default rule scaled by `factor` (e.g. 2 for a convergence check).
    pub fn refined(band: &SpectrumSet, time: &SpectrumSet, factor: usize) -> Result<Self> {
        let base = Self::new(band, time)?;
        let counts = base.nodes_per_interval.iter().map(|&n| n * factor).collect();
        Self::with_nodes(band, time, counts)
    }

    /// Explicit node count for every interval of the band.
    pub fn with_nodes(band: &SpectrumSet, time: &SpectrumSet, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != band.intervals().len() {
            return invalid(format!("{} node counts for {} band intervals", counts.len(), band.intervals().len()));
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut actual = Vec::with_capacity(counts.len());
        for (iv, &count) in band.intervals().iter().zip(&counts) {
            let tb = iv.length() * time.measure() / (2.0 * PI);
            let needed = (MIN_NODE_DENSITY * tb).ceil() as usize;
            if count < needed.max(1) {
                return Err(Error::QuadratureTooCoarse(format!(
                    "{count} nodes on [{}, {}] with time measure {}; use at least {needed}",
                    iv.lo(),
                    iv.hi(),
                    time.measure()
                )));
            }
            let panels = count.div_ceil(PANEL_NODES);
            let per_panel = count.div_ceil(panels);
            let (x, w) = quadrature::composite(iv.lo(), iv.hi(), panels, per_panel);
            actual.push(x.len());
            nodes.extend(x);
            weights.extend(w);
        }
        Ok(Self { band: band.clone(), time: time.clone(), nodes, weights, nodes_per_interval: actual })
    }

    pub fn band(&self) -> &SpectrumSet {
        &self.band
    }

    pub fn time(&self) -> &SpectrumSet {
        &self.time
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes_per_interval(&self) -> &[usize] {
        &self.nodes_per_interval
    }

    /// `m(S)·m(Q)/2π`.
    pub fn time_bandwidth(&self) -> f64 {
        self.band.measure() * self.time.measure() / (2.0 * PI)
    }

    pub fn operator(&self) -> CMatrix {
        let n = self.nodes.len();
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let mut m = CMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..=a {
                let v = self.time.kernel(self.nodes[a] - self.nodes[b]) * (sw[a] * sw[b]);
                m[(a, b)] = v;
                m[(b, a)] = v.conj();
            }
        }
        m
    }

    pub fn spectrum(&self) -> Result<ConcentrationSpectrum> {
        let op = self.operator();
        let trace: f64 = (0..op.nrows()).map(|i| op[(i, i)].re).sum();
        let eig = hermitian_eigen(&op);
        let raw_max = eig.values.first().copied().unwrap_or(0.0);
        let raw_min = eig.values.last().copied().unwrap_or(0.0);
        if raw_min < -EIG_TOL || raw_max > 1.0 + EIG_TOL {
            return Err(Error::Certificate(format!(
                "concentration eigenvalues [{raw_min}, {raw_max}] leave [0, 1]; refine the quadrature"
            )));
        }
        let eigenvalues: Vec<f64> = eig.values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let counts = C_GRID.iter().map(|&c| (c, eigenvalues.iter().filter(|&&v| v >= c).count())).collect();
        Ok(ConcentrationSpectrum {
            eigenvalues,
            raw_min,
            raw_max,
            trace,
            time_bandwidth: self.time_bandwidth(),
            counts,
        })
    }

    pub fn check_lemma1(&self, c: f64) -> Result<Lemma1Check> {
        if !(c > 0.0 && c < 1.0) {
            return invalid(format!("concentration level must lie in (0, 1), got {c}"));
        }
        Ok(self.spectrum()?.lemma1(c))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationSpectrum {
    /// Descending, clipped to `[0, 1]`.
    pub eigenvalues: Vec<f64>,
    pub raw_min: f64,
    pub raw_max: f64,
    pub trace: f64,
    /// `m(S)·m(Q)/2π`.
    pub time_bandwidth: f64,
    /// `(c, #{eigenvalues ≥ c})` on [`C_GRID`].
    pub counts: Vec<(f64, usize)>,
}

impl ConcentrationSpectrum {
    /// Dimension of the largest `c`-concentrated subspace.
    pub fn count_at_least(&self, c: f64) -> usize {
        self.eigenvalues.iter().filter(|&&v| v >= c).count()
    }

    pub fn trace_rel_error(&self) -> f64 {
        (self.trace - self.time_bandwidth).abs() / self.time_bandwidth
    }

    pub fn lemma1(&self, c: f64) -> Lemma1Check {
        Lemma1Check::new(c, self.count_at_least(c), self.time_bandwidth)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{i},{v:e}\n"));
        }
        out
    }
}

/// `dim X ≤ m(Q)·m(S)/(2πc)` for a `c`-concentrated `X`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Lemma1Check {
    pub c: f64,
    pub count: usize,
    pub bound: f64,
    pub ratio: f64,
    pub satisfied: bool,
}

impl Lemma1Check {
    pub fn new(c: f64, count: usize, time_bandwidth: f64) -> Self {
        let bound = time_bandwidth / c;
        Self { c, count, bound, ratio: count as f64 / bound, satisfied: count as f64 <= bound }
    }

    pub fn verify(&self, time_bandwidth: f64) -> bool {
        *self == Self::new(self.c, self.count, time_bandwidth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prolate(t: f64) -> ConcentrationProblem {
        ConcentrationProblem::new(&SpectrumSet::symmetric(1.0).unwrap(), &SpectrumSet::symmetric(t).unwrap()).unwrap()
    }

    #[test]
    fn default_node_rule() {
        let p = prolate(8.0);
        assert_eq!(p.nodes_per_interval(), &[32]);
        let p = prolate(100.0);
        // 6 · 2 · 200 / 2π = 381.97 → 382, rounded up to whole panels
        assert!(p.node_count() >= 382);
    }

    #[test]
    fn coarse_quadrature_rejected() {
        let s = SpectrumSet::symmetric(1.0).unwrap();
        let q = SpectrumSet::symmetric(50.0).unwrap();
        let err = ConcentrationProblem::with_nodes(&s, &q, vec![40]).unwrap_err();
        assert!(matches!(err, Error::QuadratureTooCoarse(_)));
        assert!(ConcentrationProblem::with_nodes(&s, &q, vec![1, 2]).is_err());
    }

    #[test]
    fn trace_matches_time_bandwidth() {
        let sp = prolate(8.0).spectrum().unwrap();
        assert!((sp.time_bandwidth - 16.0 / PI).abs() < 1e-12);
        assert!(sp.trace_rel_error() < 1e-10);
        let sum: f64 = sp.eigenvalues.iter().sum();
        assert!((sum - sp.trace).abs() < 1e-8);
    }

    #[test]
    fn markov_counts() {
        let sp = prolate(8.0).spectrum().unwrap();
        for &(c, count) in &sp.counts {
            assert!(count as f64 * c <= sp.trace * (1.0 + 1e-3));
        }
    }

    #[test]
    fn vanishing_time_window() {
        let p =
            ConcentrationProblem::new(&SpectrumSet::symmetric(1.0).unwrap(), &SpectrumSet::symmetric(1e-6).unwrap())
                .unwrap();
        let sp = p.spectrum().unwrap();
        assert!(sp.eigenvalues[0] < 1e-6);
    }

    #[test]
    fn lemma1_examples() {
        let p = prolate(8.0);
        let half = p.check_lemma1(0.5).unwrap();
        assert!((half.bound - 32.0 / PI).abs() < 1e-12);
        assert!(half.satisfied && half.count <= 10);
        let tenth = p.check_lemma1(0.1).unwrap();
        assert!((tenth.bound - 160.0 / PI).abs() < 1e-10);
        assert!(tenth.count < 20);
        assert!(p.check_lemma1(1.0).is_err());
        assert!(p.check_lemma1(0.0).is_err());
    }
}
