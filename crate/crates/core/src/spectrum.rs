//! Compact spectra as finite unions of closed intervals, and the
//! reproducing kernel of the matching Paley–Wiener space.
//!
//! With the transform `f(x) = ∫ e^{itx} F(t) dt` the kernel is
//! `K_S(u) = (1/2π) ∫_S e^{itu} dt`, normalized so that
//! `f(λ) = ⟨f, K_S(· − λ)⟩` in `L²(ℝ)` for every `f ∈ PW_S`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Below this value of `|u| · max|endpoint|` the kernel switches to its
/// Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

const SERIES_TERMS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return invalid(format!("interval endpoints must be finite, got [{lo}, {hi}]"));
        }
        if lo >= hi {
            return invalid(format!("interval needs lo < hi, got [{lo}, {hi}]"));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    fn kernel(&self, u: f64) -> Complex64 {
        // e^{i hi u} - e^{i lo u} = 2i e^{i m u} sin(w u), no cancellation
        let mid = self.midpoint();
        let half = 0.5 * self.length();
        Complex64::from_polar((half * u).sin() / (PI * u), mid * u)
    }

    fn kernel_series(&self, u: f64) -> Complex64 {
        // (1/2π) Σ_k (iu)^k/k! (hi^{k+1} - lo^{k+1})/(k+1)
        let mut sum = Complex64::new(0.0, 0.0);
        let mut iu_pow = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        let (mut hp, mut lp) = (self.hi, self.lo);
        for k in 0..SERIES_TERMS {
            if k > 0 {
                iu_pow *= Complex64::new(0.0, u);
                fact *= k as f64;
                hp *= self.hi;
                lp *= self.lo;
            }
            sum += iu_pow * ((hp - lp) / ((k + 1) as f64 * fact));
        }
        sum / (2.0 * PI)
    }
}

/// A finite union of pairwise disjoint closed intervals, sorted, with
/// positive gaps between neighbours.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSet {
    intervals: Vec<Interval>,
}

impl SpectrumSet {
    /// Sorts and merges touching or overlapping intervals.
    pub fn new(intervals: impl IntoIterator<Item = Interval>) -> Result<Self> {
        let mut items: Vec<Interval> = intervals.into_iter().collect();
        if items.is_empty() {
            return invalid("spectrum needs at least one interval");
        }
        items.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(items.len());
        for iv in items {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        Ok(Self { intervals: merged })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let ivs = pairs.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect::<Result<Vec<_>>>()?;
        Self::new(ivs)
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new([Interval::new(lo, hi)?])
    }

    /// `[-a, a]`.
    pub fn symmetric(a: f64) -> Result<Self> {
        Self::interval(-a, a)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn max_abs_endpoint(&self) -> f64 {
        self.intervals.iter().map(|iv| iv.lo.abs().max(iv.hi.abs())).fold(0.0, f64::max)
    }

    /// Minkowski sum `S + [-δ, δ]`.
    pub fn dilate(&self, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return invalid(format!("dilation needs δ > 0, got {delta}"));
        }
        Self::new(self.intervals.iter().map(|iv| Interval { lo: iv.lo - delta, hi: iv.hi + delta }))
    }

    pub fn shift(&self, s: f64) -> Self {
        Self { intervals: self.intervals.iter().map(|iv| Interval { lo: iv.lo + s, hi: iv.hi + s }).collect() }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|iv| iv.lo <= t && t <= iv.hi)
    }

    /// Distance from `t` to the set (0 inside).
    pub fn distance(&self, t: f64) -> f64 {
        self.intervals
            .iter()
            .map(|iv| {
                if t < iv.lo {
                    iv.lo - t
                } else if t > iv.hi {
                    t - iv.hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Reproducing kernel `K_S(u) = (1/2π) ∫_S e^{itu} dt`.
    pub fn kernel(&self, u: f64) -> Complex64 {
        if (u * self.max_abs_endpoint()).abs() < SERIES_THRESHOLD {
            self.kernel_series(u)
        } else {
            self.kernel_closed_form(u)
        }
    }

    pub fn kernel_closed_form(&self, u: f64) -> Complex64 {
        if u == 0.0 {
            return Complex64::new(self.measure() / (2.0 * PI), 0.0);
        }
        self.intervals.iter().map(|iv| iv.kernel(u)).sum()
    }

    pub fn kernel_series(&self, u: f64) -> Complex64 {
        self.intervals.iter().map(|iv| iv.kernel_series(u)).sum()
    }
}

impl fmt::Display for SpectrumSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.intervals.iter().map(|iv| format!("[{}, {}]", iv.lo, iv.hi)).collect();
        write!(f, "{}", parts.join(" ∪ "))
    }
}

impl<'de> Deserialize<'de> for SpectrumSet {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(f64, f64)> = Vec::deserialize(de)?;
        SpectrumSet::from_pairs(&pairs).map_err(serde::de::Error::custom)
    }
}
