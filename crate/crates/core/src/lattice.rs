//! Uniformly discrete point sets and finite-window density estimators.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Relative (to the separation) slack applied at window edges, so that a
/// point lying on an open window's edge is consistently left out even after
/// the whole set is translated and rounded.
const EDGE_SLACK: f64 = 1e-9;

/// Strictly increasing finite point set with its minimal gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteSet {
    points: Vec<f64>,
    /// Minimal consecutive gap; `+∞` for fewer than two points.
    separation: f64,
}

impl DiscreteSet {
    /// Sorts the input; duplicates and non-finite values are rejected.
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return invalid(format!("point {p} is not finite"));
        }
        points.sort_by(f64::total_cmp);
        let separation = min_gap(&points);
        if separation <= 0.0 {
            return invalid("point set has a repeated point (separation 0)");
        }
        Ok(Self { points, separation })
    }

    pub fn empty() -> Self {
        Self { points: Vec::new(), separation: f64::INFINITY }
    }

    /// `ℤ ∩ [lo, hi]`.
    pub fn integers(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return invalid(format!("empty integer range [{lo}, {hi}]"));
        }
        Self::new((lo..=hi).map(|n| n as f64).collect())
    }

    /// `start + k·step`, `k = 0..count`.
    pub fn arithmetic(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) {
            return invalid(format!("arithmetic step must be positive, got {step}"));
        }
        Self::new((0..count).map(|k| start + k as f64 * step).collect())
    }

    /// `{n + R^{-|n|-1} : |n| ≤ half_width}`.
    pub fn perturbed_integers(base: f64, half_width: i64) -> Result<Self> {
        if !(base > 1.0) {
            return invalid(format!("perturbation base must exceed 1, got {base}"));
        }
        Self::new((-half_width..=half_width).map(|n| n as f64 + base.powi(-(n.unsigned_abs() as i32) - 1)).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn span(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn translate(&self, tau: f64) -> Self {
        let points: Vec<f64> = self.points.iter().map(|p| p + tau).collect();
        let separation = min_gap(&points);
        Self { points, separation }
    }

    /// Index of the point nearest to `x`.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        (0..self.points.len()).min_by(|&i, &j| (self.points[i] - x).abs().total_cmp(&(self.points[j] - x).abs()))
    }

    fn slack(&self) -> f64 {
        EDGE_SLACK * self.separation.min(1.0)
    }

    /// Number of points in the open interval `(lo, hi)`.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        let s = self.slack();
        let first = self.points.partition_point(|&p| p <= lo + s);
        let end = self.points.partition_point(|&p| p < hi - s);
        end.saturating_sub(first)
    }

    /// Points strictly inside `(center − radius, center + radius)`.
    pub fn window(&self, center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return invalid(format!("window radius must be positive, got {radius}"));
        }
        let s = self.slack();
        let first = self.points.partition_point(|&p| p <= center - radius + s);
        let end = self.points.partition_point(|&p| p < center + radius - s);
        let points = self.points[first..end.max(first)].to_vec();
        let separation = if points.len() < 2 { self.separation } else { min_gap(&points) };
        Ok(Self { points, separation })
    }

    /// `max_a card(Λ ∩ (a, a+r)) / r`.
    ///
    /// The count only changes when an edge crosses a point, and the supremum
    /// is attained by windows opening just left of some point, so scanning
    /// those windows gives the exact finite-`r` maximum.
    pub fn density_plus(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return invalid(format!("window length must be positive, got {r}"));
        }
        let span = self.span();
        if r >= span {
            return Err(Error::WindowTooLarge { r, span });
        }
        let s = self.slack();
        let p = &self.points;
        let mut best = 0usize;
        let mut j = 0usize;
        for i in 0..p.len() {
            j = j.max(i);
            while j < p.len() && p[j] - p[i] < r - s {
                j += 1;
            }
            best = best.max(j - i);
        }
        Ok(best as f64 / r)
    }

    /// `min card(Λ ∩ (t, t+r)) / r` over windows inside `[-a, a]`.
    pub fn density_minus(&self, r: f64, a: f64) -> Result<f64> {
        if !(r > 0.0) || !(a > 0.0) {
            return invalid(format!("need r > 0 and a > 0, got r = {r}, a = {a}"));
        }
        if r > 2.0 * a {
            return invalid(format!("window length {r} exceeds the range [-{a}, {a}]"));
        }
        let mut starts = vec![-a, a - r];
        for &p in &self.points {
            if (-a..=a - r).contains(&p) {
                starts.push(p);
            }
            if (-a..=a - r).contains(&(p - r)) {
                starts.push(p - r);
            }
        }
        let min = starts.iter().map(|&t| self.count_in(t, t + r)).min().unwrap_or(0);
        Ok(min as f64 / r)
    }

    /// `card(Λ ∩ (-a, a)) / 2a`.
    pub fn density_star(&self, a: f64) -> Result<f64> {
        if !(a > 0.0) {
            return invalid(format!("density_star needs a > 0, got {a}"));
        }
        Ok(self.count_in(-a, a) as f64 / (2.0 * a))
    }

    /// `(a, card(Λ ∩ (-a, a)) / 2a)` for every `a` in the grid.
    pub fn density_star_curve(&self, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        grid.iter().map(|&a| Ok((a, self.density_star(a)?))).collect()
    }

    pub fn density_report(&self, r: f64, a: f64) -> Result<DensityReport> {
        Ok(DensityReport {
            r,
            a,
            dplus: self.density_plus(r)?,
            dminus: self.density_minus(r, a)?,
            dstar: self.density_star(a)?,
            window_count: self.count_in(-a, a),
        })
    }
}

fn min_gap(points: &[f64]) -> f64 {
    points.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Finite-window density statistics. These are estimates at the given `r`
/// and `a`; no extrapolation to the limit is attempted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub r: f64,
    pub a: f64,
    pub dplus: f64,
    pub dminus: f64,
    pub dstar: f64,
    /// `card(Λ ∩ (-a, a))`.
    pub window_count: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates() {
        assert!(DiscreteSet::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(DiscreteSet::new(vec![0.0, f64::NAN]).is_err());
        let s = DiscreteSet::new(vec![3.0, 1.0, 2.5]).unwrap();
        assert_eq!(s.points(), &[1.0, 2.5, 3.0]);
        assert_eq!(s.separation(), 0.5);
    }

    #[test]
    fn window_examples() {
        let z = DiscreteSet::integers(-100, 100).unwrap();
        let w = z.window(0.0, 2.5).unwrap();
        assert_eq!(w.points(), &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(z.window(0.5, 0.4).unwrap().is_empty());
        // open window: edges on integers excluded
        assert_eq!(z.window(0.0, 2.0).unwrap().len(), 3);
        assert!(z.window(0.0, 0.0).is_err());
    }

    #[test]
    fn window_count_bound() {
        let z = DiscreteSet::perturbed_integers(10.0, 50).unwrap();
        for &(a, r) in &[(0.0, 3.0), (10.3, 0.7), (-20.0, 12.5)] {
            let nu = z.window(a, r).unwrap().len() as f64;
            let c = 1.0 / z.separation() + 1.0 / (2.0 * r);
            assert!(nu < c * 2.0 * r, "ν = {nu}, bound {}", c * 2.0 * r);
        }
    }

    #[test]
    fn density_plus_examples() {
        let z = DiscreteSet::integers(-500, 500).unwrap();
        assert!((z.density_plus(100.0).unwrap() - 1.0).abs() <= 0.01);
        let even = DiscreteSet::arithmetic(-500.0, 2.0, 501).unwrap();
        assert!((even.density_plus(100.0).unwrap() - 0.5).abs() <= 0.01);
        assert!(matches!(z.density_plus(1000.0), Err(Error::WindowTooLarge { .. })));
        assert!(z.density_plus(2000.0).is_err());
    }

    #[test]
    fn density_star_examples() {
        let z = DiscreteSet::integers(-500, 500).unwrap();
        assert!((z.density_star(250.0).unwrap() - 499.0 / 500.0).abs() < 1e-15);
        let half = DiscreteSet::integers(0, 500).unwrap();
        let ds = half.density_star(250.0).unwrap();
        let dp = half.density_plus(100.0).unwrap();
        assert!((ds - 0.5).abs() < 0.01, "{ds}");
        assert!((dp - 1.0).abs() < 0.01);
        assert!(z.density_star(0.0).is_err());
    }

    #[test]
    fn report_ordering_for_integers() {
        let z = DiscreteSet::integers(-500, 500).unwrap();
        let rep = z.density_report(100.0, 250.0).unwrap();
        assert!(rep.dminus <= rep.dstar + 1e-12);
        assert!(rep.dstar <= rep.dplus + 1e-12);
        assert!(rep.dplus <= 1.0 / z.separation() + 1.0 / rep.r);
        assert_eq!(rep.window_count, 499);
        let half = DiscreteSet::integers(0, 500).unwrap();
        assert_eq!(half.density_minus(100.0, 250.0).unwrap(), 0.0);
    }
}
