//! Tensor-product sampling grids.

use crate::error::{Error, Result};

/// Minimum samples per axis.
pub const MIN_SAMPLES: usize = 64;

/// Uniform grid on a box, `samples[k]` nodes per axis including both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    lo: Vec<f64>,
    hi: Vec<f64>,
    samples: Vec<usize>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, samples: Vec<usize>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.len() != samples.len() {
            return Err(Error::InvalidParameter(format!(
                "grid axes disagree: lo {}, hi {}, samples {}",
                lo.len(),
                hi.len(),
                samples.len()
            )));
        }
        for k in 0..lo.len() {
            if !(hi[k] > lo[k]) || !lo[k].is_finite() || !hi[k].is_finite() {
                return Err(Error::InvalidParameter(format!("axis {k}: need lo < hi, got [{}, {}]", lo[k], hi[k])));
            }
            if samples[k] < MIN_SAMPLES {
                return Err(Error::InvalidParameter(format!(
                    "axis {k}: {} samples, at least {MIN_SAMPLES} required",
                    samples[k]
                )));
            }
        }
        Ok(GridSpec { lo, hi, samples })
    }

    /// One-dimensional grid.
    pub fn line(lo: f64, hi: f64, samples: usize) -> Result<Self> {
        Self::new(vec![lo], vec![hi], vec![samples])
    }

    /// Square two-dimensional grid.
    pub fn square(lo: f64, hi: f64, samples: usize) -> Result<Self> {
        Self::new(vec![lo, lo], vec![hi, hi], vec![samples, samples])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
    pub fn lo(&self) -> &[f64] {
        &self.lo
    }
    pub fn hi(&self) -> &[f64] {
        &self.hi
    }
    pub fn samples(&self) -> &[usize] {
        &self.samples
    }

    pub fn step(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.samples[axis] - 1) as f64
    }

    /// Coordinate of node `i` on `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.samples[axis] {
            self.hi[axis]
        } else {
            self.lo[axis] + i as f64 * self.step(axis)
        }
    }

    pub fn axis(&self, axis: usize) -> Vec<f64> {
        (0..self.samples[axis]).map(|i| self.coord(axis, i)).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node with flat index `idx`, first axis varying slowest.
    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for axis in (0..self.dim()).rev() {
            let n = self.samples[axis];
            out[axis] = self.coord(axis, idx % n);
            idx /= n;
        }
        out
    }

    /// All nodes in flat-index order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Trapezoid weight of node `idx`.
    pub fn weight(&self, mut idx: usize) -> f64 {
        let mut w = 1.0;
        for axis in (0..self.dim()).rev() {
            let n = self.samples[axis];
            let i = idx % n;
            idx /= n;
            let h = self.step(axis);
            w *= if i == 0 || i + 1 == n { 0.5 * h } else { h };
        }
        w
    }

    /// True if node `idx` lies on the boundary of the box.
    pub fn on_boundary(&self, mut idx: usize) -> bool {
        for axis in (0..self.dim()).rev() {
            let n = self.samples[axis];
            let i = idx % n;
            idx /= n;
            if i == 0 || i + 1 == n {
                return true;
            }
        }
        false
    }

    /// Same box with twice the intervals per axis.
    pub fn refined(&self) -> Self {
        GridSpec {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            samples: self.samples.iter().map(|&n| 2 * n - 1).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::line(0.0, 1.0, 10).is_err());
        assert!(GridSpec::line(1.0, 1.0, 100).is_err());
        assert!(GridSpec::new(vec![0.0], vec![1.0, 2.0], vec![64]).is_err());
    }

    #[test]
    fn weights_sum_to_volume() {
        let g = GridSpec::new(vec![-1.0, 0.0], vec![1.0, 3.0], vec![65, 80]).unwrap();
        let total: f64 = (0..g.len()).map(|i| g.weight(i)).sum();
        assert!((total - 6.0).abs() < 1e-12);
        assert_eq!(g.point(0), vec![-1.0, 0.0]);
        assert_eq!(g.point(g.len() - 1), vec![1.0, 3.0]);
        assert_eq!(g.refined().samples(), &[129, 159]);
    }
}
