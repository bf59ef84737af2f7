use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Uniform, strictly increasing sampling of the frequency axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        let grid = Self { start, step, count };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid of `count` points centred on zero, `nu_{count-1-i} = -nu_i` up to rounding.
    pub fn symmetric(half_width: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(invalid(
                "grid.count",
                "a symmetric grid needs at least 2 points",
            ));
        }
        Self::new(-half_width, 2.0 * half_width / (count - 1) as f64, count)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() {
            return Err(invalid("grid.start", "must be finite"));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(invalid(
                "grid.step",
                format!("must be > 0, got {}", self.step),
            ));
        }
        if self.count == 0 {
            return Err(invalid("grid.count", "must be >= 1"));
        }
        Ok(())
    }

    #[inline]
    pub fn nu(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.nu(self.count - 1)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.nu(i))
    }

    /// Index of the cell `[nu_i - step/2, nu_i + step/2)` containing `nu`.
    pub fn bin_index(&self, nu: f64) -> Option<usize> {
        let x = ((nu - self.start) / self.step + 0.5).floor();
        if x >= 0.0 && x < self.count as f64 {
            Some(x as usize)
        } else {
            None
        }
    }

    /// Trapezoid-rule quadrature weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.step; self.count];
        if self.count == 1 {
            w[0] = 0.0;
        } else {
            w[0] *= 0.5;
            w[self.count - 1] *= 0.5;
        }
        w
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.count);
        trapezoid(values, self.step)
    }

    /// Same sampling up to a relative tolerance on start and step.
    pub fn matches(&self, other: &Self, rel_tol: f64) -> bool {
        let close = |a: f64, b: f64, scale: f64| (a - b).abs() <= rel_tol * scale;
        self.count == other.count
            && close(self.step, other.step, self.step.abs())
            && close(self.start, other.start, self.step.abs())
    }
}

pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            step * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}
