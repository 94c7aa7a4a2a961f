//! Discretization of the detuning plane and of the delay axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setup::OpticalSetup;

pub const DEFAULT_POINTS: usize = 2048;
pub const DEFAULT_SPAN_SIGMA: f64 = 5.0;

/// Uniform midpoint grid over `[-span, span]` on both detuning axes.
///
/// Node `k` sits at `-span + (k + 1/2) * spacing`, so the grid is symmetric
/// about zero and under exchange of the two axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    points: usize,
    span: f64,
}

impl FrequencyGrid {
    pub fn new(points: usize, span: f64) -> Result<Self> {
        if points < 16 || points % 2 != 0 {
            return Err(Error::config(
                "FrequencyGrid",
                format!("points_per_axis must be even and at least 16, got {points}"),
            ));
        }
        if !(span > 0.0 && span.is_finite()) {
            return Err(Error::config("FrequencyGrid", "span must be positive"));
        }
        Ok(FrequencyGrid { points, span })
    }

    /// Grid whose half-width is `span_sigma` filter intensity standard
    /// deviations beyond the filter center.
    pub fn for_setup(setup: &OpticalSetup, points: usize, span_sigma: f64) -> Result<Self> {
        if !(span_sigma > 0.0 && span_sigma.is_finite()) {
            return Err(Error::config("FrequencyGrid", "span_sigma must be positive"));
        }
        let span = span_sigma * setup.filter.intensity_sigma() + setup.filter_detuning().abs();
        Self::new(points, span)
    }

    pub fn default_for(setup: &OpticalSetup) -> Result<Self> {
        Self::for_setup(setup, DEFAULT_POINTS, DEFAULT_SPAN_SIGMA)
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Half-width, rad/ps.
    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.span / self.points as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        -self.span + (k as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.node(k)).collect()
    }

    /// Sum detuning for the pair of node indices whose sum is `index_sum`.
    pub fn sum_node(&self, index_sum: usize) -> f64 {
        -2.0 * self.span + (index_sum as f64 + 1.0) * self.spacing()
    }

    /// Checks that the setup fits on this grid.
    pub fn check_setup(&self, setup: &OpticalSetup) -> Result<()> {
        if setup.filter_detuning().abs() >= self.span {
            return Err(Error::config(
                "OpticalSetup",
                "filter center lies outside the frequency grid span",
            ));
        }
        Ok(())
    }
}

/// Uniformly spaced idler delays from `start` to `end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaySweep {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl Default for DelaySweep {
    fn default() -> Self {
        DelaySweep {
            start: -0.5,
            end: 3.5,
            steps: 600,
        }
    }
}

impl DelaySweep {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<Self> {
        let sweep = DelaySweep { start, end, steps };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.end.is_finite() && self.start < self.end) {
            return Err(Error::config("DelaySweep", "start must be less than end"));
        }
        if self.steps < 2 {
            return Err(Error::config("DelaySweep", "steps must be at least 2"));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.steps - 1) as f64
    }

    pub fn delay(&self, n: usize) -> f64 {
        if n + 1 == self.steps {
            self.end
        } else {
            self.start + n as f64 * self.step()
        }
    }

    pub fn delays(&self) -> Vec<f64> {
        (0..self.steps).map(|n| self.delay(n)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::new(15, 1.0).is_err());
        assert!(FrequencyGrid::new(17, 1.0).is_err());
        assert!(FrequencyGrid::new(18, 1.0).is_ok());
        assert!(FrequencyGrid::new(16, 0.0).is_err());
    }

    #[test]
    fn nodes_are_symmetric() {
        let g = FrequencyGrid::new(32, 3.0).unwrap();
        let nodes = g.nodes();
        for k in 0..32 {
            assert!((nodes[k] + nodes[31 - k]).abs() < 1e-14);
        }
        assert!((g.sum_node(31)).abs() < 1e-14);
        assert!((g.sum_node(3) - (nodes[1] + nodes[2])).abs() < 1e-14);
    }

    #[test]
    fn sweep_endpoints() {
        let s = DelaySweep::default();
        let d = s.delays();
        assert_eq!(d.len(), 600);
        assert_eq!(d[0], -0.5);
        assert_eq!(d[599], 3.5);
        assert!(DelaySweep::new(1.0, 1.0, 10).is_err());
        assert!(DelaySweep::new(0.0, 1.0, 1).is_err());
    }
}
