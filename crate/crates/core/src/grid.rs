//! Uniform spatial grid and the complex wavefunction sampled on it.

use crate::config::{GridConfig, JunctionConfig};
use crate::error::CoreError;
use num_complex::Complex64;

/// Uniform 1D grid, cell-centered around the junction: the boundaries x = 0
/// and x = d fall exactly halfway between nodes, so every node lies strictly
/// inside one region and the potential is single-valued on the lattice.
/// Construction fails unless d is a whole number of cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub dx: f64,
    pub n_points: usize,
    /// First node inside the gap (x = dx/2); the tip boundary x = 0 is the
    /// midpoint of the bond (idx_tip - 1, idx_tip).
    pub idx_tip: usize,
    /// Last node inside the gap (x = d - dx/2); the sample boundary x = d is
    /// the midpoint of the bond (idx_sample, idx_sample + 1).
    pub idx_sample: usize,
}

impl SpatialGrid {
    /// Box spanning [-x_span, d + x_span] around the junction.
    pub fn for_junction(grid: &GridConfig, junction: &JunctionConfig) -> Result<Self, CoreError> {
        Self::with_span(grid, junction, grid.x_span, grid.x_span)
    }

    /// Box with asymmetric spans, used by the flux module to keep the
    /// backward runs small while staying provably outside causal reach of
    /// the wall artifacts.
    pub fn with_span(
        grid: &GridConfig,
        junction: &JunctionConfig,
        span_left: f64,
        span_right: f64,
    ) -> Result<Self, CoreError> {
        let dx = grid.dx;
        let d_steps = junction.d / dx;
        if (d_steps - d_steps.round()).abs() > 1e-6 {
            return Err(CoreError::Config(format!(
                "junction width d = {} au must be a multiple of dx = {} au",
                junction.d, dx
            )));
        }
        let n_gap = d_steps.round() as usize;
        if n_gap == 0 {
            return Err(CoreError::Config("junction width d must be at least one cell".into()));
        }
        let n_left = (span_left / dx).ceil() as usize; // tip nodes
        let n_right = (span_right / dx).ceil() as usize; // sample nodes
        let idx_tip = n_left;
        let idx_sample = idx_tip + n_gap - 1;
        let n_points = idx_sample + n_right + 1;
        Ok(SpatialGrid {
            x_min: (0.5 - n_left as f64) * dx,
            dx,
            n_points,
            idx_tip,
            idx_sample,
        })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.n_points - 1)
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.x(i))
    }
}

/// Complex wavefunction samples on a grid at a time stamp.
#[derive(Debug, Clone)]
pub struct WaveField {
    pub grid: SpatialGrid,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl WaveField {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.n_points);
        WaveField { grid, values, time }
    }

    pub fn zeros(grid: SpatialGrid, time: f64) -> Self {
        WaveField { values: vec![Complex64::new(0.0, 0.0); grid.n_points], grid, time }
    }

    pub fn from_fn(grid: SpatialGrid, time: f64, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.positions().map(f).collect();
        WaveField { grid, values, time }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for v in &mut self.values {
                *v /= n;
            }
        }
    }

    pub fn overlap(&self, other: &WaveField) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx
    }

    /// Largest edge amplitude relative to the peak amplitude; the
    /// reflection guard requires this to stay below 1e-8.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let edge = self.values[0].norm().max(self.values[self.values.len() - 1].norm());
        edge / peak
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units;

    #[test]
    fn junction_boundaries_between_nodes() {
        let gc = GridConfig::new(units::nm_to_au(0.01), units::as_to_au(2.2), units::nm_to_au(20.0)).unwrap();
        let j = JunctionConfig::gold(1.0);
        let g = SpatialGrid::for_junction(&gc, &j).unwrap();
        // x = 0 and x = d sit exactly at bond midpoints
        assert!((g.x(g.idx_tip) - 0.5 * g.dx).abs() < 1e-9);
        assert!((g.x(g.idx_tip - 1) + 0.5 * g.dx).abs() < 1e-9);
        assert!((g.x(g.idx_sample) - (j.d - 0.5 * g.dx)).abs() < 1e-9);
        assert!((g.x(g.idx_sample + 1) - (j.d + 0.5 * g.dx)).abs() < 1e-9);
        // the gap holds exactly d/dx nodes
        assert_eq!(g.idx_sample - g.idx_tip + 1, (j.d / g.dx).round() as usize);
    }

    #[test]
    fn incommensurate_width_rejected() {
        let gc = GridConfig::new(units::nm_to_au(0.03), 1.0, units::nm_to_au(10.0)).unwrap();
        let j = JunctionConfig::gold(1.0);
        assert!(SpatialGrid::for_junction(&gc, &j).is_err());
    }
}
