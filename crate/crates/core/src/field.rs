//! Functions sampled on one or two momentum slots of a quadrature grid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::torus::QuadGrid;

/// Samples `f(p)` (one slot) or `f(p_i, p_j)` (two slots, row-major in
/// `(i, j)`) on every node of `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: QuadGrid,
    slots: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: QuadGrid, slots: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&slots) {
            return Err(Error::invalid(format!("slots must be 1 or 2, got {slots}")));
        }
        let expected = grid.len().pow(slots as u32);
        if values.len() != expected {
            return Err(Error::invalid(format!(
                "expected {expected} samples, got {}",
                values.len()
            )));
        }
        Ok(GridFunction { grid, slots, values })
    }

    pub fn grid(&self) -> &QuadGrid {
        &self.grid
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `f(p_i, p_j)` for two-slot functions.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.len() + j]
    }

    /// Measure of one sample cell: `w^slots`.
    pub fn cell(&self) -> f64 {
        self.grid.weight().powi(self.slots as i32)
    }

    /// Discrete `L²(η)` norm.
    pub fn norm(&self) -> f64 {
        (self.cell() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// `max |f(p, q) + f(q, p)|`; zero for exactly antisymmetric samples.
    pub fn antisymmetry_defect(&self) -> f64 {
        if self.slots != 2 {
            return f64::NAN;
        }
        let n = self.grid.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.at(i, j) + self.at(j, i)).abs());
            }
        }
        worst
    }
}

/// Row written by the CLI when eigenfunction samples are requested.
#[derive(Debug, Clone, Serialize)]
pub struct SampleRow {
    pub index: Vec<usize>,
    pub value: f64,
}
