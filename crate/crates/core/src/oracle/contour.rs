//! `log₁₀|f_m|` sampled on a rectangle, for contour plots.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use super::roots::{box_form, SearchBox};
use super::{DispersionForm, DispersionProblem};
use crate::error::{Error, Result};

/// Floor applied to `log₁₀|f_m|` so exact zeros stay finite.
pub const LOG_FLOOR: f64 = -16.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ContourGrid {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// Row-major, one row per `im` value.
    pub values: Vec<f64>,
    pub form: DispersionForm,
}

impl ContourGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.re.len() + i]
    }

    /// Index `(i, j)` of the smallest value.
    pub fn argmin(&self) -> (usize, usize) {
        let k = (0..self.values.len())
            .min_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
            .unwrap_or(0);
        (k % self.re.len(), k / self.re.len())
    }

    /// CSV with header `re,im,log10_abs_fm`, one row per node in row-major order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "re,im,log10_abs_fm")?;
        for (j, &y) in self.im.iter().enumerate() {
            for (i, &x) in self.re.iter().enumerate() {
                writeln!(out, "{x:.10e},{y:.10e},{:.10e}", self.value(i, j))?;
            }
        }
        Ok(())
    }
}

/// Samples `log₁₀|f_m|` on an `nx × ny` lattice (corners included). Points
/// where `f_m` cannot be evaluated hold NaN.
pub fn contour_grid(
    problem: &DispersionProblem,
    search: &SearchBox,
    grid: (usize, usize),
) -> Result<ContourGrid> {
    search.validate()?;
    let (nx, ny) = grid;
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidSearch(format!(
            "contour grid must be at least 2x2, got {nx}x{ny}"
        )));
    }
    let nodes: Vec<Complex64> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| search.node(i, j, nx, ny))
        .collect();
    let form = box_form(problem, &nodes);
    let values = nodes
        .par_iter()
        .map(|&z| match problem.evaluate_in(z, form) {
            Ok(v) => {
                let a = v.value.norm();
                if a > 0.0 {
                    a.log10().max(LOG_FLOOR)
                } else {
                    LOG_FLOOR
                }
            }
            Err(_) => f64::NAN,
        })
        .collect();
    Ok(ContourGrid {
        re: (0..nx).map(|i| search.node(i, 0, nx, ny).re).collect(),
        im: (0..ny).map(|j| search.node(0, j, nx, ny).im).collect(),
        values,
        form,
    })
}
