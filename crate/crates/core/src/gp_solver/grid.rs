use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::spin_algebra::C64;

/// Periodic grid over 1 to 3 axes. Axis 0 is always the SOC axis `x`.
///
/// Points sit at `x_j = -L/2 + j L/n`, and arrays are row-major with the
/// last active axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub points: Vec<usize>,
    pub extents: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<usize>, extents: Vec<f64>) -> Result<Self, String> {
        if points.is_empty() || points.len() > 3 || points.len() != extents.len() {
            return Err(format!(
                "grid needs 1 to 3 axes with matching extents, got {} points and {} extents",
                points.len(),
                extents.len()
            ));
        }
        if let Some(n) = points.iter().find(|&&n| n < 2) {
            return Err(format!("every grid axis needs at least 2 points, got {n}"));
        }
        if let Some(l) = extents.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(format!("grid extents must be positive, got {l}"));
        }
        Ok(Self { points, extents })
    }

    pub fn uniform(dim: usize, points: usize, extent: f64) -> Result<Self, String> {
        Self::new(vec![points; dim], vec![extent; dim])
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / self.points[axis] as f64
    }

    pub fn origin(&self, axis: usize) -> f64 {
        -0.5 * self.extents[axis]
    }

    pub fn volume_element(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        self.origin(axis) + j as f64 * self.spacing(axis)
    }

    /// FFT-ordered wave numbers of one axis.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.points[axis];
        let dk = 2.0 * PI / self.extents[axis];
        (0..n)
            .map(|j| if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 } * dk)
            .collect()
    }

    /// Multi-index of a flat index.
    pub fn unflatten(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in (0..self.dim()).rev() {
            out[a] = idx % self.points[a];
            idx /= self.points[a];
        }
        out
    }

    /// Number of points sharing one `x` index.
    pub fn transverse_len(&self) -> usize {
        self.points[1..].iter().product()
    }
}

/// Forward and inverse transforms over every axis of a [`Grid`].
///
/// The forward transform is unnormalized; the inverse divides by the number
/// of points, so `inverse(forward(f)) = f`.
pub(crate) struct Transform {
    points: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    line: Vec<C64>,
    scratch: Vec<C64>,
}

impl Transform {
    pub(crate) fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward: Vec<_> = grid.points.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse: Vec<_> = grid.points.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let scratch_len = forward
            .iter()
            .chain(&inverse)
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Self {
            points: grid.points.clone(),
            forward,
            inverse,
            line: vec![C64::new(0.0, 0.0); grid.points.iter().copied().max().unwrap_or(0)],
            scratch: vec![C64::new(0.0, 0.0); scratch_len],
        }
    }

    pub(crate) fn forward(&mut self, data: &mut [C64]) {
        for a in 0..self.points.len() {
            let plan = Arc::clone(&self.forward[a]);
            self.along(a, plan.as_ref(), data);
        }
    }

    pub(crate) fn inverse(&mut self, data: &mut [C64]) {
        for a in 0..self.points.len() {
            let plan = Arc::clone(&self.inverse[a]);
            self.along(a, plan.as_ref(), data);
        }
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    fn along(&mut self, axis: usize, plan: &dyn Fft<f64>, data: &mut [C64]) {
        let n = self.points[axis];
        let stride: usize = self.points[axis + 1..].iter().product();
        if stride == 1 {
            for chunk in data.chunks_exact_mut(n) {
                plan.process_with_scratch(chunk, &mut self.scratch);
            }
            return;
        }
        let block = n * stride;
        let line = &mut self.line[..n];
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                plan.process_with_scratch(line, &mut self.scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
}
