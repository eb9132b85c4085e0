//! Fourier differentiation along one axis of a periodic 3D array.
//!
//! Arrays are stored x-fastest: `idx = x + nx * (y + ny * z)`. Lines along
//! the differentiated axis are transformed two at a time, packed into the
//! real and imaginary parts of one complex transform. The derivative operator
//! is real, so the two lines never mix. The Nyquist mode of even-length axes
//! is dropped, which keeps the discrete operator antisymmetric.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Clone)]
struct AxisPlan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `k / n`: wavenumber with the inverse-transform normalisation folded in.
    scaled_k: Vec<f64>,
}

impl AxisPlan {
    fn new(planner: &mut FftPlanner<f64>, n: usize, spacing: f64) -> Self {
        let scaled_k = wavenumbers(n, spacing)
            .into_iter()
            .map(|k| k / n as f64)
            .collect();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            scaled_k,
        }
    }

    fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    /// Differentiates the packed pair of lines in `buf` in place.
    fn differentiate(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
        for (v, &k) in buf.iter_mut().zip(&self.scaled_k) {
            *v = Complex64::new(-k * v.im, k * v.re);
        }
        self.inverse.process_with_scratch(buf, scratch);
    }
}

/// Angular wavenumbers of an `n`-point periodic axis with cell size
/// `spacing`, in FFT order. The Nyquist entry of an even-length axis is zero.
pub fn wavenumbers(n: usize, spacing: f64) -> Vec<f64> {
    let length = n as f64 * spacing;
    (0..n)
        .map(|m| {
            if 2 * m < n {
                2.0 * PI * m as f64 / length
            } else if 2 * m == n {
                0.0
            } else {
                2.0 * PI * (m as f64 - n as f64) / length
            }
        })
        .collect()
}

/// Precomputed transforms for differentiating scalar arrays of fixed shape.
#[derive(Clone)]
pub struct SpectralDerivative {
    dims: [usize; 3],
    plans: [AxisPlan; 3],
    lines: Vec<f64>,
}

impl std::fmt::Debug for SpectralDerivative {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralDerivative")
            .field("dims", &self.dims)
            .finish_non_exhaustive()
    }
}

impl SpectralDerivative {
    pub fn new(dims: [usize; 3], spacing: f64) -> Self {
        let mut planner = FftPlanner::new();
        let plans = [0, 1, 2].map(|a| AxisPlan::new(&mut planner, dims[a], spacing));
        let len = dims.iter().product();
        Self {
            dims,
            plans,
            lines: vec![0.0; len],
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Writes `d input / d axis` into `output`.
    pub fn derivative(&mut self, axis: usize, input: &[f64], output: &mut [f64]) -> Result<()> {
        let len: usize = self.dims.iter().product();
        if input.len() != len || output.len() != len {
            return Err(Error::Contract(format!(
                "derivative: array length {} / {} does not match grid of {len} cells",
                input.len(),
                output.len()
            )));
        }
        if axis > 2 {
            return Err(Error::Contract(format!("derivative: axis {axis} out of range")));
        }
        let [nx, ny, _] = self.dims;
        let plan = &self.plans[axis];
        if plan.n == 1 {
            output.iter_mut().for_each(|v| *v = 0.0);
            return Ok(());
        }
        match axis {
            0 => differentiate_contiguous(plan, input, output),
            1 => {
                let slab = nx * ny;
                output
                    .par_chunks_mut(slab)
                    .zip(input.par_chunks(slab))
                    .for_each_init(
                        || work_buffers(plan),
                        |(buf, scratch), (out, inp)| {
                            differentiate_strided(plan, nx, nx, inp, out, buf, scratch)
                        },
                    );
            }
            _ => {
                // Gather each z-line into a line-major buffer, then scatter back
                // slab by slab so every parallel task owns its output.
                let nz = plan.n;
                let count = nx * ny;
                let lines = &mut self.lines;
                lines
                    .par_chunks_mut(2 * nz)
                    .enumerate()
                    .for_each_init(
                        || work_buffers(plan),
                        |(buf, scratch), (pair, chunk)| {
                            let first = 2 * pair;
                            let paired = chunk.len() == 2 * nz;
                            for (z, v) in buf.iter_mut().enumerate() {
                                let re = input[first + count * z];
                                let im = if paired { input[first + 1 + count * z] } else { 0.0 };
                                *v = Complex64::new(re, im);
                            }
                            plan.differentiate(buf, scratch);
                            for (z, v) in buf.iter().enumerate() {
                                chunk[z] = v.re;
                                if paired {
                                    chunk[nz + z] = v.im;
                                }
                            }
                        },
                    );
                let lines = &self.lines;
                output
                    .par_chunks_mut(count)
                    .enumerate()
                    .for_each(|(z, out)| {
                        for (p, v) in out.iter_mut().enumerate() {
                            *v = lines[p * nz + z];
                        }
                    });
            }
        }
        Ok(())
    }
}

fn work_buffers(plan: &AxisPlan) -> (Vec<Complex64>, Vec<Complex64>) {
    (
        vec![Complex64::new(0.0, 0.0); plan.n],
        vec![Complex64::new(0.0, 0.0); plan.scratch_len()],
    )
}

fn differentiate_contiguous(plan: &AxisPlan, input: &[f64], output: &mut [f64]) {
    let n = plan.n;
    output
        .par_chunks_mut(2 * n)
        .zip(input.par_chunks(2 * n))
        .for_each_init(
            || work_buffers(plan),
            |(buf, scratch), (out, inp)| {
                let paired = inp.len() == 2 * n;
                for (i, v) in buf.iter_mut().enumerate() {
                    *v = Complex64::new(inp[i], if paired { inp[n + i] } else { 0.0 });
                }
                plan.differentiate(buf, scratch);
                for (i, v) in buf.iter().enumerate() {
                    out[i] = v.re;
                    if paired {
                        out[n + i] = v.im;
                    }
                }
            },
        );
}

/// Differentiates the `lines` lines of stride `stride` held in one slab.
fn differentiate_strided(
    plan: &AxisPlan,
    lines: usize,
    stride: usize,
    input: &[f64],
    output: &mut [f64],
    buf: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    let mut first = 0;
    while first < lines {
        let paired = first + 1 < lines;
        for (j, v) in buf.iter_mut().enumerate() {
            let re = input[first + stride * j];
            let im = if paired { input[first + 1 + stride * j] } else { 0.0 };
            *v = Complex64::new(re, im);
        }
        plan.differentiate(buf, scratch);
        for (j, v) in buf.iter().enumerate() {
            output[first + stride * j] = v.re;
            if paired {
                output[first + 1 + stride * j] = v.im;
            }
        }
        first += 2;
    }
}
