//! Two-dimensional FFT on row-major `nx * ny` buffers.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::spinor::{C64, ZERO};

#[derive(Clone)]
pub(crate) struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub(crate) fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        }
    }

    fn columns(&self, data: &mut [C64], fft: &Arc<dyn Fft<f64>>) {
        let (nx, ny) = (self.nx, self.ny);
        let mut col = vec![ZERO; ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = data[j * nx + i];
            }
            fft.process(&mut col);
            for j in 0..ny {
                data[j * nx + i] = col[j];
            }
        }
    }

    pub(crate) fn forward(&self, data: &mut [C64]) {
        self.fwd_x.process(data);
        self.columns(data, &self.fwd_y);
    }

    /// Normalized inverse.
    pub(crate) fn inverse(&self, data: &mut [C64]) {
        self.columns(data, &self.inv_y);
        self.inv_x.process(data);
        let scale = 1.0 / (self.nx * self.ny) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Cyclic convolution of `a` with a kernel whose transform is `kernel_hat`.
    pub(crate) fn convolve(&self, a: &[C64], kernel_hat: &[C64]) -> Vec<C64> {
        let mut buf = a.to_vec();
        self.forward(&mut buf);
        for (v, k) in buf.iter_mut().zip(kernel_hat) {
            *v *= k;
        }
        self.inverse(&mut buf);
        buf
    }
}
