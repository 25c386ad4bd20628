//! Two-dimensional complex FFT over row-major `n1 x n2` buffers.
//!
//! Rows run along x2 (contiguous), columns along x1. Plans are cached per
//! thread by `rustfft`'s planner, so repeated transforms of one grid size
//! only pay for planning once.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

fn transform(data: &mut [Complex64], n1: usize, n2: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n1 * n2);
    let rows = plan(n2, direction);
    let mut scratch = vec![Complex64::default(); rows.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(n2) {
        rows.process_with_scratch(row, &mut scratch);
    }

    let cols = plan(n1, direction);
    let mut scratch = vec![Complex64::default(); cols.get_inplace_scratch_len()];
    let mut column = vec![Complex64::default(); n1];
    for j in 0..n2 {
        for (i, c) in column.iter_mut().enumerate() {
            *c = data[i * n2 + j];
        }
        cols.process_with_scratch(&mut column, &mut scratch);
        for (i, c) in column.iter().enumerate() {
            data[i * n2 + j] = *c;
        }
    }
}

/// Forward transform, normalized so the k = 0 coefficient is the mean.
pub(crate) fn forward(data: &mut [Complex64], n1: usize, n2: usize) {
    transform(data, n1, n2, FftDirection::Forward);
    let scale = 1.0 / (n1 * n2) as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
}

/// Unnormalized inverse transform (exact inverse of [`forward`]).
pub(crate) fn inverse(data: &mut [Complex64], n1: usize, n2: usize) {
    transform(data, n1, n2, FftDirection::Inverse);
}
