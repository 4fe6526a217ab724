//! Thin wrapper around `rustfft` for in-place complex transforms along the
//! axes of 2-D and 3-D arrays. Plans are cached per thread, keyed by length
//! and direction, so repeated transforms on the same grid are cheap.

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((len, forward))
            .or_insert_with(|| {
                let direction = if forward {
                    FftDirection::Forward
                } else {
                    FftDirection::Inverse
                };
                FftPlanner::new().plan_fft(len, direction)
            })
            .clone()
    })
}

fn transform_axis3(data: &mut Array3<Complex64>, axis: usize, forward: bool) {
    let n = data.shape()[axis];
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];
    let mut lane_buf = vec![Complex64::ZERO; n];
    for mut lane in data.lanes_mut(Axis(axis)) {
        if let Some(slice) = lane.as_slice_mut() {
            fft.process_with_scratch(slice, &mut scratch);
        } else {
            for (b, v) in lane_buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process_with_scratch(&mut lane_buf, &mut scratch);
            for (v, b) in lane.iter_mut().zip(lane_buf.iter()) {
                *v = *b;
            }
        }
    }
}

fn transform_axis2(data: &mut Array2<Complex64>, axis: usize, forward: bool) {
    let n = data.shape()[axis];
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];
    let mut lane_buf = vec![Complex64::ZERO; n];
    for mut lane in data.lanes_mut(Axis(axis)) {
        if let Some(slice) = lane.as_slice_mut() {
            fft.process_with_scratch(slice, &mut scratch);
        } else {
            for (b, v) in lane_buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process_with_scratch(&mut lane_buf, &mut scratch);
            for (v, b) in lane.iter_mut().zip(lane_buf.iter()) {
                *v = *b;
            }
        }
    }
}

/// Unnormalized 3-D DFT over every axis. Forward uses e^{-i...}, matching the
/// convention that physical values are sums of coefficients times e^{+i...}.
pub fn fft3(data: &mut Array3<Complex64>, forward: bool) {
    for axis in 0..3 {
        transform_axis3(data, axis, forward);
    }
}

/// Unnormalized 2-D DFT over both axes.
pub fn fft2(data: &mut Array2<Complex64>, forward: bool) {
    for axis in 0..2 {
        transform_axis2(data, axis, forward);
    }
}
