//! Cached 2-D complex FFTs backed by rustfft. Plans are shared through a
//! process-wide table so concurrent runs on the same resolution reuse them;
//! `Arc<dyn Fft>` is safe for simultaneous `process_with_scratch` calls as
//! long as each caller brings its own scratch buffer.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let table = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = table.lock().expect("fft plan table poisoned");
    guard
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            planner.plan_fft(n, dir)
        })
        .clone()
}

/// In-place 2-D transform of a row-major `n x n` complex buffer. `forward`
/// applies `sum_j x_j e^{-2 pi i jk/N}` per axis (unnormalized), matching
/// rustfft's convention; the inverse is the unnormalized adjoint.
pub fn fft2_inplace(data: &mut [Complex64], n: usize, forward: bool) {
    debug_assert_eq!(data.len(), n * n);
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    // Rows are contiguous in row-major layout.
    for row in data.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }

    // Columns via gather/scatter through a strided copy.
    let mut column = vec![Complex64::default(); n];
    for j in 0..n {
        for i in 0..n {
            column[i] = data[i * n + j];
        }
        fft.process_with_scratch(&mut column, &mut scratch);
        for i in 0..n {
            data[i * n + j] = column[i];
        }
    }
}
