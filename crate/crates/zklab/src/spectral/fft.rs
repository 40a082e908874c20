//! Unnormalized multi-axis complex FFT over row-major arrays.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, dir))
}

/// In-place transform of `data` with the given `shape` along every axis.
///
/// Forward uses `exp(-i...)`, inverse `exp(+i...)`; neither is scaled.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    assert_eq!(data.len(), shape.iter().product::<usize>());
    let dir = if inverse {
        FftDirection::Inverse
    } else {
        FftDirection::Forward
    };
    let mut work: Vec<Complex64> = Vec::new();
    for axis in 0..shape.len() {
        let n = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let fft = plan(n, dir);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        if inner == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        // Transpose each [n][inner] block to [inner][n], transform rows, transpose back.
        let block = n * inner;
        work.resize(block, Complex64::default());
        for chunk in data.chunks_mut(block) {
            for i in 0..n {
                let row = &chunk[i * inner..(i + 1) * inner];
                for (j, &v) in row.iter().enumerate() {
                    work[j * n + i] = v;
                }
            }
            fft.process_with_scratch(&mut work, &mut scratch);
            for i in 0..n {
                let row = &mut chunk[i * inner..(i + 1) * inner];
                for (j, v) in row.iter_mut().enumerate() {
                    *v = work[j * n + i];
                }
            }
        }
    }
}
