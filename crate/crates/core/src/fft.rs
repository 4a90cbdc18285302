//! In-place iterative radix-2 FFT.
//!
//! Forward uses the kernel `e^{-2πi jk/N}`, inverse `e^{+2πi jk/N}`; neither
//! direction scales. Plans (twiddles and bit-reversal table) are cached per
//! length.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

#[derive(Debug)]
pub struct FftPlan {
    len: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len.is_power_of_two() && len >= 1, "FFT length must be a power of two");
        let bits = len.trailing_zeros();
        let bitrev = (0..len as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        Self {
            len,
            twiddles,
            bitrev,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.len;
        assert_eq!(data.len(), n);
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let step = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let w = if inverse { w.conj() } else { w };
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}

/// Shared plan for length `len`.
pub fn plan(len: usize) -> Arc<FftPlan> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<FftPlan>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(len)
        .or_insert_with(|| Arc::new(FftPlan::new(len)))
        .clone()
}

/// Unscaled transform of an `n`-dimensional cube with side `side`
/// stored row-major (`dim ∈ {1, 2}`).
pub fn transform(data: &mut [Complex64], side: usize, dim: usize, inverse: bool) {
    let p = plan(side);
    let run = |row: &mut [Complex64]| {
        if inverse {
            p.inverse(row)
        } else {
            p.forward(row)
        }
    };
    match dim {
        1 => run(data),
        2 => {
            crate::par::for_each_chunk(data, side, run);
            transpose_square(data, side);
            crate::par::for_each_chunk(data, side, run);
            transpose_square(data, side);
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

fn transpose_square(data: &mut [Complex64], side: usize) {
    for i in 0..side {
        for j in (i + 1)..side {
            data.swap(i * side + j, j * side + i);
        }
    }
}
