//! Small power-of-two complex FFT used by the range/Doppler/angle stages.

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

/// Precomputed plan (bit-reversal table + twiddles) for one FFT size.
pub struct Fft {
    n: usize,
    rev: Vec<u32>,
    /// tw[i] = exp(-j 2 pi i / n) for i < n/2.
    tw: Vec<Complex64>,
}

impl Fft {
    /// `n` must be a power of two >= 2.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2 && n.is_power_of_two(), "FFT size must be a power of two");
        let bits = n.trailing_zeros();
        let rev = (0..n as u32)
            .map(|i| i.reverse_bits() >> (32 - bits))
            .collect();
        let tw = (0..n / 2)
            .map(|i| {
                let theta = -2.0 * core::f64::consts::PI * i as f64 / n as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        Fft { n, rev, tw }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// In-place forward DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / N), no scaling.
    pub fn process(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "buffer length must equal FFT size");
        for i in 0..self.n {
            let j = self.rev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= self.n {
            let half = len / 2;
            let step = self.n / len;
            for start in (0..self.n).step_by(len) {
                for off in 0..half {
                    let w = self.tw[off * step];
                    let a = buf[start + off];
                    let b = buf[start + off + half] * w;
                    buf[start + off] = a + b;
                    buf[start + off + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let theta = 2.0 * core::f64::consts::PI * i as f64 / n as f64;
            0.5 * (1.0 - theta.cos())
        })
        .collect()
}
