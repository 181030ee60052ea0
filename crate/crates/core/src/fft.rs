//! In-place radix-2 complex FFT.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// Precomputed plan for a forward transform of a fixed power-of-two size.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    twiddles: Vec<Complex>,
    bitrev: Vec<u32>,
}

impl Fft {
    /// Panics unless `len` is a power of two.
    pub fn new(len: usize) -> Self {
        assert!(len.is_power_of_two(), "FFT length must be a power of two");
        let twiddles = (0..len / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / len as f64;
                Complex::new(libm::cos(a), libm::sin(a))
            })
            .collect();
        let bits = len.trailing_zeros();
        let bitrev = (0..len as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Fft { len, twiddles, bitrev }
    }

    pub fn forward(&self, data: &mut [Complex]) {
        assert_eq!(data.len(), self.len);
        for (i, &j) in self.bitrev.iter().enumerate() {
            let j = j as usize;
            if i < j {
                data.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= self.len {
            let half = size / 2;
            let stride = self.len / size;
            for start in (0..self.len).step_by(size) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = data[start + k];
                    let b = data[start + k + half];
                    let t = Complex::new(b.re * w.re - b.im * w.im, b.re * w.im + b.im * w.re);
                    data[start + k] = Complex::new(a.re + t.re, a.im + t.im);
                    data[start + k + half] = Complex::new(a.re - t.re, a.im - t.im);
                }
            }
            size *= 2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex]) -> Vec<Complex> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex::default();
                for (t, v) in x.iter().enumerate() {
                    let a = -2.0 * PI * (k * t) as f64 / n as f64;
                    let (s, c) = (libm::sin(a), libm::cos(a));
                    acc.re += v.re * c - v.im * s;
                    acc.im += v.re * s + v.im * c;
                }
                acc
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let mut rng = crate::rng::SplitMix64::new(5);
        for n in [1usize, 2, 4, 8, 64, 256] {
            let x: Vec<Complex> = (0..n)
                .map(|_| Complex::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5))
                .collect();
            let expected = naive_dft(&x);
            let mut got = x.clone();
            Fft::new(n).forward(&mut got);
            for (a, b) in got.iter().zip(&expected) {
                assert!((a.re - b.re).abs() < 1e-9 && (a.im - b.im).abs() < 1e-9);
            }
        }
    }

    #[test]
    #[should_panic]
    fn rejects_non_power_of_two() {
        Fft::new(12);
    }
}
