//! Radix-2 complex FFT for power-of-two lengths, with helpers that pack two
//! real signals into one complex transform.
//!
//! Conventions: the forward transform is unnormalized,
//! `X_k = Σ_j x_j e^{-2πi jk/N}`, and the inverse divides by `N`.

use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub};

use crate::math;

/// A complex number in rectangular form.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    /// Real part.
    pub re: f64,
    /// Imaginary part.
    pub im: f64,
}

impl Complex {
    /// Zero.
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    /// Builds `re + i im`.
    #[inline]
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    /// Complex conjugate.
    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    /// Squared modulus.
    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    /// Multiplication by `i`.
    #[inline]
    pub fn mul_i(self) -> Self {
        Self::new(-self.im, self.re)
    }

    /// Scales by a real factor.
    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s)
    }

    /// `e^{z}`.
    pub fn exp(self) -> Self {
        let m = math::exp(self.re);
        Self::new(m * math::cos(self.im), m * math::sin(self.im))
    }

    /// True when both parts are finite.
    #[inline]
    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Add for Complex {
    type Output = Complex;
    #[inline]
    fn add(self, rhs: Complex) -> Complex {
        Complex::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl AddAssign for Complex {
    #[inline]
    fn add_assign(&mut self, rhs: Complex) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for Complex {
    type Output = Complex;
    #[inline]
    fn sub(self, rhs: Complex) -> Complex {
        Complex::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for Complex {
    type Output = Complex;
    #[inline]
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, rhs: Complex) -> Complex {
        Complex::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

impl MulAssign for Complex {
    #[inline]
    fn mul_assign(&mut self, rhs: Complex) {
        *self = *self * rhs;
    }
}

impl Mul<f64> for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, rhs: f64) -> Complex {
        self.scale(rhs)
    }
}

/// Precomputed twiddles and bit-reversal permutation for one length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    // e^{-2πi j/N} for j < N/2
    twiddles: Vec<Complex>,
    bitrev: Vec<u32>,
}

impl FftPlan {
    /// Plans a transform of length `len`, which must be a power of two.
    ///
    /// # Panics
    ///
    /// Panics if `len` is zero or not a power of two.
    pub fn new(len: usize) -> Self {
        assert!(len.is_power_of_two(), "FFT length must be a power of two");
        let bits = len.trailing_zeros();
        let twiddles = (0..len / 2)
            .map(|j| {
                let theta = -2.0 * core::f64::consts::PI * j as f64 / len as f64;
                Complex::new(math::cos(theta), math::sin(theta))
            })
            .collect();
        let bitrev = (0..len as u32)
            .map(|j| {
                if bits == 0 {
                    0
                } else {
                    j.reverse_bits() >> (32 - bits)
                }
            })
            .collect();
        Self {
            len,
            twiddles,
            bitrev,
        }
    }

    /// Transform length.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; plans have positive length.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform.
    pub fn forward(&self, data: &mut [Complex]) {
        self.transform(data, false);
    }

    /// In-place inverse transform, normalized by `1/N`.
    pub fn inverse(&self, data: &mut [Complex]) {
        self.transform(data, true);
        let s = 1.0 / self.len as f64;
        for z in data.iter_mut() {
            *z = z.scale(s);
        }
    }

    fn transform(&self, data: &mut [Complex], inverse: bool) {
        let n = self.len;
        assert_eq!(data.len(), n, "buffer length does not match plan");
        for (i, &r) in self.bitrev.iter().enumerate() {
            let r = r as usize;
            if i < r {
                data.swap(i, r);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }

    /// Forward transforms of two real signals with one complex FFT.
    ///
    /// `scratch`, `out_a` and `out_b` must all have the plan length.
    pub fn forward_real_pair(
        &self,
        a: &[f64],
        b: &[f64],
        scratch: &mut [Complex],
        out_a: &mut [Complex],
        out_b: &mut [Complex],
    ) {
        let n = self.len;
        for j in 0..n {
            scratch[j] = Complex::new(a[j], b[j]);
        }
        self.forward(scratch);
        for k in 0..n {
            let zk = scratch[k];
            let zmk = scratch[(n - k) % n].conj();
            out_a[k] = (zk + zmk).scale(0.5);
            // (zk - zmk) / (2i)
            let d = zk - zmk;
            out_b[k] = Complex::new(d.im * 0.5, -d.re * 0.5);
        }
    }

    /// Inverse transforms of two Hermitian spectra (real signals) with one
    /// complex FFT.
    pub fn inverse_real_pair(
        &self,
        a: &[Complex],
        b: &[Complex],
        scratch: &mut [Complex],
        out_a: &mut [f64],
        out_b: &mut [f64],
    ) {
        for k in 0..self.len {
            scratch[k] = a[k] + b[k].mul_i();
        }
        self.inverse(scratch);
        for (j, z) in scratch.iter().enumerate() {
            out_a[j] = z.re;
            out_b[j] = z.im;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive_dft(x: &[Complex]) -> Vec<Complex> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex::ZERO, |acc, (j, &v)| {
                    let theta = -2.0 * core::f64::consts::PI * (j * k) as f64 / n as f64;
                    acc + v * Complex::new(theta.cos(), theta.sin())
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for &n in &[1usize, 2, 8, 32] {
            let x: Vec<Complex> = (0..n)
                .map(|j| Complex::new((j as f64 * 0.7).sin(), (j as f64 * 1.3).cos()))
                .collect();
            let mut y = x.clone();
            FftPlan::new(n).forward(&mut y);
            let expect = naive_dft(&x);
            for (a, b) in y.iter().zip(&expect) {
                assert!((*a - *b).norm_sqr().sqrt() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let n = 64;
        let plan = FftPlan::new(n);
        let x: Vec<Complex> = (0..n)
            .map(|j| Complex::new(j as f64, -(j as f64).sqrt()))
            .collect();
        let mut y = x.clone();
        plan.forward(&mut y);
        plan.inverse(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((*a - *b).norm_sqr().sqrt() < 1e-12);
        }
    }

    #[test]
    fn real_pair_packing_splits_spectra() {
        let n = 16;
        let plan = FftPlan::new(n);
        let a: Vec<f64> = (0..n).map(|j| (j as f64 * 0.4).sin() + 0.3).collect();
        let b: Vec<f64> = (0..n).map(|j| (j as f64 * 0.9).cos() * j as f64).collect();
        let mut scratch = vec![Complex::ZERO; n];
        let mut fa = vec![Complex::ZERO; n];
        let mut fb = vec![Complex::ZERO; n];
        plan.forward_real_pair(&a, &b, &mut scratch, &mut fa, &mut fb);
        let ea = naive_dft(&a.iter().map(|&v| Complex::new(v, 0.0)).collect::<Vec<_>>());
        let eb = naive_dft(&b.iter().map(|&v| Complex::new(v, 0.0)).collect::<Vec<_>>());
        for k in 0..n {
            assert!((fa[k] - ea[k]).norm_sqr().sqrt() < 1e-12);
            assert!((fb[k] - eb[k]).norm_sqr().sqrt() < 1e-12);
        }
        let mut ra = vec![0.0; n];
        let mut rb = vec![0.0; n];
        plan.inverse_real_pair(&fa, &fb, &mut scratch, &mut ra, &mut rb);
        for j in 0..n {
            assert!((ra[j] - a[j]).abs() < 1e-12);
            assert!((rb[j] - b[j]).abs() < 1e-12);
        }
    }
}
