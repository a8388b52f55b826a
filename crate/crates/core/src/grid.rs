//! Uniform periodic grids on `[-L, L)`, grid functions, Fourier spectral
//! calculus and quadrature.
//!
//! Every integral uses the rectangle rule, which on a uniform periodic grid
//! coincides with the trapezoid rule and is exact for trigonometric
//! polynomials of degree below `N`.

use alloc::vec;
use alloc::vec::Vec;

use crate::fft::{Complex, FftPlan};
use crate::math;
use crate::{Error, Result};

/// Uniform periodic grid with nodes `x_j = -L + j·h`, `h = 2L/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_length: f64,
    n_points: usize,
    spacing: f64,
}

impl Grid {
    /// Smallest admissible number of nodes.
    pub const MIN_POINTS: usize = 16;

    /// Builds a grid on `[-half_length, half_length)` with `n_points` nodes.
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidHalfLength(half_length));
        }
        if n_points < Self::MIN_POINTS || !n_points.is_power_of_two() {
            return Err(Error::InvalidGridSize(n_points));
        }
        Ok(Self {
            half_length,
            n_points,
            spacing: 2.0 * half_length / n_points as f64,
        })
    }

    /// Half length `L` of the domain `[-L, L)`.
    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Number of nodes.
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Node spacing `2L/N`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Period `2L`.
    pub fn period(&self) -> f64 {
        2.0 * self.half_length
    }

    /// Position of node `j`.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing
    }

    /// Iterator over node positions.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.node(j))
    }

    /// Fundamental wavenumber `π/L`.
    pub fn fundamental_wavenumber(&self) -> f64 {
        core::f64::consts::PI / self.half_length
    }

    /// The same domain with `factor` times as many nodes.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.half_length, self.n_points * factor)
    }
}

/// Shorthand for [`Grid::new`].
pub fn make_grid(half_length: f64, n_points: usize) -> Result<Grid> {
    Grid::new(half_length, n_points)
}

/// Real-valued grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    /// Wraps nodal values, checking the length and finiteness.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: values.len(),
            });
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(j));
        }
        Ok(Self { grid, values })
    }

    /// The zero field.
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_points()],
        }
    }

    /// Samples `f` at the nodes.
    ///
    /// # Panics
    ///
    /// Panics if `f` returns a non-finite value.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = grid.nodes().map(f).collect();
        assert!(
            values.iter().all(|v| v.is_finite()),
            "sampled function is not finite"
        );
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        Self { grid, values }
    }

    /// The grid the field lives on.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Nodal values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Consumes the field, returning its values.
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: f64, other: &Field, b: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        ))
    }

    /// `∫ u dx` by the rectangle rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }

    /// Largest absolute nodal value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `L^p` or `L^∞` norm; shorthand for [`norm`].
    pub fn norm(&self, which: Norm) -> f64 {
        norm(self, which)
    }
}

/// Which norm [`norm`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    /// `∫|f|`.
    L1,
    /// `(∫|f|²)^{1/2}`.
    L2,
    /// `(∫|f|⁴)^{1/4}`.
    L4,
    /// General `(∫|f|^p)^{1/p}`, `p ≥ 1`.
    Lp(f64),
    /// `max |f|` over the nodes.
    Linf,
}

/// Rectangle-rule norm of a field.
pub fn norm(f: &Field, which: Norm) -> f64 {
    let h = f.grid.spacing();
    let v = &f.values;
    match which {
        Norm::L1 => v.iter().map(|x| x.abs()).sum::<f64>() * h,
        Norm::L2 => math::sqrt(v.iter().map(|x| x * x).sum::<f64>() * h),
        Norm::L4 => {
            let s: f64 = v.iter().map(|x| (x * x) * (x * x)).sum::<f64>() * h;
            math::sqrt(math::sqrt(s))
        }
        Norm::Lp(p) => {
            let s: f64 = v.iter().map(|x| math::powf(x.abs(), p)).sum::<f64>() * h;
            math::powf(s, 1.0 / p)
        }
        Norm::Linf => f.max_abs(),
    }
}

/// `∫ Π_i |f_i| dx` by the rectangle rule.
///
/// An empty list integrates the constant 1 over the period.
pub fn product_integral(fs: &[&Field]) -> Result<f64> {
    let Some(first) = fs.first() else {
        return Err(Error::InvalidParameter(
            "product_integral needs at least one field".into(),
        ));
    };
    let grid = first.grid;
    if fs.iter().any(|f| f.grid != grid) {
        return Err(Error::GridMismatch);
    }
    let sum: f64 = (0..grid.n_points())
        .map(|j| fs.iter().map(|f| f.values[j].abs()).product::<f64>())
        .sum();
    Ok(sum * grid.spacing())
}

/// FFT plan plus wavenumber table for one grid.
///
/// Spectra are unnormalized DFTs of the nodal values; mode `j` carries the
/// wavenumber `κ·m` with `m = j` for `j ≤ N/2` and `m = j − N` above.
#[derive(Debug, Clone)]
pub struct Spectral {
    grid: Grid,
    plan: FftPlan,
    wavenumbers: Vec<f64>,
}

impl Spectral {
    /// Plans transforms for `grid`.
    pub fn new(grid: Grid) -> Self {
        let n = grid.n_points();
        let kappa = grid.fundamental_wavenumber();
        let wavenumbers = (0..n)
            .map(|j| {
                let m = if j <= n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                kappa * m
            })
            .collect();
        Self {
            grid,
            plan: FftPlan::new(n),
            wavenumbers,
        }
    }

    /// The grid these transforms act on.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// The FFT plan.
    pub fn plan(&self) -> &FftPlan {
        &self.plan
    }

    /// Wavenumber of each mode.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Integer mode index `|m|` of storage slot `j`.
    #[inline]
    pub fn mode_index(&self, j: usize) -> usize {
        let n = self.grid.n_points();
        if j <= n / 2 {
            j
        } else {
            n - j
        }
    }

    /// Forward transform of real values.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex> {
        let mut buf: Vec<Complex> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.plan.forward(&mut buf);
        buf
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse_real(&self, spectrum: &[Complex]) -> Vec<f64> {
        let mut buf = spectrum.to_vec();
        self.plan.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Multiplier of `∂x^order` for storage slot `j`. The Nyquist mode has
    /// no real odd derivative and is zeroed for odd orders.
    #[inline]
    pub fn derivative_multiplier(&self, j: usize, order: u32) -> Complex {
        let n = self.grid.n_points();
        if order % 2 == 1 && j == n / 2 {
            return Complex::ZERO;
        }
        let k = self.wavenumbers[j];
        match order % 4 {
            0 => Complex::new(math::powi(k, order), 0.0),
            1 => Complex::new(0.0, math::powi(k, order)),
            2 => Complex::new(-math::powi(k, order), 0.0),
            _ => Complex::new(0.0, -math::powi(k, order)),
        }
    }

    /// Applies `∂x^order` to a spectrum in place.
    pub fn differentiate_in_place(&self, spectrum: &mut [Complex], order: u32) {
        for (j, z) in spectrum.iter_mut().enumerate() {
            *z *= self.derivative_multiplier(j, order);
        }
    }

    /// `∂x^order f` for any order, computed spectrally.
    pub fn derivative(&self, f: &Field, order: u32) -> Result<Field> {
        if f.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut spec = self.forward(&f.values);
        self.differentiate_in_place(&mut spec, order);
        Ok(Field::from_raw(self.grid, self.inverse_real(&spec)))
    }

    /// `(∫|f|²)^{1/2}` from a spectrum via Parseval.
    pub fn l2_from_spectrum(&self, spectrum: &[Complex]) -> f64 {
        math::sqrt(self.l2_squared_from_spectrum(spectrum))
    }

    /// `∫|f|²` from a spectrum via Parseval.
    pub fn l2_squared_from_spectrum(&self, spectrum: &[Complex]) -> f64 {
        let n = self.grid.n_points() as f64;
        spectrum.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.spacing() / n
    }

    /// `∫|∂x^order f|²` from a spectrum via Parseval.
    pub fn derivative_l2_squared(&self, spectrum: &[Complex], order: u32) -> f64 {
        let n = self.grid.n_points() as f64;
        spectrum
            .iter()
            .enumerate()
            .map(|(j, z)| z.norm_sqr() * self.derivative_multiplier(j, order).norm_sqr())
            .sum::<f64>()
            * self.grid.spacing()
            / n
    }
}

/// Exact derivative of the trigonometric interpolant of `f`, `order ∈ {1,2,3}`.
pub fn spectral_derivative(f: &Field, order: u32) -> Result<Field> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidDerivativeOrder(order));
    }
    Spectral::new(f.grid).derivative(f, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn sine_grid(n: usize) -> Grid {
        Grid::new(PI, n).unwrap()
    }

    #[test]
    fn make_grid_spacing() {
        let g = make_grid(PI, 16).unwrap();
        assert!((g.spacing() - 2.0 * PI / 16.0).abs() < 1e-15);
        let g = make_grid(50.0, 4096).unwrap();
        assert_eq!(g.spacing(), 100.0 / 4096.0);
        assert_eq!(g.node(0), -50.0);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert_eq!(make_grid(1.0, 10), Err(Error::InvalidGridSize(10)));
        assert_eq!(make_grid(1.0, 8), Err(Error::InvalidGridSize(8)));
        assert!(matches!(
            make_grid(0.0, 16),
            Err(Error::InvalidHalfLength(_))
        ));
        assert!(matches!(
            make_grid(-1.0, 16),
            Err(Error::InvalidHalfLength(_))
        ));
        assert!(matches!(
            make_grid(f64::NAN, 16),
            Err(Error::InvalidHalfLength(_))
        ));
    }

    #[test]
    fn field_validates_values() {
        let g = sine_grid(16);
        assert!(matches!(
            Field::new(g, vec![0.0; 15]),
            Err(Error::LengthMismatch { .. })
        ));
        let mut v = vec![0.0; 16];
        v[3] = f64::INFINITY;
        assert_eq!(Field::new(g, v), Err(Error::NonFiniteValue(3)));
    }

    #[test]
    fn derivative_of_sine() {
        let g = sine_grid(16);
        let u = Field::from_fn(g, f64::sin);
        let d1 = spectral_derivative(&u, 1).unwrap();
        let d3 = spectral_derivative(&u, 3).unwrap();
        for (j, x) in g.nodes().enumerate() {
            assert!((d1.values()[j] - x.cos()).abs() < 1e-12);
            assert!((d3.values()[j] + x.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = sine_grid(32);
        let u = Field::from_fn(g, |_| 5.0);
        for order in 1..=3 {
            assert!(spectral_derivative(&u, order).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_order_checked() {
        let u = Field::zeros(sine_grid(16));
        assert_eq!(
            spectral_derivative(&u, 0),
            Err(Error::InvalidDerivativeOrder(0))
        );
        assert_eq!(
            spectral_derivative(&u, 4),
            Err(Error::InvalidDerivativeOrder(4))
        );
    }

    #[test]
    fn norms_of_sine() {
        let g = sine_grid(64);
        let u = Field::from_fn(g, f64::sin);
        assert!((norm(&u, Norm::L2) - PI.sqrt()).abs() < 1e-12);
        assert!((norm(&u, Norm::L4) - (0.75 * PI).powf(0.25)).abs() < 1e-10);
        assert!((norm(&u, Norm::L1) - 4.0).abs() < 1e-2);
        let z = Field::zeros(g);
        for w in [Norm::L1, Norm::L2, Norm::L4, Norm::Linf, Norm::Lp(3.0)] {
            assert_eq!(norm(&z, w), 0.0);
        }
    }

    #[test]
    fn product_integral_cases() {
        let g = sine_grid(1024);
        let s = Field::from_fn(g, f64::sin);
        let c = Field::from_fn(g, f64::cos);
        // |sin x cos x| has kinks, so nodal quadrature is only second order here
        assert!((product_integral(&[&s, &c]).unwrap() - 2.0).abs() < 1e-4);
        let z = Field::zeros(g);
        assert_eq!(product_integral(&[&s, &z]).unwrap(), 0.0);
        assert_eq!(product_integral(&[&s]).unwrap(), norm(&s, Norm::L1));
        let other = Field::zeros(sine_grid(16));
        assert_eq!(product_integral(&[&s, &other]), Err(Error::GridMismatch));
    }

    #[test]
    fn parseval_on_spectrum() {
        let g = sine_grid(32);
        let u = Field::from_fn(g, |x| (3.0 * x).sin() + 0.2 * x.cos() + 0.5);
        let sp = Spectral::new(g);
        let spec = sp.forward(u.values());
        assert!((sp.l2_from_spectrum(&spec) - norm(&u, Norm::L2)).abs() < 1e-12);
    }
}
