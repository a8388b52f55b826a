//! Initial data and their Gaussian mollification.

use alloc::sync::Arc;
use core::fmt;

use crate::grid::{Field, Grid, Spectral};
use crate::math;
use crate::{Error, Result};

/// Shape of the unmollified initial datum.
#[derive(Clone)]
pub enum DatumKind {
    /// `u_left` on `[position − extent, position)`, `u_right` on
    /// `[position, position + extent)`, zero elsewhere. A positive
    /// `transition_width` replaces the central jump by a `tanh` ramp of that
    /// width; the outer edges stay sharp before mollification.
    RiemannStep {
        u_left: f64,
        u_right: f64,
        position: f64,
        extent: f64,
        transition_width: f64,
    },
    /// `amplitude · exp(−(x − center)² / (2 width²))`.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Arbitrary profile, zero outside `support`.
    Custom {
        sample: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        support: (f64, f64),
    },
}

impl fmt::Debug for DatumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RiemannStep {
                u_left,
                u_right,
                position,
                extent,
                transition_width,
            } => f
                .debug_struct("RiemannStep")
                .field("u_left", u_left)
                .field("u_right", u_right)
                .field("position", position)
                .field("extent", extent)
                .field("transition_width", transition_width)
                .finish(),
            Self::Gaussian {
                amplitude,
                center,
                width,
            } => f
                .debug_struct("Gaussian")
                .field("amplitude", amplitude)
                .field("center", center)
                .field("width", width)
                .finish(),
            Self::Custom { support, .. } => f
                .debug_struct("Custom")
                .field("support", support)
                .finish_non_exhaustive(),
        }
    }
}

/// An initial datum together with its mollification width.
#[derive(Debug, Clone)]
pub struct InitialDatum {
    /// Unmollified profile.
    pub kind: DatumKind,
    /// Standard deviation of the Gaussian mollifier; must be positive.
    pub mollification_width: f64,
}

/// Gaussian tails are treated as zero beyond this many widths.
const GAUSSIAN_TAIL_WIDTHS: f64 = 8.0;

impl DatumKind {
    /// Evaluates the unmollified profile.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::RiemannStep {
                u_left,
                u_right,
                position,
                extent,
                transition_width,
            } => {
                if x < position - extent || x >= position + extent {
                    return 0.0;
                }
                let s = x - position;
                let heaviside = if transition_width > 0.0 {
                    0.5 * (1.0 + math::tanh(s / transition_width))
                } else if s > 0.0 {
                    1.0
                } else if s < 0.0 {
                    0.0
                } else {
                    0.5
                };
                u_left + (u_right - u_left) * heaviside
            }
            Self::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let z = (x - center) / width;
                amplitude * math::exp(-0.5 * z * z)
            }
            Self::Custom {
                ref sample,
                support,
            } => {
                if x < support.0 || x > support.1 {
                    0.0
                } else {
                    sample(x)
                }
            }
        }
    }

    /// Interval outside which the profile vanishes (numerically for
    /// Gaussians).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::RiemannStep {
                position, extent, ..
            } => (position - extent, position + extent),
            Self::Gaussian {
                amplitude: 0.0,
                center,
                ..
            } => (center, center),
            Self::Gaussian { center, width, .. } => (
                center - GAUSSIAN_TAIL_WIDTHS * width,
                center + GAUSSIAN_TAIL_WIDTHS * width,
            ),
            Self::Custom { support, .. } => support,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::RiemannStep {
                u_left,
                u_right,
                position,
                extent,
                transition_width,
            } => {
                [u_left, u_right, position].iter().all(|v| v.is_finite())
                    && extent > 0.0
                    && extent.is_finite()
                    && transition_width >= 0.0
            }
            Self::Gaussian {
                amplitude,
                center,
                width,
            } => amplitude.is_finite() && center.is_finite() && width > 0.0 && width.is_finite(),
            Self::Custom { support, .. } => {
                support.0.is_finite() && support.1.is_finite() && support.0 <= support.1
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(alloc::format!(
                "malformed datum {self:?}"
            )))
        }
    }
}

impl InitialDatum {
    /// Datum with an explicit mollification width.
    pub fn new(kind: DatumKind, mollification_width: f64) -> Self {
        Self {
            kind,
            mollification_width,
        }
    }

    /// The zero datum.
    pub fn zero(mollification_width: f64) -> Self {
        Self::new(
            DatumKind::Gaussian {
                amplitude: 0.0,
                center: 0.0,
                width: 1.0,
            },
            mollification_width,
        )
    }
}

/// Default mollification width `max(ε, 2h)`.
pub fn default_mollification_width(eps: f64, grid: &Grid) -> f64 {
    eps.max(2.0 * grid.spacing())
}

/// Periodic convolution of the datum with a Gaussian of standard deviation
/// `mollification_width`.
///
/// The profile is sampled at the nodes and its trigonometric interpolant is
/// convolved exactly: mode `k` is damped by `exp(−σ²k²/2)`. The mean is
/// untouched.
pub fn mollify(datum: &InitialDatum, grid: &Grid) -> Result<Field> {
    let width = datum.mollification_width;
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "mollification width must be positive, got {width}"
        )));
    }
    datum.kind.validate()?;
    let (lo, hi) = datum.kind.support();
    let margin = 4.0 * width;
    let l = grid.half_length();
    if lo - margin < -l || hi + margin > l {
        return Err(Error::SupportTooClose {
            lo,
            hi,
            half_length: l,
        });
    }
    let sampled = Field::from_fn(*grid, |x| datum.kind.eval(x));
    let spectral = Spectral::new(*grid);
    let mut spec = spectral.forward(sampled.values());
    for (z, &k) in spec.iter_mut().zip(spectral.wavenumbers()) {
        *z = z.scale(math::exp(-0.5 * width * width * k * k));
    }
    Field::new(*grid, spectral.inverse_real(&spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{norm, Norm};

    fn step(u_left: f64, u_right: f64) -> DatumKind {
        DatumKind::RiemannStep {
            u_left,
            u_right,
            position: 0.0,
            extent: 3.0,
            transition_width: 0.0,
        }
    }

    #[test]
    fn step_center_is_midpoint() {
        let grid = Grid::new(8.0, 1024).unwrap();
        for w in [0.05, 0.1, 0.3] {
            let f = mollify(&InitialDatum::new(step(1.0, 0.0), w), &grid).unwrap();
            let mid = grid.n_points() / 2;
            assert_eq!(grid.node(mid), 0.0);
            assert!((f.values()[mid] - 0.5).abs() < 1e-6, "w = {w}");
        }
    }

    #[test]
    fn mean_preserved() {
        let grid = Grid::new(8.0, 512).unwrap();
        let d = InitialDatum::new(step(1.0, -0.5), 0.2);
        let raw = Field::from_fn(grid, |x| d.kind.eval(x));
        let f = mollify(&d, &grid).unwrap();
        assert!((f.integral() - raw.integral()).abs() < 1e-12);
    }

    #[test]
    fn zero_datum_gives_zero_field() {
        let grid = Grid::new(4.0, 64).unwrap();
        let f = mollify(&InitialDatum::zero(0.1), &grid).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn approximate_identity_on_smooth_datum() {
        let grid = Grid::new(10.0, 1024).unwrap();
        let kind = DatumKind::Gaussian {
            amplitude: 1.0,
            center: 0.5,
            width: 0.7,
        };
        let raw = Field::from_fn(grid, |x| kind.eval(x));
        let mut last = f64::INFINITY;
        for w in [0.4, 0.2, 0.1, 0.05, 0.025] {
            let f = mollify(&InitialDatum::new(kind.clone(), w), &grid).unwrap();
            let d = norm(&f.axpby(1.0, &raw, -1.0).unwrap(), Norm::L2);
            assert!(d < last, "distance did not shrink at width {w}");
            last = d;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn gaussian_mollification_matches_closed_form() {
        // Gaussian ⋆ Gaussian: widths add in quadrature, mass is kept.
        let grid = Grid::new(10.0, 512).unwrap();
        let (a, s, w) = (1.3, 0.6, 0.3);
        let kind = DatumKind::Gaussian {
            amplitude: a,
            center: 0.0,
            width: s,
        };
        let f = mollify(&InitialDatum::new(kind, w), &grid).unwrap();
        let sw = (s * s + w * w).sqrt();
        for (j, x) in grid.nodes().enumerate() {
            let exact = a * s / sw * (-0.5 * x * x / (sw * sw)).exp();
            assert!((f.values()[j] - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn support_near_boundary_rejected() {
        let grid = Grid::new(3.5, 256).unwrap();
        let err = mollify(&InitialDatum::new(step(1.0, 0.0), 0.2), &grid).unwrap_err();
        assert!(matches!(err, Error::SupportTooClose { .. }));
        assert!(mollify(&InitialDatum::new(step(1.0, 0.0), 0.0), &grid).is_err());
    }
}
