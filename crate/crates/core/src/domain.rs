//! Kernel domains: real intervals, complex discs, and explicit point sets.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::ComplexScalar;

/// Absolute slack on domain boundaries and point-set membership.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    /// Closed real interval `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
    /// Closed disc `|z - center| <= radius`.
    Disc { center: ComplexScalar, radius: f64 },
    Points { points: Vec<ComplexScalar> },
}

impl Domain {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Domain::Interval { lo, hi }
    }

    pub fn disc(center: Complex64, radius: f64) -> Self {
        Domain::Disc {
            center: center.into(),
            radius,
        }
    }

    pub fn points(points: &[Complex64]) -> Self {
        Domain::Points {
            points: points.iter().copied().map(Into::into).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidSpec {
            field: "domain",
            reason: reason.to_string(),
        };
        match self {
            Domain::Interval { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(bad("interval needs finite lo < hi"));
                }
            }
            Domain::Disc { center, radius } => {
                if !(center.is_finite() && radius.is_finite() && *radius > 0.0) {
                    return Err(bad("disc needs a finite center and radius > 0"));
                }
            }
            Domain::Points { points } => {
                if points.is_empty() {
                    return Err(bad("point set is empty"));
                }
                if points.iter().any(|p| !p.is_finite()) {
                    return Err(bad("point set has a non-finite entry"));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            Domain::Interval { lo, hi } => {
                z.im == 0.0 && z.re >= lo - MEMBERSHIP_TOL && z.re <= hi + MEMBERSHIP_TOL
            }
            Domain::Disc { center, radius } => {
                (z - Complex64::from(*center)).norm() <= radius + MEMBERSHIP_TOL
            }
            Domain::Points { points } => points
                .iter()
                .any(|p| (Complex64::from(*p) - z).norm() <= MEMBERSHIP_TOL),
        }
    }

    /// Diameter of the domain, used to scale finite-difference steps.
    pub fn width(&self) -> f64 {
        match self {
            Domain::Interval { lo, hi } => hi - lo,
            Domain::Disc { radius, .. } => 2.0 * radius,
            Domain::Points { points } => {
                let mut w: f64 = 0.0;
                for a in points {
                    for b in points {
                        w = w.max((Complex64::from(*a) - Complex64::from(*b)).norm());
                    }
                }
                w
            }
        }
    }

    /// Distance from `z` to the boundary; zero outside and for point sets.
    pub fn distance_to_boundary(&self, z: Complex64) -> f64 {
        match self {
            Domain::Interval { lo, hi } => {
                if z.im != 0.0 {
                    0.0
                } else {
                    (z.re - lo).min(hi - z.re).max(0.0)
                }
            }
            Domain::Disc { center, radius } => {
                (radius - (z - Complex64::from(*center)).norm()).max(0.0)
            }
            Domain::Points { .. } => 0.0,
        }
    }

    /// Uniform draw from the domain (area-uniform on discs).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        self.sample_inner(rng, 0.0)
    }

    /// Uniform draw from the part of the domain at least `margin` away from
    /// the boundary. Point sets ignore the margin.
    pub fn sample_inner<R: Rng + ?Sized>(&self, rng: &mut R, margin: f64) -> Complex64 {
        match self {
            Domain::Interval { lo, hi } => {
                let (a, b) = (lo + margin, hi - margin);
                Complex64::new(if a < b { rng.random_range(a..=b) } else { 0.5 * (lo + hi) }, 0.0)
            }
            Domain::Disc { center, radius } => {
                let r_max = (radius - margin).max(0.0);
                let r = r_max * rng.random::<f64>().sqrt();
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                Complex64::from(*center) + Complex64::from_polar(r, theta)
            }
            Domain::Points { points } => points[rng.random_range(0..points.len())].into(),
        }
    }

    pub fn is_continuum(&self) -> bool {
        !matches!(self, Domain::Points { .. })
    }
}
