//! Complex values and their `{re, im}` wire form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex number as it appears in spec files and reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ComplexScalar {
    pub re: f64,
    pub im: f64,
}

impl ComplexScalar {
    pub const fn new(re: f64, im: f64) -> Self {
        ComplexScalar { re, im }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl From<Complex64> for ComplexScalar {
    fn from(z: Complex64) -> Self {
        ComplexScalar { re: z.re, im: z.im }
    }
}

impl From<ComplexScalar> for Complex64 {
    fn from(z: ComplexScalar) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<f64> for ComplexScalar {
    fn from(x: f64) -> Self {
        ComplexScalar { re: x, im: 0.0 }
    }
}

/// Shorthand for a real number lifted to `Complex64`.
#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub(crate) fn to_wire(zs: &[Complex64]) -> Vec<ComplexScalar> {
    zs.iter().copied().map(ComplexScalar::from).collect()
}

/// `#[serde(with = "serde_c64")]` for `Complex64` fields.
pub mod serde_c64 {
    use super::ComplexScalar;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ComplexScalar::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        ComplexScalar::deserialize(d).map(Into::into)
    }
}

/// `#[serde(with = "serde_c64_vec")]` for `Vec<Complex64>` fields.
pub mod serde_c64_vec {
    use super::ComplexScalar;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        super::to_wire(zs).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Vec::<ComplexScalar>::deserialize(d).map(|v| v.into_iter().map(Into::into).collect())
    }
}
