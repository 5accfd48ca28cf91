//! Named one-variable functions with closed-form derivatives of every order.
//!
//! These serve two roles: the `f` of an involutive lift `k(x, y) = f(x + y*)`
//! and the holomorphic test functions used by the contour and Wirtinger
//! checks.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    /// `e^{-t^2}`
    ExpNegSq,
    /// `e^t`
    Exp,
    /// `1 - t^2`
    OneMinusSq,
    /// `cos t`
    Cos,
    /// `c`
    Constant(f64),
    /// `z^2`
    Square,
    /// `1 / (1 - z)`, holomorphic on the open unit disc.
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionHandle {
    pub name: String,
    pub kind: FunctionKind,
}

pub const FUNCTION_NAMES: &[&str] = &[
    "exp_neg_sq",
    "exp",
    "one_minus_sq",
    "cos",
    "constant",
    "square",
    "geometric",
];

impl FunctionHandle {
    pub fn new(kind: FunctionKind) -> Self {
        let name = match kind {
            FunctionKind::ExpNegSq => "exp_neg_sq",
            FunctionKind::Exp => "exp",
            FunctionKind::OneMinusSq => "one_minus_sq",
            FunctionKind::Cos => "cos",
            FunctionKind::Constant(_) => "constant",
            FunctionKind::Square => "square",
            FunctionKind::Geometric => "geometric",
        };
        FunctionHandle {
            name: name.to_string(),
            kind,
        }
    }

    pub fn by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let kind = match name {
            "exp_neg_sq" => FunctionKind::ExpNegSq,
            "exp" => FunctionKind::Exp,
            "one_minus_sq" => FunctionKind::OneMinusSq,
            "cos" => FunctionKind::Cos,
            "constant" => FunctionKind::Constant(params.get("c").copied().unwrap_or(1.0)),
            "square" => FunctionKind::Square,
            "geometric" => FunctionKind::Geometric,
            other => return Err(Error::UnresolvedFunction(other.to_string())),
        };
        Ok(Self::new(kind))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.derivative(0, z)
    }

    /// `n`-th complex derivative at `z`.
    pub fn derivative(&self, n: usize, z: Complex64) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        match self.kind {
            FunctionKind::ExpNegSq => {
                let e = (-(z * z)).exp();
                if n == 0 {
                    e
                } else {
                    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                    hermite(n, z) * e * sign
                }
            }
            FunctionKind::Exp => z.exp(),
            FunctionKind::OneMinusSq => match n {
                0 => Complex64::new(1.0, 0.0) - z * z,
                1 => -2.0 * z,
                2 => Complex64::new(-2.0, 0.0),
                _ => zero,
            },
            FunctionKind::Cos => match n % 4 {
                0 => z.cos(),
                1 => -z.sin(),
                2 => -z.cos(),
                _ => z.sin(),
            },
            FunctionKind::Constant(c) => {
                if n == 0 {
                    Complex64::new(c, 0.0)
                } else {
                    zero
                }
            }
            FunctionKind::Square => match n {
                0 => z * z,
                1 => 2.0 * z,
                2 => Complex64::new(2.0, 0.0),
                _ => zero,
            },
            FunctionKind::Geometric => {
                let w = Complex64::new(1.0, 0.0) - z;
                let fact: f64 = (1..=n).map(|i| i as f64).product();
                fact / w.powi(n as i32 + 1)
            }
        }
    }

    /// Distance from `z` to the nearest singularity (infinite for entire functions).
    pub fn singularity_distance(&self, z: Complex64) -> f64 {
        match self.kind {
            FunctionKind::Geometric => (Complex64::new(1.0, 0.0) - z).norm(),
            _ => f64::INFINITY,
        }
    }
}

/// Physicists' Hermite polynomial `H_n(z)`, so that
/// `d^n/dt^n e^{-t^2} = (-1)^n H_n(t) e^{-t^2}`.
pub fn hermite(n: usize, z: Complex64) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * z;
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * (k as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn exp_neg_sq_second_derivative() {
        let f = FunctionHandle::new(FunctionKind::ExpNegSq);
        for t in [-1.3f64, 0.0, 0.4, 2.0] {
            let want = (4.0 * t * t - 2.0) * (-t * t).exp();
            assert!((f.derivative(2, c(t)).re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-5;
        for kind in [
            FunctionKind::ExpNegSq,
            FunctionKind::Exp,
            FunctionKind::OneMinusSq,
            FunctionKind::Cos,
            FunctionKind::Square,
            FunctionKind::Geometric,
        ] {
            let f = FunctionHandle::new(kind);
            let z = Complex64::new(0.21, -0.13);
            for n in 0..4 {
                let fd = (f.derivative(n, z + h) - f.derivative(n, z - h)) / (2.0 * h);
                let exact = f.derivative(n + 1, z);
                assert!((fd - exact).norm() < 1e-7 * (1.0 + exact.norm()), "{kind:?} n={n}");
            }
        }
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert_eq!(
            FunctionHandle::by_name("sinc", &BTreeMap::new()),
            Err(Error::UnresolvedFunction("sinc".into()))
        );
    }
}
