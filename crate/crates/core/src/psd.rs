//! Positive-semidefiniteness certificates and the pointwise properties
//! P1 (`k(x,x)` real and nonnegative), P2 (Hermitian symmetry) and
//! P3 (`|k(x,y)|² ≤ k(x,x) k(y,y)`).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{GramMatrix, KernelHandle};
use crate::rng::stream;
use crate::scalar::{to_wire, ComplexScalar};

pub const DEFAULT_TOL_E: f64 = 1e-9;
pub const DEFAULT_TOL_H: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsdVerdict {
    Psd,
    NotPsd,
    HermitianViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdCertificate {
    pub verdict: PsdVerdict,
    pub min_eigenvalue: f64,
    pub hermitian_defect: f64,
    /// Absolute eigenvalue slack: `tol_e · max(1, spectral_scale)`.
    pub tolerance_used: f64,
    pub dimension: usize,
    pub witness_points: Vec<ComplexScalar>,
    #[serde(skip)]
    pub spectral_scale: f64,
}

impl PsdCertificate {
    pub fn is_psd(&self) -> bool {
        self.verdict == PsdVerdict::Psd
    }

    /// `min_eigenvalue / max(1, spectral_scale)`.
    pub fn relative_min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue / self.spectral_scale.max(1.0)
    }
}

/// Maximum absolute row sum.
pub fn spectral_scale(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue of the Hermitian part `(M + M*) / 2`.
pub fn min_eigenvalue_hermitian(m: &DMatrix<Complex64>) -> f64 {
    let h = (m + m.adjoint()).map(|z| z * 0.5);
    SymmetricEigen::new(h).eigenvalues.min()
}

pub fn check_psd(g: &GramMatrix, tol_e: f64, tol_h: f64) -> Result<PsdCertificate> {
    if !(tol_e > 0.0) {
        return Err(Error::param("tol_e", "must be > 0"));
    }
    if !(tol_h > 0.0) {
        return Err(Error::param("tol_h", "must be > 0"));
    }
    let n = g.dim();
    if n == 0 || g.entries.ncols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if g.entries.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.entries.ncols(),
        });
    }
    for i in 0..n {
        for j in 0..n {
            let z = g.entries[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite(i, j));
            }
        }
    }
    let scale = spectral_scale(&g.entries);
    let min_eigenvalue = min_eigenvalue_hermitian(&g.entries);
    let tolerance_used = tol_e * scale.max(1.0);
    let verdict = if g.hermitian_defect > tol_h {
        PsdVerdict::HermitianViolation
    } else if min_eigenvalue >= -tolerance_used {
        PsdVerdict::Psd
    } else {
        PsdVerdict::NotPsd
    };
    Ok(PsdCertificate {
        verdict,
        min_eigenvalue,
        hermitian_defect: g.hermitian_defect,
        tolerance_used,
        dimension: n,
        witness_points: to_wire(&g.points),
        spectral_scale: scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    P1,
    P2,
    P3,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyWitness {
    pub property: Property,
    pub x: ComplexScalar,
    pub y: ComplexScalar,
    pub value: f64,
}

/// Worst cases of P1–P3 over every ordered pair of a sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    /// `min(min_x Re k(x,x), -max_x |Im k(x,x)|)`; negative means P1 fails.
    pub p1_worst: f64,
    pub p1_min_diagonal: f64,
    pub p1_max_diagonal_imag: f64,
    /// Largest Hermitian defect `|k(x,y) - conj(k(y,x))|`.
    pub p2_worst: f64,
    /// Most negative `Re k(x,x) · Re k(y,y) - |k(x,y)|²`.
    pub p3_worst: f64,
    /// `max(1, max |k|)` over the sample.
    pub scale: f64,
    pub witnesses: Vec<PropertyWitness>,
}

impl PropertyReport {
    pub fn p1_holds(&self, tol: f64) -> bool {
        self.p1_worst >= -tol * self.scale
    }

    pub fn p2_holds(&self, tol: f64) -> bool {
        self.p2_worst <= tol * self.scale
    }

    pub fn p3_holds(&self, tol: f64) -> bool {
        self.p3_worst >= -tol * self.scale * self.scale
    }
}

pub fn check_pointwise_properties(kernel: &KernelHandle, points: &[Complex64]) -> Result<PropertyReport> {
    if points.len() < 2 {
        return Err(Error::param("points", "need at least 2 points"));
    }
    let n = points.len();
    let mut vals = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            vals[i][j] = kernel.eval(points[i], points[j])?;
        }
    }
    let w = |p: Property, i: usize, j: usize, value: f64| PropertyWitness {
        property: p,
        x: points[i].into(),
        y: points[j].into(),
        value,
    };

    let mut scale: f64 = 1.0;
    let (mut min_diag, mut arg_min_diag) = (f64::INFINITY, 0);
    let (mut max_imag, mut arg_max_imag) = (0.0f64, 0);
    for i in 0..n {
        let d = vals[i][i];
        if d.re < min_diag {
            min_diag = d.re;
            arg_min_diag = i;
        }
        if d.im.abs() > max_imag {
            max_imag = d.im.abs();
            arg_max_imag = i;
        }
    }
    let (mut p2, mut p2_at) = (0.0f64, (0, 0));
    let (mut p3, mut p3_at) = (f64::INFINITY, (0, 0));
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(vals[i][j].norm());
            let defect = (vals[i][j] - vals[j][i].conj()).norm();
            if defect > p2 {
                p2 = defect;
                p2_at = (i, j);
            }
            let slack = vals[i][i].re * vals[j][j].re - vals[i][j].norm_sqr();
            if slack < p3 {
                p3 = slack;
                p3_at = (i, j);
            }
        }
    }
    let p1_worst = min_diag.min(-max_imag);
    let p1_witness = if min_diag <= -max_imag {
        w(Property::P1, arg_min_diag, arg_min_diag, min_diag)
    } else {
        w(Property::P1, arg_max_imag, arg_max_imag, -max_imag)
    };
    Ok(PropertyReport {
        p1_worst,
        p1_min_diagonal: min_diag,
        p1_max_diagonal_imag: max_imag,
        p2_worst: p2,
        p3_worst: p3,
        scale,
        witnesses: vec![
            p1_witness,
            w(Property::P2, p2_at.0, p2_at.1, p2),
            w(Property::P3, p3_at.0, p3_at.1, p3),
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdSuiteReport {
    pub kernel: String,
    pub trials: usize,
    pub n_max: usize,
    pub seed: u64,
    pub passes: usize,
    pub failures: usize,
    /// Smallest eigenvalue seen across all trials.
    pub worst_min_eigenvalue: f64,
    /// Smallest `min_eigenvalue / max(1, spectral_scale)` across all trials.
    pub worst_relative_min_eigenvalue: f64,
    pub worst_witness: Vec<ComplexScalar>,
    /// First falsifying certificate, with its points.
    pub first_failure: Option<PsdCertificate>,
}

impl PsdSuiteReport {
    pub fn all_psd(&self) -> bool {
        self.failures == 0
    }
}

/// Random Gram matrices of size `1..=n_max` drawn uniformly from the kernel domain.
pub fn random_psd_suite(
    kernel: &KernelHandle,
    n_max: usize,
    trials: usize,
    seed: u64,
    tol_e: f64,
    tol_h: f64,
) -> Result<PsdSuiteReport> {
    if n_max == 0 {
        return Err(Error::param("n_max", "must be >= 1"));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be >= 1"));
    }
    let certs: Vec<PsdCertificate> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t as u64);
            let n = rng.random_range(1..=n_max);
            let pts: Vec<Complex64> = (0..n).map(|_| kernel.domain().sample(&mut rng)).collect();
            let g = kernel.gram_with_limit(&pts, n_max.max(crate::kernel::DEFAULT_MAX_GRAM))?;
            check_psd(&g, tol_e, tol_h)
        })
        .collect::<Result<_>>()?;

    let mut report = PsdSuiteReport {
        kernel: kernel.label(),
        trials,
        n_max,
        seed,
        passes: 0,
        failures: 0,
        worst_min_eigenvalue: f64::INFINITY,
        worst_relative_min_eigenvalue: f64::INFINITY,
        worst_witness: Vec::new(),
        first_failure: None,
    };
    for c in certs {
        if c.is_psd() {
            report.passes += 1;
        } else {
            report.failures += 1;
            if report.first_failure.is_none() {
                report.first_failure = Some(c.clone());
            }
        }
        report.worst_relative_min_eigenvalue =
            report.worst_relative_min_eigenvalue.min(c.relative_min_eigenvalue());
        if c.min_eigenvalue < report.worst_min_eigenvalue {
            report.worst_min_eigenvalue = c.min_eigenvalue;
            report.worst_witness = c.witness_points.clone();
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{make_kernel, KernelSpec};
    use crate::scalar::re;

    fn k(name: &str) -> KernelHandle {
        make_kernel(&KernelSpec::builtin(name)).unwrap()
    }

    #[test]
    fn identity_is_psd() {
        let g = GramMatrix::from_entries(DMatrix::identity(3, 3));
        let c = check_psd(&g, DEFAULT_TOL_E, DEFAULT_TOL_H).unwrap();
        assert_eq!(c.verdict, PsdVerdict::Psd);
        assert!((c.min_eigenvalue - 1.0).abs() < 1e-14);
        assert_eq!(c.dimension, 3);
    }

    #[test]
    fn two_by_two_eigenvalues() {
        // oracle: [[a, b], [b, a]] has eigenvalues a ± b
        let g = k("gaussian").gram(&[re(0.0), re(1.0)]).unwrap();
        let c = check_psd(&g, DEFAULT_TOL_E, DEFAULT_TOL_H).unwrap();
        assert!(c.is_psd());
        assert!((c.min_eigenvalue - (1.0 - (-1.0f64).exp())).abs() < 1e-14);

        let g = k("poly_neg").gram(&[re(0.0), re(2.0)]).unwrap();
        assert_eq!(g.entries[(0, 1)], re(-3.0));
        let c = check_psd(&g, DEFAULT_TOL_E, DEFAULT_TOL_H).unwrap();
        assert_eq!(c.verdict, PsdVerdict::NotPsd);
        assert!((c.min_eigenvalue + 2.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_violation_takes_precedence() {
        let g = k("sine_asym").gram(&[re(0.0), re(1.0)]).unwrap();
        let c = check_psd(&g, DEFAULT_TOL_E, DEFAULT_TOL_H).unwrap();
        assert_eq!(c.verdict, PsdVerdict::HermitianViolation);
    }

    #[test]
    fn errors() {
        let empty = GramMatrix::from_entries(DMatrix::zeros(0, 0));
        assert_eq!(check_psd(&empty, 1e-9, 1e-10), Err(Error::EmptyMatrix));
        let mut m = DMatrix::identity(2, 2);
        m[(1, 0)] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(
            check_psd(&GramMatrix::from_entries(m), 1e-9, 1e-10),
            Err(Error::NonFinite(1, 0))
        );
    }

    #[test]
    fn pointwise_properties() {
        let r = check_pointwise_properties(&k("gaussian"), &[re(0.0), re(0.5), re(1.0)]).unwrap();
        assert!(r.p1_worst >= -1e-12 && r.p2_worst <= 1e-12 && r.p3_worst >= -1e-12);

        let r = check_pointwise_properties(&k("poly_neg"), &[re(0.0), re(2.0)]).unwrap();
        assert_eq!(r.p3_worst, -8.0);
        let w = r.witnesses.iter().find(|w| w.property == Property::P3).unwrap();
        assert_eq!((w.x.re - w.y.re).abs(), 2.0);
    }

    #[test]
    fn diagonal_p3_slack_is_zero() {
        // with a single repeated point every pair is diagonal
        let r = check_pointwise_properties(&k("exp_product"), &[re(1.3), re(1.3)]).unwrap();
        assert_eq!(r.p3_worst, 0.0);
    }

    #[test]
    fn random_suites() {
        let g = random_psd_suite(&k("gaussian"), 12, 200, 42, DEFAULT_TOL_E, DEFAULT_TOL_H).unwrap();
        assert!(g.all_psd());
        let p = random_psd_suite(&k("poly_neg"), 4, 200, 42, DEFAULT_TOL_E, DEFAULT_TOL_H).unwrap();
        assert!(p.failures > 0);
        assert!(!p.first_failure.unwrap().witness_points.is_empty());
        let one = random_psd_suite(&k("brownian"), 1, 1, 5, DEFAULT_TOL_E, DEFAULT_TOL_H).unwrap();
        assert_eq!(one.passes, 1);
        assert_eq!(one.worst_witness.len(), 1);
    }
}
