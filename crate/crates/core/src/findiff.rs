//! Finite-difference calculus for kernels: the increment `Δ`, the quotients
//! `ψ` and `φ`, decay traces of `β`, mixed-partial estimators, derivative
//! kernels and smoothness probes.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::domain::{Domain, Field};
use crate::error::{Error, Result};
use crate::ineq::{self, beta0, beta0_shifted, gamma, gamma_shifted};
use crate::kernel::KernelHandle;
use crate::rng::stream;
use crate::scalar::re;

/// Dyadic-style step schedule `h_j = h0 · ratio^j`, `j < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepSequence {
    pub h0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for StepSequence {
    fn default() -> Self {
        StepSequence {
            h0: 0.1,
            ratio: 0.5,
            count: 9,
        }
    }
}

impl StepSequence {
    pub fn new(h0: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(h0 > 0.0 && h0.is_finite()) {
            return Err(Error::param("h0", "must be positive and finite"));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::param("ratio", "must lie in (0, 1)"));
        }
        if count < 3 {
            return Err(Error::TraceTooShort(count));
        }
        Ok(StepSequence { h0, ratio, count })
    }

    pub fn steps(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.h0 * self.ratio.powi(j as i32)).collect()
    }

    pub fn last(&self) -> f64 {
        self.h0 * self.ratio.powi(self.count as i32 - 1)
    }
}

/// Magnitudes along a shrinking step schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayTrace {
    pub steps: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `log value` against `log step`, over the
    /// positive values. `None` when fewer than two are positive.
    pub slope_estimate: Option<f64>,
    pub final_value: f64,
}

#[derive(Serialize)]
struct TracePoint {
    step: f64,
    value: f64,
}

impl Serialize for DecayTrace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            trace: Vec<TracePoint>,
            slope_estimate: &'a Option<f64>,
            #[serde(rename = "final")]
            final_value: f64,
        }
        Wire {
            trace: self
                .steps
                .iter()
                .zip(&self.values)
                .map(|(&step, &value)| TracePoint { step, value })
                .collect(),
            slope_estimate: &self.slope_estimate,
            final_value: self.final_value,
        }
        .serialize(s)
    }
}

impl DecayTrace {
    pub fn new(steps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if steps.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: steps.len(),
                got: values.len(),
            });
        }
        if steps.len() < 3 {
            return Err(Error::TraceTooShort(steps.len()));
        }
        if steps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::param("steps", "must be strictly decreasing"));
        }
        let pts: Vec<(f64, f64)> = steps
            .iter()
            .zip(&values)
            .filter(|(_, &v)| v > 0.0)
            .map(|(s, v)| (s.ln(), v.ln()))
            .collect();
        let slope_estimate = (pts.len() >= 2).then(|| {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        });
        let final_value = *values.last().unwrap_or(&0.0);
        Ok(DecayTrace {
            steps,
            values,
            slope_estimate,
            final_value,
        })
    }

    /// Each value after the first `skip` is below its predecessor, or below
    /// `floor` (values at roundoff level count as decayed).
    pub fn strictly_decreasing_after(&self, skip: usize, floor: f64) -> bool {
        self.values
            .windows(2)
            .skip(skip)
            .all(|w| w[1] < w[0] || w[1] <= floor)
    }

    pub fn decays(&self, skip: usize, floor: f64, final_below: f64) -> bool {
        self.strictly_decreasing_after(skip, floor) && self.final_value < final_below
    }

    /// The last `tail` ratios `value_{j+1} / value_j` are all at most
    /// `max_ratio` (values at or below `floor` count as converged). A
    /// geometric tail means the trace is still heading to zero even when its
    /// constant is too large for an absolute threshold.
    pub fn geometric_tail(&self, tail: usize, max_ratio: f64, floor: f64) -> bool {
        let n = self.values.len();
        if n < tail + 1 {
            return false;
        }
        self.values[n - tail - 1..]
            .windows(2)
            .all(|w| w[1] <= floor || w[1] <= max_ratio * w[0])
    }
}

/// Denominator convention of `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiMode {
    /// `Δ / (h l)`, real field.
    Real,
    /// `Δ / (h l̄)`.
    Sesqui,
}

impl PsiMode {
    pub fn for_field(field: Field) -> Self {
        match field {
            Field::Real => PsiMode::Real,
            Field::Complex => PsiMode::Sesqui,
        }
    }

    fn denominator(self, h: Complex64, l: Complex64) -> Complex64 {
        match self {
            PsiMode::Real => h * l,
            PsiMode::Sesqui => h * l.conj(),
        }
    }
}

/// `Δ_{h,l} k(u,v) = k(u+h, v+l) - k(u, v+l) - k(u+h, v) + k(u, v)`.
pub fn delta(kernel: &KernelHandle, u: Complex64, v: Complex64, h: Complex64, l: Complex64) -> Result<Complex64> {
    Ok(kernel.eval(u + h, v + l)? - kernel.eval(u, v + l)? - kernel.eval(u + h, v)? + kernel.eval(u, v)?)
}

fn check_mode(kernel: &KernelHandle, mode: PsiMode, h: Complex64, l: Complex64) -> Result<()> {
    if mode == PsiMode::Real && kernel.field() != Field::Real {
        return Err(Error::RealFieldRequired);
    }
    if h == Complex64::new(0.0, 0.0) || l == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroStep);
    }
    Ok(())
}

/// `ψ(h,l)` at a general base point `(u, v)`.
pub fn psi_at(
    kernel: &KernelHandle,
    u: Complex64,
    v: Complex64,
    h: Complex64,
    l: Complex64,
    mode: PsiMode,
) -> Result<Complex64> {
    check_mode(kernel, mode, h, l)?;
    Ok(delta(kernel, u, v, h, l)? / mode.denominator(h, l))
}

/// `ψ(h,l) = Δ_{h,l} k(v,v) / (h l)` or `/ (h l̄)`.
pub fn psi(kernel: &KernelHandle, v: Complex64, h: Complex64, l: Complex64, mode: PsiMode) -> Result<Complex64> {
    psi_at(kernel, v, v, h, l, mode)
}

/// Tolerance on `|Im φ|` relative to the magnitude of the four `ψ` terms.
pub const PHI_IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiValue {
    #[serde(with = "crate::scalar::serde_c64")]
    pub value: Complex64,
    /// `|Im φ|` exceeds [`PHI_IMAG_TOL`] times the term scale.
    pub imaginary_flag: bool,
}

/// `φ(h,l) = ψ(h,h) + ψ(l,l) - ψ(h,l) - ψ(l,h)` at the diagonal point `(v,v)`.
pub fn phi(kernel: &KernelHandle, v: Complex64, h: Complex64, l: Complex64, mode: PsiMode) -> Result<PhiValue> {
    let terms = [
        psi(kernel, v, h, h, mode)?,
        psi(kernel, v, l, l, mode)?,
        psi(kernel, v, h, l, mode)?,
        psi(kernel, v, l, h, mode)?,
    ];
    let value = terms[0] + terms[1] - terms[2] - terms[3];
    let scale = terms.iter().fold(1.0f64, |m, t| m.max(t.norm()));
    Ok(PhiValue {
        value,
        imaginary_flag: value.im.abs() > PHI_IMAG_TOL * scale,
    })
}

/// Base-point convention for `ψ⁰` inside `φ⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftedAnchor {
    /// Each `ψ⁰` term sits at the base point whose increments land on
    /// `v, v+h, v+h+l`: `(v,v)` for `(h,h)`, `(v+h,v+h)` for `(l,l)`,
    /// `(v,v+h)` for `(h,l)` and `(v+h,v)` for `(l,h)`.
    Anchored,
    /// `ψ⁰(a,b) = Δ_{a,b} k(v, v+a) / (a b)` for every argument pair.
    Literal,
}

/// `ψ⁰(a,b) = Δ_{a,b} k(v, v+a) / (a b)`.
pub fn psi_shifted(kernel: &KernelHandle, v: Complex64, a: f64, b: f64) -> Result<Complex64> {
    psi_at(kernel, v, v + a, re(a), re(b), PsiMode::Real)
}

/// `φ⁰(h,l) = ψ⁰(h,h) + ψ⁰(l,l) - ψ⁰(h,l) - ψ⁰(l,h)` (real field).
pub fn phi_shifted(kernel: &KernelHandle, v: Complex64, h: f64, l: f64, anchor: ShiftedAnchor) -> Result<Complex64> {
    let m = PsiMode::Real;
    let (hc, lc) = (re(h), re(l));
    Ok(match anchor {
        ShiftedAnchor::Literal => {
            psi_shifted(kernel, v, h, h)? + psi_shifted(kernel, v, l, l)?
                - psi_shifted(kernel, v, h, l)?
                - psi_shifted(kernel, v, l, h)?
        }
        ShiftedAnchor::Anchored => {
            let w = v + h;
            psi_at(kernel, v, v, hc, hc, m)? + psi_at(kernel, w, w, lc, lc, m)?
                - psi_at(kernel, v, w, hc, lc, m)?
                - psi_at(kernel, w, v, lc, hc, m)?
        }
    })
}

/// Which pair of formulas the identity check compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityVariant {
    /// `γ(h,l)` against `φ(h,l)`.
    Plain,
    /// `γ⁰(h,l)` against `φ⁰(h,l)` (real field).
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub variant: IdentityVariant,
    #[serde(with = "crate::scalar::serde_c64")]
    pub gamma: Complex64,
    #[serde(with = "crate::scalar::serde_c64")]
    pub phi: Complex64,
    pub residual: f64,
    /// `max|k| · (1/|h| + 1/|l|)²`, the size of the largest expansion terms.
    pub scale: f64,
}

impl IdentityResidual {
    pub fn relative(&self) -> f64 {
        self.residual / self.scale
    }
}

fn identity_scale(kernel: &KernelHandle, pts: &[Complex64], h: f64, l: f64) -> Result<f64> {
    let mut m: f64 = 1.0;
    for &a in pts {
        for &b in pts {
            m = m.max(kernel.eval(a, b)?.norm());
        }
    }
    Ok(m * (1.0 / h + 1.0 / l).powi(2))
}

/// `|γ(h,l) - φ(h,l)|`: the expansion of `γ` against the `ψ` combination.
pub fn gamma_phi_identity(
    kernel: &KernelHandle,
    v: Complex64,
    h: Complex64,
    l: Complex64,
    mode: PsiMode,
) -> Result<IdentityResidual> {
    check_mode(kernel, mode, h, l)?;
    let g = gamma(kernel, v, h, l)?;
    let p = phi(kernel, v, h, l, mode)?.value;
    Ok(IdentityResidual {
        variant: IdentityVariant::Plain,
        gamma: g,
        phi: p,
        residual: (g - p).norm(),
        scale: identity_scale(kernel, &[v, v + h, v + l], h.norm(), l.norm())?,
    })
}

/// `|γ⁰(h,l) - φ⁰(h,l)|` (real field).
pub fn gamma_phi_identity_shifted(
    kernel: &KernelHandle,
    v: Complex64,
    h: f64,
    l: f64,
    anchor: ShiftedAnchor,
) -> Result<IdentityResidual> {
    check_mode(kernel, PsiMode::Real, re(h), re(l))?;
    let g = gamma_shifted(kernel, v, h, l)?;
    let p = phi_shifted(kernel, v, h, l, anchor)?;
    Ok(IdentityResidual {
        variant: IdentityVariant::Shifted,
        gamma: g,
        phi: p,
        residual: (g - p).norm(),
        scale: identity_scale(kernel, &[v, v + h, v + h + l], h.abs(), l.abs())?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitySummary {
    pub variant: IdentityVariant,
    pub evaluated: usize,
    pub failures: usize,
    pub worst_relative_residual: f64,
    pub worst: Option<IdentityResidual>,
}

impl IdentitySummary {
    fn new(variant: IdentityVariant) -> Self {
        IdentitySummary {
            variant,
            evaluated: 0,
            failures: 0,
            worst_relative_residual: 0.0,
            worst: None,
        }
    }

    fn absorb(&mut self, r: IdentityResidual, tol: f64) {
        self.evaluated += 1;
        if r.relative() > tol {
            self.failures += 1;
        }
        if self.worst.is_none() || r.relative() > self.worst_relative_residual {
            self.worst_relative_residual = r.relative();
            self.worst = Some(r);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitySuiteReport {
    pub kernel: String,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub plain: IdentitySummary,
    /// Real-field kernels only.
    pub shifted: Option<IdentitySummary>,
}

impl IdentitySuiteReport {
    pub fn failures(&self) -> usize {
        self.plain.failures + self.shifted.as_ref().map_or(0, |s| s.failures)
    }
}

pub const IDENTITY_TOL: f64 = 1e-10;

/// Both identities over `trials` seeded `(v, h, l)` draws.
pub fn identity_suite(kernel: &KernelHandle, trials: usize, seed: u64, tol: f64) -> Result<IdentitySuiteReport> {
    let real = kernel.field() == Field::Real;
    let mode = PsiMode::for_field(kernel.field());
    let domain = kernel.domain().clone();
    let grid = ineq::points_of(&domain);
    let results: Vec<Vec<IdentityResidual>> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<IdentityResidual>> {
            let mut rng = stream(seed, t as u64);
            let d = match &grid {
                Some(p) => match ineq::draw_on_points(&mut rng, p) {
                    Some(d) => d,
                    None => return Ok(Vec::new()),
                },
                None => ineq::draw(&mut rng, &domain, kernel.field(), ineq::StepChoice::Random),
            };
            let mut out = vec![gamma_phi_identity(kernel, d.v, d.h, d.l, mode)?];
            if real && d.shifted_l != 0.0 {
                out.push(gamma_phi_identity_shifted(
                    kernel,
                    d.v,
                    d.h.re,
                    d.shifted_l,
                    ShiftedAnchor::Anchored,
                )?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut plain = IdentitySummary::new(IdentityVariant::Plain);
    let mut shifted = real.then(|| IdentitySummary::new(IdentityVariant::Shifted));
    for r in results.into_iter().flatten() {
        match r.variant {
            IdentityVariant::Plain => plain.absorb(r, tol),
            IdentityVariant::Shifted => {
                if let Some(s) = shifted.as_mut() {
                    s.absorb(r, tol)
                }
            }
        }
    }
    Ok(IdentitySuiteReport {
        kernel: kernel.label(),
        trials,
        seed,
        tolerance: tol,
        plain,
        shifted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaVariant {
    /// `|β₀(h_j, s·h_j)|`.
    Beta0,
    /// `|β⁰(h_j, s·h_j)|` (real field, real slope).
    Beta0Shifted,
    /// `|(β_{λ} - β_{-λ}) / 2λ|` with `λ = h_j` and `l = s·h_j` (real field).
    BetaLambdaDerivative,
}

/// Default ratio `l_j / h_j` along decay paths.
pub const DEFAULT_PATH_SLOPE: f64 = 0.7;

/// `|β(h_j, slope·h_j)|` along the step schedule.
pub fn beta_decay_trace(
    kernel: &KernelHandle,
    u: Complex64,
    v: Complex64,
    seq: StepSequence,
    variant: BetaVariant,
    slope: Complex64,
) -> Result<DecayTrace> {
    if seq.count < 3 {
        return Err(Error::TraceTooShort(seq.count));
    }
    if variant != BetaVariant::Beta0 && (kernel.field() != Field::Real || slope.im != 0.0) {
        return Err(Error::RealFieldRequired);
    }
    let steps = seq.steps();
    let values = steps
        .iter()
        .map(|&h| {
            let (hc, lc) = (re(h), slope * h);
            Ok(match variant {
                BetaVariant::Beta0 => beta0(kernel, u, v, hc, lc)?.norm(),
                BetaVariant::Beta0Shifted => beta0_shifted(kernel, u, v, h, lc.re)?.norm(),
                BetaVariant::BetaLambdaDerivative => {
                    let plus = beta0(kernel, u + h, v, hc, lc)?;
                    let minus = beta0(kernel, u - h, v, hc, lc)?;
                    ((plus - minus) / (2.0 * h)).norm()
                }
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    DecayTrace::new(steps, values)
}

/// Output of [`mixed_partial_fd`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedPartialEstimate {
    #[serde(with = "crate::scalar::serde_c64")]
    pub estimate: Complex64,
    /// Raw quotients `ψ_j = Δ_{h_j,h_j} k(u,v) / (h_j h_j)` (or `/ |h_j|²`).
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub quotients: Vec<Complex64>,
    /// `|ψ_j - ψ_{j+1}|`, indexed by the finer step.
    pub increments: DecayTrace,
    pub divergent: bool,
    pub richardson: bool,
}

impl MixedPartialEstimate {
    pub fn final_increment(&self) -> f64 {
        self.increments.final_value
    }
}

/// `lim Δ_{h,h} k(u,v) / (h h)` (or `/ (h h̄)`) along the schedule with `l = h`.
///
/// The last quotient is the estimate; with `richardson` set, one
/// first-order extrapolation step `(ψ_n - r ψ_{n-1}) / (1 - r)` is applied.
/// An increment at least ten times the smallest earlier one (ignoring
/// increments at roundoff level) marks the trace divergent.
pub fn mixed_partial_fd(
    kernel: &KernelHandle,
    u: Complex64,
    v: Complex64,
    seq: StepSequence,
    mode: PsiMode,
    richardson: bool,
) -> Result<MixedPartialEstimate> {
    if seq.count < 4 {
        return Err(Error::TraceTooShort(seq.count));
    }
    let steps = seq.steps();
    let quotients = steps
        .iter()
        .map(|&h| psi_at(kernel, u, v, re(h), re(h), mode))
        .collect::<Result<Vec<_>>>()?;
    let incs: Vec<f64> = quotients.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let magnitude = kernel.eval(u, v)?.norm().max(kernel.eval(u + steps[0], v + steps[0])?.norm()).max(1.0);

    let mut divergent = false;
    let mut min_seen = f64::INFINITY;
    for (i, &d) in incs.iter().enumerate() {
        let h = steps[i + 1];
        let noise = 64.0 * f64::EPSILON * magnitude / (h * h);
        if min_seen.is_finite() && d >= 10.0 * min_seen {
            divergent = true;
        }
        if d > noise {
            min_seen = min_seen.min(d);
        }
    }

    let n = quotients.len();
    let estimate = if richardson {
        (quotients[n - 1] - seq.ratio * quotients[n - 2]) / (1.0 - seq.ratio)
    } else {
        quotients[n - 1]
    };
    Ok(MixedPartialEstimate {
        estimate,
        quotients,
        increments: DecayTrace::new(steps[1..].to_vec(), incs)?,
        divergent,
        richardson,
    })
}

/// The order-`(m, m)` derivative kernel `∂^{2m} k / ∂y^m ∂x^m` (real field).
///
/// Closed forms are used where the base kernel has them; otherwise the
/// centered-difference fallback is used if `fd_fallback` is set.
pub fn derivative_kernel(kernel: &KernelHandle, m: usize, fd_fallback: bool) -> Result<KernelHandle> {
    if kernel.field() != Field::Real {
        return Err(Error::RealFieldRequired);
    }
    if m == 0 {
        return Ok(kernel.clone());
    }
    if let Some(s) = kernel.smoothness() {
        if (m as u64) > s.sn_order as u64 {
            return Err(Error::SmoothnessExceeded {
                requested: m as u32,
                declared: s.sn_order,
            });
        }
    }
    if kernel.is_grid() {
        return Err(Error::DerivativeUnavailable { m1: m, m2: m });
    }
    if kernel.closed_form_order() < m && !fd_fallback {
        return Err(Error::DerivativeUnavailable { m1: m, m2: m });
    }
    Ok(kernel.clone().with_fd_fallback(fd_fallback).derivative_handle(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeRegion {
    Diagonal,
    NearDiagonal,
    Far,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEntry {
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub point: Vec<Complex64>,
    pub order: usize,
    pub region: ProbeRegion,
    pub converged: bool,
    pub final_increment: f64,
    #[serde(with = "crate::scalar::serde_c64")]
    pub estimate: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    /// Every sampled point converged at every order.
    ConsistentWithPropagation,
    /// Some point in the diagonal band failed; no claim about the rest.
    HypothesisNotMet,
    /// The band converged but a far point did not.
    Contradicts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnProbeReport {
    pub kernel: String,
    pub n: usize,
    pub band_halfwidth: f64,
    pub steps: StepSequence,
    pub entries: Vec<ProbeEntry>,
    pub band_converged: bool,
    pub far_converged: bool,
    pub verdict: ProbeVerdict,
}

/// Relative size of the last increment for a point to count as converged.
/// Largest step-to-step ratio that still counts as geometric convergence.
pub const TAIL_RATIO: f64 = 0.75;

pub const PROBE_CONVERGENCE_TOL: f64 = 1e-3;

/// Runs [`mixed_partial_fd`] on `k` and on its derivative kernels of order
/// `m < n` at `pairs` seeded points of each region: exact diagonal,
/// off-diagonal within `band` of it, and far from it.
pub fn sn_probe(
    kernel: &KernelHandle,
    n: usize,
    seq: StepSequence,
    band: f64,
    pairs: usize,
    seed: u64,
) -> Result<SnProbeReport> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if !(band > 0.0) {
        return Err(Error::param("band", "must be positive"));
    }
    let mode = PsiMode::for_field(kernel.field());
    let domain = kernel.domain();
    let reach = 2.0 * seq.h0 + band;
    let far_gap = (domain.width() / 4.0).max(2.0 * band);

    let mut rng = stream(seed, 0);
    let mut samples: Vec<(ProbeRegion, Complex64, Complex64)> = Vec::new();
    for _ in 0..pairs {
        let x = domain.sample_inner(&mut rng, reach);
        samples.push((ProbeRegion::Diagonal, x, x));
    }
    for _ in 0..pairs {
        let x = domain.sample_inner(&mut rng, reach);
        let mag = band * rng.random_range(0.05..1.0);
        let off = offset(&mut rng, kernel.field(), mag);
        samples.push((ProbeRegion::NearDiagonal, x, x + off));
    }
    for _ in 0..pairs {
        let (x, y) = x_far_pair(&mut rng, domain, reach, far_gap);
        samples.push((ProbeRegion::Far, x, y));
    }

    let kernels = (0..n)
        .map(|m| derivative_kernel_any_field(kernel, m))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..n).flat_map(|m| (0..samples.len()).map(move |i| (m, i))).collect();
    let entries = jobs
        .par_iter()
        .map(|&(m, i)| {
            let (region, x, y) = samples[i];
            let est = mixed_partial_fd(&kernels[m], x, y, seq, mode, false)?;
            let fin = est.final_increment();
            let small = fin <= PROBE_CONVERGENCE_TOL * est.estimate.norm().max(1.0);
            let floor = 64.0 * f64::EPSILON * est.estimate.norm().max(1.0);
            Ok(ProbeEntry {
                point: vec![x, y],
                order: m,
                region,
                converged: !est.divergent && (small || est.increments.geometric_tail(3, TAIL_RATIO, floor)),
                final_increment: fin,
                estimate: est.estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let band_converged = entries
        .iter()
        .filter(|e| e.region != ProbeRegion::Far)
        .all(|e| e.converged);
    let far_converged = entries.iter().filter(|e| e.region == ProbeRegion::Far).all(|e| e.converged);
    let verdict = match (band_converged, far_converged) {
        (false, _) => ProbeVerdict::HypothesisNotMet,
        (true, true) => ProbeVerdict::ConsistentWithPropagation,
        (true, false) => ProbeVerdict::Contradicts,
    };
    Ok(SnProbeReport {
        kernel: kernel.label(),
        n,
        band_halfwidth: band,
        steps: seq,
        entries,
        band_converged,
        far_converged,
        verdict,
    })
}

fn derivative_kernel_any_field(kernel: &KernelHandle, m: usize) -> Result<KernelHandle> {
    if m == 0 {
        Ok(kernel.clone())
    } else {
        derivative_kernel(kernel, m, true)
    }
}

fn offset<R: Rng>(rng: &mut R, field: Field, mag: f64) -> Complex64 {
    match field {
        Field::Real => re(if rng.random::<bool>() { mag } else { -mag }),
        Field::Complex => Complex64::from_polar(mag, rng.random_range(0.0..std::f64::consts::TAU)),
    }
}

/// Two inner points at least `gap` apart (best effort after 64 draws).
fn x_far_pair<R: Rng>(rng: &mut R, domain: &Domain, reach: f64, gap: f64) -> (Complex64, Complex64) {
    let mut best = (domain.sample_inner(rng, reach), domain.sample_inner(rng, reach));
    for _ in 0..64 {
        if (best.0 - best.1).norm() >= gap {
            break;
        }
        let cand = (domain.sample_inner(rng, reach), domain.sample_inner(rng, reach));
        if (cand.0 - cand.1).norm() > (best.0 - best.1).norm() {
            best = cand;
        }
    }
    best
}

/// Per-point outcome inside a [`DecaySuiteReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayEntry {
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub point: Vec<Complex64>,
    #[serde(with = "crate::scalar::serde_c64")]
    pub slope: Complex64,
    pub variant: BetaVariant,
    pub decays: bool,
    pub trace: DecayTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySuiteReport {
    pub kernel: String,
    pub points: usize,
    pub seed: u64,
    pub steps: StepSequence,
    pub final_below: f64,
    pub entries: Vec<DecayEntry>,
    pub failures: usize,
}

/// Step schedule used by decay suites: 14 halvings from 0.1.
pub const DECAY_STEPS: StepSequence = StepSequence {
    h0: 0.1,
    ratio: 0.5,
    count: 14,
};

/// Path slopes used by decay suites: `±0.7`, plus `0.7i` on the complex field.
pub fn path_slopes(field: Field) -> Vec<Complex64> {
    let mut s = vec![re(DEFAULT_PATH_SLOPE), re(-DEFAULT_PATH_SLOPE)];
    if field == Field::Complex {
        s.push(Complex64::new(0.0, DEFAULT_PATH_SLOPE));
    }
    s
}

/// Decay verdict for a `β` trace built from `seq` at a point where
/// `|k(u,v)| = k_mag`. Values under the roundoff floor (`eps·|k|/h`, or
/// `eps·|k|/h²` for the `λ`-derivative) count as decayed.
pub fn beta_trace_decays(trace: &DecayTrace, variant: BetaVariant, seq: StepSequence, k_mag: f64, final_below: f64) -> bool {
    let h = seq.last();
    let denom = if variant == BetaVariant::BetaLambdaDerivative { h * h } else { h };
    let floor = 1e3 * f64::EPSILON * k_mag.max(1.0) / denom;
    let skip = if variant == BetaVariant::Beta0 { 2 } else { seq.count / 2 };
    trace.strictly_decreasing_after(skip, floor)
        && (trace.final_value < final_below || trace.geometric_tail(3, TAIL_RATIO, floor))
}

/// `β` decay at `points` seeded off-diagonal pairs along every path slope.
/// A trace decays when it strictly decreases after its first two values
/// (roundoff-level values excepted) and either ends below `final_below` or
/// has a geometric tail. The auxiliary variants may cross zero at coarse
/// steps, so only the second half of their traces has to be monotone.
/// Real-field kernels also run the shifted and `λ`-derivative variants.
pub fn decay_suite(
    kernel: &KernelHandle,
    points: usize,
    seed: u64,
    seq: StepSequence,
    final_below: f64,
) -> Result<DecaySuiteReport> {
    let domain = kernel.domain();
    let reach = 2.0 * seq.h0;
    let mut rng = stream(seed, 0);
    let pairs: Vec<(Complex64, Complex64)> = (0..points)
        .map(|_| x_far_pair(&mut rng, domain, reach, domain.width() / 10.0))
        .collect();
    let real = kernel.field() == Field::Real;
    let mut jobs = Vec::new();
    for &(u, v) in &pairs {
        for s in path_slopes(kernel.field()) {
            jobs.push((u, v, s, BetaVariant::Beta0));
        }
        if real {
            jobs.push((u, v, re(DEFAULT_PATH_SLOPE), BetaVariant::Beta0Shifted));
            jobs.push((u, v, re(DEFAULT_PATH_SLOPE), BetaVariant::BetaLambdaDerivative));
        }
    }
    let entries = jobs
        .par_iter()
        .map(|&(u, v, slope, variant)| {
            let trace = beta_decay_trace(kernel, u, v, seq, variant, slope)?;
            let k_mag = kernel.eval(u, v)?.norm();
            Ok(DecayEntry {
                point: vec![u, v],
                slope,
                variant,
                decays: beta_trace_decays(&trace, variant, seq, k_mag, final_below),
                trace,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = entries.iter().filter(|e| !e.decays).count();
    Ok(DecaySuiteReport {
        kernel: kernel.label(),
        points,
        seed,
        steps: seq,
        final_below,
        entries,
        failures,
    })
}
