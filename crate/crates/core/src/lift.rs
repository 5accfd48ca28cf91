//! Positive definite functions on `S = Ω + Ω*` through involutive lifts.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Field};
use crate::error::{Error, Result};
use crate::findiff::{derivative_kernel, mixed_partial_fd, sn_probe, PsiMode, SnProbeReport, StepSequence};
use crate::function::{FunctionHandle, FunctionKind};
use crate::holo::{
    double_contour_mixed, holo_propagation_suite, ContourSpec, HoloSuiteReport, QuadratureOrder, DEFAULT_NODES,
};
use crate::kernel::{make_kernel, KernelHandle, KernelSpec};
use crate::psd::{random_psd_suite, PsdSuiteReport};
use crate::rng::stream;
use crate::scalar::re;

/// Involution `x ↦ x*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarMap {
    /// `x* = -x`
    Negation,
    /// `x* = x`
    Identity,
    /// `x* = -conj(x)`
    NegatedConjugate,
}

impl StarMap {
    pub fn apply(self, x: Complex64) -> Complex64 {
        match self {
            StarMap::Negation => -x,
            StarMap::Identity => x,
            StarMap::NegatedConjugate => -x.conj(),
        }
    }

    /// `d(y*)/dy` for the real maps, `d(y*)/d(conj y)` for the conjugate one.
    pub fn sign(self) -> f64 {
        match self {
            StarMap::Identity => 1.0,
            StarMap::Negation | StarMap::NegatedConjugate => -1.0,
        }
    }

    pub fn field(self) -> Field {
        match self {
            StarMap::NegatedConjugate => Field::Complex,
            _ => Field::Real,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StarMap::Negation => "negation",
            StarMap::Identity => "identity",
            StarMap::NegatedConjugate => "negated_conjugate",
        }
    }
}

/// A kernel `k(x, y) = f(x + y*)` together with its ingredients.
#[derive(Debug, Clone)]
pub struct LiftedKernel {
    pub function: FunctionHandle,
    pub star: StarMap,
    pub kernel: KernelHandle,
}

impl LiftedKernel {
    /// `f(x + y*)` evaluated directly, bypassing the kernel handle.
    pub fn direct(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.function.eval(x + self.star.apply(y))
    }
}

fn lift_spec(f: &FunctionHandle, star: StarMap) -> KernelSpec {
    let spec = KernelSpec::lift(&f.name, star);
    match f.kind {
        FunctionKind::Constant(c) => spec.with_param("c", c),
        _ => spec,
    }
}

/// Lift `f` on the default domain of the star map's field.
pub fn lift(f: &FunctionHandle, star: StarMap) -> Result<LiftedKernel> {
    Ok(LiftedKernel {
        function: f.clone(),
        star,
        kernel: make_kernel(&lift_spec(f, star))?,
    })
}

/// Lift `f` on an explicit `Ω`.
pub fn lift_on(f: &FunctionHandle, star: StarMap, omega: Domain) -> Result<LiftedKernel> {
    Ok(LiftedKernel {
        function: f.clone(),
        star,
        kernel: make_kernel(&lift_spec(f, star).with_domain(omega))?,
    })
}

/// Finite samples of `S = Ω + Ω*` and of its diagonal part `D = {x + x*}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodiffSets {
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub s: Vec<Complex64>,
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub d: Vec<Complex64>,
}

/// Merge tolerance for [`codiff_and_diagonal`].
pub const DEDUP_TOL: f64 = 1e-12;

fn dedup_sorted(mut zs: Vec<Complex64>) -> Vec<Complex64> {
    zs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<Complex64> = Vec::with_capacity(zs.len());
    for z in zs {
        if !out.iter().any(|o| (o - z).norm() <= DEDUP_TOL) {
            out.push(z);
        }
    }
    out
}

/// All sums `x + y*` and the diagonal sums `x + x*`, deduplicated and sorted
/// by real then imaginary part.
pub fn codiff_and_diagonal(points: &[Complex64], star: StarMap) -> CodiffSets {
    let s = points
        .iter()
        .flat_map(|&x| points.iter().map(move |&y| x + star.apply(y)))
        .collect();
    let d = points.iter().map(|&x| x + star.apply(x)).collect();
    CodiffSets {
        s: dedup_sorted(s),
        d: dedup_sorted(d),
    }
}

/// Lifts `f` (on `omega` if given) and runs the random Gram suite.
#[allow(clippy::too_many_arguments)]
pub fn pd_function_check(
    f: &FunctionHandle,
    star: StarMap,
    omega: Option<Domain>,
    n_max: usize,
    trials: usize,
    seed: u64,
    tol_e: f64,
    tol_h: f64,
) -> Result<PsdSuiteReport> {
    let lifted = match omega {
        Some(d) => lift_on(f, star, d)?,
        None => lift(f, star)?,
    };
    random_psd_suite(&lifted.kernel, n_max, trials, seed, tol_e, tol_h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaEntry {
    pub delta: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeViolation {
    #[serde(with = "crate::scalar::serde_c64")]
    pub x1: Complex64,
    #[serde(with = "crate::scalar::serde_c64")]
    pub x2: Complex64,
    #[serde(with = "crate::scalar::serde_c64")]
    pub x3: Complex64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuityVerdict {
    /// ω shrinks along the grid and no probe violates the bound.
    ConsistentWith,
    /// Sampled ω does not shrink: the diagonal is not shown continuous.
    HypothesisNotMet,
    /// A probe violates the bound, which positive definiteness forbids.
    FalsifiesPd,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub kernel: String,
    pub omega_table: Vec<OmegaEntry>,
    pub omega_monotone: bool,
    pub omega_vanishing: bool,
    /// Largest sampled `k(x,x)` near any base point.
    #[serde(rename = "M")]
    pub m: f64,
    /// The same bound per base point.
    pub local_m: Vec<f64>,
    pub probes: usize,
    pub violations: Vec<ProbeViolation>,
    pub verdict_label: ContinuityVerdict,
}

/// Relative slack on the probe bound.
pub const CONTINUITY_TOL: f64 = 1e-6;

/// Pointwise diagonal modulus `2 Re((k(a,a) + k(b,b))/2 - k(a,b))`.
fn diag_modulus(kernel: &KernelHandle, a: Complex64, b: Complex64) -> Result<f64> {
    Ok(2.0 * ((kernel.eval(a, a)? + kernel.eval(b, b)?) * 0.5 - kernel.eval(a, b)?).re)
}

fn unit_dirs(field: Field) -> Vec<Complex64> {
    match field {
        Field::Real => vec![re(1.0), re(-1.0)],
        Field::Complex => (0..8)
            .map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 8.0))
            .collect(),
    }
}

/// Draws a point within `radius` of `base` that lies in the domain.
fn near<R: Rng>(rng: &mut R, domain: &Domain, field: Field, base: Complex64, radius: f64) -> Complex64 {
    if let Domain::Points { points } = domain {
        let close: Vec<Complex64> = points
            .iter()
            .map(|&p| Complex64::from(p))
            .filter(|p| (p - base).norm() <= radius)
            .collect();
        return if close.is_empty() { base } else { close[rng.random_range(0..close.len())] };
    }
    for _ in 0..32 {
        let off = match field {
            Field::Real => re(rng.random_range(-radius..=radius)),
            Field::Complex => Complex64::from_polar(radius * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU)),
        };
        if domain.contains(base + off) {
            return base + off;
        }
    }
    base
}

/// Sampled diagonal modulus, local diagonal bounds, and the probe check
/// `|k(x1,x2) - k(x1,x3)|² ≤ M · ω(|x2 - x3|) · (1 + tol)`.
///
/// `delta_grid` must be strictly decreasing and positive. For each `δ`,
/// `ω(δ)` is the maximum of the pointwise modulus over pairs at separation
/// exactly `δ` from each base point and over `probe_pairs.min(256)` seeded
/// pairs at separation at most `δ`. Probes use the grid value at the
/// smallest `δ ≥ |x2 - x3|`, or the pointwise value if larger; probes with
/// `|x2 - x3|` beyond the grid are skipped.
pub fn continuity_propagation_report(
    kernel: &KernelHandle,
    base_points: &[Complex64],
    delta_grid: &[f64],
    probe_pairs: usize,
    seed: u64,
) -> Result<ContinuityReport> {
    if base_points.is_empty() {
        return Err(Error::param("base_points", "need at least one"));
    }
    if delta_grid.is_empty() || delta_grid.iter().any(|d| !(*d > 0.0)) || delta_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("delta_grid", "must be positive and strictly decreasing"));
    }
    for &b in base_points {
        kernel.eval(b, b)?;
    }
    let domain = kernel.domain();
    let field = kernel.field();
    let dirs = unit_dirs(field);
    let random_pairs = probe_pairs.min(256);

    let omega_table = delta_grid
        .par_iter()
        .enumerate()
        .map(|(gi, &delta)| {
            let mut rng = stream(seed, 1 + gi as u64);
            let mut w: f64 = 0.0;
            for &b in base_points {
                for &d in &dirs {
                    let x3 = b + d * delta;
                    if domain.contains(x3) {
                        w = w.max(diag_modulus(kernel, b, x3)?);
                    }
                }
            }
            for _ in 0..random_pairs {
                let b = base_points[rng.random_range(0..base_points.len())];
                let x2 = near(&mut rng, domain, field, b, delta_grid[0]);
                let x3 = near(&mut rng, domain, field, x2, delta);
                if (x3 - x2).norm() <= delta {
                    w = w.max(diag_modulus(kernel, x2, x3)?);
                }
            }
            Ok(OmegaEntry { delta, omega: w })
        })
        .collect::<Result<Vec<_>>>()?;
    let omega_monotone = omega_table.windows(2).all(|p| p[1].omega <= p[0].omega);
    let first = omega_table[0].omega;
    let last = omega_table[omega_table.len() - 1].omega;
    let omega_vanishing = omega_monotone && (last == 0.0 || last < 1e-2 * first);

    let radius = delta_grid[0];
    let mut rng = stream(seed, 0);
    let triples: Vec<(usize, Complex64, Complex64, Complex64)> = (0..probe_pairs)
        .map(|_| {
            let bi = rng.random_range(0..base_points.len());
            let b = base_points[bi];
            let x1 = near(&mut rng, domain, field, b, radius);
            let x2 = near(&mut rng, domain, field, b, radius);
            let r3 = radius * rng.random::<f64>();
            let x3 = near(&mut rng, domain, field, x2, r3);
            (bi, x1, x2, x3)
        })
        .collect();
    let mut local_m = vec![f64::NEG_INFINITY; base_points.len()];
    for (i, &b) in base_points.iter().enumerate() {
        local_m[i] = kernel.eval(b, b)?.re;
    }
    for &(bi, x1, _, _) in &triples {
        local_m[bi] = local_m[bi].max(kernel.eval(x1, x1)?.re);
    }
    let m = local_m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = m.abs().max(1.0);

    let checked = triples
        .par_iter()
        .map(|&(bi, x1, x2, x3)| -> Result<Option<Option<ProbeViolation>>> {
            let sep = (x2 - x3).norm();
            let Some(entry) = omega_table.iter().rev().find(|e| e.delta >= sep) else {
                return Ok(None);
            };
            let w = entry.omega.max(diag_modulus(kernel, x2, x3)?);
            let lhs = (kernel.eval(x1, x2)? - kernel.eval(x1, x3)?).norm_sqr();
            let rhs = local_m[bi] * w;
            let ok = lhs <= rhs * (1.0 + CONTINUITY_TOL) + 1e-14 * scale * scale;
            Ok(Some((!ok).then_some(ProbeViolation { x1, x2, x3, lhs, rhs })))
        })
        .collect::<Result<Vec<_>>>()?;
    let probes = checked.iter().filter(|c| c.is_some()).count();
    let violations: Vec<ProbeViolation> = checked.into_iter().flatten().flatten().collect();

    let verdict_label = if !violations.is_empty() {
        ContinuityVerdict::FalsifiesPd
    } else if !omega_vanishing {
        ContinuityVerdict::HypothesisNotMet
    } else {
        ContinuityVerdict::ConsistentWith
    };
    Ok(ContinuityReport {
        kernel: kernel.label(),
        omega_table,
        omega_monotone,
        omega_vanishing,
        m,
        local_m,
        probes,
        violations,
        verdict_label,
    })
}

/// A derivative of `f` read off from mixed partials of its lift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveredDerivative {
    pub order: usize,
    /// The point `s = x + y*` where the derivative is taken.
    #[serde(with = "crate::scalar::serde_c64")]
    pub at: Complex64,
    #[serde(with = "crate::scalar::serde_c64")]
    pub recovered: Complex64,
    #[serde(with = "crate::scalar::serde_c64")]
    pub oracle: Complex64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityVerdict {
    ConsistentWith,
    HypothesisNotMet,
    Contradicts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub function: String,
    pub star: StarMap,
    pub order: usize,
    pub probe: Option<SnProbeReport>,
    pub holo: Option<HoloSuiteReport>,
    pub recovered: Vec<RecoveredDerivative>,
    pub max_recovery_error: f64,
    pub verdict_label: RegularityVerdict,
}

/// Relative tolerance for recovered derivatives.
pub const RECOVERY_TOL: f64 = 1e-5;

/// Lifts `f`, probes the lift (smoothness probe for real star maps,
/// sesquiholomorphy suite for the conjugate one) and recovers derivatives of
/// `f` from derivatives of the lift.
///
/// With `k(x,y) = f(x + y*)`, `∂^{i+j} k / ∂x^i ∂y^j = σ^j f^{(i+j)}` where
/// `σ = d(y*)/dy` (`∂/∂ȳ` for the conjugate map), so `f^{(i+j)}` is
/// `σ^j` times the mixed partial.
pub fn regularity_propagation_suite(
    f: &FunctionHandle,
    star: StarMap,
    smoothness_order: usize,
    seed: u64,
) -> Result<RegularityReport> {
    let n = smoothness_order.max(1);
    let lifted = lift(f, star)?;
    let k = &lifted.kernel;
    let sigma = star.sign();
    let mut rng = stream(seed, 0);
    let mut pairs = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))];
    for _ in 0..3 {
        pairs.push((k.domain().sample_inner(&mut rng, 0.5), k.domain().sample_inner(&mut rng, 0.5)));
    }

    let mut recovered = Vec::new();
    let (probe, holo, hypothesis_ok) = match star.field() {
        Field::Real => {
            let probe = sn_probe(k, n, StepSequence::default(), 0.05, 4, seed)?;
            let ok = probe.band_converged;
            for m in 1..=n {
                let base = derivative_kernel(k, m - 1, false)?;
                for &(x, y) in &pairs {
                    let s = x + star.apply(y);
                    // even order 2m: one more mixed partial of k_{m-1}
                    let mixed = mixed_partial_fd(&base, x, y, StepSequence::default(), PsiMode::Real, true)?;
                    recovered.push(recovery(f, 2 * m, s, mixed.estimate * sigma.powi(m as i32)));
                    // odd order 2m-1: a centered x-derivative of k_{m-1}
                    let h = 1e-5;
                    let dx = (base.eval(x + h, y)? - base.eval(x - h, y)?) / (2.0 * h);
                    recovered.push(recovery(f, 2 * m - 1, s, dx * sigma.powi(m as i32 - 1)));
                }
            }
            (Some(probe), None, ok)
        }
        Field::Complex => {
            let holo = holo_propagation_suite(k, 0.05, 6, seed)?;
            let ok = holo.hypothesis_holds;
            for &(u, v) in &pairs {
                let s = u + star.apply(v);
                let room = k.domain().distance_to_boundary(u).min(k.domain().distance_to_boundary(v));
                let cu = ContourSpec::new(u, 0.8 * room, DEFAULT_NODES)?;
                let cv = ContourSpec::new(v, 0.8 * room, DEFAULT_NODES)?;
                let mixed = double_contour_mixed(k, u, v, cu, cv, QuadratureOrder::UFirst)?;
                recovered.push(recovery(f, 2, s, mixed.value * sigma));
                let h = 1e-5;
                let du = (k.eval(u + h, v)? - k.eval(u - h, v)?) / (2.0 * h);
                recovered.push(recovery(f, 1, s, du));
            }
            (None, Some(holo), ok)
        }
    };
    let max_recovery_error = recovered.iter().fold(0.0f64, |m, r| m.max(r.error));
    let verdict_label = if !hypothesis_ok {
        RegularityVerdict::HypothesisNotMet
    } else if max_recovery_error <= RECOVERY_TOL
        && probe.as_ref().is_none_or(|p| p.far_converged)
        && holo.as_ref().is_none_or(|h| h.conclusion_holds == Some(true))
    {
        RegularityVerdict::ConsistentWith
    } else {
        RegularityVerdict::Contradicts
    };
    Ok(RegularityReport {
        function: f.name.clone(),
        star,
        order: smoothness_order,
        probe,
        holo,
        recovered,
        max_recovery_error,
        verdict_label,
    })
}

fn recovery(f: &FunctionHandle, order: usize, at: Complex64, recovered: Complex64) -> RecoveredDerivative {
    let oracle = f.derivative(order, at);
    RecoveredDerivative {
        order,
        at,
        recovered,
        oracle,
        error: (recovered - oracle).norm() / oracle.norm().max(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        re(x)
    }

    fn fun(name: &str) -> FunctionHandle {
        FunctionHandle::by_name(name, &Default::default()).unwrap()
    }

    #[test]
    fn star_maps_are_involutions() {
        let z = Complex64::new(0.37, -1.25);
        for s in [StarMap::Negation, StarMap::Identity, StarMap::NegatedConjugate] {
            assert_eq!(s.apply(s.apply(z)), z);
        }
    }

    #[test]
    fn lift_examples() {
        let e = lift(&fun("exp"), StarMap::Identity).unwrap();
        assert_eq!(e.kernel.eval(c(1.0), c(2.0)).unwrap(), c(3.0f64.exp()));
        let g = lift(&fun("exp_neg_sq"), StarMap::Negation).unwrap();
        let gauss = make_kernel(&KernelSpec::builtin("gaussian")).unwrap();
        for (x, y) in [(0.1, 0.7), (-2.0, 1.5)] {
            assert_eq!(g.kernel.eval(c(x), c(y)).unwrap(), gauss.eval(c(x), c(y)).unwrap());
        }
        let i = Complex64::i();
        let z = lift_on(&fun("exp"), StarMap::NegatedConjugate, Domain::disc(c(0.0), 1.5)).unwrap();
        let k = z.kernel.eval(i, i).unwrap();
        assert!((k - Complex64::new(0.0, 2.0).exp()).norm() < 1e-15);
        assert_eq!(k, z.direct(i, i));
    }

    #[test]
    fn lift_rejects_singular_range() {
        // Ω + Ω* reaches z = 1 for the geometric function on the default disc
        assert!(lift(&fun("geometric"), StarMap::NegatedConjugate).is_err());
        assert!(lift_on(&fun("geometric"), StarMap::NegatedConjugate, Domain::disc(c(0.0), 0.4)).is_ok());
    }

    #[test]
    fn codiff_examples() {
        let r = codiff_and_diagonal(&[c(0.0), c(1.0)], StarMap::Negation);
        assert_eq!(r.s, vec![c(-1.0), c(0.0), c(1.0)]);
        assert_eq!(r.d, vec![c(0.0)]);
        let r = codiff_and_diagonal(&[c(1.0), c(2.0)], StarMap::Identity);
        assert_eq!(r.s, vec![c(2.0), c(3.0), c(4.0)]);
        assert_eq!(r.d, vec![c(2.0), c(4.0)]);
        let r = codiff_and_diagonal(&[Complex64::i()], StarMap::NegatedConjugate);
        assert_eq!(r.s, vec![Complex64::new(0.0, 2.0)]);
        assert_eq!(r.d, r.s);
    }

    #[test]
    fn pd_function_examples() {
        let r = pd_function_check(&fun("exp_neg_sq"), StarMap::Negation, None, 8, 100, 1, 1e-9, 1e-10).unwrap();
        assert!(r.all_psd());
        let r = pd_function_check(&fun("one_minus_sq"), StarMap::Negation, None, 8, 200, 1, 1e-9, 1e-10).unwrap();
        assert!(r.failures > 0);
        let r = pd_function_check(&fun("exp"), StarMap::Identity, None, 8, 100, 1, 1e-9, 1e-10).unwrap();
        assert!(r.all_psd());
    }

    #[test]
    fn continuity_examples() {
        let grid: Vec<f64> = (0..8).map(|j| 0.5f64.powi(j)).collect();
        let b = make_kernel(&KernelSpec::builtin("brownian")).unwrap();
        let r = continuity_propagation_report(&b, &[c(1.0), c(3.0), c(6.0)], &grid, 2000, 5).unwrap();
        for e in &r.omega_table {
            assert!((e.omega - e.delta).abs() < 1e-12, "{e:?}");
        }
        assert!(r.violations.is_empty());
        assert_eq!(r.verdict_label, ContinuityVerdict::ConsistentWith);

        let g = make_kernel(&KernelSpec::builtin("gaussian")).unwrap();
        let r = continuity_propagation_report(&g, &[c(0.0), c(1.0)], &grid, 2000, 5).unwrap();
        for e in &r.omega_table {
            let want = 2.0 * (1.0 - (-e.delta * e.delta).exp());
            assert!((e.omega - want).abs() < 1e-10, "{e:?}");
        }
        assert!(r.violations.is_empty());

        let one = make_kernel(&KernelSpec::builtin("constant")).unwrap();
        let r = continuity_propagation_report(&one, &[c(0.0)], &grid, 200, 5).unwrap();
        assert!(r.omega_table.iter().all(|e| e.omega == 0.0));
        assert!(r.violations.is_empty());
    }

    #[test]
    fn continuity_flags_non_pd() {
        let grid: Vec<f64> = (0..5).map(|j| 0.5f64.powi(j)).collect();
        let p = make_kernel(&KernelSpec::builtin("poly_neg")).unwrap();
        let r = continuity_propagation_report(&p, &[c(0.0), c(1.0)], &grid, 2000, 5).unwrap();
        assert_eq!(r.verdict_label, ContinuityVerdict::FalsifiesPd);
    }

    #[test]
    fn regularity_examples() {
        let r = regularity_propagation_suite(&fun("exp_neg_sq"), StarMap::Negation, 1, 3).unwrap();
        let at0 = r.recovered.iter().find(|d| d.order == 2 && d.at == c(0.0)).unwrap();
        assert!((at0.recovered.re + 2.0).abs() < 1e-5, "{at0:?}");
        assert_eq!(r.verdict_label, RegularityVerdict::ConsistentWith, "{}", r.max_recovery_error);

        let r = regularity_propagation_suite(&fun("exp"), StarMap::Identity, 2, 3).unwrap();
        assert_eq!(r.verdict_label, RegularityVerdict::ConsistentWith, "{:?}", r.recovered);
        assert!(r.recovered.iter().any(|d| d.order == 4));

        let one = FunctionHandle::new(FunctionKind::Constant(1.5));
        let r = regularity_propagation_suite(&one, StarMap::Negation, 1, 3).unwrap();
        assert!(r.recovered.iter().all(|d| d.recovered.norm() < 1e-9));

        let r = regularity_propagation_suite(&fun("exp_neg_sq"), StarMap::NegatedConjugate, 1, 3).unwrap();
        assert_eq!(r.verdict_label, RegularityVerdict::ConsistentWith, "{:?}", r.recovered);
    }

    #[test]
    fn chain_rule_sign() {
        // ∂²k/∂u∂v at u = v for f(t) = e^{-t²}, t = u - v, is -f''(0) = 2
        let g = lift(&fun("exp_neg_sq"), StarMap::Negation).unwrap();
        let e = mixed_partial_fd(&g.kernel, c(0.4), c(0.4), StepSequence::default(), PsiMode::Real, false).unwrap();
        assert!((e.estimate.re - 2.0).abs() < 1e-5);
    }
}
