//! Complex-field checks: directional difference quotients, Cauchy-type
//! contour formulas for increments and mixed partials, sesquiholomorphy
//! residuals, and the diagonal-to-global propagation suite.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::domain::{Domain, Field};
use crate::error::{Error, Result};
use crate::findiff::{beta_decay_trace, beta_trace_decays, path_slopes, BetaVariant, DecayTrace, StepSequence, DECAY_STEPS};
use crate::function::{FunctionHandle, FunctionKind};
use crate::kernel::KernelHandle;
use crate::rng::stream;
use crate::scalar::{re, ComplexScalar};

/// A holomorphic test function together with the disc it lives on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoloFunctionHandle {
    pub function: FunctionHandle,
    pub domain: Domain,
}

impl HoloFunctionHandle {
    /// `f` on its default disc: the open unit disc for `geometric`,
    /// radius 4 otherwise.
    pub fn new(function: FunctionHandle) -> Self {
        let radius = match function.kind {
            FunctionKind::Geometric => 1.0,
            _ => 4.0,
        };
        HoloFunctionHandle {
            function,
            domain: Domain::disc(Complex64::new(0.0, 0.0), radius),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(Self::new(FunctionHandle::by_name(name, &Default::default())?))
    }

    pub fn with_disc(function: FunctionHandle, center: Complex64, radius: f64) -> Result<Self> {
        let domain = Domain::disc(center, radius);
        domain.validate()?;
        if function.singularity_distance(center) < radius {
            return Err(Error::param("radius", "disc reaches a singularity of the function"));
        }
        Ok(HoloFunctionHandle { function, domain })
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if !self.domain.contains(z) || self.domain.distance_to_boundary(z) == 0.0 {
            return Err(Error::outside(z));
        }
        Ok(self.function.eval(z))
    }
}

/// Circle `|ζ - center| = radius` sampled at `nodes` equally spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourSpec {
    pub center: ComplexScalar,
    pub radius: f64,
    pub nodes: usize,
}

/// Default node count.
pub const DEFAULT_NODES: usize = 128;
/// Node counts are doubled until successive values agree to this relative level.
pub const QUADRATURE_TOL: f64 = 1e-13;
/// Upper limit on adaptive node counts.
pub const MAX_NODES: usize = 1 << 15;

impl ContourSpec {
    pub fn new(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param("radius", "must be positive"));
        }
        if nodes < 8 {
            return Err(Error::param("nodes", "need at least 8"));
        }
        Ok(ContourSpec {
            center: center.into(),
            radius,
            nodes,
        })
    }

    pub fn center(&self) -> Complex64 {
        self.center.into()
    }

    fn node(&self, k: usize, n: usize) -> Complex64 {
        self.center() + Complex64::from_polar(self.radius, TAU * k as f64 / n as f64)
    }
}

/// A contour integral and its bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourValue {
    #[serde(with = "crate::scalar::serde_c64_vec")]
    pub point: Vec<Complex64>,
    #[serde(with = "crate::scalar::serde_c64")]
    pub value: Complex64,
    /// Node count of the returned value.
    pub node_count: usize,
    /// Radius actually used.
    pub radius: f64,
    /// Set when the requested radius would have left the domain.
    pub adjusted_radius: Option<f64>,
    /// `|I(node_count) - I(node_count / 2)|`.
    pub doubling_delta: f64,
    /// The doubling change met [`QUADRATURE_TOL`] before [`MAX_NODES`].
    pub converged: bool,
}

/// Shrinks `c` to `0.8 ×` the distance from its center to the boundary of
/// `domain` when the closed contour disc would not fit inside.
fn fit_contour(c: ContourSpec, domain: &Domain) -> Result<(ContourSpec, Option<f64>)> {
    let center = c.center();
    if !domain.contains(center) {
        return Err(Error::OutsideContour {
            re: center.re,
            im: center.im,
        });
    }
    let room = domain.distance_to_boundary(center);
    if c.radius < room {
        return Ok((c, None));
    }
    let r = 0.8 * room;
    if r <= 0.0 {
        return Err(Error::OutsideContour {
            re: center.re,
            im: center.im,
        });
    }
    Ok((ContourSpec { radius: r, ..c }, Some(r)))
}

fn strictly_inside(c: &ContourSpec, z: Complex64) -> Result<()> {
    if (z - c.center()).norm() < c.radius {
        Ok(())
    } else {
        Err(Error::OutsideContour { re: z.re, im: z.im })
    }
}

/// Runs `rule(n)` for `n = floor, 2·floor, …` until two successive values agree.
fn adaptive<F: FnMut(usize) -> Result<Complex64>>(floor: usize, mut rule: F) -> Result<(Complex64, usize, f64, bool)> {
    let mut n = floor;
    let mut prev = rule(n)?;
    loop {
        let next = rule(2 * n)?;
        let d = (next - prev).norm();
        n *= 2;
        if d <= QUADRATURE_TOL * next.norm().max(1.0) {
            return Ok((next, n, d, true));
        }
        if 2 * n > MAX_NODES {
            return Ok((next, n, d, false));
        }
        prev = next;
    }
}

/// `(1/2πi) ∮_C f(ζ) / ((ζ - z)(ζ - z - h)) dζ` by the trapezoidal rule with
/// exactly `nodes` points. Equals `(f(z+h) - f(z)) / h` for `z, z+h` inside `C`.
pub fn contour_increment_fixed(
    f: &HoloFunctionHandle,
    z: Complex64,
    h: Complex64,
    c: &ContourSpec,
    nodes: usize,
) -> Result<Complex64> {
    let center = c.center();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let zeta = c.node(k, nodes);
        acc += f.eval(zeta)? * (zeta - center) / ((zeta - z) * (zeta - z - h));
    }
    Ok(acc / nodes as f64)
}

/// The contour form of the increment ratio `(f(z+h) - f(z)) / h`.
///
/// Node counts start at `c.nodes` and double until the value settles; the
/// contour is shrunk first if it would leave `f`'s disc.
pub fn contour_increment_ratio(
    f: &HoloFunctionHandle,
    z: Complex64,
    h: Complex64,
    c: ContourSpec,
) -> Result<ContourValue> {
    if h == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroStep);
    }
    let (c, adjusted_radius) = fit_contour(c, &f.domain)?;
    strictly_inside(&c, z)?;
    strictly_inside(&c, z + h)?;
    let (value, node_count, doubling_delta, converged) =
        adaptive(c.nodes, |n| contour_increment_fixed(f, z, h, &c, n))?;
    Ok(ContourValue {
        point: vec![z, h],
        value,
        node_count,
        radius: c.radius,
        adjusted_radius,
        doubling_delta,
        converged,
    })
}

/// Order of the nested sums in [`double_contour_mixed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureOrder {
    UFirst,
    VFirst,
}

fn double_contour_fixed(
    kernel: &KernelHandle,
    u: Complex64,
    v: Complex64,
    c1: &ContourSpec,
    c2: &ContourSpec,
    n: usize,
    order: QuadratureOrder,
) -> Result<Complex64> {
    // g(ζ1, ζ2) = k(ζ1, conj ζ2) is holomorphic in both variables; ζ2 runs
    // over the conjugate of c2, a circle around conj(v).
    let (a, b) = (u, v.conj());
    let c2b = c2.center().conj();
    let z1: Vec<Complex64> = (0..n).map(|k| c1.node(k, n)).collect();
    let z2: Vec<Complex64> = (0..n).map(|k| c2b + Complex64::from_polar(c2.radius, TAU * k as f64 / n as f64)).collect();
    let w1: Vec<Complex64> = z1.iter().map(|z| (z - c1.center()) / ((z - a) * (z - a))).collect();
    let w2: Vec<Complex64> = z2.iter().map(|z| (z - c2b) / ((z - b) * (z - b))).collect();
    let g = |i: usize, j: usize| kernel.eval(z1[i], z2[j].conj());
    let mut total = Complex64::new(0.0, 0.0);
    match order {
        QuadratureOrder::UFirst => {
            for j in 0..n {
                let mut inner = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    inner += g(i, j)? * w1[i];
                }
                total += inner * w2[j];
            }
        }
        QuadratureOrder::VFirst => {
            for i in 0..n {
                let mut inner = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    inner += g(i, j)? * w2[j];
                }
                total += inner * w1[i];
            }
        }
    }
    Ok(total / (n * n) as f64)
}

/// `∂²k/∂u∂v̄ (u, v)` from the nested Cauchy formula
/// `(2πi)^{-2} ∮∮ g(ζ1, ζ2) / ((ζ1 - u)² (ζ2 - v̄)²) dζ1 dζ2`.
///
/// `c1` is a circle around `u` and `c2` a circle around `v`, both in the
/// kernel's disc; they are shrunk if they would leave it.
pub fn double_contour_mixed(
    kernel: &KernelHandle,
    u: Complex64,
    v: Complex64,
    c1: ContourSpec,
    c2: ContourSpec,
    order: QuadratureOrder,
) -> Result<ContourValue> {
    if kernel.field() != Field::Complex {
        return Err(Error::ComplexFieldRequired);
    }
    let domain = kernel.domain();
    if !domain.is_continuum() {
        return Err(Error::param("domain", "contours need a disc domain"));
    }
    let (c1, a1) = fit_contour(c1, domain)?;
    let (c2, a2) = fit_contour(c2, domain)?;
    strictly_inside(&c1, u)?;
    strictly_inside(&c2, v)?;
    let floor = c1.nodes.max(c2.nodes);
    let (value, node_count, doubling_delta, converged) =
        adaptive(floor, |n| double_contour_fixed(kernel, u, v, &c1, &c2, n, order))?;
    Ok(ContourValue {
        point: vec![u, v],
        value,
        node_count,
        radius: c1.radius.min(c2.radius),
        adjusted_radius: a1.or(a2),
        doubling_delta,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WirtingerMode {
    /// Quotients over `h`.
    Holomorphic,
    /// Quotients over `conj(h)`.
    Antiholomorphic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WirtingerEstimate {
    #[serde(with = "crate::scalar::serde_c64")]
    pub estimate: Complex64,
    /// Largest disagreement between the four directional quotients, per step.
    pub disagreement: DecayTrace,
}

/// Directional quotients of `f` at `a` along `±h_j, ±i·h_j`.
pub fn wirtinger_fd(
    f: &HoloFunctionHandle,
    a: Complex64,
    seq: StepSequence,
    which: WirtingerMode,
) -> Result<WirtingerEstimate> {
    let dirs = [re(1.0), re(-1.0), Complex64::i(), -Complex64::i()];
    let fa = f.eval(a)?;
    let steps = seq.steps();
    let mut spread = Vec::with_capacity(steps.len());
    let mut last = [Complex64::new(0.0, 0.0); 4];
    for &h in &steps {
        for (q, d) in last.iter_mut().zip(dirs) {
            let dh = d * h;
            let den = match which {
                WirtingerMode::Holomorphic => dh,
                WirtingerMode::Antiholomorphic => dh.conj(),
            };
            *q = (f.eval(a + dh)? - fa) / den;
        }
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                worst = worst.max((last[i] - last[j]).norm());
            }
        }
        spread.push(worst);
    }
    Ok(WirtingerEstimate {
        estimate: last.iter().sum::<Complex64>() / 4.0,
        disagreement: DecayTrace::new(steps, spread)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SesquiReport {
    #[serde(with = "crate::scalar::serde_c64")]
    pub u: Complex64,
    #[serde(with = "crate::scalar::serde_c64")]
    pub v: Complex64,
    pub step: f64,
    /// `|q_1 - q_i|` for the `u`-quotients over `h`.
    pub cr_residual_u: f64,
    /// `|q_1 - q_i|` for the `v`-quotients over `conj(h)`.
    pub anticr_residual_v: f64,
    /// `max(1, |quotients|)`.
    pub scale: f64,
}

/// Relative residual below which a point counts as sesquiholomorphic.
pub const SESQUI_TOL: f64 = 1e-6;

impl SesquiReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.cr_residual_u <= tol * self.scale && self.anticr_residual_v <= tol * self.scale
    }
}

/// Centered directional quotients over the directions `1` and `i`.
pub fn sesqui_check(kernel: &KernelHandle, u: Complex64, v: Complex64, step: f64) -> Result<SesquiReport> {
    if kernel.field() != Field::Complex {
        return Err(Error::ComplexFieldRequired);
    }
    if !(step > 0.0) {
        return Err(Error::ZeroStep);
    }
    let mut qu = [Complex64::new(0.0, 0.0); 2];
    let mut qv = [Complex64::new(0.0, 0.0); 2];
    for (i, d) in [re(1.0), Complex64::i()].into_iter().enumerate() {
        let dh = d * step;
        qu[i] = (kernel.eval(u + dh, v)? - kernel.eval(u - dh, v)?) / (2.0 * dh);
        qv[i] = (kernel.eval(u, v + dh)? - kernel.eval(u, v - dh)?) / (2.0 * dh.conj());
    }
    let scale = qu.iter().chain(&qv).fold(1.0f64, |m, q| m.max(q.norm()));
    Ok(SesquiReport {
        u,
        v,
        step,
        cr_residual_u: (qu[0] - qu[1]).norm(),
        anticr_residual_v: (qv[0] - qv[1]).norm(),
        scale,
    })
}

/// Step used by the propagation suite's sesquiholomorphy checks.
pub const SESQUI_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HoloVerdict {
    /// Band hypothesis and sampled far-field conclusion both hold.
    ConsistentWith,
    /// The diagonal band fails the hypothesis; no conclusion is drawn.
    HypothesisNotMet,
    /// The hypothesis holds but some far pair fails.
    Contradicts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarPairEvidence {
    pub sesqui: SesquiReport,
    pub decays: bool,
    pub traces: Vec<DecayTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoloSuiteReport {
    pub kernel: String,
    pub band_halfwidth: f64,
    pub seed: u64,
    pub band: Vec<SesquiReport>,
    pub hypothesis_holds: bool,
    /// Empty when the hypothesis fails.
    pub far: Vec<FarPairEvidence>,
    pub conclusion_holds: Option<bool>,
    pub verdict: HoloVerdict,
}

/// Checks sesquiholomorphy on `far_pairs` seeded pairs inside the diagonal
/// band, then, only if that holds, `β₀` decay along every path slope and
/// sesquiholomorphy at `far_pairs` seeded pairs far from the diagonal.
pub fn holo_propagation_suite(
    kernel: &KernelHandle,
    band_halfwidth: f64,
    far_pairs: usize,
    seed: u64,
) -> Result<HoloSuiteReport> {
    if kernel.field() != Field::Complex {
        return Err(Error::ComplexFieldRequired);
    }
    if !(band_halfwidth > 0.0) {
        return Err(Error::param("band", "must be positive"));
    }
    let domain = kernel.domain();
    let margin = band_halfwidth + 2.0 * DECAY_STEPS.h0;
    let mut rng = stream(seed, 0);
    let mut band = Vec::with_capacity(far_pairs);
    for _ in 0..far_pairs {
        let u = domain.sample_inner(&mut rng, margin);
        let off = if domain.is_continuum() {
            Complex64::from_polar(band_halfwidth * rng.random::<f64>(), rng.random_range(0.0..TAU))
        } else {
            Complex64::new(0.0, 0.0)
        };
        band.push(sesqui_check(kernel, u, u + off, SESQUI_STEP)?);
    }
    let hypothesis_holds = band.iter().all(|r| r.passes(SESQUI_TOL));

    let mut far = Vec::new();
    let mut conclusion_holds = None;
    if hypothesis_holds {
        let gap = domain.width() / 4.0;
        for _ in 0..far_pairs {
            let mut pair = (domain.sample_inner(&mut rng, margin), domain.sample_inner(&mut rng, margin));
            for _ in 0..64 {
                if (pair.0 - pair.1).norm() >= gap {
                    break;
                }
                pair = (domain.sample_inner(&mut rng, margin), domain.sample_inner(&mut rng, margin));
            }
            let (u, v) = pair;
            let k_mag = kernel.eval(u, v)?.norm();
            let traces = path_slopes(Field::Complex)
                .into_iter()
                .map(|s| beta_decay_trace(kernel, u, v, DECAY_STEPS, BetaVariant::Beta0, s))
                .collect::<Result<Vec<_>>>()?;
            far.push(FarPairEvidence {
                sesqui: sesqui_check(kernel, u, v, SESQUI_STEP)?,
                decays: traces
                    .iter()
                    .all(|t| beta_trace_decays(t, BetaVariant::Beta0, DECAY_STEPS, k_mag, 1e-4)),
                traces,
            });
        }
        conclusion_holds = Some(far.iter().all(|e| e.decays && e.sesqui.passes(SESQUI_TOL)));
    }
    let verdict = match conclusion_holds {
        None => HoloVerdict::HypothesisNotMet,
        Some(true) => HoloVerdict::ConsistentWith,
        Some(false) => HoloVerdict::Contradicts,
    };
    Ok(HoloSuiteReport {
        kernel: kernel.label(),
        band_halfwidth,
        seed,
        band,
        hypothesis_holds,
        far,
        conclusion_holds,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{make_kernel, KernelSpec};

    fn k(name: &str) -> KernelHandle {
        make_kernel(&KernelSpec::builtin(name)).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        re(x)
    }

    fn origin(r: f64, n: usize) -> ContourSpec {
        ContourSpec::new(c(0.0), r, n).unwrap()
    }

    #[test]
    fn increment_ratio_examples() {
        let sq = HoloFunctionHandle::by_name("square").unwrap();
        let r = contour_increment_ratio(&sq, c(0.0), c(0.1), origin(1.0, 64)).unwrap();
        assert!((r.value - c(0.1)).norm() < 1e-10);

        let geo = HoloFunctionHandle::by_name("geometric").unwrap();
        let r = contour_increment_ratio(&geo, c(0.0), c(0.5), origin(0.9, 128)).unwrap();
        assert!((r.value - c(2.0)).norm() < 1e-8, "{r:?}");
        assert!(r.node_count > 128);
        assert!(r.converged);

        let one = HoloFunctionHandle::new(FunctionHandle::new(FunctionKind::Constant(3.0)));
        let r = contour_increment_ratio(&one, c(0.2), Complex64::new(0.1, 0.3), origin(1.0, 64)).unwrap();
        assert!(r.value.norm() < 1e-12);
    }

    #[test]
    fn fixed_node_count_converges_spectrally() {
        // the trapezoid error decays like (0.9)^N for the geometric function
        let geo = HoloFunctionHandle::by_name("geometric").unwrap();
        let c0 = origin(0.9, 8);
        let errs: Vec<f64> = [64, 128, 256, 512]
            .iter()
            .map(|&n| (contour_increment_fixed(&geo, c(0.0), c(0.5), &c0, n).unwrap() - c(2.0)).norm())
            .collect();
        assert!(errs[0] > 1e-4 && errs[1] > 1e-8, "{errs:?}");
        assert!(errs[2] < 1e-10 && errs[3] < 1e-14, "{errs:?}");
    }

    #[test]
    fn contour_errors_and_shrinking() {
        let geo = HoloFunctionHandle::by_name("geometric").unwrap();
        assert!(matches!(
            contour_increment_ratio(&geo, c(0.0), c(0.5), origin(0.4, 64)),
            Err(Error::OutsideContour { .. })
        ));
        let r = contour_increment_ratio(&geo, c(0.0), c(0.3), origin(1.5, 64)).unwrap();
        assert_eq!(r.adjusted_radius, Some(0.8));
        assert!((r.value - c((1.0 / 0.7 - 1.0) / 0.3)).norm() < 1e-10);
        assert_eq!(
            contour_increment_ratio(&geo, c(0.0), c(0.0), origin(0.5, 64)).unwrap_err(),
            Error::ZeroStep
        );
    }

    #[test]
    fn double_contour_examples() {
        let s = k("szego");
        let cs = |z: Complex64| ContourSpec::new(z, 0.5, 64).unwrap();
        let r = double_contour_mixed(&s, c(0.0), c(0.0), cs(c(0.0)), cs(c(0.0)), QuadratureOrder::UFirst).unwrap();
        assert!((r.value - c(1.0)).norm() < 1e-8);

        let (u, v) = (c(0.3), c(0.2));
        let w = u * v.conj();
        let want = (1.0 + w) / (1.0 - w).powi(3);
        assert!((want.re - 1.2762105).abs() < 1e-7);
        let a = double_contour_mixed(&s, u, v, cs(u), cs(v), QuadratureOrder::UFirst).unwrap();
        let b = double_contour_mixed(&s, u, v, cs(u), cs(v), QuadratureOrder::VFirst).unwrap();
        assert!((a.value - want).norm() < 1e-6);
        assert!((a.value - b.value).norm() < 1e-10);
        assert_eq!(a.adjusted_radius, None);
        let wide = ContourSpec::new(u, 0.7, 64).unwrap();
        let r = double_contour_mixed(&s, u, v, wide, cs(v), QuadratureOrder::UFirst).unwrap();
        assert!((r.adjusted_radius.unwrap() - 0.48).abs() < 1e-12);
        assert!((r.value - want).norm() < 1e-6);

        let one = make_kernel(&KernelSpec::builtin("constant").with_field(Field::Complex)).unwrap();
        let r = double_contour_mixed(&one, c(0.1), c(0.1), cs(c(0.1)), cs(c(0.1)), QuadratureOrder::UFirst).unwrap();
        assert!(r.value.norm() < 1e-12);
    }

    #[test]
    fn wirtinger_examples() {
        let sq = HoloFunctionHandle::by_name("square").unwrap();
        let seq = StepSequence::default();
        let e = wirtinger_fd(&sq, c(0.0), seq, WirtingerMode::Holomorphic).unwrap();
        assert!(e.estimate.norm() < 1e-3);
        assert!(e.disagreement.final_value < 1e-3);

        let e = wirtinger_fd(&sq, c(0.5), seq, WirtingerMode::Holomorphic).unwrap();
        assert!((e.estimate - c(1.0)).norm() < 1e-12);
        let a = wirtinger_fd(&sq, c(0.5), seq, WirtingerMode::Antiholomorphic).unwrap();
        // quotient 2a·d/conj(d) + O(h): +1 along ±1, -1 along ±i
        assert!((a.disagreement.final_value - 2.0).abs() < 1e-2);

        let one = HoloFunctionHandle::new(FunctionHandle::new(FunctionKind::Constant(2.0)));
        for m in [WirtingerMode::Holomorphic, WirtingerMode::Antiholomorphic] {
            let e = wirtinger_fd(&one, c(0.3), seq, m).unwrap();
            assert_eq!(e.estimate, c(0.0));
        }
    }

    #[test]
    fn sesqui_examples() {
        let r = sesqui_check(&k("szego"), c(0.3), c(0.2), 1e-4).unwrap();
        assert!(r.cr_residual_u < 1e-6 && r.anticr_residual_v < 1e-6, "{r:?}");
        let r = sesqui_check(&k("re_product"), c(0.3), Complex64::new(0.0, 0.2), 1e-4).unwrap();
        assert!(r.cr_residual_u > 0.1, "{r:?}");
        let one = make_kernel(&KernelSpec::builtin("constant").with_field(Field::Complex)).unwrap();
        let r = sesqui_check(&one, c(0.3), c(0.2), 1e-4).unwrap();
        assert_eq!((r.cr_residual_u, r.anticr_residual_v), (0.0, 0.0));
        assert_eq!(sesqui_check(&k("gaussian"), c(0.0), c(0.0), 1e-4).unwrap_err(), Error::ComplexFieldRequired);
    }

    #[test]
    fn propagation_suite_examples() {
        let r = holo_propagation_suite(&k("szego"), 0.05, 6, 1).unwrap();
        assert_eq!(r.verdict, HoloVerdict::ConsistentWith);
        let r = holo_propagation_suite(&k("re_product"), 0.05, 6, 1).unwrap();
        assert_eq!(r.verdict, HoloVerdict::HypothesisNotMet);
        assert!(r.far.is_empty());
        let one = make_kernel(&KernelSpec::builtin("constant").with_field(Field::Complex)).unwrap();
        let r = holo_propagation_suite(&one, 0.05, 4, 1).unwrap();
        assert_eq!(r.verdict, HoloVerdict::ConsistentWith);
    }
}
