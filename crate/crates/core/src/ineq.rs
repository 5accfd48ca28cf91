//! Three-, four- and five-point inequalities as explicit witnesses.
//!
//! Every witness stores the terms of its inequality and the signed defect
//! `RHS - LHS`; a nonnegative defect means the inequality holds at that
//! instance. The free coefficient `η` of the underlying quadratic forms is
//! already optimized out, so each witness is a Cauchy–Schwarz-type
//! statement `|β|² ≤ k(u,u) γ` or `|B|² ≤ A C`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Domain, Field};
use crate::error::{Error, Result};
use crate::findiff::delta;
use crate::kernel::KernelHandle;
use crate::rng::stream;
use crate::scalar::{re, ComplexScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    ThreePoint,
    FourPoint,
    FourPointShifted,
    FivePoint,
    Block,
}

impl InequalityKind {
    pub const ALL: [InequalityKind; 5] = [
        InequalityKind::ThreePoint,
        InequalityKind::FourPoint,
        InequalityKind::FourPointShifted,
        InequalityKind::FivePoint,
        InequalityKind::Block,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityWitness {
    pub name: InequalityKind,
    pub inputs: BTreeMap<String, ComplexScalar>,
    pub terms: BTreeMap<String, ComplexScalar>,
    /// `RHS - LHS`.
    pub defect: f64,
    /// `k(u,u) = 0`: the defect reduces to `-|β|²`.
    pub degenerate: bool,
    /// `max(1, |k|)` over the kernel values involved.
    pub scale: f64,
}

impl InequalityWitness {
    fn new(name: InequalityKind) -> Self {
        InequalityWitness {
            name,
            inputs: BTreeMap::new(),
            terms: BTreeMap::new(),
            defect: 0.0,
            degenerate: false,
            scale: 1.0,
        }
    }

    fn input(&mut self, key: &str, z: Complex64) {
        self.inputs.insert(key.to_string(), z.into());
    }

    fn term(&mut self, key: &str, z: Complex64) {
        self.terms.insert(key.to_string(), z.into());
    }

    pub fn term_value(&self, key: &str) -> Option<Complex64> {
        self.terms.get(key).copied().map(Into::into)
    }

    /// The defect recomputed from the stored terms alone.
    pub fn recompute_defect(&self) -> f64 {
        let t = |k: &str| self.term_value(k).unwrap_or_default();
        match self.name {
            InequalityKind::ThreePoint => {
                let lhs = (t("k(x1,x2)") - t("k(x1,x3)")).norm_sqr();
                let rhs = t("k(x1,x1)").re
                    * 2.0
                    * ((t("k(x2,x2)") + t("k(x3,x3)")) * 0.5 - t("k(x2,x3)")).re;
                rhs - lhs
            }
            InequalityKind::FourPoint => t("k(u,u)").re * t("γ").re - t("β0").norm_sqr(),
            InequalityKind::FourPointShifted => {
                t("k(u,u)").re * t("γ0_shifted").re - t("β0_shifted").norm_sqr()
            }
            InequalityKind::FivePoint | InequalityKind::Block => {
                t("A_form").re * t("C_form").re - t("B_form").norm_sqr()
            }
        }
    }

    pub fn relative_defect(&self) -> f64 {
        self.defect / self.scale
    }

    /// `defect >= -tol · scale`.
    pub fn holds(&self, tol: f64) -> bool {
        self.defect >= -tol * self.scale
    }
}

fn scale_of(values: &[Complex64]) -> f64 {
    values.iter().fold(1.0, |m, z| m.max(z.norm()))
}

fn nonzero(h: Complex64) -> Result<()> {
    if h == Complex64::new(0.0, 0.0) {
        Err(Error::ZeroStep)
    } else {
        Ok(())
    }
}

/// `|k(x1,x2) - k(x1,x3)|² ≤ k(x1,x1) · 2 Re((k(x2,x2) + k(x3,x3))/2 - k(x2,x3))`.
pub fn three_point_defect(
    kernel: &KernelHandle,
    x1: Complex64,
    x2: Complex64,
    x3: Complex64,
) -> Result<InequalityWitness> {
    let k11 = kernel.eval(x1, x1)?;
    let k12 = kernel.eval(x1, x2)?;
    let k13 = kernel.eval(x1, x3)?;
    let k22 = kernel.eval(x2, x2)?;
    let k33 = kernel.eval(x3, x3)?;
    let k23 = kernel.eval(x2, x3)?;
    let lhs = (k12 - k13).norm_sqr();
    let rhs = k11.re * 2.0 * ((k22 + k33) * 0.5 - k23).re;

    let mut w = InequalityWitness::new(InequalityKind::ThreePoint);
    w.input("x1", x1);
    w.input("x2", x2);
    w.input("x3", x3);
    for (name, v) in [
        ("k(x1,x1)", k11),
        ("k(x1,x2)", k12),
        ("k(x1,x3)", k13),
        ("k(x2,x2)", k22),
        ("k(x3,x3)", k33),
        ("k(x2,x3)", k23),
    ] {
        w.term(name, v);
    }
    w.term("LHS", re(lhs));
    w.term("RHS", re(rhs));
    w.defect = rhs - lhs;
    w.degenerate = k11 == Complex64::new(0.0, 0.0);
    w.scale = scale_of(&[k11, k12, k13, k22, k33, k23]);
    Ok(w)
}

/// `β₀(h,l) = k(u,v+h)/h̄ + k(u,v)(1/l̄ - 1/h̄) - k(u,v+l)/l̄`.
pub fn beta0(kernel: &KernelHandle, u: Complex64, v: Complex64, h: Complex64, l: Complex64) -> Result<Complex64> {
    nonzero(h)?;
    nonzero(l)?;
    let (hb, lb) = (h.conj(), l.conj());
    Ok(kernel.eval(u, v + h)? / hb + kernel.eval(u, v)? * (lb.inv() - hb.inv())
        - kernel.eval(u, v + l)? / lb)
}

/// `γ(h,l)`, the quadratic form of the step coefficients
/// `(1/h, 1/l - 1/h, -1/l)` at `(v+h, v, v+l)`, written with the
/// Hermitian pairing of off-diagonal terms.
pub fn gamma(kernel: &KernelHandle, v: Complex64, h: Complex64, l: Complex64) -> Result<Complex64> {
    nonzero(h)?;
    nonzero(l)?;
    let k = |a: Complex64, b: Complex64| kernel.eval(a, b);
    let (hi, li) = (h.inv(), l.inv());
    let (hbi, lbi) = (h.conj().inv(), l.conj().inv());
    // Coefficients are formed as the same products that appear in the cross
    // terms, so coincident steps cancel exactly.
    let diag = k(v + h, v + h)? * hi * hbi
        + k(v, v)? * (li - hi) * (lbi - hbi)
        + k(v + l, v + l)? * li * lbi;
    let cross = k(v + h, v)? * hi * (lbi - hbi)
        + k(v + h, v + l)? * hi * (-lbi)
        + k(v, v + l)? * (li - hi) * (-lbi);
    Ok(diag + 2.0 * cross.re)
}

/// `β⁰(h,l) = (k(u,v+h) - k(u,v))/h - (k(u,v+h+l) - k(u,v+h))/l`.
pub fn beta0_shifted(kernel: &KernelHandle, u: Complex64, v: Complex64, h: f64, l: f64) -> Result<Complex64> {
    if h == 0.0 || l == 0.0 {
        return Err(Error::ZeroStep);
    }
    let k = |b: Complex64| kernel.eval(u, b);
    Ok((k(v + h)? - k(v)?) / h - (k(v + h + l)? - k(v + h)?) / l)
}

/// `γ⁰(h,l)`, the quadratic form of `(-1/h, 1/h + 1/l, -1/l)` at
/// `(v, v+h, v+h+l)`.
pub fn gamma_shifted(kernel: &KernelHandle, v: Complex64, h: f64, l: f64) -> Result<Complex64> {
    if h == 0.0 || l == 0.0 {
        return Err(Error::ZeroStep);
    }
    let k = |a: Complex64, b: Complex64| kernel.eval(a, b);
    let (p0, p1, p2) = (v, v + h, v + h + l);
    let s = 1.0 / h + 1.0 / l;
    let diag = k(p0, p0)? / (h * h) + k(p1, p1)? * (s * s) + k(p2, p2)? / (l * l);
    let cross = k(p0, p1)? * (-1.0 / h) * s + k(p0, p2)? / (h * l) + k(p1, p2)? * (-1.0 / l) * s;
    Ok(diag + 2.0 * cross.re)
}

/// `|β₀(h,l)|² ≤ k(u,u) γ(h,l)` at the points `u, v+h, v, v+l`.
pub fn four_point_witness(
    kernel: &KernelHandle,
    u: Complex64,
    v: Complex64,
    h: Complex64,
    l: Complex64,
) -> Result<InequalityWitness> {
    let kuu = kernel.eval(u, u)?;
    let b = beta0(kernel, u, v, h, l)?;
    let g = gamma(kernel, v, h, l)?;
    let mut w = InequalityWitness::new(InequalityKind::FourPoint);
    w.input("u", u);
    w.input("v", v);
    w.input("h", h);
    w.input("l", l);
    w.term("k(u,u)", kuu);
    w.term("β0", b);
    w.term("γ", g);
    finish_cauchy(&mut w, kuu, b, g);
    w.scale = involved_scale(kernel, &[u, v + h, v, v + l])?;
    Ok(w)
}

/// `|β⁰(h,l)|² ≤ k(u,u) γ⁰(h,l)` at the points `u, v, v+h, v+h+l` (real field).
pub fn four_point_shifted_witness(
    kernel: &KernelHandle,
    u: Complex64,
    v: Complex64,
    h: f64,
    l: f64,
) -> Result<InequalityWitness> {
    if kernel.field() != Field::Real {
        return Err(Error::RealFieldRequired);
    }
    let kuu = kernel.eval(u, u)?;
    let b = beta0_shifted(kernel, u, v, h, l)?;
    let g = gamma_shifted(kernel, v, h, l)?;
    let mut w = InequalityWitness::new(InequalityKind::FourPointShifted);
    w.input("u", u);
    w.input("v", v);
    w.input("h", re(h));
    w.input("l", re(l));
    w.term("k(u,u)", kuu);
    w.term("β0_shifted", b);
    w.term("γ0_shifted", g);
    finish_cauchy(&mut w, kuu, b, g);
    w.scale = involved_scale(kernel, &[u, v, v + h, v + h + l])?;
    Ok(w)
}

fn finish_cauchy(w: &mut InequalityWitness, kuu: Complex64, b: Complex64, g: Complex64) {
    if kuu == Complex64::new(0.0, 0.0) {
        w.degenerate = true;
        w.defect = -b.norm_sqr();
    } else {
        w.defect = kuu.re * g.re - b.norm_sqr();
    }
}

fn involved_scale(kernel: &KernelHandle, pts: &[Complex64]) -> Result<f64> {
    let mut s: f64 = 1.0;
    for &a in pts {
        for &b in pts {
            s = s.max(kernel.eval(a, b)?.norm());
        }
    }
    Ok(s)
}

/// `|z^T B w̄|² ≤ (z^T A z̄)(w^T C w̄)` for a PSD matrix `T = [[A, B], [D, C]]`
/// with `A` of order `z.len()`.
pub fn block_psd_inequality(
    t: &DMatrix<Complex64>,
    r1: usize,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<InequalityWitness> {
    let n = t.nrows();
    if t.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t.ncols(),
        });
    }
    if z.len() != r1 {
        return Err(Error::DimensionMismatch {
            expected: r1,
            got: z.len(),
        });
    }
    if r1 + w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r1 + w.len(),
        });
    }
    let scale = t.iter().fold(1.0f64, |m, x| m.max(x.norm()));
    let defect = crate::kernel::hermitian_defect(t);
    if defect > 1e-10 * scale {
        return Err(Error::NonHermitian(defect));
    }
    let form = |rows: &[Complex64], r0: usize, cols: &[Complex64], c0: usize| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in rows.iter().enumerate() {
            for (j, b) in cols.iter().enumerate() {
                acc += a * t[(r0 + i, c0 + j)] * b.conj();
            }
        }
        acc
    };
    let a_form = form(z, 0, z, 0);
    let b_form = form(z, 0, w, r1);
    let c_form = form(w, r1, w, r1);

    let mut wit = InequalityWitness::new(InequalityKind::Block);
    wit.input("r1", re(r1 as f64));
    wit.input("r2", re(w.len() as f64));
    for (i, zi) in z.iter().enumerate() {
        wit.input(&format!("z{}", i + 1), *zi);
    }
    for (i, wi) in w.iter().enumerate() {
        wit.input(&format!("w{}", i + 1), *wi);
    }
    wit.term("A_form", a_form);
    wit.term("B_form", b_form);
    wit.term("C_form", c_form);
    wit.defect = a_form.re * c_form.re - b_form.norm_sqr();
    wit.scale = scale;
    Ok(wit)
}

/// Five-point witness on `u, u+λ, v+h, v, v+l` (real field):
/// `|(β_λ - β₀)/λ|² ≤ (Δ_{λλ} k(u,u)/λ²) · γ(h,l)`.
pub fn five_point_witness(
    kernel: &KernelHandle,
    u: Complex64,
    v: Complex64,
    lambda: f64,
    h: f64,
    l: f64,
) -> Result<InequalityWitness> {
    if kernel.field() != Field::Real {
        return Err(Error::RealFieldRequired);
    }
    if lambda == 0.0 || h == 0.0 || l == 0.0 {
        return Err(Error::ZeroStep);
    }
    let (lam, hc, lc) = (re(lambda), re(h), re(l));
    let a_form = delta(kernel, u, u, lam, lam)? / (lambda * lambda);
    let b_lambda = beta0(kernel, u + lam, v, hc, lc)?;
    let b_zero = beta0(kernel, u, v, hc, lc)?;
    let b_form = (b_lambda - b_zero) / lambda;
    let c_form = gamma(kernel, v, hc, lc)?;

    let mut w = InequalityWitness::new(InequalityKind::FivePoint);
    w.input("u", u);
    w.input("v", v);
    w.input("λ", lam);
    w.input("h", hc);
    w.input("l", lc);
    w.term("A_form", a_form);
    w.term("B_form", b_form);
    w.term("C_form", c_form);
    w.term("β_λ", b_lambda);
    w.term("β0", b_zero);
    w.term("γ", c_form);
    w.defect = a_form.re * c_form.re - b_form.norm_sqr();
    w.scale = involved_scale(kernel, &[u, u + lam, v + hc, v, v + lc])?;
    Ok(w)
}

/// The four-point inequality obtained through [`block_psd_inequality`] on the
/// Gram matrix at `u, v+h, v, v+l` with `z = (1)` and
/// `w = (1/h, 1/l - 1/h, -1/l)`. Algebraically the same statement as
/// [`four_point_witness`]; `C_form` here is the raw quadratic form.
pub fn four_point_via_block(
    kernel: &KernelHandle,
    u: Complex64,
    v: Complex64,
    h: Complex64,
    l: Complex64,
) -> Result<InequalityWitness> {
    nonzero(h)?;
    nonzero(l)?;
    let g = kernel.gram(&[u, v + h, v, v + l])?;
    let w = [h.inv(), l.inv() - h.inv(), -l.inv()];
    let mut wit = block_psd_inequality(&g.entries, 1, &[re(1.0)], &w)?;
    wit.input("u", u);
    wit.input("v", v);
    wit.input("h", h);
    wit.input("l", l);
    Ok(wit)
}

/// How suites choose steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum StepChoice {
    /// Random magnitudes, log-uniform in `[0.003, 0.05] · width(domain)`,
    /// random signs (random phases on discs).
    Random,
    /// The same steps at every draw. Three-point triples become
    /// `(u, v+h, v+l)`; the shifted witness uses `shifted_l`.
    Fixed {
        h: f64,
        l: f64,
        shifted_l: f64,
        lambda: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindSummary {
    pub name: InequalityKind,
    pub evaluated: usize,
    pub violations: usize,
    pub worst_relative_defect: f64,
    pub worst: Option<InequalityWitness>,
    /// Largest `|defect - recompute_defect()|` (self-consistency).
    pub max_recompute_gap: f64,
}

impl KindSummary {
    fn new(name: InequalityKind) -> Self {
        KindSummary {
            name,
            evaluated: 0,
            violations: 0,
            worst_relative_defect: f64::INFINITY,
            worst: None,
            max_recompute_gap: 0.0,
        }
    }

    fn absorb(&mut self, w: InequalityWitness, tol: f64) {
        self.evaluated += 1;
        if !w.holds(tol) {
            self.violations += 1;
        }
        self.max_recompute_gap = self.max_recompute_gap.max((w.defect - w.recompute_defect()).abs());
        let rel = w.relative_defect();
        if rel < self.worst_relative_defect {
            self.worst_relative_defect = rel;
            self.worst = Some(w);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IneqSuiteReport {
    pub kernel: String,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub steps: StepChoice,
    pub summaries: Vec<KindSummary>,
}

impl IneqSuiteReport {
    pub fn violations(&self) -> usize {
        self.summaries.iter().map(|s| s.violations).sum()
    }

    pub fn summary(&self, kind: InequalityKind) -> Option<&KindSummary> {
        self.summaries.iter().find(|s| s.name == kind)
    }
}

/// Default defect tolerance, relative to the witness scale.
pub const DEFAULT_DEFECT_TOL: f64 = 1e-8;

pub(crate) struct Draw {
    pub u: Complex64,
    pub v: Complex64,
    pub h: Complex64,
    pub l: Complex64,
    pub lambda: f64,
    pub shifted_l: f64,
    pub x: [Complex64; 3],
}

pub(crate) fn random_step<R: Rng>(rng: &mut R, width: f64, field: Field) -> Complex64 {
    let mag = width * (0.003f64.ln() + rng.random::<f64>() * (0.05f64 / 0.003).ln()).exp();
    match field {
        Field::Real => re(if rng.random::<bool>() { mag } else { -mag }),
        Field::Complex => Complex64::from_polar(mag, rng.random_range(0.0..std::f64::consts::TAU)),
    }
}

pub(crate) fn draw<R: Rng>(rng: &mut R, domain: &Domain, field: Field, steps: StepChoice) -> Draw {
    let width = domain.width();
    let (h, l, lambda, shifted_l) = match steps {
        StepChoice::Random => {
            let h = random_step(rng, width, field);
            let l = random_step(rng, width, field);
            let lam = random_step(rng, width, Field::Real).re;
            let sl = random_step(rng, width, Field::Real).re;
            (h, l, lam, sl)
        }
        StepChoice::Fixed {
            h,
            l,
            shifted_l,
            lambda,
        } => (re(h), re(l), lambda, shifted_l),
    };
    let reach = h.norm() + l.norm() + lambda.abs() + shifted_l.abs();
    let u = domain.sample_inner(rng, reach);
    let v = domain.sample_inner(rng, reach);
    let x = match steps {
        StepChoice::Random => [domain.sample(rng), domain.sample(rng), domain.sample(rng)],
        StepChoice::Fixed { .. } => [u, v + h, v + l],
    };
    Draw {
        u,
        v,
        h,
        l,
        lambda,
        shifted_l,
        x,
    }
}

/// Random draws on a finite point set: steps are differences of stored points.
pub(crate) fn draw_on_points<R: Rng>(rng: &mut R, pts: &[Complex64]) -> Option<Draw> {
    let mut pick = || pts[rng.random_range(0..pts.len())];
    let (u, v, a, b, c) = (pick(), pick(), pick(), pick(), pick());
    let (h, l) = (a - v, b - v);
    if h == Complex64::new(0.0, 0.0) || l == Complex64::new(0.0, 0.0) {
        return None;
    }
    Some(Draw {
        u,
        v,
        h,
        l,
        lambda: (c - u).re,
        shifted_l: (b - a).re,
        x: [u, a, b],
    })
}

pub(crate) fn points_of(domain: &Domain) -> Option<Vec<Complex64>> {
    match domain {
        Domain::Points { points } => Some(points.iter().copied().map(Into::into).collect()),
        _ => None,
    }
}

/// Seeded evaluation of every applicable witness over `trials` draws.
///
/// Real-field kernels get the three-point, four-point, shifted four-point
/// and five-point witnesses; complex-field kernels the first two. The block
/// inequality is matrix-level and has its own [`block_suite`].
pub fn ineq_suite(
    kernel: &KernelHandle,
    trials: usize,
    seed: u64,
    steps: StepChoice,
    tol: f64,
) -> Result<IneqSuiteReport> {
    let real = kernel.field() == Field::Real;
    let domain = kernel.domain().clone();
    let grid_points = points_of(&domain);
    let per_trial: Vec<Vec<InequalityWitness>> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<InequalityWitness>> {
            let mut rng = stream(seed, t as u64);
            let d = match &grid_points {
                Some(p) => match draw_on_points(&mut rng, p) {
                    Some(d) => d,
                    None => return Ok(Vec::new()),
                },
                None => draw(&mut rng, &domain, kernel.field(), steps),
            };
            let mut out = vec![three_point_defect(kernel, d.x[0], d.x[1], d.x[2])?];
            out.push(four_point_witness(kernel, d.u, d.v, d.h, d.l)?);
            if real {
                let on_grid = grid_points.is_some();
                if !on_grid || (d.shifted_l != 0.0) {
                    if let Ok(w) = four_point_shifted_witness(kernel, d.u, d.v, d.h.re, d.shifted_l) {
                        out.push(w);
                    } else if !on_grid {
                        four_point_shifted_witness(kernel, d.u, d.v, d.h.re, d.shifted_l)?;
                    }
                }
                if !on_grid || d.lambda != 0.0 {
                    match five_point_witness(kernel, d.u, d.v, d.lambda, d.h.re, d.l.re) {
                        Ok(w) => out.push(w),
                        Err(e) if !on_grid => return Err(e),
                        Err(_) => {}
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut summaries: BTreeMap<InequalityKind, KindSummary> = BTreeMap::new();
    for kind in InequalityKind::ALL {
        let applicable = match kind {
            InequalityKind::Block => false,
            InequalityKind::ThreePoint | InequalityKind::FourPoint => true,
            InequalityKind::FourPointShifted | InequalityKind::FivePoint => real,
        };
        if applicable {
            summaries.insert(kind, KindSummary::new(kind));
        }
    }
    for w in per_trial.into_iter().flatten() {
        if let Some(s) = summaries.get_mut(&w.name) {
            s.absorb(w, tol);
        }
    }
    Ok(IneqSuiteReport {
        kernel: kernel.label(),
        trials,
        seed,
        tolerance: tol,
        steps,
        summaries: summaries.into_values().collect(),
    })
}

fn random_coeff<R: Rng>(rng: &mut R, real: bool) -> Complex64 {
    let re_part = rng.random_range(-1.0..1.0);
    if real {
        re(re_part)
    } else {
        Complex64::new(re_part, rng.random_range(-1.0..1.0))
    }
}

/// Random PSD matrices `T = R R*` of order `r1 + r2`, `r1, r2 ∈ {1, 2, 3}`,
/// with random complex `z`, `w`.
pub fn block_suite(trials: usize, seed: u64, tol: f64) -> Result<KindSummary> {
    let witnesses: Vec<InequalityWitness> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t as u64);
            let r1 = rng.random_range(1..=3);
            let r2 = rng.random_range(1..=3);
            let n = r1 + r2;
            let cols = rng.random_range(1..=n);
            let r = DMatrix::from_fn(n, cols, |_, _| random_coeff(&mut rng, false));
            let t = &r * r.adjoint();
            let z: Vec<Complex64> = (0..r1).map(|_| random_coeff(&mut rng, false)).collect();
            let w: Vec<Complex64> = (0..r2).map(|_| random_coeff(&mut rng, false)).collect();
            block_psd_inequality(&t, r1, &z, &w)
        })
        .collect::<Result<_>>()?;
    let mut s = KindSummary::new(InequalityKind::Block);
    for w in witnesses {
        s.absorb(w, tol);
    }
    Ok(s)
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

    #[test]
    fn three_point_examples() {
        let g = k("gaussian");
        let w = three_point_defect(&g, c(0.3), c(1.1), c(1.1)).unwrap();
        assert_eq!(w.defect, 0.0);

        // direct evaluation: RHS = 2(1 - e^{-1/4}), LHS = (e^{-1/4} - e^{-1})²
        let w = three_point_defect(&g, c(0.0), c(0.5), c(1.0)).unwrap();
        let rhs = 2.0 * (1.0 - (-0.25f64).exp());
        let lhs = ((-0.25f64).exp() - (-1.0f64).exp()).powi(2);
        assert!((w.defect - (rhs - lhs)).abs() < 1e-15);
        assert!((w.defect - 0.2735).abs() < 1e-4);

        let w = three_point_defect(&k("poly_neg"), c(0.0), c(0.0), c(2.0)).unwrap();
        assert_eq!(w.term_value("LHS").unwrap().re, 16.0);
        assert_eq!(w.term_value("RHS").unwrap().re, 8.0);
        assert_eq!(w.defect, -8.0);
    }

    #[test]
    fn four_point_bilinear_and_coincident_steps() {
        let b = k("bilinear");
        let w = four_point_witness(&b, c(1.0), c(1.0), c(0.1), c(0.05)).unwrap();
        assert!(w.term_value("β0").unwrap().norm() < 1e-13);
        assert!(w.term_value("γ").unwrap().norm() < 1e-10);
        assert!(w.defect.abs() < 1e-10);

        let w = four_point_witness(&k("gaussian"), c(0.0), c(0.0), c(0.1), c(0.1)).unwrap();
        assert_eq!(w.term_value("β0").unwrap(), c(0.0));
        assert_eq!(w.term_value("γ").unwrap(), c(0.0));
        assert_eq!(w.defect, 0.0);
    }

    #[test]
    fn four_point_szego_matches_gram_oracle() {
        let s = k("szego");
        let (u, v, h, l) = (c(0.3), c(0.2), c(0.05), Complex64::new(0.0, 0.03));
        let w = four_point_witness(&s, u, v, h, l).unwrap();
        assert!(w.defect >= -1e-10);
        // oracle: the Gram at the four points is PSD
        let g = s.gram(&[u, v + h, v, v + l]).unwrap();
        assert!(crate::psd::min_eigenvalue_hermitian(&g.entries) > -1e-12);
    }

    #[test]
    fn shifted_examples() {
        let b = k("bilinear");
        let w = four_point_shifted_witness(&b, c(0.7), c(-0.4), 0.2, 0.3).unwrap();
        assert!(w.term_value("β0_shifted").unwrap().norm() < 1e-14);
        // γ⁰ vanishes analytically for the bilinear kernel; only roundoff remains
        assert!(w.defect >= -1e-12);

        let g = k("gaussian");
        let w = four_point_shifted_witness(&g, c(0.0), c(0.0), 0.1, 0.1).unwrap();
        assert!(w.defect >= -1e-10);

        let e = make_kernel(&KernelSpec::lift("exp", crate::lift::StarMap::Identity)).unwrap();
        let w = four_point_shifted_witness(&e, c(0.0), c(0.0), 0.2, 0.1).unwrap();
        let want = ((0.2f64).exp() - 1.0) / 0.2 - ((0.3f64).exp() - (0.2f64).exp()) / 0.1;
        assert!((w.term_value("β0_shifted").unwrap().re - want).abs() < 1e-13);
        assert!(w.defect >= -1e-12);

        assert_eq!(
            four_point_shifted_witness(&k("szego"), c(0.0), c(0.0), 0.1, 0.1).unwrap_err(),
            Error::RealFieldRequired
        );
        assert_eq!(
            four_point_shifted_witness(&g, c(0.0), c(0.0), 0.0, 0.1).unwrap_err(),
            Error::ZeroStep
        );
    }

    #[test]
    fn block_examples() {
        let t = DMatrix::<Complex64>::identity(5, 5);
        let z = [c(1.0), Complex64::new(0.5, -2.0)];
        let w = [c(0.3), c(-1.0), Complex64::new(0.0, 1.0)];
        let wit = block_psd_inequality(&t, 2, &z, &w).unwrap();
        assert_eq!(wit.term_value("B_form").unwrap(), c(0.0));
        let zz: f64 = z.iter().map(|x| x.norm_sqr()).sum();
        let ww: f64 = w.iter().map(|x| x.norm_sqr()).sum();
        assert!((wit.defect - zz * ww).abs() < 1e-12);

        // rank one: T = a a*, z and w proportional to the conjugate split of a
        let a = [c(1.0), Complex64::new(0.5, 0.5), c(-2.0), Complex64::new(0.0, 1.0)];
        let av = nalgebra::DVector::from_row_slice(&a);
        let t = &av * av.adjoint();
        let z: Vec<Complex64> = a[..2].iter().map(|x| x.conj()).collect();
        let w: Vec<Complex64> = a[2..].iter().map(|x| x.conj() * 0.7).collect();
        let wit = block_psd_inequality(&t, 2, &z, &w).unwrap();
        assert!(wit.defect.abs() < 1e-10, "{}", wit.defect);

        assert!(matches!(
            block_psd_inequality(&t, 2, &z, &w[..1]),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut bad = t.clone();
        bad[(0, 1)] += c(1.0);
        assert!(matches!(block_psd_inequality(&bad, 2, &z, &w), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn five_point_examples() {
        let b = k("bilinear");
        let w = five_point_witness(&b, c(0.3), c(0.8), 0.05, 0.1, 0.07).unwrap();
        assert!(w.term_value("B_form").unwrap().norm() < 1e-10);
        assert!((w.term_value("A_form").unwrap().re - 1.0).abs() < 1e-10);
        assert!(w.term_value("C_form").unwrap().norm() < 1e-9);

        let g = k("gaussian");
        let w = five_point_witness(&g, c(0.0), c(0.5), 0.05, 0.05, 0.05).unwrap();
        assert_eq!(w.defect, 0.0);

        let w = five_point_witness(&g, c(0.0), c(0.5), 0.05, 0.1, 0.07).unwrap();
        assert!(w.defect >= -1e-9);
        let gram = g.gram(&[c(0.0), c(0.05), c(0.6), c(0.5), c(0.57)]).unwrap();
        assert!(crate::psd::min_eigenvalue_hermitian(&gram.entries) > -1e-12);
    }

    #[test]
    fn block_route_matches_eta_route() {
        let s = k("szego");
        let (u, v, h, l) = (c(0.3), Complex64::new(0.1, 0.2), Complex64::new(0.05, 0.01), Complex64::new(-0.02, 0.03));
        let a = four_point_witness(&s, u, v, h, l).unwrap();
        let b = four_point_via_block(&s, u, v, h, l).unwrap();
        assert!((a.defect - b.defect).abs() < 1e-9 * a.scale);
    }

    #[test]
    fn witnesses_recompute() {
        let g = k("cosine");
        for w in [
            three_point_defect(&g, c(0.1), c(-0.4), c(1.0)).unwrap(),
            four_point_witness(&g, c(0.1), c(0.4), c(0.2), c(-0.1)).unwrap(),
            four_point_shifted_witness(&g, c(0.1), c(0.4), 0.2, -0.1).unwrap(),
            five_point_witness(&g, c(0.1), c(0.4), 0.1, 0.2, -0.1).unwrap(),
        ] {
            assert_eq!(w.defect, w.recompute_defect(), "{:?}", w.name);
        }
    }

    #[test]
    fn degenerate_branch() {
        // brownian-like kernel vanishing at the origin: k(u,u) = 0
        let b = make_kernel(&KernelSpec::builtin("bilinear")).unwrap();
        let w = four_point_witness(&b, c(0.0), c(1.0), c(0.1), c(0.2)).unwrap();
        assert!(w.degenerate);
        assert_eq!(w.defect, -w.term_value("β0").unwrap().norm_sqr());
    }

    #[test]
    fn small_suite_runs() {
        let r = ineq_suite(&k("gaussian"), 200, 1, StepChoice::Random, DEFAULT_DEFECT_TOL).unwrap();
        assert_eq!(r.violations(), 0);
        assert_eq!(r.summaries.len(), 4);
        let r = ineq_suite(&k("szego"), 200, 1, StepChoice::Random, DEFAULT_DEFECT_TOL).unwrap();
        assert_eq!(r.violations(), 0);
        assert_eq!(r.summaries.len(), 2);
    }

    #[test]
    fn grid_kernel_suite() {
        let pts = [c(0.0), c(0.4), c(0.9), c(1.5)];
        let vals: Vec<Vec<Complex64>> = pts
            .iter()
            .map(|a| pts.iter().map(|b| c((-(a.re - b.re).powi(2)).exp())).collect())
            .collect();
        let kg = make_kernel(&KernelSpec::grid(&pts, &vals)).unwrap();
        let r = ineq_suite(&kg, 300, 9, StepChoice::Random, DEFAULT_DEFECT_TOL).unwrap();
        assert_eq!(r.violations(), 0);
        assert!(r.summary(InequalityKind::FourPoint).unwrap().evaluated > 0);
    }
}
