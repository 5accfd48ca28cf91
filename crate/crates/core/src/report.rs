//! Suite orchestration behind the command-line front end: one JSON report
//! per run, made of named sections with a status each.

use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::domain::{Domain, Field};
use crate::error::{Error, Result};
use crate::findiff::{
    decay_suite, identity_suite, sn_probe, ProbeVerdict, StepSequence, DECAY_STEPS, IDENTITY_TOL,
};
use crate::holo::{holo_propagation_suite, HoloVerdict};
use crate::ineq::{block_suite, ineq_suite, InequalityKind, StepChoice, DEFAULT_DEFECT_TOL};
use crate::kernel::{make_kernel, KernelHandle, KernelKind, KernelSpec, UNBOUNDED_ORDER};
use crate::lift::{
    codiff_and_diagonal, continuity_propagation_report, lift, regularity_propagation_suite, ContinuityVerdict,
    RegularityVerdict,
};
use crate::function::FunctionHandle;
use crate::psd::{check_pointwise_properties, random_psd_suite, DEFAULT_TOL_E, DEFAULT_TOL_H};
use crate::rng::stream;

pub const SCHEMA: &str = "pdklab-report-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    PsdCheck,
    Props,
    Ineq,
    Findiff,
    Holo,
    Lift,
    ReportAll,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::PsdCheck => "psd-check",
            Command::Props => "props",
            Command::Ineq => "ineq",
            Command::Findiff => "findiff",
            Command::Holo => "holo",
            Command::Lift => "lift",
            Command::ReportAll => "report-all",
        })
    }
}

/// Everything a run needs. `out` is where the report goes; it is not echoed
/// into the report, so reruns to different paths stay byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(skip)]
    pub kernel_spec_path: PathBuf,
    pub tol_e: f64,
    pub tol_h: f64,
    pub seed: u64,
    pub trials: usize,
    pub n_max: usize,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    /// Fixes the steps of `ineq` and the start of `findiff` schedules.
    pub step_h0: Option<f64>,
    pub step_ratio: f64,
    pub step_count: usize,
    pub band: f64,
}

impl RunConfig {
    pub fn new(command: Command, kernel_spec_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            kernel_spec_path: kernel_spec_path.into(),
            tol_e: DEFAULT_TOL_E,
            tol_h: DEFAULT_TOL_H,
            seed: 0,
            trials: 1000,
            n_max: 12,
            output_path: None,
            step_h0: None,
            step_ratio: 0.5,
            step_count: 9,
            band: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_e > 0.0) {
            return Err(Error::param("tol-e", "must be positive"));
        }
        if !(self.tol_h > 0.0) {
            return Err(Error::param("tol-h", "must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if self.n_max == 0 {
            return Err(Error::param("n-max", "must be at least 1"));
        }
        if !(self.step_ratio > 0.0) {
            return Err(Error::param("ratio", "must be positive"));
        }
        if let Some(h0) = self.step_h0 {
            if !(h0 > 0.0 && h0.is_finite()) {
                return Err(Error::param("h0", "must be positive"));
            }
        }
        if !(self.band > 0.0) {
            return Err(Error::param("band", "must be positive"));
        }
        Ok(())
    }

    fn step_sequence(&self) -> Result<StepSequence> {
        StepSequence::new(self.step_h0.unwrap_or(0.1), self.step_ratio, self.step_count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionStatus {
    Pass,
    /// A witness with negative defect, a property violation, or an identity
    /// residual above tolerance.
    Fail,
    /// The hypothesis of the checked statement is not met; no claim either way.
    HypothesisNotMet,
    /// Not run because an earlier section failed.
    Skipped,
    /// Not meaningful for this kernel.
    NotApplicable,
}

impl SectionStatus {
    fn tag(self) -> &'static str {
        match self {
            SectionStatus::Pass => "pass",
            SectionStatus::Fail => "FAIL",
            SectionStatus::HypothesisNotMet => "hypothesis not met",
            SectionStatus::Skipped => "skipped",
            SectionStatus::NotApplicable => "n/a",
        }
    }

    fn pass_if(ok: bool) -> Self {
        if ok {
            SectionStatus::Pass
        } else {
            SectionStatus::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Section {
    pub name: String,
    pub status: SectionStatus,
    pub summary: String,
    pub details: Value,
}

impl Section {
    fn new(name: &str, status: SectionStatus, summary: impl Into<String>, details: Value) -> Self {
        Section {
            name: name.to_string(),
            status,
            summary: summary.into(),
            details,
        }
    }

    fn without(name: &str, status: SectionStatus, why: &str) -> Self {
        Section::new(name, status, why, Value::Null)
    }
}

/// A mathematical claim and the sections that witness it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub claim: &'static str,
    pub sections: Vec<String>,
    pub status: SectionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: Command,
    pub kernel: String,
    pub spec: KernelSpec,
    pub config: RunConfig,
    pub status: SectionStatus,
    pub sections: Vec<Section>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claims: Option<Vec<Claim>>,
}

impl Report {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn has_failure(&self) -> bool {
        self.sections.iter().any(|s| s.status == SectionStatus::Fail)
    }

    /// Process exit status: 1 if any section failed, else 0.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.has_failure())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// One line per section.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("{} on {}", self.command, self.kernel)];
        lines.extend(
            self.sections
                .iter()
                .map(|s| format!("  [{}] {}: {}", s.status.tag(), s.name, s.summary)),
        );
        lines.push(format!(
            "overall: {}",
            if self.has_failure() { "violations found" } else { "consistent" }
        ));
        lines
    }
}

/// Reads and validates the kernel spec, then runs the command.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let text = std::fs::read_to_string(&config.kernel_spec_path).map_err(|e| Error::InvalidSpec {
        field: "path",
        reason: format!("{}: {e}", config.kernel_spec_path.display()),
    })?;
    let spec = KernelSpec::from_json(&text)?;
    run_spec(config, &spec)
}

/// Runs the command on an in-memory spec.
pub fn run_spec(config: &RunConfig, spec: &KernelSpec) -> Result<Report> {
    config.validate()?;
    let kernel = make_kernel(spec)?;
    let mut claims = None;
    let sections = match config.command {
        Command::PsdCheck => vec![psd_section(&kernel, config)?],
        Command::Props => props_sections(&kernel, config)?,
        Command::Ineq => ineq_sections(&kernel, config)?,
        Command::Findiff => findiff_sections(&kernel, config)?,
        Command::Holo => holo_sections(&kernel, config)?,
        Command::Lift => lift_sections(&kernel, config)?,
        Command::ReportAll => {
            let s = report_all_sections(&kernel, config)?;
            claims = Some(claim_map(&s, kernel.field()));
            s
        }
    };
    let status = if sections.iter().any(|s| s.status == SectionStatus::Fail) {
        SectionStatus::Fail
    } else {
        SectionStatus::Pass
    };
    Ok(Report {
        schema: SCHEMA,
        command: config.command,
        kernel: kernel.label(),
        spec: spec.clone(),
        config: config.clone(),
        status,
        sections,
        claims,
    })
}

/// Runs props, psd-check, ineq, findiff and (complex field) holo in that
/// order. A P2 failure skips everything after it.
pub fn report_all(config: &RunConfig) -> Result<Report> {
    run(&RunConfig {
        command: Command::ReportAll,
        ..config.clone()
    })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report details serialize")
}

fn psd_section(kernel: &KernelHandle, c: &RunConfig) -> Result<Section> {
    let r = random_psd_suite(kernel, c.n_max, c.trials, c.seed, c.tol_e, c.tol_h)?;
    let summary = format!(
        "{}/{} Grams PSD, worst min eigenvalue {:.3e}",
        r.passes, r.trials, r.worst_min_eigenvalue
    );
    Ok(Section::new("psd", SectionStatus::pass_if(r.all_psd()), summary, to_value(&r)))
}

fn property_points(kernel: &KernelHandle, c: &RunConfig) -> Vec<Complex64> {
    match kernel.domain() {
        Domain::Points { points } => points.iter().take(64).copied().map(Into::into).collect(),
        d => {
            let mut rng = stream(c.seed, 0);
            (0..c.n_max.max(24)).map(|_| d.sample(&mut rng)).collect()
        }
    }
}

fn props_sections(kernel: &KernelHandle, c: &RunConfig) -> Result<Vec<Section>> {
    let pts = property_points(kernel, c);
    let r = check_pointwise_properties(kernel, &pts)?;
    let details = to_value(&r);
    let p1 = Section::new(
        "p1",
        SectionStatus::pass_if(r.p1_holds(c.tol_e)),
        format!(
            "min Re k(x,x) = {:.3e}, max |Im k(x,x)| = {:.3e}",
            r.p1_min_diagonal, r.p1_max_diagonal_imag
        ),
        details.clone(),
    );
    let p2_ok = r.p2_holds(c.tol_h);
    let p2 = Section::new(
        "p2",
        SectionStatus::pass_if(p2_ok),
        format!("max |k(x,y) - conj k(y,x)| = {:.3e}", r.p2_worst),
        details.clone(),
    );
    let p3 = if p2_ok {
        Section::new(
            "p3",
            SectionStatus::pass_if(r.p3_holds(c.tol_e)),
            format!("min k(x,x)k(y,y) - |k(x,y)|² = {:.3e}", r.p3_worst),
            details,
        )
    } else {
        Section::without("p3", SectionStatus::Skipped, "skipped: P2 failed")
    };
    Ok(vec![p1, p2, p3])
}

fn ineq_steps(c: &RunConfig) -> StepChoice {
    match c.step_h0 {
        None => StepChoice::Random,
        Some(h0) => {
            let l = h0 * c.step_ratio;
            StepChoice::Fixed {
                h: h0,
                l,
                // coincident steps collapse the shifted witness through l = -h
                shifted_l: if l == h0 { -h0 } else { l },
                lambda: h0,
            }
        }
    }
}

fn ineq_sections(kernel: &KernelHandle, c: &RunConfig) -> Result<Vec<Section>> {
    let r = ineq_suite(kernel, c.trials, c.seed, ineq_steps(c), DEFAULT_DEFECT_TOL)?;
    let parts: Vec<String> = r
        .summaries
        .iter()
        .map(|s| {
            format!(
                "{}: {}/{} ok, worst {:.3e}",
                to_value(&s.name).as_str().unwrap_or("?"),
                s.evaluated - s.violations,
                s.evaluated,
                if s.evaluated == 0 { 0.0 } else { s.worst_relative_defect }
            )
        })
        .collect();
    let kernel_section = Section::new(
        "ineq",
        SectionStatus::pass_if(r.violations() == 0),
        parts.join("; "),
        to_value(&r),
    );
    let b = block_suite(c.trials, c.seed, 1e-10)?;
    let block_section = Section::new(
        "ineq_block",
        SectionStatus::pass_if(b.violations == 0),
        format!(
            "{}/{} random PSD block matrices ok, worst {:.3e}",
            b.evaluated - b.violations,
            b.evaluated,
            b.worst_relative_defect
        ),
        to_value(&b),
    );
    Ok(vec![kernel_section, block_section])
}

fn identity_section(kernel: &KernelHandle, c: &RunConfig) -> Result<Section> {
    let r = identity_suite(kernel, c.trials, c.seed, IDENTITY_TOL)?;
    let summary = match &r.shifted {
        Some(s) => format!(
            "plain {}/{} (worst {:.1e}), shifted {}/{} (worst {:.1e})",
            r.plain.evaluated - r.plain.failures,
            r.plain.evaluated,
            r.plain.worst_relative_residual,
            s.evaluated - s.failures,
            s.evaluated,
            s.worst_relative_residual
        ),
        None => format!(
            "plain {}/{} (worst {:.1e})",
            r.plain.evaluated - r.plain.failures,
            r.plain.evaluated,
            r.plain.worst_relative_residual
        ),
    };
    Ok(Section::new(
        "findiff_identity",
        SectionStatus::pass_if(r.failures() == 0),
        summary,
        to_value(&r),
    ))
}

fn probe_order(kernel: &KernelHandle) -> usize {
    match kernel.smoothness() {
        Some(s) if s.sn_order == UNBOUNDED_ORDER => 2,
        Some(s) => (s.sn_order as usize).clamp(1, 2),
        None => 1,
    }
}

/// Smoothness probe (real field) or band sesquiholomorphy (complex field),
/// then β decay gated on it. Returns the sections and whether the gate held.
fn regularity_sections(kernel: &KernelHandle, c: &RunConfig) -> Result<Vec<Section>> {
    if !kernel.domain().is_continuum() {
        return Ok(vec![Section::without(
            "findiff_decay",
            SectionStatus::NotApplicable,
            "finite point set: no limits to probe",
        )]);
    }
    let mut out = Vec::new();
    let gate = match kernel.field() {
        Field::Real => {
            let r = sn_probe(kernel, probe_order(kernel), c.step_sequence()?, c.band, 4, c.seed)?;
            let status = match r.verdict {
                ProbeVerdict::ConsistentWithPropagation => SectionStatus::Pass,
                ProbeVerdict::HypothesisNotMet => SectionStatus::HypothesisNotMet,
                ProbeVerdict::Contradicts => SectionStatus::Fail,
            };
            let conv = r.entries.iter().filter(|e| e.converged).count();
            out.push(Section::new(
                "findiff_sn_probe",
                status,
                format!(
                    "order {}: {}/{} probes converged (band {}, far {})",
                    r.n,
                    conv,
                    r.entries.len(),
                    r.band_converged,
                    r.far_converged
                ),
                to_value(&r),
            ));
            r.band_converged
        }
        Field::Complex => {
            let r = holo_propagation_suite(kernel, c.band, 20, c.seed)?;
            let worst = r
                .band
                .iter()
                .fold(0.0f64, |m, s| m.max(s.cr_residual_u.max(s.anticr_residual_v) / s.scale));
            out.push(Section::new(
                "holo_hypothesis",
                SectionStatus::pass_if(r.hypothesis_holds),
                format!("{} band pairs, worst relative residual {:.2e}", r.band.len(), worst),
                to_value(&r.band),
            ));
            let conclusion = match r.verdict {
                HoloVerdict::HypothesisNotMet => Section::without(
                    "holo_conclusion",
                    SectionStatus::HypothesisNotMet,
                    "not evaluated: sesquiholomorphy fails on the diagonal band",
                ),
                v => Section::new(
                    "holo_conclusion",
                    SectionStatus::pass_if(v == HoloVerdict::ConsistentWith),
                    format!(
                        "{}/{} far pairs sesquiholomorphic with decaying β",
                        r.far.iter().filter(|e| e.decays && e.sesqui.passes(crate::holo::SESQUI_TOL)).count(),
                        r.far.len()
                    ),
                    to_value(&r.far),
                ),
            };
            out.push(conclusion);
            r.hypothesis_holds
        }
    };
    let d = decay_suite(kernel, 20, c.seed, DECAY_STEPS, 1e-4)?;
    let status = if !gate {
        SectionStatus::HypothesisNotMet
    } else {
        SectionStatus::pass_if(d.failures == 0)
    };
    let decay = Section::new(
        "findiff_decay",
        status,
        format!("{}/{} traces decay", d.entries.len() - d.failures, d.entries.len()),
        to_value(&d),
    );
    // decay sits after the gate; for complex kernels keep holo_conclusion last
    let at = if kernel.field() == Field::Complex { out.len() - 1 } else { out.len() };
    out.insert(at, decay);
    Ok(out)
}

fn findiff_sections(kernel: &KernelHandle, c: &RunConfig) -> Result<Vec<Section>> {
    let mut out = vec![identity_section(kernel, c)?];
    out.extend(regularity_sections(kernel, c)?);
    Ok(out)
}

fn holo_sections(kernel: &KernelHandle, c: &RunConfig) -> Result<Vec<Section>> {
    if kernel.field() != Field::Complex || !kernel.domain().is_continuum() {
        return Ok(vec![Section::without(
            "holo",
            SectionStatus::NotApplicable,
            "needs a complex-field kernel on a disc",
        )]);
    }
    Ok(regularity_sections(kernel, c)?
        .into_iter()
        .filter(|s| s.name.starts_with("holo"))
        .collect())
}

fn lift_sections(kernel: &KernelHandle, c: &RunConfig) -> Result<Vec<Section>> {
    let spec = kernel.spec();
    let lifted = if spec.kind == KernelKind::Lift {
        let f = FunctionHandle::by_name(spec.function.as_deref().unwrap_or(""), &spec.params)?;
        let star = spec.star.ok_or(Error::InvalidSpec {
            field: "star",
            reason: "lift kernels need a star map".into(),
        })?;
        Some((f, star))
    } else {
        None
    };
    let mut out = Vec::new();
    let mut rng = stream(c.seed, 0);
    let domain = kernel.domain().clone();

    match &lifted {
        Some((f, star)) => {
            let pts: Vec<Complex64> = (0..c.n_max).map(|_| domain.sample(&mut rng)).collect();
            let sets = codiff_and_diagonal(&pts, *star);
            let inside = sets.d.iter().all(|d| sets.s.iter().any(|s| (s - d).norm() <= 1e-12));
            out.push(Section::new(
                "lift_codiff",
                SectionStatus::pass_if(inside),
                format!("|S| = {}, |D| = {} on {} sampled points; D ⊆ S: {inside}", sets.s.len(), sets.d.len(), pts.len()),
                to_value(&sets),
            ));
            let lk = lift(f, *star)?;
            let r = random_psd_suite(&lk.kernel, c.n_max, c.trials, c.seed, c.tol_e, c.tol_h)?;
            out.push(Section::new(
                "lift_pd_function",
                SectionStatus::pass_if(r.all_psd()),
                format!("{}/{} lifted Grams PSD", r.passes, r.trials),
                to_value(&r),
            ));
        }
        None => out.push(Section::without(
            "lift_pd_function",
            SectionStatus::NotApplicable,
            "kernel is not given as a lift",
        )),
    }

    let bases: Vec<Complex64> = match &domain {
        Domain::Points { points } => points.iter().take(3).copied().map(Into::into).collect(),
        d => (0..3).map(|_| d.sample_inner(&mut rng, 0.1 * d.width())).collect(),
    };
    let top = match &domain {
        Domain::Points { .. } => domain.width().max(1.0),
        d => d.width() / 6.0,
    };
    let grid: Vec<f64> = (0..10).map(|j| top * 0.5f64.powi(j)).collect();
    let r = continuity_propagation_report(kernel, &bases, &grid, c.trials, c.seed)?;
    let status = match r.verdict_label {
        ContinuityVerdict::ConsistentWith => SectionStatus::Pass,
        ContinuityVerdict::HypothesisNotMet => SectionStatus::HypothesisNotMet,
        ContinuityVerdict::FalsifiesPd => SectionStatus::Fail,
    };
    out.push(Section::new(
        "lift_continuity",
        status,
        format!("{} probes, {} violations, M = {:.3}", r.probes, r.violations.len(), r.m),
        to_value(&r),
    ));

    match &lifted {
        Some((f, star)) => {
            let order = if star.field() == Field::Real { 2 } else { 1 };
            let r = regularity_propagation_suite(f, *star, order, c.seed)?;
            let status = match r.verdict_label {
                RegularityVerdict::ConsistentWith => SectionStatus::Pass,
                RegularityVerdict::HypothesisNotMet => SectionStatus::HypothesisNotMet,
                RegularityVerdict::Contradicts => SectionStatus::Fail,
            };
            out.push(Section::new(
                "lift_regularity",
                status,
                format!(
                    "{} derivatives of f recovered, worst relative error {:.2e}",
                    r.recovered.len(),
                    r.max_recovery_error
                ),
                to_value(&r),
            ));
        }
        None => out.push(Section::without(
            "lift_regularity",
            SectionStatus::NotApplicable,
            "kernel is not given as a lift",
        )),
    }
    Ok(out)
}

fn report_all_sections(kernel: &KernelHandle, c: &RunConfig) -> Result<Vec<Section>> {
    let mut out = props_sections(kernel, c)?;
    let p2_failed = out.iter().any(|s| s.name == "p2" && s.status == SectionStatus::Fail);
    let mut later = vec!["psd", "ineq", "ineq_block", "findiff_identity"];
    match kernel.field() {
        Field::Real => later.extend(["findiff_sn_probe", "findiff_decay"]),
        Field::Complex => later.extend(["holo_hypothesis", "findiff_decay", "holo_conclusion"]),
    }
    if p2_failed {
        out.extend(
            later
                .into_iter()
                .map(|n| Section::without(n, SectionStatus::Skipped, "skipped: P2 failed")),
        );
        return Ok(out);
    }
    out.push(psd_section(kernel, c)?);
    out.extend(ineq_sections(kernel, c)?);
    out.extend(findiff_sections(kernel, c)?);
    Ok(out)
}

fn ineq_kind_status(sections: &[Section], kind: InequalityKind) -> Option<SectionStatus> {
    let s = sections.iter().find(|s| s.name == "ineq")?;
    if s.status == SectionStatus::Skipped {
        return Some(SectionStatus::Skipped);
    }
    let key = to_value(&kind);
    let summary = s.details["summaries"]
        .as_array()?
        .iter()
        .find(|x| x["name"] == key)?;
    Some(SectionStatus::pass_if(summary["violations"] == json!(0)))
}

fn combine(statuses: &[SectionStatus]) -> SectionStatus {
    use SectionStatus::*;
    for s in [Fail, Skipped, HypothesisNotMet, NotApplicable] {
        if statuses.contains(&s) {
            return s;
        }
    }
    Pass
}

fn claim_map(sections: &[Section], field: Field) -> Vec<Claim> {
    let status_of = |n: &str| sections.iter().find(|s| s.name == n).map(|s| s.status);
    let simple = |claim: &'static str, names: &[&str]| -> Option<Claim> {
        let st: Vec<SectionStatus> = names.iter().filter_map(|n| status_of(n)).collect();
        (!st.is_empty()).then(|| Claim {
            claim,
            sections: names.iter().map(|s| s.to_string()).collect(),
            status: combine(&st),
        })
    };
    let mut claims: Vec<Claim> = [
        simple("diagonal_nonnegative", &["p1"]),
        simple("hermitian_symmetry", &["p2"]),
        simple("diagonal_dominates_off_diagonal", &["p3"]),
        simple("gram_matrices_psd", &["psd"]),
    ]
    .into_iter()
    .flatten()
    .collect();
    for (claim, kind) in [
        ("three_point_inequality", InequalityKind::ThreePoint),
        ("four_point_inequality", InequalityKind::FourPoint),
        ("shifted_four_point_inequality", InequalityKind::FourPointShifted),
        ("five_point_inequality", InequalityKind::FivePoint),
    ] {
        if let Some(status) = ineq_kind_status(sections, kind) {
            claims.push(Claim {
                claim,
                sections: vec!["ineq".into()],
                status,
            });
        }
    }
    claims.extend(
        [
            simple("block_inequality", &["ineq_block"]),
            simple("gamma_equals_phi", &["findiff_identity"]),
        ]
        .into_iter()
        .flatten(),
    );
    let propagation = match field {
        Field::Real => simple("diagonal_smoothness_propagates", &["findiff_sn_probe", "findiff_decay"]),
        Field::Complex => simple(
            "diagonal_sesquiholomorphy_propagates",
            &["holo_hypothesis", "findiff_decay", "holo_conclusion"],
        ),
    };
    claims.extend(propagation);
    claims
}
