//! Acceptance criteria, one line each. Tolerances are fixed; a criterion
//! that cannot be met is reported as FAIL, never relaxed.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use pdklab::findiff::{
    beta_decay_trace, decay_suite, derivative_kernel, identity_suite, mixed_partial_fd, BetaVariant, PsiMode,
    StepSequence, DECAY_STEPS,
};
use pdklab::holo::{contour_increment_ratio, double_contour_mixed, ContourSpec, HoloFunctionHandle, QuadratureOrder};
use pdklab::ineq::{block_psd_inequality, block_suite, ineq_suite, three_point_defect, InequalityKind, StepChoice};
use pdklab::lift::continuity_propagation_report;
use pdklab::psd::random_psd_suite;
use pdklab::rng::stream;
use pdklab::{make_kernel, re, Complex64, KernelHandle, KernelSpec, StarMap};
use rand::Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn kernel(spec: KernelSpec) -> KernelHandle {
    make_kernel(&spec).expect("zoo specs are valid")
}

fn builtin(name: &str) -> KernelHandle {
    kernel(KernelSpec::builtin(name))
}

/// Every positive definite kernel the criteria range over.
fn pd_kernels() -> Vec<KernelHandle> {
    let mut ks: Vec<KernelHandle> = ["gaussian", "brownian", "cosine", "exp_product", "szego", "re_product"]
        .into_iter()
        .map(builtin)
        .collect();
    ks.push(kernel(KernelSpec::lift("exp", StarMap::Identity)));
    ks.push(kernel(KernelSpec::lift("exp_neg_sq", StarMap::Negation)));
    ks.push(kernel(KernelSpec::lift("exp_neg_sq", StarMap::NegatedConjugate)));
    ks
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn psd_consistency() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for k in pd_kernels() {
        let r = random_psd_suite(&k, 12, 1000, 1, 1e-8, 1e-10).map_err(|e| e.to_string())?;
        let good = r.passes == 1000 && r.worst_relative_min_eigenvalue >= -1e-8;
        ok &= good;
        if !good {
            notes.push(format!("{}: {}/1000, worst {:.2e}", k.label(), r.passes, r.worst_relative_min_eigenvalue));
        }
    }
    for name in ["poly_neg", "sine_asym"] {
        let r = random_psd_suite(&builtin(name), 4, 200, 1, 1e-8, 1e-10).map_err(|e| e.to_string())?;
        let caught = r.first_failure.as_ref().is_some_and(|c| c.witness_points.len() >= 2);
        ok &= caught;
        notes.push(if caught {
            format!("{name} falsified ({}/200 trials fail)", r.failures)
        } else {
            format!("{name}: no witness in 200 trials")
        });
    }
    check(ok, format!("9 PD kernels x 1000 Grams; {}", notes.join("; ")))
}

fn ineq_worst(k: &KernelHandle, kinds: &[InequalityKind], trials: usize) -> Result<(f64, usize), String> {
    let r = ineq_suite(k, trials, 2, StepChoice::Random, 1e-8).map_err(|e| e.to_string())?;
    let mut worst = f64::INFINITY;
    let mut n = 0;
    for kind in kinds {
        if let Some(s) = r.summary(*kind) {
            n += s.evaluated;
            worst = worst.min(s.worst_relative_defect);
            if s.max_recompute_gap > 1e-12 * s.worst.as_ref().map_or(1.0, |w| w.scale) {
                return Err(format!("{}: recompute gap {:.2e}", k.label(), s.max_recompute_gap));
            }
        }
    }
    Ok((worst, n))
}

fn three_point() -> Outcome {
    let mut worst = f64::INFINITY;
    for k in pd_kernels() {
        let (w, n) = ineq_worst(&k, &[InequalityKind::ThreePoint], 10_000)?;
        if n != 10_000 {
            return Err(format!("{}: only {n} triples", k.label()));
        }
        worst = worst.min(w);
    }
    let d = three_point_defect(&builtin("poly_neg"), re(0.0), re(0.0), re(2.0))
        .map_err(|e| e.to_string())?
        .defect;
    check(
        worst >= -1e-8 && (d + 8.0).abs() <= 1e-10,
        format!("worst relative defect {worst:.2e} over 9 x 10^4 triples; poly_neg(0,0,2) = {d}"),
    )
}

fn gamma_phi() -> Outcome {
    // The identity pairs k(x,y) with k(y,x), so it needs Hermitian symmetry;
    // every Hermitian kernel counts, positive definite or not. sine_asym
    // breaks that premise and is only reported.
    let mut ks: Vec<KernelHandle> = ["poly_neg", "constant", "bilinear"].into_iter().map(builtin).collect();
    ks.extend(pd_kernels());
    let mut failures = 0;
    let mut checked = 0;
    for k in &ks {
        let r = identity_suite(k, 1000, 3, 1e-10).map_err(|e| e.to_string())?;
        failures += r.failures();
        checked += r.plain.evaluated + r.shifted.as_ref().map_or(0, |s| s.evaluated);
        if r.plain.evaluated != 1000 || r.shifted.as_ref().is_some_and(|s| s.evaluated != 1000) {
            return Err(format!("{}: short run", k.label()));
        }
    }
    let asym = identity_suite(&builtin("sine_asym"), 1000, 3, 1e-10).map_err(|e| e.to_string())?;
    check(
        failures == 0,
        format!(
            "{checked} identities on {} Hermitian kernels, {failures} residuals above 1e-10·scale (non-Hermitian sine_asym: {} of 2000 off)",
            ks.len(),
            asym.failures()
        ),
    )
}

fn four_five_point() -> Outcome {
    let kinds = [InequalityKind::FourPoint, InequalityKind::FourPointShifted, InequalityKind::FivePoint];
    let mut worst = f64::INFINITY;
    let mut total = 0;
    for k in pd_kernels() {
        let (w, n) = ineq_worst(&k, &kinds, 10_000)?;
        worst = worst.min(w);
        total += n;
    }
    let b = block_suite(10_000, 4, 1e-10).map_err(|e| e.to_string())?;
    let block_worst = b.worst.as_ref().map_or(0.0, |w| w.defect);
    let mut rank_one = 0.0f64;
    let mut rng = stream(4, 1);
    for _ in 0..1000 {
        let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let x: Vec<Complex64> = (0..5).map(|_| c()).collect();
        let t = DMatrix::from_fn(5, 5, |i, j| x[i] * x[j].conj());
        let z = [c(), c()];
        let w = [c(), c(), c()];
        let wit = block_psd_inequality(&t, 2, &z, &w).map_err(|e| e.to_string())?;
        rank_one = rank_one.max(wit.defect.abs());
    }
    check(
        worst >= -1e-8 && b.evaluated == 10_000 && block_worst >= -1e-10 && rank_one <= 1e-10,
        format!(
            "{total} draws, worst relative defect {worst:.2e}; 10^4 blocks, worst {block_worst:.2e}; rank one |defect| <= {rank_one:.1e}"
        ),
    )
}

fn finite_differences() -> Outcome {
    let seq = StepSequence::default();
    let cases = [
        ("gaussian", re(0.0), re(0.0), 2.0),
        ("gaussian", re(0.7), re(0.7), 2.0),
        ("gaussian", re(-1.3), re(-1.3), 2.0),
        ("exp_product", re(0.0), re(0.0), 1.0),
        ("szego", re(0.0), re(0.0), 1.0),
    ];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (name, u, v, oracle) in cases {
        let k = builtin(name);
        let est = mixed_partial_fd(&k, u, v, seq, PsiMode::for_field(k.field()), false).map_err(|e| e.to_string())?;
        let errs: Vec<f64> = est.quotients.iter().map(|q| (q - re(oracle)).norm()).collect();
        let tail = &errs[errs.len() - 4..];
        let monotone = tail.windows(2).all(|w| w[1] < w[0]);
        let fin = *errs.last().unwrap();
        worst = worst.max(fin);
        ok &= monotone && fin < 1e-6 && !est.divergent;
    }
    let b = builtin("brownian");
    let est = mixed_partial_fd(&b, re(2.0), re(2.0), seq, PsiMode::Real, false).map_err(|e| e.to_string())?;
    let one_over_h = est
        .quotients
        .iter()
        .zip(seq.steps())
        .all(|(q, h)| (q.re - 1.0 / h).abs() <= 1e-9 / h);
    ok &= est.divergent && one_over_h;
    check(
        ok,
        format!("worst final error {worst:.2e}; brownian diagonal divergent={} (ψ = 1/h: {one_over_h})", est.divergent),
    )
}

fn derivative_kernels() -> Outcome {
    let g1 = derivative_kernel(&builtin("gaussian"), 1, false).map_err(|e| e.to_string())?;
    let e1 = derivative_kernel(&builtin("exp_product"), 1, false).map_err(|e| e.to_string())?;
    let mut rng = stream(6, 0);
    let mut closed_err: f64 = 0.0;
    for _ in 0..1000 {
        let x: f64 = rng.random_range(-3.0..3.0);
        let y: f64 = rng.random_range(-3.0..3.0);
        let t = x - y;
        let g = (2.0 - 4.0 * t * t) * (-t * t).exp();
        let e = (x * y).exp() * (1.0 + x * y);
        closed_err = closed_err.max((g1.eval(re(x), re(y)).unwrap() - re(g)).norm());
        closed_err = closed_err.max((e1.eval(re(x), re(y)).unwrap() - re(e)).norm() / e.abs().max(1.0));
    }
    let mut notes = Vec::new();
    let mut ok = closed_err <= 1e-12;
    for k in [&g1, &e1] {
        let r = random_psd_suite(k, 10, 500, 6, 1e-8, 1e-10).map_err(|e| e.to_string())?;
        ok &= r.passes == 500 && r.worst_relative_min_eigenvalue >= -1e-8;
        notes.push(format!("{}/500 PSD (worst {:.1e})", r.passes, r.worst_relative_min_eigenvalue));
    }
    check(ok, format!("closed form error {closed_err:.1e}; gaussian k1 {}; exp_product k1 {}", notes[0], notes[1]))
}

fn beta_decay() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["szego", "gaussian", "cosine"] {
        let r = decay_suite(&builtin(name), 20, 7, DECAY_STEPS, 1e-4).map_err(|e| e.to_string())?;
        let beta0: Vec<_> = r.entries.iter().filter(|e| e.variant == BetaVariant::Beta0).collect();
        let good = beta0.iter().filter(|e| e.trace.decays(2, 0.0, 1e-4)).count();
        let worst_final = beta0.iter().map(|e| e.trace.final_value).fold(0.0, f64::max);
        ok &= good == beta0.len() && beta0.len() >= 40;
        notes.push(format!("{name} {good}/{} (final <= {worst_final:.1e})", beta0.len()));
    }
    let b = builtin("brownian");
    let mut rng = stream(7, 1);
    let mut stuck = 0;
    for _ in 0..20 {
        let u = re(rng.random_range(1.0..9.0));
        let t = beta_decay_trace(&b, u, u, DECAY_STEPS, BetaVariant::Beta0, re(-0.7)).map_err(|e| e.to_string())?;
        stuck += usize::from(!t.decays(2, 0.0, 1e-4));
    }
    ok &= stuck == 20;
    check(ok, format!("{}; brownian diagonal non-decaying {stuck}/20", notes.join(", ")))
}

fn contours() -> Outcome {
    let names = ["exp", "cos", "square", "geometric", "exp_neg_sq"];
    let mut rng = stream(8, 0);
    let mut ratio_err: f64 = 0.0;
    let mut doubling: f64 = 0.0;
    for i in 0..100 {
        let f = HoloFunctionHandle::by_name(names[i % names.len()]).map_err(|e| e.to_string())?;
        let z = Complex64::from_polar(rng.random_range(0.0..0.4), rng.random_range(0.0..std::f64::consts::TAU));
        let h = Complex64::from_polar(rng.random_range(1e-3..0.2), rng.random_range(0.0..std::f64::consts::TAU));
        let c = ContourSpec::new(z, rng.random_range(0.25..0.45), 64).map_err(|e| e.to_string())?;
        let r = contour_increment_ratio(&f, z, h, c).map_err(|e| e.to_string())?;
        let direct = (f.eval(z + h).unwrap() - f.eval(z).unwrap()) / h;
        ratio_err = ratio_err.max((r.value - direct).norm());
        doubling = doubling.max(r.doubling_delta);
    }
    let k = builtin("szego");
    let mut mixed_err: f64 = 0.0;
    for _ in 0..20 {
        let u = Complex64::from_polar(rng.random_range(0.0..0.6), rng.random_range(0.0..std::f64::consts::TAU));
        let v = Complex64::from_polar(rng.random_range(0.0..0.6), rng.random_range(0.0..std::f64::consts::TAU));
        let c1 = ContourSpec::new(u, 0.2, 64).map_err(|e| e.to_string())?;
        let c2 = ContourSpec::new(v, 0.2, 64).map_err(|e| e.to_string())?;
        let r = double_contour_mixed(&k, u, v, c1, c2, QuadratureOrder::UFirst).map_err(|e| e.to_string())?;
        let w = u * v.conj();
        mixed_err = mixed_err.max((r.value - (1.0 + w) / (1.0 - w).powi(3)).norm());
        doubling = doubling.max(r.doubling_delta);
    }
    check(
        ratio_err <= 1e-8 && mixed_err <= 1e-6 && doubling < 1e-10,
        format!("ratio error {ratio_err:.1e} (100 cases); szego mixed error {mixed_err:.1e} (20 points); doubling change {doubling:.1e}"),
    )
}

fn continuity() -> Outcome {
    let grid: Vec<f64> = (0..12).map(|j| 0.8 * 0.5f64.powi(j)).collect();
    let b = builtin("brownian");
    let rb = continuity_propagation_report(&b, &[re(2.0), re(5.0), re(8.0)], &grid, 10_000, 9).map_err(|e| e.to_string())?;
    let omega_b = rb.omega_table.iter().map(|e| (e.omega - e.delta).abs()).fold(0.0, f64::max);
    let g = builtin("gaussian");
    let rg = continuity_propagation_report(&g, &[re(-1.5), re(0.0), re(1.5)], &grid, 10_000, 9).map_err(|e| e.to_string())?;
    let omega_g = rg
        .omega_table
        .iter()
        .map(|e| (e.omega - 2.0 * (1.0 - (-e.delta * e.delta).exp())).abs())
        .fold(0.0, f64::max);
    check(
        omega_b <= 1e-12 && rb.probes >= 10_000 && rb.violations.is_empty() && omega_g <= 1e-10 && rg.violations.is_empty(),
        format!(
            "brownian |ω - δ| <= {omega_b:.1e}, {} probes, {} violations; gaussian ω error {omega_g:.1e}, {} violations",
            rb.probes,
            rb.violations.len(),
            rg.violations.len()
        ),
    )
}

fn report_all(kernel: &str, out: &Path) -> Result<(i32, Value), String> {
    let spec = Path::new(env!("CARGO_MANIFEST_DIR")).join("kernels").join(format!("{kernel}.json"));
    let status = Command::new(env!("CARGO_BIN_EXE_pdklab"))
        .args(["report-all", "--kernel", spec.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "10"])
        .output()
        .map_err(|e| e.to_string())?;
    let code = status.status.code().ok_or("killed")?;
    let text = std::fs::read_to_string(out).map_err(|e| e.to_string())?;
    Ok((code, serde_json::from_str(&text).map_err(|e| e.to_string())?))
}

fn failed_sections(r: &Value) -> Vec<String> {
    r["sections"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["status"] == "fail")
        .map(|s| s["name"].as_str().unwrap().to_string())
        .collect()
}

fn propagation_suites() -> Outcome {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["gaussian", "cosine", "szego"] {
        let (code, r) = report_all(name, &dir.join(format!("{name}.json")))?;
        let all_pass = r["sections"].as_array().unwrap().iter().all(|s| s["status"] == "pass");
        ok &= all_pass && code == 0;
        notes.push(format!("{name} all pass={all_pass} exit {code}"));
    }
    for (name, expected) in [("re_product", "holo_hypothesis"), ("sine_asym", "p2")] {
        let (code, r) = report_all(name, &dir.join(format!("{name}.json")))?;
        let failed = failed_sections(&r);
        ok &= failed == [expected] && code == 1;
        notes.push(format!("{name} fails {failed:?} exit {code}"));
    }
    let a = dir.join("rerun_a.json");
    let b = dir.join("rerun_b.json");
    report_all("szego", &a)?;
    report_all("szego", &b)?;
    let same = std::fs::read(&a).map_err(|e| e.to_string())? == std::fs::read(&b).map_err(|e| e.to_string())?;
    ok &= same;
    notes.push(format!("byte-identical rerun={same}"));
    check(ok, notes.join("; "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 PSD consistency", psd_consistency),
        ("2 three-point inequality", three_point),
        ("3 gamma = phi identity", gamma_phi),
        ("4 four/five-point and block inequalities", four_five_point),
        ("5 finite-difference mixed partials", finite_differences),
        ("6 derivative kernels", derivative_kernels),
        ("7 beta decay", beta_decay),
        ("8 contour formulas", contours),
        ("9 continuity propagation", continuity),
        ("10 propagation suites and CLI contract", propagation_suites),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({secs:.1}s) {detail}");
            }
        }
    }
    println!("acceptance: {}/10 criteria pass", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
