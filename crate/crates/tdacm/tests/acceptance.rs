//! Acceptance criteria 1–7. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use tdacm::cli::{run_comparison, run_with};
use tdacm::export::{csv_string, parse_csv, rows_of};
use tdacm::report::compare;
use tdacm_core::controllers::ControllerKind;
use tdacm_core::oracle;
use tdacm_core::sim::{self, FeatureProgram, ForceProgram, Scenario, TrajectoryLog};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn timed_run(s: &Scenario) -> Result<(TrajectoryLog, Duration), String> {
    let t0 = Instant::now();
    sim::run(s)
        .map(|log| (log, t0.elapsed()))
        .map_err(|f| format!("{}: {}", s.name, f.error))
}

fn max_abs_ef(log: &TrajectoryLog, from: f64, to: f64) -> f64 {
    log.records
        .iter()
        .filter(|r| r.t >= from && r.t <= to)
        .map(|r| r.e_f.abs())
        .fold(0.0, f64::max)
}

fn criterion1() -> Verdict {
    let t0 = Instant::now();
    let results = oracle::run_all(7);
    let elapsed = t0.elapsed();
    let failed: Vec<_> = results
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.name)
        .collect();
    let worst = results
        .iter()
        .map(|r| format!("{} {:.1e}/{:.0e}", r.name, r.max_error, r.tolerance))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(
        failed.is_empty() && elapsed < Duration::from_secs(10),
        format!(
            "{} checks in {:.2} s, failed {failed:?} [{worst}]",
            results.len(),
            elapsed.as_secs_f64()
        ),
    )
}

/// Force windows of the stepped program: 2 s after each setpoint to the end of its segment.
fn test1_bounds(log: &TrajectoryLog, force_tol: f64, vision_tol: f64) -> (bool, String) {
    let a = max_abs_ef(log, 2.0, 17.0);
    let b = max_abs_ef(log, 19.0, 25.0);
    let es = log.records.last().map_or(f64::INFINITY, |r| r.e_s.norm());
    let ok = a < force_tol && b < force_tol && es < vision_tol;
    (
        ok,
        format!(
            "{}: max|e_f| [2,17] {a:.4} N, [19,25] {b:.4} N, |e_s(25)| {es:.2e}",
            log.scenario
        ),
    )
}

fn criterion2() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for s in sim::scenario_test1() {
        match timed_run(&s) {
            Ok((log, dt)) => {
                let (ok, note) = test1_bounds(&log, 0.05, 0.02);
                let fast = dt < Duration::from_secs(30);
                pass &= ok && fast && log.records.len() == 25001;
                notes.push(format!("{note}, {:.2} s", dt.as_secs_f64()));
            }
            Err(e) => {
                pass = false;
                notes.push(e);
            }
        }
    }
    verdict(pass, notes.join("; "))
}

fn criterion3() -> Verdict {
    let s = sim::scenario_test2();
    let log = match timed_run(&s) {
        Ok((log, _)) => log,
        Err(e) => return verdict(false, e),
    };
    let ef = max_abs_ef(&log, 3.0, s.duration);
    let converged = log.records.iter().position(|r| r.e_s.norm() < 0.05);
    let Some(k) = converged else {
        return verdict(
            false,
            format!("max|e_f| after 3 s {ef:.4} N; |e_s| never below 0.05"),
        );
    };
    let t_conv = log.records[k].t;
    let es_after = log.records[k..]
        .iter()
        .map(|r| r.e_s.norm())
        .fold(0.0, f64::max);
    verdict(
        ef < 0.1 && t_conv <= 3.0 && es_after < 0.05,
        format!("max|e_f| after 3 s {ef:.4} N; |e_s| < 0.05 from t = {t_conv:.3} s, then max {es_after:.4}"),
    )
}

fn out_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).expect("acceptance output directory");
    dir
}

fn criterion4() -> Verdict {
    let [.., base] = sim::scenario_test3();
    let logs = match run_comparison(&base) {
        Ok(l) => l,
        Err(e) => return verdict(false, e.to_string()),
    };
    let report = match compare(&logs) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let path = out_dir().join("metrics.json");
    if let Err(e) = report.save_json(&path) {
        return verdict(false, e.to_string());
    }
    let rmse = |c: &str, ch: &str| report.row(c, ch).map_or(f64::NAN, |r| r.rmse);
    let (pv, cv) = (rmse("cftsmc", "vision"), rmse("cismc", "vision"));
    let (pf, cf, if_) = (
        rmse("cftsmc", "force"),
        rmse("cismc", "force"),
        rmse("pid", "force"),
    );
    verdict(
        pv < cv && pf < cf && pf < if_ && report.rows.len() == 6,
        format!(
            "vision rmse cftsmc {pv:.4} < cismc {cv:.4}; force rmse cftsmc {pf:.4} < cismc {cf:.4}, pid {if_:.4}; {}",
            path.display()
        ),
    )
}

/// Last time `‖(e_s, e_f)‖ ≥ 1e-2` plus one step; infinite if the run fails
/// or never settles.
fn settling_time(s: &Scenario) -> (f64, f64) {
    match sim::run(s) {
        Ok(log) => {
            let e0 = log.records[0].e_s.norm();
            let norms: Vec<f64> = log
                .records
                .iter()
                .map(|r| (r.e_s.norm_squared() + r.e_f * r.e_f).sqrt())
                .collect();
            let t = match norms.iter().rposition(|&n| n >= 1e-2) {
                None => 0.0,
                Some(k) if k + 1 == norms.len() => f64::INFINITY,
                Some(k) => log.records[k + 1].t,
            };
            (e0, t)
        }
        Err(f) => (
            f.partial.records.first().map_or(f64::NAN, |r| r.e_s.norm()),
            f64::INFINITY,
        ),
    }
}

/// Spearman rank correlation; ties take their mean rank.
fn rank_correlation(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for k in i..=j {
                r[idx[k]] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}

/// Family of regulation runs: the first Test-1 layout holding the contact
/// pose at 2.5 N, started from the first stock initial condition scaled by
/// `10^(−2.5 + 2.5k/9)`, `k = 0..9`. Each run lasts past the settling bound.
fn settling_family(kind: ControllerKind, horizon: f64) -> Vec<(f64, f64)> {
    let base = sim::scenario_test1()[0].clone();
    let ic = sim::scenario_test1_initial_states()[0].clone();
    let scenarios: Vec<Scenario> = (0..10)
        .map(|k| {
            let scale = 10f64.powf(-2.5 + 2.5 * k as f64 / 9.0);
            let mut s = base.clone().with_controller(kind);
            s.feature_program = FeatureProgram::Hold {
                contact_camera: *s.feature_program.contact_camera(),
            };
            s.force_program = ForceProgram::Constant(2.5);
            s.duration = horizon;
            s.initial_state.q_u = &ic.q_u * scale;
            s.initial_state.q_a = &ic.q_a * scale;
            s
        })
        .collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| scope.spawn(move || settling_time(s)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("settling run panicked"))
            .collect()
    })
}

fn criterion5() -> Verdict {
    let t_max = sim::stock_controller().shaper.settling_bound();
    let horizon = t_max.ceil() + 1.0;
    let fixed = settling_family(ControllerKind::Cftsmc, horizon);
    let ibvs = settling_family(ControllerKind::ClassicalIbvs, horizon);
    let e0: Vec<f64> = fixed.iter().map(|p| p.0).collect();
    let span =
        e0.iter().cloned().fold(0.0, f64::max) / e0.iter().cloned().fold(f64::INFINITY, f64::min);
    let worst = fixed.iter().map(|p| p.1).fold(0.0, f64::max);
    let ibvs_t: Vec<f64> = ibvs.iter().map(|p| p.1).collect();
    let rho = rank_correlation(&e0, &ibvs_t);
    let ibvs_worst = ibvs_t.iter().cloned().fold(0.0, f64::max);
    let fmt = |v: &[(f64, f64)]| {
        v.iter()
            .map(|p| format!("{:.2}", p.1))
            .collect::<Vec<_>>()
            .join(" ")
    };
    verdict(
        span >= 100.0 && worst <= t_max && rho > 0.8 && ibvs_worst > worst,
        format!(
            "|e_s(0)| {:.4}..{:.4} (x{span:.0}); T_max {t_max:.2} s; cftsmc settle [{}] worst {worst:.2} s; \
             ibvs settle [{}], rank corr {rho:.2}",
            e0[0],
            e0[e0.len() - 1],
            fmt(&fixed),
            fmt(&ibvs)
        ),
    )
}

fn criterion6() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for mut s in sim::scenario_test1() {
        s.disturbance.feature_noise = 2e-3;
        s.disturbance.stiffness_ratio = 0.8;
        let bound = s.controller.rbf.bound;
        match timed_run(&s) {
            Ok((log, _)) => {
                let (ok, note) = test1_bounds(&log, 0.1, 0.04);
                let w = log
                    .records
                    .iter()
                    .map(|r| r.w_s_norm.max(r.w_f_norm))
                    .fold(0.0, f64::max);
                pass &= ok && w <= bound;
                notes.push(format!("{note}, max |W| {w:.3} <= {bound}"));
            }
            Err(e) => {
                pass = false;
                notes.push(e);
            }
        }
    }
    verdict(pass, notes.join("; "))
}

fn criterion7() -> Verdict {
    let dir = out_dir().join("determinism");
    let _ = std::fs::remove_dir_all(&dir);
    let dir_s = dir.to_string_lossy().to_string();
    let mut sink = Vec::new();
    let emit = run_with(
        ["tdacm", "scenario", "test1", "--emit", "--out", &dir_s],
        &mut sink,
        &mut Vec::new(),
    );
    let scenario = dir.join("test1-a.json").to_string_lossy().to_string();
    let mut bytes = Vec::new();
    for run in ["one", "two"] {
        let out = dir.join(run).to_string_lossy().to_string();
        let code = run_with(
            ["tdacm", "run", &scenario, "--out", &out],
            &mut sink,
            &mut Vec::new(),
        );
        if emit != 0 || code != 0 {
            return verdict(false, format!("CLI exit codes emit {emit}, run {code}"));
        }
        bytes.push(std::fs::read(dir.join(run).join("test1-a.csv")).unwrap_or_default());
    }
    let identical = !bytes[0].is_empty() && bytes[0] == bytes[1];

    let mut s = sim::scenario_test1()[0].clone();
    s.disturbance.feature_noise = 2e-3;
    s.duration = 5.0;
    let log = match sim::run(&s) {
        Ok(l) => l,
        Err(f) => return verdict(false, f.error.to_string()),
    };
    let text = csv_string(&log);
    let parsed = match parse_csv(&text, "memory") {
        Ok(p) => p,
        Err(e) => return verdict(false, e.to_string()),
    };
    let bits = |v: &nalgebra::DVector<f64>| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let lossless = parsed.len() == log.records.len()
        && parsed.iter().zip(rows_of(&log)).all(|(a, b)| {
            a.t.to_bits() == b.t.to_bits()
                && a.f_n.to_bits() == b.f_n.to_bits()
                && a.e_f.to_bits() == b.e_f.to_bits()
                && a.p_t.to_bits() == b.p_t.to_bits()
                && bits(&a.q) == bits(&b.q)
                && bits(&a.s) == bits(&b.s)
                && bits(&a.e_s) == bits(&b.e_s)
                && bits(&a.qdot_des) == bits(&b.qdot_des)
                && a.flags == b.flags
        });
    verdict(
        identical && lossless,
        format!(
            "two CLI runs byte-identical: {identical} ({} bytes); noisy log round-trip bit-exact: {lossless} ({} rows)",
            bytes[0].len(),
            parsed.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("oracle suite", criterion1),
        ("Test 1 reproduction", criterion2),
        ("Test 2 tracking", criterion3),
        ("Test 3 ordering", criterion4),
        ("fixed-time settling", criterion5),
        ("robustness under noise and stiffness mismatch", criterion6),
        ("determinism and CSV round-trip", criterion7),
    ];
    let mut all = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let v = f();
        all &= v.pass;
        println!(
            "{} criterion {} ({name}, {:.1} s): {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            t0.elapsed().as_secs_f64(),
            v.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
