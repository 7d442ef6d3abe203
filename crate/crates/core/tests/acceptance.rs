//! Acceptance criteria 1–9 on the default configuration. Prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

use mop_core::harness::*;
use std::time::{Duration, Instant};

struct Verdict {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
    failures: Vec<String>,
}

fn judge(id: &'static str, name: &'static str, reports: &[&AsymptoticReport], limit: Option<(Duration, Duration)>, detail: String) -> Verdict {
    let mut failures: Vec<String> = reports.iter().flat_map(|r| r.criterion(id)).filter(|c| !c.pass).map(|c| format!("{}: {:?}", c.rule, c.values)).collect();
    let any = reports.iter().any(|r| r.criterion(id).next().is_some());
    if !any {
        failures.push("no checks recorded".into());
    }
    if let Some((took, max)) = limit {
        if took > max {
            failures.push(format!("runtime {took:.1?} exceeds {max:?}"));
        }
    }
    Verdict { id, name, pass: failures.is_empty(), detail, failures }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn ps(r: &AsymptoticReport) -> String {
    let p: Vec<String> = r.series.iter().filter(|s| !s.probe.starts_with("control")).map(|s| format!("{:.2}", s.p())).collect();
    p.join(" ")
}

fn main() {
    let cfg = ExperimentConfig::default();
    let start = Instant::now();
    let mut verdicts = Vec::new();

    let (oracle, t1) = timed(|| exp_oracle_integrity(&cfg).expect("oracle"));
    verdicts.push(judge(
        "C1",
        "oracle integrity",
        &[&oracle],
        Some((t1, Duration::from_secs(60))),
        format!("{} draws, max residual {:.1e}, {t1:.1?}", oracle.series.len(), max_of(oracle.series.iter().map(|s| s.error[0]))),
    ));

    let (outer, t2) = timed(|| exp_outer_asymptotics(&cfg).expect("outer"));
    verdicts.push(judge("C2", "outer strong asymptotics", &[&outer], Some((t2, Duration::from_secs(600))), format!("p = {} ({t2:.1?})", ps(&outer))));

    let ((hard, soft), t3) = timed(|| (exp_edge_asymptotics(&cfg, Edge::Hard).expect("hard edge"), exp_edge_asymptotics(&cfg, Edge::Soft).expect("soft edge")));
    verdicts.push(judge(
        "C3",
        "edge asymptotics",
        &[&hard, &soft],
        Some((t3, Duration::from_secs(600))),
        format!("hard p = {}, soft p = {} ({t3:.1?})", ps(&hard), ps(&soft)),
    ));

    let reg = exp_regularity_suite(&cfg).expect("regularity");
    let value = |id: &str, rule: &str| reg.checks.iter().find(|c| c.criterion == id && c.rule.starts_with(rule)).map_or(f64::NAN, |c| c.values[0]);
    verdicts.push(judge(
        "C4",
        "permutation jumps of N",
        &[&reg],
        None,
        format!("max residual {:.1e}, |N - I| at 1e4 {:.1e}", value("C4", "max jump"), value("C4", "max |N")),
    ));
    let halving = |name: &str| reg.series(&format!("matching {name}")).map_or(String::new(), |s| format!("{name} {:.2?}", s.halving));
    verdicts.push(judge("C5", "matching decay", &[&reg], None, format!("{}, {}; {} not gated", halving("U0"), halving("Ux0"), halving("U-x1"))));
    verdicts.push(judge("C6", "lens decay", &[&reg], None, format!("slope {:.3e}, R^2 {:.6}", value("C6", "slope"), value("C6", "R^2"))));

    let err = exp_error_rhp(&cfg).expect("error problem");
    let p = |name: &str| err.series(name).map_or(f64::NAN, |s| s.p());
    verdicts.push(judge("C7", "small-norm solver", &[&err], None, format!("p(|R - I|) = {:.2}, p(|R1|) = {:.2}", p("|R - I|"), p("|R1|"))));
    verdicts.push(judge(
        "C8",
        "sign chart",
        &[&reg],
        None,
        format!("min Re phi on lips {:.3e}, max |Re phi| on conductors {:.1e}", value("C8", "min Re"), value("C8", "max |Re")),
    ));

    let zeros = exp_zero_distribution(&cfg).expect("zeros");
    let errs = |name: &str| zeros.series(name).map_or(String::new(), |s| s.error.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" "));
    verdicts.push(judge(
        "C9",
        "zero distribution",
        &[&zeros],
        None,
        format!("gaps {}, Kolmogorov {}", errs("largest-zero gap |x0 - x_max|"), errs("Kolmogorov distance")),
    ));

    let mut failed = 0;
    for v in &verdicts {
        println!("{} {} {}: {}", v.id, if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
        for f in &v.failures {
            println!("    {f}");
        }
        failed += usize::from(!v.pass);
    }
    println!("{} of {} criteria pass ({:.1?})", verdicts.len() - failed, verdicts.len(), start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
