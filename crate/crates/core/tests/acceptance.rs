//! Acceptance gate. Every criterion prints one PASS/FAIL line (visible with
//! `--nocapture`) and then asserts it.

mod common;

use std::time::{Duration, Instant};

use common::{binomial, grid, stirling};
use stable_husbands::bounds::{tail_bound, Direction, Pgf};
use stable_husbands::harness::{
    run_experiment, Detail, ExperimentConfig, ExperimentReport, Kind, Method, Sizes,
};
use stable_husbands::labels::Labels;
use stable_husbands::matching::trace_table;
use stable_husbands::process::{self, audit_window, lemma_audit, RunConfig, StopRule};
use stable_husbands::special::harmonic;
use stable_husbands::{Matching, PreferenceInstance};

fn verdict(id: u32, title: &str, passed: bool, detail: String) {
    println!(
        "criterion {id} {}: {title}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {id} ({title}) failed: {detail}");
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn oracle_config(workers: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Kind::Theorem, 0, 1000, 0x5eed_0002);
    c.n = Sizes::Sweep((2..=7).collect());
    c.verify_with_oracle = true;
    c.workers = Some(workers);
    c
}

fn equivalence_config(workers: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Kind::Equivalence, 3, 20_000, 0x5eed_0003);
    c.workers = Some(workers);
    c
}

fn theorem_config(workers: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Kind::Theorem, 1024, 200, 0x5eed_0006);
    c.method = Method::B;
    c.c = 0.3;
    c.big_c = 2.0;
    c.workers = Some(workers);
    c
}

fn run(config: &ExperimentConfig) -> (ExperimentReport, Duration) {
    let start = Instant::now();
    let report = run_experiment(config).expect("valid config").report;
    (report, start.elapsed())
}

#[test]
fn criterion_1_fixture_exactness() {
    let fixture = PreferenceInstance::four_couples();
    let start = Instant::now();
    let found = stable_husbands::stable_husbands(&fixture, 0, true).unwrap();
    let elapsed = start.elapsed();
    let labels = Labels::Letters;
    let husbands: Vec<String> = found.husbands.iter().map(|&b| labels.boy(b)).collect();
    let matchings = [
        Matching::from_husbands(&[3, 0, 1, 2]).unwrap(),
        Matching::from_husbands(&[2, 0, 1, 3]).unwrap(),
    ];
    let expected = [
        "A1||W||",
        "A2||W|A|A accepts W",
        "A1|AW|X||",
        "A2|AW|X|C|C accepts X",
        "A1|AW,CX|Y||",
        "A2|AW,CX|Y|B|B accepts Y",
        "A1|AW,BY,CX|Z||",
        "A2|AW,BY,CX|Z|B|B rejects Z",
        "A2|AW,BY,CX|Z|A|A accepts Z",
        "A2|AZ,BY,CX|W|B|B accepts W",
        "A2|AZ,BW,CX|Y|D|D accepts Y",
        "A1|AZ,BW,CX,DY|Z||output Z",
        "A2|(AZ),BW,CX,DY|Z|C|C rejects Z",
        "A2|(AZ),BW,CX,DY|Z|D|D accepts Z",
        "A2|(AZ),BW,CX,DZ|Y|A|A accepts Y",
        "A1|AY,BW,CX,DZ|Y||output Y",
        "A2|(AY),BW,CX,DZ|Y|C|C accepts Y",
        "A2|(AY),BW,CY,DZ|X|A|A rejects X",
        "A2|(AY),BW,CY,DZ|X|D|D accepts X",
        "A2|(AY),BW,CY,DX|Z||terminate.",
    ];
    let rows: Vec<String> = trace_table(&found, labels)
        .iter()
        .map(|r| r.join("|"))
        .collect();
    let passed = husbands == ["Z", "Y"]
        && found.matchings == matchings
        && rows == expected
        && elapsed < Duration::from_millis(1);
    verdict(
        1,
        "fixture exactness",
        passed,
        format!(
            "husbands {husbands:?}, {} trace rows, {:?}",
            rows.len(),
            elapsed
        ),
    );
}

#[test]
fn criterion_2_oracle_equivalence() {
    let (report, elapsed) = run(&oracle_config(4));
    let checked: usize = report
        .sizes
        .iter()
        .map(|s| match &s.detail {
            Detail::Theorem { oracle_checked, .. } => *oracle_checked,
            _ => 0,
        })
        .sum();
    let passed = report.failures.is_empty() && checked == 6000 && elapsed < Duration::from_secs(60);
    let first = report
        .failures
        .first()
        .map(|f| format!(", first: {f:?}"))
        .unwrap_or_default();
    verdict(
        2,
        "oracle equivalence",
        passed,
        format!(
            "{checked} instances, {} mismatches{first}, {}",
            report.failures.len(),
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_3_model_equivalence() {
    let (report, elapsed) = run(&equivalence_config(4));
    let tv = report.gate(3, "total_variation").unwrap().value;
    let passed = tv <= 0.05 && report.failures.is_empty() && elapsed < Duration::from_secs(30);
    verdict(
        3,
        "model equivalence",
        passed,
        format!("TV {tv:.4} (limit 0.05), {}", secs(elapsed)),
    );
}

#[test]
fn criterion_4_acceptance_distribution() {
    let mut c = ExperimentConfig::new(Kind::AcceptanceDist, 1, 2000, 0x5eed_0004);
    c.m = Some(10_000);
    c.epsilon = Some(0.5);
    let (report, elapsed) = run(&c);
    let Detail::AcceptanceDist {
        harmonic: h,
        standard_error,
        upper,
        ..
    } = &report.sizes[0].detail
    else {
        panic!("wrong detail");
    };
    let mean = report.sizes[0].summary.mean;
    let r = 1.5 * (10_000f64).ln();
    let passed = (h - harmonic(10_000)).abs() < 1e-12
        && (mean - h).abs() <= 3.0 * standard_error
        && (upper.r - r).abs() < 1e-12
        && upper.frequency <= upper.bound.value
        && elapsed < Duration::from_secs(30);
    verdict(
        4,
        "acceptance distribution",
        passed,
        format!(
            "mean {mean:.4} vs H_m {h:.4} (3 se = {:.4}), Pr(X >= {r:.2}) = {:.4} <= bound {:.4}, {}",
            3.0 * standard_error,
            upper.frequency,
            upper.bound.value,
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_5_tail_bound_soundness() {
    let start = Instant::now();
    let mut cases = vec![(Pgf::binomial(2, 10), binomial(2, 10))];
    cases.extend((1..=12).map(|m| (Pgf::acceptances(m), stirling(m))));
    let (mut probes, mut violations) = (0usize, Vec::new());
    for (pgf, dist) in &cases {
        for direction in [Direction::Lower, Direction::Upper] {
            for r in 0..=dist.support() {
                let exact = dist.tail(direction, r as f64);
                for x in grid(direction) {
                    let value = tail_bound(pgf, direction, r as f64, x).unwrap().value;
                    probes += 1;
                    if value < exact {
                        violations.push((*pgf, direction, r, x, value, exact));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = violations.is_empty() && elapsed < Duration::from_secs(5);
    verdict(
        5,
        "tail-bound soundness",
        passed,
        format!(
            "{probes} probes, {} violations {:?}, {}",
            violations.len(),
            violations.first(),
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_6_theorem_at_desk_scale() {
    let (report, elapsed) = run(&theorem_config(4));
    let inside = report.gate(1024, "inside_fraction").unwrap();
    let median = report.gate(1024, "median").unwrap();
    let s = &report.sizes[0].summary;
    let passed = inside.passed
        && median.passed
        && report.failures.is_empty()
        && elapsed < Duration::from_secs(600);
    verdict(
        6,
        "theorem at desk scale",
        passed,
        format!(
            "{:.3} inside [{:.2}, {:.2}] (need >= 0.95), median {} in [{:.2}, {:.2}], {}",
            inside.value,
            s.envelope[0],
            s.envelope[1],
            s.p50,
            median.lower.unwrap(),
            median.upper.unwrap(),
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_7_coupon_window() {
    let c = ExperimentConfig::new(Kind::Coupon, 1000, 100, 0x5eed_0007);
    let (report, elapsed) = run(&c);
    let window = report.gate(1000, "within_window").unwrap();
    let mean = report.gate(1000, "mean_first_output").unwrap();
    let n_h_n = 1000.0 * harmonic(1000);
    let passed = window.passed && mean.passed && elapsed < Duration::from_secs(120);
    verdict(
        7,
        "coupon window",
        passed,
        format!(
            "{:.2} within window, mean {:.1} vs n H_n {n_h_n:.1} (+-15%), {}",
            window.value,
            mean.value,
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_8_lemma_audits() {
    let (n, delta) = (1024, 0.3);
    let start = Instant::now();
    let config = RunConfig {
        n,
        girl: 0,
        seed: 0x5eed_0008,
        max_proposals: audit_window(n, delta),
        stop: StopRule::TimeCap,
        mode: Default::default(),
    };
    let out = process::run(&config);
    let audit = lemma_audit(&out.stats, n, delta).unwrap();
    let elapsed = start.elapsed();
    let failed: Vec<String> = audit
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| {
            format!(
                "{} ({} of {} outside [{:?}, {:?}], e.g. {:?})",
                c.lemma,
                c.violations,
                c.checked,
                c.lower,
                c.upper,
                c.offenders.first()
            )
        })
        .collect();
    let passed = audit.passed && elapsed < Duration::from_secs(60);
    verdict(
        8,
        "lemma audits",
        passed,
        format!(
            "window {}, {}/7 audits pass; failing: {}; {}",
            audit.window,
            audit.checks.iter().filter(|c| c.passed).count(),
            if failed.is_empty() {
                "none".into()
            } else {
                failed.join("; ")
            },
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_9_determinism() {
    let mut differing = Vec::new();
    for (name, make) in [
        ("oracle", oracle_config as fn(usize) -> ExperimentConfig),
        ("equivalence", equivalence_config),
        ("theorem", theorem_config),
    ] {
        let one = run(&make(1)).0.to_json();
        let three = run(&make(3)).0.to_json();
        if one != three {
            differing.push(name);
        }
    }
    verdict(
        9,
        "determinism across worker counts",
        differing.is_empty(),
        format!("reports differing between 1 and 3 workers: {differing:?}"),
    );
}
