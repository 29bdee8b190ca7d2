use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Kind, Method};
use super::summary::{summarize, summarize_by, total_variation, Bin, Summary, TrialResult};
use super::HarnessError;
use crate::bounds::{optimize_tail, theorem_envelope, Direction, Envelope, Pgf, TailBound};
use crate::instance::PreferenceInstance;
use crate::matching::stable_husbands;
use crate::oracle::{enumerate_stable, DEFAULT_LIMIT};
use crate::process::{
    self, audit_window, lemma_audit, AuditReport, LemmaCheck, RunConfig, StopRule,
};
use crate::rng::{self, trial_seed};
use crate::special::{harmonic, harmonic2};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Gate {
    fn new(name: &str, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = lower.is_none_or(|l| value >= l) && upper.is_none_or(|u| value <= u);
        Gate {
            name: name.to_string(),
            value,
            lower,
            upper,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialFailure {
    pub n: usize,
    pub trial: u64,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaRate {
    pub lemma: &'static str,
    pub statement: &'static str,
    pub passed_trials: usize,
    pub pass_rate: f64,
    pub max_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedAudit {
    pub trial: u64,
    pub seed: u64,
    pub checks: Vec<LemmaCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCheck {
    pub r: f64,
    /// Fraction of trials at or beyond `r`.
    pub frequency: f64,
    pub bound: TailBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Detail {
    Theorem {
        method: Method,
        envelope: Envelope,
        proof_inside_fraction: f64,
        sharp_inside_fraction: f64,
        below_fraction: f64,
        above_fraction: f64,
        oracle_checked: usize,
    },
    Equivalence {
        a: Summary,
        b: Summary,
        total_variation: f64,
    },
    LemmaAudit {
        delta: f64,
        window: u64,
        pass_rate: f64,
        lemmas: Vec<LemmaRate>,
        first_failure: Option<FailedAudit>,
    },
    AcceptanceDist {
        m: u64,
        epsilon: f64,
        harmonic: f64,
        expected_variance: f64,
        standard_error: f64,
        upper: TailCheck,
        lower: TailCheck,
    },
    Coupon {
        window: Option<f64>,
        coupon_mean: f64,
        first_output: Summary,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeReport {
    pub n: usize,
    pub summary: Summary,
    pub detail: Detail,
    pub gates: Vec<Gate>,
}

/// Everything about a campaign except wall-clock timings, so equal
/// configs give byte-equal JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub sizes: Vec<SizeReport>,
    pub failures: Vec<TrialFailure>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn gate(&self, n: usize, name: &str) -> Option<&Gate> {
        self.sizes
            .iter()
            .find(|s| s.n == n)?
            .gates
            .iter()
            .find(|g| g.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct SizeTrials {
    pub n: usize,
    pub results: Vec<TrialResult>,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub trials: Vec<SizeTrials>,
}

/// Runs a campaign on a pool of `config.workers` threads (all cores when
/// unset). Trial `i` at size `n` always uses
/// `trial_seed(trial_seed(master_seed, n), i)`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun, HarnessError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let mut sizes = Vec::new();
    let mut trials = Vec::new();
    let mut failures = Vec::new();
    for n in config.n.list() {
        let size = Size {
            config,
            pool: &pool,
            n,
            seed: trial_seed(config.master_seed, n as u64),
        };
        let (report, results, mut failed) = match config.kind {
            Kind::Theorem => size.theorem()?,
            Kind::Equivalence => size.equivalence()?,
            Kind::LemmaAudit => size.lemma_audit()?,
            Kind::AcceptanceDist => size.acceptance_dist()?,
            Kind::Coupon => size.coupon()?,
        };
        sizes.push(report);
        trials.push(SizeTrials { n, results });
        failures.append(&mut failed);
    }
    let passed = failures.is_empty() && sizes.iter().all(|s| s.gates.iter().all(|g| g.passed));
    Ok(ExperimentRun {
        report: ExperimentReport {
            config: config.clone(),
            sizes,
            failures,
            passed,
        },
        trials,
    })
}

type SizeOutcome = (SizeReport, Vec<TrialResult>, Vec<TrialFailure>);

struct Size<'a> {
    config: &'a ExperimentConfig,
    pool: &'a rayon::ThreadPool,
    n: usize,
    seed: u64,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_micros() as u64)
}

fn fraction(results: &[TrialResult], pred: impl Fn(f64) -> bool) -> f64 {
    results
        .iter()
        .filter(|r| pred(r.husband_count as f64))
        .count() as f64
        / results.len() as f64
}

impl Size<'_> {
    /// Maps trial indices `start..start + count` in parallel, keeping
    /// index order.
    fn par_map<T: Send>(&self, start: u64, count: u64, f: impl Fn(u64, u64) -> T + Sync) -> Vec<T> {
        let seed = self.seed;
        self.pool.install(|| {
            (start..start + count)
                .into_par_iter()
                .map(|i| f(i, trial_seed(seed, i)))
                .collect()
        })
    }

    fn trials(&self) -> u64 {
        self.config.trials as u64
    }

    fn failure(&self, r: &TrialResult, message: String) -> TrialFailure {
        TrialFailure {
            n: self.n,
            trial: r.trial,
            seed: r.seed,
            message,
        }
    }

    fn natural_b(&self, trial: u64, seed: u64) -> TrialResult {
        let config = RunConfig {
            n: self.n,
            girl: self.config.girl,
            seed,
            max_proposals: u64::MAX,
            stop: StopRule::Natural,
            mode: self.config.mode,
        };
        let (out, elapsed_us) = timed(|| process::run(&config));
        TrialResult {
            trial,
            seed,
            husband_count: out.husband_count() as u64,
            first_output_time: out.stats.first_output_time,
            accept_pre_output: Some(out.stats.acceptances_by_g_before_first_output),
            elapsed_us,
        }
    }

    /// Algorithm A on a fresh uniform instance. With `verify`, every girl's
    /// husband set, the worst-first order and the first matching are
    /// compared with the oracle.
    fn enumerate_a(&self, trial: u64, seed: u64, verify: bool) -> (TrialResult, Option<String>) {
        let g = self.config.girl;
        let ((count, problem), elapsed_us) = timed(|| {
            let inst = PreferenceInstance::generate_uniform(self.n, seed).expect("n >= 1");
            let found = stable_husbands(&inst, g, false).expect("girl in range");
            let problem = if verify {
                oracle_disagreement(&inst)
            } else {
                None
            };
            (found.husbands.len() as u64, problem)
        });
        let r = TrialResult {
            trial,
            seed,
            husband_count: count,
            first_output_time: None,
            accept_pre_output: None,
            elapsed_us,
        };
        (r, problem)
    }

    fn theorem(&self) -> Result<SizeOutcome, HarnessError> {
        let cfg = self.config;
        let n = self.n as f64;
        let envelope = theorem_envelope(n, cfg.c, cfg.big_c, cfg.delta(), cfg.epsilon())
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let verify = cfg.verify_with_oracle;
        let rows: Vec<(TrialResult, Option<String>)> = match cfg.method {
            Method::A => self.par_map(0, self.trials(), |i, s| self.enumerate_a(i, s, verify)),
            Method::B => self.par_map(0, self.trials(), |i, s| (self.natural_b(i, s), None)),
        };
        let mut failures = Vec::new();
        let mut results = Vec::with_capacity(rows.len());
        for (r, problem) in rows {
            if let Some(msg) = problem {
                failures.push(self.failure(&r, msg));
            }
            if r.husband_count == 0 {
                failures.push(self.failure(&r, "no stable husband found".into()));
            }
            results.push(r);
        }
        let summary = summarize(&results, envelope.interval)?;
        let within = |iv: [f64; 2]| fraction(&results, |x| iv[0] <= x && x <= iv[1]);
        let ln_n = envelope.ln_n;
        let gates = vec![
            Gate::new(
                "inside_fraction",
                summary.in_envelope_fraction,
                Some(0.95),
                None,
            ),
            Gate::new(
                "median",
                summary.p50 as f64,
                Some(0.5 * ln_n - 2.0),
                Some(ln_n + 2.0),
            ),
        ];
        let detail = Detail::Theorem {
            method: cfg.method,
            proof_inside_fraction: within(envelope.proof_interval),
            sharp_inside_fraction: within(envelope.sharp_interval),
            below_fraction: fraction(&results, |x| x < envelope.interval[0]),
            above_fraction: fraction(&results, |x| x > envelope.interval[1]),
            oracle_checked: if verify { results.len() } else { 0 },
            envelope,
        };
        Ok((self.report(summary, detail, gates), results, failures))
    }

    fn interval(&self) -> [f64; 2] {
        let ln_n = (self.n as f64).ln();
        [self.config.c * ln_n, self.config.big_c * ln_n]
    }

    /// Trial `i` runs Algorithm A; trial `trials + i` runs the random
    /// process.
    fn equivalence(&self) -> Result<SizeOutcome, HarnessError> {
        let t = self.trials();
        let a: Vec<TrialResult> = self.par_map(0, t, |i, s| self.enumerate_a(i, s, false).0);
        let b: Vec<TrialResult> = self.par_map(t, t, |i, s| self.natural_b(i, s));
        let envelope = self.interval();
        let sa = summarize(&a, envelope)?;
        let sb = summarize(&b, envelope)?;
        let tv = total_variation(&sa, &sb);
        let failures = a
            .iter()
            .chain(&b)
            .filter(|r| r.husband_count == 0)
            .map(|r| self.failure(r, "no stable husband found".into()))
            .collect();
        let gates = vec![Gate::new("total_variation", tv, None, Some(0.05))];
        let summary = sa.clone();
        let detail = Detail::Equivalence {
            a: sa,
            b: sb,
            total_variation: tv,
        };
        let results = a.into_iter().chain(b).collect();
        Ok((self.report(summary, detail, gates), results, failures))
    }

    fn lemma_audit(&self) -> Result<SizeOutcome, HarnessError> {
        let delta = self.config.delta();
        let window = audit_window(self.n, delta);
        let rows: Vec<(TrialResult, Result<AuditReport, String>)> =
            self.par_map(0, self.trials(), |trial, seed| {
                let config = RunConfig {
                    n: self.n,
                    girl: self.config.girl,
                    seed,
                    max_proposals: window,
                    stop: StopRule::TimeCap,
                    mode: self.config.mode,
                };
                let ((out, audit), elapsed_us) = timed(|| {
                    let out = process::run(&config);
                    let audit = lemma_audit(&out.stats, self.n, delta).map_err(|e| e.to_string());
                    (out, audit)
                });
                let r = TrialResult {
                    trial,
                    seed,
                    husband_count: out.husband_count() as u64,
                    first_output_time: out.stats.first_output_time,
                    accept_pre_output: Some(out.stats.acceptances_by_g_before_first_output),
                    elapsed_us,
                };
                (r, audit)
            });
        let mut failures = Vec::new();
        let mut audits = Vec::new();
        let mut results = Vec::new();
        for (r, audit) in rows {
            match audit {
                Ok(a) => audits.push((r.trial, r.seed, a)),
                Err(msg) => failures.push(self.failure(&r, msg)),
            }
            results.push(r);
        }
        let mut lemmas: Vec<LemmaRate> = Vec::new();
        for (_, _, audit) in &audits {
            for (k, check) in audit.checks.iter().enumerate() {
                if lemmas.len() <= k {
                    lemmas.push(LemmaRate {
                        lemma: check.lemma,
                        statement: check.statement,
                        passed_trials: 0,
                        pass_rate: 0.0,
                        max_violations: 0,
                    });
                }
                let rate = &mut lemmas[k];
                rate.passed_trials += check.passed as usize;
                rate.max_violations = rate.max_violations.max(check.violations);
            }
        }
        let total = results.len() as f64;
        for rate in &mut lemmas {
            rate.pass_rate = rate.passed_trials as f64 / total;
        }
        let pass_rate = audits.iter().filter(|(_, _, a)| a.passed).count() as f64 / total;
        let first_failure = audits
            .iter()
            .find(|(_, _, a)| !a.passed)
            .map(|(trial, seed, a)| FailedAudit {
                trial: *trial,
                seed: *seed,
                checks: a.checks.iter().filter(|c| !c.passed).cloned().collect(),
            });
        let summary = summarize(&results, self.interval())?;
        let gates = vec![Gate::new("audit_pass_rate", pass_rate, Some(1.0), None)];
        let detail = Detail::LemmaAudit {
            delta,
            window,
            pass_rate,
            lemmas,
            first_failure,
        };
        Ok((self.report(summary, detail, gates), results, failures))
    }

    /// A girl receiving `m` proposals accepts the k-th with probability 1/k.
    fn acceptance_dist(&self) -> Result<SizeOutcome, HarnessError> {
        let m = self.config.m_for(self.n);
        let eps = self.config.epsilon();
        let results: Vec<TrialResult> = self.par_map(0, self.trials(), |trial, seed| {
            let (count, elapsed_us) = timed(|| {
                let mut rng = rng::from_seed(seed);
                (1..=m)
                    .filter(|&k| rng.random::<f64>() * (k as f64) < 1.0)
                    .count() as u64
            });
            TrialResult {
                trial,
                seed,
                husband_count: count,
                first_output_time: None,
                accept_pre_output: None,
                elapsed_us,
            }
        });
        let ln_m = (m as f64).ln();
        let (r_hi, r_lo) = ((1.0 + eps) * ln_m, (1.0 - eps) * ln_m);
        let summary = summarize(&results, [r_lo, r_hi])?;
        let pgf = Pgf::acceptances(m);
        let bound =
            |dir, r| optimize_tail(&pgf, dir, r).map_err(|e| HarnessError::Config(e.to_string()));
        let upper = TailCheck {
            r: r_hi,
            frequency: fraction(&results, |x| x >= r_hi),
            bound: bound(Direction::Upper, r_hi)?,
        };
        let lower = TailCheck {
            r: r_lo,
            frequency: fraction(&results, |x| x <= r_lo),
            bound: bound(Direction::Lower, r_lo)?,
        };
        let h = harmonic(m);
        let se = (summary.variance / results.len() as f64).sqrt();
        let gates = vec![
            Gate::new("mean", summary.mean, Some(h - 3.0 * se), Some(h + 3.0 * se)),
            Gate::new("upper_tail", upper.frequency, None, Some(upper.bound.value)),
        ];
        let detail = Detail::AcceptanceDist {
            m,
            epsilon: eps,
            harmonic: h,
            expected_variance: h - harmonic2(m),
            standard_error: se,
            upper,
            lower,
        };
        Ok((self.report(summary, detail, gates), results, Vec::new()))
    }

    fn coupon(&self) -> Result<SizeOutcome, HarnessError> {
        let results: Vec<TrialResult> = self.par_map(0, self.trials(), |trial, seed| {
            let config = RunConfig {
                n: self.n,
                girl: self.config.girl,
                seed,
                max_proposals: u64::MAX,
                stop: StopRule::FirstOutput,
                mode: self.config.mode,
            };
            let (out, elapsed_us) = timed(|| process::run(&config));
            TrialResult {
                trial,
                seed,
                husband_count: out.husband_count() as u64,
                first_output_time: out.stats.first_output_time,
                accept_pre_output: Some(out.stats.acceptances_by_g_before_first_output),
                elapsed_us,
            }
        });
        let failures = results
            .iter()
            .filter(|r| r.first_output_time.is_none())
            .map(|r| self.failure(r, "run ended without an output".into()))
            .collect();
        let n = self.n as f64;
        let lnln = n.ln().ln();
        let window = (lnln > 0.0).then(|| (n * n.ln() * lnln).floor());
        let first_output = summarize_by(&results, [0.0, window.unwrap_or(f64::MAX)], |r| {
            r.first_output_time.unwrap_or(u64::MAX)
        })?;
        let coupon_mean = n * harmonic(self.n as u64);
        let mut gates = Vec::new();
        if window.is_some() {
            gates.push(Gate::new(
                "within_window",
                first_output.in_envelope_fraction,
                Some(0.99),
                None,
            ));
        }
        gates.push(Gate::new(
            "mean_first_output",
            first_output.mean,
            Some(0.85 * coupon_mean),
            Some(1.15 * coupon_mean),
        ));
        let summary = summarize(&results, self.interval())?;
        let detail = Detail::Coupon {
            window,
            coupon_mean,
            first_output,
        };
        Ok((self.report(summary, detail, gates), results, failures))
    }

    fn report(&self, summary: Summary, detail: Detail, gates: Vec<Gate>) -> SizeReport {
        SizeReport {
            n: self.n,
            summary,
            detail,
            gates,
        }
    }
}

fn oracle_disagreement(inst: &PreferenceInstance) -> Option<String> {
    let truth = enumerate_stable(inst, DEFAULT_LIMIT).expect("n within oracle limit");
    let optimal = truth.boy_optimal(inst);
    for g in 0..inst.n() {
        let found = stable_husbands(inst, g, false).expect("girl in range");
        let mut got = found.husbands.clone();
        got.sort_unstable();
        let want: Vec<_> = truth.husband_sets[g].iter().copied().collect();
        if got != want {
            return Some(format!(
                "girl {g}: enumeration found {got:?}, oracle {want:?}"
            ));
        }
        if found.husbands.first().copied() != truth.worst_husband(inst, g) {
            return Some(format!(
                "girl {g}: first output is not her worst stable husband"
            ));
        }
        let first: Vec<_> = (0..inst.n()).map(|b| found.matchings[0].wife(b)).collect();
        if first.iter().zip(&optimal).any(|(w, o)| *w != Some(*o)) {
            return Some(format!("girl {g}: first matching is not boy-optimal"));
        }
    }
    None
}

/// Two-column `value<TAB>frequency` rows.
pub fn plot_rows(histogram: &[Bin]) -> String {
    histogram
        .iter()
        .map(|b| format!("{}\t{}\n", b.value, b.frequency))
        .collect()
}
