//! The husband enumeration run on random preferences, with preferences
//! revealed only as they are consulted.
//!
//! A proposer picks a girl uniformly at random. In the amnesia model he may
//! pick a girl he has already asked; such a *redundant* proposal costs one
//! time unit and is always rejected. A girl receiving her k-th non-redundant
//! proposal accepts it with probability 1/k, which is the chance that the
//! newcomer beats every earlier suitor. The state is
//!
//! * `A_b`: girls boy `b` has proposed to,
//! * `l`: boys that have been proposer so far,
//! * `p`: the current proposer,
//! * `x_j`: the boy holding girl `j`'s best offer,
//! * `k_j`: non-redundant proposals girl `j` has received.
//!
//! Steps: **B1** promote the next fresh boy, or once all `n` have been used
//! output `x_g` and let him propose. **B2** draw `h`; redundant proposals
//! repeat B2. **B3** bump `k_h` and accept with probability `1/k_h`,
//! swapping `p` with `x_h`. Control returns to B1 when the displaced boy is
//! nobody, or when `g` accepts after the first output.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;
use crate::{Boy, Girl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProposalMode {
    /// Uniform over all girls; repeats are redundant and rejected.
    #[default]
    Amnesia,
    /// Uniform over the girls the proposer has not tried yet.
    Memory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop once a proposer who has tried every girl is rejected, the
    /// point where the deterministic enumeration would terminate.
    Natural,
    /// Stop after exactly `max_proposals` proposals.
    TimeCap,
    /// Stop at the first output.
    FirstOutput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Natural,
    TimeCap,
    FirstOutput,
}

/// Proposal counts per (boy, girl). Dense up to `DENSE_LIMIT` people per
/// side, hashed beyond.
#[derive(Debug, Clone)]
enum PairCounts {
    Dense { n: usize, counts: Vec<u32> },
    Sparse(HashMap<(u32, u32), u32>),
}

const DENSE_LIMIT: usize = 2048;

impl PairCounts {
    fn new(n: usize) -> Self {
        if n <= DENSE_LIMIT {
            PairCounts::Dense {
                n,
                counts: vec![0; n * n],
            }
        } else {
            PairCounts::Sparse(HashMap::new())
        }
    }

    #[inline]
    fn increment(&mut self, b: Boy, g: Girl) -> u32 {
        let slot = match self {
            PairCounts::Dense { n, counts } => &mut counts[b * *n + g],
            PairCounts::Sparse(map) => map.entry((b as u32, g as u32)).or_insert(0),
        };
        let prior = *slot;
        *slot += 1;
        prior
    }

    fn get(&self, b: Boy, g: Girl) -> u32 {
        match self {
            PairCounts::Dense { n, counts } => counts[b * *n + g],
            PairCounts::Sparse(map) => map.get(&(b as u32, g as u32)).copied().unwrap_or(0),
        }
    }

    fn nonzero(&self) -> Vec<(Boy, Girl, u32)> {
        let mut v: Vec<(Boy, Girl, u32)> = match self {
            PairCounts::Dense { n, counts } => counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (i / *n, i % *n, c))
                .collect(),
            PairCounts::Sparse(map) => map
                .iter()
                .map(|(&(b, g), &c)| (b as usize, g as usize, c))
                .collect(),
        };
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunLength {
    pub boy: Boy,
    pub length: u64,
    pub nonredundant: u64,
    /// False for a run cut short by the end of the simulation.
    pub complete: bool,
}

#[derive(Debug, Clone)]
pub struct RunStats {
    pub n: usize,
    /// Total proposals `t`, redundant ones included.
    pub proposals: u64,
    pub proposals_per_girl: Vec<u64>,
    pub nonredundant_per_girl: Vec<u64>,
    pub proposals_per_boy: Vec<u64>,
    pub runs_per_boy: Vec<u64>,
    pub run_lengths: Vec<RunLength>,
    pair_counts: PairCounts,
    pub first_output_time: Option<u64>,
    pub acceptances_by_g: u64,
    pub acceptances_by_g_before_first_output: u64,
}

impl RunStats {
    fn new(n: usize) -> Self {
        RunStats {
            n,
            proposals: 0,
            proposals_per_girl: vec![0; n],
            nonredundant_per_girl: vec![0; n],
            proposals_per_boy: vec![0; n],
            runs_per_boy: vec![0; n],
            run_lengths: Vec::new(),
            pair_counts: PairCounts::new(n),
            first_output_time: None,
            acceptances_by_g: 0,
            acceptances_by_g_before_first_output: 0,
        }
    }

    /// Proposals from `b` to `g`, redundant ones included.
    pub fn proposals_boy_to_girl(&self, b: Boy, g: Girl) -> u32 {
        self.pair_counts.get(b, g)
    }

    /// Nonzero `(boy, girl, count)` entries in lexicographic order.
    pub fn pair_proposals(&self) -> Vec<(Boy, Girl, u32)> {
        self.pair_counts.nonzero()
    }

    /// Overwrites one pair count; for building synthetic statistics.
    pub fn set_pair_proposals(&mut self, b: Boy, g: Girl, count: u32) {
        match &mut self.pair_counts {
            PairCounts::Dense { n, counts } => counts[b * *n + g] = count,
            PairCounts::Sparse(map) => {
                map.insert((b as u32, g as u32), count);
            }
        }
    }

    /// Empty statistics for `n` people per side; for synthetic audits.
    pub fn zeroed(n: usize) -> Self {
        Self::new(n)
    }
}

/// What one call to [`ProcessState::step`] did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StepEvent {
    pub time: u64,
    /// Boy output by B1 right before this proposal, if any.
    pub output: Option<Boy>,
    pub proposer: Boy,
    pub girl: Girl,
    pub redundant: bool,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Dispatch,
    Propose,
}

#[derive(Debug, Clone)]
pub struct ProcessState {
    n: usize,
    g: Girl,
    mode: ProposalMode,
    tried: Vec<usize>,
    untried: Vec<Vec<u32>>,
    l: usize,
    p: Option<Boy>,
    phase: Phase,
    x: Vec<Option<Boy>>,
    k: Vec<u64>,
    outputs: Vec<(Boy, u64)>,
    run_length: u64,
    run_nonredundant: u64,
    exhausted_rejection: bool,
    stats: RunStats,
}

impl ProcessState {
    /// The initial state (B0).
    pub fn new(n: usize, g: Girl, mode: ProposalMode) -> Self {
        assert!(n >= 1 && g < n, "need n >= 1 and g < n");
        ProcessState {
            n,
            g,
            mode,
            tried: vec![0; n],
            untried: Vec::new(),
            l: 0,
            p: None,
            phase: Phase::Dispatch,
            x: vec![None; n],
            k: vec![0; n],
            outputs: Vec::new(),
            run_length: 0,
            run_nonredundant: 0,
            exhausted_rejection: false,
            stats: RunStats::new(n),
        }
    }

    pub fn time(&self) -> u64 {
        self.stats.proposals
    }

    pub fn outputs(&self) -> &[(Boy, u64)] {
        &self.outputs
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn proposer(&self) -> Option<Boy> {
        self.p
    }

    pub fn best_offer(&self, j: Girl) -> Option<Boy> {
        self.x[j]
    }

    pub fn offers(&self, j: Girl) -> u64 {
        self.k[j]
    }

    /// Whether the last proposal was a rejection of a boy who has now
    /// tried every girl.
    pub fn exhausted(&self) -> bool {
        self.exhausted_rejection
    }

    /// True when the next B1 would produce the first output.
    pub fn awaiting_first_output(&self) -> bool {
        self.phase == Phase::Dispatch && self.l == self.n && self.outputs.is_empty()
    }

    fn begin_run(&mut self, b: Boy) {
        self.p = Some(b);
        self.phase = Phase::Propose;
        self.stats.runs_per_boy[b] += 1;
        self.run_length = 0;
        self.run_nonredundant = 0;
    }

    /// Step B1. Returns the boy output, if any.
    pub fn dispatch(&mut self) -> Option<Boy> {
        debug_assert_eq!(self.phase, Phase::Dispatch);
        if self.l < self.n {
            let b = self.l;
            self.l += 1;
            self.begin_run(b);
            None
        } else {
            let s = self.x[self.g].expect("every girl holds an offer once all boys are placed");
            let t = self.stats.proposals;
            self.outputs.push((s, t));
            self.stats.first_output_time.get_or_insert(t);
            self.begin_run(s);
            Some(s)
        }
    }

    fn draw_girl<R: Rng + ?Sized>(&mut self, p: Boy, rng: &mut R) -> Girl {
        match self.mode {
            ProposalMode::Amnesia => rng.random_range(0..self.n),
            ProposalMode::Memory => {
                if self.untried.is_empty() {
                    self.untried = vec![Vec::new(); self.n];
                }
                if self.tried[p] == 0 && self.untried[p].is_empty() {
                    self.untried[p] = (0..self.n as u32).collect();
                }
                let list = &mut self.untried[p];
                if list.is_empty() {
                    // nothing left: the draw is necessarily a repeat
                    rng.random_range(0..self.n)
                } else {
                    let i = rng.random_range(0..list.len());
                    list.swap_remove(i) as Girl
                }
            }
        }
    }

    /// One proposal: B1 if a new proposer is needed, then B2 and, for a
    /// non-redundant proposal, B3.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepEvent {
        let output = if self.phase == Phase::Dispatch {
            self.dispatch()
        } else {
            None
        };
        let p = self.p.expect("proposer set after dispatch");
        let h = self.draw_girl(p, rng);

        self.stats.proposals += 1;
        let time = self.stats.proposals;
        self.stats.proposals_per_girl[h] += 1;
        self.stats.proposals_per_boy[p] += 1;
        self.run_length += 1;
        let prior = self.stats.pair_counts.increment(p, h);

        let mut event = StepEvent {
            time,
            output,
            proposer: p,
            girl: h,
            redundant: prior > 0,
            accepted: false,
        };
        if event.redundant {
            self.exhausted_rejection = self.tried[p] == self.n;
            return event;
        }

        self.tried[p] += 1;
        self.stats.nonredundant_per_girl[h] += 1;
        self.run_nonredundant += 1;
        self.k[h] += 1;
        let u: f64 = rng.random();
        if u * self.k[h] as f64 >= 1.0 {
            self.exhausted_rejection = self.tried[p] == self.n;
            return event;
        }

        event.accepted = true;
        self.exhausted_rejection = false;
        self.stats.run_lengths.push(RunLength {
            boy: p,
            length: self.run_length,
            nonredundant: self.run_nonredundant,
            complete: true,
        });
        let after_output = !self.outputs.is_empty();
        if h == self.g {
            self.stats.acceptances_by_g += 1;
            if !after_output {
                self.stats.acceptances_by_g_before_first_output += 1;
            }
        }
        let displaced = self.x[h].replace(p);
        match displaced {
            Some(d) if !(h == self.g && after_output) => self.begin_run(d),
            _ => {
                self.p = None;
                self.phase = Phase::Dispatch;
            }
        }
        event
    }

    fn finish(mut self) -> (Vec<(Boy, u64)>, RunStats) {
        if let (Phase::Propose, Some(p)) = (self.phase, self.p) {
            if self.run_length > 0 {
                self.stats.run_lengths.push(RunLength {
                    boy: p,
                    length: self.run_length,
                    nonredundant: self.run_nonredundant,
                    complete: false,
                });
            }
        }
        (self.outputs, self.stats)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub girl: Girl,
    pub seed: u64,
    pub max_proposals: u64,
    pub stop: StopRule,
    #[serde(default)]
    pub mode: ProposalMode,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Output boys with the number of proposals made before each output.
    pub outputs: Vec<(Boy, u64)>,
    pub stats: RunStats,
    pub stop: StopReason,
}

impl RunOutcome {
    pub fn husband_count(&self) -> usize {
        self.outputs.len()
    }
}

/// Runs the process from B0 with a ChaCha8 stream for `config.seed`.
pub fn run(config: &RunConfig) -> RunOutcome {
    run_with(config, &mut rng::from_seed(config.seed))
}

pub fn run_with<R: Rng + ?Sized>(config: &RunConfig, rng: &mut R) -> RunOutcome {
    assert!(config.max_proposals >= 1, "max_proposals must be positive");
    let mut state = ProcessState::new(config.n, config.girl, config.mode);
    let stop = loop {
        if config.stop == StopRule::FirstOutput && state.awaiting_first_output() {
            state.dispatch();
            break StopReason::FirstOutput;
        }
        if state.time() >= config.max_proposals {
            break StopReason::TimeCap;
        }
        state.step(rng);
        if config.stop == StopRule::Natural && state.exhausted() {
            break StopReason::Natural;
        }
    };
    let (outputs, stats) = state.finish();
    RunOutcome {
        outputs,
        stats,
        stop,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error(
        "statistics cover {found} proposals but the window for n={n}, delta={delta} is {expected}"
    )]
    CapMismatch {
        n: usize,
        delta: f64,
        expected: u64,
        found: u64,
    },
    #[error("statistics are for n={found}, audit requested for n={expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("delta must lie in (0, 1/2), got {0}")]
    BadDelta(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Entity {
    Girl { girl: Girl },
    Boy { boy: Boy },
    Run { index: usize, boy: Boy },
    Pair { boy: Boy, girl: Girl },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Offender {
    pub entity: Entity,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub lemma: &'static str,
    pub statement: &'static str,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub checked: usize,
    pub violations: usize,
    /// The first few offenders, in entity order.
    pub offenders: Vec<Offender>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub n: usize,
    pub delta: f64,
    pub window: u64,
    pub checks: Vec<LemmaCheck>,
    pub passed: bool,
}

impl AuditReport {
    pub fn check(&self, lemma: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.lemma == lemma)
    }
}

const MAX_OFFENDERS: usize = 16;

/// `floor(n^(1+delta))`
pub fn audit_window(n: usize, delta: f64) -> u64 {
    (n as f64).powf(1.0 + delta).floor() as u64
}

fn evaluate(
    lemma: &'static str,
    statement: &'static str,
    lower: Option<f64>,
    upper: Option<f64>,
    values: impl Iterator<Item = (Entity, f64)>,
) -> LemmaCheck {
    let mut checked = 0;
    let mut violations = 0;
    let mut offenders = Vec::new();
    for (entity, value) in values {
        checked += 1;
        let low = lower.is_some_and(|lo| value < lo);
        let high = upper.is_some_and(|hi| value > hi);
        if low || high {
            violations += 1;
            if offenders.len() < MAX_OFFENDERS {
                offenders.push(Offender { entity, value });
            }
        }
    }
    LemmaCheck {
        lemma,
        statement,
        lower,
        upper,
        checked,
        violations,
        offenders,
        passed: violations == 0,
    }
}

/// Checks the per-entity proposal and run bounds over a window of
/// `floor(n^(1+delta))` proposals. Logs are natural; every threshold, and
/// the `ln n` divisor of L8, is clamped to at least 1.
pub fn lemma_audit(stats: &RunStats, n: usize, delta: f64) -> Result<AuditReport, AuditError> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(AuditError::BadDelta(delta));
    }
    if stats.n != n {
        return Err(AuditError::SizeMismatch {
            expected: n,
            found: stats.n,
        });
    }
    let window = audit_window(n, delta);
    if stats.proposals != window {
        return Err(AuditError::CapMismatch {
            n,
            delta,
            expected: window,
            found: stats.proposals,
        });
    }
    let nf = n as f64;
    let nd = nf.powf(delta);
    let ln = nf.ln();
    let ln2 = ln * ln;
    let clamp = |v: f64| v.max(1.0);

    let girls = |v: &[u64]| {
        v.iter()
            .enumerate()
            .map(|(girl, &c)| (Entity::Girl { girl }, c as f64))
            .collect::<Vec<_>>()
    };
    let boys = |v: &[u64]| {
        v.iter()
            .enumerate()
            .map(|(boy, &c)| (Entity::Boy { boy }, c as f64))
            .collect::<Vec<_>>()
    };
    let runs = |f: fn(&RunLength) -> u64| {
        stats
            .run_lengths
            .iter()
            .enumerate()
            .map(move |(index, r)| (Entity::Run { index, boy: r.boy }, f(r) as f64))
    };

    let checks = vec![
        evaluate(
            "L1",
            "every girl receives between n^d/2 and 2n^d proposals",
            Some(clamp(0.5 * nd)),
            Some(clamp(2.0 * nd)),
            girls(&stats.proposals_per_girl).into_iter(),
        ),
        evaluate(
            "L2",
            "every boy begins at most 2n^d runs",
            None,
            Some(clamp(2.0 * nd)),
            boys(&stats.runs_per_boy).into_iter(),
        ),
        evaluate(
            "L3",
            "every run has at most n^d (ln n)^2 non-redundant proposals",
            None,
            Some(clamp(nd * ln2)),
            runs(|r| r.nonredundant),
        ),
        evaluate(
            "L5",
            "every run has at most n^d (ln n)^2 proposals",
            None,
            Some(clamp(nd * ln2)),
            runs(|r| r.length),
        ),
        evaluate(
            "L6",
            "every boy makes at most 2n^(2d) (ln n)^2 proposals",
            None,
            Some(clamp(2.0 * nd * nd * ln2)),
            boys(&stats.proposals_per_boy).into_iter(),
        ),
        evaluate(
            "L7",
            "every boy proposes to a given girl at most ln n times",
            None,
            Some(clamp(ln)),
            stats
                .pair_proposals()
                .into_iter()
                .map(|(boy, girl, c)| (Entity::Pair { boy, girl }, c as f64)),
        ),
        evaluate(
            "L8",
            "every girl receives at least n^d / (2 ln n) non-redundant proposals",
            Some(clamp(0.5 * nd / ln.max(1.0))),
            None,
            girls(&stats.nonredundant_per_girl).into_iter(),
        ),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(AuditReport {
        n,
        delta,
        window,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn natural(n: usize, seed: u64, mode: ProposalMode) -> RunOutcome {
        run(&RunConfig {
            n,
            girl: 0,
            seed,
            max_proposals: u64::MAX,
            stop: StopRule::Natural,
            mode,
        })
    }

    #[test]
    fn single_couple_forced_path() {
        let out = natural(1, 17, ProposalMode::Amnesia);
        assert_eq!(out.stop, StopReason::Natural);
        assert_eq!(out.outputs, vec![(0, 1)]);
        assert_eq!(out.stats.proposals, 2);
        assert_eq!(out.stats.acceptances_by_g, 1);
        assert_eq!(out.stats.acceptances_by_g_before_first_output, 1);
    }

    #[test]
    fn first_proposal_to_a_girl_is_accepted() {
        let mut state = ProcessState::new(5, 0, ProposalMode::Amnesia);
        let mut rng = rng::from_seed(3);
        let e = state.step(&mut rng);
        assert!(!e.redundant && e.accepted);
        assert_eq!(state.offers(e.girl), 1);
        assert_eq!(state.best_offer(e.girl), Some(0));
    }

    /// Sets up n = 3 with boy 0 proposing, girl 0 already asked by him,
    /// k = [1, 0, 2].
    fn frozen() -> ProcessState {
        let mut s = ProcessState::new(3, 2, ProposalMode::Amnesia);
        s.l = 3;
        s.p = Some(0);
        s.phase = Phase::Propose;
        s.tried[0] = 1;
        s.stats.pair_counts.increment(0, 0);
        s.k = vec![1, 0, 2];
        s.x = vec![Some(0), None, Some(1)];
        s
    }

    #[test]
    fn transition_probabilities_on_frozen_state() {
        let trials = 90_000u32;
        let mut rng = rng::from_seed(11);
        // outcome index: 2*h + accepted
        let mut counts = [0u32; 6];
        let base = frozen();
        for _ in 0..trials {
            let mut s = base.clone();
            let e = s.step(&mut rng);
            counts[2 * e.girl + e.accepted as usize] += 1;
        }
        let n = 3.0;
        // h in A_p: reject 1/n; otherwise accept 1/((k+1)n), reject k/((k+1)n)
        let expected = [
            1.0 / n,
            0.0,
            0.0,
            1.0 / (1.0 * n),
            2.0 / (3.0 * n),
            1.0 / (3.0 * n),
        ];
        for (i, (&c, &p)) in counts.iter().zip(&expected).enumerate() {
            let freq = c as f64 / trials as f64;
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            assert!(
                (freq - p).abs() <= 3.0 * sigma + 1e-12,
                "outcome {i}: {freq} vs {p}"
            );
        }
    }

    #[test]
    fn kth_offer_accepted_with_probability_one_over_k() {
        let trials = 60_000u32;
        let mut rng = rng::from_seed(5);
        for k in [1u64, 2, 4, 9] {
            let (mut accepted, mut total) = (0u32, 0u32);
            while total < trials {
                let mut s = frozen();
                // both untried girls hold k-1 offers, so any fresh proposal is a k-th offer
                s.k = vec![1, k - 1, k - 1];
                let e = s.step(&mut rng);
                if e.redundant {
                    continue;
                }
                total += 1;
                accepted += e.accepted as u32;
            }
            let p = 1.0 / k as f64;
            let freq = accepted as f64 / trials as f64;
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((freq - p).abs() <= 3.0 * sigma + 1e-12, "k={k}: {freq}");
        }
    }

    #[test]
    fn redundant_proposals_are_rejected_and_conserved() {
        let mut state = ProcessState::new(6, 1, ProposalMode::Amnesia);
        let mut rng = rng::from_seed(9);
        for _ in 0..5_000 {
            let e = state.step(&mut rng);
            if e.redundant {
                assert!(!e.accepted);
            }
            let total: u64 = state.stats().proposals_per_girl.iter().sum();
            assert_eq!(total, state.time());
            let boys: u64 = state.stats().proposals_per_boy.iter().sum();
            assert_eq!(boys, state.time());
        }
    }

    #[test]
    fn outputs_are_distinct_and_acceptances_add_up() {
        for seed in 0..300 {
            for mode in [ProposalMode::Amnesia, ProposalMode::Memory] {
                let out = natural(2 + seed as usize % 9, seed, mode);
                let mut boys: Vec<Boy> = out.outputs.iter().map(|o| o.0).collect();
                let count = boys.len();
                assert!(count >= 1);
                boys.sort_unstable();
                boys.dedup();
                assert_eq!(boys.len(), count, "seed {seed}");
                // the first output is the last pre-output acceptance; every later
                // acceptance by g produces exactly one more output
                assert_eq!(
                    out.stats.acceptances_by_g,
                    count as u64 - 1 + out.stats.acceptances_by_g_before_first_output
                );
                assert!(out.stats.run_lengths.iter().all(|r| r.length >= 1));
            }
        }
    }

    #[test]
    fn memory_mode_never_repeats_before_exhaustion() {
        let out = natural(12, 4, ProposalMode::Memory);
        assert_eq!(out.stop, StopReason::Natural);
        let max_pair = out
            .stats
            .pair_proposals()
            .iter()
            .map(|e| e.2)
            .max()
            .unwrap();
        assert_eq!(max_pair, 1);
        let nonredundant: u64 = out.stats.nonredundant_per_girl.iter().sum();
        assert_eq!(nonredundant, out.stats.proposals);
    }

    #[test]
    fn time_cap_is_exact() {
        let out = run(&RunConfig {
            n: 50,
            girl: 3,
            seed: 1,
            max_proposals: 777,
            stop: StopRule::TimeCap,
            mode: ProposalMode::Amnesia,
        });
        assert_eq!(out.stop, StopReason::TimeCap);
        assert_eq!(out.stats.proposals, 777);
        let run_total: u64 = out.stats.run_lengths.iter().map(|r| r.length).sum();
        assert_eq!(run_total, 777);
    }

    #[test]
    fn first_output_time_is_coupon_collection() {
        let out = run(&RunConfig {
            n: 40,
            girl: 0,
            seed: 8,
            max_proposals: u64::MAX,
            stop: StopRule::FirstOutput,
            mode: ProposalMode::Amnesia,
        });
        assert_eq!(out.stop, StopReason::FirstOutput);
        let t = out.stats.first_output_time.unwrap();
        assert_eq!(t, out.stats.proposals);
        assert!(out.stats.proposals_per_girl.iter().all(|&c| c > 0));
        assert_eq!(out.outputs.len(), 1);
    }

    #[test]
    fn audit_flags_synthetic_pair() {
        let n = 64;
        let delta = 0.3;
        let mut stats = RunStats::zeroed(n);
        stats.proposals = audit_window(n, delta);
        let per_girl = stats.proposals / n as u64;
        stats.proposals_per_girl = vec![per_girl; n];
        stats.nonredundant_per_girl = vec![per_girl; n];
        stats.set_pair_proposals(5, 7, 40);
        let report = lemma_audit(&stats, n, delta).unwrap();
        let l7 = report.check("L7").unwrap();
        assert!(!l7.passed);
        assert_eq!(l7.offenders[0].entity, Entity::Pair { boy: 5, girl: 7 });
        assert!(!report.passed);
    }

    #[test]
    fn audit_rejects_wrong_window() {
        let stats = RunStats::zeroed(10);
        assert!(matches!(
            lemma_audit(&stats, 10, 0.3),
            Err(AuditError::CapMismatch { .. })
        ));
        assert!(matches!(
            lemma_audit(&stats, 11, 0.3),
            Err(AuditError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn degenerate_audit_passes() {
        let delta = 0.3;
        let out = run(&RunConfig {
            n: 1,
            girl: 0,
            seed: 2,
            max_proposals: audit_window(1, delta),
            stop: StopRule::TimeCap,
            mode: ProposalMode::Amnesia,
        });
        let report = lemma_audit(&out.stats, 1, delta).unwrap();
        assert!(report.passed, "{report:?}");
    }
}
