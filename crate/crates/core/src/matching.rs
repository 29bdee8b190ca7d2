//! Stability checks, boy-proposing deferred acceptance, and enumeration of
//! all stable husbands of one designated girl.
//!
//! The enumeration keeps a partial matching in which every paired boy holds
//! his best partner over a shrinking class of stable matchings:
//!
//! * **A1** if some boy is single, the lowest-index one becomes the
//!   proposer. Otherwise the matching is complete and stable: the
//!   designated girl's husband `S` is output, the pair is dissolved and
//!   `S` becomes the proposer.
//! * **A2** if the proposer has approached every girl, stop. Otherwise he
//!   proposes to his favorite girl among those not yet approached.
//! * **A3** she rejects him if she has ever been proposed to by a boy she
//!   likes better; otherwise she accepts and her previous partner (if any)
//!   becomes the proposer. With no previous partner control returns to A1.
//!
//! Girls remember their best offer even while single, which is what makes
//! the designated girl refuse everyone below her last output husband.

use serde::Serialize;
use thiserror::Error;

use crate::instance::{Matching, PreferenceInstance};
use crate::labels::Labels;
use crate::{Boy, Girl};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("matching has {matching} girls but the instance has n={instance}")]
    SizeMismatch { instance: usize, matching: usize },
    #[error("girl {girl} is out of range for n={n}")]
    GirlOutOfRange { girl: Girl, n: usize },
}

/// A girl and boy who prefer each other to their partners in some matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BlockingPair {
    pub girl: Girl,
    pub boy: Boy,
}

/// All blocking pairs of `m`, in lexicographic `(girl, boy)` order. An
/// unmatched person prefers anyone to being single.
pub fn find_blocking_pairs(
    instance: &PreferenceInstance,
    m: &Matching,
) -> Result<Vec<BlockingPair>, MatchingError> {
    let n = instance.n();
    if m.n() != n {
        return Err(MatchingError::SizeMismatch {
            instance: n,
            matching: m.n(),
        });
    }
    let mut out = Vec::new();
    for g in 0..n {
        let husband = m.husband(g);
        for &b in instance.girl_prefs(g) {
            // Everything past her husband in her list is worse for her.
            if Some(b) == husband {
                break;
            }
            let boy_wants = match m.wife(b) {
                None => true,
                Some(w) => instance.boy_prefers(b, g, w),
            };
            if boy_wants {
                out.push(BlockingPair { girl: g, boy: b });
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

pub fn is_stable(instance: &PreferenceInstance, m: &Matching) -> bool {
    m.is_complete()
        && find_blocking_pairs(instance, m)
            .map(|v| v.is_empty())
            .unwrap_or(false)
}

/// Boy-proposing deferred acceptance. Returns the boy-optimal stable
/// matching, which does not depend on the order in which free boys propose.
pub fn gale_shapley_boys_propose(instance: &PreferenceInstance) -> Matching {
    let n = instance.n();
    let mut m = Matching::empty(n);
    let mut next = vec![0usize; n];
    let mut free: Vec<Boy> = (0..n).rev().collect();
    while let Some(b) = free.pop() {
        let mut p = b;
        loop {
            let h = instance.boy_prefs(p)[next[p]];
            next[p] += 1;
            match m.husband(h) {
                None => {
                    m.pair(h, p);
                    break;
                }
                Some(q) if instance.girl_prefers(h, p, q) => {
                    m.unpair_girl(h);
                    m.pair(h, p);
                    p = q;
                }
                Some(_) => {}
            }
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Step {
    A1,
    A2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    /// A1 picked a single boy as proposer.
    Select,
    Accept,
    Reject,
    /// A1 found a complete matching and output the designated girl's husband.
    Output,
    Terminate,
}

/// One row of the enumeration log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub step: Step,
    /// Husband of each girl at the start of the row.
    pub before: Vec<Option<Boy>>,
    /// The designated girl's best offer while she is single after an output.
    pub pending: Option<Boy>,
    pub proposer: Boy,
    pub girl: Option<Girl>,
    /// 1-based proposal time, for proposals only.
    pub time: Option<u64>,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HusbandEnumeration {
    pub girl: Girl,
    /// Stable husbands of `girl`, worst first.
    pub husbands: Vec<Boy>,
    /// The complete stable matching current at each output.
    pub matchings: Vec<Matching>,
    pub proposals: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEvent>>,
}

/// Enumerates every stable husband of girl `g`, worst first, together with
/// the stable matching found at each output. Single boys are chosen
/// lowest index first in A1.
pub fn stable_husbands(
    instance: &PreferenceInstance,
    g: Girl,
    keep_trace: bool,
) -> Result<HusbandEnumeration, MatchingError> {
    let n = instance.n();
    if g >= n {
        return Err(MatchingError::GirlOutOfRange { girl: g, n });
    }
    let mut m = Matching::empty(n);
    let mut next = vec![0usize; n];
    let mut best: Vec<Option<Boy>> = vec![None; n];
    let mut fresh = 0usize;
    let mut time = 0u64;
    let mut husbands = Vec::new();
    let mut matchings = Vec::new();
    let mut events = keep_trace.then(Vec::new);

    'a1: loop {
        let mut p;
        if fresh < n {
            // Boys 0..fresh are all paired whenever control reaches A1.
            debug_assert!((0..fresh).all(|b| m.wife(b).is_some()));
            p = fresh;
            fresh += 1;
            record(
                &mut events,
                g,
                &best,
                &m,
                husbands.len(),
                Step::A1,
                p,
                None,
                None,
                Action::Select,
            );
        } else {
            let s = m
                .husband(g)
                .expect("A1 with every boy paired sees a complete matching");
            record(
                &mut events,
                g,
                &best,
                &m,
                husbands.len(),
                Step::A1,
                s,
                None,
                None,
                Action::Output,
            );
            husbands.push(s);
            matchings.push(m.clone());
            m.unpair_girl(g);
            p = s;
        }
        loop {
            if next[p] == n {
                record(
                    &mut events,
                    g,
                    &best,
                    &m,
                    husbands.len(),
                    Step::A2,
                    p,
                    None,
                    None,
                    Action::Terminate,
                );
                break 'a1;
            }
            let h = instance.boy_prefs(p)[next[p]];
            next[p] += 1;
            time += 1;
            let accept = match best[h] {
                None => true,
                Some(q) => instance.girl_prefers(h, p, q),
            };
            let action = if accept {
                Action::Accept
            } else {
                Action::Reject
            };
            record(
                &mut events,
                g,
                &best,
                &m,
                husbands.len(),
                Step::A2,
                p,
                Some(h),
                Some(time),
                action,
            );
            if !accept {
                continue;
            }
            best[h] = Some(p);
            match m.husband(h) {
                Some(previous) => {
                    m.unpair_girl(h);
                    m.pair(h, p);
                    p = previous;
                }
                None => {
                    m.pair(h, p);
                    continue 'a1;
                }
            }
        }
    }

    Ok(HusbandEnumeration {
        girl: g,
        husbands,
        matchings,
        proposals: time,
        trace: events,
    })
}

#[allow(clippy::too_many_arguments)]
fn record(
    events: &mut Option<Vec<TraceEvent>>,
    girl: Girl,
    best: &[Option<Boy>],
    m: &Matching,
    outputs: usize,
    step: Step,
    proposer: Boy,
    h: Option<Girl>,
    time: Option<u64>,
    action: Action,
) {
    let Some(events) = events.as_mut() else {
        return;
    };
    let pending = if outputs > 0 && m.husband(girl).is_none() {
        best[girl]
    } else {
        None
    };
    events.push(TraceEvent {
        step,
        before: m.husband_of().to_vec(),
        pending,
        proposer,
        girl: h,
        time,
        action,
    });
}

/// A trace row rendered as the five columns step, current matching,
/// proposer, proposee, action.
pub fn trace_table(enumeration: &HusbandEnumeration, labels: Labels) -> Vec<[String; 5]> {
    let Some(events) = enumeration.trace.as_ref() else {
        return Vec::new();
    };
    events
        .iter()
        .map(|e| {
            let matching = e
                .before
                .iter()
                .enumerate()
                .filter_map(|(girl, b)| match (b, girl == enumeration.girl) {
                    (Some(b), _) => Some(format!("{}{}", labels.girl(girl), labels.boy(*b))),
                    (None, true) => e
                        .pending
                        .map(|b| format!("({}{})", labels.girl(girl), labels.boy(b))),
                    (None, false) => None,
                })
                .collect::<Vec<_>>()
                .join(",");
            let h = e.girl.map(|h| labels.girl(h)).unwrap_or_default();
            let p = labels.boy(e.proposer);
            let action = match e.action {
                Action::Select => String::new(),
                Action::Accept => format!("{h} accepts {p}"),
                Action::Reject => format!("{h} rejects {p}"),
                Action::Output => format!("output {p}"),
                Action::Terminate => "terminate.".to_string(),
            };
            let step = match e.step {
                Step::A1 => "A1",
                Step::A2 => "A2",
            };
            [step.to_string(), matching, p, h, action]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: Girl = 0;
    const B: Girl = 1;
    const C: Girl = 2;
    const W: Boy = 0;
    const X: Boy = 1;
    const Y: Boy = 2;
    const Z: Boy = 3;

    fn m(husbands: &[Boy]) -> Matching {
        Matching::from_husbands(husbands).unwrap()
    }

    #[test]
    fn fixture_blocking_pairs() {
        let f = PreferenceInstance::four_couples();
        let bp = find_blocking_pairs(&f, &m(&[W, X, Y, Z])).unwrap();
        assert!(bp.contains(&BlockingPair { girl: A, boy: Z }));
        assert!(find_blocking_pairs(&f, &m(&[Z, W, X, Y]))
            .unwrap()
            .is_empty());
        assert!(find_blocking_pairs(&f, &m(&[Y, W, X, Z]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn blocking_pairs_are_sorted_and_exact() {
        let f = PreferenceInstance::four_couples();
        let mm = m(&[W, X, Y, Z]);
        let got = find_blocking_pairs(&f, &mm).unwrap();
        let mut brute = Vec::new();
        for g in 0..4 {
            for b in 0..4 {
                let hg = mm.husband(g).unwrap();
                let wb = mm.wife(b).unwrap();
                if f.girl_prefers(g, b, hg) && f.boy_prefers(b, g, wb) {
                    brute.push(BlockingPair { girl: g, boy: b });
                }
            }
        }
        assert_eq!(got, brute);
    }

    #[test]
    fn partial_matching_counts_single_people() {
        let f = PreferenceInstance::four_couples();
        let empty = Matching::empty(4);
        assert_eq!(find_blocking_pairs(&f, &empty).unwrap().len(), 16);
        let wrong = Matching::empty(3);
        assert!(matches!(
            find_blocking_pairs(&f, &wrong),
            Err(MatchingError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn gale_shapley_on_fixture() {
        let f = PreferenceInstance::four_couples();
        assert_eq!(gale_shapley_boys_propose(&f), m(&[Z, W, X, Y]));
        let one = PreferenceInstance::generate_uniform(1, 3).unwrap();
        assert_eq!(gale_shapley_boys_propose(&one), m(&[0]));
    }

    #[test]
    fn husbands_of_alice_and_brigitte() {
        let f = PreferenceInstance::four_couples();
        let alice = stable_husbands(&f, A, false).unwrap();
        assert_eq!(alice.husbands, vec![Z, Y]);
        assert_eq!(alice.matchings, vec![m(&[Z, W, X, Y]), m(&[Y, W, X, Z])]);
        assert!(alice.trace.is_none());
        let brigitte = stable_husbands(&f, B, false).unwrap();
        assert_eq!(brigitte.husbands, vec![W]);
        let cindy = stable_husbands(&f, C, false).unwrap();
        assert_eq!(cindy.husbands, vec![X]);
    }

    #[test]
    fn out_of_range_girl() {
        let f = PreferenceInstance::four_couples();
        assert_eq!(
            stable_husbands(&f, 4, false),
            Err(MatchingError::GirlOutOfRange { girl: 4, n: 4 })
        );
    }

    #[test]
    fn trace_proposal_times_are_consecutive() {
        let f = PreferenceInstance::four_couples();
        let e = stable_husbands(&f, A, true).unwrap();
        let times: Vec<u64> = e.trace.unwrap().iter().filter_map(|e| e.time).collect();
        assert_eq!(times, (1..=e.proposals).collect::<Vec<_>>());
        assert_eq!(e.proposals, 13);
    }
}
