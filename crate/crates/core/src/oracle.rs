//! Brute-force ground truth for small instances.
//!
//! Girls are assigned in index order, trying boys in index order. A partial
//! assignment is abandoned only when it already contains a blocking pair
//! whose girl and boy are both assigned, so the search visits every stable
//! matching and nothing else survives to the leaves.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::instance::{Matching, PreferenceInstance};
use crate::{Boy, Girl};

pub const DEFAULT_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle scale exceeded: n={n} is above the limit {limit}")]
    ScaleExceeded { n: usize, limit: usize },
    #[error("girl {girl} is out of range for n={n}")]
    GirlOutOfRange { girl: Girl, n: usize },
}

/// Every stable matching of an instance and each girl's set of partners
/// across them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StableSet {
    pub n: usize,
    /// Distinct stable matchings, in lexicographic order of husband lists.
    pub matchings: Vec<Matching>,
    pub husband_sets: Vec<BTreeSet<Boy>>,
}

impl StableSet {
    pub fn husband_set(&self, g: Girl) -> Result<&BTreeSet<Boy>, OracleError> {
        self.husband_sets
            .get(g)
            .ok_or(OracleError::GirlOutOfRange { girl: g, n: self.n })
    }

    /// Each boy's favorite partner over all stable matchings.
    pub fn boy_optimal(&self, instance: &PreferenceInstance) -> Vec<Girl> {
        (0..self.n)
            .map(|b| {
                self.matchings
                    .iter()
                    .filter_map(|m| m.wife(b))
                    .min_by_key(|&g| instance.boy_rank(b, g))
                    .expect("at least one stable matching")
            })
            .collect()
    }

    /// Girl `g`'s least preferred stable husband.
    pub fn worst_husband(&self, instance: &PreferenceInstance, g: Girl) -> Option<Boy> {
        self.husband_sets
            .get(g)?
            .iter()
            .copied()
            .max_by_key(|&b| instance.girl_rank(g, b))
    }
}

pub fn husband_set(stable: &StableSet, g: Girl) -> Result<&BTreeSet<Boy>, OracleError> {
    stable.husband_set(g)
}

/// Enumerates every stable matching of `instance`; refuses `n > limit`.
pub fn enumerate_stable(
    instance: &PreferenceInstance,
    limit: usize,
) -> Result<StableSet, OracleError> {
    let n = instance.n();
    if n > limit {
        return Err(OracleError::ScaleExceeded { n, limit });
    }
    let mut search = Search {
        instance,
        husband: Vec::with_capacity(n),
        taken: vec![false; n],
        found: Vec::new(),
    };
    search.extend();
    let mut husband_sets = vec![BTreeSet::new(); n];
    let matchings: Vec<Matching> = search
        .found
        .into_iter()
        .map(|h| {
            for (g, &b) in h.iter().enumerate() {
                husband_sets[g].insert(b);
            }
            Matching::from_husbands(&h).expect("search yields permutations")
        })
        .collect();
    Ok(StableSet {
        n,
        matchings,
        husband_sets,
    })
}

struct Search<'a> {
    instance: &'a PreferenceInstance,
    husband: Vec<Boy>,
    taken: Vec<bool>,
    found: Vec<Vec<Boy>>,
}

impl Search<'_> {
    fn extend(&mut self) {
        let n = self.instance.n();
        let g = self.husband.len();
        if g == n {
            self.found.push(self.husband.clone());
            return;
        }
        for b in 0..n {
            if self.taken[b] || self.blocks_prefix(g, b) {
                continue;
            }
            self.taken[b] = true;
            self.husband.push(b);
            self.extend();
            self.husband.pop();
            self.taken[b] = false;
        }
    }

    /// Whether adding the pair `(g, b)` creates a blocking pair among
    /// already assigned people.
    fn blocks_prefix(&self, g: Girl, b: Boy) -> bool {
        let inst = self.instance;
        self.husband.iter().enumerate().any(|(g2, &b2)| {
            // g with an earlier girl's husband
            (inst.girl_prefers(g, b2, b) && inst.boy_prefers(b2, g, g2))
                // an earlier girl with g's husband
                || (inst.girl_prefers(g2, b, b2) && inst.boy_prefers(b, g2, g))
        })
    }
}
