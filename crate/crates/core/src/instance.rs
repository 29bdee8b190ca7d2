//! Preference instances and (partial) matchings.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;
use crate::{Boy, Girl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Girl,
    Boy,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Girl => f.write_str("girl"),
            Side::Boy => f.write_str("boy"),
        }
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("instance size must be at least 1")]
    Empty,
    #[error("malformed instance document: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("size mismatch: {what} has {found} entries, expected {expected}")]
    SizeMismatch {
        what: String,
        found: usize,
        expected: usize,
    },
    #[error("{side} {person}: entry {value} at position {position} is out of range for n={n}")]
    OutOfRange {
        side: Side,
        person: usize,
        position: usize,
        value: usize,
        n: usize,
    },
    #[error("{side} {person}: preference row is not a permutation ({value} appears twice)")]
    NotPermutation {
        side: Side,
        person: usize,
        value: usize,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One broken invariant of a [`PreferenceInstance`], located by row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    RowCount {
        side: Side,
        found: usize,
        expected: usize,
    },
    RowLength {
        side: Side,
        person: usize,
        found: usize,
        expected: usize,
    },
    OutOfRange {
        side: Side,
        person: usize,
        position: usize,
        value: usize,
    },
    Duplicate {
        side: Side,
        person: usize,
        value: usize,
    },
    /// `rank[person][prefs[person][position]] != position`.
    RankMismatch {
        side: Side,
        person: usize,
        position: usize,
    },
    RankShape {
        side: Side,
        person: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "n = 0"),
            Violation::RowCount {
                side,
                found,
                expected,
            } => write!(f, "{side} table has {found} rows, expected {expected}"),
            Violation::RowLength {
                side,
                person,
                found,
                expected,
            } => write!(
                f,
                "{side} {person}: row has {found} entries, expected {expected}"
            ),
            Violation::OutOfRange {
                side,
                person,
                position,
                value,
            } => write!(
                f,
                "{side} {person}: entry {value} at position {position} out of range"
            ),
            Violation::Duplicate {
                side,
                person,
                value,
            } => write!(f, "{side} {person}: duplicate {value}"),
            Violation::RankMismatch {
                side,
                person,
                position,
            } => write!(
                f,
                "{side} {person}: rank table disagrees with preference list at position {position}"
            ),
            Violation::RankShape { side, person } => {
                write!(f, "{side} {person}: rank row has the wrong length")
            }
        }
    }
}

/// Complete strict preferences of `n` girls over `n` boys and vice versa,
/// with inverse rank tables for constant-time comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceInstance {
    n: usize,
    girl_prefs: Vec<Vec<Boy>>,
    boy_prefs: Vec<Vec<Girl>>,
    girl_rank: Vec<Vec<usize>>,
    boy_rank: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    n: usize,
    girl_prefs: Vec<Vec<usize>>,
    boy_prefs: Vec<Vec<usize>>,
}

fn invert(rows: &[Vec<usize>]) -> Vec<Vec<usize>> {
    rows.iter()
        .map(|row| {
            let mut rank = vec![0; row.len()];
            for (pos, &who) in row.iter().enumerate() {
                rank[who] = pos;
            }
            rank
        })
        .collect()
}

fn check_rows(side: Side, rows: &[Vec<usize>], n: usize) -> Result<(), InstanceError> {
    let what = format!("{side} preference table");
    if rows.len() != n {
        return Err(InstanceError::SizeMismatch {
            what,
            found: rows.len(),
            expected: n,
        });
    }
    for (person, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(InstanceError::SizeMismatch {
                what: format!("{side} {person} preference row"),
                found: row.len(),
                expected: n,
            });
        }
        let mut seen = vec![false; n];
        for (position, &value) in row.iter().enumerate() {
            if value >= n {
                return Err(InstanceError::OutOfRange {
                    side,
                    person,
                    position,
                    value,
                    n,
                });
            }
            if std::mem::replace(&mut seen[value], true) {
                return Err(InstanceError::NotPermutation {
                    side,
                    person,
                    value,
                });
            }
        }
    }
    Ok(())
}

impl PreferenceInstance {
    /// Builds an instance from favorite-first preference rows, checking
    /// that every row is a permutation of `0..n`.
    pub fn new(
        girl_prefs: Vec<Vec<Boy>>,
        boy_prefs: Vec<Vec<Girl>>,
    ) -> Result<Self, InstanceError> {
        let n = girl_prefs.len();
        if n == 0 {
            return Err(InstanceError::Empty);
        }
        check_rows(Side::Girl, &girl_prefs, n)?;
        check_rows(Side::Boy, &boy_prefs, n)?;
        Ok(Self::from_valid_rows(girl_prefs, boy_prefs))
    }

    fn from_valid_rows(girl_prefs: Vec<Vec<Boy>>, boy_prefs: Vec<Vec<Girl>>) -> Self {
        let girl_rank = invert(&girl_prefs);
        let boy_rank = invert(&boy_prefs);
        PreferenceInstance {
            n: girl_prefs.len(),
            girl_prefs,
            boy_prefs,
            girl_rank,
            boy_rank,
        }
    }

    /// Assembles an instance without any checking. Only useful for
    /// exercising [`PreferenceInstance::validate`]; every other operation
    /// assumes a valid instance.
    pub fn from_raw_parts(
        n: usize,
        girl_prefs: Vec<Vec<Boy>>,
        boy_prefs: Vec<Vec<Girl>>,
        girl_rank: Vec<Vec<usize>>,
        boy_rank: Vec<Vec<usize>>,
    ) -> Self {
        PreferenceInstance {
            n,
            girl_prefs,
            boy_prefs,
            girl_rank,
            boy_rank,
        }
    }

    /// Uniformly random instance: each of the `2n` rows is an independent
    /// Fisher-Yates shuffle drawn from the ChaCha8 stream for `seed`
    /// (girls' rows first, then boys').
    pub fn generate_uniform(n: usize, seed: u64) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::Empty);
        }
        let mut rng = rng::from_seed(seed);
        let mut row = || {
            let mut r: Vec<usize> = (0..n).collect();
            r.shuffle(&mut rng);
            r
        };
        let girl_prefs: Vec<Vec<Boy>> = (0..n).map(|_| row()).collect();
        let boy_prefs: Vec<Vec<Girl>> = (0..n).map(|_| row()).collect();
        Ok(Self::from_valid_rows(girl_prefs, boy_prefs))
    }

    /// The four-couple example: girls Alice, Brigitte, Cindy, Debra are
    /// `0..4` and boys Wilfred, Xavier, Yuri, Zeke are `0..4`.
    pub fn four_couples() -> Self {
        const W: usize = 0;
        const X: usize = 1;
        const Y: usize = 2;
        const Z: usize = 3;
        const A: usize = 0;
        const B: usize = 1;
        const C: usize = 2;
        const D: usize = 3;
        Self::from_valid_rows(
            vec![
                vec![Y, X, Z, W],
                vec![X, W, Y, Z],
                vec![W, Y, X, Z],
                vec![X, W, Z, Y],
            ],
            vec![
                vec![A, B, D, C],
                vec![C, A, D, B],
                vec![B, D, A, C],
                vec![B, A, C, D],
            ],
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn girl_prefs(&self, g: Girl) -> &[Boy] {
        &self.girl_prefs[g]
    }

    pub fn boy_prefs(&self, b: Boy) -> &[Girl] {
        &self.boy_prefs[b]
    }

    /// Position of `b` in girl `g`'s list; 0 is her favorite.
    #[inline]
    pub fn girl_rank(&self, g: Girl, b: Boy) -> usize {
        self.girl_rank[g][b]
    }

    #[inline]
    pub fn boy_rank(&self, b: Boy, g: Girl) -> usize {
        self.boy_rank[b][g]
    }

    #[inline]
    pub fn girl_prefers(&self, g: Girl, b1: Boy, b2: Boy) -> bool {
        self.girl_rank[g][b1] < self.girl_rank[g][b2]
    }

    #[inline]
    pub fn boy_prefers(&self, b: Boy, g1: Girl, g2: Girl) -> bool {
        self.boy_rank[b][g1] < self.boy_rank[b][g2]
    }

    /// Every broken invariant, at most one per row or table. Empty means
    /// the instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.n == 0 {
            out.push(Violation::Empty);
        }
        for (side, prefs, rank) in [
            (Side::Girl, &self.girl_prefs, &self.girl_rank),
            (Side::Boy, &self.boy_prefs, &self.boy_rank),
        ] {
            validate_side(side, self.n, prefs, rank, &mut out);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = InstanceDoc {
            n: self.n,
            girl_prefs: self.girl_prefs.clone(),
            boy_prefs: self.boy_prefs.clone(),
        };
        serde_json::to_string(&doc).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let doc: InstanceDoc = serde_json::from_str(text)?;
        if doc.n == 0 {
            return Err(InstanceError::Empty);
        }
        check_rows(Side::Girl, &doc.girl_prefs, doc.n)?;
        check_rows(Side::Boy, &doc.boy_prefs, doc.n)?;
        Ok(Self::from_valid_rows(doc.girl_prefs, doc.boy_prefs))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn validate_side(
    side: Side,
    n: usize,
    prefs: &[Vec<usize>],
    rank: &[Vec<usize>],
    out: &mut Vec<Violation>,
) {
    if prefs.len() != n {
        out.push(Violation::RowCount {
            side,
            found: prefs.len(),
            expected: n,
        });
    }
    if rank.len() != n {
        out.push(Violation::RowCount {
            side,
            found: rank.len(),
            expected: n,
        });
    }
    for (person, row) in prefs.iter().enumerate() {
        if row.len() != n {
            out.push(Violation::RowLength {
                side,
                person,
                found: row.len(),
                expected: n,
            });
            continue;
        }
        let mut seen = vec![false; n];
        let mut row_ok = true;
        for (position, &value) in row.iter().enumerate() {
            if value >= n {
                out.push(Violation::OutOfRange {
                    side,
                    person,
                    position,
                    value,
                });
                row_ok = false;
                break;
            }
            if std::mem::replace(&mut seen[value], true) {
                out.push(Violation::Duplicate {
                    side,
                    person,
                    value,
                });
                row_ok = false;
                break;
            }
        }
        if !row_ok {
            continue;
        }
        match rank.get(person) {
            Some(r) if r.len() == n => {
                if let Some(position) = (0..n).find(|&i| r[row[i]] != i) {
                    out.push(Violation::RankMismatch {
                        side,
                        person,
                        position,
                    });
                }
            }
            Some(_) => out.push(Violation::RankShape { side, person }),
            None => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingShapeError {
    #[error("boy {boy} is paired with both girl {first} and girl {second}")]
    DuplicateBoy { boy: Boy, first: Girl, second: Girl },
    #[error("boy {boy} is out of range for n={n}")]
    BoyOutOfRange { boy: Boy, n: usize },
}

/// A possibly partial girl-boy pairing, kept mutually consistent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Option<Boy>>", into = "Vec<Option<Boy>>")]
pub struct Matching {
    husband_of: Vec<Option<Boy>>,
    wife_of: Vec<Option<Girl>>,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching {
            husband_of: vec![None; n],
            wife_of: vec![None; n],
        }
    }

    /// Builds a matching from each girl's husband (or `None`), in girl order.
    pub fn from_partial(husband_of: Vec<Option<Boy>>) -> Result<Self, MatchingShapeError> {
        let n = husband_of.len();
        let mut wife_of = vec![None; n];
        for (g, b) in husband_of.iter().enumerate() {
            if let Some(b) = *b {
                if b >= n {
                    return Err(MatchingShapeError::BoyOutOfRange { boy: b, n });
                }
                if let Some(first) = wife_of[b] {
                    return Err(MatchingShapeError::DuplicateBoy {
                        boy: b,
                        first,
                        second: g,
                    });
                }
                wife_of[b] = Some(g);
            }
        }
        Ok(Matching {
            husband_of,
            wife_of,
        })
    }

    pub fn from_husbands(husbands: &[Boy]) -> Result<Self, MatchingShapeError> {
        Self::from_partial(husbands.iter().copied().map(Some).collect())
    }

    pub fn n(&self) -> usize {
        self.husband_of.len()
    }

    #[inline]
    pub fn husband(&self, g: Girl) -> Option<Boy> {
        self.husband_of[g]
    }

    #[inline]
    pub fn wife(&self, b: Boy) -> Option<Girl> {
        self.wife_of[b]
    }

    pub fn husband_of(&self) -> &[Option<Boy>] {
        &self.husband_of
    }

    pub fn is_complete(&self) -> bool {
        self.husband_of.iter().all(Option::is_some)
    }

    /// Husbands in girl order, if the matching is complete.
    pub fn husbands(&self) -> Option<Vec<Boy>> {
        self.husband_of.iter().copied().collect()
    }

    /// Pairs `g` with `b`, returning `g`'s previous husband. The caller
    /// guarantees `b` is currently single.
    pub(crate) fn pair(&mut self, g: Girl, b: Boy) -> Option<Boy> {
        debug_assert!(self.wife_of[b].is_none());
        let previous = self.husband_of[g].replace(b);
        if let Some(p) = previous {
            self.wife_of[p] = None;
        }
        self.wife_of[b] = Some(g);
        previous
    }

    pub(crate) fn unpair_girl(&mut self, g: Girl) -> Option<Boy> {
        let b = self.husband_of[g].take();
        if let Some(b) = b {
            self.wife_of[b] = None;
        }
        b
    }
}

impl TryFrom<Vec<Option<Boy>>> for Matching {
    type Error = MatchingShapeError;

    fn try_from(v: Vec<Option<Boy>>) -> Result<Self, Self::Error> {
        Matching::from_partial(v)
    }
}

impl From<Matching> for Vec<Option<Boy>> {
    fn from(m: Matching) -> Self {
        m.husband_of
    }
}
