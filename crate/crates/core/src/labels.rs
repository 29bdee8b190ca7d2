//! Display names for people.
//!
//! The four-couple example uses letters: girls `A..D`, boys `W..Z`.
//! Everything else is rendered as `g<i>` / `b<i>`.

use crate::instance::PreferenceInstance;
use crate::{Boy, Girl};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Labels {
    Letters,
    Numeric,
}

const GIRL_LETTERS: [char; 4] = ['A', 'B', 'C', 'D'];
const BOY_LETTERS: [char; 4] = ['W', 'X', 'Y', 'Z'];

impl Labels {
    pub fn for_instance(instance: &PreferenceInstance) -> Self {
        if *instance == PreferenceInstance::four_couples() {
            Labels::Letters
        } else {
            Labels::Numeric
        }
    }

    pub fn girl(self, g: Girl) -> String {
        match self {
            Labels::Letters if g < 4 => GIRL_LETTERS[g].to_string(),
            _ => format!("g{g}"),
        }
    }

    pub fn boy(self, b: Boy) -> String {
        match self {
            Labels::Letters if b < 4 => BOY_LETTERS[b].to_string(),
            _ => format!("b{b}"),
        }
    }

    /// Parses a girl given as an index or, with letters, `A..D`.
    pub fn parse_girl(self, s: &str) -> Option<Girl> {
        if let Ok(i) = s.parse() {
            return Some(i);
        }
        match self {
            Labels::Letters => {
                let c = s.chars().next()?.to_ascii_uppercase();
                GIRL_LETTERS.iter().position(|&l| l == c)
            }
            Labels::Numeric => s.strip_prefix('g')?.parse().ok(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_uses_letters() {
        let l = Labels::for_instance(&PreferenceInstance::four_couples());
        assert_eq!(l, Labels::Letters);
        assert_eq!(l.girl(0), "A");
        assert_eq!(l.boy(3), "Z");
        assert_eq!(l.parse_girl("B"), Some(1));
        assert_eq!(l.parse_girl("2"), Some(2));
        let r = PreferenceInstance::generate_uniform(4, 5).unwrap();
        assert_eq!(Labels::for_instance(&r).boy(3), "b3");
    }
}
