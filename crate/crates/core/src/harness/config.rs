use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::bounds::theorem_envelope;
use crate::process::ProposalMode;
use crate::Girl;

/// Largest size whose counts may be rechecked by the oracle.
pub const ORACLE_VERIFY_LIMIT: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Kind {
    Theorem,
    Equivalence,
    LemmaAudit,
    AcceptanceDist,
    Coupon,
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "theorem" => Ok(Kind::Theorem),
            "equivalence" => Ok(Kind::Equivalence),
            "lemma_audit" => Ok(Kind::LemmaAudit),
            "acceptance_dist" => Ok(Kind::AcceptanceDist),
            "coupon" => Ok(Kind::Coupon),
            _ => Err(format!("unknown experiment kind {s:?}")),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Theorem => "THEOREM",
            Kind::Equivalence => "EQUIVALENCE",
            Kind::LemmaAudit => "LEMMA_AUDIT",
            Kind::AcceptanceDist => "ACCEPTANCE_DIST",
            Kind::Coupon => "COUPON",
        };
        f.write_str(s)
    }
}

/// Which sampler produces husband counts in a THEOREM campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Method {
    /// The deterministic enumeration on a freshly generated instance.
    #[default]
    A,
    /// The random process with the natural stop.
    B,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "A" | "a" => Ok(Method::A),
            "B" | "b" => Ok(Method::B),
            _ => Err(format!("unknown method {s:?}, expected A or B")),
        }
    }
}

/// One size or a sweep of sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sizes {
    One(usize),
    Sweep(Vec<usize>),
}

impl Sizes {
    pub fn list(&self) -> Vec<usize> {
        match self {
            Sizes::One(n) => vec![*n],
            Sizes::Sweep(ns) => ns.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory receiving `report.json`, `trials.csv` and the TSV files.
    pub dir: PathBuf,
    #[serde(default)]
    pub plot_data: bool,
}

/// A Monte Carlo campaign. Worker count and output location never affect
/// the report, so they are left out when the config is echoed into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub n: Sizes,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub girl: Girl,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub mode: ProposalMode,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_big_c", rename = "C")]
    pub big_c: f64,
    /// Defaults to 0.3 for LEMMA_AUDIT and 0.45 otherwise.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Defaults to 0.5 for ACCEPTANCE_DIST and 0.05 otherwise.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Proposals per girl in ACCEPTANCE_DIST; defaults to `n`.
    #[serde(default)]
    pub m: Option<u64>,
    /// Recompute every THEOREM count with the brute-force oracle.
    #[serde(default)]
    pub verify_with_oracle: bool,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing)]
    pub output: Option<OutputSpec>,
}

fn default_c() -> f64 {
    0.3
}

fn default_big_c() -> f64 {
    2.0
}

impl ExperimentConfig {
    pub fn new(kind: Kind, n: usize, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            kind,
            n: Sizes::One(n),
            trials,
            master_seed,
            girl: 0,
            method: Method::default(),
            mode: ProposalMode::default(),
            c: default_c(),
            big_c: default_big_c(),
            delta: None,
            epsilon: None,
            m: None,
            verify_with_oracle: false,
            workers: None,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(match self.kind {
            Kind::LemmaAudit => 0.3,
            _ => 0.45,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(match self.kind {
            Kind::AcceptanceDist => 0.5,
            _ => 0.05,
        })
    }

    pub fn m_for(&self, n: usize) -> u64 {
        self.m.unwrap_or(n as u64)
    }

    /// Checks everything that can be checked before any trial runs.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        let sizes = self.n.list();
        if sizes.is_empty() {
            return bad("size sweep is empty".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        for &n in &sizes {
            if n == 0 {
                return bad("n must be at least 1".into());
            }
            if self.kind != Kind::AcceptanceDist && self.girl >= n {
                return bad(format!("girl {} is out of range for n={n}", self.girl));
            }
        }
        match self.kind {
            Kind::Theorem => {
                for &n in &sizes {
                    theorem_envelope(n as f64, self.c, self.big_c, self.delta(), self.epsilon())
                        .map_err(|e| HarnessError::Config(format!("n={n}: {e}")))?;
                }
            }
            Kind::LemmaAudit => {
                let d = self.delta();
                if !(d > 0.0 && d.is_finite()) {
                    return bad(format!("delta must be positive, got {d}"));
                }
            }
            Kind::AcceptanceDist => {
                if self.m == Some(0) {
                    return bad("m must be at least 1".into());
                }
                let e = self.epsilon();
                if !(e > 0.0 && e < 1.0) {
                    return bad(format!("epsilon must lie in (0, 1), got {e}"));
                }
            }
            Kind::Equivalence | Kind::Coupon => {}
        }
        if self.verify_with_oracle {
            if self.kind != Kind::Theorem || self.method != Method::A {
                return bad("oracle verification applies to THEOREM with method A only".into());
            }
            if let Some(&n) = sizes.iter().find(|&&n| n > ORACLE_VERIFY_LIMIT) {
                return bad(format!("oracle verification needs n <= 7, got {n}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_sweep_configs() {
        let c = ExperimentConfig::from_json(
            r#"{"kind":"THEOREM","n":1024,"trials":200,"master_seed":1}"#,
        )
        .unwrap();
        assert_eq!(c.n.list(), vec![1024]);
        assert_eq!((c.c, c.big_c, c.method), (0.3, 2.0, Method::A));
        assert_eq!(c.delta(), 0.45);
        c.validate().unwrap();

        let s = ExperimentConfig::from_json(
            r#"{"kind":"COUPON","n":[10,100],"trials":5,"master_seed":2,"C":3.0,"method":"B"}"#,
        )
        .unwrap();
        assert_eq!(s.n.list(), vec![10, 100]);
        assert_eq!(s.big_c, 3.0);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_json(r#"{"kind":"THEOREM","n":5,"trials":1}"#).is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"kind":"THEOREM","n":5,"trials":1,"master_seed":0,"typo":1}"#
        )
        .is_err());

        let mut c = ExperimentConfig::new(Kind::Theorem, 1024, 0, 0);
        assert!(c.validate().is_err());
        c.trials = 10;
        c.c = 0.6;
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("c must satisfy"), "{msg}");
        c.c = 0.3;
        c.delta = Some(0.3);
        assert!(c.validate().is_err(), "(1-eps)delta = 0.285 is below c");

        let mut v = ExperimentConfig::new(Kind::Theorem, 9, 3, 0);
        v.verify_with_oracle = true;
        assert!(v.validate().is_err());
        v.n = Sizes::One(7);
        v.validate().unwrap();
        v.method = Method::B;
        assert!(v.validate().is_err());
    }

    #[test]
    fn echo_omits_workers_and_output() {
        let mut c = ExperimentConfig::new(Kind::Coupon, 100, 4, 9);
        c.workers = Some(3);
        let text = serde_json::to_string(&c).unwrap();
        assert!(!text.contains("workers") && !text.contains("output"));
        assert_eq!("lemma-audit".parse::<Kind>(), Ok(Kind::LemmaAudit));
    }
}
