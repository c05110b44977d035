//! Scoring of per-second detections against annotated ground truth, as a
//! binary classification problem where critical seconds are the positive
//! class.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Y,
    Ym,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Y => "Y",
            Target::Ym => "Ym",
        }
    }

    pub fn from_name(name: &str) -> Option<Target> {
        match name {
            "Y" => Some(Target::Y),
            "Ym" | "Y_m" => Some(Target::Ym),
            _ => None,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One line of the detector flags log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagRecord {
    pub t: u64,
    pub stream: String,
    pub crossing: bool,
    pub critical: bool,
    pub critical_moving: bool,
}

/// One annotated second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub t: u64,
    pub stream: String,
    pub truth_critical: bool,
    pub truth_critical_moving: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn add(&mut self, detected: bool, truth: bool) {
        match (detected, truth) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvaluationError {
    #[error(
        "flags and annotations cover different seconds: {} only flagged, {} only annotated",
        fmt_keys(.only_flagged),
        fmt_keys(.only_annotated)
    )]
    DomainMismatch {
        only_flagged: Vec<(u64, String)>,
        only_annotated: Vec<(u64, String)>,
    },
    #[error("duplicate {source_name} record for t={t}, stream `{stream}`")]
    Duplicate {
        source_name: &'static str,
        t: u64,
        stream: String,
    },
    #[error("annotation t={t}, stream `{stream}` is critical-moving but not critical")]
    InconsistentAnnotation { t: u64, stream: String },
}

fn fmt_keys(keys: &[(u64, String)]) -> String {
    use core::fmt::Write;
    let mut out = String::from("[");
    for (i, (t, s)) in keys.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{s}@{t}");
    }
    out.push(']');
    out
}

/// Confusion counts per stream for `target`. Both inputs must cover
/// exactly the same `(t, stream)` seconds.
pub fn score(
    flags: &[FlagRecord],
    annotations: &[AnnotationRecord],
    target: Target,
) -> Result<BTreeMap<String, ConfusionCounts>, EvaluationError> {
    let mut detected: BTreeMap<(u64, &str), bool> = BTreeMap::new();
    for f in flags {
        let value = match target {
            Target::Y => f.critical,
            Target::Ym => f.critical_moving,
        };
        if detected.insert((f.t, &f.stream), value).is_some() {
            return Err(EvaluationError::Duplicate {
                source_name: "flag",
                t: f.t,
                stream: f.stream.clone(),
            });
        }
    }
    let mut truth: BTreeMap<(u64, &str), bool> = BTreeMap::new();
    for a in annotations {
        if a.truth_critical_moving && !a.truth_critical {
            return Err(EvaluationError::InconsistentAnnotation {
                t: a.t,
                stream: a.stream.clone(),
            });
        }
        let value = match target {
            Target::Y => a.truth_critical,
            Target::Ym => a.truth_critical_moving,
        };
        if truth.insert((a.t, &a.stream), value).is_some() {
            return Err(EvaluationError::Duplicate {
                source_name: "annotation",
                t: a.t,
                stream: a.stream.clone(),
            });
        }
    }

    let only_flagged: Vec<(u64, String)> = detected
        .keys()
        .filter(|k| !truth.contains_key(*k))
        .map(|(t, s)| (*t, String::from(*s)))
        .collect();
    let only_annotated: Vec<(u64, String)> = truth
        .keys()
        .filter(|k| !detected.contains_key(*k))
        .map(|(t, s)| (*t, String::from(*s)))
        .collect();
    if !only_flagged.is_empty() || !only_annotated.is_empty() {
        return Err(EvaluationError::DomainMismatch {
            only_flagged,
            only_annotated,
        });
    }

    let mut counts: BTreeMap<String, ConfusionCounts> = BTreeMap::new();
    for (key, d) in &detected {
        let entry = match counts.get_mut(key.1) {
            Some(entry) => entry,
            None => counts.entry(String::from(key.1)).or_default(),
        };
        entry.add(*d, truth[key]);
    }
    Ok(counts)
}

/// Percentages rounded to the nearest integer, half away from zero.
/// Absent when undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionRecall {
    pub precision: Option<u64>,
    pub recall: Option<u64>,
}

/// `round(100 * num / den)` on integers, `None` for `den == 0`.
pub fn rounded_percent(num: u64, den: u64) -> Option<u64> {
    if den == 0 {
        None
    } else {
        Some((200 * num + den) / (2 * den))
    }
}

pub fn precision_recall(counts: &ConfusionCounts) -> PrecisionRecall {
    PrecisionRecall {
        precision: rounded_percent(counts.tp, counts.tp + counts.fp),
        recall: rounded_percent(counts.tp, counts.tp + counts.fn_),
    }
}
