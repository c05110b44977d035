//! CSV logs and reports. Every file has a header row, LF line endings and
//! 0/1 booleans.

use std::collections::BTreeMap;

use exposure_core::{
    precision_recall, AnnotationRecord, ConfusionCounts, EventRecord, FlagRecord, Layout, PeriodRow,
    SecondFlags, Target,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FLAGS_HEADER: &[&str] = &["t", "stream", "crossing", "critical", "critical_moving"];
pub const EVENTS_HEADER: &[&str] = &["t", "stopline", "approach", "origin_tiebreak_flag"];
pub const REPORT_HEADER: &[&str] = &["stream", "period_start", "period_end", "Z", "X", "Y", "Ym"];
pub const ANNOTATIONS_HEADER: &[&str] = &["t", "stream", "truth_critical", "truth_critical_moving"];
pub const COUNTS_HEADER: &[&str] = &["stream", "target", "TP", "FP", "FN"];
pub const SCORES_HEADER: &[&str] = &[
    "stream",
    "target",
    "TP",
    "FP",
    "FN",
    "recall_pct",
    "precision_pct",
];

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

mod bit {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match <&str>::deserialize(d)? {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(de::Error::custom(format!("expected 0 or 1, got `{other}`"))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FlagRow {
    t: u64,
    stream: String,
    #[serde(with = "bit")]
    crossing: bool,
    #[serde(with = "bit")]
    critical: bool,
    #[serde(with = "bit")]
    critical_moving: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct AnnotationRow {
    t: u64,
    stream: String,
    #[serde(with = "bit")]
    truth_critical: bool,
    #[serde(with = "bit")]
    truth_critical_moving: bool,
}

#[derive(Debug, Serialize)]
struct EventRow<'a> {
    t: u64,
    stopline: &'a str,
    approach: &'a str,
    origin_tiebreak_flag: &'a str,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ReportRow {
    pub stream: String,
    pub period_start: u64,
    pub period_end: u64,
    #[serde(rename = "Z")]
    pub z: u64,
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "Y")]
    pub y: u64,
    #[serde(rename = "Ym")]
    pub y_m: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CountsRow {
    stream: String,
    target: String,
    #[serde(rename = "TP")]
    tp: u64,
    #[serde(rename = "FP")]
    fp: u64,
    #[serde(rename = "FN")]
    fn_: u64,
}

#[derive(Debug, Serialize)]
struct ScoreRow<'a> {
    stream: &'a str,
    target: &'a str,
    #[serde(rename = "TP")]
    tp: u64,
    #[serde(rename = "FP")]
    fp: u64,
    #[serde(rename = "FN")]
    fn_: u64,
    recall_pct: Option<u64>,
    precision_pct: Option<u64>,
}

fn write_csv<S: Serialize>(header: &[&str], rows: impl IntoIterator<Item = S>) -> String {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // Writing to memory only fails on serializer bugs.
    writer.write_record(header).expect("header");
    for row in rows {
        writer.serialize(row).expect("row");
    }
    let bytes = writer.into_inner().expect("flush");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

fn read_csv<D: DeserializeOwned>(header: &[&str], text: &str) -> Result<Vec<D>, RecordError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = reader.headers()?;
    if found.iter().ne(header.iter().copied()) {
        return Err(RecordError::Header {
            expected: header.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut rows = Vec::new();
    for result in reader.deserialize() {
        match result {
            Ok(row) => rows.push(row),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                let message = match e.kind() {
                    csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                    _ => e.to_string(),
                };
                return Err(RecordError::Row { line, message });
            }
        }
    }
    Ok(rows)
}

pub fn write_flags<'a>(flags: impl IntoIterator<Item = &'a SecondFlags>, layout: &Layout) -> String {
    write_csv(
        FLAGS_HEADER,
        flags.into_iter().map(|f| FlagRow {
            t: f.t,
            stream: layout.approach(f.stream).id.clone(),
            crossing: f.crossing,
            critical: f.critical,
            critical_moving: f.critical_moving,
        }),
    )
}

pub fn read_flags(text: &str) -> Result<Vec<FlagRecord>, RecordError> {
    let rows: Vec<FlagRow> = read_csv(FLAGS_HEADER, text)?;
    Ok(rows
        .into_iter()
        .map(|r| FlagRecord {
            t: r.t,
            stream: r.stream,
            crossing: r.crossing,
            critical: r.critical,
            critical_moving: r.critical_moving,
        })
        .collect())
}

/// Annotations in the same shape as a flags log, as produced by the
/// scenario renderer.
pub fn write_annotations<'a>(flags: impl IntoIterator<Item = &'a SecondFlags>, layout: &Layout) -> String {
    write_csv(
        ANNOTATIONS_HEADER,
        flags.into_iter().map(|f| AnnotationRow {
            t: f.t,
            stream: layout.approach(f.stream).id.clone(),
            truth_critical: f.critical,
            truth_critical_moving: f.critical_moving,
        }),
    )
}

pub fn read_annotations(text: &str) -> Result<Vec<AnnotationRecord>, RecordError> {
    let rows: Vec<AnnotationRow> = read_csv(ANNOTATIONS_HEADER, text)?;
    Ok(rows
        .into_iter()
        .map(|r| AnnotationRecord {
            t: r.t,
            stream: r.stream,
            truth_critical: r.truth_critical,
            truth_critical_moving: r.truth_critical_moving,
        })
        .collect())
}

/// The `approach` column carries the origin attributed to the conflict
/// zone, which differs from the stop line's own approach only when a
/// tie-break picked another one.
pub fn write_events<'a>(events: impl IntoIterator<Item = &'a EventRecord>, layout: &Layout) -> String {
    write_csv(
        EVENTS_HEADER,
        events.into_iter().map(|e| EventRow {
            t: e.event.t,
            stopline: &layout.stop_line(e.event.stop_line).id,
            approach: &layout.approach(e.origin).id,
            origin_tiebreak_flag: e.tiebreak.as_str(),
        }),
    )
}

pub fn report_rows<'a>(rows: impl IntoIterator<Item = &'a PeriodRow>, layout: &Layout) -> Vec<ReportRow> {
    rows.into_iter()
        .map(|r| ReportRow {
            stream: layout.approach(r.stream).id.clone(),
            period_start: r.period_start,
            period_end: r.period_end,
            z: r.counters.z,
            x: r.counters.x,
            y: r.counters.y,
            y_m: r.counters.y_m,
        })
        .collect()
}

pub fn write_report<'a>(rows: impl IntoIterator<Item = &'a PeriodRow>, layout: &Layout) -> String {
    write_csv(REPORT_HEADER, report_rows(rows, layout))
}

pub fn read_report(text: &str) -> Result<Vec<ReportRow>, RecordError> {
    read_csv(REPORT_HEADER, text)
}

/// Confusion counts keyed by stream and target, for reporting on counts
/// tallied elsewhere.
pub fn read_counts(text: &str) -> Result<Vec<(String, Target, ConfusionCounts)>, RecordError> {
    let rows: Vec<CountsRow> = read_csv(COUNTS_HEADER, text)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let target = Target::from_name(&r.target).ok_or_else(|| RecordError::Row {
                line: i as u64 + 2,
                message: format!("unknown target `{}`", r.target),
            })?;
            let counts = ConfusionCounts {
                tp: r.tp,
                fp: r.fp,
                fn_: r.fn_,
            };
            Ok((r.stream, target, counts))
        })
        .collect()
}

pub fn write_scores<'a>(rows: impl IntoIterator<Item = (&'a str, Target, &'a ConfusionCounts)>) -> String {
    write_csv(
        SCORES_HEADER,
        rows.into_iter().map(|(stream, target, c)| {
            let pr = precision_recall(c);
            ScoreRow {
                stream,
                target: target.as_str(),
                tp: c.tp,
                fp: c.fp,
                fn_: c.fn_,
                recall_pct: pr.recall,
                precision_pct: pr.precision,
            }
        }),
    )
}

pub fn write_score_map(scores: &BTreeMap<String, ConfusionCounts>, target: Target) -> String {
    write_scores(scores.iter().map(|(s, c)| (s.as_str(), target, c)))
}
