//! Line-oriented layout documents.
//!
//! ```text
//! [zone] id=CZ kind=conflict w=4 h=4
//! [zone] id=A0 kind=lane len=8 approach=A
//! [approach] id=A signal=SA lanes=A0
//! [stopline] id=SL_A approach=A upstream=A0:0-2 downstream=CZ:(0,0)-(0,3)
//! [cross] A=B B=A
//! [thresholds] moving=2 stationary=3
//! [period] T=3600
//! ```
//!
//! Optional sections: `[crossing] ratio=upstream|downstream|both` and
//! `[codes] <raw>=<state> ...` mapping single-character sensor codes onto
//! the four main states. `#` starts a comment.

use std::collections::HashMap;

use exposure_core::{
    ApproachDecl, CellSelector, CellState, Layout, LayoutError, LayoutSpec, RatioSubset, StopLineDecl,
    ZoneDecl, ZoneKind,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LayoutDocError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid layout: {0}")]
    Semantic(#[from] LayoutError),
}

pub(crate) fn syntax(line: usize, message: impl Into<String>) -> LayoutDocError {
    LayoutDocError::Syntax {
        line,
        message: message.into(),
    }
}

/// Key-value fields of one section line, in order.
pub(crate) struct Fields<'a> {
    pub(crate) line: usize,
    pub(crate) section: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    pub(crate) fn take(&mut self, key: &str) -> Option<&'a str> {
        let pos = self.pairs.iter().position(|(k, _)| *k == key)?;
        Some(self.pairs.remove(pos).1)
    }

    pub(crate) fn required(&mut self, key: &str) -> Result<&'a str, LayoutDocError> {
        self.take(key)
            .ok_or_else(|| syntax(self.line, format!("[{}] is missing `{key}`", self.section)))
    }

    pub(crate) fn number<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, LayoutDocError> {
        let raw = self.required(key)?;
        raw.parse().map_err(|_| {
            syntax(
                self.line,
                format!("`{key}` must be a non-negative integer, got `{raw}`"),
            )
        })
    }

    pub(crate) fn optional_number<T: std::str::FromStr>(
        &mut self,
        key: &str,
    ) -> Result<Option<T>, LayoutDocError> {
        match self.take(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                syntax(
                    self.line,
                    format!("`{key}` must be a non-negative integer, got `{raw}`"),
                )
            }),
        }
    }

    pub(crate) fn finish(self) -> Result<(), LayoutDocError> {
        match self.pairs.first() {
            None => Ok(()),
            Some((k, _)) => Err(syntax(
                self.line,
                format!("unknown field `{k}` in [{}]", self.section),
            )),
        }
    }
}

/// Splits `[section] k=v k=v` into its section name and fields.
pub(crate) fn split_line(line_no: usize, line: &str) -> Result<Fields<'_>, LayoutDocError> {
    let rest = line
        .strip_prefix('[')
        .ok_or_else(|| syntax(line_no, "expected `[section]`"))?;
    let (section, rest) = rest
        .split_once(']')
        .ok_or_else(|| syntax(line_no, "unterminated section name"))?;
    let mut pairs = Vec::new();
    for token in rest.split_whitespace() {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| syntax(line_no, format!("expected key=value, got `{token}`")))?;
        if k.is_empty() || v.is_empty() {
            return Err(syntax(line_no, format!("empty key or value in `{token}`")));
        }
        if pairs.iter().any(|(seen, _)| *seen == k) {
            return Err(syntax(line_no, format!("duplicate field `{k}`")));
        }
        pairs.push((k, v));
    }
    Ok(Fields {
        line: line_no,
        section: section.trim(),
        pairs,
    })
}

/// Splits on commas that are not inside parentheses.
pub(crate) fn split_top_level(value: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in value.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&value[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&value[start..]);
    parts
}

fn parse_point(raw: &str) -> Option<(usize, usize)> {
    let inner = raw.strip_prefix('(')?.strip_suffix(')')?;
    let (r, c) = inner.split_once(',')?;
    Some((r.trim().parse().ok()?, c.trim().parse().ok()?))
}

/// Parses `ZONE:a-b`, `ZONE:i`, `ZONE:(r,c)-(r,c)` or `ZONE:(r,c)`.
pub fn parse_selector(raw: &str) -> Option<CellSelector> {
    let (zone, cells) = raw.split_once(':')?;
    if zone.is_empty() {
        return None;
    }
    let zone = zone.to_string();
    if cells.starts_with('(') {
        let (from, to) = match cells.split_once(")-(") {
            Some((a, b)) => (parse_point(&format!("{a})"))?, parse_point(&format!("({b}"))?),
            None => {
                let p = parse_point(cells)?;
                (p, p)
            }
        };
        Some(CellSelector::Rect { zone, from, to })
    } else {
        let (first, last) = match cells.split_once('-') {
            Some((a, b)) => (a.parse().ok()?, b.parse().ok()?),
            None => {
                let i = cells.parse().ok()?;
                (i, i)
            }
        };
        Some(CellSelector::Lane { zone, first, last })
    }
}

fn selectors(fields: &mut Fields<'_>, key: &str) -> Result<Vec<CellSelector>, LayoutDocError> {
    let raw = fields.required(key)?;
    split_top_level(raw)
        .into_iter()
        .map(|part| {
            parse_selector(part)
                .ok_or_else(|| syntax(fields.line, format!("malformed cell selection `{part}`")))
        })
        .collect()
}

/// Parses and validates a layout document.
pub fn parse_layout(text: &str) -> Result<Layout, LayoutDocError> {
    let mut spec = LayoutSpec::default();
    let mut singletons: HashMap<String, usize> = HashMap::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = split_line(line_no, line)?;
        let section = fields.section;
        if matches!(section, "thresholds" | "period" | "crossing" | "cross" | "codes") {
            if let Some(first) = singletons.insert(section.to_string(), line_no) {
                return Err(syntax(
                    line_no,
                    format!("[{section}] already given on line {first}"),
                ));
            }
        }
        match section {
            "zone" => {
                let id = fields.required("id")?.to_string();
                let kind = match fields.required("kind")? {
                    "conflict" => ZoneKind::Conflict {
                        width: fields.number("w")?,
                        height: fields.number("h")?,
                    },
                    "lane" => ZoneKind::Lane {
                        len: fields.number("len")?,
                    },
                    other => {
                        return Err(syntax(
                            line_no,
                            format!("zone kind must be `conflict` or `lane`, got `{other}`"),
                        ))
                    }
                };
                let approach = fields.take("approach").map(str::to_string);
                spec.zones.push(ZoneDecl { id, kind, approach });
            }
            "approach" => {
                let id = fields.required("id")?.to_string();
                let signal = fields.take("signal").unwrap_or(&id).to_string();
                let lanes = fields.required("lanes")?.split(',').map(str::to_string).collect();
                spec.approaches.push(ApproachDecl { id, signal, lanes });
            }
            "stopline" => {
                let id = fields.required("id")?.to_string();
                let approach = fields.required("approach")?.to_string();
                let upstream = selectors(&mut fields, "upstream")?;
                let downstream = selectors(&mut fields, "downstream")?;
                spec.stop_lines.push(StopLineDecl {
                    id,
                    approach,
                    upstream,
                    downstream,
                });
            }
            "cross" => {
                spec.cross = fields
                    .pairs
                    .drain(..)
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .collect();
            }
            "thresholds" => {
                spec.thresholds.moving = fields.number("moving")?;
                spec.thresholds.stationary = fields.number("stationary")?;
            }
            "period" => {
                spec.period = fields.number("T")?;
            }
            "crossing" => {
                let raw = fields.required("ratio")?;
                spec.ratio_subset = RatioSubset::from_name(raw).ok_or_else(|| {
                    syntax(
                        line_no,
                        format!("ratio must be upstream, downstream or both, got `{raw}`"),
                    )
                })?;
            }
            "codes" => {
                for (raw, state) in fields.pairs.drain(..) {
                    let mut chars = raw.chars();
                    let (Some(code), None) = (chars.next(), chars.next()) else {
                        return Err(syntax(line_no, format!("raw code `{raw}` must be one character")));
                    };
                    let mut state_chars = state.chars();
                    let mapped = match (state_chars.next(), state_chars.next()) {
                        (Some(c), None) => CellState::from_code(c),
                        _ => None,
                    }
                    .ok_or_else(|| syntax(line_no, format!("`{state}` is not one of . m s e")))?;
                    if code.is_whitespace() {
                        return Err(syntax(line_no, "raw code cannot be whitespace"));
                    }
                    spec.raw_codes.push((code, mapped));
                }
            }
            other => return Err(syntax(line_no, format!("unknown section [{other}]"))),
        }
        fields.finish()?;
    }
    Ok(Layout::build(spec)?)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use exposure_core::{ApproachIdx, ZoneIdx};

    pub(crate) const TWO_ROADS: &str = "\
[zone] id=CZ kind=conflict w=4 h=4
[zone] id=A0 kind=lane len=8 approach=A
[zone] id=B0 kind=lane len=8 approach=B
[approach] id=A signal=SA lanes=A0
[approach] id=B signal=SB lanes=B0
[stopline] id=SL_A approach=A upstream=A0:0-2 downstream=CZ:(0,0)-(0,3)
[stopline] id=SL_B approach=B upstream=B0:0-2 downstream=CZ:(0,0)-(3,0)
[cross] A=B B=A
[thresholds] moving=2 stationary=3
[period] T=3600
";

    #[test]
    fn parses_the_two_road_layout() {
        let layout = parse_layout(TWO_ROADS).unwrap();
        assert_eq!(layout.zones().len(), 3);
        assert_eq!(layout.stop_lines()[0].upstream.len(), 3);
        assert_eq!(layout.stop_lines()[0].downstream.len(), 4);
        assert_eq!(layout.cross_traffic(ApproachIdx(1)), Some(ApproachIdx(0)));
        assert_eq!(layout.period(), 3600);
        assert_eq!(layout.zone_index("B0"), Some(ZoneIdx(2)));
    }

    #[test]
    fn reports_unknown_zone() {
        let text = TWO_ROADS.replace("downstream=CZ:(0,0)-(0,3)", "downstream=CX:(0,0)-(0,3)");
        let err = parse_layout(&text).unwrap_err();
        assert!(matches!(
            err,
            LayoutDocError::Semantic(LayoutError::UnknownZone { ref id, .. }) if id == "CX"
        ));
    }

    #[test]
    fn reports_overlap() {
        let text = TWO_ROADS.replace("downstream=CZ:(0,0)-(0,3)", "downstream=A0:2");
        assert_eq!(
            parse_layout(&text),
            Err(LayoutDocError::Semantic(LayoutError::OverlappingSubsets(
                "SL_A".into()
            )))
        );
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = TWO_ROADS.replace("[zone] id=A0 kind=lane len=8", "[zone] id=A0 kind=lane len=eight");
        assert!(matches!(
            parse_layout(&text),
            Err(LayoutDocError::Syntax { line: 2, .. })
        ));
        let text = format!("{TWO_ROADS}[period] T=60\n");
        assert!(matches!(
            parse_layout(&text),
            Err(LayoutDocError::Syntax { line: 11, .. })
        ));
        let text = TWO_ROADS.replace("[cross]", "[crosss]");
        assert!(matches!(
            parse_layout(&text),
            Err(LayoutDocError::Syntax { line: 8, .. })
        ));
        let text = TWO_ROADS.replace("signal=SA", "signal=SA colour=red");
        assert!(matches!(
            parse_layout(&text),
            Err(LayoutDocError::Syntax { line: 4, .. })
        ));
    }

    #[test]
    fn asymmetric_cross_is_semantic_error() {
        let text = TWO_ROADS.replace("[cross] A=B B=A", "[cross] A=B");
        assert!(matches!(
            parse_layout(&text),
            Err(LayoutDocError::Semantic(LayoutError::AsymmetricCross { .. }))
        ));
    }

    #[test]
    fn optional_sections() {
        let text = format!("{TWO_ROADS}[crossing] ratio=both\n[codes] 1=m 2=s 3=e 0=.\n");
        let layout = parse_layout(&text).unwrap();
        assert_eq!(layout.ratio_subset(), RatioSubset::Both);
        assert_eq!(layout.decode_cell('3'), Some(CellState::EndOfPresence));
    }

    #[test]
    fn selectors() {
        assert_eq!(
            parse_selector("A0:3"),
            Some(CellSelector::Lane {
                zone: "A0".into(),
                first: 3,
                last: 3
            })
        );
        assert_eq!(
            parse_selector("CZ:(1,2)-(3,4)"),
            Some(CellSelector::Rect {
                zone: "CZ".into(),
                from: (1, 2),
                to: (3, 4)
            })
        );
        assert_eq!(
            parse_selector("CZ:(1,2)"),
            Some(CellSelector::Rect {
                zone: "CZ".into(),
                from: (1, 2),
                to: (1, 2)
            })
        );
        assert_eq!(parse_selector("CZ:(1,2"), None);
        assert_eq!(parse_selector(":1-2"), None);
        assert_eq!(
            split_top_level("CZ:(0,0)-(0,1),A0:1-2"),
            ["CZ:(0,0)-(0,1)", "A0:1-2"]
        );
    }
}
