//! Frame stream text format, one record per second:
//!
//! ```text
//! FRAME 17
//! ZONE CZ
//! ....
//! .mm.
//! .mm.
//! ....
//! ZONE A0
//! ssmm....
//! SIG A G
//! SIG B R
//! END
//! ```
//!
//! Conflict zones are written row by row, lanes on a single line starting at
//! index 0. Zones and signals may appear in any order when reading; the
//! writer emits them in layout order, so canonical streams round-trip byte
//! for byte.

use std::fmt::Write as _;

use exposure_core::grid::check_sequence;
use exposure_core::{CellState, Frame, FrameError, Layout, Signal, ZoneKind};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}{}: {kind}", .t.map(|t| format!(" (frame t={t})")).unwrap_or_default())]
pub struct FrameParseError {
    pub line: usize,
    pub t: Option<u64>,
    pub kind: FrameErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameErrorKind {
    #[error("expected `FRAME <t>`, got `{0}`")]
    ExpectedFrame(String),
    #[error("malformed second index `{0}`")]
    BadTime(String),
    #[error("unexpected line `{0}`")]
    Unexpected(String),
    #[error("unknown zone `{0}`")]
    UnknownZone(String),
    #[error("zone `{0}` given twice")]
    DuplicateZone(String),
    #[error("zone `{0}` missing from frame")]
    MissingZone(String),
    #[error("zone `{zone}`: row has {found} cells, expected {expected}")]
    RowWidth {
        zone: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown cell state code `{0}`")]
    UnknownState(char),
    #[error("unknown approach `{0}`")]
    UnknownApproach(String),
    #[error("signal for approach `{0}` given twice")]
    DuplicateSignal(String),
    #[error("signal missing for approach `{0}`")]
    MissingSignal(String),
    #[error("malformed signal line `{0}`")]
    BadSignal(String),
    #[error("stream ends inside a frame")]
    UnexpectedEof,
    #[error(transparent)]
    Sequence(#[from] FrameError),
}

/// Lazily parses frames from `text`, checking each against `layout` and
/// the one-second cadence.
pub struct FrameReader<'t, 'l> {
    layout: &'l Layout,
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'t>>>,
    previous: Option<u64>,
    failed: bool,
}

impl<'t, 'l> FrameReader<'t, 'l> {
    pub fn new(text: &'t str, layout: &'l Layout) -> Self {
        FrameReader {
            layout,
            lines: text.lines().enumerate().peekable(),
            previous: None,
            failed: false,
        }
    }

    fn next_line(&mut self, t: Option<u64>) -> Result<(usize, &'t str), FrameParseError> {
        match self.lines.next() {
            Some((i, line)) => Ok((i + 1, line)),
            None => Err(FrameParseError {
                line: 0,
                t,
                kind: FrameErrorKind::UnexpectedEof,
            }),
        }
    }

    fn parse_frame(&mut self, header_line: usize, header: &str) -> Result<Frame, FrameParseError> {
        let layout = self.layout;
        let err = |line: usize, t: Option<u64>, kind: FrameErrorKind| FrameParseError { line, t, kind };
        let raw_t = header
            .strip_prefix("FRAME ")
            .ok_or_else(|| err(header_line, None, FrameErrorKind::ExpectedFrame(header.into())))?;
        let t: u64 = raw_t
            .trim()
            .parse()
            .map_err(|_| err(header_line, None, FrameErrorKind::BadTime(raw_t.into())))?;
        let ctx = Some(t);

        let mut cells: Vec<Option<Vec<CellState>>> = vec![None; layout.zones().len()];
        let mut signals: Vec<Option<Signal>> = vec![None; layout.approaches().len()];
        loop {
            let (line_no, line) = self.next_line(ctx)?;
            if line == "END" {
                break;
            }
            if let Some(id) = line.strip_prefix("ZONE ") {
                let id = id.trim();
                let z = layout
                    .zone_index(id)
                    .ok_or_else(|| err(line_no, ctx, FrameErrorKind::UnknownZone(id.into())))?;
                if cells[z.0].is_some() {
                    return Err(err(line_no, ctx, FrameErrorKind::DuplicateZone(id.into())));
                }
                let (width, rows) = match layout.zone(z).kind {
                    ZoneKind::Conflict { width, height } => (width, height),
                    ZoneKind::Lane { len } => (len, 1),
                };
                let mut states = Vec::with_capacity(width * rows);
                for _ in 0..rows {
                    let (row_no, row) = self.next_line(ctx)?;
                    let before = states.len();
                    for c in row.chars() {
                        let state = layout
                            .decode_cell(c)
                            .ok_or_else(|| err(row_no, ctx, FrameErrorKind::UnknownState(c)))?;
                        states.push(state);
                    }
                    let found = states.len() - before;
                    if found != width {
                        return Err(err(
                            row_no,
                            ctx,
                            FrameErrorKind::RowWidth {
                                zone: id.into(),
                                expected: width,
                                found,
                            },
                        ));
                    }
                }
                cells[z.0] = Some(states);
            } else if let Some(rest) = line.strip_prefix("SIG ") {
                let mut parts = rest.split_whitespace();
                let (Some(approach), Some(code), None) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(err(line_no, ctx, FrameErrorKind::BadSignal(line.into())));
                };
                let a = layout
                    .approach_index(approach)
                    .ok_or_else(|| err(line_no, ctx, FrameErrorKind::UnknownApproach(approach.into())))?;
                let signal = Signal::from_code(code)
                    .ok_or_else(|| err(line_no, ctx, FrameErrorKind::BadSignal(line.into())))?;
                if signals[a.0].replace(signal).is_some() {
                    return Err(err(
                        line_no,
                        ctx,
                        FrameErrorKind::DuplicateSignal(approach.into()),
                    ));
                }
            } else {
                return Err(err(line_no, ctx, FrameErrorKind::Unexpected(line.into())));
            }
        }

        let cells = cells
            .into_iter()
            .enumerate()
            .map(|(z, c)| {
                c.ok_or_else(|| {
                    err(
                        header_line,
                        ctx,
                        FrameErrorKind::MissingZone(layout.zones()[z].id.clone()),
                    )
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let signals = signals
            .into_iter()
            .enumerate()
            .map(|(a, s)| {
                s.ok_or_else(|| {
                    err(
                        header_line,
                        ctx,
                        FrameErrorKind::MissingSignal(layout.approaches()[a].id.clone()),
                    )
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        check_sequence(self.previous, t).map_err(|e| err(header_line, ctx, e.into()))?;
        self.previous = Some(t);
        Ok(Frame { t, cells, signals })
    }
}

impl Iterator for FrameReader<'_, '_> {
    type Item = Result<Frame, FrameParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let (i, header) = loop {
            let (i, line) = self.lines.next()?;
            if !line.trim().is_empty() {
                break (i, line);
            }
        };
        let result = self.parse_frame(i + 1, header);
        self.failed = result.is_err();
        Some(result)
    }
}

/// Parses a whole frame stream.
pub fn read_frames(text: &str, layout: &Layout) -> Result<Vec<Frame>, FrameParseError> {
    FrameReader::new(text, layout).collect()
}

/// Appends the canonical text of `frame` to `out`.
pub fn write_frame(out: &mut String, frame: &Frame, layout: &Layout) {
    let _ = writeln!(out, "FRAME {}", frame.t);
    for (zone, cells) in layout.zones().iter().zip(&frame.cells) {
        let _ = writeln!(out, "ZONE {}", zone.id);
        let width = match zone.kind {
            ZoneKind::Conflict { width, .. } => width,
            ZoneKind::Lane { len } => len,
        };
        for row in cells.chunks(width) {
            out.extend(row.iter().map(|c| c.code()));
            out.push('\n');
        }
    }
    for (approach, signal) in layout.approaches().iter().zip(&frame.signals) {
        let _ = writeln!(out, "SIG {} {}", approach.id, signal.code());
    }
    out.push_str("END\n");
}

pub fn write_frames(frames: &[Frame], layout: &Layout) -> String {
    let mut out = String::new();
    for frame in frames {
        write_frame(&mut out, frame, layout);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout_doc::parse_layout;
    use crate::layout_doc::tests::TWO_ROADS;

    const TWO_FRAMES: &str = "\
FRAME 0
ZONE CZ
....
.mm.
.mm.
....
ZONE A0
ssmm....
ZONE B0
........
SIG A G
SIG B R
END
FRAME 1
ZONE CZ
....
....
.mm.
.mm.
ZONE A0
sse.....
ZONE B0
........
SIG A G
SIG B R
END
";

    fn layout() -> Layout {
        parse_layout(TWO_ROADS).unwrap()
    }

    #[test]
    fn reads_two_frames() {
        let layout = layout();
        let frames = read_frames(TWO_FRAMES, &layout).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].t, 0);
        assert_eq!(frames[1].t, 1);
        assert_eq!(frames[0].cells[0][5], CellState::MovingPresence);
        assert_eq!(frames[1].cells[1][2], CellState::EndOfPresence);
        assert_eq!(frames[0].signals, [Signal::Green, Signal::Red]);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let layout = layout();
        let frames = read_frames(TWO_FRAMES, &layout).unwrap();
        assert_eq!(write_frames(&frames, &layout), TWO_FRAMES);
    }

    #[test]
    fn gap_is_rejected() {
        let layout = layout();
        let text = TWO_FRAMES.replace("FRAME 1", "FRAME 2");
        let err = read_frames(&text, &layout).unwrap_err();
        assert_eq!(err.t, Some(2));
        assert_eq!(
            err.kind,
            FrameErrorKind::Sequence(FrameError::Gap { previous: 0, t: 2 })
        );
    }

    #[test]
    fn unknown_state_code() {
        let layout = layout();
        let text = TWO_FRAMES.replacen("ssmm....", "ssmx....", 1);
        let err = read_frames(&text, &layout).unwrap_err();
        assert_eq!(err.kind, FrameErrorKind::UnknownState('x'));
        assert_eq!(err.line, 8);
        assert!(err.to_string().contains("t=0"));
    }

    #[test]
    fn size_mismatch() {
        let layout = layout();
        let text = TWO_FRAMES.replacen(".mm.\nZONE A0\nsse", ".mm\nZONE A0\nsse", 1);
        let err = read_frames(&text, &layout).unwrap_err();
        assert!(matches!(err.kind, FrameErrorKind::RowWidth { found: 3, .. }));
        assert_eq!(err.t, Some(1));
    }

    #[test]
    fn missing_pieces() {
        let layout = layout();
        let text = TWO_FRAMES.replacen("SIG B R\n", "", 1);
        assert_eq!(
            read_frames(&text, &layout).unwrap_err().kind,
            FrameErrorKind::MissingSignal("B".into())
        );
        let text = TWO_FRAMES.replacen("ZONE B0\n........\n", "", 1);
        assert_eq!(
            read_frames(&text, &layout).unwrap_err().kind,
            FrameErrorKind::MissingZone("B0".into())
        );
        let text = &TWO_FRAMES[..TWO_FRAMES.len() - 4];
        assert_eq!(
            read_frames(text, &layout).unwrap_err().kind,
            FrameErrorKind::UnexpectedEof
        );
    }

    #[test]
    fn raw_codes_are_mapped() {
        let layout = parse_layout(&format!("{TWO_ROADS}[codes] 7=m\n")).unwrap();
        let text = TWO_FRAMES.replacen("ssmm....", "ss77....", 1);
        let frames = read_frames(&text, &layout).unwrap();
        assert_eq!(frames[0].cells[1][2], CellState::MovingPresence);
        // Written back with canonical codes.
        assert_eq!(write_frames(&frames, &layout), TWO_FRAMES);
    }
}
