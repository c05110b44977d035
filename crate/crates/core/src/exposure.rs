//! Origin labels for conflict-zone groups and accumulation of the exposure
//! durations.
//!
//! For a stream `S` and its cross-traffic approach `C`, every second during
//! which at least one moving group originating from `S` is inside a
//! conflict zone adds one second to:
//!
//! * `Z(S)`, always;
//! * `Y(S)` if `C` holds at least one group, `X(S)` otherwise;
//! * `Y_m(S)` as well, if one of the close groups of `C` is moving.
//!
//! so `Z = X + Y` and `Y_m <= Y` hold by construction.

use alloc::vec::Vec;

use thiserror::Error;

use crate::grid::{ApproachIdx, Layout, ZoneIdx};
use crate::groups::Group;

/// A conflict-zone group with the approach it came from, when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGroup {
    pub group: Group,
    pub origin: Option<ApproachIdx>,
    /// Second the origin was first assigned.
    pub assigned_t: Option<u64>,
}

/// Data problems surfaced while processing a second. They never abort
/// processing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// A moving conflict-zone group for which no origin could be derived;
    /// it is left out of exposure counting.
    UnlabeledGroup {
        t: u64,
        zone: ZoneIdx,
        nearest_cell: usize,
        size: usize,
    },
    /// A group overlapped previous groups of several origins equally.
    OverlapTie {
        t: u64,
        zone: ZoneIdx,
        chosen: ApproachIdx,
    },
}

/// Carries origins from the previous second's conflict-zone groups onto
/// the current ones.
///
/// A current group inherits the origin with which it shares the most cells
/// (summed over previous groups of that origin); ties go to the smallest
/// approach id. Moving groups that inherit nothing take `new_origin`, the
/// origin attributed to this second's stop-line crossings, if any.
pub fn propagate_origins(
    t: u64,
    previous: &[LabeledGroup],
    current: Vec<Group>,
    new_origin: Option<ApproachIdx>,
    layout: &Layout,
    diagnostics: &mut Vec<Diagnostic>,
) -> Vec<LabeledGroup> {
    let mut overlaps: Vec<(ApproachIdx, usize)> = Vec::new();
    current
        .into_iter()
        .map(|group| {
            overlaps.clear();
            for prev in previous {
                let Some(origin) = prev.origin else { continue };
                let shared = group.overlap(&prev.group);
                if shared == 0 {
                    continue;
                }
                match overlaps.iter_mut().find(|(o, _)| *o == origin) {
                    Some((_, n)) => *n += shared,
                    None => overlaps.push((origin, shared)),
                }
            }
            let best = overlaps.iter().map(|(_, n)| *n).max();
            if let Some(best) = best {
                let mut tied = overlaps.iter().filter(|(_, n)| *n == best).map(|(o, _)| *o);
                let first = tied.next().expect("at least one origin reaches the maximum");
                let mut origin = first;
                let mut is_tie = false;
                for other in tied {
                    is_tie = true;
                    if layout.approach(other).id < layout.approach(origin).id {
                        origin = other;
                    }
                }
                if is_tie {
                    diagnostics.push(Diagnostic::OverlapTie {
                        t,
                        zone: group.zone,
                        chosen: origin,
                    });
                }
                let assigned_t = previous
                    .iter()
                    .filter(|p| p.origin == Some(origin) && group.overlap(&p.group) > 0)
                    .filter_map(|p| p.assigned_t)
                    .min();
                return LabeledGroup {
                    group,
                    origin: Some(origin),
                    assigned_t,
                };
            }
            if group.is_moving() {
                if let Some(origin) = new_origin {
                    return LabeledGroup {
                        group,
                        origin: Some(origin),
                        assigned_t: Some(t),
                    };
                }
                diagnostics.push(Diagnostic::UnlabeledGroup {
                    t,
                    zone: group.zone,
                    nearest_cell: group.nearest_cell(),
                    size: group.size(),
                });
            }
            LabeledGroup {
                group,
                origin: None,
                assigned_t: None,
            }
        })
        .collect()
}

/// For each lane of an approach, the group nearest the conflict zone.
/// `groups` is indexed by zone.
pub fn close_groups<'a>(lanes: &[ZoneIdx], groups: &'a [Vec<Group>]) -> Vec<Option<&'a Group>> {
    lanes
        .iter()
        .map(|lane| groups[lane.0].iter().min_by_key(|g| g.nearest_cell()))
        .collect()
}

/// Per-second exposure status of one stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecondFlags {
    pub t: u64,
    pub stream: ApproachIdx,
    pub crossing: bool,
    pub critical: bool,
    pub critical_moving: bool,
}

/// Exposure durations of one stream, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StreamCounters {
    pub z: u64,
    pub x: u64,
    pub y: u64,
    pub y_m: u64,
}

impl StreamCounters {
    pub fn check(&self, stream: ApproachIdx, period: u64) -> Result<(), InvariantViolation> {
        if self.z != self.x + self.y {
            return Err(InvariantViolation::Decomposition {
                stream,
                counters: *self,
            });
        }
        if self.y_m > self.y {
            return Err(InvariantViolation::MovingAboveCritical {
                stream,
                counters: *self,
            });
        }
        if self.z > period {
            return Err(InvariantViolation::ExceedsPeriod {
                stream,
                counters: *self,
                period,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("stream {stream}: Z != X + Y ({counters:?})")]
    Decomposition {
        stream: ApproachIdx,
        counters: StreamCounters,
    },
    #[error("stream {stream}: Y_m > Y ({counters:?})")]
    MovingAboveCritical {
        stream: ApproachIdx,
        counters: StreamCounters,
    },
    #[error("stream {stream}: counters exceed the period of {period} s ({counters:?})")]
    ExceedsPeriod {
        stream: ApproachIdx,
        counters: StreamCounters,
        period: u64,
    },
    #[error("flags for t={t} fall outside the period [{start}, {end})")]
    OutsidePeriod { t: u64, start: u64, end: u64 },
}

/// One line of the period report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodRow {
    pub stream: ApproachIdx,
    pub period_start: u64,
    pub period_end: u64,
    pub counters: StreamCounters,
}

/// Exposure counters of every stream over the half-open period
/// `[period_start, period_start + period)`. Periods are aligned on
/// multiples of the period length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExposureCounters {
    period: u64,
    period_start: u64,
    pub streams: Vec<StreamCounters>,
}

impl ExposureCounters {
    /// Counters for the period containing second `t`.
    pub fn new(streams: usize, period: u64, t: u64) -> ExposureCounters {
        assert!(period > 0, "period must be positive");
        ExposureCounters {
            period,
            period_start: t - t % period,
            streams: alloc::vec![StreamCounters::default(); streams],
        }
    }

    pub fn period_start(&self) -> u64 {
        self.period_start
    }

    pub fn period_end(&self) -> u64 {
        self.period_start + self.period
    }

    pub fn contains(&self, t: u64) -> bool {
        (self.period_start..self.period_end()).contains(&t)
    }

    pub fn record(&mut self, flags: &SecondFlags) -> Result<(), InvariantViolation> {
        if !self.contains(flags.t) {
            return Err(InvariantViolation::OutsidePeriod {
                t: flags.t,
                start: self.period_start,
                end: self.period_end(),
            });
        }
        let c = &mut self.streams[flags.stream.0];
        if flags.crossing {
            c.z += 1;
            if flags.critical {
                c.y += 1;
                if flags.critical_moving {
                    c.y_m += 1;
                }
            } else {
                c.x += 1;
            }
        }
        Ok(())
    }

    pub fn check(&self) -> Result<(), InvariantViolation> {
        self.streams
            .iter()
            .enumerate()
            .try_for_each(|(s, c)| c.check(ApproachIdx(s), self.period))
    }

    /// Closes the current period: returns one row per stream, resets the
    /// counters and moves on to the next period.
    pub fn finalize(&mut self) -> Result<Vec<PeriodRow>, InvariantViolation> {
        self.check()?;
        let rows = self
            .streams
            .iter_mut()
            .enumerate()
            .map(|(s, c)| PeriodRow {
                stream: ApproachIdx(s),
                period_start: self.period_start,
                period_end: self.period_start + self.period,
                counters: core::mem::take(c),
            })
            .collect();
        self.period_start += self.period;
        Ok(rows)
    }
}

/// Derives this second's flags for every stream and adds them to
/// `counters`.
///
/// `conflict` holds the labeled groups of every conflict zone; `groups`
/// holds the thresholded groups of every zone, indexed by zone.
pub fn update_exposure(
    counters: &mut ExposureCounters,
    t: u64,
    layout: &Layout,
    conflict: &[LabeledGroup],
    groups: &[Vec<Group>],
) -> Result<Vec<SecondFlags>, InvariantViolation> {
    let mut out = Vec::with_capacity(layout.approaches().len());
    for s in 0..layout.approaches().len() {
        let stream = ApproachIdx(s);
        let crossing = conflict
            .iter()
            .any(|g| g.group.is_moving() && g.origin == Some(stream));
        let (critical, critical_moving) = match layout.cross_traffic(stream) {
            Some(cross) if crossing => {
                let lanes = &layout.approach(cross).lanes;
                let occupied = lanes.iter().any(|lane| !groups[lane.0].is_empty());
                let moving = occupied
                    && close_groups(lanes, groups)
                        .into_iter()
                        .flatten()
                        .any(Group::is_moving);
                (occupied, moving)
            }
            _ => (false, false),
        };
        let flags = SecondFlags {
            t,
            stream,
            crossing,
            critical,
            critical_moving,
        };
        counters.record(&flags)?;
        out.push(flags);
    }
    Ok(out)
}
