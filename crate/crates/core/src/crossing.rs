//! Stop-line crossing detection.
//!
//! Each stop line delimits an upstream subset (storage zone) and a
//! downstream subset (conflict zone). Every second both subsets are
//! qualified into a [`ZoneMovementState`], the crossing conditions are
//! advanced, and a [`CrossingEvent`] is raised when traffic passes from the
//! upstream to the downstream subset. When several approaches cross into
//! the same conflict zone during one second, [`attribute_origin`] decides a
//! single origin from the signal aspects.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{ApproachIdx, Layout, RatioSubset, Signal, StopLineIdx};
use crate::stats::ZoneStats;

/// Presence ratio below which a subset may qualify as empty, and movement
/// ratio below which it may qualify as stationary: 10 %.
const RATIO_NUM: usize = 1;
const RATIO_DEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZoneMovementState {
    Empty,
    Stationary,
    PastMovement,
    FutureMovement,
    Movement,
}

impl ZoneMovementState {
    pub fn is_movement(self) -> bool {
        self == ZoneMovementState::Movement
    }
}

/// Qualifies the downstream subset of a stop line.
pub fn qualify_downstream(stats: &ZoneStats) -> ZoneMovementState {
    let sparse = stats.presence_below(RATIO_NUM, RATIO_DEN);
    let still = stats.movement_below(RATIO_NUM, RATIO_DEN);
    if sparse && stats.n_moving_presence == 0 {
        ZoneMovementState::Empty
    } else if !sparse && still && stats.n_moving_presence == 0 {
        ZoneMovementState::Stationary
    } else if stats.n_movement() == stats.n_end_of_presence {
        ZoneMovementState::PastMovement
    } else {
        ZoneMovementState::Movement
    }
}

/// Qualifies the upstream subset of a stop line.
pub fn qualify_upstream(stats: &ZoneStats) -> ZoneMovementState {
    let sparse = stats.presence_below(RATIO_NUM, RATIO_DEN);
    let still = stats.movement_below(RATIO_NUM, RATIO_DEN);
    if sparse && stats.n_end_of_presence == 0 {
        ZoneMovementState::Empty
    } else if !sparse && still && stats.n_end_of_presence == 0 {
        ZoneMovementState::Stationary
    } else if stats.n_movement() == stats.n_moving_presence {
        ZoneMovementState::FutureMovement
    } else {
        ZoneMovementState::Movement
    }
}

/// Crossing conditions of one stop line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopLineState {
    pub upstream_met: bool,
    pub downstream_met: bool,
    /// Upstream qualification of the previous second.
    pub previous_upstream: ZoneMovementState,
}

impl Default for StopLineState {
    fn default() -> Self {
        StopLineState {
            upstream_met: false,
            downstream_met: false,
            previous_upstream: ZoneMovementState::Empty,
        }
    }
}

impl StopLineState {
    /// Advances the conditions by one second.
    ///
    /// The upstream condition latches on `Movement` and is released only
    /// on a `Movement -> not Movement` transition. The downstream
    /// condition has no memory.
    pub fn update(&mut self, upstream: ZoneMovementState, downstream: ZoneMovementState) {
        if upstream.is_movement() {
            self.upstream_met = true;
        } else if self.previous_upstream.is_movement() {
            self.upstream_met = false;
        }
        self.downstream_met = downstream.is_movement() && self.upstream_met;
        self.previous_upstream = upstream;
    }
}

/// Crossing state of a whole intersection: the conditions of every stop
/// line and the last second each approach was shown green.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingState {
    pub lines: Vec<StopLineState>,
    pub last_green: Vec<Option<u64>>,
}

impl CrossingState {
    pub fn new(layout: &Layout) -> CrossingState {
        CrossingState {
            lines: vec![StopLineState::default(); layout.stop_lines().len()],
            last_green: vec![None; layout.approaches().len()],
        }
    }

    pub fn observe_signals(&mut self, t: u64, signals: &[Signal]) {
        for (last, signal) in self.last_green.iter_mut().zip(signals) {
            if *signal == Signal::Green {
                *last = Some(t);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingEvent {
    pub t: u64,
    pub stop_line: StopLineIdx,
    pub approach: ApproachIdx,
}

fn enough_movement(stats: &ZoneStats) -> bool {
    2 * stats.n_movement() >= stats.n_presence()
}

/// Decides whether a crossing happened at the current second. `line` must
/// already be updated for this second.
pub fn detect_crossing(
    line: &StopLineState,
    upstream: ZoneMovementState,
    upstream_stats: &ZoneStats,
    downstream_stats: &ZoneStats,
    subset: RatioSubset,
) -> bool {
    if !(line.upstream_met && line.downstream_met) || !upstream.is_movement() {
        return false;
    }
    match subset {
        RatioSubset::Upstream => enough_movement(upstream_stats),
        RatioSubset::Downstream => enough_movement(downstream_stats),
        RatioSubset::Both => enough_movement(upstream_stats) && enough_movement(downstream_stats),
    }
}

/// How the origin of a second's crossings was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TieBreak {
    /// Crossings from a single approach.
    None,
    /// Exactly one of the crossing approaches was not shown red.
    Signal,
    /// The crossing approach most recently shown green.
    RecentGreen,
    /// Nothing else separated the candidates; smallest approach id wins.
    Lexicographic,
}

impl TieBreak {
    pub fn as_str(self) -> &'static str {
        match self {
            TieBreak::None => "none",
            TieBreak::Signal => "signal",
            TieBreak::RecentGreen => "recent_green",
            TieBreak::Lexicographic => "lexicographic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Attribution {
    pub origin: ApproachIdx,
    pub tiebreak: TieBreak,
}

/// Picks the single origin of the road users newly detected in a conflict
/// zone from the crossings detected into it during this second.
///
/// Approaches not shown red win. Among several candidates (all red, or
/// several not red) the one most recently shown green wins, an approach
/// never seen green losing to any other. Remaining ties go to the
/// lexicographically smallest approach id.
pub fn attribute_origin(
    events: &[CrossingEvent],
    signals: &[Signal],
    last_green: &[Option<u64>],
    layout: &Layout,
) -> Option<Attribution> {
    let mut approaches: Vec<ApproachIdx> = events.iter().map(|e| e.approach).collect();
    approaches.sort_unstable();
    approaches.dedup();
    match approaches.as_slice() {
        [] => return None,
        [only] => {
            return Some(Attribution {
                origin: *only,
                tiebreak: TieBreak::None,
            })
        }
        _ => {}
    }

    let not_red: Vec<ApproachIdx> = approaches
        .iter()
        .copied()
        .filter(|a| !signals[a.0].is_red())
        .collect();
    if let [only] = not_red.as_slice() {
        return Some(Attribution {
            origin: *only,
            tiebreak: TieBreak::Signal,
        });
    }
    let candidates = if not_red.is_empty() { approaches } else { not_red };

    let latest = candidates.iter().map(|a| last_green[a.0]).max().flatten();
    let recent: Vec<ApproachIdx> = candidates
        .iter()
        .copied()
        .filter(|a| latest.is_some() && last_green[a.0] == latest)
        .collect();
    if let [only] = recent.as_slice() {
        return Some(Attribution {
            origin: *only,
            tiebreak: TieBreak::RecentGreen,
        });
    }
    let pool = if recent.is_empty() { candidates } else { recent };
    pool.into_iter()
        .min_by(|a, b| layout.approach(*a).id.cmp(&layout.approach(*b).id))
        .map(|origin| Attribution {
            origin,
            tiebreak: TieBreak::Lexicographic,
        })
}
