//! Detection of exposure to lateral collision at signalized intersections.
//!
//! The engine consumes one occupancy-grid [`Frame`] per second. Each frame
//! carries, for every functional zone of the intersection, the aggregated
//! state of every grid unit over that second, plus the signal aspect shown
//! to every approach. From these frames the [`Detector`] derives:
//!
//! * groups of road users (thresholded connected components, [`groups`]),
//! * stop-line crossings and the origin of traffic entering the conflict
//!   zone ([`crossing`]),
//! * the exposure durations `Z`, `X`, `Y` and `Y_m` per stream ([`exposure`]).
//!
//! Detector output can be scored against annotated ground truth with
//! [`evaluation`].
//!
//! The crate is `no_std` and only needs `alloc`. Text formats, file IO and
//! the command line live in the companion `exposure` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod crossing;
pub mod evaluation;
pub mod exposure;
pub mod grid;
pub mod groups;
pub mod pipeline;
pub mod stats;

pub use crossing::{
    attribute_origin, detect_crossing, qualify_downstream, qualify_upstream, Attribution, CrossingEvent,
    CrossingState, StopLineState, TieBreak, ZoneMovementState,
};
pub use evaluation::{
    precision_recall, score, AnnotationRecord, ConfusionCounts, EvaluationError, FlagRecord, PrecisionRecall,
    Target,
};
pub use exposure::{
    close_groups, propagate_origins, update_exposure, Diagnostic, ExposureCounters, InvariantViolation,
    LabeledGroup, PeriodRow, SecondFlags, StreamCounters,
};
pub use grid::{
    ApproachDecl, ApproachIdx, CellRef, CellSelector, CellState, Frame, FrameError, Layout, LayoutError,
    LayoutSpec, RatioSubset, Signal, StopLineDecl, StopLineIdx, Thresholds, Zone, ZoneDecl, ZoneIdx,
    ZoneKind,
};
pub use groups::{detect_groups, Group, GroupClass};
pub use pipeline::{DetectError, Detector, EventRecord, StepOutput};
pub use stats::{zone_stats, ZoneStats};
