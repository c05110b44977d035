//! Second-by-second driver tying grouping, crossing detection, origin
//! labeling and exposure accumulation together.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::crossing::{
    attribute_origin, detect_crossing, qualify_downstream, qualify_upstream, CrossingEvent, CrossingState,
    TieBreak,
};
use crate::exposure::{
    propagate_origins, update_exposure, Diagnostic, ExposureCounters, InvariantViolation, LabeledGroup,
    PeriodRow, SecondFlags,
};
use crate::grid::{check_sequence, ApproachIdx, Frame, FrameError, Layout, StopLineIdx, ZoneIdx};
use crate::groups::{detect_groups, Group};
use crate::stats::zone_stats;

/// A stop-line crossing together with the origin attributed to its
/// conflict zone for that second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventRecord {
    pub event: CrossingEvent,
    pub origin: ApproachIdx,
    pub tiebreak: TieBreak,
}

/// Everything derived from one frame.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepOutput {
    pub t: u64,
    pub events: Vec<EventRecord>,
    /// One entry per approach, in layout order.
    pub flags: Vec<SecondFlags>,
    pub diagnostics: Vec<Diagnostic>,
    /// Rows of any period closed by this frame.
    pub periods: Vec<PeriodRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("internal invariant violated: {0}")]
    Invariant(#[from] InvariantViolation),
}

/// Stateful exposure detector for one intersection. Frames must be fed in
/// order, one per second, without gaps.
#[derive(Debug, Clone)]
pub struct Detector<'a> {
    layout: &'a Layout,
    crossing: CrossingState,
    /// Labeled groups of the previous second, per conflict zone.
    labeled: Vec<Vec<LabeledGroup>>,
    counters: Option<ExposureCounters>,
    last_t: Option<u64>,
}

impl<'a> Detector<'a> {
    pub fn new(layout: &'a Layout) -> Detector<'a> {
        Detector {
            layout,
            crossing: CrossingState::new(layout),
            labeled: vec![Vec::new(); layout.zones().len()],
            counters: None,
            last_t: None,
        }
    }

    pub fn layout(&self) -> &'a Layout {
        self.layout
    }

    pub fn crossing_state(&self) -> &CrossingState {
        &self.crossing
    }

    pub fn counters(&self) -> Option<&ExposureCounters> {
        self.counters.as_ref()
    }

    /// Labeled groups of the last processed second in `zone`.
    pub fn labeled_groups(&self, zone: ZoneIdx) -> &[LabeledGroup] {
        &self.labeled[zone.0]
    }

    pub fn step(&mut self, frame: &Frame) -> Result<StepOutput, DetectError> {
        let layout = self.layout;
        frame.validate(layout)?;
        check_sequence(self.last_t, frame.t)?;
        let t = frame.t;
        let mut out = StepOutput {
            t,
            ..StepOutput::default()
        };

        let counters = self
            .counters
            .get_or_insert_with(|| ExposureCounters::new(layout.approaches().len(), layout.period(), t));
        while !counters.contains(t) {
            out.periods.extend(counters.finalize()?);
        }

        let thresholds = layout.thresholds();
        let groups: Vec<Vec<Group>> = layout
            .zones()
            .iter()
            .enumerate()
            .map(|(z, zone)| detect_groups(ZoneIdx(z), zone.kind, frame.zone_cells(ZoneIdx(z)), thresholds))
            .collect();

        self.crossing.observe_signals(t, &frame.signals);
        let mut events: Vec<CrossingEvent> = Vec::new();
        for (i, line) in layout.stop_lines().iter().enumerate() {
            let up_stats = zone_stats(frame, &line.upstream);
            let down_stats = zone_stats(frame, &line.downstream);
            let upstream = qualify_upstream(&up_stats);
            let downstream = qualify_downstream(&down_stats);
            let state = &mut self.crossing.lines[i];
            state.update(upstream, downstream);
            if detect_crossing(state, upstream, &up_stats, &down_stats, layout.ratio_subset()) {
                events.push(CrossingEvent {
                    t,
                    stop_line: StopLineIdx(i),
                    approach: line.approach,
                });
            }
        }

        let mut conflict_groups: Vec<LabeledGroup> = Vec::new();
        for zone in layout.conflict_zones() {
            let zone_events: Vec<CrossingEvent> = events
                .iter()
                .copied()
                .filter(|e| layout.stop_line(e.stop_line).conflict_zone == zone)
                .collect();
            let attribution =
                attribute_origin(&zone_events, &frame.signals, &self.crossing.last_green, layout);
            if let Some(attribution) = attribution {
                out.events.extend(zone_events.iter().map(|event| EventRecord {
                    event: *event,
                    origin: attribution.origin,
                    tiebreak: attribution.tiebreak,
                }));
            }
            let labeled = propagate_origins(
                t,
                &self.labeled[zone.0],
                groups[zone.0].clone(),
                attribution.map(|a| a.origin),
                layout,
                &mut out.diagnostics,
            );
            conflict_groups.extend(labeled.iter().cloned());
            self.labeled[zone.0] = labeled;
        }
        out.events.sort_by_key(|e| e.event.stop_line);

        out.flags = update_exposure(counters, t, layout, &conflict_groups, &groups)?;
        counters.check()?;
        self.last_t = Some(t);
        Ok(out)
    }

    /// Closes the period in progress and returns its rows. Empty if no frame
    /// was processed.
    pub fn finish(mut self) -> Result<Vec<PeriodRow>, DetectError> {
        match self.counters.as_mut() {
            Some(counters) => Ok(counters.finalize()?),
            None => Ok(Vec::new()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exposure::StreamCounters;
    use crate::grid::tests::two_road_spec;
    use crate::grid::{CellState, Signal};

    fn set(frame: &mut Frame, zone: usize, codes: &str) {
        frame.cells[zone] = codes
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| CellState::from_code(c).unwrap())
            .collect();
    }

    #[test]
    fn vehicle_from_a_crossing_an_empty_intersection() {
        let layout = Layout::build(two_road_spec()).unwrap();
        let mut detector = Detector::new(&layout);
        let a = ApproachIdx(0);

        // t=0: vehicle on A0 cells 0-1, moving.
        let mut f0 = Frame::empty(&layout, 0);
        f0.signals = vec![Signal::Green, Signal::Red];
        set(&mut f0, 1, "mm......");
        let out = detector.step(&f0).unwrap();
        assert!(out.events.is_empty());

        // t=1: vehicle jumped into CZ rows 0-1, cols 1-2.
        let mut f1 = f0.clone();
        f1.t = 1;
        set(&mut f1, 0, ".mm. .mm. .... ....");
        set(&mut f1, 1, "ee......");
        let out = detector.step(&f1).unwrap();
        assert_eq!(out.events.len(), 1);
        assert_eq!(out.events[0].origin, a);
        assert_eq!(out.events[0].tiebreak, TieBreak::None);
        assert!(out.flags[0].crossing && !out.flags[0].critical);

        // t=2: moved one row down.
        let mut f2 = f0.clone();
        f2.t = 2;
        set(&mut f2, 0, ".ee. .mm. .mm. ....");
        set(&mut f2, 1, "........");
        let out = detector.step(&f2).unwrap();
        assert!(out.events.is_empty());
        assert!(out.diagnostics.is_empty());
        assert!(out.flags[0].crossing);

        let rows = detector.finish().unwrap();
        assert_eq!(
            rows[0].counters,
            StreamCounters {
                z: 2,
                x: 2,
                y: 0,
                y_m: 0
            }
        );
        assert_eq!(rows[1].counters, StreamCounters::default());
    }

    #[test]
    fn rejects_gaps() {
        let layout = Layout::build(two_road_spec()).unwrap();
        let mut detector = Detector::new(&layout);
        detector.step(&Frame::empty(&layout, 5)).unwrap();
        assert!(matches!(
            detector.step(&Frame::empty(&layout, 7)),
            Err(DetectError::Frame(FrameError::Gap { previous: 5, t: 7 }))
        ));
    }

    #[test]
    fn closes_periods_on_boundaries() {
        let mut spec = two_road_spec();
        spec.period = 10;
        let layout = Layout::build(spec).unwrap();
        let mut detector = Detector::new(&layout);
        let mut closed = Vec::new();
        for t in 8..23 {
            closed.extend(detector.step(&Frame::empty(&layout, t)).unwrap().periods);
        }
        let bounds: Vec<(u64, u64)> = closed.iter().map(|r| (r.period_start, r.period_end)).collect();
        assert_eq!(bounds, [(0, 10), (0, 10), (10, 20), (10, 20)]);
        let last = detector.finish().unwrap();
        assert_eq!((last[0].period_start, last[0].period_end), (20, 30));
    }
}
