//! Occupancy counts and ratios over a subset of grid units.

use crate::grid::{CellRef, CellState, Frame};

/// State counts over a cell subset.
///
/// Ratios are exposed as `f64` for reporting, but the qualification rules
/// compare counts with integer arithmetic ([`ZoneStats::presence_below`])
/// so that boundaries such as exactly 10 % are decided exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ZoneStats {
    pub total: usize,
    pub n_moving_presence: usize,
    pub n_stationary_presence: usize,
    pub n_end_of_presence: usize,
}

impl ZoneStats {
    pub fn from_counts(
        total: usize,
        n_moving_presence: usize,
        n_stationary_presence: usize,
        n_end_of_presence: usize,
    ) -> ZoneStats {
        debug_assert!(n_moving_presence + n_stationary_presence + n_end_of_presence <= total);
        ZoneStats {
            total,
            n_moving_presence,
            n_stationary_presence,
            n_end_of_presence,
        }
    }

    pub fn from_states<I>(states: I) -> ZoneStats
    where
        I: IntoIterator<Item = CellState>,
    {
        let mut stats = ZoneStats::default();
        for state in states {
            stats.add(state);
        }
        stats
    }

    #[inline]
    pub fn add(&mut self, state: CellState) {
        self.total += 1;
        match state {
            CellState::Empty => {}
            CellState::MovingPresence => self.n_moving_presence += 1,
            CellState::StationaryPresence => self.n_stationary_presence += 1,
            CellState::EndOfPresence => self.n_end_of_presence += 1,
        }
    }

    pub fn n_presence(&self) -> usize {
        self.n_moving_presence + self.n_stationary_presence + self.n_end_of_presence
    }

    pub fn n_movement(&self) -> usize {
        self.n_moving_presence + self.n_end_of_presence
    }

    pub fn tau_presence(&self) -> f64 {
        ratio(self.n_presence(), self.total)
    }

    pub fn tau_movement(&self) -> f64 {
        ratio(self.n_movement(), self.total)
    }

    /// `tau_presence < num / den`, decided on integers.
    pub fn presence_below(&self, num: usize, den: usize) -> bool {
        self.n_presence() * den < num * self.total
    }

    /// `tau_movement < num / den`, decided on integers.
    pub fn movement_below(&self, num: usize, den: usize) -> bool {
        self.n_movement() * den < num * self.total
    }
}

fn ratio(n: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        n as f64 / total as f64
    }
}

/// Counts the states of `subset` in `frame`.
pub fn zone_stats(frame: &Frame, subset: &[CellRef]) -> ZoneStats {
    ZoneStats::from_states(subset.iter().map(|c| frame.cell(*c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::tests::two_road_spec;
    use crate::grid::{Layout, ZoneIdx};
    use proptest::prelude::*;
    use CellState::*;

    fn counts(states: &[CellState]) -> ZoneStats {
        ZoneStats::from_states(states.iter().copied())
    }

    #[test]
    fn all_empty() {
        let s = counts(&[Empty; 10]);
        assert_eq!(s.n_presence(), 0);
        assert_eq!(s.tau_presence(), 0.0);
    }

    #[test]
    fn one_stationary_in_ten() {
        let mut states = [Empty; 10];
        states[4] = StationaryPresence;
        let s = counts(&states);
        assert_eq!(s.tau_presence(), 0.1);
        assert_eq!(s.tau_movement(), 0.0);
        assert_eq!(s.n_moving_presence, 0);
        // Exactly 10 % is not below 10 %.
        assert!(!s.presence_below(1, 10));
    }

    #[test]
    fn mixed_movement() {
        let s = counts(&[
            MovingPresence,
            MovingPresence,
            MovingPresence,
            EndOfPresence,
            EndOfPresence,
            Empty,
            Empty,
            Empty,
            Empty,
            Empty,
        ]);
        assert_eq!(s.n_movement(), 5);
        assert_eq!(s.tau_movement(), 0.5);
        assert_eq!(s.n_presence(), 5);
    }

    #[test]
    fn counts_frame_subset() {
        let layout = Layout::build(two_road_spec()).unwrap();
        let mut frame = crate::grid::Frame::empty(&layout, 0);
        frame.cells[1][0] = EndOfPresence;
        frame.cells[1][1] = MovingPresence;
        frame.cells[1][5] = StationaryPresence;
        let s = zone_stats(&frame, &layout.stop_lines()[0].upstream);
        assert_eq!(s, ZoneStats::from_counts(3, 1, 0, 1));
        assert_eq!(layout.stop_lines()[0].upstream[0].zone, ZoneIdx(1));
    }

    fn state() -> impl Strategy<Value = CellState> {
        prop::sample::select(CellState::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn identities_hold(states in prop::collection::vec(state(), 1..64)) {
            let s = counts(&states);
            prop_assert_eq!(s.n_movement(), s.n_moving_presence + s.n_end_of_presence);
            prop_assert!(s.n_presence() >= s.n_movement());
            prop_assert!(0.0 <= s.tau_movement());
            prop_assert!(s.tau_movement() <= s.tau_presence());
            prop_assert!(s.tau_presence() <= 1.0);
            let by_hand = states.iter().filter(|c| c.is_presence()).count();
            prop_assert_eq!(s.n_presence(), by_hand);
        }
    }
}
