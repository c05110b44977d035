//! Groups of road users: connected components of same-state cells.
//!
//! Components are built independently per zone and per state. Moving
//! presence cells form moving groups, stationary presence cells form
//! stationary groups. End-of-presence and empty cells never form groups.
//! Components smaller than the class threshold are discarded as noise.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{CellState, Thresholds, ZoneIdx, ZoneKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupClass {
    Moving,
    Stationary,
}

impl GroupClass {
    pub fn of(state: CellState) -> Option<GroupClass> {
        match state {
            CellState::MovingPresence => Some(GroupClass::Moving),
            CellState::StationaryPresence => Some(GroupClass::Stationary),
            CellState::Empty | CellState::EndOfPresence => None,
        }
    }

    pub fn threshold(self, thresholds: Thresholds) -> usize {
        match self {
            GroupClass::Moving => thresholds.moving,
            GroupClass::Stationary => thresholds.stationary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub zone: ZoneIdx,
    pub class: GroupClass,
    /// Flat cell indices, ascending.
    pub cells: Vec<usize>,
}

impl Group {
    pub fn size(&self) -> usize {
        self.cells.len()
    }

    pub fn is_moving(&self) -> bool {
        self.class == GroupClass::Moving
    }

    /// Smallest cell index. On a lane this is the cell nearest the
    /// conflict zone.
    pub fn nearest_cell(&self) -> usize {
        self.cells[0]
    }

    /// Number of cells shared with `other`.
    pub fn overlap(&self, other: &Group) -> usize {
        if self.zone != other.zone {
            return 0;
        }
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.cells.len() && j < other.cells.len() {
            match self.cells[i].cmp(&other.cells[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// Extracts the thresholded groups of one zone. Groups are returned in
/// order of their smallest cell index.
pub fn detect_groups(
    zone: ZoneIdx,
    kind: ZoneKind,
    cells: &[CellState],
    thresholds: Thresholds,
) -> Vec<Group> {
    debug_assert_eq!(cells.len(), kind.cell_count());
    let mut visited = vec![false; cells.len()];
    let mut stack = Vec::new();
    let mut groups = Vec::new();

    for seed in 0..cells.len() {
        if visited[seed] {
            continue;
        }
        let state = cells[seed];
        let Some(class) = GroupClass::of(state) else {
            continue;
        };
        visited[seed] = true;
        stack.push(seed);
        let mut members = Vec::new();
        while let Some(cell) = stack.pop() {
            members.push(cell);
            kind.for_each_neighbour(cell, |n| {
                if !visited[n] && cells[n] == state {
                    visited[n] = true;
                    stack.push(n);
                }
            });
        }
        if members.len() >= class.threshold(thresholds) {
            members.sort_unstable();
            groups.push(Group {
                zone,
                class,
                cells: members,
            });
        }
    }
    groups
}
