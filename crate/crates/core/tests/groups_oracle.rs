//! Group extraction checked against an independent union-find labelling
//! built from explicit coordinates.

use exposure_core::{detect_groups, CellState, GroupClass, Thresholds, ZoneIdx, ZoneKind};
use proptest::prelude::*;

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Components as sorted cell lists, sorted by first cell, thresholded.
fn oracle(kind: ZoneKind, cells: &[CellState], thresholds: Thresholds) -> Vec<(GroupClass, Vec<usize>)> {
    let n = cells.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let join = |a: usize, b: usize, parent: &mut Vec<usize>| {
        if cells[a] == cells[b] {
            let (ra, rb) = (find(parent, a), find(parent, b));
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    match kind {
        ZoneKind::Lane { len } => {
            for i in 1..len {
                join(i - 1, i, &mut parent);
            }
        }
        ZoneKind::Conflict { width, height } => {
            for r in 0..height {
                for c in 0..width {
                    if c + 1 < width {
                        join(r * width + c, r * width + c + 1, &mut parent);
                    }
                    if r + 1 < height {
                        join(r * width + c, (r + 1) * width + c, &mut parent);
                    }
                }
            }
        }
    }
    let mut components: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let root = find(&mut parent, i);
        components[root].push(i);
    }
    components
        .into_iter()
        .filter(|c| !c.is_empty())
        .filter_map(|c| {
            let class = GroupClass::of(cells[c[0]])?;
            (c.len() >= class.threshold(thresholds)).then_some((class, c))
        })
        .collect()
}

fn state() -> impl Strategy<Value = CellState> {
    prop_oneof![
        Just(CellState::Empty),
        Just(CellState::MovingPresence),
        Just(CellState::StationaryPresence),
        Just(CellState::EndOfPresence),
    ]
}

fn zone() -> impl Strategy<Value = (ZoneKind, Vec<CellState>)> {
    let kind = prop_oneof![
        (1usize..=8, 1usize..=8).prop_map(|(width, height)| ZoneKind::Conflict { width, height }),
        (1usize..=20).prop_map(|len| ZoneKind::Lane { len }),
    ];
    kind.prop_flat_map(|kind| (Just(kind), prop::collection::vec(state(), kind.cell_count())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn matches_union_find((kind, cells) in zone(), moving in 1usize..=3, stationary in 1usize..=3) {
        let thresholds = Thresholds { moving, stationary };
        let got: Vec<(GroupClass, Vec<usize>)> = detect_groups(ZoneIdx(0), kind, &cells, thresholds)
            .into_iter()
            .map(|g| (g.class, g.cells))
            .collect();
        prop_assert_eq!(got, oracle(kind, &cells, thresholds));
    }

    #[test]
    fn groups_are_disjoint_and_single_state((kind, cells) in zone()) {
        let mut seen = vec![false; cells.len()];
        for g in detect_groups(ZoneIdx(0), kind, &cells, Thresholds::default()) {
            let first = cells[g.cells[0]];
            for &c in &g.cells {
                prop_assert!(!seen[c]);
                seen[c] = true;
                prop_assert_eq!(cells[c], first);
            }
        }
    }
}
