//! Grid and layout data model: cell states, zones, approaches, stop lines
//! and per-second frames.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Aggregated state of one grid unit over one second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellState {
    Empty,
    MovingPresence,
    StationaryPresence,
    EndOfPresence,
}

impl CellState {
    pub const ALL: [CellState; 4] = [
        CellState::Empty,
        CellState::MovingPresence,
        CellState::StationaryPresence,
        CellState::EndOfPresence,
    ];

    /// Moving presence, stationary presence or end of presence.
    pub fn is_presence(self) -> bool {
        !matches!(self, CellState::Empty)
    }

    /// Moving presence or end of presence.
    pub fn is_movement(self) -> bool {
        matches!(self, CellState::MovingPresence | CellState::EndOfPresence)
    }

    pub fn code(self) -> char {
        match self {
            CellState::Empty => '.',
            CellState::MovingPresence => 'm',
            CellState::StationaryPresence => 's',
            CellState::EndOfPresence => 'e',
        }
    }

    pub fn from_code(code: char) -> Option<Self> {
        match code {
            '.' => Some(CellState::Empty),
            'm' => Some(CellState::MovingPresence),
            's' => Some(CellState::StationaryPresence),
            'e' => Some(CellState::EndOfPresence),
            _ => None,
        }
    }
}

/// Signal aspect shown to an approach during one second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signal {
    Red,
    Green,
    Amber,
}

impl Signal {
    pub fn code(self) -> char {
        match self {
            Signal::Red => 'R',
            Signal::Green => 'G',
            Signal::Amber => 'A',
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "R" => Some(Signal::Red),
            "G" => Some(Signal::Green),
            "A" => Some(Signal::Amber),
            _ => None,
        }
    }

    pub fn is_red(self) -> bool {
        self == Signal::Red
    }
}

macro_rules! index_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub usize);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

index_newtype!(
    /// Position of a zone in [`Layout::zones`].
    ZoneIdx
);
index_newtype!(
    /// Position of an approach in [`Layout::approaches`]. Approaches are
    /// also the traffic streams exposure is accumulated for.
    ApproachIdx
);
index_newtype!(
    /// Position of a stop line in [`Layout::stop_lines`].
    StopLineIdx
);

/// Geometry of a zone. Lanes are indexed from 0 at the conflict zone
/// outwards; conflict zones are stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZoneKind {
    Conflict { width: usize, height: usize },
    Lane { len: usize },
}

impl ZoneKind {
    pub fn cell_count(self) -> usize {
        match self {
            ZoneKind::Conflict { width, height } => width * height,
            ZoneKind::Lane { len } => len,
        }
    }

    pub fn is_conflict(self) -> bool {
        matches!(self, ZoneKind::Conflict { .. })
    }

    /// Calls `f` for each 4-neighbour (2D) or 2-neighbour (lane) of `cell`.
    #[inline]
    pub fn for_each_neighbour(self, cell: usize, mut f: impl FnMut(usize)) {
        match self {
            ZoneKind::Lane { len } => {
                if cell > 0 {
                    f(cell - 1);
                }
                if cell + 1 < len {
                    f(cell + 1);
                }
            }
            ZoneKind::Conflict { width, height } => {
                let (row, col) = (cell / width, cell % width);
                if row > 0 {
                    f(cell - width);
                }
                if col > 0 {
                    f(cell - 1);
                }
                if col + 1 < width {
                    f(cell + 1);
                }
                if row + 1 < height {
                    f(cell + width);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zone {
    pub id: String,
    pub kind: ZoneKind,
    /// Approach owning this lane, if any.
    pub approach: Option<ApproachIdx>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Approach {
    pub id: String,
    pub signal: String,
    pub lanes: Vec<ZoneIdx>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellRef {
    pub zone: ZoneIdx,
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopLine {
    pub id: String,
    pub approach: ApproachIdx,
    /// Cells in the storage (lane) zone, sorted.
    pub upstream: Vec<CellRef>,
    /// Cells in the conflict zone, sorted.
    pub downstream: Vec<CellRef>,
    pub conflict_zone: ZoneIdx,
}

/// Minimum group sizes below which components are discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    pub moving: usize,
    pub stationary: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            moving: 2,
            stationary: 3,
        }
    }
}

/// Which stop-line subset the `n_movement >= 0.5 * n_presence` test of the
/// crossing rule is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RatioSubset {
    #[default]
    Upstream,
    Downstream,
    Both,
}

impl RatioSubset {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "upstream" => Some(RatioSubset::Upstream),
            "downstream" => Some(RatioSubset::Downstream),
            "both" => Some(RatioSubset::Both),
            _ => None,
        }
    }
}

/// Unresolved reference to a set of cells of one zone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellSelector {
    /// Inclusive lane index range.
    Lane { zone: String, first: usize, last: usize },
    /// Inclusive `(row, col)` rectangle.
    Rect {
        zone: String,
        from: (usize, usize),
        to: (usize, usize),
    },
}

impl CellSelector {
    pub fn zone(&self) -> &str {
        match self {
            CellSelector::Lane { zone, .. } | CellSelector::Rect { zone, .. } => zone,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoneDecl {
    pub id: String,
    pub kind: ZoneKind,
    pub approach: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproachDecl {
    pub id: String,
    pub signal: String,
    pub lanes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopLineDecl {
    pub id: String,
    pub approach: String,
    pub upstream: Vec<CellSelector>,
    pub downstream: Vec<CellSelector>,
}

/// Declarative, unvalidated description of an intersection. Turned into a
/// [`Layout`] by [`Layout::build`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutSpec {
    pub zones: Vec<ZoneDecl>,
    pub approaches: Vec<ApproachDecl>,
    pub stop_lines: Vec<StopLineDecl>,
    pub cross: Vec<(String, String)>,
    pub thresholds: Thresholds,
    pub period: u64,
    pub ratio_subset: RatioSubset,
    /// Optional raw sensor code to main state mapping.
    pub raw_codes: Vec<(char, CellState)>,
}

impl Default for LayoutSpec {
    fn default() -> Self {
        LayoutSpec {
            zones: Vec::new(),
            approaches: Vec::new(),
            stop_lines: Vec::new(),
            cross: Vec::new(),
            thresholds: Thresholds::default(),
            period: 3600,
            ratio_subset: RatioSubset::Upstream,
            raw_codes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("{context} references unknown zone `{id}`")]
    UnknownZone { context: String, id: String },
    #[error("{context} references unknown approach `{id}`")]
    UnknownApproach { context: String, id: String },
    #[error("zone `{0}` has no cells")]
    EmptyZone(String),
    #[error("zone `{zone}` is not a {expected} zone ({context})")]
    WrongZoneKind {
        context: String,
        zone: String,
        expected: &'static str,
    },
    #[error("lane `{zone}` is claimed by approach `{approach}` but belongs to `{owner}`")]
    LaneApproachMismatch {
        zone: String,
        approach: String,
        owner: String,
    },
    #[error("approach `{0}` has no lanes")]
    NoLanes(String),
    #[error("stop line `{stop_line}`: {side} cell selection is empty")]
    EmptySubset { stop_line: String, side: &'static str },
    #[error("{context}: selection {selector} is out of bounds of zone `{zone}`")]
    OutOfBounds {
        context: String,
        zone: String,
        selector: String,
    },
    #[error("stop line `{0}`: upstream and downstream cells overlap")]
    OverlappingSubsets(String),
    #[error("stop line `{stop_line}`: upstream lane `{zone}` does not belong to approach `{approach}`")]
    ForeignUpstreamLane {
        stop_line: String,
        zone: String,
        approach: String,
    },
    #[error("stop line `{0}`: downstream cells span several conflict zones")]
    SplitDownstream(String),
    #[error("conflict zone `{zone}` is fed by {count} approaches; at most 2 are supported")]
    TooManyApproaches { zone: String, count: usize },
    #[error("cross traffic is not symmetric: `{from}` -> `{to}` has no matching `{to}` -> `{from}`")]
    AsymmetricCross { from: String, to: String },
    #[error("approach `{0}` is mapped to itself as cross traffic")]
    SelfCross(String),
    #[error("approach `{0}` has a stop line but no cross-traffic approach")]
    MissingCross(String),
    #[error("group thresholds must be at least 1")]
    InvalidThreshold,
    #[error("period must be at least 1 second")]
    InvalidPeriod,
}

/// Validated intersection topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    zones: Vec<Zone>,
    approaches: Vec<Approach>,
    stop_lines: Vec<StopLine>,
    cross: Vec<Option<ApproachIdx>>,
    thresholds: Thresholds,
    period: u64,
    ratio_subset: RatioSubset,
    raw_codes: Vec<(char, CellState)>,
}

impl Layout {
    pub fn build(spec: LayoutSpec) -> Result<Layout, LayoutError> {
        check_thresholds(spec.thresholds)?;
        if spec.period == 0 {
            return Err(LayoutError::InvalidPeriod);
        }

        let mut zones: Vec<Zone> = Vec::with_capacity(spec.zones.len());
        for decl in &spec.zones {
            if zones.iter().any(|z| z.id == decl.id) {
                return Err(LayoutError::DuplicateId {
                    kind: "zone",
                    id: decl.id.clone(),
                });
            }
            if decl.kind.cell_count() == 0 {
                return Err(LayoutError::EmptyZone(decl.id.clone()));
            }
            zones.push(Zone {
                id: decl.id.clone(),
                kind: decl.kind,
                approach: None,
            });
        }

        let mut approaches: Vec<Approach> = Vec::with_capacity(spec.approaches.len());
        for decl in &spec.approaches {
            if approaches.iter().any(|a| a.id == decl.id) {
                return Err(LayoutError::DuplicateId {
                    kind: "approach",
                    id: decl.id.clone(),
                });
            }
            if decl.lanes.is_empty() {
                return Err(LayoutError::NoLanes(decl.id.clone()));
            }
            let context = alloc::format!("approach `{}`", decl.id);
            let mut lanes = Vec::with_capacity(decl.lanes.len());
            for lane in &decl.lanes {
                let idx = find_zone(&zones, &context, lane)?;
                if zones[idx.0].kind.is_conflict() {
                    return Err(LayoutError::WrongZoneKind {
                        context,
                        zone: lane.clone(),
                        expected: "lane",
                    });
                }
                lanes.push(idx);
            }
            approaches.push(Approach {
                id: decl.id.clone(),
                signal: decl.signal.clone(),
                lanes,
            });
        }
        for (a, approach) in approaches.iter().enumerate() {
            for lane in &approach.lanes {
                let zone = &mut zones[lane.0];
                if let Some(owner) = zone.approach {
                    return Err(LayoutError::LaneApproachMismatch {
                        zone: zone.id.clone(),
                        approach: approach.id.clone(),
                        owner: approaches[owner.0].id.clone(),
                    });
                }
                zone.approach = Some(ApproachIdx(a));
            }
        }
        for decl in &spec.zones {
            if let Some(declared) = &decl.approach {
                let zone = zones.iter().find(|z| z.id == decl.id).expect("declared zone");
                let owner = zone.approach.map(|a| approaches[a.0].id.as_str());
                if owner != Some(declared.as_str()) {
                    if !approaches.iter().any(|a| &a.id == declared) {
                        return Err(LayoutError::UnknownApproach {
                            context: alloc::format!("zone `{}`", decl.id),
                            id: declared.clone(),
                        });
                    }
                    return Err(LayoutError::LaneApproachMismatch {
                        zone: decl.id.clone(),
                        approach: declared.clone(),
                        owner: owner.unwrap_or("<none>").into(),
                    });
                }
            }
        }
        let approach_by_id = |context: &str, id: &str| -> Result<ApproachIdx, LayoutError> {
            approaches
                .iter()
                .position(|a| a.id == id)
                .map(ApproachIdx)
                .ok_or_else(|| LayoutError::UnknownApproach {
                    context: context.into(),
                    id: id.into(),
                })
        };

        let mut stop_lines: Vec<StopLine> = Vec::with_capacity(spec.stop_lines.len());
        for decl in &spec.stop_lines {
            if stop_lines.iter().any(|s| s.id == decl.id) {
                return Err(LayoutError::DuplicateId {
                    kind: "stop line",
                    id: decl.id.clone(),
                });
            }
            let context = alloc::format!("stop line `{}`", decl.id);
            let approach = approach_by_id(&context, &decl.approach)?;
            let upstream = resolve_cells(&context, &decl.upstream, &zones)?;
            let downstream = resolve_cells(&context, &decl.downstream, &zones)?;
            if upstream.is_empty() {
                return Err(LayoutError::EmptySubset {
                    stop_line: decl.id.clone(),
                    side: "upstream",
                });
            }
            if downstream.is_empty() {
                return Err(LayoutError::EmptySubset {
                    stop_line: decl.id.clone(),
                    side: "downstream",
                });
            }
            if upstream.iter().any(|c| downstream.binary_search(c).is_ok()) {
                return Err(LayoutError::OverlappingSubsets(decl.id.clone()));
            }
            for cell in &upstream {
                let zone = &zones[cell.zone.0];
                if zone.kind.is_conflict() {
                    return Err(LayoutError::WrongZoneKind {
                        context,
                        zone: zone.id.clone(),
                        expected: "lane",
                    });
                }
                if zone.approach != Some(approach) {
                    return Err(LayoutError::ForeignUpstreamLane {
                        stop_line: decl.id.clone(),
                        zone: zone.id.clone(),
                        approach: decl.approach.clone(),
                    });
                }
            }
            let conflict_zone = downstream[0].zone;
            for cell in &downstream {
                let zone = &zones[cell.zone.0];
                if !zone.kind.is_conflict() {
                    return Err(LayoutError::WrongZoneKind {
                        context,
                        zone: zone.id.clone(),
                        expected: "conflict",
                    });
                }
                if cell.zone != conflict_zone {
                    return Err(LayoutError::SplitDownstream(decl.id.clone()));
                }
            }
            stop_lines.push(StopLine {
                id: decl.id.clone(),
                approach,
                upstream,
                downstream,
                conflict_zone,
            });
        }

        for (z, zone) in zones.iter().enumerate() {
            let feeding: BTreeSet<ApproachIdx> = stop_lines
                .iter()
                .filter(|s| s.conflict_zone == ZoneIdx(z))
                .map(|s| s.approach)
                .collect();
            if feeding.len() > 2 {
                return Err(LayoutError::TooManyApproaches {
                    zone: zone.id.clone(),
                    count: feeding.len(),
                });
            }
        }

        let mut cross: Vec<Option<ApproachIdx>> = vec![None; approaches.len()];
        for (from, to) in &spec.cross {
            let a = approach_by_id("cross traffic", from)?;
            let b = approach_by_id("cross traffic", to)?;
            if a == b {
                return Err(LayoutError::SelfCross(from.clone()));
            }
            if cross[a.0].is_some() {
                return Err(LayoutError::DuplicateId {
                    kind: "cross-traffic entry",
                    id: from.clone(),
                });
            }
            cross[a.0] = Some(b);
        }
        for (a, target) in cross.iter().enumerate() {
            if let Some(b) = target {
                if cross[b.0] != Some(ApproachIdx(a)) {
                    return Err(LayoutError::AsymmetricCross {
                        from: approaches[a].id.clone(),
                        to: approaches[b.0].id.clone(),
                    });
                }
            }
        }
        for line in &stop_lines {
            if cross[line.approach.0].is_none() {
                return Err(LayoutError::MissingCross(approaches[line.approach.0].id.clone()));
            }
        }

        let mut raw_codes: Vec<(char, CellState)> = Vec::with_capacity(spec.raw_codes.len());
        for (code, state) in &spec.raw_codes {
            if raw_codes.iter().any(|(c, _)| c == code) {
                return Err(LayoutError::DuplicateId {
                    kind: "raw code",
                    id: alloc::string::ToString::to_string(code),
                });
            }
            raw_codes.push((*code, *state));
        }

        Ok(Layout {
            zones,
            approaches,
            stop_lines,
            cross,
            thresholds: spec.thresholds,
            period: spec.period,
            ratio_subset: spec.ratio_subset,
            raw_codes,
        })
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn zone(&self, idx: ZoneIdx) -> &Zone {
        &self.zones[idx.0]
    }

    pub fn zone_index(&self, id: &str) -> Option<ZoneIdx> {
        self.zones.iter().position(|z| z.id == id).map(ZoneIdx)
    }

    /// Resolves cell selections against this layout's zones, sorted and
    /// deduplicated. `context` prefixes error messages.
    pub fn resolve(&self, context: &str, selectors: &[CellSelector]) -> Result<Vec<CellRef>, LayoutError> {
        resolve_cells(context, selectors, &self.zones)
    }

    pub fn conflict_zones(&self) -> impl Iterator<Item = ZoneIdx> + '_ {
        self.zones
            .iter()
            .enumerate()
            .filter(|(_, z)| z.kind.is_conflict())
            .map(|(i, _)| ZoneIdx(i))
    }

    pub fn approaches(&self) -> &[Approach] {
        &self.approaches
    }

    pub fn approach(&self, idx: ApproachIdx) -> &Approach {
        &self.approaches[idx.0]
    }

    pub fn approach_index(&self, id: &str) -> Option<ApproachIdx> {
        self.approaches.iter().position(|a| a.id == id).map(ApproachIdx)
    }

    pub fn stop_lines(&self) -> &[StopLine] {
        &self.stop_lines
    }

    pub fn stop_line(&self, idx: StopLineIdx) -> &StopLine {
        &self.stop_lines[idx.0]
    }

    /// Cross-traffic approach of `approach`, if one is declared.
    pub fn cross_traffic(&self, approach: ApproachIdx) -> Option<ApproachIdx> {
        self.cross[approach.0]
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn set_thresholds(&mut self, thresholds: Thresholds) -> Result<(), LayoutError> {
        check_thresholds(thresholds)?;
        self.thresholds = thresholds;
        Ok(())
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn set_period(&mut self, period: u64) -> Result<(), LayoutError> {
        if period == 0 {
            return Err(LayoutError::InvalidPeriod);
        }
        self.period = period;
        Ok(())
    }

    pub fn ratio_subset(&self) -> RatioSubset {
        self.ratio_subset
    }

    pub fn set_ratio_subset(&mut self, subset: RatioSubset) {
        self.ratio_subset = subset;
    }

    /// Decodes a cell code, consulting the raw-code table before the
    /// canonical codes.
    pub fn decode_cell(&self, code: char) -> Option<CellState> {
        self.raw_codes
            .iter()
            .find(|(c, _)| *c == code)
            .map(|(_, s)| *s)
            .or_else(|| CellState::from_code(code))
    }

    pub fn raw_codes(&self) -> &[(char, CellState)] {
        &self.raw_codes
    }
}

fn check_thresholds(thresholds: Thresholds) -> Result<(), LayoutError> {
    if thresholds.moving == 0 || thresholds.stationary == 0 {
        return Err(LayoutError::InvalidThreshold);
    }
    Ok(())
}

fn find_zone(zones: &[Zone], context: &str, id: &str) -> Result<ZoneIdx, LayoutError> {
    zones
        .iter()
        .position(|z| z.id == id)
        .map(ZoneIdx)
        .ok_or_else(|| LayoutError::UnknownZone {
            context: context.into(),
            id: id.into(),
        })
}

fn resolve_cells(
    context: &str,
    selectors: &[CellSelector],
    zones: &[Zone],
) -> Result<Vec<CellRef>, LayoutError> {
    let mut cells = BTreeSet::new();
    for selector in selectors {
        let zone_idx = find_zone(zones, context, selector.zone())?;
        let zone = &zones[zone_idx.0];
        let out_of_bounds = || LayoutError::OutOfBounds {
            context: context.into(),
            zone: zone.id.clone(),
            selector: alloc::format!("{selector:?}"),
        };
        match (selector, zone.kind) {
            (CellSelector::Lane { first, last, .. }, ZoneKind::Lane { len }) => {
                if first > last || *last >= len {
                    return Err(out_of_bounds());
                }
                cells.extend((*first..=*last).map(|cell| CellRef { zone: zone_idx, cell }));
            }
            (CellSelector::Rect { from, to, .. }, ZoneKind::Conflict { width, height }) => {
                if from.0 > to.0 || from.1 > to.1 || to.0 >= height || to.1 >= width {
                    return Err(out_of_bounds());
                }
                for row in from.0..=to.0 {
                    for col in from.1..=to.1 {
                        cells.insert(CellRef {
                            zone: zone_idx,
                            cell: row * width + col,
                        });
                    }
                }
            }
            (CellSelector::Lane { .. }, ZoneKind::Conflict { .. }) => {
                return Err(LayoutError::WrongZoneKind {
                    context: context.into(),
                    zone: zone.id.clone(),
                    expected: "lane",
                });
            }
            (CellSelector::Rect { .. }, ZoneKind::Lane { .. }) => {
                return Err(LayoutError::WrongZoneKind {
                    context: context.into(),
                    zone: zone.id.clone(),
                    expected: "conflict",
                });
            }
        }
    }
    Ok(cells.into_iter().collect())
}

/// Occupancy states and signal aspects for one second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub t: u64,
    /// One state vector per zone, in layout order.
    pub cells: Vec<Vec<CellState>>,
    /// One aspect per approach, in layout order.
    pub signals: Vec<Signal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame t={t}: expected {expected} zones, found {found}")]
    ZoneCount { t: u64, expected: usize, found: usize },
    #[error("frame t={t}: zone `{zone}` has {found} cells, expected {expected}")]
    SizeMismatch {
        t: u64,
        zone: String,
        expected: usize,
        found: usize,
    },
    #[error("frame t={t}: expected {expected} signals, found {found}")]
    SignalCount { t: u64, expected: usize, found: usize },
    #[error("frame t={t} does not follow t={previous}")]
    NonIncreasing { previous: u64, t: u64 },
    #[error("frame t={t} leaves a gap after t={previous}")]
    Gap { previous: u64, t: u64 },
}

impl Frame {
    /// All-empty frame with every signal red.
    pub fn empty(layout: &Layout, t: u64) -> Frame {
        Frame {
            t,
            cells: layout
                .zones()
                .iter()
                .map(|z| vec![CellState::Empty; z.kind.cell_count()])
                .collect(),
            signals: vec![Signal::Red; layout.approaches().len()],
        }
    }

    pub fn zone_cells(&self, zone: ZoneIdx) -> &[CellState] {
        &self.cells[zone.0]
    }

    pub fn cell(&self, cell: CellRef) -> CellState {
        self.cells[cell.zone.0][cell.cell]
    }

    pub fn signal(&self, approach: ApproachIdx) -> Signal {
        self.signals[approach.0]
    }

    pub fn validate(&self, layout: &Layout) -> Result<(), FrameError> {
        if self.cells.len() != layout.zones().len() {
            return Err(FrameError::ZoneCount {
                t: self.t,
                expected: layout.zones().len(),
                found: self.cells.len(),
            });
        }
        for (zone, cells) in layout.zones().iter().zip(&self.cells) {
            let expected = zone.kind.cell_count();
            if cells.len() != expected {
                return Err(FrameError::SizeMismatch {
                    t: self.t,
                    zone: zone.id.clone(),
                    expected,
                    found: cells.len(),
                });
            }
        }
        if self.signals.len() != layout.approaches().len() {
            return Err(FrameError::SignalCount {
                t: self.t,
                expected: layout.approaches().len(),
                found: self.signals.len(),
            });
        }
        Ok(())
    }
}

/// Checks that `t` directly follows `previous`.
pub fn check_sequence(previous: Option<u64>, t: u64) -> Result<(), FrameError> {
    match previous {
        None => Ok(()),
        Some(previous) if t <= previous => Err(FrameError::NonIncreasing { previous, t }),
        Some(previous) if t != previous + 1 => Err(FrameError::Gap { previous, t }),
        Some(_) => Ok(()),
    }
}
