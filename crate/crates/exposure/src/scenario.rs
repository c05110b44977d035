//! Scripted vehicle trajectories rendered into frame streams, with ground
//! truth computed from the scripts alone.
//!
//! ```text
//! [scenario] layout=two_roads.layout duration=20 seed=7 flip=0.0
//! [signal] approach=A phases=G:0-10,A:10-13,R:13-20
//! [signal] approach=B phases=R:0-13,G:13-20
//! [vehicle] id=a1 approach=A enter=0 lane=A0 head=4 len=2 cz=CZ:(0,2)-(1,3) dir=S
//! [vehicle] id=q1 approach=B enter=0 lane=B0 head=0 len=3 stop=0-20
//! [vehicle] id=x1 approach=A enter=3 path=A0:5;A0:4;A0:3 noise=1
//! ```
//!
//! A vehicle occupies the footprint of its current step. It advances one
//! step per second unless stopped, and leaves the grid after its last
//! step. Stop intervals are half-open absolute seconds. The compact form
//! walks the lane footprint from `head` down to index 0, then moves the
//! `cz` footprint one cell per step in direction `dir` until the next
//! shift would leave the zone (or for `cz_steps` steps).
//!
//! Cells occupied by a moving vehicle render as `m`, by a stopped vehicle as
//! `s`; cells vacated this second render as `e`.

use std::collections::{BTreeMap, HashMap, HashSet};

use exposure_core::{
    ApproachIdx, CellRef, CellSelector, CellState, ExposureCounters, Frame, InvariantViolation, Layout,
    LayoutError, PeriodRow, SecondFlags, Signal, ZoneIdx, ZoneKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::layout_doc::{parse_selector, split_line, syntax, Fields, LayoutDocError};

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("vehicle `{vehicle}`: {message}")]
    Vehicle { vehicle: String, message: String },
    #[error("approach `{approach}`: {message}")]
    Signal { approach: String, message: String },
    #[error("t={t}: vehicles `{first}` and `{second}` collide on zone `{zone}` cell {cell}")]
    Collision {
        t: u64,
        zone: String,
        cell: usize,
        first: String,
        second: String,
    },
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
}

impl From<LayoutDocError> for ScenarioError {
    fn from(e: LayoutDocError) -> Self {
        match e {
            LayoutDocError::Syntax { line, message } => ScenarioError::Syntax { line, message },
            LayoutDocError::Semantic(e) => ScenarioError::Layout(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase {
    pub signal: Signal,
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VehicleScript {
    pub id: String,
    pub approach: ApproachIdx,
    pub enter: u64,
    /// Footprint per step; each lies within a single zone.
    pub steps: Vec<Vec<CellRef>>,
    pub stops: Vec<(u64, u64)>,
    /// Excluded from ground truth.
    pub noise: bool,
}

impl VehicleScript {
    pub fn is_stopped(&self, t: u64) -> bool {
        self.stops.iter().any(|&(a, b)| a <= t && t < b)
    }

    /// `(t, step, moving)` for every second the vehicle is on the grid
    /// before `duration`.
    pub fn trajectory(&self, duration: u64) -> Vec<(u64, usize, bool)> {
        let mut out = Vec::new();
        let mut step = 0;
        let mut t = self.enter;
        while t < duration && step < self.steps.len() {
            let moving = !self.is_stopped(t);
            out.push((t, step, moving));
            step += usize::from(moving);
            t += 1;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub duration: u64,
    /// Timeline per approach, in layout order.
    pub signals: Vec<Vec<Phase>>,
    pub vehicles: Vec<VehicleScript>,
    /// Probability that a rendered cell is replaced by another state.
    pub flip_rate: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn signal(&self, approach: ApproachIdx, t: u64) -> Signal {
        self.signals[approach.0]
            .iter()
            .find(|p| p.start <= t && t < p.end)
            .map_or(Signal::Red, |p| p.signal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    North,
    South,
    East,
    West,
}

impl Direction {
    pub fn from_code(code: &str) -> Option<Direction> {
        match code {
            "N" => Some(Direction::North),
            "S" => Some(Direction::South),
            "E" => Some(Direction::East),
            "W" => Some(Direction::West),
            _ => None,
        }
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Direction::North => (-1, 0),
            Direction::South => (1, 0),
            Direction::East => (0, 1),
            Direction::West => (0, -1),
        }
    }
}

/// Lane footprints of length `len` with the front at `head`, `head - 1`,
/// ..., 0.
pub fn lane_steps(lane: ZoneIdx, head: usize, len: usize) -> Vec<Vec<CellRef>> {
    (0..=head)
        .rev()
        .map(|h| (h..h + len).map(|cell| CellRef { zone: lane, cell }).collect())
        .collect()
}

/// Shifts `footprint` one cell at a time in `dir` while it stays inside the
/// conflict zone, starting with the footprint itself.
pub fn zone_steps(
    layout: &Layout,
    footprint: &[CellRef],
    dir: Option<Direction>,
    limit: Option<usize>,
) -> Vec<Vec<CellRef>> {
    let mut steps = vec![footprint.to_vec()];
    let (Some(dir), Some(first)) = (dir, footprint.first()) else {
        return steps;
    };
    let ZoneKind::Conflict { width, height } = layout.zone(first.zone).kind else {
        return steps;
    };
    let (dr, dc) = dir.delta();
    loop {
        if limit.is_some_and(|n| steps.len() >= n) {
            break;
        }
        let shifted: Option<Vec<CellRef>> = steps
            .last()
            .unwrap()
            .iter()
            .map(|c| {
                let r = (c.cell / width).checked_add_signed(dr)?;
                let col = (c.cell % width).checked_add_signed(dc)?;
                (r < height && col < width).then_some(CellRef {
                    zone: c.zone,
                    cell: r * width + col,
                })
            })
            .collect();
        match shifted {
            Some(next) => steps.push(next),
            None => break,
        }
    }
    steps
}

fn neighbours(kind: ZoneKind, cell: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(4);
    kind.for_each_neighbour(cell, |n| out.push(n));
    out
}

/// Checks footprints and adjacency of consecutive steps.
pub fn validate_vehicle(layout: &Layout, vehicle: &VehicleScript) -> Result<(), ScenarioError> {
    let fail = |message: String| ScenarioError::Vehicle {
        vehicle: vehicle.id.clone(),
        message,
    };
    if vehicle.steps.is_empty() {
        return Err(fail("itinerary is empty".into()));
    }
    let lanes = &layout.approach(vehicle.approach).lanes;
    for (i, step) in vehicle.steps.iter().enumerate() {
        let Some(first) = step.first() else {
            return Err(fail(format!("step {i} has an empty footprint")));
        };
        if step.iter().any(|c| c.zone != first.zone) {
            return Err(fail(format!("step {i} spans more than one zone")));
        }
        let zone = layout.zone(first.zone);
        if !zone.kind.is_conflict() && !lanes.contains(&first.zone) {
            return Err(fail(format!(
                "step {i} uses lane `{}` of another approach",
                zone.id
            )));
        }
        if let Some(c) = step.iter().find(|c| c.cell >= zone.kind.cell_count()) {
            return Err(fail(format!(
                "step {i}: cell {} outside zone `{}`",
                c.cell, zone.id
            )));
        }
        if i > 0 {
            let previous = &vehicle.steps[i - 1];
            if previous[0].zone == first.zone {
                let touches = step.iter().any(|c| {
                    previous
                        .iter()
                        .any(|p| p.cell == c.cell || neighbours(zone.kind, p.cell).contains(&c.cell))
                });
                if !touches {
                    return Err(fail(format!("step {i} is not adjacent to step {}", i - 1)));
                }
            }
        }
    }
    for &(a, b) in &vehicle.stops {
        if a >= b {
            return Err(fail(format!("empty stop interval {a}-{b}")));
        }
    }
    Ok(())
}

fn validate_signals(layout: &Layout, spec: &ScenarioSpec) -> Result<(), ScenarioError> {
    for (a, phases) in spec.signals.iter().enumerate() {
        let approach = &layout.approaches()[a].id;
        let fail = |message: String| ScenarioError::Signal {
            approach: approach.clone(),
            message,
        };
        let mut covered = 0;
        for p in phases {
            if p.start != covered {
                return Err(fail(format!("timeline has a gap or overlap at t={covered}")));
            }
            if p.end <= p.start {
                return Err(fail(format!("empty phase {}-{}", p.start, p.end)));
            }
            covered = p.end;
        }
        if covered < spec.duration {
            return Err(fail(format!(
                "timeline ends at t={covered}, before the scenario does"
            )));
        }
    }
    Ok(())
}

fn parse_phases(fields: &Fields<'_>, raw: &str) -> Result<Vec<Phase>, ScenarioError> {
    raw.split(',')
        .map(|part| {
            let parsed = part.split_once(':').and_then(|(code, range)| {
                let (a, b) = range.split_once('-')?;
                Some(Phase {
                    signal: Signal::from_code(code)?,
                    start: a.parse().ok()?,
                    end: b.parse().ok()?,
                })
            });
            parsed.ok_or_else(|| {
                syntax(
                    fields.line,
                    format!("malformed phase `{part}`, expected e.g. G:0-10"),
                )
                .into()
            })
        })
        .collect()
}

fn parse_intervals(fields: &Fields<'_>, raw: &str) -> Result<Vec<(u64, u64)>, ScenarioError> {
    raw.split(',')
        .map(|part| {
            let parsed = part
                .split_once('-')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)));
            parsed.ok_or_else(|| {
                syntax(
                    fields.line,
                    format!("malformed interval `{part}`, expected e.g. 3-8"),
                )
                .into()
            })
        })
        .collect()
}

fn selector(fields: &Fields<'_>, raw: &str) -> Result<CellSelector, ScenarioError> {
    parse_selector(raw).ok_or_else(|| syntax(fields.line, format!("malformed cell selection `{raw}`")).into())
}

fn parse_vehicle(mut fields: Fields<'_>, layout: &Layout) -> Result<VehicleScript, ScenarioError> {
    let id = fields.required("id")?.to_string();
    let approach_id = fields.required("approach")?;
    let approach = layout
        .approach_index(approach_id)
        .ok_or_else(|| ScenarioError::Vehicle {
            vehicle: id.clone(),
            message: format!("unknown approach `{approach_id}`"),
        })?;
    let enter: u64 = fields.number("enter")?;
    let context = format!("vehicle `{id}`");

    let mut steps = Vec::new();
    if let Some(path) = fields.take("path") {
        for part in path.split(';') {
            let sel = selector(&fields, part)?;
            steps.push(layout.resolve(&context, &[sel])?);
        }
    } else {
        let len: usize = fields.optional_number("len")?.unwrap_or(2);
        if let Some(lane) = fields.take("lane") {
            let zone = layout.zone_index(lane).ok_or_else(|| ScenarioError::Vehicle {
                vehicle: id.clone(),
                message: format!("unknown lane `{lane}`"),
            })?;
            let head: usize = fields.number("head")?;
            let lane_len = layout.zone(zone).kind.cell_count();
            if len == 0 || head + len > lane_len {
                return Err(ScenarioError::Vehicle {
                    vehicle: id,
                    message: format!("footprint {head}..{} does not fit lane `{lane}`", head + len),
                });
            }
            steps.extend(lane_steps(zone, head, len));
        }
        if let Some(cz) = fields.take("cz") {
            let sel = selector(&fields, cz)?;
            let footprint = layout.resolve(&context, &[sel])?;
            let dir = match fields.take("dir") {
                Some(code) => Some(Direction::from_code(code).ok_or_else(|| {
                    syntax(fields.line, format!("`dir` must be N, S, E or W, got `{code}`"))
                })?),
                None => None,
            };
            let limit = fields.optional_number("cz_steps")?;
            steps.extend(zone_steps(layout, &footprint, dir, limit));
        }
    }
    let stops = match fields.take("stop") {
        Some(raw) => parse_intervals(&fields, raw)?,
        None => Vec::new(),
    };
    let noise = match fields.take("noise") {
        None | Some("0") => false,
        Some("1") => true,
        Some(other) => {
            return Err(syntax(fields.line, format!("`noise` must be 0 or 1, got `{other}`")).into())
        }
    };
    fields.finish()?;
    let vehicle = VehicleScript {
        id,
        approach,
        enter,
        steps,
        stops,
        noise,
    };
    validate_vehicle(layout, &vehicle)?;
    Ok(vehicle)
}

/// The `layout` path named in the `[scenario]` section.
pub fn layout_reference(text: &str) -> Result<String, ScenarioError> {
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = split_line(idx + 1, line)?;
        if fields.section == "scenario" {
            return Ok(fields.required("layout")?.to_string());
        }
    }
    Err(ScenarioError::Syntax {
        line: 0,
        message: "missing [scenario] section".into(),
    })
}

/// Parses a scenario document against the layout it references.
pub fn parse_scenario(text: &str, layout: &Layout) -> Result<ScenarioSpec, ScenarioError> {
    let mut header: Option<(u64, u64, f64)> = None;
    let mut signals: Vec<Option<Vec<Phase>>> = vec![None; layout.approaches().len()];
    let mut vehicles: Vec<VehicleScript> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = split_line(line_no, line)?;
        match fields.section {
            "scenario" => {
                if header.is_some() {
                    return Err(syntax(line_no, "[scenario] given twice").into());
                }
                fields.required("layout")?;
                let duration = fields.number("duration")?;
                let seed = fields.optional_number("seed")?.unwrap_or(0);
                let flip = match fields.take("flip") {
                    Some(raw) => match raw.parse::<f64>() {
                        Ok(p) if (0.0..=1.0).contains(&p) => p,
                        _ => {
                            return Err(
                                syntax(line_no, format!("`flip` must be a probability, got `{raw}`")).into(),
                            )
                        }
                    },
                    None => 0.0,
                };
                fields.finish()?;
                header = Some((duration, seed, flip));
            }
            "signal" => {
                let approach_id = fields.required("approach")?;
                let a = layout
                    .approach_index(approach_id)
                    .ok_or_else(|| syntax(line_no, format!("unknown approach `{approach_id}`")))?;
                let raw = fields.required("phases")?;
                let phases = parse_phases(&fields, raw)?;
                fields.finish()?;
                if signals[a.0].replace(phases).is_some() {
                    return Err(syntax(
                        line_no,
                        format!("[signal] for approach `{approach_id}` given twice"),
                    )
                    .into());
                }
            }
            "vehicle" => {
                let vehicle = parse_vehicle(fields, layout)?;
                if vehicles.iter().any(|v| v.id == vehicle.id) {
                    return Err(syntax(line_no, format!("duplicate vehicle id `{}`", vehicle.id)).into());
                }
                vehicles.push(vehicle);
            }
            other => return Err(syntax(line_no, format!("unknown section [{other}]")).into()),
        }
    }

    let (duration, seed, flip_rate) = header.ok_or_else(|| ScenarioError::Syntax {
        line: 0,
        message: "missing [scenario] section".into(),
    })?;
    let signals = signals
        .into_iter()
        .enumerate()
        .map(|(a, s)| {
            s.ok_or_else(|| ScenarioError::Signal {
                approach: layout.approaches()[a].id.clone(),
                message: "no [signal] timeline".into(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let spec = ScenarioSpec {
        duration,
        signals,
        vehicles,
        flip_rate,
        seed,
    };
    validate_signals(layout, &spec)?;
    Ok(spec)
}

/// Output of [`render`].
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub frames: Vec<Frame>,
    /// Ground-truth flags, per second then per approach in layout order.
    pub flags: Vec<SecondFlags>,
    /// Ground-truth period rows for the layout's period.
    pub periods: Vec<PeriodRow>,
}

/// Occupied cells of one second, with the occupying vehicle and whether it
/// is moving.
type Occupancy = HashMap<CellRef, (usize, bool)>;

/// Renders frames and derives ground truth from the scripts.
pub fn render(layout: &Layout, spec: &ScenarioSpec) -> Result<Rendered, ScenarioError> {
    validate_signals(layout, spec)?;
    for v in &spec.vehicles {
        validate_vehicle(layout, v)?;
    }

    // Second -> present vehicles as (vehicle, step, moving).
    let mut presence: BTreeMap<u64, Vec<(usize, usize, bool)>> = BTreeMap::new();
    for (i, v) in spec.vehicles.iter().enumerate() {
        for (t, step, moving) in v.trajectory(spec.duration) {
            presence.entry(t).or_default().push((i, step, moving));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let approaches = layout.approaches().len();
    let mut frames = Vec::with_capacity(spec.duration as usize);
    let mut flags = Vec::with_capacity(spec.duration as usize * approaches);
    let mut counters = ExposureCounters::new(approaches, layout.period(), 0);
    let mut periods = Vec::new();
    let mut previous: Occupancy = HashMap::new();
    let empty = Vec::new();

    for t in 0..spec.duration {
        let present = presence.get(&t).unwrap_or(&empty);
        let mut occupancy: Occupancy = HashMap::new();
        for &(v, step, moving) in present {
            for &cell in &spec.vehicles[v].steps[step] {
                if let Some((other, _)) = occupancy.insert(cell, (v, moving)) {
                    return Err(ScenarioError::Collision {
                        t,
                        zone: layout.zone(cell.zone).id.clone(),
                        cell: cell.cell,
                        first: spec.vehicles[other].id.clone(),
                        second: spec.vehicles[v].id.clone(),
                    });
                }
            }
        }

        let mut frame = Frame::empty(layout, t);
        for (&cell, &(_, moving)) in &occupancy {
            frame.cells[cell.zone.0][cell.cell] = if moving {
                CellState::MovingPresence
            } else {
                CellState::StationaryPresence
            };
        }
        for cell in previous.keys() {
            if !occupancy.contains_key(cell) {
                frame.cells[cell.zone.0][cell.cell] = CellState::EndOfPresence;
            }
        }
        if spec.flip_rate > 0.0 {
            for zone in frame.cells.iter_mut() {
                for state in zone.iter_mut() {
                    if rng.random_bool(spec.flip_rate) {
                        let others: Vec<CellState> =
                            CellState::ALL.into_iter().filter(|s| s != state).collect();
                        *state = others[rng.random_range(0..others.len())];
                    }
                }
            }
        }
        for a in 0..approaches {
            frame.signals[a] = spec.signal(ApproachIdx(a), t);
        }

        while !counters.contains(t) {
            periods.extend(counters.finalize()?);
        }
        for a in 0..approaches {
            let f = truth_flags(layout, spec, present, t, ApproachIdx(a));
            counters.record(&f)?;
            flags.push(f);
        }
        frames.push(frame);
        previous = occupancy;
    }
    if spec.duration > 0 {
        periods.extend(counters.finalize()?);
    }
    Ok(Rendered {
        frames,
        flags,
        periods,
    })
}

fn truth_flags(
    layout: &Layout,
    spec: &ScenarioSpec,
    present: &[(usize, usize, bool)],
    t: u64,
    stream: ApproachIdx,
) -> SecondFlags {
    let real = || {
        present
            .iter()
            .filter(|(v, _, _)| !spec.vehicles[*v].noise)
            .map(|&(v, step, moving)| (&spec.vehicles[v], &spec.vehicles[v].steps[step], moving))
    };
    let crossing = real().any(|(v, cells, moving)| {
        moving && v.approach == stream && layout.zone(cells[0].zone).kind.is_conflict()
    });
    let mut critical = false;
    let mut critical_moving = false;
    if let Some(cross) = layout.cross_traffic(stream) {
        for &lane in &layout.approach(cross).lanes {
            // The vehicle nearest the conflict zone on this lane.
            let close = real()
                .filter_map(|(_, cells, moving)| {
                    let nearest = cells.iter().filter(|c| c.zone == lane).map(|c| c.cell).min()?;
                    Some((nearest, moving))
                })
                .min();
            if let Some((_, moving)) = close {
                critical = true;
                critical_moving |= moving;
            }
        }
    }
    SecondFlags {
        t,
        stream,
        crossing,
        critical: crossing && critical,
        critical_moving: crossing && critical_moving,
    }
}

/// A path vehicles of one approach follow in random scenarios: down `lane`
/// to its index 0, then across the conflict zone from `entry` in `dir`.
#[derive(Debug, Clone)]
pub struct Route {
    pub approach: ApproachIdx,
    pub lane: ZoneIdx,
    pub entry: Vec<CellRef>,
    pub dir: Direction,
}

fn random_timeline(rng: &mut ChaCha8Rng, duration: u64) -> Vec<Phase> {
    let mut phases = Vec::new();
    let mut t = 0;
    let mut k = rng.random_range(0..3);
    while t < duration {
        let (signal, len) = match k % 3 {
            0 => (Signal::Green, rng.random_range(3..15)),
            1 => (Signal::Amber, rng.random_range(1..4)),
            _ => (Signal::Red, rng.random_range(3..20)),
        };
        phases.push(Phase {
            signal,
            start: t,
            end: t + len,
        });
        t += len;
        k += 1;
    }
    phases
}

/// Seeded random scenario over `routes`: independent signal timelines,
/// vehicles of 1 to 3 cells with random stops, occasional lone cells, and
/// cell flip noise. Vehicles that would collide with earlier ones are
/// dropped. One-cell vehicles are marked as noise.
pub fn random_scenario(layout: &Layout, routes: &[Route], seed: u64, duration: u64) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signals = (0..layout.approaches().len())
        .map(|_| random_timeline(&mut rng, duration))
        .collect();
    let mut occupied: HashSet<(u64, CellRef)> = HashSet::new();
    let mut vehicles = Vec::new();

    for (r, route) in routes.iter().enumerate() {
        let lane_len = layout.zone(route.lane).kind.cell_count();
        let mut t = rng.random_range(0..4);
        let mut n = 0;
        while t < duration {
            let len = rng.random_range(1..=3usize).min(lane_len);
            let head = rng.random_range(0..=lane_len - len);
            let mut steps = lane_steps(route.lane, head, len);
            if rng.random_bool(0.85) {
                steps.extend(zone_steps(layout, &route.entry, Some(route.dir), None));
            }
            let mut stops = Vec::new();
            if rng.random_bool(0.4) {
                let a = t + rng.random_range(0..12);
                stops.push((a, a + rng.random_range(1..15)));
            }
            let vehicle = VehicleScript {
                id: format!("r{r}v{n}"),
                approach: route.approach,
                enter: t,
                steps,
                stops,
                noise: len == 1,
            };
            let cells: Vec<(u64, CellRef)> = vehicle
                .trajectory(duration)
                .into_iter()
                .flat_map(|(t, step, _)| vehicle.steps[step].iter().map(move |&c| (t, c)))
                .collect();
            if cells.iter().all(|key| !occupied.contains(key)) {
                occupied.extend(cells);
                vehicles.push(vehicle);
            }
            n += 1;
            t += rng.random_range(1..9);
        }
    }
    let flip_rate = if rng.random_bool(0.5) {
        rng.random_range(0.0..0.05)
    } else {
        0.0
    };
    ScenarioSpec {
        duration,
        signals,
        vehicles,
        flip_rate,
        seed,
    }
}
