//! Subcommands of the `exposure` binary.
//!
//! Exit status: 0 success, 1 usage error, 2 data error, 3 internal
//! invariant violation.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use exposure_core::{
    score, DetectError, Detector, Diagnostic, EventRecord, Frame, Layout, PeriodRow, SecondFlags, Target,
    Thresholds, TieBreak,
};
use log::{info, warn};
use thiserror::Error;

use crate::frames::{write_frames, FrameReader};
use crate::layout_doc::parse_layout;
use crate::records::{
    read_annotations, read_counts, read_flags, write_annotations, write_events, write_flags, write_report,
    write_score_map, write_scores,
};
use crate::scenario::{layout_reference, parse_scenario, render, ScenarioError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<DetectError> for CliError {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::Frame(e) => CliError::Data(e.to_string()),
            DetectError::Invariant(e) => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Invariant(e) => CliError::Invariant(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "exposure",
    version,
    about = "Lateral-collision exposure from occupancy grids"
)]
pub struct Cli {
    /// Log diagnostics to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect crossings and accumulate exposure; writes flags.csv,
    /// events.csv and report.csv.
    Detect(DetectArgs),
    /// Score a flags log against annotations; writes scores.csv.
    Evaluate(EvaluateArgs),
    /// Render a scenario; writes frames.txt, truth_flags.csv,
    /// annotations.csv and truth_report.csv.
    Generate(GenerateArgs),
    /// Precision and recall for confusion counts tallied elsewhere.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct LayoutOverrides {
    /// Period length T in seconds.
    #[arg(long)]
    pub period: Option<u64>,
    /// Minimum size of a moving group.
    #[arg(long)]
    pub moving_threshold: Option<usize>,
    /// Minimum size of a stationary group.
    #[arg(long)]
    pub stationary_threshold: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Intersection layout.
    #[arg(long)]
    pub layout: PathBuf,
    /// Frame stream to process.
    #[arg(long, required_unless_present = "scenario", conflicts_with = "scenario")]
    pub frames: Option<PathBuf>,
    /// Scenario to render and process instead of a frame stream.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Overrides the scenario's flip-noise seed.
    #[arg(long, requires = "scenario")]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: LayoutOverrides,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Flags log written by detect.
    #[arg(long)]
    pub flags: PathBuf,
    /// Per-second annotations.
    #[arg(long)]
    pub annotations: PathBuf,
    /// Y or Ym; both when omitted.
    #[arg(long, value_parser = parse_target)]
    pub target: Option<Target>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scenario script.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Layout to use instead of the one the scenario names.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Overrides the scenario's flip-noise seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: LayoutOverrides,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// CSV `stream,target,TP,FP,FN`.
    #[arg(long)]
    pub counts: PathBuf,
    /// Directory for scores.csv; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_target(raw: &str) -> Result<Target, String> {
    Target::from_name(raw).ok_or_else(|| format!("expected Y or Ym, got `{raw}`"))
}

fn read_input(path: &Path, what: &str) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{what} not found: {}: {e}", path.display())))
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))
}

pub fn load_layout(path: &Path, overrides: &LayoutOverrides) -> Result<Layout, CliError> {
    let text = read_input(path, "layout")?;
    let mut layout = parse_layout(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if let Some(period) = overrides.period {
        layout
            .set_period(period)
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if overrides.moving_threshold.is_some() || overrides.stationary_threshold.is_some() {
        let current = layout.thresholds();
        let thresholds = Thresholds {
            moving: overrides.moving_threshold.unwrap_or(current.moving),
            stationary: overrides.stationary_threshold.unwrap_or(current.stationary),
        };
        layout
            .set_thresholds(thresholds)
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(layout)
}

/// Everything the detector produced over a stream.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Detection {
    pub flags: Vec<SecondFlags>,
    pub events: Vec<EventRecord>,
    pub diagnostics: Vec<Diagnostic>,
    pub periods: Vec<PeriodRow>,
}

/// Runs the detector over `frames` and closes the final period.
pub fn detect_stream<E>(
    layout: &Layout,
    frames: impl IntoIterator<Item = Result<Frame, E>>,
) -> Result<Detection, E>
where
    E: From<DetectError>,
{
    let mut detector = Detector::new(layout);
    let mut out = Detection::default();
    for frame in frames {
        let step = detector.step(&frame?)?;
        out.flags.extend(step.flags);
        out.events.extend(step.events);
        out.diagnostics.extend(step.diagnostics);
        out.periods.extend(step.periods);
    }
    out.periods.extend(detector.finish()?);
    Ok(out)
}

fn log_detection(layout: &Layout, detection: &Detection) {
    for d in &detection.diagnostics {
        match d {
            Diagnostic::UnlabeledGroup {
                t,
                zone,
                nearest_cell,
                size,
            } => info!(
                "t={t}: unlabeled moving group of {size} cells at {} cell {nearest_cell}",
                layout.zone(*zone).id
            ),
            Diagnostic::OverlapTie { t, zone, chosen } => warn!(
                "t={t}: tied origin overlap in {}, kept {}",
                layout.zone(*zone).id,
                layout.approach(*chosen).id
            ),
        }
    }
    for e in &detection.events {
        if e.tiebreak == TieBreak::Lexicographic {
            warn!(
                "t={}: origin tie at {} settled by approach id",
                e.event.t,
                layout.stop_line(e.event.stop_line).id
            );
        }
    }
    info!(
        "{} seconds, {} crossings, {} diagnostics",
        detection.flags.len() / layout.approaches().len().max(1),
        detection.events.len(),
        detection.diagnostics.len()
    );
}

fn write_detection(dir: &Path, layout: &Layout, detection: &Detection) -> Result<(), CliError> {
    prepare_out(dir)?;
    write_output(dir, "flags.csv", &write_flags(&detection.flags, layout))?;
    write_output(dir, "events.csv", &write_events(&detection.events, layout))?;
    write_output(dir, "report.csv", &write_report(&detection.periods, layout))
}

/// Reads a scenario and the layout it names (relative to the scenario
/// file), unless `layout` is given.
fn load_scenario(
    scenario: &Path,
    layout: Option<&Path>,
    overrides: &LayoutOverrides,
    seed: Option<u64>,
) -> Result<(Layout, crate::scenario::ScenarioSpec), CliError> {
    let text = read_input(scenario, "scenario")?;
    let data = |e: ScenarioError| CliError::Data(format!("{}: {e}", scenario.display()));
    let layout_path = match layout {
        Some(path) => path.to_path_buf(),
        None => {
            let reference = layout_reference(&text).map_err(data)?;
            scenario
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(reference)
        }
    };
    let layout = load_layout(&layout_path, overrides)?;
    let mut spec = parse_scenario(&text, &layout).map_err(data)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    Ok((layout, spec))
}

pub fn cmd_detect(args: &DetectArgs) -> Result<(), CliError> {
    let layout = load_layout(&args.layout, &args.overrides)?;
    let detection = match (&args.frames, &args.scenario) {
        (Some(path), _) => {
            let text = read_input(path, "frame stream")?;
            let frames = FrameReader::new(&text, &layout)
                .map(|r| r.map_err(|e| CliError::Data(format!("{}: {e}", path.display()))));
            detect_stream(&layout, frames)?
        }
        (None, Some(path)) => {
            let (_, spec) = load_scenario(path, Some(&args.layout), &args.overrides, args.seed)?;
            let rendered = render(&layout, &spec)?;
            detect_stream::<CliError>(&layout, rendered.frames.into_iter().map(Ok))?
        }
        (None, None) => {
            return Err(CliError::Usage(
                "one of --frames or --scenario is required".into(),
            ))
        }
    };
    log_detection(&layout, &detection);
    write_detection(&args.out, &layout, &detection)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let (layout, spec) = load_scenario(&args.scenario, args.layout.as_deref(), &args.overrides, args.seed)?;
    let rendered = render(&layout, &spec)?;
    info!(
        "rendered {} frames with {} vehicles",
        rendered.frames.len(),
        spec.vehicles.len()
    );
    let dir = &args.out;
    prepare_out(dir)?;
    write_output(dir, "frames.txt", &write_frames(&rendered.frames, &layout))?;
    write_output(dir, "truth_flags.csv", &write_flags(&rendered.flags, &layout))?;
    write_output(
        dir,
        "annotations.csv",
        &write_annotations(&rendered.flags, &layout),
    )?;
    write_output(dir, "truth_report.csv", &write_report(&rendered.periods, &layout))
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let data = |path: &Path, e: &dyn std::fmt::Display| CliError::Data(format!("{}: {e}", path.display()));
    let flags = read_flags(&read_input(&args.flags, "flags log")?).map_err(|e| data(&args.flags, &e))?;
    let annotations = read_annotations(&read_input(&args.annotations, "annotations")?)
        .map_err(|e| data(&args.annotations, &e))?;
    let targets = match args.target {
        Some(target) => vec![target],
        None => vec![Target::Y, Target::Ym],
    };
    let mut report = String::new();
    for target in targets {
        let scores = score(&flags, &annotations, target).map_err(|e| CliError::Data(e.to_string()))?;
        let csv = write_score_map(&scores, target);
        // Header only once.
        let body = if report.is_empty() {
            &csv[..]
        } else {
            csv.split_once('\n').map_or("", |(_, b)| b)
        };
        report.push_str(body);
    }
    prepare_out(&args.out)?;
    write_output(&args.out, "scores.csv", &report)
}

pub fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let counts = read_counts(&read_input(&args.counts, "counts")?)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.counts.display())))?;
    let csv = write_scores(counts.iter().map(|(s, t, c)| (s.as_str(), *t, c)));
    match &args.out {
        Some(dir) => {
            prepare_out(dir)?;
            write_output(dir, "scores.csv", &csv)
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Report(args) => cmd_report(args),
    }
}
