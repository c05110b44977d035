#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use exposure::commands::{detect_stream, Detection};
use exposure::frames::{read_frames, write_frames};
use exposure::layout_doc::parse_layout;
use exposure::scenario::{layout_reference, parse_scenario, render, Rendered, ScenarioSpec};
use exposure_core::{DetectError, Layout, SecondFlags};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn scenario_paths() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = fs::read_dir(fixtures().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    paths.sort();
    paths
}

pub fn load_layout(path: &Path) -> Layout {
    parse_layout(&fs::read_to_string(path).unwrap()).unwrap()
}

pub fn load_scenario(path: &Path) -> (Layout, ScenarioSpec) {
    let text = fs::read_to_string(path).unwrap();
    let layout = load_layout(&path.parent().unwrap().join(layout_reference(&text).unwrap()));
    let spec = parse_scenario(&text, &layout).unwrap();
    (layout, spec)
}

/// Renders the scenario, passes the frames through the text format and
/// runs the detector.
pub fn run_scenario(layout: &Layout, spec: &ScenarioSpec) -> (Rendered, Detection) {
    let rendered = render(layout, spec).unwrap();
    let text = write_frames(&rendered.frames, layout);
    let frames = read_frames(&text, layout).unwrap();
    assert_eq!(frames, rendered.frames);
    let detection = detect_stream::<DetectError>(layout, frames.into_iter().map(Ok)).unwrap();
    (rendered, detection)
}

/// `(t, stream, field)` for every disagreement on the selected fields.
pub fn mismatches(
    layout: &Layout,
    truth: &[SecondFlags],
    detected: &[SecondFlags],
    fields: &[&str],
) -> Vec<String> {
    assert_eq!(truth.len(), detected.len());
    let mut out = Vec::new();
    for (a, b) in truth.iter().zip(detected) {
        assert_eq!((a.t, a.stream), (b.t, b.stream));
        for &field in fields {
            let (x, y) = match field {
                "crossing" => (a.crossing, b.crossing),
                "critical" => (a.critical, b.critical),
                "critical_moving" => (a.critical_moving, b.critical_moving),
                _ => unreachable!(),
            };
            if x != y {
                out.push(format!(
                    "t={} stream={} {field}: truth={} detected={}",
                    a.t,
                    layout.approach(a.stream).id,
                    u8::from(x),
                    u8::from(y)
                ));
            }
        }
    }
    out
}
