mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{fixtures, scenario_paths};
use tempfile::TempDir;

fn exposure(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exposure"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn fixture(rel: &str) -> String {
    fixtures().join(rel).to_string_lossy().into_owned()
}

#[test]
fn detect_writes_three_files() {
    let out = TempDir::new().unwrap();
    let run = exposure(&[
        "detect",
        "--layout",
        &fixture("layouts/cross6.layout"),
        "--frames",
        &fixture("frames/s02_stationary_cross_queue.txt"),
        "--out",
        path(out.path()),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let report = fs::read_to_string(out.path().join("report.csv")).unwrap();
    assert_eq!(
        report,
        "stream,period_start,period_end,Z,X,Y,Ym\nA,0,3600,5,0,5,0\nB,0,3600,0,0,0,0\n"
    );
    let events = fs::read_to_string(out.path().join("events.csv")).unwrap();
    assert_eq!(
        events,
        "t,stopline,approach,origin_tiebreak_flag\n3,SL_A,A,none\n"
    );
    let flags = fs::read_to_string(out.path().join("flags.csv")).unwrap();
    assert!(flags.starts_with("t,stream,crossing,critical,critical_moving\n0,A,0,0,0\n0,B,0,0,0\n"));
    assert_eq!(flags.lines().count(), 1 + 12 * 2);
}

#[test]
fn missing_layout_is_a_usage_error() {
    let out = TempDir::new().unwrap();
    let run = exposure(&[
        "detect",
        "--layout",
        &fixture("layouts/missing.layout"),
        "--frames",
        &fixture("frames/two_roads.txt"),
        "--out",
        path(out.path()),
    ]);
    assert_eq!(run.status.code(), Some(1));
    assert!(stderr(&run).contains("layout not found"), "{}", stderr(&run));
}

#[test]
fn malformed_frame_names_its_second() {
    for bad in ["malformed/bad_code_t12.txt", "malformed/gap_t12.txt"] {
        let out = TempDir::new().unwrap();
        let run = exposure(&[
            "detect",
            "--layout",
            &fixture("layouts/cross6.layout"),
            "--frames",
            &fixture(bad),
            "--out",
            path(out.path()),
        ]);
        assert_eq!(run.status.code(), Some(2), "{bad}");
        let message = stderr(&run);
        let t = if bad.contains("gap") { "t=13" } else { "t=12" };
        assert!(message.contains(t), "{bad}: {message}");
        assert!(!out.path().join("flags.csv").exists());
    }
}

#[test]
fn bad_arguments_exit_with_usage_status() {
    assert_eq!(exposure(&["detect"]).status.code(), Some(1));
    assert_eq!(exposure(&["frobnicate"]).status.code(), Some(1));
    let run = exposure(&[
        "evaluate",
        "--flags",
        "f",
        "--annotations",
        "a",
        "--target",
        "Q",
        "--out",
        "o",
    ]);
    assert_eq!(run.status.code(), Some(1));
    assert_eq!(exposure(&["--help"]).status.code(), Some(0));
}

#[test]
fn threshold_and_period_overrides() {
    let out = TempDir::new().unwrap();
    let run = exposure(&[
        "detect",
        "--layout",
        &fixture("layouts/cross6.layout"),
        "--frames",
        &fixture("frames/s02_stationary_cross_queue.txt"),
        "--out",
        path(out.path()),
        "--period",
        "5",
        "--stationary-threshold",
        "4",
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let report = fs::read_to_string(out.path().join("report.csv")).unwrap();
    // The three-cell queue no longer forms a group.
    assert_eq!(
        report,
        "stream,period_start,period_end,Z,X,Y,Ym\n\
         A,0,5,2,2,0,0\nB,0,5,0,0,0,0\nA,5,10,3,3,0,0\nB,5,10,0,0,0,0\nA,10,15,0,0,0,0\nB,10,15,0,0,0,0\n"
    );
    let run = exposure(&[
        "detect",
        "--layout",
        &fixture("layouts/cross6.layout"),
        "--frames",
        &fixture("frames/s02_stationary_cross_queue.txt"),
        "--out",
        path(out.path()),
        "--moving-threshold",
        "0",
    ]);
    assert_eq!(run.status.code(), Some(1));
}

#[test]
fn generate_detect_evaluate_is_perfect_on_noise_free_scenarios() {
    for scenario in scenario_paths() {
        let dir = TempDir::new().unwrap();
        let gen = dir.path().join("gen");
        let det = dir.path().join("det");
        let eval = dir.path().join("eval");
        let run = exposure(&["generate", "--scenario", path(&scenario), "--out", path(&gen)]);
        assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
        let text = fs::read_to_string(&scenario).unwrap();
        let layout_ref = text
            .split_whitespace()
            .find_map(|t| t.strip_prefix("layout="))
            .unwrap();
        let layout = scenario.parent().unwrap().join(layout_ref);
        let run = exposure(&[
            "detect",
            "--layout",
            path(&layout),
            "--frames",
            path(&gen.join("frames.txt")),
            "--out",
            path(&det),
        ]);
        assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
        let run = exposure(&[
            "evaluate",
            "--flags",
            path(&det.join("flags.csv")),
            "--annotations",
            path(&gen.join("annotations.csv")),
            "--out",
            path(&eval),
        ]);
        assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
        let scores = fs::read_to_string(eval.join("scores.csv")).unwrap();
        let mut lines = scores.lines();
        assert_eq!(
            lines.next(),
            Some("stream,target,TP,FP,FN,recall_pct,precision_pct")
        );
        let mut rows = 0;
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!((cells[3], cells[4]), ("0", "0"), "{}: {line}", scenario.display());
            rows += 1;
        }
        assert_eq!(rows, 4);
    }
}

#[test]
fn detect_straight_from_a_scenario() {
    let dir = TempDir::new().unwrap();
    let run = exposure(&[
        "detect",
        "--layout",
        &fixture("layouts/cross6.layout"),
        "--scenario",
        &fixture("scenarios/s03_cross_queue_starts_moving.scn"),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.contains("A,0,3600,5,0,5,3\n"), "{report}");
}

#[test]
fn evaluate_rejects_disjoint_domains() {
    let dir = TempDir::new().unwrap();
    let flags = dir.path().join("flags.csv");
    let annotations = dir.path().join("annotations.csv");
    fs::write(
        &flags,
        "t,stream,crossing,critical,critical_moving\n0,A,1,1,0\n1,A,0,0,0\n",
    )
    .unwrap();
    fs::write(
        &annotations,
        "t,stream,truth_critical,truth_critical_moving\n5,A,1,0\n6,A,0,0\n",
    )
    .unwrap();
    let run = exposure(&[
        "evaluate",
        "--flags",
        path(&flags),
        "--annotations",
        path(&annotations),
        "--target",
        "Y",
        "--out",
        path(&dir.path().join("eval")),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("different seconds"), "{}", stderr(&run));
}

#[test]
fn evaluate_single_target() {
    let dir = TempDir::new().unwrap();
    let flags = dir.path().join("flags.csv");
    let annotations = dir.path().join("annotations.csv");
    fs::write(
        &flags,
        "t,stream,crossing,critical,critical_moving\n0,A,1,1,0\n1,A,1,1,1\n2,A,0,0,0\n",
    )
    .unwrap();
    fs::write(
        &annotations,
        "t,stream,truth_critical,truth_critical_moving\n0,A,1,1\n1,A,1,0\n2,A,1,0\n",
    )
    .unwrap();
    let run = exposure(&[
        "evaluate",
        "--flags",
        path(&flags),
        "--annotations",
        path(&annotations),
        "--target",
        "Ym",
        "--out",
        path(&dir.path().join("eval")),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let scores = fs::read_to_string(dir.path().join("eval/scores.csv")).unwrap();
    assert_eq!(
        scores,
        "stream,target,TP,FP,FN,recall_pct,precision_pct\nA,Ym,0,1,1,0,0\n"
    );
}

#[test]
fn report_reproduces_table_one() {
    let run = exposure(&["report", "--counts", &fixture("table1_counts.csv")]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let stdout = String::from_utf8(run.stdout).unwrap();
    let printed = fs::read_to_string(fixtures().join("table1_printed.csv")).unwrap();
    let got: Vec<String> = stdout
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            format!("{},{},{},{}", c[0], c[1], c[5], c[6])
        })
        .collect();
    let want: Vec<&str> = printed.lines().skip(1).collect();
    assert_eq!(got, want);
}

#[test]
fn generate_rejects_collisions_and_accepts_empty_scenarios() {
    let dir = TempDir::new().unwrap();
    let layout = fixture("layouts/cross6.layout");
    let collide = dir.path().join("collide.scn");
    fs::write(
        &collide,
        format!(
            "[scenario] layout={layout} duration=6\n[signal] approach=A phases=G:0-6\n[signal] approach=B phases=R:0-6\n\
             [vehicle] id=a approach=A enter=0 lane=A0 head=1 cz=CZ:(0,0)-(1,1) dir=S\n\
             [vehicle] id=b approach=B enter=0 lane=B0 head=1 cz=CZ:(0,0)-(1,1) dir=E\n"
        ),
    )
    .unwrap();
    let run = exposure(&[
        "generate",
        "--scenario",
        path(&collide),
        "--out",
        path(&dir.path().join("c")),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("collide"), "{}", stderr(&run));

    let empty = dir.path().join("empty.scn");
    fs::write(
        &empty,
        format!("[scenario] layout={layout} duration=4\n[signal] approach=A phases=G:0-4\n[signal] approach=B phases=R:0-4\n"),
    )
    .unwrap();
    let out = dir.path().join("e");
    let run = exposure(&["generate", "--scenario", path(&empty), "--out", path(&out)]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    assert_eq!(
        fs::read_to_string(out.join("truth_report.csv")).unwrap(),
        "stream,period_start,period_end,Z,X,Y,Ym\nA,0,3600,0,0,0,0\nB,0,3600,0,0,0,0\n"
    );
    for name in ["frames.txt", "truth_flags.csv", "annotations.csv"] {
        assert!(out.join(name).exists());
    }
}

#[test]
fn seed_override_changes_only_noise() {
    let dir = TempDir::new().unwrap();
    let scenario = fixture("noisy_mixed.scn");
    let outputs: Vec<(String, String)> = ["3", "4"]
        .iter()
        .map(|seed| {
            let out = dir.path().join(seed);
            let run = exposure(&[
                "generate",
                "--scenario",
                &scenario,
                "--seed",
                seed,
                "--out",
                path(&out),
            ]);
            assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
            (
                fs::read_to_string(out.join("frames.txt")).unwrap(),
                fs::read_to_string(out.join("truth_flags.csv")).unwrap(),
            )
        })
        .collect();
    assert_ne!(outputs[0].0, outputs[1].0);
    assert_eq!(outputs[0].1, outputs[1].1);
    // Seed 3 is the scenario's own seed, which produced the fixture.
    assert_eq!(
        outputs[0].0,
        fs::read_to_string(fixtures().join("frames/noisy_mixed.txt")).unwrap()
    );
}
