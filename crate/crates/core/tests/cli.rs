use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tactile(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tactile"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate(dir: &Path, task: &str, mode: &str, trials: &str) -> std::path::PathBuf {
    let out = dir.join(format!("{task}_{mode}.jsonl"));
    let o = tactile(&[
        "simulate",
        "--task",
        task,
        "--mode",
        mode,
        "--trials",
        trials,
        "--seed",
        "7",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

fn extract(dir: &Path, corpus: &Path) -> std::path::PathBuf {
    let out = dir.join(format!(
        "{}.csv",
        corpus.file_stem().unwrap().to_str().unwrap()
    ));
    let o = tactile(&["extract", "--in", p(corpus), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn simulate_line_counts_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let texture = simulate(dir.path(), "texture", "fc", "60");
    let text = fs::read_to_string(&texture).unwrap();
    assert_eq!(text.lines().count(), 480);
    let again = dir.path().join("again.jsonl");
    let o = tactile(&[
        "simulate",
        "--task",
        "texture",
        "--mode",
        "fc",
        "--trials",
        "60",
        "--seed",
        "7",
        "--out",
        p(&again),
    ]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("480"));
    assert_eq!(fs::read(&again).unwrap(), text.as_bytes());

    let stiff = simulate(dir.path(), "stiffness", "ac", "1");
    let text = fs::read_to_string(stiff).unwrap();
    assert_eq!(text.lines().count(), 5);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["kind"], "stiffness");
    assert_eq!(first["mode"], "AC");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        code(&tactile(&["simulate", "--task", "smell", "--out", "x"])),
        2
    );
    assert_eq!(code(&tactile(&["frobnicate"])), 2);
    assert_eq!(code(&tactile(&["--help"])), 0);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"noise_sigma_n": -1.0}"#).unwrap();
    let o = tactile(&[
        "simulate",
        "--task",
        "texture",
        "--config",
        p(&cfg),
        "--out",
        p(&dir.path().join("c.jsonl")),
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn simulate_io_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = tactile(&[
        "simulate",
        "--task",
        "stiffness",
        "--trials",
        "1",
        "--out",
        p(&blocker.join("c.jsonl")),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn extract_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let tex = extract(dir.path(), &simulate(dir.path(), "texture", "fc", "60"));
    let text = fs::read_to_string(tex).unwrap();
    assert_eq!(text.lines().count(), 481);
    assert!(text.lines().all(|l| l.split(',').count() == 92));
    assert!(text.starts_with("freq_0.00,freq_0.33,"));

    let stiff = extract(dir.path(), &simulate(dir.path(), "stiffness", "fc", "60"));
    let text = fs::read_to_string(stiff).unwrap();
    assert_eq!(text.lines().count(), 301);
    assert_eq!(text.lines().next().unwrap(), "slope,intercept,r,label");
}

#[test]
fn extract_rejects_mixed_and_short_corpora() {
    let dir = tempfile::tempdir().unwrap();
    let tex = fs::read_to_string(simulate(dir.path(), "texture", "fc", "1")).unwrap();
    let stiff = fs::read_to_string(simulate(dir.path(), "stiffness", "fc", "1")).unwrap();
    let mixed = dir.path().join("mixed.jsonl");
    fs::write(&mixed, format!("{tex}{stiff}")).unwrap();
    let o = tactile(&[
        "extract",
        "--in",
        p(&mixed),
        "--out",
        p(&dir.path().join("m.csv")),
    ]);
    assert_eq!(code(&o), 4);
    let first_stiff: Value = serde_json::from_str(stiff.lines().next().unwrap()).unwrap();
    assert!(
        stderr(&o).contains(first_stiff["id"].as_str().unwrap()),
        "{}",
        stderr(&o)
    );

    let short = dir.path().join("short.jsonl");
    let record = r#"{"id":"tiny-01","kind":"texture","mode":"FC","label":"F","fs_hz":60.0,"samples":[1.0,2.0,3.0]}"#;
    fs::write(&short, format!("{record}\n")).unwrap();
    let o = tactile(&[
        "extract",
        "--in",
        p(&short),
        "--out",
        p(&dir.path().join("s.csv")),
    ]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("tiny-01"), "{}", stderr(&o));

    let broken = dir.path().join("broken.jsonl");
    fs::write(&broken, "{not json\n").unwrap();
    assert_eq!(
        code(&tactile(&[
            "extract",
            "--in",
            p(&broken),
            "--out",
            p(&dir.path().join("b.csv"))
        ])),
        4
    );
    assert_eq!(
        code(&tactile(&[
            "extract",
            "--in",
            p(&dir.path().join("none.jsonl")),
            "--out",
            "x.csv"
        ])),
        3
    );
}

#[test]
fn evaluate_report_shape_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let feats = extract(dir.path(), &simulate(dir.path(), "stiffness", "fc", "12"));
    let report = dir.path().join("report.json");
    let args = [
        "evaluate",
        "--features",
        p(&feats),
        "--runs",
        "10",
        "--seed",
        "3",
        "--out",
        p(&report),
    ];
    let o = tactile(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let first = fs::read(&report).unwrap();
    let json: Value = serde_json::from_slice(&first).unwrap();
    let models = json["models"].as_array().unwrap();
    assert_eq!(models.len(), 4);
    for m in models {
        let runs: Vec<f64> = m["run_accuracies"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert_eq!(runs.len(), 10);
        let mean = runs.iter().sum::<f64>() / 10.0;
        assert!((mean - m["mean_accuracy"].as_f64().unwrap()).abs() <= 1e-12);
    }
    assert_eq!(json["task"], "stiffness");
    assert_eq!(json["config"]["k"], 6);

    assert_eq!(code(&tactile(&args)), 0);
    assert_eq!(fs::read(&report).unwrap(), first);

    let knn_only = dir.path().join("knn.json");
    let o = tactile(&[
        "evaluate",
        "--features",
        p(&feats),
        "--models",
        "knn",
        "--runs",
        "1",
        "--out",
        p(&knn_only),
    ]);
    assert_eq!(code(&o), 0);
    let json: Value = serde_json::from_slice(&fs::read(&knn_only).unwrap()).unwrap();
    assert_eq!(json["models"].as_array().unwrap().len(), 1);

    // 12 rows per class cannot be dealt into 13 folds
    let o = tactile(&[
        "evaluate",
        "--features",
        p(&feats),
        "--k",
        "13",
        "--out",
        p(&knn_only),
    ]);
    assert_eq!(code(&o), 5, "{}", stderr(&o));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "slope,intercept,r,label\n1.0,2.0,PLA\n").unwrap();
    let o = tactile(&["evaluate", "--features", p(&bad), "--out", p(&knn_only)]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stderr(&o).contains(":2"), "{}", stderr(&o));
}

#[test]
fn significance_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let tex = extract(dir.path(), &simulate(dir.path(), "texture", "fc", "10"));
    let out = dir.path().join("sig.csv");
    let o = tactile(&["significance", "--features", p(&tex), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 92);
    assert!(text.lines().all(|l| l.split(',').count() == 30));
    let dc = text.lines().nth(1).unwrap();
    assert!(dc.starts_with("freq_0.00,1,"), "{dc}");

    let stiff = extract(dir.path(), &simulate(dir.path(), "stiffness", "fc", "10"));
    let o = tactile(&["significance", "--features", p(&stiff), "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().all(|l| l.split(',').count() == 12));

    let single = dir.path().join("single.csv");
    fs::write(
        &single,
        "slope,intercept,r,label\n1,2,0.5,PLA\n1.5,2,0.5,PLA\n",
    )
    .unwrap();
    assert_eq!(
        code(&tactile(&[
            "significance",
            "--features",
            p(&single),
            "--out",
            p(&out)
        ])),
        5
    );
}

#[test]
fn report_writes_charts() {
    let dir = tempfile::tempdir().unwrap();
    let feats = extract(dir.path(), &simulate(dir.path(), "stiffness", "ac", "6"));
    let report = dir.path().join("report.json");
    let sig = dir.path().join("sig.csv");
    assert_eq!(
        code(&tactile(&[
            "evaluate",
            "--features",
            p(&feats),
            "--runs",
            "2",
            "--mode",
            "ac",
            "--out",
            p(&report)
        ])),
        0
    );
    assert_eq!(
        code(&tactile(&[
            "significance",
            "--features",
            p(&feats),
            "--out",
            p(&sig)
        ])),
        0
    );

    let plot = dir.path().join("acc.svg");
    let o = tactile(&["report", "--in", p(&report), "--plot", p(&plot)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let svg = fs::read_to_string(&plot).unwrap();
    assert_eq!(svg.matches("<title>").count(), 4);
    for m in ["knn", "svm-linear", "svm-rbf", "dtree"] {
        assert!(svg.contains(m));
        assert!(String::from_utf8_lossy(&o.stdout).contains(m));
    }

    let o = tactile(&[
        "report",
        "--in",
        p(&report),
        "--significance",
        p(&sig),
        "--plot",
        p(&plot),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let svgs = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "svg")
        })
        .count();
    assert_eq!(svgs, 2);

    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{\n  \"task\": \"texture\",\n  oops\n}").unwrap();
    let o = tactile(&["report", "--in", p(&broken), "--plot", p(&plot)]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn convert_ingests_time_series() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("tap.csv");
    let mut text = String::from("time_s,strain_n\n");
    for i in 0..400 {
        let t = i as f64 / 60.0;
        let s = if (30..330).contains(&i) {
            10.0 - 0.5 * t
        } else {
            0.0
        };
        text.push_str(&format!("{t},{s}\n"));
    }
    fs::write(&raw, text).unwrap();
    let corpus = dir.path().join("real.jsonl");
    let o = tactile(&[
        "convert",
        "--in",
        p(&raw),
        "--kind",
        "stiffness",
        "--label",
        "PLA",
        "--out",
        p(&corpus),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = tactile(&[
        "convert",
        "--in",
        p(&raw),
        "--kind",
        "stiffness",
        "--label",
        "NONE",
        "--id",
        "second",
        "--append",
        "--out",
        p(&corpus),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let lines: Vec<Value> = fs::read_to_string(&corpus)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["id"], "tap");
    assert!((lines[0]["fs_hz"].as_f64().unwrap() - 60.0).abs() < 1e-6);
    let feats = extract(dir.path(), &corpus);
    assert!(fs::read_to_string(feats).unwrap().contains("PLA"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "time_s,strain_n\n0,1\n0.1,2\n0.5,3\n").unwrap();
    let o = tactile(&[
        "convert",
        "--in",
        p(&bad),
        "--kind",
        "stiffness",
        "--label",
        "PLA",
        "--out",
        p(&corpus),
    ]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn pipeline_small_run_and_unwritable_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = tactile(&[
        "pipeline",
        "--seed",
        "7",
        "--trials",
        "6",
        "--runs",
        "1",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 17);
    for group in ["texture_fc", "texture_ac", "stiffness_fc", "stiffness_ac"] {
        for f in [
            "corpus.jsonl",
            "features.csv",
            "report.json",
            "significance.csv",
            "accuracy.svg",
            "accuracy_significance.svg",
        ] {
            assert!(out.join(group).join(f).is_file(), "{group}/{f}");
        }
    }

    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let o = tactile(&["pipeline", "--seed", "7", "--out", p(&blocker.join("sub"))]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}
