use std::path::Path;
use std::process::{Command, Output};

use xmodal::ExperimentConfig;

fn xmodal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xmodal"))
        .args(args)
        .env_remove("XMODAL_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn count(haystack: &str, needle: &str) -> usize {
    haystack.matches(needle).count()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn default_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/cfg.json");
    let o = xmodal(&["default-config", "--out", p(&path)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = ExperimentConfig::load_validated(&path).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
    let text = read(path.parent().unwrap(), "cfg.json");
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["samples_per_condition_per_domain"], 30);
    assert_eq!(json["weights"]["lambda1"], 1.0);
    assert_eq!(json["weights"]["lambda2"], 0.5);

    let o = xmodal(&["default-config"]);
    assert_eq!(code(&o), 0);
    assert_eq!(ExperimentConfig::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap(), cfg);
}

#[test]
fn simulate_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = xmodal(&["simulate", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("360 records"), "{stdout}");

    assert_eq!(read(&out, "samples.csv").lines().count(), 361);
    assert_eq!(read(&out, "summary.csv").lines().count(), 7);
    assert_eq!(read(&out, "phi.csv").lines().count(), 3);

    let scatter = read(&out, "sample_scatter.svg");
    assert_eq!(count(&scatter, "class=\"star-marker\""), 6);
    assert_eq!(count(&scatter, "class=\"sample-point\""), 360);
    let heat = read(&out, "phi_heatmap.svg");
    assert_eq!(count(&heat, "class=\"cell\""), 6);
    assert!(read(&out, "mean_tradeoff.svg").contains("class=\"mean-marker\""));
}

#[test]
fn seeded_runs_are_identical_and_seeds_matter() {
    let dir = tempfile::tempdir().unwrap();
    let outs: Vec<_> = ["a", "b", "c"].iter().map(|n| dir.path().join(n)).collect();
    for (out, seed) in outs.iter().zip(["7", "7", "8"]) {
        assert_eq!(code(&xmodal(&["simulate", "--seed", seed, "--out", p(out)])), 0);
    }
    for f in ["samples.csv", "summary.csv", "phi.csv", "sample_scatter.svg", "phi_heatmap.svg", "mean_tradeoff.svg"] {
        assert_eq!(read(&outs[0], f), read(&outs[1], f), "{f}");
    }
    assert_ne!(read(&outs[0], "samples.csv"), read(&outs[2], "samples.csv"));
}

#[test]
fn env_seed_is_lowest_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str, seed_flag: Option<&str>, env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_xmodal"));
        cmd.args(["simulate", "--out", p(&dir.path().join(out))]);
        if let Some(s) = seed_flag {
            cmd.args(["--seed", s]);
        }
        match env {
            Some(v) => cmd.env("XMODAL_SEED", v),
            None => cmd.env_remove("XMODAL_SEED"),
        };
        assert_eq!(code(&cmd.output().unwrap()), 0);
        read(&dir.path().join(out), "samples.csv")
    };
    let env9 = run("env9", None, Some("9"));
    let flag9 = run("flag9", Some("9"), None);
    let flag_wins = run("flag_wins", Some("9"), Some("3"));
    let default = run("default", None, None);
    assert_eq!(env9, flag9);
    assert_eq!(flag_wins, flag9);
    assert_ne!(default, env9);
}

#[test]
fn sweep_rows_and_argmax_monotonicity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = xmodal(&["sweep", "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    let csv = read(&out, "phi_sweep.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(
        lines[0],
        "lambda2,text_brief,text_detailed,text_analogy,voice_brief,voice_detailed,voice_analogy"
    );
    assert_eq!(count(&read(&out, "sweep_heatmap.svg"), "class=\"cell\""), 60);

    // The winner's mean TCE never increases as λ₂ grows.
    let stdout = String::from_utf8(o.stdout).unwrap();
    let winners: Vec<&str> = stdout.lines().map(|l| l.rsplit(' ').next().unwrap()).collect();
    assert_eq!(winners.len(), 10);
    let rs = xmodal::run_protocol(&ExperimentConfig::default()).unwrap();
    let tce_of = |label: &str| {
        rs.summaries
            .iter()
            .find(|s| s.condition().label() == label)
            .unwrap_or_else(|| panic!("{label}"))
            .mean_tce
    };
    for pair in winners.windows(2) {
        assert!(tce_of(pair[1]) <= tce_of(pair[0]), "{pair:?}");
    }
    assert_eq!(winners[0], "Text–Detailed");
    assert_eq!(winners[9], "Voice–Analogy");
}

#[test]
fn sweep_override_single_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one");
    assert_eq!(code(&xmodal(&["sweep", "--lambda2", "0.5:0.5:0.1", "--out", p(&out)])), 0);
    assert_eq!(read(&out, "phi_sweep.csv").lines().count(), 2);
    assert_eq!(count(&read(&out, "sweep_heatmap.svg"), "class=\"cell\""), 6);
}

#[test]
fn report_writes_density_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep");
    assert_eq!(code(&xmodal(&["report", "--out", p(&out)])), 0);
    for f in ["kde_ce.svg", "kde_tce.svg", "phi_sweep.csv", "samples.csv", "sample_scatter.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_eq!(count(&read(&out, "kde_tce.svg"), "class=\"density\""), 2);
}

#[test]
fn usage_and_config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&xmodal(&["simulate", "--seed", "abc"])), 1);
    assert_eq!(code(&xmodal(&["frobnicate"])), 1);
    assert_eq!(code(&xmodal(&["sweep", "--lambda2", "0.1:1.0", "--out", p(dir.path())])), 1);
    assert_eq!(code(&xmodal(&["--help"])), 0);

    let bad = dir.path().join("bad.json");
    let mut cfg = ExperimentConfig::default();
    cfg.modality_params.text.alpha = 0.0;
    std::fs::write(&bad, cfg.to_json()).unwrap();
    let o = xmodal(&["simulate", "--config", p(&bad), "--out", p(&dir.path().join("x"))]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));

    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"master_seed": 1, "bogus": true}"#).unwrap();
    assert_eq!(code(&xmodal(&["simulate", "--config", p(&unknown)])), 1);

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&xmodal(&["simulate", "--config", p(&missing)])), 2);
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = xmodal(&["simulate", "--out", p(&blocker.join("sub"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn ingest_scores_rows_and_skips_zero_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("loans.csv");
    std::fs::write(
        &input,
        "income,debt,age,util,inq\n\
         0.4,-0.2,0.1,0.2,-0.1\n\
         0.1,0.1,-0.3,0.3,0.2\n\
         0,0,0,0,0\n\
         -0.5,0.25,0.15,0.05,0.05\n\
         0.2,0.2,0.2,-0.2,0.2\n\
         0.01,0.3,-0.09,0.4,0.2\n",
    )
    .unwrap();
    let out = dir.path().join("ing");
    let o = xmodal(&["ingest", p(&input), "--modality", "voice", "--style", "analogy", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let samples = read(&out, "samples.csv");
    assert_eq!(samples.lines().count(), 6);
    assert!(samples.lines().skip(1).all(|l| l.starts_with("loans,voice,analogy,")));
    assert_eq!(read(&out, "summary.csv").lines().count(), 2);
    let report: serde_json::Value = serde_json::from_str(&read(&out, "ingest_report.json")).unwrap();
    assert_eq!(report["skipped_degenerate"], serde_json::json!([2]));
    assert_eq!(report["trust_simulated"], true);
    assert_eq!(report["records"], 5);

    let again = dir.path().join("ing2");
    xmodal(&["ingest", p(&input), "--modality", "voice", "--style", "analogy", "--out", p(&again)]);
    assert_eq!(read(&out, "samples.csv"), read(&again, "samples.csv"));
}

#[test]
fn ingest_errors_carry_context() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    let o = xmodal(&["ingest", p(&missing), "--modality", "text", "--style", "brief"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.csv"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b,c\n0.1,0.2,0.3\n0.1,oops,0.3\n").unwrap();
    let o = xmodal(&["ingest", p(&bad), "--modality", "text", "--style", "brief", "--out", p(dir.path())]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.csv") && err.contains("oops"), "{err}");

    assert_eq!(code(&xmodal(&["ingest", p(&bad), "--modality", "radio", "--style", "brief"])), 1);
}
