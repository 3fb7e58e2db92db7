use std::process::Command;

use faithkit::oracles::{hit_stats_budget, HitStatistics};
use faithkit::report::MetricReport;
use faithkit::Result;
use faithkit_cli::commands::{cmd_evaluate, cmd_generate, cmd_simulate, cmd_verify, cmd_verify_with, SPLIT_FILES};
use faithkit_cli::config::{RunConfig, ALL_CHECKS};

fn small_config(seed: u64) -> RunConfig {
    let mut cfg = RunConfig::with_seed(seed);
    cfg.dataset.counts = [10, 6, 6];
    cfg
}

#[test]
fn generate_is_byte_identical_and_counts_match() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = RunConfig::with_seed(5);
    let m = cmd_generate(&cfg, a.path()).unwrap();
    cmd_generate(&cfg, b.path()).unwrap();
    assert_eq!((m.counts.train, m.counts.id_test, m.counts.ood_test), (60, 20, 20));
    for name in SPLIT_FILES.iter().chain(["manifest.json"].iter()) {
        let x = std::fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let lines = std::fs::read_to_string(a.path().join("train.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 60);
}

#[test]
fn manifest_hash_tracks_the_config() {
    let base = RunConfig::with_seed(5);
    let mut other = base.clone();
    other.dataset.counts[0] += 1;
    assert_ne!(base.hash(), other.hash());
    let mut threads = base.clone();
    threads.workers = 8;
    assert_eq!(base.hash(), threads.hash());
}

#[test]
fn evaluate_ignores_worker_count() {
    let mut cfg = small_config(9);
    cfg.model.name = "modular".into();
    cfg.model.detector = "leaky".into();
    cfg.model.complement_score = 0.4;
    cfg.model.masking = "soft".into();
    cfg.dataset.features = "seeded-random".into();
    cfg.dataset.feature_dim = 3;
    let one = cmd_evaluate(&cfg).unwrap().to_csv();
    for w in [2, 5] {
        cfg.workers = w;
        assert_eq!(cmd_evaluate(&cfg).unwrap().to_csv(), one);
    }
}

#[test]
fn constant_classifier_scores_zero_faith() {
    let mut cfg = small_config(1);
    cfg.model.name = "constant".into();
    let report = cmd_evaluate(&cfg).unwrap();
    assert_eq!(report.rows.len(), 22);
    for r in &report.rows {
        assert_eq!(r.nec_n, Some(0.0));
        assert_eq!(r.faith, Some(0.0));
    }
}

#[test]
fn motif_classifier_on_ground_truth_is_sufficient() {
    let cfg = small_config(2);
    let report = cmd_evaluate(&cfg).unwrap();
    // small cuts may split the motif; a 0.9 cut covers it on every graph
    let mut full = cfg.clone();
    full.metrics.topk_ratios = vec![0.9];
    for r in cmd_evaluate(&full).unwrap().rows {
        assert_eq!(r.suf_n, Some(1.0));
    }
    assert!(report.rows.iter().all(|r| r.failures == 0));
}

#[test]
fn report_round_trips() {
    let report = cmd_evaluate(&small_config(3)).unwrap();
    let text = report.to_csv();
    assert_eq!(MetricReport::from_csv(&text).unwrap().to_csv(), text);
}

#[test]
fn q2_caps_the_evaluated_graphs() {
    let mut cfg = small_config(4);
    cfg.metrics.q2 = 5;
    let rows = cmd_evaluate(&cfg).unwrap().rows;
    assert_eq!(rows.len(), 5);
    let mut ids: Vec<_> = rows.iter().map(|r| r.graph_id).collect();
    ids.sort_unstable();
    ids.dedup();
    assert_eq!(ids.len(), 5);
}

#[test]
fn pristine_verify_passes_with_one_line_per_check() {
    let cfg = RunConfig::with_seed(0);
    let ledger = cmd_verify(&cfg).unwrap();
    assert!(ledger.passed(), "{}", ledger.render());
    assert_eq!(ledger.render().lines().count(), ALL_CHECKS.len());

    let mut two = cfg.clone();
    two.verify.checks = vec!["hit-counting".into(), "non-interchangeability".into()];
    assert_eq!(cmd_verify(&two).unwrap().render().lines().count(), 2);
}

#[test]
fn off_by_one_hit_count_fails_the_sensitivity_checks() {
    let broken = |m: u64, r: u64, b: u64| -> Result<HitStatistics> {
        // budget read one too high
        hit_stats_budget(m, r, (b + 1).min(m))
    };
    let mut cfg = RunConfig::with_seed(0);
    cfg.verify.checks = vec!["budget-sensitivity".into(), "hit-counting".into()];
    let ledger = cmd_verify_with(&cfg, &broken).unwrap();
    assert!(!ledger.passed());
    assert!(ledger.checks.iter().all(|c| !c.passed), "{}", ledger.render());
}

#[test]
fn simulate_tables_have_the_expected_shape() {
    let mut cfg = small_config(6);
    cfg.simulate.sweep_graphs = 4;
    let sim = cmd_simulate(&cfg).unwrap();
    let rows: Vec<&str> = sim.curves.lines().skip(1).collect();
    assert_eq!(rows.len(), 51 * 4);
    let flat: Vec<&str> = rows
        .iter()
        .filter(|r| r.starts_with("fraction-0.10,"))
        .filter(|r| {
            let i: u64 = r.split(',').nth(1).unwrap().parse().unwrap();
            (1..=14).contains(&i)
        })
        .map(|r| r.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(flat.len(), 14);
    assert_eq!(flat[0], "1");
    assert!(flat.windows(2).all(|w| w[0] == w[1]));
    let fixed: Vec<f64> = rows
        .iter()
        .filter(|r| r.starts_with("fixed-"))
        .map(|r| r.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(fixed.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(sim.sweep.lines().count(), 1 + cfg.simulate.sweep_ratios.len());
}

#[test]
fn binary_exit_status_follows_the_checks() {
    let bin = env!("CARGO_BIN_EXE_faithkit");
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "seed = 1\n[verify]\nchecks = [\"hit-counting\"]\n").unwrap();
    let ok = Command::new(bin)
        .args(["verify", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("PASS hit-counting"));
    assert!(dir.path().join("verify.txt").exists());

    std::fs::write(&config, "seed = 1\n[verify]\nchecks = [\"no-such-check\"]\n").unwrap();
    let bad = Command::new(bin).args(["verify", "--config"]).arg(&config).output().unwrap();
    assert!(!bad.status.success());

    let gen = Command::new(bin)
        .args(["generate", "--seed", "3", "--out"])
        .arg(dir.path().join("data"))
        .output()
        .unwrap();
    assert!(gen.status.success());
    assert!(dir.path().join("data/manifest.json").exists());
}
