use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gasfc_core::synthetic::{generate, SyntheticConfig};

fn gasfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gasfc")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Small raw dump: one block every 13 s, a few transactions each, and
/// minute price ticks covering the same period.
fn write_dump(dir: &Path, blocks: usize) -> (PathBuf, PathBuf, PathBuf) {
    let t0 = 1_636_156_800i64;
    let mut tx = String::from("block_number,timestamp,gas_price_gwei,is_contract\n");
    let mut bl = String::from("block_number,timestamp,base_fee_gwei,gas_used,size_gas,size_bytes\n");
    for b in 0..blocks {
        let ts = t0 + 13 * b as i64;
        let base = 50.0 + 20.0 * ((b as f64) / 40.0).sin();
        writeln!(bl, "{},{ts},{},{},30000000,{}", 1000 + b, base, 12_000_000 + b * 10, 40_000 + b).unwrap();
        if b % 17 == 5 {
            continue;
        }
        for k in 0..4 {
            writeln!(tx, "{},{ts},{},{}", 1000 + b, base + 1.5 * k as f64 + (b % 3) as f64, k % 2).unwrap();
        }
    }
    tx.push_str("9999,oops,1,0\n");
    let mut ticks = String::from("open_time_ms,open\n");
    let minutes = (13 * blocks as i64) / 60 + 1;
    for m in 0..minutes {
        writeln!(ticks, "{},{}", (t0 + 60 * m) * 1000, 4000.0 + (m as f64 / 7.0).cos() * 30.0).unwrap();
    }
    let (t, b, k) = (dir.join("tx.csv"), dir.join("blocks.csv"), dir.join("ticks.csv"));
    fs::write(&t, tx).unwrap();
    fs::write(&b, bl).unwrap();
    fs::write(&k, ticks).unwrap();
    (t, b, k)
}

#[test]
fn data_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (tx, blocks, ticks) = write_dump(d, 2000);
    let feats = d.join("features.csv");
    let o = gasfc(&["ingest", "--transactions", p(&tx), "--blocks", p(&blocks), "--out", p(&feats)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("blocks=2000"), "{s}");
    assert!(s.contains("rejected_transactions=1"), "{s}");

    let frame = d.join("frame.csv");
    let o = gasfc(&["frame", "--features", p(&feats), "--ticks", p(&ticks), "--out", p(&frame)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("eth_price"));
    let f = gasfc_core::FeatureFrame::load(&frame).unwrap();
    assert_eq!(f.step(), 300);
    assert_eq!(f.len(), (13 * 1999 / 300 + 1) as usize);

    let den = d.join("den.csv");
    let o = gasfc(&["denoise", "--frame", p(&frame), "--variable", "base_fee", "--out", p(&den)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("rmse="));

    let mp = d.join("mp.txt");
    let o = gasfc(&["mp", "--frame", p(&frame), "--variable", "base_fee", "--window", "8", "--out", p(&mp)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let prof = gasfc_core::matrix_profile::MatrixProfile::load(&mp).unwrap();
    assert_eq!(prof.len(), f.len() - 7);

    let roll = d.join("roll");
    let o = gasfc(&[
        "mp", "--frame", p(&frame), "--variable", "base_fee", "--window", "8", "--rolling", "--step", "20", "--out",
        p(&roll),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_dir(&roll).unwrap().count() >= 4);

    let coh = d.join("coh.csv");
    let o = gasfc(&["coherence", "--frame", p(&frame), "--x", "base_fee", "--y", "base_fee", "--out", p(&coh)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let grid = gasfc_core::wavelets::read_coherence(&coh).unwrap();
    assert_eq!(grid.times.len(), f.len());

    let geth = d.join("geth.csv");
    let o = gasfc(&["baseline", "--features", p(&feats), "--kind", "geth", "--out", p(&geth)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lines = fs::read_to_string(&geth).unwrap().lines().count();
    assert!(lines > 1800);

    let o = gasfc(&["baseline", "--features", p(&feats), "--kind", "gse", "--out", p(&geth)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&gasfc(&[])), 1);
    assert_eq!(code(&gasfc(&["frobnicate"])), 1);
    assert_eq!(code(&gasfc(&["ingest", "--blocks", "x"])), 1);
    assert_eq!(code(&gasfc(&["--help"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = gasfc(&["frame", "--features", p(&missing), "--out", p(&dir.path().join("f.csv"))]);
    assert_eq!(code(&o), 2);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "block_number,timestamp\n1,2\n").unwrap();
    let o = gasfc(&["ingest", "--transactions", p(&bad), "--blocks", p(&bad), "--out", p(&missing)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("gas_price_gwei"));
}

fn small_experiment(dir: &Path, extra: &str) -> PathBuf {
    let frame = generate(&SyntheticConfig {
        days: 3,
        ..SyntheticConfig::default()
    })
    .unwrap();
    frame.save(&dir.join("frame.csv")).unwrap();
    let cfg = dir.join("exp.toml");
    fs::write(
        &cfg,
        format!(
            "seed = 11\n[data]\nframe = \"frame.csv\"\n[strategy]\nstrategy = \"hybrid\"\nhorizon = 3\n\
             input_len = 12\nunits = [4]\nepochs = 2\nvariables = [\"base_fee\"]\n{extra}"
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn run_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_experiment(dir.path(), "");
    let out = dir.path().join("run");
    let o = gasfc(&["run", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.starts_with("seed=11\nstatus=ok\n"), "{manifest}");
    for f in ["config.toml", "forecasts.csv", "lookahead_report.csv", "strategy.json", "train_reports.json"] {
        assert!(manifest.contains(&format!("  {f}\n")), "{f} not in manifest");
    }
    assert_eq!(manifest.matches("models/span000/model").count(), 3);

    let table = fs::read_to_string(out.join("lookahead_report.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("Variable,RMSE,MAE,MAPE,R2"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 + 1);
    assert!(rows[0].starts_with("min_gas_price +5min,"));

    let o = gasfc(&["evaluate", p(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), table);

    let again = dir.path().join("again");
    let o = gasfc(&["run", "--config", p(&out.join("config.toml")), "--out", p(&again)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(again.join("manifest.txt")).unwrap(), manifest);
}

#[test]
fn failed_run_keeps_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_experiment(dir.path(), "learning_rate = 1e300\n");
    let out = dir.path().join("run");
    let o = gasfc(&["run", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("status=failed\nstage=train\n"), "{manifest}");
    assert!(manifest.contains("  config.toml\n"));
}

#[test]
fn config_errors_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_experiment(dir.path(), "bogus_key = 1\n");
    let o = gasfc(&["run", "--config", p(&cfg), "--out", p(&dir.path().join("r"))]);
    assert_eq!(code(&o), 1);

    let cfg = small_experiment(dir.path(), "");
    let o = gasfc(&["run", "--config", p(&cfg)]);
    assert_eq!(code(&o), 1, "no output directory");

    fs::write(dir.path().join("frame.csv"), "garbage\n").unwrap();
    let o = gasfc(&["run", "--config", p(&cfg), "--out", p(&dir.path().join("r"))]);
    assert_eq!(code(&o), 2);
    let m = fs::read_to_string(dir.path().join("r/manifest.txt")).unwrap();
    assert!(m.contains("stage=load"), "{m}");
}
