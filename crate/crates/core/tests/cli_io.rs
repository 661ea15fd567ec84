use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bringhome::cli::{self, RunConfig};

const FAST: &str = "[sweep]\nt_start = 0.02\nt_end = 0.012\niteration_budget_per_duration = 3\nabort_fidelity = 0.0\n";

fn bringhome(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bringhome")).args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn gradcheck_exit_codes_follow_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = bringhome(&["gradcheck", "--out", out, "--rng-seed", "2"]);
    assert_eq!(code(&ok), cli::EXIT_OK, "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("gradcheck.txt").exists());
    assert!(dir.path().join(cli::EFFECTIVE_CONFIG).exists());

    let flipped = bringhome(&["gradcheck", "--out", out, "--mode", "sign_flipped"]);
    assert_eq!(code(&flipped), cli::EXIT_SIGN_DISAGREEMENT);
    let table = fs::read_to_string(dir.path().join("gradcheck.txt")).unwrap();
    assert!(table.contains("SIGN"));
}

#[test]
fn unknown_config_key_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[optimizer]\nlearning_rate = 1.0\n");
    let o = bringhome(&["gradcheck", &cfg]);
    assert_eq!(code(&o), cli::EXIT_CONFIG);
    assert!(String::from_utf8_lossy(&o.stderr).contains("learning_rate"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = bringhome(&["sweep", missing.to_str().unwrap()]);
    assert_eq!(code(&o), cli::EXIT_IO);
}

#[test]
fn zero_seeds_write_an_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res");
    let o = bringhome(&["sweep", "--seeds", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), cli::EXIT_OK);
    let table = fs::read_to_string(out.join("fidelity_table.tsv")).unwrap();
    assert_eq!(table.lines().count(), 1);
}

#[test]
fn analyze_on_empty_directory_reports_nothing_processable() {
    let dir = tempfile::tempdir().unwrap();
    let o = bringhome(&["analyze", dir.path().to_str().unwrap(), "--report", "table"]);
    assert_eq!(code(&o), cli::EXIT_NOTHING_PROCESSABLE);
}

#[test]
fn sweep_then_every_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res");
    let cfg = write_config(dir.path(), FAST);
    let o = bringhome(&["sweep", &cfg, "--seeds", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), cli::EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    fs::write(out.join("broken.json"), "{ not json").unwrap();

    let expected = [
        ("amplitude", "amplitude_trace.tsv"),
        ("heatmap", "heatmap_position.tsv"),
        ("strategies", "strategies.tsv"),
        ("table", "fidelity_table.tsv"),
    ];
    for (report, file) in expected {
        let target = dir.path().join(report);
        let o = bringhome(&["analyze", out.to_str().unwrap(), "--report", report, "--out", target.to_str().unwrap()]);
        assert_eq!(code(&o), cli::EXIT_OK, "{report}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(target.join(file).exists(), "{report}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("broken.json"));
    }
    let table = fs::read_to_string(dir.path().join("table/fidelity_table.tsv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "duration\tseed0\tseed1\tseed2\tbest");
    assert_eq!(table.lines().count(), 4);
    let heat = fs::read_to_string(dir.path().join("heatmap/heatmap_position.tsv")).unwrap();
    let total: u64 = heat.split_whitespace().map(|c| c.parse::<u64>().unwrap()).sum();
    assert_eq!(total, 3 * 85);
}

#[test]
fn seed_then_optimize_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("seeds");
    let o = bringhome(&["seed", "--seeds", "2", "--duration", "0.02", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), cli::EXIT_OK);
    let seed = out.join("seed_1.txt");
    assert!(seed.exists());

    let cfg = write_config(dir.path(), "[optimizer]\nmax_iterations = 4\n");
    let run = dir.path().join("run");
    let o = bringhome(&["optimize", &cfg, "--solution", seed.to_str().unwrap(), "--out", run.to_str().unwrap()]);
    assert_eq!(code(&o), cli::EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let problem = RunConfig::default().problem;
    let sol = cli::read_solution(&run.join("solution.txt"), &problem.tweezer).unwrap();
    assert_eq!(sol.n_steps(), 10);
}

#[test]
fn out_of_bounds_solution_is_rejected_with_row() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "duration=0.004\ndt=0.002\n0.1 -10\n0.2 -200\n").unwrap();
    let o = bringhome(&["optimize", "--solution", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), cli::EXIT_CONFIG);
    assert!(String::from_utf8_lossy(&o.stderr).contains("-200"));
}

#[test]
fn effective_config_reproduces_the_run_settings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), FAST);
    let out = dir.path().join("res");
    let o = bringhome(&["sweep", &cfg, "--seeds", "1", "--rng-seed", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), cli::EXIT_OK);
    let effective = RunConfig::load(&out.join(cli::EFFECTIVE_CONFIG)).unwrap();
    assert_eq!(effective.seeding.rng_seed, 9);
    assert_eq!(effective.sweep.t_start, 0.02);
    assert_eq!(effective.output_dir, out);
}
