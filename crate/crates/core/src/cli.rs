//! Run configuration, file formats and the command implementations behind
//! the `bringhome` binary.
//!
//! Every command writes into an output directory and echoes the fully
//! resolved configuration there as `effective_config.toml`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    classify_strategy, cluster_two, fidelity_duration_table, heatmap, sweep_amplitude_trace, DEFAULT_BINS,
    DEFAULT_MARGIN,
};
use crate::controls::ControlSequence;
use crate::gradient::{gradcheck, Channel, GradcheckTolerances};
use crate::optimizer::{
    kass_sweep, optimize_fixed_duration, player_variant_sweep, OptimizerConfig, SweepConfig, SweepResult,
    SweepTermination, Termination,
};
use crate::potential::{DerivativeMode, TweezerParams};
use crate::problem::{Problem, ProblemConfig};
use crate::seeding::{hilo_heuristic_seed, seed, uniform_controls, SeedConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_SIGN_DISAGREEMENT: i32 = 4;
pub const EXIT_NOTHING_PROCESSABLE: i32 = 5;

pub const EFFECTIVE_CONFIG: &str = "effective_config.toml";
/// Duration at which heatmaps and clusterings are taken.
pub const ANALYSIS_DURATION: f64 = 0.17;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config {path}: {message}")]
    Config { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {}", problems.join("; "))]
    Solution { path: PathBuf, problems: Vec<String> },
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("{0}")]
    NothingProcessable(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Solution { .. } => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(crate::Error::NumericalBlowup { .. } | crate::Error::Convergence { .. }) => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_CONFIG,
            CliError::NothingProcessable(_) => EXIT_NOTHING_PROCESSABLE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradcheckSettings {
    pub duration: f64,
    pub tolerances: GradcheckTolerances,
}

impl Default for GradcheckSettings {
    fn default() -> Self {
        GradcheckSettings {
            duration: 0.1,
            tolerances: GradcheckTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub problem: ProblemConfig,
    pub optimizer: OptimizerConfig,
    pub sweep: SweepConfig,
    pub seeding: SeedConfig,
    pub gradcheck: GradcheckSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: PathBuf::from("results"),
            problem: ProblemConfig::default(),
            optimizer: OptimizerConfig::default(),
            sweep: SweepConfig::default(),
            seeding: SeedConfig::default(),
            gradcheck: GradcheckSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    fn write_effective(&self, dir: &Path) -> CliResult<()> {
        write_file(&dir.join(EFFECTIVE_CONFIG), &self.to_toml())
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_file(path, &serde_json::to_string_pretty(value).expect("results always serialize"))
}

/// `duration=`, `dt=` header lines followed by `position amplitude` rows.
pub fn format_solution(c: &ControlSequence) -> String {
    let mut out = format!("duration={}\ndt={}\n", c.duration, c.dt);
    for (p, a) in c.positions.iter().zip(&c.amplitudes) {
        let _ = writeln!(out, "{p} {a}");
    }
    out
}

pub fn write_solution(path: &Path, c: &ControlSequence) -> CliResult<()> {
    write_file(path, &format_solution(c))
}

/// Parses a solution file, collecting every malformed row before failing.
pub fn parse_solution(text: &str, bounds: &TweezerParams) -> std::result::Result<ControlSequence, Vec<String>> {
    let mut problems = Vec::new();
    let mut duration = None;
    let mut dt = None;
    let mut positions = Vec::new();
    let mut amplitudes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            let slot = match key.trim() {
                "duration" => &mut duration,
                "dt" => &mut dt,
                other => {
                    problems.push(format!("line {row}: unknown header key `{other}`"));
                    continue;
                }
            };
            match value.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => *slot = Some(v),
                _ => problems.push(format!("line {row}: header `{}` is not a finite number", key.trim())),
            }
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            problems.push(format!("line {row}: expected 2 columns, found {}", cols.len()));
            continue;
        }
        let parsed: Vec<Option<f64>> = cols.iter().map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite())).collect();
        let (Some(p), Some(a)) = (parsed[0], parsed[1]) else {
            problems.push(format!("line {row}: non-finite or unparsable value"));
            continue;
        };
        if !(bounds.position_min..=bounds.position_max).contains(&p) {
            problems.push(format!(
                "line {row}: position {p} outside [{}, {}]",
                bounds.position_min, bounds.position_max
            ));
        }
        if !(bounds.amplitude_min..=bounds.amplitude_max).contains(&a) {
            problems.push(format!(
                "line {row}: amplitude {a} outside [{}, {}]",
                bounds.amplitude_min, bounds.amplitude_max
            ));
        }
        positions.push(p);
        amplitudes.push(a);
    }
    let (Some(duration), Some(dt)) = (duration, dt) else {
        problems.push("missing `duration=` or `dt=` header".into());
        return Err(problems);
    };
    if !problems.is_empty() {
        return Err(problems);
    }
    ControlSequence::new(duration, dt, positions, amplitudes).map_err(|e| vec![e.to_string()])
}

pub fn read_solution(path: &Path, bounds: &TweezerParams) -> CliResult<ControlSequence> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_solution(&text, bounds).map_err(|problems| CliError::Solution {
        path: path.to_path_buf(),
        problems,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// Full sweep from seeds of the configured kind.
    Kass,
    /// Frozen amplitudes, enlarged budget, starting at the seed duration.
    Player,
    /// Full-power heuristic seeds.
    Hilo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Amplitude,
    Heatmap,
    Strategies,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration; defaults apply when omitted.
    pub config: Option<PathBuf>,
    /// Amplitude derivative convention (`correct` or `sign_flipped`).
    #[arg(long)]
    pub mode: Option<DerivativeMode>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
}

impl CommonArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.mode {
            cfg.optimizer.mode = m;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        if let Some(s) = self.rng_seed {
            cfg.seeding.rng_seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Parser)]
#[command(name = "bringhome", version, about = "Tweezer transport optimal control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare the analytic gradient with finite differences.
    Gradcheck(CommonArgs),
    /// Run duration sweeps for several seeds.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[arg(long, value_enum, default_value_t = Variant::Kass)]
        variant: Variant,
    },
    /// Optimize at a single duration.
    Optimize {
        #[command(flatten)]
        common: CommonArgs,
        /// Start from this solution file instead of a generated seed.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Duration of the generated seed; defaults to the sweep start.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Summarize sweep results stored in a directory.
    Analyze {
        results_dir: PathBuf,
        #[arg(long, value_enum)]
        report: Report,
        /// Where to write the report; defaults to the results directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write seed solution files.
    Seed {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        #[arg(long)]
        duration: Option<f64>,
    },
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Gradcheck(common) => common.resolve().and_then(|cfg| cmd_gradcheck(&cfg)).map(|s| s.exit_code()),
        Command::Sweep {
            common,
            seeds,
            variant,
        } => common
            .resolve()
            .and_then(|cfg| cmd_sweep(&cfg, seeds, variant))
            .map(|s| s.exit_code()),
        Command::Optimize {
            common,
            solution,
            duration,
        } => common
            .resolve()
            .and_then(|cfg| cmd_optimize(&cfg, solution.as_deref(), duration))
            .map(|_| EXIT_OK),
        Command::Analyze {
            results_dir,
            report,
            out,
        } => cmd_analyze(&results_dir, report, out.as_deref()).map(|s| {
            for skip in &s.skipped {
                eprintln!("skipped {skip}");
            }
            EXIT_OK
        }),
        Command::Seed {
            common,
            seeds,
            duration,
        } => common
            .resolve()
            .and_then(|cfg| cmd_seed(&cfg, seeds, duration))
            .map(|_| EXIT_OK),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Debug, Clone)]
pub struct GradcheckSummary {
    pub report_path: PathBuf,
    pub sign_disagreements: usize,
    pub amplitude_disagreement_fraction: f64,
    pub position_disagreement_fraction: f64,
    pub max_relative_error: f64,
}

impl GradcheckSummary {
    pub fn exit_code(&self) -> i32 {
        if self.sign_disagreements > 0 {
            EXIT_SIGN_DISAGREEMENT
        } else {
            EXIT_OK
        }
    }
}

/// Gradient check on uniformly random in-bounds controls.
pub fn cmd_gradcheck(cfg: &RunConfig) -> CliResult<GradcheckSummary> {
    let problem = Problem::new(cfg.problem.clone())?;
    let controls = uniform_controls(
        cfg.seeding.rng_seed,
        cfg.gradcheck.duration,
        problem.dt(),
        problem.tweezer(),
    )?;
    let report = gradcheck(&controls, &problem, cfg.optimizer.mode, &cfg.gradcheck.tolerances)?;
    let dir = &cfg.output_dir;
    cfg.write_effective(dir)?;
    let report_path = dir.join("gradcheck.txt");
    write_file(&report_path, &report.to_table())?;
    Ok(GradcheckSummary {
        report_path,
        sign_disagreements: report.total_sign_disagreements(),
        amplitude_disagreement_fraction: report.sign_disagreement_fraction(Channel::Amplitude),
        position_disagreement_fraction: report.sign_disagreement_fraction(Channel::Position),
        max_relative_error: report.max_relative_error(),
    })
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub results: Vec<SweepResult>,
    /// `(seed index, message)` for sweeps that failed outright.
    pub failures: Vec<(usize, String)>,
}

impl SweepOutcome {
    pub fn exit_code(&self) -> i32 {
        let numerical = self
            .results
            .iter()
            .any(|r| r.termination == SweepTermination::NumericalFailure);
        if numerical || !self.failures.is_empty() {
            EXIT_NUMERICAL
        } else {
            EXIT_OK
        }
    }
}

fn sweep_one(cfg: &RunConfig, problem: &Problem, index: usize, variant: Variant) -> crate::Result<SweepResult> {
    let seed_cfg = SeedConfig {
        rng_seed: cfg.seeding.rng_seed.wrapping_add(index as u64),
        ..cfg.seeding
    };
    let t = cfg.sweep.t_start;
    match variant {
        Variant::Kass => kass_sweep(&seed(&seed_cfg, t, problem.dt(), problem)?, problem, &cfg.optimizer, &cfg.sweep),
        Variant::Player => player_variant_sweep(&seed(&seed_cfg, t, problem.dt(), problem)?, problem, &cfg.optimizer, &cfg.sweep),
        Variant::Hilo => kass_sweep(&hilo_heuristic_seed(t, problem.dt(), problem)?, problem, &cfg.optimizer, &cfg.sweep),
    }
}

/// Runs `n_seeds` sweeps in parallel; seed `i` uses `rng_seed + i`.
///
/// Writes `sweep_<i>.json` per successful sweep, `fidelity_table.tsv` and,
/// when any sweep failed, `failures.tsv`.
pub fn cmd_sweep(cfg: &RunConfig, n_seeds: usize, variant: Variant) -> CliResult<SweepOutcome> {
    let problem = Problem::new(cfg.problem.clone())?;
    let outcomes: Vec<(usize, crate::Result<SweepResult>)> = (0..n_seeds)
        .into_par_iter()
        .map(|i| (i, sweep_one(cfg, &problem, i, variant)))
        .collect();
    let dir = &cfg.output_dir;
    cfg.write_effective(dir)?;
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in outcomes {
        match r {
            Ok(r) => {
                write_json(&dir.join(format!("sweep_{i}.json")), &r)?;
                results.push(r);
            }
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    write_file(&dir.join("fidelity_table.tsv"), &fidelity_duration_table(&results).to_tsv())?;
    if !failures.is_empty() {
        let text: String = failures.iter().map(|(i, m)| format!("{i}\t{m}\n")).collect();
        write_file(&dir.join("failures.tsv"), &format!("seed\terror\n{text}"))?;
    }
    Ok(SweepOutcome { results, failures })
}

/// Single-duration optimization; writes `run.json` and `solution.txt`.
pub fn cmd_optimize(
    cfg: &RunConfig,
    solution: Option<&Path>,
    duration: Option<f64>,
) -> CliResult<crate::optimizer::RunRecord> {
    let problem = Problem::new(cfg.problem.clone())?;
    let start = match solution {
        Some(p) => read_solution(p, problem.tweezer())?,
        None => seed(
            &cfg.seeding,
            duration.unwrap_or(cfg.sweep.t_start),
            problem.dt(),
            &problem,
        )?,
    };
    let record = optimize_fixed_duration(&start, &problem, &cfg.optimizer)?;
    let dir = &cfg.output_dir;
    cfg.write_effective(dir)?;
    write_json(&dir.join("run.json"), &record)?;
    write_solution(&dir.join("solution.txt"), &record.final_controls)?;
    if record.termination == Termination::NumericalFailure {
        return Err(CliError::Core(crate::Error::NumericalBlowup { step: record.iterations }));
    }
    Ok(record)
}

/// Writes `seed_<i>.txt` for `n` consecutive rng seeds.
pub fn cmd_seed(cfg: &RunConfig, n: usize, duration: Option<f64>) -> CliResult<Vec<PathBuf>> {
    let problem = Problem::new(cfg.problem.clone())?;
    let t = duration.unwrap_or(cfg.sweep.t_start);
    let dir = &cfg.output_dir;
    cfg.write_effective(dir)?;
    (0..n)
        .map(|i| {
            let sc = SeedConfig {
                rng_seed: cfg.seeding.rng_seed.wrapping_add(i as u64),
                ..cfg.seeding
            };
            let path = dir.join(format!("seed_{i}.txt"));
            write_solution(&path, &seed(&sc, t, problem.dt(), &problem)?)?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct AnalysisOutcome {
    pub written: Vec<PathBuf>,
    /// `file: reason` for every result file that could not be used.
    pub skipped: Vec<String>,
}

/// Loads every `*.json` sweep result in `dir`, in file-name order.
pub fn load_sweeps(dir: &Path) -> CliResult<(Vec<(String, SweepResult)>, Vec<String>)> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    names.sort();
    let mut loaded = Vec::new();
    let mut skipped = Vec::new();
    for p in names {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let parsed = fs::read_to_string(&p)
            .map_err(|e| e.to_string())
            .and_then(|t| serde_json::from_str::<SweepResult>(&t).map_err(|e| e.to_string()));
        match parsed {
            Ok(r) if r.entries.is_empty() => skipped.push(format!("{name}: no entries")),
            Ok(r) => loaded.push((name, r)),
            Err(e) => skipped.push(format!("{name}: {e}")),
        }
    }
    Ok((loaded, skipped))
}

/// Problem settings next to the results, or defaults when absent.
fn results_config(dir: &Path) -> CliResult<RunConfig> {
    let p = dir.join(EFFECTIVE_CONFIG);
    if p.exists() {
        RunConfig::load(&p)
    } else {
        Ok(RunConfig::default())
    }
}

pub fn cmd_analyze(results_dir: &Path, report: Report, out: Option<&Path>) -> CliResult<AnalysisOutcome> {
    let (sweeps, skipped) = load_sweeps(results_dir)?;
    if sweeps.is_empty() {
        return Err(CliError::NothingProcessable(format!(
            "no records in {} ({} skipped)",
            results_dir.display(),
            skipped.len()
        )));
    }
    let cfg = results_config(results_dir)?;
    let out = out.unwrap_or(results_dir);
    let mut written = Vec::new();
    let mut emit = |name: &str, text: String| -> CliResult<()> {
        let p = out.join(name);
        write_file(&p, &text)?;
        written.push(p);
        Ok(())
    };
    let finals: Vec<ControlSequence> = sweeps.iter().map(|(_, r)| r.entries.last().unwrap().final_controls.clone()).collect();
    match report {
        Report::Amplitude => {
            let mut text = String::from("file\tduration\tmean_amplitude\n");
            let mut summary = String::from("file\tlast_high_fidelity_duration\tfinal_mean_amplitude\n");
            for (name, r) in &sweeps {
                let trace = sweep_amplitude_trace(r);
                for (d, a) in &trace.points {
                    let _ = writeln!(text, "{name}\t{d}\t{a}");
                }
                let last = trace.last_high_fidelity_duration.map_or("NA".to_string(), |d| d.to_string());
                let fin = trace.points.last().map_or(f64::NAN, |p| p.1);
                let _ = writeln!(summary, "{name}\t{last}\t{fin}");
            }
            emit("amplitude_trace.tsv", text)?;
            emit("amplitude_summary.tsv", summary)?;
        }
        Report::Table => {
            let results: Vec<SweepResult> = sweeps.iter().map(|(_, r)| r.clone()).collect();
            emit("fidelity_table.tsv", fidelity_duration_table(&results).to_tsv())?;
        }
        Report::Heatmap => {
            let h = heatmap(&finals, ANALYSIS_DURATION, cfg.problem.dt, DEFAULT_BINS, &cfg.problem.tweezer)?;
            let matrix = |counts: &[Vec<u32>]| -> String {
                counts
                    .iter()
                    .map(|row| row.iter().map(u32::to_string).collect::<Vec<_>>().join("\t") + "\n")
                    .collect()
            };
            emit("heatmap_position.tsv", matrix(&h.position_counts))?;
            emit("heatmap_amplitude.tsv", matrix(&h.amplitude_counts))?;
            let meta = serde_json::json!({
                "n_solutions": h.n_solutions,
                "n_steps": h.n_steps,
                "bins": h.bins,
                "duration": ANALYSIS_DURATION,
                "position_range": h.position_range,
                "amplitude_range": h.amplitude_range,
                "rows": "time step",
                "columns": "value bin, low to high",
            });
            emit("heatmap_meta.json", serde_json::to_string_pretty(&meta).expect("json"))?;
        }
        Report::Strategies => {
            let p = &cfg.problem;
            let clustering = if finals.len() >= 2 {
                Some(cluster_two(&finals, ANALYSIS_DURATION, p.dt)?)
            } else {
                None
            };
            let mut text = String::from("file\tstrategy\tmax_position\tmean_amplitude\tcluster\n");
            for (i, ((name, _), c)) in sweeps.iter().zip(&finals).enumerate() {
                let label = classify_strategy(c, p.home_position, p.atom_position, DEFAULT_MARGIN);
                let cluster = clustering.as_ref().map_or("NA".to_string(), |k| k.labels[i].to_string());
                let _ = writeln!(
                    text,
                    "{name}\t{}\t{}\t{}\t{cluster}",
                    serde_json::to_value(label).expect("json").as_str().unwrap_or_default(),
                    c.max_position(),
                    c.mean_amplitude()
                );
            }
            emit("strategies.tsv", text)?;
            if let Some(k) = clustering {
                emit("clusters.json", serde_json::to_string_pretty(&k).expect("json"))?;
            }
        }
    }
    Ok(AnalysisOutcome { written, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.to_toml(), "echo").unwrap(), cfg);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("[optimizer]\nlr_positoin = 0.1\n", "t.toml").unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
        assert!(err.to_string().contains("lr_positoin"), "{err}");
    }

    #[test]
    fn partial_sections_keep_defaults() {
        let cfg = RunConfig::parse("[sweep]\nt_end = 0.2\n[optimizer]\nmode = \"sign_flipped_amplitude\"\n", "t").unwrap();
        assert_eq!(cfg.sweep.t_end, 0.2);
        assert_eq!(cfg.sweep.t_start, SweepConfig::default().t_start);
        assert_eq!(cfg.optimizer.mode, DerivativeMode::SignFlippedAmplitude);
    }

    #[test]
    fn solution_round_trip_is_bit_exact() {
        let c = ControlSequence::new(
            0.006,
            0.002,
            vec![0.1 + 1e-17, -0.3333333333333333, 0.8999999999999999],
            vec![-149.99999999999997, -1e-300, 0.0],
        )
        .unwrap();
        let back = parse_solution(&format_solution(&c), &TweezerParams::default()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn solution_errors_name_rows() {
        let text = "duration=0.004\ndt=0.002\n0.1 5\n0.2\n";
        let problems = parse_solution(text, &TweezerParams::default()).unwrap_err();
        assert!(problems.iter().any(|p| p.starts_with("line 3") && p.contains("amplitude 5")));
        assert!(problems.iter().any(|p| p.starts_with("line 4") && p.contains("2 columns")));
    }

    #[test]
    fn solution_rejects_non_finite() {
        let problems = parse_solution("duration=0.002\ndt=0.002\nNaN -1\n", &TweezerParams::default()).unwrap_err();
        assert!(problems[0].contains("line 3"));
    }

    #[test]
    fn step_count_must_match_header() {
        let rows: String = (0..85).map(|_| "0.1 -10\n").collect();
        let c = parse_solution(&format!("duration=0.17\ndt=0.002\n{rows}"), &TweezerParams::default()).unwrap();
        assert_eq!(c.n_steps(), 85);
        assert!(parse_solution(&format!("duration=0.2\ndt=0.002\n{rows}"), &TweezerParams::default()).is_err());
    }

    #[test]
    fn cli_parses_documented_flags() {
        let cli = Cli::try_parse_from([
            "bringhome", "sweep", "run.toml", "--mode", "sign_flipped", "--seeds", "3", "--variant", "player", "--out",
            "o", "--rng-seed", "9",
        ])
        .unwrap();
        let Command::Sweep { common, seeds, variant } = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!((seeds, variant), (3, Variant::Player));
        assert_eq!(common.mode, Some(DerivativeMode::SignFlippedAmplitude));
        assert_eq!(common.rng_seed, Some(9));
        assert!(Cli::try_parse_from(["bringhome", "analyze", "d", "--report", "heatmap"]).is_ok());
    }
}
