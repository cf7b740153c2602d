//! `trajbench` command line: `synth`, `tag`, `eval` and `report`.
//!
//! Exit codes: 0 success, 1 usage or I/O, 2 schema, 3 data consistency,
//! 4 internal failure. `CRITERIA_THREADS` caps the worker pool.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use trajbench_core::bench::{self, CategoryFilter, EvaluationRun, Metric};
use trajbench_core::io::{self, MinFdeFile, PredictionsFile, RunConfig, ScenariosFile, TagsFile};
use trajbench_core::scenario::{tag_all, MinFdeTable};
use trajbench_core::synth::{self, MapKind, SynthSpec};
use trajbench_core::{Error, Result};

pub const THREADS_ENV: &str = "CRITERIA_THREADS";

#[derive(Parser, Debug)]
#[command(name = "trajbench", version, about = "Scenario-aware benchmark for multimodal trajectory prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Straight,
    #[value(name = "t_intersection", alias = "t-intersection")]
    TIntersection,
    Crossroads,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BalanceArg {
    Aae,
    Amv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic map, scenarios and toy-model predictions.
    Synth {
        #[arg(long, value_enum, ignore_case = true)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Modes per prediction.
        #[arg(long, default_value_t = 6)]
        k: usize,
    },
    /// Tag scenarios by structure, difficulty and length.
    Tag {
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long)]
        maps: PathBuf,
        /// Precomputed per-model minFDE table.
        #[arg(long, conflicts_with = "predictions", required_unless_present = "predictions")]
        minfde: Option<PathBuf>,
        /// Prediction files of every model; minFDE is computed from them.
        #[arg(long, num_args = 1..)]
        predictions: Vec<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute every metric for one model.
    Eval {
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long)]
        maps: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        tags: PathBuf,
        /// Defaults to the configuration stored in the tags file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate, rank and render metrics of several models.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        metrics: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, ignore_case = true, default_value = "aae")]
        balance: BalanceArg,
        /// `all`, `challenging` or STRUCTURE/DIFFICULTY/LENGTH with `*` wildcards.
        #[arg(long, default_value = "all")]
        category: String,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match with_pool(|| execute(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.kind().exit_code()
        }
    }
}

fn with_pool<T: Send>(f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Internal(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth { kind, n, seed, out, k } => synth_cmd(kind, n, seed, &out, k),
        Command::Tag {
            scenarios,
            maps,
            minfde,
            predictions,
            config,
            out,
        } => tag_cmd(&scenarios, &maps, minfde.as_deref(), &predictions, config.as_deref(), &out),
        Command::Eval {
            scenarios,
            maps,
            predictions,
            tags,
            config,
            out,
        } => eval_cmd(&scenarios, &maps, &predictions, &tags, config.as_deref(), &out),
        Command::Report {
            metrics,
            out,
            balance,
            category,
        } => report_cmd(&metrics, &out, balance, &category),
    }
}

fn io_err(context: String) -> impl FnOnce(std::io::Error) -> Error {
    move |source| Error::Io { context, source }
}

/// Writes via a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io_err(format!("cannot create `{}`", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(format!("cannot write in `{}`", dir.display())))?;
    tmp.write_all(contents.as_bytes())
        .map_err(io_err(format!("cannot write `{}`", path.display())))?;
    tmp.persist(path)
        .map_err(|e| Error::Io {
            context: format!("cannot write `{}`", path.display()),
            source: e.error,
        })?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn input_key(role: &str, path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{role}:{name}")
}

fn load_config(path: Option<&Path>, inputs: &mut BTreeMap<String, String>) -> Result<RunConfig> {
    let cfg = match path {
        Some(p) => {
            let f = io::read_file(p)?;
            inputs.insert(input_key("config", p), f.digest);
            io::parse_json(&f.bytes)?
        }
        None => RunConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

struct Inputs {
    maps: BTreeMap<String, trajbench_core::RoadMap64>,
    records: Vec<trajbench_core::ScenarioRecord64>,
}

fn load_scenarios(scenarios: &Path, maps: &Path, digests: &mut BTreeMap<String, String>) -> Result<Inputs> {
    let m = io::read_file(maps)?;
    digests.insert(input_key("maps", maps), m.digest);
    let maps_by_id = io::maps_by_id(io::parse_maps(&m.bytes)?);
    let s = io::read_file(scenarios)?;
    digests.insert(input_key("scenarios", scenarios), s.digest);
    let file: ScenariosFile = io::parse_json(&s.bytes)?;
    let records = io::scenarios_from_file(&file, Some(&maps_by_id))?;
    Ok(Inputs {
        maps: maps_by_id,
        records,
    })
}

fn load_predictions(
    path: &Path,
    records: &[trajbench_core::ScenarioRecord64],
    digests: &mut BTreeMap<String, String>,
) -> Result<(String, Vec<trajbench_core::PredictionSet64>)> {
    let f = io::read_file(path)?;
    digests.insert(input_key("predictions", path), f.digest);
    let file: PredictionsFile = io::parse_json(&f.bytes)?;
    let sets = io::predictions_from_file(&file, Some(records))?;
    Ok((file.model, sets))
}

fn synth_cmd(kind: KindArg, n: usize, seed: u64, out: &Path, k: usize) -> Result<()> {
    let kind = match kind {
        KindArg::Straight => MapKind::Straight,
        KindArg::TIntersection => MapKind::TIntersection,
        KindArg::Crossroads => MapKind::Crossroads,
    };
    let spec = SynthSpec::new(kind, seed, n);
    if k < 2 {
        return Err(Error::InvalidConfig(format!("--k must be at least 2, got {k}")));
    }
    let map = synth::gen_map(&spec)?;
    let records = synth::gen_scenarios(&map, &spec)?;
    let rng = json!({
        "algorithm": "splitmix64",
        "uniform": "(next_u64 >> 11) * 2^-53",
        "normal": "box-muller, cosine branch",
        "seed_mixing": "first splitmix64 output for state seed + stream * 0x9E3779B97F4A7C15",
    });
    let meta = json!({ "generator": { "spec": spec, "rng": rng } });
    write_atomic(&out.join("map.json"), &io::to_json(&vec![map.to_document()])?)?;
    write_atomic(
        &out.join("scenarios.json"),
        &io::to_json(&io::scenarios_to_file(&records, Some(meta)))?,
    )?;
    let anchors: Vec<_> = records.iter().map(|r| r.anchor()).collect();
    for (toy, sets) in synth::toy_suite(&records, &map, k, seed)? {
        let meta = json!({ "generator": { "model": toy.as_str(), "seed": seed, "k": k, "rng": rng } });
        let file = io::predictions_to_file(toy.as_str(), spec.dt, &sets, &anchors, Some(meta));
        let name = format!("predictions_{}.json", toy.as_str().to_ascii_lowercase());
        write_atomic(&out.join(name), &io::to_json(&file)?)?;
    }
    Ok(())
}

fn tag_cmd(
    scenarios: &Path,
    maps: &Path,
    minfde: Option<&Path>,
    predictions: &[PathBuf],
    config: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let mut digests = BTreeMap::new();
    let cfg = load_config(config, &mut digests)?;
    let inputs = load_scenarios(scenarios, maps, &mut digests)?;
    let table: MinFdeTable = match minfde {
        Some(p) => {
            let f = io::read_file(p)?;
            digests.insert(input_key("minfde", p), f.digest);
            io::parse_json::<MinFdeFile>(&f.bytes)?.min_fde
        }
        None => {
            let mut models = Vec::with_capacity(predictions.len());
            for p in predictions {
                models.push(load_predictions(p, &inputs.records, &mut digests)?);
            }
            io::min_fde_table(&inputs.records, &models)?
        }
    };
    let set = tag_all(&inputs.records, &inputs.maps, &table, &cfg.scenario)?;
    write_atomic(out, &io::to_json(&TagsFile::new(cfg, digests, set))?)
}

fn eval_cmd(
    scenarios: &Path,
    maps: &Path,
    predictions: &Path,
    tags: &Path,
    config: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let mut digests = BTreeMap::new();
    let t = io::read_file(tags)?;
    digests.insert(input_key("tags", tags), t.digest);
    let tags_file: TagsFile = io::parse_json(&t.bytes)?;
    let cfg = match config {
        Some(_) => load_config(config, &mut digests)?,
        None => {
            tags_file.config.validate()?;
            tags_file.config.clone()
        }
    };
    let inputs = load_scenarios(scenarios, maps, &mut digests)?;
    let (model, sets) = load_predictions(predictions, &inputs.records, &mut digests)?;
    let mut run = bench::evaluate_model(&model, &inputs.records, &inputs.maps, &sets, &tags_file.tags, &cfg)?;
    run.inputs = digests;
    write_atomic(out, &io::to_json(&run)?)
}

fn report_cmd(metrics: &[PathBuf], out: &Path, balance: BalanceArg, category: &str) -> Result<()> {
    let filter: CategoryFilter = category.parse()?;
    let mut digests = BTreeMap::new();
    let mut runs: Vec<EvaluationRun> = Vec::with_capacity(metrics.len());
    for p in metrics {
        let f = io::read_file(p)?;
        digests.insert(input_key("metrics", p), f.digest);
        let run: EvaluationRun = io::parse_json(&f.bytes)?;
        run.config.validate()?;
        runs.push(run);
    }
    runs.sort_by(|a, b| a.model.cmp(&b.model));
    let report = bench::build_report(&runs, digests)?;
    let metric = match balance {
        BalanceArg::Aae => Metric::Aae,
        BalanceArg::Amv => Metric::Amv,
    };
    let points = bench::balance_data(&runs, metric, &filter)?;
    write_atomic(&out.join("report.json"), &io::to_json(&report)?)?;
    write_atomic(&out.join("report.csv"), &bench::report_csv(&report))?;
    write_atomic(&out.join("tables.md"), &bench::tables_markdown(&report))?;
    write_atomic(&out.join("balance.csv"), &bench::balance_csv(&points, metric))?;
    write_atomic(&out.join("balance.svg"), &bench::balance_svg(&points, metric))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["trajbench"]), 1);
        assert_eq!(run(["trajbench", "synth", "--kind", "oval", "--n", "1", "--seed", "1", "--out", "x"]), 1);
        assert_eq!(run(["trajbench", "--help"]), 0);
    }

    #[test]
    fn kind_names() {
        for k in ["straight", "STRAIGHT", "t_intersection", "T_INTERSECTION", "t-intersection", "crossroads"] {
            assert!(Cli::try_parse_from(["trajbench", "synth", "--kind", k, "--n", "1", "--seed", "0", "--out", "o"]).is_ok(), "{k}");
        }
    }

    #[test]
    fn tag_needs_a_difficulty_source() {
        let base = ["trajbench", "tag", "--scenarios", "s", "--maps", "m", "--out", "t"];
        assert!(Cli::try_parse_from(base).is_err());
        let mut both = base.to_vec();
        both.extend(["--minfde", "f", "--predictions", "p"]);
        assert!(Cli::try_parse_from(both).is_err());
    }
}
