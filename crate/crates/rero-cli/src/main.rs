//! `rero` — exact auditing and seeded simulation of reconstruction attacks
//! against differentially private mechanisms.
//!
//! Exit codes: 0 success, 1 audit/validation failure, 2 usage or
//! configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use rero::taxonomy::{self, AttackRegistry, Finding, RawAttackSpec};
use rero::{
    baseline_report, estimate_gamma, exact_gamma, run_grid, separation_experiment, ConfigFile,
    EstimateOptions, ExactResult, GridCellReport, GridSpec, SeparationReport,
    DEFAULT_ENUMERATION_CAP,
};

#[derive(Parser)]
#[command(
    name = "rero",
    version,
    about = "Reconstruction attack simulator and exact auditor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Baseline errors of the oblivious adversary for a game config.
    Baseline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo estimate of a game's success probability.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; results are identical at any thread count.
        #[arg(long)]
        threads: Option<usize>,
        /// Clopper-Pearson confidence level.
        #[arg(long, default_value_t = 0.99)]
        ci_level: f64,
        #[arg(long, default_value = "runs.jsonl")]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Exact success probability by enumeration.
    Exact {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "runs.jsonl")]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Audit DP and transfer bounds over a grid (the default grid without
    /// --config). Exits 1 when any margin is negative.
    Audit {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = "runs.jsonl")]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Reproduce the separation experiment on the k-bit uniform universe.
    Separation {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
        #[arg(long, default_value = "runs.jsonl")]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Measure the tight pure-DP parameter of a config's mechanism.
    MeasureEpsilon {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "runs.jsonl")]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Inspect, validate, and render the attack taxonomy.
    Taxonomy {
        #[command(subcommand)]
        command: TaxonomyCommand,
    },
}

#[derive(Subcommand)]
enum TaxonomyCommand {
    /// Validate attack specs: the builtin registry, or a JSON file with one
    /// spec or an array of specs. Exits 1 on validation errors.
    Validate {
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// List registry entries and citation stubs.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Render selected entries or groups as a parallel-coordinates SVG.
    /// Without --select, renders every registry entry.
    Render {
        #[arg(long = "select")]
        select: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // Die quietly when a pipe consumer closes early, like other unix tools.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Baseline { config, json } => cmd_baseline(&config, json),
        Command::Estimate {
            config,
            trials,
            seed,
            threads,
            ci_level,
            out,
            json,
        } => cmd_estimate(&config, trials, seed, threads, ci_level, &out, json),
        Command::Exact { config, out, json } => cmd_exact(&config, &out, json),
        Command::Audit {
            config,
            threads,
            out,
            json,
        } => cmd_audit(config.as_deref(), threads, &out, json),
        Command::Separation {
            k,
            n,
            cap,
            out,
            json,
        } => cmd_separation(k, n, cap, &out, json),
        Command::MeasureEpsilon { config, out, json } => cmd_measure_epsilon(&config, &out, json),
        Command::Taxonomy { command } => match command {
            TaxonomyCommand::Validate { file, json } => {
                cmd_taxonomy_validate(file.as_deref(), json)
            }
            TaxonomyCommand::List { json } => cmd_taxonomy_list(json),
            TaxonomyCommand::Render {
                select,
                out,
                config,
            } => cmd_taxonomy_render(&select, &out, config.as_deref()),
        },
    }
}

// ---------------------------------------------------------------------
// config loading and the run log
// ---------------------------------------------------------------------

fn load_config(path: &Path) -> Result<(ConfigFile, String), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let cfg = ConfigFile::parse(&text).map_err(|e| e.to_string())?;
    let hash = hash_bytes(&cfg.canonical_bytes());
    Ok((cfg, hash))
}

fn hash_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

#[derive(Serialize)]
struct RunRecord<'a> {
    config_hash: &'a str,
    mode: &'a str,
    version: &'a str,
    unix_time: u64,
    payload: serde_json::Value,
}

fn append_run(
    out: &Path,
    config_hash: &str,
    mode: &str,
    payload: serde_json::Value,
) -> Result<(), String> {
    use std::io::Write;
    let record = RunRecord {
        config_hash,
        mode,
        version: env!("CARGO_PKG_VERSION"),
        unix_time: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        payload,
    };
    let line = serde_json::to_string(&record).map_err(|e| e.to_string())?;
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(out)
        .map_err(|e| format!("cannot open run log {}: {e}", out.display()))?;
    writeln!(file, "{line}").map_err(|e| format!("cannot write run log: {e}"))?;
    Ok(())
}

fn to_value(v: impl Serialize) -> Result<serde_json::Value, String> {
    serde_json::to_value(v).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------

fn cmd_baseline(config: &Path, json: bool) -> Result<ExitCode, String> {
    let (cfg, _) = load_config(config)?;
    let game = cfg
        .as_game()
        .map_err(|e| e.to_string())?
        .build()
        .map_err(|e| e.to_string())?;
    let report = baseline_report(game.prior(), game.loss(), game.n()).map_err(|e| e.to_string())?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
        );
    } else {
        println!("kappa      = {:.12}", report.kappa);
        println!("kappa_bar  = {:.12}  (n = {})", report.kappa_bar, report.n);
        println!(
            "argmax z0  = {} (index {})",
            game.prior().universe().label(report.argmax_record),
            report.argmax_record
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn default_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn cmd_estimate(
    config: &Path,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
    ci_level: f64,
    out: &Path,
    json: bool,
) -> Result<ExitCode, String> {
    let (cfg, hash) = load_config(config)?;
    let game = cfg
        .as_game()
        .map_err(|e| e.to_string())?
        .build()
        .map_err(|e| e.to_string())?;
    let opts = EstimateOptions {
        trials,
        seed,
        threads: threads.unwrap_or_else(default_threads),
        ci_level,
    };
    let result = estimate_gamma(&game, &opts).map_err(|e| e.to_string())?;
    let payload = to_value(&result)?;
    append_run(out, &hash, "estimate", payload.clone())?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&payload).map_err(|e| e.to_string())?
        );
    } else {
        println!(
            "gamma_hat = {:.6}  ({:.1}% CI [{:.6}, {:.6}])",
            result.gamma_hat,
            result.ci_level * 100.0,
            result.ci_low,
            result.ci_high
        );
        println!(
            "successes = {} / {}   seed = {}   fallback trials = {}",
            result.successes, result.trials, result.seed, result.fallback_trials
        );
        println!("logged to {} (config {})", out.display(), &hash[..12]);
    }
    Ok(ExitCode::SUCCESS)
}

/// Full decompositions are only worth logging for small alphabets.
fn exact_payload(result: &ExactResult) -> serde_json::Value {
    if result.by_output.len() <= 256 {
        serde_json::json!({
            "gamma": result.gamma,
            "by_output": result.by_output,
        })
    } else {
        serde_json::json!({
            "gamma": result.gamma,
            "outputs_with_mass": result.by_output.len(),
        })
    }
}

fn cmd_exact(config: &Path, out: &Path, json: bool) -> Result<ExitCode, String> {
    let (cfg, hash) = load_config(config)?;
    let game = cfg
        .as_game()
        .map_err(|e| e.to_string())?
        .build()
        .map_err(|e| e.to_string())?;
    let result = exact_gamma(&game).map_err(|e| e.to_string())?;
    let payload = exact_payload(&result);
    append_run(out, &hash, "exact", payload.clone())?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&payload).map_err(|e| e.to_string())?
        );
    } else {
        println!("gamma = {:.12}", result.gamma);
        println!("outputs with mass = {}", result.by_output.len());
        println!("logged to {} (config {})", out.display(), &hash[..12]);
    }
    Ok(ExitCode::SUCCESS)
}

fn grid_table(reports: &[GridCellReport]) -> String {
    let mut lines = vec![format!(
        "{:<18} {:>4} {:>2} {:>6} {:>9} {:>9} {:>10} {:>12} {:>10} {:>10}  {}",
        "mechanism",
        "size",
        "n",
        "eps",
        "eps_meas",
        "kappa",
        "kappa_bar",
        "theorem",
        "gamma",
        "bound",
        "status"
    )];
    for r in reports {
        let eps = r
            .configured_epsilon
            .map_or("-".to_string(), |e| format!("{e:.2}"));
        let mut push_audit = |theorem: &str, outcome: Option<&rero::BoundAudit>| match outcome {
            Some(a) => lines.push(format!(
                "{:<18} {:>4} {:>2} {:>6} {:>9.4} {:>9.4} {:>10.4} {:>12} {:>10.6} {:>10.6}  {}",
                r.mechanism,
                r.size,
                r.n,
                eps,
                r.measured_epsilon,
                r.kappa,
                r.kappa_bar,
                theorem,
                a.gamma_exact,
                a.bound_value,
                if a.pass { "pass" } else { "FAIL" }
            )),
            None => lines.push(format!(
                "{:<18} {:>4} {:>2} {:>6} {:>9} {:>9.4} {:>10.4} {:>12} {:>10} {:>10}  {}",
                r.mechanism,
                r.size,
                r.n,
                eps,
                "inf",
                r.kappa,
                r.kappa_bar,
                theorem,
                "-",
                "-",
                "n/a (not DP)"
            )),
        };
        push_audit("dp_to_avg", r.dp_avg.audit());
        push_audit("dp_to_bc", r.dp_bc.audit());
        if let Some(a) = &r.transfer_avg {
            push_audit("rero_to_avg", Some(a));
        }
        if let Some(a) = &r.transfer_bc {
            push_audit("rero_to_bc", Some(a));
        }
    }
    lines.join("\n")
}

fn cmd_audit(
    config: Option<&Path>,
    threads: Option<usize>,
    out: &Path,
    json: bool,
) -> Result<ExitCode, String> {
    let (grid, hash): (GridSpec, String) = match config {
        Some(path) => {
            let (cfg, hash) = load_config(path)?;
            (cfg.as_grid().map_err(|e| e.to_string())?.clone(), hash)
        }
        None => {
            let grid = GridSpec::default_grid();
            let hash = hash_bytes(&ConfigFile::Grid(grid.clone()).canonical_bytes());
            (grid, hash)
        }
    };

    let reports = run_grid_parallel(&grid, threads.unwrap_or_else(default_threads))?;
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let payload = to_value(&reports)?;
    append_run(out, &hash, "audit", payload.clone())?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&payload).map_err(|e| e.to_string())?
        );
    } else {
        println!("{}", grid_table(&reports));
        println!("{} cells audited, {} failed", reports.len(), failed);
    }
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Audit grid cells on a worker pool; results are merged in cell order, so
/// the output is independent of scheduling.
fn run_grid_parallel(grid: &GridSpec, threads: usize) -> Result<Vec<GridCellReport>, String> {
    let cells = grid.cells();
    let loss = grid.loss().map_err(|e| e.to_string())?;
    let cap = grid.cap();
    let include_transfer = grid.include_transfer();
    if threads <= 1 || cells.len() <= 1 {
        return run_grid(grid).map_err(|e| e.to_string());
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<Result<GridCellReport, String>>>> =
        cells.iter().map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads.min(cells.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let report = rero::audit_grid_cell(&cells[i], loss, cap, include_transfer)
                    .map_err(|e| e.to_string());
                *slots[i].lock().unwrap() = Some(report);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("every cell was audited"))
        .collect()
}

fn cmd_separation(k: u32, n: usize, cap: u64, out: &Path, json: bool) -> Result<ExitCode, String> {
    let report: SeparationReport = separation_experiment(k, n, cap).map_err(|e| e.to_string())?;
    let canonical = serde_json::json!({"separation": {"k": k, "n": n, "cap": cap}});
    let hash = hash_bytes(canonical.to_string().as_bytes());
    let payload = to_value(&report)?;
    append_run(out, &hash, "separation", payload.clone())?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&payload).map_err(|e| e.to_string())?
        );
    } else {
        println!("separation experiment: k = {k}, n = {n}");
        println!(
            "informed game, all-zero context, fixture adversary: gamma = {:.12}",
            report.rero_gamma
        );
        println!(
            "avg distributional gamma: fixture = {:.12}, bayes-optimal = {:.12}",
            report.avg_fixture_gamma, report.avg_bayes_gamma
        );
        println!(
            "bound 2^-k + 2^-(n-1)k = {:.12}   kappa = {:.12}",
            report.bound, report.kappa
        );
        println!(
            "fixture within bound: {}   bayes within bound: {}",
            report.fixture_within_bound, report.bayes_within_bound
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_measure_epsilon(config: &Path, out: &Path, json: bool) -> Result<ExitCode, String> {
    let (cfg, hash) = load_config(config)?;
    let game = cfg
        .as_game()
        .map_err(|e| e.to_string())?
        .build()
        .map_err(|e| e.to_string())?;
    let epsilon = game
        .mechanism()
        .measure_epsilon(game.enumeration_cap())
        .map_err(|e| e.to_string())?;
    let payload = if epsilon.is_finite() {
        serde_json::json!({"measured_epsilon": epsilon, "infinite": false})
    } else {
        serde_json::json!({"measured_epsilon": null, "infinite": true})
    };
    append_run(out, &hash, "measure-epsilon", payload.clone())?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&payload).map_err(|e| e.to_string())?
        );
    } else if epsilon.is_finite() {
        println!("measured epsilon = {epsilon:.9}");
    } else {
        println!("measured epsilon = infinity (not differentially private)");
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------
// taxonomy commands
// ---------------------------------------------------------------------

fn cmd_taxonomy_validate(file: Option<&Path>, json: bool) -> Result<ExitCode, String> {
    let mut findings: Vec<(String, Finding)> = Vec::new();
    match file {
        None => {
            let registry = taxonomy::builtin_registry();
            for entry in registry.entries() {
                for f in taxonomy::validate(entry) {
                    findings.push((entry.name.clone(), f));
                }
            }
        }
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| format!("invalid JSON: {e}"))?;
            let raw_specs: Vec<serde_json::Value> = match value {
                serde_json::Value::Array(items) => items,
                other => vec![other],
            };
            for (i, raw_value) in raw_specs.into_iter().enumerate() {
                let raw: RawAttackSpec = serde_json::from_value(raw_value)
                    .map_err(|e| format!("spec {i}: malformed: {e}"))?;
                let label = raw.name.clone().unwrap_or_else(|| format!("spec {i}"));
                let (_, fs) = raw.validate();
                for f in fs {
                    findings.push((label.clone(), f));
                }
            }
        }
    }
    let errors = findings.iter().filter(|(_, f)| f.is_error()).count();
    let warnings = findings.len() - errors;
    if json {
        let rows: Vec<serde_json::Value> = findings
            .iter()
            .map(|(name, f)| serde_json::json!({"attack": name, "finding": f}))
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({
                "errors": errors,
                "warnings": warnings,
                "findings": rows,
            }))
            .map_err(|e| e.to_string())?
        );
    } else {
        for (name, f) in &findings {
            println!("{name}: {f}");
        }
        println!("{errors} errors, {warnings} warnings");
    }
    Ok(if errors == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_taxonomy_list(json: bool) -> Result<ExitCode, String> {
    let registry = taxonomy::builtin_registry();
    if json {
        let payload = serde_json::json!({
            "entries": registry.entries(),
            "stubs": registry.stubs(),
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&payload).map_err(|e| e.to_string())?
        );
    } else {
        println!("entries:");
        for e in registry.entries() {
            let group = e.group.as_deref().unwrap_or("-");
            println!(
                "  {:<44} group={:<20} goal={}",
                e.name,
                group,
                e.attack_goal.as_str()
            );
        }
        println!("citation stubs:");
        for s in registry.stubs() {
            println!("  {:<44} {}", s.name, s.citation);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn load_registry_with_config(
    config: Option<&Path>,
) -> Result<(AttackRegistry, Vec<String>), String> {
    let registry = taxonomy::builtin_registry();
    let Some(path) = config else {
        return Ok((registry, Vec::new()));
    };
    let (cfg, _) = load_config(path)?;
    let tax = cfg.as_taxonomy().map_err(|e| e.to_string())?;
    let mut extra = Vec::new();
    for (i, raw_value) in tax.specs.iter().enumerate() {
        let raw: RawAttackSpec = serde_json::from_value(raw_value.clone())
            .map_err(|e| format!("taxonomy spec {i}: malformed: {e}"))?;
        let (spec, findings) = raw.validate();
        let errors: Vec<&Finding> = findings.iter().filter(|f| f.is_error()).collect();
        if let Some(first) = errors.first() {
            return Err(format!("taxonomy spec {i}: {first}"));
        }
        extra.push(spec.expect("no errors means every dimension is present"));
    }
    let registry = registry.with_entries(extra).map_err(|e| e.to_string())?;
    Ok((registry, tax.select.clone()))
}

fn cmd_taxonomy_render(
    select: &[String],
    out: &Path,
    config: Option<&Path>,
) -> Result<ExitCode, String> {
    let (registry, config_select) = load_registry_with_config(config)?;
    let selection: Vec<String> = if !select.is_empty() {
        select.to_vec()
    } else if !config_select.is_empty() {
        config_select
    } else {
        registry.entries().iter().map(|e| e.name.clone()).collect()
    };
    let svg =
        taxonomy::render_parallel_coordinates(&registry, &selection).map_err(|e| e.to_string())?;
    std::fs::write(out, &svg).map_err(|e| format!("cannot write {}: {e}", out.display()))?;
    println!(
        "wrote {} ({} entries)",
        out.display(),
        selection_len(&registry, &selection)
    );
    Ok(ExitCode::SUCCESS)
}

fn selection_len(registry: &AttackRegistry, selection: &[String]) -> usize {
    registry.select(selection).map(|v| v.len()).unwrap_or(0)
}
