//! `vtpr` — batch front end for the visuo-tactile place recognition
//! pipeline: generate synthetic datasets, train the predictive coding
//! network, extract templates with either method, evaluate, and compare.
//!
//! Exit codes: 0 success, 2 usage/config error, 3 I/O or file-format
//! error, 4 numerical divergence, 5 incompatible inputs.

mod config;
mod pipeline;

use clap::{Parser, Subcommand};
use config::RunConfig;
use pipeline::{
    calibrate_scaling, dataset_dims, evaluate_sets, extract_handcrafted, extract_learned,
    gen_datasets,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use vtpr::evaluate::MethodTag;
use vtpr::pcnet::{self, PcError};
use vtpr::persist::{self, PersistError};
use vtpr::synthworld::{arena_to_scene, preset_environment, EnvKind, WorldError};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Divergence(String),
    Incompat(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Divergence(_) => 4,
            CliError::Incompat(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Divergence(m) | CliError::Incompat(m) => m,
        }
    }
}

impl From<PcError> for CliError {
    fn from(e: PcError) -> Self {
        match e {
            PcError::Divergence { .. } => CliError::Divergence(e.to_string()),
            PcError::ShapeMismatch(_) => CliError::Incompat(e.to_string()),
            PcError::InvalidConfig(_) | PcError::EmptyDataset => CliError::Usage(e.to_string()),
        }
    }
}

impl From<WorldError> for CliError {
    fn from(e: WorldError) -> Self {
        match e {
            WorldError::PoseOutOfBounds { .. } => CliError::Incompat(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<PersistError> for CliError {
    fn from(e: PersistError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<vtpr::baseline::BaselineError> for CliError {
    fn from(e: vtpr::baseline::BaselineError) -> Self {
        CliError::Incompat(e.to_string())
    }
}

impl From<vtpr::evaluate::EvalError> for CliError {
    fn from(e: vtpr::evaluate::EvalError) -> Self {
        use vtpr::evaluate::EvalError::*;
        match e {
            Feature(inner) => inner.into(),
            Baseline(inner) => inner.into(),
            EmptyGrid => CliError::Usage(e.to_string()),
            _ => CliError::Incompat(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "vtpr", version, about = "Visuo-tactile place recognition pipeline")]
struct Cli {
    /// Key=value config file; flags and --set override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. --set eta_y=0.01 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the two noisy-trajectory datasets for an environment.
    GenData {
        #[arg(long, value_parser = parse_env)]
        env: Option<EnvKind>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train the predictive coding network on a dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out_model: PathBuf,
        /// Training log CSV; defaults to <out-model>.trainlog.csv.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Extract one template per observation.
    Extract {
        #[arg(long)]
        data: PathBuf,
        /// learned (default) or handcrafted.
        #[arg(long, default_value = "learned")]
        method: String,
        /// Trained model (learned method).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Calibration dataset for the scaling factors (handcrafted method).
        #[arg(long)]
        calib: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate template set A against template set B.
    Eval {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Match-declaration threshold; defaults to the config value.
        #[arg(long)]
        theta: Option<f64>,
        /// Spatial proximity threshold; defaults to the config value.
        #[arg(long)]
        tau: Option<f64>,
        /// Sweep a theta grid and report the best-F1 row.
        #[arg(long)]
        sweep: bool,
    },
    /// Run both methods over several environments with thresholds fixed
    /// from the E1 sweep, and emit a consolidated report.
    Compare {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Comma-separated environment list.
        #[arg(long, default_value = "E1,E2,E3")]
        envs: String,
    },
    /// Print the header of a model, dataset, template, or report file.
    Inspect { file: PathBuf },
}

fn parse_env(s: &str) -> Result<EnvKind, String> {
    EnvKind::parse(s).ok_or_else(|| format!("unknown environment `{s}` (expected E1, E2, or E3)"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match RunConfig::resolve(cli.config.as_deref(), &cli.sets) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let result = match cli.cmd {
        Cmd::GenData { env, out_dir } => cmd_gen_data(&cfg, env, &out_dir),
        Cmd::Train { data, out_model, log } => cmd_train(&cfg, &data, &out_model, log.as_deref()),
        Cmd::Extract { data, method, model, calib, out } => {
            cmd_extract(&cfg, &data, &method, model.as_deref(), calib.as_deref(), &out)
        }
        Cmd::Eval { a, b, out_dir, theta, tau, sweep } => {
            cmd_eval(&cfg, &a, &b, &out_dir, theta, tau, sweep)
        }
        Cmd::Compare { model, out_dir, envs } => cmd_compare(&cfg, &model, &out_dir, &envs),
        Cmd::Inspect { file } => cmd_inspect(&file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {}", e.message());
    ExitCode::from(e.code())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write_resolved(cfg: &RunConfig, path: &Path) -> Result<(), CliError> {
    persist::write_atomic(path, cfg.to_text().as_bytes())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

fn cmd_gen_data(cfg: &RunConfig, env: Option<EnvKind>, out_dir: &Path) -> Result<(), CliError> {
    let mut cfg = cfg.clone();
    if let Some(env) = env {
        cfg.env = env;
    }
    let env = cfg.env;
    ensure_dir(out_dir)?;
    let (a, b) = gen_datasets(&cfg, env)?;
    let path_a = out_dir.join(format!("{}_a.csv", env.name()));
    let path_b = out_dir.join(format!("{}_b.csv", env.name()));
    persist::save_dataset(&a, &path_a)?;
    persist::save_dataset(&b, &path_b)?;
    let scene = arena_to_scene(&preset_environment(env));
    persist::write_atomic(&out_dir.join(format!("{}.scene", env.name())), scene.as_bytes())?;
    write_resolved(&cfg, &out_dir.join("gen-data.resolved.cfg"))?;
    println!(
        "wrote {} ({} rows) and {} ({} rows)",
        path_a.display(),
        a.len(),
        path_b.display(),
        b.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

fn cmd_train(
    cfg: &RunConfig,
    data: &Path,
    out_model: &Path,
    log_path: Option<&Path>,
) -> Result<(), CliError> {
    let observations = persist::load_dataset(data)?;
    let (n_vis, n_tac) = dataset_dims(&observations);
    let net = cfg.network(n_vis, n_tac);
    let samples: Vec<pcnet::SensorySample> =
        observations.iter().map(pcnet::SensorySample::from).collect();

    let (weights, log) = pcnet::train(&samples, &net)?;
    persist::save_model(&weights, &net, out_model)?;

    let mut csv = String::from("iteration,visual_mse,tactile_mse\n");
    for (i, (v, t)) in log.visual_input_mse.iter().zip(&log.tactile_input_mse).enumerate() {
        let _ = writeln!(csv, "{},{},{}", i + 1, persist::format_f64(*v), persist::format_f64(*t));
    }
    let default_log = out_model.with_extension("trainlog.csv");
    let log_path = log_path.unwrap_or(&default_log);
    persist::write_atomic(log_path, csv.as_bytes())?;
    write_resolved(cfg, &append_ext(out_model, "resolved.cfg"))?;

    println!(
        "trained {} iterations; final reconstruction MSE: visual {:.6}, tactile {:.6}",
        net.train_iterations,
        log.visual_input_mse.last().copied().unwrap_or(f64::NAN),
        log.tactile_input_mse.last().copied().unwrap_or(f64::NAN)
    );
    println!("model: {}", out_model.display());
    Ok(())
}

fn append_ext(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

fn cmd_extract(
    cfg: &RunConfig,
    data: &Path,
    method: &str,
    model: Option<&Path>,
    calib: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let observations = persist::load_dataset(data)?;
    match method {
        "learned" => {
            let model_path = model.ok_or_else(|| {
                CliError::Usage("--model is required for the learned method".into())
            })?;
            let (weights, net) = persist::load_model(model_path)?;
            let set = extract_learned(&observations, &weights, &net)?;
            persist::save_templates(&set, None, out)?;
        }
        "handcrafted" => {
            let calib_path = calib.ok_or_else(|| {
                CliError::Usage("--calib is required for the handcrafted method".into())
            })?;
            let calib_obs = persist::load_dataset(calib_path)?;
            let scaling = calibrate_scaling(&calib_obs, cfg)?;
            let set = extract_handcrafted(&observations, cfg)?;
            persist::save_templates(&set, Some(&scaling), out)?;
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown method `{other}` (expected learned or handcrafted)"
            )))
        }
    }
    write_resolved(cfg, &append_ext(out, "resolved.cfg"))?;
    println!("wrote {} ({} templates)", out.display(), observations.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn cmd_eval(
    cfg: &RunConfig,
    a: &Path,
    b: &Path,
    out_dir: &Path,
    theta: Option<f64>,
    tau: Option<f64>,
    sweep: bool,
) -> Result<(), CliError> {
    let (set_a, scaling_a) = persist::load_templates(a)?;
    let (set_b, scaling_b) = persist::load_templates(b)?;
    if set_a.method != set_b.method {
        return Err(CliError::Incompat(format!(
            "method tags differ: {} vs {}",
            set_a.method.name(),
            set_b.method.name()
        )));
    }
    if let (Some(sa), Some(sb)) = (&scaling_a, &scaling_b) {
        if sa != sb {
            log::warn!("template sets carry different scaling factors; using A's");
        }
    }
    ensure_dir(out_dir)?;
    let tau = tau.unwrap_or(cfg.tau);
    let art = evaluate_sets(&set_a, &set_b, scaling_a.as_ref(), cfg, tau, theta, sweep, out_dir)?;
    write_resolved(cfg, &out_dir.join("eval.resolved.cfg"))?;
    let s = art.scores;
    println!(
        "{}: theta {:.6} -> precision {:.4} recall {:.4} f1 {:.4} (tp {} fp {} fn {} tn {})",
        set_a.method.name(),
        art.theta,
        s.precision,
        s.recall,
        s.f1,
        s.true_pos,
        s.false_pos,
        s.false_neg,
        s.true_neg
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

fn cmd_compare(cfg: &RunConfig, model: &Path, out_dir: &Path, envs: &str) -> Result<(), CliError> {
    let env_list: Vec<EnvKind> = envs
        .split(',')
        .map(|t| parse_env(t.trim()).map_err(CliError::Usage))
        .collect::<Result<_, _>>()?;
    if env_list.is_empty() {
        return Err(CliError::Usage("empty environment list".into()));
    }
    ensure_dir(out_dir)?;
    let (weights, net) = persist::load_model(model)?;

    // E1 provides the calibration data and the per-method thresholds,
    // held fixed everywhere else.
    let (e1_a, e1_b) = gen_datasets(cfg, EnvKind::E1)?;
    let scaling = calibrate_scaling(&e1_a, cfg)?;

    let sweep_dir = out_dir.join("E1_sweep");
    let learned_a = extract_learned(&e1_a, &weights, &net)?;
    let learned_b = extract_learned(&e1_b, &weights, &net)?;
    let theta_learned = evaluate_sets(
        &learned_a,
        &learned_b,
        None,
        cfg,
        cfg.tau,
        None,
        true,
        &sweep_dir.join("learned"),
    )?
    .theta;
    let hc_a = extract_handcrafted(&e1_a, cfg)?;
    let hc_b = extract_handcrafted(&e1_b, cfg)?;
    let theta_handcrafted = evaluate_sets(
        &hc_a,
        &hc_b,
        Some(&scaling),
        cfg,
        cfg.tau,
        None,
        true,
        &sweep_dir.join("handcrafted"),
    )?
    .theta;

    let mut rows: Vec<(String, String, f64, vtpr::evaluate::Scores)> = Vec::new();
    for env in &env_list {
        let (obs_a, obs_b) = gen_datasets(cfg, *env)?;
        let env_dir = out_dir.join(env.name());
        ensure_dir(&env_dir)?;
        persist::save_dataset(&obs_a, &env_dir.join(format!("{}_a.csv", env.name())))?;
        persist::save_dataset(&obs_b, &env_dir.join(format!("{}_b.csv", env.name())))?;

        for method in [MethodTag::Learned, MethodTag::Handcrafted] {
            let (set_a, set_b, sc, theta) = match method {
                MethodTag::Learned => (
                    extract_learned(&obs_a, &weights, &net)?,
                    extract_learned(&obs_b, &weights, &net)?,
                    None,
                    theta_learned,
                ),
                MethodTag::Handcrafted => (
                    extract_handcrafted(&obs_a, cfg)?,
                    extract_handcrafted(&obs_b, cfg)?,
                    Some(&scaling),
                    theta_handcrafted,
                ),
            };
            persist::save_templates(
                &set_a,
                sc,
                &env_dir.join(format!("{}_a.tpl", method.name())),
            )?;
            persist::save_templates(
                &set_b,
                sc,
                &env_dir.join(format!("{}_b.tpl", method.name())),
            )?;
            let art = evaluate_sets(
                &set_a,
                &set_b,
                sc,
                cfg,
                cfg.tau,
                Some(theta),
                false,
                &env_dir.join(method.name()),
            )?;
            rows.push((env.name().to_string(), method.name().to_string(), theta, art.scores));
        }
    }

    // consolidated report
    let mut csv = String::from("environment,method,theta,tp,fp,fn,tn,precision,recall,f1\n");
    for (env, method, theta, s) in &rows {
        let _ = writeln!(
            csv,
            "{env},{method},{},{},{},{},{},{},{},{}",
            persist::format_f64(*theta),
            s.true_pos,
            s.false_pos,
            s.false_neg,
            s.true_neg,
            persist::format_f64(s.precision),
            persist::format_f64(s.recall),
            persist::format_f64(s.f1)
        );
    }
    persist::write_atomic(&out_dir.join("report.csv"), csv.as_bytes())?;

    let mut txt = String::new();
    let _ = writeln!(
        txt,
        "{:<12} {:<12} {:>10} {:>10} {:>10} {:>10}",
        "environment", "method", "theta", "precision", "recall", "f1"
    );
    for (env, method, theta, s) in &rows {
        let _ = writeln!(
            txt,
            "{:<12} {:<12} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            env, method, theta, s.precision, s.recall, s.f1
        );
    }
    let _ = writeln!(
        txt,
        "\nthresholds fixed from the E1 sweep: learned {:.6}, handcrafted {:.6}",
        theta_learned, theta_handcrafted
    );
    let _ = writeln!(
        txt,
        "reference full-scale E3 comparison for context: learned F1 72.94%, handcrafted F1 62.34%"
    );
    persist::write_atomic(&out_dir.join("report.txt"), txt.as_bytes())?;
    write_resolved(cfg, &out_dir.join("compare.resolved.cfg"))?;
    print!("{txt}");
    Ok(())
}

// ---------------------------------------------------------------------------
// inspect
// ---------------------------------------------------------------------------

fn cmd_inspect(file: &Path) -> Result<(), CliError> {
    let bytes = std::fs::read(file).map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
    if bytes.starts_with(b"MSPC") {
        let (weights, cfg) = persist::load_model(file)?;
        println!("model file v1");
        println!("visual layers: {:?}", cfg.visual_layer_sizes);
        println!("tactile layers: {:?}", cfg.tactile_layer_sizes);
        println!("multi size: {}", cfg.multi_size);
        println!("inputs: visual {}, tactile {}", cfg.visual_input_dim, cfg.tactile_input_dim);
        println!("activation: {}", cfg.activation.name());
        println!(
            "matrices: {}",
            weights
                .matrices()
                .iter()
                .map(|m| format!("{}x{}", m.nrows(), m.ncols()))
                .collect::<Vec<_>>()
                .join(", ")
        );
        println!("checksum: ok");
        return Ok(());
    }
    let text = String::from_utf8_lossy(&bytes);
    let first = text.lines().next().unwrap_or("");
    if first.starts_with("# vtpr-templates") {
        println!("template set file");
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            println!("{line}");
        }
        println!("rows: {}", text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).count());
        return Ok(());
    }
    if first.starts_with("tag,pose_x") {
        let rows = text.lines().skip(1).filter(|l| !l.is_empty()).count();
        let cols: Vec<&str> = first.split(',').collect();
        let n_vis = cols.iter().filter(|c| c.starts_with("v_")).count();
        let n_tac = cols.iter().filter(|c| c.starts_with("t_")).count();
        println!("dataset file");
        println!("columns: {} (visual {}, tactile {})", cols.len(), n_vis, n_tac);
        println!("rows: {rows}");
        let mut tags: Vec<&str> =
            text.lines().skip(1).filter_map(|l| l.split(',').next()).collect();
        tags.dedup();
        println!("tags: {}", tags.join(", "));
        return Ok(());
    }
    if text.lines().any(|l| l.contains('=')) {
        print!("{text}");
        return Ok(());
    }
    Err(CliError::Usage(format!("unrecognized file format: {}", file.display())))
}
