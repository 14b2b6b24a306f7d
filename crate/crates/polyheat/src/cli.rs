//! Subcommand orchestration: thin wrappers over the library operations with
//! reproducible config, caching, and CSV reporting.
//!
//! Exit codes: 0 ok, 2 configuration, 3 numeric failure, 4 no contraction.

use crate::cache;
use crate::config::RunConfig;
use crate::criteria::{self, ClassifyConfig, InitialData, Summary, Verdict};
use crate::error::{Error, Result};
use crate::majorant::MajorantSpec;
use crate::profile::KernelKind;
use crate::report::{fmt, CsvTable};
use crate::solver;
use crate::testfn;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "polyheat", version, about = "Higher-order heat flow toolbox")]
struct Cli {
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a single config key (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build (or load from cache) a kernel profile; dump CSV + properties
    Kernel {
        /// polyharmonic | stable
        #[arg(long, default_value = "polyharmonic")]
        kind: String,
        #[arg(long = "N")]
        dim: Option<usize>,
        #[arg(long = "m")]
        order: Option<usize>,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Estimate the majorant constants and their saturation
    VerifyMajorant {
        #[arg(long = "N")]
        dim: Option<usize>,
        #[arg(long = "m")]
        order: Option<usize>,
    },
    /// Run the existence/nonexistence criteria on initial data
    Classify {
        #[arg(long)]
        data: Option<String>,
        #[arg(long = "N")]
        dim: Option<usize>,
        #[arg(long = "m")]
        order: Option<usize>,
        #[arg(long = "p")]
        exponent: Option<f64>,
    },
    /// Picard-iterate the integral equation
    Solve {
        #[arg(long = "N")]
        dim: Option<usize>,
        #[arg(long = "m")]
        order: Option<usize>,
        #[arg(long = "p")]
        exponent: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long = "T")]
        horizon: Option<f64>,
        #[arg(long = "L")]
        half_width: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "nt")]
        n_t: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long = "weight-mode")]
        weight_mode: Option<String>,
        #[arg(long)]
        data: Option<String>,
        #[arg(long)]
        force: bool,
    },
    /// Mollified-atom sweep toward Dirac data
    DeltaSweep {
        #[arg(long = "p")]
        exponent: Option<f64>,
        #[arg(long = "T")]
        horizon: Option<f64>,
        #[arg(long)]
        mass: Option<f64>,
        #[arg(long)]
        force: bool,
    },
    /// Weighted-integral nonexistence diagnostic over solver snapshots
    Diagnose {
        /// Snapshot as TIME:PATH (repeatable)
        #[arg(long = "snapshot", value_name = "TIME:PATH")]
        snapshots: Vec<String>,
        /// Cutoff center, comma-separated coordinates
        #[arg(long)]
        x0: Option<String>,
        /// Comma-separated list of scales R in (0,1]
        #[arg(long)]
        radii: Option<String>,
        #[arg(long)]
        data: Option<String>,
    },
}

/// Entry point for the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}

fn set_opt<T: ToString>(cfg: &mut RunConfig, key: &str, value: &Option<T>) -> Result<()> {
    if let Some(v) = value {
        cfg.set(key, &v.to_string())?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    // subcommand convenience flags, then explicit --set overrides
    match &cli.command {
        Command::Kernel { dim, order, theta, .. } => {
            set_opt(&mut cfg, "dim", dim)?;
            set_opt(&mut cfg, "order", order)?;
            set_opt(&mut cfg, "theta", theta)?;
        }
        Command::VerifyMajorant { dim, order } => {
            set_opt(&mut cfg, "dim", dim)?;
            set_opt(&mut cfg, "order", order)?;
        }
        Command::Classify { data, dim, order, exponent } => {
            set_opt(&mut cfg, "data", data)?;
            set_opt(&mut cfg, "dim", dim)?;
            set_opt(&mut cfg, "order", order)?;
            set_opt(&mut cfg, "exponent", exponent)?;
        }
        Command::Solve {
            dim,
            order,
            exponent,
            theta,
            horizon,
            half_width,
            n,
            n_t,
            tol,
            weight_mode,
            data,
            force,
        } => {
            set_opt(&mut cfg, "dim", dim)?;
            set_opt(&mut cfg, "order", order)?;
            set_opt(&mut cfg, "exponent", exponent)?;
            set_opt(&mut cfg, "theta", theta)?;
            set_opt(&mut cfg, "horizon", horizon)?;
            set_opt(&mut cfg, "half_width", half_width)?;
            set_opt(&mut cfg, "n", n)?;
            set_opt(&mut cfg, "n_t", n_t)?;
            set_opt(&mut cfg, "tol", tol)?;
            set_opt(&mut cfg, "weight_mode", weight_mode)?;
            set_opt(&mut cfg, "data", data)?;
            if *force {
                cfg.set("force", "true")?;
            }
        }
        Command::DeltaSweep { exponent, horizon, mass, force } => {
            set_opt(&mut cfg, "exponent", exponent)?;
            set_opt(&mut cfg, "horizon", horizon)?;
            set_opt(&mut cfg, "sweep_mass", mass)?;
            if *force {
                cfg.set("force", "true")?;
            }
        }
        Command::Diagnose { data, .. } => {
            set_opt(&mut cfg, "data", data)?;
        }
    }
    for pair in &cli.set {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {pair:?}")))?;
        cfg.set(key, value)?;
    }
    cfg.validate()?;

    match cli.command {
        Command::Kernel { kind, .. } => cmd_kernel(&cfg, &kind),
        Command::VerifyMajorant { .. } => cmd_verify_majorant(&cfg),
        Command::Classify { .. } => cmd_classify(&cfg),
        Command::Solve { .. } => cmd_solve(&cfg),
        Command::DeltaSweep { .. } => cmd_delta_sweep(&cfg),
        Command::Diagnose { snapshots, x0, radii, .. } => {
            cmd_diagnose(&cfg, &snapshots, x0.as_deref(), radii.as_deref())
        }
    }
}

fn load_profile(cfg: &RunConfig, kind: KernelKind) -> Result<crate::profile::RadialKernelProfile> {
    let (r_max, resolution) = match kind {
        KernelKind::Polyharmonic { .. } => (cfg.gm_rmax, cfg.gm_resolution),
        KernelKind::Stable { .. } => (cfg.gtheta_rmax, cfg.gtheta_resolution),
    };
    let dir = cfg.effective_cache_dir();
    let (profile, hit) = cache::load_or_build(&dir, kind, cfg.dim, r_max, resolution)?;
    println!("cache: {}", if hit { "hit" } else { "miss" });
    Ok(profile)
}

fn majorant_spec(cfg: &RunConfig) -> Result<MajorantSpec> {
    let params = cfg.params()?;
    let gm = load_profile(cfg, KernelKind::Polyharmonic { order: cfg.order })?;
    let gt = load_profile(cfg, KernelKind::Stable { theta: cfg.theta })?;
    MajorantSpec::new(params, gm, gt)
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    Path::new(&cfg.output_dir).join(name)
}

fn cmd_kernel(cfg: &RunConfig, kind_name: &str) -> Result<()> {
    let kind = match kind_name {
        "polyharmonic" => KernelKind::Polyharmonic { order: cfg.order },
        "stable" => KernelKind::Stable { theta: cfg.theta },
        other => return Err(Error::Config(format!("unknown kernel kind {other:?}"))),
    };
    let profile = load_profile(cfg, kind)?;
    let tag = match kind {
        KernelKind::Polyharmonic { order } => format!("polyharmonic-m{order}-n{}", cfg.dim),
        KernelKind::Stable { theta } => format!("stable-theta{theta}-n{}", cfg.dim),
    };
    let mut table = CsvTable::new(vec!["r", "value"]);
    for (r, v) in profile.radii.iter().zip(&profile.values) {
        table.push_values(&[*r, *v]);
    }
    let hash = cfg.hash();
    table.write(&out_path(cfg, &format!("kernel-{tag}.csv")), &hash)?;
    let mass = profile.total_mass();
    let min_value = profile.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut props = CsvTable::new(vec!["mass", "min_value", "value_at_origin"]);
    props.push_values(&[mass, min_value, profile.values[0]]);
    props.write(&out_path(cfg, &format!("kernel-{tag}-props.csv")), &hash)?;
    println!("kernel {tag}: mass={} min={} origin={}", fmt(mass), fmt(min_value), fmt(profile.values[0]));
    Ok(())
}

fn cmd_verify_majorant(cfg: &RunConfig) -> Result<()> {
    let spec = majorant_spec(cfg)?;
    let (base_hw, base_n) = match cfg.dim {
        1 => (8.0, 256),
        2 => (8.0, 64),
        _ => (6.0, 32),
    };
    let mut table = CsvTable::new(vec!["constant", "value", "saturated"]);
    let d0 = crate::majorant::estimate_d_j(&spec, 0, base_hw, base_n)?;
    table.push(vec!["d0".into(), fmt(d0.value), d0.saturated.to_string()]);
    let d1 = crate::majorant::estimate_d_j(&spec, 1, base_hw, base_n)?;
    table.push(vec!["d1".into(), fmt(d1.value), d1.saturated.to_string()]);

    let mu = InitialData::parse(&cfg.data, cfg.dim)?;
    let times: Vec<f64> = (0..8).map(|k| 2.0f64.powi(-(k as i32))).collect();
    let dpp = crate::majorant::smoothing_bound_check(&spec, &mu, &times, cfg.half_width, cfg.n)?;
    table.push(vec!["d_smoothing".into(), fmt(dpp.value), dpp.saturated.to_string()]);

    let samples = crate::majorant::dstar_sample_sweep(10, 50, 30.0);
    let dstar = crate::majorant::estimate_d_star(&spec, &samples)?;
    table.push(vec!["d_star".into(), fmt(dstar.value), dstar.saturated.to_string()]);

    if cfg.dim == 1 {
        let residual = crate::majorant::cross_check_convolution(&spec, 2.0, 1.0, 400.0, 1 << 14)?;
        table.push(vec!["semigroup_residual".into(), fmt(residual), "true".into()]);
    }
    table.write(&out_path(cfg, "majorant-constants.csv"), &cfg.hash())?;
    println!(
        "majorant: d0={} d_star={} saturated={}",
        fmt(d0.value),
        fmt(dstar.value),
        d0.saturated && dstar.saturated
    );
    Ok(())
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Satisfied => "satisfied",
        Verdict::Violated => "violated",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn cmd_classify(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let mu = InitialData::parse(&cfg.data, cfg.dim)?;
    let ccfg = ClassifyConfig {
        gamma2: cfg.gamma2,
        gamma3: cfg.gamma3,
        gamma_alpha: cfg.gamma_alpha,
        gamma_orlicz: cfg.gamma_orlicz,
        alpha: cfg.alpha,
        beta: cfg.beta,
        ..ClassifyConfig::default()
    };
    let report = criteria::classify(&mu, &params, &ccfg)?;
    let mut table = CsvTable::new(vec!["id", "verdict", "computed", "threshold", "gamma"]);
    for check in &report.checks {
        table.push(vec![
            check.id.into(),
            verdict_str(check.verdict).into(),
            fmt(check.computed),
            fmt(check.threshold),
            fmt(check.gamma),
        ]);
    }
    table.write(&out_path(cfg, "classify.csv"), &cfg.hash())?;
    match report.summary {
        Summary::ExistsBy(thm) => println!("EXISTS_BY {thm}"),
        Summary::NonexistenceBy(thm) => println!("NONEXISTENCE_BY {thm}"),
        Summary::Undecided => println!("UNDECIDED"),
    }
    if let Some(t) = report.suggested_t {
        println!("suggested_T {}", fmt(t));
    }
    Ok(())
}

fn cmd_solve(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let mu = InitialData::parse(&cfg.data, cfg.dim)?;
    let picard = cfg.picard()?;
    let report = solver::picard_solve(&mu, &params, &picard, cfg.half_width, cfg.n)?;
    let hash = cfg.hash();
    let mut table = CsvTable::new(vec!["iteration", "increment_norm", "ball_norm"]);
    for (k, (inc, ball)) in report
        .norm_history
        .iter()
        .zip(&report.ball_history)
        .enumerate()
    {
        table.push(vec![(k + 1).to_string(), fmt(*inc), fmt(*ball)]);
    }
    table.write(&out_path(cfg, "solve-norms.csv"), &hash)?;
    let mut index = CsvTable::new(vec!["index", "time", "file", "sup_abs"]);
    for (k, (t, field)) in report.snapshots.iter().enumerate() {
        let name = format!("snapshot-{k}.grid");
        criteria::write_grid_file(&out_path(cfg, &name), field)?;
        index.push(vec![k.to_string(), fmt(*t), name, fmt(field.max_abs())]);
    }
    index.write(&out_path(cfg, "solve-snapshots.csv"), &hash)?;
    println!(
        "solve: converged={} iterations={} nu={} d_star={} residual={}",
        report.converged,
        report.iterations,
        fmt(report.nu),
        fmt(report.d_star_functional),
        fmt(report.residual)
    );
    Ok(())
}

fn cmd_delta_sweep(cfg: &RunConfig) -> Result<()> {
    let spec = majorant_spec(cfg)?;
    let picard = cfg.picard()?;
    let eps: Vec<f64> = (1..=cfg.sweep_eps_count as i32).map(|k| 2.0f64.powi(-k)).collect();
    let rows = solver::delta_sweep(&spec, cfg.sweep_mass, &eps, &picard, cfg.half_width, cfg.n)?;
    let mut table = CsvTable::new(vec!["eps", "d_star", "nu", "converged", "sup_mid"]);
    for row in &rows {
        table.push(vec![
            fmt(row.eps),
            fmt(row.d_star_functional),
            fmt(row.nu),
            row.converged.to_string(),
            fmt(row.sup_mid),
        ]);
    }
    table.write(&out_path(cfg, "delta-sweep.csv"), &cfg.hash())?;
    for row in &rows {
        println!(
            "eps={} d_star={} nu={} converged={}",
            fmt(row.eps),
            fmt(row.d_star_functional),
            fmt(row.nu),
            row.converged
        );
    }
    Ok(())
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad {what} entry {s:?}")))
        })
        .collect()
}

fn cmd_diagnose(
    cfg: &RunConfig,
    snapshot_args: &[String],
    x0: Option<&str>,
    radii: Option<&str>,
) -> Result<()> {
    if snapshot_args.is_empty() {
        return Err(Error::Config("diagnose needs at least one --snapshot TIME:PATH".into()));
    }
    let mut snapshots = Vec::new();
    for arg in snapshot_args {
        let (time, path) = arg
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("--snapshot expects TIME:PATH, got {arg:?}")))?;
        let t: f64 = time
            .parse()
            .map_err(|_| Error::Config(format!("bad snapshot time {time:?}")))?;
        let field = criteria::read_grid_file(Path::new(path))?;
        snapshots.push((t, field));
    }
    snapshots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let params = cfg.params()?;
    let mu = InitialData::parse(&cfg.data, cfg.dim)?;
    let center = match x0 {
        Some(text) => parse_f64_list(text, "x0")?,
        None => vec![0.0; cfg.dim],
    };
    let r_list = match radii {
        Some(text) => parse_f64_list(text, "radii")?,
        None => (1..=6).map(|k| 2.0f64.powi(-k)).collect(),
    };
    let rows = testfn::nonexistence_diagnostic(&snapshots, &mu, &params, &center, &r_list)?;
    let mut table = CsvTable::new(vec!["R", "m_R", "lhs", "rhs", "ratio"]);
    for row in &rows {
        table.push_values(&[row.r, row.m_r, row.lhs, row.rhs, row.ratio]);
    }
    table.write(&out_path(cfg, "diagnose.csv"), &cfg.hash())?;
    for row in &rows {
        println!("R={} ratio={}", fmt(row.r), fmt(row.ratio));
    }
    Ok(())
}
