//! Config-driven command line front end with deterministic CSV output.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Ini, RunConfig};
use crate::diagnostics;
use crate::error::{MfaError, Result};
use crate::measure::{self, MeasureContext};
use crate::pressure;
use crate::spectrum::{self, fmt_g17, QGrid};
use crate::system::SystemSpec;
use crate::thermo::{self, SolveOpts};

#[derive(Parser)]
#[command(
    name = "mfa",
    about = "Pressure, dimension, temperature and multifractal spectra for conformal iterated function systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Structural diagnostics: separation, primitivity, distortion.
    Check(RunArgs),
    /// Pressure values over a t-grid at fixed q.
    Pressure(RunArgs),
    /// Hausdorff dimension with certified bracket where available.
    Dim(RunArgs),
    /// Temperature function over the q-grid.
    Temperature(RunArgs),
    /// Full spectrum curve (T, alpha, f, chi) over the q-grid.
    Spectrum(RunArgs),
    /// Local dimension table at sampled points.
    Localdim(RunArgs),
    /// Monte-Carlo concentration check at fixed q.
    Concentrate(RunArgs),
}

#[derive(Args)]
pub struct RunArgs {
    /// Path to the INI config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output path (defaults to [output] out, then stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: MFA_THREADS or logical cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long = "q-min", allow_negative_numbers = true)]
    pub q_min: Option<f64>,
    #[arg(long = "q-max", allow_negative_numbers = true)]
    pub q_max: Option<f64>,
    #[arg(long = "q-steps")]
    pub q_steps: Option<usize>,
    #[arg(long = "n-max")]
    pub n_max: Option<usize>,
    /// Collocation nodes per interval (0 = automatic doubling).
    #[arg(long)]
    pub nodes: Option<usize>,
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (cmd, args) = match &cli.cmd {
        Cmd::Check(a) => ("check", a),
        Cmd::Pressure(a) => ("pressure", a),
        Cmd::Dim(a) => ("dim", a),
        Cmd::Temperature(a) => ("temperature", a),
        Cmd::Spectrum(a) => ("spectrum", a),
        Cmd::Localdim(a) => ("localdim", a),
        Cmd::Concentrate(a) => ("concentrate", a),
    };
    match execute(cmd, args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mfa {cmd}: {e}");
            match e {
                MfaError::Config(_) | MfaError::Parameter(_) => 2,
                MfaError::Domain(_) => 3,
                MfaError::Convergence(_) => 4,
                _ => 1,
            }
        }
    }
}

fn execute(cmd: &str, args: &RunArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| MfaError::Config(format!("{}: {e}", args.config.display())))?;
    let ini = Ini::parse(&text)?;
    let mut cfg = RunConfig::from_ini(&ini)?;
    apply_overrides(&mut cfg, args);
    let threads = effective_threads(&cfg, args);

    let mut body = Vec::new();
    for line in cfg.echo_lines() {
        writeln!(&mut body, "{line}")?;
    }
    writeln!(&mut body, "# threads = {threads}")?;

    let sys = cfg.build_system()?;
    match cmd {
        "check" => cmd_check(&sys, &cfg, &mut body)?,
        "pressure" => cmd_pressure(&sys, &cfg, &mut body)?,
        "dim" => cmd_dim(&sys, &cfg, &mut body)?,
        "temperature" => cmd_temperature(&sys, &cfg, threads, &mut body)?,
        "spectrum" => cmd_spectrum(&sys, &cfg, threads, &mut body)?,
        "localdim" => cmd_localdim(&sys, &cfg, &mut body)?,
        "concentrate" => cmd_concentrate(&sys, &cfg, &mut body)?,
        _ => unreachable!(),
    }

    let dest = args
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from));
    match dest {
        Some(path) => std::fs::write(&path, &body)?,
        None => std::io::stdout().write_all(&body)?,
    }
    Ok(())
}

fn apply_overrides(cfg: &mut RunConfig, args: &RunArgs) {
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.q_min {
        cfg.q_min = v;
    }
    if let Some(v) = args.q_max {
        cfg.q_max = v;
    }
    if let Some(v) = args.q_steps {
        cfg.q_steps = v;
    }
    if let Some(v) = args.n_max {
        cfg.n_max = v;
    }
    if let Some(v) = args.nodes {
        cfg.nodes = v;
    }
    if let Some(v) = args.threads {
        cfg.threads = v;
    }
}

fn effective_threads(cfg: &RunConfig, args: &RunArgs) -> usize {
    if let Some(t) = args.threads {
        return t.max(1);
    }
    if cfg.threads > 0 {
        return cfg.threads;
    }
    if let Ok(env) = std::env::var("MFA_THREADS") {
        if let Ok(t) = env.parse::<usize>() {
            return t.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn solve_opts(cfg: &RunConfig) -> SolveOpts {
    SolveOpts {
        nodes: cfg.nodes,
        word_budget: cfg.word_budget,
        ..SolveOpts::default()
    }
}

fn cmd_check(sys: &SystemSpec, _cfg: &RunConfig, out: &mut Vec<u8>) -> Result<()> {
    let rep = diagnostics::diagnostics_report(sys, sys.edge_count().max(8));
    writeln!(out, "system: {}", sys.name())?;
    writeln!(out, "edges: {}", sys.edge_count())?;
    writeln!(out, "osc_ok: {}", rep.osc_ok)?;
    writeln!(out, "worst_overlap: {}", rep.worst_overlap)?;
    writeln!(out, "primitive: {}", rep.primitivity.primitive)?;
    match rep.primitivity.witness_length {
        Some(p) => writeln!(out, "primitive_p: {p}")?,
        None => writeln!(out, "primitive_p: none (searched up to {})", rep.primitivity.searched_up_to)?,
    }
    match rep.bsc_gap {
        Some(g) => writeln!(out, "bsc_gap: {g}")?,
        None => writeln!(out, "bsc_gap: unknown")?,
    }
    writeln!(out, "cofinitely_regular: {}", rep.cofinitely_regular.as_str())?;
    writeln!(
        out,
        "cofinitely_regular_reason: {}",
        rep.cofinitely_regular.reason()
    )?;
    writeln!(
        out,
        "norm_comparability_constant: {}",
        rep.norm_comparability_constant
    )?;
    match rep.distortion_constant {
        Some(k) => writeln!(out, "distortion_constant: {k}")?,
        None => writeln!(out, "distortion_constant: unknown")?,
    }
    writeln!(out, "global_contraction: {}", sys.global_contraction())?;
    writeln!(out, "two_step_contraction: {}", sys.two_step_contraction())?;
    writeln!(out, "finiteness_parameter: {}", sys.finiteness_parameter())?;
    Ok(())
}

fn cmd_pressure(sys: &SystemSpec, cfg: &RunConfig, out: &mut Vec<u8>) -> Result<()> {
    let fam = cfg.build_family(sys)?;
    writeln!(out, "q,t,value,lower,upper,width")?;
    let steps = cfg.t_steps.max(2);
    let h = (cfg.t_max - cfg.t_min) / (steps - 1) as f64;
    let nodes = if cfg.nodes > 0 { cfg.nodes } else { 32 };
    for k in 0..steps {
        let t = cfg.t_min + k as f64 * h;
        let coll = pressure::pressure_collocation(sys, &fam, cfg.q, t, nodes)?;
        let bracket = pressure::pressure_bracket(sys, &fam, cfg.q, t, cfg.n_max, cfg.word_budget)
            .ok()
            .filter(|b| b.certified());
        let (lo, hi, width) = match &bracket {
            Some(b) => (
                fmt_g17(b.lower.unwrap()),
                fmt_g17(b.upper.unwrap()),
                fmt_g17(b.diagnostics.bracket_width),
            ),
            None => ("nan".into(), "nan".into(), "nan".into()),
        };
        writeln!(
            out,
            "{},{},{},{lo},{hi},{width}",
            fmt_g17(cfg.q),
            fmt_g17(t),
            fmt_g17(coll.value)
        )?;
    }
    Ok(())
}

fn cmd_dim(sys: &SystemSpec, cfg: &RunConfig, out: &mut Vec<u8>) -> Result<()> {
    let est = thermo::hausdorff_dimension_opts(sys, &solve_opts(cfg), cfg.n_max)?;
    writeln!(out, "dim,lower,upper")?;
    writeln!(
        out,
        "{},{},{}",
        fmt_g17(est.value),
        est.lower.map(fmt_g17).unwrap_or_else(|| "nan".into()),
        est.upper.map(fmt_g17).unwrap_or_else(|| "nan".into()),
    )?;
    Ok(())
}

fn cmd_temperature(
    sys: &SystemSpec,
    cfg: &RunConfig,
    threads: usize,
    out: &mut Vec<u8>,
) -> Result<()> {
    let fam = cfg.build_family(sys)?;
    let grid = QGrid::new(cfg.q_min, cfg.q_max, cfg.q_steps)?;
    let qs = grid.values();
    let opts = solve_opts(cfg);
    let chunksize = qs.len().div_ceil(threads.max(1));
    let mut rows: Vec<Vec<(f64, Result<(f64, f64)>)>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for part in qs.chunks(chunksize) {
            let fam = &fam;
            let opts = &opts;
            handles.push(scope.spawn(move || {
                let mut chunk = Vec::with_capacity(part.len());
                let mut hint = None;
                for &q in part {
                    let r = thermo::solve_pressure_root(
                        sys,
                        fam,
                        q,
                        hint,
                        if opts.nodes > 0 { opts.nodes } else { 32 },
                        opts.residual_tol,
                    );
                    if let Ok((t, _)) = &r {
                        hint = Some(*t);
                    }
                    chunk.push((q, r));
                }
                chunk
            }));
        }
        for h in handles {
            rows.push(h.join().expect("temperature worker panicked"));
        }
    });
    writeln!(out, "q,T,residual")?;
    for (q, r) in rows.into_iter().flatten() {
        match r {
            Ok((t, res)) => writeln!(out, "{},{},{}", fmt_g17(q), fmt_g17(t), fmt_g17(res))?,
            Err(e) => writeln!(out, "# q = {q}: {e}")?,
        }
    }
    Ok(())
}

fn cmd_spectrum(
    sys: &SystemSpec,
    cfg: &RunConfig,
    threads: usize,
    out: &mut Vec<u8>,
) -> Result<()> {
    let fam = cfg.build_family(sys)?;
    let grid = QGrid::new(cfg.q_min, cfg.q_max, cfg.q_steps)?;
    let curve = spectrum::spectrum_curve_parallel(sys, &fam, grid, &solve_opts(cfg), threads);
    for p in &curve.points {
        if let spectrum::CurvePoint::Failed { q, reason } = p {
            writeln!(out, "# q = {q}: {reason}")?;
        }
    }
    let flagged: Vec<f64> = curve
        .solved_points()
        .filter(|p| !p.hypothesis_ok)
        .map(|p| p.q)
        .collect();
    if !flagged.is_empty() {
        writeln!(
            out,
            "# hypothesis q*alpha+T > theta flagged at q = {}",
            flagged
                .iter()
                .map(|q| format!("{q}"))
                .collect::<Vec<_>>()
                .join(", ")
        )?;
    }
    writeln!(out, "# legendre_residual = {}", fmt_g17(spectrum::legendre_check(&curve)))?;
    spectrum::export_curve(&curve, out)?;
    Ok(())
}

fn cmd_localdim(sys: &SystemSpec, cfg: &RunConfig, out: &mut Vec<u8>) -> Result<()> {
    let fam = cfg.build_family(sys)?;
    let points = measure::sample_mu_q(
        sys,
        &fam,
        cfg.q,
        cfg.sample_count,
        cfg.word_length,
        cfg.seed,
    )?;
    let models = measure::model_ladder(
        sys,
        &fam,
        MeasureContext::Base,
        cfg.word_length + 2,
        cfg.word_budget,
    )?;
    let deepest = models.last().unwrap();
    let mut radii = Vec::new();
    let mut r = sys.diameter() / 4.0;
    while r >= 2.0 * deepest.max_cylinder_len {
        radii.push(r);
        r *= 0.5;
    }
    writeln!(out, "x,slope,stderr")?;
    for &x in &points {
        match measure::local_dimension(&models, x, &radii) {
            Ok(est) => writeln!(
                out,
                "{},{},{}",
                fmt_g17(x),
                fmt_g17(est.slope),
                fmt_g17(est.slope_stderr)
            )?,
            Err(e) => writeln!(out, "# x = {x}: {e}")?,
        }
    }
    Ok(())
}

fn cmd_concentrate(sys: &SystemSpec, cfg: &RunConfig, out: &mut Vec<u8>) -> Result<()> {
    let fam = cfg.build_family(sys)?;
    let rep = measure::concentration_test(
        sys,
        &fam,
        cfg.q,
        cfg.sample_count,
        cfg.word_length,
        cfg.seed,
        cfg.band,
        cfg.word_budget,
    )?;
    writeln!(out, "q,alpha,fraction_in_band")?;
    writeln!(
        out,
        "{},{},{}",
        fmt_g17(rep.q),
        fmt_g17(rep.alpha),
        fmt_g17(rep.fraction_in_band)
    )?;
    Ok(())
}

/// Convenience used by the binary and by integration tests.
pub fn run_from_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            2
        }
    }
}
