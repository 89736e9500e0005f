//! Command-line front end: four subcommands driven by one TOML config file,
//! emitting deterministic CSV artifacts with stable exit codes.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, RunConfig};
use crate::energy::{gradient, NonlinearitySpec, PotentialSpec};
use crate::exponents::{
    infinity_threshold, infinity_threshold_with_floor, origin_window, power_law_report,
    ExponentWindow, Rule,
};
use crate::grid::RadialGrid;
use crate::solve::{minimize, mountain_pass, Classification, SolveError, SolveResult};
use crate::verify::{
    check_decay_inner, check_decay_outer, check_pointwise, estimate_r, estimate_s, per_trial_rng,
    random_bump_field, BoundKind, DecayBoundReport, EmbeddingEstimate, Side,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_UNCERTIFIED: i32 = 3;
pub const EXIT_SOLVER_FAILURE: i32 = 4;
pub const EXIT_BOUND_VIOLATION: i32 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "bilap",
    about = "Radial fourth-order variational toolkit: exponent certification, \
             solvers, bound verification",
    version
)]
pub struct Cli {
    /// Print the built-in default configuration as TOML and exit.
    #[arg(long, exclusive = true)]
    pub print_defaults: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Worker threads for sweeps; 0 picks the hardware parallelism.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,

    /// Master seed override.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory override.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Exit 3 when the configured exponents are not certified.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Certify admissible exponent windows; writes windows.csv.
    Exponents(CommonArgs),
    /// Run the variational solver; writes solution.csv, result.csv, decay.csv.
    Solve(CommonArgs),
    /// Check bounds on random fields and sample the embedding functionals;
    /// writes bounds.csv and estimates.csv.
    Verify(CommonArgs),
    /// Certify a grid of power-law pairs (a, q) across worker threads;
    /// writes sweep.csv.
    Sweep(CommonArgs),
}

/// Parse the process arguments and run. The return value is the process
/// exit code; clap itself exits with 2 on usage errors.
pub fn run() -> i32 {
    let cli = Cli::parse();
    if cli.print_defaults {
        print!("{}", RunConfig::default().to_toml());
        return EXIT_OK;
    }
    match cli.command {
        Some(cmd) => dispatch(cmd),
        None => {
            eprintln!("error: missing subcommand; try --help");
            EXIT_INVALID_CONFIG
        }
    }
}

pub fn dispatch(cmd: Command) -> i32 {
    let (args, f): (&CommonArgs, fn(&RunConfig, &CommonArgs) -> i32) = match &cmd {
        Command::Exponents(a) => (a, cmd_exponents),
        Command::Solve(a) => (a, cmd_solve),
        Command::Verify(a) => (a, cmd_verify),
        Command::Sweep(a) => (a, cmd_sweep),
    };
    match load_config(args) {
        Ok(cfg) => f(&cfg, args),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID_CONFIG
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// 17 significant digits: bit-faithful float round trip in CSV.
fn csv_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(dir: &Path, name: &str, header: &str, rows: &[String]) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = String::with_capacity(rows.len() * 64 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(&path, text)?;
    Ok(path)
}

struct WindowRow {
    label: String,
    window: ExponentWindow,
    origin_rule: Rule,
    infinity_rule: Rule,
}

impl WindowRow {
    fn csv(&self, n: u32) -> String {
        let (lo, hi) = match self.window {
            ExponentWindow::Interval { lo, hi } => (csv_f(lo), csv_f(hi)),
            ExponentWindow::HalfLine { lo } => (csv_f(lo), String::new()),
            ExponentWindow::SplitPair { q1_hi, q2_min, .. } => (csv_f(q1_hi), csv_f(q2_min)),
            ExponentWindow::Empty { .. } => (String::new(), String::new()),
        };
        format!(
            "{n},{},{lo},{hi},{},{},{}",
            self.label,
            self.window.kind_str(),
            self.origin_rule.as_str(),
            self.infinity_rule.as_str()
        )
    }

    fn describe(&self) -> String {
        let body = match self.window {
            ExponentWindow::Interval { lo, hi } => format!("interval ({lo}, {hi})"),
            ExponentWindow::HalfLine { lo } => format!("half line ({lo}, inf)"),
            ExponentWindow::SplitPair { q1_lo, q1_hi, q2_min } => format!(
                "split pair: q1 in ({q1_lo}, {q1_hi}), q2 > {q2_min}"
            ),
            ExponentWindow::Empty { .. } => "empty".into(),
        };
        format!(
            "{}: {body} [origin: {}, infinity: {}]",
            self.label,
            self.origin_rule.as_str(),
            self.infinity_rule.as_str()
        )
    }
}

/// The certified window for the configured potential, or an explanation of
/// why none can be produced (missing growth data).
fn certified_window(cfg: &RunConfig, spec: &PotentialSpec) -> Result<WindowRow, String> {
    let n = cfg.dimension;
    if cfg.potential.kind == "power_law" {
        let a = cfg.potential.a;
        let window = power_law_report(n, a).map_err(|e| e.to_string())?;
        return Ok(WindowRow {
            label: format!("a={a}"),
            window,
            origin_rule: Rule::RatioBound,
            infinity_rule: Rule::RatioWithFloor,
        });
    }
    let origin = spec
        .origin
        .ok_or("origin growth data required: set [potential.origin]")?;
    let infinity = spec
        .infinity
        .ok_or("infinity growth data required: set [potential.infinity]")?;
    let ow = origin_window(n, &origin).map_err(|e| e.to_string())?;
    let (thr, infinity_rule) = match infinity.gamma {
        Some(g) if g <= 4.0 => (
            infinity_threshold_with_floor(n, &infinity).map_err(|e| e.to_string())?,
            Rule::RatioWithFloor,
        ),
        _ => (
            infinity_threshold(n, &infinity).map_err(|e| e.to_string())?,
            Rule::RatioBound,
        ),
    };
    let window = match ow {
        ExponentWindow::Interval { lo, hi } => {
            let lo = lo.max(thr.value);
            if lo < hi {
                ExponentWindow::Interval { lo, hi }
            } else {
                ExponentWindow::Empty {
                    reason: crate::exponents::EmptyReason::DegenerateBounds,
                }
            }
        }
        other => other,
    };
    let label = format!(
        "alpha0={};beta0={};alphaInf={};betaInf={}",
        origin.alpha, origin.beta, infinity.alpha, infinity.beta
    );
    Ok(WindowRow {
        label,
        window,
        origin_rule: Rule::RatioBound,
        infinity_rule,
    })
}

/// Whether the configured nonlinearity exponents sit inside the window.
fn exponents_certified(window: &ExponentWindow, nl: &NonlinearitySpec) -> bool {
    match nl.exponent_pair() {
        Some((q1, q2)) => window.contains_pair(q1, q2),
        None => !window.is_empty(),
    }
}

fn cmd_exponents(cfg: &RunConfig, args: &CommonArgs) -> i32 {
    let spec = match cfg.potential.build() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID_CONFIG;
        }
    };
    let row = match certified_window(cfg, &spec) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INVALID_CONFIG;
        }
    };
    println!("{}", row.describe());

    let nl = match cfg.nonlinearity.build() {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID_CONFIG;
        }
    };
    let certified = exponents_certified(&row.window, &nl);
    match nl.exponent_pair() {
        Some((q1, q2)) if q1 == q2 => {
            println!("configured exponent q = {q1}: certified = {certified}")
        }
        Some((q1, q2)) => {
            println!("configured exponents (q1, q2) = ({q1}, {q2}): certified = {certified}")
        }
        None => println!("no nonlinearity configured; window nonempty = {certified}"),
    }

    let out = Path::new(&cfg.out_dir);
    let header = "n,a_or_params,q_lo,q_hi,kind,origin_rule,infinity_rule";
    match write_csv(out, "windows.csv", header, &[row.csv(cfg.dimension)]) {
        Ok(path) => println!("wrote {}", path.display()),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    }
    if args.strict && !certified {
        eprintln!("strict mode: configured exponents are not certified");
        return EXIT_UNCERTIFIED;
    }
    EXIT_OK
}

/// Decay-bound reports for one field under the configured potential floors.
/// Sides whose floor hypotheses fail are skipped, not errors.
fn decay_reports(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    v: &[f64],
    u: &crate::grid::RadialField,
    split: f64,
    slack: f64,
) -> Result<Vec<DecayBoundReport>, crate::verify::VerifyError> {
    let mut reports = vec![
        check_pointwise(grid, u, BoundKind::ValueByDeltaNorm, slack)?,
        check_pointwise(grid, u, BoundKind::GradientByDeltaNorm, slack)?,
    ];
    if let Some(inf) = &spec.infinity {
        if let Some(g) = inf.gamma {
            if g <= 14.0 / 3.0 {
                reports.push(check_decay_outer(grid, v, g, split, u, slack)?);
            }
        }
    }
    if let Some(origin) = &spec.origin {
        if let Some(g) = origin.gamma {
            if g >= 4.0 {
                reports.push(check_decay_inner(grid, v, g, split, u, slack)?);
            }
        }
    }
    Ok(reports)
}

/// Applies the negative-control hook: scaling the constant by `s` divides
/// the observed ratio by `s`.
fn scaled(report: DecayBoundReport, scale: f64, slack: f64) -> DecayBoundReport {
    if scale == 1.0 {
        return report;
    }
    let max_ratio = report.max_ratio / scale;
    DecayBoundReport {
        constant_used: report.constant_used * scale,
        max_ratio,
        pass: max_ratio <= 1.0 + slack,
        ..report
    }
}

fn decay_csv_row(prefix: &str, rep: &DecayBoundReport) -> String {
    format!(
        "{prefix}{},{},{},{},{}",
        rep.kind.name(),
        csv_f(rep.constant_used),
        csv_f(rep.exponent),
        csv_f(rep.max_ratio),
        rep.pass
    )
}

fn cmd_solve(cfg: &RunConfig, args: &CommonArgs) -> i32 {
    let build = || -> Result<_, ConfigError> {
        let grid = cfg.build_grid()?;
        let spec = cfg.potential.build()?;
        let nl = cfg.nonlinearity.build()?;
        Ok((grid, spec, nl))
    };
    let (grid, spec, nl) = match build() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID_CONFIG;
        }
    };
    if args.strict {
        match certified_window(cfg, &spec) {
            Ok(row) if !exponents_certified(&row.window, &nl) => {
                eprintln!("strict mode: configured exponents are not certified");
                return EXIT_UNCERTIFIED;
            }
            _ => {}
        }
    }
    let pot = match spec.sample(&grid) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID_CONFIG;
        }
    };

    let superlinear = nl.effective_theta().is_some_and(|t| t > 2.0);
    let use_mountain_pass = match cfg.method.as_str() {
        "minimize" => false,
        "mountain_pass" => true,
        _ => superlinear && pot.q_is_zero() && !nl.is_zero(),
    };
    println!(
        "method: {}",
        if use_mountain_pass { "mountain_pass" } else { "minimize" }
    );

    let result = if use_mountain_pass {
        mountain_pass(&grid, &pot, &nl, &cfg.solver)
    } else {
        minimize(&grid, &pot, &nl, &cfg.solver)
    };
    let res: SolveResult = match result {
        Ok(r) => r,
        Err(e @ SolveError::BadConfig(_)) | Err(e @ SolveError::ForcingNotZero) => {
            eprintln!("error: {e}");
            return EXIT_INVALID_CONFIG;
        }
        Err(e) => {
            eprintln!("solver failure: {e}");
            return EXIT_SOLVER_FAILURE;
        }
    };

    let trivial = nl.is_zero() && pot.q_is_zero();
    println!(
        "classification: {}  energy: {:.6e}  residual: {:.3e}  iterations: {}{}",
        res.classification,
        res.energy.total,
        res.residual,
        res.iterations,
        if trivial { "  (trivial: f = 0, Q = 0)" } else { "" }
    );
    if res.nonneg_violation > 0.0 {
        println!("negative dip: {:.3e}", res.nonneg_violation);
    }

    let out = Path::new(&cfg.out_dir);
    let lap = res.u.laplacian(&grid).to_vec();
    let sol_rows: Vec<String> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| format!("{},{},{}", csv_f(r), csv_f(res.u.values()[i]), csv_f(lap[i])))
        .collect();

    let grad = match gradient(&grid, &pot, &nl, &res.u) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let result_header = "half_norm_sq,k_term,q_term,total,residual_h,residual_l2,iterations,\
                         classification,trivial";
    let result_row = format!(
        "{},{},{},{},{},{},{},{},{}",
        csv_f(res.energy.half_norm_sq),
        csv_f(res.energy.k_term),
        csv_f(res.energy.q_term),
        csv_f(res.energy.total),
        csv_f(grad.h_dual),
        csv_f(grad.l2_dual),
        res.iterations,
        res.classification,
        trivial
    );

    let decay = match decay_reports(
        &grid,
        &spec,
        pot.v(),
        &res.u,
        cfg.verification.decay_split,
        cfg.verification.slack,
    ) {
        Ok(reps) => reps,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let decay_rows: Vec<String> = decay.iter().map(|r| decay_csv_row("", r)).collect();

    let io = (|| -> std::io::Result<()> {
        write_csv(out, "solution.csv", "r,u,delta_u", &sol_rows)?;
        write_csv(out, "result.csv", result_header, &[result_row])?;
        write_csv(
            out,
            "decay.csv",
            "bound_kind,constant,exponent,max_ratio,pass",
            &decay_rows,
        )?;
        Ok(())
    })();
    if let Err(e) = io {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }
    println!("wrote {}", out.join("solution.csv").display());
    println!("wrote {}", out.join("result.csv").display());
    println!("wrote {}", out.join("decay.csv").display());

    if res.classification == Classification::Failed {
        eprintln!(
            "solver failure: residual {:.3e} did not reach {:.3e}",
            res.residual, cfg.solver.grad_tol
        );
        return EXIT_SOLVER_FAILURE;
    }
    EXIT_OK
}

fn estimate_csv_rows(rows: &mut Vec<String>, est: &EmbeddingEstimate) {
    for (r, e) in est.r_values.iter().zip(&est.estimates) {
        rows.push(format!(
            "{},{},{},{},{},{}",
            est.functional.name(),
            csv_f(est.q),
            csv_f(*r),
            csv_f(*e),
            est.trials,
            est.seed
        ));
    }
}

fn cmd_verify(cfg: &RunConfig, args: &CommonArgs) -> i32 {
    let build = || -> Result<_, ConfigError> {
        let grid = cfg.build_grid()?;
        let spec = cfg.potential.build()?;
        Ok((grid, spec))
    };
    let (grid, spec) = match build() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID_CONFIG;
        }
    };
    if args.strict {
        let nl = match cfg.nonlinearity.build() {
            Ok(n) => n,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_INVALID_CONFIG;
            }
        };
        match certified_window(cfg, &spec) {
            Ok(row) if !exponents_certified(&row.window, &nl) => {
                eprintln!("strict mode: configured exponents are not certified");
                return EXIT_UNCERTIFIED;
            }
            _ => {}
        }
    }
    let pot = match spec.sample(&grid) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID_CONFIG;
        }
    };

    let vc = &cfg.verification;
    let mut bound_rows = Vec::new();
    let mut violations = 0usize;
    for field_idx in 0..vc.fields {
        let mut rng = per_trial_rng(cfg.seed, field_idx as u64);
        let u = random_bump_field(&grid, &mut rng);
        let reports = match decay_reports(&grid, &spec, pot.v(), &u, vc.decay_split, vc.slack) {
            Ok(reps) => reps,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_RUNTIME;
            }
        };
        for rep in reports {
            let rep = scaled(rep, vc.constant_scale, vc.slack);
            if !rep.pass {
                violations += 1;
            }
            bound_rows.push(decay_csv_row(&format!("{field_idx},"), &rep));
        }
    }

    let mut est_rows = Vec::new();
    let run_side = |rows: &mut Vec<String>, qs: &[f64], radii: &[f64], side: Side| {
        for &q in qs {
            let s = estimate_s(&grid, &pot, q, radii, vc.trials, side, cfg.seed)?;
            println!(
                "{} q={q}: slope {:.3} over {} radii",
                s.functional.name(),
                s.trend_slope,
                radii.len()
            );
            estimate_csv_rows(rows, &s);
            let r = estimate_r(&grid, &pot, q, radii, vc.trials, side, cfg.seed)?;
            estimate_csv_rows(rows, &r);
        }
        Ok::<(), crate::verify::VerifyError>(())
    };
    if let Err(e) = run_side(&mut est_rows, &vc.origin_q, &vc.radii_origin, Side::Origin)
        .and_then(|_| run_side(&mut est_rows, &vc.infinity_q, &vc.radii_infinity, Side::Infinity))
    {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }

    let out = Path::new(&cfg.out_dir);
    let io = (|| -> std::io::Result<()> {
        write_csv(
            out,
            "bounds.csv",
            "field,bound_kind,constant,exponent,max_ratio,pass",
            &bound_rows,
        )?;
        write_csv(
            out,
            "estimates.csv",
            "functional,q,R,estimate,trials,seed",
            &est_rows,
        )?;
        Ok(())
    })();
    if let Err(e) = io {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }
    println!("wrote {}", out.join("bounds.csv").display());
    println!("wrote {}", out.join("estimates.csv").display());

    if violations > 0 {
        eprintln!(
            "{violations} bound check(s) violated beyond tolerance (see bounds.csv)"
        );
        return EXIT_BOUND_VIOLATION;
    }
    println!("all {} bound rows pass", bound_rows.len());
    EXIT_OK
}

fn cmd_sweep(cfg: &RunConfig, args: &CommonArgs) -> i32 {
    let jobs: Vec<(f64, f64)> = cfg
        .sweep
        .a_values
        .iter()
        .flat_map(|&a| cfg.sweep.q_values.iter().map(move |&q| (a, q)))
        .collect();
    let workers = if args.jobs == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        args.jobs
    }
    .min(jobs.len().max(1));

    let grid = if cfg.sweep.estimate_trials > 0 {
        match cfg.build_grid() {
            Ok(g) => Some(g),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_INVALID_CONFIG;
            }
        }
    } else {
        None
    };

    let n = cfg.dimension;
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<String>>> = Mutex::new(vec![None; jobs.len()]);
    let failure: Mutex<Option<String>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= jobs.len() {
                    break;
                }
                let (a, q) = jobs[idx];
                let job_seed = cfg.seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                match sweep_row(cfg, grid.as_ref(), n, a, q, job_seed) {
                    Ok(row) => rows.lock().unwrap()[idx] = Some(row),
                    Err(msg) => {
                        let mut slot = failure.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(msg);
                        }
                        break;
                    }
                }
            });
        }
    });

    if let Some(msg) = failure.into_inner().unwrap() {
        eprintln!("error: {msg}");
        return EXIT_RUNTIME;
    }
    let rows: Vec<String> = rows
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("all jobs completed"))
        .collect();

    let out = Path::new(&cfg.out_dir);
    let header = "a,q,certified,q_lo,q_hi,kind,s0_slope,seed";
    match write_csv(out, "sweep.csv", header, &rows) {
        Ok(path) => {
            println!(
                "swept {} pairs on {} worker(s); wrote {}",
                rows.len(),
                workers,
                path.display()
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn sweep_row(
    cfg: &RunConfig,
    grid: Option<&RadialGrid>,
    n: u32,
    a: f64,
    q: f64,
    job_seed: u64,
) -> Result<String, String> {
    let window = power_law_report(n, a).map_err(|e| e.to_string())?;
    let certified = window.contains_pair(q, q);
    let (lo, hi) = match window {
        ExponentWindow::Interval { lo, hi } => (csv_f(lo), csv_f(hi)),
        ExponentWindow::HalfLine { lo } => (csv_f(lo), String::new()),
        ExponentWindow::SplitPair { q1_hi, q2_min, .. } => (csv_f(q1_hi), csv_f(q2_min)),
        ExponentWindow::Empty { .. } => (String::new(), String::new()),
    };
    let slope = match grid {
        Some(g) => {
            let pot = PotentialSpec::power_law(a)
                .sample(g)
                .map_err(|e| e.to_string())?;
            let est = estimate_s(
                g,
                &pot,
                q,
                &cfg.verification.radii_origin,
                cfg.sweep.estimate_trials,
                Side::Origin,
                job_seed,
            )
            .map_err(|e| e.to_string())?;
            csv_f(est.trend_slope)
        }
        None => String::new(),
    };
    Ok(format!(
        "{},{},{certified},{lo},{hi},{},{slope},{job_seed}",
        csv_f(a),
        csv_f(q),
        window.kind_str()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args_for(dir: &Path, config: Option<PathBuf>) -> CommonArgs {
        CommonArgs {
            config,
            jobs: 2,
            seed: None,
            out: Some(dir.to_path_buf()),
            strict: false,
        }
    }

    fn write_config(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("run.toml");
        std::fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn exponents_writes_expected_window_row() {
        let dir = tempfile::tempdir().unwrap();
        let cfgp = write_config(
            dir.path(),
            "[potential]\nkind = \"power_law\"\na = 2.0\n[grid]\npoints = 64\n",
        );
        let args = args_for(dir.path(), Some(cfgp));
        let code = dispatch(Command::Exponents(args));
        assert_eq!(code, EXIT_OK);
        let text = std::fs::read_to_string(dir.path().join("windows.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "n,a_or_params,q_lo,q_hi,kind,origin_rule,infinity_rule"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("5,a=2,"), "{row}");
        assert!(row.contains("interval"), "{row}");
        assert!(row.contains(&csv_f(3.0)), "{row}");
        assert!(row.contains(&csv_f(8.0)), "{row}");
    }

    #[test]
    fn exponents_strict_flags_uncertified_pair() {
        let dir = tempfile::tempdir().unwrap();
        // q = 1.5 lies below the a=2 window (3, 8)
        let cfgp = write_config(
            dir.path(),
            "[potential]\nkind = \"power_law\"\na = 2.0\n\
             [nonlinearity]\nkind = \"pure_power\"\nq = 1.5\n",
        );
        let mut args = args_for(dir.path(), Some(cfgp));
        args.strict = true;
        assert_eq!(dispatch(Command::Exponents(args)), EXIT_UNCERTIFIED);
    }

    #[test]
    fn invalid_config_exits_2() {
        let dir = tempfile::tempdir().unwrap();
        let cfgp = write_config(dir.path(), "[potential]\nkind = \"power_law\"\na = 5.0\n");
        let args = args_for(dir.path(), Some(cfgp));
        assert_eq!(dispatch(Command::Exponents(args)), EXIT_INVALID_CONFIG);

        let missing = args_for(dir.path(), Some(dir.path().join("absent.toml")));
        assert_eq!(dispatch(Command::Solve(missing)), EXIT_INVALID_CONFIG);
    }

    #[test]
    fn trivial_solve_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let cfgp = write_config(
            dir.path(),
            "[grid]\npoints = 128\nr_max = 20.0\n\
             [nonlinearity]\nkind = \"none\"\n",
        );
        let args = args_for(dir.path(), Some(cfgp));
        assert_eq!(dispatch(Command::Solve(args)), EXIT_OK);
        let result = std::fs::read_to_string(dir.path().join("result.csv")).unwrap();
        let row = result.lines().nth(1).unwrap();
        assert!(row.ends_with(",minimizer,true"), "{row}");
        let sol = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
        assert_eq!(sol.lines().count(), 129);
        assert!(dir.path().join("decay.csv").exists());
    }

    #[test]
    fn sweep_is_deterministic_and_certifies_known_pairs() {
        let dir = tempfile::tempdir().unwrap();
        let cfgp = write_config(
            dir.path(),
            "[sweep]\na_values = [0.0, 2.0, 4.0]\nq_values = [1.5, 4.0, 5.0]\n",
        );
        let out_a = dir.path().join("a");
        let out_b = dir.path().join("b");
        let mut args = args_for(&out_a, Some(cfgp.clone()));
        args.jobs = 3;
        assert_eq!(dispatch(Command::Sweep(args)), EXIT_OK);
        let mut args = args_for(&out_b, Some(cfgp));
        args.jobs = 1;
        assert_eq!(dispatch(Command::Sweep(args)), EXIT_OK);
        let a = std::fs::read_to_string(out_a.join("sweep.csv")).unwrap();
        let b = std::fs::read_to_string(out_b.join("sweep.csv")).unwrap();
        assert_eq!(a, b, "scheduling must not change the artifact");

        let certified: Vec<bool> = a
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect();
        // rows are (a, q) in row-major order; a=0 window is (8/3, 12),
        // a=2 is (3, 8), a=4 is a split pair admitting no single q
        assert_eq!(
            certified,
            [false, true, true, false, true, true, false, false, false]
        );
    }
}
