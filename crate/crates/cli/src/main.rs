//! `stabvar`: number-variance curves, particle simulations, limit-process
//! diagnostics and the acceptance suite.

mod grid;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use stabvar::acceptance::{run_acceptance, AcceptOptions};
use stabvar::gp;
use stabvar::io::{num, write_csv, write_json, write_matrix_csv, Meta};
use stabvar::numvar::{
    count_variance, numvar, numvar_brownian_closed, numvar_cauchy_closed, poisson_tv_bounds, saturation_level,
    DEFAULT_TOL,
};
use stabvar::particles::{
    clt_diagnostic, empirical_numvar, plan_truncation_with, simulate_counts, TailRule, DEFAULT_BUDGET,
};
use stabvar::{Error, SystemConfig};

use grid::parse_grid;

#[derive(Parser, Debug)]
#[command(name = "stabvar", version, about = "Number variance of lattice systems of stable particles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Number-variance curve V(L) by quadrature.
    Numvar(NumvarArgs),
    /// Monte Carlo counts with variance, Poisson and CLT summaries.
    Simulate(SimulateArgs),
    /// Covariance, paths and diagnostics of the limiting Gaussian process.
    Gp(GpArgs),
    /// Run the acceptance suite and write a JSON report.
    Accept(AcceptArgs),
}

#[derive(Args, Debug, Clone)]
struct SystemArgs {
    /// Stability index in (0, 2].
    #[arg(long)]
    alpha: f64,
    /// Scale: the characteristic function is exp(-c t |θ|^α).
    #[arg(long)]
    c: f64,
    /// Lattice spacing.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
}

impl SystemArgs {
    fn config(&self) -> Result<SystemConfig, Failure> {
        SystemConfig::new(self.alpha, self.c, self.a, self.t).map_err(Failure::from)
    }

    fn meta(&self, command: &str) -> Meta {
        Meta::new()
            .with("command", command)
            .with("alpha", self.alpha)
            .with("c", self.c)
            .with("a", self.a)
            .with("t", self.t)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct NumvarArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Interval lengths: `start:stop:step`, `log:start:stop:points` or `x,y,...`.
    #[arg(long = "L")]
    l: String,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Rule {
    Exclude,
    Compensated,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long = "L")]
    l: f64,
    #[arg(long, default_value_t = 100_000)]
    replications: usize,
    #[arg(long, env = "STABVAR_SEED", default_value_t = 1)]
    seed: u64,
    /// Truncation tolerance for the particle window.
    #[arg(long, default_value_t = 1e-6)]
    tol_trunc: f64,
    #[arg(long, value_enum, default_value_t = Rule::Compensated)]
    rule: Rule,
    /// Maximum number of simulated particles.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Summary JSON path; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional CSV of raw counts (`replication,count`).
    #[arg(long)]
    counts: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(id = "mode", required = true, multiple = false)]
struct GpMode {
    /// Covariance matrix on --grid (CSV).
    #[arg(long, group = "mode")]
    cov: bool,
    /// Sample paths on --grid (CSV `replication,s,value`).
    #[arg(long, group = "mode")]
    paths: bool,
    /// Long-memory slope of increment covariances over --u-grid.
    #[arg(long, group = "mode")]
    slope: bool,
    /// Scaling identity gap for factor --b on --grid.
    #[arg(long, group = "mode")]
    scaling: bool,
    /// fBm rescaling ratios over --b-grid and --grid (alpha < 1).
    #[arg(long, group = "mode")]
    fbm_limit: bool,
    /// Small-time Brownian ratios over --eps-grid and --grid.
    #[arg(long, group = "mode")]
    small_time: bool,
    /// Markov-violation witness search.
    #[arg(long, group = "mode")]
    witness: bool,
    /// Local Hurst index diagnostic on --grid.
    #[arg(long, group = "mode")]
    hurst: bool,
}

#[derive(Args, Debug)]
struct GpArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    mode: GpMode,
    #[arg(long, default_value = "1:5:1")]
    grid: String,
    #[arg(long, default_value = "log:100:10000:21")]
    u_grid: String,
    #[arg(long, default_value = "log:10:10000:4")]
    b_grid: String,
    #[arg(long, default_value = "log:0.0001:0.1:4")]
    eps_grid: String,
    #[arg(long, default_value_t = 2.0)]
    b: f64,
    /// Increment lengths for --slope.
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Reference constant for --hurst; defaults to 1/a.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    replications: usize,
    #[arg(long, env = "STABVAR_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AcceptArgs {
    #[arg(long, env = "STABVAR_SEED", default_value_t = 1)]
    seed: u64,
    /// Report path; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true, default_value_t = 1.0)]
    tolerance_scale: f64,
    #[arg(long, hide = true, default_value_t = 20)]
    mc_seeds: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
    Acceptance,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::InsufficientReplications { .. }
            | Error::FbmLimitRequiresAlphaBelowOne(_)
            | Error::MomentDoesNotExist { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("cannot write output: {e}"))
    }
}

fn grid_arg(name: &str, spec: &str) -> Result<Vec<f64>, Failure> {
    parse_grid(spec).map_err(|e| Failure::Usage(format!("--{name}: {e}")))
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_numvar(args: &NumvarArgs) -> Result<(), Failure> {
    let config = args.system.config()?;
    let ls = grid_arg("L", &args.l)?;
    let (alpha, c, a, t) = (config.alpha(), config.c(), config.a, config.t);
    // Closed forms hold for any c after rescaling time.
    let closed: Option<Box<dyn Fn(f64) -> f64>> = if alpha == 2.0 {
        Some(Box::new(move |l| numvar_brownian_closed(a, 2.0 * c * t, l)))
    } else if alpha == 1.0 {
        Some(Box::new(move |l| numvar_cauchy_closed(a, c * t, l)))
    } else {
        None
    };
    let sat = if alpha > 1.0 { Some(saturation_level(&config)?) } else { None };
    let mut meta = args.system.meta("numvar").with("L", &args.l).with("tol", format!("{:e}", args.tol));
    let mut records = Vec::with_capacity(ls.len());
    for &l in &ls {
        let v = numvar(&config, l, args.tol)?;
        if let Some(note) = &v.note {
            if !meta.0.iter().any(|(k, _)| k == "note") {
                meta.push("note", note);
            }
        }
        records.push((l, v.value, v.err, closed.as_ref().map(|f| f(l))));
    }
    let mut w = sink(&args.out)?;
    match args.format {
        Format::Csv => {
            let mut header = vec!["L", "V", "err"];
            if closed.is_some() {
                header.push("closed_form");
            }
            if sat.is_some() {
                header.push("saturation");
            }
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|&(l, v, e, cf)| {
                    let mut row = vec![num(l), num(v), num(e)];
                    row.extend(cf.map(num));
                    row.extend(sat.map(num));
                    row
                })
                .collect();
            write_csv(&mut w, &meta, &header, &rows)?;
        }
        Format::Json => {
            let points: Vec<Value> = records
                .iter()
                .map(|&(l, v, e, cf)| json!({ "L": l, "V": v, "err": e, "closed_form": cf }))
                .collect();
            write_json(&mut w, &meta, &json!({ "saturation": sat, "points": points }))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let config = args.system.config()?;
    let l = args.l;
    let rule = match args.rule {
        Rule::Exclude => TailRule::Exclude,
        Rule::Compensated => TailRule::PoissonCompensated,
    };
    if args.replications < stabvar::particles::stats::MIN_REPLICATIONS {
        return Err(Failure::Usage(format!(
            "--replications must be at least {}",
            stabvar::particles::stats::MIN_REPLICATIONS
        )));
    }
    let plan = plan_truncation_with(&config, l, args.tol_trunc, rule, args.budget)?;
    let sample = simulate_counts(&config, l, &plan, args.replications, args.seed)?;
    let emp = empirical_numvar(&sample)?;
    let v = numvar(&config, l, DEFAULT_TOL)?;
    let total = count_variance(&config, l, DEFAULT_TOL)?;
    let lambda = l / config.a;
    let tv = if l > 0.0 { Some(poisson_tv_bounds(lambda, v.value)?) } else { None };
    let clt = if total > 0.0 { Some(clt_diagnostic(&sample, total, None)?) } else { None };
    let meta = args
        .system
        .meta("simulate")
        .with("L", l)
        .with("replications", args.replications)
        .with("seed", args.seed)
        .with("tol_trunc", format!("{:e}", args.tol_trunc))
        .with("rule", format!("{:?}", args.rule).to_lowercase());
    let summary = json!({
        "analytic_V": v.value,
        "analytic_V_err": v.err,
        "count_variance": total,
        "note": v.note,
        "empirical": emp,
        "ci_contains_count_variance": emp.ci.0 <= total && total <= emp.ci.1,
        "poisson_tv_bounds": tv,
        "clt": clt,
        "plan": plan,
    });
    let mut w = sink(&args.out)?;
    write_json(&mut w, &meta, &summary)?;
    w.flush()?;
    if let Some(path) = &args.counts {
        let mut cw = BufWriter::new(File::create(path)?);
        let rows: Vec<Vec<String>> = sample
            .counts
            .iter()
            .enumerate()
            .map(|(i, c)| vec![i.to_string(), c.to_string()])
            .collect();
        write_csv(&mut cw, &meta, &["replication", "count"], &rows)?;
        cw.flush()?;
    }
    Ok(())
}

fn ratio_records(key: &str, rows: &[gp::RatioRow]) -> Vec<Value> {
    rows.iter()
        .map(|r| {
            let mut m = serde_json::Map::new();
            m.insert(key.into(), r.param.into());
            m.insert("s".into(), r.s.into());
            m.insert("value".into(), r.value.into());
            m.insert("target".into(), r.target.into());
            m.insert("ratio".into(), r.ratio.into());
            Value::Object(m)
        })
        .collect()
}

fn cmd_gp(args: &GpArgs) -> Result<(), Failure> {
    let config = args.system.config()?;
    let m = &args.mode;
    let mut meta = args.system.meta("gp");
    let mut w = sink(&args.out)?;
    if m.cov || m.paths {
        let grid = grid_arg("grid", &args.grid)?;
        meta.push("grid", &args.grid);
        let cov = gp::cov_g(&config, &grid)?;
        meta.push("jitter", num(cov.jitter));
        if m.cov {
            write_matrix_csv(&mut w, &meta, &grid, &cov.matrix)?;
        } else {
            meta.push("replications", args.replications);
            meta.push("seed", args.seed);
            let sample = gp::sample_paths(&cov, args.replications, args.seed);
            let rows: Vec<Vec<String>> = sample
                .paths
                .iter()
                .enumerate()
                .flat_map(|(r, path)| {
                    grid.iter()
                        .zip(path)
                        .map(move |(&s, &x)| vec![r.to_string(), num(s), num(x)])
                })
                .collect();
            write_csv(&mut w, &meta, &["replication", "s", "value"], &rows)?;
        }
    } else if m.slope {
        let us = grid_arg("u-grid", &args.u_grid)?;
        meta.push("u_grid", &args.u_grid);
        meta.push("s", args.s);
        meta.push("r", args.r);
        let fit = gp::longmem_slope(&config, args.s, args.r, &us)?;
        let points: Vec<Value> = fit.points.iter().map(|&(u, v)| json!({ "u": u, "value": v })).collect();
        write_json(
            &mut w,
            &meta,
            &json!({
                "slope": fit.slope,
                "target": -(config.alpha() + 1.0),
                "intercept": fit.intercept,
                "dropped": fit.dropped,
                "points": points,
            }),
        )?;
    } else if m.scaling {
        let grid = grid_arg("grid", &args.grid)?;
        meta.push("grid", &args.grid);
        meta.push("b", args.b);
        let gap = gp::scaling_check(&config, args.b, &grid)?;
        write_json(&mut w, &meta, &json!({ "b": args.b, "max_abs_gap": gap }))?;
    } else if m.fbm_limit {
        let bs = grid_arg("b-grid", &args.b_grid)?;
        let ss = grid_arg("grid", &args.grid)?;
        meta.push("b_grid", &args.b_grid);
        meta.push("grid", &args.grid);
        let k = gp::fbm_constant(&config)?;
        let rows = gp::fbm_limit_check(&config, &bs, &ss)?;
        write_json(&mut w, &meta, &json!({ "k": k, "rows": ratio_records("b", &rows) }))?;
    } else if m.small_time {
        let es = grid_arg("eps-grid", &args.eps_grid)?;
        let ss = grid_arg("grid", &args.grid)?;
        meta.push("eps_grid", &args.eps_grid);
        meta.push("grid", &args.grid);
        let rows = gp::small_time_brownian_check(&config, &es, &ss)?;
        write_json(&mut w, &meta, &json!({ "rows": ratio_records("eps", &rows) }))?;
    } else if m.witness {
        let found = gp::markov_violation_witness(&config)?;
        write_json(&mut w, &meta, &found)?;
    } else if m.hurst {
        let grid = grid_arg("grid", &args.grid)?;
        let kappa = args.kappa.unwrap_or(1.0 / config.a);
        meta.push("grid", &args.grid);
        meta.push("kappa", kappa);
        let profile = gp::hurst_profile(&config, &grid, kappa)?;
        write_json(&mut w, &meta, &profile)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_accept(args: &AcceptArgs) -> Result<(), Failure> {
    if !(args.tolerance_scale >= 0.0) || args.mc_seeds == 0 {
        return Err(Failure::Usage("invalid acceptance options".into()));
    }
    let report = run_acceptance(&AcceptOptions {
        seed: args.seed,
        tolerance_scale: args.tolerance_scale,
        mc_seeds: args.mc_seeds,
    });
    for c in &report.criteria {
        eprintln!("{}", c.line());
    }
    let mut w = sink(&args.out)?;
    writeln!(w, "{}", report.to_json())?;
    w.flush()?;
    if report.all_pass {
        Ok(())
    } else {
        Err(Failure::Acceptance)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Numvar(a) => cmd_numvar(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Gp(a) => cmd_gp(a),
        Command::Accept(a) => cmd_accept(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Acceptance) => {
            eprintln!("acceptance: at least one criterion failed");
            ExitCode::from(3)
        }
    }
}
