//! `hecke-lab`: command-line front end for the hecke_lab library.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hecke_lab::config::RunConfig;
use hecke_lab::covering::{self, CoverIndex};
use hecke_lab::exponent::{self, CoverageExperiment, ExponentFit};
use hecke_lab::hecke_enum::{self, Limits, RepRecord};
use hecke_lab::spherical::{self, SpectralParam};
use hecke_lab::Error;

const SCHEMA_VERSION: u32 = 1;

/// `println!` that ignores a closed stdout (e.g. when piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// Exit status for invalid input and exceeded resource caps.
const EXIT_INPUT: u8 = 2;
/// Exit status when an exponent fit has too few determined points.
const EXIT_UNDETERMINED: u8 = 3;

#[derive(Parser)]
#[command(name = "hecke-lab", version, about = "Hecke orbits, spherical transforms and covering experiments")]
struct Cli {
    /// Seed for Monte Carlo sampling (overrides the configured seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "HECKE_LAB_THREADS")]
    threads: Option<usize>,
    /// Maximum number of coset representatives any step may enumerate.
    #[arg(long, global = true)]
    cap: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coset representatives of Hecke operators.
    #[command(subcommand)]
    Hecke(HeckeCmd),
    /// Spherical transforms and Hecke eigenvalues.
    #[command(subcommand)]
    Spherical(SphericalCmd),
    /// Coverage of the quotient by balls around a Hecke orbit.
    #[command(subcommand)]
    Cover(CoverCmd),
    /// Minimal covering heights over an epsilon grid and the fitted exponent.
    #[command(subcommand)]
    Kappa(KappaCmd),
}

#[derive(Args)]
struct Level {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    l: u32,
}

#[derive(Subcommand)]
enum HeckeCmd {
    /// One JSON line per left coset representative.
    Enum {
        #[command(flatten)]
        level: Level,
        /// Append a line with the number of cosets in each double coset.
        #[arg(long)]
        partition_buckets: bool,
    },
    /// Number of cosets in each double coset.
    Buckets {
        #[command(flatten)]
        level: Level,
    },
}

#[derive(Args)]
struct Mu {
    /// Spectral parameter entries such as 0.3+2j, -0.5 or 1i, separated by spaces or commas.
    #[arg(long, required = true, value_delimiter = ',')]
    mu: Vec<String>,
}

impl Mu {
    fn parse(&self, n: usize) -> Result<SpectralParam> {
        let items: Vec<&str> = self.mu.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
        let mu = SpectralParam::parse(&items)?;
        if mu.n() != n {
            return Err(Error::Dimension(format!("mu has {} entries, expected {n}", mu.n())).into());
        }
        Ok(mu)
    }
}

#[derive(Subcommand)]
enum SphericalCmd {
    /// h~_{p^l}(mu), lambda_mu(p^l) and the symmetric-function check value.
    Eval {
        #[command(flatten)]
        level: Level,
        #[command(flatten)]
        mu: Mu,
    },
    /// Compares |eta_mu| with chi_{-rho(1-delta)+Re mu} on every torus element up to weight max-l.
    Check {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        max_l: u32,
        #[command(flatten)]
        mu: Mu,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        constant: f64,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Named preset: figure1, kappa-n2-p3 or kappa-n3-p2.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` settings applied after the preset or file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CoverCmd {
    /// Coverage fractions at height k for every configured epsilon.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write the half-plane picture (n = 2 only).
        #[arg(long)]
        svg: bool,
        /// Also write the reduced orbit points.
        #[arg(long)]
        csv: bool,
    },
    /// The figure1 preset with its picture.
    Figure1 {
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum KappaCmd {
    /// Minimal heights over the epsilon grid and the fitted slope.
    Fit {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Checks the regression on synthetic grids with known slope.
    Selftest,
}

/// Folds the values after `--mu` into one `--mu=a,b,...` argument, so that
/// entries such as `-0.3-2j` are not mistaken for options.
fn join_mu_values(args: impl IntoIterator<Item = OsString>) -> Vec<OsString> {
    let mut out = Vec::new();
    let mut args = args.into_iter().peekable();
    while let Some(arg) = args.next() {
        if arg != "--mu" {
            out.push(arg);
            continue;
        }
        let mut values = Vec::new();
        while let Some(next) = args.next_if(|a| !a.to_string_lossy().starts_with("--")) {
            values.push(next.to_string_lossy().into_owned());
        }
        if values.is_empty() {
            out.push(arg);
        } else {
            out.push(format!("--mu={}", values.join(",")).into());
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse_from(join_mu_values(std::env::args_os()));
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::DegenerateGrid(_)) => EXIT_UNDETERMINED,
        Some(Error::ReductionStalled(_) | Error::Singular | Error::NotPositiveDefinite) => 1,
        Some(_) => EXIT_INPUT,
        None => 1,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!(Error::InvalidArgument("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("starting the worker pool")?;
    }
    let limits = |default: Limits| Limits { max_reps: cli.cap.unwrap_or(default.max_reps) };
    match &cli.command {
        Command::Hecke(cmd) => hecke(cmd, limits(Limits::default())),
        Command::Spherical(cmd) => spherical_cmd(cmd, limits(Limits::default())),
        Command::Cover(CoverCmd::Run { config, svg, csv }) => {
            let cfg = resolve_config(config, &cli)?;
            cover(&cfg, output_dir(config.out.as_deref(), &cfg), *svg, *csv)
        }
        Command::Cover(CoverCmd::Figure1 { set, out }) => {
            let args = ConfigArgs { preset: Some("figure1".into()), config: None, set: set.clone(), out: out.clone() };
            let cfg = resolve_config(&args, &cli)?;
            cover(&cfg, output_dir(out.as_deref(), &cfg), true, false)
        }
        Command::Kappa(KappaCmd::Fit { config }) => {
            let cfg = resolve_config(config, &cli)?;
            kappa(&cfg, output_dir(config.out.as_deref(), &cfg))
        }
        Command::Kappa(KappaCmd::Selftest) => selftest(),
    }
}

fn resolve_config(args: &ConfigArgs, cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(name), _) => RunConfig::preset(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::parse(&text)?
        }
        (None, None) => RunConfig::default(),
    };
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(cap) = cli.cap {
        cfg.max_reps = cap;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(flag: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&cfg.output_dir))
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn hecke(cmd: &HeckeCmd, limits: Limits) -> Result<ExitCode> {
    use std::io::Write;
    match cmd {
        HeckeCmd::Enum { level, partition_buckets } => {
            let reps = hecke_enum::enumerate_cosets(level.n, level.p, level.l, &limits)?;
            let stdout = std::io::stdout();
            let mut out = std::io::BufWriter::new(stdout.lock());
            for rep in &reps {
                writeln!(out, "{}", RepRecord::from_rep(rep).to_json_line())?;
            }
            if *partition_buckets {
                let buckets = hecke_enum::partition_buckets(level.n, level.p, level.l, &limits)?;
                writeln!(out, "{}", buckets_json(level, &buckets))?;
            }
            out.flush()?;
        }
        HeckeCmd::Buckets { level } => {
            let buckets = hecke_enum::partition_buckets(level.n, level.p, level.l, &limits)?;
            say!("{}", serde_json::to_string_pretty(&buckets_json(level, &buckets))?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn buckets_json(level: &Level, buckets: &std::collections::BTreeMap<hecke_enum::Partition, u64>) -> Value {
    let entries: Vec<Value> = buckets.iter().map(|(q, c)| json!({ "partition": to_json(q), "count": c })).collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "config": { "n": level.n, "p": level.p, "l": level.l },
        "total": buckets.values().sum::<u64>(),
        "buckets": entries,
    })
}

fn spherical_cmd(cmd: &SphericalCmd, limits: Limits) -> Result<ExitCode> {
    let value = match cmd {
        SphericalCmd::Eval { level, mu } => {
            let mu = mu.parse(level.n)?;
            let eval = spherical::evaluate(level.n, level.p, level.l, &mu)?;
            let mut v = to_json(&eval);
            v["schema_version"] = json!(SCHEMA_VERSION);
            v["config"] = json!({ "n": level.n, "p": level.p, "l": level.l, "mu": mu.to_strings() });
            v
        }
        SphericalCmd::Check { n, p, max_l, mu, delta, constant } => {
            let given = mu.parse(*n)?;
            let mu = given.sort_to_dominant();
            let reports = spherical::sweep_eta_bound(*n, *p, *max_l, &mu, *delta, *constant, &limits)?;
            let max_ratio = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
            json!({
                "schema_version": SCHEMA_VERSION,
                "config": { "n": n, "p": p, "max_l": max_l, "mu": given.to_strings(), "delta": delta, "constant": constant },
                "dominant_mu": mu.to_strings(),
                "max_ratio": max_ratio,
                "pass": reports.iter().all(|r| r.pass),
                "points": to_json(&reports),
            })
        }
    };
    say!("{}", serde_json::to_string_pretty(&value)?);
    Ok(ExitCode::SUCCESS)
}

/// Files of one command, written together once all computation succeeded.
/// If any write fails, the files already written are removed again.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: PathBuf) -> Self {
        Self { dir, files: Vec::new() }
    }

    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn commit(self) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = self.dir.join(name);
            if let Err(e) = fs::write(&path, contents) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                let _ = fs::remove_file(&path);
                return Err(e).with_context(|| format!("writing {}", path.display()));
            }
            written.push(path);
        }
        Ok(written)
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cover(cfg: &RunConfig, dir: PathBuf, svg: bool, csv: bool) -> Result<ExitCode> {
    let x0 = cfg.x0.resolve(cfg.n)?;
    let sampler = cfg.sampler();
    let cloud = covering::orbit_points(&x0, cfg.n, cfg.p, cfg.k, &cfg.limits())?;
    let samples = covering::sample_region(cfg.n, &cfg.region, cfg.samples, cfg.seed)?;
    let mut reports = Vec::new();
    for &eps in &cfg.epsilons {
        let index = CoverIndex::new(&cloud, sampler.radius(eps))?;
        reports.push(covering::coverage_of_samples(&index, &samples, &cloud, eps, &sampler)?);
    }
    let mut outputs = Outputs::new(dir);
    outputs.add(
        "coverage.json",
        pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "config": to_json(cfg),
            "orbit_size": cloud.points.len(),
            "reports": to_json(&reports),
        })),
    );
    if svg {
        if cfg.n != 2 {
            bail!(Error::InvalidArgument("--svg needs n = 2".into()));
        }
        outputs.add("coverage.svg", covering::render_svg(&cloud, sampler.radius(cfg.epsilons[0]), cfg.y_view)?);
    }
    if csv {
        outputs.add("orbit.csv", covering::orbit_csv(&cloud));
    }
    for r in &reports {
        say!(
            "n={} p={} k={} epsilon={:.6e}: covered {}/{} = {:.4} +- {:.4} (orbit size {})",
            r.n, r.p, r.k, r.epsilon, r.covered, r.samples, r.fraction, r.stderr, r.orbit_size
        );
    }
    for path in outputs.commit()? {
        say!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn kappa(cfg: &RunConfig, dir: PathBuf) -> Result<ExitCode> {
    let x0 = cfg.x0.resolve(cfg.n)?;
    let mut exp = CoverageExperiment::new(x0, cfg.n, cfg.p, cfg.sampler(), cfg.limits(), cfg.k_max)?;
    let grid = exponent::sweep(&mut exp, &cfg.epsilons, cfg.target)?;
    say!("{:>12} {:>9} {:>6} {:>9} {:>7} {:>9} {:>6}", "epsilon", "abscissa", "k_min", "fraction", "k_half", "bound", "check");
    for g in &grid {
        let show = |k: Option<u32>| k.map_or("-".to_string(), |k| k.to_string());
        say!(
            "{:>12.6e} {:>9.4} {:>6} {:>9} {:>7} {:>9.4} {:>6}",
            g.epsilon,
            g.abscissa,
            show(g.k_min),
            g.achieved_fraction.map_or("-".to_string(), |f| format!("{f:.4}")),
            show(g.k_half),
            g.heuristic_bound,
            if g.heuristic_ok { "ok" } else { "FAIL" },
        );
    }
    let fit: ExponentFit = match exponent::fit_kappa(cfg.n, cfg.p, &cfg.x0.to_string(), grid) {
        Ok(fit) => fit,
        Err(e @ Error::DegenerateGrid(_)) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_UNDETERMINED));
        }
        Err(e) => return Err(e.into()),
    };
    say!("kappa_hat = {:.4} +- {:.4} (intercept {:.4}, {} determined points)", fit.kappa_hat, fit.slope_stderr, fit.intercept, fit.determined);
    let mut outputs = Outputs::new(dir);
    outputs.add(
        "kappa.json",
        pretty(&json!({ "schema_version": SCHEMA_VERSION, "config": to_json(cfg), "fit": to_json(&fit) })),
    );
    outputs.add("kappa.csv", exponent::fit_csv(&fit));
    for path in outputs.commit()? {
        say!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn selftest() -> Result<ExitCode> {
    let mut cases = Vec::new();
    let mut ok = true;
    for (n, p) in [(2usize, 3u64), (3, 2), (4, 2)] {
        for c in [1.0, 2.0] {
            let eps: Vec<f64> = (1..=10).map(|j| (p as f64).powi(-j)).collect();
            let fit = exponent::fit_kappa(n, p, "synthetic", exponent::synthetic_grid(n, p, c, &eps))?;
            let pass = (fit.kappa_hat - c).abs() <= 0.1;
            ok &= pass;
            say!("n={n} p={p} slope {c}: kappa_hat = {:.4} {}", fit.kappa_hat, if pass { "ok" } else { "FAIL" });
            cases.push(json!({ "n": n, "p": p, "slope": c, "kappa_hat": fit.kappa_hat, "pass": pass }));
        }
    }
    say!("{}", serde_json::to_string_pretty(&json!({ "schema_version": SCHEMA_VERSION, "cases": cases, "pass": ok }))?);
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
