//! Command-line front end. Every command reads a JSON config and writes its
//! outputs under `--out` (default `./out`).
//!
//! Exit codes: 0 ok, 1 other failure (including "not trophic"), 2 parse
//! error, 3 team too large, 4 every member balanced, 5 trivial kernel,
//! 6 census failure, 7 bound inconsistency, 8 resource space not planar,
//! 9 simulation blew up.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use crate::certificates::{team_certificate, verify_dieout, BetaSource, CertError};
use crate::halfplanes::{default_zmax, vertices, write_grid, HalfplaneError};
use crate::integrator::{make_oscillator, simulate, write_events, SimError, SimOutput};
use crate::model::{from_f64, parse_rational, to_f64, Config, ModelError, ResourceSignal, Trajectory};
use crate::nullspace::{team, NullTeam, NullspaceError, TeamOptions, DEFAULT_SUBSET_CAP};
use crate::report::{
    to_json, CertifyDoc, HalfplanesDoc, SimulationDoc, TeamDoc, TrappingDoc, TrophicDoc, VerifyDoc,
};
use crate::trophic::{check_trophic, trapping_region, TrappingRegion};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_TOO_LARGE: i32 = 3;
pub const EXIT_ALL_BALANCED: i32 = 4;
pub const EXIT_TRIVIAL_KERNEL: i32 = 5;
pub const EXIT_CENSUS: i32 = 6;
pub const EXIT_BETA_MISMATCH: i32 = 7;
pub const EXIT_NOT_PLANAR: i32 = 8;
pub const EXIT_BLOWUP: i32 = 9;

#[derive(Parser, Debug)]
#[command(name = "dieout", version, about = "Extinction certificates for generalized Lotka-Volterra systems")]
pub struct Cli {
    /// JSON system config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Override a growth coefficient, e.g. `--set-c 2=-3/5` (1-based index).
    #[arg(long = "set-c", global = true, value_name = "I=VALUE")]
    pub set_c: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the trophic sign conditions and build the trapping region.
    CheckTrophic,
    /// Enumerate the minimal-support null vectors of S^T.
    Team(TeamArgs),
    /// Orient the team and compute die-out certificates.
    Certify(CertifyArgs),
    /// Integrate the system and write the trajectory.
    Simulate(SimulateArgs),
    /// Check a trajectory against the team certificates.
    Verify(VerifyArgs),
    /// Classify the planar resource space by the sign of each growth rate.
    Halfplanes(HalfplanesArgs),
}

#[derive(Args, Debug)]
pub struct TeamArgs {
    /// Largest support size to examine.
    #[arg(long)]
    pub max_support: Option<usize>,
    /// Refuse to test more candidate supports than this.
    #[arg(long, default_value_t = DEFAULT_SUBSET_CAP)]
    pub cap: u64,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    /// Bound on every coordinate for all time.
    #[arg(long, conflicts_with_all = ["from_trap", "traj"])]
    pub beta: Option<f64>,
    /// Take the bound from the trapping region (classical trophic systems only).
    #[arg(long, conflicts_with = "traj")]
    pub from_trap: bool,
    /// Take the bound from a trajectory CSV written by `simulate`.
    #[arg(long)]
    pub traj: Option<PathBuf>,
    #[command(flatten)]
    pub team: TeamArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Integrate x rather than ln x.
    #[arg(long)]
    pub linear: bool,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Keep every n-th step.
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Trajectory CSV written by `simulate`.
    #[arg(long)]
    pub traj: PathBuf,
    /// Bound used for the certificates; defaults to the config, then the trajectory.
    #[arg(long)]
    pub beta: Option<f64>,
    #[command(flatten)]
    pub team: TeamArgs,
}

#[derive(Args, Debug)]
pub struct HalfplanesArgs {
    /// Grid intervals per axis.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    /// Upper end of both axes, rational; defaults to 5/4 of the largest vertex coordinate.
    #[arg(long)]
    pub zmax: Option<String>,
}

/// A failed command: message and exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::new(EXIT_PARSE, e.to_string())
    }
}

impl From<NullspaceError> for Failure {
    fn from(e: NullspaceError) -> Self {
        match e {
            NullspaceError::TooLarge { .. } => Failure::new(EXIT_TOO_LARGE, e.to_string()),
            _ => Failure::new(EXIT_FAILURE, e.to_string()),
        }
    }
}

impl From<CertError> for Failure {
    fn from(e: CertError) -> Self {
        let code = match e {
            CertError::AllBalanced => EXIT_ALL_BALANCED,
            CertError::BetaMismatch { .. } => EXIT_BETA_MISMATCH,
            _ => EXIT_FAILURE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::Blowup { .. } => EXIT_BLOWUP,
            SimError::Model(_) => EXIT_PARSE,
            _ => EXIT_FAILURE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<HalfplaneError> for Failure {
    fn from(e: HalfplaneError) -> Self {
        let code = match e {
            HalfplaneError::NotPlanar(_) => EXIT_NOT_PLANAR,
            _ => EXIT_FAILURE,
        };
        Failure::new(code, e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display()))
}

type Outcome = Result<i32, Failure>;

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let config = load_config(cli)?;
    fs::create_dir_all(&cli.out).map_err(|e| io_failure(&cli.out, e))?;
    match &cli.command {
        Command::CheckTrophic => cmd_check_trophic(&config, &cli.out),
        Command::Team(a) => cmd_team(&config, a, &cli.out),
        Command::Certify(a) => cmd_certify(&config, a, &cli.out),
        Command::Simulate(a) => cmd_simulate(&config, a, &cli.out),
        Command::Verify(a) => cmd_verify(&config, a, &cli.out),
        Command::Halfplanes(a) => cmd_halfplanes(&config, a, &cli.out),
    }
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::new(EXIT_PARSE, "--config is required"))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    let mut config = Config::from_json(&text)?;
    for item in &cli.set_c {
        let bad = || Failure::new(EXIT_PARSE, format!("--set-c expects I=VALUE, got {item:?}"));
        let (i, v) = item.split_once('=').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        if i == 0 || i > config.spec.d() {
            return Err(bad());
        }
        let mut c = config.spec.c.clone();
        c[i - 1] = parse_rational(v)?;
        config.spec = config.spec.with_c(c)?;
    }
    Ok(config)
}

fn write(path: PathBuf, text: &str) -> Result<(), Failure> {
    fs::write(&path, text).map_err(|e| io_failure(&path, e))
}

fn create(path: &Path) -> Result<fs::File, Failure> {
    fs::File::create(path).map_err(|e| io_failure(path, e))
}

fn cmd_check_trophic(config: &Config, out: &Path) -> Outcome {
    let check = check_trophic(&config.spec).map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?;
    let trapping = if check.pass { Some(trapping_region(&config.spec).expect("trophic")) } else { None };
    let doc = TrophicDoc { check: check.clone(), trapping: trapping.as_ref().map(TrappingDoc::new) };
    write(out.join("trophic.json"), &to_json(&doc))?;
    match &trapping {
        Some(r) => {
            let s = r.report();
            println!("trophic: pass (epsilon = {}, A = {}, B = {}, lambda = {})", s.epsilon, s.a, s.b, s.lambda);
            Ok(EXIT_OK)
        }
        None => {
            println!("trophic: fail (T1 {:?}, T2 {:?})", check.t1_violations, check.t2_violations);
            Ok(EXIT_FAILURE)
        }
    }
}

fn team_options(a: &TeamArgs) -> TeamOptions {
    TeamOptions { max_support: a.max_support, subset_cap: a.cap }
}

fn cmd_team(config: &Config, a: &TeamArgs, out: &Path) -> Outcome {
    let t = team(&config.spec, team_options(a))?;
    write(out.join("team.json"), &to_json(&TeamDoc::new(&config.spec, &t)))?;
    println!("k = {}, members = {}", t.k, t.members.len());
    if !t.is_generic() {
        println!("note: member count differs from the generic count {}", t.generic_count);
    }
    Ok(EXIT_OK)
}

/// The trapping-region bound `max(λ, V(x0)) / ε^d` on every coordinate.
fn trap_beta(config: &Config) -> Result<(f64, TrappingRegion), Failure> {
    let identity = matches!(&config.signal, ResourceSignal::Coupled { mapping }
        if mapping.iter().enumerate().all(|(j, &m)| m == j + 1));
    if !identity || !config.spec.is_square() {
        return Err(Failure::new(EXIT_FAILURE, "--from-trap needs a classical system (coupled identity signal)"));
    }
    let region = trapping_region(&config.spec).map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?;
    let v0 = region.v_value(&config.sim.x0);
    Ok((region.coordinate_bound(to_f64(&region.lambda).max(v0)), region))
}

fn oscillator_warnings(config: &Config) -> Result<Vec<String>, Failure> {
    match &config.signal {
        ResourceSignal::Oscillator(o) => Ok(make_oscillator(
            &config.spec,
            o.z_star.clone(),
            o.z_starstar.clone(),
            (o.watch_low, o.watch_high),
            o.m,
        )?
        .1),
        _ => Ok(Vec::new()),
    }
}

fn run_simulation(config: &Config) -> Result<SimOutput, Failure> {
    oscillator_warnings(config)?;
    Ok(simulate(&config.spec, &config.signal, &config.sim)?)
}

fn team_or_trivial(config: &Config, a: &TeamArgs) -> Result<NullTeam, Failure> {
    let t = team(&config.spec, team_options(a))?;
    if t.k == 0 {
        println!("kernel is trivial");
        return Err(Failure::new(EXIT_TRIVIAL_KERNEL, "nothing to certify"));
    }
    Ok(t)
}

fn cmd_certify(config: &Config, a: &CertifyArgs, out: &Path) -> Outcome {
    let t = match team_or_trivial(config, &a.team) {
        Err(f) if f.code == EXIT_TRIVIAL_KERNEL => return Ok(EXIT_TRIVIAL_KERNEL),
        other => other?,
    };
    let mut trapping = None;
    let (beta, source) = if let Some(b) = a.beta {
        (b, BetaSource::Flag)
    } else if a.from_trap {
        let (b, region) = trap_beta(config)?;
        trapping = Some(region);
        (b, BetaSource::TrappingRegion)
    } else if let Some(path) = &a.traj {
        let traj = read_traj(path, config.spec.d())?;
        (traj.beta, BetaSource::Trajectory)
    } else if let Some(b) = config.beta {
        (b, BetaSource::Config)
    } else {
        (run_simulation(config)?.trajectory.beta, BetaSource::Simulation)
    };
    let tc = match team_certificate(&t, &config.spec.c, beta, &config.sim.x0) {
        Err(CertError::AllBalanced) => {
            let report = crate::certificates::must_die_report(&t, &config.spec.c);
            write(out.join("certificates.json"), &to_json(&report))?;
            println!("all {} members are balanced (nu . C = 0): coexistence regime", t.members.len());
            return Ok(EXIT_ALL_BALANCED);
        }
        other => other?,
    };
    let doc = CertifyDoc::new(&config.spec, &t, &tc, source, trapping.as_ref());
    write(out.join("certificates.json"), &to_json(&doc))?;
    println!(
        "k = {}, certified = {}, balanced = {}, must die = {:?}",
        tc.k,
        tc.certificates.len(),
        tc.balanced.len(),
        doc.must_die.definite
    );
    Ok(EXIT_OK)
}

fn cmd_simulate(config: &Config, a: &SimulateArgs, out: &Path) -> Outcome {
    let mut config = config.clone();
    if a.linear {
        config.sim.log_space = false;
    }
    if let Some(dt) = a.dt {
        config.sim.dt = dt;
    }
    if let Some(h) = a.horizon {
        config.sim.horizon = h;
    }
    if let Some(s) = a.stride {
        config.sim.sample_stride = s;
    }
    config.sim.validate(config.spec.d())?;
    let traj_path = out.join("trajectory.csv");
    let warnings = oscillator_warnings(&config)?;
    let run = match simulate(&config.spec, &config.signal, &config.sim) {
        Err(SimError::Blowup { t, coordinate, partial }) => {
            partial.write_csv(create(&traj_path)?)?;
            return Err(Failure::new(
                EXIT_BLOWUP,
                format!("coordinate {coordinate} exceeded the blow-up threshold at t = {t}; partial run written"),
            ));
        }
        other => other?,
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    run.trajectory.write_csv(create(&traj_path)?)?;
    if matches!(config.signal, ResourceSignal::Oscillator(_)) {
        write_events(&run.switches, create(&out.join("events.csv"))?)?;
    }
    write(out.join("simulation.json"), &to_json(&SimulationDoc::new(&run, warnings)))?;
    println!("steps = {}, samples = {}, beta = {}", run.steps, run.trajectory.samples.len(), run.trajectory.beta);
    Ok(EXIT_OK)
}

fn read_traj(path: &Path, d: usize) -> Result<Trajectory, Failure> {
    let file = fs::File::open(path).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    Ok(Trajectory::read_csv(file, d)?)
}

fn cmd_verify(config: &Config, a: &VerifyArgs, out: &Path) -> Outcome {
    let traj = read_traj(&a.traj, config.spec.d())?;
    let first = traj.samples.first().ok_or_else(|| Failure::new(EXIT_PARSE, "trajectory has no samples"))?;
    if first.t != 0.0 {
        return Err(Failure::new(EXIT_PARSE, "trajectory must start at t = 0"));
    }
    if traj.beta > config.sim.blowup {
        return Err(Failure::new(
            EXIT_BETA_MISMATCH,
            format!("trajectory exceeds the blow-up threshold ({}); no finite bound", traj.beta),
        ));
    }
    let x0 = first.x.clone();
    let (beta, source) = match (a.beta, config.beta) {
        (Some(b), _) => (b, BetaSource::Flag),
        (None, Some(b)) => (b, BetaSource::Config),
        (None, None) => (traj.beta, BetaSource::Trajectory),
    };
    let t = match team_or_trivial(config, &a.team) {
        Err(f) if f.code == EXIT_TRIVIAL_KERNEL => return Ok(EXIT_TRIVIAL_KERNEL),
        other => other?,
    };
    let tc = team_certificate(&t, &config.spec.c, beta, &x0)?;
    let report = verify_dieout(&traj, &tc)?;
    let doc = VerifyDoc { beta_source: source, report };
    write(out.join("dieout_report.json"), &to_json(&doc))?;
    let r = &doc.report;
    if r.pass {
        println!("census: pass (min_census = {} >= k = {})", r.min_census, r.k);
        Ok(EXIT_OK)
    } else {
        println!(
            "census: fail (min_census = {} < k = {}), first failing sample at t = {}",
            r.min_census,
            r.k,
            r.first_failure.expect("failure time")
        );
        Ok(EXIT_CENSUS)
    }
}

fn cmd_halfplanes(config: &Config, a: &HalfplanesArgs, out: &Path) -> Outcome {
    let vs = vertices(&config.spec)?;
    let zmax: BigRational = match &a.zmax {
        Some(z) => parse_rational(z)?,
        None => from_f64(default_zmax(&vs)).expect("finite"),
    };
    write_grid(&config.spec, &zmax, a.grid, create(&out.join("halfplanes.csv"))?)?;
    let doc = HalfplanesDoc { zmax: to_f64(&zmax), grid: a.grid, vertices: vs };
    write(out.join("vertices.json"), &to_json(&doc))?;
    println!("vertices = {}, strictly positive = {}", doc.vertices.len(), doc.vertices.iter().filter(|v| v.positive).count());
    Ok(EXIT_OK)
}
