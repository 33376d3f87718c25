//! The `misodof` command line. [`run`] returns the process exit code: 0 on
//! success, 1 on a domain error, 2 on a usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use misodof_core::optimizer::{
    compare_schemes, sum_dof_rs, sum_dof_trs, sum_dof_zfbf, write_outcomes_csv, Groupcast, Relation, SchemeOutcome,
    SweepConfig,
};
use misodof_core::plan::{build_trs_plan, rate_splitting_plan, zero_forcing_plan, TrsPlan};
use misodof_core::region::{maximize, rs_region, zfbf_region};
use misodof_core::topology::{
    effective_zfbf_topology, make_realistic_topology, parse_topology, topology_to_toml, ActiveSet, CsitTopology,
    PowerPolicy,
};
use misodof_core::Rational;
use misodof_linksim::{estimate_slope, simulate_rates, write_sim_csv};

/// Default directory for relative output paths.
pub const OUT_DIR_VAR: &str = "MISODOF_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "misodof",
    version,
    about = "Exact DoF analysis of MISO interference channels with imperfect CSIT"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the inequality system of a DoF region.
    Region(RegionArgs),
    /// Print a layered TRS plan (or a degenerate RS/ZF plan).
    Plan(PlanArgs),
    /// Maximum sum DoF of one scheme or all of them.
    Sumdof(SumdofArgs),
    /// Run every scheme, cross-check closed forms and report.
    Compare(CompareArgs),
    /// Monte Carlo rates of a plan over an SNR sweep.
    Simulate(SimulateArgs),
    /// Write a three-neighbor topology (cyclic unless oriented otherwise).
    CyclicGen(CyclicGenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegionKind {
    Rs,
    Zfbf,
}

#[derive(Debug, Args)]
struct RegionArgs {
    topology: PathBuf,
    /// Private users, 1-based and comma separated (default: all).
    #[arg(long, value_name = "USERS")]
    set: Option<String>,
    #[arg(long, value_enum, default_value = "rs")]
    scheme: RegionKind,
    /// Also print the maximum sum over the region.
    #[arg(long)]
    max: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlanScheme {
    Zfbf,
    Rs,
    TrsOrth,
    TrsMax,
}

impl PlanScheme {
    fn mode(self) -> Groupcast {
        if self == PlanScheme::TrsOrth {
            Groupcast::Orthogonal
        } else {
            Groupcast::Maximal
        }
    }
}

#[derive(Debug, Args)]
struct PolicyArgs {
    /// Active set, 1-based and comma separated.
    #[arg(long, value_name = "USERS")]
    set: Option<String>,
    /// Power exponents, one per user (`p/q` or decimal), comma separated.
    #[arg(long, value_name = "EXPONENTS")]
    r: Option<String>,
    /// Scheme whose plan is used; without --r the optimizer's witness is taken.
    #[arg(long, value_enum, default_value = "trs-max")]
    scheme: PlanScheme,
}

#[derive(Debug, Args)]
struct PlanArgs {
    topology: PathBuf,
    #[command(flatten)]
    policy: PolicyArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeChoice {
    Zfbf,
    Rs,
    TrsOrth,
    TrsMax,
    All,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Extra exponent breakpoints for TRS, comma separated.
    #[arg(long, value_name = "EXPONENTS")]
    extra: Option<String>,
    /// Largest K accepted by the subset enumeration.
    #[arg(long, default_value_t = 8)]
    max_users: usize,
}

#[derive(Debug, Args)]
struct SumdofArgs {
    topology: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    scheme: SchemeChoice,
    #[command(flatten)]
    sweep: SweepArgs,
    /// CSV report path (relative paths go under $MISODOF_OUT_DIR).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    topology: PathBuf,
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    topology: PathBuf,
    #[command(flatten)]
    policy: PolicyArgs,
    /// SNR sweep in dB as `start:step:stop` or a comma list.
    #[arg(long, default_value = "30:10:60")]
    sweep: String,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV path (default: simulate.csv under $MISODOF_OUT_DIR or the working directory).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CyclicGenArgs {
    #[arg(long = "K", value_name = "K")]
    k: usize,
    #[arg(long)]
    a: Rational,
    #[arg(long)]
    b: Rational,
    /// One character per user: `f` when user k hears a from k+1 and b from
    /// k-1, `r` for the reverse (default: all `f`).
    #[arg(long)]
    orientation: Option<String>,
    /// Output path; prints to stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Region(a) => region(a, out),
        Command::Plan(a) => plan(a, out),
        Command::Sumdof(a) => sumdof(a, out),
        Command::Compare(a) => compare(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::CyclicGen(a) => cyclic_gen(a, out),
    }
}

fn load(path: &Path) -> Result<CsitTopology> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read topology {}", path.display()))?;
    Ok(parse_topology(&text)?)
}

fn output_path(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if p.is_relative() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn create(p: &Path) -> Result<fs::File> {
    let path = output_path(p);
    if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))
}

fn exact(x: Rational) -> String {
    format!("{x} ({})", x.to_decimal(6))
}

fn parse_users(k: usize, text: &str) -> Result<ActiveSet> {
    let ids = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("InvalidUserList: {text:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    if ids.iter().any(|&u| u == 0 || u > k) {
        bail!("InvalidUserList: users must lie in 1..={k}, got {text:?}");
    }
    Ok(ActiveSet::new(k, ids.into_iter().map(|u| u - 1))?)
}

fn parse_rationals(text: &str) -> Result<Vec<Rational>> {
    text.split(',')
        .map(|s| s.trim().parse::<Rational>().map_err(|e| anyhow!("{e}")))
        .collect()
}

fn sweep_config(a: &SweepArgs) -> Result<SweepConfig> {
    let extra = match &a.extra {
        Some(t) => parse_rationals(t)?,
        None => Vec::new(),
    };
    Ok(SweepConfig {
        extra_exponents: extra,
        max_users: a.max_users,
        ..SweepConfig::default()
    })
}

fn region(a: RegionArgs, out: &mut dyn Write) -> Result<()> {
    let t = load(&a.topology)?;
    let u = match &a.set {
        Some(s) => parse_users(t.k(), s)?,
        None => ActiveSet::full(t.k()),
    };
    let reg = match a.scheme {
        RegionKind::Rs => rs_region(&t, &u)?,
        RegionKind::Zfbf if t.is_fully_connected() => zfbf_region(&t, &u)?,
        RegionKind::Zfbf => zfbf_region(&effective_zfbf_topology(&t), &u)?,
    };
    write!(out, "{reg}")?;
    if a.max {
        let (value, _) = maximize(&reg, &vec![Rational::ONE; reg.vars.len()])?;
        writeln!(out, "max sum: {}", exact(value))?;
    }
    Ok(())
}

fn outcome_line(o: &SchemeOutcome) -> String {
    let mut line = format!("{}: {}  S={}  r={}", o.scheme.name(), exact(o.value), o.active, o.r);
    if let Some(p) = &o.private_users {
        line.push_str(&format!("  private={p}"));
    }
    line
}

fn witness(t: &CsitTopology, scheme: PlanScheme) -> Result<SchemeOutcome> {
    let cfg = SweepConfig::default();
    Ok(match scheme {
        PlanScheme::Zfbf => sum_dof_zfbf(t, &cfg)?,
        PlanScheme::Rs => sum_dof_rs(t, &cfg)?,
        PlanScheme::TrsOrth | PlanScheme::TrsMax => sum_dof_trs(t, &cfg, scheme.mode())?,
    })
}

fn resolve_plan(t: &CsitTopology, p: &PolicyArgs) -> Result<TrsPlan> {
    let k = t.k();
    let (s, r) = match (&p.set, &p.r) {
        (None, None) => {
            let o = witness(t, p.scheme)?;
            (o.active, o.r)
        }
        (set, r) => {
            let s = match set {
                Some(text) => parse_users(k, text)?,
                None => ActiveSet::full(k),
            };
            let r = match r {
                Some(text) => parse_rationals(text)?,
                None => vec![Rational::ZERO; k],
            };
            if r.len() != k {
                bail!("PolicyLength: --r has {} entries, expected K={k}", r.len());
            }
            let r: Vec<Rational> = (0..k)
                .map(|i| if s.contains(i) { r[i] } else { Rational::ZERO })
                .collect();
            (s, PowerPolicy::new(r)?)
        }
    };
    let eff = if t.is_fully_connected() {
        t.clone()
    } else {
        effective_zfbf_topology(t)
    };
    Ok(match p.scheme {
        PlanScheme::Zfbf => zero_forcing_plan(&eff, &s, &r)?,
        PlanScheme::Rs => {
            if !t.is_fully_connected() {
                bail!("NotFullyConnected: rate splitting needs every link present");
            }
            rate_splitting_plan(t, &s, &r)?
        }
        PlanScheme::TrsOrth | PlanScheme::TrsMax => build_trs_plan(&eff, &s, &r)?,
    })
}

fn plan(a: PlanArgs, out: &mut dyn Write) -> Result<()> {
    let t = load(&a.topology)?;
    write!(out, "{}", resolve_plan(&t, &a.policy)?)?;
    Ok(())
}

fn sumdof(a: SumdofArgs, out: &mut dyn Write) -> Result<()> {
    let t = load(&a.topology)?;
    let cfg = sweep_config(&a.sweep)?;
    let mut outcomes = Vec::new();
    let pick = |s: SchemeChoice| a.scheme == s || a.scheme == SchemeChoice::All;
    if pick(SchemeChoice::Zfbf) {
        outcomes.push(sum_dof_zfbf(&t, &cfg)?);
    }
    if pick(SchemeChoice::Rs) {
        if a.scheme == SchemeChoice::All && !t.is_fully_connected() {
            writeln!(out, "rs: n/a (not fully connected)")?;
        } else {
            outcomes.push(sum_dof_rs(&t, &cfg)?);
        }
    }
    if pick(SchemeChoice::TrsOrth) {
        outcomes.push(sum_dof_trs(&t, &cfg, Groupcast::Orthogonal)?);
    }
    if pick(SchemeChoice::TrsMax) {
        outcomes.push(sum_dof_trs(&t, &cfg, Groupcast::Maximal)?);
    }
    for o in &outcomes {
        writeln!(out, "{}", outcome_line(o))?;
    }
    if let Some(p) = &a.output {
        write_outcomes_csv(create(p)?, &outcomes)?;
    }
    Ok(())
}

fn compare(a: CompareArgs, out: &mut dyn Write) -> Result<()> {
    let t = load(&a.topology)?;
    let report = compare_schemes(&t, &sweep_config(&a.sweep)?)?;
    for o in report.outcomes() {
        writeln!(out, "{}", outcome_line(o))?;
    }
    if report.rs.is_none() {
        writeln!(out, "rs: n/a (not fully connected)")?;
    }
    for c in &report.checks {
        let rel = match c.relation {
            Relation::Equal => "==",
            Relation::AtLeast => ">=",
        };
        writeln!(
            out,
            "check {}: computed {} {rel} closed form {}",
            c.name, c.computed, c.closed_form
        )?;
    }
    for o in report.outcomes().filter(|o| o.scheme.name() != "trs-max") {
        if let Some(adv) = report.trs_advantage_over(o.scheme) {
            writeln!(out, "trs-max beats {}: {adv}", o.scheme.name())?;
        }
    }
    if let Some(p) = &a.output {
        write_outcomes_csv(create(p)?, report.outcomes())?;
    }
    Ok(())
}

fn parse_sweep(text: &str) -> Result<Vec<f64>> {
    let bad = || anyhow!("InvalidSweep: {text:?} (use start:step:stop or a comma list)");
    let parts: Vec<&str> = text.split(':').collect();
    let values = if parts.len() == 3 {
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| start + step * i as f64).collect()
    } else if parts.len() == 1 {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?
    } else {
        return Err(bad());
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let t = load(&a.topology)?;
    let sweep = parse_sweep(&a.sweep)?;
    let plan = resolve_plan(&t, &a.policy)?;
    let result = simulate_rates(&t, &plan, a.policy.scheme.mode(), &sweep, a.trials, a.seed)?;
    let path = a.output.clone().unwrap_or_else(|| PathBuf::from("simulate.csv"));
    write_sim_csv(create(&path)?, &result)?;
    writeln!(out, "plan: S={} r={}", plan.active, plan.r)?;
    for (p, db) in result.snr_db.iter().enumerate() {
        writeln!(
            out,
            "P={db} dB  sum rate {:.6} +- {:.6}",
            result.sum_rate[p], result.sum_stderr[p]
        )?;
    }
    if sweep.len() >= 3 {
        let rep = estimate_slope(&result)?;
        writeln!(
            out,
            "aggregate slope {:.6} +- {:.6}",
            rep.aggregate.slope, rep.aggregate.stderr
        )?;
    }
    writeln!(out, "wrote {}", output_path(&path).display())?;
    Ok(())
}

fn cyclic_gen(a: CyclicGenArgs, out: &mut dyn Write) -> Result<()> {
    let forward: Vec<bool> = match &a.orientation {
        None => vec![true; a.k],
        Some(s) => s
            .chars()
            .map(|c| match c {
                'f' | 'F' | '1' => Ok(true),
                'r' | 'R' | '0' => Ok(false),
                other => Err(anyhow!("InvalidOrientation: unexpected {other:?}")),
            })
            .collect::<Result<_>>()?,
    };
    if forward.len() != a.k {
        bail!("InvalidOrientation: {} characters for K={}", forward.len(), a.k);
    }
    let t = make_realistic_topology(a.k, a.a, a.b, &forward)?;
    let text = topology_to_toml(&t);
    match &a.output {
        Some(p) => {
            create(p)?.write_all(text.as_bytes())?;
            writeln!(out, "wrote {}", output_path(p).display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}
