#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use jumpstat::liouville::CollectiveScope;
use jumpstat::model::SchemeKind;
use jumpstat::rates::{RateMatrix, RateMethod};
use jumpstat::sweep::{
    gnuplot_script, rate_point, run_sweep, write_header, write_rate_points, write_sweep_csv, ConfigOverrides, Preset,
    SweepConfig,
};
use jumpstat::telegraph::{
    analytic_djr, analytic_tjr, simulate_statistics, simulate_stream, DirectionRule, WindowRule,
};
use jumpstat::verify::{run_selected, Fault};

/// Transition rates and double/triple jump statistics of dipole-dipole
/// interacting fluorescing atoms.
#[derive(Parser, Debug)]
#[command(name = "jumpstat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rate matrices per method at one or more distances.
    Rates(RatesArgs),
    /// Distance sweep of rates and multi-jump rates as CSV.
    Sweep(SweepArgs),
    /// Monte Carlo telegraph simulation against the analytic multi-jump rates.
    Simulate(SimulateArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Default)]
#[command(allow_negative_numbers = true)]
struct ConfigArgs {
    /// TOML configuration file; flags take precedence over its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// optimal-effect (default) or custom.
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Number of atoms (1 to 3).
    #[arg(long)]
    atoms: Option<usize>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    a2: Option<f64>,
    #[arg(long)]
    a3: Option<f64>,
    #[arg(long)]
    a4: Option<f64>,
    /// Incoherent pump rate on the 1-4 transition.
    #[arg(long)]
    w: Option<f64>,
    /// Rabi frequency of the strong drive.
    #[arg(long)]
    rabi: Option<f64>,
    #[arg(long)]
    detuning: Option<f64>,
    /// Wavelength of every transition in units of the strong one.
    #[arg(long, value_delimiter = ',')]
    wavelengths: Option<Vec<f64>>,
    /// Sweep range in units of the strong wavelength.
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Infinitely separated atoms.
    #[arg(long)]
    independent: bool,
    /// Multi-jump window T_W.
    #[arg(long)]
    window: Option<f64>,
    /// Comma-separated: projection, simplified, closed-form, first-order.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<RateMethod>>,
    #[arg(long, value_enum)]
    scope: Option<ScopeArg>,
    #[arg(long, value_enum)]
    window_rule: Option<WindowRuleArg>,
    #[arg(long, value_enum)]
    direction_rule: Option<DirectionRuleArg>,
    /// Value of A3 in 1/s; rates are then printed in 1/s and the window is in seconds.
    #[arg(long)]
    a3_per_second: Option<f64>,
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Distances in units of the strong wavelength; defaults to the r_min..r_max grid.
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    #[arg(long, short, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write L0 and L1 at the first distance as sparse triplets.
    #[arg(long, value_name = "FILE")]
    dump_operator: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, short, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Gnuplot script reading the CSV written with --out.
    #[arg(long, value_name = "FILE")]
    gnuplot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Distance of the rate matrix to simulate; defaults to r_min.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Target number of transitions over all streams.
    #[arg(long)]
    transitions: Option<f64>,
    /// Simulated time per stream (overrides --transitions).
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    streams: Option<u64>,
    /// Simulate a birth-death chain with these upward rates instead of the model.
    #[arg(long, value_delimiter = ',', requires = "down")]
    up: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', requires = "up")]
    down: Option<Vec<f64>>,
    #[arg(long, short, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Export the first stream's trajectory as (time, level).
    #[arg(long, value_name = "FILE")]
    trajectory: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<usize>>,
    /// Perturb a formula to check that the suite notices.
    #[arg(long, value_enum)]
    inject_fault: Option<FaultArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SchemeArg {
    DSystem,
    FourLevel,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScopeArg {
    All,
    Strong,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum WindowRuleArg {
    Chained,
    Span,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DirectionRuleArg {
    NetChange,
    AnyPair,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FaultArg {
    ClosedFormScale,
    FirstOrderSign,
    TripleJumpScale,
    PopulationScale,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Fault {
        match f {
            FaultArg::ClosedFormScale => Fault::ClosedFormScale(1e-4),
            FaultArg::FirstOrderSign => Fault::FirstOrderSign,
            FaultArg::TripleJumpScale => Fault::TripleJumpScale(1.2),
            FaultArg::PopulationScale => Fault::PopulationScale(1.01),
        }
    }
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: jumpstat::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<RateMethod, String> {
    s.parse().map_err(|e: jumpstat::Error| e.to_string())
}

/// Errors that map to exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

impl ConfigArgs {
    fn overrides(&self) -> ConfigOverrides {
        let counting = match (self.window_rule, self.direction_rule) {
            (None, None) => None,
            (w, d) => Some(jumpstat::telegraph::CountingRule {
                window: match w {
                    Some(WindowRuleArg::Span) => WindowRule::Span,
                    _ => WindowRule::Chained,
                },
                direction: match d {
                    Some(DirectionRuleArg::AnyPair) => DirectionRule::AnyPair,
                    _ => DirectionRule::NetChange,
                },
            }),
        };
        ConfigOverrides {
            preset: self.preset,
            scheme: self.scheme.map(|s| match s {
                SchemeArg::DSystem => SchemeKind::DThreeLevel,
                SchemeArg::FourLevel => SchemeKind::FourLevel,
            }),
            n_atoms: self.atoms,
            a1: self.a1,
            a2: self.a2,
            a3: self.a3,
            a4: self.a4,
            w: self.w,
            rabi: self.rabi,
            detuning: self.detuning,
            wavelengths: self.wavelengths.clone(),
            r_min: self.r_min,
            r_max: self.r_max,
            points: self.points,
            independent: self.independent.then_some(true),
            window: self.window,
            methods: self.methods.clone(),
            scope: self.scope.map(|s| match s {
                ScopeArg::All => CollectiveScope::AllTransitions,
                ScopeArg::Strong => CollectiveScope::StrongTransition,
            }),
            counting,
            a3_per_second: self.a3_per_second,
            monte_carlo: None,
        }
    }

    /// File values, then flags, then `extra` (highest precedence).
    fn resolve(&self, extra: ConfigOverrides) -> anyhow::Result<SweepConfig> {
        let file = match &self.config {
            Some(path) => read_config(path)?,
            None => ConfigOverrides::default(),
        };
        let merged = extra.over(self.overrides().over(file));
        SweepConfig::resolve(merged).map_err(|e| usage(e.to_string()))
    }
}

fn read_config(path: &Path) -> anyhow::Result<ConfigOverrides> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| usage(format!("cannot create {}: {e}", p.display())))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_rates(args: &RatesArgs) -> anyhow::Result<ExitCode> {
    let cfg = args.config.resolve(ConfigOverrides::default())?;
    let rs = args.r.clone().unwrap_or_else(|| cfg.grid());
    if rs.is_empty() || rs.iter().any(|&r| !(r > 0.0)) {
        return Err(usage("distances must be positive"));
    }
    if let Some(path) = &args.dump_operator {
        let split = cfg.system(rs[0])?.split();
        let mut w = output(&Some(path.clone()))?;
        writeln!(w, "# jumpstat v{}", jumpstat::VERSION)?;
        writeln!(w, "# r = {}", rs[0])?;
        split.l0.dump_triplets(&mut w)?;
        split.l1.dump_triplets(&mut w)?;
        w.flush()?;
    }
    let points = rs.iter().map(|&r| rate_point(&cfg, r)).collect::<jumpstat::Result<Vec<_>>>()?;
    let mut w = output(&args.out)?;
    write_rate_points(&mut w, &cfg, &points)?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: &SweepArgs) -> anyhow::Result<ExitCode> {
    let cfg = args.config.resolve(ConfigOverrides::default())?;
    let rows = run_sweep(&cfg)?;
    let mut w = output(&args.out)?;
    write_sweep_csv(&mut w, &cfg, &rows)?;
    w.flush()?;
    if let Some(path) = &args.gnuplot {
        let csv = args.out.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "sweep.csv".into());
        std::fs::write(path, gnuplot_script(&csv, &cfg)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: &SimulateArgs) -> anyhow::Result<ExitCode> {
    let flags_mc = args.seed.is_some() || args.transitions.is_some() || args.t_end.is_some() || args.streams.is_some();
    let file_mc = match &args.config.config {
        Some(p) => read_config(p)?.monte_carlo,
        None => None,
    };
    if file_mc.is_none() && !flags_mc {
        return Err(usage("simulate needs a [monte_carlo] section or --seed/--transitions/--t-end/--streams"));
    }
    let mut mc = file_mc.unwrap_or_default();
    mc.seed = args.seed.unwrap_or(mc.seed);
    mc.transitions = args.transitions.unwrap_or(mc.transitions);
    mc.streams = args.streams.unwrap_or(mc.streams);
    if args.t_end.is_some() {
        mc.t_end = args.t_end;
    }
    let cfg = args.config.resolve(ConfigOverrides { monte_carlo: Some(mc.clone()), ..Default::default() })?;
    let r = args.r.unwrap_or(cfg.r_min);

    let p = match (&args.up, &args.down) {
        (Some(up), Some(down)) => {
            if up.len() != down.len() || up.is_empty() || up.iter().chain(down).any(|&x| !(x >= 0.0)) {
                return Err(usage("--up and --down need the same number of non-negative rates"));
            }
            RateMatrix::birth_death(up, down, RateMethod::ClosedForm)
        }
        _ => {
            let method = cfg.methods[0];
            cfg.system(r)?.rates(method)?
        }
    };
    let window = cfg.window_a3();
    let pmax = p.max_rate();
    let mut warnings = Vec::new();
    if pmax * window > 0.1 {
        warnings.push(format!(
            "p_max * T_W = {:.3} > 0.1: the analytic multi-jump rates assume a short window",
            pmax * window
        ));
    }
    let pi = p.stationary()?;
    let mean_exit: f64 = (0..p.levels()).map(|i| pi[i] * p.escape_rate(i)).sum();
    let t_end = mc.t_end.unwrap_or(mc.transitions / mean_exit / mc.streams as f64);
    let stats = simulate_statistics(&p, t_end, mc.seed, mc.streams, window, cfg.counting)?;
    warnings.extend(stats.warnings.iter().cloned());

    if let Some(path) = &args.trajectory {
        let traj = simulate_stream(&p, t_end, mc.seed, 0)?;
        let mut w = output(&Some(path.clone()))?;
        traj.write(&mut w)?;
        w.flush()?;
    }

    let mut w = output(&args.out)?;
    write_header(&mut w, &cfg)?;
    if let (Some(up), Some(down)) = (&args.up, &args.down) {
        writeln!(w, "# fixture chain: up = {up:?}, down = {down:?} (model parameters unused)")?;
    } else {
        writeln!(w, "r = {r}")?;
    }
    writeln!(w, "t_end_per_stream = {t_end}")?;
    stats.write(&mut w)?;
    if p.levels() == 4 {
        let unit = cfg.rate_unit();
        let dj = analytic_djr(&p, window)?;
        let tj = analytic_tjr(&p, window)?;
        writeln!(w, "analytic_double_rate = {:.10e}", dj * unit)?;
        writeln!(w, "analytic_triple_rate = {:.10e}", tj * unit)?;
        writeln!(w, "z_double = {:.4}", (stats.double_rate() - dj) / stats.double_err())?;
        writeln!(w, "z_triple = {:.4}", (stats.triple_rate() - tj) / stats.triple_err())?;
    }
    w.flush()?;
    for msg in warnings {
        eprintln!("warning: {msg}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<ExitCode> {
    let ids = args.only.clone().unwrap_or_else(|| (1..=8).collect());
    if ids.iter().any(|&i| !(1..=8).contains(&i)) {
        return Err(usage("criteria are numbered 1 to 8"));
    }
    let results = run_selected(&ids, args.inject_fault.map(Fault::from));
    let mut out = io::stdout().lock();
    writeln!(out, "# jumpstat v{}", jumpstat::VERSION)?;
    for r in &results {
        writeln!(out, "{}", r.line())?;
        for note in &r.notes {
            writeln!(out, "    note: {note}")?;
        }
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(out, "{} of {} criteria passed", results.len() - failed, results.len())?;
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Rates(a) => cmd_rates(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
