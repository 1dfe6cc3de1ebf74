//! Run configuration, named presets and sweeps of the rates and multi-jump
//! rates over the interatomic distance.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::coupling::Geometry;
use crate::error::{Error, Result};
use crate::liouville::{CollectiveScope, GeneratorOptions};
use crate::model::{EnsembleSpec, LevelScheme, SchemeKind};
use crate::rates::{closed_form_rates, ClosedFormOrder, RateMatrix, RateMethod, System};
use crate::telegraph::{analytic_djr, analytic_tjr, CountingRule};

/// Rabi frequency that maximises the effect of the coupling on the
/// multi-jump rates: `sqrt(sqrt(5) - 1) / 2` in units of `A3`.
pub fn optimal_rabi() -> f64 {
    (5f64.sqrt() - 1.0).sqrt() / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    #[default]
    OptimalEffect,
    /// Every scheme parameter has to be given explicitly.
    Custom,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal-effect" => Ok(Preset::OptimalEffect),
            "custom" => Ok(Preset::Custom),
            other => Err(Error::Config(format!("unknown preset '{other}' (optimal-effect, custom)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    /// Simulated time per stream; derived from `transitions` when absent.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default = "default_transitions")]
    pub transitions: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_streams")]
    pub streams: u64,
}

fn default_transitions() -> f64 {
    1e6
}

fn default_streams() -> u64 {
    4
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig { t_end: None, transitions: default_transitions(), seed: 0, streams: default_streams() }
    }
}

/// Resolved configuration. Times are in units of `1/A3` unless
/// `a3_per_second` is set, in which case `window` is in seconds and printed
/// rates are in 1/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub preset: Preset,
    pub scheme: SchemeKind,
    pub n_atoms: usize,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub w: f64,
    pub rabi: f64,
    pub detuning: f64,
    pub wavelengths: Vec<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    /// Replace the geometry by infinitely separated atoms.
    pub independent: bool,
    pub window: f64,
    pub methods: Vec<RateMethod>,
    pub scope: CollectiveScope,
    pub counting: CountingRule,
    pub a3_per_second: f64,
    pub monte_carlo: Option<MonteCarloConfig>,
}

/// Partial configuration from a file or command-line flags; `None` keeps the
/// preset value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub preset: Option<Preset>,
    pub scheme: Option<SchemeKind>,
    pub n_atoms: Option<usize>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub a3: Option<f64>,
    pub a4: Option<f64>,
    pub w: Option<f64>,
    pub rabi: Option<f64>,
    pub detuning: Option<f64>,
    pub wavelengths: Option<Vec<f64>>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub points: Option<usize>,
    pub independent: Option<bool>,
    pub window: Option<f64>,
    pub methods: Option<Vec<RateMethod>>,
    pub scope: Option<CollectiveScope>,
    pub counting: Option<CountingRule>,
    pub a3_per_second: Option<f64>,
    pub monte_carlo: Option<MonteCarloConfig>,
}

impl ConfigOverrides {
    /// `self` wins over `base` field by field.
    pub fn over(self, base: ConfigOverrides) -> ConfigOverrides {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigOverrides { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(
            preset,
            scheme,
            n_atoms,
            a1,
            a2,
            a3,
            a4,
            w,
            rabi,
            detuning,
            wavelengths,
            r_min,
            r_max,
            points,
            independent,
            window,
            methods,
            scope,
            counting,
            a3_per_second,
            monte_carlo
        )
    }
}

impl SweepConfig {
    pub fn preset(preset: Preset) -> SweepConfig {
        SweepConfig {
            preset,
            scheme: SchemeKind::FourLevel,
            n_atoms: 3,
            a1: 2.5e-10,
            a2: 0.3,
            a3: 1.0,
            a4: 1.0,
            w: 4e-9,
            rabi: optimal_rabi(),
            detuning: 0.0,
            wavelengths: vec![3.574, 1.245, 1.0, 0.923],
            r_min: 1.0,
            r_max: 10.0,
            points: 200,
            independent: false,
            window: 1e6,
            methods: vec![RateMethod::ClosedForm, RateMethod::FirstOrder],
            scope: CollectiveScope::StrongTransition,
            counting: CountingRule::default(),
            a3_per_second: 1.0,
            monte_carlo: None,
        }
    }

    /// Applies overrides on top of the chosen preset. The `custom` preset
    /// requires every scheme parameter to be present.
    pub fn resolve(o: ConfigOverrides) -> Result<SweepConfig> {
        let preset = o.preset.unwrap_or_default();
        let mut c = SweepConfig::preset(preset);
        if preset == Preset::Custom {
            let scheme = o.scheme.unwrap_or(SchemeKind::FourLevel);
            let mut missing = Vec::new();
            let needed: &[(&str, bool)] = match scheme {
                SchemeKind::FourLevel => &[
                    ("a1", o.a1.is_some()),
                    ("a2", o.a2.is_some()),
                    ("a4", o.a4.is_some()),
                    ("w", o.w.is_some()),
                    ("rabi", o.rabi.is_some()),
                ],
                SchemeKind::DThreeLevel => {
                    &[("a1", o.a1.is_some()), ("a2", o.a2.is_some()), ("rabi", o.rabi.is_some())]
                }
            };
            for (name, present) in needed {
                if !present {
                    missing.push(*name);
                }
            }
            if !missing.is_empty() {
                return Err(Error::Config(format!("preset 'custom' needs: {}", missing.join(", "))));
            }
            if scheme == SchemeKind::DThreeLevel {
                c.wavelengths = vec![1.0; 3];
                c.a4 = 0.0;
                c.w = 0.0;
            }
        }
        let explicit_wavelengths = o.wavelengths.is_some();
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = o.$f { c.$f = v; })* };
        }
        set!(
            scheme,
            n_atoms,
            a1,
            a2,
            a3,
            a4,
            w,
            rabi,
            detuning,
            wavelengths,
            r_min,
            r_max,
            points,
            independent,
            window,
            methods,
            scope,
            counting,
            a3_per_second
        );
        if o.monte_carlo.is_some() {
            c.monte_carlo = o.monte_carlo;
        }
        if c.scheme == SchemeKind::DThreeLevel && !explicit_wavelengths && c.wavelengths.len() != 3 {
            c.wavelengths = vec![1.0; 3];
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0) || !(self.r_max >= self.r_min) || !self.r_max.is_finite() {
            return Err(Error::Config(format!("need 0 < r_min <= r_max, got {} .. {}", self.r_min, self.r_max)));
        }
        if self.points < 2 {
            return Err(Error::Config(format!("need at least 2 points, got {}", self.points)));
        }
        if !(self.window > 0.0) {
            return Err(Error::Config(format!("window must be positive, got {}", self.window)));
        }
        if !(self.a3_per_second > 0.0) {
            return Err(Error::Config("a3_per_second must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no rate method selected".into()));
        }
        if !(self.a3 > 0.0) {
            return Err(Error::Config("a3 must be positive".into()));
        }
        if let Some(mc) = &self.monte_carlo {
            if mc.streams == 0 || !(mc.transitions > 0.0) || mc.t_end.is_some_and(|t| !(t > 0.0)) {
                return Err(Error::Config("monte_carlo needs streams >= 1 and positive t_end/transitions".into()));
            }
        }
        self.scheme_params().validate()?;
        EnsembleSpec::new(self.scheme_params(), self.n_atoms, self.geometry(self.r_min))?;
        Ok(())
    }

    /// Scheme in units of `A3` (all rates divided by `a3`).
    pub fn scheme_params(&self) -> LevelScheme {
        let s = self.a3;
        let base = match self.scheme {
            SchemeKind::FourLevel => {
                LevelScheme::four_level(self.a1 / s, self.a2 / s, 1.0, self.a4 / s, self.rabi / s, self.w / s)
            }
            SchemeKind::DThreeLevel => LevelScheme::d_system(self.a1 / s, self.a2 / s, 1.0, self.rabi / s),
        };
        base.with_detuning(self.detuning / s).with_wavelengths(self.wavelengths.clone())
    }

    pub fn geometry(&self, r: f64) -> Geometry {
        if self.independent || self.n_atoms == 1 {
            Geometry::independent()
        } else {
            Geometry::equilateral(r)
        }
    }

    pub fn options(&self) -> GeneratorOptions {
        GeneratorOptions { detuning: true, scope: self.scope }
    }

    pub fn system(&self, r: f64) -> Result<System> {
        System::new(EnsembleSpec::new(self.scheme_params(), self.n_atoms, self.geometry(r))?, self.options())
    }

    /// `points` values from `r_min` to `r_max`, both included.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n).map(|k| self.r_min + (self.r_max - self.r_min) * k as f64 / (n - 1) as f64).collect()
    }

    /// Window in units of `1/A3`.
    pub fn window_a3(&self) -> f64 {
        self.window * self.a3_per_second * self.a3
    }

    /// Factor converting a rate in units of `A3` into output units.
    pub fn rate_unit(&self) -> f64 {
        self.a3 * self.a3_per_second
    }

    pub fn rate_unit_name(&self) -> &'static str {
        if self.a3_per_second == 1.0 {
            "A3"
        } else {
            "1/s"
        }
    }

    /// `key = value` lines describing the resolved configuration.
    pub fn echo(&self) -> Vec<String> {
        let methods: Vec<String> = self.methods.iter().map(|m| m.to_string()).collect();
        let wl: Vec<String> = self.wavelengths.iter().map(|x| x.to_string()).collect();
        let mut v = vec![
            format!("preset = {:?}", self.preset),
            format!("scheme = {:?}", self.scheme),
            format!("n_atoms = {}", self.n_atoms),
            format!("a1 = {}", self.a1),
            format!("a2 = {}", self.a2),
            format!("a3 = {}", self.a3),
            format!("a4 = {}", self.a4),
            format!("w = {}", self.w),
            format!("rabi = {}", self.rabi),
            format!("detuning = {}", self.detuning),
            format!("wavelengths = [{}]", wl.join(", ")),
            format!("r_min = {}", self.r_min),
            format!("r_max = {}", self.r_max),
            format!("points = {}", self.points),
            format!("independent = {}", self.independent),
            format!("window = {}", self.window),
            format!("methods = [{}]", methods.join(", ")),
            format!("scope = {:?}", self.scope),
            format!("counting = {:?}/{:?}", self.counting.window, self.counting.direction),
            format!("a3_per_second = {}", self.a3_per_second),
        ];
        if let Some(mc) = &self.monte_carlo {
            v.push(format!(
                "monte_carlo = t_end {:?}, transitions {}, seed {}, streams {}",
                mc.t_end, mc.transitions, mc.seed, mc.streams
            ));
        }
        v
    }
}

/// Rates of every requested method at one distance, plus the
/// independent-atom reference.
#[derive(Debug, Clone)]
pub struct RatePoint {
    pub r: f64,
    pub tables: Vec<RateMatrix>,
    pub independent: RateMatrix,
}

impl RatePoint {
    /// Largest relative deviation of any neighbour rate from the independent value.
    pub fn deviation(&self, table: &RateMatrix) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..table.n_atoms {
            for (a, b) in [(i, i + 1), (i + 1, i)] {
                let base = self.independent.get(a, b);
                if base > 0.0 {
                    dev = dev.max((table.get(a, b) / base - 1.0).abs());
                }
            }
        }
        dev
    }
}

pub fn independent_rates(cfg: &SweepConfig) -> Result<RateMatrix> {
    let spec = EnsembleSpec::new(cfg.scheme_params(), cfg.n_atoms, Geometry::independent())?;
    let sys = System::new(spec, cfg.options())?;
    closed_form_rates(&sys.spec, &sys.couplings, ClosedFormOrder::Exact)
}

pub fn rate_point(cfg: &SweepConfig, r: f64) -> Result<RatePoint> {
    let sys = cfg.system(r)?;
    let tables = cfg.methods.iter().map(|&m| sys.rates(m)).collect::<Result<Vec<_>>>()?;
    Ok(RatePoint { r, tables, independent: independent_rates(cfg)? })
}

/// One row of a distance sweep (rates in units of `A3`).
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub point: RatePoint,
    /// `(n_DJ, n_TJ)` per method, present for three atoms.
    pub jumps: Vec<(f64, f64)>,
    pub jumps_independent: Option<(f64, f64)>,
}

fn jump_rates(p: &RateMatrix, window: f64) -> Result<(f64, f64)> {
    Ok((analytic_djr(p, window)?, analytic_tjr(p, window)?))
}

fn sweep_row(cfg: &SweepConfig, r: f64) -> Result<SweepRow> {
    let point = rate_point(cfg, r)?;
    let tw = cfg.window_a3();
    let (jumps, jumps_independent) = if cfg.n_atoms == 3 {
        let j = point.tables.iter().map(|t| jump_rates(t, tw)).collect::<Result<Vec<_>>>()?;
        (j, Some(jump_rates(&point.independent, tw)?))
    } else {
        (Vec::new(), None)
    };
    Ok(SweepRow { point, jumps, jumps_independent })
}

/// Evaluates every grid point; rows come back in grid order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let grid = cfg.grid();
    #[cfg(feature = "parallel")]
    let rows: Vec<Result<SweepRow>> = {
        use rayon::prelude::*;
        grid.par_iter().map(|&r| sweep_row(cfg, r)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Result<SweepRow>> = grid.iter().map(|&r| sweep_row(cfg, r)).collect();
    rows.into_iter().collect()
}

/// Relative deviation of `x` from `base`.
pub fn rel_dev(x: f64, base: f64) -> f64 {
    if base == 0.0 {
        if x == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (x - base).abs() / base.abs()
    }
}

pub fn write_header<W: Write>(w: &mut W, cfg: &SweepConfig) -> std::io::Result<()> {
    writeln!(w, "# jumpstat v{}", crate::VERSION)?;
    for line in cfg.echo() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "# rate unit: {}", cfg.rate_unit_name())
}

/// CSV with one row per distance: neighbour rates per method, and for three
/// atoms `n_DJ`, `n_TJ` per method, their independent-atom values and the
/// relative deviations.
pub fn write_sweep_csv<W: Write>(mut w: W, cfg: &SweepConfig, rows: &[SweepRow]) -> std::io::Result<()> {
    write_header(&mut w, cfg)?;
    let n = cfg.n_atoms;
    let mut cols = vec!["r".to_string()];
    for m in &cfg.methods {
        for i in 0..n {
            cols.push(format!("p{}{}_{m}", i, i + 1));
            cols.push(format!("p{}{}_{m}", i + 1, i));
        }
    }
    if n == 3 {
        for m in &cfg.methods {
            cols.push(format!("ndj_{m}"));
        }
        cols.push("ndj_independent".into());
        for m in &cfg.methods {
            cols.push(format!("ntj_{m}"));
        }
        cols.push("ntj_independent".into());
        for m in &cfg.methods {
            cols.push(format!("dev_ndj_{m}"));
            cols.push(format!("dev_ntj_{m}"));
        }
    }
    writeln!(w, "{}", cols.join(","))?;
    let unit = cfg.rate_unit();
    for row in rows {
        let mut vals = vec![format!("{:.6}", row.point.r)];
        for t in &row.point.tables {
            for i in 0..n {
                vals.push(format!("{:.10e}", t.get(i, i + 1) * unit));
                vals.push(format!("{:.10e}", t.get(i + 1, i) * unit));
            }
        }
        if let Some((dj0, tj0)) = row.jumps_independent {
            for (dj, _) in &row.jumps {
                vals.push(format!("{:.10e}", dj * unit));
            }
            vals.push(format!("{:.10e}", dj0 * unit));
            for (_, tj) in &row.jumps {
                vals.push(format!("{:.10e}", tj * unit));
            }
            vals.push(format!("{:.10e}", tj0 * unit));
            for (dj, tj) in &row.jumps {
                vals.push(format!("{:.6e}", rel_dev(*dj, dj0)));
                vals.push(format!("{:.6e}", rel_dev(*tj, tj0)));
            }
        }
        writeln!(w, "{}", vals.join(","))?;
    }
    Ok(())
}

/// Rate table over distances: `r,i,j,rate,method,rel_dev_independent`.
pub fn write_rate_points<W: Write>(mut w: W, cfg: &SweepConfig, points: &[RatePoint]) -> std::io::Result<()> {
    write_header(&mut w, cfg)?;
    writeln!(w, "r,i,j,rate,method,rel_dev_independent")?;
    let unit = cfg.rate_unit();
    for pt in points {
        for t in &pt.tables {
            for i in 0..t.levels() {
                for j in 0..t.levels() {
                    if i.abs_diff(j) == 1 {
                        let p = t.get(i, j);
                        let dev = rel_dev(p, pt.independent.get(i, j));
                        writeln!(w, "{:.6},{i},{j},{:.12e},{},{dev:.6e}", pt.r, p * unit, t.method)?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Gnuplot script plotting the relative multi-jump deviations of a sweep CSV.
pub fn gnuplot_script(csv_path: &str, cfg: &SweepConfig) -> String {
    let n_rate_cols = 2 * cfg.n_atoms * cfg.methods.len();
    let k = cfg.methods.len();
    let first_dev = 1 + n_rate_cols + 2 * (k + 1) + 1;
    let mut s = String::new();
    s.push_str(&format!("# jumpstat v{}\n", crate::VERSION));
    s.push_str("set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n");
    s.push_str("set xlabel 'r [lambda_3]'\nset ylabel 'relative deviation from independent atoms'\n");
    s.push_str("set logscale y\n");
    let mut parts = Vec::new();
    for (i, m) in cfg.methods.iter().enumerate() {
        parts.push(format!("'{csv_path}' using 1:{} with lines title 'n_DJ {m}'", first_dev + 2 * i));
        parts.push(format!("'{csv_path}' using 1:{} with lines title 'n_TJ {m}'", first_dev + 2 * i + 1));
    }
    s.push_str(&format!("plot {}\n", parts.join(", \\\n     ")));
    s
}
