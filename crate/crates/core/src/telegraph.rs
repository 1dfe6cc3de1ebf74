//! Intensity telegraph process: analytic double/triple jump rates and a
//! seeded continuous-time Markov chain simulator to check them.
//!
//! The simulator uses ChaCha8 (`rand_chacha`) seeded with `seed_from_u64`;
//! holding times are drawn by inverse CDF, `-ln(1-u)/q`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::RateMatrix;

fn require_four_levels(p: &RateMatrix) -> Result<()> {
    if p.levels() != 4 {
        return Err(Error::Unsupported(format!("multi-jump formulas need 4 intensity levels, got {}", p.levels())));
    }
    Ok(())
}

/// `p21 p32 (p01 + p10) + p01 p12 (p23 + p32)`: normalisation of the
/// stationary distribution of the four-level chain.
fn partition(p: &RateMatrix) -> f64 {
    let g = |i, j| p.get(i, j);
    g(2, 1) * g(3, 2) * (g(0, 1) + g(1, 0)) + g(0, 1) * g(1, 2) * (g(2, 3) + g(3, 2))
}

fn checked(z: f64, what: &str) -> Result<f64> {
    if z > 0.0 && z.is_finite() {
        Ok(z)
    } else {
        Err(Error::DegenerateChain(format!("{what}: normalisation is {z}")))
    }
}

/// Rate of two consecutive jumps in the same direction within `window`,
/// to leading order in the window: `2 p01 p12 p21 p32 (p10 + p23) / Z * T_W`.
pub fn analytic_djr(p: &RateMatrix, window: f64) -> Result<f64> {
    require_four_levels(p)?;
    let g = |i, j| p.get(i, j);
    let z = checked(partition(p), "double jump rate")?;
    Ok(2.0 * g(0, 1) * g(1, 2) * g(2, 1) * g(3, 2) * (g(1, 0) + g(2, 3)) / z * window)
}

/// The double jump expression `2 p01 p21 p32 (p01 + p12) / Z * T_W`, kept
/// for comparison with [`analytic_djr`]; the two agree when all rates are
/// equal.
pub fn printed_djr(p: &RateMatrix, window: f64) -> Result<f64> {
    require_four_levels(p)?;
    let g = |i, j| p.get(i, j);
    let z = checked(partition(p), "double jump rate")?;
    Ok(2.0 * g(0, 1) * g(2, 1) * g(3, 2) * (g(0, 1) + g(1, 2)) / z * window)
}

/// Rate of three consecutive jumps in the same direction, each following the
/// previous within `window`: `2 p01 p10 p12 p21 p23 p32 / Z * T_W^2`.
pub fn analytic_tjr(p: &RateMatrix, window: f64) -> Result<f64> {
    require_four_levels(p)?;
    let g = |i, j| p.get(i, j);
    let z = checked(partition(p), "triple jump rate")?;
    Ok(2.0 * g(0, 1) * g(1, 0) * g(1, 2) * g(2, 1) * g(2, 3) * g(3, 2) / z * window * window)
}

/// Sample path of the intensity level. Event `k` happens at `times[k]` and
/// sets the level to `levels[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphTrajectory {
    pub initial_level: u8,
    pub times: Vec<f64>,
    pub levels: Vec<u8>,
    pub t_end: f64,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl TelegraphTrajectory {
    pub fn n_transitions(&self) -> usize {
        self.times.len()
    }

    fn level_before(&self, k: usize) -> u8 {
        if k == 0 {
            self.initial_level
        } else {
            self.levels[k - 1]
        }
    }

    /// Fraction of `[0, t_end]` spent in each level.
    pub fn occupation(&self, n_levels: usize) -> Vec<f64> {
        let mut occ = vec![0.0; n_levels];
        let mut t = 0.0;
        let mut level = self.initial_level;
        for (&tk, &lk) in self.times.iter().zip(&self.levels) {
            occ[level as usize] += tk - t;
            t = tk;
            level = lk;
        }
        occ[level as usize] += self.t_end - t;
        occ.iter().map(|x| x / self.t_end).collect()
    }

    /// Two columns `time level`, starting with the initial level at t = 0.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# jumpstat v{}", crate::VERSION)?;
        writeln!(w, "# seed {} t_end {}", self.seed, self.t_end)?;
        writeln!(w, "time level")?;
        writeln!(w, "0 {}", self.initial_level)?;
        for (t, l) in self.times.iter().zip(&self.levels) {
            writeln!(w, "{t:.9e} {l}")?;
        }
        Ok(())
    }
}

/// Samples the birth-death chain on `[0, t_end]`. The initial level is drawn
/// from the stationary distribution (level 0 if it does not exist).
pub fn simulate(p: &RateMatrix, t_end: f64, seed: u64) -> Result<TelegraphTrajectory> {
    simulate_stream(p, t_end, seed, 0)
}

/// As [`simulate`], on an independent ChaCha stream of the same seed.
pub fn simulate_stream(p: &RateMatrix, t_end: f64, seed: u64, stream: u64) -> Result<TelegraphTrajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("t_end must be positive and finite, got {t_end}")));
    }
    let n = p.levels();
    for i in 0..n {
        for j in 0..n {
            if p.get(i, j) < 0.0 || !p.get(i, j).is_finite() {
                return Err(Error::NegativeRate { from: i, to: j, value: p.get(i, j) });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut warnings = Vec::new();
    let start = match p.stationary() {
        Ok(pi) => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut level = n - 1;
            for (k, x) in pi.iter().enumerate() {
                acc += x;
                if u < acc {
                    level = k;
                    break;
                }
            }
            level
        }
        Err(_) => 0,
    };
    let exits: Vec<f64> = (0..n).map(|i| p.escape_rate(i)).collect();
    let expected = exits.iter().fold(0.0f64, |a, &b| a.max(b)) * t_end;
    let mut times = Vec::with_capacity((expected as usize).min(1 << 26));
    let mut levels = Vec::with_capacity(times.capacity());
    let mut t = 0.0;
    let mut level = start;
    loop {
        let q = exits[level];
        if q <= 0.0 {
            let msg = format!("level {level} is absorbing (no exit rate); trajectory stops changing at t = {t}");
            log::warn!("{msg}");
            warnings.push(msg);
            break;
        }
        let u: f64 = rng.random();
        t += -(1.0 - u).ln() / q;
        if t >= t_end {
            break;
        }
        let pick: f64 = rng.random::<f64>() * q;
        let up = if level + 1 < n { p.get(level, level + 1) } else { 0.0 };
        level = if pick < up { level + 1 } else { level - 1 };
        times.push(t);
        levels.push(level as u8);
    }
    Ok(TelegraphTrajectory { initial_level: start as u8, times, levels, t_end, seed, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowRule {
    /// Every gap between consecutive jumps is shorter than the window.
    #[default]
    Chained,
    /// First and last jump lie within one window.
    Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionRule {
    /// Jumps must add up to a net change of +-2 (+-3).
    #[default]
    NetChange,
    /// Any two (three) consecutive jumps in the window count.
    AnyPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CountingRule {
    #[serde(default)]
    pub window: WindowRule,
    #[serde(default)]
    pub direction: DirectionRule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpStatistics {
    pub n_double: u64,
    pub n_triple: u64,
    pub n_transitions: u64,
    pub t_total: f64,
    pub window: f64,
    pub rule: CountingRule,
    pub warnings: Vec<String>,
}

impl JumpStatistics {
    pub fn double_rate(&self) -> f64 {
        self.n_double as f64 / self.t_total
    }

    /// Poisson standard error of [`Self::double_rate`].
    pub fn double_err(&self) -> f64 {
        (self.n_double as f64).sqrt().max(1.0) / self.t_total
    }

    pub fn triple_rate(&self) -> f64 {
        self.n_triple as f64 / self.t_total
    }

    pub fn triple_err(&self) -> f64 {
        (self.n_triple as f64).sqrt().max(1.0) / self.t_total
    }

    /// Sums counts and durations of independent runs with the same window.
    pub fn merge(mut self, other: &JumpStatistics) -> JumpStatistics {
        self.n_double += other.n_double;
        self.n_triple += other.n_triple;
        self.n_transitions += other.n_transitions;
        self.t_total += other.t_total;
        self.warnings.extend(other.warnings.iter().cloned());
        self
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "window = {}", self.window)?;
        writeln!(w, "window_rule = {:?}", self.rule.window)?;
        writeln!(w, "direction_rule = {:?}", self.rule.direction)?;
        writeln!(w, "t_total = {}", self.t_total)?;
        writeln!(w, "transitions = {}", self.n_transitions)?;
        writeln!(w, "double_jumps = {}", self.n_double)?;
        writeln!(w, "triple_jumps = {}", self.n_triple)?;
        writeln!(w, "double_rate = {:.6e}", self.double_rate())?;
        writeln!(w, "double_rate_err = {:.6e}", self.double_err())?;
        writeln!(w, "triple_rate = {:.6e}", self.triple_rate())?;
        writeln!(w, "triple_rate_err = {:.6e}", self.triple_err())?;
        Ok(())
    }
}

/// Counts double and triple jumps with sliding windows: every pair (triple)
/// of consecutive events is tested, so one triple jump also contributes two
/// double jumps.
pub fn count_multijumps(traj: &TelegraphTrajectory, window: f64, rule: CountingRule) -> JumpStatistics {
    let mut warnings = Vec::new();
    let n = traj.n_transitions();
    if n > 0 {
        let mean_hold = traj.t_end / n as f64;
        if window > 0.1 * mean_hold {
            let msg = format!("window {window} is not small against the mean holding time {mean_hold:.4e}");
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    let t = &traj.times;
    let lv = |k: usize| traj.levels[k] as i32;
    let before = |k: usize| traj.level_before(k) as i32;
    let mut n_double = 0;
    let mut n_triple = 0;
    for k in 1..n {
        if t[k] - t[k - 1] < window {
            let net = (lv(k) - before(k - 1)).abs();
            if rule.direction == DirectionRule::AnyPair || net == 2 {
                n_double += 1;
            }
        }
        if k >= 2 {
            let inside = match rule.window {
                WindowRule::Chained => t[k] - t[k - 1] < window && t[k - 1] - t[k - 2] < window,
                WindowRule::Span => t[k] - t[k - 2] < window,
            };
            if inside {
                let net = (lv(k) - before(k - 2)).abs();
                if rule.direction == DirectionRule::AnyPair || net == 3 {
                    n_triple += 1;
                }
            }
        }
    }
    JumpStatistics { n_double, n_triple, n_transitions: n as u64, t_total: traj.t_end, window, rule, warnings }
}

/// Runs `streams` independent trajectories of length `t_end` each and merges
/// their statistics. Results do not depend on the thread count.
pub fn simulate_statistics(
    p: &RateMatrix,
    t_end: f64,
    seed: u64,
    streams: u64,
    window: f64,
    rule: CountingRule,
) -> Result<JumpStatistics> {
    let run = |s: u64| -> Result<JumpStatistics> {
        let traj = simulate_stream(p, t_end, seed, s)?;
        let mut st = count_multijumps(&traj, window, rule);
        st.warnings.extend(traj.warnings);
        Ok(st)
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Result<JumpStatistics>> = {
        use rayon::prelude::*;
        (0..streams).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<JumpStatistics>> = (0..streams).map(run).collect();
    let mut it = parts.into_iter();
    let first = it.next().ok_or_else(|| Error::Domain("need at least one stream".into()))??;
    it.try_fold(first, |acc, s| Ok(acc.merge(&s?)))
}
