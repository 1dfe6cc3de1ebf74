//! Cross-method oracle suite behind `jumpstat verify` and the acceptance
//! test target. Every tolerance is a named constant.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coupling::{build_coupling_set, min_eigenvalue, Geometry};
use crate::error::Result;
use crate::linalg::vectorize;
use crate::liouville::{build_full, random_hermitian, GeneratorOptions};
use crate::model::{build_symmetrized_basis, BasisLabel, Dicke3, EnsembleSpec, Family, LevelScheme, SchemeKind};
use crate::rates::{
    closed_form_rates, ground_expectation, ground_expectation_first_order, quasi_steady_states, rho_ss3_populations,
    ClosedFormOrder, RateMatrix, RateMethod, StrongParams, System,
};
use crate::sweep::{rel_dev, run_sweep, ConfigOverrides, SweepConfig};
use crate::telegraph::{
    analytic_djr, analytic_tjr, count_multijumps, simulate_statistics, simulate_stream, CountingRule,
};
use crate::C64;

pub const SINGLE_D_TOL: f64 = 1e-9;
pub const SINGLE_D_LIMIT: Duration = Duration::from_secs(1);
pub const TWO_D_TOL: f64 = 1e-9;
pub const METHOD_AGREEMENT_TOL: f64 = 1e-6;
pub const METHOD_AGREEMENT_LIMIT: Duration = Duration::from_secs(60);
/// Allowed spread `max K / min K` of the fitted quadratic remainder constant.
pub const REMAINDER_DRIFT: f64 = 0.05;
pub const POPULATION_SUM_TOL: f64 = 1e-12;
pub const POPULATION_TOL: f64 = 1e-9;
pub const TRIPLE_BOUND_NEAR: f64 = 0.05;
pub const TRIPLE_BOUND_FAR: f64 = 0.01;
pub const SWEEP_LIMIT: Duration = Duration::from_secs(30);
pub const MC_SIGMAS: f64 = 3.0;
pub const MC_TRANSITIONS: f64 = 1.6e7;
pub const MC_LIMIT: Duration = Duration::from_secs(120);
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-12;

/// Deliberate corruption of one formula, used to show the suite notices it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    /// Multiplies the exact closed-form downward rates by `1 + eps`.
    ClosedFormScale(f64),
    /// Flips the sign of the coupling term in the first-order rates.
    FirstOrderSign,
    /// Multiplies the analytic triple jump rate.
    TripleJumpScale(f64),
    /// Multiplies the three-atom ground-state population.
    PopulationScale(f64),
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    /// Diagnostics that do not affect the verdict.
    pub notes: Vec<String>,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {}: {} {} ({:.2}s) {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

fn finish(
    id: u8,
    name: &'static str,
    start: Instant,
    limit: Option<Duration>,
    outcome: Result<(bool, String, Vec<String>)>,
) -> CheckResult {
    let elapsed = start.elapsed();
    let (mut passed, mut detail, notes) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}"), Vec::new()),
    };
    if let Some(limit) = limit {
        if elapsed > limit {
            passed = false;
            detail.push_str(&format!("; runtime {:.1}s over limit {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()));
        }
    }
    CheckResult { id, name, passed, detail, elapsed, notes }
}

fn closed_form(sys: &System, order: ClosedFormOrder, fault: Option<Fault>) -> Result<RateMatrix> {
    if order == ClosedFormOrder::FirstOrder && fault == Some(Fault::FirstOrderSign) {
        let mut flipped = sys.couplings.clone();
        flipped.c.iter_mut().for_each(|row| row.iter_mut().for_each(|c| *c = -*c));
        return closed_form_rates(&sys.spec, &flipped, order);
    }
    let mut m = closed_form_rates(&sys.spec, &sys.couplings, order)?;
    if let (ClosedFormOrder::Exact, Some(Fault::ClosedFormScale(eps))) = (order, fault) {
        for i in 0..m.n_atoms {
            m.set(i + 1, i, m.get(i + 1, i) * (1.0 + eps));
        }
    }
    Ok(m)
}

pub fn single_d_agreement(_fault: Option<Fault>) -> CheckResult {
    let start = Instant::now();
    let outcome = (|| {
        let a1 = 3e-4;
        let mut worst: f64 = 0.0;
        for rabi in [0.2, 0.5, 1.0, 2.0, 5.0] {
            for a2 in [1e-5, 1e-4, 1e-3, 1e-2, 1e-1] {
                let spec = EnsembleSpec::new(LevelScheme::d_system(a1, a2, 1.0, rabi), 1, Geometry::independent())?;
                let r = System::new(spec, GeneratorOptions::default())?.rates(RateMethod::Projection)?;
                let down = a2 * rabi * rabi / (1.0 + 2.0 * rabi * rabi);
                worst = worst.max(rel_dev(r.get(0, 1), a1)).max(rel_dev(r.get(1, 0), down));
            }
        }
        Ok((worst <= SINGLE_D_TOL, format!("max rel. error {worst:.2e} (tol {SINGLE_D_TOL:.0e}, 25 points)"), vec![]))
    })();
    finish(1, "single D-system projection vs analytic rates", start, Some(SINGLE_D_LIMIT), outcome)
}

pub fn two_d_upward(_fault: Option<Fault>) -> CheckResult {
    let start = Instant::now();
    let outcome = (|| {
        let a1 = 2e-4;
        let mut worst: f64 = 0.0;
        for r in [0.5, 1.0, 2.0, 5.0] {
            let scheme = LevelScheme::d_system(a1, 1e-3, 1.0, 0.7).with_wavelengths(vec![3.574, 1.245, 1.0]);
            let sys =
                System::new(EnsembleSpec::new(scheme, 2, Geometry::equilateral(r))?, GeneratorOptions::default())?;
            for m in [RateMethod::Projection, RateMethod::Simplified] {
                worst = worst.max(rel_dev(sys.rates(m)?.get(0, 1), 2.0 * a1));
            }
        }
        Ok((worst <= TWO_D_TOL, format!("max rel. error of p01 = 2 A1: {worst:.2e} (tol {TWO_D_TOL:.0e})"), vec![]))
    })();
    finish(2, "two D-systems upward rate", start, None, outcome)
}

/// Illustrative four-level parameters (units of `A3`).
pub fn four_level_scheme(detuning: f64) -> LevelScheme {
    let c = SweepConfig::preset(Default::default());
    c.scheme_params().with_detuning(detuning)
}

pub fn three_method_agreement(fault: Option<Fault>) -> CheckResult {
    let start = Instant::now();
    let outcome = (|| {
        let mut worst: f64 = 0.0;
        let mut scope_dev: f64 = 0.0;
        let mut where_worst = String::new();
        for det in [0.0, 0.5] {
            for k in 0..10 {
                let r = 0.5 + 9.5 * k as f64 / 9.0;
                let spec = EnsembleSpec::new(four_level_scheme(det), 3, Geometry::equilateral(r))?;
                let sys = System::new(spec.clone(), GeneratorOptions::strong_only())?;
                let tables = [
                    sys.rates(RateMethod::Projection)?,
                    sys.rates(RateMethod::Simplified)?,
                    closed_form(&sys, ClosedFormOrder::Exact, fault)?,
                ];
                for i in 0..3 {
                    for (x, y) in [(i, i + 1), (i + 1, i)] {
                        for a in 0..3 {
                            for b in a + 1..3 {
                                let d = rel_dev(tables[a].get(x, y), tables[b].get(x, y));
                                if d > worst {
                                    worst = d;
                                    where_worst = format!("p{x}{y} r={r:.2} detuning={det}");
                                }
                            }
                        }
                    }
                }
                if k % 3 == 0 {
                    let all = System::new(spec, GeneratorOptions::default())?.rates(RateMethod::Projection)?;
                    for i in 0..3 {
                        for (x, y) in [(i, i + 1), (i + 1, i)] {
                            scope_dev = scope_dev.max(rel_dev(all.get(x, y), tables[0].get(x, y)));
                        }
                    }
                }
            }
        }
        let note = format!(
            "with every transition collective the projection rates move by up to {scope_dev:.2e} relative (not part of the check)"
        );
        Ok((
            worst <= METHOD_AGREEMENT_TOL,
            format!("max pairwise rel. difference {worst:.2e} at {where_worst} (tol {METHOD_AGREEMENT_TOL:.0e})"),
            vec![note],
        ))
    })();
    finish(
        3,
        "projection / simplified / closed form, three four-level atoms",
        start,
        Some(METHOD_AGREEMENT_LIMIT),
        outcome,
    )
}

pub fn first_order_fidelity(fault: Option<Fault>) -> CheckResult {
    let start = Instant::now();
    let outcome = (|| {
        let scheme = four_level_scheme(0.0);
        // signed remainder / |C3|^2 per (detuning, phase, k), over |C3| in [1e-4, 1e-2]
        let mut curves: Vec<(f64, f64, usize, Vec<f64>)> = Vec::new();
        for det in [0.0, 0.5] {
            for phase in [0.0, 1.0, 2.0, 2.5] {
                for k in 2..=3usize {
                    let mut vals = Vec::new();
                    for e in 0..5 {
                        let mag = 10f64.powf(-4.0 + 0.5 * e as f64);
                        let p =
                            StrongParams { a: 1.0, rabi: scheme.rabi, detuning: det, c: C64::from_polar(mag, phase) };
                        let exact = ground_expectation(k, &p)?;
                        let mut first = ground_expectation_first_order(k, &p)?;
                        if fault == Some(Fault::FirstOrderSign) {
                            let zero = ground_expectation_first_order(k, &StrongParams { c: C64::new(0.0, 0.0), ..p })?;
                            first = 2.0 * zero - first;
                        }
                        // the rates are W*br*e_k (four-level) or A2*(k - e_k): same remainder up to a constant
                        vals.push((exact - first) / (mag * mag));
                    }
                    curves.push((det, phase, k, vals));
                }
            }
        }
        // a combination whose quadratic coefficient happens to be near zero is dominated by the
        // cubic term, so drift is measured against the largest coefficient on the grid
        let k_ref = curves.iter().map(|c| c.3[0].abs()).fold(0.0, f64::max);
        let mut drift_worst: f64 = 0.0;
        let mut notes = Vec::new();
        for (det, phase, k, vals) in &curves {
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let drift = (hi - lo) / k_ref;
            drift_worst = drift_worst.max(drift);
            if vals[0].abs() < 0.1 * k_ref {
                notes.push(format!(
                    "small coefficient at detuning {det}, phase {phase}, k {k}: K from {:.5} to {:.5}",
                    vals[0],
                    vals[vals.len() - 1]
                ));
            }
        }
        Ok((
            drift_worst <= REMAINDER_DRIFT,
            format!(
                "max drift of remainder / |C3|^2 over |C3| in [1e-4, 1e-2] is {drift_worst:.2e} of K_max = {k_ref:.3} (tol {REMAINDER_DRIFT})"
            ),
            notes,
        ))
    })();
    finish(4, "first-order rates are the linearisation of the exact ones", start, None, outcome)
}

/// Populations of the symmetrized three-atom states read from a density matrix.
fn numeric_populations(spec: &EnsembleSpec, rho: &crate::liouville::DensityOperator) -> Result<[f64; 8]> {
    let basis = build_symmetrized_basis(spec)?;
    let find = |label: Dicke3| -> f64 {
        let b = basis.iter().find(|b| b.label == BasisLabel::Dicke3(label)).expect("label in basis");
        rho.expectation(&b.to_dense(spec.dim()))
    };
    Ok([
        find(Dicke3::Ground),
        find(Dicke3::Pair(Family::S, 3, 1)),
        find(Dicke3::Pair(Family::B, 3, 1)),
        find(Dicke3::Pair(Family::C, 3, 1)),
        find(Dicke3::Pair(Family::S, 1, 3)),
        find(Dicke3::Pair(Family::B, 1, 3)),
        find(Dicke3::Pair(Family::C, 1, 3)),
        find(Dicke3::Excited(3)),
    ])
}

pub fn three_atom_populations(fault: Option<Fault>) -> CheckResult {
    let start = Instant::now();
    let outcome = (|| {
        let scale = match fault {
            Some(Fault::PopulationScale(s)) => s,
            _ => 1.0,
        };
        let closed = |a: f64, rabi: f64, c: C64| {
            let p = rho_ss3_populations(a, rabi, c);
            [p.ground * scale, p.s311, p.b311, p.c311, p.s133, p.b133, p.c133, p.e3]
        };
        let mut sum_err: f64 = 0.0;
        for rabi in [0.1, 0.55, 1.0, 3.0] {
            let p = closed(1.0, rabi, C64::new(0.0, 0.0));
            sum_err = sum_err.max((p.iter().sum::<f64>() - 1.0).abs());
            let g1 = (1.0 + rabi * rabi) / (1.0 + 2.0 * rabi * rabi);
            sum_err = sum_err.max((p[0] - g1.powi(3)).abs());
        }
        let mut worst: f64 = 0.0;
        let mut notes = Vec::new();
        for a3 in [1.0, 2.0] {
            for r in [0.5, 0.75, 1.0, 2.0, 5.0, 10.0] {
                let mut scheme = four_level_scheme(0.0);
                scheme.einstein[2] = a3;
                let spec = EnsembleSpec::new(scheme.clone(), 3, Geometry::equilateral(r))?;
                let sys = System::new(spec.clone(), GeneratorOptions::strong_only())?;
                let qss = quasi_steady_states(&spec, &sys.split().l0)?;
                let numeric = numeric_populations(&spec, &qss.rho(3))?;
                let c = sys.couplings.get(0, 1, 3);
                let formula = closed(a3, scheme.rabi, c);
                for (x, y) in numeric.iter().zip(&formula) {
                    worst = worst.max((x - y).abs());
                }
                if a3 != 1.0 && r == 0.5 {
                    // ground population with the bracket prefactor 2*A3 instead of 2*A3^2
                    let (a2, om2) = (a3 * a3, scheme.rabi * scheme.rabi);
                    let (x, y) = (a2 + om2, a2 + 2.0 * om2);
                    let b = c.norm_sqr() + 2.0 * a3 * c.re;
                    let tail = 2.0 * a3 * (c.norm_sqr() * (c + a3).norm_sqr() + b * b);
                    let g = (x * (x * x + 3.0 * a2 * b) + tail) / (y * (y * y + 3.0 * a2 * b) + tail);
                    notes.push(format!(
                        "A3 = {a3}: bracket prefactor 2*A3 gives ground population off by {:.2e}; 2*A3^2 matches to {:.1e}",
                        (g - numeric[0]).abs(),
                        (formula[0] - numeric[0]).abs()
                    ));
                }
            }
        }
        Ok((
            sum_err <= POPULATION_SUM_TOL && worst <= POPULATION_TOL,
            format!(
                "C3=0 sum/factorisation error {sum_err:.1e} (tol {POPULATION_SUM_TOL:.0e}); vs null space {worst:.1e} (tol {POPULATION_TOL:.0e})"
            ),
            notes,
        ))
    })();
    finish(5, "three-bright-atom quasi-steady populations", start, None, outcome)
}

pub fn triple_jump_bound(fault: Option<Fault>) -> CheckResult {
    let start = Instant::now();
    let outcome = (|| {
        let cfg = SweepConfig::resolve(ConfigOverrides {
            r_min: Some(1.0),
            r_max: Some(10.0),
            points: Some(200),
            methods: Some(vec![RateMethod::ClosedForm, RateMethod::FirstOrder]),
            ..Default::default()
        })?;
        let rows = run_sweep(&cfg)?;
        let scale = match fault {
            Some(Fault::TripleJumpScale(s)) => s,
            _ => 1.0,
        };
        let mut near: f64 = 0.0;
        let mut far: f64 = 0.0;
        let mut gap: f64 = 0.0;
        for row in &rows {
            let (_, tj0) = row.jumps_independent.expect("three atoms");
            let dev = rel_dev(row.jumps[0].1 * scale, tj0);
            near = near.max(dev);
            if row.point.r >= 3.0 {
                far = far.max(dev);
            }
            gap = gap.max(rel_dev(row.jumps[1].1, row.jumps[0].1));
        }
        Ok((
            near <= TRIPLE_BOUND_NEAR && far <= TRIPLE_BOUND_FAR,
            format!(
                "max |n_TJ/n_TJ(indep) - 1|: {near:.3e} for r >= 1 (bound {TRIPLE_BOUND_NEAR}), {far:.3e} for r >= 3 (bound {TRIPLE_BOUND_FAR}); 200 points"
            ),
            vec![format!("first-order vs exact n_TJ: max rel. gap {gap:.2e}")],
        ))
    })();
    finish(6, "triple jump deviation bound at the optimal Rabi frequency", start, Some(SWEEP_LIMIT), outcome)
}

/// Rates of the Monte Carlo fixture with its double- and triple-jump windows.
///
/// The leading-order double-jump rate is low by about p*T_W/2 relatively, which
/// grows past the statistical error as the sample grows, so doubles are counted
/// in a narrower window than triples.
pub fn mc_fixture() -> (RateMatrix, f64, f64) {
    (RateMatrix::birth_death(&[1.0, 0.8, 0.6], &[0.6, 0.8, 1.0], RateMethod::ClosedForm), 0.002, 0.01)
}

/// Leading-order multi-jump rates summed over monotone paths of the
/// stationary chain, independent of the closed expressions.
pub fn path_sum_rates(p: &RateMatrix, window: f64) -> Result<(f64, f64)> {
    let pi = p.stationary()?;
    let n = p.levels();
    let mut dj = 0.0;
    let mut tj = 0.0;
    for (i, &pi_i) in pi.iter().enumerate() {
        for dir in [1i64, -1] {
            let step = |k: i64| -> Option<f64> {
                let (a, b) = (i as i64 + k * dir, i as i64 + (k + 1) * dir);
                (b >= 0 && (b as usize) < n).then(|| p.get(a as usize, b as usize))
            };
            if let (Some(r1), Some(r2)) = (step(0), step(1)) {
                dj += pi_i * r1 * r2 * window;
                if let Some(r3) = step(2) {
                    tj += pi_i * r1 * r2 * r3 * window * window;
                }
            }
        }
    }
    Ok((dj, tj))
}

pub fn monte_carlo(fault: Option<Fault>) -> CheckResult {
    let start = Instant::now();
    let outcome = (|| {
        let (p, window_dj, window) = mc_fixture();
        let scale = match fault {
            Some(Fault::TripleJumpScale(s)) => s,
            _ => 1.0,
        };
        let dj = analytic_djr(&p, window_dj)?;
        let tj = analytic_tjr(&p, window)? * scale;
        let (dj_path, _) = path_sum_rates(&p, window_dj)?;
        let (_, tj_path) = path_sum_rates(&p, window)?;
        let pmax = p.max_rate();
        let pi = p.stationary()?;
        let mean_exit: f64 = (0..p.levels()).map(|i| pi[i] * p.escape_rate(i)).sum();
        let streams = 16;
        let t_end = MC_TRANSITIONS / mean_exit / streams as f64;
        let doubles = simulate_statistics(&p, t_end, 2024, streams, window_dj, CountingRule::default())?;
        let stats = simulate_statistics(&p, t_end, 2024, streams, window, CountingRule::default())?;
        let again = count_multijumps(&simulate_stream(&p, t_end / 50.0, 2024, 3)?, window, CountingRule::default());
        let again2 = count_multijumps(&simulate_stream(&p, t_end / 50.0, 2024, 3)?, window, CountingRule::default());
        let zd = (doubles.double_rate() - dj) / doubles.double_err();
        let zt = (stats.triple_rate() - tj) / stats.triple_err();
        let oracle = rel_dev(dj, dj_path).max(rel_dev(tj / scale, tj_path));
        let passed = zd.abs() <= MC_SIGMAS
            && zt.abs() <= MC_SIGMAS
            && stats.n_transitions as f64 >= 1e6
            && pmax * window <= 0.01
            && again == again2
            && oracle <= 1e-12;
        Ok((
            passed,
            format!(
                "{} transitions; n_DJ z = {zd:+.2} ({} events, T_W {window_dj}), n_TJ z = {zt:+.2} ({} events, T_W {window}); limit {MC_SIGMAS} sigma; p*T_W = {:.3}; path-sum oracle {oracle:.1e}; seed repeat identical: {}",
                stats.n_transitions,
                doubles.n_double,
                stats.n_triple,
                pmax * window,
                again == again2
            ),
            vec![],
        ))
    })();
    finish(7, "Monte Carlo telegraph process vs analytic multi-jump rates", start, Some(MC_LIMIT), outcome)
}

pub fn generator_sanity(_fault: Option<Fault>) -> CheckResult {
    let start = Instant::now();
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for kind in [SchemeKind::DThreeLevel, SchemeKind::FourLevel] {
            for n in 1..=3 {
                for opts in [GeneratorOptions::default(), GeneratorOptions::strong_only()] {
                    let scheme = match kind {
                        SchemeKind::DThreeLevel => LevelScheme::d_system(1e-3, 2e-3, 1.0, 0.7)
                            .with_detuning(0.3)
                            .with_wavelengths(vec![3.574, 1.245, 1.0]),
                        SchemeKind::FourLevel => four_level_scheme(0.3),
                    };
                    let geo = if n == 1 { Geometry::independent() } else { Geometry::equilateral(0.3) };
                    let spec = EnsembleSpec::new(scheme, n, geo)?;
                    let cs = build_coupling_set(&spec.geometry, &spec.scheme, n)?;
                    let full = build_full(&spec, &cs, opts);
                    let d = spec.dim();
                    for _ in 0..1000 {
                        let rho = random_hermitian(d, &mut rng);
                        let out = full.matrix.mul_vec(&vectorize(&rho));
                        let tr: C64 = (0..d).map(|k| out[k + k * d]).sum();
                        worst = worst.max(tr.norm());
                    }
                    count += 1;
                }
            }
        }
        let mut min_eig = f64::INFINITY;
        let scheme = four_level_scheme(0.0);
        for j in 1..=4 {
            for k in 0..200 {
                let ratio = 0.05 * (200f64).powf(k as f64 / 199.0);
                let geo = Geometry::equilateral(ratio * scheme.wavelengths[j - 1]);
                let cs = build_coupling_set(&geo, &scheme, 3)?;
                min_eig = min_eig.min(min_eigenvalue(&cs.damping_matrix(&scheme, j)) / scheme.a(j));
            }
        }
        Ok((
            worst < TRACE_TOL && min_eig >= -PSD_TOL,
            format!(
                "max |Tr L rho| {worst:.1e} over {count} generators x 1000 states (tol {TRACE_TOL:.0e}); min damping eigenvalue / A_j {min_eig:.3e} for r/lambda_j in [0.05, 10]"
            ),
            vec![],
        ))
    })();
    finish(8, "generator trace preservation and damping positivity", start, None, outcome)
}

/// Runs the checks with the given ids (1-based); unknown ids are skipped.
pub fn run_selected(ids: &[usize], fault: Option<Fault>) -> Vec<CheckResult> {
    let checks: [fn(Option<Fault>) -> CheckResult; 8] = [
        single_d_agreement,
        two_d_upward,
        three_method_agreement,
        first_order_fidelity,
        three_atom_populations,
        triple_jump_bound,
        monte_carlo,
        generator_sanity,
    ];
    ids.iter().filter_map(|&i| checks.get(i.wrapping_sub(1))).map(|f| f(fault)).collect()
}

pub fn run_all(fault: Option<Fault>) -> Vec<CheckResult> {
    vec![
        single_d_agreement(fault),
        two_d_upward(fault),
        three_method_agreement(fault),
        first_order_fidelity(fault),
        three_atom_populations(fault),
        triple_jump_bound(fault),
        monte_carlo(fault),
        generator_sanity(fault),
    ]
}
