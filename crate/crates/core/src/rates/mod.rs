//! Transition rates `p_ij` between intensity periods.

mod closed_form;
mod evolution;
mod projection;
mod simplified;
mod steady;

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coupling::{build_coupling_set, CouplingSet};
use crate::error::{Error, Result};
use crate::liouville::{split_generator, GeneratorOptions, SplitGenerator};
use crate::model::EnsembleSpec;

pub use closed_form::{
    closed_form_rates, ground_expectation, ground_expectation_first_order, rho_ss3_populations, ClosedFormOrder,
    StrongParams, ThreeAtomPopulations,
};
pub use evolution::{perturbative_evolution, EvolutionResult};

pub use projection::rates_by_projection;
pub use simplified::{channels_for, rates_by_simplified_scheme, DecayChannel};
pub use steady::{quasi_steady_states, BlockSteadyState, QuasiSteadyStates};

/// Entries below this fraction of the largest rate count as numerical zeros
/// when checking that only neighbouring periods are connected.
pub const BIRTH_DEATH_TOL: f64 = 1e-8;

/// Slightly negative rates in `[-NEGATIVE_CLAMP, 0)` are rounding noise.
pub const NEGATIVE_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateMethod {
    Projection,
    Simplified,
    #[serde(alias = "closed-exact", alias = "closed_exact")]
    ClosedForm,
    #[serde(alias = "closed-first-order", alias = "closed_first_order")]
    FirstOrder,
}

impl fmt::Display for RateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateMethod::Projection => "projection",
            RateMethod::Simplified => "simplified",
            RateMethod::ClosedForm => "closed-form",
            RateMethod::FirstOrder => "first-order",
        })
    }
}

impl std::str::FromStr for RateMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projection" => Ok(RateMethod::Projection),
            "simplified" => Ok(RateMethod::Simplified),
            "closed-form" | "closed-exact" | "closed_exact" => Ok(RateMethod::ClosedForm),
            "first-order" | "closed-first-order" | "closed_first_order" => Ok(RateMethod::FirstOrder),
            other => Err(Error::Config(format!("unknown rate method '{other}'"))),
        }
    }
}

/// Rates `p_ij` of the birth-death chain on intensity levels `0..=n`.
/// Diagonal entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    pub n_atoms: usize,
    pub method: RateMethod,
    p: DMatrix<f64>,
}

impl RateMatrix {
    pub fn zeros(n_atoms: usize, method: RateMethod) -> Self {
        RateMatrix { n_atoms, method, p: DMatrix::zeros(n_atoms + 1, n_atoms + 1) }
    }

    /// Builds a birth-death chain from `up[i] = p_{i,i+1}`, `down[i] = p_{i+1,i}`.
    pub fn birth_death(up: &[f64], down: &[f64], method: RateMethod) -> Self {
        assert_eq!(up.len(), down.len());
        let mut m = RateMatrix::zeros(up.len(), method);
        for i in 0..up.len() {
            m.p[(i, i + 1)] = up[i];
            m.p[(i + 1, i)] = down[i];
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        if i != j {
            self.p[(i, j)] = v;
        }
    }

    pub fn levels(&self) -> usize {
        self.n_atoms + 1
    }

    pub fn max_rate(&self) -> f64 {
        self.p.iter().copied().fold(0.0, f64::max)
    }

    /// Largest rate between non-neighbouring levels.
    pub fn max_non_neighbour(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.levels() {
            for j in 0..self.levels() {
                if i.abs_diff(j) > 1 {
                    m = m.max(self.p[(i, j)].abs());
                }
            }
        }
        m
    }

    /// Generator `Q` of the jump process (rows sum to zero).
    pub fn generator(&self) -> DMatrix<f64> {
        let mut q = self.p.clone();
        for i in 0..self.levels() {
            q[(i, i)] = -self.p.row(i).sum();
        }
        q
    }

    pub fn escape_rate(&self, i: usize) -> f64 {
        self.p.row(i).sum()
    }

    /// Stationary distribution of the birth-death chain by detailed balance.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let n = self.levels();
        let mut w = vec![1.0; n];
        for i in 1..n {
            let (up, down) = (self.p[(i - 1, i)], self.p[(i, i - 1)]);
            if down <= 0.0 {
                return Err(Error::DegenerateChain(format!("p_{i}{} is zero", i - 1)));
            }
            w[i] = w[i - 1] * up / down;
        }
        let z: f64 = w.iter().sum();
        Ok(w.into_iter().map(|x| x / z).collect())
    }

    /// Checks the birth-death structure and clamps rounding-level negatives.
    pub(crate) fn finalize(mut self) -> Result<Self> {
        let scale = self.max_rate();
        for i in 0..self.levels() {
            for j in 0..self.levels() {
                let v = self.p[(i, j)];
                if v < 0.0 {
                    if v >= -NEGATIVE_CLAMP.max(1e-9 * scale) {
                        self.p[(i, j)] = 0.0;
                    } else {
                        return Err(Error::NegativeRate { from: i, to: j, value: v });
                    }
                }
            }
        }
        let stray = self.max_non_neighbour();
        if stray > BIRTH_DEATH_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvariantViolation { leak: stray });
        }
        for i in 0..self.levels() {
            for j in 0..self.levels() {
                if i.abs_diff(j) > 1 {
                    self.p[(i, j)] = 0.0;
                }
            }
        }
        Ok(self)
    }

    /// Scales every rate by `factor` (e.g. to convert to 1/s).
    pub fn scaled(&self, factor: f64) -> RateMatrix {
        RateMatrix { n_atoms: self.n_atoms, method: self.method, p: &self.p * factor }
    }
}

/// Spec, couplings and generator options bundled for rate computations.
#[derive(Debug, Clone)]
pub struct System {
    pub spec: EnsembleSpec,
    pub couplings: CouplingSet,
    pub opts: GeneratorOptions,
}

impl System {
    pub fn new(spec: EnsembleSpec, opts: GeneratorOptions) -> Result<Self> {
        let couplings = build_coupling_set(&spec.geometry, &spec.scheme, spec.n_atoms)?;
        Ok(System { spec, couplings, opts })
    }

    pub fn split(&self) -> SplitGenerator {
        split_generator(&self.spec, &self.couplings, self.opts)
    }

    pub fn rates(&self, method: RateMethod) -> Result<RateMatrix> {
        match method {
            RateMethod::Projection => rates_by_projection(self),
            RateMethod::Simplified => rates_by_simplified_scheme(self),
            RateMethod::ClosedForm => closed_form_rates(&self.spec, &self.couplings, ClosedFormOrder::Exact),
            RateMethod::FirstOrder => closed_form_rates(&self.spec, &self.couplings, ClosedFormOrder::FirstOrder),
        }
    }
}

/// Writes `i,j,rate,method` rows for every nonzero off-diagonal rate.
pub fn write_rate_table<W: Write>(mut w: W, tables: &[RateMatrix], unit: &str) -> std::io::Result<()> {
    writeln!(w, "# jumpstat v{}", crate::VERSION)?;
    writeln!(w, "# rate unit: {unit}")?;
    writeln!(w, "i,j,rate,method")?;
    for t in tables {
        for i in 0..t.levels() {
            for j in 0..t.levels() {
                if i.abs_diff(j) == 1 {
                    writeln!(w, "{i},{j},{:.12e},{}", t.get(i, j), t.method)?;
                }
            }
        }
    }
    Ok(())
}
