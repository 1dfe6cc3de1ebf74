use std::collections::HashSet;

use nalgebra::DVector;

use super::projection::{reachable, support};
use super::steady::QuasiSteadyStates;
use super::RateMatrix;
use crate::error::{Error, Result};
use crate::linalg::{unvectorize, zero, SparseMatrix};
use crate::liouville::DensityOperator;
use crate::model::LevelScheme;
use crate::C64;

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub rho: DensityOperator,
    /// `Delta t` lies in the window where the expansion holds.
    pub in_window: bool,
    pub warnings: Vec<String>,
}

/// `e^{L Delta t} rho_ss,i` to first order in the weak processes, for
/// `1/A3 << Delta t << 1/weak`:
/// `rho_ss,i + sum_j alpha_ij rho_ss,j Delta t + w`, where `L0 w = -(L1 rho_ss,i - sum_j alpha_ij rho_ss,j)`
/// and `w` has no component along the quasi-steady states.
pub fn perturbative_evolution(
    scheme: &LevelScheme,
    qss: &QuasiSteadyStates,
    l0: &SparseMatrix,
    l1: &SparseMatrix,
    rates: &RateMatrix,
    i: usize,
    dt: f64,
) -> Result<EvolutionResult> {
    if i > qss.n_atoms {
        return Err(Error::Domain(format!("intensity {i} out of range")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let mut warnings = Vec::new();
    let lower = dt * scheme.a(3);
    let upper = dt * scheme.weak_scale();
    let in_window = lower >= 10.0 && upper <= 0.1;
    if !in_window {
        let msg = format!("dt*A3 = {lower:.3e}, dt*weak = {upper:.3e}: outside the perturbative window");
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let n = qss.n_atoms;
    let q = rates.generator();
    let alpha: Vec<f64> = (0..=n).map(|j| q[(i, j)]).collect();
    let start = qss.vector(i);
    let mut drift = l1.mul_vec(&start);
    let mut base = start.clone();
    for (j, &a) in alpha.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let v = qss.vector(j);
        for k in 0..drift.len() {
            drift[k] -= v[k] * a;
            base[k] += v[k] * (a * dt);
        }
    }

    let seeds = support(&drift);
    let mut w = vec![zero(); drift.len()];
    if !seeds.is_empty() {
        let set = reachable(l0, &seeds, &HashSet::new());
        let m = l0.dense_block(&set, &set);
        let rhs = DVector::from_iterator(set.len(), set.iter().map(|&k| -drift[k]));
        let svd = m.svd(true, true);
        let sol = svd.solve(&rhs, 1e-10 * svd.singular_values.max()).map_err(|e| Error::Domain(e.to_string()))?;
        for (pos, &k) in set.iter().enumerate() {
            w[k] = sol[pos];
        }
        for b in 0..qss.blocks.len() {
            let c: C64 = qss.weight(b, &w);
            let blk = &qss.blocks[b];
            for (&k, &s) in blk.liouville.iter().zip(&blk.state) {
                w[k] -= c * s;
            }
        }
    }
    for k in 0..base.len() {
        base[k] += w[k];
    }
    Ok(EvolutionResult { rho: DensityOperator::new(unvectorize(&base, qss.dim)), in_window, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::Geometry;
    use crate::model::EnsembleSpec;
    use crate::rates::{quasi_steady_states, rates_by_projection, System};

    #[test]
    fn matches_matrix_exponential_for_single_d() {
        let scheme = LevelScheme::d_system(1e-4, 2e-4, 1.0, 0.8);
        let sys =
            System::new(EnsembleSpec::new(scheme.clone(), 1, Geometry::independent()).unwrap(), Default::default())
                .unwrap();
        let split = sys.split();
        let qss = quasi_steady_states(&sys.spec, &split.l0).unwrap();
        let rates = rates_by_projection(&sys).unwrap();
        let dt = 40.0;
        let full = split.full().matrix.to_dense() * C64::new(dt, 0.0);
        let prop = full.exp();
        for i in 0..=1 {
            let exact = &prop * DVector::from_vec(qss.vector(i));
            let approx =
                perturbative_evolution(&scheme, &qss, &split.l0.matrix, &split.l1.matrix, &rates, i, dt).unwrap();
            assert!(approx.in_window);
            let diff = (unvectorize(exact.as_slice(), 3) - &approx.rho.matrix).norm();
            // second order in dt * weak plus the transient e^{-dt/2}
            assert!(diff < 1e-4, "i={i} diff={diff}");
            let first = (unvectorize(exact.as_slice(), 3) - qss.rho(i).matrix).norm();
            assert!(diff < 0.05 * first, "i={i} {diff} vs {first}");
        }
    }

    #[test]
    fn warns_outside_window() {
        let scheme = LevelScheme::d_system(1e-4, 2e-4, 1.0, 0.8);
        let sys =
            System::new(EnsembleSpec::new(scheme.clone(), 1, Geometry::independent()).unwrap(), Default::default())
                .unwrap();
        let split = sys.split();
        let qss = quasi_steady_states(&sys.spec, &split.l0).unwrap();
        let rates = rates_by_projection(&sys).unwrap();
        let r = perturbative_evolution(&scheme, &qss, &split.l0.matrix, &split.l1.matrix, &rates, 1, 1.0).unwrap();
        assert!(!r.in_window);
        assert_eq!(r.warnings.len(), 1);
    }
}
