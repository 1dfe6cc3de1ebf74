use std::collections::{HashSet, VecDeque};

use nalgebra::DVector;

use super::steady::{quasi_steady_states, QuasiSteadyStates};
use super::{RateMatrix, RateMethod, System};
use crate::error::{Error, Result};
use crate::linalg::{zero, SparseMatrix};
use crate::C64;

/// Entries below this fraction of the largest one are treated as zero.
pub(crate) const SUPPORT_TOL: f64 = 1e-14;

pub(crate) fn support(x: &[C64]) -> Vec<usize> {
    let max = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return Vec::new();
    }
    (0..x.len()).filter(|&i| x[i].norm() > SUPPORT_TOL * max).collect()
}

/// Indices reachable from `seeds` along the columns of `op`, not expanding
/// through indices in `stop`. Stop indices that are reached are not returned.
pub(crate) fn reachable(op: &SparseMatrix, seeds: &[usize], stop: &HashSet<usize>) -> Vec<usize> {
    let mut seen: HashSet<usize> = seeds.iter().copied().collect();
    let mut queue: VecDeque<usize> = seeds.iter().copied().collect();
    let mut out = Vec::new();
    while let Some(j) = queue.pop_front() {
        out.push(j);
        for (i, _) in op.column(j) {
            if !stop.contains(&i) && seen.insert(i) {
                queue.push_back(i);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Rates from the projection of the weak generator `L1` onto the quasi-steady
/// states of `L0`. Weak processes that leave the core (e.g. pumping into the
/// short-lived level) are followed through the transient dynamics of `L0`
/// until they land in a core block.
pub fn rates_by_projection(system: &System) -> Result<RateMatrix> {
    let split = system.split();
    let qss = quasi_steady_states(&system.spec, &split.l0)?;
    projection_from(&qss, &split.l0.matrix, &split.l1.matrix)
}

/// Weight of `x` on each core block after the transient part has relaxed.
pub(crate) fn relaxed_weights(qss: &QuasiSteadyStates, l0: &SparseMatrix, x: &[C64]) -> Result<Vec<C64>> {
    let core: HashSet<usize> = qss.blocks.iter().flat_map(|b| b.liouville.iter().copied()).collect();
    let mut total = x.to_vec();
    let seeds: Vec<usize> = support(x).into_iter().filter(|i| !core.contains(i)).collect();
    if !seeds.is_empty() {
        let t = reachable(l0, &seeds, &core);
        let ltt = l0.dense_block(&t, &t);
        let y = DVector::from_iterator(t.len(), t.iter().map(|&i| x[i]));
        let z = ltt.clone().lu().solve(&y).ok_or(Error::NonTransient(t.len()))?;
        let resid = (&ltt * &z - &y).norm();
        if !(resid <= 1e-8 * y.norm().max(f64::MIN_POSITIVE)) {
            return Err(Error::NonTransient(t.len()));
        }
        // flux into the core: L_CT (-z)
        for (col, &j) in t.iter().enumerate() {
            let zj = -z[col];
            for (i, v) in l0.column(j) {
                if core.contains(&i) {
                    total[i] += v * zj;
                }
            }
        }
    }
    Ok((0..qss.blocks.len()).map(|b| qss.weight(b, &total)).collect())
}

pub(crate) fn projection_from(qss: &QuasiSteadyStates, l0: &SparseMatrix, l1: &SparseMatrix) -> Result<RateMatrix> {
    let n = qss.n_atoms;
    let mut m = RateMatrix::zeros(n, RateMethod::Projection);
    for i in 0..=n {
        let x = l1.mul_vec(&qss.vector(i));
        let w = relaxed_weights(qss, l0, &x)?;
        let mut to = vec![zero(); n + 1];
        for (b, wb) in w.iter().enumerate() {
            to[qss.blocks[b].block.intensity] += *wb;
        }
        for (j, v) in to.iter().enumerate() {
            if j != i {
                m.set(i, j, v.re);
            }
        }
        log::debug!("projection: level {i} outflow {:?}", to);
    }
    m.finalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::Geometry;
    use crate::liouville::GeneratorOptions;
    use crate::model::{EnsembleSpec, LevelScheme};

    fn system(scheme: LevelScheme, n: usize, geo: Geometry, opts: GeneratorOptions) -> System {
        System::new(EnsembleSpec::new(scheme, n, geo).unwrap(), opts).unwrap()
    }

    #[test]
    fn single_d_rates() {
        let (a1, a2, om) = (1e-3, 2e-3, 0.8);
        let s = system(LevelScheme::d_system(a1, a2, 1.0, om), 1, Geometry::independent(), Default::default());
        let r = rates_by_projection(&s).unwrap();
        assert!((r.get(0, 1) - a1).abs() < 1e-15);
        let want = a2 * om * om / (1.0 + 2.0 * om * om);
        assert!((r.get(1, 0) - want).abs() < 1e-15, "{} {want}", r.get(1, 0));
    }

    #[test]
    fn single_four_level_rates() {
        let (a1, a2, a4, w, om) = (1e-3, 0.3, 1.0, 2e-3, 0.8);
        let s = system(LevelScheme::four_level(a1, a2, 1.0, a4, om, w), 1, Geometry::independent(), Default::default());
        let r = rates_by_projection(&s).unwrap();
        assert!((r.get(0, 1) - a1).abs() < 1e-15);
        let ground = (1.0 + om * om) / (1.0 + 2.0 * om * om);
        let want = w * a2 / (a2 + a4) * ground;
        assert!((r.get(1, 0) - want).abs() < 1e-14, "{} {want}", r.get(1, 0));
    }

    #[test]
    fn two_atoms_up_rate_counts_dark_atoms() {
        let s = system(
            LevelScheme::four_level(1e-3, 0.3, 1.0, 1.0, 0.6, 2e-3),
            2,
            Geometry::equilateral(0.5),
            GeneratorOptions::strong_only(),
        );
        let r = rates_by_projection(&s).unwrap();
        assert!((r.get(0, 1) - 2e-3).abs() < 1e-14);
        assert!((r.get(1, 2) - 1e-3).abs() < 1e-14);
    }

    #[test]
    fn detailed_rates_are_nonnegative_for_all_scopes() {
        for scope in [GeneratorOptions::default(), GeneratorOptions::strong_only()] {
            let s = system(
                LevelScheme::four_level(1e-3, 0.3, 1.0, 1.0, 0.6, 2e-3)
                    .with_wavelengths(vec![3.574, 1.245, 1.0, 0.923]),
                3,
                Geometry::equilateral(0.3),
                scope,
            );
            let r = rates_by_projection(&s).unwrap();
            for i in 0..3 {
                assert!(r.get(i, i + 1) > 0.0 && r.get(i + 1, i) > 0.0);
            }
        }
    }
}
