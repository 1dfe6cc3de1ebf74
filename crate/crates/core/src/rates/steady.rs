use crate::error::{Error, Result};
use crate::linalg::{dot_conj, null_space, zero, CMatrix};
use crate::liouville::{DensityOperator, Superoperator};
use crate::model::{core_blocks, CoreBlock, EnsembleSpec};
use crate::C64;

/// Singular values below this fraction of the largest count as zero.
const NULL_TOL: f64 = 1e-10;

/// Unique stationary state of `L0` on one core block, with its dual
/// (left null vector normalised so that `dual^dagger state = 1`).
#[derive(Debug, Clone)]
pub struct BlockSteadyState {
    pub block: CoreBlock,
    /// Liouville indices of the block, column stacked over `block.states`.
    pub liouville: Vec<usize>,
    pub state: Vec<C64>,
    pub dual: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct QuasiSteadyStates {
    pub dim: usize,
    pub n_atoms: usize,
    pub blocks: Vec<BlockSteadyState>,
}

impl QuasiSteadyStates {
    pub fn blocks_of(&self, intensity: usize) -> impl Iterator<Item = &BlockSteadyState> {
        self.blocks.iter().filter(move |b| b.block.intensity == intensity)
    }

    /// `vec(rho_ss,k)`: uniform mixture over the blocks with `k` bright atoms.
    pub fn vector(&self, intensity: usize) -> Vec<C64> {
        let mut v = vec![zero(); self.dim * self.dim];
        let blocks: Vec<_> = self.blocks_of(intensity).collect();
        let w = 1.0 / blocks.len() as f64;
        for b in blocks {
            for (&idx, &x) in b.liouville.iter().zip(&b.state) {
                v[idx] += x * w;
            }
        }
        v
    }

    /// Dual functional of intensity `k`: the sum of its block duals.
    pub fn dual(&self, intensity: usize) -> Vec<C64> {
        let mut v = vec![zero(); self.dim * self.dim];
        for b in self.blocks_of(intensity) {
            for (&idx, &x) in b.liouville.iter().zip(&b.dual) {
                v[idx] += x;
            }
        }
        v
    }

    pub fn rho(&self, intensity: usize) -> DensityOperator {
        DensityOperator::new(CMatrix::from_column_slice(self.dim, self.dim, &self.vector(intensity)))
    }

    /// Component of `x` along block `b`'s stationary state.
    pub fn weight(&self, b: usize, x: &[C64]) -> C64 {
        let blk = &self.blocks[b];
        blk.liouville.iter().zip(&blk.dual).map(|(&i, d)| d.conj() * x[i]).sum()
    }
}

pub fn quasi_steady_states(spec: &EnsembleSpec, l0: &Superoperator) -> Result<QuasiSteadyStates> {
    let dim = spec.dim();
    let mut out = Vec::new();
    for block in core_blocks(spec) {
        let restricted = l0.restrict_to_subspace(&block.states)?;
        let ns = null_space(&restricted.matrix, NULL_TOL);
        let label = || format!("intensity {} dark {:?}", block.intensity, block.dark_atoms);
        if ns.right.len() != 1 {
            return Err(Error::AmbiguousNullSpace { block: label(), multiplicity: ns.right.len() });
        }
        let m = block.states.len();
        let mut state = ns.right[0].clone();
        let trace: C64 = (0..m).map(|k| state[k + k * m]).sum();
        if trace.norm() < 1e-12 {
            return Err(Error::AmbiguousNullSpace { block: label(), multiplicity: 0 });
        }
        state.iter_mut().for_each(|x| *x /= trace);
        let mut dual = ns.left[0].clone();
        let s = dot_conj(&dual, &state).conj();
        dual.iter_mut().for_each(|x| *x /= s);
        out.push(BlockSteadyState { block, liouville: restricted.liouville, state, dual });
    }
    Ok(QuasiSteadyStates { dim, n_atoms: spec.n_atoms, blocks: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::Geometry;
    use crate::linalg::c;
    use crate::liouville::GeneratorOptions;
    use crate::model::LevelScheme;
    use crate::rates::System;

    #[test]
    fn single_d_quasi_steady_states() {
        let (a3, om) = (1.0, 0.8);
        let spec = EnsembleSpec::new(LevelScheme::d_system(1e-3, 2e-3, a3, om), 1, Geometry::independent()).unwrap();
        let sys = System::new(spec, GeneratorOptions::default()).unwrap();
        let q = quasi_steady_states(&sys.spec, &sys.split().l0).unwrap();
        let r0 = q.rho(0).matrix;
        assert!((r0[(1, 1)] - c(1.0)).norm() < 1e-12);
        let r1 = q.rho(1);
        let den = a3 * a3 + 2.0 * om * om;
        assert!((r1.matrix[(0, 0)].re - (a3 * a3 + om * om) / den).abs() < 1e-12);
        assert!((r1.matrix[(2, 2)].re - om * om / den).abs() < 1e-12);
        assert!((r1.matrix[(0, 2)] - C64::new(0.0, a3 * om / den)).norm() < 1e-12);
        assert!(r1.is_physical(1e-12));
    }

    #[test]
    fn duals_are_biorthogonal_traces() {
        let spec = EnsembleSpec::new(
            LevelScheme::four_level(1e-3, 0.3, 1.0, 1.0, 0.6, 2e-3).with_detuning(0.2),
            3,
            Geometry::equilateral(0.4),
        )
        .unwrap();
        let sys = System::new(spec, GeneratorOptions::default()).unwrap();
        let q = quasi_steady_states(&sys.spec, &sys.split().l0).unwrap();
        for k in 0..=3 {
            for l in 0..=3 {
                let v = dot_conj(&q.dual(k), &q.vector(l));
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((v - c(want)).norm() < 1e-10, "{k} {l} {v}");
            }
            assert!(q.rho(k).is_physical(1e-10));
        }
        for b in &q.blocks {
            let m = b.block.states.len();
            for r in 0..m {
                for col in 0..m {
                    let want = if r == col { 1.0 } else { 0.0 };
                    assert!((b.dual[r + col * m] - c(want)).norm() < 1e-9);
                }
            }
        }
    }
}
