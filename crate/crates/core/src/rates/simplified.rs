use nalgebra::{DMatrix, DVector};

use super::steady::quasi_steady_states;
use super::{RateMatrix, RateMethod, System};
use crate::error::Result;
use crate::linalg::CMatrix;
use crate::liouville::{atom_op, lowering, CollectiveScope};
use crate::model::{build_product_basis, build_symmetrized_basis, BasisState, SchemeKind};
use crate::C64;

/// Rates below this value are dropped.
const RATE_FLOOR: f64 = 1e-14;

/// A period-changing decay process: per-atom jump operators with a damping
/// matrix (diagonal: individual rates, off-diagonal: collective `Re C`).
#[derive(Debug, Clone)]
pub struct DecayChannel {
    pub name: &'static str,
    pub jump: Vec<CMatrix>,
    pub gamma: DMatrix<f64>,
}

impl DecayChannel {
    /// `sum_kl Gamma_kl <v|S_k|u> conj(<v|S_l|u>)`.
    pub fn weight(&self, u: &DVector<C64>, v: &DVector<C64>) -> f64 {
        let amp: Vec<C64> = self.jump.iter().map(|s| v.dotc(&(s * u))).collect();
        let mut w = 0.0;
        for k in 0..amp.len() {
            for l in 0..amp.len() {
                w += self.gamma[(k, l)] * (amp[k] * amp[l].conj()).re;
            }
        }
        w
    }
}

/// Processes that move the system between intensity periods.
pub fn channels_for(system: &System) -> Vec<DecayChannel> {
    let spec = &system.spec;
    let n = spec.n_atoms;
    let collective = |j: usize| match system.opts.scope {
        CollectiveScope::AllTransitions => true,
        CollectiveScope::StrongTransition => j == 3,
    };
    let radiative = |name, j: usize| {
        let mut gamma = system.couplings.damping_matrix(&spec.scheme, j);
        if !collective(j) {
            gamma = DMatrix::from_diagonal(&gamma.diagonal());
        }
        DecayChannel { name, jump: (0..n).map(|i| lowering(spec, i, j)).collect(), gamma }
    };
    match spec.scheme.kind {
        SchemeKind::DThreeLevel => vec![radiative("A1", 1), radiative("A2", 2)],
        SchemeKind::FourLevel => {
            let rate = spec.scheme.incoherent_w * spec.scheme.branching_ratio();
            vec![
                radiative("A1", 1),
                DecayChannel {
                    name: "pump",
                    jump: (0..n).map(|i| atom_op(spec, i, 2, 1)).collect(),
                    gamma: DMatrix::from_diagonal_element(n, n, rate),
                },
            ]
        }
    }
}

/// Population-times-decay-rate bookkeeping: the quasi-steady populations of
/// the symmetrized basis states are weighted with the decay rates of the
/// channels that change the number of bright atoms by one.
pub fn rates_by_simplified_scheme(system: &System) -> Result<RateMatrix> {
    let spec = &system.spec;
    let n = spec.n_atoms;
    let d = spec.levels();
    let dim = spec.dim();
    let qss = quasi_steady_states(spec, &system.split().l0)?;
    let basis: Vec<BasisState> = if n == 1 { build_product_basis(spec) } else { build_symmetrized_basis(spec)? };
    let bright = |b: &BasisState| b.multiset(n, d).iter().filter(|&&l| spec.scheme.kind.is_bright(l)).count();
    let in_core = |b: &BasisState| !b.multiset(n, d).contains(&4);
    let vecs: Vec<DVector<C64>> = basis.iter().map(|b| DVector::from_vec(b.to_dense(dim))).collect();
    let levels: Vec<usize> = basis.iter().map(bright).collect();
    let channels = channels_for(system);

    let mut m = RateMatrix::zeros(n, RateMethod::Simplified);
    for i in 0..=n {
        let rho = qss.rho(i);
        let mut out = vec![0.0; n + 1];
        for (u, uvec) in vecs.iter().enumerate() {
            if levels[u] != i || !in_core(&basis[u]) {
                continue;
            }
            let pop = rho.expectation(uvec.as_slice());
            if pop.abs() < 1e-300 {
                continue;
            }
            for ch in &channels {
                for (v, vvec) in vecs.iter().enumerate() {
                    if levels[v].abs_diff(i) != 1 {
                        continue;
                    }
                    let w = ch.weight(uvec, vvec);
                    if w > RATE_FLOOR {
                        out[levels[v]] += pop * w;
                    }
                }
            }
        }
        for (j, v) in out.into_iter().enumerate() {
            m.set(i, j, v);
        }
    }
    m.finalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::Geometry;
    use crate::liouville::GeneratorOptions;
    use crate::model::{EnsembleSpec, LevelScheme};
    use crate::rates::rates_by_projection;

    #[test]
    fn single_atom_matches_projection() {
        for scheme in [
            LevelScheme::d_system(1e-3, 2e-3, 1.0, 0.7),
            LevelScheme::four_level(1e-3, 0.3, 1.0, 1.0, 0.7, 2e-3).with_detuning(0.3),
        ] {
            let s = System::new(EnsembleSpec::new(scheme, 1, Geometry::independent()).unwrap(), Default::default())
                .unwrap();
            let a = rates_by_simplified_scheme(&s).unwrap();
            let b = rates_by_projection(&s).unwrap();
            for (i, j) in [(0, 1), (1, 0)] {
                assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-14 * b.get(i, j).max(1e-3));
            }
        }
    }

    #[test]
    fn three_atoms_match_projection_for_strong_scope() {
        let scheme = LevelScheme::four_level(1e-3, 0.3, 1.0, 1.0, 0.6, 2e-3);
        let s = System::new(
            EnsembleSpec::new(scheme, 3, Geometry::equilateral(0.35)).unwrap(),
            GeneratorOptions::strong_only(),
        )
        .unwrap();
        let a = rates_by_simplified_scheme(&s).unwrap();
        let b = rates_by_projection(&s).unwrap();
        for i in 0..3 {
            for (x, y) in [(i, i + 1), (i + 1, i)] {
                assert!((a.get(x, y) - b.get(x, y)).abs() < 1e-9 * b.get(x, y), "{x}{y}");
            }
        }
    }
}
