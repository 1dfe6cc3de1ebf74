//! Bloch-equation generator `L = L0 + L1` as sparse superoperators acting on
//! column-stacked density operators (`vec(rho)[r + c*d] = rho[r, c]`).
//!
//! `L0` holds the fast dynamics: the strong transition (`A3`, `Omega3`,
//! detuning, `C^(3)`) and, for the four-level atom, every decay out of `|4>`
//! (`A2`, `A4` and their collective terms). `L1` holds the slow,
//! period-changing processes: `A1`, `C^(1)`, `W`, and for the D-system also
//! `A2`, `C^(2)`. Units: hbar = 1, rates in units of `A3`.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingSet;
use crate::error::{Error, Result};
use crate::linalg::{c, sandwich_triplets, unvectorize, vectorize, CMatrix, SparseMatrix};
use crate::model::{product_index, product_levels, EnsembleSpec, SchemeKind};
use crate::C64;

/// Which transitions carry dipole-dipole cross terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollectiveScope {
    #[default]
    #[serde(alias = "all")]
    AllTransitions,
    #[serde(alias = "strong")]
    /// Only `C^(3)`; the remaining transitions act as independent atoms.
    StrongTransition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorOptions {
    pub detuning: bool,
    pub scope: CollectiveScope,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        GeneratorOptions { detuning: true, scope: CollectiveScope::AllTransitions }
    }
}

impl GeneratorOptions {
    pub fn strong_only() -> Self {
        GeneratorOptions { detuning: true, scope: CollectiveScope::StrongTransition }
    }

    fn collective(&self, j: usize) -> bool {
        match self.scope {
            CollectiveScope::AllTransitions => true,
            CollectiveScope::StrongTransition => j == 3,
        }
    }
}

/// Whether transition `j` belongs to the fast part `L0`.
pub fn is_fast(kind: SchemeKind, j: usize) -> bool {
    match kind {
        SchemeKind::DThreeLevel => j == 3,
        SchemeKind::FourLevel => j != 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperTag {
    L0,
    L1,
    Full,
    HcondPart,
    ResetPart,
    IncoherentPart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    /// Hilbert-space dimension; the matrix is `dim^2 x dim^2`.
    pub dim: usize,
    pub matrix: SparseMatrix,
    pub tag: SuperTag,
}

impl Superoperator {
    fn from_triplets(dim: usize, t: &[(usize, usize, C64)], tag: SuperTag) -> Self {
        Superoperator { dim, matrix: SparseMatrix::from_triplets(dim * dim, dim * dim, t), tag }
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvectorize(&self.matrix.mul_vec(&vectorize(rho)), self.dim)
    }

    pub fn plus(&self, other: &Superoperator, tag: SuperTag) -> Superoperator {
        Superoperator { dim: self.dim, matrix: self.matrix.add(&other.matrix), tag }
    }

    /// Plain-text sparse triplets, one `row col re im` line per entry.
    pub fn dump_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# {:?} dim={} vec=column-stacked", self.tag, self.dim)?;
        for (i, j, v) in self.matrix.triplets() {
            writeln!(w, "{i} {j} {:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }

    /// Restricts the generator to operators supported on `states x states`.
    /// Fails if any element of the block is mapped outside it.
    pub fn restrict_to_subspace(&self, states: &[usize]) -> Result<BlockGenerator> {
        let d = self.dim;
        let liouville: Vec<usize> =
            states.iter().flat_map(|&col| states.iter().map(move |&row| row + col * d)).collect();
        let inside: std::collections::HashSet<usize> = liouville.iter().copied().collect();
        let mut leak: f64 = 0.0;
        for &j in &liouville {
            for (i, v) in self.matrix.column(j) {
                if !inside.contains(&i) {
                    leak = leak.max(v.norm());
                }
            }
        }
        if leak >= 1e-14 {
            return Err(Error::InvariantViolation { leak });
        }
        let matrix = self.matrix.dense_block(&liouville, &liouville);
        Ok(BlockGenerator { states: states.to_vec(), liouville, matrix })
    }
}

/// Dense generator restricted to an invariant block. Block vectorization is
/// column-stacked over the local state order.
#[derive(Debug, Clone)]
pub struct BlockGenerator {
    pub states: Vec<usize>,
    pub liouville: Vec<usize>,
    pub matrix: CMatrix,
}

/// Embedded single-atom operator `|ket><bra|` acting on `atom`.
pub fn atom_op(spec: &EnsembleSpec, atom: usize, ket: u8, bra: u8) -> CMatrix {
    let d = spec.levels();
    let n = spec.n_atoms;
    let dim = spec.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let mut l = product_levels(idx, n, d);
        if l[atom] == bra {
            l[atom] = ket;
            m[(product_index(&l, d), idx)] = c(1.0);
        }
    }
    m
}

/// Lowering operator `S_{atom,j}^-`.
pub fn lowering(spec: &EnsembleSpec, atom: usize, j: usize) -> CMatrix {
    let t = spec.scheme.kind.transitions()[j - 1];
    atom_op(spec, atom, t.lower, t.upper)
}

fn half_over_i() -> C64 {
    C64::new(0.0, -0.5)
}

/// Conditional Hamiltonian restricted to the transitions selected by `keep`;
/// `drive` adds the Rabi coupling and (if enabled) the detuning term.
fn hcond_terms(
    spec: &EnsembleSpec,
    couplings: &CouplingSet,
    opts: GeneratorOptions,
    keep: &dyn Fn(usize) -> bool,
    drive: bool,
) -> CMatrix {
    let dim = spec.dim();
    let n = spec.n_atoms;
    let scheme = &spec.scheme;
    let mut h = CMatrix::zeros(dim, dim);
    let nt = scheme.kind.transitions().len();
    let lows: Vec<Vec<CMatrix>> = (0..n).map(|i| (1..=nt).map(|j| lowering(spec, i, j)).collect()).collect();
    for j in (1..=nt).filter(|&j| keep(j)) {
        for low in lows.iter().map(|l| &l[j - 1]) {
            h += low.adjoint() * low * (half_over_i() * scheme.a(j));
        }
        if opts.collective(j) {
            for &(k, l) in &couplings.pairs {
                let cc = couplings.get(k, l, j);
                if cc.norm() == 0.0 {
                    continue;
                }
                let (sk, sl) = (&lows[k][j - 1], &lows[l][j - 1]);
                h += (sk.adjoint() * sl + sl.adjoint() * sk) * (half_over_i() * cc);
            }
        }
    }
    if drive {
        for low in lows.iter().map(|l| &l[2]) {
            h += (low + low.adjoint()) * c(scheme.rabi / 2.0);
            if opts.detuning && scheme.detuning != 0.0 {
                h -= low.adjoint() * low * c(scheme.detuning);
            }
        }
    }
    h
}

pub fn build_hcond(spec: &EnsembleSpec, couplings: &CouplingSet, opts: GeneratorOptions) -> CMatrix {
    hcond_terms(spec, couplings, opts, &|_| true, true)
}

fn hcond_super(h: &CMatrix, t: &mut Vec<(usize, usize, C64)>) {
    let id = CMatrix::identity(h.nrows(), h.ncols());
    sandwich_triplets(h, &id, C64::new(0.0, -1.0), t);
    sandwich_triplets(&id, &h.adjoint(), C64::new(0.0, 1.0), t);
}

fn reset_terms(
    spec: &EnsembleSpec,
    couplings: &CouplingSet,
    opts: GeneratorOptions,
    keep: &dyn Fn(usize) -> bool,
    t: &mut Vec<(usize, usize, C64)>,
) {
    let n = spec.n_atoms;
    let nt = spec.scheme.kind.transitions().len();
    for j in (1..=nt).filter(|&j| keep(j)) {
        let lows: Vec<CMatrix> = (0..n).map(|i| lowering(spec, i, j)).collect();
        let aj = spec.scheme.a(j);
        if aj != 0.0 {
            for s in &lows {
                sandwich_triplets(s, &s.adjoint(), c(aj), t);
            }
        }
        if opts.collective(j) {
            for &(k, l) in &couplings.pairs {
                let re = couplings.get(k, l, j).re;
                if re == 0.0 {
                    continue;
                }
                sandwich_triplets(&lows[k], &lows[l].adjoint(), c(re), t);
                sandwich_triplets(&lows[l], &lows[k].adjoint(), c(re), t);
            }
        }
    }
}

pub fn build_reset(spec: &EnsembleSpec, couplings: &CouplingSet, opts: GeneratorOptions) -> Superoperator {
    let mut t = Vec::new();
    reset_terms(spec, couplings, opts, &|_| true, &mut t);
    Superoperator::from_triplets(spec.dim(), &t, SuperTag::ResetPart)
}

fn incoherent_terms(spec: &EnsembleSpec, t: &mut Vec<(usize, usize, C64)>) {
    let w = spec.scheme.incoherent_w;
    if w == 0.0 {
        return;
    }
    let dim = spec.dim();
    let id = CMatrix::identity(dim, dim);
    for i in 0..spec.n_atoms {
        let down = lowering(spec, i, 4);
        let up = down.adjoint();
        sandwich_triplets(&up, &down, c(w), t);
        sandwich_triplets(&down, &up, c(w), t);
        let number = &down * &up + &up * &down;
        sandwich_triplets(&number, &id, c(-w / 2.0), t);
        sandwich_triplets(&id, &number, c(-w / 2.0), t);
    }
}

/// Incoherent pumping of the `|1> <-> |4>` transition, including the
/// anticommutator terms that keep the generator trace preserving.
pub fn build_incoherent(spec: &EnsembleSpec) -> Result<Superoperator> {
    if spec.scheme.kind != SchemeKind::FourLevel {
        return Err(Error::Config("incoherent driving needs the four-level scheme".into()));
    }
    let mut t = Vec::new();
    incoherent_terms(spec, &mut t);
    Ok(Superoperator::from_triplets(spec.dim(), &t, SuperTag::IncoherentPart))
}

/// The Hamiltonian part `rho -> -i (H rho - rho H^dagger)`.
pub fn build_hcond_part(spec: &EnsembleSpec, couplings: &CouplingSet, opts: GeneratorOptions) -> Superoperator {
    let mut t = Vec::new();
    hcond_super(&build_hcond(spec, couplings, opts), &mut t);
    Superoperator::from_triplets(spec.dim(), &t, SuperTag::HcondPart)
}

/// Full generator assembled from its physical parts.
pub fn build_full(spec: &EnsembleSpec, couplings: &CouplingSet, opts: GeneratorOptions) -> Superoperator {
    let mut full = build_hcond_part(spec, couplings, opts).plus(&build_reset(spec, couplings, opts), SuperTag::Full);
    if spec.scheme.kind == SchemeKind::FourLevel {
        full = full.plus(&build_incoherent(spec).unwrap(), SuperTag::Full);
    }
    full
}

#[derive(Debug, Clone)]
pub struct SplitGenerator {
    pub l0: Superoperator,
    pub l1: Superoperator,
}

impl SplitGenerator {
    pub fn full(&self) -> Superoperator {
        self.l0.plus(&self.l1, SuperTag::Full)
    }

    pub fn dim(&self) -> usize {
        self.l0.dim
    }
}

pub fn split_generator(spec: &EnsembleSpec, couplings: &CouplingSet, opts: GeneratorOptions) -> SplitGenerator {
    let kind = spec.scheme.kind;
    let fast = move |j: usize| is_fast(kind, j);
    let slow = move |j: usize| !is_fast(kind, j);

    let mut t0 = Vec::new();
    hcond_super(&hcond_terms(spec, couplings, opts, &fast, true), &mut t0);
    reset_terms(spec, couplings, opts, &fast, &mut t0);

    let mut t1 = Vec::new();
    hcond_super(&hcond_terms(spec, couplings, opts, &slow, false), &mut t1);
    reset_terms(spec, couplings, opts, &slow, &mut t1);
    if kind == SchemeKind::FourLevel {
        incoherent_terms(spec, &mut t1);
    }
    SplitGenerator {
        l0: Superoperator::from_triplets(spec.dim(), &t0, SuperTag::L0),
        l1: Superoperator::from_triplets(spec.dim(), &t1, SuperTag::L1),
    }
}

/// Density operator in the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    pub matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Self {
        DensityOperator { matrix }
    }

    pub fn pure(state: &[C64]) -> Self {
        let v = nalgebra::DVector::from_column_slice(state);
        DensityOperator { matrix: &v * v.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * c(0.5);
        herm.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Hermitian within `tol`, unit trace within `tol`, no eigenvalue below `-tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.hermiticity_error() < tol && (self.trace() - c(1.0)).norm() < tol && self.min_eigenvalue() >= -tol
    }

    /// `<v| rho |v>` for a state vector `v`.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(v);
        (v.adjoint() * &self.matrix * v)[(0, 0)].re
    }
}

/// Random Hermitian operator with entries in `[-1, 1]`.
pub fn random_hermitian<R: rand::Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let m = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&m + m.adjoint()) * c(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{build_coupling_set, Geometry};
    use crate::model::LevelScheme;
    use rand::SeedableRng;

    fn d1(a1: f64, a2: f64, rabi: f64) -> (EnsembleSpec, CouplingSet) {
        let s = EnsembleSpec::new(LevelScheme::d_system(a1, a2, 1.0, rabi), 1, Geometry::independent()).unwrap();
        let cs = build_coupling_set(&s.geometry, &s.scheme, 1).unwrap();
        (s, cs)
    }

    fn basis_op(dim: usize, r: usize, col: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        m[(r, col)] = c(1.0);
        m
    }

    #[test]
    fn single_d_hcond() {
        let (s, cs) = d1(0.0, 0.0, 1.0);
        let h = build_hcond(&s, &cs, GeneratorOptions::default());
        let mut want = basis_op(3, 2, 2) * C64::new(0.0, -0.5);
        want += (basis_op(3, 0, 2) + basis_op(3, 2, 0)) * c(0.5);
        assert!((h - want).norm() < 1e-15);
    }

    #[test]
    fn single_d_reset_of_excited_state() {
        let (s, cs) = d1(0.02, 0.03, 1.0);
        let r = build_reset(&s, &cs, GeneratorOptions::default());
        let out = r.apply(&basis_op(3, 2, 2));
        let want = basis_op(3, 1, 1) * c(0.03) + basis_op(3, 0, 0) * c(1.0);
        assert!((out - want).norm() < 1e-15);
    }

    #[test]
    fn reset_of_ground_state_vanishes() {
        let s = EnsembleSpec::new(LevelScheme::four_level(0.1, 0.3, 1.0, 1.0, 1.0, 0.1), 2, Geometry::equilateral(0.4))
            .unwrap();
        let cs = build_coupling_set(&s.geometry, &s.scheme, 2).unwrap();
        let r = build_reset(&s, &cs, GeneratorOptions::default());
        assert!(r.apply(&basis_op(16, 0, 0)).norm() == 0.0);
    }

    #[test]
    fn two_d_reset_of_doubly_excited_state() {
        // |33> decays on transition 2 into the s23/a23 manifold with weights
        // A2 + Re C2 and A2 - Re C2, and on transition 3 into s13/a13.
        let scheme = LevelScheme::d_system(0.01, 0.02, 1.0, 1.0).with_wavelengths(vec![2.0, 1.3, 1.0]);
        let s = EnsembleSpec::new(scheme, 2, Geometry::equilateral(0.3)).unwrap();
        let cs = build_coupling_set(&s.geometry, &s.scheme, 2).unwrap();
        let r = build_reset(&s, &cs, GeneratorOptions::default());
        let e3 = product_index(&[3, 3], 3);
        let out = DensityOperator::new(r.apply(&basis_op(9, e3, e3)));
        let h = 1.0 / 2f64.sqrt();
        let state = |a: [u8; 2], b: [u8; 2], sign: f64| {
            let mut v = vec![c(0.0); 9];
            v[product_index(&a, 3)] += c(h);
            v[product_index(&b, 3)] += c(sign * h);
            v
        };
        for (j, lo) in [(2usize, 2u8), (3, 1)] {
            let re = cs.get(0, 1, j).re;
            let a = s.scheme.a(j);
            let sym = out.expectation(&state([lo, 3], [3, lo], 1.0));
            let anti = out.expectation(&state([lo, 3], [3, lo], -1.0));
            assert!((sym - (a + re)).abs() < 1e-14, "j={j}");
            assert!((anti - (a - re)).abs() < 1e-14, "j={j}");
        }
    }

    #[test]
    fn incoherent_pumping() {
        let s = EnsembleSpec::new(LevelScheme::four_level(0.0, 0.3, 1.0, 1.0, 1.0, 0.0), 1, Geometry::independent())
            .unwrap();
        assert_eq!(build_incoherent(&s).unwrap().matrix.nnz(), 0);
        let s = EnsembleSpec::new(LevelScheme::four_level(0.0, 0.3, 1.0, 1.0, 1.0, 0.25), 1, Geometry::independent())
            .unwrap();
        let out = build_incoherent(&s).unwrap().apply(&basis_op(4, 0, 0));
        assert!((out[(3, 3)] - c(0.25)).norm() < 1e-15);
        assert!((out[(0, 0)] - c(-0.25)).norm() < 1e-15);
        let d = EnsembleSpec::new(LevelScheme::d_system(0.1, 0.1, 1.0, 1.0), 1, Geometry::independent()).unwrap();
        assert!(matches!(build_incoherent(&d), Err(Error::Config(_))));
    }

    #[test]
    fn split_sums_to_full() {
        for (kind, n) in [(SchemeKind::DThreeLevel, 2), (SchemeKind::FourLevel, 2), (SchemeKind::DThreeLevel, 3)] {
            let scheme = match kind {
                SchemeKind::DThreeLevel => LevelScheme::d_system(0.01, 0.02, 1.0, 0.7).with_detuning(0.3),
                SchemeKind::FourLevel => LevelScheme::four_level(0.01, 0.3, 1.0, 1.0, 0.7, 0.02).with_detuning(-0.2),
            };
            let s = EnsembleSpec::new(scheme, n, Geometry::equilateral(0.6)).unwrap();
            let cs = build_coupling_set(&s.geometry, &s.scheme, n).unwrap();
            let opts = GeneratorOptions::default();
            let split = split_generator(&s, &cs, opts);
            let full = build_full(&s, &cs, opts);
            assert!(split.full().matrix.max_abs_diff(&full.matrix) < 1e-12);
        }
    }

    #[test]
    fn l1_vanishes_without_weak_processes() {
        let s = EnsembleSpec::new(LevelScheme::four_level(0.0, 0.3, 1.0, 1.0, 0.7, 0.0), 2, Geometry::equilateral(0.6))
            .unwrap();
        let cs = build_coupling_set(&s.geometry, &s.scheme, 2).unwrap();
        let split = split_generator(&s, &cs, GeneratorOptions::default());
        assert_eq!(split.l1.matrix.nnz(), 0);
    }

    #[test]
    fn single_d_l1_on_quasi_steady_state() {
        let (a2, a3, om) = (0.013, 1.0, 0.8);
        let (s, cs) = d1(0.0, a2, om);
        let split = split_generator(&s, &cs, GeneratorOptions::default());
        let den = a3 * a3 + 2.0 * om * om;
        let mut rho = CMatrix::zeros(3, 3);
        rho[(0, 0)] = c((a3 * a3 + om * om) / den);
        rho[(2, 2)] = c(om * om / den);
        rho[(0, 2)] = C64::new(0.0, a3 * om / den);
        rho[(2, 0)] = C64::new(0.0, -a3 * om / den);
        assert!(split.l0.apply(&rho).norm() < 1e-14);
        let out = split.l1.apply(&rho);
        let p = a2 * om * om / den;
        let mut want = CMatrix::zeros(3, 3);
        want[(2, 2)] = c(-p);
        want[(1, 1)] = c(p);
        let coh = C64::new(0.0, -a2 / 2.0 * a3 * om / den);
        want[(0, 2)] = coh;
        want[(2, 0)] = -coh;
        assert!((out - want).norm() < 1e-15);
    }

    #[test]
    fn hcond_decouples_into_single_atom_terms() {
        let scheme = LevelScheme::d_system(0.01, 0.02, 1.0, 0.7);
        let s2 = EnsembleSpec::new(scheme.clone(), 2, Geometry::independent()).unwrap();
        let cs2 = build_coupling_set(&s2.geometry, &scheme, 2).unwrap();
        let s1 = EnsembleSpec::new(scheme.clone(), 1, Geometry::independent()).unwrap();
        let cs1 = build_coupling_set(&s1.geometry, &scheme, 1).unwrap();
        let h1 = build_hcond(&s1, &cs1, GeneratorOptions::default());
        let id = CMatrix::identity(3, 3);
        let want = h1.kronecker(&id) + id.kronecker(&h1);
        assert!((build_hcond(&s2, &cs2, GeneratorOptions::default()) - want).norm() < 1e-15);
    }

    #[test]
    fn damping_part_is_dissipative() {
        let s = EnsembleSpec::new(
            LevelScheme::four_level(0.01, 0.3, 1.0, 1.0, 0.7, 0.02).with_wavelengths(vec![3.5, 1.2, 1.0, 0.9]),
            3,
            Geometry::equilateral(0.3),
        )
        .unwrap();
        let cs = build_coupling_set(&s.geometry, &s.scheme, 3).unwrap();
        let h = build_hcond(&s, &cs, GeneratorOptions::default());
        let anti = (&h - h.adjoint()) * C64::new(0.0, -0.5);
        let max = anti.symmetric_eigen().eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(max <= 1e-12, "{max}");
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let s = EnsembleSpec::new(
            LevelScheme::four_level(0.01, 0.3, 1.0, 1.0, 0.7, 0.02).with_detuning(0.4),
            2,
            Geometry::equilateral(0.2),
        )
        .unwrap();
        let cs = build_coupling_set(&s.geometry, &s.scheme, 2).unwrap();
        let full = build_full(&s, &cs, GeneratorOptions::default());
        for _ in 0..20 {
            let rho = random_hermitian(16, &mut rng);
            let out = full.apply(&rho);
            assert!(out.trace().norm() < 1e-12);
            assert!((&out - out.adjoint()).norm() < 1e-12);
        }
    }

    #[test]
    fn restriction() {
        let (s, cs) = d1(0.01, 0.02, 1.0);
        let split = split_generator(&s, &cs, GeneratorOptions::default());
        let block = split.l0.restrict_to_subspace(&[0, 2]).unwrap();
        assert_eq!(block.matrix.shape(), (4, 4));
        let full = split.full();
        assert!(matches!(full.restrict_to_subspace(&[0, 2]), Err(Error::InvariantViolation { .. })));
    }

    #[test]
    fn dump_format() {
        let (s, cs) = d1(0.01, 0.02, 1.0);
        let split = split_generator(&s, &cs, GeneratorOptions::default());
        let mut buf = Vec::new();
        split.l1.dump_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# L1"));
        assert_eq!(lines.len() - 1, split.l1.matrix.nnz());
        assert_eq!(lines[1].split_whitespace().count(), 4);
    }
}
