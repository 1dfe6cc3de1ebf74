//! Level schemes, multi-atom bases and the partition of the product basis
//! into intensity subspaces.
//!
//! Levels are labelled `1..=d` as in the usual level diagrams: for the
//! D-system `|1>` ground, `|2>` metastable, `|3>` strongly driven excited
//! level; for the four-level atom additionally `|4>`, the upper level reached
//! by incoherent pumping from `|1>`. Product states are ordered
//! lexicographically with atom 0 as the most significant digit.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::coupling::Geometry;
use crate::error::{Error, Result};
use crate::C64;

/// The dark (shelving) level of both schemes.
pub const DARK_LEVEL: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    #[serde(rename = "d-system")]
    DThreeLevel,
    #[serde(rename = "four-level")]
    FourLevel,
}

impl SchemeKind {
    pub fn levels(self) -> usize {
        match self {
            SchemeKind::DThreeLevel => 3,
            SchemeKind::FourLevel => 4,
        }
    }

    /// Radiative transitions as `(j, lower, upper)`; the lowering operator of
    /// transition `j` is `|lower><upper|` with Einstein coefficient `A_j`.
    pub fn transitions(self) -> &'static [Transition] {
        const D: [Transition; 3] = [
            Transition { j: 1, lower: 1, upper: 2 },
            Transition { j: 2, lower: 2, upper: 3 },
            Transition { j: 3, lower: 1, upper: 3 },
        ];
        const FOUR: [Transition; 4] = [
            Transition { j: 1, lower: 1, upper: 2 },
            Transition { j: 2, lower: 2, upper: 4 },
            Transition { j: 3, lower: 1, upper: 3 },
            Transition { j: 4, lower: 1, upper: 4 },
        ];
        match self {
            SchemeKind::DThreeLevel => &D,
            SchemeKind::FourLevel => &FOUR,
        }
    }

    /// Levels counted as "bright" when labelling intensity periods.
    pub fn is_bright(self, level: u8) -> bool {
        match self {
            SchemeKind::DThreeLevel => level == 1 || level == 3,
            SchemeKind::FourLevel => level != DARK_LEVEL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub j: usize,
    pub lower: u8,
    pub upper: u8,
}

/// Physical parameters of one atom. Rates are in units of `A3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    pub kind: SchemeKind,
    /// `einstein[j - 1] = A_j`.
    pub einstein: Vec<f64>,
    pub rabi: f64,
    pub incoherent_w: f64,
    pub detuning: f64,
    /// `wavelengths[j - 1] = lambda_j / lambda_3`.
    pub wavelengths: Vec<f64>,
}

/// Result of checking the strong/weak rate hierarchy. Reported, never enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyReport {
    pub ratio: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

impl LevelScheme {
    pub fn d_system(a1: f64, a2: f64, a3: f64, rabi: f64) -> Self {
        LevelScheme {
            kind: SchemeKind::DThreeLevel,
            einstein: vec![a1, a2, a3],
            rabi,
            incoherent_w: 0.0,
            detuning: 0.0,
            wavelengths: vec![1.0; 3],
        }
    }

    pub fn four_level(a1: f64, a2: f64, a3: f64, a4: f64, rabi: f64, w: f64) -> Self {
        LevelScheme {
            kind: SchemeKind::FourLevel,
            einstein: vec![a1, a2, a3, a4],
            rabi,
            incoherent_w: w,
            detuning: 0.0,
            wavelengths: vec![1.0; 4],
        }
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_wavelengths(mut self, wavelengths: Vec<f64>) -> Self {
        self.wavelengths = wavelengths;
        self
    }

    pub fn a(&self, j: usize) -> f64 {
        self.einstein[j - 1]
    }

    pub fn levels(&self) -> usize {
        self.kind.levels()
    }

    /// Probability that `|4>` decays into the dark level.
    pub fn branching_ratio(&self) -> f64 {
        match self.kind {
            SchemeKind::FourLevel => {
                let (a2, a4) = (self.a(2), self.a(4));
                if a2 + a4 > 0.0 {
                    a2 / (a2 + a4)
                } else {
                    0.0
                }
            }
            SchemeKind::DThreeLevel => 0.0,
        }
    }

    /// Rate scale of the slow, period-changing processes.
    pub fn weak_scale(&self) -> f64 {
        match self.kind {
            SchemeKind::DThreeLevel => self.a(1).max(self.a(2)),
            SchemeKind::FourLevel => self.a(1).max(self.incoherent_w * self.branching_ratio()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.kind.levels();
        if self.einstein.len() != n {
            return Err(Error::Config(format!("expected {n} Einstein coefficients, got {}", self.einstein.len())));
        }
        if self.einstein.iter().any(|&a| !(a >= 0.0)) {
            return Err(Error::Config("Einstein coefficients must be >= 0".into()));
        }
        if !(self.rabi >= 0.0) || !(self.incoherent_w >= 0.0) || !self.detuning.is_finite() {
            return Err(Error::Config("rabi and W must be >= 0, detuning finite".into()));
        }
        if self.kind == SchemeKind::DThreeLevel && self.incoherent_w != 0.0 {
            return Err(Error::Config("incoherent driving only exists for the four-level scheme".into()));
        }
        Ok(())
    }

    /// Compares `min(Omega3, A3)` against the largest weak rate.
    pub fn hierarchy(&self, threshold: f64) -> HierarchyReport {
        let strong = self.rabi.min(self.a(3));
        let weak = self.weak_scale();
        let ratio = if weak > 0.0 { strong / weak } else { f64::INFINITY };
        HierarchyReport { ratio, threshold, satisfied: ratio >= threshold }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub scheme: LevelScheme,
    pub n_atoms: usize,
    pub geometry: Geometry,
}

impl EnsembleSpec {
    pub fn new(scheme: LevelScheme, n_atoms: usize, geometry: Geometry) -> Result<Self> {
        scheme.validate()?;
        if !(1..=3).contains(&n_atoms) {
            return Err(Error::Config(format!("n_atoms must be 1, 2 or 3, got {n_atoms}")));
        }
        geometry.validate(n_atoms)?;
        Ok(EnsembleSpec { scheme, n_atoms, geometry })
    }

    pub fn levels(&self) -> usize {
        self.scheme.levels()
    }

    /// Hilbert-space dimension `d^n`.
    pub fn dim(&self) -> usize {
        self.levels().pow(self.n_atoms as u32)
    }
}

/// Levels (1-based) of the product state with the given index.
pub fn product_levels(index: usize, n_atoms: usize, d: usize) -> Vec<u8> {
    let mut out = vec![0u8; n_atoms];
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = (rest % d) as u8 + 1;
        rest /= d;
    }
    out
}

pub fn product_index(levels: &[u8], d: usize) -> usize {
    levels.iter().fold(0, |acc, &l| acc * d + (l as usize - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dicke2 {
    /// `|11>`
    Ground,
    /// `|ii>`, `i >= 2`
    Excited(u8),
    /// `(|ij> + |ji>)/sqrt2`, `i < j`
    Sym(u8, u8),
    /// `(|ij> - |ji>)/sqrt2`, `i < j`
    Anti(u8, u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    S,
    A,
    B,
    C,
    D,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dicke3 {
    /// `|111>`
    Ground,
    /// `|iii>`, `i >= 2`
    Excited(u8),
    /// Two atoms share level `j`, one is in `i` (`i != j`): families s, b, c.
    Pair(Family, u8, u8),
    /// All three levels distinct, `i < j < k`: families s, a, b, c, d, e.
    Distinct(Family, u8, u8, u8),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    Product(Vec<u8>),
    Dicke2(Dicke2),
    Dicke3(Dicke3),
}

impl std::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fam = |fm: &Family| match fm {
            Family::S => "s",
            Family::A => "a",
            Family::B => "b",
            Family::C => "c",
            Family::D => "d",
            Family::E => "e",
        };
        match self {
            BasisLabel::Product(l) => {
                let s: String = l.iter().map(|x| char::from(b'0' + x)).collect();
                write!(f, "|{s}>")
            }
            BasisLabel::Dicke2(Dicke2::Ground) | BasisLabel::Dicke3(Dicke3::Ground) => write!(f, "g"),
            BasisLabel::Dicke2(Dicke2::Excited(i)) | BasisLabel::Dicke3(Dicke3::Excited(i)) => {
                write!(f, "e{i}")
            }
            BasisLabel::Dicke2(Dicke2::Sym(i, j)) => write!(f, "s{i}{j}"),
            BasisLabel::Dicke2(Dicke2::Anti(i, j)) => write!(f, "a{i}{j}"),
            BasisLabel::Dicke3(Dicke3::Pair(fm, i, j)) => write!(f, "{}{i}{j}{j}", fam(fm)),
            BasisLabel::Dicke3(Dicke3::Distinct(fm, i, j, k)) => write!(f, "{}{i}{j}{k}", fam(fm)),
        }
    }
}

/// A basis vector expanded in the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisState {
    pub label: BasisLabel,
    pub coefficients: Vec<(usize, C64)>,
}

impl BasisState {
    fn new(label: BasisLabel, d: usize, terms: &[(f64, &[u8])]) -> Self {
        let mut coefficients: Vec<(usize, C64)> = Vec::with_capacity(terms.len());
        for &(amp, levels) in terms {
            let idx = product_index(levels, d);
            match coefficients.iter_mut().find(|(i, _)| *i == idx) {
                Some((_, c)) => *c += amp,
                None => coefficients.push((idx, C64::new(amp, 0.0))),
            }
        }
        coefficients.retain(|(_, c)| c.norm() > 0.0);
        BasisState { label, coefficients }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        for &(i, c) in &self.coefficients {
            v[i] += c;
        }
        v
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    /// Level multiset shared by all product components (sorted).
    pub fn multiset(&self, n_atoms: usize, d: usize) -> Vec<u8> {
        let mut l = product_levels(self.coefficients[0].0, n_atoms, d);
        l.sort_unstable();
        l
    }
}

pub fn build_product_basis(spec: &EnsembleSpec) -> Vec<BasisState> {
    let d = spec.levels();
    (0..spec.dim())
        .map(|i| {
            let levels = product_levels(i, spec.n_atoms, d);
            BasisState { label: BasisLabel::Product(levels), coefficients: vec![(i, C64::new(1.0, 0.0))] }
        })
        .collect()
}

/// Dicke-like symmetrized basis for two or three atoms.
pub fn build_symmetrized_basis(spec: &EnsembleSpec) -> Result<Vec<BasisState>> {
    let d = spec.levels();
    match spec.n_atoms {
        2 => Ok(dicke2_basis(d)),
        3 => Ok(dicke3_basis(d)),
        n => Err(Error::Config(format!("symmetrized basis needs 2 or 3 atoms, got {n}"))),
    }
}

fn dicke2_basis(d: usize) -> Vec<BasisState> {
    let h = 1.0 / SQRT_2;
    let mut out = vec![BasisState::new(BasisLabel::Dicke2(Dicke2::Ground), d, &[(1.0, &[1, 1])])];
    for i in 2..=d as u8 {
        out.push(BasisState::new(BasisLabel::Dicke2(Dicke2::Excited(i)), d, &[(1.0, &[i, i])]));
    }
    for i in 1..=d as u8 {
        for j in i + 1..=d as u8 {
            out.push(BasisState::new(BasisLabel::Dicke2(Dicke2::Sym(i, j)), d, &[(h, &[i, j]), (h, &[j, i])]));
            out.push(BasisState::new(BasisLabel::Dicke2(Dicke2::Anti(i, j)), d, &[(h, &[i, j]), (-h, &[j, i])]));
        }
    }
    out
}

fn dicke3_basis(d: usize) -> Vec<BasisState> {
    let dd = d as u8;
    let mut out = vec![BasisState::new(BasisLabel::Dicke3(Dicke3::Ground), d, &[(1.0, &[1, 1, 1])])];
    for i in 2..=dd {
        out.push(BasisState::new(BasisLabel::Dicke3(Dicke3::Excited(i)), d, &[(1.0, &[i, i, i])]));
    }
    let r3 = 1.0 / 3f64.sqrt();
    let r6 = 1.0 / 6f64.sqrt();
    for i in 1..=dd {
        for j in 1..=dd {
            if i == j {
                continue;
            }
            let (ijj, jji, jij): (&[u8], &[u8], &[u8]) = (&[i, j, j], &[j, j, i], &[j, i, j]);
            let lab = |f| BasisLabel::Dicke3(Dicke3::Pair(f, i, j));
            out.push(BasisState::new(lab(Family::S), d, &[(r3, ijj), (r3, jji), (r3, jij)]));
            out.push(BasisState::new(lab(Family::B), d, &[(2.0 * r6, ijj), (-r6, jji), (-r6, jij)]));
            out.push(BasisState::new(lab(Family::C), d, &[(1.0 / SQRT_2, jji), (-1.0 / SQRT_2, jij)]));
        }
    }
    let s6 = 1.0 / 6f64.sqrt();
    let s12 = 1.0 / 12f64.sqrt();
    for i in 1..=dd {
        for j in i + 1..=dd {
            for k in j + 1..=dd {
                let ijk: &[u8] = &[i, j, k];
                let jki: &[u8] = &[j, k, i];
                let kij: &[u8] = &[k, i, j];
                let ikj: &[u8] = &[i, k, j];
                let jik: &[u8] = &[j, i, k];
                let kji: &[u8] = &[k, j, i];
                let lab = |f| BasisLabel::Dicke3(Dicke3::Distinct(f, i, j, k));
                let pattern: [(Family, [f64; 6]); 6] = [
                    (Family::S, [s6, s6, s6, s6, s6, s6]),
                    (Family::A, [s6, s6, s6, -s6, -s6, -s6]),
                    (Family::B, [2.0 * s12, -s12, -s12, 2.0 * s12, -s12, -s12]),
                    (Family::C, [0.0, 0.5, -0.5, 0.0, -0.5, 0.5]),
                    (Family::D, [2.0 * s12, -s12, -s12, -2.0 * s12, s12, s12]),
                    (Family::E, [0.0, 0.5, -0.5, 0.0, 0.5, -0.5]),
                ];
                for (fam, amps) in pattern {
                    let terms: Vec<(f64, &[u8])> =
                        amps.iter().zip([ijk, jki, kij, ikj, jik, kji]).map(|(&a, l)| (a, l)).collect();
                    out.push(BasisState::new(lab(fam), d, &terms));
                }
            }
        }
    }
    out
}

/// Product-basis indices of the states with exactly `level` bright atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntensitySubspace {
    pub level: usize,
    pub indices: Vec<usize>,
}

pub fn intensity_subspaces(spec: &EnsembleSpec) -> Vec<IntensitySubspace> {
    let d = spec.levels();
    let mut out: Vec<IntensitySubspace> =
        (0..=spec.n_atoms).map(|level| IntensitySubspace { level, indices: Vec::new() }).collect();
    for idx in 0..spec.dim() {
        let k = product_levels(idx, spec.n_atoms, d).into_iter().filter(|&l| spec.scheme.kind.is_bright(l)).count();
        out[k].indices.push(idx);
    }
    out
}

/// Support of the quasi-steady states: the given atoms are shelved in the
/// dark level, every other atom is in `{|1>, |3>}`. Invariant under the
/// strong part of the generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreBlock {
    pub intensity: usize,
    pub dark_atoms: Vec<usize>,
    pub states: Vec<usize>,
}

pub fn core_blocks(spec: &EnsembleSpec) -> Vec<CoreBlock> {
    let n = spec.n_atoms;
    let d = spec.levels();
    let mut blocks = Vec::new();
    // Enumerate dark-atom subsets by decreasing number of dark atoms so the
    // blocks come out ordered by intensity.
    let mut masks: Vec<u32> = (0..(1u32 << n)).collect();
    masks.sort_by_key(|m| (std::cmp::Reverse(m.count_ones()), *m));
    for mask in masks {
        let dark: Vec<usize> = (0..n).filter(|a| mask & (1 << a) != 0).collect();
        let states = (0..spec.dim())
            .filter(|&idx| {
                product_levels(idx, n, d).iter().enumerate().all(|(atom, &l)| {
                    if mask & (1 << atom) != 0 {
                        l == DARK_LEVEL
                    } else {
                        l == 1 || l == 3
                    }
                })
            })
            .collect();
        blocks.push(CoreBlock { intensity: n - dark.len(), dark_atoms: dark, states });
    }
    blocks
}
