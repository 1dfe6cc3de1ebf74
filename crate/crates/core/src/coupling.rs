//! Complex dipole-dipole coupling parameters `C_kl^(j)` from geometry.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LevelScheme;
use crate::C64;

/// Atom positions in units of the strong-transition wavelength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layout {
    /// Atoms at the corners of an equilateral triangle (or the two ends of
    /// one side for two atoms) with side `r`.
    Equilateral {
        r: f64,
    },
    Positions(Vec<[f64; 3]>),
    /// Infinitely separated atoms: every coupling vanishes.
    Independent,
}

/// How the angle between the dipole moments and the inter-atomic axis is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DipolePolicy {
    Perpendicular,
    /// One angle per pair, pairs ordered (0,1), (0,2), (1,2).
    Explicit(Vec<f64>),
    /// Common dipole direction; angles follow from the positions.
    Axis([f64; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub layout: Layout,
    pub dipoles: DipolePolicy,
}

/// Atom pairs `k < l` in canonical order.
pub fn pairs(n_atoms: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 0..n_atoms {
        for l in k + 1..n_atoms {
            out.push((k, l));
        }
    }
    out
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Geometry {
    pub fn equilateral(r: f64) -> Self {
        Geometry { layout: Layout::Equilateral { r }, dipoles: DipolePolicy::Perpendicular }
    }

    pub fn independent() -> Self {
        Geometry { layout: Layout::Independent, dipoles: DipolePolicy::Perpendicular }
    }

    pub fn positions(positions: Vec<[f64; 3]>, dipoles: DipolePolicy) -> Self {
        Geometry { layout: Layout::Positions(positions), dipoles }
    }

    /// Explicit coordinates; the equilateral preset lies in the xy-plane.
    pub fn coordinates(&self, n_atoms: usize) -> Option<Vec<[f64; 3]>> {
        match &self.layout {
            Layout::Equilateral { r } => {
                let all = [[0.0, 0.0, 0.0], [*r, 0.0, 0.0], [r / 2.0, r * 3f64.sqrt() / 2.0, 0.0]];
                Some(all[..n_atoms].to_vec())
            }
            Layout::Positions(p) => Some(p.clone()),
            Layout::Independent => None,
        }
    }

    pub fn validate(&self, n_atoms: usize) -> Result<()> {
        if let Layout::Positions(p) = &self.layout {
            if p.len() != n_atoms {
                return Err(Error::Config(format!("{} positions for {n_atoms} atoms", p.len())));
            }
        }
        if let Layout::Equilateral { r } = self.layout {
            if !(r > 0.0) {
                return Err(Error::Config(format!("distance must be > 0, got {r}")));
            }
        }
        if let DipolePolicy::Explicit(t) = &self.dipoles {
            if t.len() != pairs(n_atoms).len() {
                return Err(Error::Config("one dipole angle per atom pair required".into()));
            }
        }
        for (k, l) in pairs(n_atoms) {
            let r = self.distance(k, l, n_atoms);
            if !(r > 0.0) {
                return Err(Error::Config(format!("atoms {k} and {l} coincide")));
            }
        }
        Ok(())
    }

    pub fn distance(&self, k: usize, l: usize, n_atoms: usize) -> f64 {
        match &self.layout {
            Layout::Equilateral { r } => *r,
            Layout::Independent => f64::INFINITY,
            Layout::Positions(_) => {
                let p = self.coordinates(n_atoms).unwrap();
                let d = sub(p[l], p[k]);
                dot(d, d).sqrt()
            }
        }
    }

    pub fn angle(&self, k: usize, l: usize, n_atoms: usize) -> f64 {
        match &self.dipoles {
            DipolePolicy::Perpendicular => FRAC_PI_2,
            DipolePolicy::Explicit(t) => {
                let idx = pairs(n_atoms).iter().position(|&p| p == (k.min(l), k.max(l))).unwrap();
                t[idx]
            }
            DipolePolicy::Axis(u) => match self.coordinates(n_atoms) {
                Some(p) => {
                    let d = sub(p[l], p[k]);
                    let c = dot(d, *u) / (dot(d, d).sqrt() * dot(*u, *u).sqrt());
                    c.clamp(-1.0, 1.0).acos()
                }
                None => FRAC_PI_2,
            },
        }
    }

    pub fn is_symmetric_preset(&self) -> bool {
        matches!(
            (&self.layout, &self.dipoles),
            (Layout::Equilateral { .. }, DipolePolicy::Perpendicular) | (Layout::Independent, _)
        )
    }
}

/// `C = (3A/2) e^{ia} [ (1/(ia)) sin^2(theta) + (1/a^2 - 1/(ia^3)) (1 - 3cos^2(theta)) ]`
/// with `a = 2 pi r / lambda`.
pub fn coupling_parameter(einstein: f64, a: f64, theta: f64) -> Result<C64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("coupling needs a > 0, got {a}")));
    }
    if a.is_infinite() {
        return Ok(C64::new(0.0, 0.0));
    }
    let cos2 = theta.cos().powi(2);
    let (s, co) = a.sin_cos();
    let radial = 1.0 - 3.0 * cos2;
    let re = (1.0 - cos2) * s / a + radial * cos_minus_sinc(a);
    let im = -(1.0 - cos2) * co / a + radial * (s / (a * a) + co / a.powi(3));
    Ok(C64::new(1.5 * einstein * re, 1.5 * einstein * im))
}

/// `(a cos a - sin a) / a^3`, evaluated by its series near the origin.
fn cos_minus_sinc(a: f64) -> f64 {
    if a > 0.5 {
        return (a * a.cos() - a.sin()) / a.powi(3);
    }
    let a2 = a * a;
    // sum_{k>=1} (-1)^k 2k a^(2k-2) / (2k+1)!
    let mut term = -1.0 / 3.0;
    let mut sum = 0.0;
    for k in 1..12 {
        sum += term;
        let k = k as f64;
        term *= -a2 * (k + 1.0) / (k * (2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    sum
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSet {
    pub n_atoms: usize,
    pub pairs: Vec<(usize, usize)>,
    /// `c[pair][j - 1]`
    pub c: Vec<Vec<C64>>,
    /// `a[pair][j - 1] = 2 pi r_kl / lambda_j`
    pub a: Vec<Vec<f64>>,
}

impl CouplingSet {
    pub fn get(&self, k: usize, l: usize, j: usize) -> C64 {
        let key = (k.min(l), k.max(l));
        match self.pairs.iter().position(|&p| p == key) {
            Some(idx) => self.c[idx][j - 1],
            None => C64::new(0.0, 0.0),
        }
    }

    /// Common pair coupling on transition `j`, if every pair carries the same
    /// value (relative tolerance 1e-12). `Some(0)` for a single atom.
    pub fn uniform(&self, j: usize) -> Option<C64> {
        let vals: Vec<C64> = self.c.iter().map(|row| row[j - 1]).collect();
        let Some(first) = vals.first().copied() else {
            return Some(C64::new(0.0, 0.0));
        };
        let scale = first.norm().max(1e-300);
        vals.iter().all(|v| (v - first).norm() <= 1e-12 * scale).then_some(first)
    }

    /// Collective damping matrix of transition `j`: `A_j` on the diagonal,
    /// `Re C_kl^(j)` off the diagonal.
    pub fn damping_matrix(&self, scheme: &LevelScheme, j: usize) -> DMatrix<f64> {
        let n = self.n_atoms;
        DMatrix::from_fn(n, n, |k, l| if k == l { scheme.a(j) } else { self.get(k, l, j).re })
    }
}

pub fn build_coupling_set(geometry: &Geometry, scheme: &LevelScheme, n_atoms: usize) -> Result<CouplingSet> {
    geometry.validate(n_atoms)?;
    let nt = scheme.kind.transitions().len();
    if scheme.wavelengths.len() != nt {
        return Err(Error::Config(format!(
            "{} wavelengths given, {nt} radiative transitions need one each",
            scheme.wavelengths.len()
        )));
    }
    if let Some(bad) = scheme.wavelengths.iter().position(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::Config(format!("wavelength of transition {} is missing or invalid", bad + 1)));
    }
    let pairs = pairs(n_atoms);
    let mut c = Vec::with_capacity(pairs.len());
    let mut a = Vec::with_capacity(pairs.len());
    for &(k, l) in &pairs {
        let r = geometry.distance(k, l, n_atoms);
        let theta = geometry.angle(k, l, n_atoms);
        let mut crow = Vec::with_capacity(nt);
        let mut arow = Vec::with_capacity(nt);
        for j in 1..=nt {
            let aj = 2.0 * std::f64::consts::PI * r / scheme.wavelengths[j - 1];
            arow.push(aj);
            crow.push(coupling_parameter(scheme.a(j), aj, theta)?);
        }
        c.push(crow);
        a.push(arow);
    }
    Ok(CouplingSet { n_atoms, pairs, c, a })
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn far_field_vanishes() {
        let c = coupling_parameter(1.0, 1e6, FRAC_PI_2).unwrap();
        assert!(c.norm() < 1e-5);
    }

    #[test]
    fn near_field_real_part() {
        // Series at theta = pi/2: Re C = A (1 - a^2/5 + O(a^4)).
        let a = 1e-3;
        let c = coupling_parameter(1.0, a, FRAC_PI_2).unwrap();
        assert!((c.re - (1.0 - a * a / 5.0)).abs() < 1e-11);
        assert!((c.re - 1.0).abs() < 1e-5);
    }

    #[test]
    fn regression_at_one_wavelength() {
        // 50-digit evaluation of the same expression at a = 2 pi (mpmath).
        let c = coupling_parameter(1.0, 2.0 * PI, FRAC_PI_2).unwrap();
        assert!((c.re - 0.037995443865876664).abs() < 1e-14, "{c}");
        assert!((c.im - (-0.232_685_251_931_618_1)).abs() < 1e-14, "{c}");
    }

    #[test]
    fn rejects_coincident_atoms() {
        assert!(coupling_parameter(1.0, 0.0, FRAC_PI_2).is_err());
        assert!(coupling_parameter(1.0, -1.0, FRAC_PI_2).is_err());
    }

    #[test]
    fn equilateral_pairs_agree() {
        let scheme = LevelScheme::four_level(0.01, 0.3, 1.0, 1.0, 0.5, 0.01);
        let cs = build_coupling_set(&Geometry::equilateral(1.0), &scheme, 3).unwrap();
        let c12 = cs.get(0, 1, 3);
        assert_eq!(c12, cs.get(0, 2, 3));
        assert_eq!(c12, cs.get(1, 2, 3));
        assert_eq!(cs.get(1, 0, 3), c12);
        assert!(cs.uniform(3).is_some());
    }

    #[test]
    fn independent_layout_decouples() {
        let scheme = LevelScheme::d_system(0.01, 0.01, 1.0, 1.0);
        let cs = build_coupling_set(&Geometry::independent(), &scheme, 3).unwrap();
        assert!(cs.c.iter().flatten().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn angle_from_vectors() {
        let r = 0.7;
        let g = Geometry::positions(vec![[0.0, 0.0, 0.0], [0.0, 0.0, r]], DipolePolicy::Axis([1.0, 0.0, 0.0]));
        assert!((g.angle(0, 1, 2) - FRAC_PI_2).abs() < 1e-15);
        assert!((g.distance(0, 1, 2) - r).abs() < 1e-15);
        let scheme = LevelScheme::d_system(0.01, 0.01, 1.0, 1.0);
        let cs = build_coupling_set(&g, &scheme, 2).unwrap();
        assert!((cs.a[0][2] - 2.0 * PI * r).abs() < 1e-14);
        let direct = coupling_parameter(1.0, 2.0 * PI * r, FRAC_PI_2).unwrap();
        assert!((cs.get(0, 1, 3) - direct).norm() < 1e-15);

        let along = Geometry::positions(vec![[0.0, 0.0, 0.0], [0.0, 0.0, r]], DipolePolicy::Axis([0.0, 0.0, 2.0]));
        assert!(along.angle(0, 1, 2).abs() < 1e-7);
    }

    #[test]
    fn missing_wavelength_is_config_error() {
        let scheme = LevelScheme::d_system(0.01, 0.01, 1.0, 1.0).with_wavelengths(vec![1.0, 1.0]);
        assert!(matches!(build_coupling_set(&Geometry::equilateral(1.0), &scheme, 2), Err(Error::Config(_))));
    }

    #[test]
    fn damping_matrix_psd_down_to_small_distances() {
        let scheme =
            LevelScheme::four_level(0.01, 0.3, 1.0, 1.0, 0.5, 0.01).with_wavelengths(vec![3.574, 1.245, 1.0, 0.923]);
        for i in 0..200 {
            let r = 0.05 + i as f64 * 0.05;
            let cs = build_coupling_set(&Geometry::equilateral(r), &scheme, 3).unwrap();
            for j in 1..=4 {
                assert!(min_eigenvalue(&cs.damping_matrix(&scheme, j)) >= -1e-12, "r={r} j={j}");
            }
        }
    }
}
