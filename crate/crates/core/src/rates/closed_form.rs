use super::{RateMatrix, RateMethod};
use crate::coupling::CouplingSet;
use crate::error::{Error, Result};
use crate::model::{EnsembleSpec, SchemeKind};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormOrder {
    Exact,
    /// Linear in the coupling `C3`.
    FirstOrder,
}

/// Strong-transition parameters entering the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongParams {
    pub a: f64,
    pub rabi: f64,
    pub detuning: f64,
    pub c: C64,
}

impl StrongParams {
    fn x(&self) -> f64 {
        self.a * self.a + self.rabi * self.rabi + 4.0 * self.detuning * self.detuning
    }
    fn y(&self) -> f64 {
        self.a * self.a + 2.0 * self.rabi * self.rabi + 4.0 * self.detuning * self.detuning
    }
    fn q(&self) -> f64 {
        self.a * self.a + 4.0 * self.detuning * self.detuning
    }
    fn b(&self) -> f64 {
        self.c.norm_sqr() + 2.0 * self.a * self.c.re - 4.0 * self.detuning * self.c.im
    }
    fn k(&self) -> f64 {
        self.c.norm_sqr() * (C64::new(self.a, -2.0 * self.detuning) + self.c).norm_sqr()
    }
}

/// Expected number of atoms in the ground level in the quasi-steady state
/// with `k` bright atoms (all `k` driven atoms mutually coupled by `C3`).
pub fn ground_expectation(k: usize, p: &StrongParams) -> Result<f64> {
    let (x, y, q, b) = (p.x(), p.y(), p.q(), p.b());
    Ok(match k {
        0 => 0.0,
        1 => x / y,
        2 => 2.0 * (x * y + q * b) / (y * y + q * b),
        3 => {
            let kk = p.k();
            let om2 = p.rabi * p.rabi;
            3.0 * (x * (y * y + 3.0 * q * b) + 2.0 * q * (kk + b * (om2 + b)))
                / (y * (y * y + 3.0 * q * b) + 2.0 * q * (kk + b * b))
        }
        _ => return Err(Error::Unsupported(format!("closed forms exist for up to 3 bright atoms, got {k}"))),
    })
}

/// First-order expansion of [`ground_expectation`] in `C3`.
pub fn ground_expectation_first_order(k: usize, p: &StrongParams) -> Result<f64> {
    if k > 3 {
        return Err(Error::Unsupported(format!("closed forms exist for up to 3 bright atoms, got {k}")));
    }
    let (x, y, q) = (p.x(), p.y(), p.q());
    let kf = k as f64;
    let lin = p.a * p.c.re - 2.0 * p.detuning * p.c.im;
    Ok(kf * x / y + 2.0 * kf * (kf - 1.0) * lin * p.rabi * p.rabi * q / y.powi(3))
}

/// Rates for identical, mutually coupled atoms where only the strong
/// transition is collective. Three atoms need equal pair couplings.
pub fn closed_form_rates(spec: &EnsembleSpec, couplings: &CouplingSet, order: ClosedFormOrder) -> Result<RateMatrix> {
    let n = spec.n_atoms;
    let s = &spec.scheme;
    let c = match n {
        1 => C64::new(0.0, 0.0),
        2 => couplings.get(0, 1, 3),
        _ => couplings.uniform(3).ok_or_else(|| {
            Error::Unsupported("closed forms for three atoms need an equilateral configuration".into())
        })?,
    };
    let p = StrongParams { a: s.a(3), rabi: s.rabi, detuning: s.detuning, c };
    let method = match order {
        ClosedFormOrder::Exact => RateMethod::ClosedForm,
        ClosedFormOrder::FirstOrder => RateMethod::FirstOrder,
    };
    let mut up = Vec::with_capacity(n);
    let mut down = Vec::with_capacity(n);
    for k in 1..=n {
        up.push((n - k + 1) as f64 * s.a(1));
        let e = match order {
            ClosedFormOrder::Exact => ground_expectation(k, &p)?,
            ClosedFormOrder::FirstOrder => ground_expectation_first_order(k, &p)?,
        };
        down.push(match s.kind {
            SchemeKind::FourLevel => s.incoherent_w * s.branching_ratio() * e,
            SchemeKind::DThreeLevel => s.a(2) * (k as f64 - e),
        });
    }
    RateMatrix::birth_death(&up, &down, method).finalize()
}

/// Populations of the symmetrized states in the three-bright-atom
/// quasi-steady state at zero detuning. `s311` etc. have one atom in `|3>`,
/// `s133` etc. two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeAtomPopulations {
    pub ground: f64,
    pub s311: f64,
    pub b311: f64,
    pub c311: f64,
    pub s133: f64,
    pub b133: f64,
    pub c133: f64,
    pub e3: f64,
}

impl ThreeAtomPopulations {
    pub fn total(&self) -> f64 {
        self.ground + self.s311 + self.b311 + self.c311 + self.s133 + self.b133 + self.c133 + self.e3
    }
}

pub fn rho_ss3_populations(a: f64, rabi: f64, c: C64) -> ThreeAtomPopulations {
    let (a2, om2) = (a * a, rabi * rabi);
    let x = a2 + om2;
    let y = a2 + 2.0 * om2;
    let b = c.norm_sqr() + 2.0 * a * c.re;
    let tail = 2.0 * a2 * (c.norm_sqr() * (c + a).norm_sqr() + b * b);
    let n = y * (y * y + 3.0 * a2 * b) + tail;
    let one = om2 * om2 * x / n;
    let two = om2 * om2 * om2 / n;
    ThreeAtomPopulations {
        ground: (x * (x * x + 3.0 * a2 * b) + tail) / n,
        s311: om2 * (x * (3.0 * a2 + om2) + 3.0 * a2 * b) / n,
        b311: one,
        c311: one,
        s133: om2 * om2 * (3.0 * a2 + om2) / n,
        b133: two,
        c133: two,
        e3: two,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(c: C64, det: f64) -> StrongParams {
        StrongParams { a: 1.0, rabi: 0.7, detuning: det, c }
    }

    #[test]
    fn uncoupled_atoms_add_up() {
        let p = params(C64::new(0.0, 0.0), 0.3);
        let e1 = ground_expectation(1, &p).unwrap();
        for k in 1..=3 {
            assert!((ground_expectation(k, &p).unwrap() - k as f64 * e1).abs() < 1e-14);
            assert!((ground_expectation_first_order(k, &p).unwrap() - k as f64 * e1).abs() < 1e-14);
        }
    }

    #[test]
    fn first_order_matches_derivative() {
        for det in [0.0, 0.4] {
            for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let h = 1e-6;
                for k in 2..=3 {
                    let plus = ground_expectation(k, &params(dir * h, det)).unwrap();
                    let minus = ground_expectation(k, &params(-dir * h, det)).unwrap();
                    let fd = (plus - minus) / (2.0 * h);
                    let lin = (ground_expectation_first_order(k, &params(dir, det)).unwrap()
                        - ground_expectation_first_order(k, &params(C64::new(0.0, 0.0), det)).unwrap())
                        / 1.0;
                    assert!((fd - lin).abs() < 1e-7, "k={k} det={det} dir={dir}: {fd} {lin}");
                }
            }
        }
    }

    #[test]
    fn three_atom_populations_normalised() {
        for c in [C64::new(0.0, 0.0), C64::new(0.4, -0.9), C64::new(-0.2, 3.0)] {
            let pops = rho_ss3_populations(1.0, 0.55, c);
            assert!((pops.total() - 1.0).abs() < 1e-14);
            let excited = pops.s311 + pops.b311 + pops.c311 + 2.0 * (pops.s133 + pops.b133 + pops.c133) + 3.0 * pops.e3;
            let p = StrongParams { a: 1.0, rabi: 0.55, detuning: 0.0, c };
            assert!((3.0 - excited - ground_expectation(3, &p).unwrap()).abs() < 1e-14);
        }
    }
}
