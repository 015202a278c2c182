//! Per-clause Ising Hamiltonians and their complex phase relaxations.
//!
//! Each canonical clause type maps to an 8-term polynomial in the spins of
//! its variables (X, Y, Z). The relaxation replaces every spin product by a
//! complex exponential of the phase combination below, so that at binary
//! phases `φ = π(1 − S)/2` the complex value equals the integer energy.
//!
//! | term | 1 | X−Y | X−Z | Z−Y | X | Y | Z | X−Y+Z |
//! |------|---|-----|-----|-----|---|---|---|-------|
//! | Z₁   | + |  +  |  +  |  +  | − | − | − |   −   |
//! | Z₂   | + |  −  |  −  |  +  | + | − | − |   +   |
//! | Z₃   | + |  +  |  −  |  −  | + | + | − |   −   |
//! | Z₄   | + |  +  |  +  |  +  | + | + | + |   +   |

use num_complex::Complex;
use thiserror::Error;

use crate::cnf::ClauseType;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EnergyError {
    #[error("clause type id {0} is not in 1..=4")]
    InvalidTypeId(u8),
    #[error("phase is not finite")]
    NonFinitePhase,
}

/// Phase combination of each term, as coefficients on (φ_X, φ_Y, φ_Z).
pub const TERM_EXPONENTS: [[i8; 3]; 8] = [
    [0, 0, 0],
    [1, -1, 0],
    [1, 0, -1],
    [0, -1, 1],
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, -1, 1],
];

/// Sign of each term per clause type (rows in `ClauseType` order).
pub const TERM_SIGNS: [[i8; 8]; 4] = [
    [1, 1, 1, 1, -1, -1, -1, -1],
    [1, -1, -1, 1, 1, -1, -1, 1],
    [1, 1, -1, -1, 1, 1, -1, -1],
    [1, 1, 1, 1, 1, 1, 1, 1],
];

/// Complex clause energy with its partial derivatives along φ_X, φ_Y, φ_Z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClauseEnergy<T> {
    pub z: Complex<T>,
    pub dz_dphi: [Complex<T>; 3],
}

fn kind(type_id: u8) -> Result<ClauseType, EnergyError> {
    ClauseType::from_id(type_id).ok_or(EnergyError::InvalidTypeId(type_id))
}

/// Integer clause energy: 0 when the canonical clause is TRUE, 8 otherwise.
pub fn clause_hamiltonian(type_id: u8, spins: [i8; 3]) -> Result<i32, EnergyError> {
    Ok(hamiltonian(kind(type_id)?, spins))
}

pub fn hamiltonian(kind: ClauseType, spins: [i8; 3]) -> i32 {
    TERM_EXPONENTS
        .iter()
        .zip(TERM_SIGNS[kind.index()])
        .map(|(exps, sign)| {
            let prod: i32 = exps
                .iter()
                .zip(spins)
                .filter(|(e, _)| **e != 0)
                .map(|(_, s)| s as i32)
                .product();
            sign as i32 * prod
        })
        .sum()
}

fn term_phase<T: Real>(exps: &[i8; 3], phases: &[T; 3]) -> T {
    exps.iter()
        .zip(phases)
        .fold(T::zero(), |acc, (&e, &p)| match e {
            1 => acc + p,
            -1 => acc - p,
            _ => acc,
        })
}

/// Complex relaxation of a clause at phases (φ_X, φ_Y, φ_Z).
pub fn clause_z<T: Real>(type_id: u8, phases: [T; 3]) -> Result<Complex<T>, EnergyError> {
    let kind = kind(type_id)?;
    check_finite(&phases)?;
    Ok(relaxed_energy(kind, &phases))
}

/// Analytic `∂Z/∂φ_j` for j ∈ {X, Y, Z}.
pub fn clause_z_gradient<T: Real>(
    type_id: u8,
    phases: [T; 3],
) -> Result<[Complex<T>; 3], EnergyError> {
    let kind = kind(type_id)?;
    check_finite(&phases)?;
    Ok(relaxed_energy_and_gradient(kind, &phases).dz_dphi)
}

fn check_finite<T: Real>(phases: &[T; 3]) -> Result<(), EnergyError> {
    if phases.iter().all(|p| p.is_finite()) {
        Ok(())
    } else {
        Err(EnergyError::NonFinitePhase)
    }
}

/// Term-by-term evaluation with one `sin`/`cos` pair per term.
pub fn relaxed_energy<T: Real>(kind: ClauseType, phases: &[T; 3]) -> Complex<T> {
    TERM_EXPONENTS
        .iter()
        .zip(TERM_SIGNS[kind.index()])
        .map(|(exps, sign)| Complex::from_polar(T::lit(sign as f64), term_phase(exps, phases)))
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
}

pub fn relaxed_energy_and_gradient<T: Real>(kind: ClauseType, phases: &[T; 3]) -> ClauseEnergy<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut z = zero;
    let mut dz = [zero; 3];
    for (exps, sign) in TERM_EXPONENTS.iter().zip(TERM_SIGNS[kind.index()]) {
        let term = Complex::from_polar(T::lit(sign as f64), term_phase(exps, phases));
        z = z + term;
        // d/dφ_j e^{iθ} = i·a_j·e^{iθ}
        let i_term = Complex::new(-term.im, term.re);
        for (d, &e) in dz.iter_mut().zip(exps) {
            match e {
                1 => *d = *d + i_term,
                -1 => *d = *d - i_term,
                _ => {}
            }
        }
    }
    ClauseEnergy { z, dz_dphi: dz }
}

/// Same quantity as [`relaxed_energy_and_gradient`], built from the unit
/// phasors `e^{iφ_X}, e^{iφ_Y}, e^{iφ_Z}` by complex products. This is the
/// path the network-level energy uses, where phasors are shared between
/// clauses.
#[inline]
pub fn energy_from_phasors<T: Real>(kind: ClauseType, e: &[Complex<T>; 3]) -> ClauseEnergy<T> {
    let [ex, ey, ez] = *e;
    let one = Complex::new(T::one(), T::zero());
    let xy = ex * ey.conj();
    let xz = ex * ez.conj();
    let zy = ez * ey.conj();
    let xyz = xy * ez;
    let terms = [one, xy, xz, zy, ex, ey, ez, xyz];
    let signs = &TERM_SIGNS[kind.index()];
    let t = |k: usize| if signs[k] > 0 { terms[k] } else { -terms[k] };
    let (t0, t1, t2, t3, t4, t5, t6, t7) = (t(0), t(1), t(2), t(3), t(4), t(5), t(6), t(7));
    let z = t0 + t1 + t2 + t3 + t4 + t5 + t6 + t7;
    let i = |c: Complex<T>| Complex::new(-c.im, c.re);
    ClauseEnergy {
        z,
        dz_dphi: [
            i(t1 + t2 + t4 + t7),
            i(t5 - t1 - t3 - t7),
            i(t3 + t6 + t7 - t2),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(clause_hamiltonian(1, [1, 1, 1]), Ok(0));
        assert_eq!(clause_hamiltonian(1, [-1, -1, -1]), Ok(8));
        assert_eq!(clause_hamiltonian(4, [1, 1, 1]), Ok(8));
        assert_eq!(clause_hamiltonian(0, [1, 1, 1]), Err(EnergyError::InvalidTypeId(0)));
        assert_eq!(clause_hamiltonian(5, [1, 1, 1]), Err(EnergyError::InvalidTypeId(5)));
    }

    #[test]
    fn z_examples() {
        let z = clause_z(1, [0.0f64; 3]).unwrap();
        assert!(z.norm() < 1e-15);
        let z = clause_z(1, [PI; 3]).unwrap();
        assert!((z - Complex::new(8.0, 0.0)).norm() < 1e-12);
        assert_eq!(
            clause_z(1, [f64::NAN, 0.0, 0.0]),
            Err(EnergyError::NonFinitePhase)
        );
        assert_eq!(clause_z(9, [0.0f64; 3]), Err(EnergyError::InvalidTypeId(9)));
    }

    #[test]
    fn each_phase_enters_four_terms() {
        for j in 0..3 {
            assert_eq!(TERM_EXPONENTS.iter().filter(|e| e[j] != 0).count(), 4);
        }
    }

    #[test]
    fn phasor_path_matches_term_path() {
        let phases = [0.3f64, -2.1, 5.0];
        let e = phases.map(|p| Complex::from_polar(1.0, p));
        for kind in ClauseType::ALL {
            let a = relaxed_energy_and_gradient(kind, &phases);
            let b = energy_from_phasors(kind, &e);
            assert!((a.z - b.z).norm() < 1e-13);
            for j in 0..3 {
                assert!((a.dz_dphi[j] - b.dz_dphi[j]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn runs_in_single_precision() {
        let z = clause_z(1, [std::f32::consts::PI; 3]).unwrap();
        assert!((z.re - 8.0).abs() < 1e-5 && z.im.abs() < 1e-5);
    }
}
