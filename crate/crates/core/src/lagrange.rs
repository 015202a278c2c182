//! Network-level Lagrange function for a 3-SAT instance.
//!
//! Every clause `m` owns one Lagrange oscillator with unit vector
//! `u_m = (cos φλ_m, sin φλ_m)`; the total function is
//! `L_T = Σ_m u_m · Z_m(φ_x)`, i.e. `Σ_m Re(e^{-iφλ_m} Z_m)`.
//! Variable phases descend `L_T`, Lagrange phases ascend it.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clause_energy::{energy_from_phasors, relaxed_energy_and_gradient};
use crate::cnf::{ClauseType, Instance};
use crate::Real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LagrangeError {
    #[error("{what}: expected length {expected}, got {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Time constants and stabilization knobs of the oscillator network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig<T> {
    pub tau: T,
    pub tau_lambda: T,
    /// Sharpness of the `tanh` rounding inside the cost function.
    pub beta: T,
    /// Ceiling of the second-harmonic injection amplitude `K(t)`; 0 disables it.
    pub shil_k_max: T,
    /// Time at which `K(t)` starts ramping from 0.
    pub shil_start: T,
    /// Duration of the linear ramp to `shil_k_max`; 0 means a step.
    pub shil_ramp_time: T,
    /// Lagrange phases stop evolving from this time on.
    pub lagrange_freeze_time: T,
}

impl<T: Real> Default for SystemConfig<T> {
    fn default() -> Self {
        Self {
            tau: T::one(),
            tau_lambda: T::one(),
            beta: T::lit(20.0),
            shil_k_max: T::zero(),
            shil_start: T::zero(),
            shil_ramp_time: T::zero(),
            lagrange_freeze_time: T::infinity(),
        }
    }
}

impl<T: Real> SystemConfig<T> {
    pub fn validate(&self) -> Result<(), LagrangeError> {
        let bad = |s: &str| Err(LagrangeError::InvalidConfig(s.to_string()));
        if !(self.tau > T::zero()) || !self.tau.is_finite() {
            return bad("tau must be positive and finite");
        }
        if !(self.tau_lambda > T::zero()) || !self.tau_lambda.is_finite() {
            return bad("tau_lambda must be positive and finite");
        }
        if !(self.beta > T::zero()) {
            return bad("beta must be positive");
        }
        if !(self.shil_k_max >= T::zero()) || !(self.shil_ramp_time >= T::zero()) {
            return bad("SHIL amplitude and ramp time must be non-negative");
        }
        if self.lagrange_freeze_time.is_nan() {
            return bad("freeze time is NaN");
        }
        Ok(())
    }

    /// Injection amplitude `K(t)`, ramped linearly from `shil_start`.
    pub fn shil_amplitude(&self, t: T) -> T {
        if self.shil_k_max == T::zero() || t < self.shil_start {
            return T::zero();
        }
        if self.shil_ramp_time == T::zero() {
            return self.shil_k_max;
        }
        let frac = ((t - self.shil_start) / self.shil_ramp_time).min(T::one());
        self.shil_k_max * frac
    }

    pub fn lagrange_frozen(&self, t: T) -> bool {
        t >= self.lagrange_freeze_time
    }

    /// Same settings in another precision.
    pub fn cast<U: Real>(&self) -> SystemConfig<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        SystemConfig {
            tau: c(self.tau),
            tau_lambda: c(self.tau_lambda),
            beta: c(self.beta),
            shil_k_max: c(self.shil_k_max),
            shil_start: c(self.shil_start),
            shil_ramp_time: c(self.shil_ramp_time),
            lagrange_freeze_time: c(self.lagrange_freeze_time),
        }
    }
}

/// Variable phases, Lagrange phases and the simulation clock (in
/// oscillation cycles).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState<T> {
    pub phi_x: Vec<T>,
    pub phi_lambda: Vec<T>,
    pub t: T,
}

impl<T: Real> PhaseState<T> {
    pub fn new(phi_x: Vec<T>, phi_lambda: Vec<T>) -> Self {
        Self {
            phi_x,
            phi_lambda,
            t: T::zero(),
        }
    }

    pub fn check_dims(&self, inst: &Instance) -> Result<(), LagrangeError> {
        check_len("phi_x", inst.num_vars(), self.phi_x.len())?;
        check_len("phi_lambda", inst.num_clauses(), self.phi_lambda.len())
    }

    pub fn is_finite(&self) -> bool {
        self.phi_x.iter().chain(&self.phi_lambda).all(|p| p.is_finite())
    }

    /// `[φ_x; φ_λ]` as one vector.
    pub fn packed(&self) -> Vec<T> {
        self.phi_x.iter().chain(&self.phi_lambda).copied().collect()
    }

    pub fn from_packed(y: &[T], num_vars: usize, t: T) -> Self {
        Self {
            phi_x: y[..num_vars].to_vec(),
            phi_lambda: y[num_vars..].to_vec(),
            t,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), LagrangeError> {
    if expected == found {
        Ok(())
    } else {
        Err(LagrangeError::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub x: Vec<T>,
    pub lambda: Vec<T>,
}

/// Scratch buffers for repeated evaluation on one instance.
#[derive(Debug, Clone)]
pub struct EnergyWorkspace<T> {
    phasors: Vec<Complex<T>>,
}

impl<T: Real> EnergyWorkspace<T> {
    pub fn new(inst: &Instance) -> Self {
        Self {
            phasors: vec![Complex::new(T::zero(), T::zero()); inst.num_vars()],
        }
    }

    fn load(&mut self, phi_x: &[T]) {
        for (e, &p) in self.phasors.iter_mut().zip(phi_x) {
            let (s, c) = p.sin_cos();
            *e = Complex::new(c, s);
        }
    }

    /// Writes `∇_{φx} L_T` into `grad_x` and, when `phi_lambda` is given,
    /// `∇_{φλ} L_T` into `grad_lambda`. Without `phi_lambda` every
    /// multiplier is `u = (1, 0)`, which yields the plain ONN gradient of
    /// `Σ Re Z_m`. Contributions are scattered clause by clause in index
    /// order.
    pub fn gradients(
        &mut self,
        inst: &Instance,
        phi_x: &[T],
        phi_lambda: Option<&[T]>,
        grad_x: &mut [T],
        mut grad_lambda: Option<&mut [T]>,
    ) {
        self.load(phi_x);
        grad_x.iter_mut().for_each(|g| *g = T::zero());
        for (m, c) in inst.canonical().iter().enumerate() {
            let e = c.vars.map(|v| self.phasors[v]);
            let ce = energy_from_phasors(c.kind, &e);
            match phi_lambda {
                Some(pl) => {
                    let (s, co) = pl[m].sin_cos();
                    for (j, &v) in c.vars.iter().enumerate() {
                        let d = ce.dz_dphi[j];
                        grad_x[v] += co * d.re + s * d.im;
                    }
                    if let Some(gl) = grad_lambda.as_deref_mut() {
                        gl[m] = co * ce.z.im - s * ce.z.re;
                    }
                }
                None => {
                    for (j, &v) in c.vars.iter().enumerate() {
                        grad_x[v] += ce.dz_dphi[j].re;
                    }
                }
            }
        }
    }

    pub fn lagrange_value(&mut self, inst: &Instance, phi_x: &[T], phi_lambda: &[T]) -> T {
        self.load(phi_x);
        inst.canonical()
            .iter()
            .zip(phi_lambda)
            .map(|(c, &l)| {
                let z = energy_from_phasors(c.kind, &c.vars.map(|v| self.phasors[v])).z;
                let (s, co) = l.sin_cos();
                co * z.re + s * z.im
            })
            .sum()
    }
}

/// `L_T(φ_x, φ_λ) = Σ_m u_m · Z_m`.
pub fn lagrange_value<T: Real>(inst: &Instance, state: &PhaseState<T>) -> Result<T, LagrangeError> {
    state.check_dims(inst)?;
    Ok(EnergyWorkspace::new(inst).lagrange_value(inst, &state.phi_x, &state.phi_lambda))
}

pub fn lagrange_gradients<T: Real>(
    inst: &Instance,
    state: &PhaseState<T>,
) -> Result<Gradients<T>, LagrangeError> {
    state.check_dims(inst)?;
    let mut g = Gradients {
        x: vec![T::zero(); inst.num_vars()],
        lambda: vec![T::zero(); inst.num_clauses()],
    };
    EnergyWorkspace::new(inst).gradients(
        inst,
        &state.phi_x,
        Some(&state.phi_lambda),
        &mut g.x,
        Some(&mut g.lambda),
    );
    Ok(g)
}

/// Energy of the plain oscillator network, `Σ_m Re Z_m`.
pub fn onn_energy<T: Real>(inst: &Instance, phi_x: &[T]) -> Result<T, LagrangeError> {
    check_len("phi_x", inst.num_vars(), phi_x.len())?;
    Ok(clause_energies(inst, phi_x).iter().map(|z| z.re).sum())
}

/// Gradient of [`onn_energy`]; the Lagrange phases of `state` are ignored.
pub fn onn_gradient<T: Real>(inst: &Instance, state: &PhaseState<T>) -> Result<Vec<T>, LagrangeError> {
    check_len("phi_x", inst.num_vars(), state.phi_x.len())?;
    let mut g = vec![T::zero(); inst.num_vars()];
    EnergyWorkspace::new(inst).gradients(inst, &state.phi_x, None, &mut g, None);
    Ok(g)
}

/// `Z_m(φ_x)` for every clause.
pub fn clause_energies<T: Real>(inst: &Instance, phi_x: &[T]) -> Vec<Complex<T>> {
    let e: Vec<Complex<T>> = phi_x.iter().map(|&p| Complex::from_polar(T::one(), p)).collect();
    inst.canonical()
        .iter()
        .map(|c| energy_from_phasors(c.kind, &c.vars.map(|v| e[v])).z)
        .collect()
}

/// Injection potential `V = −K(t) Σ cos 2φ_j`.
pub fn shil_potential<T: Real>(phi_x: &[T], t: T, config: &SystemConfig<T>) -> T {
    let k = config.shil_amplitude(t);
    -k * phi_x.iter().map(|&p| (p + p).cos()).sum::<T>()
}

/// `∂V/∂φ_j = 2K(t) sin 2φ_j`.
pub fn shil_gradient<T: Real>(state: &PhaseState<T>, t: T, config: &SystemConfig<T>) -> Vec<T> {
    let mut out = vec![T::zero(); state.phi_x.len()];
    add_shil_gradient(&state.phi_x, t, config, &mut out);
    out
}

pub(crate) fn add_shil_gradient<T: Real>(phi_x: &[T], t: T, config: &SystemConfig<T>, out: &mut [T]) {
    let k = config.shil_amplitude(t);
    if k == T::zero() {
        return;
    }
    let two_k = k + k;
    for (o, &p) in out.iter_mut().zip(phi_x) {
        *o += two_k * (p + p).sin();
    }
}

/// Smooth unsatisfied-clause count
/// `κ = Σ_m Π_j ½(1 ∓ tanh(β cos φ_j))`, minus sign for positive literals.
/// `κ < 0.125` guarantees the rounded assignment satisfies every clause.
pub fn cost_kappa<T: Real>(inst: &Instance, phi_x: &[T], beta: T) -> Result<T, LagrangeError> {
    check_len("phi_x", inst.num_vars(), phi_x.len())?;
    let mut soft = vec![T::zero(); phi_x.len()];
    Ok(kappa_with(inst, phi_x, beta, &mut soft))
}

pub(crate) fn kappa_with<T: Real>(inst: &Instance, phi_x: &[T], beta: T, soft: &mut [T]) -> T {
    for (s, &p) in soft.iter_mut().zip(phi_x) {
        *s = (beta * p.cos()).tanh();
    }
    let half = T::lit(0.5);
    inst.clauses()
        .iter()
        .map(|c| {
            c.lits()
                .iter()
                .map(|l| {
                    let s = soft[l.var];
                    if l.negated {
                        half * (T::one() + s)
                    } else {
                        half * (T::one() - s)
                    }
                })
                .fold(T::one(), |a, b| a * b)
        })
        .sum()
}

/// The two parts of `dL/dt` for a single clause under the saddle dynamics
/// with `τ = τ_λ = 1`: the ascent part `(du/dt)·Z = (Z·u')²` and the
/// descent part `(dZ/dt)·u = −Σ_j (u·∂Z/∂φ_j)²`.
pub fn saddle_rates<T: Real>(kind: ClauseType, phases: &[T; 3], phi_lambda: T) -> (T, T) {
    let ce = relaxed_energy_and_gradient(kind, phases);
    let (s, c) = phi_lambda.sin_cos();
    let z_dot_uprime = -s * ce.z.re + c * ce.z.im;
    let ascent = z_dot_uprime * z_dot_uprime;
    let descent = -ce
        .dz_dphi
        .iter()
        .map(|d| {
            let p = c * d.re + s * d.im;
            p * p
        })
        .sum::<T>();
    (ascent, descent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::parse_dimacs;
    use std::f64::consts::PI;

    #[test]
    fn single_clause_value() {
        let inst = parse_dimacs("p cnf 3 1\n1 2 3 0").unwrap();
        let s = PhaseState::new(vec![PI; 3], vec![0.0]);
        assert!((lagrange_value(&inst, &s).unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let inst = parse_dimacs("p cnf 3 1\n1 2 3 0").unwrap();
        let s = PhaseState::new(vec![0.0; 2], vec![0.0]);
        assert!(matches!(
            lagrange_value(&inst, &s),
            Err(LagrangeError::DimensionMismatch { what: "phi_x", .. })
        ));
        let s = PhaseState::new(vec![0.0; 3], vec![]);
        assert!(lagrange_gradients(&inst, &s).is_err());
        assert!(cost_kappa(&inst, &[0.0; 4], 20.0).is_err());
    }

    #[test]
    fn orthogonal_multiplier_gives_full_lambda_gradient() {
        let inst = parse_dimacs("p cnf 3 1\n1 2 3 0").unwrap();
        let phi = vec![0.4, 2.0, -1.0];
        let z = clause_energies(&inst, &phi)[0];
        let lam = z.arg() + PI / 2.0;
        let s = PhaseState::new(phi, vec![lam]);
        let g = lagrange_gradients(&inst, &s).unwrap();
        assert!((g.lambda[0].abs() - z.norm()).abs() < 1e-12);
        assert!(lagrange_value(&inst, &s).unwrap().abs() < 1e-12);
    }

    #[test]
    fn kappa_examples() {
        let inst = parse_dimacs("p cnf 3 1\n1 2 3 0").unwrap();
        assert!(cost_kappa(&inst, &[0.0; 3], 20.0).unwrap() < 1e-15);
        let k = cost_kappa(&inst, &[PI / 2.0; 3], 20.0).unwrap();
        assert!((k - 0.125).abs() < 1e-12);
        let k = cost_kappa(&inst, &[PI; 3], 20.0).unwrap();
        assert!((k - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shil_ramp() {
        let cfg = SystemConfig {
            shil_k_max: 2.0,
            shil_start: 10.0,
            shil_ramp_time: 4.0,
            ..SystemConfig::default()
        };
        assert_eq!(cfg.shil_amplitude(5.0), 0.0);
        assert_eq!(cfg.shil_amplitude(12.0), 1.0);
        assert_eq!(cfg.shil_amplitude(100.0), 2.0);
        let off = SystemConfig::<f64>::default();
        let s = PhaseState::new(vec![0.3, 1.0], vec![]);
        assert_eq!(shil_gradient(&s, 3.0, &off), vec![0.0, 0.0]);
        let s = PhaseState::new(vec![0.0, PI], vec![]);
        let g = shil_gradient(&s, 50.0, &cfg);
        assert!(g.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::<f64>::default().validate().is_ok());
        let bad = SystemConfig {
            tau_lambda: 0.0,
            ..SystemConfig::<f64>::default()
        };
        assert!(bad.validate().is_err());
        let bad = SystemConfig {
            beta: -1.0,
            ..SystemConfig::<f64>::default()
        };
        assert!(bad.validate().is_err());
    }
}
