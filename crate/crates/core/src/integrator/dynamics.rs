use serde::{Deserialize, Serialize};

use super::{IntegratorError, OdeSystem};
use crate::cnf::Instance;
use crate::lagrange::{add_shil_gradient, EnergyWorkspace, PhaseState, SystemConfig};
use crate::Real;

/// `Lagonn` runs the saddle dynamics; `OnnOnly` is plain gradient descent
/// on `Σ Re Z_m` with the Lagrange phases held still.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Lagonn,
    OnnOnly,
}

/// Packed right-hand side over `y = [φ_x; φ_λ]`:
/// `τ φ̇_x = −(∇_x L_T + ∇V_SHIL)`, `τ_λ φ̇_λ = +∇_λ L_T`.
#[derive(Debug, Clone)]
pub struct LagonnDynamics<'a, T> {
    inst: &'a Instance,
    config: SystemConfig<T>,
    mode: Mode,
    ws: EnergyWorkspace<T>,
}

impl<'a, T: Real> LagonnDynamics<'a, T> {
    pub fn new(inst: &'a Instance, config: SystemConfig<T>, mode: Mode) -> Result<Self, IntegratorError> {
        config.validate()?;
        Ok(Self {
            inst,
            config,
            mode,
            ws: EnergyWorkspace::new(inst),
        })
    }

    pub fn config(&self) -> &SystemConfig<T> {
        &self.config
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub(crate) fn workspace(&mut self) -> &mut EnergyWorkspace<T> {
        &mut self.ws
    }
}

impl<T: Real> OdeSystem<T> for LagonnDynamics<'_, T> {
    fn dim(&self) -> usize {
        self.inst.num_vars() + self.inst.num_clauses()
    }

    fn eval(&mut self, t: T, y: &[T], dy: &mut [T]) {
        let n = self.inst.num_vars();
        let (x, lam) = y.split_at(n);
        let (dx, dlam) = dy.split_at_mut(n);
        let inv_tau = T::one() / self.config.tau;
        match self.mode {
            Mode::Lagonn => {
                self.ws.gradients(self.inst, x, Some(lam), dx, Some(dlam));
                add_shil_gradient(x, t, &self.config, dx);
                if self.config.lagrange_frozen(t) {
                    dlam.iter_mut().for_each(|d| *d = T::zero());
                } else {
                    let inv = T::one() / self.config.tau_lambda;
                    dlam.iter_mut().for_each(|d| *d *= inv);
                }
            }
            Mode::OnnOnly => {
                self.ws.gradients(self.inst, x, None, dx, None);
                dlam.iter_mut().for_each(|d| *d = T::zero());
            }
        }
        dx.iter_mut().for_each(|d| *d = -*d * inv_tau);
    }
}

/// `(φ̇_x, φ̇_λ)` at `state`, with the clock taken from `state.t`.
pub fn derivative<T: Real>(
    inst: &Instance,
    state: &PhaseState<T>,
    config: &SystemConfig<T>,
    mode: Mode,
) -> Result<(Vec<T>, Vec<T>), IntegratorError> {
    state.check_dims(inst)?;
    let mut sys = LagonnDynamics::new(inst, *config, mode)?;
    let y = state.packed();
    let mut dy = vec![T::zero(); y.len()];
    sys.eval(state.t, &y, &mut dy);
    let lam = dy.split_off(inst.num_vars());
    Ok((dy, lam))
}
