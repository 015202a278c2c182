//! Phase copying on a small XY-coupled graph.
//!
//! A copy constraint asks two oscillators to carry the same phase,
//! `e^{iφ_a} − e^{iφ_b} = 0`. It is enforced either by a ferromagnetic
//! penalty `−J_c cos(φ_a − φ_b)` or by one Lagrange oscillator per pair
//! contributing `J_λφ [cos(φ_a − λ) − cos(φ_b − λ)]`, which the phases
//! descend and the Lagrange phase ascends.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrator::{FehlbergStepper, OdeSystem};
use crate::rng::trial_rng;
use crate::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CopyDemoError {
    #[error("{what}: expected length {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("node {node} out of range for a graph of {num_nodes} nodes")]
    NodeOutOfRange { node: usize, num_nodes: usize },
    #[error("edge or pair joins node {0} to itself")]
    SelfLoop(usize),
    #[error("time step must be positive and finite")]
    InvalidStep,
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), CopyDemoError> {
    if expected != found {
        return Err(CopyDemoError::DimensionMismatch { what, expected, found });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XyGraph<T> {
    num_nodes: usize,
    edges: Vec<(usize, usize, T)>,
    fields: Vec<T>,
}

impl<T: Real> XyGraph<T> {
    pub fn new(num_nodes: usize, edges: Vec<(usize, usize, T)>, fields: Vec<T>) -> Result<Self, CopyDemoError> {
        check_len("fields", num_nodes, fields.len())?;
        for &(i, j, _) in &edges {
            check_node(i, num_nodes)?;
            check_node(j, num_nodes)?;
            if i == j {
                return Err(CopyDemoError::SelfLoop(i));
            }
        }
        Ok(Self { num_nodes, edges, fields })
    }

    /// Graph with zero external fields.
    pub fn from_edges(num_nodes: usize, edges: Vec<(usize, usize, T)>) -> Result<Self, CopyDemoError> {
        Self::new(num_nodes, edges, vec![T::zero(); num_nodes])
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize, T)] {
        &self.edges
    }

    pub fn fields(&self) -> &[T] {
        &self.fields
    }
}

fn check_node(node: usize, num_nodes: usize) -> Result<(), CopyDemoError> {
    if node >= num_nodes {
        return Err(CopyDemoError::NodeOutOfRange { node, num_nodes });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopyConstraint<T> {
    pub pair: (usize, usize),
    pub lambda_phase: T,
    pub strength: T,
}

impl<T: Real> CopyConstraint<T> {
    pub fn new(a: usize, b: usize, lambda_phase: T, strength: T) -> Result<Self, CopyDemoError> {
        if a == b {
            return Err(CopyDemoError::SelfLoop(a));
        }
        Ok(Self {
            pair: (a, b),
            lambda_phase,
            strength,
        })
    }
}

/// `−Σ J_ij cos(φ_i − φ_j) − Σ h_i cos φ_i`
pub fn xy_energy<T: Real>(graph: &XyGraph<T>, phases: &[T]) -> Result<T, CopyDemoError> {
    check_len("phases", graph.num_nodes, phases.len())?;
    let pair: T = graph
        .edges
        .iter()
        .map(|&(i, j, w)| w * (phases[i] - phases[j]).cos())
        .sum();
    let field: T = graph.fields.iter().zip(phases).map(|(&h, &p)| h * p.cos()).sum();
    Ok(-pair - field)
}

/// `∂E/∂φ_i`
pub fn xy_gradient<T: Real>(graph: &XyGraph<T>, phases: &[T]) -> Result<Vec<T>, CopyDemoError> {
    check_len("phases", graph.num_nodes, phases.len())?;
    let mut g = vec![T::zero(); graph.num_nodes];
    add_xy_gradient(graph, phases, &mut g);
    Ok(g)
}

fn add_xy_gradient<T: Real>(graph: &XyGraph<T>, phases: &[T], g: &mut [T]) {
    for &(i, j, w) in &graph.edges {
        let s = w * (phases[i] - phases[j]).sin();
        g[i] += s;
        g[j] -= s;
    }
    for (k, (&h, &p)) in graph.fields.iter().zip(phases).enumerate() {
        g[k] += h * p.sin();
    }
}

fn check_constraints<T: Real>(graph: &XyGraph<T>, constraints: &[CopyConstraint<T>]) -> Result<(), CopyDemoError> {
    for c in constraints {
        check_node(c.pair.0, graph.num_nodes)?;
        check_node(c.pair.1, graph.num_nodes)?;
    }
    Ok(())
}

/// `E(φ) + Σ_c J_c [cos(φ_a − λ_c) − cos(φ_b − λ_c)]`
pub fn copy_lagrange_value<T: Real>(
    graph: &XyGraph<T>,
    constraints: &[CopyConstraint<T>],
    phases: &[T],
) -> Result<T, CopyDemoError> {
    check_constraints(graph, constraints)?;
    let e = xy_energy(graph, phases)?;
    let c: T = constraints
        .iter()
        .map(|c| {
            let (a, b) = c.pair;
            c.strength * ((phases[a] - c.lambda_phase).cos() - (phases[b] - c.lambda_phase).cos())
        })
        .sum();
    Ok(e + c)
}

/// `(∂L/∂φ, ∂L/∂λ)` of [`copy_lagrange_value`].
pub fn copy_lagrange_gradient<T: Real>(
    graph: &XyGraph<T>,
    constraints: &[CopyConstraint<T>],
    phases: &[T],
) -> Result<(Vec<T>, Vec<T>), CopyDemoError> {
    check_constraints(graph, constraints)?;
    let mut g = xy_gradient(graph, phases)?;
    let mut gl = Vec::with_capacity(constraints.len());
    for c in constraints {
        let (a, b) = c.pair;
        let sa = (phases[a] - c.lambda_phase).sin();
        let sb = (phases[b] - c.lambda_phase).sin();
        g[a] -= c.strength * sa;
        g[b] += c.strength * sb;
        gl.push(c.strength * (sa - sb));
    }
    Ok((g, gl))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CopyMode<T> {
    /// Ferromagnetic coupling `J_c` between each copy pair.
    Penalty { j_c: T },
    /// One Lagrange oscillator per pair with coupling `J_λφ`.
    Lagrange { strength: T },
}

/// Six-node demo: a frustrated four-node antiferromagnet (`J = −1`) in
/// which node 0 is split into copies 0 and 1, and node 2 into copies 2
/// and 3. Merging each copy pair gives back the fully connected graph on
/// nodes {0|1, 2|3, 4, 5}.
pub fn demo_graph<T: Real>() -> XyGraph<T> {
    let j = -T::one();
    XyGraph::from_edges(
        6,
        vec![(0, 2, j), (0, 4, j), (1, 5, j), (3, 4, j), (3, 5, j), (4, 5, j)],
    )
    .expect("demo graph is well formed")
}

/// Copy pairs of [`demo_graph`].
pub const DEMO_PAIRS: [(usize, usize); 2] = [(0, 1), (2, 3)];

/// Packed dynamics over `[φ; λ]`.
#[derive(Debug, Clone)]
pub struct CopyDynamics<T> {
    graph: XyGraph<T>,
    pairs: Vec<(usize, usize)>,
    mode: CopyMode<T>,
}

impl<T: Real> CopyDynamics<T> {
    pub fn new(graph: XyGraph<T>, pairs: Vec<(usize, usize)>, mode: CopyMode<T>) -> Result<Self, CopyDemoError> {
        for &(a, b) in &pairs {
            check_node(a, graph.num_nodes)?;
            check_node(b, graph.num_nodes)?;
            if a == b {
                return Err(CopyDemoError::SelfLoop(a));
            }
        }
        Ok(Self { graph, pairs, mode })
    }
}

impl<T: Real> OdeSystem<T> for CopyDynamics<T> {
    fn dim(&self) -> usize {
        self.graph.num_nodes + self.pairs.len()
    }

    fn eval(&mut self, _t: T, y: &[T], dy: &mut [T]) {
        let n = self.graph.num_nodes;
        let (phi, lam) = y.split_at(n);
        let (dphi, dlam) = dy.split_at_mut(n);
        dphi.iter_mut().for_each(|d| *d = T::zero());
        add_xy_gradient(&self.graph, phi, dphi);
        match self.mode {
            CopyMode::Penalty { j_c } => {
                for &(a, b) in &self.pairs {
                    let s = j_c * (phi[a] - phi[b]).sin();
                    dphi[a] += s;
                    dphi[b] -= s;
                }
                dlam.iter_mut().for_each(|d| *d = T::zero());
            }
            CopyMode::Lagrange { strength } => {
                for (k, &(a, b)) in self.pairs.iter().enumerate() {
                    let sa = (phi[a] - lam[k]).sin();
                    let sb = (phi[b] - lam[k]).sin();
                    dphi[a] -= strength * sa;
                    dphi[b] += strength * sb;
                    dlam[k] = strength * (sa - sb);
                }
            }
        }
        dphi.iter_mut().for_each(|d| *d = -*d);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopyTraceRow {
    pub t: f64,
    pub cos_phi: Vec<f64>,
    /// `|cos φ_a − cos φ_b|` per copy pair.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopyTrace {
    pub rows: Vec<CopyTraceRow>,
    pub final_phases: Vec<f64>,
    pub final_lambda: Vec<f64>,
}

impl CopyTrace {
    pub fn final_residuals(&self) -> &[f64] {
        &self.rows.last().expect("trace has the initial row").residuals
    }
}

fn trace_row<T: Real>(t: T, phi: &[T], pairs: &[(usize, usize)]) -> CopyTraceRow {
    let cos_phi: Vec<f64> = phi.iter().map(|p| p.cos().to_f64_lossy()).collect();
    let residuals = pairs.iter().map(|&(a, b)| (cos_phi[a] - cos_phi[b]).abs()).collect();
    CopyTraceRow {
        t: t.to_f64_lossy(),
        cos_phi,
        residuals,
    }
}

/// Integrates from the given phases with fixed steps of `dt` up to `t_max`.
/// The trace starts with the initial state.
pub fn run_copy_dynamics<T: Real>(
    graph: &XyGraph<T>,
    pairs: &[(usize, usize)],
    mode: CopyMode<T>,
    phases: &[T],
    lambda: &[T],
    t_max: T,
    dt: T,
) -> Result<CopyTrace, CopyDemoError> {
    check_len("phases", graph.num_nodes, phases.len())?;
    check_len("lambda", pairs.len(), lambda.len())?;
    if !(dt > T::zero() && dt.is_finite()) {
        return Err(CopyDemoError::InvalidStep);
    }
    let mut sys = CopyDynamics::new(graph.clone(), pairs.to_vec(), mode)?;
    let n = graph.num_nodes;
    let mut y: Vec<T> = phases.iter().chain(lambda).copied().collect();
    let mut stepper = FehlbergStepper::new(y.len());
    let steps = (t_max / dt).floor().to_u64().unwrap_or(0);
    let mut rows = Vec::with_capacity(steps as usize + 1);
    rows.push(trace_row(T::zero(), &y[..n], pairs));
    for k in 0..steps {
        let t = T::lit(k as f64) * dt;
        stepper.step(&mut sys, t, &y, dt);
        let next = stepper.solution();
        if !next.iter().all(|v| v.is_finite()) {
            return Err(CopyDemoError::NonFiniteState { t: t.to_f64_lossy() });
        }
        y.copy_from_slice(next);
        rows.push(trace_row(T::lit((k + 1) as f64) * dt, &y[..n], pairs));
    }
    Ok(CopyTrace {
        rows,
        final_phases: y[..n].iter().map(|p| p.to_f64_lossy()).collect(),
        final_lambda: y[n..].iter().map(|p| p.to_f64_lossy()).collect(),
    })
}

/// Demo run from uniform random phases. Node phases are drawn before the
/// Lagrange phases, so both modes start from the same `φ` for a seed.
pub fn run_copy_demo<T: Real>(mode: CopyMode<T>, seed: u64, t_max: T, dt: T) -> Result<CopyTrace, CopyDemoError> {
    let graph = demo_graph::<T>();
    let mut rng = trial_rng(seed);
    let two_pi = T::TAU();
    let mut draw = || T::lit(rng.gen::<f64>()) * two_pi;
    let phases: Vec<T> = (0..graph.num_nodes()).map(|_| draw()).collect();
    let lambda: Vec<T> = DEMO_PAIRS.iter().map(|_| draw()).collect();
    run_copy_dynamics(&graph, &DEMO_PAIRS, mode, &phases, &lambda, t_max, dt)
}
