//! Density-matrix evolution under Lindblad master equations, plus the
//! closed-form coherence-transfer results used as oracles.
//!
//! Evolution is classical fixed-step RK4 with automated step halving until
//! the final state stops moving: dimensions here are tiny and deterministic,
//! reproducible output matters more than speed. `evolve` is reentrant; many
//! trajectories may run concurrently with no shared state.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::structure::{StateLabel, StateSpace};

/// Largest Hilbert dimension `evolve` accepts.
pub const DIMENSION_CAP: usize = 256;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("dimension {0} exceeds the integrator cap of {DIMENSION_CAP}")]
    DimensionCap(usize),
    #[error("dimension mismatch: state is {state}, operator is {operator}")]
    DimensionMismatch { state: usize, operator: usize },
    #[error("step-size underflow: {steps} steps still change the final state by {drift:.3e}")]
    StepUnderflow { steps: usize, drift: f64 },
    #[error("dissipator rate {0} is negative")]
    NegativeRate(f64),
    #[error("invalid density matrix: {0}")]
    BadState(String),
}

/// Hermitian, unit-trace complex matrix with fidelity and observable
/// accessors.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub space: Arc<StateSpace>,
    pub matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(space: Arc<StateSpace>, psi: &DVector<Complex64>) -> Self {
        assert_eq!(psi.len(), space.dimension());
        let norm = psi.norm();
        let psi = psi / Complex64::new(norm, 0.0);
        let matrix = &psi * psi.adjoint();
        DensityMatrix { space, matrix }
    }

    pub fn maximally_mixed(space: Arc<StateSpace>) -> Self {
        let d = space.dimension();
        let matrix = DMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0);
        DensityMatrix { space, matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.matrix.adjoint();
        (&self.matrix - adj).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let se = nalgebra::SymmetricEigen::new(self.matrix.clone());
        se.eigenvalues.iter().cloned().fold(f64::MAX, f64::min)
    }

    /// ℱ = ⟨ψ|ρ|ψ⟩ against a pure state.
    pub fn fidelity(&self, psi: &DVector<Complex64>) -> Result<f64, DynamicsError> {
        if psi.len() != self.dim() {
            return Err(DynamicsError::DimensionMismatch {
                state: self.dim(),
                operator: psi.len(),
            });
        }
        Ok((psi.adjoint() * &self.matrix * psi)[(0, 0)].re)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if (self.trace() - 1.0).abs() > 1e-10 {
            return Err(DynamicsError::BadState(format!("trace {}", self.trace())));
        }
        if self.hermiticity_defect() > 1e-12 {
            return Err(DynamicsError::BadState(format!(
                "hermiticity defect {}",
                self.hermiticity_defect()
            )));
        }
        if self.min_eigenvalue() < -1e-9 {
            return Err(DynamicsError::BadState(format!(
                "negative eigenvalue {}",
                self.min_eigenvalue()
            )));
        }
        Ok(())
    }
}

/// A Lindblad evolution: dρ/dt = −i[H,ρ] + Σ_k Γ_k (L_k ρ L_k† − ½{L_k†L_k, ρ}),
/// with H in rad/µs, Γ_k in rad/µs, L_k dimensionless, times in µs.
#[derive(Clone, Debug)]
pub struct LindbladProblem {
    pub space: Arc<StateSpace>,
    pub hamiltonian: DMatrix<Complex64>,
    pub dissipators: Vec<(f64, DMatrix<Complex64>)>,
    pub t_final: f64,
    /// Output times (µs), each in [0, t_final]. Empty means [t_final].
    pub sample_times: Vec<f64>,
    /// Final-state convergence target for the step-halving loop (max-norm
    /// between successive refinements).
    pub convergence: f64,
}

impl LindbladProblem {
    pub fn new(
        space: Arc<StateSpace>,
        hamiltonian: DMatrix<Complex64>,
        dissipators: Vec<(f64, DMatrix<Complex64>)>,
        t_final: f64,
    ) -> Self {
        LindbladProblem {
            space,
            hamiltonian,
            dissipators,
            t_final,
            sample_times: Vec::new(),
            convergence: 1e-9,
        }
    }
}

/// Result of one integration.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// max |tr ρ − 1| along the trajectory. Reported, never renormalized away.
    pub trace_drift: f64,
    /// Steps of the accepted refinement.
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory has at least one sample")
    }
}

struct Rhs {
    /// −iH − ½ Σ Γ L†L, the no-jump drift.
    drift: DMatrix<Complex64>,
    /// (Γ_k, L_k, L_k†)
    jumps: Vec<(f64, DMatrix<Complex64>, DMatrix<Complex64>)>,
}

impl Rhs {
    fn build(p: &LindbladProblem) -> Rhs {
        let dim = p.hamiltonian.nrows();
        let mut drift = &p.hamiltonian * Complex64::new(0.0, -1.0);
        let mut jumps = Vec::with_capacity(p.dissipators.len());
        for (rate, l) in &p.dissipators {
            let ld = l.adjoint();
            drift += (&ld * l) * Complex64::new(-0.5 * rate, 0.0);
            jumps.push((*rate, l.clone(), ld));
        }
        debug_assert_eq!(drift.nrows(), dim);
        Rhs { drift, jumps }
    }

    /// dρ/dt = K ρ + ρ K† + Σ Γ L ρ L†, with K the no-jump drift.
    fn eval(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = &self.drift * rho + rho * self.drift.adjoint();
        for (rate, l, ld) in &self.jumps {
            out += (l * rho * ld) * Complex64::new(*rate, 0.0);
        }
        out
    }
}

/// One full trajectory at a fixed step count, sampling at the requested
/// times. Exposed for diagnostics (integrator-order checks); use [`evolve`]
/// for converged results.
pub fn evolve_fixed(
    problem: &LindbladProblem,
    rho0: &DensityMatrix,
    total_steps: usize,
) -> Result<Trajectory, DynamicsError> {
    let dim = rho0.dim();
    if dim > DIMENSION_CAP {
        return Err(DynamicsError::DimensionCap(dim));
    }
    if problem.hamiltonian.nrows() != dim {
        return Err(DynamicsError::DimensionMismatch {
            state: dim,
            operator: problem.hamiltonian.nrows(),
        });
    }
    for (rate, l) in &problem.dissipators {
        if *rate < 0.0 {
            return Err(DynamicsError::NegativeRate(*rate));
        }
        if l.nrows() != dim {
            return Err(DynamicsError::DimensionMismatch {
                state: dim,
                operator: l.nrows(),
            });
        }
    }
    let rhs = Rhs::build(problem);
    let mut samples = if problem.sample_times.is_empty() {
        vec![problem.t_final]
    } else {
        problem.sample_times.clone()
    };
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut rho = rho0.matrix.clone();
    let mut t = 0.0;
    let mut out_times = Vec::with_capacity(samples.len());
    let mut out_states = Vec::with_capacity(samples.len());
    let mut trace_drift = (rho.trace().re - 1.0).abs();

    for &target in &samples {
        let span = target - t;
        let n = ((span / problem.t_final.max(f64::MIN_POSITIVE)) * total_steps as f64).ceil()
            as usize;
        let n = n.max(if span > 0.0 { 1 } else { 0 });
        if n > 0 {
            let h = span / n as f64;
            let hc = Complex64::new(h, 0.0);
            let half = Complex64::new(0.5 * h, 0.0);
            let sixth = Complex64::new(h / 6.0, 0.0);
            let two = Complex64::new(2.0, 0.0);
            for _ in 0..n {
                let k1 = rhs.eval(&rho);
                let k2 = rhs.eval(&(&rho + &k1 * half));
                let k3 = rhs.eval(&(&rho + &k2 * half));
                let k4 = rhs.eval(&(&rho + &k3 * hc));
                rho += (k1 + k2 * two + k3 * two + k4) * sixth;
            }
        }
        t = target;
        trace_drift = trace_drift.max((rho.trace().re - 1.0).abs());
        out_times.push(t);
        out_states.push(DensityMatrix {
            space: Arc::clone(&rho0.space),
            matrix: rho.clone(),
        });
    }
    Ok(Trajectory {
        times: out_times,
        states: out_states,
        trace_drift,
        steps: total_steps,
    })
}

/// Fixed-step RK4 with automated step halving: the step count doubles until
/// no sampled state changes by more than `problem.convergence` in max norm
/// (which bounds the fidelity change at every sample by ~the same amount).
/// The trace drift of the accepted run is reported in the trajectory, never
/// silently renormalized.
pub fn evolve(problem: &LindbladProblem, rho0: &DensityMatrix) -> Result<Trajectory, DynamicsError> {
    rho0.validate()?;
    // initial step from the generator's magnitude
    let mut scale = problem.hamiltonian.norm();
    for (rate, l) in &problem.dissipators {
        scale += rate * l.norm_squared();
    }
    let mut steps = if scale > 0.0 {
        ((problem.t_final * scale / 2.0).ceil() as usize).clamp(64, 1 << 16)
    } else {
        64
    };
    let mut prev = evolve_fixed(problem, rho0, steps)?;
    const MAX_STEPS: usize = 1 << 24;
    loop {
        steps *= 2;
        let next = evolve_fixed(problem, rho0, steps)?;
        let diff = next
            .states
            .iter()
            .zip(&prev.states)
            .map(|(a, b)| {
                (&a.matrix - &b.matrix)
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diff < problem.convergence {
            return Ok(next);
        }
        if steps >= MAX_STEPS {
            return Err(DynamicsError::StepUnderflow { steps, drift: diff });
        }
        prev = next;
    }
}

/// Closed-form steady-state fidelity of coherence transfer through
/// spontaneous decay: excited levels shifted by δ_m decay at Γ to their
/// ground partners; an initial superposition Σ c_m |e_m⟩ ends with
/// ℱ = Σ_{m,m'} |c_m|² |c_m'|² Γ² / (Γ² + (δ_m − δ_m')²).
pub fn coherence_transfer_fidelity(deltas: &[f64], gamma: f64, weights: &[Complex64]) -> f64 {
    assert!(gamma > 0.0, "decay rate must be positive");
    assert_eq!(deltas.len(), weights.len());
    let norm2: f64 = weights.iter().map(|w| w.norm_sqr()).sum();
    let mut f = 0.0;
    for (m, wm) in weights.iter().enumerate() {
        for (mp, wmp) in weights.iter().enumerate() {
            let d = deltas[m] - deltas[mp];
            f += wm.norm_sqr() * wmp.norm_sqr() * gamma * gamma / (gamma * gamma + d * d);
        }
    }
    f / (norm2 * norm2)
}

/// The 2N-dimensional quench problem behind the analytic formula: excited
/// levels at δ_m (rad/µs) over ground partners, one collective jump operator
/// L = Σ_m |g_m⟩⟨e_m| at rate Γ. Returns the problem, the initial state
/// (superposition Σ w_m |e_m⟩), and the target Σ w_m |g_m⟩.
pub fn coherence_transfer_problem(
    deltas: &[f64],
    gamma: f64,
    weights: &[Complex64],
    t_final: f64,
) -> (LindbladProblem, DensityMatrix, DVector<Complex64>) {
    assert_eq!(deltas.len(), weights.len());
    let n = deltas.len();
    let dim = 2 * n;
    let mut labels = Vec::with_capacity(dim);
    for k in 0..n {
        labels.push(StateLabel::Custom(format!("e{k}")));
    }
    for k in 0..n {
        labels.push(StateLabel::Custom(format!("g{k}")));
    }
    let space = StateSpace::ad_hoc(labels);
    let mut h = DMatrix::zeros(dim, dim);
    let mut l = DMatrix::zeros(dim, dim);
    for (k, &d) in deltas.iter().enumerate() {
        h[(k, k)] = Complex64::new(d, 0.0);
        l[(n + k, k)] = Complex64::new(1.0, 0.0);
    }
    let problem = LindbladProblem::new(Arc::clone(&space), h, vec![(gamma, l)], t_final);
    let norm = weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
    let mut psi0 = DVector::zeros(dim);
    let mut target = DVector::zeros(dim);
    for (k, w) in weights.iter().enumerate() {
        psi0[k] = w / Complex64::new(norm, 0.0);
        target[n + k] = w / Complex64::new(norm, 0.0);
    }
    let rho0 = DensityMatrix::from_pure(space, &psi0);
    (problem, rho0, target)
}

/// Trajectory export: one CSV row per sample with columns
/// (t_us, fidelity, trace, purity), fidelity measured against `target`.
pub fn trajectory_csv(traj: &Trajectory, target: &DVector<Complex64>) -> String {
    let mut out = String::from("t_us,fidelity,trace,purity\n");
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let f = rho.fidelity(target).expect("target dimension matches trajectory");
        out.push_str(&format!("{},{},{},{}\n", t, f, rho.trace(), rho.purity()));
    }
    out
}
