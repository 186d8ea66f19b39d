//! Laser-atom machinery: dipole couplings, AC-Stark light shifts,
//! adiabatic-elimination jump operators and their irreducible decomposition,
//! Autler-Townes dressing, and the two cancellation solvers.
//!
//! All operations are pure given immutable inputs; solvers are deterministic
//! and single-threaded.

mod cancel;
mod dressing;

pub use cancel::{
    cancel_quadrupole_shift, cancel_triplet_lightshift, evaluate_quadrupole_point,
    QuadrupoleCancellation, TripletCancellation,
};
pub use dressing::{
    dressed_mj0_spectrum, dressing_hamiltonian, perturbative_shifts, quadrupole_prime,
    DressedSpectrum, PerturbativeShifts,
};

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::angmom::{clebsch_gordan, oscillator_strength, HalfInt};
use crate::structure::{
    basis_transform, BasisKind, Manifold, OperatorMatrix, StateLabel, StateSpace,
    TransformDirection,
};

#[derive(Debug, Error)]
pub enum LightMatterError {
    #[error("dipole-forbidden pair {lower} -> {upper}: |ΔJ| must be <= 1 and not 0 -> 0")]
    DipoleForbidden { lower: String, upper: String },
    #[error("polarization vector has norm {0}, expected 1")]
    BadPolarization(f64),
    #[error("negative Rabi frequency {0}")]
    NegativeRabi(f64),
    #[error(
        "laser sits on resonance: |detuning from F'={f}| = {margin} rad/µs < Γ/2; \
         pass force=true to proceed anyway"
    )]
    ResonanceHit { f: HalfInt, margin: f64 },
    #[error("irreducible decomposition requires a J=0 lower manifold, got J={0}")]
    UnsupportedDecomposition(HalfInt),
    #[error("{context}: no minimum inside the search bracket")]
    NoMinimum { context: String },
}

/// One laser field coupling two manifolds.
///
/// `rabi` multiplies the unit-normalized reduced dipole element (all relative
/// strengths enter through oscillator-strength and Clebsch-Gordan factors);
/// `detuning` follows Δ = ω_laser − ω_transition, measured from the
/// hyperfine-free line center of the upper manifold. Both in rad/µs.
#[derive(Clone, Debug)]
pub struct LaserCoupling {
    pub lower: Manifold,
    pub upper: Manifold,
    pub rabi: f64,
    pub detuning: f64,
    /// Spherical components (ε_-1, ε_0, ε_+1), unit norm.
    pub polarization: [Complex64; 3],
}

impl LaserCoupling {
    /// π-polarized coupling (ε = e_0).
    pub fn pi(lower: &Manifold, upper: &Manifold, rabi: f64, detuning: f64) -> Self {
        LaserCoupling {
            lower: lower.clone(),
            upper: upper.clone(),
            rabi,
            detuning,
            polarization: [
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        }
    }

    pub fn validate(&self) -> Result<(), LightMatterError> {
        let norm2: f64 = self.polarization.iter().map(|c| c.norm_sqr()).sum();
        if (norm2.sqrt() - 1.0).abs() > 1e-12 {
            return Err(LightMatterError::BadPolarization(norm2.sqrt()));
        }
        if self.rabi < 0.0 {
            return Err(LightMatterError::NegativeRabi(self.rabi));
        }
        dipole_allowed(&self.lower, &self.upper)?;
        Ok(())
    }

    /// Detuning from hyperfine level F' of the upper manifold (rad/µs).
    pub fn detuning_from(&self, f_upper: HalfInt) -> f64 {
        self.detuning - self.upper.hyperfine_level(f_upper)
    }

    /// min over F' of |Δ_F'| / Γ, the adiabatic-elimination margin; infinite
    /// for a Γ = 0 upper manifold.
    pub fn resonance_margin(&self) -> f64 {
        if self.upper.gamma == 0.0 {
            return f64::INFINITY;
        }
        self.upper
            .f_values()
            .iter()
            .map(|&f| self.detuning_from(f).abs() / self.upper.gamma)
            .fold(f64::INFINITY, f64::min)
    }
}

fn dipole_allowed(lower: &Manifold, upper: &Manifold) -> Result<(), LightMatterError> {
    let dj = (upper.j.twice() - lower.j.twice()).abs();
    if dj > 2 || (lower.j.twice() == 0 && upper.j.twice() == 0) {
        return Err(LightMatterError::DipoleForbidden {
            lower: lower.label.clone(),
            upper: upper.label.clone(),
        });
    }
    Ok(())
}

/// Raising dipole component D_q from the lower to the upper manifold, both in
/// their coupled bases, with unit reduced matrix element:
/// ⟨F', M+q | D_q | F, M⟩ = 𝒪^{J'F'}_{JF} ⟨F', M+q | 1, q; F, M⟩.
/// With this normalization Σ_{q,F,M} |⟨F',M'|D_q|F,M⟩|² = 1 for every upper
/// sublevel — all excited states decay at the full rate Γ.
pub fn dipole_coupling(
    lower: &Manifold,
    upper: &Manifold,
    q: i32,
) -> Result<OperatorMatrix, LightMatterError> {
    assert!((-1..=1).contains(&q), "spherical component q must be -1, 0, or +1");
    dipole_allowed(lower, upper)?;
    let dom = StateSpace::single(lower, BasisKind::Coupled);
    let cod = StateSpace::single(upper, BasisKind::Coupled);
    let mut d = DMatrix::zeros(cod.dimension(), dom.dimension());
    let hq = HalfInt::new(q);
    let one = HalfInt::new(1);
    for (r, lab_u) in cod.states.iter().enumerate() {
        let (fp, mp) = match lab_u {
            StateLabel::Coupled { f, m_f, .. } => (*f, *m_f),
            _ => unreachable!(),
        };
        for (c, lab_l) in dom.states.iter().enumerate() {
            let (f, m) = match lab_l {
                StateLabel::Coupled { f, m_f, .. } => (*f, *m_f),
                _ => unreachable!(),
            };
            if m + hq != mp {
                continue;
            }
            let o = oscillator_strength(upper.j, fp, lower.j, f, lower.i);
            if o == 0.0 {
                continue;
            }
            d[(r, c)] = Complex64::new(o * clebsch_gordan(one, hq, f, m, fp, mp), 0.0);
        }
    }
    Ok(OperatorMatrix::map(dom, cod, d))
}

/// ε·D = Σ_q ε_q D_q, lower-coupled → upper-coupled.
pub fn polarization_coupling(c: &LaserCoupling) -> Result<OperatorMatrix, LightMatterError> {
    c.validate()?;
    let mut acc: Option<OperatorMatrix> = None;
    for (k, q) in [-1i32, 0, 1].iter().enumerate() {
        let eps = c.polarization[k];
        if eps.norm() == 0.0 {
            continue;
        }
        let term = dipole_coupling(&c.lower, &c.upper, *q)?.scale(eps);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    Ok(acc.expect("polarization vector cannot be all zero"))
}

/// Projector onto hyperfine level F' inside the upper manifold's coupled space.
fn f_projector(space: &Arc<StateSpace>, f_upper: HalfInt) -> DMatrix<Complex64> {
    let dim = space.dimension();
    let mut p = DMatrix::zeros(dim, dim);
    for (k, lab) in space.states.iter().enumerate() {
        if let StateLabel::Coupled { f, .. } = lab {
            if *f == f_upper {
                p[(k, k)] = Complex64::new(1.0, 0.0);
            }
        }
    }
    p
}

/// AC-Stark light-shift operator on the lower manifold, in its uncoupled
/// basis (rad/µs):
/// V = Σ_{F'} (Ω²/4Δ_{F'}) (ε·D)† P_{F'} (ε·D),
/// summed exactly over hyperfine levels, no perturbative truncation.
///
/// Errors with [`LightMatterError::ResonanceHit`] when some |Δ_{F'}| < Γ/2,
/// unless `force` is set.
pub fn light_shift_operator(
    c: &LaserCoupling,
    force: bool,
) -> Result<OperatorMatrix, LightMatterError> {
    let e = polarization_coupling(c)?;
    let upper_space = Arc::clone(e.codomain());
    let mut v_coupled = DMatrix::zeros(e.domain().dimension(), e.domain().dimension());
    for f in c.upper.f_values() {
        let delta = c.detuning_from(f);
        if !force && delta.abs() < c.upper.gamma / 2.0 {
            return Err(LightMatterError::ResonanceHit {
                f,
                margin: delta.abs(),
            });
        }
        let p = f_projector(&upper_space, f);
        let weight = Complex64::new(c.rabi * c.rabi / (4.0 * delta), 0.0);
        v_coupled += (e.matrix.adjoint() * &p * &e.matrix) * weight;
    }
    let v = OperatorMatrix::square(Arc::clone(e.domain()), v_coupled);
    Ok(to_uncoupled(&c.lower, &v))
}

/// Adiabatic-elimination jump operators [W_-1, W_0, W_+1] on the lower
/// manifold (uncoupled basis, dimensionless):
/// W_q = Σ_{F'} [(Ω/2)/(Δ_{F'} + iΓ/2)] D_q† P_{F'} (ε·D).
/// The master-equation dissipator uses these with rate prefactor Γ_upper.
pub fn jump_operators(c: &LaserCoupling) -> Result<[OperatorMatrix; 3], LightMatterError> {
    let e = polarization_coupling(c)?;
    let upper_space = Arc::clone(e.codomain());
    let projectors: Vec<(f64, DMatrix<Complex64>)> = c
        .upper
        .f_values()
        .iter()
        .map(|&f| (c.detuning_from(f), f_projector(&upper_space, f)))
        .collect();
    let mut out = Vec::with_capacity(3);
    for q in [-1i32, 0, 1] {
        let dq = dipole_coupling(&c.lower, &c.upper, q)?;
        let mut w = DMatrix::zeros(e.domain().dimension(), e.domain().dimension());
        for (delta, p) in &projectors {
            let coeff = Complex64::new(c.rabi / 2.0, 0.0)
                / Complex64::new(*delta, c.upper.gamma / 2.0);
            w += (dq.matrix.adjoint() * p * &e.matrix) * coeff;
        }
        let w = OperatorMatrix::square(Arc::clone(e.domain()), w);
        out.push(to_uncoupled(&c.lower, &w));
    }
    Ok([out.remove(0), out.remove(0), out.remove(0)])
}

/// Conjugate an operator on the lower manifold's coupled space into its
/// uncoupled basis. Restricted manifolds stay coupled (their uncoupled basis
/// is undefined).
fn to_uncoupled(lower: &Manifold, op: &OperatorMatrix) -> OperatorMatrix {
    if lower.f_restriction.is_some() {
        return op.clone();
    }
    let t = basis_transform(lower, TransformDirection::UncoupledToCoupled);
    t.adjoint().compose(op).compose(&t)
}

/// Per-F' projection of the jump-operator geometry onto the irreducible
/// operator basis {𝟙, F, rank-2}, for a J = 0 lower manifold:
/// D_q† P_{F'} D_q' = C⁰(e_q*·e_q')𝟙 + iC¹(e_q*×e_q')·F
///                  + C²[sym((e_q*·F)(e_q'·F)) − (1/3)(e_q*·e_q')F²].
#[derive(Clone, Debug)]
pub struct IrreducibleDecomposition {
    pub f_upper: Vec<HalfInt>,
    /// C^(0), C^(1), C^(2) per F' (dimensionless).
    pub c0: Vec<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    /// Hyperfine offsets δ_{F'} = −E_{F'} so that Δ_{F'} = Δ + δ_{F'} (rad/µs).
    pub deltas: Vec<f64>,
    /// β^(i) = Σ_{F'} C^(i) δ_{F'} (rad/µs).
    pub beta: [f64; 3],
    /// γ^(i) = (Γ/2) Σ_{F'} C^(i) (rad/µs).
    pub gamma: [f64; 3],
    /// Worst reconstruction error max|B − Σ C^(K) M_K| over all (q,q',F').
    pub reconstruction_residual: f64,
}

/// Cartesian components of the spherical unit vectors e_q.
fn spherical_vector(q: i32) -> [Complex64; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match q {
        -1 => [Complex64::new(s, 0.0), Complex64::new(0.0, -s), Complex64::new(0.0, 0.0)],
        0 => [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        1 => [Complex64::new(-s, 0.0), Complex64::new(0.0, -s), Complex64::new(0.0, 0.0)],
        _ => unreachable!(),
    }
}

fn cdot(a: &[Complex64; 3], b: &[Complex64; 3]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn ccross(a: &[Complex64; 3], b: &[Complex64; 3]) -> [Complex64; 3] {
    let ac: Vec<Complex64> = a.iter().map(|x| x.conj()).collect();
    [
        ac[1] * b[2] - ac[2] * b[1],
        ac[2] * b[0] - ac[0] * b[2],
        ac[0] * b[1] - ac[1] * b[0],
    ]
}

pub fn irreducible_decomposition(
    c: &LaserCoupling,
) -> Result<IrreducibleDecomposition, LightMatterError> {
    c.validate()?;
    if c.lower.j.twice() != 0 {
        return Err(LightMatterError::UnsupportedDecomposition(c.lower.j));
    }
    let lower_space = StateSpace::single(&c.lower, BasisKind::Coupled);
    let dim = lower_space.dimension();
    let upper_space = StateSpace::single(&c.upper, BasisKind::Coupled);

    // F components on the lower manifold (single F = I)
    let fz = crate::structure::angular_momentum_operator(&lower_space, crate::structure::AngularOperator::FZ).matrix;
    let fp = crate::structure::angular_momentum_operator(&lower_space, crate::structure::AngularOperator::FPlus).matrix;
    let fm = crate::structure::angular_momentum_operator(&lower_space, crate::structure::AngularOperator::FMinus).matrix;
    let half = Complex64::new(0.5, 0.0);
    let fx = (&fp + &fm) * half;
    let fy = (&fp - &fm) * Complex64::new(0.0, -0.5);
    let fcomp = [fx, fy, fz];
    let f2 = &fcomp[0] * &fcomp[0] + &fcomp[1] * &fcomp[1] + &fcomp[2] * &fcomp[2];

    let vec_dot_f = |v: &[Complex64; 3]| -> DMatrix<Complex64> {
        let mut acc = DMatrix::zeros(dim, dim);
        for k in 0..3 {
            acc += &fcomp[k] * v[k];
        }
        acc
    };

    let dq: Vec<DMatrix<Complex64>> = [-1i32, 0, 1]
        .iter()
        .map(|&q| dipole_coupling(&c.lower, &c.upper, q).map(|d| d.matrix))
        .collect::<Result<_, _>>()?;

    let mut out = IrreducibleDecomposition {
        f_upper: c.upper.f_values(),
        c0: Vec::new(),
        c1: Vec::new(),
        c2: Vec::new(),
        deltas: Vec::new(),
        beta: [0.0; 3],
        gamma: [0.0; 3],
        reconstruction_residual: 0.0,
    };

    for &f in &out.f_upper.clone() {
        let p = f_projector(&upper_space, f);
        // data and model matrices for all 9 (q, q') pairs
        let mut gram = [[0.0f64; 3]; 3];
        let mut rhs = [0.0f64; 3];
        let mut models: Vec<[DMatrix<Complex64>; 3]> = Vec::with_capacity(9);
        let mut data: Vec<DMatrix<Complex64>> = Vec::with_capacity(9);
        for (iq, _) in [-1i32, 0, 1].iter().enumerate() {
            for (iqp, _) in [-1i32, 0, 1].iter().enumerate() {
                let eq = spherical_vector([-1, 0, 1][iq]);
                let eqp = spherical_vector([-1, 0, 1][iqp]);
                let b = dq[iq].adjoint() * &p * &dq[iqp];
                let dot = cdot(&eq, &eqp);
                let m0 = DMatrix::identity(dim, dim) * dot;
                let m1 = vec_dot_f(&ccross(&eq, &eqp)) * Complex64::new(0.0, 1.0);
                let a1 = vec_dot_f(&[eq[0].conj(), eq[1].conj(), eq[2].conj()]);
                let a2 = vec_dot_f(&eqp);
                let m2 = (&a1 * &a2 + &a2 * &a1) * half - &f2 * (dot / 3.0);
                for (k, mk) in [&m0, &m1, &m2].iter().enumerate() {
                    rhs[k] += mk
                        .iter()
                        .zip(b.iter())
                        .map(|(x, y)| (x.conj() * y).re)
                        .sum::<f64>();
                    for (l, ml) in [&m0, &m1, &m2].iter().enumerate() {
                        gram[k][l] += mk
                            .iter()
                            .zip(ml.iter())
                            .map(|(x, y)| (x.conj() * y).re)
                            .sum::<f64>();
                    }
                }
                models.push([m0, m1, m2]);
                data.push(b);
            }
        }
        let coeffs = solve3(&gram, &rhs);
        for (b, ms) in data.iter().zip(models.iter()) {
            let recon = &ms[0] * Complex64::new(coeffs[0], 0.0)
                + &ms[1] * Complex64::new(coeffs[1], 0.0)
                + &ms[2] * Complex64::new(coeffs[2], 0.0);
            let resid = (b - recon).iter().map(|x| x.norm()).fold(0.0, f64::max);
            out.reconstruction_residual = out.reconstruction_residual.max(resid);
        }
        let delta = -c.upper.hyperfine_level(f);
        out.deltas.push(delta);
        out.c0.push(coeffs[0]);
        out.c1.push(coeffs[1]);
        out.c2.push(coeffs[2]);
        for (k, &ck) in coeffs.iter().enumerate() {
            out.beta[k] += ck * delta;
            out.gamma[k] += ck * c.upper.gamma / 2.0;
        }
    }
    Ok(out)
}

/// Least-squares solve of the 3x3 normal equations. Rank-K model operators
/// vanish identically on spaces too small to support them (rank 2 on F = 1/2);
/// those components are dropped and their coefficient reported as 0.
fn solve3(g: &[[f64; 3]; 3], r: &[f64; 3]) -> [f64; 3] {
    let scale = (0..3).map(|k| g[k][k]).fold(0.0, f64::max);
    let active: Vec<usize> = (0..3).filter(|&k| g[k][k] > 1e-14 * scale).collect();
    let n = active.len();
    let gm = nalgebra::DMatrix::from_fn(n, n, |i, j| g[active[i]][active[j]]);
    let rv = nalgebra::DVector::from_fn(n, |i, _| r[active[i]]);
    let sol = gm.lu().solve(&rv).expect("irreducible basis is degenerate");
    let mut out = [0.0; 3];
    for (i, &k) in active.iter().enumerate() {
        out[k] = sol[i];
    }
    out
}

/// Jump operators rebuilt from the decomposition, truncated at order 1/Δ²:
/// W_q ≈ (Ω/2Δ) Σ_K (Σ_{F'}C^K) M_K(q) − (Ω/2Δ²) Σ_K (β^K + iγ^K) M_K(q).
/// Diagnostic counterpart of [`jump_operators`]; the exact operators are the
/// production path.
pub fn reconstructed_jump_operators(
    c: &LaserCoupling,
    decomp: &IrreducibleDecomposition,
) -> Result<[OperatorMatrix; 3], LightMatterError> {
    c.validate()?;
    let lower_space = StateSpace::single(&c.lower, BasisKind::Coupled);
    let dim = lower_space.dimension();
    let fz = crate::structure::angular_momentum_operator(&lower_space, crate::structure::AngularOperator::FZ).matrix;
    let fp = crate::structure::angular_momentum_operator(&lower_space, crate::structure::AngularOperator::FPlus).matrix;
    let fm = crate::structure::angular_momentum_operator(&lower_space, crate::structure::AngularOperator::FMinus).matrix;
    let half = Complex64::new(0.5, 0.0);
    let fx = (&fp + &fm) * half;
    let fy = (&fp - &fm) * Complex64::new(0.0, -0.5);
    let fcomp = [fx, fy, fz];
    let f2 = &fcomp[0] * &fcomp[0] + &fcomp[1] * &fcomp[1] + &fcomp[2] * &fcomp[2];
    let vec_dot_f = |v: &[Complex64; 3]| -> DMatrix<Complex64> {
        let mut acc = DMatrix::zeros(dim, dim);
        for k in 0..3 {
            acc += &fcomp[k] * v[k];
        }
        acc
    };
    let eps = &c.polarization;
    let eps_cart = {
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for (k, q) in [-1i32, 0, 1].iter().enumerate() {
            let e = spherical_vector(*q);
            for x in 0..3 {
                acc[x] += eps[k] * e[x];
            }
        }
        acc
    };
    let csum: Vec<f64> = (0..3)
        .map(|k| match k {
            0 => decomp.c0.iter().sum(),
            1 => decomp.c1.iter().sum(),
            _ => decomp.c2.iter().sum(),
        })
        .collect();
    let delta = c.detuning;
    let lead = Complex64::new(c.rabi / (2.0 * delta), 0.0);
    let corr = Complex64::new(c.rabi / (2.0 * delta * delta), 0.0);
    let mut out = Vec::with_capacity(3);
    for q in [-1i32, 0, 1] {
        let eq = spherical_vector(q);
        let dot = cdot(&eq, &eps_cart);
        let m0 = DMatrix::identity(dim, dim) * dot;
        let m1 = vec_dot_f(&ccross(&eq, &eps_cart)) * Complex64::new(0.0, 1.0);
        let a1 = vec_dot_f(&[eq[0].conj(), eq[1].conj(), eq[2].conj()]);
        let a2 = vec_dot_f(&eps_cart);
        let m2 = (&a1 * &a2 + &a2 * &a1) * half - &f2 * (dot / 3.0);
        let ms = [m0, m1, m2];
        let mut w = DMatrix::zeros(dim, dim);
        for k in 0..3 {
            let bk = Complex64::new(decomp.beta[k], decomp.gamma[k]);
            w += &ms[k] * (lead * Complex64::new(csum[k], 0.0) - corr * bk);
        }
        let w = OperatorMatrix::square(Arc::clone(&lower_space), w);
        out.push(to_uncoupled(&c.lower, &w));
    }
    Ok([out.remove(0), out.remove(0), out.remove(0)])
}

/// Per-M_I light-shift profile of the |M_J=0, M_I⟩ states of `lower` under a
/// π-polarized coupling to `upper`, per unit λ = Ω²/(4Δ). Multiply by λ to
/// get the shift in rad/µs.
pub fn lightshift_profile_mj0(
    lower: &Manifold,
    upper: &Manifold,
) -> Result<Vec<f64>, LightMatterError> {
    // Ω = 2, Δ = 1 makes λ = 1 exactly
    let c = LaserCoupling::pi(lower, upper, 2.0, 1.0);
    let v = light_shift_operator(&c, false)?;
    let space = v.domain();
    let mut out = Vec::new();
    for m_i in lower.i.projections() {
        let idx = space
            .index_of(&StateLabel::Uncoupled {
                manifold: lower.label.clone(),
                m_j: HalfInt::new(0),
                m_i,
            })
            .expect("lower manifold lacks an M_J = 0 ladder");
        out.push(v.matrix[(idx, idx)].re);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
