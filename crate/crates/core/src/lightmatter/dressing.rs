//! Autler-Townes dressing of the ¹P₁ manifold by a J = 0 partner, and the
//! hyperfine perturbation theory of the dressed M_J = 0 branch.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::angmom::HalfInt;
use crate::structure::{
    hyperfine_hamiltonian, BasisKind, Manifold, OperatorMatrix, StateLabel, StateSpace,
};

/// Resonant x-polarized interaction between manifold `a` (J = 1) and the
/// excited J = 0 manifold `b`, on the 4(2I+1)-dimensional a ⊕ b uncoupled
/// space:
/// H = H_hf(a) + (Ω_ab/2√2)(|a,M_J=−1⟩⟨b,0| − |a,M_J=+1⟩⟨b,0| + h.c.) ⊗ 𝟙_I.
///
/// Diagonalizing the bare electronic block gives the Autler-Townes branches
/// {0, 0, ±Ω_ab/2}: the bright combination of M_J = ±1 splits by ±Ω_ab/2,
/// while M_J = 0 and the orthogonal (dark) combination stay unshifted.
pub fn dressing_hamiltonian(a: &Manifold, b: &Manifold, rabi: f64) -> OperatorMatrix {
    assert_eq!(a.j, HalfInt::new(1), "dressed manifold must have J = 1");
    assert_eq!(b.j, HalfInt::new(0), "dressing partner must have J = 0");
    assert_eq!(a.i, b.i);
    let space = StateSpace::concat(&[
        (a.clone(), BasisKind::Uncoupled),
        (b.clone(), BasisKind::Uncoupled),
    ]);
    let dim = space.dimension();
    let mut h = DMatrix::zeros(dim, dim);
    let hhf = hyperfine_hamiltonian(a);
    let na = hhf.matrix.nrows();
    h.view_mut((0, 0), (na, na)).copy_from(&hhf.matrix);
    let g = Complex64::new(rabi / (2.0 * std::f64::consts::SQRT_2), 0.0);
    for m_i in a.i.projections() {
        let a_minus = space
            .index_of(&StateLabel::Uncoupled {
                manifold: a.label.clone(),
                m_j: HalfInt::new(-1),
                m_i,
            })
            .unwrap();
        let a_plus = space
            .index_of(&StateLabel::Uncoupled {
                manifold: a.label.clone(),
                m_j: HalfInt::new(1),
                m_i,
            })
            .unwrap();
        let b0 = space
            .index_of(&StateLabel::Uncoupled {
                manifold: b.label.clone(),
                m_j: HalfInt::new(0),
                m_i,
            })
            .unwrap();
        h[(a_minus, b0)] += g;
        h[(b0, a_minus)] += g;
        h[(a_plus, b0)] -= g;
        h[(b0, a_plus)] -= g;
    }
    OperatorMatrix::square(space, h)
}

/// Exact spectrum and nuclear-spin purity of the dressed M_J = 0 branch.
#[derive(Clone, Debug)]
pub struct DressedSpectrum {
    /// M_I in descending order.
    pub m_i: Vec<HalfInt>,
    /// Exact eigenvalue of the branch state dominated by |M_J=0, M_I⟩ (rad/µs).
    pub energy: Vec<f64>,
    /// ℱ(M_I) = |⟨n | M_J=0, M_I⟩|² for that eigenvector.
    pub overlap: Vec<f64>,
}

/// Diagonalizes the AC-Stark-shifted manifold
/// H = H_hf(a) + (Ω_ab/2√2)(P_{M_J=+1} − P_{M_J=−1}),
/// the level scheme in which the σ± components shift the M_J = ±1 states by
/// ±Ω_ab/(2√2) and the M_J = 0 ladder is spectrally isolated. For each M_I
/// the eigenvector of largest |⟨n|M_J=0,M_I⟩|² is reported.
pub fn dressed_mj0_spectrum(a: &Manifold, rabi: f64) -> DressedSpectrum {
    assert_eq!(a.j, HalfInt::new(1), "dressed manifold must have J = 1");
    let space = StateSpace::single(a, BasisKind::Uncoupled);
    let mut h = hyperfine_hamiltonian(a).matrix;
    let s = rabi / (2.0 * std::f64::consts::SQRT_2);
    for (k, lab) in space.states.iter().enumerate() {
        if let StateLabel::Uncoupled { m_j, .. } = lab {
            h[(k, k)] += Complex64::new(s * m_j.value(), 0.0);
        }
    }
    let op = OperatorMatrix::square(Arc::clone(&space), h);
    let (vals, vecs) = op.hermitian_eigen();
    let mut out = DressedSpectrum {
        m_i: Vec::new(),
        energy: Vec::new(),
        overlap: Vec::new(),
    };
    for m_i in a.i.projections() {
        let target = space
            .index_of(&StateLabel::Uncoupled {
                manifold: a.label.clone(),
                m_j: HalfInt::new(0),
                m_i,
            })
            .unwrap();
        let (best, ov) = (0..vals.len())
            .map(|k| (k, vecs[(target, k)].norm_sqr()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        out.m_i.push(m_i);
        out.energy.push(vals[best]);
        out.overlap.push(ov);
    }
    out
}

/// Q' = Q / (2IJ(2I−1)(2J−1)) (rad/µs); 0 when the denominator vanishes.
pub fn quadrupole_prime(m: &Manifold) -> f64 {
    let (iv, jv) = (m.i.value(), m.j.value());
    let denom = 2.0 * iv * jv * (2.0 * iv - 1.0) * (2.0 * jv - 1.0);
    if denom == 0.0 {
        0.0
    } else {
        m.q_hf / denom
    }
}

/// First- and second-order hyperfine shifts of the dressed |M_J=0, M_I⟩
/// states in the strong-dressing regime Ω_ab ≫ A, Q.
#[derive(Clone, Debug)]
pub struct PerturbativeShifts {
    pub m_i: Vec<HalfInt>,
    /// δE⁽¹⁾ = Q'[3(I(I+1) − M_I²) + I(I+1)J(J+1)] (rad/µs).
    pub first_order: Vec<f64>,
    /// δE⁽²⁾ = (2√2/Ω)[Σ_{M'}|⟨M',−1|H_hf|M,0⟩|² − Σ_{M'}|⟨M',+1|H_hf|M,0⟩|²]
    /// from the dressed ± branches at ±Ω/(2√2) (rad/µs).
    pub second_order: Vec<f64>,
}

impl PerturbativeShifts {
    pub fn total(&self) -> Vec<f64> {
        self.first_order
            .iter()
            .zip(&self.second_order)
            .map(|(a, b)| a + b)
            .collect()
    }
}

pub fn perturbative_shifts(a: &Manifold, rabi: f64) -> PerturbativeShifts {
    assert_eq!(a.j, HalfInt::new(1));
    let qp = quadrupole_prime(a);
    let (iv, jv) = (a.i.value(), a.j.value());
    let space = StateSpace::single(a, BasisKind::Uncoupled);
    let hhf = hyperfine_hamiltonian(a).matrix;
    let idx = |m_j: i32, m_i: HalfInt| {
        space
            .index_of(&StateLabel::Uncoupled {
                manifold: a.label.clone(),
                m_j: HalfInt::new(m_j),
                m_i,
            })
            .unwrap()
    };
    let mut out = PerturbativeShifts {
        m_i: Vec::new(),
        first_order: Vec::new(),
        second_order: Vec::new(),
    };
    for m_i in a.i.projections() {
        let mv = m_i.value();
        let de1 = qp * (3.0 * (iv * (iv + 1.0) - mv * mv) + iv * (iv + 1.0) * jv * (jv + 1.0));
        let col = idx(0, m_i);
        let mut s_plus = 0.0;
        let mut s_minus = 0.0;
        for m_ip in a.i.projections() {
            s_plus += hhf[(idx(1, m_ip), col)].norm_sqr();
            s_minus += hhf[(idx(-1, m_ip), col)].norm_sqr();
        }
        let de2 = (2.0 * std::f64::consts::SQRT_2 / rabi) * (s_minus - s_plus);
        out.m_i.push(m_i);
        out.first_order.push(de1);
        out.second_order.push(de2);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::species_registry;
    use crate::units::{mhz, to_mhz};
    use approx::assert_abs_diff_eq;

    fn sr() -> (Manifold, Manifold) {
        let sp = species_registry("Sr87").unwrap();
        (
            sp.manifold("1P1").unwrap().clone(),
            sp.manifold("1S0e").unwrap().clone(),
        )
    }

    #[test]
    fn electronic_block_eigenvalues_with_hyperfine_off() {
        // with A = Q = 0 the 40-dim spectrum per M_I is {0, 0, ±Ω/2};
        // the M_J = 0 states sit exactly at zero
        let (mut a, b) = sr();
        a.a_hf = 0.0;
        a.q_hf = 0.0;
        let rabi = mhz(1000.0);
        let h = dressing_hamiltonian(&a, &b, rabi);
        assert!(h.hermiticity_defect() < 1e-12);
        let (vals, _) = h.hermitian_eigen();
        let mut counts = [0usize; 3]; // -Ω/2, 0, +Ω/2
        for v in vals.iter() {
            if (v + rabi / 2.0).abs() < 1e-9 * rabi {
                counts[0] += 1;
            } else if v.abs() < 1e-9 * rabi {
                counts[1] += 1;
            } else if (v - rabi / 2.0).abs() < 1e-9 * rabi {
                counts[2] += 1;
            } else {
                panic!("unexpected eigenvalue {v}");
            }
        }
        assert_eq!(counts, [10, 20, 10]);
    }

    #[test]
    fn mj0_branch_is_isolated_at_1ghz() {
        let (a, _) = sr();
        let spec = dressed_mj0_spectrum(&a, mhz(1000.0));
        let min = spec.overlap.iter().cloned().fold(1.0, f64::min);
        assert!(min >= 0.99, "min overlap {min}");
    }

    #[test]
    fn overlaps_are_perfect_without_hyperfine() {
        let (mut a, _) = sr();
        a.a_hf = 0.0;
        a.q_hf = 0.0;
        let spec = dressed_mj0_spectrum(&a, mhz(1000.0));
        for (&ov, &e) in spec.overlap.iter().zip(spec.energy.iter()) {
            assert_abs_diff_eq!(ov, 1.0, epsilon = 1e-12);
            assert!(e.abs() < 1e-9);
        }
    }

    #[test]
    fn first_order_shift_values() {
        let (a, _) = sr();
        let qp = quadrupole_prime(&a);
        assert_abs_diff_eq!(to_mhz(qp), 39.0 / 72.0, epsilon = 1e-12);
        let pt = perturbative_shifts(&a, mhz(1000.0));
        // stretch M_I = ±9/2: 63 Q'; center M_I = ±1/2: 123 Q'
        let de = |m: i32| pt.first_order[pt.m_i.iter().position(|x| x.twice() == m).unwrap()];
        assert_abs_diff_eq!(de(9), 63.0 * qp, epsilon = 1e-9);
        assert_abs_diff_eq!(de(-9), 63.0 * qp, epsilon = 1e-9);
        assert_abs_diff_eq!(de(1), 123.0 * qp, epsilon = 1e-9);
        assert_abs_diff_eq!(to_mhz(de(9)), 34.125, epsilon = 1e-6);
        assert_abs_diff_eq!(to_mhz(de(1)), 66.625, epsilon = 1e-6);
        // pure quadratic spread 60 Q'
        assert_abs_diff_eq!(de(1) - de(9), 60.0 * qp, epsilon = 1e-9);
    }

    #[test]
    fn exact_matches_perturbation_theory_up_to_a_constant() {
        // the printed first-order formula carries a constant offset relative
        // to the expectation value; mean-centered curves must agree to within
        // 2% of the spread
        let (a, _) = sr();
        let rabi = mhz(1000.0);
        let exact = dressed_mj0_spectrum(&a, rabi).energy;
        let pt = perturbative_shifts(&a, rabi).total();
        let centered = |v: &[f64]| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| x - mean).collect::<Vec<_>>()
        };
        let (e, p) = (centered(&exact), centered(&pt));
        let spread = exact.iter().cloned().fold(f64::MIN, f64::max)
            - exact.iter().cloned().fold(f64::MAX, f64::min);
        let dev = e
            .iter()
            .zip(&p)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 0.02 * spread, "dev {dev} vs spread {spread}");
    }

    #[test]
    fn dressed_eigenstates_have_distinct_nuclear_character() {
        // overlap matrix between branch eigenvectors and |M_J=0, M_I⟩ targets
        // is a permutation of identity to 1e-2
        let (a, _) = sr();
        let spec = dressed_mj0_spectrum(&a, mhz(1000.0));
        for &ov in &spec.overlap {
            assert!((ov - 1.0).abs() < 1e-2);
        }
        // distinctness: energies must be distinct levels, not repeats
        let mut sorted = spec.energy.clone();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for w in sorted.windows(2) {
            assert!(w[1] - w[0] > 1e-9, "two M_I mapped to one eigenstate");
        }
    }

    #[test]
    fn yb_needs_more_rabi_than_sr() {
        let (sr_a, _) = sr();
        let yb = species_registry("Yb171").unwrap();
        let yb_a = yb.manifold("1P1").unwrap().clone();
        let rabi = mhz(1000.0);
        let f_sr = dressed_mj0_spectrum(&sr_a, rabi)
            .overlap
            .iter()
            .sum::<f64>()
            / 10.0;
        let f_yb = dressed_mj0_spectrum(&yb_a, rabi)
            .overlap
            .iter()
            .sum::<f64>()
            / 2.0;
        assert!(
            f_yb < f_sr,
            "at equal Rabi the Yb overlap {f_yb} should trail Sr {f_sr}"
        );
    }
}
