//! Atomic structure: electronic manifolds, hyperfine Hamiltonians, state
//! spaces with explicit basis ordering, angular-momentum operators, and
//! coupled ↔ uncoupled transforms.
//!
//! Basis ordering is deterministic everywhere: manifolds in registry order;
//! within a manifold, coupled states sorted by descending F then descending
//! M_F, uncoupled states by descending M_J then descending M_I.

mod registry;

pub use registry::{species_registry, species_from_config, Species};

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angmom::{clebsch_gordan, HalfInt};

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("unknown species {0:?} (built-ins: Sr87, Yb171)")]
    UnknownSpecies(String),
    #[error("species config {path}: {message}")]
    BadSpeciesConfig { path: String, message: String },
    #[error("manifold {label:?}: {message}")]
    BadManifold { label: String, message: String },
    #[error("unknown manifold key {0:?} for species {1:?}")]
    UnknownManifold(String, String),
}

/// One electronic level of an atom: angular momenta, hyperfine constants,
/// and decay rate. Frequencies are angular, rad/µs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifold {
    /// Full term label, e.g. "5s5p 1P1".
    pub label: String,
    /// Short key used in override paths, e.g. "1P1".
    pub key: String,
    pub j: HalfInt,
    pub i: HalfInt,
    /// Magnetic-dipole hyperfine constant A (rad/µs). Unused when J = 0.
    pub a_hf: f64,
    /// Electric-quadrupole constant Q (rad/µs). Unused when I < 1 or J < 1.
    pub q_hf: f64,
    /// Population decay rate Γ (rad/µs), ≥ 0.
    pub gamma: f64,
    /// Optical-scale offset, bookkeeping only (rad/µs).
    pub energy_offset: f64,
    /// When set, only this hyperfine level represents the manifold
    /// (single-level approximation for levels whose splittings are unknown).
    pub f_restriction: Option<HalfInt>,
}

impl Manifold {
    /// Hyperfine F values of this manifold, descending, honoring any
    /// single-level restriction.
    pub fn f_values(&self) -> Vec<HalfInt> {
        if let Some(f) = self.f_restriction {
            return vec![f];
        }
        let mut fs: Vec<HalfInt> = HalfInt::couplings(self.i, self.j).collect();
        fs.reverse();
        fs
    }

    /// Number of magnetic sublevels.
    pub fn dim(&self) -> usize {
        self.f_values().iter().map(|f| f.multiplicity()).sum()
    }

    /// Landé closed-form hyperfine energy of level F (rad/µs), relative to
    /// the hyperfine-free line center:
    /// E_F = (A/2)K + Q·[1.5K(K+1) − 2I(I+1)J(J+1)] / [2I(2I−1)·2J(2J−1)],
    /// K = F(F+1) − I(I+1) − J(J+1). The quadrupole term is absent whenever
    /// its denominator vanishes (I or J below 1).
    pub fn hyperfine_level(&self, f: HalfInt) -> f64 {
        let (iv, jv, fv) = (self.i.value(), self.j.value(), f.value());
        if self.j.twice() == 0 || self.i.twice() == 0 {
            return 0.0;
        }
        let k = fv * (fv + 1.0) - iv * (iv + 1.0) - jv * (jv + 1.0);
        let mut e = 0.5 * self.a_hf * k;
        if self.i >= HalfInt::new(1) && self.j >= HalfInt::new(1) {
            let denom = 2.0 * iv * (2.0 * iv - 1.0) * 2.0 * jv * (2.0 * jv - 1.0);
            e += self.q_hf * (1.5 * k * (k + 1.0) - 2.0 * iv * (iv + 1.0) * jv * (jv + 1.0))
                / denom;
        }
        e
    }

    /// (F, E_F) pairs in the manifold's basis order.
    pub fn hyperfine_levels(&self) -> Vec<(HalfInt, f64)> {
        self.f_values()
            .into_iter()
            .map(|f| (f, self.hyperfine_level(f)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    Coupled,
    Uncoupled,
}

/// Label of one basis state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StateLabel {
    Coupled {
        manifold: String,
        f: HalfInt,
        m_f: HalfInt,
    },
    Uncoupled {
        manifold: String,
        m_j: HalfInt,
        m_i: HalfInt,
    },
    /// Free-form label for ad-hoc spaces (reduced models, test problems).
    Custom(String),
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f_: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Coupled { manifold, f, m_f } => {
                write!(f_, "|{manifold}; F={f}, M_F={m_f}>")
            }
            StateLabel::Uncoupled { manifold, m_j, m_i } => {
                write!(f_, "|{manifold}; M_J={m_j}, M_I={m_i}>")
            }
            StateLabel::Custom(s) => write!(f_, "|{s}>"),
        }
    }
}

/// A contiguous block of basis states belonging to one manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    pub manifold: Manifold,
    pub basis: BasisKind,
    pub offset: usize,
    pub dim: usize,
}

/// An explicitly ordered basis over one or more manifolds.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    pub sectors: Vec<Sector>,
    pub states: Vec<StateLabel>,
}

impl StateSpace {
    pub fn single(manifold: &Manifold, basis: BasisKind) -> Arc<Self> {
        Self::concat(&[(manifold.clone(), basis)])
    }

    /// A space over explicitly listed states, with no manifold sectors.
    pub fn ad_hoc(states: Vec<StateLabel>) -> Arc<Self> {
        Arc::new(StateSpace {
            sectors: Vec::new(),
            states,
        })
    }

    pub fn concat(parts: &[(Manifold, BasisKind)]) -> Arc<Self> {
        let mut sectors = Vec::new();
        let mut states = Vec::new();
        for (m, basis) in parts {
            let basis = if m.f_restriction.is_some() {
                // a restricted manifold only has well-defined coupled states
                BasisKind::Coupled
            } else {
                *basis
            };
            let offset = states.len();
            match basis {
                BasisKind::Coupled => {
                    for f in m.f_values() {
                        for m_f in f.projections() {
                            states.push(StateLabel::Coupled {
                                manifold: m.label.clone(),
                                f,
                                m_f,
                            });
                        }
                    }
                }
                BasisKind::Uncoupled => {
                    for m_j in m.j.projections() {
                        for m_i in m.i.projections() {
                            states.push(StateLabel::Uncoupled {
                                manifold: m.label.clone(),
                                m_j,
                                m_i,
                            });
                        }
                    }
                }
            }
            sectors.push(Sector {
                manifold: m.clone(),
                basis,
                offset,
                dim: states.len() - offset,
            });
        }
        Arc::new(StateSpace { sectors, states })
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    /// Index of a state by label; linear scan, spaces are tiny.
    pub fn index_of(&self, label: &StateLabel) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

fn same_space(a: &Arc<StateSpace>, b: &Arc<StateSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Dense complex matrix over explicitly ordered bases. Square operators have
/// `domain == codomain`; couplings between manifolds are rectangular maps.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    domain: Arc<StateSpace>,
    codomain: Arc<StateSpace>,
    pub matrix: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn square(space: Arc<StateSpace>, matrix: DMatrix<Complex64>) -> Self {
        assert_eq!(matrix.nrows(), space.dimension());
        assert_eq!(matrix.ncols(), space.dimension());
        OperatorMatrix {
            domain: Arc::clone(&space),
            codomain: space,
            matrix,
        }
    }

    pub fn map(domain: Arc<StateSpace>, codomain: Arc<StateSpace>, matrix: DMatrix<Complex64>) -> Self {
        assert_eq!(matrix.ncols(), domain.dimension());
        assert_eq!(matrix.nrows(), codomain.dimension());
        OperatorMatrix {
            domain,
            codomain,
            matrix,
        }
    }

    pub fn zeros(space: Arc<StateSpace>) -> Self {
        let d = space.dimension();
        Self::square(space, DMatrix::zeros(d, d))
    }

    pub fn identity(space: Arc<StateSpace>) -> Self {
        let d = space.dimension();
        Self::square(space, DMatrix::identity(d, d))
    }

    pub fn domain(&self) -> &Arc<StateSpace> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<StateSpace> {
        &self.codomain
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            domain: Arc::clone(&self.codomain),
            codomain: Arc::clone(&self.domain),
            matrix: self.matrix.adjoint(),
        }
    }

    /// self ∘ rhs. Panics when the spaces do not chain.
    pub fn compose(&self, rhs: &OperatorMatrix) -> Self {
        assert!(
            same_space(&self.domain, &rhs.codomain),
            "operator composition over mismatched spaces"
        );
        OperatorMatrix {
            domain: Arc::clone(&rhs.domain),
            codomain: Arc::clone(&self.codomain),
            matrix: &self.matrix * &rhs.matrix,
        }
    }

    pub fn add(&self, rhs: &OperatorMatrix) -> Self {
        assert!(same_space(&self.domain, &rhs.domain) && same_space(&self.codomain, &rhs.codomain));
        OperatorMatrix {
            domain: Arc::clone(&self.domain),
            codomain: Arc::clone(&self.codomain),
            matrix: &self.matrix + &rhs.matrix,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        OperatorMatrix {
            domain: Arc::clone(&self.domain),
            codomain: Arc::clone(&self.codomain),
            matrix: &self.matrix * c,
        }
    }

    /// max |M - M†| entry; 0 for exactly Hermitian operators.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.matrix.adjoint();
        (&self.matrix - adj).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Eigendecomposition of a Hermitian operator: (ascending eigenvalues,
    /// eigenvector columns in the same order).
    pub fn hermitian_eigen(&self) -> (DVector<f64>, DMatrix<Complex64>) {
        debug_assert!(self.hermiticity_defect() < 1e-9 * (1.0 + self.matrix.norm()));
        let se = SymmetricEigen::new(self.matrix.clone());
        let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
        let vals = DVector::from_iterator(order.len(), order.iter().map(|&k| se.eigenvalues[k]));
        let vecs = DMatrix::from_columns(
            &order.iter().map(|&k| se.eigenvectors.column(k).into_owned()).collect::<Vec<_>>(),
        );
        (vals, vecs)
    }
}

/// Hyperfine Hamiltonian H_hf = A(I·J) + Q[3(I·J)² + (3/2)(I·J) −
/// I(I+1)J(J+1)] / [2IJ(2I−1)(2J−1)] in the manifold's uncoupled basis
/// (rad/µs). The quadrupole term is omitted whenever its denominator
/// vanishes; J = 0 manifolds get the zero matrix.
pub fn hyperfine_hamiltonian(m: &Manifold) -> OperatorMatrix {
    let space = StateSpace::single(m, BasisKind::Uncoupled);
    let dim = space.dimension();
    if m.j.twice() == 0 || m.i.twice() == 0 {
        return OperatorMatrix::square(space, DMatrix::zeros(dim, dim));
    }
    let idj = spin_dot(m.j, m.i); // acts on |M_J> ⊗ |M_I|
    let mut h = &idj * Complex64::new(m.a_hf, 0.0);
    let (iv, jv) = (m.i.value(), m.j.value());
    if m.i >= HalfInt::new(1) && m.j >= HalfInt::new(1) {
        let denom = 2.0 * iv * jv * (2.0 * iv - 1.0) * (2.0 * jv - 1.0);
        let idj2 = &idj * &idj;
        let casimir = iv * (iv + 1.0) * jv * (jv + 1.0);
        let quad = (idj2 * Complex64::new(3.0, 0.0) + &idj * Complex64::new(1.5, 0.0)
            - DMatrix::identity(dim, dim) * Complex64::new(casimir, 0.0))
            * Complex64::new(m.q_hf / denom, 0.0);
        h += quad;
    }
    OperatorMatrix::square(space, h)
}

/// I·J on the product basis |M_J> ⊗ |M_I| (J outer, I inner, both descending).
fn spin_dot(j: HalfInt, i: HalfInt) -> DMatrix<Complex64> {
    let (jz, jp, jm) = spin_matrices(j);
    let (iz, ip, im) = spin_matrices(i);
    kron(&jz, &iz) + (kron(&jp, &im) + kron(&jm, &ip)) * Complex64::new(0.5, 0.0)
}

/// (S_z, S_+, S_-) for spin s, basis m = s..-s descending.
pub fn spin_matrices(s: HalfInt) -> (DMatrix<Complex64>, DMatrix<Complex64>, DMatrix<Complex64>) {
    let dim = s.multiplicity();
    let ms: Vec<HalfInt> = s.projections().collect();
    let mut sz = DMatrix::zeros(dim, dim);
    let mut sp = DMatrix::zeros(dim, dim);
    for (k, &m) in ms.iter().enumerate() {
        sz[(k, k)] = Complex64::new(m.value(), 0.0);
        if k > 0 {
            // raising connects m to m+1, which sits one row up
            let sv = s.value();
            let mv = m.value();
            sp[(k - 1, k)] = Complex64::new((sv * (sv + 1.0) - mv * (mv + 1.0)).sqrt(), 0.0);
        }
    }
    let sm = sp.transpose();
    (sz, sp, sm)
}

pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngularOperator {
    FZ,
    FPlus,
    FMinus,
    IDotJ,
}

/// Standard matrix representation of F_z, F_±, or I·J on a state space,
/// block-diagonal over its sectors. F_z is diagonal in both basis kinds.
pub fn angular_momentum_operator(space: &Arc<StateSpace>, which: AngularOperator) -> OperatorMatrix {
    let dim = space.dimension();
    let mut full = DMatrix::zeros(dim, dim);
    for sector in &space.sectors {
        let m = &sector.manifold;
        let block = match (sector.basis, which) {
            (BasisKind::Uncoupled, AngularOperator::IDotJ) => spin_dot(m.j, m.i),
            (BasisKind::Uncoupled, _) => {
                let (jz, jp, jm) = spin_matrices(m.j);
                let (iz, ip, im) = spin_matrices(m.i);
                let ij = |a: &DMatrix<Complex64>, b: &DMatrix<Complex64>| kron(a, b);
                let idj = DMatrix::identity(m.j.multiplicity(), m.j.multiplicity());
                let idi = DMatrix::identity(m.i.multiplicity(), m.i.multiplicity());
                match which {
                    AngularOperator::FZ => ij(&jz, &idi) + ij(&idj, &iz),
                    AngularOperator::FPlus => ij(&jp, &idi) + ij(&idj, &ip),
                    AngularOperator::FMinus => ij(&jm, &idi) + ij(&idj, &im),
                    AngularOperator::IDotJ => unreachable!(),
                }
            }
            (BasisKind::Coupled, _) => {
                let fs = m.f_values();
                let bdim = sector.dim;
                let mut b = DMatrix::zeros(bdim, bdim);
                let mut off = 0;
                for f in fs {
                    let (fz, fp, fm) = spin_matrices(f);
                    let sub = match which {
                        AngularOperator::FZ => fz,
                        AngularOperator::FPlus => fp,
                        AngularOperator::FMinus => fm,
                        AngularOperator::IDotJ => {
                            // diagonal in the coupled basis: (F(F+1) - I(I+1) - J(J+1))/2
                            let (iv, jv, fv) = (m.i.value(), m.j.value(), f.value());
                            let k = 0.5 * (fv * (fv + 1.0) - iv * (iv + 1.0) - jv * (jv + 1.0));
                            DMatrix::identity(f.multiplicity(), f.multiplicity())
                                * Complex64::new(k, 0.0)
                        }
                    };
                    let n = f.multiplicity();
                    b.view_mut((off, off), (n, n)).copy_from(&sub);
                    off += n;
                }
                b
            }
        };
        full.view_mut((sector.offset, sector.offset), (sector.dim, sector.dim))
            .copy_from(&block);
    }
    OperatorMatrix::square(Arc::clone(space), full)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformDirection {
    UncoupledToCoupled,
    CoupledToUncoupled,
}

/// Unitary change of basis for one manifold, with entries
/// ⟨F, M_F | I, M_I; J, M_J⟩. Identity for J = 0 (or I = 0) manifolds, where
/// the two orderings coincide.
pub fn basis_transform(m: &Manifold, direction: TransformDirection) -> OperatorMatrix {
    assert!(
        m.f_restriction.is_none(),
        "basis transform is undefined for a restricted manifold"
    );
    let coupled = StateSpace::single(m, BasisKind::Coupled);
    let uncoupled = StateSpace::single(m, BasisKind::Uncoupled);
    let dim = coupled.dimension();
    let mut u = DMatrix::zeros(dim, dim);
    for (r, lab_c) in coupled.states.iter().enumerate() {
        let (f, m_f) = match lab_c {
            StateLabel::Coupled { f, m_f, .. } => (*f, *m_f),
            _ => unreachable!(),
        };
        for (c, lab_u) in uncoupled.states.iter().enumerate() {
            let (m_j, m_i) = match lab_u {
                StateLabel::Uncoupled { m_j, m_i, .. } => (*m_j, *m_i),
                _ => unreachable!(),
            };
            u[(r, c)] = Complex64::new(clebsch_gordan(m.i, m_i, m.j, m_j, f, m_f), 0.0);
        }
    }
    match direction {
        TransformDirection::UncoupledToCoupled => OperatorMatrix::map(uncoupled, coupled, u),
        TransformDirection::CoupledToUncoupled => {
            OperatorMatrix::map(coupled, uncoupled, u.adjoint())
        }
    }
}
