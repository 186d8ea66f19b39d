//! Angular-momentum algebra: Clebsch-Gordan coefficients, Wigner 6j symbols,
//! and relative oscillator strengths.
//!
//! Everything else in the crate reduces to these three functions plus the
//! [`HalfInt`] quantum-number type. All are pure and safe to call from any
//! number of threads.

mod halfint;
mod racah;

pub use halfint::HalfInt;

/// Clebsch-Gordan coefficient ⟨J, M | j1, m1; j2, m2⟩ in the Condon-Shortley
/// convention.
///
/// Returns 0 when M ≠ m1 + m2, when (j1, j2, J) violates the triangle rule,
/// or when some |m| exceeds its j (no such state exists). Panics if j − m is
/// not an integer or j is negative: those inputs are malformed quantum
/// numbers, not selection rules.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> f64 {
    for (jj, mm, name) in [(j1, m1, "j1"), (j2, m2, "j2"), (j, m, "J")] {
        assert!(
            !jj.is_negative() && (jj - mm).is_integer(),
            "malformed quantum numbers: ({name}, m) = ({jj}, {mm})"
        );
        if mm.twice().abs() > jj.twice() {
            return 0.0;
        }
    }
    racah::clebsch_gordan_exact(j1, m1, j2, m2, j, m)
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}.
///
/// Returns 0 when any of the four triads (j1 j2 j3), (j1 j5 j6), (j4 j2 j6),
/// (j4 j5 j3) violates the triangle rule. Panics on negative arguments.
pub fn wigner6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> f64 {
    for (jj, name) in [
        (j1, "j1"),
        (j2, "j2"),
        (j3, "j3"),
        (j4, "j4"),
        (j5, "j5"),
        (j6, "j6"),
    ] {
        assert!(!jj.is_negative(), "negative angular momentum {name} = {jj}");
    }
    racah::wigner6j_exact(j1, j2, j3, j4, j5, j6)
}

/// Relative oscillator strength 𝒪 of the hyperfine line (J, F) → (J', F')
/// for nuclear spin I, normalized so that Σ_F 𝒪² = 1 for every excited F'
/// (each excited level decays at the full rate).
///
/// 𝒪 = (−1)^(I+J'+F+1) √((2J'+1)(2F+1)) {F' I J'; J 1 F}; the stretched
/// chain F = I+J → F' = I+J' carries unit strength. Returns 0 when either
/// (F, I, J) or (F', I, J') is not a valid triad or the line is
/// dipole-forbidden.
pub fn oscillator_strength(
    j_upper: HalfInt,
    f_upper: HalfInt,
    j_lower: HalfInt,
    f_lower: HalfInt,
    i: HalfInt,
) -> f64 {
    if !HalfInt::triangle(f_lower, i, j_lower) || !HalfInt::triangle(f_upper, i, j_upper) {
        return 0.0;
    }
    let six = wigner6j(f_upper, i, j_upper, j_lower, HalfInt::new(1), f_lower);
    let exponent = i + j_upper + f_lower + HalfInt::new(1);
    debug_assert!(exponent.is_integer());
    let phase = if exponent.twice() % 4 == 0 { 1.0 } else { -1.0 };
    let weight = ((j_upper.multiplicity() * f_lower.multiplicity()) as f64).sqrt();
    phase * weight * six
}
