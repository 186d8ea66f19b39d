//! Exact-rational evaluation of the Racah sum formulas.
//!
//! Clebsch-Gordan coefficients and 6j symbols are square roots of rationals
//! times rational alternating sums. Both pieces are accumulated as
//! `BigRational` and converted to `f64` only at the end, so values up to the
//! crate's j = 21/2 ceiling are accurate to a few ulps — the downstream
//! cancellation tests need ~1e-12.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::halfint::HalfInt;

/// n! as a BigInt. Callers guarantee n >= 0.
fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

fn ratio(numer: BigInt, denom: BigInt) -> BigRational {
    BigRational::new(numer, denom)
}

/// sign(s) * sqrt(pre * s^2) for rational `pre` >= 0 and rational sum `s`.
fn signed_sqrt(pre: BigRational, s: BigRational) -> f64 {
    if s.is_zero() || pre.is_zero() {
        return 0.0;
    }
    let square = pre * &s * &s;
    let v = square.numer().to_f64().unwrap_or(f64::INFINITY)
        / square.denom().to_f64().unwrap_or(f64::INFINITY);
    debug_assert!(v.is_finite(), "Racah sum overflowed f64 range");
    let root = v.sqrt();
    if s.is_negative() {
        -root
    } else {
        root
    }
}

/// Triangle coefficient Delta(a,b,c) = (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!
/// as an exact rational; `None` when the triad is forbidden.
fn triangle_coeff(a: HalfInt, b: HalfInt, c: HalfInt) -> Option<BigRational> {
    if !HalfInt::triangle(a, b, c) {
        return None;
    }
    let t = |x: HalfInt| x.twice();
    let p = (t(a) + t(b) - t(c)) / 2;
    let q = (t(a) - t(b) + t(c)) / 2;
    let r = (-t(a) + t(b) + t(c)) / 2;
    let s = (t(a) + t(b) + t(c)) / 2 + 1;
    Some(ratio(factorial(p) * factorial(q) * factorial(r), factorial(s)))
}

/// Condon-Shortley Clebsch-Gordan coefficient <J M | j1 m1; j2 m2> via the
/// Racah sum. Projection validity is the caller's job; selection rules
/// (M = m1 + m2, triangle) return 0.
pub fn clebsch_gordan_exact(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> f64 {
    if m1 + m2 != m || !HalfInt::triangle(j1, j2, j) {
        return 0.0;
    }
    let t = |x: HalfInt| x.twice();
    // all of these are integers for valid inputs
    let a1 = (t(j) + t(m)) / 2;
    let a2 = (t(j) - t(m)) / 2;
    let a3 = (t(j1) - t(m1)) / 2;
    let a4 = (t(j1) + t(m1)) / 2;
    let a5 = (t(j2) - t(m2)) / 2;
    let a6 = (t(j2) + t(m2)) / 2;

    let tri = match triangle_coeff(j1, j2, j) {
        Some(v) => v,
        None => return 0.0,
    };
    let pre = tri
        * ratio(
            BigInt::from(t(j) + 1)
                * factorial(a1)
                * factorial(a2)
                * factorial(a3)
                * factorial(a4)
                * factorial(a5)
                * factorial(a6),
            BigInt::one(),
        );

    // k bounds: every factorial argument below must be non-negative
    let b1 = (t(j1) + t(j2) - t(j)) / 2; // j1+j2-J-k
    let b2 = a3; // j1-m1-k
    let b3 = a6; // j2+m2-k
    let c1 = (t(j) - t(j2) + t(m1)) / 2; // J-j2+m1+k
    let c2 = (t(j) - t(j1) - t(m2)) / 2; // J-j1-m2+k
    let kmin = 0.max(-c1).max(-c2);
    let kmax = b1.min(b2).min(b3);

    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let denom = factorial(k)
            * factorial(b1 - k)
            * factorial(b2 - k)
            * factorial(b3 - k)
            * factorial(c1 + k)
            * factorial(c2 + k);
        let term = ratio(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    signed_sqrt(pre, sum)
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6} via the Racah sum.
/// Returns 0 when any of the four triads violates the triangle rule.
pub fn wigner6j_exact(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> f64 {
    let tris = [
        triangle_coeff(j1, j2, j3),
        triangle_coeff(j1, j5, j6),
        triangle_coeff(j4, j2, j6),
        triangle_coeff(j4, j5, j3),
    ];
    let mut pre = BigRational::one();
    for tc in tris {
        match tc {
            Some(v) => pre *= v,
            None => return 0.0,
        }
    }
    let t = |x: HalfInt| x.twice();
    let s1 = (t(j1) + t(j2) + t(j3)) / 2;
    let s2 = (t(j1) + t(j5) + t(j6)) / 2;
    let s3 = (t(j4) + t(j2) + t(j6)) / 2;
    let s4 = (t(j4) + t(j5) + t(j3)) / 2;
    let q1 = (t(j1) + t(j2) + t(j4) + t(j5)) / 2;
    let q2 = (t(j2) + t(j3) + t(j5) + t(j6)) / 2;
    let q3 = (t(j3) + t(j1) + t(j6) + t(j4)) / 2;

    let kmin = s1.max(s2).max(s3).max(s4);
    let kmax = q1.min(q2).min(q3);
    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let numer = factorial(k + 1);
        let denom = factorial(k - s1)
            * factorial(k - s2)
            * factorial(k - s3)
            * factorial(k - s4)
            * factorial(q1 - k)
            * factorial(q2 - k)
            * factorial(q3 - k);
        let term = ratio(numer, denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    signed_sqrt(pre, sum)
}
