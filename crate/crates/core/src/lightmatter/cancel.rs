//! The two light-shift cancellation solvers.

use super::{light_shift_operator, lightshift_profile_mj0, LaserCoupling, LightMatterError};
use crate::structure::Manifold;

/// Result of tuning the triplet canceller.
#[derive(Clone, Debug)]
pub struct TripletCancellation {
    /// Rabi frequency Ω_gc that minimizes the ground-level spread (rad/µs).
    pub rabi: f64,
    /// max − min eigenvalue of V_probe + V_triplet at the optimum (rad/µs).
    pub residual_spread: f64,
    /// spread of V_probe alone (rad/µs).
    pub uncancelled_spread: f64,
}

fn eig_spread(v: &crate::structure::OperatorMatrix) -> f64 {
    let (vals, _) = v.hermitian_eigen();
    vals[vals.len() - 1] - vals[0]
}

/// Finds the Rabi frequency of the `canceller` coupling (its `rabi` field is
/// ignored) that minimizes the spread of V_probe + V_canceller over the
/// ground sublevels.
///
/// V_canceller scales exactly as Ω², so the search runs over x = Ω²: the
/// spread is a max of functions affine in x, hence convex and unimodal. The
/// bracket [0, x_hi] is grown by doubling until the spread at x_hi exceeds
/// the running minimum, then shrunk by golden-section; expansion past 2^80
/// without turning around reports [`LightMatterError::NoMinimum`].
pub fn cancel_triplet_lightshift(
    probe: &LaserCoupling,
    canceller: &LaserCoupling,
) -> Result<TripletCancellation, LightMatterError> {
    let v_probe = light_shift_operator(probe, false)?;
    let uncancelled_spread = eig_spread(&v_probe);
    let unit = LaserCoupling {
        rabi: 1.0,
        ..canceller.clone()
    };
    let v_unit = light_shift_operator(&unit, false)?;
    let spread_at = |x: f64| -> f64 {
        let v = v_probe.add(&v_unit.scale(num_complex::Complex64::new(x, 0.0)));
        eig_spread(&v)
    };
    if uncancelled_spread == 0.0 {
        return Ok(TripletCancellation {
            rabi: 0.0,
            residual_spread: 0.0,
            uncancelled_spread,
        });
    }
    // grow the bracket
    let mut hi = 1.0;
    let s0 = spread_at(0.0);
    while spread_at(hi) < s0 {
        hi *= 2.0;
        if hi > 2f64.powi(80) {
            return Err(LightMatterError::NoMinimum {
                context: "triplet light-shift cancellation".into(),
            });
        }
    }
    // golden-section on [0, hi]
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (spread_at(c), spread_at(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = spread_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = spread_at(d);
        }
        if (b - a) <= 1e-14 * (1.0 + b) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    Ok(TripletCancellation {
        rabi: x.sqrt(),
        residual_spread: spread_at(x),
        uncancelled_spread,
    })
}

/// Result of tuning the ¹D₂ dressing against the residual quadrupolar shift.
#[derive(Clone, Debug)]
pub struct QuadrupoleCancellation {
    /// Optimized Rabi frequency Ω_ad (rad/µs).
    pub rabi_ad: f64,
    /// Optimized detuning Δ_ad (rad/µs); its sign is the optimizer's choice.
    pub detuning_ad: f64,
    /// λ* = Ω_ad²/(4 Δ_ad) realized by the optimum (rad/µs).
    pub lambda: f64,
    /// Residual shifts before dressing, per M_I descending (rad/µs).
    pub shifts_before: Vec<f64>,
    /// Shifts at the optimum (rad/µs).
    pub shifts_after: Vec<f64>,
    /// max pairwise |δ_m − δ_m'| before / after.
    pub spread_before: f64,
    pub spread_after: f64,
    /// Light-shift profile P(M_I) per unit λ.
    pub profile: Vec<f64>,
}

fn pair_spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    max - min
}

/// Minimizes the worst pairwise which-way splitting
/// max_{m≠m'} |δ_m − δ_m'| of the dressed M_J = 0 levels, where
/// δ_m = (residual hyperfine shift)_m + λ P(m) and λ = Ω_ad²/(4Δ_ad).
///
/// The shift enters only through λ, so the (Ω_ad, Δ_ad) plane is flat along
/// Ω²/4Δ = const; the 1-D problem in λ is convex and solved by
/// golden-section over an expanding bracket. The returned (Ω_ad, Δ_ad)
/// realizes λ* at |Δ_ad| = `detuning_magnitude`, with the sign of Δ_ad
/// fixed by the sign of λ*.
pub fn cancel_quadrupole_shift(
    dressed_shifts: &[f64],
    a: &Manifold,
    d: &Manifold,
    detuning_magnitude: f64,
) -> Result<QuadrupoleCancellation, LightMatterError> {
    let profile = lightshift_profile_mj0(a, d)?;
    assert_eq!(profile.len(), dressed_shifts.len());
    let shifted = |lambda: f64| -> Vec<f64> {
        dressed_shifts
            .iter()
            .zip(&profile)
            .map(|(s, p)| s + lambda * p)
            .collect()
    };
    let spread_at = |lambda: f64| pair_spread(&shifted(lambda));
    let spread_before = pair_spread(dressed_shifts);

    // bracket the minimum in lambda, growing symmetrically from 0
    let s0 = spread_at(0.0);
    let mut scale = spread_before.max(1e-12);
    let (mut lo, mut hi);
    loop {
        if spread_at(-scale) < s0 {
            lo = -scale;
            hi = 0.0;
            while spread_at(lo) < spread_at(lo * 0.999) {
                lo *= 2.0;
                if lo < -2f64.powi(80) {
                    return Err(LightMatterError::NoMinimum {
                        context: "quadrupole cancellation (unbounded descent)".into(),
                    });
                }
            }
            break;
        }
        if spread_at(scale) < s0 {
            lo = 0.0;
            hi = scale;
            while spread_at(hi) < spread_at(hi * 0.999) {
                hi *= 2.0;
                if hi > 2f64.powi(80) {
                    return Err(LightMatterError::NoMinimum {
                        context: "quadrupole cancellation (unbounded descent)".into(),
                    });
                }
            }
            break;
        }
        scale *= 0.5;
        if scale < 1e-18 {
            // flat at zero: nothing to cancel
            lo = 0.0;
            hi = 0.0;
            break;
        }
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a_, mut b_) = (lo, hi);
    if b_ > a_ {
        let mut c = b_ - phi * (b_ - a_);
        let mut d_ = a_ + phi * (b_ - a_);
        let (mut fc, mut fd) = (spread_at(c), spread_at(d_));
        for _ in 0..300 {
            if fc < fd {
                b_ = d_;
                d_ = c;
                fd = fc;
                c = b_ - phi * (b_ - a_);
                fc = spread_at(c);
            } else {
                a_ = c;
                c = d_;
                fc = fd;
                d_ = a_ + phi * (b_ - a_);
                fd = spread_at(d_);
            }
            if (b_ - a_).abs() <= 1e-13 * (1.0 + b_.abs()) {
                break;
            }
        }
    }
    let lambda = 0.5 * (a_ + b_);
    let detuning_ad = detuning_magnitude.abs() * lambda.signum();
    let rabi_ad = (4.0 * lambda * detuning_ad).max(0.0).sqrt();
    let shifts_after = shifted(lambda);
    Ok(QuadrupoleCancellation {
        rabi_ad,
        detuning_ad,
        lambda,
        spread_before,
        spread_after: pair_spread(&shifts_after),
        shifts_before: dressed_shifts.to_vec(),
        shifts_after,
        profile,
    })
}

/// Shifts and spread achieved by a fixed (Ω_ad, Δ_ad) point, e.g. a quoted
/// preset. Reported, never asserted.
pub fn evaluate_quadrupole_point(
    dressed_shifts: &[f64],
    a: &Manifold,
    d: &Manifold,
    rabi_ad: f64,
    detuning_ad: f64,
) -> Result<(Vec<f64>, f64), LightMatterError> {
    let profile = lightshift_profile_mj0(a, d)?;
    let lambda = rabi_ad * rabi_ad / (4.0 * detuning_ad);
    let shifts: Vec<f64> = dressed_shifts
        .iter()
        .zip(&profile)
        .map(|(s, p)| s + lambda * p)
        .collect();
    let spread = pair_spread(&shifts);
    Ok((shifts, spread))
}
