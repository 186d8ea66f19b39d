use super::*;
use crate::structure::species_registry;
use crate::units::mhz;
use approx::assert_abs_diff_eq;
use num_complex::Complex64;

fn sr() -> crate::structure::Species {
    species_registry("Sr87").unwrap()
}

fn h(t: i32) -> HalfInt {
    HalfInt::from_twice(t)
}

fn toy_manifold(label: &str, j: i32, i: HalfInt, gamma: f64) -> Manifold {
    Manifold {
        label: label.into(),
        key: label.into(),
        j: HalfInt::new(j),
        i,
        a_hf: 0.0,
        q_hf: 0.0,
        gamma,
        energy_offset: 0.0,
        f_restriction: None,
    }
}

#[test]
fn dipole_spinless_two_level() {
    // J=0, I=0 -> J'=1: each D_q is a single entry equal to 1
    let g = toy_manifold("g", 0, HalfInt::new(0), 0.0);
    let e = toy_manifold("e", 1, HalfInt::new(0), 1.0);
    for q in [-1, 0, 1] {
        let d = dipole_coupling(&g, &e, q).unwrap();
        assert_eq!(d.matrix.nrows(), 3);
        assert_eq!(d.matrix.ncols(), 1);
        let nonzero: Vec<Complex64> = d.matrix.iter().cloned().filter(|c| c.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_abs_diff_eq!(nonzero[0].re, 1.0, epsilon = 1e-14);
    }
}

#[test]
fn dipole_forbidden_pair_is_an_error() {
    let sp = sr();
    let g = sp.manifold("1S0").unwrap();
    let d2 = sp.manifold("1D2").unwrap();
    assert!(matches!(
        dipole_coupling(g, d2, 0),
        Err(LightMatterError::DipoleForbidden { .. })
    ));
}

#[test]
fn dipole_decay_rate_uniform_over_sr_1p1() {
    // sum_{q, lower} of squared couplings = 1 for all 30 excited sublevels
    let sp = sr();
    let g = sp.manifold("1S0").unwrap();
    let a = sp.manifold("1P1").unwrap();
    let mut totals = vec![0.0; 30];
    for q in [-1, 0, 1] {
        let d = dipole_coupling(g, a, q).unwrap();
        for (r, total) in totals.iter_mut().enumerate() {
            *total += d.matrix.row(r).iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
    }
    for t in totals {
        assert_abs_diff_eq!(t, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn quartic_chain_matrix_element() {
    // <d, 13/2, M | D_0 | a, M_J=0, M_I=M> equals the two-CG product
    // (1/2)sqrt((169-4M^2)/78) * (1/2)sqrt((121-4M^2)/55) exactly
    let sp = sr();
    let a = sp.manifold("1P1").unwrap();
    let d = sp.manifold("1D2").unwrap();
    let dq = dipole_coupling(a, d, 0).unwrap();
    let t = crate::structure::basis_transform(a, TransformDirection::UncoupledToCoupled);
    let chain = dq.compose(&t); // uncoupled a -> coupled d (F'=13/2 block)
    for m_i in a.i.projections() {
        let col = chain
            .domain()
            .index_of(&StateLabel::Uncoupled {
                manifold: a.label.clone(),
                m_j: HalfInt::new(0),
                m_i,
            })
            .unwrap();
        let row = chain
            .codomain()
            .index_of(&StateLabel::Coupled {
                manifold: d.label.clone(),
                f: h(13),
                m_f: m_i,
            })
            .unwrap();
        let got = chain.matrix[(row, col)].re;
        let m2 = m_i.value() * m_i.value();
        let want = 0.5 * ((169.0 - 4.0 * m2) / 78.0).sqrt() * 0.5 * ((121.0 - 4.0 * m2) / 55.0).sqrt();
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);
    }
}

#[test]
fn light_shift_scalar_two_level() {
    // single far-detuned F', spinless: V = Ω²/4Δ exactly
    let g = toy_manifold("g", 0, HalfInt::new(0), 0.0);
    let e = toy_manifold("e", 1, HalfInt::new(0), mhz(1.0));
    let c = LaserCoupling::pi(&g, &e, mhz(10.0), mhz(1000.0));
    let v = light_shift_operator(&c, false).unwrap();
    assert_eq!(v.matrix.nrows(), 1);
    assert_abs_diff_eq!(
        v.matrix[(0, 0)].re,
        mhz(10.0) * mhz(10.0) / (4.0 * mhz(1000.0)),
        epsilon = 1e-12
    );
}

#[test]
fn light_shift_tensor_part_shrinks_with_detuning() {
    let sp = sr();
    let g = sp.manifold("1S0").unwrap();
    let a = sp.manifold("1P1").unwrap();
    let delta_max = a
        .hyperfine_levels()
        .iter()
        .map(|(_, e)| e.abs())
        .fold(0.0, f64::max);
    let big = 100.0 * delta_max;
    let ratio_at = |det: f64| -> f64 {
        let c = LaserCoupling::pi(g, a, mhz(10.0), det);
        let v = light_shift_operator(&c, false).unwrap();
        assert!(v.hermiticity_defect() < 1e-12);
        let (vals, _) = v.hermitian_eigen();
        let scalar = vals.iter().sum::<f64>() / vals.len() as f64;
        (vals[vals.len() - 1] - vals[0]) / scalar.abs()
    };
    let r1 = ratio_at(big);
    let r2 = ratio_at(2.0 * big);
    assert!(r1 < 0.02, "tensor/scalar ratio {r1} at 100x splitting");
    // differential part falls one power of detuning faster than the scalar
    assert_abs_diff_eq!(r1 / r2, 2.0, epsilon = 0.05);
}

#[test]
fn light_shift_resonance_is_an_error_unless_forced() {
    let sp = sr();
    let g = sp.manifold("1S0").unwrap();
    let a = sp.manifold("1P1").unwrap();
    // sit on the F' = 9/2 level
    let det = a.hyperfine_level(h(9));
    let c = LaserCoupling::pi(g, a, mhz(1.0), det);
    assert!(matches!(
        light_shift_operator(&c, false),
        Err(LightMatterError::ResonanceHit { .. })
    ));
    assert!(light_shift_operator(&c, true).is_ok());
}

#[test]
fn jump_operator_leading_term_and_slopes() {
    let sp = sr();
    let g = sp.manifold("1S0").unwrap();
    let a = sp.manifold("1P1").unwrap();
    let rabi = mhz(10.0);

    // W_0 -> (Ω/2Δ) 1 with distance shrinking ∝ 1/Δ²
    let dist_to_leading = |det: f64| -> f64 {
        let c = LaserCoupling::pi(g, a, rabi, det);
        let [_, w0, _] = jump_operators(&c).unwrap();
        let lead = nalgebra::DMatrix::identity(10, 10) * Complex64::new(rabi / (2.0 * det), 0.0);
        (w0.matrix - lead).norm()
    };
    let d1 = dist_to_leading(mhz(10_000.0));
    let d2 = dist_to_leading(mhz(20_000.0));
    assert_abs_diff_eq!(d1 / d2, 4.0, epsilon = 0.1);

    // log-log slopes over a decade: ||W_±||² -> -4, ||W_0||² -> -2
    let detunings: Vec<f64> = (0..10)
        .map(|k| mhz(10_000.0) * (10f64).powf(k as f64 / 9.0))
        .collect();
    let mut logs: Vec<(f64, f64, f64)> = Vec::new();
    for &det in &detunings {
        let c = LaserCoupling::pi(g, a, rabi, det);
        let [wm, w0, wp] = jump_operators(&c).unwrap();
        let pump = wm.matrix.norm_squared() + wp.matrix.norm_squared();
        logs.push((det.ln(), pump.ln(), w0.matrix.norm_squared().ln()));
    }
    let slope = |ys: Vec<f64>| -> f64 {
        let xs: Vec<f64> = logs.iter().map(|t| t.0).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        num / den
    };
    let pump_slope = slope(logs.iter().map(|t| t.1).collect());
    let rayleigh_slope = slope(logs.iter().map(|t| t.2).collect());
    assert_abs_diff_eq!(pump_slope, -4.0, epsilon = 0.05);
    assert_abs_diff_eq!(rayleigh_slope, -2.0, epsilon = 0.05);
}

#[test]
fn jump_operators_vanish_with_the_light_off() {
    // no light, no damage: at fixed exposure time the dissipators are zero
    let sp = sr();
    let g = sp.manifold("1S0").unwrap();
    let a = sp.manifold("1P1").unwrap();
    let c = LaserCoupling::pi(g, a, 0.0, mhz(10_000.0));
    for w in jump_operators(&c).unwrap() {
        assert_eq!(w.matrix.norm(), 0.0);
    }
    assert_eq!(light_shift_operator(&c, false).unwrap().matrix.norm(), 0.0);
}

#[test]
fn scattering_rate_uniform_across_sublevels() {
    // Γ Σ_q diag(W†W) = Γ Ω²/4Δ² (1 + O(δ/Δ)), uniform to first order
    let sp = sr();
    let g = sp.manifold("1S0").unwrap();
    let a = sp.manifold("1P1").unwrap();
    let rabi = mhz(10.0);
    let det = mhz(10_000.0);
    let c = LaserCoupling::pi(g, a, rabi, det);
    let ws = jump_operators(&c).unwrap();
    let mut rates = [0.0; 10];
    for w in &ws {
        let wdw = w.matrix.adjoint() * &w.matrix;
        for k in 0..10 {
            rates[k] += wdw[(k, k)].re;
        }
    }
    let nominal = rabi * rabi / (4.0 * det * det);
    let mean = rates.iter().sum::<f64>() / 10.0;
    assert_abs_diff_eq!(mean / nominal, 1.0, epsilon = 0.02);
    let spread = rates.iter().cloned().fold(f64::MIN, f64::max)
        - rates.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread / mean < 0.02, "rate nonuniformity {}", spread / mean);
}

#[test]
fn decomposition_sum_rules_sr() {
    let sp = sr();
    let g = sp.manifold("1S0").unwrap();
    let a = sp.manifold("1P1").unwrap();
    let c = LaserCoupling::pi(g, a, mhz(10.0), mhz(10_000.0));
    let dec = irreducible_decomposition(&c).unwrap();
    assert!(dec.reconstruction_residual < 1e-10, "residual {}", dec.reconstruction_residual);
    let c2_sum: f64 = dec.c2.iter().sum();
    assert!(c2_sum.abs() < 1e-10, "sum C2 = {c2_sum}");
    assert!(dec.gamma[2].abs() < 1e-10, "gamma2 = {}", dec.gamma[2]);
    // scalar completeness: each excited level decays fully
    let c0_sum: f64 = dec.c0.iter().sum();
    assert!((c0_sum - 1.0).abs() < 1e-10, "sum C0 = {c0_sum}");
}

#[test]
fn decomposition_yb_has_no_tensor_part() {
    let sp = species_registry("Yb171").unwrap();
    let g = sp.manifold("1S0").unwrap();
    let a = sp.manifold("1P1").unwrap();
    let c = LaserCoupling::pi(g, a, mhz(10.0), mhz(10_000.0));
    let dec = irreducible_decomposition(&c).unwrap();
    for (k, c2) in dec.c2.iter().enumerate() {
        assert!(c2.abs() < 1e-12, "C2[{k}] = {c2}");
    }
}

#[test]
fn decomposition_rejects_j_nonzero_lower() {
    let sp = sr();
    let a = sp.manifold("1P1").unwrap();
    let d = sp.manifold("1D2").unwrap();
    let c = LaserCoupling::pi(a, d, mhz(10.0), mhz(10_000.0));
    assert!(matches!(
        irreducible_decomposition(&c),
        Err(LightMatterError::UnsupportedDecomposition(_))
    ));
}

#[test]
fn truncated_rebuild_converges_cubically() {
    // || W_exact - W_rebuilt || must fall off as 1/Δ³
    let sp = sr();
    let g = sp.manifold("1S0").unwrap();
    let a = sp.manifold("1P1").unwrap();
    let rabi = mhz(10.0);
    let resid = |det: f64| -> f64 {
        let c = LaserCoupling::pi(g, a, rabi, det);
        let dec = irreducible_decomposition(&c).unwrap();
        let exact = jump_operators(&c).unwrap();
        let rebuilt = reconstructed_jump_operators(&c, &dec).unwrap();
        exact
            .iter()
            .zip(rebuilt.iter())
            .map(|(e, r)| (&e.matrix - &r.matrix).norm())
            .sum()
    };
    let r1 = resid(mhz(20_000.0));
    let r2 = resid(mhz(40_000.0));
    let slope = (r1 / r2).ln() / 2f64.ln();
    assert_abs_diff_eq!(slope, 3.0, epsilon = 0.2);
}

#[test]
fn triplet_cancellation_zeroes_the_tensor_shift() {
    let sp = sr();
    let g = sp.manifold("1S0").unwrap();
    let a = sp.manifold("1P1").unwrap();
    let c3 = sp.manifold("3P1").unwrap();
    let probe = LaserCoupling::pi(g, a, mhz(10.0), mhz(10_000.0));
    let canceller = LaserCoupling::pi(g, c3, 0.0, mhz(635.0));
    let sol = cancel_triplet_lightshift(&probe, &canceller).unwrap();
    assert!(sol.rabi > 0.0);
    assert!(
        sol.residual_spread <= 0.01 * sol.uncancelled_spread,
        "residual {} vs uncancelled {}",
        sol.residual_spread,
        sol.uncancelled_spread
    );
    // doubling the probe Rabi doubles the canceller Rabi (both shifts ∝ Ω²)
    let probe2 = LaserCoupling::pi(g, a, mhz(20.0), mhz(10_000.0));
    let sol2 = cancel_triplet_lightshift(&probe2, &canceller).unwrap();
    assert_abs_diff_eq!(sol2.rabi / sol.rabi, 2.0, epsilon = 1e-3);
}

#[test]
fn triplet_cancellation_with_probe_off_is_zero() {
    let sp = sr();
    let g = sp.manifold("1S0").unwrap();
    let a = sp.manifold("1P1").unwrap();
    let c3 = sp.manifold("3P1").unwrap();
    let probe = LaserCoupling::pi(g, a, 0.0, mhz(10_000.0));
    let canceller = LaserCoupling::pi(g, c3, 0.0, mhz(635.0));
    let sol = cancel_triplet_lightshift(&probe, &canceller).unwrap();
    assert_eq!(sol.rabi, 0.0);
    assert_eq!(sol.residual_spread, 0.0);
}

#[test]
fn quadrupole_cancellation_beats_ten_fold() {
    let sp = sr();
    let a = sp.manifold("1P1").unwrap();
    let d = sp.manifold("1D2").unwrap();
    let shifts = perturbative_shifts(a, mhz(1000.0)).first_order;
    let sol = cancel_quadrupole_shift(&shifts, a, d, mhz(4350.0)).unwrap();
    // before: pure quadratic spread 60 Q' ≈ 2π·32.5 MHz
    let qp = quadrupole_prime(a);
    assert_abs_diff_eq!(sol.spread_before, 60.0 * qp, epsilon = 1e-9);
    assert!(
        sol.spread_after * 10.0 <= sol.spread_before,
        "only {}x reduction",
        sol.spread_before / sol.spread_after
    );
    // optimizer picks a red detuning here (profile and shifts curve the same way)
    assert!(sol.detuning_ad < 0.0);
    assert!(sol.rabi_ad > 0.0);
    assert_abs_diff_eq!(
        sol.rabi_ad * sol.rabi_ad / (4.0 * sol.detuning_ad),
        sol.lambda,
        epsilon = 1e-9 * sol.lambda.abs()
    );
}

#[test]
fn quadrupole_profile_matches_quartic_closed_form() {
    let sp = sr();
    let a = sp.manifold("1P1").unwrap();
    let d = sp.manifold("1D2").unwrap();
    let profile = lightshift_profile_mj0(a, d).unwrap();
    for (k, m_i) in a.i.projections().enumerate() {
        let m2 = m_i.value() * m_i.value();
        let want = (169.0 - 4.0 * m2) * (121.0 - 4.0 * m2) / (16.0 * 78.0 * 55.0);
        assert_abs_diff_eq!(profile[k], want, epsilon = 1e-12);
    }
}

#[test]
fn quoted_preset_is_evaluated_not_asserted() {
    let sp = sr();
    let a = sp.manifold("1P1").unwrap();
    let d = sp.manifold("1D2").unwrap();
    let shifts = perturbative_shifts(a, mhz(1000.0)).first_order;
    let (pts, spread) =
        evaluate_quadrupole_point(&shifts, a, d, mhz(106.0), mhz(4350.0)).unwrap();
    assert_eq!(pts.len(), 10);
    assert!(spread.is_finite());
}
