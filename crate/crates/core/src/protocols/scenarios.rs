//! The scenario drivers themselves.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::{ProtocolError, ScenarioConfig, SweepGrid};
use crate::dynamics::{
    coherence_transfer_fidelity, coherence_transfer_problem, evolve, DensityMatrix,
    LindbladProblem,
};
use crate::lightmatter::{
    cancel_quadrupole_shift, cancel_triplet_lightshift, dressed_mj0_spectrum,
    evaluate_quadrupole_point, jump_operators, perturbative_shifts, LaserCoupling,
};
use crate::structure::Species;
use crate::units::{mhz, to_mhz};

type Output = (Vec<String>, Vec<Vec<f64>>, serde_json::Value);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Far-off-resonance leakage detection: for each probe detuning, tune the
/// triplet canceller (Sr only; an I = 1/2 species has no tensor shift and
/// needs none), build both sets of jump operators, and evolve the equal
/// superposition for the time it takes to scatter N photons at the
/// leading-order Rayleigh rate R = Γ Ω²/4Δ². The post-cancellation
/// Hamiltonian is zero; all which-way damage lives in the dissipators.
pub fn leakage_sweep(cfg: &ScenarioConfig, species: &Species) -> Result<Output, ProtocolError> {
    let grid = cfg
        .grid
        .clone()
        .unwrap_or_else(|| SweepGrid::log("detuning_mhz", 1_000.0, 100_000.0, 25));
    if grid.parameter != "detuning_mhz" {
        return Err(ProtocolError::BadConfig(format!(
            "leakage sweep expects grid.parameter = \"detuning_mhz\", got {:?}",
            grid.parameter
        )));
    }
    let ground = species.manifold("1S0")?.clone();
    let singlet = species.manifold("1P1")?.clone();
    let triplet = species.manifold("3P1").ok().cloned();
    let mut photons = cfg.photons.clone();
    photons.sort_unstable();
    if cfg.lasers.probe_rabi_mhz <= 0.0 {
        return Err(ProtocolError::BadConfig(
            "lasers.probe_rabi_mhz: a fixed photon count needs a running probe".into(),
        ));
    }
    let probe_rabi = mhz(cfg.lasers.probe_rabi_mhz);
    let triplet_detuning = mhz(cfg.lasers.triplet_detuning_mhz);

    let rows: Vec<Vec<f64>> = grid
        .values()
        .par_iter()
        .map(|&det_mhz| -> Result<Vec<f64>, ProtocolError> {
            let detuning = mhz(det_mhz);
            let probe = LaserCoupling::pi(&ground, &singlet, probe_rabi, detuning);
            let mut dissipators: Vec<(f64, DMatrix<Complex64>)> = Vec::new();
            let singlet_jumps = jump_operators(&probe)?;
            let space = std::sync::Arc::clone(singlet_jumps[0].domain());
            for w in &singlet_jumps {
                dissipators.push((singlet.gamma, w.matrix.clone()));
            }
            let rabi_gc = match &triplet {
                Some(t) => {
                    let canceller = LaserCoupling::pi(&ground, t, 0.0, triplet_detuning);
                    let sol = cancel_triplet_lightshift(&probe, &canceller)?;
                    if cfg.lasers.include_triplet_scattering {
                        let tuned = LaserCoupling::pi(&ground, t, sol.rabi, triplet_detuning);
                        for w in &jump_operators(&tuned)? {
                            dissipators.push((t.gamma, w.matrix.clone()));
                        }
                    }
                    sol.rabi
                }
                None => 0.0,
            };
            let dim = ground.dim();
            let rate = singlet.gamma * probe_rabi * probe_rabi / (4.0 * detuning * detuning);
            let t_samples: Vec<f64> = photons.iter().map(|&n| n as f64 / rate).collect();
            let mut problem = LindbladProblem::new(
                std::sync::Arc::clone(&space),
                DMatrix::zeros(dim, dim),
                dissipators,
                *t_samples.last().expect("photons is non-empty"),
            );
            problem.sample_times = t_samples;
            let psi0 = DVector::from_element(dim, c(1.0 / (dim as f64).sqrt()));
            let rho0 = DensityMatrix::from_pure(std::sync::Arc::clone(&space), &psi0);
            let traj = evolve(&problem, &rho0)?;
            let mut row = vec![det_mhz, to_mhz(rabi_gc)];
            for state in &traj.states {
                row.push(1.0 - state.fidelity(&psi0)?);
            }
            Ok(row)
        })
        .collect::<Result<_, _>>()?;

    let mut header = vec!["detuning_mhz".to_string(), "rabi_gc_mhz".to_string()];
    for n in &photons {
        header.push(format!("infidelity_n{n}"));
    }
    let extra = json!({
        "probe_rabi_mhz": cfg.lasers.probe_rabi_mhz,
        "triplet_detuning_mhz": cfg.lasers.triplet_detuning_mhz,
        "photons": photons,
        "has_triplet_canceller": triplet.is_some(),
        "include_triplet_scattering": cfg.lasers.include_triplet_scattering,
    });
    Ok((header, rows, extra))
}

/// Dressed M_J = 0 spectrum: exact eigenvalues, first/second-order
/// perturbation theory, and nuclear-spin overlaps, per M_I, at one or many
/// dressing Rabi frequencies.
pub fn dressing_spectrum(cfg: &ScenarioConfig, species: &Species) -> Result<Output, ProtocolError> {
    let a = species.manifold("1P1")?.clone();
    let rabis: Vec<f64> = match &cfg.grid {
        Some(grid) => {
            if grid.parameter != "rabi_ab_mhz" {
                return Err(ProtocolError::BadConfig(format!(
                    "dressing spectrum expects grid.parameter = \"rabi_ab_mhz\", got {:?}",
                    grid.parameter
                )));
            }
            grid.values()
        }
        None => vec![cfg.lasers.dressing_rabi_mhz],
    };
    let per_rabi: Vec<Vec<Vec<f64>>> = rabis
        .par_iter()
        .map(|&rabi_mhz| {
            let rabi = mhz(rabi_mhz);
            let spec = dressed_mj0_spectrum(&a, rabi);
            let pt = perturbative_shifts(&a, rabi);
            spec.m_i
                .iter()
                .enumerate()
                .map(|(k, m_i)| {
                    vec![
                        rabi_mhz,
                        m_i.value(),
                        to_mhz(spec.energy[k]),
                        to_mhz(pt.first_order[k]),
                        to_mhz(pt.first_order[k] + pt.second_order[k]),
                        spec.overlap[k],
                    ]
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = per_rabi.into_iter().flatten().collect();

    // summary metrics at the last grid point: minimum overlap and the
    // mean-centered exact-vs-PT deviation as a fraction of the spread
    let rabi = mhz(*rabis.last().expect("grid is non-empty"));
    let spec = dressed_mj0_spectrum(&a, rabi);
    let pt = perturbative_shifts(&a, rabi);
    let min_overlap = spec.overlap.iter().cloned().fold(1.0, f64::min);
    let centered = |v: &[f64]| -> Vec<f64> {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| x - mean).collect()
    };
    let (e, p) = (centered(&spec.energy), centered(&pt.total()));
    let spread = spec.energy.iter().cloned().fold(f64::MIN, f64::max)
        - spec.energy.iter().cloned().fold(f64::MAX, f64::min);
    let deviation = e
        .iter()
        .zip(&p)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let extra = json!({
        "min_overlap": min_overlap,
        "pt_deviation_fraction_of_spread": if spread > 0.0 { deviation / spread } else { 0.0 },
        "spread_mhz": to_mhz(spread),
    });
    let header = vec![
        "rabi_ab_mhz".into(),
        "m_i".into(),
        "exact_shift_mhz".into(),
        "de1_mhz".into(),
        "de1_plus_de2_mhz".into(),
        "overlap".into(),
    ];
    Ok((header, rows, extra))
}

/// Two-level coherence transfer: simulated vs analytic infidelity over Δ/Γ.
pub fn two_level_coherence(cfg: &ScenarioConfig) -> Result<Output, ProtocolError> {
    let gamma = mhz(cfg.two_level.gamma_mhz);
    let points: Vec<f64> = match (cfg.two_level.delta_over_gamma, &cfg.grid) {
        (Some(x), _) => vec![x],
        (None, Some(grid)) => {
            if grid.parameter != "delta_over_gamma" {
                return Err(ProtocolError::BadConfig(format!(
                    "two-level scenario expects grid.parameter = \"delta_over_gamma\", got {:?}",
                    grid.parameter
                )));
            }
            grid.values()
        }
        (None, None) => SweepGrid::linear("delta_over_gamma", 0.0, 3.0, 13).values(),
    };
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&x| -> Result<Vec<f64>, ProtocolError> {
            let delta = x * gamma;
            let weights = [c(1.0), c(1.0)];
            let t_final = 10.0 / gamma;
            let (problem, rho0, target) =
                coherence_transfer_problem(&[0.0, delta], gamma, &weights, t_final);
            let traj = evolve(&problem, &rho0)?;
            let simulated = 1.0 - traj.final_state().fidelity(&target)?;
            let analytic = 1.0 - coherence_transfer_fidelity(&[0.0, delta], gamma, &weights);
            Ok(vec![x, simulated, analytic])
        })
        .collect::<Result<_, _>>()?;
    let header = vec![
        "delta_over_gamma".into(),
        "infidelity_sim".into(),
        "infidelity_analytic".into(),
    ];
    let extra = json!({ "gamma_mhz": cfg.two_level.gamma_mhz, "t_final_over_gamma": 10.0 });
    Ok((header, rows, extra))
}

/// Fit y = c0 + c2 x + c4 x² through (x_k, y_k) by least squares.
fn quartic_fit(xs: &[f64], ys: &[f64]) -> [f64; 3] {
    let mut g = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let basis = [1.0, x, x * x];
        for k in 0..3 {
            r[k] += basis[k] * y;
            for l in 0..3 {
                g[k][l] += basis[k] * basis[l];
            }
        }
    }
    let m = nalgebra::Matrix3::from_fn(|i, j| g[i][j]);
    let v = nalgebra::Vector3::new(r[0], r[1], r[2]);
    let sol = m.lu().solve(&v).expect("fit basis is nondegenerate");
    [sol[0], sol[1], sol[2]]
}

/// Residual quadrupolar shifts of the dressed M_J = 0 levels before and
/// after ¹D₂ dressing, at the optimizer's point and at the quoted preset.
pub fn quadrupole_cancellation(
    cfg: &ScenarioConfig,
    species: &Species,
) -> Result<Output, ProtocolError> {
    let a = species.manifold("1P1")?.clone();
    let d = species.manifold("1D2")?.clone();
    let rabi_ab = mhz(cfg.lasers.dressing_rabi_mhz);
    let shifts = perturbative_shifts(&a, rabi_ab).first_order;
    let sol = cancel_quadrupole_shift(&shifts, &a, &d, mhz(cfg.lasers.quad_detuning_mhz))?;
    let (preset_shifts, preset_spread) = evaluate_quadrupole_point(
        &shifts,
        &a,
        &d,
        mhz(cfg.lasers.preset_rabi_ad_mhz),
        mhz(cfg.lasers.preset_detuning_ad_mhz),
    )?;
    let m_is: Vec<f64> = a.i.projections().map(|m| m.value()).collect();
    let rows: Vec<Vec<f64>> = m_is
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            vec![
                m,
                to_mhz(sol.shifts_before[k]),
                to_mhz(sol.shifts_after[k]),
                to_mhz(preset_shifts[k]),
            ]
        })
        .collect();
    let xs: Vec<f64> = m_is.iter().map(|m| m * m).collect();
    let fit = quartic_fit(&xs, &sol.profile);
    let extra = json!({
        "rabi_ad_mhz": to_mhz(sol.rabi_ad),
        "detuning_ad_mhz": to_mhz(sol.detuning_ad),
        "lambda_mhz": to_mhz(sol.lambda),
        "spread_before_mhz": to_mhz(sol.spread_before),
        "spread_after_mhz": to_mhz(sol.spread_after),
        "reduction_factor": sol.spread_before / sol.spread_after,
        "preset_rabi_ad_mhz": cfg.lasers.preset_rabi_ad_mhz,
        "preset_detuning_ad_mhz": cfg.lasers.preset_detuning_ad_mhz,
        "preset_spread_mhz": to_mhz(preset_spread),
        "profile_quartic_fit": { "c0": fit[0], "c2": fit[1], "c4": fit[2] },
    });
    let header = vec![
        "m_i".into(),
        "shift_before_mhz".into(),
        "shift_after_opt_mhz".into(),
        "shift_after_preset_mhz".into(),
    ];
    Ok((header, rows, extra))
}

/// Shifts of the dressed M_J = 0 levels with the optimized ¹D₂ dressing
/// applied: the δ_m entering the quench problem.
fn cancelled_quench_shifts(
    cfg: &ScenarioConfig,
    species: &Species,
) -> Result<Vec<f64>, ProtocolError> {
    let a = species.manifold("1P1")?.clone();
    let d = species.manifold("1D2")?.clone();
    let shifts = perturbative_shifts(&a, mhz(cfg.lasers.dressing_rabi_mhz)).first_order;
    let sol = cancel_quadrupole_shift(&shifts, &a, &d, mhz(cfg.lasers.quad_detuning_mhz))?;
    Ok(sol.shifts_after)
}

/// Quench of the dressed ¹P₁ M_J = 0 manifold into the ground state:
/// 20-dimensional Lindblad problem with the optimizer-cancelled residual
/// shifts, collective jump operator, equal superposition in, fidelity against
/// the ground superposition out.
pub fn quench_decay(cfg: &ScenarioConfig, species: &Species) -> Result<Output, ProtocolError> {
    let singlet = species.manifold("1P1")?;
    let gamma = singlet.gamma;
    let deltas = cancelled_quench_shifts(cfg, species)?;
    let n = deltas.len();
    let weights = vec![c(1.0); n];
    let t_final = 10.0 / gamma;
    let (mut problem, rho0, target) =
        coherence_transfer_problem(&deltas, gamma, &weights, t_final);
    problem.sample_times = (0..=100).map(|k| t_final * k as f64 / 100.0).collect();
    let traj = evolve(&problem, &rho0)?;
    let rows: Vec<Vec<f64>> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, rho)| -> Result<Vec<f64>, ProtocolError> {
            Ok(vec![*t, rho.fidelity(&target)?, rho.trace(), rho.purity()])
        })
        .collect::<Result<_, _>>()?;
    let final_fidelity = traj.final_state().fidelity(&target)?;
    let analytic = coherence_transfer_fidelity(&deltas, gamma, &weights);
    let extra = json!({
        "final_fidelity": final_fidelity,
        "analytic_steady_state_fidelity": analytic,
        "gamma_mhz": to_mhz(gamma),
        "delta_spread_mhz": to_mhz(
            deltas.iter().cloned().fold(f64::MIN, f64::max)
                - deltas.iter().cloned().fold(f64::MAX, f64::min)
        ),
    });
    let header = vec!["t_us".into(), "fidelity".into(), "trace".into(), "purity".into()];
    Ok((header, rows, extra))
}

/// Classical bookkeeper for the three-step sideband cooling cycle: an ideal
/// red-sideband π pulse takes n to n−1, the quench photon multiplies the
/// stored coherence by the per-cycle quench fidelity and heats by one quantum
/// with probability η². A deliberately coarse model — motional quantization
/// is out of scope.
pub fn cooling_cycle(cfg: &ScenarioConfig, species: &Species) -> Result<Output, ProtocolError> {
    let per_cycle_fidelity = {
        let singlet = species.manifold("1P1")?;
        let deltas = cancelled_quench_shifts(cfg, species)?;
        let weights = vec![c(1.0); deltas.len()];
        coherence_transfer_fidelity(&deltas, singlet.gamma, &weights)
    };
    let n0 = cfg.cooling.n0 as usize;
    let eta2 = cfg.cooling.eta * cfg.cooling.eta;
    let cycles = cfg.cooling.cycles;
    // population distribution over n, marginalizing the per-atom CoolingState
    // cycle; kept long enough for heating
    let mut p = vec![0.0f64; n0 + cycles as usize + 2];
    p[n0] = 1.0;
    let mut fidelity = 1.0;
    let mut rows = Vec::with_capacity(cycles as usize + 1);
    let stats = |p: &[f64]| -> (f64, f64) {
        let mean: f64 = p.iter().enumerate().map(|(n, w)| n as f64 * w).sum();
        (mean, p[0])
    };
    let (mean, ground) = stats(&p);
    rows.push(vec![0.0, mean, ground, fidelity]);
    for cycle in 1..=cycles {
        let mut next = vec![0.0f64; p.len()];
        for (n, &w) in p.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let mut atom = super::CoolingState::new(n as u32, cfg.cooling.eta)?;
            if atom.cycle() {
                // photon scattered: recoil heats by one quantum w.p. η²
                let landed = atom.n as usize;
                next[landed] += w * (1.0 - eta2);
                next[landed + 1] += w * eta2;
            } else {
                // dark at n = 0: untouched, no photon
                next[n] += w;
            }
        }
        p = next;
        fidelity *= per_cycle_fidelity;
        let (mean, ground) = stats(&p);
        rows.push(vec![cycle as f64, mean, ground, fidelity]);
    }
    let header = vec![
        "cycle".into(),
        "mean_n".into(),
        "ground_fraction".into(),
        "coherence_fidelity".into(),
    ];
    let extra = json!({
        "per_cycle_fidelity": per_cycle_fidelity,
        "n0": cfg.cooling.n0,
        "eta": cfg.cooling.eta,
    });
    Ok((header, rows, extra))
}

/// Dressing-requirement comparison: nuclear-spin overlap of the dressed
/// M_J = 0 branch versus dressing Rabi frequency, for the active I = 1/2
/// species and for Sr side by side.
pub fn yb_variants(cfg: &ScenarioConfig, species: &Species) -> Result<Output, ProtocolError> {
    let grid = cfg
        .grid
        .clone()
        .unwrap_or_else(|| SweepGrid::log("rabi_ab_mhz", 200.0, 5_000.0, 21));
    if grid.parameter != "rabi_ab_mhz" {
        return Err(ProtocolError::BadConfig(format!(
            "yb scenario expects grid.parameter = \"rabi_ab_mhz\", got {:?}",
            grid.parameter
        )));
    }
    let yb_a = species.manifold("1P1")?.clone();
    let sr_a = crate::structure::species_registry("Sr87")?
        .manifold("1P1")?
        .clone();
    let rows: Vec<Vec<f64>> = grid
        .values()
        .par_iter()
        .map(|&rabi_mhz| {
            let rabi = mhz(rabi_mhz);
            let f_yb = {
                let spec = dressed_mj0_spectrum(&yb_a, rabi);
                spec.overlap.iter().sum::<f64>() / spec.overlap.len() as f64
            };
            let f_sr = {
                let spec = dressed_mj0_spectrum(&sr_a, rabi);
                spec.overlap.iter().sum::<f64>() / spec.overlap.len() as f64
            };
            vec![rabi_mhz, f_yb, f_sr]
        })
        .collect();
    let header = vec!["rabi_ab_mhz".into(), "overlap_yb".into(), "overlap_sr".into()];
    let extra = json!({ "note": "overlap = mean over M_I of |<n|M_J=0,M_I>|^2" });
    Ok((header, rows, extra))
}
