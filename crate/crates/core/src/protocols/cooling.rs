//! Per-atom state for the three-step sideband cooling cycle.

use serde::{Deserialize, Serialize};

use super::ProtocolError;

/// Electronic stage of the cooling cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoolingStage {
    /// g ¹S₀ — holds the qudit between cycles.
    Ground,
    /// Clock ³P₀ — reached by the red-sideband π pulse, costing one quantum.
    Clock,
    /// a ¹P₁ (M_J = 0) — the dressed quench level that decays back to ground.
    Dressed,
}

/// One atom in the cooling cycle: electronic stage, vibrational quantum
/// number, and Lamb-Dicke parameter. The ensemble driver marginalizes this
/// over a distribution in n, applying recoil heating with probability η² per
/// scattered photon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoolingState {
    pub stage: CoolingStage,
    pub n: u32,
    pub eta: f64,
}

impl CoolingState {
    pub fn new(n: u32, eta: f64) -> Result<Self, ProtocolError> {
        if !(0.0..1.0).contains(&eta) {
            return Err(ProtocolError::BadConfig(format!(
                "Lamb-Dicke parameter {eta} outside [0, 1)"
            )));
        }
        Ok(CoolingState {
            stage: CoolingStage::Ground,
            n,
            eta,
        })
    }

    /// Red-sideband π pulse: Ground(n) → Clock(n−1) for n > 0. An atom at
    /// n = 0 has no red sideband and stays dark in the ground stage.
    pub fn sideband_pulse(&mut self) -> bool {
        if self.stage == CoolingStage::Ground && self.n > 0 {
            self.stage = CoolingStage::Clock;
            self.n -= 1;
            true
        } else {
            false
        }
    }

    /// Two-photon repump: Clock → Dressed, vibrational number unchanged.
    pub fn repump(&mut self) {
        if self.stage == CoolingStage::Clock {
            self.stage = CoolingStage::Dressed;
        }
    }

    /// Spontaneous quench back to ground, scattering one photon. Returns
    /// true when a photon was scattered (the ensemble driver then applies
    /// n → n+1 with probability η²).
    pub fn decay(&mut self) -> bool {
        if self.stage == CoolingStage::Dressed {
            self.stage = CoolingStage::Ground;
            true
        } else {
            false
        }
    }

    /// One full three-step cycle; true iff a photon was scattered.
    pub fn cycle(&mut self) -> bool {
        if !self.sideband_pulse() {
            return false;
        }
        self.repump();
        self.decay()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_step_cycle_lowers_n_and_scatters_once() {
        let mut atom = CoolingState::new(5, 0.1).unwrap();
        for expected_n in (0..5).rev() {
            assert!(atom.cycle());
            assert_eq!(atom.stage, CoolingStage::Ground);
            assert_eq!(atom.n, expected_n);
        }
        // dark at n = 0: no pulse, no photon
        assert!(!atom.cycle());
        assert_eq!(atom.n, 0);
    }

    #[test]
    fn invariants_enforced() {
        assert!(CoolingState::new(0, 0.0).is_ok());
        assert!(CoolingState::new(3, 0.999).is_ok());
        assert!(CoolingState::new(3, 1.0).is_err());
        assert!(CoolingState::new(3, -0.1).is_err());
    }
}
