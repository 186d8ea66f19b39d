//! Unit conventions.
//!
//! Internally every frequency-like quantity is an angular frequency in
//! rad/µs; every time is in µs. All external inputs and outputs (configs,
//! CSV, CLI flags) are the /2π values in MHz, converted exactly at the I/O
//! boundary. 1 MHz of /2π frequency is 2π rad/µs.

pub const TAU: f64 = std::f64::consts::TAU;

/// /2π MHz → rad/µs.
pub fn mhz(f_mhz: f64) -> f64 {
    TAU * f_mhz
}

/// rad/µs → /2π MHz.
pub fn to_mhz(omega: f64) -> f64 {
    omega / TAU
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        assert_eq!(to_mhz(mhz(32.0)), 32.0);
        assert_eq!(mhz(1.0), TAU);
        assert_eq!(mhz(0.5), std::f64::consts::PI);
    }
}
