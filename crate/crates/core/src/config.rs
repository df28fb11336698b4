//! Scenario parameters and the SINR thresholds derived from them.

use crate::error::{config, Result};

/// Linear power ratio from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// SINR threshold `2^rate - 1` for a target rate in bits per channel use.
pub fn sinr_threshold(rate: f64) -> f64 {
    (rate * std::f64::consts::LN_2).exp_m1()
}

/// One uplink scenario: a grant-based user `U0` and `M` grant-free users
/// contending for `U0`'s resource block.
///
/// Noise power is normalized to one, so `p0` and `pbar` are transmit SNRs.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of grant-free users.
    pub m: usize,
    /// Linear transmit SNR of the grant-based user.
    pub p0: f64,
    /// Linear transmit SNR shared by all grant-free users.
    pub pbar: f64,
    /// Admission threshold on the channel gain.
    pub tau: f64,
    /// Target rate of the grant-based user (bits per channel use).
    pub r0: f64,
    /// Common fixed target rate of the grant-free users.
    pub ri: f64,
    /// Payload size of each grant-free user, in bits.
    pub payload_bits: f64,
    /// Channel uses of the resource block.
    pub block_uses: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            m: 20,
            p0: 100.0,
            pbar: 1.0,
            tau: 1.0,
            r0: 1.0,
            ri: 0.5,
            payload_bits: 60.0,
            block_uses: 100.0,
        }
    }
}

impl SystemConfig {
    /// Checks the positivity invariants. `r0 = 0` and `pbar = 0` are accepted
    /// as degenerate limits (no rate requirement, silent grant-free users).
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(config("M must be at least 1"));
        }
        let nonneg = [("P0", self.p0), ("Pbar", self.pbar), ("R0", self.r0)];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        let positive = [
            ("tau", self.tau),
            ("Ri", self.ri),
            ("L", self.payload_bits),
            ("B0_uses", self.block_uses),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(config(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if self.p0 == 0.0 {
            return Err(config("P0 must be positive"));
        }
        Ok(())
    }

    /// `eps0 = 2^R0 - 1`.
    pub fn eps0(&self) -> f64 {
        sinr_threshold(self.r0)
    }

    /// `eps_i = 2^Ri - 1`.
    pub fn eps_i(&self) -> f64 {
        sinr_threshold(self.ri)
    }

    /// Per-user rate needed to deliver the payload within the block, `L / B0`.
    pub fn payload_rate(&self) -> f64 {
        self.payload_bits / self.block_uses
    }

    /// `2^(L/B0) - 1`.
    pub fn eps_payload(&self) -> f64 {
        sinr_threshold(self.payload_rate())
    }

    /// Sum-rate threshold for `n` grant-free users at the common rate,
    /// `2^(n Ri) - 1`.
    pub fn eps_sum(&self, n: usize) -> f64 {
        sinr_threshold(n as f64 * self.ri)
    }

    /// `eps0 / P0`, the grant-based outage threshold on `|h0|^2`.
    pub fn u0_gain_threshold(&self) -> f64 {
        self.eps0() / self.p0
    }
}
