//! Ring-coupled sinusoid-plus-noise grid states.
//!
//! For bus `i` (1-based, ring neighbour `i − 1` with bus 0 meaning bus `n`)
//! and time index `t`:
//!
//! ```text
//! ω(t)    = 2π · (t mod P) / P
//! |V_i|(t) = base + A_i · sin(ω(t) + φ_i) + ε_i(t)
//! θ_i(t)   = offset_i + B_i · sin(ω(t) + ψ_i) + c · B_{i−1} · sin(ω(t) + ψ_{i−1}) + ε'_i(t)
//! ```
//!
//! with `ε ~ N(0, σ_vm²)` and `ε' ~ N(0, σ_va²)`. Magnitudes are in p.u.,
//! angles in degrees. Reducing `t` modulo the period makes noise-free series
//! exactly periodic in floating point.
//!
//! The per-bus profile drawn by [`SyntheticConfig::with_random_profile`]
//! uses stream 0 of a ChaCha8 generator seeded with `seed`; the noise uses
//! stream 1, drawn row by row (all magnitudes, then all angles).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{StateSeries, StateVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_buses: usize,
    pub length: usize,
    pub base_magnitude: f64,
    pub magnitude_amplitude: Vec<f64>,
    pub magnitude_phase: Vec<f64>,
    pub angle_offset: Vec<f64>,
    pub angle_amplitude: Vec<f64>,
    pub angle_phase: Vec<f64>,
    /// Samples per daily cycle.
    pub period: usize,
    pub noise_magnitude: f64,
    pub noise_angle: f64,
    pub coupling: f64,
    pub seed: u64,
}

pub const DEFAULT_PERIOD: usize = 24;
pub const DEFAULT_NOISE_MAGNITUDE: f64 = 5e-4;
pub const DEFAULT_NOISE_ANGLE: f64 = 0.05;
pub const DEFAULT_COUPLING: f64 = 0.3;

impl SyntheticConfig {
    /// Draws a per-bus profile from `seed`: magnitude amplitudes in
    /// [0.01, 0.03] p.u., angle offsets in [−40, 0]°, angle amplitudes in
    /// [2, 8]°, phases uniform on [0, 2π).
    pub fn with_random_profile(n_buses: usize, length: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        let mut draw = |lo: f64, hi: f64| -> Vec<f64> {
            (0..n_buses).map(|_| rng.random_range(lo..hi)).collect()
        };
        let magnitude_amplitude = draw(0.01, 0.03);
        let magnitude_phase = draw(0.0, TAU);
        let angle_offset = draw(-40.0, 0.0);
        let angle_amplitude = draw(2.0, 8.0);
        let angle_phase = draw(0.0, TAU);
        Self {
            n_buses,
            length,
            base_magnitude: 1.0,
            magnitude_amplitude,
            magnitude_phase,
            angle_offset,
            angle_amplitude,
            angle_phase,
            period: DEFAULT_PERIOD,
            noise_magnitude: DEFAULT_NOISE_MAGNITUDE,
            noise_angle: DEFAULT_NOISE_ANGLE,
            coupling: DEFAULT_COUPLING,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_buses;
        if n == 0 {
            return Err(Error::InvalidArgument("synthetic series needs at least one bus".into()));
        }
        if self.length < 2 {
            return Err(Error::InvalidArgument(format!(
                "synthetic series length must be at least 2, got {}",
                self.length
            )));
        }
        if self.period < 2 {
            return Err(Error::InvalidArgument(format!(
                "period must be at least 2 samples, got {}",
                self.period
            )));
        }
        if !(self.noise_magnitude >= 0.0 && self.noise_angle >= 0.0) {
            return Err(Error::InvalidArgument("noise std must be non-negative".into()));
        }
        for (name, v) in [
            ("magnitude_amplitude", &self.magnitude_amplitude),
            ("magnitude_phase", &self.magnitude_phase),
            ("angle_offset", &self.angle_offset),
            ("angle_amplitude", &self.angle_amplitude),
            ("angle_phase", &self.angle_phase),
        ] {
            if v.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "{name} has {} entries for {n} buses",
                    v.len()
                )));
            }
        }
        Ok(())
    }

    /// Noise-free state at time index `t`.
    pub fn clean_state(&self, t: usize) -> Vec<f64> {
        let n = self.n_buses;
        let omega = TAU * ((t % self.period) as f64) / (self.period as f64);
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            out.push(
                self.base_magnitude
                    + self.magnitude_amplitude[i] * (omega + self.magnitude_phase[i]).sin(),
            );
        }
        let own: Vec<f64> = (0..n)
            .map(|i| self.angle_amplitude[i] * (omega + self.angle_phase[i]).sin())
            .collect();
        for i in 0..n {
            let neighbour = (i + n - 1) % n;
            out.push(self.angle_offset[i] + own[i] + self.coupling * own[neighbour]);
        }
        out
    }
}

pub fn generate_synthetic_series(cfg: &SyntheticConfig) -> Result<StateSeries> {
    cfg.validate()?;
    let n = cfg.n_buses;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let vm_noise = Normal::new(0.0, cfg.noise_magnitude)
        .map_err(|e| Error::InvalidArgument(format!("magnitude noise: {e}")))?;
    let va_noise = Normal::new(0.0, cfg.noise_angle)
        .map_err(|e| Error::InvalidArgument(format!("angle noise: {e}")))?;

    let mut states = Vec::with_capacity(cfg.length);
    for t in 0..cfg.length {
        let mut s = cfg.clean_state(t);
        for (i, v) in s.iter_mut().enumerate() {
            let noise = if i < n { &vm_noise } else { &va_noise };
            *v += noise.sample(&mut rng);
        }
        states.push(StateVector::new(s)?);
    }
    StateSeries::new(n, (0..cfg.length).map(|t| t as f64).collect(), states)
}
