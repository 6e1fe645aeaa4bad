//! OFDM waveform parameters and the delay-information kernel `S(Δ)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result, BOLTZMANN, SPEED_OF_LIGHT};

/// Reference noise temperature for the thermal noise floor, K.
pub const REFERENCE_TEMPERATURE_K: f64 = 290.0;

/// OFDM pilot configuration. Pilots have constant energy `E_s = P / W` on
/// each of the `N + 1` subcarriers indexed `-N/2 ..= N/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformConfig {
    carrier_hz: f64,
    bandwidth_hz: f64,
    subcarriers: usize,
    power_w: f64,
    noise_psd_w_per_hz: f64,
}

impl WaveformConfig {
    pub fn new(
        carrier_hz: f64,
        bandwidth_hz: f64,
        subcarriers: usize,
        power_w: f64,
        noise_psd_w_per_hz: f64,
    ) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(carrier_hz) {
            return Err(Error::InvalidWaveform(format!("carrier frequency {carrier_hz} Hz")));
        }
        if !positive(bandwidth_hz) {
            return Err(Error::InvalidWaveform(format!("bandwidth {bandwidth_hz} Hz")));
        }
        if subcarriers.is_multiple_of(2) {
            return Err(Error::InvalidWaveform(format!(
                "subcarrier count must be odd for a symmetric index range, got {subcarriers}"
            )));
        }
        if !positive(power_w) {
            return Err(Error::InvalidWaveform(format!("transmit power {power_w} W")));
        }
        if !positive(noise_psd_w_per_hz) {
            return Err(Error::InvalidWaveform(format!(
                "noise PSD {noise_psd_w_per_hz} W/Hz"
            )));
        }
        Ok(Self {
            carrier_hz,
            bandwidth_hz,
            subcarriers,
            power_w,
            noise_psd_w_per_hz,
        })
    }

    /// Builds a config from log-domain quantities. The noise PSD is
    /// `k_B · 290 K` scaled by the noise figure.
    pub fn from_log_units(
        carrier_hz: f64,
        bandwidth_hz: f64,
        subcarriers: usize,
        power_dbm: f64,
        noise_figure_db: f64,
    ) -> Result<Self> {
        Self::new(
            carrier_hz,
            bandwidth_hz,
            subcarriers,
            dbm_to_watts(power_dbm),
            thermal_noise_psd(noise_figure_db),
        )
    }

    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    /// Total number of subcarriers, `N + 1`.
    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn power_w(&self) -> f64 {
        self.power_w
    }

    pub fn noise_psd(&self) -> f64 {
        self.noise_psd_w_per_hz
    }

    pub fn with_bandwidth(self, bandwidth_hz: f64) -> Result<Self> {
        Self::new(
            self.carrier_hz,
            bandwidth_hz,
            self.subcarriers,
            self.power_w,
            self.noise_psd_w_per_hz,
        )
    }

    pub fn with_noise_psd(self, noise_psd_w_per_hz: f64) -> Result<Self> {
        Self::new(
            self.carrier_hz,
            self.bandwidth_hz,
            self.subcarriers,
            self.power_w,
            noise_psd_w_per_hz,
        )
    }

    /// `λ = c / f_c`.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Per-subcarrier pilot energy `E_s = P / W`.
    pub fn pilot_energy(&self) -> f64 {
        self.power_w / self.bandwidth_hz
    }

    /// Largest subcarrier index `N / 2`.
    pub fn half_index(&self) -> i64 {
        (self.subcarriers / 2) as i64
    }

    /// Subcarrier indices `-N/2 ..= N/2`.
    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let h = self.half_index();
        -h..=h
    }

    /// `2π W / ((N + 1) c)`: derivative of the subcarrier-1 phase with respect
    /// to path length, rad/m.
    pub fn phase_slope_per_m(&self) -> f64 {
        2.0 * PI * self.bandwidth_hz / (self.subcarriers as f64 * SPEED_OF_LIGHT)
    }

    /// `S(Δ) = (1/N0) Σ_n |s[n]|² (2πnW/((N+1)c))² exp(-j2πnΔW/(N+1))`.
    ///
    /// With constant-modulus pilots the `±n` terms pair into cosines, so the
    /// value is real; it is still returned as a complex number.
    pub fn s_delta(&self, delta_s: f64) -> Complex64 {
        Complex64::new(self.s_delta_real(delta_s), 0.0)
    }

    pub fn s_delta_real(&self, delta_s: f64) -> f64 {
        let cycles = (delta_s * self.bandwidth_hz / self.subcarriers as f64).rem_euclid(1.0);
        let step = 2.0 * PI * cycles;
        let sum: f64 = (1..=self.half_index())
            .map(|n| {
                let n = n as f64;
                2.0 * n * n * (step * n).cos()
            })
            .sum();
        self.kernel_scale() * sum
    }

    /// `S(0)`, real and strictly positive when `N ≥ 2`.
    pub fn s_zero(&self) -> f64 {
        let h = self.half_index() as f64;
        // Σ_{n=-h}^{h} n² = h(h+1)(2h+1)/3
        self.kernel_scale() * h * (h + 1.0) * (2.0 * h + 1.0) / 3.0
    }

    fn kernel_scale(&self) -> f64 {
        let slope = self.phase_slope_per_m();
        self.pilot_energy() / self.noise_psd_w_per_hz * slope * slope
    }

    /// Range resolution `c / W`, m.
    pub fn delay_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / self.bandwidth_hz
    }

    /// Maximum unambiguous range `c (N + 1) / W`, m.
    pub fn unambiguous_range(&self) -> f64 {
        SPEED_OF_LIGHT * self.subcarriers as f64 / self.bandwidth_hz
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn thermal_noise_psd(noise_figure_db: f64) -> f64 {
    BOLTZMANN * REFERENCE_TEMPERATURE_K * db_to_linear(noise_figure_db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(bandwidth_hz: f64) -> WaveformConfig {
        WaveformConfig::from_log_units(28e9, bandwidth_hz, 129, 0.0, 0.0).unwrap()
    }

    /// Literal evaluation of the kernel definition over all subcarriers.
    fn brute_force_s(cfg: &WaveformConfig, delta: f64) -> Complex64 {
        let n1 = cfg.subcarriers() as f64;
        let w = cfg.bandwidth_hz();
        let mut acc = Complex64::new(0.0, 0.0);
        for n in cfg.indices() {
            let n = n as f64;
            let d = 2.0 * PI * n * w / (n1 * SPEED_OF_LIGHT);
            let phase = -2.0 * PI * n * delta * w / n1;
            acc += cfg.pilot_energy() * d * d * Complex64::from_polar(1.0, phase);
        }
        acc / cfg.noise_psd()
    }

    #[test]
    fn s_zero_matches_integer_sum() {
        let c = cfg(100e6);
        let sum_n2: i64 = (-64..=64i64).map(|n| n * n).sum();
        assert_eq!(sum_n2, 178_880);
        let es = 1e-3 / 100e6;
        assert_eq!(c.pilot_energy(), es);
        let slope = 2.0 * PI * 100e6 / (129.0 * SPEED_OF_LIGHT);
        let expected = es / c.noise_psd() * slope * slope * 178_880.0;
        assert!((c.s_zero() - expected).abs() < 1e-12 * expected);
        assert!((c.s_delta(0.0).re - expected).abs() < 1e-12 * expected);
        assert_eq!(c.s_delta(0.0).im, 0.0);
    }

    #[test]
    fn s_delta_is_hermitian_and_periodic() {
        let c = cfg(100e6);
        let period = 129.0 / 100e6;
        for delta in [1e-9, 7.3e-9, 2.5e-8, 1.1e-7] {
            let plus = c.s_delta(delta);
            let minus = c.s_delta(-delta);
            assert!((plus - minus.conj()).norm() < 1e-12 * c.s_zero());
        }
        let wrapped = c.s_delta(period);
        assert!((wrapped.re - c.s_zero()).abs() < 1e-12 * c.s_zero());
    }

    #[test]
    fn s_delta_matches_brute_force() {
        for bw in [100e6, 1e9] {
            let c = cfg(bw);
            for i in 0..200 {
                let delta = -4e-7 + i as f64 * 4.1e-9;
                let fast = c.s_delta(delta);
                let slow = brute_force_s(&c, delta);
                assert!(
                    (fast - slow).norm() <= 1e-12 * c.s_zero() * 10.0,
                    "bw {bw}, delta {delta}: {fast} vs {slow}"
                );
                assert!(slow.im.abs() < 1e-12 * c.s_zero());
            }
        }
    }

    #[test]
    fn resolution_and_range_numbers() {
        let c = cfg(100e6);
        assert!((c.delay_resolution() - 2.998).abs() < 5e-4);
        assert!((c.unambiguous_range() - 386.7).abs() / 386.7 < 5e-3);
        let c = cfg(1e9);
        assert!((c.delay_resolution() - 0.2998).abs() < 5e-5);
        assert!((c.unambiguous_range() - 38.67).abs() / 38.67 < 5e-3);
        let unit = WaveformConfig::new(28e9, SPEED_OF_LIGHT, 1, 1e-3, 1e-20).unwrap();
        assert_eq!(unit.delay_resolution(), 1.0);
        assert_eq!(unit.unambiguous_range(), 1.0);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(WaveformConfig::new(28e9, 1e8, 128, 1e-3, 1e-20).is_err());
        assert!(WaveformConfig::new(28e9, 0.0, 129, 1e-3, 1e-20).is_err());
        assert!(WaveformConfig::new(28e9, 1e8, 129, -1.0, 1e-20).is_err());
        assert!(WaveformConfig::new(28e9, 1e8, 129, 1e-3, 0.0).is_err());
        assert!(WaveformConfig::new(f64::NAN, 1e8, 129, 1e-3, 1e-20).is_err());
    }

    #[test]
    fn log_unit_conversions() {
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-12);
        let n0 = thermal_noise_psd(0.0);
        let dbm_per_hz = 10.0 * (n0 * 1000.0).log10();
        assert!((dbm_per_hz + 174.0).abs() < 0.05);
        assert!((thermal_noise_psd(3.0) / n0 - 10f64.powf(0.3)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn kernel_bounded_by_s_zero(delta in -1e-6..1e-6f64, wide in any::<bool>()) {
            let c = cfg(if wide { 1e9 } else { 100e6 });
            let s = c.s_delta(delta);
            prop_assert!(s.norm() <= c.s_zero() * (1.0 + 1e-12));
            prop_assert!(s.im.abs() <= 1e-12 * c.s_zero());
        }

        #[test]
        fn kernel_is_periodic(delta in -1e-6..1e-6f64) {
            let c = cfg(100e6);
            let period = 129.0 / 100e6;
            let a = c.s_delta(delta);
            let b = c.s_delta(delta + period);
            prop_assert!((a - b).norm() <= 1e-9 * c.s_zero());
        }
    }
}
