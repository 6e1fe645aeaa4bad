//! Position-block Fisher information, position error bound and path
//! resolvability.
//!
//! The FIM of the user position splits into a direct part, one rank-one term
//! `|α_k|² S(0) e_k e_kᵀ` per path, and an inter-path interference part driven
//! by the kernel `S(τ_k − τ_k')` of every path pair. Channel gains are treated
//! as nuisance unknowns independent of the position; their cross-information
//! with the position is zero, so only the 2×2 position block is formed.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::channel::PathSet;
use crate::geometry::Point2;
use crate::waveform::WaveformConfig;
use crate::SPEED_OF_LIGHT;

/// Condition number above which a FIM is treated as singular.
pub const MAX_CONDITION_NUMBER: f64 = 1e12;

/// Default central-difference step for [`fim_oracle`], m.
pub const ORACLE_STEP_M: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fim2 {
    pub direct: Matrix2<f64>,
    pub interference: Matrix2<f64>,
    /// `(J + Jᵀ) / 2` of `direct + interference`.
    pub total: Matrix2<f64>,
}

/// Which part of the FIM feeds the PEB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FimPart {
    #[default]
    Total,
    #[serde(rename = "direct")]
    DirectOnly,
}

impl Fim2 {
    pub fn matrix(&self, part: FimPart) -> &Matrix2<f64> {
        match part {
            FimPart::Total => &self.total,
            FimPart::DirectOnly => &self.direct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PebValue {
    /// Metres, or `f64::INFINITY`.
    pub value: f64,
    pub rank_deficient: bool,
}

impl PebValue {
    pub const INFINITE: PebValue = PebValue {
        value: f64::INFINITY,
        rank_deficient: true,
    };

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// `Σ_k |α_k|² S(0) e_k e_kᵀ`.
pub fn fim_direct(pathset: &PathSet, cfg: &WaveformConfig) -> Matrix2<f64> {
    let s0 = cfg.s_zero();
    pathset.iter().fold(Matrix2::zeros(), |acc, p| {
        acc + p.direction * p.direction.transpose() * (p.gain.norm_sqr() * s0)
    })
}

/// `Σ_k Σ_{k'≠k} Re{α_k α*_{k'} S(τ_k − τ_{k'})} e_k e_{k'}ᵀ`.
pub fn fim_interference(pathset: &PathSet, cfg: &WaveformConfig) -> Matrix2<f64> {
    let mut acc = Matrix2::zeros();
    for (i, p) in pathset.paths.iter().enumerate() {
        for (j, q) in pathset.paths.iter().enumerate() {
            if i == j {
                continue;
            }
            let weight = (p.gain * q.gain.conj() * cfg.s_delta(p.delay - q.delay)).re;
            if weight != 0.0 {
                acc += p.direction * q.direction.transpose() * weight;
            }
        }
    }
    acc
}

pub fn fim_total(pathset: &PathSet, cfg: &WaveformConfig) -> Fim2 {
    let direct = fim_direct(pathset, cfg);
    let interference = fim_interference(pathset, cfg);
    let sum = direct + interference;
    Fim2 {
        direct,
        interference,
        total: (sum + sum.transpose()) * 0.5,
    }
}

/// `sqrt(tr(J⁻¹))` of the total FIM.
pub fn peb(fim: &Fim2) -> PebValue {
    peb_of_matrix(&fim.total)
}

/// PEB of an arbitrary 2×2 information matrix, inverted in closed form.
/// Matrices with non-positive determinant or condition number above
/// [`MAX_CONDITION_NUMBER`] give an infinite bound.
pub fn peb_of_matrix(j: &Matrix2<f64>) -> PebValue {
    let (a, b, c) = (j[(0, 0)], 0.5 * (j[(0, 1)] + j[(1, 0)]), j[(1, 1)]);
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return PebValue::INFINITE;
    }
    let det = a * c - b * b;
    let trace = a + c;
    if det <= 0.0 || trace <= 0.0 {
        return PebValue::INFINITE;
    }
    let lambda_max = 0.5 * trace + (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let lambda_min = det / lambda_max;
    if lambda_max / lambda_min > MAX_CONDITION_NUMBER {
        return PebValue::INFINITE;
    }
    // tr(J⁻¹) = tr(adj J) / det J = (a + c) / det
    PebValue {
        value: (trace / det).sqrt(),
        rank_deficient: false,
    }
}

/// Number of delay clusters among the paths with non-zero gain.
///
/// Paths are sorted by delay; each cluster is opened by its earliest path and
/// absorbs every later path that arrives less than `1/W` after that opener.
pub fn count_resolvable_paths(pathset: &PathSet, cfg: &WaveformConfig) -> usize {
    let mut delays: Vec<f64> = pathset
        .iter()
        .filter(|p| p.gain.norm_sqr() > 0.0)
        .map(|p| p.delay)
        .collect();
    delays.sort_by(f64::total_cmp);
    let resolution = 1.0 / cfg.bandwidth_hz();
    let mut clusters = 0;
    let mut opener = f64::NEG_INFINITY;
    for tau in delays {
        if tau - opener >= resolution {
            clusters += 1;
            opener = tau;
        }
    }
    clusters
}

/// Position FIM obtained by differentiating the noiseless observation
/// `f[n] = s[n] Σ_k α_k exp(-j2π n τ_k(x) W/(N+1))` numerically.
///
/// Gains are held fixed; each delay is re-evaluated from the path's last-leg
/// geometry at `x ± step` along each axis, and the FIM is summed as
/// `(1/N0) Σ_n Re{∂f^H ∂f}`. Independent of the closed-form assembly.
pub fn fim_oracle(pathset: &PathSet, cfg: &WaveformConfig, step_m: f64) -> Matrix2<f64> {
    let x = pathset.position;
    let offsets = [Point2::new(step_m, 0.0), Point2::new(0.0, step_m)];
    let amplitude = cfg.pilot_energy().sqrt();
    let w = cfg.bandwidth_hz();
    let n1 = cfg.subcarriers() as f64;

    let observation = |pos: Point2, n: f64| -> Complex64 {
        pathset
            .iter()
            .map(|p| {
                let tau = (p.fixed_length_m + p.leg_origin.distance(pos)) / SPEED_OF_LIGHT;
                let cycles = (n * tau * w / n1).rem_euclid(1.0);
                p.gain * Complex64::from_polar(amplitude, -2.0 * PI * cycles)
            })
            .sum()
    };

    let mut j = Matrix2::zeros();
    for n in cfg.indices() {
        let n = n as f64;
        let grad: Vec<Complex64> = offsets
            .iter()
            .map(|&d| (observation(x + d, n) - observation(x - d, n)) / (2.0 * step_m))
            .collect();
        for r in 0..2 {
            for c in 0..2 {
                j[(r, c)] += (grad[r].conj() * grad[c]).re;
            }
        }
    }
    j / cfg.noise_psd()
}

/// Relative Frobenius distance `‖a − b‖ / ‖b‖`.
pub fn relative_frobenius(a: &Matrix2<f64>, b: &Matrix2<f64>) -> f64 {
    (a - b).norm() / b.norm()
}
