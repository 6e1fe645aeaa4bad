//! Geometric mm-wave channel: complex path gains for the LOS, RIS, reflector
//! and scatter-point paths, plus the RIS steering and phase algebra.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{los_delay, unit_direction, Point2, Scene, BS_POSITION};
use crate::riscontrol::Allocation;
use crate::waveform::WaveformConfig;
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Array response of a half-wavelength ULA, `exp(jπ m sin(angle))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(pub Vec<Complex64>);

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-element RIS phases `ω_{k,m}` in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile(pub Vec<f64>);

impl PhaseProfile {
    /// All-zero phases, i.e. `Ω_k = I`: the profile of an inactive RIS.
    pub fn zeros(elements: usize) -> Self {
        Self(vec![0.0; elements])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    Los,
    Ris(usize),
    Reflector,
    Scatterer,
}

impl fmt::Display for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathKind::Los => write!(f, "LOS"),
            PathKind::Ris(k) => write!(f, "RIS{}", k + 1),
            PathKind::Reflector => write!(f, "reflector"),
            PathKind::Scatterer => write!(f, "scatterer"),
        }
    }
}

/// One propagation path seen at a user position.
///
/// The last leg of every path starts at `leg_origin` (BS, RIS centre, virtual
/// anchor or scatter point); everything before it is a fixed length
/// `fixed_length_m` that does not depend on the user position. The delay is
/// `(fixed_length_m + ‖x − leg_origin‖) / c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub kind: PathKind,
    pub delay: f64,
    pub gain: Complex64,
    pub direction: Vector2<f64>,
    pub leg_origin: Point2,
    pub fixed_length_m: f64,
}

impl Path {
    fn new(
        kind: PathKind,
        x: Point2,
        leg_origin: Point2,
        fixed_length_m: f64,
        gain: Complex64,
    ) -> Result<Self> {
        Ok(Self {
            kind,
            delay: (fixed_length_m + leg_origin.distance(x)) / SPEED_OF_LIGHT,
            gain,
            direction: unit_direction(leg_origin, x)?,
            leg_origin,
            fixed_length_m,
        })
    }

    /// Direct-information intensity `|α|² S(0)`.
    pub fn intensity(&self, cfg: &WaveformConfig) -> f64 {
        self.gain.norm_sqr() * cfg.s_zero()
    }
}

/// All paths for one candidate user position; the LOS path comes first.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub position: Point2,
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Path> {
        self.paths.iter()
    }
}

/// Which secondary object accompanies the LOS path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ris,
    Reflector,
    Scatterer,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Ris, Mode::Reflector, Mode::Scatterer];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ris => "ris",
            Mode::Reflector => "reflector",
            Mode::Scatterer => "scatterer",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ris" => Ok(Mode::Ris),
            "reflector" => Ok(Mode::Reflector),
            "scatterer" => Ok(Mode::Scatterer),
            other => Err(Error::Config(format!(
                "unknown mode '{other}', expected ris, reflector or scatterer"
            ))),
        }
    }
}

/// Path-set recipe: a RIS allocation, or one of the passive baselines.
#[derive(Debug, Clone, Copy)]
pub enum PathMode<'a> {
    Ris(&'a Allocation),
    Reflector,
    Scatterer,
}

pub fn steering_vector(angle: f64, elements: usize) -> SteeringVector {
    let step = PI * angle.sin();
    SteeringVector(
        (0..elements)
            .map(|m| Complex64::from_polar(1.0, step * m as f64))
            .collect(),
    )
}

/// BS-to-RIS response `h_k` for angle of arrival `θ_k`.
pub fn steering_bs_to_ris(theta: f64, elements: usize) -> SteeringVector {
    steering_vector(theta, elements)
}

/// RIS-to-UE response `g_k` for angle of departure `ψ_k`.
pub fn steering_ris_to_ue(psi: f64, elements: usize) -> SteeringVector {
    steering_vector(psi, elements)
}

/// `h_kᵀ Ω_k g_k = Σ_m h_m e^{jω_m} g_m`, by direct summation.
pub fn cascade_response(
    h: &SteeringVector,
    profile: &PhaseProfile,
    g: &SteeringVector,
) -> Result<Complex64> {
    if profile.len() != h.len() || g.len() != h.len() {
        return Err(Error::ProfileLength {
            expected: h.len(),
            got: profile.len(),
        });
    }
    Ok(h.0
        .iter()
        .zip(&profile.0)
        .zip(&g.0)
        .map(|((hm, &w), gm)| hm * Complex64::from_polar(1.0, w) * gm)
        .sum())
}

/// `exp(-j 2π f_c τ)` for a path of the given length.
fn carrier_phasor(path_length_m: f64, cfg: &WaveformConfig) -> Complex64 {
    let cycles = (path_length_m / cfg.wavelength()).rem_euclid(1.0);
    Complex64::from_polar(1.0, -2.0 * PI * cycles)
}

/// `α_0 = e^{-j2πf_cτ_0} λ / (4π‖x‖)`.
pub fn gain_los(x: Point2, cfg: &WaveformConfig) -> Result<Complex64> {
    los_delay(x)?;
    let d = x.norm();
    Ok(carrier_phasor(d, cfg) * (cfg.wavelength() / (4.0 * PI * d)))
}

/// `α_k = e^{-j2πf_cτ_k} λ² / (16π²‖x_k‖‖x − x_k‖) · h_kᵀ Ω_k g_k`.
pub fn gain_ris(
    scene: &Scene,
    k: usize,
    profile: &PhaseProfile,
    x: Point2,
    cfg: &WaveformConfig,
) -> Result<Complex64> {
    let ris = scene.ris_at(k)?;
    if profile.len() != ris.elements {
        return Err(Error::ProfileLength {
            expected: ris.elements,
            got: profile.len(),
        });
    }
    let (theta, psi) = scene.ris_angles(k, x)?;
    let h = steering_bs_to_ris(theta, ris.elements);
    let g = steering_ris_to_ue(psi, ris.elements);
    let response = cascade_response(&h, profile, &g)?;
    let d_in = ris.center.norm();
    let d_out = ris.center.distance(x);
    let lambda = cfg.wavelength();
    let amplitude = lambda * lambda / (16.0 * PI * PI * d_in * d_out);
    Ok(carrier_phasor(d_in + d_out, cfg) * amplitude * response)
}

/// `α_r = I{x} λΓ / (4π‖x_VA − x‖)` with the carrier phase of `τ_r`.
pub fn gain_reflector(scene: &Scene, x: Point2, cfg: &WaveformConfig) -> Result<Complex64> {
    let reflector = *scene.reflector().ok_or(Error::MissingReflector)?;
    let visible = scene.incidence_point(x)?.indicator();
    scene.reflector_delay(x)?;
    if !visible {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let d = scene.virtual_anchor()?.distance(x);
    Ok(carrier_phasor(d, cfg) * (cfg.wavelength() * reflector.gamma / (4.0 * PI * d)))
}

/// `α_s = λ√σ / ((4π)^{3/2}‖s‖‖s − x‖)` with the carrier phase of `τ_s`.
pub fn gain_scatter(scene: &Scene, x: Point2, cfg: &WaveformConfig) -> Result<Complex64> {
    let scatterer = *scene.scatterer().ok_or(Error::MissingScatterer)?;
    scene.scatter_delay(x)?;
    let d_in = scatterer.position.norm();
    let d_out = scatterer.position.distance(x);
    let amplitude =
        cfg.wavelength() * scatterer.rcs.sqrt() / ((4.0 * PI).powf(1.5) * d_in * d_out);
    Ok(carrier_phasor(d_in + d_out, cfg) * amplitude)
}

pub fn los_path(x: Point2, cfg: &WaveformConfig) -> Result<Path> {
    Path::new(PathKind::Los, x, BS_POSITION, 0.0, gain_los(x, cfg)?)
}

pub fn ris_path(
    scene: &Scene,
    k: usize,
    profile: &PhaseProfile,
    x: Point2,
    cfg: &WaveformConfig,
) -> Result<Path> {
    let center = scene.ris_at(k)?.center;
    let gain = gain_ris(scene, k, profile, x, cfg)?;
    Path::new(PathKind::Ris(k), x, center, center.norm(), gain)
}

pub fn reflector_path(scene: &Scene, x: Point2, cfg: &WaveformConfig) -> Result<Path> {
    let gain = gain_reflector(scene, x, cfg)?;
    let va = scene.virtual_anchor()?;
    Path::new(PathKind::Reflector, x, va, 0.0, gain)
}

pub fn scatter_path(scene: &Scene, x: Point2, cfg: &WaveformConfig) -> Result<Path> {
    let gain = gain_scatter(scene, x, cfg)?;
    let s = scene.scatterer().ok_or(Error::MissingScatterer)?.position;
    Path::new(PathKind::Scatterer, x, s, s.norm(), gain)
}

/// LOS path followed by the paths of the requested mode. In RIS mode every
/// RIS contributes a path, inactive ones with their all-zero profile.
pub fn build_pathset(
    scene: &Scene,
    cfg: &WaveformConfig,
    x: Point2,
    mode: PathMode<'_>,
) -> Result<PathSet> {
    scene.check_in_front_of_wall(x)?;
    let mut paths = vec![los_path(x, cfg)?];
    match mode {
        PathMode::Ris(allocation) => {
            allocation.check_against(scene)?;
            for (k, profile) in allocation.profiles().iter().enumerate() {
                paths.push(ris_path(scene, k, profile, x, cfg)?);
            }
        }
        PathMode::Reflector => paths.push(reflector_path(scene, x, cfg)?),
        PathMode::Scatterer => paths.push(scatter_path(scene, x, cfg)?),
    }
    Ok(PathSet { position: x, paths })
}
