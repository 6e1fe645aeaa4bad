//! RIS resource allocation: closed-form phase profiles for active surfaces and
//! exhaustive search over activation patterns under a budget and a
//! minimum-index-gap constraint.

use std::f64::consts::PI;

use crate::channel::{los_path, ris_path, Path, PathSet, PhaseProfile};
use crate::fim::{fim_total, peb, PebValue};
use crate::geometry::{Point2, Scene};
use crate::waveform::WaveformConfig;
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Largest RIS count accepted by the exhaustive search.
pub const MAX_EXHAUSTIVE_RIS: usize = 20;

/// Activation pattern `a` and the per-RIS phase profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    active: Vec<bool>,
    profiles: Vec<PhaseProfile>,
}

impl Allocation {
    /// Every RIS inactive, all-zero phases.
    pub fn inactive(scene: &Scene) -> Self {
        Self {
            active: vec![false; scene.ris_count()],
            profiles: scene
                .ris()
                .iter()
                .map(|r| PhaseProfile::zeros(r.elements))
                .collect(),
        }
    }

    /// Active RIS steer towards `target` with [`optimal_phases`].
    pub fn for_target(scene: &Scene, active: &[bool], target: Point2) -> Result<Self> {
        if active.len() != scene.ris_count() {
            return Err(Error::InvalidAllocation(format!(
                "{} activation bits for {} RIS",
                active.len(),
                scene.ris_count()
            )));
        }
        let profiles = scene
            .ris()
            .iter()
            .enumerate()
            .map(|(k, ris)| {
                if active[k] {
                    let (theta, psi) = scene.ris_angles(k, target)?;
                    Ok(optimal_phases(theta, psi, ris.elements))
                } else {
                    Ok(PhaseProfile::zeros(ris.elements))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            active: active.to_vec(),
            profiles,
        })
    }

    pub fn from_parts(
        scene: &Scene,
        active: Vec<bool>,
        profiles: Vec<PhaseProfile>,
    ) -> Result<Self> {
        let allocation = Self { active, profiles };
        allocation.check_against(scene)?;
        Ok(allocation)
    }

    pub fn check_against(&self, scene: &Scene) -> Result<()> {
        if self.active.len() != scene.ris_count() || self.profiles.len() != scene.ris_count() {
            return Err(Error::InvalidAllocation(format!(
                "allocation covers {} RIS, scene has {}",
                self.active.len(),
                scene.ris_count()
            )));
        }
        for (k, (ris, profile)) in scene.ris().iter().zip(&self.profiles).enumerate() {
            if profile.len() != ris.elements {
                return Err(Error::ProfileLength {
                    expected: ris.elements,
                    got: profile.len(),
                });
            }
            if !self.active[k] && !profile.is_zero() {
                return Err(Error::InvalidAllocation(format!(
                    "inactive RIS {k} carries a non-zero phase profile"
                )));
            }
        }
        Ok(())
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn profiles(&self) -> &[PhaseProfile] {
        &self.profiles
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// The activation vector as a string of `0`/`1`, RIS 1 first.
    pub fn bits(&self) -> String {
        bits_string(&self.active)
    }
}

pub fn bits_string(active: &[bool]) -> String {
    active.iter().map(|&a| if a { '1' } else { '0' }).collect()
}

/// Activation budget `K̄` and the real-valued gap threshold `c / (W D)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConstraints {
    pub max_active: usize,
    pub min_gap_threshold: f64,
}

impl SelectionConstraints {
    pub fn new(scene: &Scene, cfg: &WaveformConfig, max_active: usize) -> Result<Self> {
        if max_active > scene.ris_count() {
            return Err(Error::InvalidAllocation(format!(
                "activation budget {max_active} exceeds the {} available RIS",
                scene.ris_count()
            )));
        }
        Ok(Self {
            max_active,
            min_gap_threshold: SPEED_OF_LIGHT / (cfg.bandwidth_hz() * scene.inter_ris_spacing()),
        })
    }

    pub fn admits(&self, active: &[bool]) -> bool {
        active.iter().filter(|&&a| a).count() <= self.max_active
            && d_min(active).is_none_or(|gap| gap as f64 > self.min_gap_threshold)
    }
}

/// `ω_{k,m} = −π m (sin θ_k + sin ψ_k)`, which co-phases all terms of
/// `h_kᵀ Ω_k g_k` so that its magnitude equals `M`.
pub fn optimal_phases(theta: f64, psi: f64, elements: usize) -> PhaseProfile {
    let step = -PI * (theta.sin() + psi.sin());
    PhaseProfile((0..elements).map(|m| step * m as f64).collect())
}

/// Smallest index distance between consecutive active entries; `None` stands
/// for an unbounded gap (at most one active entry).
pub fn d_min(active: &[bool]) -> Option<usize> {
    let on: Vec<usize> = active
        .iter()
        .enumerate()
        .filter_map(|(i, &a)| a.then_some(i))
        .collect();
    on.windows(2).map(|w| w[1] - w[0]).min()
}

/// Outcome of a selection: the allocation and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub allocation: Allocation,
    pub peb: PebValue,
    /// Objective value used for ranking; equals `peb.value` for point selection.
    pub score: f64,
}

/// Activation patterns admitted by `constraints`, in lexicographic order of
/// the bit vector (RIS 1 most significant).
pub fn feasible_patterns(
    ris_count: usize,
    constraints: &SelectionConstraints,
) -> Result<Vec<Vec<bool>>> {
    if ris_count > MAX_EXHAUSTIVE_RIS {
        return Err(Error::SelectionBudget {
            count: ris_count,
            max: MAX_EXHAUSTIVE_RIS,
        });
    }
    Ok((0u32..1 << ris_count)
        .map(|mask| {
            (0..ris_count)
                .map(|k| mask & (1 << (ris_count - 1 - k)) != 0)
                .collect::<Vec<bool>>()
        })
        .filter(|a| constraints.admits(a))
        .collect())
}

/// Per-position path cache: the LOS path plus every RIS path in both its
/// active (steered to `target`) and inactive state.
struct PathCache {
    position: Point2,
    los: Path,
    active: Vec<Path>,
    inactive: Vec<Path>,
}

impl PathCache {
    fn new(
        scene: &Scene,
        cfg: &WaveformConfig,
        position: Point2,
        steering: &[PhaseProfile],
    ) -> Result<Self> {
        scene.check_in_front_of_wall(position)?;
        let mut active = Vec::with_capacity(scene.ris_count());
        let mut inactive = Vec::with_capacity(scene.ris_count());
        for (k, ris) in scene.ris().iter().enumerate() {
            active.push(ris_path(scene, k, &steering[k], position, cfg)?);
            inactive.push(ris_path(scene, k, &PhaseProfile::zeros(ris.elements), position, cfg)?);
        }
        Ok(Self {
            position,
            los: los_path(position, cfg)?,
            active,
            inactive,
        })
    }

    fn pathset(&self, pattern: &[bool]) -> PathSet {
        let mut paths = Vec::with_capacity(pattern.len() + 1);
        paths.push(self.los.clone());
        for (k, &on) in pattern.iter().enumerate() {
            paths.push(if on { &self.active[k] } else { &self.inactive[k] }.clone());
        }
        PathSet {
            position: self.position,
            paths,
        }
    }
}

fn steering_profiles(scene: &Scene, target: Point2) -> Result<Vec<PhaseProfile>> {
    scene
        .ris()
        .iter()
        .enumerate()
        .map(|(k, ris)| {
            let (theta, psi) = scene.ris_angles(k, target)?;
            Ok(optimal_phases(theta, psi, ris.elements))
        })
        .collect()
}

/// Exhaustive minimisation of the PEB at `x_hat` over all admissible
/// activation patterns. Ties keep the lexicographically smallest pattern.
pub fn select_ris(
    scene: &Scene,
    x_hat: Point2,
    cfg: &WaveformConfig,
    constraints: &SelectionConstraints,
) -> Result<Selection> {
    let patterns = feasible_patterns(scene.ris_count(), constraints)?;
    let steering = steering_profiles(scene, x_hat)?;
    let cache = PathCache::new(scene, cfg, x_hat, &steering)?;
    let mut best: Option<(Vec<bool>, PebValue)> = None;
    for pattern in patterns {
        let value = peb(&fim_total(&cache.pathset(&pattern), cfg));
        if best.as_ref().is_none_or(|(_, b)| value.value < b.value) {
            best = Some((pattern, value));
        }
    }
    // the all-zero pattern is always admissible
    let (pattern, value) = best.expect("empty feasible set");
    Ok(Selection {
        allocation: Allocation::for_target(scene, &pattern, x_hat)?,
        peb: value,
        score: value.value,
    })
}

/// Objective for selection under user-position uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobustObjective {
    /// Largest PEB over the samples.
    WorstCase,
    /// Mean PEB over the samples, each clamped to `cap_m` first.
    Expected { cap_m: f64 },
}

/// Like [`select_ris`], but scores each pattern over a set of candidate user
/// positions. Active RIS steer towards the sample centroid.
pub fn robust_select(
    scene: &Scene,
    samples: &[Point2],
    cfg: &WaveformConfig,
    constraints: &SelectionConstraints,
    objective: RobustObjective,
) -> Result<Selection> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let patterns = feasible_patterns(scene.ris_count(), constraints)?;
    let centroid = samples.iter().fold(Point2::default(), |acc, &p| acc + p)
        * (1.0 / samples.len() as f64);
    let steering = steering_profiles(scene, centroid)?;
    let caches = samples
        .iter()
        .map(|&x| PathCache::new(scene, cfg, x, &steering))
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(Vec<bool>, f64, PebValue)> = None;
    for pattern in patterns {
        let pebs: Vec<PebValue> = caches
            .iter()
            .map(|c| peb(&fim_total(&c.pathset(&pattern), cfg)))
            .collect();
        let worst = pebs
            .iter()
            .copied()
            .max_by(|a, b| a.value.total_cmp(&b.value))
            .expect("non-empty samples");
        let score = match objective {
            RobustObjective::WorstCase => worst.value,
            RobustObjective::Expected { cap_m } => {
                pebs.iter().map(|p| p.value.min(cap_m)).sum::<f64>() / pebs.len() as f64
            }
        };
        if best.as_ref().is_none_or(|(_, s, _)| score < *s) {
            best = Some((pattern, score, worst));
        }
    }
    let (pattern, score, worst) = best.expect("empty feasible set");
    Ok(Selection {
        allocation: Allocation::for_target(scene, &pattern, centroid)?,
        peb: worst,
        score,
    })
}
