//! Self-checks run by the `validate` subcommand: closed-form FIM against the
//! finite-difference oracle, optimal phase profiles against the array bound,
//! and RIS selection against a plain brute force.

use std::fmt;

use nalgebra::Matrix2;

use crate::channel::{
    build_pathset, cascade_response, steering_bs_to_ris, steering_ris_to_ue, Mode, PathMode,
    PathSet,
};
use crate::fim::{fim_oracle, fim_total, peb, relative_frobenius, ORACLE_STEP_M};
use crate::geometry::{Point2, Scene};
use crate::riscontrol::{optimal_phases, select_ris, Allocation, SelectionConstraints};
use crate::waveform::WaveformConfig;
use crate::{Result, SPEED_OF_LIGHT};

pub const FIM_ORACLE_TOLERANCE: f64 = 1e-5;
pub const PHASE_TOLERANCE: f64 = 1e-9;

/// Probe positions shared by the FIM and selection checks. Those not in front
/// of the scene's wall are skipped.
pub const PROBE_POSITIONS: [Point2; 6] = [
    Point2 { x: 2.0, y: 5.0 },
    Point2 { x: -3.0, y: 7.0 },
    Point2 { x: 8.0, y: 4.0 },
    Point2 { x: 4.0, y: 8.5 },
    Point2 { x: 12.0, y: 2.0 },
    Point2 { x: 0.5, y: 1.5 },
];

fn probes(scene: &Scene) -> Vec<Point2> {
    PROBE_POSITIONS
        .into_iter()
        .filter(|&x| x.y < scene.wall_offset() - 0.25)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "[{tag}] {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

fn pathset_for(
    scene: &Scene,
    cfg: &WaveformConfig,
    x: Point2,
    mode: Mode,
    constraints: &SelectionConstraints,
) -> Result<PathSet> {
    match mode {
        Mode::Ris => {
            let sel = select_ris(scene, x, cfg, constraints)?;
            build_pathset(scene, cfg, x, PathMode::Ris(&sel.allocation))
        }
        Mode::Reflector => build_pathset(scene, cfg, x, PathMode::Reflector),
        Mode::Scatterer => build_pathset(scene, cfg, x, PathMode::Scatterer),
    }
}

/// Compares `assemble` against the numerical oracle at every probe position,
/// one check per mode the scene supports.
pub fn check_fim_oracle<F>(
    scene: &Scene,
    cfg: &WaveformConfig,
    constraints: &SelectionConstraints,
    assemble: F,
) -> Result<Vec<CheckResult>>
where
    F: Fn(&PathSet, &WaveformConfig) -> Matrix2<f64>,
{
    let mut out = Vec::new();
    for mode in Mode::ALL {
        let supported = match mode {
            Mode::Ris => true,
            Mode::Reflector => scene.reflector().is_some(),
            Mode::Scatterer => scene.scatterer().is_some(),
        };
        if !supported {
            continue;
        }
        let mut worst = 0.0_f64;
        let mut worst_at = PROBE_POSITIONS[0];
        for x in probes(scene) {
            let set = pathset_for(scene, cfg, x, mode, constraints)?;
            let err = relative_frobenius(&assemble(&set, cfg), &fim_oracle(&set, cfg, ORACLE_STEP_M));
            if err.is_nan() || err > worst {
                worst = err;
                worst_at = x;
            }
        }
        out.push(CheckResult {
            name: format!("fim-oracle/{mode}"),
            passed: worst <= FIM_ORACLE_TOLERANCE,
            detail: format!(
                "max relative Frobenius error {worst:.3e} at {worst_at} (tolerance {FIM_ORACLE_TOLERANCE:.0e})"
            ),
        });
    }
    Ok(out)
}

/// `|hᵀΩg| = M` under the optimal phases, over `count` angle pairs spread by
/// golden-ratio stepping across (-π/2, π/2)².
pub fn check_phase_optimality(elements: usize, count: usize) -> CheckResult {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let span = std::f64::consts::PI * 0.98;
    let mut worst = 0.0_f64;
    for i in 0..count {
        let u = ((i as f64 + 0.5) * GOLDEN).fract();
        let v = ((i as f64 + 0.5) * GOLDEN * GOLDEN).fract();
        let theta = (u - 0.5) * span;
        let psi = (v - 0.5) * span;
        let h = steering_bs_to_ris(theta, elements);
        let g = steering_ris_to_ue(psi, elements);
        let omega = optimal_phases(theta, psi, elements);
        let gain = cascade_response(&h, &omega, &g).map(|z| z.norm()).unwrap_or(f64::NAN);
        let err = (gain - elements as f64).abs() / elements as f64;
        if err.is_nan() || err > worst {
            worst = err;
        }
    }
    CheckResult {
        name: "phase-optimality".into(),
        passed: worst <= PHASE_TOLERANCE,
        detail: format!("{count} angle pairs, M = {elements}, max relative deviation {worst:.3e}"),
    }
}

/// Brute-force selection: every bit vector with at most `k_bar` ones whose
/// active indices are pairwise more than `c / (W D)` apart, ranked by PEB.
pub fn brute_force_selection(
    scene: &Scene,
    cfg: &WaveformConfig,
    x: Point2,
    k_bar: usize,
) -> Result<(Vec<bool>, f64)> {
    let k = scene.ris_count();
    let threshold = SPEED_OF_LIGHT / (cfg.bandwidth_hz() * scene.inter_ris_spacing());
    let mut best: Option<(Vec<bool>, f64)> = None;
    for mask in 0u32..(1 << k) {
        let bits: Vec<bool> = (0..k).map(|i| mask >> (k - 1 - i) & 1 == 1).collect();
        let on: Vec<usize> = (0..k).filter(|&i| bits[i]).collect();
        if on.len() > k_bar {
            continue;
        }
        if on.windows(2).any(|w| (w[1] - w[0]) as f64 <= threshold) {
            continue;
        }
        let alloc = Allocation::for_target(scene, &bits, x)?;
        let value = peb(&fim_total(&build_pathset(scene, cfg, x, PathMode::Ris(&alloc))?, cfg)).value;
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((bits, value));
        }
    }
    Ok(best.expect("all-off pattern always admissible"))
}

pub fn check_selection(
    scene: &Scene,
    cfg: &WaveformConfig,
    k_bar: usize,
) -> Result<CheckResult> {
    let constraints = SelectionConstraints::new(scene, cfg, k_bar)?;
    let mut mismatches = Vec::new();
    let points = probes(scene);
    for &x in &points {
        let sel = select_ris(scene, x, cfg, &constraints)?;
        let (bits, value) = brute_force_selection(scene, cfg, x, k_bar)?;
        let same_value = sel.peb.value == value
            || (sel.peb.value - value).abs() <= 1e-12 * value.abs();
        if sel.allocation.active() != bits.as_slice() || !same_value {
            mismatches.push(format!("{x}"));
        }
    }
    Ok(CheckResult {
        name: "selection-brute-force".into(),
        passed: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            format!("{} positions agree (k_bar = {k_bar})", points.len())
        } else {
            format!("mismatch at {}", mismatches.join(", "))
        },
    })
}

/// All checks with a caller-supplied FIM assembly (the closed form in
/// production; tests inject faults here).
pub fn run_with_assembler<F>(
    scene: &Scene,
    cfg: &WaveformConfig,
    k_bar: usize,
    assemble: F,
) -> Result<ValidationReport>
where
    F: Fn(&PathSet, &WaveformConfig) -> Matrix2<f64>,
{
    let constraints = SelectionConstraints::new(scene, cfg, k_bar)?;
    let mut checks = check_fim_oracle(scene, cfg, &constraints, assemble)?;
    let elements = scene.ris().first().map_or(100, |r| r.elements);
    checks.push(check_phase_optimality(elements, 64));
    checks.push(check_selection(scene, cfg, k_bar)?);
    Ok(ValidationReport { checks })
}

pub fn run(scene: &Scene, cfg: &WaveformConfig, k_bar: usize) -> Result<ValidationReport> {
    run_with_assembler(scene, cfg, k_bar, |set, c| fim_total(set, c).total)
}
