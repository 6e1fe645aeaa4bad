//! Grid sweeps over user positions: PEB and resolvable-path maps, PEB CDFs,
//! information directions, and their CSV encodings.

use std::fmt;
use std::io::Write;

use nalgebra::Vector2;
use rayon::prelude::*;

use crate::channel::{build_pathset, Mode, PathKind, PathMode, PathSet};
use crate::fim::{count_resolvable_paths, fim_total, peb_of_matrix, FimPart};
use crate::geometry::{Point2, Scene, BS_POSITION, DEGENERACY_TOLERANCE_M};
use crate::riscontrol::{bits_string, select_ris, Allocation, SelectionConstraints};
use crate::waveform::WaveformConfig;
use crate::{Error, Result};

/// PEB cap used for maps and coverage statistics, m.
pub const DEFAULT_PEB_CAP_M: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Default deployment region: `x ∈ [−5, 15]`, `y ∈ [0.5, 9.5]`, 100×100.
    pub const DEFAULT: GridSpec = GridSpec {
        x_min: -5.0,
        x_max: 15.0,
        y_min: 0.5,
        y_max: 9.5,
        nx: 100,
        ny: 100,
    };

    pub fn with_counts(self, nx: usize, ny: usize) -> Self {
        Self { nx, ny, ..self }
    }

    pub fn validate(&self, scene: &Scene) -> Result<()> {
        let bounds = [self.x_min, self.x_max, self.y_min, self.y_max];
        if bounds.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("grid bounds must be finite".into()));
        }
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::InvalidGrid("grid ranges must satisfy min < max".into()));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "grid needs at least 2 samples per axis, got {}×{}",
                self.nx, self.ny
            )));
        }
        if self.y_max >= scene.wall_offset() {
            return Err(Error::InvalidGrid(format!(
                "grid reaches y = {} but the wall is at y = {}",
                self.y_max,
                scene.wall_offset()
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell centres, x varying fastest.
    pub fn points(&self) -> Vec<Point2> {
        let dx = (self.x_max - self.x_min) / (self.nx - 1) as f64;
        let dy = (self.y_max - self.y_min) / (self.ny - 1) as f64;
        (0..self.ny)
            .flat_map(|j| {
                (0..self.nx).map(move |i| {
                    Point2::new(self.x_min + i as f64 * dx, self.y_min + j as f64 * dy)
                })
            })
            .collect()
    }
}

/// Status of a map cell's PEB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PebFlag {
    /// Finite and within the cap.
    Ok,
    /// Finite but above the cap.
    Capped,
    /// No unique position fix: singular FIM or a single resolvable path.
    Inf,
    /// Cell coincides with the BS or an object on the wall.
    Invalid,
}

impl fmt::Display for PebFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PebFlag::Ok => "ok",
            PebFlag::Capped => "capped",
            PebFlag::Inf => "inf",
            PebFlag::Invalid => "invalid",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub position: Point2,
    /// Metres; `INFINITY` for [`PebFlag::Inf`], `NAN` for [`PebFlag::Invalid`].
    pub peb_m: f64,
    pub flag: PebFlag,
    pub path_count: usize,
    pub allocation_bits: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapResult {
    pub grid: GridSpec,
    pub mode: Mode,
    pub cells: Vec<CellResult>,
}

impl MapResult {
    pub fn valid_cells(&self) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(|c| c.flag != PebFlag::Invalid)
    }

    pub fn max_path_count(&self) -> usize {
        self.valid_cells().map(|c| c.path_count).max().unwrap_or(0)
    }

    /// Fraction of valid cells whose PEB is at most `threshold_m`.
    pub fn coverage(&self, threshold_m: f64) -> f64 {
        peb_cdf(self).fraction_at_or_below(threshold_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub mode: Mode,
    /// Used in RIS mode only.
    pub constraints: SelectionConstraints,
    pub peb_cap_m: f64,
    /// Selection always uses the full FIM; this only changes the reported PEB.
    pub fim_part: FimPart,
    pub parallel: bool,
}

/// Evaluates one user position: pathset for the mode (RIS mode selects the
/// allocation for this very position), resolvable paths and PEB.
pub fn evaluate_cell(
    scene: &Scene,
    cfg: &WaveformConfig,
    x: Point2,
    opts: &SweepOptions,
) -> CellResult {
    let inactive_bits = bits_string(&vec![false; scene.ris_count()]);
    let invalid = || CellResult {
        position: x,
        peb_m: f64::NAN,
        flag: PebFlag::Invalid,
        path_count: 0,
        allocation_bits: inactive_bits.clone(),
    };
    if near_scene_anchor(scene, x) {
        return invalid();
    }
    let built: Result<(PathSet, String)> = match opts.mode {
        Mode::Ris => select_ris(scene, x, cfg, &opts.constraints).and_then(|sel| {
            let set = build_pathset(scene, cfg, x, PathMode::Ris(&sel.allocation))?;
            Ok((set, sel.allocation.bits()))
        }),
        Mode::Reflector => build_pathset(scene, cfg, x, PathMode::Reflector)
            .map(|set| (set, inactive_bits.clone())),
        Mode::Scatterer => build_pathset(scene, cfg, x, PathMode::Scatterer)
            .map(|set| (set, inactive_bits.clone())),
    };
    let Ok((set, allocation_bits)) = built else {
        return invalid();
    };
    let path_count = count_resolvable_paths(&set, cfg);
    let bound = peb_of_matrix(fim_total(&set, cfg).matrix(opts.fim_part));
    let (peb_m, flag) = if path_count <= 1 || !bound.is_finite() {
        (f64::INFINITY, PebFlag::Inf)
    } else if bound.value > opts.peb_cap_m {
        (bound.value, PebFlag::Capped)
    } else {
        (bound.value, PebFlag::Ok)
    };
    CellResult {
        position: x,
        peb_m,
        flag,
        path_count,
        allocation_bits,
    }
}

fn near_scene_anchor(scene: &Scene, x: Point2) -> bool {
    let close = |p: Point2| x.distance(p) < DEGENERACY_TOLERANCE_M;
    close(BS_POSITION)
        || scene.ris().iter().any(|r| close(r.center))
        || scene.scatterer().is_some_and(|s| close(s.position))
}

/// PEB map over the grid. Each cell is computed independently, so the
/// parallel and serial paths yield identical results.
pub fn peb_map(
    scene: &Scene,
    grid: &GridSpec,
    cfg: &WaveformConfig,
    opts: &SweepOptions,
) -> Result<MapResult> {
    grid.validate(scene)?;
    let points = grid.points();
    let cells = if opts.parallel {
        points
            .par_iter()
            .map(|&x| evaluate_cell(scene, cfg, x, opts))
            .collect()
    } else {
        points
            .iter()
            .map(|&x| evaluate_cell(scene, cfg, x, opts))
            .collect()
    };
    Ok(MapResult {
        grid: *grid,
        mode: opts.mode,
        cells,
    })
}

/// Resolvable-path map. Cells carry the same data as [`peb_map`]; the
/// `path_count` column is the quantity of interest.
pub fn path_count_map(
    scene: &Scene,
    grid: &GridSpec,
    cfg: &WaveformConfig,
    opts: &SweepOptions,
) -> Result<MapResult> {
    peb_map(scene, grid, cfg, opts)
}

/// Empirical CDF of the PEB over the valid cells of a map. Infinite values
/// stay in the denominator, so the CDF tops out at the finite fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfResult {
    /// Finite PEB values, ascending.
    pub sorted: Vec<f64>,
    /// Number of valid cells, finite or not.
    pub total: usize,
}

impl CdfResult {
    pub fn fraction_at_or_below(&self, threshold_m: f64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let count = self.sorted.partition_point(|&v| v <= threshold_m);
        count as f64 / self.total as f64
    }

    pub fn finite_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.sorted.len() as f64 / self.total as f64
        }
    }

    /// Smallest sample whose CDF reaches `q`, or `INFINITY` when the finite
    /// mass is below `q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let needed = (q * self.total as f64).ceil().max(1.0) as usize;
        self.sorted.get(needed - 1).copied().unwrap_or(f64::INFINITY)
    }

    /// `(peb, cdf)` steps, one per finite sample.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let total = self.total as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(move |(i, &v)| (v, (i + 1) as f64 / total))
    }
}

pub fn peb_cdf(map: &MapResult) -> CdfResult {
    let mut sorted: Vec<f64> = map
        .valid_cells()
        .map(|c| c.peb_m)
        .filter(|v| v.is_finite())
        .collect();
    sorted.sort_by(f64::total_cmp);
    CdfResult {
        sorted,
        total: map.valid_cells().count(),
    }
}

/// One arrow of the information-direction plot.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoDirection {
    pub kind: PathKind,
    pub direction: Vector2<f64>,
    /// `|α|² S(0)`.
    pub intensity: f64,
}

/// Per-path information directions at `x`. Zero-gain paths are dropped. In
/// RIS mode the allocation is selected for `x` itself.
pub fn info_directions(
    scene: &Scene,
    x: Point2,
    cfg: &WaveformConfig,
    mode: Mode,
    constraints: &SelectionConstraints,
) -> Result<Vec<InfoDirection>> {
    let set = match mode {
        Mode::Ris => {
            let allocation: Allocation = select_ris(scene, x, cfg, constraints)?.allocation;
            build_pathset(scene, cfg, x, PathMode::Ris(&allocation))?
        }
        Mode::Reflector => build_pathset(scene, cfg, x, PathMode::Reflector)?,
        Mode::Scatterer => build_pathset(scene, cfg, x, PathMode::Scatterer)?,
    };
    Ok(set
        .iter()
        .filter(|p| p.gain.norm_sqr() > 0.0)
        .map(|p| InfoDirection {
            kind: p.kind,
            direction: p.direction,
            intensity: p.intensity(cfg),
        })
        .collect())
}

/// Nine significant digits, `inf` / `nan` spelled out.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.8e}")
    }
}

pub const MAP_CSV_HEADER: &str = "x,y,peb_m,flag,path_count,allocation_bits";
pub const CDF_CSV_HEADER: &str = "peb_m,cdf";

pub fn write_map_csv<W: Write>(map: &MapResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{MAP_CSV_HEADER}")?;
    for c in &map.cells {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            format_float(c.position.x),
            format_float(c.position.y),
            format_float(c.peb_m),
            c.flag,
            c.path_count,
            c.allocation_bits
        )?;
    }
    Ok(())
}

pub fn write_cdf_csv<W: Write>(cdf: &CdfResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CDF_CSV_HEADER}")?;
    for (v, p) in cdf.points() {
        writeln!(out, "{},{}", format_float(v), format_float(p))?;
    }
    Ok(())
}
