//! Run configuration: a sectioned key/value (TOML) file whose keys carry
//! their units. Log-domain quantities (dBm, dB) are converted to SI once, in
//! [`RunConfig::waveform`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::Mode;
use crate::fim::FimPart;
use crate::geometry::{Point2, ReflectorDescriptor, RisDescriptor, ScatterDescriptor, Scene};
use crate::riscontrol::SelectionConstraints;
use crate::sweep::{GridSpec, SweepOptions};
use crate::waveform::WaveformConfig;
use crate::{Error, Result};

/// The bundled default scenario.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.cfg");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    pub wall_offset_m: f64,
    pub inter_ris_spacing_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisSection {
    pub centers_x_m: Vec<f64>,
    pub elements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectorSection {
    pub h1_m: f64,
    pub h2_m: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererSection {
    pub x_m: f64,
    pub rcs_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSection {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub subcarriers: usize,
    pub power_dbm: f64,
    pub noise_figure_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min_m: f64,
    pub x_max_m: f64,
    pub y_min_m: f64,
    pub y_max_m: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: Mode,
    pub k_bar: usize,
    pub peb_cap_m: f64,
    #[serde(default)]
    pub fim_part: FimPart,
    #[serde(default = "default_parallel")]
    pub parallel: bool,
    pub out_dir: PathBuf,
}

fn default_parallel() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneSection,
    pub ris: RisSection,
    pub reflector: Option<ReflectorSection>,
    pub scatterer: Option<ScattererSection>,
    pub waveform: WaveformSection,
    pub grid: GridSection,
    pub run: RunSection,
}

impl RunConfig {
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_CONFIG).expect("bundled default config is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses and validates. Errors name the offending `[section] key` and,
    /// where it can be found, its line.
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        if let Err(issue) = config.check() {
            let line = locate_key(text, issue.section, issue.key)
                .map(|n| format!("line {n}: "))
                .unwrap_or_default();
            return Err(Error::Config(format!(
                "{line}[{}] {}: {}",
                issue.section, issue.key, issue.message
            )));
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn scene(&self) -> Result<Scene> {
        let wall = self.scene.wall_offset_m;
        let ris = self
            .ris
            .centers_x_m
            .iter()
            .map(|&x| RisDescriptor {
                center: Point2::new(x, wall),
                elements: self.ris.elements,
            })
            .collect();
        Scene::new(
            wall,
            ris,
            self.scene.inter_ris_spacing_m,
            self.reflector.as_ref().map(|r| ReflectorDescriptor {
                h1: r.h1_m,
                h2: r.h2_m,
                gamma: r.gamma,
            }),
            self.scatterer.as_ref().map(|s| ScatterDescriptor {
                position: Point2::new(s.x_m, wall),
                rcs: s.rcs_m2,
            }),
        )
    }

    pub fn waveform(&self) -> Result<WaveformConfig> {
        let w = &self.waveform;
        WaveformConfig::from_log_units(
            w.carrier_hz,
            w.bandwidth_hz,
            w.subcarriers,
            w.power_dbm,
            w.noise_figure_db,
        )
    }

    pub fn grid(&self) -> GridSpec {
        let g = &self.grid;
        GridSpec {
            x_min: g.x_min_m,
            x_max: g.x_max_m,
            y_min: g.y_min_m,
            y_max: g.y_max_m,
            nx: g.nx,
            ny: g.ny,
        }
    }

    pub fn constraints(&self) -> Result<SelectionConstraints> {
        SelectionConstraints::new(&self.scene()?, &self.waveform()?, self.run.k_bar)
    }

    pub fn sweep_options(&self) -> Result<SweepOptions> {
        Ok(SweepOptions {
            mode: self.run.mode,
            constraints: self.constraints()?,
            peb_cap_m: self.run.peb_cap_m,
            fim_part: self.run.fim_part,
            parallel: self.run.parallel,
        })
    }

    fn check(&self) -> std::result::Result<(), Issue> {
        let s = &self.scene;
        positive("scene", "wall_offset_m", s.wall_offset_m)?;
        positive("scene", "inter_ris_spacing_m", s.inter_ris_spacing_m)?;

        let r = &self.ris;
        if r.elements == 0 {
            return Err(Issue::new("ris", "elements", "must be at least 1"));
        }
        if r.centers_x_m.iter().any(|x| !x.is_finite()) {
            return Err(Issue::new("ris", "centers_x_m", "entries must be finite"));
        }
        for pair in r.centers_x_m.windows(2) {
            let gap = pair[1] - pair[0];
            if (gap - s.inter_ris_spacing_m).abs() > 1e-9 * s.inter_ris_spacing_m.max(1.0) {
                return Err(Issue::new(
                    "ris",
                    "centers_x_m",
                    format!(
                        "centres {} and {} are {gap} m apart, expected inter_ris_spacing_m = {}",
                        pair[0], pair[1], s.inter_ris_spacing_m
                    ),
                ));
            }
        }

        if let Some(refl) = &self.reflector {
            finite("reflector", "h1_m", refl.h1_m)?;
            finite("reflector", "h2_m", refl.h2_m)?;
            if refl.h1_m >= refl.h2_m {
                return Err(Issue::new("reflector", "h2_m", "must exceed h1_m"));
            }
            if !(0.0..=1.0).contains(&refl.gamma) {
                return Err(Issue::new("reflector", "gamma", "must lie in [0, 1]"));
            }
        }
        if let Some(sc) = &self.scatterer {
            finite("scatterer", "x_m", sc.x_m)?;
            if !(sc.rcs_m2.is_finite() && sc.rcs_m2 >= 0.0) {
                return Err(Issue::new("scatterer", "rcs_m2", "must be non-negative"));
            }
        }

        let w = &self.waveform;
        positive("waveform", "carrier_hz", w.carrier_hz)?;
        positive("waveform", "bandwidth_hz", w.bandwidth_hz)?;
        if w.subcarriers.is_multiple_of(2) {
            return Err(Issue::new(
                "waveform",
                "subcarriers",
                "must be odd (indices -N/2..N/2)",
            ));
        }
        finite("waveform", "power_dbm", w.power_dbm)?;
        finite("waveform", "noise_figure_db", w.noise_figure_db)?;

        let g = &self.grid;
        for (key, v) in [
            ("x_min_m", g.x_min_m),
            ("x_max_m", g.x_max_m),
            ("y_min_m", g.y_min_m),
            ("y_max_m", g.y_max_m),
        ] {
            finite("grid", key, v)?;
        }
        if g.x_min_m >= g.x_max_m {
            return Err(Issue::new("grid", "x_max_m", "must exceed x_min_m"));
        }
        if g.y_min_m >= g.y_max_m {
            return Err(Issue::new("grid", "y_max_m", "must exceed y_min_m"));
        }
        if g.y_max_m >= s.wall_offset_m {
            return Err(Issue::new("grid", "y_max_m", "must lie in front of the wall"));
        }
        if g.nx < 2 {
            return Err(Issue::new("grid", "nx", "must be at least 2"));
        }
        if g.ny < 2 {
            return Err(Issue::new("grid", "ny", "must be at least 2"));
        }

        let run = &self.run;
        if run.k_bar > r.centers_x_m.len() {
            return Err(Issue::new(
                "run",
                "k_bar",
                format!("exceeds the {} configured RIS", r.centers_x_m.len()),
            ));
        }
        positive("run", "peb_cap_m", run.peb_cap_m)?;
        match run.mode {
            Mode::Reflector if self.reflector.is_none() => {
                Err(Issue::new("run", "mode", "reflector mode needs a [reflector] section"))
            }
            Mode::Scatterer if self.scatterer.is_none() => {
                Err(Issue::new("run", "mode", "scatterer mode needs a [scatterer] section"))
            }
            _ => Ok(()),
        }
    }
}

struct Issue {
    section: &'static str,
    key: &'static str,
    message: String,
}

impl Issue {
    fn new(section: &'static str, key: &'static str, message: impl Into<String>) -> Self {
        Self {
            section,
            key,
            message: message.into(),
        }
    }
}

fn finite(section: &'static str, key: &'static str, v: f64) -> std::result::Result<(), Issue> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Issue::new(section, key, "must be finite"))
    }
}

fn positive(section: &'static str, key: &'static str, v: f64) -> std::result::Result<(), Issue> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Issue::new(section, key, format!("must be positive, got {v}")))
    }
}

/// 1-based line of `key = ...` inside `[section]`.
fn locate_key(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = "";
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim();
            continue;
        }
        if current == section {
            if let Some((lhs, _)) = line.split_once('=') {
                if lhs.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}
