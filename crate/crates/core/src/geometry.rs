//! Scene geometry: base station at the origin, a wall parallel to the x-axis
//! at `y = L`, RIS arrays and passive objects on that wall.
//!
//! Everything here is purely geometric. Delays are in seconds, distances and
//! coordinates in metres, angles in radians.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::Vector2;

use crate::{Error, Result, SPEED_OF_LIGHT};

/// Positions closer than this to a path anchor are rejected.
pub const DEGENERACY_TOLERANCE_M: f64 = 1e-6;

/// Relative tolerance used when checking that RIS centres are evenly spaced.
const SPACING_TOLERANCE: f64 = 1e-9;

/// Location of the base station.
pub const BS_POSITION: Point2 = Point2 { x: 0.0, y: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.x, self.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// A RIS modelled as an `elements`-element uniform linear array with
/// half-wavelength spacing, parallel to the wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisDescriptor {
    pub center: Point2,
    pub elements: usize,
}

/// Passive reflecting surface occupying `[h1, L]` to `[h2, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectorDescriptor {
    pub h1: f64,
    pub h2: f64,
    pub gamma: f64,
}

/// Point scatterer on the wall with radar cross section `rcs` (m²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterDescriptor {
    pub position: Point2,
    pub rcs: f64,
}

/// Intersection of the virtual-anchor→user line with the reflector segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    /// `None` when the line misses the finite segment.
    pub point: Option<Point2>,
}

impl Incidence {
    /// The visibility indicator `I{x}`.
    pub fn indicator(&self) -> bool {
        self.point.is_some()
    }
}

/// Immutable scene description. The BS sits at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    wall_offset: f64,
    ris: Vec<RisDescriptor>,
    inter_ris_spacing: f64,
    reflector: Option<ReflectorDescriptor>,
    scatterer: Option<ScatterDescriptor>,
}

impl Scene {
    pub fn new(
        wall_offset: f64,
        ris: Vec<RisDescriptor>,
        inter_ris_spacing: f64,
        reflector: Option<ReflectorDescriptor>,
        scatterer: Option<ScatterDescriptor>,
    ) -> Result<Self> {
        if !(wall_offset.is_finite() && wall_offset > 0.0) {
            return Err(Error::InvalidScene(format!(
                "wall offset must be positive and finite, got {wall_offset}"
            )));
        }
        if !(inter_ris_spacing.is_finite() && inter_ris_spacing > 0.0) {
            return Err(Error::InvalidScene(format!(
                "inter-RIS spacing must be positive and finite, got {inter_ris_spacing}"
            )));
        }
        for (k, r) in ris.iter().enumerate() {
            if !r.center.is_finite() {
                return Err(Error::InvalidScene(format!("RIS {k} centre is not finite")));
            }
            if r.center.y != wall_offset {
                return Err(Error::InvalidScene(format!(
                    "RIS {k} centre {} is not on the wall y = {wall_offset}",
                    r.center
                )));
            }
            if r.elements == 0 {
                return Err(Error::InvalidScene(format!("RIS {k} has no elements")));
            }
        }
        for (k, pair) in ris.windows(2).enumerate() {
            let gap = pair[1].center.x - pair[0].center.x;
            if (gap - inter_ris_spacing).abs() > SPACING_TOLERANCE * inter_ris_spacing.max(1.0) {
                return Err(Error::InvalidScene(format!(
                    "RIS {k} and {} are {gap} m apart, expected spacing {inter_ris_spacing} m",
                    k + 1
                )));
            }
        }
        if let Some(r) = reflector {
            if !(r.h1.is_finite() && r.h2.is_finite() && r.h1 < r.h2) {
                return Err(Error::InvalidScene(format!(
                    "reflector needs h1 < h2, got h1 = {}, h2 = {}",
                    r.h1, r.h2
                )));
            }
            if !(0.0..=1.0).contains(&r.gamma) {
                return Err(Error::InvalidScene(format!(
                    "reflection coefficient must lie in [0, 1], got {}",
                    r.gamma
                )));
            }
        }
        if let Some(s) = scatterer {
            if !s.position.is_finite() || s.position.y != wall_offset {
                return Err(Error::InvalidScene(format!(
                    "scatter point {} is not on the wall y = {wall_offset}",
                    s.position
                )));
            }
            if !(s.rcs.is_finite() && s.rcs >= 0.0) {
                return Err(Error::InvalidScene(format!(
                    "radar cross section must be non-negative, got {}",
                    s.rcs
                )));
            }
        }
        Ok(Self {
            wall_offset,
            ris,
            inter_ris_spacing,
            reflector,
            scatterer,
        })
    }

    /// `count` RIS of `elements` elements each, centres at
    /// `first_center_x + k * spacing` on the wall.
    pub fn with_uniform_ris(
        wall_offset: f64,
        first_center_x: f64,
        count: usize,
        spacing: f64,
        elements: usize,
        reflector: Option<ReflectorDescriptor>,
        scatterer: Option<ScatterDescriptor>,
    ) -> Result<Self> {
        let ris = (0..count)
            .map(|k| RisDescriptor {
                center: Point2::new(first_center_x + k as f64 * spacing, wall_offset),
                elements,
            })
            .collect();
        Self::new(wall_offset, ris, spacing, reflector, scatterer)
    }

    pub fn wall_offset(&self) -> f64 {
        self.wall_offset
    }

    pub fn ris(&self) -> &[RisDescriptor] {
        &self.ris
    }

    pub fn ris_count(&self) -> usize {
        self.ris.len()
    }

    pub fn inter_ris_spacing(&self) -> f64 {
        self.inter_ris_spacing
    }

    pub fn reflector(&self) -> Option<&ReflectorDescriptor> {
        self.reflector.as_ref()
    }

    pub fn scatterer(&self) -> Option<&ScatterDescriptor> {
        self.scatterer.as_ref()
    }

    pub fn ris_at(&self, k: usize) -> Result<&RisDescriptor> {
        self.ris.get(k).ok_or(Error::RisIndex {
            index: k,
            count: self.ris.len(),
        })
    }

    pub fn check_in_front_of_wall(&self, x: Point2) -> Result<()> {
        if x.y < self.wall_offset {
            Ok(())
        } else {
            Err(Error::BeyondWall {
                position: x,
                wall_offset: self.wall_offset,
            })
        }
    }

    /// `τ_k = (‖x_k‖ + ‖x_k − x‖) / c`.
    pub fn ris_delay(&self, k: usize, x: Point2) -> Result<f64> {
        let center = self.ris_at(k)?.center;
        check_separated(x, center, "RIS centre")?;
        Ok((center.norm() + center.distance(x)) / SPEED_OF_LIGHT)
    }

    /// Angle of arrival `θ_k` (BS side) and departure `ψ_k` (user side) at RIS `k`.
    ///
    /// Both angles describe the direction of the far end as seen from the RIS
    /// centre, measured from the inward wall normal `[0, -1]` and positive
    /// towards increasing x. Under this convention the specular direction
    /// satisfies `ψ_k = -θ_k`, so an all-zero phase profile reflects like a
    /// mirror.
    pub fn ris_angles(&self, k: usize, x: Point2) -> Result<(f64, f64)> {
        let center = self.ris_at(k)?.center;
        self.check_in_front_of_wall(x)?;
        check_separated(x, center, "RIS centre")?;
        let theta = angle_from_wall_normal(center, BS_POSITION);
        let psi = angle_from_wall_normal(center, x);
        Ok((theta, psi))
    }

    /// Mirror image of the BS across the wall, `[0, 2L]`.
    pub fn virtual_anchor(&self) -> Result<Point2> {
        self.reflector.ok_or(Error::MissingReflector)?;
        Ok(Point2::new(BS_POSITION.x, 2.0 * self.wall_offset - BS_POSITION.y))
    }

    pub fn incidence_point(&self, x: Point2) -> Result<Incidence> {
        let reflector = self.reflector.ok_or(Error::MissingReflector)?;
        self.check_in_front_of_wall(x)?;
        let va = self.virtual_anchor()?;
        // fraction of the way from the virtual anchor to x at which y = L
        let t = (va.y - self.wall_offset) / (va.y - x.y);
        let crossing_x = va.x + t * (x.x - va.x);
        let point = (reflector.h1..=reflector.h2)
            .contains(&crossing_x)
            .then_some(Point2::new(crossing_x, self.wall_offset));
        Ok(Incidence { point })
    }

    /// `τ_r = ‖x_VA − x‖ / c`, defined whether or not the reflection is visible.
    pub fn reflector_delay(&self, x: Point2) -> Result<f64> {
        let va = self.virtual_anchor()?;
        check_separated(x, va, "virtual anchor")?;
        Ok(va.distance(x) / SPEED_OF_LIGHT)
    }

    /// `τ_s = (‖s‖ + ‖s − x‖) / c`.
    pub fn scatter_delay(&self, x: Point2) -> Result<f64> {
        let s = self.scatterer.ok_or(Error::MissingScatterer)?.position;
        check_separated(x, s, "scatter point")?;
        Ok((s.norm() + s.distance(x)) / SPEED_OF_LIGHT)
    }
}

/// `τ_0 = ‖x‖ / c`.
pub fn los_delay(x: Point2) -> Result<f64> {
    check_separated(x, BS_POSITION, "base station")?;
    Ok(x.norm() / SPEED_OF_LIGHT)
}

/// Unit vector from `source` towards `x`.
pub fn unit_direction(source: Point2, x: Point2) -> Result<Vector2<f64>> {
    check_separated(x, source, "path anchor")?;
    let d = (x - source).to_vector();
    Ok(d / d.norm())
}

fn check_separated(x: Point2, anchor: Point2, name: &'static str) -> Result<()> {
    if x.distance(anchor) < DEGENERACY_TOLERANCE_M {
        Err(Error::DegeneratePosition {
            position: x,
            anchor: name,
            tolerance: DEGENERACY_TOLERANCE_M,
        })
    } else {
        Ok(())
    }
}

fn angle_from_wall_normal(from: Point2, to: Point2) -> f64 {
    let d = to - from;
    // inward normal is -y, so "along the normal" is -d.y
    d.x.atan2(-d.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference_scene() -> Scene {
        Scene::with_uniform_ris(
            10.0,
            1.5,
            5,
            1.0,
            100,
            Some(ReflectorDescriptor {
                h1: 1.0,
                h2: 6.0,
                gamma: 0.3,
            }),
            Some(ScatterDescriptor {
                position: Point2::new(3.5, 10.0),
                rcs: 0.01,
            }),
        )
        .unwrap()
    }

    fn single_ris_scene(center_x: f64) -> Scene {
        Scene::new(
            10.0,
            vec![RisDescriptor {
                center: Point2::new(center_x, 10.0),
                elements: 100,
            }],
            1.0,
            Some(ReflectorDescriptor {
                h1: 1.0,
                h2: 6.0,
                gamma: 0.3,
            }),
            None,
        )
        .unwrap()
    }

    #[test]
    fn los_delay_examples() {
        assert_eq!(los_delay(Point2::new(3.0, 4.0)).unwrap(), 5.0 / SPEED_OF_LIGHT);
        assert!((los_delay(Point2::new(3.0, 4.0)).unwrap() - 1.66782e-8).abs() < 1e-13);
        assert_eq!(los_delay(Point2::new(0.0, 10.0)).unwrap(), 10.0 / SPEED_OF_LIGHT);
        // 7.2² + 3.1² = 51.84 + 9.61 = 61.45
        let expected = 61.45_f64.sqrt() / SPEED_OF_LIGHT;
        assert!((los_delay(Point2::new(7.2, 3.1)).unwrap() - expected).abs() < 1e-22);
        assert!(matches!(
            los_delay(Point2::new(0.0, 0.0)),
            Err(Error::DegeneratePosition { .. })
        ));
    }

    #[test]
    fn ris_delay_examples() {
        let scene = single_ris_scene(3.0);
        let tau = scene.ris_delay(0, Point2::new(3.0, 0.0)).unwrap();
        assert!((tau - (109.0_f64.sqrt() + 10.0) / SPEED_OF_LIGHT).abs() < 1e-22);

        let scene = single_ris_scene(1.0);
        let err = scene.ris_delay(0, Point2::new(1.0, 10.0 - 1e-9));
        assert!(matches!(err, Err(Error::DegeneratePosition { .. })));

        // ‖[3.5,10]‖ = sqrt(112.25), ‖[3.5,10]−[5,5]‖ = sqrt(2.25 + 25)
        let scene = single_ris_scene(3.5);
        let tau = scene.ris_delay(0, Point2::new(5.0, 5.0)).unwrap();
        let expected = (112.25_f64.sqrt() + 27.25_f64.sqrt()) / SPEED_OF_LIGHT;
        assert!((tau - expected).abs() < 1e-22);

        assert!(matches!(scene.ris_delay(3, Point2::new(1.0, 1.0)), Err(Error::RisIndex { .. })));
    }

    #[test]
    fn ris_angle_examples() {
        let scene = single_ris_scene(0.0);
        let (theta, psi) = scene.ris_angles(0, Point2::new(0.0, 4.0)).unwrap();
        assert_eq!(theta, 0.0);
        assert_eq!(psi, 0.0);

        let scene = single_ris_scene(3.5);
        let (theta, psi) = scene.ris_angles(0, Point2::new(3.5, 0.0)).unwrap();
        assert_eq!(psi, 0.0);
        // the BS lies towards -x as seen from the RIS
        assert!((theta + 3.5_f64.atan2(10.0)).abs() < 1e-15);

        let (_, psi) = scene.ris_angles(0, Point2::new(13.5, 0.0)).unwrap();
        assert!((psi - std::f64::consts::FRAC_PI_4).abs() < 1e-15);

        assert!(matches!(
            scene.ris_angles(0, Point2::new(2.0, 10.0)),
            Err(Error::BeyondWall { .. })
        ));
        assert!(matches!(
            scene.ris_angles(0, Point2::new(2.0, 11.0)),
            Err(Error::BeyondWall { .. })
        ));
    }

    #[test]
    fn specular_point_has_opposite_angles() {
        let scene = single_ris_scene(3.5);
        // mirror path BS -> [3.5,10] -> [7,0]
        let (theta, psi) = scene.ris_angles(0, Point2::new(7.0, 0.0)).unwrap();
        assert!((theta + psi).abs() < 1e-15);
    }

    #[test]
    fn unit_direction_examples() {
        let e = unit_direction(Point2::new(0.0, 0.0), Point2::new(0.0, 5.0)).unwrap();
        assert_eq!(e, Vector2::new(0.0, 1.0));
        let e = unit_direction(Point2::new(3.5, 10.0), Point2::new(3.5, 0.0)).unwrap();
        assert_eq!(e, Vector2::new(0.0, -1.0));
        let e = unit_direction(Point2::new(1.0, 10.0), Point2::new(4.0, 6.0)).unwrap();
        assert!((e - Vector2::new(0.6, -0.8)).norm() < 1e-15);
        assert!(unit_direction(Point2::new(1.0, 1.0), Point2::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn virtual_anchor_examples() {
        assert_eq!(reference_scene().virtual_anchor().unwrap(), Point2::new(0.0, 20.0));
        for (l, expected) in [(1.0, 2.0), (25.0, 50.0)] {
            let scene = Scene::new(
                l,
                vec![],
                1.0,
                Some(ReflectorDescriptor {
                    h1: 0.0,
                    h2: 1.0,
                    gamma: 1.0,
                }),
                None,
            )
            .unwrap();
            assert_eq!(scene.virtual_anchor().unwrap(), Point2::new(0.0, expected));
        }
        let bare = Scene::new(10.0, vec![], 1.0, None, None).unwrap();
        assert!(matches!(bare.virtual_anchor(), Err(Error::MissingReflector)));
        assert!(matches!(bare.reflector_delay(Point2::new(1.0, 1.0)), Err(Error::MissingReflector)));
        assert!(matches!(bare.scatter_delay(Point2::new(1.0, 1.0)), Err(Error::MissingScatterer)));
    }

    #[test]
    fn incidence_point_examples() {
        let scene = reference_scene();
        let inc = scene.incidence_point(Point2::new(3.5, 0.0)).unwrap();
        assert!(inc.indicator());
        assert_eq!(inc.point.unwrap(), Point2::new(1.75, 10.0));

        let inc = scene.incidence_point(Point2::new(20.0, 0.0)).unwrap();
        assert!(!inc.indicator());
        assert!(inc.point.is_none());

        // line [0,20] -> [8,2]: y = 10 at t = 10/18, x = 8 * 10/18 = 40/9
        let inc = scene.incidence_point(Point2::new(8.0, 2.0)).unwrap();
        let s = inc.point.unwrap();
        assert!((s.x - 40.0 / 9.0).abs() < 1e-14);
        assert_eq!(s.y, 10.0);

        assert!(matches!(
            scene.incidence_point(Point2::new(3.0, 10.0)),
            Err(Error::BeyondWall { .. })
        ));
    }

    #[test]
    fn reflector_delay_examples() {
        let scene = reference_scene();
        let tau = scene.reflector_delay(Point2::new(0.0, 0.0)).unwrap();
        assert_eq!(tau, 20.0 / SPEED_OF_LIGHT);
        // ‖[-3.5, 20]‖² = 12.25 + 400
        let tau = scene.reflector_delay(Point2::new(3.5, 0.0)).unwrap();
        assert!((tau - 412.25_f64.sqrt() / SPEED_OF_LIGHT).abs() < 1e-22);
    }

    #[test]
    fn scene_rejects_invalid_layouts() {
        let off_wall = Scene::new(
            10.0,
            vec![RisDescriptor {
                center: Point2::new(1.0, 9.0),
                elements: 4,
            }],
            1.0,
            None,
            None,
        );
        assert!(off_wall.is_err());
        let uneven = Scene::new(
            10.0,
            vec![
                RisDescriptor {
                    center: Point2::new(1.0, 10.0),
                    elements: 4,
                },
                RisDescriptor {
                    center: Point2::new(2.5, 10.0),
                    elements: 4,
                },
            ],
            1.0,
            None,
            None,
        );
        assert!(uneven.is_err());
        let bad_gamma = Scene::new(
            10.0,
            vec![],
            1.0,
            Some(ReflectorDescriptor {
                h1: 1.0,
                h2: 6.0,
                gamma: 1.5,
            }),
            None,
        );
        assert!(bad_gamma.is_err());
        let reversed = Scene::new(
            10.0,
            vec![],
            1.0,
            Some(ReflectorDescriptor {
                h1: 6.0,
                h2: 1.0,
                gamma: 0.5,
            }),
            None,
        );
        assert!(reversed.is_err());
        let empty_ris = Scene::with_uniform_ris(10.0, 1.0, 1, 1.0, 0, None, None);
        assert!(empty_ris.is_err());
    }

    #[test]
    fn shadow_region_is_an_interval_on_horizontal_lines() {
        let scene = reference_scene();
        for y in [0.5, 3.0, 6.0, 9.5] {
            let flags: Vec<bool> = (0..=400)
                .map(|i| {
                    let x = -20.0 + 0.1 * i as f64;
                    scene.incidence_point(Point2::new(x, y)).unwrap().indicator()
                })
                .collect();
            let transitions = flags.windows(2).filter(|w| w[0] != w[1]).count();
            assert!(transitions <= 2, "y = {y}: {transitions} transitions");
            assert!(flags.iter().any(|&f| f));
        }
    }

    fn user_position() -> impl Strategy<Value = Point2> {
        (-20.0..20.0f64, -10.0..9.99f64).prop_map(|(x, y)| Point2::new(x, y))
    }

    proptest! {
        #[test]
        fn unit_direction_has_unit_norm(src in user_position(), x in user_position()) {
            prop_assume!(src.distance(x) > 1e-3);
            let e = unit_direction(src, x).unwrap();
            prop_assert!((e.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn incidence_point_obeys_mirror_identity(x in user_position()) {
            let scene = reference_scene();
            let va = scene.virtual_anchor().unwrap();
            if let Some(s) = scene.incidence_point(x).unwrap().point {
                prop_assert_eq!(s.y, 10.0);
                // collinearity of va, s, x
                let cross = (s - va).x * (x - va).y - (s - va).y * (x - va).x;
                prop_assert!(cross.abs() / (x - va).norm() < 1e-9);
                let via_surface = s.norm() + s.distance(x);
                let direct = va.distance(x);
                prop_assert!((via_surface - direct).abs() <= 1e-9 * direct);
            }
        }

        #[test]
        fn ris_paths_never_beat_los(x in user_position()) {
            let scene = reference_scene();
            prop_assume!(x.norm() > 1e-3);
            let tau0 = los_delay(x).unwrap();
            for k in 0..scene.ris_count() {
                if let Ok(tau) = scene.ris_delay(k, x) {
                    prop_assert!(tau >= tau0);
                }
            }
        }
    }
}
