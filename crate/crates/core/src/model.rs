//! Domain types and torus geometry shared by the rest of the crate.
//!
//! One world unit is one metre and one tick is one second, so speeds are in
//! metres per tick. Headings are measured in degrees clockwise from north:
//! heading 0 moves along +y and heading 90 moves along +x.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Width and height of the wrapped world, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldDims {
    pub width: f64,
    pub height: f64,
}

impl WorldDims {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    /// Largest possible torus distance: half the diagonal.
    pub fn half_diagonal(&self) -> f64 {
        (0.5 * self.width).hypot(0.5 * self.height)
    }
}

/// A point in the world. Canonical positions satisfy `0 <= x < width` and
/// `0 <= y < height`; use [`wrap`] to get there.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Heading in degrees clockwise from north, normalised to `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Heading(f64);

impl Heading {
    pub fn from_degrees(degrees: f64) -> Self {
        Heading(wrap_coord(degrees, 360.0))
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    /// Unit displacement `(dx, dy)` for one metre of travel along this heading.
    pub fn unit_vector(self) -> (f64, f64) {
        let (sin, cos) = self.0.to_radians().sin_cos();
        (sin, cos)
    }
}

impl fmt::Display for Heading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    Red,
    Black,
}

impl Team {
    /// Initial heading assigned at setup.
    pub fn initial_heading(self) -> Heading {
        match self {
            Team::Red => Heading::from_degrees(90.0),
            Team::Black => Heading::from_degrees(120.0),
        }
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Team::Red => "red",
            Team::Black => "black",
        })
    }
}

/// Which behaviour every agent runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Social agents: sense, check for danger, mirror the nearest neighbour.
    #[serde(rename = "social", alias = "all_social_avs")]
    AllSocialAVs,
    #[serde(rename = "random", alias = "random_walk")]
    RandomWalk,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::AllSocialAVs => "social",
            Scenario::RandomWalk => "random",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "social" | "allsocialavs" | "all_social_avs" => Ok(Scenario::AllSocialAVs),
            "random" | "randomwalk" | "random_walk" => Ok(Scenario::RandomWalk),
            other => Err(format!(
                "unknown scenario `{other}` (expected social or random)"
            )),
        }
    }
}

/// How collision events are tallied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionCounting {
    /// One event per unordered pair entering contact.
    #[default]
    Pair,
    /// One event per agent involved in a pair entering contact.
    Agent,
    /// One event per pair per tick spent in contact.
    Overlap,
}

impl std::str::FromStr for CollisionCounting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pair" => Ok(CollisionCounting::Pair),
            "agent" => Ok(CollisionCounting::Agent),
            "overlap" => Ok(CollisionCounting::Overlap),
            other => Err(format!(
                "unknown collision counting `{other}` (expected pair, agent or overlap)"
            )),
        }
    }
}

/// One vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: u32,
    pub team: Team,
    pub position: Position,
    pub heading: Heading,
    /// Metres per tick.
    pub speed: f64,
    /// Random-walk toggle: accelerate when set, decelerate otherwise.
    pub random_behaviour: bool,
    /// Set while the agent is in contact with at least one other agent.
    pub collision_done: bool,
    /// Set after a mirroring manoeuvre until the agent is back at max velocity.
    pub recovering: bool,
    pub collisions: u64,
}

/// Parameters of one simulation run.
///
/// The first nine fields are the interactive sliders of the original model;
/// the rest are engine settings the original leaves open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub n_red: u32,
    pub n_black: u32,
    pub min_velocity: f64,
    pub max_velocity: f64,
    pub max_acceleration: f64,
    pub deceleration: f64,
    pub min_safety_distance: f64,
    pub sonar_range: f64,
    pub scenario: Scenario,
    pub world_width: f64,
    pub world_height: f64,
    pub collision_radius: f64,
    pub ticks: u64,
    pub seed: u64,
    pub collision_counting: CollisionCounting,
    /// Apply acceleration in the same tick as mirroring instead of on the
    /// following danger-free ticks.
    pub same_tick_accelerate: bool,
    /// Random walk: add the deceleration instead of subtracting it, as the
    /// original listing literally reads.
    pub additive_deceleration: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        Self::set1(40, Scenario::AllSocialAVs)
    }
}

/// Hard parameter errors. Out-of-slider-range values are only warnings, see
/// [`SimParams::range_warnings`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("no agents: n_red + n_black must be at least 1")]
    NoAgents,
    #[error("ticks must be at least 1")]
    ZeroTicks,
    #[error("{field} must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },
    #[error("{field} must be non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("collision_radius must be positive, got {0}")]
    CollisionRadius(f64),
    #[error("min_velocity {min} exceeds max_velocity {max}")]
    VelocityOrder { min: f64, max: f64 },
    #[error("world {width}x{height} must exceed twice the sonar range {sonar} in both dimensions")]
    WorldTooSmall { width: f64, height: f64, sonar: f64 },
}

/// A slider value outside the range the original interface allows.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeWarning {
    pub field: &'static str,
    pub value: f64,
    pub min: f64,
    pub max: f64,
}

impl fmt::Display for RangeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} is outside the usual range [{}, {}]",
            self.field, self.value, self.min, self.max
        )
    }
}

impl SimParams {
    /// Low-velocity parameter set: min = max velocity 0.3, deceleration 0.1.
    pub fn set1(per_team: u32, scenario: Scenario) -> Self {
        SimParams {
            n_red: per_team,
            n_black: per_team,
            min_velocity: 0.3,
            max_velocity: 0.3,
            max_acceleration: 0.1,
            deceleration: 0.1,
            min_safety_distance: 1.0,
            sonar_range: 2.5,
            scenario,
            world_width: 100.0,
            world_height: 100.0,
            collision_radius: 1.0,
            ticks: 1000,
            seed: 0,
            collision_counting: CollisionCounting::Pair,
            same_tick_accelerate: false,
            additive_deceleration: false,
        }
    }

    /// High-velocity parameter set: velocity 0.5 to 0.9, deceleration 0.3.
    pub fn set2(per_team: u32, scenario: Scenario) -> Self {
        SimParams {
            min_velocity: 0.5,
            max_velocity: 0.9,
            deceleration: 0.3,
            ..Self::set1(per_team, scenario)
        }
    }

    pub fn dims(&self) -> WorldDims {
        WorldDims::new(self.world_width, self.world_height)
    }

    pub fn agent_count(&self) -> usize {
        self.n_red as usize + self.n_black as usize
    }

    /// Checks the hard preconditions of a run.
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.agent_count() == 0 {
            return Err(ParamError::NoAgents);
        }
        if self.ticks == 0 {
            return Err(ParamError::ZeroTicks);
        }
        let reals = [
            ("min_velocity", self.min_velocity),
            ("max_velocity", self.max_velocity),
            ("max_acceleration", self.max_acceleration),
            ("deceleration", self.deceleration),
            ("min_safety_distance", self.min_safety_distance),
            ("sonar_range", self.sonar_range),
            ("world_width", self.world_width),
            ("world_height", self.world_height),
            ("collision_radius", self.collision_radius),
        ];
        for (field, value) in reals {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { field, value });
            }
            if value < 0.0 {
                return Err(ParamError::Negative { field, value });
            }
        }
        if self.collision_radius <= 0.0 {
            return Err(ParamError::CollisionRadius(self.collision_radius));
        }
        if self.min_velocity > self.max_velocity {
            return Err(ParamError::VelocityOrder {
                min: self.min_velocity,
                max: self.max_velocity,
            });
        }
        let sonar2 = 2.0 * self.sonar_range;
        if self.world_width <= sonar2
            || self.world_height <= sonar2
            || self.world_width <= 0.0
            || self.world_height <= 0.0
        {
            return Err(ParamError::WorldTooSmall {
                width: self.world_width,
                height: self.world_height,
                sonar: self.sonar_range,
            });
        }
        Ok(())
    }

    /// Slider values outside the original interface ranges. The low-velocity
    /// experiment set itself uses a safety distance of 1 m, below the slider
    /// floor, so these never block a run.
    pub fn range_warnings(&self) -> Vec<RangeWarning> {
        let checks = [
            ("n_red", self.n_red as f64, 0.0, 100.0),
            ("n_black", self.n_black as f64, 0.0, 100.0),
            ("min_velocity", self.min_velocity, 0.0, 0.5),
            ("max_velocity", self.max_velocity, 0.6, 1.0),
            ("max_acceleration", self.max_acceleration, 0.0, 0.1),
            ("deceleration", self.deceleration, 0.1, 0.5),
            ("min_safety_distance", self.min_safety_distance, 1.5, 5.0),
            ("sonar_range", self.sonar_range, 0.0, 10.0),
        ];
        checks
            .into_iter()
            .filter(|&(_, v, lo, hi)| !(lo..=hi).contains(&v))
            .map(|(field, value, min, max)| RangeWarning {
                field,
                value,
                min,
                max,
            })
            .collect()
    }
}

fn wrap_coord(v: f64, extent: f64) -> f64 {
    let r = v.rem_euclid(extent);
    // rem_euclid can round up to `extent` for tiny negative inputs.
    if r >= extent {
        0.0
    } else {
        r
    }
}

/// Maps a position onto the canonical torus range.
pub fn wrap(p: Position, world: WorldDims) -> Position {
    Position {
        x: wrap_coord(p.x, world.width),
        y: wrap_coord(p.y, world.height),
    }
}

fn axis_gap(a: f64, b: f64, extent: f64) -> f64 {
    let d = (a - b).abs();
    d.min(extent - d)
}

/// Euclidean distance along the shortest wrapped displacement.
pub fn torus_distance(a: Position, b: Position, world: WorldDims) -> f64 {
    axis_gap(a.x, b.x, world.width).hypot(axis_gap(a.y, b.y, world.height))
}

/// Moves a position `distance` metres along `heading`, then wraps.
pub fn advance(p: Position, heading: Heading, distance: f64, world: WorldDims) -> Position {
    let (dx, dy) = heading.unit_vector();
    wrap(
        Position::new(p.x + distance * dx, p.y + distance * dy),
        world,
    )
}

/// NetLogo-style `fd speed`.
pub fn forward(agent: &AgentState, world: WorldDims) -> AgentState {
    AgentState {
        position: advance(agent.position, agent.heading, agent.speed, world),
        ..agent.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const W100: WorldDims = WorldDims {
        width: 100.0,
        height: 100.0,
    };

    fn agent_at(x: f64, y: f64, heading: f64, speed: f64) -> AgentState {
        AgentState {
            id: 3,
            team: Team::Black,
            position: Position::new(x, y),
            heading: Heading::from_degrees(heading),
            speed,
            random_behaviour: true,
            collision_done: false,
            recovering: false,
            collisions: 0,
        }
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(
            wrap(Position::new(-1.0, 0.0), W100),
            Position::new(99.0, 0.0)
        );
        assert_eq!(
            wrap(Position::new(50.0, 50.0), W100),
            Position::new(50.0, 50.0)
        );
        assert_eq!(
            wrap(Position::new(250.5, -0.5), W100),
            Position::new(50.5, 99.5)
        );
    }

    #[test]
    fn wrap_tiny_negative_stays_in_range() {
        let p = wrap(Position::new(-1e-18, -1e-300), W100);
        assert!(p.x < 100.0 && p.y < 100.0);
        assert!(p.x >= 0.0 && p.y >= 0.0);
    }

    #[test]
    fn torus_distance_examples() {
        let d = |a: (f64, f64), b: (f64, f64)| {
            torus_distance(Position::new(a.0, a.1), Position::new(b.0, b.1), W100)
        };
        assert_eq!(d((0.0, 0.0), (0.0, 0.0)), 0.0);
        assert_eq!(d((1.0, 0.0), (99.0, 0.0)), 2.0);
        assert_eq!(d((10.0, 10.0), (13.0, 14.0)), 5.0);
    }

    #[test]
    fn forward_examples() {
        let moved = forward(&agent_at(0.0, 0.0, 90.0, 0.3), W100);
        assert!((moved.position.x - 0.3).abs() < 1e-15);
        assert!(moved.position.y.abs() < 1e-15);

        let still = forward(&agent_at(12.0, 7.0, 33.0, 0.0), W100);
        assert_eq!(still.position, Position::new(12.0, 7.0));

        let moved = forward(&agent_at(0.0, 0.0, 120.0, 0.3), W100);
        assert!((moved.position.x - 0.259_807_621_135_331_6).abs() < 1e-12);
        assert!((moved.position.y - (100.0 - 0.15)).abs() < 1e-12);
    }

    #[test]
    fn heading_normalises() {
        assert_eq!(Heading::from_degrees(-90.0).degrees(), 270.0);
        assert_eq!(Heading::from_degrees(720.0).degrees(), 0.0);
        assert_eq!(Heading::from_degrees(450.0).degrees(), 90.0);
    }

    #[test]
    fn table_one_safety_distance_only_warns() {
        let p = SimParams::set1(40, Scenario::RandomWalk);
        assert!(p.validate().is_ok());
        let warnings = p.range_warnings();
        assert!(warnings.iter().any(|w| w.field == "min_safety_distance"));
        // max velocity 0.3 is below the slider floor too
        assert!(warnings.iter().any(|w| w.field == "max_velocity"));
    }

    #[test]
    fn validation_errors() {
        let base = SimParams::default();
        let p = SimParams {
            n_red: 0,
            n_black: 0,
            ..base.clone()
        };
        assert_eq!(p.validate(), Err(ParamError::NoAgents));
        let p = SimParams {
            ticks: 0,
            ..base.clone()
        };
        assert_eq!(p.validate(), Err(ParamError::ZeroTicks));
        let p = SimParams {
            collision_radius: 0.0,
            ..base.clone()
        };
        assert_eq!(p.validate(), Err(ParamError::CollisionRadius(0.0)));
        let p = SimParams {
            world_width: 5.0,
            ..base.clone()
        };
        assert!(matches!(
            p.validate(),
            Err(ParamError::WorldTooSmall { .. })
        ));
        let p = SimParams {
            deceleration: f64::NAN,
            ..base.clone()
        };
        assert!(matches!(p.validate(), Err(ParamError::NotFinite { .. })));
        let p = SimParams {
            min_velocity: 0.6,
            ..base
        };
        assert!(matches!(
            p.validate(),
            Err(ParamError::VelocityOrder { .. })
        ));
    }

    #[test]
    fn scenario_parses() {
        assert_eq!("social".parse::<Scenario>(), Ok(Scenario::AllSocialAVs));
        assert_eq!("Random".parse::<Scenario>(), Ok(Scenario::RandomWalk));
        assert!("walk".parse::<Scenario>().is_err());
    }

    fn any_pos() -> impl Strategy<Value = Position> {
        (-1e4..1e4f64, -1e4..1e4f64).prop_map(|(x, y)| Position::new(x, y))
    }

    fn canonical_pos() -> impl Strategy<Value = Position> {
        (0.0..100.0f64, 0.0..100.0f64).prop_map(|(x, y)| Position::new(x, y))
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent(p in any_pos()) {
            let once = wrap(p, W100);
            prop_assert!(once.x >= 0.0 && once.x < 100.0);
            prop_assert!(once.y >= 0.0 && once.y < 100.0);
            prop_assert_eq!(wrap(once, W100), once);
        }

        #[test]
        fn distance_is_symmetric_and_bounded(a in canonical_pos(), b in canonical_pos()) {
            let ab = torus_distance(a, b, W100);
            prop_assert_eq!(ab, torus_distance(b, a, W100));
            prop_assert!(ab <= W100.half_diagonal());
        }

        #[test]
        fn forward_ignores_full_turns(
            p in canonical_pos(),
            half_degrees in 0u32..720,
            speed in 0.0..1.0f64,
        ) {
            // half-degree headings keep h + 360 exact
            let h = half_degrees as f64 * 0.5;
            let a = forward(&agent_at(p.x, p.y, h, speed), W100);
            let b = forward(&agent_at(p.x, p.y, h + 360.0, speed), W100);
            prop_assert_eq!(a.position, b.position);
            prop_assert_eq!(a.id, 3);
            prop_assert_eq!(a.team, Team::Black);
        }

        #[test]
        fn forward_full_turn_close_for_any_heading(
            p in canonical_pos(),
            h in 0.0..360.0f64,
            speed in 0.0..1.0f64,
        ) {
            let a = forward(&agent_at(p.x, p.y, h, speed), W100);
            let b = forward(&agent_at(p.x, p.y, h + 360.0, speed), W100);
            prop_assert!(torus_distance(a.position, b.position, W100) < 1e-9);
        }
    }
}
