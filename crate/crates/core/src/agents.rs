//! Per-agent behaviour.
//!
//! Social agents sense every other agent inside their sonar range, pick the
//! nearest, and if it is within the safety distance they copy its heading and
//! take its speed minus the deceleration. Random-walk agents take two random
//! headings per tick and toggle between accelerating and decelerating.
//!
//! Every function here is pure: it reads a frozen snapshot and returns an
//! [`Action`] which the engine applies afterwards.

use std::fmt;

use rand::Rng;

use crate::engine::SpatialGrid;
use crate::model::{AgentState, Heading, Position, SimParams, WorldDims};

/// Exclusive upper bound of the first random-walk heading draw.
pub const FIRST_HEADING_BOUND: u32 = 89;
/// Exclusive upper bound of the second random-walk heading draw.
pub const SECOND_HEADING_BOUND: u32 = 200;

/// What an agent can see this tick.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NeighborView {
    /// `(id, torus distance)` of every other agent within sonar range, by id.
    pub nearmates: Vec<(u32, f64)>,
    /// Closest nearmate; ties go to the lowest id.
    pub nearest: Option<(u32, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Mirror,
    Accelerate,
    Keep,
    RandomWalk,
}

impl ActionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Mirror => "mirror",
            ActionKind::Accelerate => "accelerate",
            ActionKind::Keep => "keep",
            ActionKind::RandomWalk => "random_walk",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The outcome of one agent's decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub kind: ActionKind,
    pub new_heading: Heading,
    pub new_speed: f64,
    /// Random walk only: heading of the extra move taken at the old speed
    /// before turning to `new_heading`.
    pub detour: Option<Heading>,
    pub random_behaviour: bool,
    pub recovering: bool,
}

impl Action {
    fn keep(me: &AgentState) -> Self {
        Action {
            kind: ActionKind::Keep,
            new_heading: me.heading,
            new_speed: me.speed,
            detour: None,
            random_behaviour: me.random_behaviour,
            recovering: me.recovering,
        }
    }
}

/// Neighbour search through the spatial grid. `agents` is indexed by id and
/// `grid` must have been built from the same positions.
pub fn find_nearmates(
    me: &AgentState,
    agents: &[AgentState],
    grid: &SpatialGrid,
    sonar_range: f64,
    world: WorldDims,
) -> NeighborView {
    let positions: Vec<Position> = agents.iter().map(|a| a.position).collect();
    debug_assert_eq!(grid.world(), world);
    find_nearmates_in(me, &positions, grid, sonar_range)
}

pub(crate) fn find_nearmates_in(
    me: &AgentState,
    positions: &[Position],
    grid: &SpatialGrid,
    sonar_range: f64,
) -> NeighborView {
    let mut nearmates = grid.within(me.position, sonar_range, positions);
    nearmates.retain(|&(id, _)| id != me.id);
    let nearest = nearest_of(&nearmates);
    NeighborView { nearmates, nearest }
}

/// Minimum distance, lowest id on ties.
pub fn nearest_of(nearmates: &[(u32, f64)]) -> Option<(u32, f64)> {
    nearmates
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}

/// Threat check: the nearest neighbour is at or inside the safety distance.
pub fn danger(view: &NeighborView, min_safety_distance: f64) -> bool {
    matches!(view.nearest, Some((_, d)) if d <= min_safety_distance)
}

/// Copy the neighbour's heading and take its speed minus the deceleration,
/// never going below zero.
pub fn mirror(me: &AgentState, neighbor: &AgentState, deceleration: f64) -> Action {
    let new_speed = (neighbor.speed - deceleration).max(0.0);
    Action {
        kind: ActionKind::Mirror,
        new_heading: neighbor.heading,
        new_speed,
        detour: None,
        random_behaviour: me.random_behaviour,
        recovering: true,
    }
}

pub fn accelerate(me: &AgentState, max_acceleration: f64, max_velocity: f64) -> Action {
    let new_speed = (me.speed + max_acceleration).min(max_velocity);
    Action {
        kind: ActionKind::Accelerate,
        new_heading: me.heading,
        new_speed,
        detour: None,
        random_behaviour: me.random_behaviour,
        recovering: new_speed < max_velocity,
    }
}

/// Social behaviour for one agent. `snapshot` is indexed by id and holds the
/// post-move state of every agent; `grid` indexes the same positions.
///
/// Danger: mirror the nearest neighbour. No danger: keep heading and speed,
/// except that an agent slowed by an earlier mirror accelerates back towards
/// `max_velocity`. With `same_tick_accelerate` the acceleration is applied
/// on top of the mirror in the same tick instead.
pub fn social_step(
    me: &AgentState,
    snapshot: &[AgentState],
    grid: &SpatialGrid,
    params: &SimParams,
) -> Action {
    let positions: Vec<Position> = snapshot.iter().map(|a| a.position).collect();
    social_step_in(me, snapshot, &positions, grid, params)
}

pub(crate) fn social_step_in(
    me: &AgentState,
    snapshot: &[AgentState],
    positions: &[Position],
    grid: &SpatialGrid,
    params: &SimParams,
) -> Action {
    let view = find_nearmates_in(me, positions, grid, params.sonar_range);
    social_action(me, &view, snapshot, params)
}

/// Social decision given the agent's neighbour view; `others` is indexed by id.
pub fn social_action(
    me: &AgentState,
    view: &NeighborView,
    others: &[AgentState],
    params: &SimParams,
) -> Action {
    match view.nearest {
        Some((id, _)) if danger(view, params.min_safety_distance) => {
            let mirrored = mirror(me, &others[id as usize], params.deceleration);
            if params.same_tick_accelerate {
                let slowed = AgentState {
                    speed: mirrored.new_speed,
                    ..me.clone()
                };
                let sped = accelerate(&slowed, params.max_acceleration, params.max_velocity);
                Action {
                    new_speed: sped.new_speed,
                    recovering: sped.recovering,
                    ..mirrored
                }
            } else {
                mirrored
            }
        }
        _ if me.recovering && me.speed < params.max_velocity => {
            accelerate(me, params.max_acceleration, params.max_velocity)
        }
        _ => Action {
            recovering: false,
            ..Action::keep(me)
        },
    }
}

/// The two heading draws a random-walk agent consumes per tick, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeadingDraws {
    pub first: u32,
    pub second: u32,
}

impl HeadingDraws {
    /// Draws uniform integers in `[0, 89)` then `[0, 200)`.
    pub fn deal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let first = rng.gen_range(0..FIRST_HEADING_BOUND);
        let second = rng.gen_range(0..SECOND_HEADING_BOUND);
        HeadingDraws { first, second }
    }
}

/// Random-walk behaviour given pre-dealt heading draws.
///
/// The agent has already taken its regular move; it turns to `first`, moves
/// again at its current speed (the returned `detour`), then turns to
/// `second`. Speed alternates between `+max_acceleration` (capped at
/// `max_velocity`) and `-deceleration` (floored at `min_velocity`). With
/// `additive_deceleration` the second branch adds the deceleration instead,
/// as the original listing reads, and only the floor applies.
pub fn random_walk_step(me: &AgentState, params: &SimParams, draws: HeadingDraws) -> Action {
    let (new_speed, random_behaviour) = if me.random_behaviour {
        (
            (me.speed + params.max_acceleration).min(params.max_velocity),
            false,
        )
    } else {
        let changed = if params.additive_deceleration {
            me.speed + params.deceleration
        } else {
            me.speed - params.deceleration
        };
        (changed.max(params.min_velocity), true)
    };
    Action {
        kind: ActionKind::RandomWalk,
        new_heading: Heading::from_degrees(draws.second as f64),
        new_speed,
        detour: Some(Heading::from_degrees(draws.first as f64)),
        random_behaviour,
        recovering: false,
    }
}

/// Same as [`random_walk_step`], drawing the headings from `rng`.
pub fn random_walk_step_with<R: Rng + ?Sized>(
    me: &AgentState,
    params: &SimParams,
    rng: &mut R,
) -> Action {
    random_walk_step(me, params, HeadingDraws::deal(rng))
}
