//! Setup, the tick loop and collision counting.
//!
//! Each tick every agent first moves along its heading. Behaviour is then
//! evaluated for all agents against that post-move snapshot, the resulting
//! actions are applied in id order, and finally new contacts between agents
//! are counted.

mod grid;

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::agents::{self, Action, ActionKind, HeadingDraws};
use crate::model::{
    advance, forward, AgentState, CollisionCounting, ParamError, Position, Scenario, SimParams,
    Team, WorldDims,
};

pub use grid::SpatialGrid;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("trace output failed: {0}")]
    Trace(#[from] io::Error),
}

/// Complete mutable state of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub dims: WorldDims,
    /// Indexed by id.
    pub agents: Vec<AgentState>,
    pub tick: u64,
    pub total_collisions: u64,
    pub rng: ChaCha8Rng,
    /// Pairs `(lo, hi)` in contact after the last tick, sorted.
    pub contacts: Vec<(u32, u32)>,
}

impl WorldState {
    pub fn positions(&self) -> Vec<Position> {
        self.agents.iter().map(|a| a.position).collect()
    }

    pub fn team_count(&self, team: Team) -> usize {
        self.agents.iter().filter(|a| a.team == team).count()
    }
}

/// Creates the agents: `n_red` heading 90 then `n_black` heading 120, all at
/// `min_velocity`, uniformly placed. The random-walk toggle starts as a fair
/// coin per agent.
pub fn setup(params: &SimParams, seed: u64) -> Result<WorldState, ParamError> {
    params.validate()?;
    let dims = params.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let teams = std::iter::repeat_n(Team::Red, params.n_red as usize)
        .chain(std::iter::repeat_n(Team::Black, params.n_black as usize));
    let agents = teams
        .enumerate()
        .map(|(id, team)| {
            let x = rng.gen_range(0.0..dims.width);
            let y = rng.gen_range(0.0..dims.height);
            let random_behaviour = rng.gen_bool(0.5);
            AgentState {
                id: id as u32,
                team,
                position: Position::new(x, y),
                heading: team.initial_heading(),
                speed: params.min_velocity,
                random_behaviour,
                collision_done: false,
                recovering: false,
                collisions: 0,
            }
        })
        .collect();
    Ok(WorldState {
        dims,
        agents,
        tick: 0,
        total_collisions: 0,
        rng,
        contacts: Vec::new(),
    })
}

/// Counts contacts at torus distance below `collision_radius` that were not
/// already present after the previous tick, updates agent tallies, contact
/// flags and the world total, and returns the number of events added.
///
/// With [`CollisionCounting::Pair`] each new pair is one event; `Agent` counts
/// each agent of a new pair; `Overlap` counts every pair in contact on every
/// tick. Agent tallies grow by one per event the agent takes part in.
pub fn detect_collisions(
    world: &mut WorldState,
    collision_radius: f64,
    counting: CollisionCounting,
) -> u64 {
    let positions = world.positions();
    let grid = SpatialGrid::build(&positions, world.dims, collision_radius);
    let current = grid.pairs_closer_than(collision_radius, &positions);
    let events = new_contacts(&world.contacts, &current, counting);

    let per_pair = match counting {
        CollisionCounting::Agent => 2,
        _ => 1,
    };
    for &(a, b) in &events {
        world.agents[a as usize].collisions += 1;
        world.agents[b as usize].collisions += 1;
    }
    for agent in &mut world.agents {
        agent.collision_done = false;
    }
    for &(a, b) in &current {
        world.agents[a as usize].collision_done = true;
        world.agents[b as usize].collision_done = true;
    }
    let count = events.len() as u64 * per_pair;
    world.total_collisions += count;
    world.contacts = current;
    count
}

fn new_contacts(
    previous: &[(u32, u32)],
    current: &[(u32, u32)],
    counting: CollisionCounting,
) -> Vec<(u32, u32)> {
    match counting {
        CollisionCounting::Overlap => current.to_vec(),
        _ => current
            .iter()
            .copied()
            .filter(|pair| previous.binary_search(pair).is_err())
            .collect(),
    }
}

/// Decides every agent's action for this tick from the post-move snapshot.
/// Random-walk draws are dealt in id order before any evaluation.
pub fn decide(world: &mut WorldState, params: &SimParams) -> Vec<Action> {
    match params.scenario {
        Scenario::AllSocialAVs => {
            let positions = world.positions();
            let cell = params.sonar_range.max(params.collision_radius);
            let grid = SpatialGrid::build(&positions, world.dims, cell);
            world
                .agents
                .iter()
                .map(|a| agents::social_step_in(a, &world.agents, &positions, &grid, params))
                .collect()
        }
        Scenario::RandomWalk => {
            let draws: Vec<HeadingDraws> = (0..world.agents.len())
                .map(|_| HeadingDraws::deal(&mut world.rng))
                .collect();
            world
                .agents
                .iter()
                .zip(draws)
                .map(|(a, d)| agents::random_walk_step(a, params, d))
                .collect()
        }
    }
}

fn apply(agent: &mut AgentState, action: &Action, dims: WorldDims) {
    if let Some(detour) = action.detour {
        agent.position = advance(agent.position, detour, agent.speed, dims);
    }
    agent.heading = action.new_heading;
    agent.speed = action.new_speed;
    agent.random_behaviour = action.random_behaviour;
    agent.recovering = action.recovering;
}

/// Advances the world by one tick and returns the actions taken, by id.
pub fn step_world(world: &mut WorldState, params: &SimParams) -> (Vec<Action>, u64) {
    let dims = world.dims;
    for agent in &mut world.agents {
        *agent = forward(agent, dims);
    }
    let actions = decide(world, params);
    for (agent, action) in world.agents.iter_mut().zip(&actions) {
        apply(agent, action, dims);
    }
    let collisions = detect_collisions(world, params.collision_radius, params.collision_counting);
    world.tick += 1;
    (actions, collisions)
}

/// Pure form of [`step_world`].
pub fn tick(world: &WorldState, params: &SimParams) -> WorldState {
    let mut next = world.clone();
    step_world(&mut next, params);
    next
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub total_collisions: u64,
    pub collisions_per_tick: Vec<u64>,
    /// Sum of agent tallies per team as `(red, black)`. In pair counting a
    /// red-black collision adds one to each side.
    pub per_team_collisions: (u64, u64),
    pub params_echo: SimParams,
    pub seed: u64,
}

impl RunResult {
    /// `tick,collisions` rows, one per tick, starting at tick 1.
    pub fn write_per_tick_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "tick,collisions")?;
        for (i, c) in self.collisions_per_tick.iter().enumerate() {
            writeln!(out, "{},{}", i + 1, c)?;
        }
        Ok(())
    }
}

/// Writes one trace line per agent: `tick,id,x,y,heading,speed,action`.
pub fn write_trace_lines<W: Write>(
    out: &mut W,
    world: &WorldState,
    actions: &[Action],
) -> io::Result<()> {
    for (agent, action) in world.agents.iter().zip(actions) {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            world.tick,
            agent.id,
            agent.position.x,
            agent.position.y,
            agent.heading,
            agent.speed,
            action.kind
        )?;
    }
    Ok(())
}

pub const TRACE_HEADER: &str = "tick,id,x,y,heading,speed,action";

/// Runs `params.ticks` ticks from a fresh setup.
pub fn run(params: &SimParams, seed: u64) -> Result<RunResult, ParamError> {
    run_inner::<io::Sink>(params, seed, None).map_err(|e| match e {
        EngineError::Params(p) => p,
        EngineError::Trace(_) => unreachable!("no trace writer"),
    })
}

/// [`run`] that also writes the per-tick trace log to `trace`.
pub fn run_traced<W: Write>(
    params: &SimParams,
    seed: u64,
    trace: &mut W,
) -> Result<RunResult, EngineError> {
    run_inner(params, seed, Some(trace))
}

fn run_inner<W: Write>(
    params: &SimParams,
    seed: u64,
    mut trace: Option<&mut W>,
) -> Result<RunResult, EngineError> {
    let mut world = setup(params, seed)?;
    if let Some(out) = trace.as_deref_mut() {
        writeln!(out, "{TRACE_HEADER}")?;
    }
    let mut per_tick = Vec::with_capacity(params.ticks as usize);
    for _ in 0..params.ticks {
        let (actions, count) = step_world(&mut world, params);
        per_tick.push(count);
        if let Some(out) = trace.as_deref_mut() {
            write_trace_lines(out, &world, &actions)?;
        }
        debug_assert!(speeds_in_band(&world, params, &actions));
    }
    let team_sum = |team| {
        world
            .agents
            .iter()
            .filter(|a| a.team == team)
            .map(|a| a.collisions)
            .sum()
    };
    Ok(RunResult {
        total_collisions: world.total_collisions,
        collisions_per_tick: per_tick,
        per_team_collisions: (team_sum(Team::Red), team_sum(Team::Black)),
        params_echo: params.clone(),
        seed,
    })
}

fn speeds_in_band(world: &WorldState, params: &SimParams, actions: &[Action]) -> bool {
    if params.additive_deceleration {
        return true;
    }
    world.agents.iter().zip(actions).all(|(a, act)| {
        let floor = if act.kind == ActionKind::RandomWalk {
            params.min_velocity
        } else {
            0.0
        };
        a.speed >= floor && a.speed <= params.max_velocity
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Heading;

    fn two_agents(d: f64) -> WorldState {
        let mut w = setup(
            &SimParams {
                n_red: 1,
                n_black: 1,
                ..SimParams::default()
            },
            1,
        )
        .unwrap();
        w.agents[0].position = Position::new(10.0, 10.0);
        w.agents[1].position = Position::new(10.0 + d, 10.0);
        w
    }

    #[test]
    fn setup_follows_team_layout() {
        let params = SimParams::set1(40, Scenario::AllSocialAVs);
        let a = setup(&params, 7).unwrap();
        let b = setup(&params, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.agents.len(), 80);
        for agent in &a.agents {
            let expected = if agent.id < 40 {
                (Team::Red, 90.0)
            } else {
                (Team::Black, 120.0)
            };
            assert_eq!((agent.team, agent.heading.degrees()), expected);
            assert_eq!(agent.speed, 0.3);
            assert_eq!(agent.collisions, 0);
        }
        assert_ne!(a, setup(&params, 8).unwrap());
    }

    #[test]
    fn setup_rejects_empty_world() {
        let params = SimParams {
            n_red: 0,
            n_black: 0,
            ..SimParams::default()
        };
        assert_eq!(setup(&params, 1), Err(ParamError::NoAgents));
    }

    #[test]
    fn collisions_are_edge_triggered() {
        let mut w = two_agents(0.0);
        assert_eq!(detect_collisions(&mut w, 1.0, CollisionCounting::Pair), 1);
        assert!(w.agents[0].collision_done && w.agents[1].collision_done);
        assert_eq!(detect_collisions(&mut w, 1.0, CollisionCounting::Pair), 0);
        assert_eq!(w.total_collisions, 1);
        assert_eq!(w.agents[0].collisions, 1);
        // separate and touch again
        w.agents[1].position = Position::new(15.0, 10.0);
        assert_eq!(detect_collisions(&mut w, 1.0, CollisionCounting::Pair), 0);
        assert!(!w.agents[0].collision_done);
        w.agents[1].position = Position::new(10.5, 10.0);
        assert_eq!(detect_collisions(&mut w, 1.0, CollisionCounting::Pair), 1);
    }

    #[test]
    fn radius_is_strict() {
        let mut w = two_agents(1.0);
        assert_eq!(detect_collisions(&mut w, 1.0, CollisionCounting::Pair), 0);
    }

    #[test]
    fn three_way_touch_counts_each_pair() {
        let mut w = setup(
            &SimParams {
                n_red: 3,
                n_black: 0,
                ..SimParams::default()
            },
            1,
        )
        .unwrap();
        for a in &mut w.agents {
            a.position = Position::new(20.0, 20.0);
        }
        assert_eq!(detect_collisions(&mut w, 1.0, CollisionCounting::Pair), 3);
        assert!(w.agents.iter().all(|a| a.collisions == 2));
    }

    #[test]
    fn counting_conventions() {
        let mut w = two_agents(0.2);
        assert_eq!(detect_collisions(&mut w, 1.0, CollisionCounting::Agent), 2);
        assert_eq!(detect_collisions(&mut w, 1.0, CollisionCounting::Agent), 0);
        let mut w = two_agents(0.2);
        assert_eq!(
            detect_collisions(&mut w, 1.0, CollisionCounting::Overlap),
            1
        );
        assert_eq!(
            detect_collisions(&mut w, 1.0, CollisionCounting::Overlap),
            1
        );
        assert_eq!(w.total_collisions, 2);
    }

    #[test]
    fn single_social_agent_keeps_going() {
        let params = SimParams {
            n_red: 1,
            n_black: 0,
            ..SimParams::default()
        };
        let mut w = setup(&params, 3).unwrap();
        let start = w.agents[0].position;
        let (actions, count) = step_world(&mut w, &params);
        assert_eq!(actions[0].kind, ActionKind::Keep);
        assert_eq!(count, 0);
        assert!((w.agents[0].position.x - (start.x + 0.3) % 100.0).abs() < 1e-12);
        assert_eq!(w.tick, 1);
    }

    #[test]
    fn close_parallel_pair_mirrors_each_other() {
        let params = SimParams {
            n_red: 1,
            n_black: 1,
            ..SimParams::default()
        };
        let mut w = two_agents(0.0);
        w.agents[0].position = Position::new(50.0, 50.0);
        w.agents[1].position = Position::new(50.0, 50.5);
        w.agents[1].heading = Heading::from_degrees(90.0);
        let (actions, _) = step_world(&mut w, &params);
        assert!(actions.iter().all(|a| a.kind == ActionKind::Mirror));
        assert_eq!(w.agents[0].heading, w.agents[1].heading);
        assert!((w.agents[0].speed - 0.2).abs() < 1e-15);
    }

    #[test]
    fn tick_is_pure() {
        let params = SimParams::set1(20, Scenario::RandomWalk);
        let w = setup(&params, 5).unwrap();
        assert_eq!(tick(&w, &params), tick(&w, &params));
    }

    #[test]
    fn run_bookkeeping() {
        let params = SimParams {
            ticks: 200,
            ..SimParams::set1(30, Scenario::RandomWalk)
        };
        let r = run(&params, 11).unwrap();
        assert_eq!(r.collisions_per_tick.len(), 200);
        assert_eq!(
            r.total_collisions,
            r.collisions_per_tick.iter().sum::<u64>()
        );
        assert_eq!(
            r.per_team_collisions.0 + r.per_team_collisions.1,
            2 * r.total_collisions
        );
        assert_eq!(r, run(&params, 11).unwrap());
        let zero = SimParams { ticks: 0, ..params };
        assert_eq!(run(&zero, 1), Err(ParamError::ZeroTicks));
    }

    #[test]
    fn trace_has_one_line_per_agent_tick() {
        let params = SimParams {
            ticks: 3,
            ..SimParams::set1(2, Scenario::AllSocialAVs)
        };
        let mut buf = Vec::new();
        run_traced(&params, 1, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(lines.len(), 1 + 3 * 4);
        assert!(lines[1].starts_with("1,0,"));
    }
}
