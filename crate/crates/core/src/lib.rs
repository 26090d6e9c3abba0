//! Agent-based simulator of autonomous vehicles that avoid collisions by
//! sensing their nearest neighbour and copying its heading and speed, compared
//! against a random-walk baseline.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: world geometry on a wrapped torus, agent state and run parameters.
//! * [`richardson`]: the coupled two-vehicle linear difference system behind the
//!   avoidance rule, with fixed-point and stability analysis.
//! * [`agents`]: per-agent behaviour (neighbour search, threat check, mirroring,
//!   acceleration, random walk).
//! * [`engine`]: setup, the deterministic tick loop, collision counting and the
//!   spatial grid.
//! * [`experiments`]: parameter sweeps with paired seeding, aggregation and CSV
//!   export.

pub mod agents;
pub mod engine;
pub mod experiments;
pub mod model;
pub mod richardson;

pub use engine::{run, setup, RunResult, SpatialGrid, WorldState};
pub use experiments::{efficiency, ExperimentSpec, SummaryRow};
pub use model::{
    AgentState, CollisionCounting, Heading, ParamError, Position, Scenario, SimParams, Team,
    WorldDims,
};
pub use richardson::{PairState, RichardsonParams, Stability};
