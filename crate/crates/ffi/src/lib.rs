//! C ABI for the `socialav` simulator.
//!
//! Worlds and run results are opaque heap handles created by `*_new` / `socialav_run`
//! and released with the matching `*_free`. Every fallible call returns a
//! [`SocialavStatus`]; on failure a description is available from
//! [`socialav_last_error_message`] on the same thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use socialav::engine::{self, RunResult, WorldState};
use socialav::experiments::{self, BuiltinSet};
use socialav::model::{CollisionCounting, Scenario, SimParams, Team};
use socialav::richardson::{self, PairState, RichardsonParams, StabilityClass};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SocialavStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    NoFixedPoint = 3,
    BufferTooSmall = 4,
    OutOfRange = 5,
    Io = 6,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SocialavScenario {
    Social = 0,
    Random = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SocialavCounting {
    Pair = 0,
    Agent = 1,
    Overlap = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SocialavStability {
    Stable = 0,
    Marginal = 1,
    Unstable = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SocialavBuiltinSet {
    Set1 = 1,
    Set2 = 2,
}

/// Run parameters; mirrors `socialav::SimParams`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SocialavParams {
    pub n_red: u32,
    pub n_black: u32,
    pub min_velocity: f64,
    pub max_velocity: f64,
    pub max_acceleration: f64,
    pub deceleration: f64,
    pub min_safety_distance: f64,
    pub sonar_range: f64,
    pub scenario: SocialavScenario,
    pub world_width: f64,
    pub world_height: f64,
    pub collision_radius: f64,
    pub ticks: u64,
    pub seed: u64,
    pub collision_counting: SocialavCounting,
    pub same_tick_accelerate: bool,
    pub additive_deceleration: bool,
}

/// Snapshot of one agent. `team` is 0 for red, 1 for black.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SocialavAgent {
    pub id: u32,
    pub team: u32,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub collisions: u64,
    pub collision_done: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SocialavRichardson {
    pub delta1: f64,
    pub delta2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub g1: f64,
    pub g2: f64,
    pub h1: f64,
    pub h2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SocialavPair {
    pub v1: f64,
    pub v2: f64,
}

/// Opaque simulation world.
pub struct SocialavWorld {
    state: WorldState,
    params: SimParams,
}

/// Opaque result of a complete run.
pub struct SocialavRunResult(RunResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: SocialavStatus, msg: impl Into<String>) -> SocialavStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> SocialavStatus) -> SocialavStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SocialavStatus::Panic, "internal panic"),
    }
}

impl From<&SocialavParams> for SimParams {
    fn from(p: &SocialavParams) -> Self {
        SimParams {
            n_red: p.n_red,
            n_black: p.n_black,
            min_velocity: p.min_velocity,
            max_velocity: p.max_velocity,
            max_acceleration: p.max_acceleration,
            deceleration: p.deceleration,
            min_safety_distance: p.min_safety_distance,
            sonar_range: p.sonar_range,
            scenario: match p.scenario {
                SocialavScenario::Social => Scenario::AllSocialAVs,
                SocialavScenario::Random => Scenario::RandomWalk,
            },
            world_width: p.world_width,
            world_height: p.world_height,
            collision_radius: p.collision_radius,
            ticks: p.ticks,
            seed: p.seed,
            collision_counting: match p.collision_counting {
                SocialavCounting::Pair => CollisionCounting::Pair,
                SocialavCounting::Agent => CollisionCounting::Agent,
                SocialavCounting::Overlap => CollisionCounting::Overlap,
            },
            same_tick_accelerate: p.same_tick_accelerate,
            additive_deceleration: p.additive_deceleration,
        }
    }
}

impl From<&SimParams> for SocialavParams {
    fn from(p: &SimParams) -> Self {
        SocialavParams {
            n_red: p.n_red,
            n_black: p.n_black,
            min_velocity: p.min_velocity,
            max_velocity: p.max_velocity,
            max_acceleration: p.max_acceleration,
            deceleration: p.deceleration,
            min_safety_distance: p.min_safety_distance,
            sonar_range: p.sonar_range,
            scenario: match p.scenario {
                Scenario::AllSocialAVs => SocialavScenario::Social,
                Scenario::RandomWalk => SocialavScenario::Random,
            },
            world_width: p.world_width,
            world_height: p.world_height,
            collision_radius: p.collision_radius,
            ticks: p.ticks,
            seed: p.seed,
            collision_counting: match p.collision_counting {
                CollisionCounting::Pair => SocialavCounting::Pair,
                CollisionCounting::Agent => SocialavCounting::Agent,
                CollisionCounting::Overlap => SocialavCounting::Overlap,
            },
            same_tick_accelerate: p.same_tick_accelerate,
            additive_deceleration: p.additive_deceleration,
        }
    }
}

impl From<&SocialavRichardson> for RichardsonParams {
    fn from(r: &SocialavRichardson) -> Self {
        RichardsonParams {
            delta1: r.delta1,
            delta2: r.delta2,
            alpha1: r.alpha1,
            alpha2: r.alpha2,
            g1: r.g1,
            g2: r.g2,
            h1: r.h1,
            h2: r.h2,
        }
    }
}

fn scenario_of(s: SocialavScenario) -> Scenario {
    match s {
        SocialavScenario::Social => Scenario::AllSocialAVs,
        SocialavScenario::Random => Scenario::RandomWalk,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn socialav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn socialav_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Fills `out` with the low-velocity preset for `per_team` agents per team.
#[no_mangle]
pub unsafe extern "C" fn socialav_params_set1(
    per_team: u32,
    scenario: SocialavScenario,
    out: *mut SocialavParams,
) -> SocialavStatus {
    let Some(out) = out.as_mut() else {
        return fail(SocialavStatus::NullPointer, "out is null");
    };
    *out = (&SimParams::set1(per_team, scenario_of(scenario))).into();
    SocialavStatus::Ok
}

/// Fills `out` with the high-velocity preset.
#[no_mangle]
pub unsafe extern "C" fn socialav_params_set2(
    per_team: u32,
    scenario: SocialavScenario,
    out: *mut SocialavParams,
) -> SocialavStatus {
    let Some(out) = out.as_mut() else {
        return fail(SocialavStatus::NullPointer, "out is null");
    };
    *out = (&SimParams::set2(per_team, scenario_of(scenario))).into();
    SocialavStatus::Ok
}

/// Creates a world from `params` and `seed`. On success `*out` owns a handle
/// that must be released with [`socialav_world_free`].
#[no_mangle]
pub unsafe extern "C" fn socialav_world_new(
    params: *const SocialavParams,
    seed: u64,
    out: *mut *mut SocialavWorld,
) -> SocialavStatus {
    guard(|| {
        let (Some(params), false) = (params.as_ref(), out.is_null()) else {
            return fail(SocialavStatus::NullPointer, "params or out is null");
        };
        let params = SimParams::from(params);
        match engine::setup(&params, seed) {
            Ok(state) => {
                *out = Box::into_raw(Box::new(SocialavWorld { state, params }));
                SocialavStatus::Ok
            }
            Err(e) => fail(SocialavStatus::InvalidParams, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn socialav_world_free(world: *mut SocialavWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

/// Advances `ticks` ticks; adds the collision events of those ticks to
/// `*out_collisions` when it is not NULL.
#[no_mangle]
pub unsafe extern "C" fn socialav_world_step(
    world: *mut SocialavWorld,
    ticks: u64,
    out_collisions: *mut u64,
) -> SocialavStatus {
    guard(|| {
        let Some(w) = world.as_mut() else {
            return fail(SocialavStatus::NullPointer, "world is null");
        };
        let mut added = 0;
        for _ in 0..ticks {
            added += engine::step_world(&mut w.state, &w.params).1;
        }
        if let Some(out) = out_collisions.as_mut() {
            *out = added;
        }
        SocialavStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn socialav_world_tick(world: *const SocialavWorld) -> u64 {
    world.as_ref().map_or(0, |w| w.state.tick)
}

#[no_mangle]
pub unsafe extern "C" fn socialav_world_total_collisions(world: *const SocialavWorld) -> u64 {
    world.as_ref().map_or(0, |w| w.state.total_collisions)
}

#[no_mangle]
pub unsafe extern "C" fn socialav_world_agent_count(world: *const SocialavWorld) -> usize {
    world.as_ref().map_or(0, |w| w.state.agents.len())
}

#[no_mangle]
pub unsafe extern "C" fn socialav_world_agent(
    world: *const SocialavWorld,
    index: usize,
    out: *mut SocialavAgent,
) -> SocialavStatus {
    let (Some(w), Some(out)) = (world.as_ref(), out.as_mut()) else {
        return fail(SocialavStatus::NullPointer, "world or out is null");
    };
    let Some(a) = w.state.agents.get(index) else {
        return fail(
            SocialavStatus::OutOfRange,
            format!("agent index {index} out of range"),
        );
    };
    *out = SocialavAgent {
        id: a.id,
        team: match a.team {
            Team::Red => 0,
            Team::Black => 1,
        },
        x: a.position.x,
        y: a.position.y,
        heading: a.heading.degrees(),
        speed: a.speed,
        collisions: a.collisions,
        collision_done: a.collision_done,
    };
    SocialavStatus::Ok
}

/// Runs `params.ticks` ticks from a fresh setup. Release the result with
/// [`socialav_run_free`].
#[no_mangle]
pub unsafe extern "C" fn socialav_run(
    params: *const SocialavParams,
    seed: u64,
    out: *mut *mut SocialavRunResult,
) -> SocialavStatus {
    guard(|| {
        let (Some(params), false) = (params.as_ref(), out.is_null()) else {
            return fail(SocialavStatus::NullPointer, "params or out is null");
        };
        match engine::run(&SimParams::from(params), seed) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(SocialavRunResult(r)));
                SocialavStatus::Ok
            }
            Err(e) => fail(SocialavStatus::InvalidParams, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn socialav_run_free(result: *mut SocialavRunResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

#[no_mangle]
pub unsafe extern "C" fn socialav_run_total_collisions(result: *const SocialavRunResult) -> u64 {
    result.as_ref().map_or(0, |r| r.0.total_collisions)
}

#[no_mangle]
pub unsafe extern "C" fn socialav_run_tick_count(result: *const SocialavRunResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.collisions_per_tick.len())
}

/// Copies the per-tick collision series into `buf`, which must hold at least
/// [`socialav_run_tick_count`] elements.
#[no_mangle]
pub unsafe extern "C" fn socialav_run_copy_per_tick(
    result: *const SocialavRunResult,
    buf: *mut u64,
    len: usize,
) -> SocialavStatus {
    let Some(r) = result.as_ref() else {
        return fail(SocialavStatus::NullPointer, "result is null");
    };
    let series = &r.0.collisions_per_tick;
    if len < series.len() {
        return fail(
            SocialavStatus::BufferTooSmall,
            format!("buffer holds {len}, need {}", series.len()),
        );
    }
    if buf.is_null() && !series.is_empty() {
        return fail(SocialavStatus::NullPointer, "buf is null");
    }
    if !series.is_empty() {
        ptr::copy_nonoverlapping(series.as_ptr(), buf, series.len());
    }
    SocialavStatus::Ok
}

/// Per-team sums of agent collision tallies.
#[no_mangle]
pub unsafe extern "C" fn socialav_run_team_collisions(
    result: *const SocialavRunResult,
    out_red: *mut u64,
    out_black: *mut u64,
) -> SocialavStatus {
    let (Some(r), Some(red), Some(black)) = (result.as_ref(), out_red.as_mut(), out_black.as_mut())
    else {
        return fail(SocialavStatus::NullPointer, "null argument");
    };
    (*red, *black) = r.0.per_team_collisions;
    SocialavStatus::Ok
}

/// Percentage reduction of collisions relative to the random walk.
#[no_mangle]
pub unsafe extern "C" fn socialav_efficiency(
    random_mean: f64,
    social_mean: f64,
    out: *mut f64,
) -> SocialavStatus {
    let Some(out) = out.as_mut() else {
        return fail(SocialavStatus::NullPointer, "out is null");
    };
    match experiments::efficiency(random_mean, social_mean) {
        Ok(e) => {
            *out = e;
            SocialavStatus::Ok
        }
        Err(e) => fail(SocialavStatus::InvalidParams, e.to_string()),
    }
}

/// Runs a builtin experiment set on `jobs` threads and writes the summary CSV
/// to the NUL-terminated UTF-8 `path`.
#[no_mangle]
pub unsafe extern "C" fn socialav_sweep_builtin_csv(
    set: SocialavBuiltinSet,
    jobs: usize,
    path: *const c_char,
) -> SocialavStatus {
    guard(|| {
        if path.is_null() {
            return fail(SocialavStatus::NullPointer, "path is null");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(SocialavStatus::InvalidParams, "path is not UTF-8");
        };
        let spec = experiments::builtin_set(match set {
            SocialavBuiltinSet::Set1 => BuiltinSet::Set1,
            SocialavBuiltinSet::Set2 => BuiltinSet::Set2,
        });
        let rows = match experiments::run_experiment(&spec, jobs.max(1)) {
            Ok(rows) => rows,
            Err(e) => return fail(SocialavStatus::InvalidParams, e.to_string()),
        };
        match experiments::export_csv(&rows, Path::new(path)) {
            Ok(()) => SocialavStatus::Ok,
            Err(e) => fail(SocialavStatus::Io, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn socialav_richardson_step(
    params: *const SocialavRichardson,
    state: SocialavPair,
    out: *mut SocialavPair,
) -> SocialavStatus {
    let (Some(p), Some(out)) = (params.as_ref(), out.as_mut()) else {
        return fail(SocialavStatus::NullPointer, "params or out is null");
    };
    let s = richardson::step(PairState::new(state.v1, state.v2), &p.into());
    *out = SocialavPair { v1: s.v1, v2: s.v2 };
    SocialavStatus::Ok
}

/// Writes the unique fixed point, or returns `NoFixedPoint` when `I - M` is
/// singular.
#[no_mangle]
pub unsafe extern "C" fn socialav_richardson_fixed_point(
    params: *const SocialavRichardson,
    out: *mut SocialavPair,
) -> SocialavStatus {
    let (Some(p), Some(out)) = (params.as_ref(), out.as_mut()) else {
        return fail(SocialavStatus::NullPointer, "params or out is null");
    };
    match richardson::fixed_point(&p.into()) {
        Ok(v) => {
            *out = SocialavPair { v1: v.v1, v2: v.v2 };
            SocialavStatus::Ok
        }
        Err(e) => fail(SocialavStatus::NoFixedPoint, e.to_string()),
    }
}

#[no_mangle]
pub unsafe extern "C" fn socialav_richardson_stability(
    params: *const SocialavRichardson,
    out_class: *mut SocialavStability,
    out_radius: *mut f64,
) -> SocialavStatus {
    let (Some(p), Some(class), Some(radius)) =
        (params.as_ref(), out_class.as_mut(), out_radius.as_mut())
    else {
        return fail(SocialavStatus::NullPointer, "null argument");
    };
    let s = richardson::stability(&p.into());
    *class = match s.class {
        StabilityClass::Stable => SocialavStability::Stable,
        StabilityClass::Marginal => SocialavStability::Marginal,
        StabilityClass::Unstable => SocialavStability::Unstable,
    };
    *radius = s.spectral_radius;
    SocialavStatus::Ok
}
