#ifndef SOCIALAV_H
#define SOCIALAV_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SocialavBuiltinSet {
  SOCIALAV_BUILTIN_SET_SET1 = 1,
  SOCIALAV_BUILTIN_SET_SET2 = 2,
} SocialavBuiltinSet;

typedef enum SocialavCounting {
  SOCIALAV_COUNTING_PAIR = 0,
  SOCIALAV_COUNTING_AGENT = 1,
  SOCIALAV_COUNTING_OVERLAP = 2,
} SocialavCounting;

typedef enum SocialavScenario {
  SOCIALAV_SCENARIO_SOCIAL = 0,
  SOCIALAV_SCENARIO_RANDOM = 1,
} SocialavScenario;

typedef enum SocialavStability {
  SOCIALAV_STABILITY_STABLE = 0,
  SOCIALAV_STABILITY_MARGINAL = 1,
  SOCIALAV_STABILITY_UNSTABLE = 2,
} SocialavStability;

typedef enum SocialavStatus {
  SOCIALAV_STATUS_OK = 0,
  SOCIALAV_STATUS_NULL_POINTER = 1,
  SOCIALAV_STATUS_INVALID_PARAMS = 2,
  SOCIALAV_STATUS_NO_FIXED_POINT = 3,
  SOCIALAV_STATUS_BUFFER_TOO_SMALL = 4,
  SOCIALAV_STATUS_OUT_OF_RANGE = 5,
  SOCIALAV_STATUS_IO = 6,
  SOCIALAV_STATUS_PANIC = 99,
} SocialavStatus;

/**
 * Opaque result of a complete run.
 */
typedef struct SocialavRunResult SocialavRunResult;

/**
 * Opaque simulation world.
 */
typedef struct SocialavWorld SocialavWorld;

/**
 * Run parameters; mirrors `socialav::SimParams`.
 */
typedef struct SocialavParams {
  uint32_t n_red;
  uint32_t n_black;
  double min_velocity;
  double max_velocity;
  double max_acceleration;
  double deceleration;
  double min_safety_distance;
  double sonar_range;
  enum SocialavScenario scenario;
  double world_width;
  double world_height;
  double collision_radius;
  uint64_t ticks;
  uint64_t seed;
  enum SocialavCounting collision_counting;
  bool same_tick_accelerate;
  bool additive_deceleration;
} SocialavParams;

/**
 * Snapshot of one agent. `team` is 0 for red, 1 for black.
 */
typedef struct SocialavAgent {
  uint32_t id;
  uint32_t team;
  double x;
  double y;
  double heading;
  double speed;
  uint64_t collisions;
  bool collision_done;
} SocialavAgent;

typedef struct SocialavRichardson {
  double delta1;
  double delta2;
  double alpha1;
  double alpha2;
  double g1;
  double g2;
  double h1;
  double h2;
} SocialavRichardson;

typedef struct SocialavPair {
  double v1;
  double v2;
} SocialavPair;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *socialav_version(void);

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *socialav_last_error_message(void);

/**
 * Fills `out` with the low-velocity preset for `per_team` agents per team.
 */
enum SocialavStatus socialav_params_set1(uint32_t per_team,
                                         enum SocialavScenario scenario,
                                         struct SocialavParams *out);

/**
 * Fills `out` with the high-velocity preset.
 */
enum SocialavStatus socialav_params_set2(uint32_t per_team,
                                         enum SocialavScenario scenario,
                                         struct SocialavParams *out);

/**
 * Creates a world from `params` and `seed`. On success `*out` owns a handle
 * that must be released with [`socialav_world_free`].
 */
enum SocialavStatus socialav_world_new(const struct SocialavParams *params,
                                       uint64_t seed,
                                       struct SocialavWorld **out);

void socialav_world_free(struct SocialavWorld *world);

/**
 * Advances `ticks` ticks; adds the collision events of those ticks to
 * `*out_collisions` when it is not NULL.
 */
enum SocialavStatus socialav_world_step(struct SocialavWorld *world,
                                        uint64_t ticks,
                                        uint64_t *out_collisions);

uint64_t socialav_world_tick(const struct SocialavWorld *world);

uint64_t socialav_world_total_collisions(const struct SocialavWorld *world);

size_t socialav_world_agent_count(const struct SocialavWorld *world);

enum SocialavStatus socialav_world_agent(const struct SocialavWorld *world,
                                         size_t index,
                                         struct SocialavAgent *out);

/**
 * Runs `params.ticks` ticks from a fresh setup. Release the result with
 * [`socialav_run_free`].
 */
enum SocialavStatus socialav_run(const struct SocialavParams *params,
                                 uint64_t seed,
                                 struct SocialavRunResult **out);

void socialav_run_free(struct SocialavRunResult *result);

uint64_t socialav_run_total_collisions(const struct SocialavRunResult *result);

size_t socialav_run_tick_count(const struct SocialavRunResult *result);

/**
 * Copies the per-tick collision series into `buf`, which must hold at least
 * [`socialav_run_tick_count`] elements.
 */
enum SocialavStatus socialav_run_copy_per_tick(const struct SocialavRunResult *result,
                                               uint64_t *buf,
                                               size_t len);

/**
 * Per-team sums of agent collision tallies.
 */
enum SocialavStatus socialav_run_team_collisions(const struct SocialavRunResult *result,
                                                 uint64_t *out_red,
                                                 uint64_t *out_black);

/**
 * Percentage reduction of collisions relative to the random walk.
 */
enum SocialavStatus socialav_efficiency(double random_mean, double social_mean, double *out);

/**
 * Runs a builtin experiment set on `jobs` threads and writes the summary CSV
 * to the NUL-terminated UTF-8 `path`.
 */
enum SocialavStatus socialav_sweep_builtin_csv(enum SocialavBuiltinSet set,
                                               size_t jobs,
                                               const char *path);

enum SocialavStatus socialav_richardson_step(const struct SocialavRichardson *params,
                                             struct SocialavPair state,
                                             struct SocialavPair *out);

/**
 * Writes the unique fixed point, or returns `NoFixedPoint` when `I - M` is
 * singular.
 */
enum SocialavStatus socialav_richardson_fixed_point(const struct SocialavRichardson *params,
                                                    struct SocialavPair *out);

enum SocialavStatus socialav_richardson_stability(const struct SocialavRichardson *params,
                                                  enum SocialavStability *out_class,
                                                  double *out_radius);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SOCIALAV_H */
