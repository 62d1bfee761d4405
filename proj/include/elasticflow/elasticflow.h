/* C interface to the elastic-flow library. All functions return an
 * ef_status; on failure ef_last_error() describes the problem for the
 * calling thread. Handles are owned by the caller and released with the
 * matching *_destroy function. */
#ifndef ELASTICFLOW_H
#define ELASTICFLOW_H

#include <stddef.h>

#if defined(_WIN32)
#define EF_API __declspec(dllexport)
#else
#define EF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ef_status {
    EF_OK = 0,
    EF_TOO_FEW_POINTS = 1,
    EF_UNEQUAL_EDGES = 2,
    EF_DEGENERATE_GAP = 3,
    EF_ZERO_EDGE_LENGTH = 4,
    EF_CUSP_ANGLE = 5,
    EF_ZERO_LENGTH_INPUT = 6,
    EF_MISMATCHED_N = 7,
    EF_LINE_SEARCH_FAILURE = 8,
    EF_NOT_CONVERGED = 9,
    EF_BOUND_VIOLATION = 10,
    EF_INDEX_OUT_OF_RANGE = 11,
    EF_BAD_PARAMETERS = 12,
    EF_IO_ERROR = 13,
    EF_INVALID_ARGUMENT = 14,
    EF_INTERNAL = 15
} ef_status;

typedef struct ef_curve ef_curve;
typedef struct ef_trajectory ef_trajectory;

EF_API const char* ef_last_error(void);
EF_API const char* ef_status_name(ef_status status);

/* ---- curves ---------------------------------------------------------- */

/* xy holds n_points interleaved (x, y) pairs. Edges must agree to rel_tol. */
EF_API ef_status ef_curve_create(const double* xy, size_t n_points, double rel_tol, ef_curve** out);
/* Equal-edge resampling of an arbitrary polyline to n points. */
EF_API ef_status ef_curve_resample(const double* xy, size_t n_points, size_t n, ef_curve** out);
EF_API void ef_curve_destroy(ef_curve* curve);

EF_API size_t ef_curve_size(const ef_curve* curve);
/* Copies min(capacity, size) points into xy as (x, y) pairs. */
EF_API ef_status ef_curve_points(const ef_curve* curve, double* xy, size_t capacity);

typedef struct ef_measures {
    double edge_len;
    double total_length;
    double gap;
    double bending_sum; /* sum of squared discrete curvatures */
} ef_measures;

EF_API ef_status ef_curve_measures(const ef_curve* curve, ef_measures* out);
/* N-2 interior curvatures; needs capacity >= N-2. */
EF_API ef_status ef_curve_curvature(const ef_curve* curve, double* kappa, size_t capacity);

typedef struct ef_energy {
    double length_term;
    double bending_term;
    double coulomb_term;
    double total;
} ef_energy;

EF_API ef_status ef_curve_energy(const ef_curve* curve, double epsilon, ef_energy* out);
EF_API ef_status ef_curve_dissipation(const ef_curve* curve, const ef_curve* prev, double* out);
EF_API ef_status ef_curve_self_intersections(const ef_curve* curve, size_t* out);
/* *has_loop is 0 and *diameter untouched when the curve does not cross itself. */
EF_API ef_status ef_curve_loop_diameter(const ef_curve* curve, double* diameter, int* has_loop);
EF_API ef_status ef_curve_chord_deviation(const ef_curve* curve, double* out);
/* Largest relative error between the analytic step-objective gradient at
 * `curve` (previous curve `prev`) and central differences with step h. */
EF_API ef_status ef_gradient_check(const ef_curve* curve, const ef_curve* prev, double epsilon, double tau, double h,
                                   double* max_rel_err);

/* ---- scenarios and configuration ------------------------------------- */

typedef enum ef_scenario_id {
    EF_SCENARIO_SEGMENT = 0,
    EF_SCENARIO_SINUS = 1,
    EF_SCENARIO_GAMMA = 2,
    EF_SCENARIO_ASYM_GAMMA = 3,
    EF_SCENARIO_FILE = 4
} ef_scenario_id;

typedef struct ef_scenario {
    ef_scenario_id id;
    size_t n;
    double segment_length;
    double sinus_amplitude;
    double sinus_half_width;
    double loop_radius;
    double tail_length;
    double left_tail_scale;
    const char* file; /* borrowed; only read for EF_SCENARIO_FILE */
} ef_scenario;

EF_API ef_status ef_scenario_parse_id(const char* name, ef_scenario_id* out);
EF_API const char* ef_scenario_name(ef_scenario_id id);
EF_API ef_status ef_scenario_default(ef_scenario_id id, ef_scenario* out);
EF_API ef_status ef_scenario_make(const ef_scenario* scenario, ef_curve** out);

typedef struct ef_flow_config {
    double epsilon;
    double tau;
    size_t n_steps;  /* 0: no step limit */
    double stop_tol; /* 0: no speed criterion */
    size_t snapshot_every;
    double grad_tol;
    size_t max_iters;
} ef_flow_config;

EF_API ef_status ef_flow_config_default(ef_flow_config* out);

EF_API size_t ef_preset_count(void);
EF_API const char* ef_preset_name(size_t index);
/* Either output may be NULL. The scenario's file field is set to NULL. */
EF_API ef_status ef_preset(const char* name, ef_scenario* scenario, ef_flow_config* config);

/* ---- flow ------------------------------------------------------------ */

typedef struct ef_step_info {
    size_t step;
    double time;
    double energy;
    double length;
    double gap;
    double edge_len;
    double bending;
    double dissipation_rate;
    double max_speed;
    int cone_ok;
    size_t solver_iterations;
    int solver_converged;
} ef_step_info;

/* Return nonzero to continue, zero to stop after this step. */
typedef int (*ef_step_callback)(const ef_step_info* info, void* user);

/* On EF_BOUND_VIOLATION *out still receives the trajectory up to and
 * including the offending step. */
EF_API ef_status ef_flow_run(const ef_curve* initial, const ef_flow_config* config, ef_step_callback callback,
                             void* user, ef_trajectory** out);
EF_API void ef_trajectory_destroy(ef_trajectory* traj);

EF_API size_t ef_trajectory_step_count(const ef_trajectory* traj);
EF_API ef_status ef_trajectory_step(const ef_trajectory* traj, size_t index, ef_step_info* out);
EF_API size_t ef_trajectory_snapshot_count(const ef_trajectory* traj);
/* step and time may be NULL; *curve receives a new handle when non-NULL. */
EF_API ef_status ef_trajectory_snapshot(const ef_trajectory* traj, size_t index, size_t* step, double* time,
                                        ef_curve** curve);
EF_API const char* ef_trajectory_termination(const ef_trajectory* traj);

typedef enum ef_format { EF_FORMAT_JSONL = 0, EF_FORMAT_CSV = 1 } ef_format;

EF_API ef_status ef_trajectory_write(const ef_trajectory* traj, const char* path, ef_format format);
EF_API ef_status ef_trajectory_read_jsonl(const char* path, double epsilon, double tau, ef_trajectory** out);
/* Snapshots begin, begin+stride, ... below end (clamped to the count). */
EF_API ef_status ef_trajectory_render_svg(const ef_trajectory* traj, const char* path, size_t stride, size_t begin,
                                          size_t end);

typedef struct ef_residuals {
    size_t step_index;
    double interior_l2;
    double interior_max;
    double boundary_start[2];
    double boundary_end[2];
    double kappa_boundary[2];
    double coupling_l2;
} ef_residuals;

/* Strong-form residuals on the step from snapshot n to snapshot n+1. */
EF_API ef_status ef_trajectory_residuals(const ef_trajectory* traj, size_t n, ef_residuals* out);

/* ---- self checks ----------------------------------------------------- */

typedef void (*ef_check_callback)(const char* name, int passed, const char* detail, void* user);

EF_API ef_status ef_run_checks(ef_check_callback callback, void* user, size_t* failed);

#ifdef __cplusplus
}
#endif

#endif
