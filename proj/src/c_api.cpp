#include "elasticflow/elasticflow.h"

#include "elasticflow/diagnostics.hpp"
#include "elasticflow/energy.hpp"
#include "elasticflow/error.hpp"
#include "elasticflow/flow.hpp"
#include "elasticflow/io.hpp"
#include "elasticflow/scenario.hpp"

#include <fmt/format.h>

#include <memory>
#include <new>
#include <string>

struct ef_curve {
    ef::DiscreteCurve curve;
};

struct ef_trajectory {
    std::shared_ptr<const ef::Trajectory> traj;
};

namespace {

thread_local std::string last_error;

ef_status fail(ef_status s, std::string msg) {
    last_error = std::move(msg);
    return s;
}

// Runs body, translating exceptions into status codes.
template <class F>
ef_status guarded(F&& body) {
    try {
        last_error.clear();
        return body();
    } catch (const ef::Error& e) {
        return fail(static_cast<ef_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::bad_alloc&) {
        return fail(EF_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(EF_INTERNAL, e.what());
    }
}

#define EF_REQUIRE(cond)                                                                                               \
    do {                                                                                                               \
        if (!(cond)) return fail(EF_INVALID_ARGUMENT, "invalid argument: " #cond);                                     \
    } while (0)

ef::Points to_points(const double* xy, size_t n) {
    ef::Points pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = ef::Vec2(xy[2 * i], xy[2 * i + 1]);
    return pts;
}

ef_curve* wrap(ef::DiscreteCurve c) { return new ef_curve{std::move(c)}; }

ef::Scenario from_c(const ef_scenario& s) {
    ef::Scenario sc;
    switch (s.id) {
    case EF_SCENARIO_SEGMENT: sc.id = ef::ScenarioId::Segment; break;
    case EF_SCENARIO_SINUS: sc.id = ef::ScenarioId::Sinus; break;
    case EF_SCENARIO_GAMMA: sc.id = ef::ScenarioId::Gamma; break;
    case EF_SCENARIO_ASYM_GAMMA: sc.id = ef::ScenarioId::AsymGamma; break;
    case EF_SCENARIO_FILE: sc.id = ef::ScenarioId::File; break;
    default: throw ef::Error(ef::ErrorCode::BadParameters, fmt::format("unknown scenario id {}", int(s.id)));
    }
    sc.n = s.n;
    sc.segment_length = s.segment_length;
    sc.sinus_amplitude = s.sinus_amplitude;
    sc.sinus_half_width = s.sinus_half_width;
    sc.loop_radius = s.loop_radius;
    sc.tail_length = s.tail_length;
    sc.left_tail_scale = s.left_tail_scale;
    if (s.file) sc.file = s.file;
    return sc;
}

ef_scenario to_c(const ef::Scenario& sc) {
    ef_scenario s{};
    s.id = static_cast<ef_scenario_id>(static_cast<int>(sc.id));
    s.n = sc.n;
    s.segment_length = sc.segment_length;
    s.sinus_amplitude = sc.sinus_amplitude;
    s.sinus_half_width = sc.sinus_half_width;
    s.loop_radius = sc.loop_radius;
    s.tail_length = sc.tail_length;
    s.left_tail_scale = sc.left_tail_scale;
    s.file = nullptr;
    return s;
}

ef_flow_config to_c(const ef::FlowConfig& cfg) {
    ef_flow_config c{};
    c.epsilon = cfg.params.epsilon;
    c.tau = cfg.params.tau;
    c.n_steps = cfg.n_steps.value_or(0);
    c.stop_tol = cfg.stop_tol.value_or(0.0);
    c.snapshot_every = cfg.snapshot_every;
    c.grad_tol = cfg.solver.grad_tol;
    c.max_iters = cfg.solver.max_iters;
    return c;
}

ef::FlowConfig from_c(const ef_flow_config& c) {
    ef::FlowConfig cfg;
    cfg.params = {c.epsilon, c.tau};
    if (c.n_steps > 0) cfg.n_steps = c.n_steps;
    if (c.stop_tol > 0.0) cfg.stop_tol = c.stop_tol;
    cfg.snapshot_every = c.snapshot_every;
    cfg.solver.grad_tol = c.grad_tol;
    cfg.solver.max_iters = c.max_iters;
    return cfg;
}

ef_step_info to_c(const ef::StepRecord& r) {
    return {r.step,    r.time,     r.energy,           r.length,       r.gap,
            r.edge_len, r.bending, r.dissipation_rate, r.max_speed,    r.cone_ok ? 1 : 0,
            r.solver.iterations,    r.solver.converged ? 1 : 0};
}

} // namespace

extern "C" {

const char* ef_last_error(void) { return last_error.c_str(); }

const char* ef_status_name(ef_status status) {
    switch (status) {
    case EF_OK: return "Ok";
    case EF_INVALID_ARGUMENT: return "InvalidArgument";
    case EF_INTERNAL: return "Internal";
    default:
        if (status >= EF_TOO_FEW_POINTS && status <= EF_IO_ERROR) {
            return ef::to_string(static_cast<ef::ErrorCode>(static_cast<int>(status)));
        }
        return "Unknown";
    }
}

ef_status ef_curve_create(const double* xy, size_t n_points, double rel_tol, ef_curve** out) {
    EF_REQUIRE(out && (xy || n_points == 0));
    return guarded([&] {
        *out = wrap(ef::DiscreteCurve::validate(to_points(xy, n_points), rel_tol));
        return EF_OK;
    });
}

ef_status ef_curve_resample(const double* xy, size_t n_points, size_t n, ef_curve** out) {
    EF_REQUIRE(out && (xy || n_points == 0));
    return guarded([&] {
        const ef::Points poly = to_points(xy, n_points);
        *out = wrap(ef::resample_equal_arclength(poly, n));
        return EF_OK;
    });
}

void ef_curve_destroy(ef_curve* curve) { delete curve; }

size_t ef_curve_size(const ef_curve* curve) { return curve ? curve->curve.size() : 0; }

ef_status ef_curve_points(const ef_curve* curve, double* xy, size_t capacity) {
    EF_REQUIRE(curve && (xy || capacity == 0));
    const size_t n = std::min(capacity, curve->curve.size());
    for (size_t i = 0; i < n; ++i) {
        xy[2 * i] = curve->curve[i].x();
        xy[2 * i + 1] = curve->curve[i].y();
    }
    return EF_OK;
}

ef_status ef_curve_measures(const ef_curve* curve, ef_measures* out) {
    EF_REQUIRE(curve && out);
    return guarded([&] {
        const ef::CurveMeasures m = ef::measures(curve->curve);
        *out = {curve->curve.edge_len(), m.total_length, m.gap, m.bending_sum};
        return EF_OK;
    });
}

ef_status ef_curve_curvature(const ef_curve* curve, double* kappa, size_t capacity) {
    EF_REQUIRE(curve && kappa);
    return guarded([&] {
        const std::vector<double> k = ef::discrete_curvature(curve->curve);
        if (capacity < k.size()) {
            return fail(EF_INVALID_ARGUMENT, fmt::format("curvature needs capacity {}, got {}", k.size(), capacity));
        }
        std::copy(k.begin(), k.end(), kappa);
        return EF_OK;
    });
}

ef_status ef_curve_energy(const ef_curve* curve, double epsilon, ef_energy* out) {
    EF_REQUIRE(curve && out);
    return guarded([&] {
        if (!(epsilon >= 0.0)) return fail(EF_BAD_PARAMETERS, "epsilon must be nonnegative");
        ef::EnergyParams p;
        p.epsilon = epsilon;
        const ef::EnergyBreakdown e = ef::energy(curve->curve, p);
        *out = {e.length_term, e.bending_term, e.coulomb_term, e.total};
        return EF_OK;
    });
}

ef_status ef_curve_dissipation(const ef_curve* curve, const ef_curve* prev, double* out) {
    EF_REQUIRE(curve && prev && out);
    return guarded([&] {
        *out = ef::dissipation(curve->curve, prev->curve);
        return EF_OK;
    });
}

ef_status ef_curve_self_intersections(const ef_curve* curve, size_t* out) {
    EF_REQUIRE(curve && out);
    return guarded([&] {
        *out = ef::self_intersections(curve->curve);
        return EF_OK;
    });
}

ef_status ef_curve_loop_diameter(const ef_curve* curve, double* diameter, int* has_loop) {
    EF_REQUIRE(curve && diameter && has_loop);
    return guarded([&] {
        const auto d = ef::loop_diameter(curve->curve);
        *has_loop = d.has_value() ? 1 : 0;
        if (d) *diameter = *d;
        return EF_OK;
    });
}

ef_status ef_curve_chord_deviation(const ef_curve* curve, double* out) {
    EF_REQUIRE(curve && out);
    return guarded([&] {
        *out = ef::chord_deviation(curve->curve);
        return EF_OK;
    });
}

ef_status ef_gradient_check(const ef_curve* curve, const ef_curve* prev, double epsilon, double tau, double h,
                            double* max_rel_err) {
    EF_REQUIRE(curve && prev && max_rel_err && h > 0.0);
    return guarded([&] {
        if (!(epsilon >= 0.0) || !(tau > 0.0)) return fail(EF_BAD_PARAMETERS, "need epsilon >= 0 and tau > 0");
        const ef::EnergyParams p{epsilon, tau};
        *max_rel_err = ef::fd_gradient_check(ef::to_reduced(curve->curve), prev->curve, p, h);
        return EF_OK;
    });
}

ef_status ef_scenario_parse_id(const char* name, ef_scenario_id* out) {
    EF_REQUIRE(name && out);
    const auto id = ef::parse_scenario_id(name);
    if (!id) return fail(EF_BAD_PARAMETERS, fmt::format("unknown scenario '{}'", name));
    *out = static_cast<ef_scenario_id>(static_cast<int>(*id));
    return EF_OK;
}

const char* ef_scenario_name(ef_scenario_id id) {
    if (id < EF_SCENARIO_SEGMENT || id > EF_SCENARIO_FILE) return "unknown";
    return ef::scenario_name(static_cast<ef::ScenarioId>(static_cast<int>(id)));
}

ef_status ef_scenario_default(ef_scenario_id id, ef_scenario* out) {
    EF_REQUIRE(out && id >= EF_SCENARIO_SEGMENT && id <= EF_SCENARIO_FILE);
    *out = to_c(ef::default_scenario(static_cast<ef::ScenarioId>(static_cast<int>(id))));
    return EF_OK;
}

ef_status ef_scenario_make(const ef_scenario* scenario, ef_curve** out) {
    EF_REQUIRE(scenario && out);
    return guarded([&] {
        *out = wrap(ef::make_scenario(from_c(*scenario)));
        return EF_OK;
    });
}

ef_status ef_flow_config_default(ef_flow_config* out) {
    EF_REQUIRE(out);
    ef::FlowConfig cfg;
    *out = to_c(cfg);
    return EF_OK;
}

size_t ef_preset_count(void) { return ef::presets().size(); }

const char* ef_preset_name(size_t index) {
    static const std::vector<ef::Preset> all = ef::presets();
    return index < all.size() ? all[index].name.c_str() : nullptr;
}

ef_status ef_preset(const char* name, ef_scenario* scenario, ef_flow_config* config) {
    EF_REQUIRE(name);
    return guarded([&] {
        const auto p = ef::find_preset(name);
        if (!p) return fail(EF_BAD_PARAMETERS, fmt::format("unknown preset '{}'", name));
        if (scenario) *scenario = to_c(p->scenario);
        if (config) *config = to_c(p->config);
        return EF_OK;
    });
}

ef_status ef_flow_run(const ef_curve* initial, const ef_flow_config* config, ef_step_callback callback, void* user,
                      ef_trajectory** out) {
    EF_REQUIRE(initial && config && out);
    *out = nullptr;
    return guarded([&] {
        ef::StepObserver obs;
        if (callback) {
            obs = [&](const ef::StepRecord& r, const ef::DiscreteCurve&) {
                const ef_step_info info = to_c(r);
                return callback(&info, user) != 0;
            };
        }
        try {
            auto traj = std::make_shared<const ef::Trajectory>(ef::run_flow(initial->curve, from_c(*config), obs));
            *out = new ef_trajectory{std::move(traj)};
            return EF_OK;
        } catch (const ef::FlowError& e) {
            if (e.partial()) *out = new ef_trajectory{e.partial()};
            return fail(static_cast<ef_status>(static_cast<int>(e.code())), e.what());
        }
    });
}

void ef_trajectory_destroy(ef_trajectory* traj) { delete traj; }

size_t ef_trajectory_step_count(const ef_trajectory* traj) { return traj ? traj->traj->steps.size() : 0; }

ef_status ef_trajectory_step(const ef_trajectory* traj, size_t index, ef_step_info* out) {
    EF_REQUIRE(traj && out);
    if (index >= traj->traj->steps.size()) {
        return fail(EF_INDEX_OUT_OF_RANGE, fmt::format("step {} of {}", index, traj->traj->steps.size()));
    }
    *out = to_c(traj->traj->steps[index]);
    return EF_OK;
}

size_t ef_trajectory_snapshot_count(const ef_trajectory* traj) { return traj ? traj->traj->snapshots.size() : 0; }

ef_status ef_trajectory_snapshot(const ef_trajectory* traj, size_t index, size_t* step, double* time,
                                 ef_curve** curve) {
    EF_REQUIRE(traj);
    if (index >= traj->traj->snapshots.size()) {
        return fail(EF_INDEX_OUT_OF_RANGE, fmt::format("snapshot {} of {}", index, traj->traj->snapshots.size()));
    }
    return guarded([&] {
        const ef::Snapshot& s = traj->traj->snapshots[index];
        if (step) *step = s.step;
        if (time) *time = s.time;
        if (curve) *curve = wrap(s.curve);
        return EF_OK;
    });
}

const char* ef_trajectory_termination(const ef_trajectory* traj) {
    return traj ? traj->traj->termination.c_str() : "";
}

ef_status ef_trajectory_write(const ef_trajectory* traj, const char* path, ef_format format) {
    EF_REQUIRE(traj && path && (format == EF_FORMAT_JSONL || format == EF_FORMAT_CSV));
    return guarded([&] {
        ef::write_trajectory(*traj->traj, path,
                             format == EF_FORMAT_JSONL ? ef::TrajectoryFormat::Jsonl : ef::TrajectoryFormat::Csv);
        return EF_OK;
    });
}

ef_status ef_trajectory_read_jsonl(const char* path, double epsilon, double tau, ef_trajectory** out) {
    EF_REQUIRE(path && out);
    return guarded([&] {
        const ef::EnergyParams p{epsilon, tau};
        p.validate();
        *out = new ef_trajectory{std::make_shared<const ef::Trajectory>(ef::read_trajectory_jsonl(path, p))};
        return EF_OK;
    });
}

ef_status ef_trajectory_render_svg(const ef_trajectory* traj, const char* path, size_t stride, size_t begin,
                                   size_t end) {
    EF_REQUIRE(traj && path);
    return guarded([&] {
        ef::render_svg(*traj->traj, path, stride, begin, end);
        return EF_OK;
    });
}

ef_status ef_trajectory_residuals(const ef_trajectory* traj, size_t n, ef_residuals* out) {
    EF_REQUIRE(traj && out);
    return guarded([&] {
        const ef::ResidualReport r = ef::residual_report(*traj->traj, n);
        *out = {r.step_index,
                r.interior_L2,
                r.interior_max,
                {r.boundary_start.x(), r.boundary_start.y()},
                {r.boundary_end.x(), r.boundary_end.y()},
                {r.kappa_boundary[0], r.kappa_boundary[1]},
                r.coupling_L2};
        return EF_OK;
    });
}

ef_status ef_run_checks(ef_check_callback callback, void* user, size_t* failed) {
    return guarded([&] {
        size_t bad = 0;
        for (const auto& c : ef::run_checks()) {
            if (!c.passed) ++bad;
            if (callback) callback(c.name.c_str(), c.passed ? 1 : 0, c.detail.c_str(), user);
        }
        if (failed) *failed = bad;
        return EF_OK;
    });
}

} // extern "C"
