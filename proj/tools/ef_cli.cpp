#include "elasticflow/elasticflow.h"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;

struct RunOptions {
    std::vector<std::string> scenarios;
    std::optional<std::string> preset;
    std::optional<std::size_t> n;
    std::optional<double> eps;
    std::optional<double> tau;
    std::optional<std::size_t> steps;
    std::optional<double> stop_tol;
    std::optional<std::size_t> snapshot_every;
    std::string file;
    std::string out = "out";
    bool svg = false;
    bool diagnostics = false;
    bool parallel = false;
};

struct RunResult {
    std::string name;
    int exit_code = kExitOk;
    std::string message;
};

struct CurveHandle {
    ef_curve* p = nullptr;
    ~CurveHandle() { ef_curve_destroy(p); }
};

struct TrajHandle {
    ef_trajectory* p = nullptr;
    ~TrajHandle() { ef_trajectory_destroy(p); }
};

// Status to exception, keeping the library's message.
struct ApiError : std::runtime_error {
    ef_status status;
    ApiError(ef_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(ef_status s) {
    if (s != EF_OK) throw ApiError(s, ef_last_error());
}

// Expands `--config FILE` into `--key=value` arguments placed before the
// remaining ones, so that explicit flags (parsed later) take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        std::size_t consumed = 0;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            consumed = 2;
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            consumed = 1;
        } else {
            continue;
        }
        std::ifstream in(path);
        if (!in) throw CLI::FileError::Missing(path);
        std::vector<std::string> injected;
        for (const auto& item : CLI::ConfigTOML().from_config(in)) {
            if (item.inputs.empty()) continue;
            std::string key = item.name;
            for (auto it = item.parents.rbegin(); it != item.parents.rend(); ++it) {
                if (*it != "run") key = *it + "." + key;
            }
            for (const auto& v : item.inputs) injected.push_back(fmt::format("--{}={}", key, v));
        }
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + consumed));
        // Injected after the subcommand name, before any explicit flag.
        auto run_pos = std::find(args.begin(), args.end(), "run");
        const auto at = run_pos == args.end() ? args.begin() + 1 : run_pos + 1;
        args.insert(at, injected.begin(), injected.end());
        break;
    }
    return args;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

nlohmann::json summary_json(const std::string& name, const ef_flow_config& cfg, ef_trajectory* traj,
                            ef_status status) {
    nlohmann::json j;
    j["scenario"] = name;
    j["epsilon"] = cfg.epsilon;
    j["tau"] = cfg.tau;
    j["status"] = ef_status_name(status);
    j["termination"] = ef_trajectory_termination(traj);
    ef_step_info first{}, last{};
    const std::size_t steps = ef_trajectory_step_count(traj);
    check(ef_trajectory_step(traj, 0, &first));
    check(ef_trajectory_step(traj, steps - 1, &last));
    j["steps"] = last.step;
    j["final_time"] = last.time;
    j["initial_energy"] = first.energy;
    j["final_energy"] = last.energy;
    j["final_length"] = last.length;
    j["final_gap"] = last.gap;

    CurveHandle fin;
    check(ef_trajectory_snapshot(traj, ef_trajectory_snapshot_count(traj) - 1, nullptr, nullptr, &fin.p));
    std::size_t crossings = 0;
    check(ef_curve_self_intersections(fin.p, &crossings));
    j["self_intersections"] = crossings;
    double diameter = 0.0;
    int has_loop = 0;
    check(ef_curve_loop_diameter(fin.p, &diameter, &has_loop));
    j["loop_diameter"] = has_loop ? nlohmann::json(diameter) : nlohmann::json(nullptr);
    double dev = 0.0;
    check(ef_curve_chord_deviation(fin.p, &dev));
    j["chord_deviation"] = dev;
    return j;
}

void write_residuals(ef_trajectory* traj, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ApiError(EF_IO_ERROR, fmt::format("cannot open '{}'", path.string()));
    out << "n,t,interior_L2,interior_max,boundary_start_x,boundary_start_y,boundary_end_x,boundary_end_y,"
           "kappa_boundary_0,kappa_boundary_1,coupling_L2\n";
    const std::size_t count = ef_trajectory_snapshot_count(traj);
    for (std::size_t n = 0; n + 1 < count; ++n) {
        ef_residuals r{};
        check(ef_trajectory_residuals(traj, n, &r));
        double t = 0.0;
        check(ef_trajectory_snapshot(traj, n + 1, nullptr, &t, nullptr));
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", n, num(t), num(r.interior_l2), num(r.interior_max),
                           num(r.boundary_start[0]), num(r.boundary_start[1]), num(r.boundary_end[0]),
                           num(r.boundary_end[1]), num(r.kappa_boundary[0]), num(r.kappa_boundary[1]),
                           num(r.coupling_l2));
    }
}

void write_svgs(const std::string& name, ef_trajectory* traj, const fs::path& dir) {
    const std::size_t count = ef_trajectory_snapshot_count(traj);
    const std::size_t stride = std::max<std::size_t>(1, (count + 39) / 40);
    check(ef_trajectory_render_svg(traj, (dir / "evolution.svg").c_str(), stride, 0, count));
    if (name != "asym_gamma" || count < 3) return;
    for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t begin = k * count / 3, end = (k + 1) * count / 3 + (k < 2 ? 1 : 0);
        const std::size_t s = std::max<std::size_t>(1, (end - begin + 19) / 20);
        check(ef_trajectory_render_svg(traj, (dir / fmt::format("phase_{}.svg", k + 1)).c_str(), s, begin, end));
    }
}

// Scenario defaults and the matching reference parameters.
void resolve(const RunOptions& o, const std::string& scenario, ef_scenario& sc, ef_flow_config& cfg) {
    ef_scenario_id id{};
    check(ef_scenario_parse_id(scenario.c_str(), &id));
    const std::string preset = o.preset.value_or(id == EF_SCENARIO_FILE ? "" : scenario);
    if (!preset.empty()) {
        check(ef_preset(preset.c_str(), &sc, &cfg));
        if (sc.id != id) throw ApiError(EF_BAD_PARAMETERS, fmt::format("preset '{}' is not a {} run", preset, scenario));
    } else {
        check(ef_scenario_default(id, &sc));
        check(ef_flow_config_default(&cfg));
        cfg.stop_tol = 1e-6;
        cfg.n_steps = 10000;
    }
    if (o.n) sc.n = *o.n;
    if (o.eps) cfg.epsilon = *o.eps;
    if (o.tau) cfg.tau = *o.tau;
    if (o.steps) {
        cfg.n_steps = *o.steps;
        if (!o.stop_tol) cfg.stop_tol = 0.0;
    }
    if (o.stop_tol) cfg.stop_tol = *o.stop_tol;
    if (o.snapshot_every) cfg.snapshot_every = *o.snapshot_every;
}

RunResult run_one(const RunOptions& o, const std::string& scenario) {
    RunResult res;
    res.name = scenario;
    try {
        ef_scenario sc{};
        ef_flow_config cfg{};
        resolve(o, scenario, sc, cfg);
        if (sc.id == EF_SCENARIO_FILE) {
            if (o.file.empty()) throw ApiError(EF_BAD_PARAMETERS, "the file scenario needs --file");
            sc.file = o.file.c_str();
        }
        if (cfg.tau > 1.0) {
            fmt::print(stderr, "warning: {}: tau = {} exceeds 1; the a-priori bounds are only established below 1\n",
                       scenario, cfg.tau);
        }
        const fs::path dir = fs::path(o.out) / scenario;
        fs::create_directories(dir);

        CurveHandle initial;
        check(ef_scenario_make(&sc, &initial.p));
        TrajHandle traj;
        const ef_status status = ef_flow_run(initial.p, &cfg, nullptr, nullptr, &traj.p);
        if (status != EF_OK && !traj.p) throw ApiError(status, ef_last_error());
        const std::string flow_error = status == EF_OK ? "" : ef_last_error();

        check(ef_trajectory_write(traj.p, (dir / "trajectory.jsonl").c_str(), EF_FORMAT_JSONL));
        check(ef_trajectory_write(traj.p, (dir / "trajectory.csv").c_str(), EF_FORMAT_CSV));
        nlohmann::json summary = summary_json(scenario, cfg, traj.p, status);
        if (!flow_error.empty()) summary["error"] = flow_error;
        std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
        if (o.svg) write_svgs(scenario, traj.p, dir);
        if (o.diagnostics) {
            if (sc.n < 5 || cfg.snapshot_every != 1) {
                fmt::print(stderr, "warning: {}: residuals need N >= 5 and --snapshot-every 1; skipped\n", scenario);
            } else {
                write_residuals(traj.p, dir / "residuals.csv");
            }
        }

        if (status == EF_BOUND_VIOLATION) {
            res.exit_code = kExitViolation;
            res.message = flow_error;
        } else {
            res.message = fmt::format("{} steps ({}), E {:.9g} -> {:.9g}, length {:.9g}, {} crossing(s) -> {}",
                                      summary["steps"].get<std::size_t>(), summary["termination"].get<std::string>(),
                                      summary["initial_energy"].get<double>(), summary["final_energy"].get<double>(),
                                      summary["final_length"].get<double>(),
                                      summary["self_intersections"].get<std::size_t>(), dir.string());
        }
    } catch (const ApiError& e) {
        res.exit_code = e.status == EF_BOUND_VIOLATION ? kExitViolation : kExitUsage;
        res.message = e.what();
    } catch (const std::exception& e) {
        res.exit_code = kExitUsage;
        res.message = e.what();
    }
    return res;
}

int cmd_run(const RunOptions& o) {
    std::vector<RunResult> results(o.scenarios.size());
    if (o.parallel && o.scenarios.size() > 1) {
        std::vector<std::thread> workers;
        for (std::size_t k = 0; k < o.scenarios.size(); ++k) {
            workers.emplace_back([&, k] { results[k] = run_one(o, o.scenarios[k]); });
        }
        for (auto& w : workers) w.join();
    } else {
        for (std::size_t k = 0; k < o.scenarios.size(); ++k) results[k] = run_one(o, o.scenarios[k]);
    }
    int code = kExitOk;
    for (const auto& r : results) {
        fmt::print(r.exit_code == kExitOk ? stdout : stderr, "{}: {}\n", r.name, r.message);
        code = std::max(code, r.exit_code);
    }
    return code;
}

int cmd_check() {
    std::size_t failed = 0;
    const ef_status s = ef_run_checks(
        [](const char* name, int passed, const char* detail, void*) {
            fmt::print("{} {} ({})\n", passed ? "PASS" : "FAIL", name, detail);
        },
        nullptr, &failed);
    if (s != EF_OK) {
        fmt::print(stderr, "check: {}\n", ef_last_error());
        return kExitViolation;
    }
    fmt::print("{} failed\n", failed);
    return failed == 0 ? kExitOk : kExitViolation;
}

std::vector<double> read_xy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ApiError(EF_IO_ERROR, fmt::format("cannot open '{}'", path));
    std::vector<double> xy;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        double x = 0, y = 0;
        if (!(ls >> x >> y)) throw ApiError(EF_IO_ERROR, fmt::format("{}: bad line '{}'", path, line));
        xy.push_back(x);
        xy.push_back(y);
    }
    return xy;
}

int cmd_resample(const std::string& in, std::size_t n, const std::string& out_path) {
    try {
        const std::vector<double> xy = read_xy(in);
        CurveHandle c;
        check(ef_curve_resample(xy.data(), xy.size() / 2, n, &c.p));
        std::vector<double> pts(2 * ef_curve_size(c.p));
        check(ef_curve_points(c.p, pts.data(), ef_curve_size(c.p)));
        std::string text;
        for (std::size_t i = 0; i < pts.size(); i += 2) text += fmt::format("{} {}\n", num(pts[i]), num(pts[i + 1]));
        if (out_path.empty()) {
            fmt::print("{}", text);
        } else {
            std::ofstream(out_path) << text;
        }
        return kExitOk;
    } catch (const ApiError& e) {
        fmt::print(stderr, "resample: {}\n", e.what());
        return kExitUsage;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimizing-movement flow of open elastic curves with repelling endpoints."};
    app.require_subcommand(1);

    RunOptions ro;
    auto* run = app.add_subcommand("run", "Run the flow from a built-in or file scenario");
    run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    run->add_option("--scenario", ro.scenarios, "segment, sinus, gamma, asym_gamma or file (repeatable)")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->required();
    run->add_option("--preset", ro.preset, "reference parameter set (e.g. gamma_fine)");
    run->add_option("--n", ro.n, "number of points")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
    run->add_option("--eps", ro.eps, "bending weight")->check(CLI::PositiveNumber);
    run->add_option("--tau", ro.tau, "time step")->check(CLI::PositiveNumber);
    run->add_option("--steps", ro.steps, "maximum number of steps");
    run->add_option("--stop-tol", ro.stop_tol, "stop once the max vertex speed drops below this")
        ->check(CLI::PositiveNumber);
    run->add_option("--snapshot-every", ro.snapshot_every, "keep every k-th curve");
    run->add_option("--file", ro.file, "polyline file for the file scenario");
    run->add_option("--out", ro.out, "output directory")->capture_default_str();
    run->add_flag("--svg", ro.svg, "write SVG plots");
    run->add_flag("--diagnostics", ro.diagnostics, "write strong-form residuals per step");
    run->add_flag("--parallel", ro.parallel, "run several scenarios concurrently");
    run->add_option("--config", "key = value file; explicit flags override it");

    std::string in_path, out_path;
    std::size_t n_resample = 0;
    auto* check_cmd = app.add_subcommand("check", "Run the invariant and property suite on built-in scenarios");
    auto* resample = app.add_subcommand("resample", "Resample a polyline file to equal edges");
    resample->add_option("--in", in_path, "whitespace-separated x y lines")->required();
    resample->add_option("--n", n_resample, "number of points")->required();
    resample->add_option("--out", out_path, "output file (stdout when omitted)");

    std::vector<std::string> args(argv, argv + argc);
    try {
        args = expand_config(std::move(args));
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(std::move(rev));
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (run->parsed()) return cmd_run(ro);
    if (check_cmd->parsed()) return cmd_check();
    if (resample->parsed()) return cmd_resample(in_path, n_resample, out_path);
    return kExitUsage;
}
