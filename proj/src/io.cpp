#include "elasticflow/io.hpp"

#include "elasticflow/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace ef {

namespace {

// 17 significant digits round-trip any double; "-0.0" keeps the sign bit
// through JSON readers that parse "-0" as an integer.
std::string num(double v) {
    if (!std::isfinite(v)) throw Error(ErrorCode::IoError, "refusing to serialize a non-finite value");
    if (v == 0.0) return std::signbit(v) ? "-0.0" : "0";
    return fmt::format("{:.17g}", v);
}

double energy_of_step(const Trajectory& traj, std::size_t step) {
    if (step < traj.steps.size() && traj.steps[step].step == step) return traj.steps[step].energy;
    for (const auto& r : traj.steps) {
        if (r.step == step) return r.energy;
    }
    throw Error(ErrorCode::IoError, fmt::format("no step record for snapshot step {}", step));
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}' for writing", path));
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, fmt::format("write to '{}' failed", path));
}

void write_jsonl(const Trajectory& traj, const std::string& path) {
    auto out = open_out(path);
    std::string line;
    for (const auto& snap : traj.snapshots) {
        const DiscreteCurve& c = snap.curve;
        line = fmt::format(R"({{"step":{},"t":{},"l":{},"E":{},"length":{},"gap":{},"points":[)", snap.step,
                           num(snap.time), num(c.edge_len()), num(energy_of_step(traj, snap.step)),
                           num(c.total_length()), num(c.gap()));
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (i) line += ',';
            line += '[';
            line += num(c[i].x());
            line += ',';
            line += num(c[i].y());
            line += ']';
        }
        line += "]}\n";
        out << line;
    }
    finish(out, path);
}

void write_csv(const Trajectory& traj, const std::string& path) {
    auto out = open_out(path);
    out << "step,i,x,y\n";
    for (const auto& snap : traj.snapshots) {
        for (std::size_t i = 0; i < snap.curve.size(); ++i) {
            out << fmt::format("{},{},{},{}\n", snap.step, i, num(snap.curve[i].x()), num(snap.curve[i].y()));
        }
    }
    finish(out, path);

    const std::string side = sidecar_path(path);
    auto sc = open_out(side);
    sc << "step,t,E,length,gap,l,bending,dissipation_rate,max_speed,cone_ok,solver_iterations,solver_converged\n";
    for (const auto& r : traj.steps) {
        sc << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.step, num(r.time), num(r.energy), num(r.length),
                          num(r.gap), num(r.edge_len), num(r.bending), num(r.dissipation_rate), num(r.max_speed),
                          r.cone_ok ? 1 : 0, r.solver.iterations, r.solver.converged ? 1 : 0);
    }
    finish(sc, side);
}

} // namespace

std::string sidecar_path(const std::string& path) {
    const std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + "_scalars.csv")).string();
}

void write_trajectory(const Trajectory& traj, const std::string& path, TrajectoryFormat format) {
    if (traj.snapshots.empty()) throw Error(ErrorCode::IoError, "trajectory has no snapshots");
    switch (format) {
    case TrajectoryFormat::Jsonl: write_jsonl(traj, path); break;
    case TrajectoryFormat::Csv: write_csv(traj, path); break;
    }
}

Trajectory read_trajectory_jsonl(const std::string& path, const EnergyParams& params) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path));
    Trajectory traj;
    traj.params = params;
    traj.termination = "read from file";
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Points pts;
            pts.reserve(j.at("points").size());
            for (const auto& p : j.at("points")) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            Snapshot snap{j.at("step").get<std::size_t>(), j.at("t").get<double>(),
                          DiscreteCurve::from_trusted(std::move(pts), j.at("l").get<double>())};
            StepRecord rec;
            rec.step = snap.step;
            rec.time = snap.time;
            rec.energy = j.at("E").get<double>();
            rec.length = j.at("length").get<double>();
            rec.gap = j.at("gap").get<double>();
            rec.edge_len = snap.curve.edge_len();
            traj.steps.push_back(rec);
            traj.snapshots.push_back(std::move(snap));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::IoError, fmt::format("{}:{}: {}", path, lineno, e.what()));
        }
    }
    if (traj.snapshots.empty()) throw Error(ErrorCode::IoError, fmt::format("'{}' holds no snapshots", path));
    return traj;
}

std::string hsv_hex(double hue_deg) {
    const double h = std::fmod(std::fmod(hue_deg, 360.0) + 360.0, 360.0) / 60.0;
    const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
    case 0: r = 1, g = x; break;
    case 1: r = x, g = 1; break;
    case 2: g = 1, b = x; break;
    case 3: g = x, b = 1; break;
    case 4: r = x, b = 1; break;
    default: r = 1, b = x; break;
    }
    auto byte = [](double v) { return static_cast<int>(std::lround(255.0 * v)); };
    return fmt::format("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b));
}

void render_svg(const Trajectory& traj, const std::string& path, std::size_t stride, std::size_t begin,
                std::size_t end) {
    if (stride == 0) throw Error(ErrorCode::BadParameters, "svg stride must be positive");
    end = std::min(end, traj.snapshots.size());
    if (begin >= end) throw Error(ErrorCode::BadParameters, "svg snapshot range is empty");

    std::vector<const DiscreteCurve*> curves;
    for (std::size_t k = begin; k < end; k += stride) curves.push_back(&traj.snapshots[k].curve);

    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto* c : curves) {
        for (const auto& p : c->points()) {
            xmin = std::min(xmin, p.x());
            xmax = std::max(xmax, p.x());
            ymin = std::min(ymin, p.y());
            ymax = std::max(ymax, p.y());
        }
    }
    const double extent = std::max({xmax - xmin, ymax - ymin, 1e-12});
    const double margin = 0.05 * extent;
    const double vx = xmin - margin, vy = -ymax - margin;
    const double vw = xmax - xmin + 2 * margin, vh = ymax - ymin + 2 * margin;
    const double px_w = 800.0, px_h = std::max(1.0, std::round(800.0 * vh / vw));

    auto out = open_out(path);
    out << R"(<?xml version="1.0" encoding="UTF-8"?>)" << '\n';
    out << fmt::format(
        R"(<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.0f}" height="{:.0f}" viewBox="{:.6g} {:.6g} {:.6g} {:.6g}">)",
        px_w, px_h, vx, vy, vw, vh)
        << '\n';
    out << fmt::format(R"(<g fill="none" stroke-width="{:.6g}" stroke-linejoin="round">)", 0.004 * extent) << '\n';
    const std::size_t m = curves.size();
    for (std::size_t k = 0; k < m; ++k) {
        const double hue = m > 1 ? 270.0 * (1.0 - static_cast<double>(k) / static_cast<double>(m - 1)) : 270.0;
        std::string pts;
        for (const auto& p : curves[k]->points()) {
            if (!pts.empty()) pts += ' ';
            pts += fmt::format("{:.6g},{:.6g}", p.x(), -p.y());
        }
        out << fmt::format(R"(<polyline stroke="{}" points="{}"/>)", hsv_hex(hue), pts) << '\n';
    }
    out << "</g>\n</svg>\n";
    finish(out, path);
}

} // namespace ef
