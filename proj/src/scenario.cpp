#include "elasticflow/scenario.hpp"

#include "elasticflow/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace ef {

std::optional<ScenarioId> parse_scenario_id(std::string_view name) {
    if (name == "segment") return ScenarioId::Segment;
    if (name == "sinus") return ScenarioId::Sinus;
    if (name == "gamma") return ScenarioId::Gamma;
    if (name == "asym_gamma") return ScenarioId::AsymGamma;
    if (name == "file") return ScenarioId::File;
    return std::nullopt;
}

const char* scenario_name(ScenarioId id) {
    switch (id) {
    case ScenarioId::Segment: return "segment";
    case ScenarioId::Sinus: return "sinus";
    case ScenarioId::Gamma: return "gamma";
    case ScenarioId::AsymGamma: return "asym_gamma";
    case ScenarioId::File: return "file";
    }
    return "unknown";
}

Scenario default_scenario(ScenarioId id) {
    Scenario sc;
    sc.id = id;
    switch (id) {
    case ScenarioId::Segment: sc.n = 51; break;
    case ScenarioId::Sinus: sc.n = 81; break;
    case ScenarioId::Gamma: sc.n = 120; break;
    case ScenarioId::AsymGamma:
        sc.n = 120;
        sc.left_tail_scale = 0.5;
        break;
    case ScenarioId::File: sc.n = 81; break;
    }
    return sc;
}

Points read_polyline_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path));
    Points pts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        double x = 0, y = 0;
        if (!(ls >> x >> y)) throw Error(ErrorCode::IoError, fmt::format("{}:{}: expected 'x y'", path, lineno));
        pts.emplace_back(x, y);
    }
    return pts;
}

namespace {

Points sinus_polyline(const Scenario& sc) {
    constexpr std::size_t dense = 20000;
    Points pts(dense + 1);
    for (std::size_t k = 0; k <= dense; ++k) {
        const double x = -sc.sinus_half_width + 2.0 * sc.sinus_half_width * static_cast<double>(k) / dense;
        pts[k] = Vec2(x, sc.sinus_amplitude * std::sin(x));
    }
    // Pin the endpoints exactly (sin(+-pi) is not exactly zero in floating point).
    pts.front() = Vec2(-sc.sinus_half_width, sc.sinus_amplitude * std::sin(-sc.sinus_half_width));
    pts.back() = Vec2(sc.sinus_half_width, sc.sinus_amplitude * std::sin(sc.sinus_half_width));
    if (sc.sinus_half_width == std::numbers::pi) {
        pts.front().y() = 0.0;
        pts.back().y() = 0.0;
    }
    return pts;
}

// Left tail in through the crossing point, clockwise around the loop, out
// through the crossing point again to the right endpoint.
Points gamma_polyline(const Scenario& sc) {
    const double r = sc.loop_radius;
    const double s = std::numbers::sqrt2 / 2.0;
    const Vec2 cross_pt(0.0, r * std::numbers::sqrt2);
    const Vec2 touch_right(r * s, r * s);
    const Vec2 touch_left(-r * s, r * s);
    const Vec2 dir_in = (touch_right - cross_pt).normalized();
    const Vec2 dir_out = (cross_pt - touch_left).normalized();

    Points pts;
    pts.push_back(cross_pt - sc.left_tail_scale * sc.tail_length * dir_in);
    pts.push_back(cross_pt);
    constexpr std::size_t arc_samples = 4000;
    const double start = std::numbers::pi / 4.0;
    const double sweep = 1.5 * std::numbers::pi;
    for (std::size_t k = 0; k <= arc_samples; ++k) {
        const double a = start - sweep * static_cast<double>(k) / arc_samples;
        pts.emplace_back(r * std::cos(a), r * std::sin(a));
    }
    pts.push_back(cross_pt);
    pts.push_back(cross_pt + sc.tail_length * dir_out);
    return pts;
}

} // namespace

DiscreteCurve make_scenario(const Scenario& sc) {
    if (sc.n < 2) throw Error(ErrorCode::BadParameters, "scenario needs n >= 2");
    Points poly;
    switch (sc.id) {
    case ScenarioId::Segment: {
        if (!(sc.segment_length > 0.0)) throw Error(ErrorCode::BadParameters, "segment length must be positive");
        Points pts(sc.n);
        const double l = sc.segment_length / static_cast<double>(sc.n - 1);
        for (std::size_t i = 0; i < sc.n; ++i) pts[i] = Vec2(static_cast<double>(i) * l, 0.0);
        return DiscreteCurve::validate(std::move(pts), kInternalEdgeTol);
    }
    case ScenarioId::Sinus:
        if (!(sc.sinus_half_width > 0.0)) throw Error(ErrorCode::BadParameters, "sinus half width must be positive");
        poly = sinus_polyline(sc);
        break;
    case ScenarioId::Gamma:
    case ScenarioId::AsymGamma:
        if (!(sc.loop_radius > 0.0) || !(sc.tail_length > 0.0) || !(sc.left_tail_scale > 0.0)) {
            throw Error(ErrorCode::BadParameters, "gamma loop radius and tail lengths must be positive");
        }
        poly = gamma_polyline(sc);
        break;
    case ScenarioId::File:
        if (sc.file.empty()) throw Error(ErrorCode::BadParameters, "file scenario needs a path");
        poly = read_polyline_file(sc.file);
        break;
    }
    const DiscreteCurve c = resample_equal_arclength(poly, sc.n);
    if (!c.admissible()) throw Error(ErrorCode::DegenerateGap, "scenario endpoints coincide");
    return c;
}

std::vector<Preset> presets() {
    auto make = [](std::string name, ScenarioId id, double eps, double tau, double stop_tol, std::size_t cap) {
        Preset p;
        p.name = std::move(name);
        p.scenario = default_scenario(id);
        p.config.params = {eps, tau};
        p.config.stop_tol = stop_tol;
        p.config.n_steps = cap;
        return p;
    };
    std::vector<Preset> out;
    out.push_back(make("segment", ScenarioId::Segment, 0.01, 0.05, 1e-7, 5000));
    out.push_back(make("sinus", ScenarioId::Sinus, 0.01, 0.25, 1e-6, 2000));
    out.push_back(make("gamma", ScenarioId::Gamma, 0.1, 0.0125, 1e-6, 240));
    out.push_back(make("gamma_fine", ScenarioId::Gamma, 0.01, 0.0125, 1e-6, 240));
    out.push_back(make("asym_gamma", ScenarioId::AsymGamma, 0.1, 0.01, 1e-6, 20000));
    return out;
}

std::optional<Preset> find_preset(std::string_view name) {
    for (auto& p : presets()) {
        if (p.name == name) return p;
    }
    return std::nullopt;
}

} // namespace ef
