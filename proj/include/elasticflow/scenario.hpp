#pragma once

#include "elasticflow/flow.hpp"
#include "elasticflow/geometry.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ef {

enum class ScenarioId { Segment, Sinus, Gamma, AsymGamma, File };

std::optional<ScenarioId> parse_scenario_id(std::string_view name);
const char* scenario_name(ScenarioId id);

/// Initial-curve recipe. Only the fields relevant to `id` are read.
///
/// The gamma shapes are a circular loop of radius `loop_radius` whose two
/// tangent lines cross at right angles above it; each tail runs
/// `tail_length` from the crossing point to an endpoint. The asymmetric
/// variant scales the left tail by `left_tail_scale`.
struct Scenario {
    ScenarioId id = ScenarioId::Segment;
    std::size_t n = 51;
    double segment_length = 2.0;
    double sinus_amplitude = 1.0;
    double sinus_half_width = 3.14159265358979323846; ///< graph of a sin(x) on [-w, w]
    double loop_radius = 0.35;
    double tail_length = 1.0;
    double left_tail_scale = 1.0;
    std::string file; ///< whitespace-separated "x y" lines for ScenarioId::File
};

/// Defaults per scenario: N = 51 (segment), 81 (sinus), 120 (gamma shapes).
Scenario default_scenario(ScenarioId id);

/// Builds and validates the initial curve. Throws BadParameters, IoError.
DiscreteCurve make_scenario(const Scenario& sc);

/// Reads whitespace-separated "x y" pairs, one point per line; blank lines
/// and lines starting with '#' are skipped. Throws IoError.
Points read_polyline_file(const std::string& path);

/// Parameter sets of the reference experiments.
struct Preset {
    std::string name;
    Scenario scenario;
    FlowConfig config;
};

/// Named presets: segment, sinus, gamma (eps 0.1), gamma_fine (eps 0.01), asym_gamma.
std::vector<Preset> presets();
std::optional<Preset> find_preset(std::string_view name);

} // namespace ef
