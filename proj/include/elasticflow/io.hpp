#pragma once

#include "elasticflow/flow.hpp"

#include <cstddef>
#include <limits>
#include <string>

namespace ef {

enum class TrajectoryFormat { Jsonl, Csv };

/// JSONL: one object per snapshot with keys step, t, l, E, length, gap and
/// points ([[x, y], ...]). CSV: long format "step,i,x,y" at `path`, plus the
/// per-step scalars at sidecar_path(path). Doubles are written with 17
/// significant digits. Throws IoError.
void write_trajectory(const Trajectory& traj, const std::string& path, TrajectoryFormat format);

/// "<stem>_scalars.csv" next to `path`.
std::string sidecar_path(const std::string& path);

/// Reads a JSONL trajectory back. Only snapshot steps get a StepRecord, and
/// only the scalars stored in the file are filled in. Throws IoError.
Trajectory read_trajectory_jsonl(const std::string& path, const EnergyParams& params);

/// One polyline per `stride`-th snapshot in [begin, end), colored from
/// violet (hue 270) to red (hue 0) in snapshot order. Throws IoError,
/// BadParameters for stride 0 or an empty range.
void render_svg(const Trajectory& traj, const std::string& path, std::size_t stride = 1, std::size_t begin = 0,
                std::size_t end = std::numeric_limits<std::size_t>::max());

/// "#rrggbb" for hue in degrees, full saturation and value.
std::string hsv_hex(double hue_deg);

} // namespace ef
