#pragma once

#include "fel/energy.hpp"
#include "fel/fractal_system.hpp"

#include <optional>
#include <ostream>
#include <string>

namespace fel {

/// SVG 1.1 drawing of the level-m cells of a planar system; with f, the V_m
/// vertices are colored on a linear ramp and a min/max legend is added.
/// Throws UnsupportedDimension unless the system is planar.
void render_svg(const FractalSystem& system, int level, const std::optional<VertexFunction>& f, std::ostream& out);

void render_svg_file(const FractalSystem& system, int level, const std::optional<VertexFunction>& f,
                     const std::string& path);

}  // namespace fel
