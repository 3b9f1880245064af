#include "fel/render.hpp"

#include "fel/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

namespace fel {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string ramp(double t) {
  static constexpr std::array<int, 3> low{44, 123, 182};
  static constexpr std::array<int, 3> high{215, 25, 28};
  char buf[8];
  std::array<int, 3> c{};
  for (std::size_t k = 0; k < 3; ++k) c[k] = static_cast<int>(std::lround(low[k] + t * (high[k] - low[k])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

}  // namespace

void render_svg(const FractalSystem& system, int level, const std::optional<VertexFunction>& f, std::ostream& out) {
  if (system.dimension() != 2) throw UnsupportedDimension("rendering needs a planar system (N = 2)");
  const auto nv = system.vertex_count(level);
  if (f && (f->level != level || f->values.size() != nv)) throw LevelMismatch("rendered function must live on V_m");

  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  for (std::size_t x = 0; x < nv; ++x) {
    const auto p = system.point(static_cast<VertexId>(x));
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  const double extent = std::max(xmax - xmin, ymax - ymin);
  const double margin = 0.05 * extent;
  const double size = 800.0;
  const double unit = size / (extent + 2 * margin);
  const double legend = f ? 40.0 : 0.0;
  auto sx = [&](double x) { return (x - xmin + margin) * unit; };
  auto sy = [&](double y) { return (ymax - y + margin) * unit; };
  const double width = (xmax - xmin + 2 * margin) * unit;
  const double height = (ymax - ymin + 2 * margin) * unit + legend;

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\">\n";
  if (!system.name().empty()) out << "  <title>" << system.name() << ", level " << level << "</title>\n";
  out << "  <g fill=\"none\" stroke=\"#333333\" stroke-width=\"0.8\">\n";
  for (std::size_t s = 0; s < system.symplex_count(level); ++s) {
    const auto v = system.symplex_vertices(level, s);
    double cx = 0.0, cy = 0.0;
    for (auto id : v) {
      cx += system.point(id)[0];
      cy += system.point(id)[1];
    }
    cx /= static_cast<double>(v.size());
    cy /= static_cast<double>(v.size());
    std::vector<VertexId> order(v.begin(), v.end());
    std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
      const auto pa = system.point(a);
      const auto pb = system.point(b);
      return std::atan2(pa[1] - cy, pa[0] - cx) < std::atan2(pb[1] - cy, pb[0] - cx);
    });
    out << "    <polygon points=\"";
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto p = system.point(order[k]);
      out << (k ? " " : "") << num(sx(p[0])) << "," << num(sy(p[1]));
    }
    out << "\"/>\n";
  }
  out << "  </g>\n";

  if (f) {
    const auto [lo_it, hi_it] = std::minmax_element(f->values.begin(), f->values.end());
    const double lo = *lo_it, hi = *hi_it;
    // Rounding noise on constant data must not stretch the ramp.
    const bool flat = hi - lo <= 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    const double radius = std::max(1.0, std::min(6.0, 0.25 * system.c0() / std::pow(system.scale(), level) * unit));
    out << "  <g stroke=\"none\">\n";
    for (std::size_t x = 0; x < nv; ++x) {
      const auto p = system.point(static_cast<VertexId>(x));
      const double t = flat ? 0.0 : (f->values[x] - lo) / (hi - lo);
      out << "    <circle cx=\"" << num(sx(p[0])) << "\" cy=\"" << num(sy(p[1])) << "\" r=\"" << num(radius)
          << "\" fill=\"" << ramp(t) << "\"/>\n";
    }
    out << "  </g>\n";
    const double y = height - legend + 10.0;
    out << "  <defs><linearGradient id=\"ramp\"><stop offset=\"0\" stop-color=\"" << ramp(0.0)
        << "\"/><stop offset=\"1\" stop-color=\"" << ramp(1.0) << "\"/></linearGradient></defs>\n"
        << "  <rect x=\"120\" y=\"" << num(y) << "\" width=\"" << num(width - 240.0)
        << "\" height=\"14\" fill=\"url(#ramp)\"/>\n"
        << "  <text x=\"10\" y=\"" << num(y + 12.0) << "\" font-size=\"12\">min " << format_double(lo) << "</text>\n"
        << "  <text x=\"" << num(width - 110.0) << "\" y=\"" << num(y + 12.0) << "\" font-size=\"12\">max "
        << format_double(hi) << "</text>\n";
  }
  out << "</svg>\n";
}

void render_svg_file(const FractalSystem& system, int level, const std::optional<VertexFunction>& f,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  render_svg(system, level, f, out);
}

}  // namespace fel
