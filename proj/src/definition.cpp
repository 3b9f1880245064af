#include "fel/definition.hpp"

#include "fel/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fel {

using nlohmann::json;

FractalDefinition gasket(int dimension) {
  if (dimension < 1) throw InputError("gasket dimension must be >= 1");
  // Regular simplex with unit edges: vertex k lies above the centroid of vertices 0..k-1.
  std::vector<Eigen::VectorXd> vertices(static_cast<std::size_t>(dimension + 1), Eigen::VectorXd::Zero(dimension));
  for (int k = 1; k <= dimension; ++k) {
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dimension);
    for (int j = 0; j < k; ++j) centroid += vertices[static_cast<std::size_t>(j)];
    centroid /= k;
    const double dist2 = (vertices[0] - centroid).squaredNorm();
    Eigen::VectorXd v = centroid;
    v[k - 1] = std::sqrt(1.0 - dist2);
    vertices[static_cast<std::size_t>(k)] = v;
  }
  FractalDefinition def;
  def.name = "gasket" + std::to_string(dimension);
  def.dimension = dimension;
  def.scale = 2.0;
  for (const auto& v : vertices) def.maps.push_back(Similitude::homothety(2.0, v / 2.0));
  return def;
}

FractalDefinition snowflake() {
  FractalDefinition def;
  def.name = "snowflake";
  def.dimension = 2;
  def.scale = 3.0;
  // Hexagon vertices h_1..h_6 counterclockwise from the bottom-left one.
  const double angles_deg[] = {240.0, 300.0, 0.0, 60.0, 120.0, 180.0};
  for (double a : angles_deg) {
    const double t = a * std::numbers::pi / 180.0;
    Eigen::Vector2d h(std::cos(t), std::sin(t));
    if (a == 0.0 || a == 180.0) h.y() = 0.0;
    def.maps.push_back(Similitude::homothety(3.0, (2.0 / 3.0) * h));
  }
  def.maps.push_back(Similitude::homothety(3.0, Eigen::VectorXd::Zero(2)));
  return def;
}

std::optional<FractalDefinition> preset(const std::string& name) {
  if (name == "gasket2") return gasket(2);
  if (name == "gasket3") return gasket(3);
  if (name == "snowflake") return snowflake();
  return std::nullopt;
}

std::vector<std::string> preset_names() { return {"gasket2", "gasket3", "snowflake"}; }

FractalDefinition parse_definition(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("fractal definition is not valid JSON: ") + e.what());
  }
  try {
    FractalDefinition def;
    def.name = doc.value("name", std::string{});
    def.dimension = doc.at("dimension").get<int>();
    def.scale = doc.at("scale").get<double>();
    const int n = def.dimension;
    if (n < 1) throw InputError("dimension must be >= 1");
    for (const auto& m : doc.at("maps")) {
      const auto rot = m.at("rotation").get<std::vector<double>>();
      const auto tr = m.at("translation").get<std::vector<double>>();
      if (rot.size() != static_cast<std::size_t>(n * n) || tr.size() != static_cast<std::size_t>(n))
        throw InputError("map entry does not match dimension " + std::to_string(n));
      Eigen::MatrixXd u(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) u(r, c) = rot[static_cast<std::size_t>(r * n + c)];
      def.maps.emplace_back(u, Eigen::Map<const Eigen::VectorXd>(tr.data(), n), def.scale);
    }
    return def;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed fractal definition: ") + e.what());
  }
}

std::string format_definition(const FractalDefinition& def) {
  json doc;
  doc["name"] = def.name;
  doc["dimension"] = def.dimension;
  doc["scale"] = def.scale;
  doc["maps"] = json::array();
  for (const auto& m : def.maps) {
    std::vector<double> rot;
    for (int r = 0; r < def.dimension; ++r)
      for (int c = 0; c < def.dimension; ++c) rot.push_back(m.rotation()(r, c));
    std::vector<double> tr(m.translation().data(), m.translation().data() + def.dimension);
    doc["maps"].push_back({{"rotation", rot}, {"translation", tr}});
  }
  return doc.dump(2) + "\n";
}

FractalDefinition load_definition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open fractal definition " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto def = parse_definition(ss.str());
  if (def.name.empty()) def.name = path.stem().string();
  return def;
}

void save_definition(const FractalDefinition& def, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << format_definition(def);
}

FractalDefinition resolve_definition(const std::string& path_or_preset) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(path_or_preset, ec)) return load_definition(path_or_preset);
  auto stem = path_or_preset;
  if (stem.size() > 5 && stem.ends_with(".json")) stem = std::filesystem::path(stem).stem().string();
  if (auto p = preset(stem)) return *p;
  throw InputError("no fractal definition file or preset named '" + path_or_preset + "'");
}

}  // namespace fel
