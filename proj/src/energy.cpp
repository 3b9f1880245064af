#include "fel/energy.hpp"

#include "fel/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace fel {

namespace {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_level(const FractalSystem& system, const VertexFunction& f) {
  if (f.level < 0 || f.level > system.max_level())
    throw LevelMismatch("function level " + std::to_string(f.level) + " is not built");
  if (f.values.size() != system.vertex_count(f.level))
    throw LevelMismatch("function has " + std::to_string(f.values.size()) + " values but V_" +
                        std::to_string(f.level) + " has " + std::to_string(system.vertex_count(f.level)));
}

double parse_number(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw InputError("not a number: '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

VertexFunction restrict_to(const VertexFunction& f, const FractalSystem& system, int level) {
  check_level(system, f);
  if (level > f.level) throw LevelMismatch("cannot restrict to a finer level");
  VertexFunction r;
  r.level = level;
  r.values.assign(f.values.begin(), f.values.begin() + static_cast<std::ptrdiff_t>(system.vertex_count(level)));
  return r;
}

double energy_m(const FractalSystem& system, const HarmonicStructure& hs, const VertexFunction& f) {
  check_level(system, f);
  const auto v0 = system.v0_count();
  const auto cells = system.symplex_count(f.level);
  const auto& a = hs.a;
  CompensatedSum total;
  for (std::size_t s = 0; s < cells; ++s) {
    const auto v = system.symplex_vertices(f.level, s);
    double cell = 0.0;
    for (std::size_t k = 0; k < v0; ++k)
      for (std::size_t l = k + 1; l < v0; ++l) {
        const double d = f.values[static_cast<std::size_t>(v[k])] - f.values[static_cast<std::size_t>(v[l])];
        cell += a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) * d * d;
      }
    total.add(cell);
  }
  return std::pow(hs.rho, f.level) * total.value();
}

VertexFunction harmonic_extension(const FractalSystem& system, const HarmonicStructure& hs, const VertexFunction& f,
                                  int n) {
  check_level(system, f);
  if (n < f.level) throw LevelMismatch("extension target is coarser than the data");
  if (n > system.max_level())
    throw LevelMismatch("extension to level " + std::to_string(n) + " exceeds built level " +
                        std::to_string(system.max_level()));
  const auto v0 = system.v0_count();
  const auto v1 = system.vertex_count(1);
  const auto m_count = static_cast<std::size_t>(system.map_count());

  VertexFunction out;
  out.level = n;
  out.values.assign(system.vertex_count(n), 0.0);
  std::copy(f.values.begin(), f.values.end(), out.values.begin());
  std::vector<char> known(out.values.size(), 0);
  std::fill(known.begin(), known.begin() + static_cast<std::ptrdiff_t>(f.values.size()), 1);

  std::vector<VertexId> local(v1);
  Eigen::VectorXd boundary(static_cast<Eigen::Index>(v0));
  for (int k = f.level; k < n; ++k) {
    for (std::size_t s = 0; s < system.symplex_count(k); ++s) {
      const auto corners = system.symplex_vertices(k, s);
      for (std::size_t i = 0; i < m_count; ++i) {
        const auto child = system.symplex_vertices(k + 1, s * m_count + i);
        const auto pattern = system.symplex_vertices(1, i);
        for (std::size_t l = 0; l < v0; ++l) local[static_cast<std::size_t>(pattern[l])] = child[l];
      }
      for (std::size_t b = 0; b < v0; ++b)
        boundary[static_cast<Eigen::Index>(b)] = out.values[static_cast<std::size_t>(corners[b])];
      const Eigen::VectorXd inner = hs.extension * boundary;
      for (std::size_t u = v0; u < v1; ++u) {
        const auto id = static_cast<std::size_t>(local[u]);
        const double value = inner[static_cast<Eigen::Index>(u - v0)];
        if (known[id]) {
          if (std::abs(out.values[id] - value) > 1e-10 * (1.0 + std::abs(value)))
            throw InternalError("harmonic extension disagrees at shared vertex " + std::to_string(id));
          continue;
        }
        out.values[id] = value;
        known[id] = 1;
      }
    }
  }
  return out;
}

EnergySequence energy_sequence(const FractalSystem& system, const HarmonicStructure& hs, const VertexFunction& f,
                               int m0, std::string tag) {
  check_level(system, f);
  if (m0 < 0 || m0 > f.level) throw LevelMismatch("energy sequence start outside [0, f.level]");
  EnergySequence seq;
  seq.tag = std::move(tag);
  for (int m = m0; m <= f.level; ++m) {
    const double e = energy_m(system, hs, restrict_to(f, system, m));
    if (!seq.entries.empty()) {
      const double prev = seq.entries.back().second;
      if (e < prev - 1e-9 * std::max(1.0, prev)) seq.monotone_ok = false;
    }
    seq.entries.emplace_back(m, e);
  }
  seq.limit_estimate = seq.entries.back().second;
  return seq;
}

FunctionSpec FunctionSpec::coordinate(int axis) {
  if (axis < 0) throw InputError("coordinate axis must be >= 0");
  FunctionSpec s;
  s.kind_ = Kind::Coordinate;
  s.axis_ = axis;
  return s;
}

FunctionSpec FunctionSpec::harmonic(std::vector<double> values) {
  if (values.empty()) throw InputError("harmonic spec needs values");
  FunctionSpec s;
  s.kind_ = Kind::Harmonic;
  s.values_ = std::move(values);
  return s;
}

FunctionSpec FunctionSpec::perturbation(FunctionSpec inner, VertexId vertex, double delta) {
  if (vertex < 0) throw InputError("perturbed vertex index must be >= 0");
  FunctionSpec s;
  s.kind_ = Kind::Perturbation;
  s.inner_ = std::make_shared<const FunctionSpec>(std::move(inner));
  s.vertex_ = vertex;
  s.delta_ = delta;
  return s;
}

FunctionSpec FunctionSpec::parse(const std::string& raw) {
  std::string text = raw;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.erase(text.begin());
  if (text.starts_with("coord:")) {
    const double axis = parse_number(text.substr(6));
    if (axis != std::floor(axis)) throw InputError("coordinate axis must be an integer");
    return coordinate(static_cast<int>(axis));
  }
  if (text.starts_with("harmonic:")) {
    std::vector<double> values;
    std::stringstream ss(text.substr(9));
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(parse_number(item));
    return harmonic(std::move(values));
  }
  if (text.starts_with("perturb:")) {
    const auto last = text.rfind(':');
    const auto mid = last == std::string::npos || last < 8 ? std::string::npos : text.rfind(':', last - 1);
    if (mid == std::string::npos || mid < 8) throw InputError("perturb spec needs <spec>:<vertex>:<delta>");
    const double vertex = parse_number(text.substr(mid + 1, last - mid - 1));
    if (vertex != std::floor(vertex)) throw InputError("perturbed vertex must be an integer");
    return perturbation(parse(text.substr(8, mid - 8)), static_cast<VertexId>(vertex), parse_number(text.substr(last + 1)));
  }
  throw InputError("unknown function spec '" + text + "'");
}

std::string FunctionSpec::text() const {
  switch (kind_) {
    case Kind::Coordinate:
      return "coord:" + std::to_string(axis_);
    case Kind::Harmonic: {
      std::string s = "harmonic:";
      for (std::size_t k = 0; k < values_.size(); ++k) s += (k ? "," : "") + format_double(values_[k]);
      return s;
    }
    case Kind::Perturbation:
      return "perturb:" + inner_->text() + ":" + std::to_string(vertex_) + ":" + format_double(delta_);
  }
  return {};
}

VertexFunction FunctionSpec::sample(const FractalSystem& system, const HarmonicStructure& hs, int level) const {
  if (level < 0 || level > system.max_level()) throw LevelMismatch("sampling level " + std::to_string(level) + " is not built");
  switch (kind_) {
    case Kind::Coordinate: {
      if (axis_ >= system.dimension()) throw InputError("coordinate axis " + std::to_string(axis_) + " out of range");
      VertexFunction f;
      f.level = level;
      f.values.resize(system.vertex_count(level));
      for (std::size_t x = 0; x < f.values.size(); ++x)
        f.values[x] = system.point(static_cast<VertexId>(x))[static_cast<std::size_t>(axis_)];
      return f;
    }
    case Kind::Harmonic: {
      for (int j = 0; j <= system.max_level(); ++j) {
        if (system.vertex_count(j) != values_.size()) continue;
        VertexFunction data{j, values_};
        if (level <= j) return restrict_to(data, system, level);
        return harmonic_extension(system, hs, data, level);
      }
      throw InputError("harmonic spec has " + std::to_string(values_.size()) + " values, matching no #V_m");
    }
    case Kind::Perturbation: {
      if (static_cast<std::size_t>(vertex_) >= system.vertex_count(system.max_level()))
        throw InputError("perturbed vertex " + std::to_string(vertex_) + " is not in any built level");
      // A vertex finer than `level` is invisible there: the sample is the restriction.
      auto f = inner_->sample(system, hs, level);
      if (static_cast<std::size_t>(vertex_) < f.values.size()) f.values[static_cast<std::size_t>(vertex_)] += delta_;
      return f;
    }
  }
  throw InternalError("unhandled function spec kind");
}

std::vector<FunctionSpec> parse_corpus(const std::string& text) {
  std::vector<FunctionSpec> corpus;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    corpus.push_back(FunctionSpec::parse(line));
  }
  return corpus;
}

std::vector<FunctionSpec> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_corpus(ss.str());
}

std::vector<FunctionSpec> generate_corpus(const FractalSystem& system, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<FunctionSpec> corpus;
  for (int k = 0; k < count; ++k) {
    const int level = k % 2;
    std::vector<double> values(system.vertex_count(level));
    for (auto& v : values) v = uniform(rng);
    corpus.push_back(FunctionSpec::harmonic(std::move(values)));
  }
  for (int axis = 0; axis < system.dimension(); ++axis) corpus.push_back(FunctionSpec::coordinate(axis));
  return corpus;
}

}  // namespace fel
