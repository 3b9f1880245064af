#include "fel/cli.hpp"

#include "fel/characteristics.hpp"
#include "fel/definition.hpp"
#include "fel/energy.hpp"
#include "fel/errors.hpp"
#include "fel/harmonic.hpp"
#include "fel/lipschitz.hpp"
#include "fel/render.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <memory>
#include <optional>

namespace fel::cli {

namespace {

struct RunConfig {
  std::string fractal;
  std::string output;
  std::size_t point_cap = 0;
  // describe
  bool with_ndhs = false;
  std::string export_path;
  // solve-ndhs
  bool trace = false;
  // energy / lipschitz / render
  std::string function;
  std::string levels = "0..4";
  int m_max = 4;
  int level = 7;
  std::string base = "L";
  // equivalence
  std::string corpus;
  int generate = 0;
  unsigned seed = 1;
  std::string save_corpus;
};

// Writes to the --output file when given, else to the provided stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InputError("cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

FractalSystem load_system(const RunConfig& cfg, int max_level, bool enforce = true) {
  const auto def = resolve_definition(cfg.fractal);
  BuildOptions opts;
  opts.max_level = std::max(1, max_level);
  opts.point_cap = cfg.point_cap;
  opts.enforce_conditions = enforce;
  return FractalSystem::build(def.maps, opts, def.name);
}

std::string csv_quote(const std::string& s) { return "\"" + s + "\""; }

const char* pass_fail(bool ok) { return ok ? "pass" : "fail"; }

int cmd_describe(const RunConfig& cfg, std::ostream& out) {
  const auto def = resolve_definition(cfg.fractal);
  const auto sys = load_system(cfg, 3, false);
  const auto& rep = sys.validation();
  out << "name=" << sys.name() << "\n"
      << "N=" << sys.dimension() << "\n"
      << "M=" << sys.map_count() << "\n"
      << "L=" << format_double(sys.scale()) << "\n";
  for (int m = 0; m <= 3; ++m) out << "V_" << m << "=" << sys.vertex_count(m) << "\n";
  out << "c0=" << format_double(sys.c0()) << "\n"
      << "diameter=" << format_double(sys.diameter()) << "\n"
      << "condition_1=" << pass_fail(rep.essential_points) << "\n"
      << "condition_2=not checked\n"
      << "condition_3=" << pass_fail(rep.nesting) << " (verified to depth " << rep.nesting_depth << ")\n"
      << "condition_4=" << pass_fail(rep.connectivity) << "\n"
      << "condition_5=" << pass_fail(rep.symmetry) << "\n";
  for (const auto& f : rep.failures) out << "failure=" << f << "\n";
  if (!cfg.export_path.empty()) save_definition(def, cfg.export_path);
  if (!rep.ok()) return kConditionViolation;
  if (cfg.with_ndhs) {
    const auto hs = solve_ndhs(sys);
    const auto d = dimensions(sys, hs);
    out << "rho=" << format_double(d.rho) << "\n"
        << "d_f=" << format_double(d.d_f) << "\n"
        << "d_w=" << format_double(d.d_w) << "\n"
        << "d_s=" << format_double(d.d_s) << "\n";
  }
  return kOk;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const auto sys = load_system(cfg, 1);
  const auto hs = solve_ndhs(sys);
  out << "orbit_classes=" << hs.orbits.count << "\n";
  for (int k = 0; k < hs.orbits.count; ++k) {
    const auto [x, y] = hs.orbits.representatives[static_cast<std::size_t>(k)];
    out << "class " << k << ": representative (" << x << "," << y << ") conductance "
        << format_double(hs.class_conductance[static_cast<std::size_t>(k)]) << (k == hs.orbits.nearest ? " nearest" : "")
        << "\n";
  }
  out << "A=\n";
  for (Eigen::Index r = 0; r < hs.a.size(); ++r) {
    for (Eigen::Index c = 0; c < hs.a.size(); ++c) out << (c ? "," : "") << format_double(hs.a(r, c));
    out << "\n";
  }
  out << "rho=" << format_double(hs.rho) << "\n"
      << "iterations=" << hs.iterations << "\n"
      << "residual=" << format_double(hs.residual) << "\n"
      << "damped=" << (hs.damped ? "yes" : "no") << "\n";
  if (cfg.trace) {
    out << "\niter,gap,rho_estimate\n";
    for (std::size_t i = 0; i < hs.trace.size(); ++i)
      out << i + 1 << "," << format_double(hs.trace[i].gap) << "," << format_double(hs.trace[i].rho_estimate) << "\n";
  }
  return kOk;
}

int cmd_energy(const RunConfig& cfg, std::ostream& out) {
  const auto [m0, n] = parse_level_range(cfg.levels);
  const auto sys = load_system(cfg, n);
  const auto hs = solve_ndhs(sys);
  const auto spec = FunctionSpec::parse(cfg.function);
  const auto seq = energy_sequence(sys, hs, spec.sample(sys, hs, n), m0, spec.text());
  out << "m,E_m,monotone_ok\n";
  bool ok = true;
  for (std::size_t i = 0; i < seq.entries.size(); ++i) {
    const auto [m, e] = seq.entries[i];
    if (i > 0) {
      const double prev = seq.entries[i - 1].second;
      ok = ok && e >= prev - 1e-9 * std::max(1.0, prev);
    }
    out << m << "," << format_double(e) << "," << (ok ? "true" : "false") << "\n";
  }
  return kOk;
}

void check_levels(const RunConfig& cfg) {
  if (cfg.m_max < 1) throw InputError("--mmax must be >= 1");
  if (cfg.level <= cfg.m_max) throw InputError("--level must exceed --mmax");
}

int cmd_lipschitz(const RunConfig& cfg, std::ostream& out) {
  check_levels(cfg);
  const auto sys = load_system(cfg, cfg.level);
  const auto hs = solve_ndhs(sys);
  const auto spec = FunctionSpec::parse(cfg.function);
  if (cfg.base != "2" && cfg.base != "L") throw InputError("--base must be 2 or L");
  const auto r = norm_report(sys, hs, spec, cfg.m_max, cfg.level);
  out << "m,a_m,b_m\n";
  for (std::size_t i = 0; i < r.b_values.size(); ++i)
    out << r.b_values[i].first << "," << format_double(r.a_values[i].second) << "," << format_double(r.b_values[i].second)
        << "\n";
  const double sup = cfg.base == "2" ? r.sup_a : r.sup_b;
  out << "\nbase,l2_norm,sup_coefficient,lip_norm\n"
      << cfg.base << "," << format_double(r.l2_norm) << "," << format_double(sup) << ","
      << format_double(r.l2_norm + sup) << "\n";
  return kOk;
}

int cmd_equivalence(const RunConfig& cfg, std::ostream& out) {
  check_levels(cfg);
  if (cfg.corpus.empty() == (cfg.generate == 0)) throw InputError("give exactly one of --corpus or --generate-corpus");
  const auto sys = load_system(cfg, cfg.level);
  const auto hs = solve_ndhs(sys);
  const auto corpus = cfg.corpus.empty() ? generate_corpus(sys, cfg.generate, cfg.seed) : load_corpus(cfg.corpus);
  if (!cfg.save_corpus.empty()) {
    std::ofstream f(cfg.save_corpus);
    if (!f) throw InputError("cannot write " + cfg.save_corpus);
    for (const auto& s : corpus) f << s.text() << "\n";
  }
  const auto summary = equivalence_experiment(sys, hs, corpus, cfg.m_max, cfg.level);
  out << "tag,lip_norm,dirichlet_norm,ratio,ratio_previous_level,stable\n";
  std::size_t st = 0;
  for (const auto& r : summary.reports) {
    out << csv_quote(r.tag) << "," << format_double(r.lip_norm) << "," << format_double(r.dirichlet_norm) << ",";
    if (r.ratio_defined) {
      const auto& s = summary.stability[st++];
      out << format_double(r.ratio) << "," << format_double(s.ratio_previous) << "," << (s.stable ? "true" : "false");
    } else {
      out << "undefined,undefined,excluded";
    }
    out << "\n";
  }
  out << "\nmin_ratio,max_ratio,C_empirical,all_stable,excluded\n"
      << format_double(summary.min_ratio) << "," << format_double(summary.max_ratio) << ","
      << format_double(summary.c_empirical) << "," << (summary.all_stable ? "true" : "false") << ","
      << summary.excluded.size() << "\n";
  return kOk;
}

int cmd_render(const RunConfig& cfg, std::ostream& out) {
  const auto sys = load_system(cfg, cfg.level);
  std::optional<VertexFunction> f;
  if (!cfg.function.empty()) {
    const auto hs = solve_ndhs(sys);
    f = FunctionSpec::parse(cfg.function).sample(sys, hs, cfg.level);
  }
  render_svg(sys, cfg.level, f, out);
  return kOk;
}

}  // namespace

std::pair<int, int> parse_level_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      const int n = std::stoi(text, &used);
      if (used != text.size() || n < 0) throw InputError("bad level range");
      return {0, n};
    }
    const int lo = std::stoi(text.substr(0, dots), &used);
    if (used != dots) throw InputError("bad level range");
    const auto rest = text.substr(dots + 2);
    const int hi = std::stoi(rest, &used);
    if (used != rest.size() || lo < 0 || hi < lo) throw InputError("bad level range");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw InputError("level range must look like m0..n, got '" + text + "'");
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Nested-fractal Dirichlet forms and Lipschitz norms", "fel"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("fractal", cfg.fractal, "Fractal definition file or preset (gasket2, gasket3, snowflake)")->required();
    sub->add_option("-o,--output", cfg.output, "Write results to this file instead of stdout");
    sub->add_option("--max-points", cfg.point_cap, "Point cap for vertex enumeration (overrides FEL_MAX_POINTS)");
  };

  auto* describe = app.add_subcommand("describe", "Vertex counts and condition report");
  add_common(describe);
  describe->add_flag("--with-ndhs", cfg.with_ndhs, "Also solve the harmonic structure and print dimensions");
  describe->add_option("--export", cfg.export_path, "Write the fractal definition to this file");

  auto* solve = app.add_subcommand("solve-ndhs", "Renormalization fixed point and resistance factor");
  add_common(solve);
  solve->add_flag("--trace", cfg.trace, "Append the per-iteration CSV (iter, gap, rho_estimate)");

  auto* energy = app.add_subcommand("energy", "Level-m Dirichlet energies of a function");
  add_common(energy);
  energy->add_option("--function", cfg.function, "Function spec")->required();
  energy->add_option("--levels", cfg.levels, "Level range m0..n");

  auto* lip = app.add_subcommand("lipschitz", "Lipschitz coefficients a_m and b_m of a function");
  add_common(lip);
  lip->add_option("--function", cfg.function, "Function spec")->required();
  lip->add_option("--mmax", cfg.m_max, "Largest coefficient index");
  lip->add_option("--level", cfg.level, "Counting-measure level n");
  lip->add_option("--base", cfg.base, "Base used for the summary norm: 2 or L");

  auto* equiv = app.add_subcommand("equivalence", "Lipschitz vs Dirichlet norm ratios over a corpus");
  add_common(equiv);
  equiv->add_option("--corpus", cfg.corpus, "Corpus file, one function spec per line");
  equiv->add_option("--generate-corpus", cfg.generate, "Generate K random harmonic functions plus coordinates");
  equiv->add_option("--seed", cfg.seed, "Seed for --generate-corpus");
  equiv->add_option("--save-corpus", cfg.save_corpus, "Write the corpus used to this file");
  equiv->add_option("--mmax", cfg.m_max, "Largest coefficient index");
  equiv->add_option("--level", cfg.level, "Counting-measure level n");

  auto* render = app.add_subcommand("render", "SVG of the level-m cells, optionally colored by a function");
  add_common(render);
  render->add_option("--level", cfg.level, "Cell level m")->required();
  render->add_option("--function", cfg.function, "Function spec used to color vertices");

  std::vector<const char*> argv{"fel"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "fel: " << e.what() << "\n";
    return kInputError;
  }

  try {
    Sink sink(cfg.output, out);
    auto& o = *sink;
    if (describe->parsed()) return cmd_describe(cfg, o);
    if (solve->parsed()) return cmd_solve(cfg, o);
    if (energy->parsed()) return cmd_energy(cfg, o);
    if (lip->parsed()) return cmd_lipschitz(cfg, o);
    if (equiv->parsed()) return cmd_equivalence(cfg, o);
    if (render->parsed()) return cmd_render(cfg, o);
  } catch (const ConditionViolation& e) {
    err << "fel: " << e.what() << "\n";
    return kConditionViolation;
  } catch (const NoConvergence& e) {
    err << "fel: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const SingularInterior& e) {
    err << "fel: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const DegenerateStructure& e) {
    err << "fel: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const InternalError& e) {
    err << "fel: internal error: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "fel: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace fel::cli
