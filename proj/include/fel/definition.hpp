#pragma once

#include "fel/similitude.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fel {

/// Parsed fractal definition file: a named similitude family.
struct FractalDefinition {
  std::string name;
  int dimension = 0;
  double scale = 0.0;
  std::vector<Similitude> maps;
};

/// JSON layout: {"name", "dimension", "scale", "maps": [{"rotation": [N*N row-major], "translation": [N]}]}.
FractalDefinition parse_definition(const std::string& text);
std::string format_definition(const FractalDefinition& def);

FractalDefinition load_definition(const std::filesystem::path& path);
void save_definition(const FractalDefinition& def, const std::filesystem::path& path);

/// Built-in presets: gasket2, gasket3, snowflake.
std::optional<FractalDefinition> preset(const std::string& name);
std::vector<std::string> preset_names();

/// Path to an existing file, else a preset name (with or without ".json").
FractalDefinition resolve_definition(const std::string& path_or_preset);

FractalDefinition gasket(int dimension);
FractalDefinition snowflake();

}  // namespace fel
