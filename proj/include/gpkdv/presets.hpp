#pragma once

#include <map>
#include <string>
#include <vector>

#include "gpkdv/grid.hpp"

namespace gpkdv {

using PresetParams = std::map<std::string, double>;

struct PresetInfo {
  std::string name;
  std::string description;
  /// Which approximation result the data are meant to exercise.
  std::string hypothesis;
  PresetParams defaults;
};

/// Long-wave data (N0, W0 = Theta0_x) on a slow grid.
struct PresetData {
  std::string name;
  RealField n0;
  RealField w0;
};

const std::vector<PresetInfo>& preset_catalog();
const PresetInfo& find_preset(const std::string& name);

/// Builds a preset; params override the defaults and unknown keys are rejected.
/// epsilon is used only by presets defined through the GP scaling (dark-soliton).
PresetData make_preset(const std::string& name, const PresetParams& params,
                       const SpectralGrid& slow_grid, double epsilon);

}  // namespace gpkdv
