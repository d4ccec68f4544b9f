#pragma once

#include <map>
#include <string>
#include <variant>

#include "gpkdv/grid.hpp"

namespace gpkdv {

/// Field snapshot on disk: one line of JSON header terminated by '\n', followed by
/// raw little-endian IEEE-754 float64 samples (re/im interleaved for complex fields).
struct Snapshot {
  std::variant<RealField, ComplexField> field;
  double time = 0.0;
  std::map<std::string, std::string> labels;

  bool is_complex() const noexcept { return field.index() == 1; }
  const SpectralGrid& grid() const;
};

inline constexpr int kSnapshotVersion = 1;

void write_snapshot(const std::string& path, const Snapshot& snap);
Snapshot read_snapshot(const std::string& path);

}  // namespace gpkdv
