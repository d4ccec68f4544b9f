#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace gpkdv {

/// Shortest round-trip decimal representation ('.' separator, locale independent).
std::string format_double(double v);

/// Minimal CSV writer; throws IoError with the path on failure.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(const std::string& v);
  void end_row();
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  bool row_started_ = false;
};

}  // namespace gpkdv
