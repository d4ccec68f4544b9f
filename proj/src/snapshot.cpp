#include "gpkdv/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

namespace gpkdv {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

const SpectralGrid& Snapshot::grid() const {
  return std::visit([](const auto& f) -> const SpectralGrid& { return f.grid; }, field);
}

void write_snapshot(const std::string& path, const Snapshot& snap) {
  const auto& g = snap.grid();
  nlohmann::ordered_json header;
  header["format"] = "gpkdv-field";
  header["version"] = kSnapshotVersion;
  header["length"] = g.length();
  header["n_points"] = g.size();
  header["center"] = g.center();
  header["kind"] = snap.is_complex() ? "complex" : "real";
  header["time"] = snap.time;
  header["labels"] = snap.labels;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open snapshot for writing", path);
  const std::string line = header.dump() + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  std::visit(
      [&](const auto& f) {
        out.write(reinterpret_cast<const char*>(f.values.data()),
                  static_cast<std::streamsize>(f.values.size() * sizeof(f.values[0])));
      },
      snap.field);
  if (!out) throw IoError("failed writing snapshot", path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot", path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing snapshot header", path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed snapshot header (") + e.what() + ")", path);
  }
  if (header.value("format", "") != "gpkdv-field") {
    throw IoError("not a field snapshot", path);
  }
  if (header.value("version", 0) != kSnapshotVersion) {
    throw IoError("unsupported snapshot version", path);
  }
  Snapshot snap;
  SpectralGrid g;
  try {
    g = SpectralGrid(header.at("length").get<double>(), header.at("n_points").get<std::size_t>(),
                     header.value("center", 0.0));
    snap.time = header.at("time").get<double>();
    snap.labels = header.value("labels", std::map<std::string, std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("incomplete snapshot header (") + e.what() + ")", path);
  }
  const std::string kind = header.value("kind", "");
  auto read_into = [&](auto& f) {
    in.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(f.values[0])));
    if (in.gcount() != static_cast<std::streamsize>(f.values.size() * sizeof(f.values[0]))) {
      throw IoError("truncated snapshot payload", path);
    }
  };
  if (kind == "real") {
    RealField f(g);
    read_into(f);
    snap.field = std::move(f);
  } else if (kind == "complex") {
    ComplexField f(g);
    read_into(f);
    snap.field = std::move(f);
  } else {
    throw IoError("unknown snapshot kind '" + kind + "'", path);
  }
  return snap;
}

}  // namespace gpkdv
