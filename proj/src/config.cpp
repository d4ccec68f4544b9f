#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "gpkdv/csv.hpp"
#include "gpkdv/experiments.hpp"

namespace gpkdv {

namespace {

using json = nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      std::string list;
      for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      throw ValidationError(where + ": unknown key '" + key + "' (allowed: " + list + ")");
    }
  }
}

double number(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(where + "." + key + " must be a number");
  return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ValidationError(where + "." + key + " must be an integer");
  return v.get<int>();
}

std::string text(const json& obj, const char* key, const std::string& where, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ValidationError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

}  // namespace

StudyConfig study_config_from_json(const json& j) {
  const std::string w = "config";
  check_keys(j, {"version", "study", "epsilons", "tau_final", "tau_samples", "k", "frames", "preset",
                 "grid", "solver", "wave", "residual", "monitor", "output_dir", "workers"},
             w);
  StudyConfig cfg;
  if (!j.contains("version")) throw ValidationError("config: missing 'version'");
  cfg.version = integer(j, "version", w, 0);
  cfg.study = text(j, "study", w, "");

  if (j.contains("epsilons")) {
    const auto& e = j.at("epsilons");
    if (!e.is_array()) throw ValidationError("config.epsilons must be an array of numbers");
    cfg.epsilons.clear();
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!e[i].is_number()) {
        throw ValidationError("config.epsilons[" + std::to_string(i) + "] must be a number");
      }
      cfg.epsilons.push_back(e[i].get<double>());
    }
  }
  cfg.tau_final = number(j, "tau_final", w, cfg.tau_final);
  cfg.tau_samples = integer(j, "tau_samples", w, cfg.tau_samples);

  if (j.contains("k")) {
    const auto& k = j.at("k");
    cfg.ks.clear();
    if (k.is_number_integer()) {
      cfg.ks.push_back(k.get<int>());
    } else if (k.is_array()) {
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (!k[i].is_number_integer()) {
          throw ValidationError("config.k[" + std::to_string(i) + "] must be an integer");
        }
        cfg.ks.push_back(k[i].get<int>());
      }
    } else {
      throw ValidationError("config.k must be an integer or an array of integers");
    }
  }

  if (j.contains("frames")) {
    const auto& f = j.at("frames");
    if (!f.is_array()) throw ValidationError("config.frames must be an array of \"minus\"/\"plus\"");
    cfg.frames.clear();
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!f[i].is_string()) {
        throw ValidationError("config.frames[" + std::to_string(i) + "] must be a string");
      }
      cfg.frames.push_back(parse_frame(f[i].get<std::string>()));
    }
  }

  if (j.contains("preset")) {
    const auto& p = j.at("preset");
    if (p.is_string()) {
      cfg.preset.name = p.get<std::string>();
    } else {
      check_keys(p, {"name", "params"}, "config.preset");
      cfg.preset.name = text(p, "name", "config.preset", cfg.preset.name);
      if (p.contains("params")) {
        const auto& params = p.at("params");
        if (!params.is_object()) throw ValidationError("config.preset.params must be an object");
        for (const auto& [key, value] : params.items()) {
          if (!value.is_number()) {
            throw ValidationError("config.preset.params." + key + " must be a number");
          }
          cfg.preset.params[key] = value.get<double>();
        }
      }
    }
  }

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    const std::string gw = "config.grid";
    check_keys(g, {"slow_spacing", "margin", "slow_length"}, gw);
    cfg.grid.slow_spacing = number(g, "slow_spacing", gw, cfg.grid.slow_spacing);
    cfg.grid.margin = number(g, "margin", gw, cfg.grid.margin);
    if (g.contains("slow_length") && !g.at("slow_length").is_null()) {
      cfg.grid.slow_length = number(g, "slow_length", gw, 0.0);
    }
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    const std::string sw = "config.solver";
    check_keys(s, {"gp_dt", "kdv_dtau", "check_every", "resolution_tol", "kdv_cfl"}, sw);
    cfg.solver.gp_dt = number(s, "gp_dt", sw, cfg.solver.gp_dt);
    cfg.solver.kdv_dtau = number(s, "kdv_dtau", sw, cfg.solver.kdv_dtau);
    const int every = integer(s, "check_every", sw, static_cast<int>(cfg.solver.check_every));
    if (every < 1) throw ValidationError("config.solver.check_every must be >= 1");
    cfg.solver.check_every = static_cast<std::size_t>(every);
    cfg.solver.resolution_tol = number(s, "resolution_tol", sw, cfg.solver.resolution_tol);
    cfg.solver.kdv_cfl = number(s, "kdv_cfl", sw, cfg.solver.kdv_cfl);
  }
  if (j.contains("wave")) {
    const auto& v = j.at("wave");
    const std::string vw = "config.wave";
    check_keys(v, {"time_factor", "samples", "product", "fixed_time"}, vw);
    cfg.wave.time_factor = number(v, "time_factor", vw, cfg.wave.time_factor);
    cfg.wave.samples = integer(v, "samples", vw, cfg.wave.samples);
    cfg.wave.product = number(v, "product", vw, cfg.wave.product);
    cfg.wave.fixed_time = number(v, "fixed_time", vw, cfg.wave.fixed_time);
  }
  if (j.contains("residual")) {
    const auto& r = j.at("residual");
    const std::string rw = "config.residual";
    check_keys(r, {"epsilon", "tau_center", "dtau", "substeps"}, rw);
    cfg.residual.epsilon = number(r, "epsilon", rw, cfg.residual.epsilon);
    cfg.residual.tau_center = number(r, "tau_center", rw, cfg.residual.tau_center);
    cfg.residual.dtau = number(r, "dtau", rw, cfg.residual.dtau);
    cfg.residual.substeps = integer(r, "substeps", rw, cfg.residual.substeps);
  }
  if (j.contains("monitor")) {
    const auto& m = j.at("monitor");
    check_keys(m, {"k", "envelope_factor"}, "config.monitor");
    cfg.monitor_k = integer(m, "k", "config.monitor", cfg.monitor_k);
    cfg.envelope_factor = number(m, "envelope_factor", "config.monitor", cfg.envelope_factor);
  }
  cfg.output_dir = text(j, "output_dir", w, "");
  cfg.workers = integer(j, "workers", w, 0);
  validate(cfg);
  return cfg;
}

void validate(StudyConfig& cfg) {
  if (cfg.version != kStudyConfigVersion) {
    throw ValidationError("config: unsupported version " + std::to_string(cfg.version) + " (expected " +
                          std::to_string(kStudyConfigVersion) + ")");
  }
  for (double e : cfg.epsilons) {
    if (!(e > 0.0 && e < 1.0)) throw ValidationError("config.epsilons: " + format_double(e) + " not in (0, 1)");
  }
  std::sort(cfg.epsilons.begin(), cfg.epsilons.end(), std::greater<>());
  if (std::adjacent_find(cfg.epsilons.begin(), cfg.epsilons.end()) != cfg.epsilons.end()) {
    throw ValidationError("config.epsilons contains duplicates");
  }
  if (!(cfg.tau_final > 0.0)) throw ValidationError("config.tau_final must be positive");
  if (cfg.tau_samples < 1) throw ValidationError("config.tau_samples must be >= 1");
  if (cfg.ks.empty()) throw ValidationError("config.k must list at least one order");
  for (int k : cfg.ks) {
    if (k < 0 || k > 4) throw ValidationError("config.k: order " + std::to_string(k) + " not in [0, 4]");
  }
  if (cfg.monitor_k < 0 || cfg.monitor_k > 4) throw ValidationError("config.monitor.k not in [0, 4]");
  if (!(cfg.envelope_factor > 1.0)) throw ValidationError("config.monitor.envelope_factor must exceed 1");
  if (cfg.frames.empty()) throw ValidationError("config.frames must not be empty");
  if (std::set<Frame>(cfg.frames.begin(), cfg.frames.end()).size() != cfg.frames.size()) {
    throw ValidationError("config.frames contains duplicates");
  }
  if (!(cfg.grid.slow_spacing > 0.0)) throw ValidationError("config.grid.slow_spacing must be positive");
  if (!(cfg.grid.margin >= 0.0)) throw ValidationError("config.grid.margin must be >= 0");
  if (cfg.grid.slow_length && !(*cfg.grid.slow_length > 0.0)) {
    throw ValidationError("config.grid.slow_length must be positive");
  }
  if (!(cfg.solver.gp_dt > 0.0)) throw ValidationError("config.solver.gp_dt must be positive");
  if (!(cfg.solver.kdv_dtau > 0.0)) throw ValidationError("config.solver.kdv_dtau must be positive");
  if (!(cfg.solver.resolution_tol > 0.0)) throw ValidationError("config.solver.resolution_tol must be positive");
  if (!(cfg.solver.kdv_cfl > 0.0)) throw ValidationError("config.solver.kdv_cfl must be positive");
  if (!(cfg.wave.time_factor > 0.0)) throw ValidationError("config.wave.time_factor must be positive");
  if (cfg.wave.samples < 2) throw ValidationError("config.wave.samples must be >= 2");
  if (!(cfg.wave.product > 0.0)) throw ValidationError("config.wave.product must be positive");
  if (!(cfg.wave.fixed_time > 0.0)) throw ValidationError("config.wave.fixed_time must be positive");
  if (!(cfg.residual.epsilon > 0.0 && cfg.residual.epsilon < 1.0)) {
    throw ValidationError("config.residual.epsilon not in (0, 1)");
  }
  if (!(cfg.residual.dtau > 0.0)) throw ValidationError("config.residual.dtau must be positive");
  if (!(cfg.residual.tau_center >= cfg.residual.dtau)) {
    throw ValidationError("config.residual.tau_center must be >= dtau");
  }
  if (cfg.residual.substeps < 1) throw ValidationError("config.residual.substeps must be >= 1");
  if (cfg.workers < 0) throw ValidationError("config.workers must be >= 0");
  // Unknown preset names and parameters fail here rather than inside a worker.
  (void)make_preset(cfg.preset.name, cfg.preset.params, SpectralGrid(64.0, 64),
                    cfg.epsilons.empty() ? 0.1 : cfg.epsilons.back());
}

json to_json(const StudyConfig& cfg) {
  json j;
  j["version"] = cfg.version;
  j["study"] = cfg.study;
  j["epsilons"] = cfg.epsilons;
  j["tau_final"] = cfg.tau_final;
  j["tau_samples"] = cfg.tau_samples;
  j["k"] = cfg.ks;
  json frames = json::array();
  for (Frame f : cfg.frames) frames.push_back(std::string(frame_name(f)));
  j["frames"] = frames;
  json params = json::object();
  for (const auto& [k, v] : cfg.preset.params) params[k] = v;
  j["preset"] = {{"name", cfg.preset.name}, {"params", params}};
  j["grid"] = {{"slow_spacing", cfg.grid.slow_spacing}, {"margin", cfg.grid.margin}};
  j["grid"]["slow_length"] = cfg.grid.slow_length ? json(*cfg.grid.slow_length) : json(nullptr);
  j["solver"] = {{"gp_dt", cfg.solver.gp_dt},
                 {"kdv_dtau", cfg.solver.kdv_dtau},
                 {"check_every", cfg.solver.check_every},
                 {"resolution_tol", cfg.solver.resolution_tol},
                 {"kdv_cfl", cfg.solver.kdv_cfl}};
  j["wave"] = {{"time_factor", cfg.wave.time_factor},
               {"samples", cfg.wave.samples},
               {"product", cfg.wave.product},
               {"fixed_time", cfg.wave.fixed_time}};
  j["residual"] = {{"epsilon", cfg.residual.epsilon},
                   {"tau_center", cfg.residual.tau_center},
                   {"dtau", cfg.residual.dtau},
                   {"substeps", cfg.residual.substeps}};
  j["monitor"] = {{"k", cfg.monitor_k}, {"envelope_factor", cfg.envelope_factor}};
  j["output_dir"] = cfg.output_dir;
  j["workers"] = cfg.workers;
  return j;
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config", path);
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path + ": parse error at byte " + std::to_string(e.byte) + ": " +
                          e.what());
  }
  try {
    return study_config_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::vector<double> tau_grid(const StudyConfig& cfg) {
  std::vector<double> t(static_cast<std::size_t>(cfg.tau_samples) + 1);
  for (std::size_t j = 0; j < t.size(); ++j) {
    t[j] = cfg.tau_final * static_cast<double>(j) / static_cast<double>(cfg.tau_samples);
  }
  return t;
}

}  // namespace gpkdv
