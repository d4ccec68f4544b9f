#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "gpkdv/csv.hpp"
#include "gpkdv/errors.hpp"
#include "gpkdv/experiments.hpp"

namespace gpkdv {

namespace {

using nlohmann::json;

// Non-finite numbers become null so the summary stays valid JSON.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory", dir);
}

std::string join(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path);
  out << j.dump(2) << '\n';
  out.close();
  if (!out) throw IoError("write failed", path);
}

json check(const std::string& name, double value, double low, double high) {
  return {{"name", name}, {"value", num(value)}, {"low", num(low)}, {"high", num(high)},
          {"pass", std::isfinite(value) && value >= low && value <= high}};
}

void write_runs(const std::vector<RunInfo>& runs, const std::string& dir, bool timings) {
  std::vector<std::string> header{"epsilon", "label", "slow_length", "points", "t_final", "gp_steps"};
  if (timings) header.push_back("wall_seconds");
  CsvWriter w(join(dir, "runs.csv"), header);
  for (const auto& r : runs) {
    w.cell(r.epsilon).cell(r.label).cell(r.slow_length).cell(static_cast<long long>(r.points));
    w.cell(r.t_final).cell(static_cast<long long>(r.gp_steps));
    if (timings) w.cell(r.wall_seconds);
    w.end_row();
  }
  w.close();
}

json runs_json(const std::vector<RunInfo>& runs) {
  json a = json::array();
  for (const auto& r : runs) {
    a.push_back({{"epsilon", r.epsilon}, {"label", r.label}, {"slow_length", r.slow_length},
                 {"points", r.points}, {"t_final", r.t_final}, {"gp_steps", r.gp_steps}});
  }
  return a;
}

json line_json(const LineFit& f) {
  return {{"slope", num(f.slope)}, {"intercept", num(f.intercept)}, {"r2", num(f.r2)}};
}

const OrderFit* find_order(const ConvergenceReport& r, Frame f, int k, double tau, const std::string& q) {
  for (const auto& o : r.orders) {
    if (o.frame == f && o.k == k && o.tau == tau && o.quantity == q) return &o;
  }
  return nullptr;
}

}  // namespace

nlohmann::json summary_json(const ConvergenceReport& r) {
  json j;
  j["format"] = "gpkdv-report";
  j["version"] = kReportVersion;
  j["study"] = r.study;
  j["config"] = to_json(r.config);
  j["runs"] = runs_json(r.runs);

  json orders = json::array();
  for (const auto& o : r.orders) {
    orders.push_back({{"frame", frame_name(o.frame)}, {"k", o.k}, {"tau", o.tau},
                      {"quantity", o.quantity}, {"order", num(o.order)}, {"r2", num(o.r2)}});
  }
  j["orders"] = orders;

  // Headline: order at the final tau, worst case over frame and k.
  json headline = nullptr;
  json checks = json::array();
  const double tf = r.config.tau_final;
  for (Frame f : r.config.frames) {
    for (int k : r.config.ks) {
      const std::string q = r.study == "unidirectional" ? "n_error" : "hk_error";
      // With a fixed counter-wave the error plateaus instead of following eps^2.
      const bool plateau = std::any_of(r.plateaus.begin(), r.plateaus.end(),
                                       [&](const PlateauSummary& p) { return p.frame == f && p.k == k; });
      if (plateau) continue;
      if (const OrderFit* o = find_order(r, f, k, tf, q)) {
        const std::string name = "fitted_order/" + std::string(frame_name(f)) + "/k=" + std::to_string(k) + "/" + q;
        checks.push_back(check(name, o->order, 1.7, 2.3));
        if (headline.is_null() || std::abs(o->order - 2.0) > std::abs(headline.get<double>() - 2.0)) {
          headline = num(o->order);
        }
      }
    }
  }
  j["fitted_order"] = headline;

  json env = json::array();
  for (const auto& e : r.envelopes) {
    env.push_back({{"frame", frame_name(e.frame)}, {"k", e.k}, {"log_c", num(e.fit.log_c)},
                   {"growth", num(e.fit.k)}, {"c_bound", num(e.fit.c_bound)},
                   {"max_residual", num(e.fit.max_residual)}, {"min_residual", num(e.fit.min_residual)},
                   {"spread", num(e.fit.spread)}, {"points", e.fit.points}, {"collapse", num(e.collapse)}});
    if (r.study == "convergence" && r.config.epsilons.size() >= 2) {
      checks.push_back(check("envelope_spread/" + std::string(frame_name(e.frame)) + "/k=" + std::to_string(e.k),
                             e.fit.spread, 1.0, 2.0));
    }
  }
  j["envelopes"] = env;

  json pl = json::array();
  for (const auto& p : r.plateaus) {
    pl.push_back({{"frame", frame_name(p.frame)}, {"k", p.k}, {"v0_norm", num(p.v0_norm)},
                  {"ratios", p.ratios}, {"spread", num(p.spread)}, {"eps2_coef", num(p.eps2_coef)},
                  {"plateau", num(p.plateau)}});
    if (p.ratios.size() >= 2) {
      checks.push_back(check("plateau_spread/" + std::string(frame_name(p.frame)) + "/k=" + std::to_string(p.k),
                             p.spread, 1.0, 1.3));
    }
  }
  j["plateaus"] = pl;

  json series = json::array();
  for (const auto& s : r.bounds.series) {
    series.push_back({{"epsilon", s.epsilon}, {"series", s.series}, {"initial", num(s.initial)},
                      {"max_ratio", num(s.max_ratio)}, {"growth_constant", num(s.growth_constant)},
                      {"flagged", s.flagged}});
  }
  j["bounds"] = {{"k", r.bounds.k}, {"series", series}, {"epsilons", r.bounds.epsilons},
                 {"m_slopes", r.bounds.m_slopes}, {"m_slope", num(r.bounds.m_slope)},
                 {"m_slope_spread", num(r.bounds.m_slope_spread)}};
  if (r.bounds.m_slopes.size() >= 2) {
    checks.push_back(check("m_slope_spread", r.bounds.m_slope_spread, 1.0, 1.5));
  }

  json audit = json::array();
  for (const auto& a : r.audit) {
    audit.push_back({{"epsilon", a.epsilon}, {"energy", num(a.energy)}, {"energy_drift", num(a.energy_drift)},
                     {"e2_drift", num(a.e2_drift)}, {"e3_drift", num(a.e3_drift)}, {"e4_drift", num(a.e4_drift)},
                     {"m_plus_drift", num(a.m_plus_drift)}, {"m_minus_drift", num(a.m_minus_drift)}});
  }
  j["audit"] = audit;
  j["validity_horizon"] =
      "tau_final is O(1), i.e. t = O(eps^-3); the o(|log eps| / eps^3) horizon is not distinguishable at these eps";
  j["checks"] = checks;
  return j;
}

nlohmann::json summary_json(const WaveLimitReport& r) {
  json j;
  j["format"] = "gpkdv-report";
  j["version"] = kReportVersion;
  j["study"] = "wave-limit";
  j["config"] = to_json(r.config);
  j["runs"] = runs_json(r.runs);
  json checks = json::array();
  json per = json::array();
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    per.push_back({{"epsilon", r.epsilons[i]}, {"linear_fit", line_json(r.linear_fits[i])},
                   {"product_error", num(r.product_errors[i])}, {"fixed_time_error", num(r.fixed_time_errors[i])}});
    checks.push_back(check("linear_r2/eps=" + format_double(r.epsilons[i]), r.linear_fits[i].r2, 0.95, 1.0));
  }
  j["per_epsilon"] = per;
  j["product_fit"] = r.product_fit ? line_json(*r.product_fit) : json(nullptr);
  j["fixed_time_fit"] = r.fixed_time_fit ? line_json(*r.fixed_time_fit) : json(nullptr);
  if (r.product_fit) checks.push_back(check("product_exponent", r.product_fit->slope, 2.5, 3.5));
  j["checks"] = checks;
  return j;
}

nlohmann::json summary_json(const ResidualReport& r) {
  json j;
  j["format"] = "gpkdv-report";
  j["version"] = kReportVersion;
  j["study"] = "residuals";
  j["config"] = to_json(r.config);
  j["transport"] = num(r.transport);
  j["v_forcing"] = num(r.v_forcing);
  json rows = json::array();
  json checks = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"frame", frame_name(row.frame)}, {"equation", row.equation}, {"coarse", num(row.coarse)},
                    {"fine", num(row.fine)}, {"ratio", num(row.ratio)}});
    checks.push_back(check("refinement_ratio/" + std::string(frame_name(row.frame)) + "/" + row.equation,
                           row.ratio, 3.0, 5.0));
  }
  j["rows"] = rows;
  j["checks"] = checks;
  return j;
}

void write_report(const ConvergenceReport& r, const std::string& dir, bool include_timings) {
  ensure_dir(dir);
  write_runs(r.runs, dir, include_timings);
  {
    CsvWriter w(join(dir, "errors.csv"), {"epsilon", "tau", "frame", "k", "hk_error", "cumulative", "n_error",
                                          "w_error", "v_norm", "fitted_order"});
    const std::string q = r.study == "unidirectional" ? "n_error" : "hk_error";
    for (const auto& e : r.errors) {
      w.cell(e.epsilon).cell(e.tau).cell(std::string(frame_name(e.frame))).cell(static_cast<long long>(e.k));
      w.cell(e.hk_error).cell(e.cumulative).cell(e.n_error).cell(e.w_error).cell(e.v_norm);
      const OrderFit* o = find_order(r, e.frame, e.k, e.tau, q);
      if (o) {
        w.cell(o->order);
      } else {
        w.cell(std::string());
      }
      w.end_row();
    }
    w.close();
  }
  {
    CsvWriter w(join(dir, "audit.csv"), {"epsilon", "energy", "energy_drift", "e2_drift", "e3_drift", "e4_drift",
                                         "m_plus_drift", "m_minus_drift"});
    for (const auto& a : r.audit) {
      w.cell(a.epsilon).cell(a.energy).cell(a.energy_drift).cell(a.e2_drift).cell(a.e3_drift).cell(a.e4_drift);
      w.cell(a.m_plus_drift).cell(a.m_minus_drift);
      w.end_row();
    }
    w.close();
  }
  {
    CsvWriter w(join(dir, "bounds.csv"),
                {"epsilon", "tau", "hk_N", "eps_dk1_N", "hk_dTheta", "m_N", "m_dTheta", "gamma"});
    for (const auto& s : r.bounds.samples) {
      w.cell(s.epsilon).cell(s.tau).cell(s.hk_n).cell(s.eps_dk1_n).cell(s.hk_dtheta).cell(s.m_n).cell(s.m_dtheta);
      w.cell(s.gamma);
      w.end_row();
    }
    w.close();
  }
  write_json(join(dir, "summary.json"), summary_json(r));
}

void write_report(const WaveLimitReport& r, const std::string& dir, bool include_timings) {
  ensure_dir(dir);
  write_runs(r.runs, dir, include_timings);
  CsvWriter w(join(dir, "wave.csv"), {"epsilon", "t", "error"});
  for (const auto& s : r.samples) {
    w.cell(s.epsilon).cell(s.t).cell(s.error);
    w.end_row();
  }
  w.close();
  write_json(join(dir, "summary.json"), summary_json(r));
}

void write_report(const ResidualReport& r, const std::string& dir) {
  ensure_dir(dir);
  CsvWriter w(join(dir, "residuals.csv"), {"frame", "equation", "coarse", "fine", "ratio"});
  for (const auto& row : r.rows) {
    w.cell(std::string(frame_name(row.frame))).cell(row.equation).cell(row.coarse).cell(row.fine).cell(row.ratio);
    w.end_row();
  }
  w.close();
  write_json(join(dir, "summary.json"), summary_json(r));
}

}  // namespace gpkdv
