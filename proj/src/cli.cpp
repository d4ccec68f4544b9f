#include "gpkdv/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>

#include "gpkdv/csv.hpp"
#include "gpkdv/errors.hpp"
#include "gpkdv/experiments.hpp"
#include "gpkdv/kdv.hpp"
#include "gpkdv/snapshot.hpp"

namespace gpkdv {

namespace {

struct Options {
  std::string config;
  std::string out;
  int workers = -1;
  std::string preset;
  double epsilon = 0.0;
  bool verbose = false;
};

struct Context {
  StudyConfig cfg;
  std::string out_dir;
  bool verbose = false;
  std::ostream& out;
  std::ostream& err;

  void log(const std::string& msg) const {
    if (verbose) err << "gpkdv: " << msg << '\n';
  }
  std::string path(const char* name) const { return (std::filesystem::path(out_dir) / name).string(); }
};

StudyConfig resolve_config(const Options& o, const std::string& study) {
  StudyConfig cfg = o.config.empty() ? StudyConfig{} : load_study_config(o.config);
  if (cfg.study.empty()) cfg.study = study;
  if (!o.preset.empty() && o.preset != cfg.preset.name) cfg.preset = {o.preset, {}};
  if (o.epsilon != 0.0) {
    cfg.epsilons = {o.epsilon};
    cfg.residual.epsilon = o.epsilon;
  }
  if (o.workers >= 0) cfg.workers = o.workers;
  validate(cfg);
  return cfg;
}

std::string resolve_out(const Options& o, const StudyConfig& cfg) {
  if (!o.out.empty()) return o.out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("GPKDV_OUT"); env != nullptr && *env != '\0') return env;
  return "gpkdv-out";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory", dir);
}

double first_epsilon(const StudyConfig& cfg) {
  if (cfg.epsilons.empty()) throw ValidationError("config.epsilons is empty; pass --epsilon");
  return cfg.epsilons.front();
}

void print_checks(const nlohmann::json& summary, std::ostream& out) {
  for (const auto& c : summary.at("checks")) {
    out << (c.at("pass").get<bool>() ? "PASS " : "FAIL ") << c.at("name").get<std::string>() << " = "
        << c.at("value").dump() << " in [" << c.at("low").dump() << ", " << c.at("high").dump() << "]\n";
  }
}

// GP run of the first epsilon with the log of invariants and slow-frame records at
// every tau sample.
void gp_run(const Context& ctx, const char* log_name) {
  const auto& cfg = ctx.cfg;
  const double eps = first_epsilon(cfg);
  const auto taus = tau_grid(cfg);
  const RunGrids grids = run_grids(cfg.grid, eps, fast_time(taus.back(), eps));
  const auto data = make_preset(cfg.preset.name, cfg.preset.params, grids.slow, eps);
  ctx.log("preset " + cfg.preset.name + ", eps = " + format_double(eps) + ", " + std::to_string(grids.fast.size()) +
          " points, fast length " + format_double(grids.fast.length()));
  GpState state = build_initial_data(data.n0, data.w0, eps, grids.fast);
  GpOptions opts;
  opts.resolution_tol = cfg.solver.resolution_tol;
  opts.check_every = cfg.solver.check_every;
  opts.label = "eps=" + format_double(eps);

  std::vector<GpLogRecord> log;
  std::vector<std::vector<SlowFrameRecord>> frames(cfg.frames.size());
  for (double tau : taus) {
    const double t = fast_time(tau, eps);
    if (t > state.time) state = evolve_gp(state, cfg.solver.gp_dt, t, opts);
    log.push_back(gp_log_record(state));
    for (std::size_t f = 0; f < cfg.frames.size(); ++f) {
      SlowFrame sf = extract_slow_frame(state, eps, cfg.frames[f], grids.slow, true);
      sf.tau = tau;
      frames[f].push_back(slow_frame_record(sf, cfg.monitor_k));
    }
    ctx.log("t = " + format_double(state.time) + " (tau = " + format_double(tau) + ")");
  }
  ensure_dir(ctx.out_dir);
  write_gp_log(ctx.path(log_name), log);
  for (std::size_t f = 0; f < cfg.frames.size(); ++f) {
    const std::string name = "slow_frame_" + std::string(frame_name(cfg.frames[f])) + ".csv";
    write_slow_frame_log(ctx.path(name.c_str()), frames[f]);
  }
  write_snapshot(ctx.path("psi_final.snap"), {state.psi, state.time, {{"epsilon", format_double(eps)},
                                                                     {"preset", cfg.preset.name}}});
  const auto& a = log.front();
  const auto& b = log.back();
  ctx.out << "t_final " << format_double(b.t) << "\nE " << format_double(a.e) << " -> " << format_double(b.e)
          << "\nm_plus " << format_double(a.m_plus) << " -> " << format_double(b.m_plus) << "\nm_minus "
          << format_double(a.m_minus) << " -> " << format_double(b.m_minus) << '\n';
}

int cmd_simulate_gp(const Context& ctx) {
  gp_run(ctx, "gp_log.csv");
  return kExitOk;
}

int cmd_simulate_kdv(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double eps = first_epsilon(cfg);
  const auto taus = tau_grid(cfg);
  const RunGrids grids = run_grids(cfg.grid, eps, fast_time(taus.back(), eps));
  const auto data = make_preset(cfg.preset.name, cfg.preset.params, grids.slow, eps);
  ensure_dir(ctx.out_dir);
  KdvOptions opts;
  opts.cfl_bound = cfg.solver.kdv_cfl;
  for (Frame fr : cfg.frames) {
    // U = (N + Theta_x)/2 in frame minus, (N - Theta_x)/2 in frame plus.
    const double s = fr == Frame::minus ? 1.0 : -1.0;
    KdvState st{0.5 * (data.n0 + s * data.w0), 0.0, fr == Frame::minus ? 1 : -1};
    opts.label = std::string("kdv ") + std::string(frame_name(fr));
    std::vector<KdvLogRecord> log;
    for (double tau : taus) {
      if (tau > st.tau) st = evolve_kdv(st, cfg.solver.kdv_dtau, tau, opts);
      log.push_back(kdv_log_record(st));
    }
    const std::string f(frame_name(fr));
    write_kdv_log(ctx.path(("kdv_log_" + f + ".csv").c_str()), log);
    write_snapshot(ctx.path(("u_final_" + f + ".snap").c_str()), {st.u, st.tau, {{"frame", f}}});
    ctx.out << "frame " << f << ": tau_final " << format_double(st.tau) << ", I2 "
            << format_double(log.front().inv.i2) << " -> " << format_double(log.back().inv.i2) << '\n';
  }
  return kExitOk;
}

int cmd_study(const Context& ctx, const std::string& which) {
  nlohmann::json summary;
  if (which == "wave-limit") {
    const auto r = wave_limit_study(ctx.cfg);
    write_report(r, ctx.out_dir);
    summary = summary_json(r);
    for (const auto& run : r.runs) ctx.log(run.label + ": " + format_double(run.wall_seconds) + " s");
    if (r.product_fit) ctx.out << "product_exponent " << format_double(r.product_fit->slope) << '\n';
    if (r.fixed_time_fit) ctx.out << "fixed_time_exponent " << format_double(r.fixed_time_fit->slope) << '\n';
  } else {
    const auto r = which == "convergence" ? kdv_convergence_study(ctx.cfg) : unidirectional_study(ctx.cfg);
    write_report(r, ctx.out_dir);
    summary = summary_json(r);
    for (const auto& run : r.runs) ctx.log(run.label + ": " + format_double(run.wall_seconds) + " s");
    ctx.out << "fitted_order " << summary.at("fitted_order").dump() << '\n';
  }
  print_checks(summary, ctx.out);
  ctx.out << "report written to " << ctx.out_dir << '\n';
  return kExitOk;
}

int cmd_invariants(const Context& ctx) {
  gp_run(ctx, "invariants.csv");
  const auto r = residual_refinement_study(ctx.cfg);
  write_report(r, ctx.out_dir);
  ctx.out << "slow-system residual refinement at eps = " << format_double(ctx.cfg.residual.epsilon) << '\n';
  print_checks(summary_json(r), ctx.out);
  return kExitOk;
}

int cmd_inspect(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  ctx.out << to_json(cfg).dump(2) << "\n\npresets:\n";
  for (const auto& p : preset_catalog()) {
    ctx.out << "  " << std::left << std::setw(14) << p.name << p.description << "\n  " << std::setw(14) << ""
            << "[" << p.hypothesis << "]\n";
  }
  const auto taus = tau_grid(cfg);
  ctx.out << "\nruns:\n";
  for (double eps : cfg.epsilons) {
    const double t = fast_time(taus.back(), eps);
    const RunGrids g = run_grids(cfg.grid, eps, t);
    const auto data = make_preset(cfg.preset.name, cfg.preset.params, g.slow, eps);
    const double travel = 2.0 * std::sqrt(2.0) * eps * t;
    const double support = support_radius(data.n0, data.w0);
    ctx.out << "  eps=" << format_double(eps) << "  t_max=" << format_double(t) << "  slow_length="
            << format_double(g.slow.length()) << "  points=" << g.slow.size() << "  gp_steps~"
            << static_cast<long long>(std::ceil(t / cfg.solver.gp_dt)) << "  horizon="
            << (travel + 2.0 * support <= g.slow.length() ? "ok" : "exceeded") << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gross-Pitaevskii long-wave / KdV approximation studies", "gpkdv"};
  app.require_subcommand(1, 1);
  Options o;

  struct Sub {
    const char* name;
    const char* help;
    bool needs_config;
  };
  const std::vector<Sub> subs = {
      {"simulate-gp", "Evolve GP from a preset; write the invariant log, slow-frame logs and final state", false},
      {"simulate-kdv", "Evolve the KdV equations of both frames from a preset", false},
      {"convergence", "Epsilon sweep of the KdV approximation error in both frames", true},
      {"unidirectional", "Epsilon sweep of the one-way approximation of N and Theta_x", true},
      {"wave-limit", "Compare GP with the free wave equation on the t = O(1/eps) scale", true},
      {"invariants", "GP invariant log plus slow-system residual refinement", false},
      {"inspect", "Print the resolved config, the preset catalog and the run plan", false},
  };
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    auto* c = sub->add_option("--config", o.config, "Study config (JSON)");
    if (s.needs_config) c->required();
    sub->add_option("--out", o.out, "Output directory (default: config output_dir, then $GPKDV_OUT)");
    sub->add_option("--workers", o.workers, "Parallel epsilon runs (0: hardware threads)")->check(CLI::NonNegativeNumber);
    sub->add_option("--preset", o.preset, "Override the initial-data preset");
    sub->add_option("--epsilon", o.epsilon, "Run a single epsilon")->check(CLI::Range(0.0, 1.0));
    sub->add_flag("-v,--verbose", o.verbose, "Progress on standard error");
  }

  std::vector<std::string> argv_store{"gpkdv"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const StudyConfig cfg = resolve_config(o, name);
    Context ctx{cfg, resolve_out(o, cfg), o.verbose, out, err};
    if (name == "simulate-gp") return cmd_simulate_gp(ctx);
    if (name == "simulate-kdv") return cmd_simulate_kdv(ctx);
    if (name == "invariants") return cmd_invariants(ctx);
    if (name == "inspect") return cmd_inspect(ctx);
    return cmd_study(ctx, name);
  } catch (const ValidationError& e) {
    err << "gpkdv " << name << ": invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "gpkdv " << name << ": numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "gpkdv " << name << ": I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const nlohmann::json::exception& e) {
    err << "gpkdv " << name << ": invalid input: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace gpkdv
