#include "gpkdv/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

#include "gpkdv/csv.hpp"
#include "gpkdv/kdv.hpp"
#include "gpkdv/spectral.hpp"

namespace gpkdv {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

std::string eps_label(double eps) { return "eps=" + format_double(eps); }

std::size_t next_pow2(double x) {
  std::size_t n = 2;
  while (static_cast<double>(n) < x) n *= 2;
  return n;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; results keep index order and
// the first failure by index is rethrown.
template <typename R, typename F>
std::vector<R> parallel_map(std::size_t n, int workers, F&& fn) {
  std::vector<std::optional<R>> out(n);
  std::vector<std::exception_ptr> errs(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i].emplace(fn(i));
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::size_t w = workers > 0 ? static_cast<std::size_t>(workers)
                              : std::max(1u, std::thread::hardware_concurrency());
  w = std::min(w, n);
  if (w <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errs) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> result;
  result.reserve(n);
  for (auto& o : out) result.push_back(std::move(*o));
  return result;
}

double relative_drift(double a, double b) {
  return a != 0.0 ? std::abs(b - a) / std::abs(a) : std::abs(b - a);
}

std::size_t step_count(double span, double dt) {
  return span > 0.0 ? static_cast<std::size_t>(std::ceil(span / dt - 1e-9)) : 0;
}

struct Snapshot0 {
  double energy = 0.0;
  HigherInvariants higher;
  GeneralizedMass mass;
};

Snapshot0 invariants_of(const GpState& s) {
  return {energy(s), higher_invariants(s), generalized_mass(s)};
}

InvariantAudit audit_of(double eps, const Snapshot0& a, const Snapshot0& b) {
  InvariantAudit r;
  r.epsilon = eps;
  r.energy = a.energy;
  r.energy_drift = relative_drift(a.energy, b.energy);
  r.e2_drift = relative_drift(a.higher.e2, b.higher.e2);
  r.e3_drift = relative_drift(a.higher.e3, b.higher.e3);
  r.e4_drift = relative_drift(a.higher.e4, b.higher.e4);
  r.m_plus_drift = relative_drift(a.mass.m_plus, b.mass.m_plus);
  r.m_minus_drift = relative_drift(a.mass.m_minus, b.mass.m_minus);
  return r;
}

GpOptions gp_options(const SolverConfig& s, const std::string& label) {
  GpOptions o;
  o.resolution_tol = s.resolution_tol;
  o.check_every = s.check_every;
  o.label = label;
  return o;
}

KdvOptions kdv_options(const SolverConfig& s, const std::string& label) {
  KdvOptions o;
  o.cfl_bound = s.kdv_cfl;
  o.label = label;
  return o;
}

// One GP run for one epsilon, pulled back to each requested frame at each tau sample.
struct EpsRun {
  double epsilon = 0.0;
  RunGrids grids;
  std::vector<std::vector<SlowFrame>> frames;  // [frame index][tau index]
  InvariantAudit audit;
  RunInfo info;
};

void check_horizon(const PresetData& data, const SpectralGrid& slow, double eps, double t_max,
                   const std::string& label) {
  const double r = support_radius(data.n0, data.w0);
  const double travel = 2.0 * kSqrt2 * eps * t_max;
  if (travel + 2.0 * r > slow.length()) {
    throw ValidationError("[" + label + "] counter-propagating waves meet across the periodic seam: " +
                          "travel " + format_double(travel) + " + 2 * support " + format_double(r) +
                          " exceeds the slow window " + format_double(slow.length()));
  }
}

EpsRun simulate(const StudyConfig& cfg, double eps, const std::vector<double>& taus) {
  const auto start = std::chrono::steady_clock::now();
  const std::string label = eps_label(eps);
  EpsRun run;
  run.epsilon = eps;
  const double t_max = fast_time(taus.back(), eps);
  run.grids = run_grids(cfg.grid, eps, t_max);
  const auto& slow = run.grids.slow;
  const auto data = make_preset(cfg.preset.name, cfg.preset.params, slow, eps);
  check_horizon(data, slow, eps, t_max, label);

  GpState state = build_initial_data(data.n0, data.w0, eps, run.grids.fast);
  const Snapshot0 first = invariants_of(state);
  const GpOptions opts = gp_options(cfg.solver, label);
  run.frames.resize(cfg.frames.size());
  std::size_t steps = 0;
  for (double tau : taus) {
    const double t = fast_time(tau, eps);
    if (t > state.time) {
      steps += step_count(t - state.time, cfg.solver.gp_dt);
      state = evolve_gp(state, cfg.solver.gp_dt, t, opts);
    }
    for (std::size_t f = 0; f < cfg.frames.size(); ++f) {
      SlowFrame sf = extract_slow_frame(state, eps, cfg.frames[f], slow, true);
      sf.tau = tau;
      run.frames[f].push_back(std::move(sf));
    }
  }
  run.audit = audit_of(eps, first, invariants_of(state));
  run.info.epsilon = eps;
  run.info.label = label;
  run.info.slow_length = slow.length();
  run.info.points = slow.size();
  run.info.t_final = state.time;
  run.info.gp_steps = steps;
  run.info.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

int kdv_sign(Frame f) { return f == Frame::minus ? 1 : -1; }

// KdV evolution of u0 to every tau sample; element 0 is u0.
std::vector<RealField> kdv_series(const RealField& u0, Frame frame, const std::vector<double>& taus,
                                  const StudyConfig& cfg, const std::string& label) {
  std::vector<RealField> out;
  KdvState ks{u0, 0.0, kdv_sign(frame)};
  const KdvOptions opts = kdv_options(cfg.solver, label);
  for (double tau : taus) {
    if (tau > ks.tau) ks = evolve_kdv(ks, cfg.solver.kdv_dtau, tau, opts);
    out.push_back(ks.u);
  }
  return out;
}

double dk_norm2(const RealField& f, int k) {
  const double n = l2_norm(k == 0 ? f : deriv(f, k));
  return n * n;
}

void add_cumulative(std::vector<ErrorSample>& rows, const std::vector<double>& dk2) {
  double acc = 0.0;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (j > 0) acc += 0.5 * (dk2[j] + dk2[j - 1]) * (rows[j].tau - rows[j - 1].tau);
    rows[j].cumulative = acc;
  }
}

BoundReport merge_bounds(std::vector<BoundReport> parts, int k) {
  BoundReport all;
  all.k = k;
  for (auto& p : parts) {
    all.samples.insert(all.samples.end(), p.samples.begin(), p.samples.end());
    all.series.insert(all.series.end(), p.series.begin(), p.series.end());
    all.epsilons.insert(all.epsilons.end(), p.epsilons.begin(), p.epsilons.end());
    all.m_slopes.insert(all.m_slopes.end(), p.m_slopes.begin(), p.m_slopes.end());
  }
  if (!all.m_slopes.empty()) {
    const auto [lo, hi] = std::minmax_element(all.m_slopes.begin(), all.m_slopes.end());
    all.m_slope = *hi;
    all.m_slope_spread = *lo > 0.0 ? *hi / *lo : (*hi > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  }
  return all;
}

// Order fits at every tau > 0 for each (frame, k), over the epsilon sweep.
void fit_orders(ConvergenceReport& rep, const std::vector<double>& taus, const std::string& quantity) {
  const auto& cfg = rep.config;
  if (cfg.epsilons.size() < 2) return;
  for (Frame fr : cfg.frames) {
    for (int k : cfg.ks) {
      for (double tau : taus) {
        if (tau == 0.0) continue;
        std::vector<double> eps;
        std::vector<double> err;
        for (const auto& e : rep.errors) {
          if (e.frame != fr || e.k != k || e.tau != tau) continue;
          eps.push_back(e.epsilon);
          err.push_back(quantity == "n_error" ? e.n_error : e.hk_error);
        }
        if (std::any_of(err.begin(), err.end(), [](double v) { return !(v > 0.0); })) continue;
        const LineFit lf = fit_order(eps, err);
        rep.orders.push_back({fr, k, tau, quantity, lf.slope, lf.r2});
      }
    }
  }
}

void fit_envelopes(ConvergenceReport& rep, const std::vector<double>& taus) {
  const auto& cfg = rep.config;
  if (cfg.epsilons.empty()) return;
  const double tau_min = 0.25 * cfg.tau_final;
  for (Frame fr : cfg.frames) {
    for (int k : cfg.ks) {
      std::vector<double> eps, tau, err, table;
      for (double e : cfg.epsilons) {
        for (double t : taus) {
          for (const auto& row : rep.errors) {
            if (row.frame == fr && row.k == k && row.epsilon == e && row.tau == t) {
              eps.push_back(e);
              tau.push_back(t);
              err.push_back(row.hk_error);
              table.push_back(row.hk_error);
            }
          }
        }
      }
      if (std::none_of(err.begin(), err.end(), [&](double v) { return v > 0.0; })) continue;
      EnvelopeSummary s;
      s.frame = fr;
      s.k = k;
      s.fit = fit_envelope(eps, tau, err, 2.0, tau_min);
      s.collapse = collapse_ratio(cfg.epsilons, taus, table, 2.0, tau_min);
      rep.envelopes.push_back(s);
    }
  }
}

}  // namespace

RunGrids run_grids(const GridConfig& g, double epsilon, double t_max) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  const double length = g.slow_length ? *g.slow_length : 2.0 * kSqrt2 * epsilon * t_max + 2.0 * g.margin;
  const std::size_t n = next_pow2(length / g.slow_spacing);
  SpectralGrid slow(length, n);
  return {slow, slow.scaled(1.0 / epsilon)};
}

double support_radius(const RealField& n0, const RealField& w0, double rel_tol) {
  require_same_grid(n0.grid, w0.grid, "support_radius");
  double peak = 0.0;
  for (std::size_t j = 0; j < n0.size(); ++j) peak = std::max(peak, std::abs(n0[j]) + std::abs(w0[j]));
  if (peak == 0.0) return 0.0;
  double r = 0.0;
  for (std::size_t j = 0; j < n0.size(); ++j) {
    if (std::abs(n0[j]) + std::abs(w0[j]) > rel_tol * peak) {
      r = std::max(r, std::abs(n0.grid.node(j) - n0.grid.center()));
    }
  }
  return r;
}

double gamma_functional(const SlowFrame& sf, int k) {
  const double e2 = sf.epsilon * sf.epsilon;
  const auto dn = derivatives(sf.n_field, 1);
  RealField q(sf.grid);  // N_x / M
  RealField m(sf.grid);
  for (std::size_t j = 0; j < q.size(); ++j) {
    m[j] = 1.0 - e2 * sf.n_field[j] / 6.0;
    if (!(m[j] > 0.0)) throw NumericalError("gamma functional: 1 - eps^2 N / 6 <= 0");
    q[j] = dn[1][j] / m[j];
  }
  const RealField dkn = k == 0 ? sf.n_field : deriv(sf.n_field, k);
  const RealField dkw = k == 0 ? sf.dtheta_field : deriv(sf.dtheta_field, k);
  const RealField dkq = k == 0 ? q : deriv(q, k);
  double acc = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    acc += dkn[j] * dkn[j] + m[j] * (dkw[j] * dkw[j] + 0.5 * e2 * dkq[j] * dkq[j]);
  }
  return acc * sf.grid.spacing();
}

BoundReport bound_monitor(const std::vector<SlowFrame>& series, int k, double envelope_factor) {
  BoundReport rep;
  rep.k = k;
  if (series.empty()) return rep;
  const double eps = series.front().epsilon;
  for (const auto& sf : series) {
    BoundSample s;
    s.epsilon = sf.epsilon;
    s.tau = sf.tau;
    s.hk_n = sobolev_norm(sf.n_field, k);
    s.eps_dk1_n = sf.epsilon * l2_norm(deriv(sf.n_field, k + 1));
    s.hk_dtheta = sobolev_norm(sf.dtheta_field, k);
    s.m_n = m_norm(sf.n_field);
    s.m_dtheta = m_norm(sf.dtheta_field);
    s.gamma = gamma_functional(sf, k);
    rep.samples.push_back(s);
  }
  const std::vector<std::pair<std::string, double BoundSample::*>> fields = {
      {"hk_N", &BoundSample::hk_n},   {"eps_dk1_N", &BoundSample::eps_dk1_n},
      {"hk_dTheta", &BoundSample::hk_dtheta}, {"m_N", &BoundSample::m_n},
      {"m_dTheta", &BoundSample::m_dtheta},   {"gamma", &BoundSample::gamma}};
  for (const auto& [name, member] : fields) {
    BoundSeries bs;
    bs.epsilon = eps;
    bs.series = name;
    // N and Theta_x are bounded as a pair; a vanishing initial component (W0 = 0 leaves
    // Theta_x^0 = 0) would otherwise flag any growth at all.
    const auto& s0 = rep.samples.front();
    if (name == "hk_N" || name == "hk_dTheta") {
      bs.initial = std::hypot(s0.hk_n, s0.hk_dtheta);
    } else if (name == "m_N" || name == "m_dTheta") {
      bs.initial = std::hypot(s0.m_n, s0.m_dtheta);
    } else {
      bs.initial = s0.*member;
    }
    for (const auto& s : rep.samples) {
      const double v = s.*member;
      if (bs.initial > 0.0) {
        bs.max_ratio = std::max(bs.max_ratio, v / bs.initial);
        const double dt = std::abs(s.tau - rep.samples.front().tau);
        if (dt > 0.0 && v > bs.initial) bs.growth_constant = std::max(bs.growth_constant, std::log(v / bs.initial) / dt);
      } else if (v > 0.0) {
        bs.max_ratio = std::numeric_limits<double>::infinity();
      }
    }
    bs.flagged = bs.max_ratio > envelope_factor;
    rep.series.push_back(bs);
  }
  std::vector<double> taus;
  std::vector<double> mn;
  for (const auto& s : rep.samples) {
    taus.push_back(s.tau);
    mn.push_back(s.m_n);
  }
  rep.epsilons.push_back(eps);
  rep.m_slopes.push_back(bounding_slope(taus, mn));
  rep.m_slope = rep.m_slopes.back();
  return rep;
}

ConvergenceReport kdv_convergence_study(const StudyConfig& cfg_in) {
  StudyConfig cfg = cfg_in;
  validate(cfg);
  ConvergenceReport rep;
  rep.study = "convergence";
  rep.config = cfg;
  const auto taus = tau_grid(cfg);

  struct Out {
    EpsRun run;
    std::vector<ErrorSample> errors;
    BoundReport bounds;
  };
  auto results = parallel_map<Out>(cfg.epsilons.size(), cfg.workers, [&](std::size_t i) {
    Out o;
    o.run = simulate(cfg, cfg.epsilons[i], taus);
    const double eps = cfg.epsilons[i];
    for (std::size_t f = 0; f < cfg.frames.size(); ++f) {
      const auto& frames = o.run.frames[f];
      const auto ref = kdv_series(frames.front().u_field, cfg.frames[f], taus, cfg, eps_label(eps));
      for (int k : cfg.ks) {
        std::vector<ErrorSample> rows;
        std::vector<double> dk2;
        for (std::size_t j = 0; j < taus.size(); ++j) {
          const RealField z = frames[j].u_field - ref[j];
          ErrorSample e;
          e.epsilon = eps;
          e.tau = taus[j];
          e.frame = cfg.frames[f];
          e.k = k;
          e.hk_error = sobolev_norm(z, k);
          e.v_norm = sobolev_norm(frames[j].v_field, k);
          rows.push_back(e);
          dk2.push_back(dk_norm2(z, k));
        }
        add_cumulative(rows, dk2);
        o.errors.insert(o.errors.end(), rows.begin(), rows.end());
      }
    }
    o.bounds = bound_monitor(o.run.frames.front(), cfg.monitor_k, cfg.envelope_factor);
    o.run.frames.clear();
    return o;
  });

  std::vector<BoundReport> bounds;
  for (auto& o : results) {
    rep.runs.push_back(o.run.info);
    rep.audit.push_back(o.run.audit);
    rep.errors.insert(rep.errors.end(), o.errors.begin(), o.errors.end());
    bounds.push_back(std::move(o.bounds));
  }
  rep.bounds = merge_bounds(std::move(bounds), cfg.monitor_k);
  fit_orders(rep, taus, "hk_error");
  fit_envelopes(rep, taus);
  return rep;
}

ConvergenceReport unidirectional_study(const StudyConfig& cfg_in) {
  StudyConfig cfg = cfg_in;
  validate(cfg);
  ConvergenceReport rep;
  rep.study = "unidirectional";
  rep.config = cfg;
  const auto taus = tau_grid(cfg);

  struct Out {
    EpsRun run;
    std::vector<ErrorSample> errors;
    BoundReport bounds;
  };
  auto results = parallel_map<Out>(cfg.epsilons.size(), cfg.workers, [&](std::size_t i) {
    Out o;
    const double eps = cfg.epsilons[i];
    const std::string label = eps_label(eps);
    o.run = simulate(cfg, eps, taus);
    for (std::size_t f = 0; f < cfg.frames.size(); ++f) {
      const Frame fr = cfg.frames[f];
      const auto& frames = o.run.frames[f];
      const auto n_ref = kdv_series(frames.front().n_field, fr, taus, cfg, label);
      // In frame plus Theta_x ~ -U, so -Theta_x follows the frame's KdV.
      const double s = fr == Frame::minus ? 1.0 : -1.0;
      auto w_ref = kdv_series(s * frames.front().dtheta_field, fr, taus, cfg, label);
      for (auto& w : w_ref) w = s * w;
      for (int k : cfg.ks) {
        std::vector<ErrorSample> rows;
        std::vector<double> dk2;
        for (std::size_t j = 0; j < taus.size(); ++j) {
          const RealField zn = frames[j].n_field - n_ref[j];
          const RealField zw = frames[j].dtheta_field - w_ref[j];
          ErrorSample e;
          e.epsilon = eps;
          e.tau = taus[j];
          e.frame = fr;
          e.k = k;
          e.n_error = sobolev_norm(zn, k);
          e.w_error = sobolev_norm(zw, k);
          e.hk_error = e.n_error + e.w_error;
          e.v_norm = sobolev_norm(frames[j].v_field, k);
          rows.push_back(e);
          dk2.push_back(dk_norm2(zn, k) + dk_norm2(zw, k));
        }
        add_cumulative(rows, dk2);
        o.errors.insert(o.errors.end(), rows.begin(), rows.end());
      }
    }
    o.bounds = bound_monitor(o.run.frames.front(), cfg.monitor_k, cfg.envelope_factor);
    o.run.frames.clear();
    return o;
  });

  std::vector<BoundReport> bounds;
  for (auto& o : results) {
    rep.runs.push_back(o.run.info);
    rep.audit.push_back(o.run.audit);
    rep.errors.insert(rep.errors.end(), o.errors.begin(), o.errors.end());
    bounds.push_back(std::move(o.bounds));
  }
  rep.bounds = merge_bounds(std::move(bounds), cfg.monitor_k);
  fit_orders(rep, taus, "hk_error");
  fit_orders(rep, taus, "n_error");
  fit_envelopes(rep, taus);

  // Plateau against the initial counter-wave.
  for (Frame fr : cfg.frames) {
    for (int k : cfg.ks) {
      PlateauSummary p;
      p.frame = fr;
      p.k = k;
      std::vector<double> e2;
      std::vector<double> err;
      for (double eps : cfg.epsilons) {
        double v0 = 0.0;
        double last = 0.0;
        for (const auto& row : rep.errors) {
          if (row.frame != fr || row.k != k || row.epsilon != eps) continue;
          if (row.tau == 0.0) v0 = row.v_norm;
          if (row.tau == cfg.tau_final) last = row.hk_error;
        }
        p.v0_norm = std::max(p.v0_norm, v0);
        // Below this the counter-wave is extraction round-off, not data.
        if (v0 > 1e-6) p.ratios.push_back(last / v0);
        e2.push_back(eps * eps);
        err.push_back(last);
      }
      if (p.ratios.empty()) continue;
      const auto [lo, hi] = std::minmax_element(p.ratios.begin(), p.ratios.end());
      p.spread = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
      if (e2.size() >= 2) {
        const LineFit lf = fit_line(e2, err);
        p.eps2_coef = lf.slope;
        p.plateau = lf.intercept;
      }
      rep.plateaus.push_back(p);
    }
  }
  return rep;
}

WaveLimitReport wave_limit_study(const StudyConfig& cfg_in) {
  StudyConfig cfg = cfg_in;
  validate(cfg);
  WaveLimitReport rep;
  rep.config = cfg;
  const int k = cfg.ks.front();

  struct Out {
    RunInfo info;
    std::vector<WaveSample> samples;
    LineFit linear;
    double product_error = 0.0;
    double fixed_time_error = 0.0;
  };
  auto results = parallel_map<Out>(cfg.epsilons.size(), cfg.workers, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    const double eps = cfg.epsilons[i];
    const std::string label = eps_label(eps);
    const double t_final = cfg.wave.time_factor / (eps * eps * eps);
    const double t_product = cfg.wave.product / eps;
    const double t_fixed = cfg.wave.fixed_time;
    std::vector<double> times;
    for (int j = 0; j <= cfg.wave.samples; ++j) times.push_back(t_final * j / cfg.wave.samples);
    times.push_back(t_product);
    times.push_back(t_fixed);
    std::vector<double> order = times;
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());

    const RunGrids grids = run_grids(cfg.grid, eps, order.back());
    const auto data = make_preset(cfg.preset.name, cfg.preset.params, grids.slow, eps);
    check_horizon(data, grids.slow, eps, order.back(), label);
    GpState state = build_initial_data(data.n0, data.w0, eps, grids.fast);
    const GpOptions opts = gp_options(cfg.solver, label);

    const double e2 = eps * eps;
    const SpectralGrid pb = grids.slow.scaled(1.0 / eps);
    auto lab = [&](const GpState& s) {
      const HydroFields h = madelung(s);
      RealField n(grids.slow), w(grids.slow);
      const RealField eta = resample(h.eta, pb, 0.0, true);
      const RealField dphi = resample(h.dphi, pb, 0.0, true);
      for (std::size_t j = 0; j < n.size(); ++j) {
        n[j] = 6.0 * eta[j] / e2;
        w[j] = 6.0 * kSqrt2 * dphi[j] / e2;
      }
      return std::pair{n, w};
    };
    const auto [n0, w0] = lab(state);
    const RealField right = 0.5 * (n0 - w0);  // N^+ = -W^+
    const RealField left = 0.5 * (n0 + w0);   // N^- = W^-

    Out o;
    std::size_t steps = 0;
    std::vector<std::pair<double, double>> err_at;
    for (double t : order) {
      if (t > state.time) {
        steps += step_count(t - state.time, cfg.solver.gp_dt);
        state = evolve_gp(state, cfg.solver.gp_dt, t, opts);
      }
      const auto [n, w] = lab(state);
      const double s = eps * t;
      const RealField rp = resample(right, grids.slow, -kSqrt2 * s, true);
      const RealField lm = resample(left, grids.slow, kSqrt2 * s, true);
      const RealField dn = n - (rp + lm);
      const RealField dw = w - (lm - rp);
      const double a = sobolev_norm(dn, k);
      const double b = sobolev_norm(dw, k);
      err_at.emplace_back(t, std::sqrt(a * a + b * b));
    }
    auto error_at = [&](double t) {
      for (const auto& [tt, e] : err_at) {
        if (tt == t) return e;
      }
      return std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<double> ts, es;
    for (int j = 0; j <= cfg.wave.samples; ++j) {
      const double t = times[static_cast<std::size_t>(j)];
      o.samples.push_back({eps, t, error_at(t)});
      ts.push_back(t);
      es.push_back(error_at(t));
    }
    o.linear = fit_line(ts, es);
    o.product_error = error_at(t_product);
    o.fixed_time_error = error_at(t_fixed);
    o.info.epsilon = eps;
    o.info.label = label;
    o.info.slow_length = grids.slow.length();
    o.info.points = grids.slow.size();
    o.info.t_final = state.time;
    o.info.gp_steps = steps;
    o.info.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return o;
  });

  for (auto& o : results) {
    rep.runs.push_back(o.info);
    rep.samples.insert(rep.samples.end(), o.samples.begin(), o.samples.end());
    rep.epsilons.push_back(o.info.epsilon);
    rep.linear_fits.push_back(o.linear);
    rep.product_errors.push_back(o.product_error);
    rep.fixed_time_errors.push_back(o.fixed_time_error);
  }
  auto positive = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
  };
  if (rep.epsilons.size() >= 2 && positive(rep.product_errors)) {
    rep.product_fit = fit_order(rep.epsilons, rep.product_errors);
  }
  if (rep.epsilons.size() >= 2 && positive(rep.fixed_time_errors)) {
    rep.fixed_time_fit = fit_order(rep.epsilons, rep.fixed_time_errors);
  }
  return rep;
}

ResidualReport residual_refinement_study(const StudyConfig& cfg_in) {
  StudyConfig cfg = cfg_in;
  validate(cfg);
  ResidualReport rep;
  rep.config = cfg;
  const auto& rc = cfg.residual;
  const double eps = rc.epsilon;
  const std::string label = eps_label(eps);
  const double tc = fast_time(rc.tau_center, eps);
  const double half = fast_time(0.5 * rc.dtau, eps);
  const RunGrids grids = run_grids(cfg.grid, eps, tc + 2.0 * half);
  const auto data = make_preset(cfg.preset.name, cfg.preset.params, grids.slow, eps);
  check_horizon(data, grids.slow, eps, tc + 2.0 * half, label);
  GpState state = build_initial_data(data.n0, data.w0, eps, grids.fast);
  const GpOptions opts = gp_options(cfg.solver, label);
  state = evolve_gp(state, cfg.solver.gp_dt, tc - 2.0 * half, opts);

  std::vector<std::vector<SlowFrame>> frames(cfg.frames.size());
  for (int i = 0; i < 5; ++i) {
    if (i > 0) state = evolve_gp(state, half / rc.substeps, tc + (i - 2) * half, opts);
    for (std::size_t f = 0; f < cfg.frames.size(); ++f) {
      SlowFrame sf = extract_slow_frame(state, eps, cfg.frames[f], grids.slow, true);
      sf.tau = rc.tau_center + 0.5 * (i - 2) * rc.dtau;
      frames[f].push_back(std::move(sf));
    }
  }
  for (std::size_t f = 0; f < cfg.frames.size(); ++f) {
    const auto& s = frames[f];
    const auto coarse = slow_system_residuals({s[0], s[2], s[4]});
    const auto fine = slow_system_residuals({s[1], s[2], s[3]});
    const Frame fr = cfg.frames[f];
    rep.rows.push_back({fr, "U", coarse.u[0], fine.u[0], coarse.u[0] / fine.u[0]});
    rep.rows.push_back({fr, "V", coarse.v[0], fine.v[0], coarse.v[0] / fine.v[0]});
    rep.rows.push_back({fr, "Upsilon", coarse.upsilon[0], fine.upsilon[0], coarse.upsilon[0] / fine.upsilon[0]});
    if (f == 0) {
      rep.transport = fine.transport[0];
      rep.v_forcing = fine.v_forcing[0];
    }
  }
  return rep;
}

}  // namespace gpkdv
