// Acceptance gate: one PASS/FAIL line per criterion, INFO lines for diagnostics.
// Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gpkdv/bridge.hpp"
#include "gpkdv/errors.hpp"
#include "gpkdv/experiments.hpp"
#include "gpkdv/fft.hpp"
#include "gpkdv/gp.hpp"
#include "gpkdv/kdv.hpp"
#include "gpkdv/spectral.hpp"

using namespace gpkdv;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = GPKDV_SOURCE_DIR;
const fs::path kOut = fs::path(GPKDV_BINARY_DIR) / "acceptance_out";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

std::string in_range(double v, double lo, double hi, bool& ok) {
  const bool pass = std::isfinite(v) && v >= lo && v <= hi;
  ok = ok && pass;
  return fmt(v) + (pass ? "" : "(!)");
}

std::string at_most(double v, double hi, bool& ok) {
  const bool pass = std::isfinite(v) && v <= hi;
  ok = ok && pass;
  return fmt(v, 3) + (pass ? "" : "(!)");
}

void info(const std::string& msg) { std::printf("INFO %s\n", msg.c_str()); std::fflush(stdout); }

StudyConfig load(const char* name) { return load_study_config((kSource / "configs" / name).string()); }

double rel_drift(double a, double b) { return a != 0.0 ? std::abs(b - a) / std::abs(a) : std::abs(b - a); }

double sup_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

// ---------------------------------------------------------------------------

Outcome check_gp_invariants() {
  const double eps = 0.1;
  const SpectralGrid fast(4000.0, 1u << 15);
  const SpectralGrid slow = fast.scaled(eps);
  const auto data = make_preset("sech2", {}, slow, eps);
  GpState s = build_initial_data(data.n0, data.w0, eps, fast);
  const double e0 = energy(s);
  const auto h0 = higher_invariants(s);
  const auto m0 = generalized_mass(s);
  GpOptions opts;
  opts.label = "criterion 1";
  s = evolve_gp(s, 2e-3, 500.0, opts);
  const auto h1 = higher_invariants(s);
  const auto m1 = generalized_mass(s);
  bool ok = true;
  std::string d = "t=" + fmt(s.time) + " tau=" + fmt(slow_time(s.time, eps), 3) + " drifts: E " +
                  at_most(rel_drift(e0, energy(s)), 1e-6, ok) + ", E2 " + at_most(rel_drift(h0.e2, h1.e2), 1e-6, ok) +
                  ", E3 " + at_most(rel_drift(h0.e3, h1.e3), 1e-6, ok) + ", E4 " +
                  at_most(rel_drift(h0.e4, h1.e4), 1e-6, ok) + ", m+ " +
                  at_most(rel_drift(m0.m_plus, m1.m_plus), 1e-6, ok) + ", m- " +
                  at_most(rel_drift(m0.m_minus, m1.m_minus), 1e-6, ok) + " (<= 1e-6)";
  return {ok, d};
}

Outcome check_dark_soliton() {
  const SpectralGrid g(80.0, 2048);
  const auto pair = DarkSolitonPair::centered(g, 0.5);
  double residual = 0.0;
  for (double t : {0.0, 2.5, 5.0}) residual = std::max(residual, dark_pair_residual(pair, g, t));
  GpState s{pair.sample(g, 0.0), 0.0};
  double worst = 0.0;
  for (int i = 1; i <= 10; ++i) {
    const double t = 0.5 * i;
    s = evolve_gp(s, 2.5e-4, t);
    worst = std::max(worst, sup_diff(s.psi, pair.sample(g, t)));
  }
  bool ok = true;
  return {ok && residual <= 1e-8 && worst <= 1e-6,
          "c=0.5 pair: PDE residual " + at_most(residual, 1e-8, ok) + " (<= 1e-8), evolved vs translated sup error " +
              at_most(worst, 1e-6, ok) + " on t in [0,5] (<= 1e-6)"};
}

Outcome check_kdv_soliton_oracle() {
  const SpectralGrid g(60.0, 1024);
  const double residual = std::max(kdv_soliton_residual(1.0, g, 1), kdv_soliton_residual(1.0, g, -1));
  KdvState s{kdv_soliton(1.0, g, 0.0), 0.0, 1};
  const auto i0 = kdv_invariants(s);
  double shape = 0.0;
  double inv = 0.0;
  for (int i = 1; i <= 10; ++i) {
    const double tau = 0.1 * i;
    s = evolve_kdv(s, 1e-4, tau);
    const RealField want = kdv_soliton(1.0, g, tau);
    for (std::size_t j = 0; j < g.size(); ++j) shape = std::max(shape, std::abs(s.u[j] - want[j]));
    const auto i1 = kdv_invariants(s);
    inv = std::max({inv, rel_drift(i0.i1, i1.i1), rel_drift(i0.i2, i1.i2), rel_drift(i0.i3, i1.i3)});
  }
  bool ok = true;
  const std::string d = "c=1: residual " + at_most(residual, 1e-8, ok) + " (<= 1e-8), shape error " +
                        at_most(shape, 1e-6, ok) + " on tau in [0,1] (<= 1e-6), I1-I3 drift " +
                        at_most(inv, 1e-8, ok) + " (<= 1e-8)";
  return {ok, d};
}

ConvergenceReport two_way_report;

Outcome check_kdv_convergence() {
  const StudyConfig cfg = load("two_way.json");
  two_way_report = kdv_convergence_study(cfg);
  write_report(two_way_report, (kOut / "two_way").string());
  bool ok = true;
  std::string d = "orders at tau=" + fmt(cfg.tau_final) + " in [1.7,2.3]:";
  for (const auto& o : two_way_report.orders) {
    if (o.tau != cfg.tau_final) continue;
    d += " " + std::string(frame_name(o.frame)) + "/k" + std::to_string(o.k) + "=" + in_range(o.order, 1.7, 2.3, ok);
  }
  d += "; C eps^2 exp(K tau) envelope spread (<= 2):";
  for (const auto& e : two_way_report.envelopes) {
    d += " " + std::string(frame_name(e.frame)) + "/k" + std::to_string(e.k) + "=" +
         in_range(e.fit.spread, 1.0, 2.0, ok);
  }
  return {ok, d};
}

Outcome check_unidirectional() {
  const auto co = unidirectional_study(load("one_way_copropagating.json"));
  write_report(co, (kOut / "one_way_copropagating").string());
  const auto pert = unidirectional_study(load("one_way_perturbed.json"));
  write_report(pert, (kOut / "one_way_perturbed").string());
  bool ok = true;
  std::string d = "copropagating ||N_kdv - N|| orders in [1.7,2.3]:";
  for (const auto& o : co.orders) {
    if (o.tau != co.config.tau_final || o.quantity != "n_error") continue;
    d += " k" + std::to_string(o.k) + "=" + in_range(o.order, 1.7, 2.3, ok);
  }
  d += "; perturbed (||V0||=0.1) error/||V0|| spread across eps (<= 1.3):";
  if (pert.plateaus.empty()) {
    ok = false;
    d += " none";
  }
  for (const auto& p : pert.plateaus) {
    d += " k" + std::to_string(p.k) + "=" + in_range(p.spread, 1.0, 1.3, ok);
    std::string r;
    for (double v : p.ratios) r += (r.empty() ? "" : ", ") + fmt(v);
    info("criterion 5: perturbed error/||V0|| per eps = {" + r + "}, fit err = " + fmt(p.eps2_coef) +
         " eps^2 + " + fmt(p.plateau));
  }
  return {ok, d};
}

Outcome check_wave_limit() {
  StudyConfig cfg = load("wave_limit.json");
  const auto r = wave_limit_study(cfg);
  write_report(r, (kOut / "wave_limit").string());
  bool ok = true;
  std::string d;
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    if (r.epsilons[i] == 0.1) {
      d += "eps=0.1 linear fit on t in [0," + fmt(cfg.wave.time_factor / 1e-3) + "]: R^2=" +
           in_range(r.linear_fits[i].r2, 0.95, 1.0, ok) + " (>= 0.95)";
    }
  }
  if (d.empty()) {
    ok = false;
    d = "eps=0.1 missing from the sweep";
  }
  d += "; exponent at fixed t*eps=" + fmt(cfg.wave.product) + ": " +
       (r.product_fit ? in_range(r.product_fit->slope, 2.5, 3.5, ok) : std::string("n/a")) + " (in [2.5,3.5])";
  if (!r.product_fit) ok = false;
  if (r.fixed_time_fit) {
    info("criterion 6: exponent at fixed t=" + fmt(cfg.wave.fixed_time) + ": " + fmt(r.fixed_time_fit->slope) +
         " (the eps^3 t envelope predicts 3 here and 2 at fixed t*eps)");
  }
  return {ok, d};
}

Outcome check_m_norm_control() {
  bool ok = true;
  const auto& b = two_way_report.bounds;
  std::string slopes;
  for (std::size_t i = 0; i < b.m_slopes.size(); ++i) {
    slopes += (slopes.empty() ? "" : ", ") + fmt(b.epsilons[i]) + ":" + fmt(b.m_slopes[i]);
  }
  std::string d = "per-eps slopes S {" + slopes + "}, common S=" + fmt(b.m_slope) + ", max/min=" +
                  in_range(b.m_slope_spread, 1.0, 1.5, ok) + " (<= 1.5)";
  if (b.m_slopes.size() < 2) ok = false;
  // The common slope bounds every run by construction; recheck from the samples.
  for (const auto& s : b.samples) {
    double m0 = 0.0;
    for (const auto& t : b.samples) {
      if (t.epsilon == s.epsilon && t.tau == 0.0) m0 = t.m_n;
    }
    if (s.m_n > m0 + b.m_slope * std::abs(s.tau) * (1.0 + 1e-12) + 1e-14) ok = false;
  }
  for (const auto& s : b.series) {
    if (s.series.rfind("hk", 0) == 0 || s.series == "gamma") {
      info("criterion 7: bound series " + s.series + " eps=" + fmt(s.epsilon) + " max/initial=" + fmt(s.max_ratio) +
           (s.flagged ? " (flagged)" : ""));
    }
  }
  return {ok, d};
}

Outcome check_residual_refinement() {
  const auto r = residual_refinement_study(load("residuals.json"));
  write_report(r, (kOut / "residuals").string());
  bool ok = !r.rows.empty();
  std::string d = "coarse/fine ratio in [3,5]:";
  for (const auto& row : r.rows) {
    d += " " + std::string(frame_name(row.frame)) + "/" + row.equation + "=" + in_range(row.ratio, 3.0, 5.0, ok);
  }
  return {ok, d};
}

Outcome check_kdv_stability() {
  const SpectralGrid g(80.0, 1024);
  const RealField f0 = RealField::sample(g, [](double x) { return 2.0 / std::pow(std::cosh(x / 2.0), 2); });
  const RealField p = RealField::sample(g, [](double x) { return x * std::exp(-0.25 * (x - 3.0) * (x - 3.0)); });
  bool ok = true;
  std::string d = "||F-G||(1)/||F0-G0|| in H^2:";
  double first = 0.0;
  for (double delta : {1e-3, 5e-4, 2.5e-4}) {
    const auto gap = stability_gap(f0, f0 + delta * p, 1.0, 2, 1e-4, 10);
    const double ratio = gap.gaps.back() / gap.initial_gap;
    d += " delta=" + fmt(delta) + ":" + fmt(ratio, 6);
    if (first == 0.0) {
      first = ratio;
    } else {
      const double change = std::abs(ratio / first - 1.0);
      if (!(change <= 0.05)) ok = false;
    }
  }
  d += " (halving delta changes the ratio by <= 5%)";
  return {ok, d};
}

Outcome check_property_suites() {
  std::mt19937 rng(20261018);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_field = [&](const SpectralGrid& g) {
    double a[4], c[4], w[4];
    for (int i = 0; i < 4; ++i) {
      a[i] = u(rng);
      c[i] = 0.3 * u(rng) * g.length();
      w[i] = 1.0 + std::abs(u(rng)) * 2.0;
    }
    return RealField::sample(g, [&](double x) {
      double s = 0.0;
      for (int i = 0; i < 4; ++i) s += a[i] * std::exp(-std::pow((x - c[i]) / w[i], 2));
      return s;
    });
  };
  std::size_t checks = 0;
  std::size_t failures = 0;
  auto expect = [&](bool c) {
    ++checks;
    if (!c) ++failures;
  };
  const SpectralGrid g(60.0, 512);
  for (int trial = 0; trial < 200; ++trial) {
    const RealField f = random_field(g);
    // Parseval through the raw transform.
    const auto spec = spectrum(f.span());
    double phys = 0.0, four = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      phys += f[j] * f[j];
      four += std::norm(spec[j]);
    }
    phys *= g.spacing();
    four *= g.spacing() / static_cast<double>(g.size());
    expect(std::abs(phys - four) <= 1e-12 * phys);
    // Sobolev norms: monotone in k and equal to the sum of derivative norms.
    double prev = 0.0, sum = 0.0;
    for (int k = 0; k <= 4; ++k) {
      const double hk = sobolev_norm(f, k);
      const double dk = k == 0 ? l2_norm(f) : l2_norm(deriv(f, k));
      sum += dk * dk;
      expect(hk >= prev);
      expect(std::abs(hk * hk - sum) <= 1e-10 * sum);
      prev = hk;
    }
    // M-norm homogeneity and translation invariance.
    const double lambda = 3.0 * u(rng);
    expect(std::abs(m_norm(lambda * f) - std::abs(lambda) * m_norm(f)) <= 1e-12 * (1.0 + m_norm(f)));
  }
  // Frame identities and the cross-frame relation after a GP run.
  const double eps = 0.2;
  const SpectralGrid slow(40.0, 512);
  const SpectralGrid fast(200.0, 512);
  const RealField n0 = RealField::sample(slow, [](double y) { return 1.0 / std::pow(std::cosh(y), 2); });
  const RealField w0 = RealField::sample(slow, [](double y) { return -1.4 * std::tanh(y) / std::pow(std::cosh(y), 2); });
  const auto st = evolve_gp(build_initial_data(n0, w0, eps, fast), 0.025, 20.0);
  const auto fm = extract_slow_frame(st, eps, Frame::minus, slow, true);
  const auto fp = extract_slow_frame(st, eps, Frame::plus, slow, true);
  for (const auto* f : {&fm, &fp}) {
    const double s = f->frame == Frame::minus ? 1.0 : -1.0;
    expect(linf_norm(f->u_field + f->v_field - f->n_field) <= 1e-10);
    expect(linf_norm(f->u_field - f->v_field - s * f->dtheta_field) <= 1e-10);
  }
  const double shift = 8.0 * fm.tau / (eps * eps);
  expect(linf_norm(fm.v_field - resample(fp.u_field, slow, -shift, true)) <= 1e-6);
  // Determinism of reports.
  StudyConfig c;
  c.epsilons = {0.4, 0.3};
  c.tau_final = 0.02;
  c.tau_samples = 2;
  c.ks = {0, 2};
  c.grid.slow_spacing = 0.2;
  c.grid.margin = 15.0;
  const fs::path a = kOut / "determinism_a";
  const fs::path b = kOut / "determinism_b";
  write_report(kdv_convergence_study(c), a.string());
  write_report(kdv_convergence_study(c), b.string());
  for (const char* f : {"errors.csv", "runs.csv", "audit.csv", "bounds.csv", "summary.json"}) {
    std::ifstream ia(a / f, std::ios::binary), ib(b / f, std::ios::binary);
    std::stringstream sa, sb;
    sa << ia.rdbuf();
    sb << ib.rdbuf();
    expect(!sa.str().empty() && sa.str() == sb.str());
  }
  return {failures == 0, std::to_string(checks - failures) + "/" + std::to_string(checks) +
                             " checks (Parseval, Sobolev monotonicity and consistency, m_norm homogeneity, "
                             "frame identities, cross-frame relation, byte-identical reports)"};
}

Outcome extended_sweep(const char* config, bool unidirectional_study_kind) {
  StudyConfig cfg = load(config);
  cfg.epsilons = {0.1, 0.07, 0.05};
  const auto r = unidirectional_study_kind ? unidirectional_study(cfg) : kdv_convergence_study(cfg);
  std::string d;
  for (const auto& o : r.orders) {
    if (o.tau != cfg.tau_final || o.frame != Frame::minus) continue;
    if (unidirectional_study_kind && o.quantity != "n_error") continue;
    d += " k" + std::to_string(o.k) + "=" + fmt(o.order);
  }
  return {true, d};
}

}  // namespace

int main() {
  fs::create_directories(kOut);
  const auto start = std::chrono::steady_clock::now();
  struct Criterion {
    int id;
    const char* title;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "GP invariants", 300.0, check_gp_invariants},
      {2, "dark-soliton oracle", 30.0, check_dark_soliton},
      {3, "KdV soliton oracle", 30.0, check_kdv_soliton_oracle},
      {4, "two-way KdV approximation order and envelope", 900.0, check_kdv_convergence},
      {5, "one-way approximation order and counter-wave plateau", 900.0, check_unidirectional},
      {6, "wave limit", 300.0, check_wave_limit},
      {7, "M-norm control across the sweep", 0.0, check_m_norm_control},
      {8, "slow-system residual refinement", 0.0, check_residual_refinement},
      {9, "KdV stability in the linear regime", 0.0, check_kdv_stability},
      {10, "property suites", 0.0, check_property_suites},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt(secs, 3) + " s";
    if (c.budget_s > 0.0) {
      timing += " of " + fmt(c.budget_s, 3) + " s";
      if (secs > c.budget_s) {
        o.pass = false;
        timing += " (over budget)";
      }
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %d (%s): %s [%s]\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  // Same studies at smaller eps: shows whether the desk-scale orders are pre-asymptotic.
  for (auto [cfg, uni] : {std::pair{"two_way.json", false}, std::pair{"one_way_copropagating.json", true}}) {
    try {
      info(std::string(cfg) + " at eps {0.1, 0.07, 0.05}, frame minus, tau_final orders:" +
           extended_sweep(cfg, uni).detail);
    } catch (const std::exception& e) {
      info(std::string(cfg) + " extended sweep failed: " + e.what());
    }
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of %zu criteria passed; acceptance wall time %.0f s (suite budget 1500 s)\n",
              static_cast<int>(criteria.size()) - failed, criteria.size(), total);
  return failed == 0 ? 0 : 1;
}
