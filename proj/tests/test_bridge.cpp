#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "gpkdv/bridge.hpp"
#include "gpkdv/gp.hpp"
#include "gpkdv/spectral.hpp"

using namespace gpkdv;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double sech2(double x) {
  const double s = 1.0 / std::cosh(x);
  return s * s;
}

double sup_diff(const RealField& a, const RealField& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

RealField zeros(const SpectralGrid& g) { return RealField(g); }

SlowFrame make_frame(const SpectralGrid& g, double eps, Frame frame, const RealField& u,
                     const RealField& v, double tau = 0.0) {
  SlowFrame sf;
  sf.epsilon = eps;
  sf.frame = frame;
  sf.tau = tau;
  sf.grid = g;
  sf.u_field = u;
  sf.v_field = v;
  sf.n_field = u + v;
  const double s = frame == Frame::minus ? 1.0 : -1.0;
  sf.dtheta_field = s * (u - v);
  sf.theta_field = spectral_antiderivative(sf.dtheta_field, g.left());
  return sf;
}

// Frames of a counter-propagating dark-soliton pair sampled exactly at tau_c + i dtau.
std::vector<SlowFrame> pair_series(const DarkSolitonPair& pair, const SpectralGrid& fast,
                                   double eps, Frame frame, double tau_c, double dtau) {
  const SpectralGrid slow = fast.scaled(eps);
  std::vector<SlowFrame> out;
  for (int i = -1; i <= 1; ++i) {
    const double t = fast_time(tau_c + i * dtau, eps);
    GpState st{pair.sample(fast, t), t};
    out.push_back(extract_slow_frame(st, eps, frame, slow, true));
  }
  // Centered differences need exactly uniform tau; fast_time/slow_time round-trip may not be.
  for (int i = 0; i < 3; ++i) out[i].tau = tau_c + (i - 1) * dtau;
  return out;
}

}  // namespace

TEST_CASE("zero data build the constant state", "[bridge]") {
  const SpectralGrid slow(40.0, 256);
  const SpectralGrid fast(400.0, 256);
  const auto st = build_initial_data(zeros(slow), zeros(slow), 0.1, fast);
  for (const auto& z : st.psi.values) {
    REQUIRE_THAT(z.real(), WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(z.imag(), WithinAbs(0.0, 1e-15));
  }
}

TEST_CASE("built density matches the rescaled profile", "[bridge]") {
  const double eps = 0.1;
  const SpectralGrid slow(40.0, 512);
  const auto n0 = RealField::sample(slow, [](double y) { return 2.0 * sech2(y); });
  SECTION("full window") {
    const SpectralGrid fast(400.0, 1024);
    const auto h = madelung(build_initial_data(n0, zeros(slow), eps, fast));
    double err = 0.0;
    for (std::size_t j = 0; j < fast.size(); ++j) {
      err = std::max(err, std::abs(h.eta[j] - eps * eps * 2.0 * sech2(eps * fast.node(j)) / 6.0));
    }
    REQUIRE(err <= 1e-10);
  }
  SECTION("window smaller than the fast box") {
    const SpectralGrid fast(800.0, 2048);
    const auto h = madelung(build_initial_data(n0, zeros(slow), eps, fast));
    double err = 0.0;
    for (std::size_t j = 0; j < fast.size(); ++j) {
      const double y = eps * fast.node(j);
      const double want = (y >= -20.0 && y < 20.0) ? eps * eps * 2.0 * sech2(y) / 6.0 : 0.0;
      err = std::max(err, std::abs(h.eta[j] - want));
    }
    REQUIRE(err <= 1e-10);
  }
}

TEST_CASE("energy of built data matches the rescaled quadrature", "[bridge]") {
  const double eps = 0.1;
  const SpectralGrid slow(40.0, 1024);
  const SpectralGrid fast(400.0, 1024);

  // E = eps^3/144 int M W^2 + N^2 + eps^2 N_y^2 / (2M), M = 1 - eps^2 N / 6.
  auto oracle = [&](double w_amp) {
    const SpectralGrid q(40.0, 1 << 16);
    double sum = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double y = q.node(j);
      const double n = sech2(y);
      const double ny = -2.0 * n * std::tanh(y);
      const double w = w_amp * ny;
      const double m = 1.0 - eps * eps * n / 6.0;
      sum += m * w * w + n * n + eps * eps * ny * ny / (2.0 * m);
    }
    return eps * eps * eps / 144.0 * sum * q.spacing();
  };

  const auto n0 = RealField::sample(slow, sech2);
  SECTION("W0 = 0") {
    const auto st = build_initial_data(n0, zeros(slow), eps, fast);
    REQUIRE_THAT(energy(st), WithinRel(oracle(0.0), 1e-8));
  }
  SECTION("mean-free W0") {
    const auto w0 = RealField::sample(slow, [](double y) { return -1.4 * sech2(y) * std::tanh(y); });
    const auto st = build_initial_data(n0, w0, eps, fast);
    REQUIRE_THAT(energy(st), WithinRel(oracle(0.7), 1e-8));
  }
}

TEST_CASE("build_initial_data rejects inadmissible input", "[bridge]") {
  const SpectralGrid slow(40.0, 256);
  const SpectralGrid fast(400.0, 256);
  const auto big = RealField::sample(slow, [](double y) { return 700.0 * sech2(y); });
  REQUIRE_THROWS_WITH(build_initial_data(big, zeros(slow), 0.1, fast), ContainsSubstring("positivity"));
  const SpectralGrid small_fast(300.0, 256);
  REQUIRE_THROWS_WITH(build_initial_data(zeros(slow), zeros(slow), 0.1, small_fast),
                      ContainsSubstring("not contained"));
  REQUIRE_THROWS_AS(build_initial_data(zeros(slow), zeros(slow), 1.5, fast), ValidationError);
}

TEST_CASE("build_initial_data requires decay at the box edges", "[bridge]") {
  const SpectralGrid slow(40.0, 256);
  const SpectralGrid fast = slow.scaled(1.0 / 0.3);
  // sech^2(5) ~ 1.8e-4: eta ~ 2.7e-6 at the edge.
  const auto wide = RealField::sample(slow, [](double y) { return sech2(y / 4.0); });
  REQUIRE_THROWS_WITH(build_initial_data(wide, zeros(slow), 0.3, fast), ContainsSubstring("does not decay"));
  REQUIRE_THROWS_WITH(build_initial_data(zeros(slow), wide, 0.3, fast), ContainsSubstring("does not decay"));
  InitialDataOptions loose;
  loose.edge_tol = 1e-4;
  CHECK_NOTHROW(build_initial_data(wide, zeros(slow), 0.3, fast, loose));
  const auto narrow = RealField::sample(slow, [](double y) { return sech2(y); });
  CHECK_NOTHROW(build_initial_data(narrow, zeros(slow), 0.3, fast));
}

TEST_CASE("winding compensator", "[bridge]") {
  const SpectralGrid slow(80.0, 512);
  const auto n0 = RealField::sample(slow, sech2);
  const auto w0 = n0;
  auto near_diff = [&](const RealField& a, const RealField& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < slow.size(); ++j) {
      if (std::abs(slow.node(j)) < 10.0) m = std::max(m, std::abs(a[j] - b[j]));
    }
    return m;
  };

  SECTION("automatic picks the left-going bump for copropagating data") {
    const auto d = compensate_winding(n0, w0);
    REQUIRE_THAT(d.winding, WithinAbs(2.0, 1e-9));
    REQUIRE_THAT(integral(d.w0), WithinAbs(0.0, 1e-12));
    REQUIRE(sup_diff(d.n0, d.w0) == 0.0);
    REQUIRE(near_diff(d.w0, w0) < 1e-12);
    const auto theta = initial_phase(d.w0);
    REQUIRE_THAT(theta[slow.nearest_index(10.0)] - theta[slow.nearest_index(-10.0)],
                 WithinAbs(2.0, 1e-7));
    REQUIRE_THAT(theta[0], WithinAbs(0.0, 1e-15));
  }
  SECTION("right-going data get a right-going bump") {
    const auto d = compensate_winding(n0, -1.0 * w0);
    REQUIRE_THAT(integral(d.w0), WithinAbs(0.0, 1e-12));
    REQUIRE(sup_diff(d.n0, -1.0 * d.w0) < 1e-15);
  }
  SECTION("phase mode leaves N0 alone") {
    InitialDataOptions opts;
    opts.compensator = Compensator::phase;
    const auto d = compensate_winding(n0, w0, opts);
    REQUIRE(sup_diff(d.n0, n0) == 0.0);
    REQUIRE_THAT(integral(d.w0), WithinAbs(0.0, 1e-12));
  }
  SECTION("none rejects winding data") {
    InitialDataOptions strict;
    strict.compensator = Compensator::none;
    REQUIRE_THROWS_WITH(compensate_winding(n0, w0, strict), ContainsSubstring("wind"));
    const auto mean_free = RealField::sample(slow, [](double y) { return sech2(y) * std::tanh(y); });
    REQUIRE(sup_diff(compensate_winding(n0, mean_free, strict).w0, mean_free) == 0.0);
  }
}

TEST_CASE("extraction at t = 0 recovers the data", "[bridge]") {
  const double eps = 0.2;
  const SpectralGrid slow(40.0, 512);
  const SpectralGrid fast(200.0, 512);
  const auto n0 = RealField::sample(slow, [](double y) { return sech2(y); });
  const auto w0 = RealField::sample(slow, [](double y) { return -sech2(y - 1.0) * std::tanh(y - 1.0); });
  const auto st = build_initial_data(n0, w0, eps, fast);
  for (Frame fr : {Frame::minus, Frame::plus}) {
    const auto sf = extract_slow_frame(st, eps, fr, slow);
    REQUIRE(sf.tau == 0.0);
    REQUIRE(sup_diff(sf.n_field, n0) <= 1e-8);
    REQUIRE(sup_diff(sf.dtheta_field, w0) <= 1e-8);
    REQUIRE(sup_diff(sf.theta_field, initial_phase(w0)) <= 1e-8);
  }
  SECTION("sub-window") {
    const SpectralGrid sub(20.0, 256);
    const auto sf = extract_slow_frame(st, eps, Frame::minus, sub);
    const auto want = RealField::sample(sub, [](double y) { return sech2(y); });
    REQUIRE(sup_diff(sf.n_field, want) <= 1e-8);
  }
}

TEST_CASE("frame identities and cross-frame relation", "[bridge][gp]") {
  const double eps = 0.2;
  const SpectralGrid slow(40.0, 512);
  const SpectralGrid fast(200.0, 512);
  const auto n0 = RealField::sample(slow, [](double y) { return 1.5 * sech2(y); });
  const auto w0 = RealField::sample(slow, [](double y) { return 0.5 * sech2(y) * std::tanh(y); });
  const auto st = evolve_gp(build_initial_data(n0, w0, eps, fast), 0.025, 20.0);
  const auto minus = extract_slow_frame(st, eps, Frame::minus, slow, true);
  const auto plus = extract_slow_frame(st, eps, Frame::plus, slow, true);
  REQUIRE_THAT(minus.tau, WithinRel(slow_time(20.0, eps), 1e-14));

  for (const auto* sf : {&minus, &plus}) {
    const double s = sf->frame == Frame::minus ? 1.0 : -1.0;
    REQUIRE(sup_diff(sf->u_field + sf->v_field, sf->n_field) <= 1e-10);
    REQUIRE(sup_diff(sf->u_field - sf->v_field, s * sf->dtheta_field) <= 1e-10);
  }
  // V^-(x, tau) = U^+(x - 8 tau / eps^2, tau).
  const auto shifted = resample(plus.u_field, slow, -8.0 * minus.tau / (eps * eps), true);
  REQUIRE(sup_diff(minus.v_field, shifted) <= 1e-6);
}

TEST_CASE("window escape reports the admissible horizon", "[bridge]") {
  const double eps = 0.2;
  const SpectralGrid slow(20.0, 256);
  const SpectralGrid fast(200.0, 512);
  const double t_max = max_admissible_time(slow, fast, eps, Frame::minus);
  REQUIRE_THAT(t_max, WithinRel(50.0 / std::numbers::sqrt2, 1e-12));
  REQUIRE_THAT(max_admissible_time(slow, fast, eps, Frame::plus), WithinRel(t_max, 1e-12));
  GpState st{ComplexField(fast, std::vector<complex>(fast.size(), 1.0)), t_max + 1.0};
  REQUIRE_THROWS_WITH(extract_slow_frame(st, eps, Frame::minus, slow),
                      ContainsSubstring("window escape") && ContainsSubstring("35.355"));
  st.time = t_max * 0.99;
  REQUIRE_NOTHROW(extract_slow_frame(st, eps, Frame::minus, slow));
}

TEST_CASE("constant state gives vanishing slow fields and residuals", "[bridge]") {
  const double eps = 0.1;
  const SpectralGrid fast(400.0, 256);
  const SpectralGrid slow = fast.scaled(eps);
  std::vector<SlowFrame> series;
  for (int i = 0; i < 4; ++i) {
    GpState st{ComplexField(fast, std::vector<complex>(fast.size(), 1.0)), fast_time(0.01 * i, eps)};
    series.push_back(extract_slow_frame(st, eps, Frame::minus, slow, true));
    series.back().tau = 0.01 * i;
  }
  for (const auto& sf : series) {
    REQUIRE(linf_norm(sf.n_field) == 0.0);
    REQUIRE(linf_norm(sf.u_field) == 0.0);
    REQUIRE(linf_norm(sf.v_field) == 0.0);
    const auto it = interaction_terms(sf);
    REQUIRE(linf_norm(it.f) == 0.0);
    REQUIRE(linf_norm(it.R) == 0.0);
    REQUIRE(linf_norm(it.upsilon) == 0.0);
  }
  const auto res = slow_system_residuals(series);
  REQUIRE(res.taus.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(res.u[i] == 0.0);
    REQUIRE(res.v[i] == 0.0);
    REQUIRE(res.upsilon[i] == 0.0);
  }
}

TEST_CASE("interaction terms", "[bridge]") {
  const double eps = 0.2;
  const SpectralGrid g(40.0, 512);
  const auto u = RealField::sample(g, [](double x) { return 1.2 * sech2(x); });
  const auto v = RealField::sample(g, [](double x) { return 0.6 * sech2(x - 1.5); });

  SECTION("V = 0 gives f = F = 0") {
    const auto it = interaction_terms(make_frame(g, eps, Frame::minus, u, zeros(g)));
    REQUIRE(linf_norm(it.F) == 0.0);
    REQUIRE(linf_norm(it.f) == 0.0);
  }
  SECTION("constant fields give r = 0") {
    const RealField c(g, std::vector<double>(g.size(), 0.3));
    const auto it = interaction_terms(make_frame(g, eps, Frame::minus, c, c));
    REQUIRE(linf_norm(it.r) == 0.0);
  }
  SECTION("derivative invariants") {
    for (Frame fr : {Frame::minus, Frame::plus}) {
      const auto it = interaction_terms(make_frame(g, eps, fr, u, v));
      REQUIRE(sup_diff(deriv(it.F, 1), it.f) <= 1e-10);
      REQUIRE(sup_diff(deriv(it.G, 1), it.g) <= 1e-10);
      REQUIRE(sup_diff(deriv(it.R, 1), it.r) <= 1e-10);
      const auto ups = RealField::sample(g, [](double x) { return 0.6 * (std::tanh(x - 1.5) + 1.0); });
      REQUIRE(sup_diff(it.upsilon, ups) <= 1e-10);
      REQUIRE(it.upsilon[0] == 0.0);
    }
  }
  SECTION("f against centered differences of F") {
    // s = sech^2 satisfies s'' = 4 s - 6 s^2.
    auto F = [](double x) {
      const double su = sech2(x);
      const double sv = sech2(x - 1.5);
      const double uu = 1.2 * su;
      const double vv = 0.6 * sv;
      const double vxx = 0.6 * (4.0 * sv - 6.0 * sv * sv);
      return vv * vv / 6.0 - vxx + uu * vv / 3.0;
    };
    const auto it = interaction_terms(make_frame(g, eps, Frame::minus, u, v));
    auto fd_err = [&](double h) {
      double m = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = g.node(j);
        m = std::max(m, std::abs(it.f[j] - (F(x + h) - F(x - h)) / (2.0 * h)));
      }
      return m;
    };
    const double e1 = fd_err(0.02);
    const double e2 = fd_err(0.01);
    REQUIRE(e1 < 1e-2);
    REQUIRE_THAT(e1 / e2, WithinAbs(4.0, 0.05));
  }
  SECTION("expanded remainder equals the derivative of R") {
    const auto n = u + v;
    for (double e : {0.1, 0.3, 0.6}) {
      const auto it = interaction_terms(make_frame(g, e, Frame::plus, u, v));
      REQUIRE(sup_diff(remainder_expanded(n, e), it.r) <= 1e-10 * (1.0 + linf_norm(it.r)));
    }
  }
  SECTION("upsilon base") {
    const auto it = interaction_terms(make_frame(g, eps, Frame::minus, u, v), 5.0);
    REQUIRE(it.upsilon_base == -5.0);
    REQUIRE_THAT(it.upsilon[g.nearest_index(-5.0)], WithinAbs(0.0, 1e-15));
  }
  SECTION("denominator underflow") {
    const auto big = RealField::sample(g, [](double x) { return 200.0 * sech2(x); });
    REQUIRE_THROWS_WITH(interaction_terms(make_frame(g, 0.2, Frame::minus, big, zeros(g))),
                        ContainsSubstring("denominator"));
  }
}

TEST_CASE("slow-system residuals on an exact dark-soliton pair", "[bridge]") {
  // With eps^2 = 2 - c^2 each soliton is a long wave of slow amplitude 3.
  const double eps = 0.3;
  const double c = std::sqrt(2.0 - eps * eps);
  const SpectralGrid fast(400.0, 1024);
  const auto pair = DarkSolitonPair::centered(fast, c);
  const double tau_c = 2e-3;

  for (Frame fr : {Frame::minus, Frame::plus}) {
    const auto coarse = slow_system_residuals(pair_series(pair, fast, eps, fr, tau_c, 2e-4));
    const auto fine = slow_system_residuals(pair_series(pair, fast, eps, fr, tau_c, 1e-4));
    REQUIRE(coarse.taus.size() == 1);
    REQUIRE_THAT(coarse.taus[0], WithinAbs(tau_c, 1e-15));
    const double ru = coarse.u[0] / fine.u[0];
    const double rv = coarse.v[0] / fine.v[0];
    const double ry = coarse.upsilon[0] / fine.upsilon[0];
    INFO("frame " << frame_name(fr) << " ratios " << ru << " " << rv << " " << ry);
    REQUIRE(ru > 3.5);
    REQUIRE(ru < 4.5);
    REQUIRE(rv > 3.5);
    REQUIRE(rv < 4.5);
    REQUIRE(ry > 3.5);
    REQUIRE(ry < 4.5);
    // The transport term is O(eps^-2) while its forcing is O(1).
    REQUIRE(fine.transport[0] > 10.0 * fine.v_forcing[0]);
    REQUIRE(fine.v[0] < 1e-2 * fine.transport[0]);
  }
}

TEST_CASE("dominant balance of the V equation across eps", "[bridge]") {
  std::vector<double> ratio;
  for (double eps : {0.4, 0.2}) {
    const double c = std::sqrt(2.0 - eps * eps);
    const SpectralGrid fast(16.0 / eps * 25.0, 1024);
    const auto pair = DarkSolitonPair::centered(fast, c);
    const auto r = slow_system_residuals(pair_series(pair, fast, eps, Frame::minus, 1e-3, 1e-5));
    ratio.push_back(r.transport[0] / r.v_forcing[0]);
  }
  // transport / forcing grows like eps^-2: halving eps multiplies it by about 4.
  REQUIRE_THAT(ratio[1] / ratio[0], WithinAbs(4.0, 0.6));
}

TEST_CASE("slow_system_residuals validates its series", "[bridge]") {
  const SpectralGrid g(40.0, 64);
  std::vector<SlowFrame> two(2, make_frame(g, 0.1, Frame::minus, zeros(g), zeros(g)));
  REQUIRE_THROWS_AS(slow_system_residuals(two), ValidationError);
  std::vector<SlowFrame> s;
  for (double tau : {0.0, 0.1, 0.3}) s.push_back(make_frame(g, 0.1, Frame::minus, zeros(g), zeros(g), tau));
  REQUIRE_THROWS_WITH(slow_system_residuals(s), ContainsSubstring("uniformly"));
}

TEST_CASE("frame names", "[bridge]") {
  REQUIRE(parse_frame("minus") == Frame::minus);
  REQUIRE(parse_frame("+") == Frame::plus);
  REQUIRE(frame_name(Frame::plus) == "plus");
  REQUIRE_THROWS_AS(parse_frame("left"), ValidationError);
  REQUIRE_THAT(fast_time(slow_time(123.0, 0.1), 0.1), WithinRel(123.0, 1e-14));
}
