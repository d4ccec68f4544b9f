#include "gpkdv/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gpkdv/csv.hpp"
#include "gpkdv/spectral.hpp"

namespace gpkdv {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kMinDenominator = 1e-6;

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ValidationError("epsilon must lie in (0, 1), got " + format_double(epsilon));
  }
}

// Fast-coordinate offset s with x = y / eps + s.
double frame_shift(Frame frame, double t) { return frame == Frame::minus ? -kSqrt2 * t : kSqrt2 * t; }

SpectralGrid pulled_back(const SpectralGrid& slow, double epsilon) { return slow.scaled(1.0 / epsilon); }

double wrap_into(const SpectralGrid& g, double x) {
  const double r = std::fmod(x - g.left(), g.length());
  return g.left() + (r < 0.0 ? r + g.length() : r);
}

RealField slow_from(const SpectralGrid& slow, const RealField& fast_on_pullback, double scale) {
  RealField out(slow);
  for (std::size_t j = 0; j < slow.size(); ++j) out[j] = scale * fast_on_pullback[j];
  return out;
}

}  // namespace

std::string_view frame_name(Frame f) noexcept { return f == Frame::minus ? "minus" : "plus"; }

Frame parse_frame(std::string_view name) {
  if (name == "minus" || name == "-") return Frame::minus;
  if (name == "plus" || name == "+") return Frame::plus;
  throw ValidationError("unknown frame '" + std::string(name) + "' (expected minus or plus)");
}

double slow_time(double t, double epsilon) noexcept {
  return epsilon * epsilon * epsilon * t / (2.0 * kSqrt2);
}

double fast_time(double tau, double epsilon) noexcept {
  return 2.0 * kSqrt2 * tau / (epsilon * epsilon * epsilon);
}

LongWaveData compensate_winding(const RealField& n0, const RealField& w0,
                                const InitialDataOptions& opts) {
  require_same_grid(n0.grid, w0.grid, "compensate_winding");
  if (!w0.all_finite()) throw ValidationError("W0 has non-finite samples");
  const double total = integral(w0);
  LongWaveData out{n0, w0, total};
  if (std::abs(total) <= opts.winding_tol) return out;
  if (opts.compensator == Compensator::none) {
    throw ValidationError("W0 integrates to " + format_double(total) +
                          " over the window; the phase would wind across the periodic seam");
  }
  if (!(opts.compensator_width > 0.0 && opts.compensator_width < 0.25)) {
    throw ValidationError("compensator width must lie in (0, 0.25)");
  }
  const auto& g = w0.grid;
  const double width = opts.compensator_width * g.length();
  RealField bump(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    double d = g.node(j) - g.left();
    if (d >= 0.5 * g.length()) d -= g.length();
    const double s = 1.0 / std::cosh(d / width);
    bump[j] = s * s;
  }
  const double mass = integral(bump);

  Compensator mode = opts.compensator;
  if (mode == Compensator::automatic) {
    mode = l2_norm(n0 - w0) <= l2_norm(n0 + w0) ? Compensator::left : Compensator::right;
  }
  const double n_sign = mode == Compensator::left ? -1.0 : mode == Compensator::right ? 1.0 : 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double c = total * bump[j] / mass;
    out.w0[j] -= c;
    out.n0[j] += n_sign * c;
  }
  return out;
}

RealField initial_phase(const RealField& w0) { return spectral_antiderivative(w0, w0.grid.left()); }

namespace {

// eta = eps^2 N/6 and |Psi_x| ~ sqrt((eps^3 N_x / 12)^2 + (eps^2 W / (6 sqrt2))^2) at the
// outermost nodes, from the data as given (the seam compensator lives on the edge).
void check_edge_decay(const RealField& n0, const RealField& w0, double epsilon, double tol) {
  const RealField nx = deriv(n0, 1);
  const double e2 = epsilon * epsilon;
  for (std::size_t j : {std::size_t{0}, n0.size() - 1}) {
    const double eta = e2 * std::abs(n0[j]) / 6.0;
    const double dpsi = std::hypot(e2 * epsilon * nx[j] / 12.0, e2 * w0[j] / (6.0 * kSqrt2));
    if (eta > tol || dpsi > tol) {
      throw ValidationError("initial data does not decay at the box edge x = " +
                            format_double(n0.grid.node(j)) + ": |eta| = " + format_double(eta) +
                            ", |Psi_x| = " + format_double(dpsi) + " (limit " + format_double(tol) +
                            "); enlarge the box");
    }
  }
}

}  // namespace

GpState build_initial_data(const RealField& n0, const RealField& w0, double epsilon,
                           const SpectralGrid& fast_grid, const InitialDataOptions& opts) {
  check_epsilon(epsilon);
  require_same_grid(n0.grid, w0.grid, "build_initial_data");
  if (!n0.all_finite()) throw ValidationError("N0 has non-finite samples");
  check_edge_decay(n0, w0, epsilon, opts.edge_tol);
  const LongWaveData data = compensate_winding(n0, w0, opts);
  const double amp = linf_norm(data.n0);
  if (epsilon * epsilon * amp / 6.0 >= 1.0) {
    throw ValidationError("positivity violated: eps^2 max|N0| / 6 = " +
                          format_double(epsilon * epsilon * amp / 6.0) + " >= 1");
  }
  const SpectralGrid& slow = n0.grid;
  const SpectralGrid window = fast_grid.scaled(epsilon);
  const double tol = 1e-9 * window.length();
  if (slow.left() < window.left() - tol || slow.right() > window.right() + tol) {
    std::ostringstream msg;
    msg << "slow window [" << slow.left() << ", " << slow.right()
        << "] is not contained in eps * fast window [" << window.left() << ", "
        << window.right() << "]";
    throw ValidationError(msg.str());
  }

  const RealField theta = initial_phase(data.w0);
  std::vector<double> n_fast(fast_grid.size(), 0.0);
  std::vector<double> theta_fast(fast_grid.size(), theta[0]);

  const bool same_window = std::abs(slow.length() - window.length()) <= tol &&
                           std::abs(slow.center() - window.center()) <= tol;
  if (same_window) {
    n_fast = resample(data.n0, window, 0.0, true).values;
    theta_fast = resample(theta, window, 0.0, true).values;
  } else {
    std::vector<std::size_t> inside;
    std::vector<double> points;
    for (std::size_t j = 0; j < fast_grid.size(); ++j) {
      const double y = window.node(j);
      if (y >= slow.left() && y < slow.right()) {
        inside.push_back(j);
        points.push_back(y);
      }
    }
    const auto nv = evaluate_at(data.n0, points);
    const auto tv = evaluate_at(theta, points);
    for (std::size_t i = 0; i < inside.size(); ++i) {
      n_fast[inside[i]] = nv[i];
      theta_fast[inside[i]] = tv[i];
    }
  }

  GpState state{ComplexField(fast_grid), 0.0};
  const double phase_scale = epsilon / (6.0 * kSqrt2);
  for (std::size_t j = 0; j < fast_grid.size(); ++j) {
    const double rho2 = 1.0 - epsilon * epsilon * n_fast[j] / 6.0;
    if (!(rho2 > 0.0)) throw ValidationError("positivity violated after resampling");
    state.psi[j] = std::polar(std::sqrt(rho2), phase_scale * theta_fast[j]);
  }
  return state;
}

double max_admissible_time(const SpectralGrid& slow_grid, const SpectralGrid& fast_grid,
                           double epsilon, Frame frame) {
  check_epsilon(epsilon);
  const SpectralGrid pb = pulled_back(slow_grid, epsilon);
  const double tol = 1e-9 * fast_grid.length();
  if (frame == Frame::minus) {
    if (pb.right() > fast_grid.right() + tol) return -1.0;
    return std::max(0.0, pb.left() - fast_grid.left()) / kSqrt2;
  }
  if (pb.left() < fast_grid.left() - tol) return -1.0;
  return std::max(0.0, fast_grid.right() - pb.right()) / kSqrt2;
}

SlowFrame extract_slow_frame(const GpState& state, double epsilon, Frame frame,
                             const SpectralGrid& slow_grid, bool allow_wrap) {
  check_epsilon(epsilon);
  const SpectralGrid& fast = state.psi.grid;
  const SpectralGrid pb = pulled_back(slow_grid, epsilon);
  const double shift = frame_shift(frame, state.time);
  if (!allow_wrap) {
    const double tol = 1e-9 * fast.length();
    if (pb.left() + shift < fast.left() - tol || pb.right() + shift > fast.right() + tol) {
      std::ostringstream msg;
      msg << "window escape: slow window of frame " << frame_name(frame) << " leaves the fast box at t = "
          << state.time << "; maximal admissible t is "
          << max_admissible_time(slow_grid, fast, epsilon, frame);
      throw NumericalError(msg.str());
    }
  }

  const HydroFields h = madelung(state);
  const RealField eta = resample(h.eta, pb, shift, true);
  const RealField dphi = resample(h.dphi, pb, shift, true);

  SlowFrame sf;
  sf.epsilon = epsilon;
  sf.frame = frame;
  sf.tau = slow_time(state.time, epsilon);
  sf.grid = slow_grid;
  const double e2 = epsilon * epsilon;
  sf.n_field = slow_from(slow_grid, eta, 6.0 / e2);
  sf.dtheta_field = slow_from(slow_grid, dphi, 6.0 * kSqrt2 / e2);

  // Theta is rebuilt from its derivative and pinned to the phase at the left edge.
  sf.theta_field = spectral_antiderivative(sf.dtheta_field, slow_grid.left());
  const double x_left = wrap_into(fast, pb.left() + shift);
  const double offset = 6.0 * kSqrt2 / epsilon * h.phi[fast.nearest_index(x_left)];
  for (auto& v : sf.theta_field.values) v += offset;

  const double s = frame == Frame::minus ? 1.0 : -1.0;
  sf.u_field = RealField(slow_grid);
  sf.v_field = RealField(slow_grid);
  for (std::size_t j = 0; j < slow_grid.size(); ++j) {
    const double nj = sf.n_field[j];
    const double dj = s * sf.dtheta_field[j];
    sf.u_field[j] = 0.5 * (nj + dj);
    sf.v_field[j] = 0.5 * (nj - dj);
  }
  return sf;
}

InteractionTerms interaction_terms(const SlowFrame& sf, std::optional<double> r_base) {
  const auto& g = sf.grid;
  const double e2 = sf.epsilon * sf.epsilon;
  const auto du = derivatives(sf.u_field, 2);
  const auto dv = derivatives(sf.v_field, 2);
  const auto dn = derivatives(sf.n_field, 2);

  InteractionTerms it;
  it.F = RealField(g);
  it.G = RealField(g);
  it.R = RealField(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double u = du[0][j];
    const double v = dv[0][j];
    const double n = dn[0][j];
    const double m = 1.0 - e2 * n / 6.0;
    if (!(m > kMinDenominator)) {
      throw NumericalError("denominator underflow: 1 - eps^2 N / 6 = " + format_double(m) +
                           " at x = " + format_double(g.node(j)));
    }
    it.F[j] = v * v / 6.0 - dv[2][j] + u * v / 3.0;
    it.G[j] = dn[2][j] + v * v / 2.0 - u * u / 6.0 - u * v / 3.0;
    it.R[j] = n * dn[2][j] / (6.0 * m) + dn[1][j] * dn[1][j] / (12.0 * m * m);
  }
  it.f = deriv(it.F, 1);
  it.g = deriv(it.G, 1);
  it.r = deriv(it.R, 1);
  it.upsilon_base = r_base ? -*r_base : g.left();
  it.upsilon = spectral_antiderivative(sf.v_field, it.upsilon_base);
  return it;
}

RealField remainder_expanded(const RealField& n, double epsilon) {
  const double e2 = epsilon * epsilon;
  const auto d = derivatives(n, 3);
  RealField out(n.grid);
  for (std::size_t j = 0; j < n.size(); ++j) {
    const double m = 1.0 - e2 * d[0][j] / 6.0;
    if (!(m > kMinDenominator)) throw NumericalError("denominator underflow in remainder");
    out[j] = d[0][j] * d[3][j] / (6.0 * m) + d[1][j] * d[2][j] / (3.0 * m * m) +
             e2 / 36.0 * d[1][j] * d[1][j] * d[1][j] / (m * m * m);
  }
  return out;
}

SlowResiduals slow_system_residuals(const std::vector<SlowFrame>& series,
                                    std::optional<double> r_base) {
  if (series.size() < 3) throw ValidationError("slow_system_residuals needs at least 3 frames");
  const auto& first = series.front();
  const double dtau = series[1].tau - series[0].tau;
  if (!(std::abs(dtau) > 0.0)) throw ValidationError("frames must have distinct tau");
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& sf = series[i];
    require_same_grid(first.grid, sf.grid, "slow_system_residuals");
    if (sf.frame != first.frame || sf.epsilon != first.epsilon) {
      throw ValidationError("frames differ in epsilon or frame");
    }
    const double expect = first.tau + static_cast<double>(i) * dtau;
    if (std::abs(sf.tau - expect) > 1e-9 * std::abs(dtau) * static_cast<double>(series.size())) {
      throw ValidationError("tau samples are not uniformly spaced");
    }
  }

  std::vector<InteractionTerms> terms;
  terms.reserve(series.size());
  for (const auto& sf : series) terms.push_back(interaction_terms(sf, r_base));

  const auto& g = first.grid;
  const double e2 = first.epsilon * first.epsilon;
  const double c = 8.0 / e2;
  const double s = time_sign(first.frame);
  const std::size_t b = g.nearest_index(terms.front().upsilon_base);
  const double inv = 1.0 / (2.0 * dtau);

  SlowResiduals out;
  RealField ru(g), rv(g), ry(g), tr(g), fv(g);
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    const auto& sf = series[i];
    const auto& it = terms[i];
    const auto du = derivatives(sf.u_field, 3);
    const auto vx = deriv(sf.v_field, 1);
    const double gb = it.G[b] + e2 * it.R[b];
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double u_t = (series[i + 1].u_field[j] - series[i - 1].u_field[j]) * inv;
      const double v_t = (series[i + 1].v_field[j] - series[i - 1].v_field[j]) * inv;
      const double y_t = (terms[i + 1].upsilon[j] - terms[i - 1].upsilon[j]) * inv;
      ru[j] = s * u_t + du[3][j] + du[0][j] * du[1][j] - it.f[j] + e2 * it.r[j];
      rv[j] = s * v_t + c * vx[j] - it.g[j] - e2 * it.r[j];
      ry[j] = s * y_t + c * sf.v_field[j] - (it.G[j] + e2 * it.R[j]) + gb - c * sf.v_field[b];
      tr[j] = c * vx[j];
      fv[j] = it.g[j] + e2 * it.r[j];
    }
    out.taus.push_back(sf.tau);
    out.u.push_back(l2_norm(ru));
    out.v.push_back(l2_norm(rv));
    out.upsilon.push_back(l2_norm(ry));
    out.transport.push_back(l2_norm(tr));
    out.v_forcing.push_back(l2_norm(fv));
  }
  return out;
}

SlowFrameRecord slow_frame_record(const SlowFrame& sf, int k) {
  SlowFrameRecord r;
  r.tau = sf.tau;
  r.hk_n = sobolev_norm(sf.n_field, k);
  r.hk_dtheta = sobolev_norm(sf.dtheta_field, k);
  r.hk_u = sobolev_norm(sf.u_field, k);
  r.hk_v = sobolev_norm(sf.v_field, k);
  r.m_n = m_norm(sf.n_field);
  r.m_dtheta = m_norm(sf.dtheta_field);
  return r;
}

void write_slow_frame_log(const std::string& path, const std::vector<SlowFrameRecord>& rows) {
  CsvWriter w(path, {"tau", "hk_N", "hk_dTheta", "hk_U", "hk_V", "m_N", "m_dTheta", "res_U",
                     "res_V", "res_Upsilon"});
  for (const auto& r : rows) {
    w.cell(r.tau).cell(r.hk_n).cell(r.hk_dtheta).cell(r.hk_u).cell(r.hk_v);
    w.cell(r.m_n).cell(r.m_dtheta).cell(r.res_u).cell(r.res_v).cell(r.res_upsilon);
    w.end_row();
  }
  w.close();
}

}  // namespace gpkdv
