#include "gpkdv/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gpkdv/fft.hpp"

namespace gpkdv {

namespace {

void check_order(int order, int max_order) {
  if (order < 0 || order > max_order) {
    throw ValidationError("derivative order " + std::to_string(order) + " outside [0, " +
                          std::to_string(max_order) + "]");
  }
}

template <typename T>
void check_finite(const Field<T>& f, const char* what) {
  if (!f.all_finite()) throw NumericalError(std::string("non-finite samples in ") + what);
}

// (i k)^order, with the Nyquist mode dropped for odd orders.
complex deriv_multiplier(const SpectralGrid& g, std::size_t j, int order) {
  if (order == 0) return 1.0;
  if (j == g.nyquist_index() && order % 2 == 1) return 0.0;
  const double k = g.wavenumber(j);
  complex m = 1.0;
  for (int p = 0; p < order; ++p) m *= complex(0.0, k);
  return m;
}

template <typename T>
T from_complex(complex z) {
  if constexpr (std::is_same_v<T, complex>) {
    return z;
  } else {
    return z.real();
  }
}

template <typename T>
std::vector<Field<T>> derivatives_impl(const Field<T>& f, int max_order) {
  check_order(max_order, kDefaultMaxDerivative);
  check_finite(f, "deriv");
  const auto& g = f.grid;
  const std::size_t n = g.size();
  const auto spec = spectrum(f.span());
  auto& ft = cached_transform(n);
  std::vector<Field<T>> out;
  out.reserve(static_cast<std::size_t>(max_order) + 1);
  out.push_back(f);
  for (int order = 1; order <= max_order; ++order) {
    auto buf = ft.data();
    for (std::size_t j = 0; j < n; ++j) buf[j] = spec[j] * deriv_multiplier(g, j, order);
    ft.backward();
    Field<T> d(g);
    for (std::size_t j = 0; j < n; ++j) d.values[j] = from_complex<T>(buf[j]);
    out.push_back(std::move(d));
  }
  return out;
}

template <typename T>
Field<T> deriv_impl(const Field<T>& f, int order, int max_order) {
  check_order(order, max_order);
  check_finite(f, "deriv");
  if (order == 0) return f;
  const auto& g = f.grid;
  const std::size_t n = g.size();
  auto& ft = cached_transform(n);
  ft.load(f.span());
  ft.forward();
  auto buf = ft.data();
  for (std::size_t j = 0; j < n; ++j) buf[j] *= deriv_multiplier(g, j, order);
  ft.backward();
  Field<T> d(g);
  for (std::size_t j = 0; j < n; ++j) d.values[j] = from_complex<T>(buf[j]);
  return d;
}

template <typename T>
double sobolev_impl(const Field<T>& f, int k, int max_order) {
  check_order(k, max_order);
  check_finite(f, "sobolev_norm");
  const auto& g = f.grid;
  const std::size_t n = g.size();
  const auto spec = spectrum(f.span());
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double k2 = g.wavenumber(j) * g.wavenumber(j);
    const bool nyq = j == g.nyquist_index();
    double weight = 0.0;
    double p = 1.0;
    for (int order = 0; order <= k; ++order) {
      if (!(nyq && order % 2 == 1)) weight += p;
      p *= k2;
    }
    total += weight * std::norm(spec[j]);
  }
  // Parseval: h * sum |f_j|^2 = (L / n^2) * sum |F_k|^2.
  return std::sqrt(total * g.length() / (static_cast<double>(n) * static_cast<double>(n)));
}

// Fourier coefficients of a periodic field, with the Nyquist term split so that
// e^{i k_N xi} interpolates as cos(k_N xi).
template <typename T>
std::vector<T> resample_impl(const Field<T>& f, const SpectralGrid& target, double shift,
                             bool allow_wrap) {
  check_finite(f, "resample");
  const auto& s = f.grid;
  const double ls = s.length();
  const double tol = 1e-9 * ls;
  if (!allow_wrap) {
    if (target.length() > ls + tol) {
      throw NumericalError("window escape: target window longer than source window");
    }
    const double a = target.left() + shift;
    const double wraps = std::floor((a - s.left()) / ls + 1e-12);
    const double a0 = a - wraps * ls;
    if (a0 + target.length() > s.right() + tol) {
      throw NumericalError("window escape: shifted window [" + std::to_string(a) + ", " +
                           std::to_string(a + target.length()) + ") leaves source window [" +
                           std::to_string(s.left()) + ", " + std::to_string(s.right()) + ")");
    }
  }

  const std::size_t n = s.size();
  const std::size_t nt = target.size();
  const double hs = s.spacing();
  const double ht = target.spacing();
  // Position of target node 0 in source index units.
  const double p0 = (target.left() + shift - s.left()) / hs;
  const auto spec = spectrum(f.span());
  std::vector<T> out(nt);

  const double ratio = ht / hs;
  const double down = std::round(ratio);
  const double up = std::round(1.0 / ratio);
  if (down >= 1.0 && std::abs(ratio - down) <= 1e-10 * ratio) {
    const auto stride = static_cast<std::size_t>(down);
    const double i0 = std::round(p0);
    const double delta = (p0 - i0) * hs;
    auto& ft = cached_transform(n);
    auto buf = ft.data();
    for (std::size_t j = 0; j < n; ++j) {
      const double k = s.wavenumber(j);
      buf[j] = j == s.nyquist_index() ? spec[j] * std::cos(k * delta)
                                      : spec[j] * std::polar(1.0, k * delta);
    }
    ft.backward();
    const auto ni = static_cast<long long>(n);
    long long idx = static_cast<long long>(i0) % ni;
    if (idx < 0) idx += ni;
    for (std::size_t j = 0; j < nt; ++j) {
      out[j] = from_complex<T>(buf[static_cast<std::size_t>(idx)]);
      idx = (idx + static_cast<long long>(stride)) % ni;
    }
    return out;
  }
  if (up >= 2.0 && std::abs(1.0 / ratio - up) <= 1e-10 / ratio) {
    const auto factor = static_cast<std::size_t>(up);
    const std::size_t nu = n * factor;
    const double hu = hs / up;
    const double q0 = p0 * up;
    const double i0 = std::round(q0);
    const double delta = (q0 - i0) * hu;
    auto& ft = cached_transform(nu);
    auto buf = ft.data();
    std::fill(buf.begin(), buf.end(), complex{});
    const std::size_t half = n / 2;
    const double scale = up;
    const double two_pi_over_l = 2.0 * std::numbers::pi / ls;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == half) continue;
      const std::size_t dst = j < half ? j : nu - (n - j);
      buf[dst] = scale * spec[j] * std::polar(1.0, s.wavenumber(j) * delta);
    }
    // Nyquist split evenly between +k_N and -k_N.
    const double kn = two_pi_over_l * static_cast<double>(half);
    buf[half] = 0.5 * scale * spec[half] * std::polar(1.0, kn * delta);
    buf[nu - half] = 0.5 * scale * spec[half] * std::polar(1.0, -kn * delta);
    ft.backward();
    const auto ni = static_cast<long long>(nu);
    long long idx = static_cast<long long>(i0) % ni;
    if (idx < 0) idx += ni;
    for (std::size_t j = 0; j < nt; ++j) {
      out[j] = from_complex<T>(buf[static_cast<std::size_t>(idx)]);
      idx = (idx + 1) % ni;
    }
    return out;
  }

  // Direct trigonometric sum.
  const double inv_n = 1.0 / static_cast<double>(n);
  const std::size_t half = n / 2;
  for (std::size_t t = 0; t < nt; ++t) {
    const double xi = (p0 + static_cast<double>(t) * ratio) * hs;
    const double k1 = 2.0 * std::numbers::pi / ls;
    const complex step = std::polar(1.0, k1 * xi);
    complex acc = spec[0];
    complex ep = step;
    complex em = std::conj(step);
    for (std::size_t m = 1; m < half; ++m) {
      acc += spec[m] * ep + spec[n - m] * em;
      ep *= step;
      em *= std::conj(step);
    }
    acc += spec[half] * std::cos(k1 * static_cast<double>(half) * xi);
    out[t] = from_complex<T>(acc * inv_n);
  }
  return out;
}

template <typename T>
double top_third_impl(const Field<T>& f) {
  const auto& g = f.grid;
  auto spec = spectrum(f.span());
  spec[0] = 0.0;
  const double cutoff = 2.0 * g.k_max() / 3.0;
  double hi = 0.0;
  double all = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double e = std::norm(spec[j]);
    all += e;
    if (std::abs(g.wavenumber(j)) > cutoff) hi += e;
  }
  return all > 0.0 ? hi / all : 0.0;
}

}  // namespace

RealField deriv(const RealField& f, int order, int max_order) {
  return deriv_impl(f, order, max_order);
}
ComplexField deriv(const ComplexField& f, int order, int max_order) {
  return deriv_impl(f, order, max_order);
}

std::vector<RealField> derivatives(const RealField& f, int max_order) {
  return derivatives_impl(f, max_order);
}
std::vector<ComplexField> derivatives(const ComplexField& f, int max_order) {
  return derivatives_impl(f, max_order);
}

double integral(std::span<const double> values, double spacing) {
  double s = 0.0;
  for (double v : values) s += v;
  return s * spacing;
}

double integral(const RealField& f) { return integral(f.span(), f.grid.spacing()); }

std::vector<double> cumulative_integral(const RealField& f) {
  const std::size_t n = f.size();
  const double h = f.grid.spacing();
  std::vector<double> c(n + 1, 0.0);
  for (std::size_t j = 1; j < n; ++j) c[j] = c[j - 1] + 0.5 * h * (f[j - 1] + f[j]);
  c[n] = c[n - 1] + 0.5 * h * (f[n - 1] + f[0]);
  return c;
}

RealField antiderivative(const RealField& f, double base) {
  const auto& g = f.grid;
  if (!std::isfinite(base) || !g.contains(base, 1e-12 * g.length())) {
    throw ValidationError("antiderivative base " + std::to_string(base) + " outside box [" +
                          std::to_string(g.left()) + ", " + std::to_string(g.right()) + "]");
  }
  check_finite(f, "antiderivative");
  const auto c = cumulative_integral(f);
  const std::size_t i0 = g.nearest_index(base);
  RealField out(g);
  for (std::size_t j = 0; j < g.size(); ++j) out[j] = c[j] - c[i0];
  return out;
}

RealField spectral_antiderivative(const RealField& f, double base) {
  const auto& g = f.grid;
  if (!std::isfinite(base) || !g.contains(base, 1e-12 * g.length())) {
    throw ValidationError("antiderivative base " + std::to_string(base) + " outside box");
  }
  check_finite(f, "antiderivative");
  const std::size_t n = g.size();
  auto& ft = cached_transform(n);
  ft.load(f.span());
  ft.forward();
  auto buf = ft.data();
  const double mean = buf[0].real() / static_cast<double>(n);
  buf[0] = 0.0;
  buf[g.nyquist_index()] = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    if (j != g.nyquist_index()) buf[j] /= complex(0.0, g.wavenumber(j));
  }
  ft.backward();
  const std::size_t i0 = g.nearest_index(base);
  RealField out(g);
  const double x0 = g.node(i0);
  const double p0 = buf[i0].real();
  for (std::size_t j = 0; j < n; ++j) out[j] = buf[j].real() - p0 + mean * (g.node(j) - x0);
  return out;
}

double l2_norm(const RealField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(s * f.grid.spacing());
}

double l2_norm(const ComplexField& f) {
  double s = 0.0;
  for (const auto& v : f.values) s += std::norm(v);
  return std::sqrt(s * f.grid.spacing());
}

double linf_norm(const RealField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double linf_norm(const ComplexField& f) {
  double m = 0.0;
  for (const auto& v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double l1_norm(const RealField& f) {
  double s = 0.0;
  for (double v : f.values) s += std::abs(v);
  return s * f.grid.spacing();
}

double sobolev_norm(const RealField& f, int k, int max_order) {
  return sobolev_impl(f, k, max_order);
}
double sobolev_norm(const ComplexField& f, int k, int max_order) {
  return sobolev_impl(f, k, max_order);
}

double m_norm(const RealField& f) {
  const auto c = cumulative_integral(f);
  const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
  return *hi - *lo;
}

RealField resample(const RealField& f, const SpectralGrid& target, double shift,
                   bool allow_wrap) {
  return RealField(target, resample_impl(f, target, shift, allow_wrap));
}

ComplexField resample(const ComplexField& f, const SpectralGrid& target, double shift,
                      bool allow_wrap) {
  return ComplexField(target, resample_impl(f, target, shift, allow_wrap));
}

std::vector<double> evaluate_at(const RealField& f, std::span<const double> points) {
  check_finite(f, "evaluate_at");
  const auto& s = f.grid;
  const std::size_t n = s.size();
  const std::size_t half = n / 2;
  const auto spec = spectrum(f.span());
  const double k1 = 2.0 * std::numbers::pi / s.length();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> out(points.size());
  for (std::size_t t = 0; t < points.size(); ++t) {
    const double xi = points[t] - s.left();
    const complex step = std::polar(1.0, k1 * xi);
    double acc = spec[0].real();
    complex ep = step;
    for (std::size_t m = 1; m < half; ++m) {
      // Real input: F_{n-m} = conj(F_m).
      acc += 2.0 * (spec[m] * ep).real();
      ep *= step;
    }
    acc += spec[half].real() * std::cos(k1 * static_cast<double>(half) * xi);
    out[t] = acc * inv_n;
  }
  return out;
}

double top_third_energy_fraction(const ComplexField& f) { return top_third_impl(f); }
double top_third_energy_fraction(const RealField& f) { return top_third_impl(f); }

}  // namespace gpkdv
