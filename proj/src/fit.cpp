#include "gpkdv/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpkdv/errors.hpp"

namespace gpkdv {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("fit_line: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw ValidationError("fit_line needs at least 2 points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw ValidationError("fit_line: non-finite input");
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit_line: abscissae are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    sse += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return f;
}

LineFit fit_order(std::span<const double> eps, std::span<const double> err) {
  if (eps.size() != err.size()) throw ValidationError("fit_order: length mismatch");
  std::vector<double> lx(eps.size());
  std::vector<double> ly(err.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !(err[i] > 0.0)) {
      throw ValidationError("fit_order needs positive epsilons and errors");
    }
    lx[i] = std::log(eps[i]);
    ly[i] = std::log(err[i]);
  }
  return fit_line(lx, ly);
}

EnvelopeFit fit_envelope(std::span<const double> eps, std::span<const double> tau,
                         std::span<const double> err, double power, double tau_min) {
  if (eps.size() != tau.size() || eps.size() != err.size()) {
    throw ValidationError("fit_envelope: length mismatch");
  }
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (tau[i] == 0.0 || std::abs(tau[i]) < tau_min || !(err[i] > 0.0)) continue;
    x.push_back(std::abs(tau[i]));
    y.push_back(std::log(err[i] / std::pow(eps[i], power)));
  }
  EnvelopeFit f;
  f.points = x.size();
  if (x.empty()) throw ValidationError("fit_envelope: no samples with tau != 0 and err > 0");
  LineFit lf;
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) {
    // A single time column: no growth rate can be resolved.
    for (double v : y) lf.intercept += v / static_cast<double>(y.size());
  } else {
    lf = fit_line(x, y);
  }
  f.log_c = lf.intercept;
  f.k = lf.slope;
  f.max_residual = -std::numeric_limits<double>::infinity();
  f.min_residual = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - lf.intercept - lf.slope * x[i];
    f.max_residual = std::max(f.max_residual, r);
    f.min_residual = std::min(f.min_residual, r);
  }
  f.c_bound = std::exp(f.log_c + f.max_residual);
  f.spread = std::exp(f.max_residual - f.min_residual);
  return f;
}

double collapse_ratio(std::span<const double> eps, std::span<const double> tau,
                      std::span<const double> err, double power, double tau_min) {
  if (err.size() != eps.size() * tau.size()) throw ValidationError("collapse_ratio: table shape");
  double worst = 1.0;
  for (std::size_t j = 0; j < tau.size(); ++j) {
    if (std::abs(tau[j]) < tau_min) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const double v = err[i * tau.size() + j] / std::pow(eps[i], power);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo > 0.0) worst = std::max(worst, hi / lo);
  }
  return worst;
}

double bounding_slope(std::span<const double> tau, std::span<const double> v) {
  if (tau.size() != v.size() || tau.empty()) throw ValidationError("bounding_slope: bad series");
  double s = 0.0;
  for (std::size_t i = 1; i < tau.size(); ++i) {
    const double dt = std::abs(tau[i] - tau[0]);
    if (dt > 0.0) s = std::max(s, (v[i] - v[0]) / dt);
  }
  return s;
}

}  // namespace gpkdv
