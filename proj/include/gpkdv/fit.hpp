#pragma once

#include <span>
#include <vector>

namespace gpkdv {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Needs >= 2 points with distinct x.
/// r2 is 1 when y is constant and exactly fitted.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Slope of log(err) against log(eps): the observed order p in err ~ eps^p.
/// Throws ValidationError on non-positive input.
LineFit fit_order(std::span<const double> eps, std::span<const double> err);

/// Least-squares fit of log(err / eps^power) = log C + K |tau| over every sample with
/// |tau| >= tau_min, tau != 0 and err > 0. c_bound = C exp(max residual) is the smallest multiple of the
/// fitted curve lying above every sample.
struct EnvelopeFit {
  double log_c = 0.0;
  double k = 0.0;
  double c_bound = 0.0;
  double max_residual = 0.0;
  double min_residual = 0.0;
  /// exp(max_residual - min_residual): how far the tightest single envelope sits above
  /// the lowest sample.
  double spread = 1.0;
  std::size_t points = 0;
};
EnvelopeFit fit_envelope(std::span<const double> eps, std::span<const double> tau,
                         std::span<const double> err, double power = 2.0, double tau_min = 0.0);

/// Largest over tau of max/min across eps of err / eps^power. The samples form a table
/// err[i * n_tau + j] for eps[i], tau[j]; columns with |tau| < tau_min are skipped.
double collapse_ratio(std::span<const double> eps, std::span<const double> tau,
                      std::span<const double> err, double power, double tau_min);

/// Smallest S >= 0 with v(tau) <= v(tau_0) + S |tau - tau_0| at every sample.
double bounding_slope(std::span<const double> tau, std::span<const double> v);

}  // namespace gpkdv
