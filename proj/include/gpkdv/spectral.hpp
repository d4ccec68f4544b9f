#pragma once

#include <span>
#include <vector>

#include "gpkdv/grid.hpp"

namespace gpkdv {

inline constexpr int kDefaultMaxDerivative = 6;

/// Spectral derivative: mode j is multiplied by (i k_j)^order. For odd orders the
/// Nyquist mode is dropped so real input stays real. Order 0 returns the input.
/// Throws ValidationError for order outside [0, max_order] and NumericalError for
/// non-finite samples.
RealField deriv(const RealField& f, int order, int max_order = kDefaultMaxDerivative);
ComplexField deriv(const ComplexField& f, int order, int max_order = kDefaultMaxDerivative);

/// All derivatives of orders 0..max_order from a single forward transform.
std::vector<RealField> derivatives(const RealField& f, int max_order);
std::vector<ComplexField> derivatives(const ComplexField& f, int max_order);

/// Rectangle-rule integral over the box (spectrally exact for band-limited integrands).
double integral(const RealField& f);
double integral(std::span<const double> values, double spacing);

/// Cumulative trapezoid integral from the left node.
/// Returns n + 1 values: C[0] = 0, C[j] = integral from x_0 to x_j for j < n, and
/// C[n] closes the wrap interval [x_{n-1}, x_0 + L] so that C[n] equals integral(f).
std::vector<double> cumulative_integral(const RealField& f);

/// x -> integral of f from base to x, by cumulative trapezoid from the node nearest
/// base. Throws ValidationError if base lies outside the box.
RealField antiderivative(const RealField& f, double base);

/// Antiderivative through Fourier division for the mean-free part plus a linear ramp
/// for the mean, anchored to zero at the node nearest base. Accurate to spectral
/// precision for smooth f; the result is not periodic when the mean is nonzero.
RealField spectral_antiderivative(const RealField& f, double base);

double l2_norm(const RealField& f);
double l2_norm(const ComplexField& f);
double linf_norm(const RealField& f);
double linf_norm(const ComplexField& f);
double l1_norm(const RealField& f);

/// (sum_{j=0}^{k} ||d^j f||_2^2)^{1/2}, evaluated through Parseval with the same
/// Nyquist convention as deriv.
double sobolev_norm(const RealField& f, int k, int max_order = kDefaultMaxDerivative);
double sobolev_norm(const ComplexField& f, int k, int max_order = kDefaultMaxDerivative);

/// sup over node pairs of |integral_a^b f| = max C - min C over cumulative_integral.
double m_norm(const RealField& f);

/// Band-limited evaluation of f(x + shift) at the target nodes.
///
/// Integer spacing ratios in either direction use an exact Fourier shift followed by
/// decimation or zero-padded upsampling; any other ratio falls back to a direct
/// trigonometric sum. Unless allow_wrap is set, the shifted target window must lie
/// inside the source window modulo its period; otherwise NumericalError("window escape").
RealField resample(const RealField& f, const SpectralGrid& target, double shift = 0.0,
                   bool allow_wrap = false);
ComplexField resample(const ComplexField& f, const SpectralGrid& target, double shift = 0.0,
                      bool allow_wrap = false);

/// Band-limited (periodic) evaluation at arbitrary points.
std::vector<double> evaluate_at(const RealField& f, std::span<const double> points);

/// Fraction of spectral energy carried by the top third of |k|, after removing the mean.
double top_third_energy_fraction(const ComplexField& f);
double top_third_energy_fraction(const RealField& f);

}  // namespace gpkdv
