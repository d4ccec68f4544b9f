#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <type_traits>
#include <vector>

#include "gpkdv/errors.hpp"

namespace gpkdv {

using complex = std::complex<double>;

/// Uniform periodic grid on [center - length/2, center + length/2).
///
/// Nodes are x_j = left() + j * spacing(). Wavenumbers follow the usual FFT
/// ordering: 2*pi*j/length for j < n/2 and 2*pi*(j - n)/length otherwise, so
/// the Nyquist mode carries the negative value -pi*n/length.
class SpectralGrid {
 public:
  SpectralGrid() = default;

  /// Throws ValidationError unless length > 0 and n_points is a power of two >= 2.
  SpectralGrid(double length, std::size_t n_points, double center = 0.0);

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return n_; }
  double center() const noexcept { return center_; }
  double spacing() const noexcept { return length_ / static_cast<double>(n_); }
  double left() const noexcept { return center_ - 0.5 * length_; }
  double right() const noexcept { return center_ + 0.5 * length_; }

  double node(std::size_t j) const noexcept {
    return left() + static_cast<double>(j) * spacing();
  }
  double wavenumber(std::size_t j) const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(n_);
    auto m = static_cast<std::ptrdiff_t>(j);
    if (m >= n / 2) m -= n;
    return 2.0 * std::numbers::pi * static_cast<double>(m) / length_;
  }
  /// Largest |k| on the ladder (the Nyquist magnitude).
  double k_max() const noexcept { return std::numbers::pi * static_cast<double>(n_) / length_; }
  std::size_t nyquist_index() const noexcept { return n_ / 2; }

  /// Index of the node nearest to x, clamped to the grid.
  std::size_t nearest_index(double x) const noexcept;
  bool contains(double x, double tol = 0.0) const noexcept {
    return x >= left() - tol && x <= right() + tol;
  }

  /// Same node count and center scaled by `factor` (physical -> slow units).
  SpectralGrid scaled(double factor) const {
    return SpectralGrid(length_ * factor, n_, center_ * factor);
  }

  std::vector<double> nodes() const;

  // Lengths and centers compare to 1e-12 relative to the length.
  friend bool operator==(const SpectralGrid& a, const SpectralGrid& b) noexcept {
    const double tol = 1e-12 * std::max(a.length_, b.length_);
    return a.n_ == b.n_ && std::abs(a.length_ - b.length_) <= tol &&
           std::abs(a.center_ - b.center_) <= tol;
  }

 private:
  double length_ = 0.0;
  std::size_t n_ = 0;
  double center_ = 0.0;
};

bool is_power_of_two(std::size_t n) noexcept;

/// Sampled function on a SpectralGrid.
template <typename T>
struct Field {
  SpectralGrid grid;
  std::vector<T> values;

  Field() = default;
  explicit Field(const SpectralGrid& g) : grid(g), values(g.size(), T{}) {}
  Field(const SpectralGrid& g, std::vector<T> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) {
      throw ValidationError("field length does not match grid size");
    }
  }

  std::size_t size() const noexcept { return values.size(); }
  T& operator[](std::size_t j) { return values[j]; }
  const T& operator[](std::size_t j) const { return values[j]; }
  std::span<T> span() noexcept { return values; }
  std::span<const T> span() const noexcept { return values; }

  template <typename F>
  static Field sample(const SpectralGrid& g, F&& f) {
    Field out(g);
    for (std::size_t j = 0; j < g.size(); ++j) out.values[j] = f(g.node(j));
    return out;
  }

  bool all_finite() const noexcept {
    for (const auto& v : values) {
      if constexpr (std::is_same_v<T, complex>) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
      } else {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  }
};

using RealField = Field<double>;
using ComplexField = Field<complex>;

// Pointwise arithmetic on real fields sharing a grid.
RealField operator+(const RealField& a, const RealField& b);
RealField operator-(const RealField& a, const RealField& b);
RealField operator*(const RealField& a, const RealField& b);
RealField operator*(double s, const RealField& a);

/// Throws ValidationError if the grids differ.
void require_same_grid(const SpectralGrid& a, const SpectralGrid& b, const char* what);

RealField real_part(const ComplexField& f);
RealField imag_part(const ComplexField& f);

}  // namespace gpkdv
