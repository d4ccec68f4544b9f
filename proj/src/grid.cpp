#include "gpkdv/grid.hpp"

#include <algorithm>
#include <string>

namespace gpkdv {

bool is_power_of_two(std::size_t n) noexcept { return n >= 1 && (n & (n - 1)) == 0; }

SpectralGrid::SpectralGrid(double length, std::size_t n_points, double center)
    : length_(length), n_(n_points), center_(center) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw ValidationError("grid length must be positive and finite, got " + std::to_string(length));
  }
  if (n_points < 2 || !is_power_of_two(n_points)) {
    throw ValidationError("grid point count must be a power of two >= 2, got " +
                          std::to_string(n_points));
  }
  if (!std::isfinite(center)) throw ValidationError("grid center must be finite");
}

std::size_t SpectralGrid::nearest_index(double x) const noexcept {
  const double r = std::round((x - left()) / spacing());
  if (r <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(r), n_ - 1);
}

std::vector<double> SpectralGrid::nodes() const {
  std::vector<double> x(n_);
  for (std::size_t j = 0; j < n_; ++j) x[j] = node(j);
  return x;
}

void require_same_grid(const SpectralGrid& a, const SpectralGrid& b, const char* what) {
  if (!(a == b)) throw ValidationError(std::string(what) + ": fields live on different grids");
}

namespace {

template <typename Op>
RealField zip(const RealField& a, const RealField& b, Op op) {
  require_same_grid(a.grid, b.grid, "pointwise operation");
  RealField out(a.grid);
  for (std::size_t j = 0; j < a.size(); ++j) out.values[j] = op(a.values[j], b.values[j]);
  return out;
}

}  // namespace

RealField operator+(const RealField& a, const RealField& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
RealField operator-(const RealField& a, const RealField& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
RealField operator*(const RealField& a, const RealField& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}
RealField operator*(double s, const RealField& a) {
  RealField out(a.grid);
  for (std::size_t j = 0; j < a.size(); ++j) out.values[j] = s * a.values[j];
  return out;
}

RealField real_part(const ComplexField& f) {
  RealField out(f.grid);
  for (std::size_t j = 0; j < f.size(); ++j) out.values[j] = f.values[j].real();
  return out;
}

RealField imag_part(const ComplexField& f) {
  RealField out(f.grid);
  for (std::size_t j = 0; j < f.size(); ++j) out.values[j] = f.values[j].imag();
  return out;
}

}  // namespace gpkdv
