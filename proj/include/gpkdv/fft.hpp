#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gpkdv/grid.hpp"

namespace gpkdv {

/// In-place complex FFT of fixed size on an aligned scratch buffer.
///
/// Plans are created with FFTW_ESTIMATE so results are bit-reproducible
/// across runs. Plan creation and destruction are serialized internally;
/// execution on distinct objects is safe from different threads.
class FourierTransform {
 public:
  explicit FourierTransform(std::size_t n);
  ~FourierTransform();

  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;
  FourierTransform(FourierTransform&& other) noexcept;
  FourierTransform& operator=(FourierTransform&& other) noexcept;

  std::size_t size() const noexcept { return n_; }
  std::span<complex> data() noexcept { return {data_, n_}; }
  std::span<const complex> data() const noexcept { return {data_, n_}; }

  /// Unnormalized forward transform: X_j = sum_m x_m exp(-2 pi i j m / n).
  void forward() noexcept;
  /// Inverse transform including the 1/n factor.
  void backward() noexcept;
  /// Inverse transform without the 1/n factor.
  void backward_unnormalized() noexcept;

  void load(std::span<const complex> values) noexcept;
  void load(std::span<const double> values) noexcept;

 private:
  void release() noexcept;

  std::size_t n_ = 0;
  complex* data_ = nullptr;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

/// Per-thread cached transform of the requested size.
FourierTransform& cached_transform(std::size_t n);

/// Forward spectrum of a real or complex sample vector.
std::vector<complex> spectrum(std::span<const double> values);
std::vector<complex> spectrum(std::span<const complex> values);

}  // namespace gpkdv
