#include "gpkdv/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace gpkdv {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FourierTransform::FourierTransform(std::size_t n) : n_(n) {
  if (n == 0) throw ValidationError("FFT size must be positive");
  data_ = reinterpret_cast<complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (data_ == nullptr) throw Error("fftw_malloc failed");
  std::fill(data_, data_ + n, complex{});
  auto* buf = reinterpret_cast<fftw_complex*>(data_);
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

FourierTransform::~FourierTransform() { release(); }

FourierTransform::FourierTransform(FourierTransform&& other) noexcept
    : n_(other.n_),
      data_(other.data_),
      forward_plan_(other.forward_plan_),
      backward_plan_(other.backward_plan_) {
  other.n_ = 0;
  other.data_ = nullptr;
  other.forward_plan_ = nullptr;
  other.backward_plan_ = nullptr;
}

FourierTransform& FourierTransform::operator=(FourierTransform&& other) noexcept {
  if (this != &other) {
    release();
    std::swap(n_, other.n_);
    std::swap(data_, other.data_);
    std::swap(forward_plan_, other.forward_plan_);
    std::swap(backward_plan_, other.backward_plan_);
  }
  return *this;
}

void FourierTransform::release() noexcept {
  {
    std::lock_guard lock(planner_mutex());
    if (forward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    if (backward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
  }
  forward_plan_ = backward_plan_ = nullptr;
  if (data_ != nullptr) fftw_free(data_);
  data_ = nullptr;
}

void FourierTransform::forward() noexcept { fftw_execute(static_cast<fftw_plan>(forward_plan_)); }

void FourierTransform::backward() noexcept {
  fftw_execute(static_cast<fftw_plan>(backward_plan_));
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t j = 0; j < n_; ++j) data_[j] *= scale;
}

void FourierTransform::backward_unnormalized() noexcept {
  fftw_execute(static_cast<fftw_plan>(backward_plan_));
}

void FourierTransform::load(std::span<const complex> values) noexcept {
  std::copy(values.begin(), values.end(), data_);
}

void FourierTransform::load(std::span<const double> values) noexcept {
  for (std::size_t j = 0; j < n_; ++j) data_[j] = complex(values[j], 0.0);
}

FourierTransform& cached_transform(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<FourierTransform>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<FourierTransform>(n);
  return *slot;
}

std::vector<complex> spectrum(std::span<const double> values) {
  auto& ft = cached_transform(values.size());
  ft.load(values);
  ft.forward();
  return {ft.data().begin(), ft.data().end()};
}

std::vector<complex> spectrum(std::span<const complex> values) {
  auto& ft = cached_transform(values.size());
  ft.load(values);
  ft.forward();
  return {ft.data().begin(), ft.data().end()};
}

}  // namespace gpkdv
