#pragma once

// Real circular convolution with a fixed real kernel through FFTW.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace sld::detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// y_k = sum_l g_{(k-l) mod n} x_l, computed as IFFT(FFT(g) * FFT(x)) / n.
class CircularConvolver {
public:
  CircularConvolver(std::span<const double> g) : n_(g.size()), bins_(g.size() / 2 + 1) {
    if (n_ == 0) throw std::invalid_argument("CircularConvolver: empty kernel");
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_));
    spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins_));
    if (real_ == nullptr || spec_ == nullptr) {
      release();
      throw std::bad_alloc();
    }
    {
      std::lock_guard lock(fftw_planner_mutex());
      forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, spec_, FFTW_ESTIMATE);
      backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec_, real_, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < n_; ++i) real_[i] = g[i];
    fftw_execute(forward_);
    kernel_hat_.resize(bins_);
    for (std::size_t i = 0; i < bins_; ++i) kernel_hat_[i] = {spec_[i][0], spec_[i][1]};
  }

  CircularConvolver(const CircularConvolver&) = delete;
  CircularConvolver& operator=(const CircularConvolver&) = delete;
  ~CircularConvolver() { release(); }

  [[nodiscard]] std::size_t size() const { return n_; }

  /// Not safe for concurrent calls on the same object (shared work buffers).
  void apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) real_[i] = x[i];
    fftw_execute(forward_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < bins_; ++i) {
      const std::complex<double> v = std::complex<double>(spec_[i][0], spec_[i][1]) * kernel_hat_[i] * scale;
      spec_[i][0] = v.real();
      spec_[i][1] = v.imag();
    }
    fftw_execute(backward_);
    for (std::size_t i = 0; i < n_; ++i) y[i] = real_[i];
  }

private:
  void release() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (backward_) fftw_destroy_plan(backward_);
    if (real_) fftw_free(real_);
    if (spec_) fftw_free(spec_);
    forward_ = backward_ = nullptr;
    real_ = nullptr;
    spec_ = nullptr;
  }

  std::size_t n_;
  std::size_t bins_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
  std::vector<std::complex<double>> kernel_hat_;
};

}  // namespace sld::detail
