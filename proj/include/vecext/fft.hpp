#pragma once

// In-place iterative radix-2 FFT for power-of-two lengths.

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace vecext {

class FftPlan {
 public:
  explicit FftPlan(std::size_t size) : size_(size) {
    if (size == 0 || !std::has_single_bit(size)) {
      throw std::invalid_argument("FftPlan: size must be a power of two");
    }
    const int bits = std::countr_zero(size);
    reversed_.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      reversed_[i] = r;
    }
    twiddles_.resize(size / 2 + (size == 1 ? 1 : 0));
    for (std::size_t k = 0; k < size / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(size);
      twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
  }

  std::size_t size() const { return size_; }

  // Computes X_k = sum_j x_j exp(-2 pi i jk / N).
  void forward(std::span<std::complex<double>> data) const { run(data, false); }

  // Computes x_j = sum_k X_k exp(+2 pi i jk / N) (no 1/N normalization).
  void backward(std::span<std::complex<double>> data) const { run(data, true); }

 private:
  void run(std::span<std::complex<double>> data, bool inverse) const {
    if (data.size() != size_) throw std::invalid_argument("FftPlan: length mismatch");
    for (std::size_t i = 0; i < size_; ++i) {
      const std::size_t r = reversed_[i];
      if (i < r) std::swap(data[i], data[r]);
    }
    for (std::size_t len = 2; len <= size_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = size_ / len;
      for (std::size_t start = 0; start < size_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const std::complex<double> w = twiddles_[k * stride];
          const double wr = w.real();
          const double wi = inverse ? -w.imag() : w.imag();
          const std::complex<double> a = data[start + k];
          const std::complex<double> x = data[start + k + half];
          const std::complex<double> b{x.real() * wr - x.imag() * wi, x.real() * wi + x.imag() * wr};
          data[start + k] = a + b;
          data[start + k + half] = a - b;
        }
      }
    }
  }

  std::size_t size_;
  std::vector<std::size_t> reversed_;
  std::vector<std::complex<double>> twiddles_;
};

}  // namespace vecext
