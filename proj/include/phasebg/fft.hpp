#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace phasebg::detail {

/// Row-wise and column-wise 1D FFTs over a row-major complex buffer.
/// One instance caches plans per transform length.
class RowColFFT {
 public:
  void forward_rows(std::vector<std::complex<double>>& a, std::size_t R, std::size_t C) {
    tmp_.resize(C);
    for (std::size_t i = 0; i < R; ++i) {
      fft_.fwd(tmp_.data(), a.data() + i * C, static_cast<int>(C));
      std::copy(tmp_.begin(), tmp_.end(), a.begin() + static_cast<std::ptrdiff_t>(i * C));
    }
  }
  void inverse_rows(std::vector<std::complex<double>>& a, std::size_t R, std::size_t C) {
    tmp_.resize(C);
    for (std::size_t i = 0; i < R; ++i) {
      fft_.inv(tmp_.data(), a.data() + i * C, static_cast<int>(C));
      std::copy(tmp_.begin(), tmp_.end(), a.begin() + static_cast<std::ptrdiff_t>(i * C));
    }
  }
  void forward_cols(std::vector<std::complex<double>>& a, std::size_t R, std::size_t C) {
    col_.resize(R);
    tmp_.resize(R);
    for (std::size_t j = 0; j < C; ++j) {
      for (std::size_t i = 0; i < R; ++i) col_[i] = a[i * C + j];
      fft_.fwd(tmp_.data(), col_.data(), static_cast<int>(R));
      for (std::size_t i = 0; i < R; ++i) a[i * C + j] = tmp_[i];
    }
  }
  void inverse_cols(std::vector<std::complex<double>>& a, std::size_t R, std::size_t C) {
    col_.resize(R);
    tmp_.resize(R);
    for (std::size_t j = 0; j < C; ++j) {
      for (std::size_t i = 0; i < R; ++i) col_[i] = a[i * C + j];
      fft_.inv(tmp_.data(), col_.data(), static_cast<int>(R));
      for (std::size_t i = 0; i < R; ++i) a[i * C + j] = tmp_[i];
    }
  }

  /// 1D spectrum of a real kernel.
  std::vector<std::complex<double>> spectrum(const std::vector<double>& taps) {
    std::vector<std::complex<double>> in(taps.begin(), taps.end());
    std::vector<std::complex<double>> out(taps.size());
    fft_.fwd(out.data(), in.data(), static_cast<int>(taps.size()));
    return out;
  }

 private:
  Eigen::FFT<double> fft_;
  std::vector<std::complex<double>> tmp_;
  std::vector<std::complex<double>> col_;
};

}  // namespace phasebg::detail
