#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "phasebg/field.hpp"

namespace phasebg {

/// Polynomial-annihilation detector: coefficients c of an order-m stencil,
/// the normalization q, and the anchor offset that places the peak of the
/// unit-jump response on the pixel immediately left of / above the jump.
struct EdgeKernel {
  int order = 0;               ///< m
  std::vector<double> coeffs;  ///< length m+1
  double q = 0.0;              ///< normalization applied to the difference weights
  int anchor = 0;              ///< peak offset of the raw stencil response

  int taps() const { return order + 1; }
};

namespace detail {

// m-th finite-difference weights on a unit grid: (-1)^(m+1-k) * C(m, k-1).
inline std::vector<double> difference_weights(int m) {
  std::vector<double> w(static_cast<std::size_t>(m) + 1);
  double binom = 1.0;
  for (int k = 0; k <= m; ++k) {
    w[static_cast<std::size_t>(k)] = ((m - k) % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * (m - k) / (k + 1);
  }
  return w;
}

}  // namespace detail

/// Builds the order-m PA coefficients. The m+1 weights annihilate sampled
/// polynomials of degree <= m-1; q is fixed so the response to a unit
/// Heaviside jump peaks at exactly 1.
inline EdgeKernel pa_coefficients(int m) {
  if (m < 1 || m > 8)
    throw std::invalid_argument("pa_coefficients: order must be in [1, 8]");
  std::vector<double> w = detail::difference_weights(m);
  // Responses to a unit jump: with the jump d+1 taps into the stencil the
  // response is the tail sum over taps right of the jump, d = 0..m-1.
  std::vector<double> tails(static_cast<std::size_t>(m), 0.0);
  for (int d = m - 1; d >= 0; --d) {
    tails[static_cast<std::size_t>(d)] = w[static_cast<std::size_t>(d) + 1];
    if (d + 1 < m) tails[static_cast<std::size_t>(d)] += tails[static_cast<std::size_t>(d) + 1];
  }
  int peak = 0;
  for (int d = 1; d < m; ++d) {
    const double a = std::abs(tails[static_cast<std::size_t>(d)]);
    const double b = std::abs(tails[static_cast<std::size_t>(peak)]);
    if (a > b + 1e-12 || (a > b - 1e-12 && tails[static_cast<std::size_t>(d)] > 0.0 &&
                          tails[static_cast<std::size_t>(peak)] < 0.0))
      peak = d;
  }
  EdgeKernel k;
  k.order = m;
  k.q = 1.0 / tails[static_cast<std::size_t>(peak)];
  k.anchor = peak;
  k.coeffs.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) k.coeffs[i] = w[i] * k.q;
  return k;
}

namespace detail {

// Circular convolution kernel (peak at index 0) realizing the aligned
// detector's response to a unit jump on an n-grid. Valid for any n > m+1.
inline std::vector<double> waveform_taps(const EdgeKernel& k, std::size_t n) {
  if (n <= static_cast<std::size_t>(k.order) + 1)
    throw std::invalid_argument("waveform_taps: grid too small for kernel order");
  std::vector<double> w(n, 0.0);
  double tail = 0.0;
  for (int d = k.order - 1; d >= 0; --d) {
    tail += k.coeffs[static_cast<std::size_t>(d) + 1];
    // The response to a jump attributed to pixel p has value tail(d) at
    // p + anchor - d, so tap index (anchor - d) is the offset from the peak.
    const std::ptrdiff_t off = k.anchor - d;
    w[static_cast<std::size_t>((off % static_cast<std::ptrdiff_t>(n) +
                                static_cast<std::ptrdiff_t>(n)) %
                               static_cast<std::ptrdiff_t>(n))] = tail;
  }
  return w;
}

// Full-length detector taps (anchored), for circular stencil application.
inline std::vector<double> detector_taps(const EdgeKernel& k, std::size_t n) {
  if (n < static_cast<std::size_t>(k.order) + 1)
    throw std::invalid_argument("detector_taps: grid too small for kernel order");
  std::vector<double> taps(n, 0.0);
  for (int t = 0; t <= k.order; ++t) {
    const std::ptrdiff_t off = t - k.anchor;
    taps[static_cast<std::size_t>((off % static_cast<std::ptrdiff_t>(n) +
                                   static_cast<std::ptrdiff_t>(n)) %
                                  static_cast<std::ptrdiff_t>(n))] =
        k.coeffs[static_cast<std::size_t>(t)];
  }
  return taps;
}

}  // namespace detail

/// Response of the order-m detector to a unit jump placed at the grid
/// midpoint of a circular n-grid. Peak value is 1 at index n/2.
inline std::vector<double> matching_waveform(int m, std::size_t n) {
  EdgeKernel k = pa_coefficients(m);
  if (n % 2 != 0 || n < 2 * static_cast<std::size_t>(m + 1))
    throw std::invalid_argument("matching_waveform: n must be even and >= 2(m+1)");
  std::vector<double> taps = detail::waveform_taps(k, n);
  std::vector<double> out(n, 0.0);
  const std::size_t p = n / 2;
  for (std::size_t i = 0; i < n; ++i) out[(i + p) % n] = taps[i];
  return out;
}

enum class Axis { x, y };

/// Zero-padded 2D realization of the detector for circular convolution
/// against a rows x cols field. Coefficients live on the first row (axis x)
/// or first column (axis y); the anchor offset wraps to the far end.
inline ScalarField2D kernel2d(const EdgeKernel& k, Axis axis, std::size_t rows,
                              std::size_t cols) {
  ScalarField2D out(rows, cols);
  const std::size_t n = (axis == Axis::x) ? cols : rows;
  std::vector<double> taps = detail::detector_taps(k, n);
  for (std::size_t t = 0; t < n; ++t) {
    if (axis == Axis::x)
      out(0, t) = taps[t];
    else
      out(t, 0) = taps[t];
  }
  return out;
}

}  // namespace phasebg
