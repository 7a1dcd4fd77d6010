#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "phasebg/fft.hpp"
#include "phasebg/field.hpp"
#include "phasebg/kernels.hpp"
#include "phasebg/ops.hpp"

namespace phasebg {

inline constexpr double two_pi = 6.28318530717958647692;

/// Proximal operator of the l1,2 penalty on one pixel pair.
inline std::pair<double, double> group_shrink(double vx, double vy, double tau) {
  if (tau < 0.0) throw std::invalid_argument("group_shrink: tau must be >= 0");
  const double r = std::hypot(vx, vy);
  if (r <= tau) return {0.0, 0.0};
  const double f = 1.0 - tau / r;
  return {vx * f, vy * f};
}

/// Boolean support mask of a JumpField.
struct SupportMask {
  std::size_t rows = 0, cols = 0;
  std::vector<std::uint8_t> on;

  bool operator()(std::size_t i, std::size_t j) const { return on[i * cols + j] != 0; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : on) n += v;
    return n;
  }
};

/// Mask true where sqrt(ux^2+uy^2) > rel_threshold * max magnitude.
inline SupportMask edge_support(const JumpField& jumps, double rel_threshold = 1e-3) {
  if (rel_threshold < 0.0 || rel_threshold >= 1.0)
    throw std::invalid_argument("edge_support: rel_threshold must be in [0, 1)");
  SupportMask m;
  m.rows = jumps.rows();
  m.cols = jumps.cols();
  m.on.assign(m.rows * m.cols, 0);
  const double thr = rel_threshold * jumps.max_magnitude();
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      if (jumps.magnitude(i, j) > thr) m.on[i * m.cols + j] = 1;
  return m;
}

/// Entry-wise projection of both components to (-pi, pi], applied after the
/// solve to discard jumps caused by phase wrapping.
inline JumpField wrap_jumps(const JumpField& jumps) {
  return JumpField(wrap_to_interval(jumps.ux, two_pi), wrap_to_interval(jumps.uy, two_pi));
}

/// Options controlling the periodic-seam treatment of detect_edges.
struct DetectOptions {
  /// Zero the detector readings whose stencil straddles the image border.
  /// The circular model pairs opposite borders, which are not physically
  /// adjacent, so a non-periodic field would read as a large spurious jump
  /// there; the cost is blindness to genuine jumps on the straddling pixels.
  bool seam_mask = true;
};

/// Zero the readings whose stencil wraps across the border. A jump on the
/// fictitious border adjacency produces readings only at these positions, so
/// masking them removes exactly the seam content (plus the small partial
/// sums of neighboring differences, which the sparsity penalty absorbs).
inline void mask_seam(JumpField& g, const EdgeKernel& kernel) {
  const std::size_t R = g.rows(), C = g.cols();
  const std::size_t lo = static_cast<std::size_t>(kernel.anchor);
  const std::size_t margin = static_cast<std::size_t>(kernel.order - kernel.anchor);
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      if (j < lo || j >= C - margin) g.ux(i, j) = 0.0;
      if (i < lo || i >= R - margin) g.uy(i, j) = 0.0;
    }
}

/// Objective of the matching-waveform deconvolution, evaluated by direct
/// circular convolution (no FFT); used for reporting and oracle comparison.
inline double edge_objective(const JumpField& u, const JumpField& g,
                             const EdgeKernel& kernel, double lambda) {
  const std::size_t R = u.rows(), C = u.cols();
  const std::vector<double> wx = detail::waveform_taps(kernel, C);
  const std::vector<double> wy = detail::waveform_taps(kernel, R);
  double quad = 0.0;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      // The model operator is circular convolution with the waveform: a unit
      // jump at p produces the detector's response pattern centered on p.
      double ax = 0.0;
      for (std::size_t p = 0; p < C; ++p) {
        const double w = wx[(j + C - p) % C];
        if (w != 0.0) ax += w * u.ux(i, p);
      }
      double ay = 0.0;
      for (std::size_t p = 0; p < R; ++p) {
        const double w = wy[(i + R - p) % R];
        if (w != 0.0) ay += w * u.uy(p, j);
      }
      const double rx = ax - g.ux(i, j), ry = ay - g.uy(i, j);
      quad += 0.5 * (rx * rx + ry * ry);
    }
  double l12 = 0.0;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) l12 += u.magnitude(i, j);
  return quad + lambda * l12;
}

namespace detail {

inline void axis_solve(RowColFFT& fft, std::vector<std::complex<double>>& buf,
                       const std::vector<std::complex<double>>& wspec, bool rows_axis,
                       std::size_t R, std::size_t C, double rho,
                       const std::vector<std::complex<double>>& atb) {
  // buf holds z - y in the spatial domain; leaves the u update in buf.
  if (rows_axis)
    fft.forward_rows(buf, R, C);
  else
    fft.forward_cols(buf, R, C);
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      const std::complex<double> w = wspec[rows_axis ? j : i];
      const double denom = std::norm(w) + rho;
      buf[i * C + j] = (atb[i * C + j] + rho * buf[i * C + j]) / denom;
    }
  if (rows_axis)
    fft.inverse_rows(buf, R, C);
  else
    fft.inverse_cols(buf, R, C);
}

}  // namespace detail

/// Sparse matching-waveform deconvolution (ADMM with variable splitting;
/// quadratic step diagonal in the per-axis Fourier basis).
inline std::pair<JumpField, SolverReport> detect_edges(const ScalarField2D& phase,
                                                       const EdgeKernel& kernel,
                                                       const SolverConfig& cfg,
                                                       const DetectOptions& opts = {}) {
  cfg.validate();
  if (!phase.all_finite()) throw std::invalid_argument("detect_edges: non-finite input");
  const std::size_t R = phase.rows(), C = phase.cols();
  if (R < 2 * static_cast<std::size_t>(kernel.order + 1) ||
      C < 2 * static_cast<std::size_t>(kernel.order + 1))
    throw std::invalid_argument("detect_edges: grid too small for kernel order");

  detail::RowColFFT fft;
  const std::vector<std::complex<double>> wxs = fft.spectrum(detail::waveform_taps(kernel, C));
  const std::vector<std::complex<double>> wys = fft.spectrum(detail::waveform_taps(kernel, R));

  const std::size_t N = R * C;
  using cvec = std::vector<std::complex<double>>;
  JumpField g = jump_approx(phase, kernel);
  if (opts.seam_mask) mask_seam(g, kernel);

  // A^T b per axis, kept in the Fourier domain. The forward operator is
  // convolution with the waveform, so its adjoint multiplies by conj(w_hat).
  cvec atbx(N), atby(N);
  for (std::size_t k = 0; k < N; ++k) atbx[k] = g.ux.data()[k];
  for (std::size_t k = 0; k < N; ++k) atby[k] = g.uy.data()[k];
  fft.forward_rows(atbx, R, C);
  fft.forward_cols(atby, R, C);
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      atbx[i * C + j] *= std::conj(wxs[j]);
      atby[i * C + j] *= std::conj(wys[i]);
    }

  std::vector<double> ux(g.ux.data()), uy(g.uy.data());
  std::vector<double> zx(ux), zy(uy);
  std::vector<double> yx(N, 0.0), yy(N, 0.0);
  cvec bufx(N), bufy(N);

  double rho = cfg.penalty_rho;
  SolverReport rep;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    rep.iterations = it;
    for (std::size_t k = 0; k < N; ++k) bufx[k] = zx[k] - yx[k];
    for (std::size_t k = 0; k < N; ++k) bufy[k] = zy[k] - yy[k];
    detail::axis_solve(fft, bufx, wxs, true, R, C, rho, atbx);
    detail::axis_solve(fft, bufy, wys, false, R, C, rho, atby);
    for (std::size_t k = 0; k < N; ++k) ux[k] = bufx[k].real();
    for (std::size_t k = 0; k < N; ++k) uy[k] = bufy[k].real();

    const double tau = cfg.lambda / rho;
    double dz2 = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      const auto [sx, sy] = group_shrink(ux[k] + yx[k], uy[k] + yy[k], tau);
      const double dx = sx - zx[k], dy = sy - zy[k];
      dz2 += dx * dx + dy * dy;
      zx[k] = sx;
      zy[k] = sy;
    }
    double pr2 = 0.0, un2 = 0.0, zn2 = 0.0, yn2 = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      const double rx = ux[k] - zx[k], ry = uy[k] - zy[k];
      pr2 += rx * rx + ry * ry;
      un2 += ux[k] * ux[k] + uy[k] * uy[k];
      zn2 += zx[k] * zx[k] + zy[k] * zy[k];
      yx[k] += rx;
      yy[k] += ry;
      yn2 += yx[k] * yx[k] + yy[k] * yy[k];
    }
    const double primal = std::sqrt(pr2);
    const double dual = rho * std::sqrt(dz2);
    const double pscale = std::max(std::sqrt(std::max(un2, zn2)), 1e-300);
    const double dscale = std::max(rho * std::sqrt(yn2), 1e-300);
    rep.primal_residual = primal / pscale;
    rep.dual_residual = dual / dscale;
    if (rep.primal_residual <= cfg.tol && rep.dual_residual <= cfg.tol) {
      rep.converged = true;
      break;
    }
    if (primal > 10.0 * dual && dual > 0.0) {
      rho *= 2.0;
      for (std::size_t k = 0; k < N; ++k) {
        yx[k] *= 0.5;
        yy[k] *= 0.5;
      }
    } else if (dual > 10.0 * primal && primal > 0.0) {
      rho *= 0.5;
      for (std::size_t k = 0; k < N; ++k) {
        yx[k] *= 2.0;
        yy[k] *= 2.0;
      }
    }
  }
  JumpField out(ScalarField2D(R, C, std::move(zx), phase.unit()),
                ScalarField2D(R, C, std::move(zy), phase.unit()));
  return {std::move(out), rep};
}

/// 1D analogue of detect_edges (scalar soft threshold instead of the group
/// prox); used by the convergence study.
inline std::pair<std::vector<double>, SolverReport> detect_edges_1d(
    const std::vector<double>& signal, const EdgeKernel& kernel, const SolverConfig& cfg) {
  cfg.validate();
  const std::size_t n = signal.size();
  if (n < 2 * static_cast<std::size_t>(kernel.order + 1))
    throw std::invalid_argument("detect_edges_1d: grid too small for kernel order");

  detail::RowColFFT fft;
  const std::vector<std::complex<double>> ws = fft.spectrum(detail::waveform_taps(kernel, n));

  // g = aligned detector applied circularly.
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int t = 0; t <= kernel.order; ++t) {
      const std::size_t j = static_cast<std::size_t>(
          (static_cast<std::ptrdiff_t>(i) + t - kernel.anchor +
           static_cast<std::ptrdiff_t>(n)) %
          static_cast<std::ptrdiff_t>(n));
      acc += kernel.coeffs[static_cast<std::size_t>(t)] * signal[j];
    }
    g[i] = acc;
  }

  using cvec = std::vector<std::complex<double>>;
  cvec atb(n);
  for (std::size_t k = 0; k < n; ++k) atb[k] = g[k];
  fft.forward_rows(atb, 1, n);
  for (std::size_t k = 0; k < n; ++k) atb[k] *= std::conj(ws[k]);

  std::vector<double> u(g), z(g), y(n, 0.0);
  cvec buf(n);
  double rho = cfg.penalty_rho;
  SolverReport rep;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    rep.iterations = it;
    for (std::size_t k = 0; k < n; ++k) buf[k] = z[k] - y[k];
    fft.forward_rows(buf, 1, n);
    for (std::size_t k = 0; k < n; ++k)
      buf[k] = (atb[k] + rho * buf[k]) / (std::norm(ws[k]) + rho);
    fft.inverse_rows(buf, 1, n);
    for (std::size_t k = 0; k < n; ++k) u[k] = buf[k].real();

    const double tau = cfg.lambda / rho;
    double dz2 = 0.0, pr2 = 0.0, un2 = 0.0, zn2 = 0.0, yn2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = u[k] + y[k];
      const double s = (std::abs(v) <= tau) ? 0.0 : v - tau * (v > 0 ? 1.0 : -1.0);
      const double dz = s - z[k];
      dz2 += dz * dz;
      z[k] = s;
      const double r = u[k] - z[k];
      pr2 += r * r;
      un2 += u[k] * u[k];
      zn2 += z[k] * z[k];
      y[k] += r;
      yn2 += y[k] * y[k];
    }
    const double primal = std::sqrt(pr2), dual = rho * std::sqrt(dz2);
    rep.primal_residual = primal / std::max(std::sqrt(std::max(un2, zn2)), 1e-300);
    rep.dual_residual = dual / std::max(rho * std::sqrt(yn2), 1e-300);
    if (rep.primal_residual <= cfg.tol && rep.dual_residual <= cfg.tol) {
      rep.converged = true;
      break;
    }
    if (primal > 10.0 * dual && dual > 0.0) {
      rho *= 2.0;
      for (double& v : y) v *= 0.5;
    } else if (dual > 10.0 * primal && primal > 0.0) {
      rho *= 0.5;
      for (double& v : y) v *= 2.0;
    }
  }
  return {std::move(z), rep};
}

}  // namespace phasebg
