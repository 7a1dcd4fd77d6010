#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "phasebg/edge.hpp"
#include "phasebg/field.hpp"
#include "phasebg/kernels.hpp"
#include "phasebg/ops.hpp"

namespace phasebg {

/// One piecewise-constant structure of the synthetic ground truth.
struct Shape {
  enum class Kind { disc, rectangle };
  Kind kind = Kind::disc;
  double center_i = 0.0, center_j = 0.0;  // disc center (pixels)
  double radius = 0.0;                    // disc radius (pixels)
  std::size_t i0 = 0, j0 = 0, height_px = 0, width_px = 0;  // rectangle extent
  double height = 0.0;                    // phase offset inside the shape
};

/// Monomial c * x^px * y^py in coordinates normalized to [-1, 1] per axis.
struct PolyTerm {
  int px = 0, py = 0;
  double coef = 0.0;
};

/// Adds 2*pi to the emitted phase map beyond a column or row, planting the
/// signature of a phase wrap with no underlying structure.
struct WrapLine {
  enum class Axis { column, row };
  Axis axis = Axis::column;
  std::size_t index = 0;
};

/// Rectangular band of reduced magnitude (unreliable pixels).
struct MagBand {
  std::size_t i0 = 0, j0 = 0, height = 0, width = 0;
  double value = 0.0;
};

struct PhantomSpec {
  std::size_t rows = 0, cols = 0;
  std::vector<Shape> shapes;
  std::vector<PolyTerm> background;
  std::vector<WrapLine> wrap_lines;
  std::vector<MagBand> mag_bands;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  Unit unit = Unit::radians;
};

/// Harmonic background a*x + b*y + c*(x^2 - y^2) + e*x*y as polynomial terms.
inline std::vector<PolyTerm> harmonic_background(double a, double b, double c, double e) {
  return {{1, 0, a}, {0, 1, b}, {2, 0, c}, {0, 2, -c}, {1, 1, e}};
}

struct Phantom {
  ComplexImage2D image;   ///< magnitude * exp(i * phase)
  ScalarField2D phase;    ///< emitted phase map (carries planted wrap lines)
  ScalarField2D truth_h;  ///< piecewise-constant ground truth
  ScalarField2D truth_b;  ///< smooth background ground truth
};

inline Phantom make_phantom(const PhantomSpec& spec) {
  if (spec.rows < 2 || spec.cols < 2)
    throw std::invalid_argument("make_phantom: rows and cols must be >= 2");
  if (spec.noise_sigma < 0.0)
    throw std::invalid_argument("make_phantom: noise_sigma must be >= 0");
  const std::size_t R = spec.rows, C = spec.cols;

  ScalarField2D truth_h(R, C, 0.0, spec.unit);
  for (const Shape& s : spec.shapes) {
    if (s.kind == Shape::Kind::disc) {
      if (s.center_i - s.radius < 0 || s.center_i + s.radius > static_cast<double>(R - 1) ||
          s.center_j - s.radius < 0 || s.center_j + s.radius > static_cast<double>(C - 1))
        throw std::invalid_argument("make_phantom: disc exceeds grid bounds");
      for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) {
          const double di = static_cast<double>(i) - s.center_i;
          const double dj = static_cast<double>(j) - s.center_j;
          if (di * di + dj * dj <= s.radius * s.radius) truth_h(i, j) += s.height;
        }
    } else {
      if (s.i0 + s.height_px > R || s.j0 + s.width_px > C)
        throw std::invalid_argument("make_phantom: rectangle exceeds grid bounds");
      for (std::size_t i = s.i0; i < s.i0 + s.height_px; ++i)
        for (std::size_t j = s.j0; j < s.j0 + s.width_px; ++j) truth_h(i, j) += s.height;
    }
  }

  ScalarField2D truth_b(R, C, 0.0, spec.unit);
  for (std::size_t i = 0; i < R; ++i) {
    const double y = 2.0 * static_cast<double>(i) / static_cast<double>(R - 1) - 1.0;
    for (std::size_t j = 0; j < C; ++j) {
      const double x = 2.0 * static_cast<double>(j) / static_cast<double>(C - 1) - 1.0;
      double v = 0.0;
      for (const PolyTerm& t : spec.background)
        v += t.coef * std::pow(x, t.px) * std::pow(y, t.py);
      truth_b(i, j) = v;
    }
  }

  ScalarField2D phase(R, C, 0.0, spec.unit);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      double v = truth_h(i, j) + truth_b(i, j);
      if (spec.noise_sigma > 0.0) v += spec.noise_sigma * gauss(rng);
      phase(i, j) = (spec.unit == Unit::radians) ? wrap_scalar(v, two_pi) : v;
    }
  for (const WrapLine& wl : spec.wrap_lines) {
    if (spec.unit != Unit::radians)
      throw std::invalid_argument("make_phantom: wrap lines require radian phase");
    if (wl.axis == WrapLine::Axis::column) {
      if (wl.index >= C) throw std::invalid_argument("make_phantom: wrap column out of bounds");
      for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = wl.index; j < C; ++j) phase(i, j) += two_pi;
    } else {
      if (wl.index >= R) throw std::invalid_argument("make_phantom: wrap row out of bounds");
      for (std::size_t i = wl.index; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) phase(i, j) += two_pi;
    }
  }

  ScalarField2D mag(R, C, 1.0);
  for (const MagBand& b : spec.mag_bands) {
    if (b.i0 + b.height > R || b.j0 + b.width > C)
      throw std::invalid_argument("make_phantom: magnitude band exceeds grid bounds");
    if (b.value < 0.0 || b.value > 1.0)
      throw std::invalid_argument("make_phantom: magnitude band value must be in [0, 1]");
    for (std::size_t i = b.i0; i < b.i0 + b.height; ++i)
      for (std::size_t j = b.j0; j < b.j0 + b.width; ++j) mag(i, j) = b.value;
  }

  Phantom out;
  out.image = ComplexImage2D(R, C);
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j)
      out.image(i, j) = std::polar(mag(i, j), phase(i, j));
  out.phase = std::move(phase);
  out.truth_h = std::move(truth_h);
  out.truth_b = std::move(truth_b);
  return out;
}

/// Inclusive-origin rectangle for CNR regions of interest.
struct Roi {
  std::size_t i0 = 0, j0 = 0, height = 0, width = 0;
};

struct CnrResult {
  double value = 0.0;
  bool degenerate = false;  ///< pooled variance was zero
};

/// Contrast-to-noise ratio between a warm and a reference region:
/// (mean(R_w) - mean(R_f)) / s where s pools the within-region population
/// variances, s = sqrt((Var(R_w) + Var(R_f)) / 2). Pooling the deviations
/// within each region (rather than around the union mean) keeps the contrast
/// itself out of the noise estimate, so pure noise of level sigma gives
/// CNR -> contrast / sigma.
inline CnrResult cnr(const ScalarField2D& field, const Roi& roi_w, const Roi& roi_f) {
  auto check = [&](const Roi& r) {
    if (r.height == 0 || r.width == 0 || r.i0 + r.height > field.rows() ||
        r.j0 + r.width > field.cols())
      throw std::invalid_argument("cnr: ROI out of bounds or empty");
  };
  check(roi_w);
  check(roi_f);
  const bool overlap = roi_w.i0 < roi_f.i0 + roi_f.height && roi_f.i0 < roi_w.i0 + roi_w.height &&
                       roi_w.j0 < roi_f.j0 + roi_f.width && roi_f.j0 < roi_w.j0 + roi_w.width;
  if (overlap) throw std::invalid_argument("cnr: ROIs must be disjoint");

  auto stats = [&](const Roi& r) {
    double sum = 0.0, sum2 = 0.0;
    const double n = static_cast<double>(r.height * r.width);
    for (std::size_t i = r.i0; i < r.i0 + r.height; ++i)
      for (std::size_t j = r.j0; j < r.j0 + r.width; ++j) {
        sum += field(i, j);
        sum2 += field(i, j) * field(i, j);
      }
    const double mean = sum / n;
    return std::pair<double, double>(mean, std::max(sum2 / n - mean * mean, 0.0));
  };
  const auto [mw, vw] = stats(roi_w);
  const auto [mf, vf] = stats(roi_f);
  const double s = std::sqrt(0.5 * (vw + vf));
  CnrResult out;
  if (s == 0.0) {
    out.degenerate = true;
    out.value = (mw > mf) ? std::numeric_limits<double>::infinity()
                          : (mw < mf ? -std::numeric_limits<double>::infinity() : 0.0);
    return out;
  }
  out.value = (mw - mf) / s;
  return out;
}

/// n x n circulant realizing circular convolution with matching_waveform(m,n):
/// column k is the waveform shifted to position k.
inline Eigen::MatrixXd build_W_matrix(int m, std::size_t n) {
  const std::vector<double> w = matching_waveform(m, n);
  Eigen::MatrixXd W(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = w[(i + n - k) % n];
  return W;
}

struct RipResult {
  double delta_spectral = 0.0;   ///< max over trials of ||G - I||_2
  double delta_frobenius = 0.0;  ///< max over trials of ||G - I||_F
  int trials = 0;
};

/// Empirical restricted-isometry check: over random column subsets of the
/// waveform circulant with pairwise circular separation >= min_separation,
/// measures the worst deviation of the normalized Gram matrix from identity.
/// Columns are normalized by the waveform energy ||w||^2, which makes the
/// Gram diagonal exactly 1.
inline RipResult rip_check(int m, std::size_t n, std::size_t sparsity,
                           std::size_t min_separation, int trials, std::uint64_t seed) {
  if (sparsity == 0 || trials <= 0)
    throw std::invalid_argument("rip_check: sparsity and trials must be positive");
  if (min_separation < 1) min_separation = 1;
  if (sparsity * min_separation > n)
    throw std::invalid_argument("rip_check: separation infeasible for this sparsity");

  const Eigen::MatrixXd W = build_W_matrix(m, n);
  double w2 = 0.0;
  for (double v : matching_waveform(m, n)) w2 += v * v;

  std::mt19937_64 rng(seed);
  RipResult out;
  out.trials = trials;
  const std::size_t slack = n - sparsity * min_separation;
  std::vector<std::size_t> offs(sparsity);
  for (int t = 0; t < trials; ++t) {
    // Sorted offsets plus mandatory gaps plus a random rotation give a
    // uniformly random feasible support with circular separation kept.
    for (auto& o : offs) o = std::uniform_int_distribution<std::size_t>(0, slack)(rng);
    std::sort(offs.begin(), offs.end());
    const std::size_t rot = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    Eigen::MatrixXd Wt(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(sparsity));
    for (std::size_t s = 0; s < sparsity; ++s) {
      const std::size_t col = (offs[s] + s * min_separation + rot) % n;
      Wt.col(static_cast<Eigen::Index>(s)) = W.col(static_cast<Eigen::Index>(col));
    }
    Eigen::MatrixXd G = (Wt.transpose() * Wt) / w2;
    G.diagonal().array() -= 1.0;
    const double fro = G.norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    const double spec = es.eigenvalues().cwiseAbs().maxCoeff();
    out.delta_spectral = std::max(out.delta_spectral, spec);
    out.delta_frobenius = std::max(out.delta_frobenius, fro);
  }
  return out;
}

/// One jump of the 1D convergence test function: a Heaviside step of the
/// given height at the given fraction of the periodic domain [0, 2*pi).
struct Jump1D {
  double position = 0.375;  ///< fraction of the domain in [0, 1)
  double height = 1.0;
};

struct ConvergenceSpec {
  int m = 3;
  int k_smooth = 3;  ///< smoothness order entering k_m = min(m, k_smooth)
  std::vector<std::size_t> sizes = {64, 128, 256, 512};
  std::vector<Jump1D> jumps = {{0.375, 1.0}};
  double smooth_amplitude = 1.0;  ///< amplitude of the sin(freq*x) component
  double smooth_freq = 4.0;
  double lambda0 = 1e-2;      ///< regularization at the reference size
  std::size_t n0 = 64;        ///< reference size for the lambda schedule
  int max_iter = 4000;
  double tol = 1e-10;
};

struct ConvergenceRow {
  std::size_t n = 0;
  double lambda = 0.0;
  double l2_error = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  double slope = 0.0;        ///< fitted log-log slope of error vs n
  double fitted_c = 0.0;     ///< C such that error = C * sqrt(n) * n^{-k_m} at the largest n
  double theory_slope = 0.0; ///< -(k_m - 1/2) from the error bound's shape
  double c_lp_reference = 5.5;  ///< reference constant of the recovery bound, not re-derived
  int k_m = 0;
};

/// Samples f(x) = sum_j h_j H(x - xi_j) + A sin(freq x) on circular grids of
/// increasing size, runs the 1D sparse deconvolution, and measures the l2
/// error against the analytic jump function. The regularization shrinks as
/// lambda0 * (n0/n)^{k_m - 1/2}, tracking the error bound's decay.
inline ConvergenceStudy convergence_study(const ConvergenceSpec& spec) {
  if (spec.sizes.size() < 2)
    throw std::invalid_argument("convergence_study: need at least two sizes");
  for (std::size_t s = 1; s < spec.sizes.size(); ++s)
    if (spec.sizes[s] <= spec.sizes[s - 1])
      throw std::invalid_argument("convergence_study: sizes must be increasing");
  for (const Jump1D& j : spec.jumps)
    if (j.position < 0.0 || j.position >= 1.0)
      throw std::invalid_argument("convergence_study: jump position must be in [0, 1)");

  const EdgeKernel kernel = pa_coefficients(spec.m);
  ConvergenceStudy out;
  out.k_m = std::min(spec.m, spec.k_smooth);
  out.theory_slope = -(static_cast<double>(out.k_m) - 0.5);

  for (std::size_t n : spec.sizes) {
    std::vector<double> f(n), y_true(n, 0.0);
    double total_height = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = two_pi * static_cast<double>(i) / static_cast<double>(n);
      f[i] = spec.smooth_amplitude * std::sin(spec.smooth_freq * x);
    }
    for (const Jump1D& j : spec.jumps) {
      const double xi = two_pi * j.position;
      std::size_t first_above = n;  // first sample at or beyond the step
      for (std::size_t i = 0; i < n; ++i) {
        const double x = two_pi * static_cast<double>(i) / static_cast<double>(n);
        if (x >= xi) {
          f[i] += j.height;
          if (first_above == n) first_above = i;
        }
      }
      if (first_above > 0 && first_above < n) y_true[first_above - 1] += j.height;
      total_height += j.height;
    }
    // Periodic extension drops by the total height across the seam.
    if (total_height != 0.0) y_true[n - 1] -= total_height;

    SolverConfig cfg;
    cfg.lambda = spec.lambda0 * std::pow(static_cast<double>(spec.n0) / static_cast<double>(n),
                                         static_cast<double>(out.k_m) - 0.5);
    cfg.max_iter = spec.max_iter;
    cfg.tol = spec.tol;
    auto [y, rep] = detect_edges_1d(f, kernel, cfg);

    ConvergenceRow row;
    row.n = n;
    row.lambda = cfg.lambda;
    row.iterations = rep.iterations;
    row.converged = rep.converged;
    double e2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) e2 += (y[i] - y_true[i]) * (y[i] - y_true[i]);
    row.l2_error = std::sqrt(e2);
    out.rows.push_back(row);
  }

  // Log-log least squares fit of error vs n.
  const std::size_t k = out.rows.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& r : out.rows) {
    const double lx = std::log(static_cast<double>(r.n));
    const double ly = std::log(std::max(r.l2_error, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double kd = static_cast<double>(k);
  out.slope = (kd * sxy - sx * sy) / (kd * sxx - sx * sx);
  const auto& last = out.rows.back();
  out.fitted_c = last.l2_error /
                 (std::sqrt(static_cast<double>(last.n)) *
                  std::pow(static_cast<double>(last.n), -static_cast<double>(out.k_m)));
  return out;
}

}  // namespace phasebg
