#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "phasebg/field.hpp"
#include "phasebg/ops.hpp"

namespace phasebg {

namespace detail {

// Per-difference weights: arithmetic mean of the two pixel weights adjacent
// to each forward difference. Differences suppressed by the Neumann boundary
// get weight 0.
struct DiffWeights {
  std::vector<double> mx, my;
  std::size_t rows = 0, cols = 0;

  explicit DiffWeights(const ScalarField2D& w)
      : mx(w.size(), 0.0), my(w.size(), 0.0), rows(w.rows()), cols(w.cols()) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j + 1 < cols; ++j)
        mx[i * cols + j] = 0.5 * (w(i, j) + w(i, j + 1));
    for (std::size_t i = 0; i + 1 < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        my[i * cols + j] = 0.5 * (w(i, j) + w(i + 1, j));
  }
};

// y = (grad^T M grad + eps I) x, with grad^T = -divergence.
inline void normal_op(const DiffWeights& mw, double eps, const std::vector<double>& x,
                      std::vector<double>& y) {
  const std::size_t R = mw.rows, C = mw.cols;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      const std::size_t k = i * C + j;
      double v = eps * x[k];
      if (j + 1 < C) v += mw.mx[k] * (x[k] - x[k + 1]);
      if (j > 0) v += mw.mx[k - 1] * (x[k] - x[k - 1]);
      if (i + 1 < R) v += mw.my[k] * (x[k] - x[k + C]);
      if (i > 0) v += mw.my[k - C] * (x[k] - x[k - C]);
      y[k] = v;
    }
}

}  // namespace detail

/// Weighted gradient matching: minimizes ||grad(F) - u||^2_M + eps*||F||^2
/// via the normal equations (grad^T M grad + eps I) F = grad^T M u, solved by
/// conjugate gradient to relative residual cfg.tol.
inline std::pair<ScalarField2D, SolverReport> reconstruct_phase(const JumpField& jumps,
                                                                const ScalarField2D& weights,
                                                                const SolverConfig& cfg) {
  cfg.validate();
  if (weights.rows() != jumps.rows() || weights.cols() != jumps.cols())
    throw std::invalid_argument("reconstruct_phase: weight dimensions disagree");
  for (double w : weights.data())
    if (!(w >= 0.0 && w <= 1.0))
      throw std::invalid_argument("reconstruct_phase: weights must lie in [0, 1]");

  const std::size_t R = jumps.rows(), C = jumps.cols(), N = R * C;
  SolverReport rep;
  if (weights.max_abs() == 0.0) {
    rep.degenerate_weights = true;
    rep.converged = true;
    return {ScalarField2D(R, C, 0.0, jumps.ux.unit()), rep};
  }

  const detail::DiffWeights mw(weights);

  // rhs = grad^T M u = -divergence(M .* u)
  JumpField wu = jumps;
  for (std::size_t k = 0; k < N; ++k) wu.ux.data()[k] *= mw.mx[k];
  for (std::size_t k = 0; k < N; ++k) wu.uy.data()[k] *= mw.my[k];
  const ScalarField2D div = divergence(wu);
  std::vector<double> b(N);
  for (std::size_t k = 0; k < N; ++k) b[k] = -div.data()[k];

  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) {
    rep.converged = true;
    return {ScalarField2D(R, C, 0.0, jumps.ux.unit()), rep};
  }

  const int max_iter =
      std::max(cfg.max_iter, static_cast<int>(100.0 * std::sqrt(static_cast<double>(N))));
  std::vector<double> x(N, 0.0), r(b), p(b), ap(N);
  double rr = 0.0;
  for (double v : r) rr += v * v;
  for (int it = 1; it <= max_iter; ++it) {
    rep.iterations = it;
    detail::normal_op(mw, cfg.epsilon, p, ap);
    double pap = 0.0;
    for (std::size_t k = 0; k < N; ++k) pap += p[k] * ap[k];
    if (pap <= 0.0) break;  // operator is SPD; safeguard for roundoff
    const double alpha = rr / pap;
    for (std::size_t k = 0; k < N; ++k) x[k] += alpha * p[k];
    for (std::size_t k = 0; k < N; ++k) r[k] -= alpha * ap[k];
    double rr_new = 0.0;
    for (double v : r) rr_new += v * v;
    rep.primal_residual = std::sqrt(rr_new) / bnorm;
    if (rep.primal_residual <= cfg.tol) {
      rep.converged = true;
      break;
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t k = 0; k < N; ++k) p[k] = r[k] + beta * p[k];
  }
  rep.dual_residual = rep.primal_residual;
  return {ScalarField2D(R, C, std::move(x), jumps.ux.unit()), rep};
}

/// Shifts field by the constant a = phase[ref] - field[ref] so the result
/// matches phase exactly at the reference pixel.
inline ScalarField2D apply_reference(const ScalarField2D& field, std::size_t ref_i,
                                     std::size_t ref_j, const ScalarField2D& phase) {
  if (field.rows() != phase.rows() || field.cols() != phase.cols())
    throw std::invalid_argument("apply_reference: dimensions disagree");
  if (ref_i >= field.rows() || ref_j >= field.cols())
    throw std::out_of_range("apply_reference: reference pixel out of bounds");
  const double a = phase(ref_i, ref_j) - field(ref_i, ref_j);
  ScalarField2D out = field;
  for (double& v : out.data()) v += a;
  out(ref_i, ref_j) = phase(ref_i, ref_j);  // exact at ref despite rounding
  return out;
}

/// The smooth remainder: phase minus the piecewise-harmonic part.
inline ScalarField2D background(const ScalarField2D& phase, const ScalarField2D& phase_h) {
  if (phase.rows() != phase_h.rows() || phase.cols() != phase_h.cols())
    throw std::invalid_argument("background: dimensions disagree");
  ScalarField2D out = phase;
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] -= phase_h.data()[k];
  return out;
}

}  // namespace phasebg
