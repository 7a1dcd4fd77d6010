#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "phasebg/field.hpp"
#include "phasebg/kernels.hpp"

namespace phasebg {

/// Periodic 2D stencil application: out(i,j) = sum_{p,q} K(p,q) F(i+p, j+q)
/// with wrap-around indexing. Kernel dimensions must not exceed the field's.
inline ScalarField2D conv2_circular(const ScalarField2D& field,
                                    const ScalarField2D& kernel) {
  const std::size_t R = field.rows(), C = field.cols();
  if (kernel.rows() > R || kernel.cols() > C)
    throw std::invalid_argument("conv2_circular: kernel larger than field");
  ScalarField2D out(R, C, 0.0, field.unit());
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < C; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < kernel.rows(); ++p) {
        const std::size_t ip = (i + p) % R;
        for (std::size_t q = 0; q < kernel.cols(); ++q) {
          const double kv = kernel(p, q);
          if (kv == 0.0) continue;
          acc += kv * field(ip, (j + q) % C);
        }
      }
      out(i, j) = acc;
    }
  }
  return out;
}

/// Raw jump function approximations g_x = c * phi, g_y = c^T * phi under
/// circular convolution, anchored so a jump between columns j and j+1 (rows
/// i and i+1) peaks at column j (row i).
inline JumpField jump_approx(const ScalarField2D& phase, const EdgeKernel& kernel) {
  if (!phase.all_finite()) throw std::invalid_argument("jump_approx: non-finite input");
  const std::size_t R = phase.rows(), C = phase.cols();
  ScalarField2D gx(R, C, 0.0, phase.unit());
  ScalarField2D gy(R, C, 0.0, phase.unit());
  const int m = kernel.order;
  const int a = kernel.anchor;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      double ax = 0.0, ay = 0.0;
      for (int t = 0; t <= m; ++t) {
        const double cv = kernel.coeffs[static_cast<std::size_t>(t)];
        const std::size_t jx = static_cast<std::size_t>(
            (static_cast<std::ptrdiff_t>(j) + t - a + static_cast<std::ptrdiff_t>(C)) %
            static_cast<std::ptrdiff_t>(C));
        const std::size_t iy = static_cast<std::size_t>(
            (static_cast<std::ptrdiff_t>(i) + t - a + static_cast<std::ptrdiff_t>(R)) %
            static_cast<std::ptrdiff_t>(R));
        ax += cv * phase(i, jx);
        ay += cv * phase(iy, j);
      }
      gx(i, j) = ax;
      gy(i, j) = ay;
    }
  return JumpField(std::move(gx), std::move(gy));
}

/// Forward differences with replicate (Neumann) boundary: the difference at
/// the last index along each axis is 0.
inline JumpField forward_gradient(const ScalarField2D& field) {
  if (!field.all_finite())
    throw std::invalid_argument("forward_gradient: non-finite input");
  const std::size_t R = field.rows(), C = field.cols();
  ScalarField2D dx(R, C, 0.0, field.unit());
  ScalarField2D dy(R, C, 0.0, field.unit());
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j + 1 < C; ++j) dx(i, j) = field(i, j + 1) - field(i, j);
  for (std::size_t i = 0; i + 1 < R; ++i)
    for (std::size_t j = 0; j < C; ++j) dy(i, j) = field(i + 1, j) - field(i, j);
  return JumpField(std::move(dx), std::move(dy));
}

/// Negative adjoint of forward_gradient:
/// <forward_gradient(f), u> = -<f, divergence(u)> for all f, u.
inline ScalarField2D divergence(const JumpField& jumps) {
  const std::size_t R = jumps.rows(), C = jumps.cols();
  ScalarField2D out(R, C);
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      double v = 0.0;
      if (j + 1 < C) v += jumps.ux(i, j);
      if (j > 0) v -= jumps.ux(i, j - 1);
      if (i + 1 < R) v += jumps.uy(i, j);
      if (i > 0) v -= jumps.uy(i - 1, j);
      out(i, j) = v;
    }
  return out;
}

/// Maps every entry to (-period/2, period/2] by adding integer multiples of
/// the period.
inline double wrap_scalar(double v, double period) {
  double w = v - period * std::round(v / period);
  if (w <= -period / 2) w += period;  // round-half-even can land on -period/2
  return w;
}

inline ScalarField2D wrap_to_interval(const ScalarField2D& field, double period) {
  if (period <= 0.0) throw std::invalid_argument("wrap_to_interval: period must be > 0");
  ScalarField2D out = field;
  for (double& v : out.data()) v = wrap_scalar(v, period);
  return out;
}

}  // namespace phasebg
