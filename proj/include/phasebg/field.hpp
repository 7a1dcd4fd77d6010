#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasebg {

/// Physical unit carried by a scalar field.
enum class Unit { dimensionless = 0, radians = 1, ppm = 2 };

/// Real-valued 2D grid, row-major. Index (i,j) = (row, col); the x-direction
/// is increasing column, the y-direction increasing row.
class ScalarField2D {
 public:
  ScalarField2D() = default;
  ScalarField2D(std::size_t rows, std::size_t cols, double fill = 0.0,
                Unit unit = Unit::dimensionless)
      : rows_(rows), cols_(cols), unit_(unit), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0)
      throw std::invalid_argument("ScalarField2D: dimensions must be positive");
  }
  ScalarField2D(std::size_t rows, std::size_t cols, std::vector<double> data,
                Unit unit = Unit::dimensionless)
      : rows_(rows), cols_(cols), unit_(unit), data_(std::move(data)) {
    if (rows == 0 || cols == 0)
      throw std::invalid_argument("ScalarField2D: dimensions must be positive");
    if (data_.size() != rows * cols)
      throw std::invalid_argument("ScalarField2D: data length != rows*cols");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  Unit unit() const { return unit_; }
  void set_unit(Unit u) { unit_ = u; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& at(std::size_t i, std::size_t j) {
    check_index(i, j);
    return data_[i * cols_ + j];
  }
  double at(std::size_t i, std::size_t j) const {
    check_index(i, j);
    return data_[i * cols_ + j];
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool same_shape(const ScalarField2D& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  void check_index(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_)
      throw std::out_of_range("ScalarField2D: index out of range");
  }
  std::size_t rows_ = 0, cols_ = 0;
  Unit unit_ = Unit::dimensionless;
  std::vector<double> data_;
};

/// Complex MR image, row-major. Magnitude supplies reconstruction weights.
class ComplexImage2D {
 public:
  ComplexImage2D() = default;
  ComplexImage2D(std::size_t rows, std::size_t cols,
                 std::complex<double> fill = {0.0, 0.0})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0)
      throw std::invalid_argument("ComplexImage2D: dimensions must be positive");
  }
  ComplexImage2D(std::size_t rows, std::size_t cols,
                 std::vector<std::complex<double>> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0)
      throw std::invalid_argument("ComplexImage2D: dimensions must be positive");
    if (data_.size() != rows * cols)
      throw std::invalid_argument("ComplexImage2D: data length != rows*cols");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  std::complex<double>& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  std::complex<double> operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  const std::vector<std::complex<double>>& data() const { return data_; }
  std::vector<std::complex<double>>& data() { return data_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::complex<double>> data_;
};

/// Per-pixel jump heights across x (column direction) and y (row direction).
/// The two components share dimensions and support.
struct JumpField {
  ScalarField2D ux;
  ScalarField2D uy;

  JumpField() = default;
  JumpField(ScalarField2D x, ScalarField2D y) : ux(std::move(x)), uy(std::move(y)) {
    if (!ux.same_shape(uy))
      throw std::invalid_argument("JumpField: ux and uy must share dimensions");
  }
  static JumpField zeros(std::size_t rows, std::size_t cols) {
    return JumpField(ScalarField2D(rows, cols), ScalarField2D(rows, cols));
  }
  std::size_t rows() const { return ux.rows(); }
  std::size_t cols() const { return ux.cols(); }

  double magnitude(std::size_t i, std::size_t j) const {
    return std::hypot(ux(i, j), uy(i, j));
  }
  double max_magnitude() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows(); ++i)
      for (std::size_t j = 0; j < cols(); ++j) m = std::max(m, magnitude(i, j));
    return m;
  }
};

/// Parameters shared by the edge and reconstruction solvers.
struct SolverConfig {
  double lambda = 1e-6;     ///< group-l1 weight
  double epsilon = 1e-8;    ///< Tikhonov weight of the reconstruction
  int max_iter = 500;
  double tol = 1e-8;        ///< relative residual tolerance
  double penalty_rho = 1.0; ///< initial augmented-Lagrangian penalty

  void validate() const {
    if (lambda < 0.0) throw std::invalid_argument("SolverConfig: lambda must be >= 0");
    if (epsilon <= 0.0) throw std::invalid_argument("SolverConfig: epsilon must be > 0");
    if (max_iter <= 0) throw std::invalid_argument("SolverConfig: max_iter must be > 0");
    if (tol <= 0.0) throw std::invalid_argument("SolverConfig: tol must be > 0");
    if (penalty_rho <= 0.0)
      throw std::invalid_argument("SolverConfig: penalty_rho must be > 0");
  }
};

struct SolverReport {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
  bool degenerate_weights = false;
};

/// Principal argument per pixel, in (-pi, pi]. Zero-magnitude pixels map to 0.
inline ScalarField2D phase_of(const ComplexImage2D& image) {
  if (image.size() == 0) throw std::invalid_argument("phase_of: empty image");
  ScalarField2D out(image.rows(), image.cols(), 0.0, Unit::radians);
  for (std::size_t k = 0; k < image.size(); ++k) {
    const std::complex<double> v = image.data()[k];
    double p = (v == std::complex<double>{0.0, 0.0}) ? 0.0 : std::arg(v);
    if (p <= -3.14159265358979323846) p = 3.14159265358979323846;  // map -pi -> pi
    out.data()[k] = p;
  }
  return out;
}

/// |f|^2 normalized to [0,1] by its maximum; all-zero image gives all zeros.
inline ScalarField2D magnitude_weights(const ComplexImage2D& image) {
  if (image.size() == 0) throw std::invalid_argument("magnitude_weights: empty image");
  ScalarField2D out(image.rows(), image.cols());
  double mx = 0.0;
  for (std::size_t k = 0; k < image.size(); ++k) {
    const double m2 = std::norm(image.data()[k]);
    out.data()[k] = m2;
    mx = std::max(mx, m2);
  }
  if (mx > 0.0)
    for (double& v : out.data()) v /= mx;
  return out;
}

}  // namespace phasebg
