#include <doctest.h>

#include <cmath>
#include <random>

#include "phasebg/ops.hpp"
#include "phasebg/phantom.hpp"

using namespace phasebg;

namespace {
constexpr double pi = 3.14159265358979323846;
}

TEST_CASE("empty phantom spec gives zero phase and unit magnitude") {
  PhantomSpec spec;
  spec.rows = spec.cols = 8;
  const Phantom ph = make_phantom(spec);
  for (double v : ph.phase.data()) CHECK(v == 0.0);
  for (const auto& v : ph.image.data()) CHECK(std::abs(v) == doctest::Approx(1.0));
}

TEST_CASE("disc shape places its height exactly") {
  PhantomSpec spec;
  spec.rows = spec.cols = 32;
  Shape d;
  d.kind = Shape::Kind::disc;
  d.center_i = d.center_j = 16;
  d.radius = 5;
  d.height = 0.9;
  spec.shapes = {d};
  const Phantom ph = make_phantom(spec);
  CHECK(ph.phase(16, 16) == doctest::Approx(0.9));
  CHECK(ph.phase(16, 20) == doctest::Approx(0.9));
  CHECK(ph.phase(16, 22) == 0.0);
  CHECK(ph.truth_b.max_abs() == 0.0);
}

TEST_CASE("phantom noise is deterministic in the seed") {
  PhantomSpec spec;
  spec.rows = spec.cols = 16;
  spec.noise_sigma = 0.1;
  spec.seed = 1234;
  const Phantom a = make_phantom(spec), b = make_phantom(spec);
  for (std::size_t k = 0; k < a.phase.size(); ++k) CHECK(a.phase.data()[k] == b.phase.data()[k]);
  spec.seed = 1235;
  const Phantom c = make_phantom(spec);
  bool differs = false;
  for (std::size_t k = 0; k < a.phase.size(); ++k)
    if (a.phase.data()[k] != c.phase.data()[k]) differs = true;
  CHECK(differs);
}

TEST_CASE("phase equals wrapped truth; wrap lines add a literal 2*pi step") {
  PhantomSpec spec;
  spec.rows = spec.cols = 16;
  spec.background = {{0, 0, 3.0}, {1, 0, 1.0}};  // exceeds pi -> wrapping occurs
  spec.noise_sigma = 0.05;
  spec.seed = 7;
  const Phantom ph = make_phantom(spec);
  // reconstruct the noise from the same generator to check the invariant
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j) {
      const double noisy = ph.truth_h(i, j) + ph.truth_b(i, j) + spec.noise_sigma * g(rng);
      CHECK(ph.phase(i, j) == doctest::Approx(wrap_scalar(noisy, 2.0 * pi)).epsilon(1e-12));
    }

  PhantomSpec ws = spec;
  ws.noise_sigma = 0.0;
  ws.wrap_lines = {{WrapLine::Axis::column, 10}};
  const Phantom pw = make_phantom(ws);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(pw.phase(i, 12) ==
          doctest::Approx(wrap_scalar(pw.truth_b(i, 12), 2.0 * pi) + 2.0 * pi));
    CHECK(pw.phase(i, 5) == doctest::Approx(wrap_scalar(pw.truth_b(i, 5), 2.0 * pi)));
  }
}

TEST_CASE("phantom spec validation") {
  PhantomSpec spec;
  spec.rows = 1;
  spec.cols = 8;
  CHECK_THROWS_AS(make_phantom(spec), std::invalid_argument);
  spec.rows = 8;
  spec.noise_sigma = -0.1;
  CHECK_THROWS_AS(make_phantom(spec), std::invalid_argument);
  spec.noise_sigma = 0.0;
  Shape d;
  d.kind = Shape::Kind::disc;
  d.center_i = d.center_j = 4;
  d.radius = 10;
  spec.shapes = {d};
  CHECK_THROWS_AS(make_phantom(spec), std::invalid_argument);
}

TEST_CASE("cnr basics: degeneracy and antisymmetry") {
  ScalarField2D f(8, 20, 0.0);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) f(i, j) = 1.0;
  const Roi a{0, 0, 8, 8}, b{0, 12, 8, 8};
  const CnrResult r = cnr(f, a, b);
  CHECK(r.degenerate);  // both regions constant
  CHECK(std::isinf(r.value));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.2);
  for (double& v : f.data()) v += g(rng);
  const CnrResult ab = cnr(f, a, b), ba = cnr(f, b, a);
  CHECK_FALSE(ab.degenerate);
  CHECK(ab.value == doctest::Approx(-ba.value));

  CHECK_THROWS_AS(cnr(f, a, Roi{0, 4, 8, 8}), std::invalid_argument);  // overlap
  CHECK_THROWS_AS(cnr(f, a, Roi{0, 18, 8, 8}), std::invalid_argument);  // out of bounds
}

TEST_CASE("cnr approaches contrast over sigma on large regions") {
  const std::size_t n = 64;
  ScalarField2D f(2 * n, n, 0.0);
  const double sigma = 0.1;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, sigma);
  for (std::size_t i = 0; i < 2 * n; ++i)
    for (std::size_t j = 0; j < n; ++j) f(i, j) = (i < n ? 1.0 : 0.0) + g(rng);
  const CnrResult r = cnr(f, Roi{0, 0, n, n}, Roi{n, 0, n, n});
  CHECK(r.value == doctest::Approx(1.0 / sigma).epsilon(0.10));
}

TEST_CASE("build_W_matrix columns are shifted waveforms") {
  const int m = 3;
  const std::size_t n = 32;
  const auto W = build_W_matrix(m, n);
  const auto w = matching_waveform(m, n);
  for (std::size_t k : {std::size_t{0}, std::size_t{5}, std::size_t{31}})
    for (std::size_t i = 0; i < n; ++i)
      CHECK(W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) ==
            doctest::Approx(w[(i + n - k) % n]));

  // W x equals direct circular convolution, 1e-12
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i)) = u(rng);
  const Eigen::VectorXd y = W * x;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += w[(i + n - k) % n] * x(static_cast<Eigen::Index>(k));
    CHECK(std::abs(y(static_cast<Eigen::Index>(i)) - acc) <= 1e-12);
  }

  // m=1: delta waveform makes W a permutation of the identity
  const auto W1 = build_W_matrix(1, 16);
  CHECK((W1 * W1.transpose() - Eigen::MatrixXd::Identity(16, 16)).norm() <= 1e-12);
}

TEST_CASE("rip_check: separated supports are isometric") {
  for (int m : {1, 2, 3, 4}) {
    for (std::size_t n : {std::size_t{32}, std::size_t{64}}) {
      const std::size_t S = n / (2 * static_cast<std::size_t>(m) + 2);
      const RipResult r =
          rip_check(m, n, std::max<std::size_t>(S, 2), static_cast<std::size_t>(m) + 1, 50,
                    1000 + static_cast<std::uint64_t>(m));
      CHECK(r.delta_spectral <= 1e-10);
      CHECK(r.delta_frobenius <= 1e-10);
    }
  }
}

TEST_CASE("rip_check: single column and overlapping columns") {
  const RipResult one = rip_check(3, 64, 1, 3, 20, 2);
  CHECK(one.delta_spectral <= 1e-12);

  const RipResult tight = rip_check(3, 64, 5, 1, 100, 3);  // separation below m
  CHECK(tight.delta_spectral > 0.01);  // columns overlap, isometry lost

  CHECK_THROWS_AS(rip_check(3, 16, 9, 2, 10, 1), std::invalid_argument);  // infeasible
}

TEST_CASE("convergence study: exact-sparsity case sits at the solver floor") {
  ConvergenceSpec spec;
  spec.smooth_amplitude = 0.0;  // piecewise constant
  spec.lambda0 = 1e-9;
  spec.sizes = {64, 128, 256};
  const ConvergenceStudy st = convergence_study(spec);
  for (const auto& r : st.rows) CHECK(r.l2_error <= 1e-5);
}

TEST_CASE("convergence study: errors shrink with refinement") {
  ConvergenceSpec spec;
  spec.sizes = {64, 128, 256};
  const ConvergenceStudy st = convergence_study(spec);
  REQUIRE(st.rows.size() == 3);
  CHECK(st.rows[1].l2_error < st.rows[0].l2_error * 1.1);
  CHECK(st.rows[2].l2_error < st.rows[1].l2_error * 1.1);
  CHECK(st.slope < -1.5);
  CHECK(st.k_m == 3);
  // bound-shape consistency: every entry stays within the C*sqrt(n)*n^-3
  // envelope fitted at the largest size (no blow-up against the bound's shape)
  for (const auto& r : st.rows) {
    const double bound = st.fitted_c * std::sqrt(static_cast<double>(r.n)) *
                         std::pow(static_cast<double>(r.n), -3.0);
    CHECK(r.l2_error <= 1.5 * bound);
  }
}

TEST_CASE("convergence study validation") {
  ConvergenceSpec bad;
  bad.sizes = {64};
  CHECK_THROWS_AS(convergence_study(bad), std::invalid_argument);
  bad.sizes = {128, 64};
  CHECK_THROWS_AS(convergence_study(bad), std::invalid_argument);
  bad.sizes = {64, 128};
  bad.jumps = {{1.5, 1.0}};
  CHECK_THROWS_AS(convergence_study(bad), std::invalid_argument);
}
