#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>

#include "phasebg/edge.hpp"
#include "phasebg/field.hpp"
#include "phasebg/kernels.hpp"
#include "phasebg/recon.hpp"

namespace phasebg {

struct PixelIndex {
  std::size_t i = 0;
  std::size_t j = 0;
};

/// Every stage output of the suppression pipeline, retained for inspection.
struct SuppressResult {
  ScalarField2D phase;      ///< input phase map
  ScalarField2D weights;    ///< weights used by the reconstruction
  JumpField jumps_raw;      ///< solver output before wrap projection
  JumpField jumps;          ///< after wrap projection (radian inputs only)
  ScalarField2D phase_h;    ///< piecewise-harmonic part, referenced
  ScalarField2D phase_b;    ///< smooth background, phase - phase_h
  PixelIndex ref;           ///< reference pixel used for the constant
  SolverReport edge_report;
  SolverReport recon_report;
};

namespace detail {

inline PixelIndex argmax_field(const ScalarField2D& f) {
  PixelIndex best;
  double mv = -1.0;
  for (std::size_t i = 0; i < f.rows(); ++i)
    for (std::size_t j = 0; j < f.cols(); ++j)
      if (f(i, j) > mv) {
        mv = f(i, j);
        best = {i, j};
      }
  return best;
}

}  // namespace detail

/// Background suppression from a real phase map with explicit weights.
/// Stages: edge detection, wrap projection (radian inputs), weighted
/// gradient-matching reconstruction, reference alignment, subtraction.
inline SuppressResult suppress_background_from_phase(
    const ScalarField2D& phase, std::optional<ScalarField2D> weights = std::nullopt,
    int order = 3, const SolverConfig& cfg = {}, std::optional<PixelIndex> ref = std::nullopt,
    const DetectOptions& detect_opts = {}) {
  if (phase.rows() < 2 || phase.cols() < 2)
    throw std::invalid_argument("suppress_background_from_phase: need at least a 2x2 grid");
  if (!phase.all_finite())
    throw std::invalid_argument("suppress_background_from_phase: non-finite phase");

  SuppressResult out;
  out.phase = phase;
  out.weights = weights ? std::move(*weights)
                        : ScalarField2D(phase.rows(), phase.cols(), 1.0, Unit::dimensionless);
  if (out.weights.rows() != phase.rows() || out.weights.cols() != phase.cols())
    throw std::invalid_argument("suppress_background_from_phase: weight dimensions disagree");

  const EdgeKernel kernel = pa_coefficients(order);
  std::tie(out.jumps_raw, out.edge_report) = detect_edges(phase, kernel, cfg, detect_opts);
  out.jumps = (phase.unit() == Unit::radians) ? wrap_jumps(out.jumps_raw) : out.jumps_raw;

  auto [recon, rrep] = reconstruct_phase(out.jumps, out.weights, cfg);
  out.recon_report = rrep;

  out.ref = ref ? *ref : detail::argmax_field(out.weights);
  out.phase_h = apply_reference(recon, out.ref.i, out.ref.j, phase);
  out.phase_b = background(phase, out.phase_h);
  return out;
}

/// Full pipeline from a complex image: the phase is the principal argument
/// and the reconstruction weights are the normalized squared magnitude.
inline SuppressResult suppress_background(const ComplexImage2D& image, int order = 3,
                                          const SolverConfig& cfg = {},
                                          std::optional<PixelIndex> ref = std::nullopt,
                                          const DetectOptions& detect_opts = {}) {
  if (image.rows() == 0 || image.cols() == 0)
    throw std::invalid_argument("suppress_background: empty image");
  return suppress_background_from_phase(phase_of(image), magnitude_weights(image), order, cfg,
                                        ref, detect_opts);
}

}  // namespace phasebg
