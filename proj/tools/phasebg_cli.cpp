// Command-line front end: phantom generation, edge detection, background
// suppression, CNR, histograms, and the RIP / convergence studies.
//
// Exit codes: 0 success, 2 validation error, 3 solver non-convergence.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phasebg/edge.hpp"
#include "phasebg/io.hpp"
#include "phasebg/phantom.hpp"
#include "phasebg/pipeline.hpp"

namespace {

using nlohmann::json;
using namespace phasebg;

constexpr int kExitValidation = 2;
constexpr int kExitNoConvergence = 3;

ScalarField2D load_real(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".csv") return read_csv(path);
  FieldVariant v = read_field(path);
  if (auto* f = std::get_if<ScalarField2D>(&v)) return std::move(*f);
  return phase_of(std::get<ComplexImage2D>(v));
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

json report_base(const std::string& subcommand, const std::vector<std::string>& argv_echo) {
  json j;
  j["subcommand"] = subcommand;
  j["argv"] = argv_echo;
  return j;
}

void write_report(const std::string& path, const json& j) {
  phasebg::detail::atomic_write(path, j.dump(2) + "\n");
}

json solver_json(const SolverReport& r) {
  return json{{"iterations", r.iterations},
              {"primal_residual", r.primal_residual},
              {"dual_residual", r.dual_residual},
              {"converged", r.converged},
              {"degenerate_weights", r.degenerate_weights}};
}

// Background polynomial coefficients in graded order: c00, c10, c01, c20, c11, c02, ...
std::vector<PolyTerm> poly_terms_from_graded(const std::vector<double>& coefs) {
  std::vector<PolyTerm> terms;
  std::size_t k = 0;
  for (int deg = 0; k < coefs.size(); ++deg)
    for (int px = deg; px >= 0 && k < coefs.size(); --px)
      terms.push_back({px, deg - px, coefs[k++]});
  return terms;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Background phase suppression via sparse edge detection"};
  app.require_subcommand(1);
  std::vector<std::string> argv_echo(argv, argv + argc);

  // ---- phantom ----
  auto* cmd_phantom = app.add_subcommand("phantom", "generate a synthetic phase map");
  std::size_t ph_rows = 128, ph_cols = 128;
  std::vector<std::string> ph_discs, ph_rects;
  std::string ph_poly;
  std::vector<std::size_t> ph_wrap_cols, ph_wrap_rows;
  double ph_sigma = 0.0;
  std::uint64_t ph_seed = 0;
  std::string ph_out, ph_truth_dir;
  cmd_phantom->add_option("--rows", ph_rows);
  cmd_phantom->add_option("--cols", ph_cols);
  cmd_phantom->add_option("--disc", ph_discs, "cx,cy,r,h (repeatable)");
  cmd_phantom->add_option("--rect", ph_rects, "i0,j0,h,w,height (repeatable)");
  cmd_phantom->add_option("--background-poly", ph_poly, "c00,c10,c01,c20,c11,c02,...");
  cmd_phantom->add_option("--wrap-col", ph_wrap_cols, "add 2*pi beyond this column");
  cmd_phantom->add_option("--wrap-row", ph_wrap_rows, "add 2*pi beyond this row");
  cmd_phantom->add_option("--noise-sigma", ph_sigma);
  cmd_phantom->add_option("--seed", ph_seed);
  cmd_phantom->add_option("--out", ph_out)->required();
  cmd_phantom->add_option("--truth-out", ph_truth_dir, "directory for truth_h/truth_b/phase");

  // ---- edges ----
  auto* cmd_edges = app.add_subcommand("edges", "sparse jump detection");
  std::string ed_in, ed_out_ux, ed_out_uy, ed_report;
  int ed_order = 3, ed_max_iter = 2500;
  double ed_lambda = 1e-6, ed_tol = 1e-9;
  cmd_edges->add_option("--in", ed_in)->required();
  cmd_edges->add_option("--order", ed_order);
  cmd_edges->add_option("--lambda", ed_lambda);
  cmd_edges->add_option("--tol", ed_tol);
  cmd_edges->add_option("--max-iter", ed_max_iter);
  cmd_edges->add_option("--out-ux", ed_out_ux);
  cmd_edges->add_option("--out-uy", ed_out_uy);
  cmd_edges->add_option("--report", ed_report);

  // ---- suppress ----
  auto* cmd_sup = app.add_subcommand("suppress", "full background suppression");
  std::string sp_in, sp_out_h, sp_out_b, sp_report, sp_ref, sp_weights = "mag2";
  int sp_order = 3, sp_max_iter = 2500;
  double sp_lambda = 1e-6, sp_epsilon = 1e-8, sp_tol = 1e-9;
  cmd_sup->add_option("--in", sp_in)->required();
  cmd_sup->add_option("--order", sp_order);
  cmd_sup->add_option("--lambda", sp_lambda);
  cmd_sup->add_option("--epsilon", sp_epsilon);
  cmd_sup->add_option("--tol", sp_tol);
  cmd_sup->add_option("--max-iter", sp_max_iter);
  cmd_sup->add_option("--ref", sp_ref, "i,j reference pixel (default: max weight)");
  cmd_sup->add_option("--weights", sp_weights)->check(CLI::IsMember({"mag2", "uniform"}));
  cmd_sup->add_option("--out-h", sp_out_h);
  cmd_sup->add_option("--out-b", sp_out_b);
  cmd_sup->add_option("--report", sp_report);

  // ---- cnr ----
  auto* cmd_cnr = app.add_subcommand("cnr", "contrast-to-noise ratio of two ROIs");
  std::string cn_in, cn_roi1, cn_roi2;
  cmd_cnr->add_option("--in", cn_in)->required();
  cmd_cnr->add_option("--roi1", cn_roi1, "i,j,h,w")->required();
  cmd_cnr->add_option("--roi2", cn_roi2, "i,j,h,w")->required();

  // ---- histogram ----
  auto* cmd_hist = app.add_subcommand("histogram", "value histogram as CSV");
  std::string hs_in, hs_out, hs_range, hs_scale;
  std::size_t hs_bins = 64;
  cmd_hist->add_option("--in", hs_in)->required();
  cmd_hist->add_option("--bins", hs_bins);
  cmd_hist->add_option("--range", hs_range, "lo,hi (default: data range)");
  cmd_hist->add_option("--linear-scale", hs_scale, "a,b: display values a*x+b");
  cmd_hist->add_option("--out", hs_out)->required();

  // ---- export-pgm ----
  auto* cmd_pgm = app.add_subcommand("export-pgm", "PGM image with scaling sidecar");
  std::string pg_in, pg_out, pg_scale;
  int pg_bits = 16;
  cmd_pgm->add_option("--in", pg_in)->required();
  cmd_pgm->add_option("--out", pg_out)->required();
  cmd_pgm->add_option("--bits", pg_bits)->check(CLI::IsMember({8, 16}));
  cmd_pgm->add_option("--linear-scale", pg_scale, "a,b: display values a*x+b");

  // ---- ripcheck ----
  auto* cmd_rip = app.add_subcommand("ripcheck", "restricted-isometry deviation study");
  int rp_order = 3, rp_trials = 200;
  std::size_t rp_size = 64, rp_sparsity = 5, rp_sep = 3;
  std::uint64_t rp_seed = 0;
  std::string rp_out;
  cmd_rip->add_option("--order", rp_order);
  cmd_rip->add_option("--size", rp_size);
  cmd_rip->add_option("--sparsity", rp_sparsity);
  cmd_rip->add_option("--min-sep", rp_sep);
  cmd_rip->add_option("--trials", rp_trials);
  cmd_rip->add_option("--seed", rp_seed);
  cmd_rip->add_option("--out", rp_out);

  // ---- convergence ----
  auto* cmd_conv = app.add_subcommand("convergence", "1D grid-refinement error study");
  int cv_order = 3;
  std::vector<std::size_t> cv_sizes = {64, 128, 256, 512};
  double cv_lambda0 = 1e-2;
  std::string cv_out;
  cmd_conv->add_option("--order", cv_order);
  cmd_conv->add_option("--sizes", cv_sizes)->delimiter(',');
  cmd_conv->add_option("--lambda0", cv_lambda0);
  cmd_conv->add_option("--out", cv_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    auto wall_s = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    if (*cmd_phantom) {
      PhantomSpec spec;
      spec.rows = ph_rows;
      spec.cols = ph_cols;
      for (const auto& s : ph_discs) {
        const auto v = parse_doubles(s);
        if (v.size() != 4) throw std::invalid_argument("--disc wants cx,cy,r,h");
        Shape sh;
        sh.kind = Shape::Kind::disc;
        sh.center_i = v[0];
        sh.center_j = v[1];
        sh.radius = v[2];
        sh.height = v[3];
        spec.shapes.push_back(sh);
      }
      for (const auto& s : ph_rects) {
        const auto v = parse_doubles(s);
        if (v.size() != 5) throw std::invalid_argument("--rect wants i0,j0,h,w,height");
        Shape sh;
        sh.kind = Shape::Kind::rectangle;
        sh.i0 = static_cast<std::size_t>(v[0]);
        sh.j0 = static_cast<std::size_t>(v[1]);
        sh.height_px = static_cast<std::size_t>(v[2]);
        sh.width_px = static_cast<std::size_t>(v[3]);
        sh.height = v[4];
        spec.shapes.push_back(sh);
      }
      if (!ph_poly.empty()) spec.background = poly_terms_from_graded(parse_doubles(ph_poly));
      for (auto c : ph_wrap_cols) spec.wrap_lines.push_back({WrapLine::Axis::column, c});
      for (auto r : ph_wrap_rows) spec.wrap_lines.push_back({WrapLine::Axis::row, r});
      spec.noise_sigma = ph_sigma;
      spec.seed = ph_seed;
      const Phantom ph = make_phantom(spec);
      write_field(ph_out, ph.image);
      if (!ph_truth_dir.empty()) {
        std::filesystem::create_directories(ph_truth_dir);
        const std::filesystem::path d(ph_truth_dir);
        write_field(d / "truth_h.phm", ph.truth_h);
        write_field(d / "truth_b.phm", ph.truth_b);
        write_field(d / "phase.phm", ph.phase);
      }
      return 0;
    }

    if (*cmd_edges) {
      const ScalarField2D phase = load_real(ed_in);
      SolverConfig cfg;
      cfg.lambda = ed_lambda;
      cfg.tol = ed_tol;
      cfg.max_iter = ed_max_iter;
      auto [jumps, rep] = detect_edges(phase, pa_coefficients(ed_order), cfg);
      if (!ed_out_ux.empty()) write_field(ed_out_ux, jumps.ux);
      if (!ed_out_uy.empty()) write_field(ed_out_uy, jumps.uy);
      if (!ed_report.empty()) {
        json j = report_base("edges", argv_echo);
        j["parameters"] = {{"in", ed_in},      {"order", ed_order},       {"lambda", ed_lambda},
                           {"tol", ed_tol},    {"max_iter", ed_max_iter}, {"out_ux", ed_out_ux},
                           {"out_uy", ed_out_uy}};
        j["solver"] = solver_json(rep);
        j["wall_time_s"] = wall_s();
        write_report(ed_report, j);
      }
      return rep.converged ? 0 : kExitNoConvergence;
    }

    if (*cmd_sup) {
      SolverConfig cfg;
      cfg.lambda = sp_lambda;
      cfg.epsilon = sp_epsilon;
      cfg.tol = sp_tol;
      cfg.max_iter = sp_max_iter;
      std::optional<PixelIndex> ref;
      if (!sp_ref.empty()) {
        const auto v = parse_doubles(sp_ref);
        if (v.size() != 2) throw std::invalid_argument("--ref wants i,j");
        ref = PixelIndex{static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1])};
      }
      SuppressResult res;
      FieldVariant in = read_field(sp_in);
      if (auto* img = std::get_if<ComplexImage2D>(&in)) {
        if (sp_weights == "uniform") {
          res = suppress_background_from_phase(phase_of(*img), std::nullopt, sp_order, cfg, ref);
        } else {
          res = suppress_background(*img, sp_order, cfg, ref);
        }
      } else {
        if (sp_weights == "mag2")
          throw std::invalid_argument("suppress: mag2 weights need a complex input image");
        res = suppress_background_from_phase(std::get<ScalarField2D>(in), std::nullopt, sp_order,
                                             cfg, ref);
      }
      if (!sp_out_h.empty()) write_field(sp_out_h, res.phase_h);
      if (!sp_out_b.empty()) write_field(sp_out_b, res.phase_b);
      const bool ok = res.edge_report.converged && res.recon_report.converged;
      if (!sp_report.empty()) {
        json j = report_base("suppress", argv_echo);
        j["parameters"] = {{"in", sp_in},           {"order", sp_order},
                           {"lambda", sp_lambda},   {"epsilon", sp_epsilon},
                           {"tol", sp_tol},         {"max_iter", sp_max_iter},
                           {"ref", sp_ref},         {"weights", sp_weights},
                           {"out_h", sp_out_h},     {"out_b", sp_out_b}};
        j["edge_solver"] = solver_json(res.edge_report);
        j["recon_solver"] = solver_json(res.recon_report);
        j["reference_pixel"] = {res.ref.i, res.ref.j};
        j["converged"] = ok;
        j["wall_time_s"] = wall_s();
        write_report(sp_report, j);
      }
      return ok ? 0 : kExitNoConvergence;
    }

    if (*cmd_cnr) {
      const ScalarField2D f = load_real(cn_in);
      auto parse_roi = [](const std::string& s) {
        const auto v = parse_doubles(s);
        if (v.size() != 4) throw std::invalid_argument("ROI wants i,j,h,w");
        return Roi{static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]),
                   static_cast<std::size_t>(v[2]), static_cast<std::size_t>(v[3])};
      };
      const CnrResult r = cnr(f, parse_roi(cn_roi1), parse_roi(cn_roi2));
      if (r.degenerate)
        std::printf("degenerate\n");
      else
        std::printf("%.17g\n", r.value);
      return 0;
    }

    if (*cmd_hist) {
      ScalarField2D f = load_real(hs_in);
      if (!hs_scale.empty()) {
        const auto ab = parse_doubles(hs_scale);
        if (ab.size() != 2) throw std::invalid_argument("--linear-scale wants a,b");
        for (double& v : f.data()) v = ab[0] * v + ab[1];
      }
      double lo, hi;
      if (!hs_range.empty()) {
        const auto v = parse_doubles(hs_range);
        if (v.size() != 2) throw std::invalid_argument("--range wants lo,hi");
        lo = v[0];
        hi = v[1];
      } else {
        lo = *std::min_element(f.data().begin(), f.data().end());
        hi = *std::max_element(f.data().begin(), f.data().end());
        if (!(hi > lo)) hi = lo + 1.0;
      }
      write_histogram_csv(hs_out, make_histogram(f, hs_bins, lo, hi));
      return 0;
    }

    if (*cmd_pgm) {
      ScalarField2D f = load_real(pg_in);
      if (!pg_scale.empty()) {
        const auto ab = parse_doubles(pg_scale);
        if (ab.size() != 2) throw std::invalid_argument("--linear-scale wants a,b");
        for (double& v : f.data()) v = ab[0] * v + ab[1];
      }
      export_pgm(pg_out, f, pg_bits);
      return 0;
    }

    if (*cmd_rip) {
      const RipResult r = rip_check(rp_order, rp_size, rp_sparsity, rp_sep, rp_trials, rp_seed);
      std::printf("delta_spectral %.3e  delta_frobenius %.3e\n", r.delta_spectral,
                  r.delta_frobenius);
      if (!rp_out.empty()) {
        std::ostringstream out;
        out.precision(17);
        out << "order,size,sparsity,min_sep,trials,seed,delta_spectral,delta_frobenius\n"
            << rp_order << ',' << rp_size << ',' << rp_sparsity << ',' << rp_sep << ','
            << rp_trials << ',' << rp_seed << ',' << r.delta_spectral << ','
            << r.delta_frobenius << '\n';
        phasebg::detail::atomic_write(rp_out, out.str());
      }
      return 0;
    }

    if (*cmd_conv) {
      ConvergenceSpec spec;
      spec.m = cv_order;
      spec.k_smooth = cv_order;
      spec.sizes = cv_sizes;
      spec.lambda0 = cv_lambda0;
      const ConvergenceStudy st = convergence_study(spec);
      std::ostringstream out;
      out.precision(17);
      out << "n,lambda,l2_error,iterations,converged\n";
      for (const auto& r : st.rows)
        out << r.n << ',' << r.lambda << ',' << r.l2_error << ',' << r.iterations << ','
            << (r.converged ? 1 : 0) << '\n';
      out << "# slope," << st.slope << "\n# theory_slope," << st.theory_slope
          << "\n# fitted_c," << st.fitted_c << "\n# c_lp_reference," << st.c_lp_reference
          << '\n';
      std::printf("slope %.3f (theory %.3f)\n", st.slope, st.theory_slope);
      if (!cv_out.empty()) phasebg::detail::atomic_write(cv_out, out.str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitValidation;
}
