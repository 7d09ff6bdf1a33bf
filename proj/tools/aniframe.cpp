// aniframe <subcommand> --config <path> [--threads N] [--unsafe-pure-shear]
//
// Exit codes: 0 success, 2 validation or configuration error, 3 numerical
// non-convergence (artifacts written so far are kept and failure.json added).

#include "aniframe/report.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace aniframe;

namespace {

struct Context {
  RunConfig cfg;
  std::string sub;
  fs::path out;
  bool unsafe = false;

  std::string path(const std::string& name) const { return (out / name).string(); }
  std::string comment() const { return artifact_comment(cfg, sub); }
  std::string meta() const { return artifact_meta(cfg, sub).dump(); }
  void json(const std::string& name, Json body) const { write_json(path(name), std::move(body), cfg, sub); }
};

// Raised after partial artifacts are on disk.
struct NotConverged {
  std::string message;
};

int cmd_validate(const Context& c) {
  const DilationInfo d = config_dilation(c.cfg);
  Json j{{"dilation", to_json(d)}, {"p", c.cfg.p}, {"N_p", max_vanishing_order(c.cfg.p, d)}};
  c.json("validate.json", j);
  std::cout << "b = " << d.determinant_abs << ", kappa = " << d.condition_number << '\n';
  return 0;
}

int cmd_moments(const Context& c) {
  const DilationInfo d = config_dilation(c.cfg);
  const Generator g = config_synthesizer(c.cfg, d);
  const MomentTable t = moment_table(g, c.cfg.moments_up_to, c.cfg.moments_box, c.cfg.moments_tol);
  const int np = max_vanishing_order(c.cfg.p, d);
  Json rows = Json::array();
  for (size_t i = 0; i < t.gammas.size(); ++i)
    rows.push_back({{"gamma", t.gammas[i]}, {"re", t.values[i].real()}, {"im", t.values[i].imag()}});
  c.json("moments.json", Json{{"generator", g.name()},
                              {"up_to", c.cfg.moments_up_to},
                              {"vanishing_order", t.vanishing_order},
                              {"N_p", np},
                              {"admissible", t.vanishing_order >= np},
                              {"moments", rows}});
  std::cout << g.name() << ": moments vanish through order " << t.vanishing_order << " (N_p = " << np << ")\n";
  return 0;
}

double reference_diagonal(const Generator& g) {
  return inner_product(g, g, InnerProductMethod::Auto, 1e-10).real();
}

int cmd_gram(const Context& c) {
  const DilationInfo d = config_dilation(c.cfg);
  const FrameSystem sys{config_synthesizer(c.cfg, d), config_analyzer(c.cfg, d), d, config_window(c.cfg)};
  const GramMatrix S = gram_matrix(sys, 1e-10);
  write_afmat(c.path("gram.afmat"), S, c.meta());
  const double ref = reference_diagonal(sys.synthesizer);
  AlmostDiagonalParams ad;
  ad.p = c.cfg.p;
  const Deviation dev = deviation_from_identity(S, ref, d, ad, c.cfg.seed);
  const AlmostDiagonalFit fit = almost_diagonal_fit(S.entries, S.window, ad.delta, ad.eps, ad.p, d);
  c.json("gram.json", Json{{"size", S.window.size()},
                           {"method", S.method},
                           {"ref_diag", ref},
                           {"deviation_spectral", dev.spectral},
                           {"deviation_algebra_proxy", dev.algebra_proxy},
                           {"power_iterations", dev.iterations},
                           {"C_M", fit.C_M},
                           {"decay_slope", fit.decay_slope},
                           {"hermitian_error", (S.entries - S.entries.adjoint()).cwiseAbs().maxCoeff()}});
  std::cout << "window " << S.window.size() << ", deviation " << dev.spectral << " (spectral), " << dev.algebra_proxy
            << " (C_M proxy)\n";
  return 0;
}

int cmd_invert(const Context& c) {
  const DilationInfo d = config_dilation(c.cfg);
  const FrameSystem sys{config_synthesizer(c.cfg, d), config_analyzer(c.cfg, d), d, config_window(c.cfg)};
  AlmostDiagonalParams ad;
  ad.p = c.cfg.p;
  GramMatrix S;
  double ref = 1.0;
  if (c.cfg.invert_base == "gram") {
    S = gram_matrix(sys, 1e-10);
    ref = reference_diagonal(sys.synthesizer);
  } else {
    S.window = sys.window;
    S.entries = CMatrix::Identity(sys.window.size(), sys.window.size());
    S.synthesizer = sys.synthesizer.name();
    S.analyzer = sys.analyzer.name();
    S.dilation = d.matrix;
    S.method = "identity";
  }
  if (c.cfg.invert_noise > 0.0)
    S.entries += c.cfg.invert_noise * ref * almost_diagonal_noise(sys.window, d, ad, c.cfg.seed);
  write_afmat(c.path("S.afmat"), S, c.meta());

  const Deviation dev = deviation_from_identity(S, ref, d, ad, c.cfg.seed);
  const NeumannResult nr = neumann_invert(S.entries, ref, dev.spectral, c.cfg.invert_tol, c.cfg.invert_max_terms);
  GramMatrix inv = S;
  inv.entries = nr.inverse;
  inv.method = "neumann";
  write_afmat(c.path("S_inv.afmat"), inv, c.meta());

  long refidx = 0;
  for (long i = 0; i < sys.window.size(); ++i)
    if (sys.window[i].j == 0 && sys.window[i].k.isZero()) {
      refidx = i;
      break;
    }
  const DualReport dr = dual_from_inverse(nr.inverse, S.entries, sys, config_grid(c.cfg), ad, {refidx});
  write_afgrid(c.path("dual.afgrid"), dr.dual_samples.front(), c.meta());
  const CMatrix resid = S.entries * nr.inverse - CMatrix::Identity(S.entries.rows(), S.entries.cols());
  Json j = neumann_json(nr, dr);
  j["residual"] = spectral_norm(resid, 1e-10, 10000, c.cfg.seed).sigma;
  c.json("invert.json", j);
  std::cout << "q = " << nr.q << ", terms " << nr.terms_used << ", C_M(S) " << dr.fit_S.C_M << ", C_M(S^-1) "
            << dr.fit_Sinv.C_M << '\n';
  return 0;
}

int cmd_calderon(const Context& c) {
  const DilationInfo d = config_dilation(c.cfg);
  const ObstructionReport r = obstruction_index(config_synthesizer(c.cfg, d), d, c.cfg.freq, c.cfg.J_max);
  c.json("calderon.json", to_json(r));
  std::cout << "G = " << r.G_index << " (inf D " << r.inf_D << ", sup D " << r.sup_D << ")\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int cmd_sweep(const Context& c) {
  // the sweep builds its own dilations; the configured matrix only fixes the dimension
  const Generator g = build_generator(c.cfg.generator, validate_dilation(Mat::Identity(2, 2) * 2.0));
  const SweepResult r =
      shear_sweep(g, c.cfg.s_values, c.cfg.shear_mode, c.cfg.shear_a, c.cfg.J_max, c.unsafe, c.cfg.freq);
  write_sweep_csv(c.path("sweep.csv"), r.rows, c.comment());
  Json fit;
  try {
    fit = to_json(conjecture_fit(r.rows));
    fit["available"] = true;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData) throw;
    fit = Json{{"available", false}, {"reason", e.what()}};
  }
  fit["note"] = "exploratory fit of log(1 - G) against log kappa";
  fit["warnings"] = r.warnings;
  c.json("conjecture.json", fit);
  for (const auto& row : r.rows) std::cout << "s = " << row.s << "  kappa = " << row.kappa << "  G = " << row.G_index << '\n';
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int cmd_molnorm(const Context& c) {
  const DilationInfo d = config_dilation(c.cfg);
  const MolecularReport r = molecular_report(config_synthesizer(c.cfg, d), d, config_molecular(c.cfg, d));
  c.json("molnorm.json", to_json(r));
  std::cout << "norm = " << r.norm << " (D = " << r.D << ", N = " << r.N << ")\n";
  return 0;
}

TruncationWindow optimizer_window(const RunConfig& cfg) {
  const TruncationWindow w = config_window(cfg);
  return cfg.duplicate_reference ? with_duplicate_reference(w) : w;
}

OptimizationResult run_optimizer(const Context& c, const DilationInfo& d, Json* extra) {
  const OptimizerOptions opt = config_optimizer(c.cfg, d);
  const DualObjective J(config_synthesizer(c.cfg, d), d, optimizer_window(c.cfg), config_grid(c.cfg), opt);
  OptimizationResult r = optimize_dual(J, opt);
  if (extra && c.cfg.restarts > 0) {
    Json finals = Json::array();
    for (const CVector& s : random_starts(J.kernel().dimension, c.cfg.restarts, 1.0, c.cfg.seed)) {
      const OptimizationResult rr = optimize_dual(J, opt, s);
      finals.push_back({{"final", rr.objective_trace.back()}, {"el_residual", rr.el_residual}, {"converged", rr.converged}});
    }
    (*extra)["restarts"] = finals;
  }
  return r;
}

int cmd_optimize(const Context& c) {
  const DilationInfo d = config_dilation(c.cfg);
  Json extra = Json::object();
  const OptimizationResult r = run_optimizer(c, d, &extra);
  write_afgrid(c.path("dual.afgrid"), r.dual_samples, c.meta());
  Json j = to_json(r);
  for (auto& [k, v] : extra.items()) j[k] = v;
  c.json("optimize.json", j);
  std::cout << "objective " << r.objective_trace.back() << ", el_residual " << r.el_residual << ", iterations "
            << r.iterations << ", kernel_dim " << r.kernel_dim << '\n';
  if (!r.converged)
    throw NotConverged{"optimizer stopped at el_residual " + std::to_string(r.el_residual) + " after " +
                       std::to_string(r.iterations) + " iterations"};
  return 0;
}

int cmd_scaling(const Context& c) {
  const std::vector<DilationInfo> family = config_scaling_family(c.cfg);
  OptimizerOptions opt = config_optimizer(c.cfg, family.front());
  const ScalingResult r = kappa_scaling_experiment(mexican_hat_2d(), c.cfg.p, family, config_window(c.cfg),
                                                   config_grid(c.cfg), opt, !c.cfg.D && !c.cfg.N);
  write_scaling_csv(c.path("scaling.csv"), r, c.comment());
  c.json("scaling.json", to_json(r));
  if (r.fit_available) std::cout << "alpha = " << r.alpha << ", R^2 = " << r.r_squared << '\n';
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int cmd_embed(const Context& c) {
  const DilationInfo d = config_dilation(c.cfg);
  const Generator psi = config_synthesizer(c.cfg, d);
  const OptimizationResult opt = run_optimizer(c, d, nullptr);
  const auto family = default_test_family(psi, d, c.cfg.p, config_test_family(c.cfg));
  const EmbeddingReport r =
      embedding_scan(psi, opt.dual_samples, d, c.cfg.p, c.cfg.q, family, config_molecular(c.cfg, d));
  write_embedding_csv(c.path("embed.csv"), r, c.comment());
  Json j = to_json(r);
  j["dual_el_residual"] = opt.el_residual;
  c.json("embed.json", j);
  std::cout << "C_opt " << r.C_opt_estimate << ", M " << r.M_factor << ", K " << r.K_estimate << ", spread "
            << r.K_spread << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic wavelet frame computations"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, std::function<int(const Context&)>>> commands{
      {"validate", {"geometry report of the dilation", cmd_validate}},
      {"moments", {"vanishing-moment table of the generator", cmd_moments}},
      {"gram", {"Gram matrix (AFMAT) and deviation from identity", cmd_gram}},
      {"invert", {"Neumann inverse, dual samples and decay report", cmd_invert}},
      {"calderon", {"Calderon-sum obstruction index", cmd_calderon}},
      {"sweep", {"shear sweep CSV and conjecture fit", cmd_sweep}},
      {"molnorm", {"molecular norm report", cmd_molnorm}},
      {"optimize", {"optimized dual frame element", cmd_optimize}},
      {"scaling", {"kappa-scaling table and exponent fit", cmd_scaling}},
      {"embed", {"embedding-constant scan", cmd_embed}},
  };

  std::string config;
  int threads = 0;
  bool unsafe = false;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    CLI::App* s = app.add_subcommand(name, entry.first);
    s->add_option("--config", config, "INI run configuration")->required();
    s->add_option("--threads", threads, "cap on worker threads")->check(CLI::PositiveNumber);
    s->add_flag("--unsafe-pure-shear", unsafe, "allow the non-expansive pure shear in sweeps");
    subs[name] = s;
  }
  CLI11_PARSE(app, argc, argv);

  std::string name;
  for (const auto& [n, s] : subs)
    if (s->parsed()) name = n;

  Context ctx;
  ctx.sub = name;
  ctx.unsafe = unsafe;
  try {
    ctx.cfg = load_config(config);
  } catch (const Error& e) {
    std::cerr << "aniframe: " << e.what() << '\n';
    return 2;
  }
  if (threads > 0) omp_set_num_threads(threads);
  ctx.out = config_output_dir(ctx.cfg);

  auto fail_numerical = [&](const std::string& kind, const std::string& msg) {
    std::cerr << "aniframe: " << msg << '\n';
    try {
      ctx.json("failure.json", failure_json(name, kind, msg));
    } catch (const std::exception& e) {
      std::cerr << "aniframe: could not write failure.json: " << e.what() << '\n';
    }
    return 3;
  };

  try {
    fs::create_directories(ctx.out);
    return commands.at(name).second(ctx);
  } catch (const NotConverged& e) {
    return fail_numerical("NotConverged", e.message);
  } catch (const Error& e) {
    if (is_numerical(e.kind())) return fail_numerical(to_string(e.kind()), e.what());
    std::cerr << "aniframe: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "aniframe: " << e.what() << '\n';
    return 1;
  }
}
