#include "aniframe/report.hpp"

#include <fstream>

namespace aniframe {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot open " + path + " for writing");
  return os;
}

Json multi_index_json(const MultiIndex& b) {
  Json a = Json::array();
  for (int v : b) a.push_back(v);
  return a;
}

}  // namespace

Json artifact_meta(const RunConfig& c, const std::string& subcommand) {
  return Json{{"tool", "aniframe"},
              {"version", ANIFRAME_VERSION},
              {"config_hash", c.hash},
              {"subcommand", subcommand}};
}

std::string artifact_comment(const RunConfig& c, const std::string& subcommand) {
  return std::string("aniframe ") + ANIFRAME_VERSION + " config " + c.hash + " " + subcommand;
}

Json to_json(const Mat& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const DilationInfo& d) {
  Json ev = Json::array();
  for (const cplx& e : d.eigenvalues) ev.push_back({{"re", e.real()}, {"im", e.imag()}});
  return Json{{"matrix", to_json(d.matrix)},
              {"dimension", d.dimension},
              {"b", d.determinant_abs},
              {"kappa", d.condition_number},
              {"eigenvalues", ev},
              {"lambda_min_mod", d.lambda_min_mod},
              {"lambda_max_mod", d.lambda_max_mod},
              {"quasi_norm_mode", d.quasi_norm_mode == QuasiNormMode::Step ? "step" : "smooth"},
              {"real_diagonalizable", d.real_diagonalizable},
              {"integer", d.is_integer},
              {"shape_matrix", to_json(d.shape_matrix)},
              {"shape_terms", d.shape_terms}};
}

Json to_json(const MolecularReport& r) {
  Json per = Json::array();
  for (const auto& b : r.per_beta) per.push_back({{"beta", multi_index_json(b.beta)}, {"integral", b.value}});
  return Json{{"D", r.D}, {"N", r.N}, {"box", r.box}, {"per_beta_integrals", per}, {"norm", r.norm}};
}

Json to_json(const ObstructionReport& r) {
  return Json{{"directions", r.grid.directions},
              {"radial", r.grid.radial},
              {"points", r.points},
              {"inf_D", r.inf_D},
              {"sup_D", r.sup_D},
              {"G_index", r.G_index},
              {"J_truncation", r.J_truncation},
              {"tail_estimate", r.tail_estimate},
              {"normalization", r.normalization},
              {"warnings", r.warnings}};
}

Json to_json(const ConjectureFit& f) {
  return Json{{"C", f.C}, {"gamma", f.gamma}, {"r_squared", f.r_squared}, {"verdict", to_string(f.verdict)},
              {"rows_used", f.rows_used}};
}

Json to_json(const OptimizationResult& r) {
  Json coef = Json::array();
  for (long i = 0; i < r.kernel_coefficients.size(); ++i)
    coef.push_back({r.kernel_coefficients[i].real(), r.kernel_coefficients[i].imag()});
  return Json{{"objective_kind", to_string(r.objective_kind)},
              {"trace", r.objective_trace},
              {"el_residual", r.el_residual},
              {"iterations", r.iterations},
              {"kernel_dim", r.kernel_dim},
              {"converged", r.converged},
              {"no_descent", r.no_descent},
              {"active_changes", r.active_changes},
              {"kernel_coefficients", coef},
              {"warnings", r.warnings}};
}

Json to_json(const ScalingResult& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"dilation", to_json(row.dilation)},
                    {"kappa", row.kappa},
                    {"M", row.M},
                    {"el_residual", row.el_residual},
                    {"iterations", row.iterations}});
  Json out{{"rows", rows}, {"fit_available", r.fit_available}};
  if (r.fit_available) {
    out["alpha"] = r.alpha;
    out["r_squared"] = r.r_squared;
  }
  out["warnings"] = r.warnings;
  return out;
}

Json to_json(const EmbeddingReport& r) {
  return Json{{"p", r.p},
              {"q", r.q},
              {"functions", r.rows.size()},
              {"excluded", r.excluded},
              {"C_opt_estimate", r.C_opt_estimate},
              {"M_factor", r.M_factor},
              {"K_estimate", r.K_estimate},
              {"K_spread", r.K_spread}};
}

Json neumann_json(const NeumannResult& n, const DualReport& d) {
  return Json{{"q", n.q},
              {"terms_used", n.terms_used},
              {"tail_bound", n.tail_bound},
              {"C_M_S", d.fit_S.C_M},
              {"C_M_Sinv", d.fit_Sinv.C_M},
              {"decay_S", d.fit_S.decay_slope},
              {"decay_Sinv", d.fit_Sinv.decay_slope}};
}

Json failure_json(const std::string& subcommand, const std::string& kind, const std::string& message) {
  return Json{{"status", "failed"}, {"subcommand", subcommand}, {"error_kind", kind}, {"message", message}};
}

void write_json(const std::string& path, Json body, const RunConfig& c, const std::string& subcommand) {
  body["meta"] = artifact_meta(c, subcommand);
  auto os = open_out(path);
  os << body.dump(2) << '\n';
}

void write_embedding_csv(const std::string& path, const EmbeddingReport& r, const std::string& comment) {
  auto os = open_out(path);
  if (!comment.empty()) os << "# " << comment << '\n';
  os << "label,lq,hp_proxy,ratio,boundary_fraction\n";
  os.precision(12);
  for (const auto& row : r.rows)
    os << row.label << ',' << row.lq << ',' << row.hp_proxy << ',' << row.ratio << ',' << row.boundary_fraction << '\n';
}

void write_scaling_csv(const std::string& path, const ScalingResult& r, const std::string& comment) {
  auto os = open_out(path);
  if (!comment.empty()) os << "# " << comment << '\n';
  os << "kappa,M,el_residual,iterations,a11,a22\n";
  os.precision(12);
  for (const auto& row : r.rows)
    os << row.kappa << ',' << row.M << ',' << row.el_residual << ',' << row.iterations << ',' << row.dilation(0, 0)
       << ',' << row.dilation(1, 1) << '\n';
}

}  // namespace aniframe
