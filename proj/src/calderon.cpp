#include "aniframe/calderon.hpp"

#include "aniframe/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace aniframe {

namespace {

std::vector<Mat> dual_powers(const DilationInfo& d, int j_lo, int j_hi) {
  std::vector<Mat> out;
  for (int j = j_lo; j <= j_hi; ++j) out.push_back(d.power(-j).transpose());
  return out;
}

std::vector<Mat> tail_powers(const DilationInfo& d, int J_max) {
  std::vector<Mat> out;
  for (int j = J_max + 1; j <= J_max + 4; ++j) {
    out.push_back(d.power(-j).transpose());
    out.push_back(d.power(j).transpose());
  }
  return out;
}

std::vector<Vec> shell_points(const Mat& astar, const Mat& mstar, const FreqGridSpec& spec) {
  std::vector<Vec> pts;
  pts.reserve(static_cast<size_t>(spec.directions) * spec.radial);
  auto mnorm = [&](const Vec& v) { return std::sqrt(v.dot(mstar * v)); };
  for (int a = 0; a < spec.directions; ++a) {
    const double th = 2.0 * kPi * a / spec.directions;
    Vec u(2);
    u << std::cos(th), std::sin(th);
    const double r_out = 1.0 / mnorm(u);
    const double r_in = 1.0 / mnorm(Vec(astar * u));
    for (int i = 0; i < spec.radial; ++i) {
      const double t = (i + 0.5) / spec.radial;
      pts.push_back(u * (r_in * std::pow(r_out / r_in, t)));
    }
  }
  return pts;
}

}  // namespace

double calderon_normalization(const Generator& g) {
  if (g.kind() == GeneratorKind::MeyerPartition) return 1.0;
  if (g.dim() != 2) throw Error(ErrorKind::InvalidArgument, "calderon normalization is defined for n = 2");
  Mat ref(2, 2);
  ref << 2.0, 0.0, 0.0, 2.0;
  const DilationInfo d = validate_dilation(ref);
  const auto vals = kernels::omp::calderon_values(g, dual_powers(d, -12, 12), shell_grid(d, {128, 256}), 1.0);
  const double sup = *std::max_element(vals.begin(), vals.end());
  if (!(sup > 0.0)) throw Error(ErrorKind::ZeroNorm, "Calderon sum vanishes on the reference grid");
  return 1.0 / sup;
}

CalderonValue calderon_sum(const Generator& g, const DilationInfo& d, const Vec& xi, int J_max) {
  return calderon_sum(g, d, xi, J_max, calderon_normalization(g));
}

CalderonValue calderon_sum(const Generator& g, const DilationInfo& d, const Vec& xi, int J_max, double norm) {
  if (J_max < 1) throw Error(ErrorKind::InvalidArgument, "J_max must be >= 1");
  if (xi.isZero(0.0)) throw Error(ErrorKind::ZeroFrequency, "Calderon sum requested at xi = 0");
  CalderonValue out;
  for (const Mat& t : dual_powers(d, -J_max, J_max)) out.value += std::norm(g.fourier(t * xi));
  for (const Mat& t : tail_powers(d, J_max)) out.tail_estimate += std::norm(g.fourier(t * xi));
  out.value *= norm;
  out.tail_estimate *= norm;
  return out;
}

std::vector<Vec> shell_grid(const DilationInfo& d, const FreqGridSpec& spec) {
  if (d.dimension != 2) throw Error(ErrorKind::InvalidArgument, "shell grid is implemented for n = 2");
  const DilationInfo ds = d.transpose();
  return shell_points(ds.matrix, ds.shape_matrix, spec);
}

ObstructionReport obstruction_index(const Generator& g, const DilationInfo& d, const FreqGridSpec& spec, int J_max,
                                    bool parallel) {
  if (J_max < 1) throw Error(ErrorKind::InvalidArgument, "J_max must be >= 1");
  ObstructionReport rep;
  rep.grid = spec;
  rep.J_truncation = J_max;
  rep.normalization = calderon_normalization(g);
  const auto pts = shell_grid(d, spec);
  rep.points = static_cast<int>(pts.size());
  auto eval = parallel ? kernels::omp::calderon_values : kernels::serial::calderon_values;
  const auto vals = eval(g, dual_powers(d, -J_max, J_max), pts, rep.normalization);
  const auto tails = eval(g, tail_powers(d, J_max), pts, rep.normalization);
  rep.inf_D = *std::min_element(vals.begin(), vals.end());
  rep.sup_D = *std::max_element(vals.begin(), vals.end());
  rep.G_index = std::max(std::abs(1.0 - rep.inf_D), std::abs(1.0 - rep.sup_D));
  rep.tail_estimate = *std::max_element(tails.begin(), tails.end());
  return rep;
}

Mat composite_shear(double s, double a) {
  if (!(a > 1.0)) throw Error(ErrorKind::InvalidArgument, "base scale a must exceed 1");
  Mat sh(2, 2), dg(2, 2);
  sh << 1.0, s, 0.0, 1.0;
  dg << a, 0.0, 0.0, std::sqrt(a);
  return sh * dg;
}

namespace {

SweepRow pure_shear_row(const Generator& g, double s, int J_max, double norm, const PureShearGrid& pg) {
  std::vector<Mat> tr;
  for (int j = -J_max; j <= J_max; ++j) {
    Mat m(2, 2);
    m << 1.0, 0.0, -j * s, 1.0;  // ((S_s)^-j)^T
    tr.push_back(m);
  }
  std::vector<Vec> pts;
  for (int a = 0; a < pg.directions; ++a) {
    const double th = 2.0 * kPi * a / pg.directions;
    for (int i = 0; i < pg.radial; ++i) {
      const double r = pg.r_min * std::pow(pg.r_max / pg.r_min, (i + 0.5) / pg.radial);
      Vec xi(2);
      xi << r * std::cos(th), r * std::sin(th);
      if (std::abs(xi[1]) >= pg.xi2_floor) pts.push_back(xi);
    }
  }
  const auto vals = kernels::omp::calderon_values(g, tr, pts, norm);
  SweepRow row;
  row.s = s;
  Mat a(2, 2);
  a << 1.0, s, 0.0, 1.0;
  row.kappa = condition_number_2x2(a);
  row.inf_D = *std::min_element(vals.begin(), vals.end());
  row.sup_D = *std::max_element(vals.begin(), vals.end());
  row.G_index = std::max(std::abs(1.0 - row.inf_D), std::abs(1.0 - row.sup_D));
  row.J_max = J_max;
  return row;
}

}  // namespace

SweepResult shear_sweep(const Generator& g, const std::vector<double>& s_values, ShearMode mode, double a, int J_max,
                        bool allow_unsafe, const FreqGridSpec& spec, const PureShearGrid& pure) {
  SweepResult out;
  if (mode == ShearMode::PureShear) {
    if (!allow_unsafe)
      throw Error(ErrorKind::ShearDegenerate, "pure shear is not expansive; pass the unsafe flag to sweep it anyway");
    out.warnings.push_back("pure shear: Calderon sum is j-independent on the xi1 axis; grid restricted to |xi2| >= " +
                           std::to_string(pure.xi2_floor));
    const double norm = calderon_normalization(g);
    for (double s : s_values) out.rows.push_back(pure_shear_row(g, s, J_max, norm, pure));
    return out;
  }
  for (double s : s_values) {
    const Mat A = composite_shear(s, a);
    const DilationInfo d = validate_dilation(A);
    const ObstructionReport rep = obstruction_index(g, d, spec, J_max);
    SweepRow row;
    row.s = s;
    row.kappa = condition_number_2x2(A);
    row.G_index = rep.G_index;
    row.inf_D = rep.inf_D;
    row.sup_D = rep.sup_D;
    row.J_max = J_max;
    out.rows.push_back(row);
  }
  return out;
}

const char* to_string(Verdict v) { return v == Verdict::Supportive ? "Supportive" : "Inconclusive"; }

ConjectureFit conjecture_fit(const std::vector<SweepRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows)
    if (r.G_index < 1.0 && r.kappa >= 1.0) pts.emplace_back(std::log(r.kappa), std::log(1.0 - r.G_index));
  std::vector<double> kap;
  for (const auto& p : pts) kap.push_back(p.first);
  std::sort(kap.begin(), kap.end());
  const auto distinct = std::unique(kap.begin(), kap.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }) - kap.begin();
  if (pts.size() < 4 || distinct < 4)
    throw Error(ErrorKind::InsufficientData, "conjecture fit needs >= 4 rows with distinct kappa and G < 1");

  const double m = static_cast<double>(pts.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0;
  for (const auto& [x, y] : pts) ss_res += std::pow(y - (intercept + slope * x), 2);

  ConjectureFit fit;
  fit.gamma = -slope;
  fit.C = std::exp(intercept);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 0.0;
  fit.rows_used = static_cast<int>(pts.size());
  fit.verdict = (fit.gamma > 0.1 && fit.r_squared >= 0.9) ? Verdict::Supportive : Verdict::Inconclusive;
  return fit;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows, const std::string& header_comment) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  if (!header_comment.empty()) os << "# " << header_comment << '\n';
  os << "s,kappa,G_index,inf_D,sup_D,J_max\n";
  os.precision(12);
  for (const auto& r : rows)
    os << r.s << ',' << r.kappa << ',' << r.G_index << ',' << r.inf_D << ',' << r.sup_D << ',' << r.J_max << '\n';
}

}  // namespace aniframe
