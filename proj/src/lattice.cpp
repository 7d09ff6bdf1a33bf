#include "aniframe/lattice.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <fstream>
#include <sstream>

namespace aniframe {

TruncationWindow make_window(int dim, int j_min, int j_max, long k_radius) {
  return make_window(dim, j_min, j_max, std::vector<long>(dim, -k_radius), std::vector<long>(dim, k_radius));
}

TruncationWindow make_window(int dim, int j_min, int j_max, const std::vector<long>& k_lo,
                             const std::vector<long>& k_hi) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::InvalidArgument, "window dimension out of range");
  if (j_max < j_min) throw Error(ErrorKind::InvalidArgument, "empty scale range");
  if (static_cast<int>(k_lo.size()) != dim || static_cast<int>(k_hi.size()) != dim)
    throw Error(ErrorKind::InvalidArgument, "k box dimension mismatch");
  TruncationWindow w;
  w.dim = dim;
  w.j_min = j_min;
  w.j_max = j_max;
  w.k_lo = k_lo;
  w.k_hi = k_hi;
  long per_scale = 1;
  for (int a = 0; a < dim; ++a) {
    if (k_hi[a] < k_lo[a]) throw Error(ErrorKind::InvalidArgument, "empty k box");
    per_scale *= k_hi[a] - k_lo[a] + 1;
  }
  for (int j = j_min; j <= j_max; ++j) {
    for (long i = 0; i < per_scale; ++i) {
      LatticeIndex idx;
      idx.j = j;
      idx.k.resize(dim);
      long r = i;
      for (int a = dim - 1; a >= 0; --a) {
        const long span = k_hi[a] - k_lo[a] + 1;
        idx.k[a] = k_lo[a] + r % span;
        r /= span;
      }
      w.indices.push_back(idx);
    }
  }
  return w;
}

TruncationWindow window_from_indices(int dim, std::vector<LatticeIndex> indices) {
  if (indices.empty()) throw Error(ErrorKind::InvalidArgument, "empty window");
  TruncationWindow w;
  w.dim = dim;
  w.j_min = indices.front().j;
  w.j_max = indices.front().j;
  w.k_lo.assign(dim, indices.front().k[0]);
  w.k_hi.assign(dim, indices.front().k[0]);
  for (int a = 0; a < dim; ++a) w.k_lo[a] = w.k_hi[a] = indices.front().k[a];
  for (const auto& q : indices) {
    if (q.k.size() != dim) throw Error(ErrorKind::InvalidArgument, "index dimension mismatch");
    w.j_min = std::min(w.j_min, q.j);
    w.j_max = std::max(w.j_max, q.j);
    for (int a = 0; a < dim; ++a) {
      w.k_lo[a] = std::min(w.k_lo[a], q.k[a]);
      w.k_hi[a] = std::max(w.k_hi[a], q.k[a]);
    }
  }
  w.indices = std::move(indices);
  return w;
}

std::vector<bool> boundary_mask(const TruncationWindow& w) {
  // an index is interior when all 2n same-scale lattice neighbours are in the window
  std::set<std::vector<long>> present;
  auto key = [&](int j, const IVec& k) {
    std::vector<long> v{static_cast<long>(j)};
    for (int a = 0; a < w.dim; ++a) v.push_back(k[a]);
    return v;
  };
  for (const auto& q : w.indices) present.insert(key(q.j, q.k));
  std::vector<bool> mask(w.indices.size(), false);
  for (size_t i = 0; i < w.indices.size(); ++i) {
    const auto& q = w.indices[i];
    bool edge = q.j == w.j_min || q.j == w.j_max;
    for (int a = 0; a < w.dim && !edge; ++a) {
      for (long s : {-1L, 1L}) {
        IVec nb = q.k;
        nb[a] += s;
        if (!present.count(key(q.j, nb))) edge = true;
      }
    }
    mask[i] = edge;
  }
  return mask;
}

DyadicCube cube(const DilationInfo& d, const LatticeIndex& idx) {
  const int n = d.dimension;
  if (idx.k.size() != n) throw Error(ErrorKind::InvalidArgument, "index dimension mismatch");
  DyadicCube c;
  c.index = idx;
  const Mat inv = d.power(-idx.j);
  const Vec kd = idx.k.cast<double>();
  c.center = inv * (kd + Vec::Constant(n, 0.5));
  c.measure = std::pow(d.determinant_abs, -idx.j);
  for (int v = 0; v < (1 << n); ++v) {
    Vec corner = kd;
    for (int a = 0; a < n; ++a)
      if ((v >> a) & 1) corner[a] += 1.0;
    c.vertices.push_back(inv * corner);
  }
  return c;
}

double omega_weight(const DyadicCube& Q, const DyadicCube& P, double delta, double eps, double p,
                    const DilationInfo& d) {
  if (!(delta > 0.0) || !(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta and eps must be positive");
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidExponent, "p must lie in (0, 1]");
  const double n = d.dimension;
  const double dist = quasi_norm(d, Vec(Q.center - P.center)).value;
  const double scale = std::pow(std::max(Q.measure, P.measure), 1.0 / n);
  const double J = n / p;
  const double ratio = std::min(Q.measure / P.measure, P.measure / Q.measure);
  return std::pow(1.0 + dist / scale, -(J / n + delta)) * std::pow(ratio, eps);
}

namespace {

bool is_diagonal(const Mat& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

}  // namespace

GridSpec sequence_grid(const DilationInfo& d, const TruncationWindow& w, long per_edge) {
  const int n = d.dimension;
  Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
  Vec hi = -lo;
  for (const auto& q : w.indices) {
    for (const Vec& v : cube(d, q).vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
  }
  GridSpec g;
  g.origin.resize(n);
  g.spacing.resize(n);
  g.extents.resize(n);
  if (is_diagonal(d.matrix)) {
    // finest cube edge per axis; coarser edges are integer multiples for integer entries
    for (int a = 0; a < n; ++a) {
      const double edge = std::pow(std::abs(d.matrix(a, a)), -w.j_max);
      g.spacing[a] = edge / static_cast<double>(per_edge);
    }
  } else {
    // shortest parallelepiped edge at the finest scale
    const Mat inv = d.power(-w.j_max);
    double edge = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) edge = std::min(edge, inv.col(a).norm());
    const double h = edge / static_cast<double>(per_edge);
    g.spacing = Vec::Constant(n, h);
  }
  for (int a = 0; a < n; ++a) {
    const double h = g.spacing[a];
    const double first = std::floor(lo[a] / h + 1e-9);
    const double last = std::ceil(hi[a] / h - 1e-9);
    // cell midpoints never sit on a cube face, whatever the orientation of A
    g.origin[a] = (first + 0.5) * h;
    g.extents[a] = static_cast<long>(last - first);
  }
  return g;
}

double sequence_norm(const CoefficientSequence& s, double p, const DilationInfo& d, const GridSpec& grid) {
  if (!(p > 0.0)) throw Error(ErrorKind::InvalidExponent, "p must be positive");
  grid.check();
  const int n = d.dimension;
  if (grid.dim() != n) throw Error(ErrorKind::InvalidArgument, "grid dimension mismatch");
  if (s.values.size() != s.window.size()) throw Error(ErrorKind::InvalidArgument, "sequence length mismatch");

  std::vector<double> square(grid.size(), 0.0);
  const long min_points = static_cast<long>(std::pow(8.0, n));
  constexpr double kEdgeTol = 1e-10;

  for (long qi = 0; qi < s.window.size(); ++qi) {
    const double mag2 = std::norm(s.values[qi]);
    if (mag2 == 0.0) continue;
    const auto& q = s.window[qi];
    const DyadicCube c = cube(d, q);
    const Mat aj = d.power(q.j);
    const Vec kd = q.k.cast<double>();

    std::vector<long> first(n), count(n);
    long total = 1;
    for (int a = 0; a < n; ++a) {
      double vlo = std::numeric_limits<double>::infinity(), vhi = -vlo;
      for (const Vec& v : c.vertices) {
        vlo = std::min(vlo, v[a]);
        vhi = std::max(vhi, v[a]);
      }
      const long i0 = std::max(0L, static_cast<long>(std::floor((vlo - grid.origin[a]) / grid.spacing[a])) - 1);
      const long i1 = std::min(grid.extents[a] - 1,
                               static_cast<long>(std::ceil((vhi - grid.origin[a]) / grid.spacing[a])) + 1);
      first[a] = i0;
      count[a] = std::max(0L, i1 - i0 + 1);
      total *= count[a];
    }
    long inside = 0;
    std::vector<long> idx(n);
    for (long t = 0; t < total; ++t) {
      long r = t;
      for (int a = n - 1; a >= 0; --a) {
        idx[a] = first[a] + r % count[a];
        r /= count[a];
      }
      const long lin = grid.ravel(idx);
      const Vec y = aj * grid.point(lin) - kd;
      bool in = true;
      for (int a = 0; a < n && in; ++a) in = y[a] >= -kEdgeTol && y[a] < 1.0 - kEdgeTol;
      if (!in) continue;
      ++inside;
      square[lin] += mag2 / c.measure;
    }
    if (inside < min_points) {
      std::ostringstream msg;
      msg << "cube (j=" << q.j << ") holds " << inside << " grid points, need " << min_points;
      throw Error(ErrorKind::GridTooCoarse, msg.str());
    }
  }

  const double vol = grid.cell_volume();
  double acc = 0.0;
  for (double v : square)
    if (v > 0.0) acc += std::pow(v, 0.5 * p);
  return std::pow(acc * vol, 1.0 / p);
}

namespace {

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Tree key: scale followed by the per-axis interval index m, the cube being
// prod_a [m_a, m_a + 1) |A_aa|^-j up to endpoints.
using CellKey = std::vector<long>;

}  // namespace

double sequence_norm(const CoefficientSequence& s, double p, const DilationInfo& d) {
  if (!(p > 0.0)) throw Error(ErrorKind::InvalidExponent, "p must be positive");
  if (s.values.size() != s.window.size()) throw Error(ErrorKind::InvalidArgument, "sequence length mismatch");
  if (!is_diagonal(d.matrix) || !d.is_integer) return sequence_norm(s, p, d, sequence_grid(d, s.window));

  const int n = d.dimension;
  std::vector<long> base(n);
  for (int a = 0; a < n; ++a) base[a] = std::lround(std::abs(d.matrix(a, a)));

  std::map<CellKey, double> value;
  std::set<CellKey> inner;  // cells with valued descendants
  int j_min = std::numeric_limits<int>::max();
  for (long qi = 0; qi < s.window.size(); ++qi)
    if (std::norm(s.values[qi]) > 0.0) j_min = std::min(j_min, s.window[qi].j);
  if (j_min == std::numeric_limits<int>::max()) return 0.0;

  for (long qi = 0; qi < s.window.size(); ++qi) {
    const double mag2 = std::norm(s.values[qi]);
    if (mag2 == 0.0) continue;
    const auto& q = s.window[qi];
    CellKey key(n + 1);
    key[0] = q.j;
    for (int a = 0; a < n; ++a) {
      // a negative entry to an odd power mirrors the interval
      const bool flip = d.matrix(a, a) < 0.0 && (q.j % 2 != 0);
      key[a + 1] = flip ? -q.k[a] - 1 : q.k[a];
    }
    value[key] += mag2 * std::pow(d.determinant_abs, q.j);
    for (int j = q.j - 1; j >= j_min; --j) {
      key[0] = j;
      for (int a = 0; a < n; ++a) key[a + 1] = floor_div(key[a + 1], base[a]);
      if (!inner.insert(key).second) break;
    }
  }

  long children = 1;
  for (int a = 0; a < n; ++a) children *= base[a];
  double total = 0.0;
  auto visit = [&](auto&& self, const CellKey& key, double acc) -> void {
    auto it = value.find(key);
    if (it != value.end()) acc += it->second;
    if (!inner.count(key)) {
      if (acc > 0.0) total += std::pow(d.determinant_abs, -key[0]) * std::pow(acc, 0.5 * p);
      return;
    }
    CellKey child(n + 1);
    child[0] = key[0] + 1;
    for (long c = 0; c < children; ++c) {
      long r = c;
      for (int a = n - 1; a >= 0; --a) {
        child[a + 1] = key[a + 1] * base[a] + r % base[a];
        r /= base[a];
      }
      self(self, child, acc);
    }
  };
  std::set<CellKey> roots;
  for (const auto& [key, v] : value)
    if (key[0] == j_min) roots.insert(key);
  for (const auto& key : inner)
    if (key[0] == j_min) roots.insert(key);
  for (const auto& key : roots) visit(visit, key, 0.0);
  return std::pow(total, 1.0 / p);
}

AlmostDiagonalFit almost_diagonal_fit(const CMatrix& M, const TruncationWindow& w, double delta, double eps,
                                      double p, const DilationInfo& d) {
  if (M.size() == 0) throw Error(ErrorKind::EmptyMatrix, "almost_diagonal_fit on an empty matrix");
  if (M.rows() != w.size() || M.cols() != w.size())
    throw Error(ErrorKind::InvalidArgument, "matrix does not match window");
  const long N = w.size();
  std::vector<DyadicCube> cubes;
  cubes.reserve(N);
  for (const auto& q : w.indices) cubes.push_back(cube(d, q));
  const double n = d.dimension;

  std::vector<double> ratio_max(N, 0.0);
  std::vector<std::vector<std::pair<double, double>>> samples(N);
#pragma omp parallel for schedule(dynamic)
  for (long r = 0; r < N; ++r) {
    for (long c = 0; c < N; ++c) {
      const double mag = std::abs(M(r, c));
      const double om = omega_weight(cubes[r], cubes[c], delta, eps, p, d);
      ratio_max[r] = std::max(ratio_max[r], mag / om);
      if (r != c && w[r].j == w[c].j && mag > 1e-14) {
        const double dist = quasi_norm(d, Vec(cubes[r].center - cubes[c].center)).value;
        const double scale = std::pow(std::max(cubes[r].measure, cubes[c].measure), 1.0 / n);
        if (dist > 0.0) samples[r].emplace_back(std::log1p(dist / scale), std::log(mag));
      }
    }
  }

  AlmostDiagonalFit fit;
  for (double v : ratio_max) fit.C_M = std::max(fit.C_M, v);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long m = 0;
  for (const auto& row : samples)
    for (const auto& [x, y] : row) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
  fit.pairs_used = m;
  const double den = m * sxx - sx * sx;
  fit.decay_slope = (m >= 2 && den > 0.0) ? (m * sxy - sx * sy) / den : 0.0;
  return fit;
}

void write_sequence_csv(const std::string& path, const CoefficientSequence& s) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  os << 'j';
  for (int a = 0; a < s.window.dim; ++a) os << ",k" << a + 1;
  os << ",re,im\n";
  os.precision(17);
  for (long i = 0; i < s.window.size(); ++i) {
    os << s.window[i].j;
    for (int a = 0; a < s.window.dim; ++a) os << ',' << s.window[i].k[a];
    os << ',' << s.values[i].real() << ',' << s.values[i].imag() << '\n';
  }
}

CoefficientSequence read_sequence_csv(const std::string& path, int dim) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  std::string line;
  std::getline(is, line);
  std::vector<LatticeIndex> idx;
  std::vector<cplx> vals;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    LatticeIndex q;
    q.k.resize(dim);
    ls >> q.j;
    for (int a = 0; a < dim; ++a) ls >> q.k[a];
    double re = 0, im = 0;
    ls >> re >> im;
    if (!ls) throw Error(ErrorKind::InvalidArgument, path + ": malformed row");
    idx.push_back(q);
    vals.emplace_back(re, im);
  }
  CoefficientSequence s;
  s.window = window_from_indices(dim, std::move(idx));
  s.values = Eigen::Map<CVector>(vals.data(), static_cast<long>(vals.size()));
  return s;
}

namespace {

nlohmann::ordered_json window_json(const TruncationWindow& w) {
  nlohmann::ordered_json j;
  j["dim"] = w.dim;
  j["j_range"] = {w.j_min, w.j_max};
  j["k_lo"] = w.k_lo;
  j["k_hi"] = w.k_hi;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& q : w.indices) {
    nlohmann::ordered_json e = nlohmann::ordered_json::array();
    e.push_back(q.j);
    for (int a = 0; a < w.dim; ++a) e.push_back(q.k[a]);
    list.push_back(e);
  }
  j["indices"] = list;
  return j;
}

}  // namespace

void write_afmat(const std::string& path, const GramMatrix& m, const std::string& meta_json) {
  nlohmann::ordered_json h;
  h["format"] = "AFMAT v1";
  h["window"] = window_json(m.window);
  h["rows"] = m.entries.rows();
  h["cols"] = m.entries.cols();
  h["dtype"] = "c128";
  h["synthesizer"] = m.synthesizer;
  h["analyzer"] = m.analyzer;
  h["method"] = m.method;
  auto meta = nlohmann::ordered_json::parse(meta_json);
  for (auto it = meta.begin(); it != meta.end(); ++it) h[it.key()] = it.value();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  os << h.dump() << '\n';
  for (long r = 0; r < m.entries.rows(); ++r)
    for (long c = 0; c < m.entries.cols(); ++c) {
      const cplx v = m.entries(r, c);
      os.write(reinterpret_cast<const char*>(&v), sizeof(cplx));
    }
}

GramMatrix read_afmat(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  std::string line;
  std::getline(is, line);
  auto h = nlohmann::json::parse(line);
  GramMatrix m;
  const auto& wj = h.at("window");
  const int dim = wj.at("dim").get<int>();
  std::vector<LatticeIndex> idx;
  for (const auto& e : wj.at("indices")) {
    LatticeIndex q;
    q.j = e.at(0).get<int>();
    q.k.resize(dim);
    for (int a = 0; a < dim; ++a) q.k[a] = e.at(a + 1).get<long>();
    idx.push_back(q);
  }
  m.window = window_from_indices(dim, std::move(idx));
  m.synthesizer = h.value("synthesizer", "");
  m.analyzer = h.value("analyzer", "");
  m.method = h.value("method", "");
  const long rows = h.at("rows").get<long>();
  const long cols = h.at("cols").get<long>();
  m.entries.resize(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) {
      cplx v;
      is.read(reinterpret_cast<char*>(&v), sizeof(cplx));
      m.entries(r, c) = v;
    }
  if (!is) throw Error(ErrorKind::InvalidArgument, path + ": truncated AFMAT payload");
  return m;
}

}  // namespace aniframe
