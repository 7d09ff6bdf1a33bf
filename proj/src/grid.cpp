#include "aniframe/grid.hpp"

#include <fftw3.h>

#include "json.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>

namespace aniframe {

static_assert(std::endian::native == std::endian::little, "AFGRID payload assumes a little-endian host");

long GridSpec::size() const {
  long s = 1;
  for (long e : extents) s *= e;
  return s;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= spacing[i];
  return v;
}

std::vector<long> GridSpec::unravel(long linear) const {
  std::vector<long> idx(extents.size());
  for (int a = dim() - 1; a >= 0; --a) {
    idx[a] = linear % extents[a];
    linear /= extents[a];
  }
  return idx;
}

long GridSpec::ravel(const std::vector<long>& idx) const {
  long linear = 0;
  for (int a = 0; a < dim(); ++a) linear = linear * extents[a] + idx[a];
  return linear;
}

Vec GridSpec::point(long linear) const {
  Vec x(dim());
  for (int a = dim() - 1; a >= 0; --a) {
    x[a] = origin[a] + spacing[a] * static_cast<double>(linear % extents[a]);
    linear /= extents[a];
  }
  return x;
}

void GridSpec::check() const {
  if (extents.empty() || static_cast<int>(extents.size()) > kMaxDim)
    throw Error(ErrorKind::InvalidArgument, "grid dimension out of range");
  if (origin.size() != dim() || spacing.size() != dim())
    throw Error(ErrorKind::InvalidArgument, "grid origin/spacing size mismatch");
  for (int a = 0; a < dim(); ++a) {
    if (!(spacing[a] > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive");
    if (extents[a] < 1) throw Error(ErrorKind::InvalidArgument, "grid extent must be positive");
  }
}

GridSpec cube_grid(int n, double lo, double hi, long per_axis) {
  GridSpec s;
  s.origin = Vec::Constant(n, lo);
  s.spacing = Vec::Constant(n, (hi - lo) / static_cast<double>(per_axis));
  s.extents.assign(n, per_axis);
  return s;
}

GridSpec spaced_grid(int n, double lo, double hi, double spacing) {
  const long count = static_cast<long>(std::floor((hi - lo) / spacing + 1e-9)) + 1;
  GridSpec s;
  s.origin = Vec::Constant(n, lo);
  s.spacing = Vec::Constant(n, spacing);
  s.extents.assign(n, count);
  return s;
}

GridFunction::GridFunction(GridSpec s) : spec(std::move(s)), values(spec.size(), cplx(0.0, 0.0)) {}

namespace {
// FFTW planning is not thread safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

GridFunction fft_transform(const GridFunction& g) {
  const GridSpec& in = g.spec;
  in.check();
  const int n = in.dim();
  const long total = in.size();

  GridSpec out;
  out.origin.resize(n);
  out.spacing.resize(n);
  out.extents = in.extents;
  std::vector<long> centre(n);
  for (int a = 0; a < n; ++a) {
    const long N = in.extents[a];
    centre[a] = N / 2;
    out.spacing[a] = 2.0 * kPi / (static_cast<double>(N) * in.spacing[a]);
    out.origin[a] = -static_cast<double>(centre[a]) * out.spacing[a];
  }

  // Pre-multiplying by e^{2 pi i m c / N} centres the output at frequency index c.
  std::vector<cplx> buf(total);
  for (long i = 0; i < total; ++i) {
    auto idx = in.unravel(i);
    double phase = 0.0;
    for (int a = 0; a < n; ++a)
      phase += 2.0 * kPi * static_cast<double>(idx[a] * centre[a] % in.extents[a]) / in.extents[a];
    buf[i] = g.values[i] * std::polar(1.0, phase);
  }

  std::vector<int> dims(in.extents.begin(), in.extents.end());
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft(n, dims.data(), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  GridFunction result(out);
  const double vol = in.cell_volume();
  for (long i = 0; i < total; ++i) {
    const Vec xi = out.point(i);
    result.values[i] = vol * buf[i] * std::polar(1.0, -in.origin.dot(xi));
  }
  return result;
}

void write_afgrid(const std::string& path, const GridFunction& g, const std::string& meta_json) {
  nlohmann::ordered_json h;
  h["format"] = "AFGRID v1";
  h["dim"] = g.spec.dim();
  h["origin"] = std::vector<double>(g.spec.origin.data(), g.spec.origin.data() + g.spec.dim());
  h["spacing"] = std::vector<double>(g.spec.spacing.data(), g.spec.spacing.data() + g.spec.dim());
  h["extents"] = g.spec.extents;
  h["dtype"] = "c128";
  auto meta = nlohmann::ordered_json::parse(meta_json);
  for (auto it = meta.begin(); it != meta.end(); ++it) h[it.key()] = it.value();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  os << h.dump() << '\n';
  os.write(reinterpret_cast<const char*>(g.values.data()),
           static_cast<std::streamsize>(g.values.size() * sizeof(cplx)));
}

GridFunction read_afgrid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  std::string line;
  std::getline(is, line);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, path + ": bad AFGRID header: " + e.what());
  }
  if (h.value("dtype", "") != "c128") throw Error(ErrorKind::InvalidArgument, path + ": unsupported dtype");
  GridSpec s;
  const int n = h.at("dim").get<int>();
  auto o = h.at("origin").get<std::vector<double>>();
  auto sp = h.at("spacing").get<std::vector<double>>();
  s.extents = h.at("extents").get<std::vector<long>>();
  if (static_cast<int>(o.size()) != n || static_cast<int>(sp.size()) != n || static_cast<int>(s.extents.size()) != n)
    throw Error(ErrorKind::InvalidArgument, path + ": inconsistent AFGRID header");
  s.origin = Eigen::Map<const Eigen::VectorXd>(o.data(), n);
  s.spacing = Eigen::Map<const Eigen::VectorXd>(sp.data(), n);
  s.check();
  GridFunction g(s);
  is.read(reinterpret_cast<char*>(g.values.data()), static_cast<std::streamsize>(g.values.size() * sizeof(cplx)));
  if (is.gcount() != static_cast<std::streamsize>(g.values.size() * sizeof(cplx)))
    throw Error(ErrorKind::InvalidArgument, path + ": truncated AFGRID payload");
  return g;
}

void write_grid_csv(const std::string& path, const GridFunction& g) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  const int n = g.spec.dim();
  for (int a = 0; a < n; ++a) os << 'i' << a << ',';
  os << "re,im\n";
  os.precision(17);
  for (long i = 0; i < g.spec.size(); ++i) {
    auto idx = g.spec.unravel(i);
    for (int a = 0; a < n; ++a) os << idx[a] << ',';
    os << g.values[i].real() << ',' << g.values[i].imag() << '\n';
  }
}

}  // namespace aniframe
