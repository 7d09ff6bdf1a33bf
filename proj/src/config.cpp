#include "aniframe/config.hpp"

#include <boost/crc.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace aniframe {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"dilation", {"matrix", "mode"}},
      {"generator", {"kind", "alpha", "order"}},
      {"analyzer", {"kind", "alpha", "order"}},
      {"window", {"j_min", "j_max", "k_radius"}},
      {"grid", {"lo", "hi", "step"}},
      {"exponents", {"p", "q"}},
      {"molecular", {"D", "N"}},
      {"calderon", {"J_max", "directions", "radial", "mode", "a", "s_values"}},
      {"optimizer", {"objective", "max_iter", "el_tol", "duplicate_reference", "restarts"}},
      {"scaling", {"base", "kappas"}},
      {"invert", {"base", "noise", "tol", "max_terms"}},
      {"moments", {"up_to", "box", "tol"}},
      {"embed", {"atom_scales", "random_count"}},
      {"output", {"directory", "seed"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Values and their source lines. property_tree drops line numbers after
// parsing, so a light scan of the same text recovers them for messages.
class Reader {
 public:
  Reader(const std::string& text, std::string source) : source_(std::move(source)) {
    std::istringstream in(text);
    try {
      pt::ini_parser::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw Error(ErrorKind::ConfigError, where(static_cast<int>(e.line())) + e.message());
    }
    std::istringstream scan(text);
    std::string line, section;
    for (int no = 1; std::getline(scan, line); ++no) {
      const std::string t = trim(line);
      if (t.empty() || t[0] == ';' || t[0] == '#') continue;
      if (t.front() == '[' && t.back() == ']') {
        section = trim(t.substr(1, t.size() - 2));
        lines_[section] = no;
        continue;
      }
      const auto eq = t.find('=');
      if (eq != std::string::npos) lines_[section + "." + trim(t.substr(0, eq))] = no;
    }
    for (const auto& [sec, child] : tree_) {
      const auto it = schema().find(sec);
      if (it == schema().end()) fail(sec, "unknown section [" + sec + "]");
      for (const auto& [key, v] : child)
        if (!it->second.count(key)) fail(sec + "." + key, "unknown key");
    }
  }

  std::optional<std::string> raw(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (v) return trim(*v);
    return std::nullopt;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const auto it = lines_.find(key);
    throw Error(ErrorKind::ConfigError, where(it == lines_.end() ? 0 : it->second) + "'" + key + "': " + msg);
  }

  template <class T>
  void get(const std::string& key, T& out) const {
    if (auto v = raw(key)) out = parse<T>(key, *v);
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& out) const {
    if (auto v = raw(key)) out = parse<T>(key, *v);
  }

  template <class T>
  void get_list(const std::string& key, std::vector<T>& out) const {
    auto v = raw(key);
    if (!v) return;
    out.clear();
    std::string s = *v;
    for (char& ch : s)
      if (ch == ',') ch = ' ';
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(parse<T>(key, tok));
  }

  template <class T>
  T parse(const std::string& key, const std::string& text) const {
    std::istringstream in(text);
    T v{};
    if (!(in >> v) || !(in >> std::ws).eof()) fail(key, "cannot parse '" + text + "'");
    return v;
  }

 private:
  std::string where(int line) const { return source_ + (line > 0 ? ":" + std::to_string(line) : "") + ": "; }

  pt::ptree tree_;
  std::string source_;
  std::map<std::string, int> lines_;
};

template <>
bool Reader::parse<bool>(const std::string& key, const std::string& text) const {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  fail(key, "expected true or false, got '" + text + "'");
}

template <>
std::string Reader::parse<std::string>(const std::string&, const std::string& text) const {
  return text;
}

Mat parse_matrix(const Reader& r, const std::string& key, const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string row;
  while (std::getline(in, row, ';')) {
    if (trim(row).empty()) continue;
    std::istringstream rs(row);
    std::vector<double> vals;
    std::string tok;
    while (rs >> tok) vals.push_back(r.parse<double>(key, tok));
    rows.push_back(std::move(vals));
  }
  const long n = static_cast<long>(rows.size());
  if (n == 0 || n > kMaxDim) r.fail(key, "matrix needs 1 to " + std::to_string(kMaxDim) + " rows");
  Mat m(n, n);
  for (long i = 0; i < n; ++i) {
    if (static_cast<long>(rows[i].size()) != n) r.fail(key, "matrix must be square, rows separated by ';'");
    for (long j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

GeneratorConfig parse_generator(const Reader& r, const std::string& sec) {
  GeneratorConfig g;
  std::string kind = "mexican_hat";
  r.get(sec + ".kind", kind);
  if (kind == "mexican_hat") {
    g.kind = GeneratorKind::MexicanHat2D;
  } else if (kind == "gaussian") {
    g.kind = GeneratorKind::GaussianDeriv;
  } else if (kind == "meyer") {
    g.kind = GeneratorKind::MeyerPartition;
  } else {
    r.fail(sec + ".kind", "expected mexican_hat, gaussian or meyer");
  }
  r.get_list(sec + ".alpha", g.alpha);
  r.get(sec + ".order", g.order);
  for (int a : g.alpha)
    if (a < 0) r.fail(sec + ".alpha", "entries must be nonnegative");
  if (g.order < 1) r.fail(sec + ".order", "must be >= 1");
  return g;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  const Reader r(text, source);
  RunConfig c;
  c.source = source;
  boost::crc_32_type crc;
  crc.process_bytes(text.data(), text.size());
  std::ostringstream hs;
  hs << std::hex << std::setw(8) << std::setfill('0') << crc.checksum();
  c.hash = hs.str();

  c.dilation = Mat::Identity(2, 2) * 2.0;
  if (auto m = r.raw("dilation.matrix")) c.dilation = parse_matrix(r, "dilation.matrix", *m);
  std::string mode = "step";
  r.get("dilation.mode", mode);
  if (mode == "step") {
    c.mode = QuasiNormMode::Step;
  } else if (mode == "smooth") {
    c.mode = QuasiNormMode::Smooth;
  } else {
    r.fail("dilation.mode", "expected step or smooth");
  }

  c.generator = parse_generator(r, "generator");
  if (r.raw("analyzer.kind") || r.raw("analyzer.alpha") || r.raw("analyzer.order"))
    c.analyzer = parse_generator(r, "analyzer");

  r.get("window.j_min", c.j_min);
  r.get("window.j_max", c.j_max);
  r.get("window.k_radius", c.k_radius);
  if (c.j_min > c.j_max) r.fail("window.j_max", "must be >= j_min");
  if (c.k_radius < 0) r.fail("window.k_radius", "must be >= 0");

  r.get("grid.lo", c.grid_lo);
  r.get("grid.hi", c.grid_hi);
  r.get("grid.step", c.grid_step);
  if (!(c.grid_hi > c.grid_lo)) r.fail("grid.hi", "must exceed grid.lo");
  if (!(c.grid_step > 0.0)) r.fail("grid.step", "must be positive");

  r.get("exponents.p", c.p);
  r.get("exponents.q", c.q);
  if (!(c.p > 0.0)) r.fail("exponents.p", "must be positive");
  if (!(c.q > 0.0)) r.fail("exponents.q", "must be positive");

  r.get("molecular.D", c.D);
  r.get("molecular.N", c.N);
  if (c.D && *c.D < 0.0) r.fail("molecular.D", "must be >= 0");
  if (c.N && *c.N < 0) r.fail("molecular.N", "must be >= 0");

  r.get("calderon.J_max", c.J_max);
  r.get("calderon.directions", c.freq.directions);
  r.get("calderon.radial", c.freq.radial);
  std::string smode = "composite";
  r.get("calderon.mode", smode);
  if (smode == "composite") {
    c.shear_mode = ShearMode::CompositeParabolic;
  } else if (smode == "pure") {
    c.shear_mode = ShearMode::PureShear;
  } else {
    r.fail("calderon.mode", "expected composite or pure");
  }
  r.get("calderon.a", c.shear_a);
  r.get_list("calderon.s_values", c.s_values);
  if (c.J_max < 1) r.fail("calderon.J_max", "must be >= 1");
  if (c.freq.directions < 1 || c.freq.radial < 1) r.fail("calderon.directions", "grid sizes must be >= 1");
  if (!(c.shear_a > 1.0)) r.fail("calderon.a", "must exceed 1");

  std::string obj = "molecular";
  r.get("optimizer.objective", obj);
  if (obj == "molecular") {
    c.objective = ObjectiveKind::MolecularNorm;
  } else if (obj == "algebra") {
    c.objective = ObjectiveKind::AlgebraProxy;
  } else {
    r.fail("optimizer.objective", "expected molecular or algebra");
  }
  r.get("optimizer.max_iter", c.max_iter);
  r.get("optimizer.el_tol", c.el_tol);
  r.get("optimizer.duplicate_reference", c.duplicate_reference);
  r.get("optimizer.restarts", c.restarts);
  if (c.max_iter < 1) r.fail("optimizer.max_iter", "must be >= 1");
  if (!(c.el_tol > 0.0)) r.fail("optimizer.el_tol", "must be positive");
  if (c.restarts < 0) r.fail("optimizer.restarts", "must be >= 0");

  r.get("scaling.base", c.scaling_base);
  r.get_list("scaling.kappas", c.scaling_kappas);
  if (!(c.scaling_base > 1.0)) r.fail("scaling.base", "must exceed 1");
  for (double k : c.scaling_kappas)
    if (!(k >= 1.0)) r.fail("scaling.kappas", "entries must be >= 1");

  r.get("invert.base", c.invert_base);
  r.get("invert.noise", c.invert_noise);
  r.get("invert.tol", c.invert_tol);
  r.get("invert.max_terms", c.invert_max_terms);
  if (c.invert_base != "gram" && c.invert_base != "identity") r.fail("invert.base", "expected gram or identity");
  if (c.invert_noise < 0.0) r.fail("invert.noise", "must be >= 0");
  if (!(c.invert_tol > 0.0)) r.fail("invert.tol", "must be positive");
  if (c.invert_max_terms < 1) r.fail("invert.max_terms", "must be >= 1");

  r.get("moments.up_to", c.moments_up_to);
  r.get("moments.box", c.moments_box);
  r.get("moments.tol", c.moments_tol);
  if (c.moments_up_to < 0) r.fail("moments.up_to", "must be >= 0");

  r.get_list("embed.atom_scales", c.atom_scales);
  r.get("embed.random_count", c.random_count);
  if (c.random_count < 0) r.fail("embed.random_count", "must be >= 0");

  r.get("output.directory", c.output_dir);
  r.get("output.seed", c.seed);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

const char* generator_token(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::MexicanHat2D: return "mexican_hat";
    case GeneratorKind::GaussianDeriv: return "gaussian";
    case GeneratorKind::MeyerPartition: return "meyer";
    case GeneratorKind::SampledGrid: return "sampled";
  }
  return "?";
}

Generator build_generator(const GeneratorConfig& g, const DilationInfo& d) {
  switch (g.kind) {
    case GeneratorKind::MexicanHat2D:
      if (d.dimension != 2) throw Error(ErrorKind::ConfigError, "mexican_hat needs a 2x2 dilation");
      return mexican_hat_2d();
    case GeneratorKind::GaussianDeriv: {
      MultiIndex a = g.alpha;
      if (a.empty()) a.assign(d.dimension, 0);
      if (static_cast<int>(a.size()) != d.dimension)
        throw Error(ErrorKind::ConfigError, "gaussian alpha length differs from the dilation dimension");
      return gaussian_deriv(a);
    }
    case GeneratorKind::MeyerPartition:
      return meyer_partition(d, g.order);
    case GeneratorKind::SampledGrid:
      break;
  }
  throw Error(ErrorKind::ConfigError, "sampled generators cannot be built from a config");
}

DilationInfo config_dilation(const RunConfig& c) { return validate_dilation(c.dilation, c.mode); }

Generator config_synthesizer(const RunConfig& c, const DilationInfo& d) { return build_generator(c.generator, d); }

Generator config_analyzer(const RunConfig& c, const DilationInfo& d) {
  return build_generator(c.analyzer ? *c.analyzer : c.generator, d);
}

TruncationWindow config_window(const RunConfig& c) {
  return make_window(static_cast<int>(c.dilation.rows()), c.j_min, c.j_max, c.k_radius);
}

GridSpec config_grid(const RunConfig& c) {
  return spaced_grid(static_cast<int>(c.dilation.rows()), c.grid_lo, c.grid_hi, c.grid_step);
}

MolecularParams config_molecular(const RunConfig& c, const DilationInfo& d) {
  MolecularParams m = default_molecular_params(d, c.p);
  if (c.D) m.D = *c.D;
  if (c.N) m.N = *c.N;
  return m;
}

OptimizerOptions config_optimizer(const RunConfig& c, const DilationInfo& d) {
  OptimizerOptions o;
  o.kind = c.objective;
  o.molecular = config_molecular(c, d);
  o.ad.p = c.p;
  o.max_iter = c.max_iter;
  o.el_tol = c.el_tol;
  return o;
}

std::vector<DilationInfo> config_scaling_family(const RunConfig& c) {
  std::vector<DilationInfo> out;
  for (double k : c.scaling_kappas) {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = c.scaling_base;
    a(1, 1) = c.scaling_base * k;
    out.push_back(validate_dilation(a, c.mode));
  }
  return out;
}

TestFamilySpec config_test_family(const RunConfig& c) {
  TestFamilySpec s;
  s.atom_scales = c.atom_scales;
  s.random_count = c.random_count;
  s.seed = c.seed;
  return s;
}

std::string config_output_dir(const RunConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("ANIFRAME_OUTPUT_DIR"); env && *env) return env;
  return "aniframe_out";
}

}  // namespace aniframe
