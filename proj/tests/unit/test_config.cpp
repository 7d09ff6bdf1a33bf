#include "aniframe/report.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace aniframe;
using testing_util::mat2;

namespace {

std::string error_text(const std::string& ini) {
  try {
    parse_config(ini, "run.ini");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    return e.what();
  }
  FAIL("expected ConfigError");
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

const char* kFull = R"([dilation]
matrix = 2 1; 0 4
mode = smooth
[generator]
kind = gaussian
alpha = 1, 0
[analyzer]
kind = meyer
order = 2
[window]
j_min = -1
j_max = 2
k_radius = 3
[exponents]
p = 0.5
q = 3
[molecular]
D = 5.5
[calderon]
mode = pure
s_values = 1, 2.5
[optimizer]
objective = algebra
duplicate_reference = false
[output]
directory = somewhere
seed = 7
)";

}  // namespace

TEST_CASE("defaults from a minimal file") {
  const RunConfig c = parse_config("[dilation]\nmatrix = 2 0; 0 2\n");
  CHECK((c.dilation - mat2(2, 0, 0, 2)).norm() == 0.0);
  CHECK(c.mode == QuasiNormMode::Step);
  CHECK(c.generator.kind == GeneratorKind::MexicanHat2D);
  CHECK(!c.analyzer);
  CHECK(c.p == 1.0);
  CHECK(c.q == 2.0);
  CHECK(!c.D);
  CHECK(!c.N);
  CHECK(c.s_values == std::vector<double>{0, 1, 2, 4, 8});
  CHECK(c.objective == ObjectiveKind::MolecularNorm);
  CHECK(c.hash.size() == 8);
  const DilationInfo d = config_dilation(c);
  CHECK(config_analyzer(c, d).kind() == GeneratorKind::MexicanHat2D);
  const MolecularParams m = config_molecular(c, d);
  CHECK(m.D == 4.0);
  CHECK(m.N == max_vanishing_order(1.0, d) + 1);
}

TEST_CASE("every section is read") {
  const RunConfig c = parse_config(kFull);
  CHECK((c.dilation - mat2(2, 1, 0, 4)).norm() == 0.0);
  CHECK(c.mode == QuasiNormMode::Smooth);
  CHECK(c.generator.kind == GeneratorKind::GaussianDeriv);
  CHECK(c.generator.alpha == MultiIndex{1, 0});
  REQUIRE(c.analyzer);
  CHECK(c.analyzer->kind == GeneratorKind::MeyerPartition);
  CHECK(c.analyzer->order == 2);
  CHECK(c.j_min == -1);
  CHECK(c.j_max == 2);
  CHECK(c.k_radius == 3);
  CHECK(config_window(c).size() == 4 * 49);
  CHECK(c.p == 0.5);
  CHECK(c.q == 3.0);
  CHECK(*c.D == 5.5);
  CHECK(c.shear_mode == ShearMode::PureShear);
  CHECK(c.s_values == std::vector<double>{1.0, 2.5});
  CHECK(c.objective == ObjectiveKind::AlgebraProxy);
  CHECK(!c.duplicate_reference);
  CHECK(c.output_dir == "somewhere");
  CHECK(config_output_dir(c) == "somewhere");
  CHECK(c.seed == 7);
  CHECK(config_test_family(c).seed == 7);
}

TEST_CASE("errors carry file, line and key") {
  CHECK(error_text("[dilation]\nmatrix = 2 0; 0 2\n[window]\nj_mx = 3\n") == "ConfigError: run.ini:4: 'window.j_mx': unknown key");
  CHECK(contains(error_text("[dilation]\nmatrix = 2 0; 0 2\n\n[colour]\nx = 1\n"), "run.ini:4: 'colour': unknown section"));
  CHECK(contains(error_text("[dilation]\nmatrix = 2 0; 0 2\n[exponents]\np = one\n"), "run.ini:4: 'exponents.p': cannot parse 'one'"));
  CHECK(contains(error_text("[dilation]\nmatrix = 2 0 1; 0 2\n"), "run.ini:2: 'dilation.matrix': matrix must be square"));
  CHECK(contains(error_text("[dilation]\nmatrix = 2 0; 0 2\nmode = fuzzy\n"), "run.ini:3: 'dilation.mode'"));
  CHECK(contains(error_text("[dilation]\nmatrix = 2 0; 0 2\n[window]\nj_min = 2\nj_max = 1\n"), "run.ini:5: 'window.j_max'"));
  CHECK(contains(error_text("[dilation]\nmatrix = 2 0; 0 2\n[optimizer]\nduplicate_reference = maybe\n"), "expected true or false"));
  CHECK(contains(error_text("[dilation]\nmatrix = 2 0; 0 2\n[calderon]\na = 1\n"), "'calderon.a': must exceed 1"));
  CHECK(contains(error_text("[dilation\nmatrix = 2 0; 0 2\n"), "run.ini:1"));
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), Error);
}

TEST_CASE("hash follows the text") {
  const std::string a = "[dilation]\nmatrix = 2 0; 0 2\n";
  CHECK(parse_config(a).hash == parse_config(a, "elsewhere.ini").hash);
  CHECK(parse_config(a).hash != parse_config(a + "; comment\n").hash);
  // CRC-32 of the empty string
  CHECK(parse_config("").hash == "00000000");
}

TEST_CASE("output directory falls back to the environment") {
  RunConfig c;
  ::setenv("ANIFRAME_OUTPUT_DIR", "/tmp/from_env", 1);
  CHECK(config_output_dir(c) == "/tmp/from_env");
  ::unsetenv("ANIFRAME_OUTPUT_DIR");
  CHECK(config_output_dir(c) == "aniframe_out");
}

TEST_CASE("scaling family") {
  const RunConfig c = parse_config("[dilation]\nmatrix = 2 0; 0 2\n[scaling]\nbase = 3\nkappas = 1, 4\n");
  const auto fam = config_scaling_family(c);
  REQUIRE(fam.size() == 2);
  CHECK((fam[1].matrix - mat2(3, 0, 0, 12)).norm() == 0.0);
  CHECK(fam[1].condition_number == doctest::Approx(4.0));
}

TEST_CASE("generators from configs") {
  const DilationInfo d = validate_dilation(mat2(2, 0, 0, 2));
  GeneratorConfig g;
  g.kind = GeneratorKind::GaussianDeriv;
  CHECK(build_generator(g, d).value(Vec::Zero(2)).real() == doctest::Approx(1.0));
  g.alpha = {1, 0, 0};
  CHECK_THROWS_AS(build_generator(g, d), Error);
  g.kind = GeneratorKind::SampledGrid;
  CHECK_THROWS_AS(build_generator(g, d), Error);
  for (GeneratorKind k : {GeneratorKind::MexicanHat2D, GeneratorKind::GaussianDeriv, GeneratorKind::MeyerPartition})
    CHECK(std::string(generator_token(k)) != "?");
}

TEST_CASE("artifacts carry the run metadata") {
  const RunConfig c = parse_config("[dilation]\nmatrix = 2 0; 0 2\n", "x.ini");
  const Json m = artifact_meta(c, "validate");
  CHECK(m["tool"] == "aniframe");
  CHECK(m["config_hash"] == c.hash);
  CHECK(m["subcommand"] == "validate");
  CHECK(artifact_comment(c, "sweep") == std::string("aniframe ") + m["version"].get<std::string>() + " config " + c.hash + " sweep");

  const auto dir = std::filesystem::temp_directory_path() / "aniframe_config_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.json").string();
  write_json(path, Json{{"value", 1.5}}, c, "validate");
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  CHECK(text.back() == '\n');
  const Json back = Json::parse(text);
  CHECK(back["value"] == 1.5);
  CHECK(back["meta"] == m);
  // meta sits after the body
  CHECK(text.find("\"value\"") < text.find("\"meta\""));
  std::filesystem::remove_all(dir);
}
