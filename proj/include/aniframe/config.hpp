#pragma once

#include "aniframe/calderon.hpp"
#include "aniframe/dual_optimizer.hpp"
#include "aniframe/embedding.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aniframe {

struct GeneratorConfig {
  GeneratorKind kind = GeneratorKind::MexicanHat2D;
  MultiIndex alpha;  // GaussianDeriv
  int order = 3;     // MeyerPartition
};

/// One run's parameters, read from an INI file. Sections and keys:
///
///   [dilation]   matrix = "2 0; 0 2", mode = step | smooth
///   [generator]  kind = mexican_hat | gaussian | meyer, alpha = "1 0", order
///   [analyzer]   same keys; defaults to the generator
///   [window]     j_min, j_max, k_radius
///   [grid]       lo, hi, step
///   [exponents]  p, q
///   [molecular]  D, N (default n/p + 2 and N_p(A) + 1)
///   [calderon]   J_max, directions, radial, mode = composite | pure, a, s_values
///   [optimizer]  objective = molecular | algebra, max_iter, el_tol, duplicate_reference, restarts
///   [scaling]    base, kappas
///   [invert]     base = gram | identity, noise, tol, max_terms
///   [moments]    up_to, box, tol
///   [embed]      atom_scales, random_count
///   [output]     directory, seed
///
/// Unknown sections or keys are rejected.
struct RunConfig {
  std::string source;  // file name used in messages
  std::string hash;    // CRC-32 of the file text, 8 hex digits

  Mat dilation;
  QuasiNormMode mode = QuasiNormMode::Step;
  GeneratorConfig generator;
  std::optional<GeneratorConfig> analyzer;

  int j_min = 0;
  int j_max = 0;
  long k_radius = 1;

  double grid_lo = -16.0;
  double grid_hi = 16.0;
  double grid_step = 0.125;

  double p = 1.0;
  double q = 2.0;

  std::optional<double> D;
  std::optional<int> N;

  int J_max = 12;
  FreqGridSpec freq;
  ShearMode shear_mode = ShearMode::CompositeParabolic;
  double shear_a = 4.0;
  std::vector<double> s_values{0.0, 1.0, 2.0, 4.0, 8.0};

  ObjectiveKind objective = ObjectiveKind::MolecularNorm;
  int max_iter = 200;
  double el_tol = 1e-4;
  bool duplicate_reference = true;
  int restarts = 0;

  double scaling_base = 2.0;
  std::vector<double> scaling_kappas{1.0, 2.0, 4.0, 8.0};

  std::string invert_base = "gram";
  double invert_noise = 0.0;
  double invert_tol = 1e-10;
  int invert_max_terms = 200;

  int moments_up_to = 4;
  double moments_box = 16.0;
  double moments_tol = 1e-8;

  std::vector<int> atom_scales{0, 1, 2};
  int random_count = 3;

  std::string output_dir;  // empty: ANIFRAME_OUTPUT_DIR, then ./aniframe_out
  std::uint64_t seed = 20240607;
};

/// Throws ConfigError with file:line and key context.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

const char* generator_token(GeneratorKind kind);
Generator build_generator(const GeneratorConfig& g, const DilationInfo& d);

DilationInfo config_dilation(const RunConfig& c);
Generator config_synthesizer(const RunConfig& c, const DilationInfo& d);
Generator config_analyzer(const RunConfig& c, const DilationInfo& d);
TruncationWindow config_window(const RunConfig& c);
GridSpec config_grid(const RunConfig& c);
MolecularParams config_molecular(const RunConfig& c, const DilationInfo& d);
OptimizerOptions config_optimizer(const RunConfig& c, const DilationInfo& d);
/// diag(base, base * kappa) for every configured kappa.
std::vector<DilationInfo> config_scaling_family(const RunConfig& c);
TestFamilySpec config_test_family(const RunConfig& c);
std::string config_output_dir(const RunConfig& c);

}  // namespace aniframe
