#pragma once

#include "aniframe/generators.hpp"

#include <string>
#include <vector>

namespace aniframe {

/// Frequency grid for obstruction_index: per direction, log-spaced radii
/// across one A*-shell of the shape ellipsoid.
struct FreqGridSpec {
  int directions = 128;
  int radial = 64;
};

struct CalderonValue {
  double value = 0.0;          // truncated sum over |j| <= J_max
  double tail_estimate = 0.0;  // next four terms on each side
};

/// Normalization making sup D = 1 over the 2I reference dilation; exactly 1
/// for Meyer partition generators.
double calderon_normalization(const Generator& g);

/// sum_{|j| <= J_max} |g^((A*)^-j xi)|^2, scaled by calderon_normalization(g).
CalderonValue calderon_sum(const Generator& g, const DilationInfo& d, const Vec& xi, int J_max);

/// Same with an explicit normalization (skips recomputing it).
CalderonValue calderon_sum(const Generator& g, const DilationInfo& d, const Vec& xi, int J_max, double norm);

struct ObstructionReport {
  FreqGridSpec grid;
  int points = 0;
  double inf_D = 0.0;
  double sup_D = 0.0;
  double G_index = 0.0;
  int J_truncation = 12;
  double tail_estimate = 0.0;  // largest per-point tail over the grid
  double normalization = 1.0;
  std::vector<std::string> warnings;
};

/// Points of the shell grid (exposed for tests and the benchmark).
std::vector<Vec> shell_grid(const DilationInfo& d, const FreqGridSpec& spec);

ObstructionReport obstruction_index(const Generator& g, const DilationInfo& d, const FreqGridSpec& spec = {},
                                    int J_max = 12, bool parallel = true);

enum class ShearMode { CompositeParabolic, PureShear };

struct SweepRow {
  double s = 0.0;
  double kappa = 1.0;
  double G_index = 0.0;
  double inf_D = 0.0;
  double sup_D = 0.0;
  int J_max = 12;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
};

/// A(s) = [[1, s], [0, 1]] diag(a, sqrt(a)) (CompositeParabolic) or the bare
/// shear (PureShear, only with allow_unsafe).
Mat composite_shear(double s, double a);

struct PureShearGrid {
  int directions = 128;
  int radial = 64;
  double r_min = 0.05;
  double r_max = 20.0;
  double xi2_floor = 1e-2;
};

SweepResult shear_sweep(const Generator& g, const std::vector<double>& s_values, ShearMode mode, double a,
                        int J_max, bool allow_unsafe, const FreqGridSpec& spec = {}, const PureShearGrid& pure = {});

enum class Verdict { Supportive, Inconclusive };
const char* to_string(Verdict v);

struct ConjectureFit {
  double C = 0.0;
  double gamma = 0.0;
  double r_squared = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  int rows_used = 0;
};

/// Least squares of log(1 - G) = log C - gamma log kappa over rows with G < 1.
ConjectureFit conjecture_fit(const std::vector<SweepRow>& rows);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows, const std::string& header_comment = "");

}  // namespace aniframe
