#pragma once

#include "aniframe/geometry.hpp"
#include "aniframe/grid.hpp"

#include <string>
#include <vector>

namespace aniframe {

struct LatticeIndex {
  int j = 0;
  IVec k;
  bool operator==(const LatticeIndex& o) const { return j == o.j && k == o.k; }
};

/// Q_{j,k} = A^{-j}([0,1]^n + k).
struct DyadicCube {
  LatticeIndex index;
  Vec center;
  double measure = 0.0;
  std::vector<Vec> vertices;
};

/// Finite index set, enumerated lexicographically on (j, k). Windows built
/// from an explicit list keep the caller's order and may repeat an index.
struct TruncationWindow {
  int dim = 0;
  int j_min = 0;
  int j_max = 0;
  std::vector<long> k_lo;
  std::vector<long> k_hi;
  std::vector<LatticeIndex> indices;

  long size() const { return static_cast<long>(indices.size()); }
  const LatticeIndex& operator[](long i) const { return indices[i]; }
};

/// j in [j_min, j_max], |k_a| <= k_radius on every axis.
TruncationWindow make_window(int dim, int j_min, int j_max, long k_radius);
TruncationWindow make_window(int dim, int j_min, int j_max, const std::vector<long>& k_lo,
                             const std::vector<long>& k_hi);
TruncationWindow window_from_indices(int dim, std::vector<LatticeIndex> indices);
/// Indices at the extreme scales or missing a same-scale lattice neighbour
/// (for box windows: k on the box boundary).
std::vector<bool> boundary_mask(const TruncationWindow& w);

struct CoefficientSequence {
  TruncationWindow window;
  CVector values;
};

/// Dense matrix over window pairs; rows are analyzer indices Q, columns
/// synthesizer indices P.
struct GramMatrix {
  TruncationWindow window;
  CMatrix entries;
  std::string synthesizer;
  std::string analyzer;
  Mat dilation;
  std::string method;
};

DyadicCube cube(const DilationInfo& d, const LatticeIndex& idx);

double omega_weight(const DyadicCube& Q, const DyadicCube& P, double delta, double eps, double p,
                    const DilationInfo& d);

/// Cell-midpoint grid aligned with the cube faces of a diagonal dilation: every
/// cube of the window receives exactly per_edge^n samples. For other
/// dilations the bounding box is sampled at the finest edge / per_edge.
GridSpec sequence_grid(const DilationInfo& d, const TruncationWindow& w, long per_edge = 8);

double sequence_norm(const CoefficientSequence& s, double p, const DilationInfo& d, const GridSpec& grid);
/// Grid-free form. For diagonal integer dilations the cubes nest, the square
/// function is constant on the cells of the finest level, and the integral is
/// summed exactly over that tree. Other dilations fall back to sequence_grid.
double sequence_norm(const CoefficientSequence& s, double p, const DilationInfo& d);

struct AlmostDiagonalFit {
  double C_M = 0.0;
  double decay_slope = 0.0;  // slope of log|m| against log(1 + normalized distance)
  long pairs_used = 0;
};

AlmostDiagonalFit almost_diagonal_fit(const CMatrix& M, const TruncationWindow& w, double delta, double eps,
                                      double p, const DilationInfo& d);

void write_sequence_csv(const std::string& path, const CoefficientSequence& s);
CoefficientSequence read_sequence_csv(const std::string& path, int dim);

/// AFMAT v1: JSON header line then row-major little-endian complex payload.
void write_afmat(const std::string& path, const GramMatrix& m, const std::string& meta_json = "{}");
GramMatrix read_afmat(const std::string& path);

}  // namespace aniframe
