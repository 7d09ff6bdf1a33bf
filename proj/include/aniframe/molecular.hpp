#pragma once

#include "aniframe/generators.hpp"

#include <string>
#include <vector>

namespace aniframe {

struct MolecularParams {
  double D = 4.0;           // decay order
  int N = 1;                // smoothness order
  double box = 24.0;        // initial quadrature half-width
  double step = 0.125;      // trapezoid step
  double tol = 1e-8;        // relative box-doubling tolerance
  int max_doublings = 3;
  bool parallel = true;
};

/// D = n/p + 2, N = N_p(A) + 1.
MolecularParams default_molecular_params(const DilationInfo& d, double p);

/// All multi-indices of dimension n with |beta| <= order, graded then lexicographic.
std::vector<MultiIndex> multi_indices(int n, int order);

struct BetaIntegral {
  MultiIndex beta;
  double value = 0.0;
};

struct MolecularReport {
  double D = 0.0;
  int N = 0;
  double box = 0.0;  // half-width at which the doubling check passed
  std::vector<BetaIntegral> per_beta;
  double norm = 0.0;
};

/// (1 + rho_A(x))^D at every node of `grid`.
std::vector<double> molecular_weights(const DilationInfo& d, const GridSpec& grid, double D);

/// sup_{|beta| <= N} int (1 + rho_A)^D |d^beta g|, with the box doubled until
/// the largest integral settles to params.tol.
MolecularReport molecular_report(const Generator& g, const DilationInfo& d, const MolecularParams& params);
double molecular_norm(const Generator& g, const DilationInfo& d, const MolecularParams& params);

/// ||psi|| + ||phi||.
double pair_constant(const Generator& psi, const Generator& phi, const DilationInfo& d, const MolecularParams& params);

/// M / b^{1/p - 1/2}; p in (0, 1] or p = 2.
double lower_bound_ratio(double M_value, const DilationInfo& d, double p);

}  // namespace aniframe
