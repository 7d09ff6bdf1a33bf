#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace aniframe {

// Ambient dimension cap. Small fixed-capacity Eigen types keep point
// arithmetic in the hot loops allocation free.
inline constexpr int kMaxDim = 4;

using cplx = std::complex<double>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using IVec = Eigen::Matrix<long, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Multi-index for derivatives and moments.
using MultiIndex = std::vector<int>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  // configuration / validation failures (CLI exit code 2)
  NotExpansive,
  Singular,
  InvalidExponent,
  InvalidArgument,
  SmoothModeUnavailable,
  SampleTooSmall,
  ShearDegenerate,
  GridTooCoarse,
  WindowTooSmall,
  EmptyMatrix,
  InsufficientData,
  DerivativeUnavailable,
  ZeroFrequency,
  ZeroNorm,
  ConfigError,
  // numerical non-convergence (CLI exit code 3)
  QuadratureNotConverged,
  PowerIterationStalled,
  NotContractive,
  NoDescent,
};

const char* to_string(ErrorKind kind);
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace aniframe
