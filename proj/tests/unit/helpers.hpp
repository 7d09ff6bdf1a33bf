#pragma once

#include "aniframe/types.hpp"

#include <cmath>
#include <random>

namespace testing_util {

inline aniframe::Mat mat2(double a, double b, double c, double d) {
  aniframe::Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

inline aniframe::Vec vec2(double x, double y) {
  aniframe::Vec v(2);
  v << x, y;
  return v;
}

inline aniframe::IVec ivec2(long x, long y) {
  aniframe::IVec v(2);
  v << x, y;
  return v;
}

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace testing_util
