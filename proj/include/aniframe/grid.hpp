#pragma once

#include "aniframe/types.hpp"

#include <string>
#include <vector>

namespace aniframe {

/// Uniform tensor grid: point m sits at origin + m .* spacing, row-major with
/// the last axis varying fastest.
struct GridSpec {
  Vec origin;
  Vec spacing;
  std::vector<long> extents;

  int dim() const { return static_cast<int>(extents.size()); }
  long size() const;
  double cell_volume() const;
  Vec point(long linear) const;
  std::vector<long> unravel(long linear) const;
  long ravel(const std::vector<long>& idx) const;
  void check() const;
};

/// n-cube [lo, hi)^n with `per_axis` samples per axis (right endpoint excluded).
GridSpec cube_grid(int n, double lo, double hi, long per_axis);
/// Grid of the given spacing covering [lo, hi]^n, endpoints included.
GridSpec spaced_grid(int n, double lo, double hi, double spacing);

struct GridFunction {
  GridSpec spec;
  std::vector<cplx> values;

  GridFunction() = default;
  explicit GridFunction(GridSpec s);
  const cplx& operator[](long i) const { return values[i]; }
  cplx& operator[](long i) { return values[i]; }
};

/// Continuous-transform approximation f^(xi) = int f(x) e^{-i<x,xi>} dx on the
/// centred DFT frequency grid (spacing 2 pi / (N h) per axis).
GridFunction fft_transform(const GridFunction& g);

/// AFGRID v1: one JSON header line, then little-endian (re, im) doubles.
/// Extra key/values in `meta` are added to the header.
void write_afgrid(const std::string& path, const GridFunction& g, const std::string& meta_json = "{}");
GridFunction read_afgrid(const std::string& path);
void write_grid_csv(const std::string& path, const GridFunction& g);

}  // namespace aniframe
