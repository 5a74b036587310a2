#pragma once

#include <random>

#include "thermocap/grid.hpp"

namespace testing_util {

using namespace thermocap;

struct Random {
  std::mt19937_64 gen;
  explicit Random(std::uint64_t seed) : gen(seed) {}
  double operator()(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen); }

  CellField cells(const Grid& g, double lo = -1.0, double hi = 1.0, Bc bc = Bc::none) {
    CellField f(g, 0.0, bc);
    for (double& x : f.v) x = (*this)(lo, hi);
    return f;
  }
  FaceField faces(const Grid& g, double lo = -1.0, double hi = 1.0) {
    FaceField f(g);
    for (double& x : f.x) x = (*this)(lo, hi);
    for (double& x : f.y) x = (*this)(lo, hi);
    return f;
  }
  BoundaryTrace trace(const Grid& g, double lo = -1.0, double hi = 1.0) {
    BoundaryTrace t = BoundaryTrace::constant(g, 0.0);
    for (auto* v : {&t.left, &t.right, &t.bottom, &t.top})
      for (double& x : *v) x = (*this)(lo, hi);
    return t;
  }
  /// Discretely divergence-free face field with zero wall normals.
  FaceField solenoidal(const Grid& g, double amp = 1.0) {
    std::vector<double> psi(n_stream_unknowns(g));
    for (double& x : psi) x = amp * (*this)();
    return curl(psi, g);
  }
};

inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace testing_util
