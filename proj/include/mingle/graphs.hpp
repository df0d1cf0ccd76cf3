#pragma once

#include <span>

#include "mingle/types.hpp"

namespace mingle::graphs {

/// Time-driven mobility graph: A_ij = 1 iff |i - j| <= epsilon.
Matrix build_tmg(int n, int epsilon);

/// Direction-driven mobility graph: nodes i, j are linked iff they share a
/// course of length d and |i - j| <= floor(d / 2). Courses must partition
/// {0..n-1} in order.
Matrix build_dmg(std::span<const Course> courses, int n);

/// D^{-1/2} M D^{-1/2} with D the diagonal of row sums.
Matrix normalize_adjacency(const Matrix& m);

struct MobilityGraphs {
  Matrix a;       // TMG
  Matrix b;       // DMG
  Matrix a_norm;
  Matrix b_norm;
  int epsilon = 2;
};

MobilityGraphs build_graphs(int n, int epsilon, std::span<const Course> courses);

}  // namespace mingle::graphs
