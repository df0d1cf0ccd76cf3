#include "mingle/graphs.hpp"

#include <cstdlib>

#include "mingle/errors.hpp"

namespace mingle::graphs {

Matrix build_tmg(int n, int epsilon) {
  require(n >= 1, "build_tmg: need at least one node");
  require(epsilon >= 0, "build_tmg: epsilon must be non-negative");
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(0, i - epsilon); j <= std::min(n - 1, i + epsilon); ++j) a(i, j) = 1.0;
  }
  return a;
}

Matrix build_dmg(std::span<const Course> courses, int n) {
  require(n >= 1, "build_dmg: need at least one node");
  int expected = 0;
  for (const auto& c : courses) {
    require(c.first == expected && c.last >= c.first,
            "build_dmg: courses must be contiguous, ordered and non-overlapping");
    expected = c.last + 1;
  }
  require(expected == n, "build_dmg: courses must cover every node");

  Matrix b = Matrix::Zero(n, n);
  for (const auto& c : courses) {
    const int reach = c.length() / 2;
    for (int i = c.first; i <= c.last; ++i) {
      for (int j = std::max(c.first, i - reach); j <= std::min(c.last, i + reach); ++j) {
        b(i, j) = 1.0;
      }
    }
  }
  return b;
}

Matrix normalize_adjacency(const Matrix& m) {
  require(m.rows() == m.cols(), "normalize_adjacency: matrix must be square");
  const Vector degree = m.rowwise().sum();
  require((degree.array() > 0.0).all(), "normalize_adjacency: zero-degree row");
  const Vector scale = degree.array().rsqrt().matrix();
  return scale.asDiagonal() * m * scale.asDiagonal();
}

MobilityGraphs build_graphs(int n, int epsilon, std::span<const Course> courses) {
  MobilityGraphs g;
  g.epsilon = epsilon;
  g.a = build_tmg(n, epsilon);
  g.b = build_dmg(courses, n);
  g.a_norm = normalize_adjacency(g.a);
  g.b_norm = normalize_adjacency(g.b);
  return g;
}

}  // namespace mingle::graphs
