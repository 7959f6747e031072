#pragma once

// Random and named test bodies.

#include <cmath>
#include <initializer_list>

#include "pvsearch/polytope.hpp"

namespace pvs::bodies {

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Δ(s) = {x >= 0, sum x_i / s_i <= 1}; centroid s / (k+1).
inline Polytope simplex(const Vec& s) {
  const auto d = s.size();
  Mat A = Mat::Zero(d + 1, d);
  Vec b = Vec::Zero(d + 1);
  for (Eigen::Index i = 0; i < d; ++i) {
    A(i, i) = -1.0;
    A(d, i) = 1.0 / s(i);
  }
  b(d) = 1.0;
  return Polytope(A, b);
}

inline Polytope cube(int d, double r = 1.0) { return Polytope::box(Vec::Constant(d, -r), Vec::Constant(d, r)); }

// Random tangent half-planes around a point near the origin, clipped by a box.
inline Polytope random_polygon(Rng& rng, int m) {
  Mat A(m + 4, 2);
  Vec b(m + 4);
  const Vec center = vec({rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)});
  for (int i = 0; i < m; ++i) {
    const Vec n = rng.unit_vector(2);
    A.row(i) = n.transpose();
    b(i) = n.dot(center) + rng.uniform(0.1, 1.0);
  }
  A.row(m) = vec({1, 0}).transpose();
  A.row(m + 1) = vec({-1, 0}).transpose();
  A.row(m + 2) = vec({0, 1}).transpose();
  A.row(m + 3) = vec({0, -1}).transpose();
  b.tail(4).setConstant(1.5);
  return Polytope(A, b);
}

// Random body in R^d: box clipped by random tangent half-spaces.
inline Polytope random_body(Rng& rng, int d, int m) {
  Mat A(m + 2 * d, d);
  Vec b(m + 2 * d);
  for (int i = 0; i < m; ++i) {
    const Vec n = rng.unit_vector(d);
    A.row(i) = n.transpose();
    b(i) = rng.uniform(0.2, 1.0);
  }
  for (int i = 0; i < d; ++i) {
    A.row(m + 2 * i) = Vec::Unit(d, i).transpose();
    A.row(m + 2 * i + 1) = -Vec::Unit(d, i).transpose();
    b(m + 2 * i) = rng.uniform(0.5, 1.5);
    b(m + 2 * i + 1) = rng.uniform(0.5, 1.5);
  }
  return Polytope(A, b);
}

// Image of P under the invertible linear map M: {y : A M^-1 y <= b}.
inline Polytope linear_image(const Polytope& P, const Mat& M) {
  return Polytope(P.A() * M.inverse(), P.b());
}

// Scales P by factor f along unit v (and leaves the orthogonal part).
inline Polytope squash(const Polytope& P, const Vec& v, double f) {
  const int d = P.dim();
  const Mat M = Mat::Identity(d, d) - (1.0 - f) * v * v.transpose();
  return linear_image(P, M);
}

}  // namespace pvs::bodies
