#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pvsearch/geom.hpp"
#include "pvsearch/lp.hpp"

namespace pvs {

/// Bounded convex body {x : A x <= b} with unit-norm constraint rows.
/// Values are immutable; cuts return new polytopes.
class Polytope {
 public:
  Polytope() = default;
  /// Rows are normalized on construction. Zero rows are rejected.
  Polytope(Mat A, Vec b);

  static Polytope box(const Vec& lo, const Vec& hi);

  int dim() const { return static_cast<int>(A_.cols()); }
  int rows() const { return static_cast<int>(A_.rows()); }
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }

  Vec slack(const Vec& x) const { return b_ - A_ * x; }
  bool contains(const Vec& x, double tol = 1e-9) const;

  /// Copy with the given constraint rows removed (indices ascending).
  Polytope without_rows(const std::vector<int>& drop) const;

  nlohmann::json to_json() const;
  static Polytope from_json(const nlohmann::json& j);

 private:
  Mat A_;
  Vec b_;
};

enum class BodyKind { inscribed_cube, unit_box_scaled, custom };

BodyKind parse_body_kind(const std::string& name);

/// inscribed_cube: [-1/sqrt(d), 1/sqrt(d)]^d; unit_box_scaled: [0, 1/sqrt(d)]^d;
/// custom: the given (A, b), validated to be bounded with nonempty interior.
Polytope initial_body(BodyKind kind, int d, const Mat& A = {}, const Vec& b = {});

LpResult lp_solve(const Vec& c, const Polytope& P, Sense sense = Sense::maximize);

/// max_{x in P} u^T x
double support(const Polytope& P, const Vec& u);

/// max_{x,y in P} u^T (x - y)
double width(const Polytope& P, const Vec& u);

/// Supports along +u and -u, returned as the interval [min u^T x, max u^T x].
std::pair<double, double> support_interval(const Polytope& P, const Vec& u);

enum class CutSense { le, ge };

/// P ∩ {x : u^T x <= c} (le) or P ∩ {x : u^T x >= c} (ge).
/// Throws DegenerateError when the result has Chebyshev radius below 1e-12.
Polytope add_halfspace(const Polytope& P, const Vec& u, double c, CutSense sense);

struct Ball {
  Vec center;
  double radius = 0.0;  // <= 0 signals an empty (or flat) body
};

/// Center and radius of a largest inscribed ball (one LP).
Ball chebyshev_center(const Polytope& P);

struct Chord {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

/// Range of t with x + t * dir in P, by ratio tests over the rows.
Chord chord(const Polytope& P, const Vec& x, const Vec& dir);

/// Same as chord() but reuses precomputed slack b - A x and A dir.
Chord chord_from_slack(const Vec& slack, const Vec& a_dir);

/// Axis-aligned bounding box via 2d support LPs.
std::pair<Vec, Vec> bounding_box(const Polytope& P);

/// Drops constraints whose LP-certified slack over the rest of the body
/// exceeds tol. The set is unchanged.
Polytope prune_redundant(const Polytope& P, double tol = 1e-7);

struct Polygon2D {
  std::vector<Vec> vertices;  // counter-clockwise
  double area = 0.0;
  Vec centroid;
};

/// Exact vertex enumeration of a bounded 2D polytope. Throws DegenerateError
/// when the area is below 1e-14.
Polygon2D exact_polygon(const Polytope& P);

struct VolumeEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  bool zero_hits = false;
};

/// Rejection-sampling volume of P inside the box [lo, hi].
VolumeEstimate mc_volume(const Polytope& P, const Vec& lo, const Vec& hi, int n, Rng& rng);

/// Same estimator for an arbitrary membership predicate.
VolumeEstimate mc_volume(const std::function<bool(const Vec&)>& inside, const Vec& lo, const Vec& hi, int n,
                         Rng& rng);

}  // namespace pvs
