#pragma once

#include "pvsearch/geom.hpp"

namespace pvs {

enum class LpStatus { optimal, infeasible, unbounded };
enum class Sense { maximize, minimize };

const char* to_string(LpStatus s);

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vec x;
  double value = 0.0;
  int pivots = 0;
};

/// Solves  max/min c^T x  subject to  A x <= b  with x free.
///
/// Works on the dual  min b^T l,  A^T l = c,  l >= 0  with a dense two-phase
/// tableau of n = dim(x) rows and Bland's anti-cycling rule, so the cost per
/// pivot is O(n * m) and the many-constraints / few-variables shape of
/// polytope queries stays cheap. The primal point is recovered from the
/// simplex multipliers and polished on the optimal active set.
LpResult solve_lp(const Mat& A, const Vec& b, const Vec& c, Sense sense = Sense::maximize);

/// True iff {x : A x <= b} is nonempty.
bool lp_feasible(const Mat& A, const Vec& b);

}  // namespace pvs
