#pragma once

#include <limits>
#include <string>

#include "pvsearch/geom.hpp"
#include "pvsearch/polytope.hpp"

namespace pvs {

/// Feedback on a guess x for u^T theta. below: x <= u^T theta (ties land here).
enum class Side { below, above };

std::string to_string(Side s);

/// Half-space of theta values consistent with the feedback.
inline CutSense kept_sense(Side s) { return s == Side::below ? CutSense::ge : CutSense::le; }

struct RoundDiagnostics {
  int n_small = 0;  // |S_t|
  bool n_t_flag = false;
  double min_width = std::numeric_limits<double>::quiet_NaN();
  double phi = std::numeric_limits<double>::quiet_NaN();
};

/// Every learner sees directions and sides only; theta never reaches it.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  /// Guess for u^T theta; observe() must follow before the next predict().
  virtual double predict(const Vec& u) = 0;
  virtual void observe(Side side) = 0;
  /// No future guess can be off by more than epsilon.
  virtual bool converged() const = 0;
  /// Diagnostics of the most recent round.
  virtual RoundDiagnostics diagnostics() const = 0;
  /// The polytope knowledge set, for learners that keep one.
  virtual const Polytope* knowledge_set() const { return nullptr; }
  /// Membership of a point in the learner's current knowledge region.
  virtual bool knows_consistent(const Vec& theta, double tol) const = 0;
};

}  // namespace pvs
