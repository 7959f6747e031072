#pragma once

#include <functional>

#include "pvsearch/projected_volume.hpp"

namespace pvs {

/// Centroid cuts on the full knowledge set, no small directions.
class CentroidLearner final : public CylinderLearner {
 public:
  CentroidLearner(Polytope K0, PvOptions opt, std::uint64_t seed);
  std::string name() const override { return "centroid"; }
};

struct CentroidStep {
  double x = 0.0;
  Polytope K;
  bool n_t_flag = false;
};

/// One round of the centroid learner: guess u^T z with z the sampled
/// centroid of K, ask `feedback` for the side, cut through z.
CentroidStep centroid_learner_step(const Polytope& K, const Vec& u, double epsilon,
                                   const std::function<Side(double)>& feedback, const SamplerConfig& cfg,
                                   Rng& rng);

/// {x : (x - c)^T M^-1 (x - c) <= 1}
struct Ellipsoid {
  Vec center;
  Mat shape;

  static Ellipsoid ball(const Vec& center, double radius);
  int dim() const { return static_cast<int>(center.size()); }
  /// 2 sqrt(u^T M u)
  double width(const Vec& u) const;
  /// (x - c)^T M^-1 (x - c)
  double quadratic_form(const Vec& x) const;
  bool contains(const Vec& x, double slack = 1e-7) const { return quadratic_form(x) <= 1.0 + slack; }
  double volume_factor_to(const Ellipsoid& next) const;  // sqrt(det M' / det M)
};

/// Closed-form per-step volume ratio (d/(d+1)) (d^2/(d^2-1))^((d-1)/2).
double ellipsoid_volume_ratio(int d);

/// Minimum-volume ellipsoid around the half of E kept by a central cut
/// along u. d = 1 halves the interval.
Ellipsoid ellipsoid_update(const Ellipsoid& E, const Vec& u, CutSense keep);

struct EllipsoidStep {
  double x = 0.0;
  Ellipsoid E;
  bool cut = false;
};

/// Guess u^T c; cut only when the width along u exceeds epsilon.
EllipsoidStep ellipsoid_learner_step(const Ellipsoid& E, const Vec& u, double epsilon,
                                     const std::function<Side(double)>& feedback);

class EllipsoidLearner final : public Learner {
 public:
  /// Starts from the ball around the bounding box of K0.
  EllipsoidLearner(const Polytope& K0, double epsilon);
  explicit EllipsoidLearner(Ellipsoid E0, double epsilon);

  std::string name() const override { return "ellipsoid"; }
  int dim() const override { return E_.dim(); }
  double predict(const Vec& u) override;
  void observe(Side side) override;
  bool converged() const override;
  RoundDiagnostics diagnostics() const override { return diag_; }
  bool knows_consistent(const Vec& theta, double tol) const override { return E_.contains(theta, tol); }

  const Ellipsoid& ellipsoid() const { return E_; }

 private:
  Ellipsoid E_;
  double epsilon_;
  Vec u_;
  bool pending_ = false;
  RoundDiagnostics diag_;
};

}  // namespace pvs
