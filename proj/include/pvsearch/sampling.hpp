#pragma once

#include <optional>
#include <vector>

#include "pvsearch/geom.hpp"
#include "pvsearch/polytope.hpp"

namespace pvs {

struct SamplerConfig {
  int burn_in = 0;
  int thinning = 1;
  int n_samples = 1000;
  bool rounding = false;

  /// burn_in = 50 d^2, thinning = d, n_samples = max(1000, 100 d).
  static SamplerConfig defaults(int dim);
  void validate() const;
};

struct CentroidEstimate {
  Vec z;
  int n = 0;
  double stderr_bound = 0.0;  // max over coordinates of sample stdev / sqrt(n)
};

struct WalkStats {
  long steps = 0;
  long degenerate = 0;
};

/// A point moving inside a convex body, able to report the chord through
/// itself along a direction. Coordinates are the walker's own (ambient for
/// PolytopeWalker, L-coordinates for ProjectionWalker).
class ChordWalker {
 public:
  virtual ~ChordWalker() = default;
  virtual int dim() const = 0;
  virtual const Vec& point() const = 0;
  virtual Chord chord(const Vec& dir) = 0;
  virtual void move(const Vec& dir, double t) = 0;
};

/// Walk inside an H-polytope; chords by ratio tests on a maintained slack.
class PolytopeWalker final : public ChordWalker {
 public:
  PolytopeWalker(const Polytope& P, Vec start);
  int dim() const override { return P_->dim(); }
  const Vec& point() const override { return x_; }
  Chord chord(const Vec& dir) override;
  void move(const Vec& dir, double t) override;

 private:
  const Polytope* P_;
  Vec x_;
  Vec slack_;
};

/// Walk inside the projection of K onto span(L), in L-coordinates.
/// A chord needs two small LPs over (t, y) with y the coefficients along S:
///   A (L p + t L dir + S y) <= b.
class ProjectionWalker final : public ChordWalker {
 public:
  ProjectionWalker(const Polytope& K, const OrthoBasis& S, const OrthoBasis& L, Vec start_coords);
  int dim() const override { return static_cast<int>(p_.size()); }
  const Vec& point() const override { return p_; }
  Chord chord(const Vec& dir) override;
  void move(const Vec& dir, double t) override;

  /// Feasibility of a point (L-coordinates) in the projection.
  bool contains(const Vec& coords, double tol = 1e-9) const;

 private:
  const Polytope* K_;
  Mat AL_;
  Mat AS_;
  Vec p_;
  Vec slack_;  // b - AL p
};

/// One hit-and-run step: a direction isotropic in the space of `T` is pulled
/// back and normalized; the walker moves to a uniform point of the chord.
/// Zero-length chords leave the point unchanged and count as degenerate.
void hit_and_run_step(ChordWalker& walker, const AffineMap& T, Rng& rng, WalkStats& stats);

/// Deterministic core of a step: move to lo + fraction * (hi - lo).
void hit_and_run_move(ChordWalker& walker, const Vec& dir, double fraction, WalkStats& stats);

/// Convenience form on a polytope: returns the next point.
Vec hit_and_run_step(const Polytope& P, const Vec& x, const AffineMap& T, Rng& rng);

/// burn_in steps, then n_samples points each `thinning` steps apart.
std::vector<Vec> sample_walk(ChordWalker& walker, const SamplerConfig& cfg, const AffineMap& T, Rng& rng,
                             WalkStats* stats = nullptr);

/// Uniform samples of P. Starts at `warm` (or the Chebyshev center). With
/// cfg.rounding, pilot runs estimate an isotropic transform first.
std::vector<Vec> sample_uniform(const Polytope& P, const SamplerConfig& cfg, const std::optional<Vec>& warm,
                                Rng& rng);

/// Mean of a chain. stderr_bound inflates the per-coordinate stdev/sqrt(n)
/// by the estimated autocorrelation time, so correlated chains are not
/// reported as more precise than they are.
CentroidEstimate centroid_from_samples(std::span<const Vec> samples);

/// Sample-mean centroid. A mean that drifts outside P is pulled back along
/// the segment to the Chebyshev center.
CentroidEstimate estimate_centroid(const Polytope& P, const SamplerConfig& cfg, Rng& rng,
                                   const std::optional<Vec>& warm = std::nullopt);

struct Rounding {
  AffineMap map;
  bool rank_deficient = false;
};

/// Affine map sending the sample mean to 0 and the sample covariance to I.
/// Requires >= 10 d samples; falls back to identity when the covariance has
/// an eigenvalue below 1e-14.
Rounding rounding_transform(std::span<const Vec> samples);

/// Pilot-and-refine rounding: repeats sampling under the current transform
/// until fresh samples look isotropic (eigenvalue ratio <= target_ratio).
Rounding adaptive_rounding(ChordWalker& walker, const SamplerConfig& cfg, Rng& rng, int max_rounds = 12,
                           double target_ratio = 2.0);
/// Same, starting from a given transform instead of the identity.
Rounding adaptive_rounding(ChordWalker& walker, const SamplerConfig& cfg, Rng& rng, const AffineMap& start,
                           int max_rounds = 12, double target_ratio = 2.0);

}  // namespace pvs
