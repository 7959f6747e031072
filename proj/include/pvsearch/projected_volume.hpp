#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pvsearch/learner.hpp"
#include "pvsearch/sampling.hpp"

namespace pvs {

/// K_t with the small directions S_t (each certified width <= delta when
/// added) and the complement L_t.
struct KnowledgeState {
  Polytope K;
  OrthoBasis S;
  OrthoBasis L;
  double delta = 0.0;
  std::vector<std::pair<double, double>> widths_S;  // [min, max] of s^T theta over K

  static KnowledgeState initial(Polytope K, double delta);

  int dim() const { return K.dim(); }

  /// Orthogonalizes v against S and appends it if LP width(K, v) <= delta.
  /// Returns the certified width (or the rejected one) through `width_out`.
  bool try_add_small_direction(const Vec& v, double* width_out = nullptr);

  /// Recomputes widths_S by LP, intersected with the stored intervals.
  void refresh_widths();

  /// Throws InputError when S, L or widths_S break their invariants.
  void validate(double tol = 1e-8) const;
};

/// {t : p + t u_L in Pi_L(K)}, p and u_L given in ambient coordinates inside L.
Chord subspace_chord(const Polytope& K, const OrthoBasis& S, const Vec& p, const Vec& u_L);

/// Is the L-coordinate point p in the projection of K onto span(L)?
bool in_projection(const KnowledgeState& st, const Vec& p, double tol = 1e-9);

/// Width of Cyl(K, S) along u: width of K along Pi_L u plus the S boxes.
double cylinder_width(const KnowledgeState& st, const Vec& u);

/// Uniform samples of Pi_L(K) in L-coordinates, kept across cuts. A cut
/// only shrinks the projection, so the survivors stay uniform on it.
class SubspacePool {
 public:
  void reset() { points_.clear(); }
  bool empty() const { return points_.empty(); }
  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<Vec>& points() const { return points_; }

  const std::optional<AffineMap>& transform() const { return transform_; }
  void set_transform(std::optional<AffineMap> T) { transform_ = std::move(T); }

  /// Drops points outside the projection of st.K.
  void filter(const KnowledgeState& st);

  /// Tops the pool up to n points. An empty pool starts a chain at `warm`
  /// with the configured burn-in; otherwise the chain continues from a
  /// random survivor without burn-in.
  void fill(const KnowledgeState& st, const SamplerConfig& cfg, int n, const Vec& warm, Rng& rng,
            WalkStats* stats = nullptr);

 private:
  std::vector<Vec> points_;
  std::optional<AffineMap> transform_;
};

/// Axis scaling of Pi_L(K) in L-coordinates from its supports along L.
AffineMap subspace_box_scaling(const KnowledgeState& st);

/// Start point for a fresh chain: `previous` (ambient) if its projection is
/// strictly inside, else the projected Chebyshev center. L-coordinates.
Vec subspace_warm_start(const KnowledgeState& st, const std::optional<Vec>& previous);

/// Ambient point from L-coordinates of the projected centroid plus the
/// midpoints of the S intervals.
Vec cylinder_point(const KnowledgeState& st, const Vec& center_L);

/// Sampled centroid of Cyl(K, S).
Vec cylindrified_centroid(const KnowledgeState& st, const SamplerConfig& cfg, Rng& rng);

struct Prediction {
  double x = 0.0;
  Vec z;
  bool n_t_flag = false;
};

Prediction predict(const KnowledgeState& st, const Vec& u, double epsilon, const SamplerConfig& cfg, Rng& rng);

/// Result of one thin-direction search.
struct ThinSearch {
  int added = 0;
  double min_rejected_width = std::numeric_limits<double>::quiet_NaN();
};

/// Smallest-eigenvalue candidates from the sample covariance of Pi_L(K),
/// each LP-certified before it joins S. Uses and refreshes `pool`.
ThinSearch find_thin_directions(KnowledgeState& st, SubspacePool& pool, const SamplerConfig& cfg, Rng& rng,
                                const std::optional<Vec>& previous = std::nullopt, WalkStats* stats = nullptr);

KnowledgeState find_thin_directions(KnowledgeState st, const SamplerConfig& cfg, Rng& rng);

/// Cut K by the feedback and search for new thin directions.
KnowledgeState update(KnowledgeState st, const Vec& u, double x, Side side, const SamplerConfig& cfg, Rng& rng);

/// True iff L is zero-dimensional.
bool stopping_consistency(const KnowledgeState& st);

struct PvOptions {
  double epsilon = 0.01;
  double delta = 0.0;  // <= 0: epsilon / (2 d)
  double rho = 0.0;    // <= 0: epsilon / (8 (d+1)^2)
  bool enforce_rho = false;
  std::optional<SamplerConfig> sampler;  // default: SamplerConfig::defaults(dim L)
  bool reuse_samples = true;
  bool find_thin = true;
  int rounding_every = 25;
  int prune_every = 50;
  bool phi_estimate = false;
  int phi_samples = 2000;
};

/// Cutting-plane learner over a polytope knowledge set, predicting with the
/// centroid of Cyl(K, S). With find_thin off, S stays empty and this is the
/// plain centroid learner.
class CylinderLearner : public Learner {
 public:
  CylinderLearner(Polytope K0, PvOptions opt, std::uint64_t seed);

  int dim() const override { return st_.dim(); }
  double predict(const Vec& u) override;
  void observe(Side side) override;
  bool converged() const override;
  RoundDiagnostics diagnostics() const override { return diag_; }
  const Polytope* knowledge_set() const override { return &st_.K; }
  bool knows_consistent(const Vec& theta, double tol) const override { return st_.K.contains(theta, tol); }

  const KnowledgeState& state() const { return st_; }
  const PvOptions& options() const { return opt_; }
  long skipped_cuts() const { return skipped_cuts_; }
  const WalkStats& walk_stats() const { return walk_; }
  /// stderr_bound of the most recent centroid estimate (L-coordinates).
  double last_stderr() const { return last_stderr_; }

 private:
  SamplerConfig sampler_for(int k) const;
  void ensure_centroid();

  KnowledgeState st_;
  PvOptions opt_;
  Rng rng_;
  SubspacePool pool_;
  std::optional<Vec> centroid_;
  std::optional<Vec> last_centroid_;
  Vec u_;
  bool pending_ = false;
  long cuts_ = 0;
  long skipped_cuts_ = 0;
  double last_stderr_ = 0.0;
  WalkStats walk_;
  RoundDiagnostics diag_;
};

class ProjectedVolumeLearner final : public CylinderLearner {
 public:
  ProjectedVolumeLearner(Polytope K0, PvOptions opt, std::uint64_t seed);
  std::string name() const override { return "projected_volume"; }
};

}  // namespace pvs
