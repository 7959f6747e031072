#include "pvsearch/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pvs {

namespace {

AffineMap compose(const AffineMap& outer, const AffineMap& inner) {
  return AffineMap(outer.matrix() * inner.matrix(), outer.matrix() * inner.offset() + outer.offset());
}

double eigen_ratio(const Mat& cov) {
  const EigenDecomposition e = symmetric_eigen(0.5 * (cov + cov.transpose()));
  const double lo = e.values(0);
  const double hi = e.values(e.values.size() - 1);
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

SamplerConfig SamplerConfig::defaults(int dim) {
  if (dim < 1) throw InputError("sampler dimension must be positive");
  SamplerConfig c;
  c.burn_in = 50 * dim * dim;
  c.thinning = dim;
  c.n_samples = std::max(1000, 100 * dim);
  return c;
}

void SamplerConfig::validate() const {
  if (burn_in < 0) throw InputError("burn_in must be >= 0");
  if (thinning < 1) throw InputError("thinning must be >= 1");
  if (n_samples < 1) throw InputError("n_samples must be >= 1");
}

PolytopeWalker::PolytopeWalker(const Polytope& P, Vec start) : P_(&P), x_(std::move(start)) {
  if (x_.size() != P.dim()) throw InputError("walker start has wrong dimension");
  slack_ = P.slack(x_);
  if (slack_.minCoeff() < -1e-9) throw InputError("walker start lies outside the polytope");
}

Chord PolytopeWalker::chord(const Vec& dir) { return chord_from_slack(slack_, P_->A() * dir); }

void PolytopeWalker::move(const Vec& dir, double t) {
  x_ += t * dir;
  slack_ = P_->slack(x_);
}

ProjectionWalker::ProjectionWalker(const Polytope& K, const OrthoBasis& S, const OrthoBasis& L, Vec start_coords)
    : K_(&K), p_(std::move(start_coords)) {
  if (S.dim() != K.dim() || L.dim() != K.dim()) throw InputError("basis dimension does not match the body");
  if (S.size() + L.size() != K.dim()) throw InputError("S and L must together span the space");
  if (L.empty()) throw InputError("projection walker needs a nonempty L");
  if (p_.size() != L.size()) throw InputError("start coordinates have wrong dimension");
  AL_ = K.A() * L.matrix();
  if (!S.empty()) AS_ = K.A() * S.matrix();
  slack_ = K.b() - AL_ * p_;
  if (!contains(p_, 1e-9)) throw InputError("walker start lies outside the projection");
}

bool ProjectionWalker::contains(const Vec& coords, double tol) const {
  const Vec slack = K_->b() - AL_ * coords;
  if (AS_.size() == 0) return slack.minCoeff() >= -tol;
  return lp_feasible(AS_, slack.array() + tol);
}

Chord ProjectionWalker::chord(const Vec& dir) {
  const Vec a = AL_ * dir;
  if (AS_.size() == 0) return chord_from_slack(slack_, a);
  Mat M(AS_.rows(), AS_.cols() + 1);
  M.col(0) = a;
  M.rightCols(AS_.cols()) = AS_;
  Vec c = Vec::Zero(M.cols());
  c(0) = 1.0;
  const LpResult up = solve_lp(M, slack_, c, Sense::maximize);
  const LpResult down = solve_lp(M, slack_, c, Sense::minimize);
  if (up.status == LpStatus::unbounded || down.status == LpStatus::unbounded)
    throw DegenerateError("projection chord is unbounded");
  // Infeasible means the current point fell just outside; treat as a stuck step.
  if (up.status != LpStatus::optimal || down.status != LpStatus::optimal) return Chord{0.0, 0.0};
  return Chord{std::min(down.x(0), 0.0), std::max(up.x(0), 0.0)};
}

void ProjectionWalker::move(const Vec& dir, double t) {
  p_ += t * dir;
  slack_ = K_->b() - AL_ * p_;
}

void hit_and_run_move(ChordWalker& walker, const Vec& dir, double fraction, WalkStats& stats) {
  ++stats.steps;
  const Chord ch = walker.chord(dir);
  if (!(ch.length() > 0.0)) {
    ++stats.degenerate;
    return;
  }
  walker.move(dir, ch.lo + fraction * ch.length());
}

void hit_and_run_step(ChordWalker& walker, const AffineMap& T, Rng& rng, WalkStats& stats) {
  Vec dir = T.pull_back_direction(rng.gaussian(walker.dim()));
  const double n = dir.norm();
  if (!(n > 0.0)) {
    ++stats.steps;
    ++stats.degenerate;
    return;
  }
  dir /= n;
  hit_and_run_move(walker, dir, rng.uniform(), stats);
}

Vec hit_and_run_step(const Polytope& P, const Vec& x, const AffineMap& T, Rng& rng) {
  PolytopeWalker w(P, x);
  WalkStats stats;
  hit_and_run_step(w, T, rng, stats);
  return w.point();
}

std::vector<Vec> sample_walk(ChordWalker& walker, const SamplerConfig& cfg, const AffineMap& T, Rng& rng,
                             WalkStats* stats) {
  cfg.validate();
  if (T.dim() != walker.dim()) throw InputError("transform dimension does not match walker");
  WalkStats local;
  WalkStats& st = stats ? *stats : local;
  for (int i = 0; i < cfg.burn_in; ++i) hit_and_run_step(walker, T, rng, st);
  std::vector<Vec> out;
  out.reserve(static_cast<size_t>(cfg.n_samples));
  for (int s = 0; s < cfg.n_samples; ++s) {
    for (int i = 0; i < cfg.thinning; ++i) hit_and_run_step(walker, T, rng, st);
    out.push_back(walker.point());
  }
  return out;
}

Rounding rounding_transform(std::span<const Vec> samples) {
  if (samples.empty()) throw InputError("rounding needs samples");
  const int d = static_cast<int>(samples[0].size());
  if (static_cast<int>(samples.size()) < 10 * d) throw InputError("rounding needs at least 10 d samples");
  const Vec mean = sample_mean(samples);
  const Mat cov = sample_covariance(samples, mean);
  const EigenDecomposition e = symmetric_eigen(0.5 * (cov + cov.transpose()));
  if (!(e.values(0) >= 1e-14)) return Rounding{AffineMap::identity(d), true};
  const Vec inv_sqrt = e.values.array().rsqrt();
  const Mat W = e.vectors * inv_sqrt.asDiagonal() * e.vectors.transpose();
  try {
    return Rounding{AffineMap(W, -W * mean), false};
  } catch (const InputError&) {
    return Rounding{AffineMap::identity(d), true};
  }
}

Rounding adaptive_rounding(ChordWalker& walker, const SamplerConfig& cfg, Rng& rng, int max_rounds,
                           double target_ratio) {
  return adaptive_rounding(walker, cfg, rng, AffineMap::identity(walker.dim()), max_rounds, target_ratio);
}

Rounding adaptive_rounding(ChordWalker& walker, const SamplerConfig& cfg, Rng& rng, const AffineMap& start,
                           int max_rounds, double target_ratio) {
  const int d = walker.dim();
  SamplerConfig pilot = cfg;
  pilot.n_samples = std::max(cfg.n_samples, 10 * d);
  AffineMap T = start;
  for (int round = 0; round < max_rounds; ++round) {
    std::vector<Vec> ys = sample_walk(walker, pilot, T, rng);
    for (Vec& y : ys) y = T.apply(y);
    const Vec mean = sample_mean(ys);
    if (eigen_ratio(sample_covariance(ys, mean)) <= target_ratio) return Rounding{T, false};
    const Rounding step = rounding_transform(ys);
    if (step.rank_deficient) return Rounding{T, true};
    try {
      T = compose(step.map, T);
    } catch (const InputError&) {
      return Rounding{T, true};
    }
  }
  return Rounding{T, false};
}

namespace {

Vec default_start(const Polytope& P, const std::optional<Vec>& warm) {
  if (warm) {
    if (!P.contains(*warm)) throw InputError("warm start lies outside the polytope");
    return *warm;
  }
  const Ball ball = chebyshev_center(P);
  if (!(ball.radius > 0.0)) throw DegenerateError("polytope has empty interior");
  return ball.center;
}

// Axis scaling from the bounding box; a cheap first guess before pilots.
AffineMap box_scaling(const Polytope& P) {
  const auto [lo, hi] = bounding_box(P);
  const Vec w = (hi - lo).cwiseMax(1e-300);
  const Vec s = w.cwiseInverse();
  try {
    return AffineMap(s.asDiagonal(), -s.cwiseProduct(0.5 * (lo + hi)));
  } catch (const InputError&) {
    return AffineMap::identity(P.dim());
  }
}

}  // namespace

std::vector<Vec> sample_uniform(const Polytope& P, const SamplerConfig& cfg, const std::optional<Vec>& warm,
                                Rng& rng) {
  cfg.validate();
  PolytopeWalker walker(P, default_start(P, warm));
  AffineMap T = AffineMap::identity(P.dim());
  if (cfg.rounding) T = adaptive_rounding(walker, cfg, rng, box_scaling(P)).map;
  return sample_walk(walker, cfg, T, rng);
}

// Integrated autocorrelation time of one coordinate of a chain, by Geyer's
// initial positive sequence (sum of adjacent-lag pairs while positive).
namespace {

double autocorrelation_time(std::span<const Vec> xs, Eigen::Index coord, double mean, double var) {
  const size_t n = xs.size();
  if (!(var > 0.0) || n < 20) return 1.0;
  auto rho = [&](size_t lag) {
    double s = 0.0;
    for (size_t i = 0; i + lag < n; ++i) s += (xs[i](coord) - mean) * (xs[i + lag](coord) - mean);
    return s / (static_cast<double>(n - lag) * var);
  };
  double tau = -1.0;
  for (size_t lag = 0; lag + 1 < n / 10; lag += 2) {
    const double pair = rho(lag) + rho(lag + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return std::max(1.0, tau);
}

}  // namespace

CentroidEstimate centroid_from_samples(std::span<const Vec> samples) {
  if (samples.empty()) throw InputError("centroid needs samples");
  CentroidEstimate est;
  est.z = sample_mean(samples);
  est.n = static_cast<int>(samples.size());
  if (est.n < 2) {
    est.stderr_bound = std::numeric_limits<double>::infinity();
    return est;
  }
  Vec var = Vec::Zero(est.z.size());
  for (const Vec& s : samples) var += (s - est.z).cwiseAbs2();
  var /= static_cast<double>(est.n - 1);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < var.size(); ++i)
    worst = std::max(worst, var(i) * autocorrelation_time(samples, i, est.z(i), var(i)));
  est.stderr_bound = std::sqrt(worst / est.n);
  return est;
}

CentroidEstimate estimate_centroid(const Polytope& P, const SamplerConfig& cfg, Rng& rng,
                                   const std::optional<Vec>& warm) {
  const std::vector<Vec> samples = sample_uniform(P, cfg, warm, rng);
  CentroidEstimate est = centroid_from_samples(samples);
  if (P.slack(est.z).minCoeff() < 0.0) {
    const Vec c = chebyshev_center(P).center;
    const Vec dir = est.z - c;
    const Vec a = P.A() * dir;
    const Vec sc = P.slack(c);
    double lam = 1.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
      if (a(i) > 0.0) lam = std::min(lam, sc(i) / a(i));
    est.z = c + std::max(0.0, lam * (1.0 - 1e-9)) * dir;
  }
  return est;
}

}  // namespace pvs
