#include "pvsearch/projected_volume.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace pvs {

std::string to_string(Side s) { return s == Side::below ? "below" : "above"; }

KnowledgeState KnowledgeState::initial(Polytope K, double delta) {
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  KnowledgeState st;
  const int d = K.dim();
  st.K = std::move(K);
  st.S = OrthoBasis(d);
  st.L = complement_basis(st.S, d);
  st.delta = delta;
  return st;
}

bool KnowledgeState::try_add_small_direction(const Vec& v, double* width_out) {
  OrthoBasis trial = S;
  if (!trial.push_back_orthogonalized(v)) {
    if (width_out) *width_out = std::numeric_limits<double>::quiet_NaN();
    return false;
  }
  const Vec& s = trial[trial.size() - 1];
  const auto iv = support_interval(K, s);
  const double w = std::max(iv.second - iv.first, 0.0);
  if (width_out) *width_out = w;
  if (w > delta) return false;
  S = std::move(trial);
  L = complement_basis(S, dim());
  widths_S.push_back(iv);
  return true;
}

void KnowledgeState::refresh_widths() {
  for (int i = 0; i < S.size(); ++i) {
    const auto iv = support_interval(K, S[i]);
    auto& w = widths_S[static_cast<size_t>(i)];
    w.first = std::max(w.first, iv.first);
    w.second = std::min(w.second, iv.second);
    if (w.second < w.first) w.second = w.first;
  }
}

void KnowledgeState::validate(double tol) const {
  if (S.dim() != dim() || L.dim() != dim()) throw InputError("knowledge state: basis dimension mismatch");
  if (S.size() + L.size() != dim()) throw InputError("knowledge state: S and L do not span the space");
  if (!S.concat(L).is_orthonormal(tol)) throw InputError("knowledge state: S and L are not orthonormal");
  if (static_cast<int>(widths_S.size()) != S.size()) throw InputError("knowledge state: widths_S size mismatch");
  for (const auto& [lo, hi] : widths_S)
    if (hi - lo > delta + 1e-9) throw InputError("knowledge state: a small direction is wider than delta");
}

namespace {

struct ProjectionRows {
  Mat AL;
  Mat AS;
};

ProjectionRows projection_rows(const KnowledgeState& st) {
  ProjectionRows r;
  r.AL = st.K.A() * st.L.matrix();
  if (!st.S.empty()) r.AS = st.K.A() * st.S.matrix();
  return r;
}

bool in_projection(const KnowledgeState& st, const ProjectionRows& rows, const Vec& p, double tol) {
  const Vec slack = st.K.b() - rows.AL * p;
  if (rows.AS.size() == 0) return slack.minCoeff() >= -tol;
  return lp_feasible(rows.AS, slack.array() + tol);
}

Vec midpoints(const KnowledgeState& st) {
  Vec z = Vec::Zero(st.dim());
  for (int i = 0; i < st.S.size(); ++i) {
    const auto& [lo, hi] = st.widths_S[static_cast<size_t>(i)];
    z += 0.5 * (lo + hi) * st.S[i];
  }
  return z;
}

// Sampled eigenvectors are slightly off; a constraint normal (projected to
// L) close to the candidate is often the exact thin direction. Keeps
// whichever of the candidate and its best-aligned normals is narrowest.
Vec refine_candidate(const KnowledgeState& st, const Vec& v) {
  constexpr int kNormals = 3;
  constexpr double kMinAlign = 0.9;
  std::vector<std::pair<double, Vec>> aligned;
  for (int i = 0; i < st.K.rows(); ++i) {
    Vec n = project_point(st.K.A().row(i).transpose(), st.L);
    const double len = n.norm();
    if (len < 1e-12) continue;
    n /= len;
    const double c = n.dot(v);
    if (std::abs(c) >= kMinAlign) aligned.emplace_back(-std::abs(c), c < 0 ? Vec(-n) : n);
  }
  std::stable_sort(aligned.begin(), aligned.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Vec best = v;
  double best_w = width(st.K, v);
  for (size_t i = 0; i < aligned.size() && i < kNormals; ++i) {
    const double w = width(st.K, aligned[i].second);
    if (w < best_w) {
      best_w = w;
      best = aligned[i].second;
    }
  }
  return best;
}

}  // namespace

Chord subspace_chord(const Polytope& K, const OrthoBasis& S, const Vec& p, const Vec& u_L) {
  if (p.size() != K.dim() || u_L.size() != K.dim()) throw InputError("subspace_chord: dimension mismatch");
  if (std::abs(u_L.norm() - 1.0) > 1e-9) throw InputError("subspace_chord: direction must be unit");
  for (const Vec& s : S.vectors())
    if (std::abs(s.dot(u_L)) > 1e-9 || std::abs(s.dot(p)) > 1e-9)
      throw InputError("subspace_chord: point and direction must lie in L");
  const OrthoBasis L = complement_basis(S, K.dim());
  ProjectionWalker w(K, S, L, L.coords(p));
  return w.chord(L.coords(u_L));
}

bool in_projection(const KnowledgeState& st, const Vec& p, double tol) {
  return in_projection(st, projection_rows(st), p, tol);
}

double cylinder_width(const KnowledgeState& st, const Vec& u) {
  if (u.size() != st.dim()) throw InputError("cylinder_width: dimension mismatch");
  double w = 0.0;
  if (!st.L.empty()) {
    const Vec pu = project_point(u, st.L);
    if (pu.norm() > 1e-15) w = width(st.K, pu);
  }
  for (int i = 0; i < st.S.size(); ++i) {
    const auto& [lo, hi] = st.widths_S[static_cast<size_t>(i)];
    w += std::abs(u.dot(st.S[i])) * (hi - lo);
  }
  return w;
}

void SubspacePool::filter(const KnowledgeState& st) {
  if (points_.empty()) return;
  const ProjectionRows rows = projection_rows(st);
  std::vector<Vec> kept;
  kept.reserve(points_.size());
  for (Vec& p : points_)
    if (in_projection(st, rows, p, 0.0)) kept.push_back(std::move(p));
  points_ = std::move(kept);
}

void SubspacePool::fill(const KnowledgeState& st, const SamplerConfig& cfg, int n, const Vec& warm, Rng& rng,
                        WalkStats* stats) {
  if (st.L.empty()) throw InputError("cannot sample a zero-dimensional projection");
  if (size() >= n) return;
  const int k = st.L.size();
  const AffineMap T = transform_ ? *transform_ : AffineMap::identity(k);
  SamplerConfig run = cfg;
  run.n_samples = n - size();
  Vec start = warm;
  if (!points_.empty()) {
    start = points_[static_cast<size_t>(rng.next_u64() % points_.size())];
    run.burn_in = 0;
  }
  ProjectionWalker w(st.K, st.S, st.L, start);
  std::vector<Vec> fresh = sample_walk(w, run, T, rng, stats);
  for (Vec& p : fresh) points_.push_back(std::move(p));
}

AffineMap subspace_box_scaling(const KnowledgeState& st) {
  const int k = st.L.size();
  Vec scale(k), offset(k);
  for (int i = 0; i < k; ++i) {
    const auto [lo, hi] = support_interval(st.K, st.L[i]);
    const double w = std::max(hi - lo, 1e-300);
    scale(i) = 1.0 / w;
    offset(i) = -0.5 * (lo + hi) / w;
  }
  try {
    return AffineMap(scale.asDiagonal(), offset);
  } catch (const InputError&) {
    return AffineMap::identity(k);
  }
}

Vec subspace_warm_start(const KnowledgeState& st, const std::optional<Vec>& previous) {
  if (previous) {
    const Vec p = st.L.coords(*previous);
    if (in_projection(st, p, -1e-9)) return p;
  }
  const Ball ball = chebyshev_center(st.K);
  if (!(ball.radius > 0.0)) throw DegenerateError("knowledge set has empty interior");
  return st.L.coords(ball.center);
}

Vec cylinder_point(const KnowledgeState& st, const Vec& center_L) {
  Vec z = midpoints(st);
  if (!st.L.empty()) z += st.L.lift(center_L);
  return z;
}

Vec cylindrified_centroid(const KnowledgeState& st, const SamplerConfig& cfg, Rng& rng) {
  if (st.L.empty()) return midpoints(st);
  SubspacePool pool;
  pool.fill(st, cfg, cfg.n_samples, subspace_warm_start(st, std::nullopt), rng);
  return cylinder_point(st, sample_mean(pool.points()));
}

Prediction predict(const KnowledgeState& st, const Vec& u, double epsilon, const SamplerConfig& cfg, Rng& rng) {
  if (u.size() != st.dim() || std::abs(u.norm() - 1.0) > 1e-9) throw InputError("predict: u must be a unit vector");
  Prediction p;
  p.z = cylindrified_centroid(st, cfg, rng);
  p.x = u.dot(p.z);
  p.n_t_flag = cylinder_width(st, u) > epsilon;
  return p;
}

ThinSearch find_thin_directions(KnowledgeState& st, SubspacePool& pool, const SamplerConfig& cfg, Rng& rng,
                                const std::optional<Vec>& previous, WalkStats* stats) {
  ThinSearch out;
  while (!st.L.empty()) {
    const int k = st.L.size();
    pool.fill(st, cfg, std::max(cfg.n_samples, 10 * k), subspace_warm_start(st, previous), rng, stats);
    const std::vector<Vec>& pts = pool.points();
    const Mat cov = sample_covariance(pts, sample_mean(pts));
    const EigenDecomposition e = symmetric_eigen(0.5 * (cov + cov.transpose()));
    const Vec v = refine_candidate(st, st.L.lift(e.vectors.col(0)));
    double w = 0.0;
    if (!st.try_add_small_direction(v, &w)) {
      if (std::isfinite(w)) out.min_rejected_width = w;
      break;
    }
    ++out.added;
    pool.reset();
    if (!st.L.empty()) pool.set_transform(subspace_box_scaling(st));
  }
  return out;
}

KnowledgeState find_thin_directions(KnowledgeState st, const SamplerConfig& cfg, Rng& rng) {
  SubspacePool pool;
  find_thin_directions(st, pool, cfg, rng);
  return st;
}

KnowledgeState update(KnowledgeState st, const Vec& u, double x, Side side, const SamplerConfig& cfg, Rng& rng) {
  st.K = add_halfspace(st.K, u, x, kept_sense(side));
  st.refresh_widths();
  return find_thin_directions(std::move(st), cfg, rng);
}

bool stopping_consistency(const KnowledgeState& st) { return st.L.empty(); }

CylinderLearner::CylinderLearner(Polytope K0, PvOptions opt, std::uint64_t seed) : opt_(std::move(opt)), rng_(seed) {
  const int d = K0.dim();
  if (!(opt_.epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (opt_.delta <= 0.0) opt_.delta = opt_.epsilon / (2.0 * d);
  if (opt_.rho <= 0.0) opt_.rho = opt_.epsilon / (8.0 * (d + 1.0) * (d + 1.0));
  if (opt_.sampler) opt_.sampler->validate();
  if (opt_.rounding_every < 1 || opt_.prune_every < 1) throw InputError("rounding/prune periods must be >= 1");
  st_ = KnowledgeState::initial(std::move(K0), opt_.delta);
  pool_.set_transform(subspace_box_scaling(st_));
}

SamplerConfig CylinderLearner::sampler_for(int k) const {
  return opt_.sampler ? *opt_.sampler : SamplerConfig::defaults(std::max(k, 1));
}

void CylinderLearner::ensure_centroid() {
  if (centroid_) return;
  if (st_.L.empty()) {
    centroid_ = cylinder_point(st_, Vec());
    last_stderr_ = 0.0;
    return;
  }
  const int k = st_.L.size();
  const SamplerConfig cfg = sampler_for(k);
  int n = std::max(cfg.n_samples, 10 * k);
  pool_.fill(st_, cfg, n, subspace_warm_start(st_, last_centroid_), rng_, &walk_);
  CentroidEstimate est = centroid_from_samples(pool_.points());
  if (opt_.enforce_rho) {
    const int cap = 64 * n;
    while (est.stderr_bound > opt_.rho / 3.0 && n < cap) {
      n = std::min(2 * n, cap);
      pool_.fill(st_, cfg, n, subspace_warm_start(st_, last_centroid_), rng_, &walk_);
      est = centroid_from_samples(pool_.points());
    }
  }
  last_stderr_ = est.stderr_bound;
  centroid_ = cylinder_point(st_, est.z);
  last_centroid_ = centroid_;
}

double CylinderLearner::predict(const Vec& u) {
  if (pending_) throw InputError("predict called twice without observe");
  if (u.size() != dim() || std::abs(u.norm() - 1.0) > 1e-9) throw InputError("predict: u must be a unit vector");
  ensure_centroid();
  u_ = u;
  pending_ = true;
  diag_ = RoundDiagnostics{};
  diag_.n_t_flag = cylinder_width(st_, u) > opt_.epsilon;
  if (opt_.phi_estimate) {
    if (st_.L.empty()) {
      diag_.phi = 0.0;
    } else {
      const int k = st_.L.size();
      Vec lo(k), hi(k);
      for (int i = 0; i < k; ++i) std::tie(lo(i), hi(i)) = support_interval(st_.K, st_.L[i]);
      Rng mc = rng_.split(static_cast<std::uint64_t>(cuts_ + skipped_cuts_));
      diag_.phi = mc_volume([&](const Vec& p) { return in_projection(st_, p, 0.0); }, lo, hi,
                            std::max(opt_.phi_samples, 1000), mc)
                      .estimate;
    }
  }
  return u.dot(*centroid_);
}

void CylinderLearner::observe(Side side) {
  if (!pending_) throw InputError("observe called without predict");
  pending_ = false;
  const double x = u_.dot(*centroid_);
  // A cut along a direction the body no longer resolves carries no
  // information and only erodes the interior numerically.
  bool cut = width(st_.K, u_) > 1e-9;
  if (cut) {
    try {
      st_.K = add_halfspace(st_.K, u_, x, kept_sense(side));
    } catch (const DegenerateError&) {
      cut = false;
    }
  }
  if (!cut) {
    ++skipped_cuts_;
  } else {
    ++cuts_;
    centroid_.reset();
    if (cuts_ % opt_.prune_every == 0) st_.K = prune_redundant(st_.K);
    st_.refresh_widths();
    if (opt_.reuse_samples)
      pool_.filter(st_);
    else
      pool_.reset();
  }
  bool dimension_changed = false;
  if (!st_.L.empty() && opt_.find_thin && cut) {
    const int before = st_.S.size();
    const ThinSearch ts =
        find_thin_directions(st_, pool_, sampler_for(st_.L.size()), rng_, last_centroid_, &walk_);
    diag_.min_width = ts.min_rejected_width;
    dimension_changed = st_.S.size() != before;
  }
  if (dimension_changed) centroid_.reset();
  if (cut && !st_.L.empty() && (dimension_changed || cuts_ % opt_.rounding_every == 0)) {
    const int k = st_.L.size();
    if (pool_.size() < 10 * k)
      pool_.fill(st_, sampler_for(k), 10 * k, subspace_warm_start(st_, last_centroid_), rng_, &walk_);
    const Rounding r = rounding_transform(pool_.points());
    if (!r.rank_deficient) pool_.set_transform(r.map);
  }
  diag_.n_small = st_.S.size();
}

bool CylinderLearner::converged() const {
  if (opt_.find_thin) return st_.L.empty();
  const auto [lo, hi] = bounding_box(st_.K);
  return (hi - lo).norm() <= opt_.epsilon;
}

ProjectedVolumeLearner::ProjectedVolumeLearner(Polytope K0, PvOptions opt, std::uint64_t seed)
    : CylinderLearner(std::move(K0), [&] {
        opt.find_thin = true;
        return opt;
      }(), seed) {}

}  // namespace pvs
