#include "pvsearch/adversaries.hpp"

#include <cmath>

namespace pvs {

namespace {

constexpr int kPruneEvery = 50;

std::optional<Polytope> try_cut(const Polytope& P, const Vec& u, double x, Side side) {
  try {
    return add_halfspace(P, u, x, kept_sense(side));
  } catch (const DegenerateError&) {
    return std::nullopt;
  }
}

Side other(Side s) { return s == Side::below ? Side::above : Side::below; }

}  // namespace

RoundOutcome fixed_theta_feedback(const Vec& theta, const Vec& u, double x, double epsilon) {
  RoundOutcome out;
  out.u = u;
  out.x = x;
  const double y = u.dot(theta);
  out.side = x <= y ? Side::below : Side::above;
  out.mistake = std::abs(x - y) > epsilon;
  return out;
}

Vec round_robin_direction(int d, long t) {
  if (d < 1 || t < 0) throw InputError("round_robin_direction: need d >= 1 and t >= 0");
  return Vec::Unit(d, static_cast<Eigen::Index>(t % d));
}

Vec greedy_width_direction(const Polytope& K, int n_probe, Rng& rng) {
  if (n_probe < 1) throw InputError("greedy_width_direction: n_probe must be positive");
  const int d = K.dim();
  std::vector<Vec> candidates, points;
  for (int i = 0; i < n_probe; ++i) {
    const Vec u = rng.unit_vector(d);
    candidates.push_back(u);
    points.push_back(lp_solve(u, K, Sense::maximize).x);
    points.push_back(lp_solve(u, K, Sense::minimize).x);
  }
  if (d > 1) {
    const Mat C = sample_covariance(points, sample_mean(points));
    const auto eig = symmetric_eigen(C);
    for (int j = 0; j < d; ++j) candidates.push_back(eig.vectors.col(j).normalized());
  }
  Vec best = candidates.front();
  double best_w = -1.0;
  for (const Vec& u : candidates) {
    const double w = width(K, u);
    if (w > best_w) {
      best_w = w;
      best = u;
    }
  }
  return best;
}

Vec finalize_theta(const Polytope& consistent_set) {
  const Ball b = chebyshev_center(consistent_set);
  if (!(b.radius > 0.0)) throw DegenerateError("finalize_theta: consistent set is empty");
  return b.center;
}

// ---------------------------------------------------------------------------

Environment::Environment(Polytope K0, double epsilon) : K0_(std::move(K0)), epsilon_(epsilon), consistent_(K0_) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
}

bool Environment::keeps_interior(const Vec& u, double x, Side side) const {
  return try_cut(consistent_, u, x, side).has_value();
}

void Environment::record(const Vec& u, double x, Side side) {
  ++rounds_;
  if (auto next = try_cut(consistent_, u, x, side)) {
    consistent_ = std::move(*next);
    if (consistent_.rows() > K0_.rows() + kPruneEvery) consistent_ = prune_redundant(consistent_);
  } else {
    ++skipped_;
  }
}

// ---------------------------------------------------------------------------

FixedThetaEnvironment::FixedThetaEnvironment(Polytope K0, double epsilon, Vec theta, Directions dirs,
                                             std::uint64_t seed, int n_probe)
    : Environment(std::move(K0), epsilon), theta_(std::move(theta)), dirs_(dirs), rng_(seed, 0x5eed), n_probe_(n_probe) {
  if (theta_.size() != dim()) throw InputError("theta has the wrong dimension");
  if (!K0_.contains(theta_, 1e-12)) throw InputError("theta must lie in the initial body");
}

Vec FixedThetaEnvironment::draw_theta(const Polytope& K0, Rng& rng) {
  const auto [lo, hi] = bounding_box(K0);
  for (int tries = 0; tries < 100000; ++tries) {
    Vec x(K0.dim());
    for (int i = 0; i < K0.dim(); ++i) x(i) = rng.uniform(lo(i), hi(i));
    if (K0.contains(x, 0.0)) return x;
  }
  throw DegenerateError("draw_theta: rejection sampling failed");
}

std::string FixedThetaEnvironment::name() const {
  return dirs_ == Directions::random ? "fixed_random" : "greedy_width";
}

Vec FixedThetaEnvironment::next_direction(const Learner& learner) {
  if (dirs_ == Directions::random) return rng_.unit_vector(dim());
  const Polytope* K = learner.knowledge_set();
  return greedy_width_direction(K ? *K : consistent_, n_probe_, rng_);
}

Side FixedThetaEnvironment::respond(const Vec& u, double x) {
  const Side side = fixed_theta_feedback(theta_, u, x, epsilon_).side;
  record(u, x, side);
  return side;
}

// ---------------------------------------------------------------------------

BisectionAdversary::BisectionAdversary(Polytope K0, double epsilon, double tie_tolerance)
    : Environment(std::move(K0), epsilon), tie_(tie_tolerance) {
  for (int r = 0; r < K0_.rows(); ++r) {
    if ((K0_.A().row(r).array().abs() > 1e-12).count() != 1)
      throw InputError("round_robin_adaptive needs an axis-aligned box");
  }
  std::tie(lo_, hi_) = bounding_box(K0_);
}

Vec BisectionAdversary::next_direction(const Learner&) { return round_robin_direction(dim(), rounds_); }

Side BisectionAdversary::respond(const Vec& u, double x) {
  Eigen::Index i = 0;
  const double top = u.maxCoeff(&i);
  if (std::abs(top - 1.0) > 1e-12 || std::abs(u.norm() - 1.0) > 1e-12)
    throw InputError("round_robin_adaptive: direction must be a standard basis vector");
  const double below_len = std::max(0.0, hi_(i) - std::max(x, lo_(i)));
  const double above_len = std::max(0.0, std::min(x, hi_(i)) - lo_(i));
  const Side side = below_len >= (1.0 - tie_) * above_len ? Side::below : Side::above;
  if (side == Side::below)
    lo_(i) = std::max(lo_(i), x);
  else
    hi_(i) = std::min(hi_(i), x);
  guesses_.emplace_back(static_cast<int>(i), x);
  record(u, x, side);
  return side;
}

Vec BisectionAdversary::final_theta() const {
  Vec theta(dim());
  for (int i = 0; i < dim(); ++i) {
    const double len = hi_(i) - lo_(i);
    if (!(len > 0.0)) {
      theta(i) = 0.5 * (lo_(i) + hi_(i));
      continue;
    }
    const double inset = 1e-12 * std::max(1.0, len);
    const double cand[2] = {hi_(i) - inset, lo_(i) + inset};
    int best = 0;
    long best_count = -1;
    for (int c = 0; c < 2; ++c) {
      long count = 0;
      for (const auto& [j, x] : guesses_)
        if (j == i && std::abs(x - cand[c]) > epsilon_) ++count;
      if (count > best_count) {
        best_count = count;
        best = c;
      }
    }
    theta(i) = cand[best];
  }
  return theta;
}

// ---------------------------------------------------------------------------

SimplexAdversary::SimplexAdversary(Polytope K0, double epsilon, int step3_cap)
    : Environment(std::move(K0), epsilon), step3_cap_(step3_cap) {
  health_.step1_rounds.assign(dim(), 0);
  health_.step3_rounds.assign(dim(), 0);
}

Vec SimplexAdversary::step2_direction(const Vec& s_hat, double h, int d) {
  const auto k = s_hat.size();
  if (k < 1 || k >= d) throw InputError("step2_direction: need 1 <= k < d");
  if (!(s_hat.minCoeff() > 0.0) || !(h > 0.0)) throw InputError("step2_direction: extents must be positive");
  Vec v = Vec::Zero(d);
  const double kk = static_cast<double>(k);
  v.head(k) = (kk + 1.0) / (2.0 * kk) * s_hat.cwiseInverse();
  v(k) = 1.0 / h;
  return v.normalized();
}

const Polytope& SimplexAdversary::observed(const Learner& learner) const {
  const Polytope* K = learner.knowledge_set();
  return K ? *K : consistent_;
}

bool SimplexAdversary::slab_left(const Polytope& K) const {
  // g(theta) = sum_i (theta_i - o_i) / s_i reaches its step-2 maximum only
  // while part of the old simplex facet survives at the bottom.
  Vec c = Vec::Zero(dim());
  c.head(k_) = s_hat_.cwiseInverse();
  const double g0 = offset_.cwiseQuotient(s_hat_).sum();
  const double g = support(K, c) - g0;
  return g >= g_full_ - 1e-9 * std::max(1.0, std::abs(g_full_));
}

void SimplexAdversary::advance(const Polytope& K) {
  for (;;) {
    switch (phase_) {
      case Phase::step1: {
        const double s = width(K, Vec::Unit(dim(), k_ - 1));
        if (s > 2.0 * epsilon_ * k_ / (k_ + 1.0)) return;
        if (k_ == dim()) {
          phase_ = Phase::done;
          return;
        }
        phase_ = Phase::step2;
        phase_rounds_ = 0;
        break;
      }
      case Phase::step2: {
        if (phase_rounds_ > 0) {
          phase_ = Phase::step3;
          phase_rounds_ = 0;
          break;
        }
        offset_.resize(k_);
        s_hat_.resize(k_);
        for (int i = 0; i < k_; ++i) {
          const auto [lo, hi] = support_interval(K, Vec::Unit(dim(), i));
          offset_(i) = lo;
          s_hat_(i) = hi - lo;
        }
        Vec c = Vec::Zero(dim());
        c.head(k_) = s_hat_.cwiseInverse();
        g_full_ = support(K, c) - offset_.cwiseQuotient(s_hat_).sum();
        return;
      }
      case Phase::step3: {
        const bool capped = phase_rounds_ >= step3_cap_;
        if (capped) health_.step3_capped = true;
        if (!capped && slab_left(K)) return;
        ++k_;
        phase_ = Phase::step1;
        phase_rounds_ = 0;
        break;
      }
      case Phase::done:
        return;
    }
  }
}

Vec SimplexAdversary::next_direction(const Learner& learner) {
  const Polytope& K = observed(learner);
  if (K.dim() != dim()) throw InputError("simplex adversary: learner dimension mismatch");
  advance(K);
  switch (phase_) {
    case Phase::step1:
      forced_ = Side::below;
      return Vec::Unit(dim(), k_ - 1);
    case Phase::step2:
      forced_ = Side::above;
      return step2_direction(s_hat_, width(K, Vec::Unit(dim(), k_)), dim());
    case Phase::step3:
      forced_ = Side::below;
      return Vec::Unit(dim(), k_);
    case Phase::done:
      break;
  }
  // Script over; keep probing the last axis so confirmation rounds still run.
  forced_ = Side::below;
  return Vec::Unit(dim(), dim() - 1);
}

Side SimplexAdversary::respond(const Vec& u, double x) {
  Side side = forced_;
  if (!keeps_interior(u, x, side) && keeps_interior(u, x, other(side))) {
    side = other(side);
    ++health_.flipped;
  }
  record(u, x, side);
  switch (phase_) {
    case Phase::step1:
      ++health_.step1_rounds[k_ - 1];
      break;
    case Phase::step3:
      ++health_.step3_rounds[k_ - 1];
      break;
    default:
      break;
  }
  ++phase_rounds_;
  return side;
}

Vec SimplexAdversary::final_theta() const { return finalize_theta(consistent_); }

std::string to_string(SimplexAdversary::Phase p) {
  switch (p) {
    case SimplexAdversary::Phase::step1:
      return "step1";
    case SimplexAdversary::Phase::step2:
      return "step2";
    case SimplexAdversary::Phase::step3:
      return "step3";
    case SimplexAdversary::Phase::done:
      return "done";
  }
  return "?";
}

// ---------------------------------------------------------------------------

Polytope default_body(const std::string& adversary, int d) {
  if (adversary == "round_robin_adaptive" || adversary == "simplex_counterexample")
    return initial_body(BodyKind::unit_box_scaled, d);
  if (adversary == "fixed_random" || adversary == "greedy_width") return initial_body(BodyKind::inscribed_cube, d);
  throw InputError("unknown adversary: " + adversary);
}

std::unique_ptr<Environment> make_environment(const std::string& name, const Polytope& K0, double epsilon,
                                              std::uint64_t seed) {
  if (name == "fixed_random" || name == "greedy_width") {
    Rng rng(seed, 0x7e7a);
    Vec theta = FixedThetaEnvironment::draw_theta(K0, rng);
    const auto dirs = name == "fixed_random" ? FixedThetaEnvironment::Directions::random
                                             : FixedThetaEnvironment::Directions::greedy_width;
    return std::make_unique<FixedThetaEnvironment>(K0, epsilon, std::move(theta), dirs, seed);
  }
  if (name == "round_robin_adaptive") return std::make_unique<BisectionAdversary>(K0, epsilon);
  if (name == "simplex_counterexample") return std::make_unique<SimplexAdversary>(K0, epsilon);
  throw InputError("unknown adversary: " + name);
}

}  // namespace pvs
