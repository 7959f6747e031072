#include "pvsearch/baselines.hpp"

#include <cmath>

namespace pvs {

CentroidLearner::CentroidLearner(Polytope K0, PvOptions opt, std::uint64_t seed)
    : CylinderLearner(std::move(K0), [&] {
        opt.find_thin = false;
        // Nothing is factored out of K, so it turns into a needle quickly;
        // stale rounding then leaves the chain stuck near one facet.
        opt.rounding_every = 1;
        return opt;
      }(), seed) {}

CentroidStep centroid_learner_step(const Polytope& K, const Vec& u, double epsilon,
                                   const std::function<Side(double)>& feedback, const SamplerConfig& cfg,
                                   Rng& rng) {
  if (u.size() != K.dim() || std::abs(u.norm() - 1.0) > 1e-9) throw InputError("centroid step: u must be unit");
  const CentroidEstimate est = estimate_centroid(K, cfg, rng);
  CentroidStep out;
  out.x = u.dot(est.z);
  out.n_t_flag = width(K, u) > epsilon;
  out.K = add_halfspace(K, u, out.x, kept_sense(feedback(out.x)));
  return out;
}

Ellipsoid Ellipsoid::ball(const Vec& center, double radius) {
  if (!(radius > 0.0)) throw InputError("ellipsoid radius must be positive");
  const auto d = center.size();
  return Ellipsoid{center, radius * radius * Mat::Identity(d, d)};
}

double Ellipsoid::width(const Vec& u) const { return 2.0 * std::sqrt(std::max(u.dot(shape * u), 0.0)); }

double Ellipsoid::quadratic_form(const Vec& x) const {
  const Vec r = x - center;
  return r.dot(shape.ldlt().solve(r));
}

double Ellipsoid::volume_factor_to(const Ellipsoid& next) const {
  return std::sqrt(next.shape.determinant() / shape.determinant());
}

double ellipsoid_volume_ratio(int d) {
  if (d < 1) throw InputError("dimension must be positive");
  if (d == 1) return 0.5;
  const double dd = d;
  return dd / (dd + 1.0) * std::pow(dd * dd / (dd * dd - 1.0), (dd - 1.0) / 2.0);
}

Ellipsoid ellipsoid_update(const Ellipsoid& E, const Vec& u, CutSense keep) {
  const int d = E.dim();
  if (u.size() != d) throw InputError("ellipsoid_update: dimension mismatch");
  const Vec Mu = E.shape * u;
  const double uMu = u.dot(Mu);
  if (!(uMu > 0.0)) throw DegenerateError("ellipsoid_update: flat ellipsoid along u");
  const double s = keep == CutSense::le ? -1.0 : 1.0;
  Ellipsoid out;
  if (d == 1) {
    out.center = E.center + s * 0.5 * Mu / std::sqrt(uMu);
    out.shape = E.shape / 4.0;
    return out;
  }
  const double dd = d;
  out.center = E.center + s * Mu / ((dd + 1.0) * std::sqrt(uMu));
  out.shape = dd * dd / (dd * dd - 1.0) * (E.shape - 2.0 / (dd + 1.0) * (Mu * Mu.transpose()) / uMu);
  out.shape = 0.5 * (out.shape + out.shape.transpose());
  return out;
}

EllipsoidStep ellipsoid_learner_step(const Ellipsoid& E, const Vec& u, double epsilon,
                                     const std::function<Side(double)>& feedback) {
  EllipsoidStep out;
  out.x = u.dot(E.center);
  const Side side = feedback(out.x);
  if (E.width(u) <= epsilon) {
    out.E = E;
    return out;
  }
  out.E = ellipsoid_update(E, u, kept_sense(side));
  out.cut = true;
  return out;
}

EllipsoidLearner::EllipsoidLearner(const Polytope& K0, double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  const auto [lo, hi] = bounding_box(K0);
  E_ = Ellipsoid::ball(0.5 * (lo + hi), 0.5 * (hi - lo).norm());
}

EllipsoidLearner::EllipsoidLearner(Ellipsoid E0, double epsilon) : E_(std::move(E0)), epsilon_(epsilon) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
}

double EllipsoidLearner::predict(const Vec& u) {
  if (pending_) throw InputError("predict called twice without observe");
  if (u.size() != dim() || std::abs(u.norm() - 1.0) > 1e-9) throw InputError("predict: u must be a unit vector");
  u_ = u;
  pending_ = true;
  diag_ = RoundDiagnostics{};
  diag_.n_t_flag = E_.width(u) > epsilon_;
  return u.dot(E_.center);
}

void EllipsoidLearner::observe(Side side) {
  if (!pending_) throw InputError("observe called without predict");
  pending_ = false;
  if (diag_.n_t_flag) E_ = ellipsoid_update(E_, u_, kept_sense(side));
}

bool EllipsoidLearner::converged() const {
  const double lmax = symmetric_eigen(0.5 * (E_.shape + E_.shape.transpose())).values.maxCoeff();
  return 2.0 * std::sqrt(std::max(lmax, 0.0)) <= epsilon_;
}

}  // namespace pvs
