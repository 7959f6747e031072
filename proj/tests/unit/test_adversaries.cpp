#include <doctest.h>

#include <cmath>

#include "bodies.hpp"
#include "pvsearch/adversaries.hpp"
#include "pvsearch/baselines.hpp"

using namespace pvs;
using pvs::testing::vec;

namespace {

// Cuts through the exact polygon centroid (d = 2 only).
class ExactCentroid2D final : public Learner {
 public:
  explicit ExactCentroid2D(Polytope K) : K_(std::move(K)) {}
  std::string name() const override { return "exact_centroid"; }
  int dim() const override { return 2; }
  double predict(const Vec& u) override {
    u_ = u;
    x_ = u.dot(exact_polygon(K_).centroid);
    return x_;
  }
  void observe(Side side) override { K_ = add_halfspace(K_, u_, x_, kept_sense(side)); }
  bool converged() const override { return false; }
  RoundDiagnostics diagnostics() const override { return {}; }
  const Polytope* knowledge_set() const override { return &K_; }
  bool knows_consistent(const Vec& theta, double tol) const override { return K_.contains(theta, tol); }

 private:
  Polytope K_;
  Vec u_;
  double x_ = 0.0;
};

// Guesses the midpoint of its own interval on the probed axis.
class MidpointLearner final : public Learner {
 public:
  MidpointLearner(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {}
  std::string name() const override { return "midpoint"; }
  int dim() const override { return static_cast<int>(lo_.size()); }
  double predict(const Vec& u) override {
    u.maxCoeff(&i_);
    x_ = 0.5 * (lo_(i_) + hi_(i_));
    return x_;
  }
  void observe(Side side) override { (side == Side::below ? lo_ : hi_)(i_) = x_; }
  bool converged() const override { return false; }
  RoundDiagnostics diagnostics() const override { return {}; }
  bool knows_consistent(const Vec& theta, double tol) const override {
    return (theta.array() >= lo_.array() - tol).all() && (theta.array() <= hi_.array() + tol).all();
  }

 private:
  Vec lo_, hi_;
  Eigen::Index i_ = 0;
  double x_ = 0.0;
};

struct Trace {
  std::vector<Vec> u;
  std::vector<double> x;
  long mistakes(const Vec& theta, double eps) const {
    long m = 0;
    for (size_t t = 0; t < u.size(); ++t) m += std::abs(x[t] - u[t].dot(theta)) > eps;
    return m;
  }
};

Trace play(Environment& env, Learner& L, int rounds, bool check_radius = true) {
  Trace tr;
  for (int t = 0; t < rounds && !env.finished(); ++t) {
    const Vec u = env.next_direction(L);
    if (env.finished()) break;
    const double x = L.predict(u);
    L.observe(env.respond(u, x));
    tr.u.push_back(u);
    tr.x.push_back(x);
    if (check_radius) REQUIRE(chebyshev_center(env.consistent_set()).radius > 1e-12);
  }
  return tr;
}

}  // namespace

TEST_CASE("fixed_theta_feedback examples") {
  const double eps = 0.05;
  RoundOutcome r = fixed_theta_feedback(vec({0.3, 0}), vec({1, 0}), 0.1, eps);
  CHECK(r.side == Side::below);
  CHECK(*r.mistake == (0.2 > eps));

  r = fixed_theta_feedback(vec({0.3, 0.1}), vec({0, 1}), 0.1, eps);
  CHECK(r.side == Side::below);
  CHECK_FALSE(*r.mistake);

  r = fixed_theta_feedback(vec({0, 0}), vec({0.6, 0.8}), eps / 2, eps);
  CHECK(r.side == Side::above);
  CHECK_FALSE(*r.mistake);

  // strict inequality at exactly eps
  r = fixed_theta_feedback(vec({0.5}), vec({1}), 0.25, 0.25);
  CHECK_FALSE(*r.mistake);
}

TEST_CASE("round_robin_direction examples") {
  CHECK(round_robin_direction(3, 0) == Vec::Unit(3, 0));
  CHECK(round_robin_direction(3, 1) == Vec::Unit(3, 1));
  CHECK(round_robin_direction(3, 2) == Vec::Unit(3, 2));
  CHECK(round_robin_direction(3, 3) == Vec::Unit(3, 0));
  for (int t = 0; t < 5; ++t) CHECK(round_robin_direction(1, t) == Vec::Unit(1, 0));
  CHECK(round_robin_direction(2, 7) == Vec::Unit(2, 1));
  CHECK_THROWS_AS(round_robin_direction(0, 0), InputError);
}

TEST_CASE("bisection adversary: responses") {
  const int d = 2;
  const Polytope K0 = initial_body(BodyKind::unit_box_scaled, d);
  const double h = 1.0 / std::sqrt(2.0);
  BisectionAdversary env(K0, 0.01);
  MidpointLearner L(Vec::Zero(d), Vec::Constant(d, h));

  // midpoint: length halves, tie resolves to below
  Vec u = env.next_direction(L);
  CHECK(u == Vec::Unit(d, 0));
  CHECK(env.respond(u, h / 2) == Side::below);
  CHECK(env.upper()(0) - env.lower()(0) == doctest::Approx(h / 2));

  // x outside the interval: nothing changes
  u = env.next_direction(L);
  CHECK(u == Vec::Unit(d, 1));
  CHECK(env.respond(u, -1.0) == Side::below);
  CHECK(env.lower()(1) == doctest::Approx(0.0));
  CHECK(env.upper()(1) == doctest::Approx(h));
  CHECK(env.respond(vec({1, 0}), 5.0) == Side::above);
  CHECK(env.upper()(0) == doctest::Approx(h));

  // clearly off-center guess: the longer part is kept
  CHECK(env.respond(vec({0, 1}), 0.8 * h) == Side::above);
  CHECK(env.upper()(1) == doctest::Approx(0.8 * h));

  CHECK_THROWS_AS(env.respond(vec({0.6, 0.8}), 0.1), InputError);
  CHECK_THROWS_AS(BisectionAdversary(testing::simplex(vec({1, 1})), 0.01), InputError);
}

TEST_CASE("bisection adversary: d=1, eps=1/64 forces at least 5 mistakes") {
  const double eps = 1.0 / 64.0;
  BisectionAdversary env(initial_body(BodyKind::unit_box_scaled, 1), eps);
  MidpointLearner L(vec({0}), vec({1}));
  const Trace tr = play(env, L, 12);
  const Vec theta = env.final_theta();
  // far end: theta at the top of the final interval
  CHECK(theta(0) == doctest::Approx(1.0).epsilon(1e-9));
  // deferred count equals the number of rounds whose pre-cut length exceeded 2 eps
  long long_rounds = 0;
  double len = 1.0;
  for (size_t t = 0; t < tr.x.size(); ++t, len /= 2) long_rounds += len > 2 * eps;
  CHECK(long_rounds == 5);
  CHECK(tr.mistakes(theta, eps) == long_rounds);
  CHECK(tr.mistakes(theta, eps) >= 5);
}

TEST_CASE("bisection adversary: lower bound for d in {2,3,4}, eps = 2^-7") {
  const double eps = std::ldexp(1.0, -7);
  for (int d = 2; d <= 4; ++d) {
    CAPTURE(d);
    const double h = 1.0 / std::sqrt(d);
    BisectionAdversary env(initial_body(BodyKind::unit_box_scaled, d), eps);
    MidpointLearner L(Vec::Zero(d), Vec::Constant(d, h));
    const Trace tr = play(env, L, 20 * d);
    const long bound = d * static_cast<long>(std::floor(std::log2(1.0 / (2 * eps * std::sqrt(d))))) - d;
    CHECK(tr.mistakes(env.final_theta(), eps) >= bound);
    CHECK(env.consistent_set().contains(env.final_theta(), 1e-9));
  }
}

TEST_CASE("bisection adversary against sampled learners keeps the bound") {
  const double eps = std::ldexp(1.0, -7);
  const int d = 2;
  const Polytope K0 = initial_body(BodyKind::unit_box_scaled, d);
  const long bound = d * static_cast<long>(std::floor(std::log2(1.0 / (2 * eps * std::sqrt(d))))) - d;
  {
    PvOptions opt;
    opt.epsilon = eps;
    ProjectedVolumeLearner L(K0, opt, 3);
    BisectionAdversary env(K0, eps);
    const Trace tr = play(env, L, 60);
    CHECK(tr.mistakes(env.final_theta(), eps) >= bound);
  }
  {
    EllipsoidLearner L(K0, eps);
    BisectionAdversary env(K0, eps);
    const Trace tr = play(env, L, 200);
    CHECK(tr.mistakes(env.final_theta(), eps) >= bound);
  }
}

TEST_CASE("finalize_theta examples") {
  CHECK(finalize_theta(Polytope::box(vec({0.4}), vec({0.6})))(0) == doctest::Approx(0.5));
  // incircle of the unit right triangle: r = 1 / (2 + sqrt 2)
  const Vec c = finalize_theta(testing::simplex(vec({1, 1})));
  const double r = 1.0 / (2.0 + std::sqrt(2.0));
  CHECK(c(0) == doctest::Approx(r));
  CHECK(c(1) == doctest::Approx(r));
  Mat A(2, 1);
  A << 1, -1;
  CHECK_THROWS_AS(finalize_theta(Polytope(A, vec({0, -1}))), DegenerateError);  // x <= 0 and x >= 1
}

TEST_CASE("simplex adversary: Step 2 vector") {
  const double e = 0.01;
  const Vec v = SimplexAdversary::step2_direction(vec({e, e}), 1.0, 5);
  const Vec expect = vec({3 / (4 * e), 3 / (4 * e), 1, 0, 0}).normalized();
  CHECK((v - expect).norm() < 1e-12);
  CHECK_THROWS_AS(SimplexAdversary::step2_direction(vec({e, e}), 1.0, 2), InputError);
}

TEST_CASE("simplex adversary: Step 1 count, d=2, eps=0.05, exact centroid cuts") {
  const double eps = 0.05;
  const int d = 2;
  const Polytope K0 = initial_body(BodyKind::unit_box_scaled, d);
  SimplexAdversary env(K0, eps);
  ExactCentroid2D L(K0);
  play(env, L, 200);
  CHECK(env.finished());
  CHECK_FALSE(env.health().step3_capped);
  CHECK(env.health().flipped == 0);

  // k = 1: iterate the scale factor 1 - 1/(k+1) from s_1 = 1/sqrt(2)
  int expect = 0;
  for (double s = 1.0 / std::sqrt(2.0); s > 2 * eps * 1 / 2.0; s *= 0.5) ++expect;
  CHECK(expect == 4);
  CHECK(env.health().step1_rounds[0] == expect);
}

TEST_CASE("simplex adversary: after phase 1 the set is a triangle with 1/4 <= s'_2 / h <= 1") {
  const double eps = 0.01;
  const int d = 2;
  const double h = 1.0 / std::sqrt(2.0);
  const Polytope K0 = initial_body(BodyKind::unit_box_scaled, d);
  SimplexAdversary env(K0, eps);
  ExactCentroid2D L(K0);
  while (env.k() == 1) {
    const Vec u = env.next_direction(L);
    if (env.k() != 1) break;
    const double x = L.predict(u);
    L.observe(env.respond(u, x));
  }
  CHECK(env.phase() == SimplexAdversary::Phase::step1);
  const Polytope& K = env.consistent_set();
  const double s2 = width(K, Vec::Unit(2, 1));
  CHECK(s2 / h >= 0.25);
  CHECK(s2 / h <= 1.0);
  // triangle: the polygon has three vertices
  CHECK(exact_polygon(prune_redundant(K)).vertices.size() == 3);
}

TEST_CASE("simplex adversary never empties the consistent set") {
  for (int d : {3, 4}) {
    const Polytope K0 = initial_body(BodyKind::unit_box_scaled, d);
    PvOptions opt;
    opt.epsilon = 0.02;
    CentroidLearner L(K0, opt, 9);
    SimplexAdversary env(K0, opt.epsilon);
    play(env, L, 400);
    CHECK(env.finished());
    CHECK(chebyshev_center(env.consistent_set()).radius > 1e-12);
  }
}

TEST_CASE("greedy_width_direction examples") {
  Rng rng(4);
  const double delta = 0.01;
  Vec u = greedy_width_direction(Polytope::box(vec({0, 0}), vec({2, delta})), 16, rng);
  CHECK(std::abs(u(0)) > 0.999);

  // a regular 64-gon: every direction is nearly as wide as any other
  Mat A(64, 2);
  for (int i = 0; i < 64; ++i) A.row(i) = vec({std::cos(2 * M_PI * i / 64), std::sin(2 * M_PI * i / 64)}).transpose();
  const Polytope ball(A, Vec::Ones(64));
  u = greedy_width_direction(ball, 16, rng);
  CHECK(std::abs(u.norm() - 1.0) < 1e-12);
  CHECK(width(ball, u) >= 2.0);

  // thin box rotated by 30 degrees
  const double a = M_PI / 6;
  Mat R(2, 2);
  R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  for (int rep = 0; rep < 20; ++rep) {
    const double len = rng.uniform(1.0, 3.0), thick = rng.uniform(0.001, 0.05);
    const Polytope P = testing::linear_image(Polytope::box(vec({-len, -thick}), vec({len, thick})), R);
    u = greedy_width_direction(P, 16, rng);
    const double angle = std::acos(std::min(1.0, std::abs(u.dot(R.col(0)))));
    CHECK(angle < 5.0 * M_PI / 180.0);
  }
}

TEST_CASE("fixed-theta environment: replay gives identical sides") {
  const Polytope K0 = initial_body(BodyKind::inscribed_cube, 3);
  for (const std::string name : {"fixed_random", "greedy_width"}) {
    CAPTURE(name);
    auto e1 = make_environment(name, K0, 0.05, 77);
    auto e2 = make_environment(name, K0, 0.05, 77);
    CHECK(e1->mode() == EnvMode::fixed_theta);
    CHECK(e1->name() == name);
    CHECK(e1->final_theta() == e2->final_theta());
    CHECK(K0.contains(e1->final_theta()));
    PvOptions opt;
    opt.epsilon = 0.05;
    ProjectedVolumeLearner L1(K0, opt, 5), L2(K0, opt, 5);
    for (int t = 0; t < 30; ++t) {
      const Vec u1 = e1->next_direction(L1), u2 = e2->next_direction(L2);
      REQUIRE(u1 == u2);
      const double x1 = L1.predict(u1), x2 = L2.predict(u2);
      REQUIRE(x1 == x2);
      const Side s1 = e1->respond(u1, x1), s2 = e2->respond(u2, x2);
      REQUIRE(s1 == s2);
      CHECK(s1 == fixed_theta_feedback(e1->final_theta(), u1, x1, 0.05).side);
      L1.observe(s1);
      L2.observe(s2);
      CHECK(L1.knows_consistent(e1->final_theta(), 1e-9));
    }
  }
}

TEST_CASE("make_environment and default_body") {
  const Polytope K0 = default_body("simplex_counterexample", 3);
  CHECK(bounding_box(K0).first.norm() == doctest::Approx(0.0));
  CHECK(default_body("round_robin_adaptive", 4).contains(Vec::Constant(4, 0.49)));
  CHECK(default_body("fixed_random", 2).contains(vec({-0.7, 0.7})));
  CHECK(make_environment("round_robin_adaptive", K0, 0.1, 1)->mode() == EnvMode::adaptive);
  CHECK(make_environment("simplex_counterexample", K0, 0.1, 1)->name() == "simplex_counterexample");
  CHECK_THROWS_AS(make_environment("nope", K0, 0.1, 1), InputError);
  CHECK_THROWS_AS(default_body("nope", 2), InputError);
}
