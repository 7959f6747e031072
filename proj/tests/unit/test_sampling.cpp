#include <doctest.h>

#include <cmath>
#include <vector>

#include "pvsearch/sampling.hpp"

using namespace pvs;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Δ(s) = {x >= 0, sum x_i / s_i <= 1}
Polytope simplex(const Vec& s) {
  const auto d = s.size();
  Mat A = Mat::Zero(d + 1, d);
  Vec b = Vec::Zero(d + 1);
  for (Eigen::Index i = 0; i < d; ++i) {
    A(i, i) = -1.0;
    A(d, i) = 1.0 / s(i);
  }
  b(d) = 1.0;
  return Polytope(A, b);
}

Polytope cube(int d, double r = 1.0) { return Polytope::box(Vec::Constant(d, -r), Vec::Constant(d, r)); }

SamplerConfig cfg(int n, int burn, int thin) {
  SamplerConfig c;
  c.n_samples = n;
  c.burn_in = burn;
  c.thinning = thin;
  return c;
}

// Effective standard error of a per-coordinate mean from a correlated
// chain, estimated by batch means (independent of the sampler's own
// stderr_bound).
double batch_stderr(const std::vector<Vec>& xs, int coord, int batches = 20) {
  const int per = static_cast<int>(xs.size()) / batches;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0;
    for (int i = 0; i < per; ++i) s += xs[static_cast<size_t>(b * per + i)](coord);
    means.push_back(s / per);
  }
  double m = 0;
  for (double x : means) m += x;
  m /= batches;
  double v = 0;
  for (double x : means) v += (x - m) * (x - m);
  v /= batches - 1;
  return std::sqrt(v / batches);
}

// Random axis box with the given aspect ratio, then rotated.
Polytope rotated_box(Rng& rng, int d, double aspect) {
  std::vector<Vec> g;
  for (int i = 0; i < d; ++i) g.push_back(rng.gaussian(d));
  const Mat Q = gram_schmidt(g, d).matrix();
  Vec half(d);
  for (int i = 0; i < d; ++i) half(i) = std::pow(aspect, static_cast<double>(i) / (d - 1));
  Mat A(2 * d, d);
  Vec b(2 * d);
  for (int i = 0; i < d; ++i) {
    A.row(2 * i) = Q.col(i).transpose();
    A.row(2 * i + 1) = -Q.col(i).transpose();
    b(2 * i) = half(i);
    b(2 * i + 1) = half(i);
  }
  return Polytope(A, b);
}

}  // namespace

TEST_CASE("SamplerConfig defaults and validation") {
  const SamplerConfig c = SamplerConfig::defaults(3);
  CHECK(c.burn_in == 450);
  CHECK(c.thinning == 3);
  CHECK(c.n_samples == 1000);
  CHECK(SamplerConfig::defaults(20).n_samples == 2000);
  CHECK_THROWS_AS(cfg(0, 0, 1).validate(), InputError);
  CHECK_THROWS_AS(cfg(1, -1, 1).validate(), InputError);
  CHECK_THROWS_AS(cfg(1, 0, 0).validate(), InputError);
}

TEST_CASE("hit_and_run_move with injected randomness") {
  const Polytope P = Polytope::box(vec({-1}), vec({1}));
  PolytopeWalker w(P, vec({0}));
  WalkStats st;
  hit_and_run_move(w, vec({1}), 0.75, st);
  CHECK(w.point()(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(st.degenerate == 0);
}

TEST_CASE("degenerate chord leaves the point and counts") {
  struct Stuck final : ChordWalker {
    Vec x = vec({0.25, 0.5});
    int dim() const override { return 2; }
    const Vec& point() const override { return x; }
    Chord chord(const Vec&) override { return Chord{0.0, 0.0}; }
    void move(const Vec&, double) override { FAIL("moved on a zero chord"); }
  } w;
  WalkStats st;
  Rng rng(1);
  hit_and_run_step(w, AffineMap::identity(2), rng, st);
  CHECK(st.steps == 1);
  CHECK(st.degenerate == 1);
  CHECK(w.point()(0) == 0.25);
}

TEST_CASE("cube walk mean is near zero") {
  const Polytope P = cube(3);
  PolytopeWalker w(P, Vec::Zero(3));
  Rng rng(2024);
  WalkStats st;
  std::vector<Vec> xs;
  for (int i = 0; i < 100000; ++i) {
    hit_and_run_step(w, AffineMap::identity(3), rng, st);
    xs.push_back(w.point());
  }
  const Vec m = sample_mean(xs);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(m(i)) <= 3 * batch_stderr(xs, i));
}

TEST_CASE("sample_uniform cube covariance") {
  Rng rng(5);
  const auto xs = sample_uniform(cube(2), cfg(2000, 500, 5), std::nullopt, rng);
  REQUIRE(xs.size() == 2000);
  const Mat C = sample_covariance(xs, sample_mean(xs));
  // Var of x^2 on U[-1,1] is 1/5 - 1/9 = 4/45; thinning keeps samples nearly
  // independent, so the stderr of the diagonal is sqrt(4/45 / n).
  const double se = std::sqrt(4.0 / 45.0 / 2000.0);
  CHECK(std::abs(C(0, 0) - 1.0 / 3.0) <= 3 * se);
  CHECK(std::abs(C(1, 1) - 1.0 / 3.0) <= 3 * se);
  // Off-diagonal: Var(x y) = 1/9.
  CHECK(std::abs(C(0, 1)) <= 3 * std::sqrt(1.0 / 9.0 / 2000.0));
}

TEST_CASE("sample_uniform means") {
  Rng rng(6);
  auto xs = sample_uniform(simplex(vec({1, 1})), cfg(5000, 200, 2), std::nullopt, rng);
  Vec m = sample_mean(xs);
  CHECK(std::abs(m(0) - 1.0 / 3) <= 3 * batch_stderr(xs, 0));
  CHECK(std::abs(m(1) - 1.0 / 3) <= 3 * batch_stderr(xs, 1));

  xs = sample_uniform(Polytope::box(vec({0, 0}), vec({2, 1})), cfg(5000, 200, 2), std::nullopt, rng);
  m = sample_mean(xs);
  CHECK(std::abs(m(0) - 1.0) <= 3 * batch_stderr(xs, 0));
  CHECK(std::abs(m(1) - 0.5) <= 3 * batch_stderr(xs, 1));
}

TEST_CASE("samples are contained and deterministic") {
  const Polytope P = simplex(vec({3, 6, 1, 2}));
  const SamplerConfig c = SamplerConfig::defaults(4);
  Rng r1(77), r2(77);
  const auto a = sample_uniform(P, c, std::nullopt, r1);
  const auto b = sample_uniform(P, c, std::nullopt, r2);
  REQUIRE(a.size() == b.size());
  bool same = true;
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK((P.A() * a[i] - P.b()).maxCoeff() <= 1e-9);
    same = same && (a[i] == b[i]);
  }
  CHECK(same);
}

TEST_CASE("warm start must be inside") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_uniform(cube(2), cfg(10, 0, 1), vec({2, 0}), rng), InputError);
  const auto xs = sample_uniform(cube(2), cfg(10, 0, 1), vec({0.9, 0.9}), rng);
  CHECK(xs.size() == 10);
}

TEST_CASE("estimate_centroid examples") {
  Rng rng(8);
  for (int d = 1; d <= 6; ++d) {
    const CentroidEstimate e = estimate_centroid(cube(d), SamplerConfig::defaults(d), rng);
    CHECK(e.n == SamplerConfig::defaults(d).n_samples);
    CHECK(e.z.cwiseAbs().maxCoeff() <= 3 * e.stderr_bound);
  }
  CentroidEstimate e = estimate_centroid(simplex(vec({3, 6})), SamplerConfig::defaults(2), rng);
  CHECK(std::abs(e.z(0) - 1.0) <= 3 * e.stderr_bound);
  CHECK(std::abs(e.z(1) - 2.0) <= 3 * e.stderr_bound);
  e = estimate_centroid(simplex(vec({1, 1, 1})), SamplerConfig::defaults(3), rng);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(e.z(i) - 0.25) <= 3 * e.stderr_bound);
}

TEST_CASE("centroid consistency over seeded trials") {
  // Δ(s) has centroid s/(k+1); boxes have their center.
  struct Body {
    Polytope P;
    Vec c;
  };
  const std::vector<Body> bodies = {
      {simplex(vec({3, 6})), vec({1, 2})},
      {simplex(vec({1, 1, 1})), Vec::Constant(3, 0.25)},
      {Polytope::box(vec({0, -1, 2}), vec({1, 3, 2.5})), vec({0.5, 1, 2.25})},
  };
  for (const Body& body : bodies) {
    const int d = body.P.dim();
    int good = 0;
    for (int t = 0; t < 100; ++t) {
      Rng rng(1000 + t);
      const CentroidEstimate e = estimate_centroid(body.P, SamplerConfig::defaults(d), rng);
      if ((e.z - body.c).cwiseAbs().maxCoeff() <= 4 * e.stderr_bound) ++good;
    }
    CHECK(good >= 95);
  }
}

TEST_CASE("centroid repair stays inside") {
  // A single sample at a vertex has a mean on the boundary; push it outside
  // by hand through centroid_from_samples and check the repair in
  // estimate_centroid keeps every estimate within the body.
  Rng rng(3);
  const Polytope P = simplex(vec({1, 1e-3}));
  for (int t = 0; t < 20; ++t) {
    const CentroidEstimate e = estimate_centroid(P, cfg(50, 0, 1), rng);
    CHECK((P.A() * e.z - P.b()).maxCoeff() <= 1e-9);
  }
}

TEST_CASE("rounding_transform examples") {
  Rng rng(9);
  std::vector<Vec> xs;
  for (int i = 0; i < 20000; ++i) xs.push_back(vec({rng.uniform(-1, 1), rng.uniform(-1, 1)}));
  Rounding r = rounding_transform(xs);
  CHECK_FALSE(r.rank_deficient);
  const double s3 = std::sqrt(3.0);
  CHECK(r.map.matrix()(0, 0) == doctest::Approx(s3).epsilon(0.03));
  CHECK(r.map.matrix()(1, 1) == doctest::Approx(s3).epsilon(0.03));
  CHECK(std::abs(r.map.matrix()(0, 1)) < 0.05);

  std::vector<Vec> white;
  for (const Vec& x : xs) white.push_back(r.map.apply(x));
  r = rounding_transform(white);
  CHECK((r.map.matrix() - Mat::Identity(2, 2)).norm() < 1e-8);
  CHECK(r.map.offset().norm() < 1e-8);

  std::vector<Vec> thin;
  for (int i = 0; i < 5000; ++i) thin.push_back(vec({rng.uniform(0, 10), rng.uniform(0, 0.1)}));
  r = rounding_transform(thin);
  std::vector<Vec> mapped;
  for (const Vec& x : thin) mapped.push_back(r.map.apply(x));
  const Mat C = sample_covariance(mapped, sample_mean(mapped));
  CHECK((C - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 0.1);
}

TEST_CASE("rounding_transform rejects and flags") {
  std::vector<Vec> few(5, vec({1, 2}));
  CHECK_THROWS_AS(rounding_transform(few), InputError);
  std::vector<Vec> flat;
  for (int i = 0; i < 100; ++i) flat.push_back(vec({static_cast<double>(i), 1.0}));
  const Rounding r = rounding_transform(flat);
  CHECK(r.rank_deficient);
  CHECK((r.map.matrix() - Mat::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("rounding sandwich on elongated boxes") {
  Rng rng(12);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = 2 + trial % 3;
    const double aspect = std::pow(10.0, 1 + trial % 4);
    const Polytope P = rotated_box(rng, d, aspect);
    SamplerConfig c = SamplerConfig::defaults(d);
    c.rounding = true;
    PolytopeWalker w(P, Vec::Zero(d));
    const Rounding r = adaptive_rounding(w, c, rng);
    CHECK_FALSE(r.rank_deficient);
    std::vector<Vec> ys = sample_walk(w, c, r.map, rng);
    for (Vec& y : ys) y = r.map.apply(y);
    const EigenDecomposition e = symmetric_eigen(sample_covariance(ys, sample_mean(ys)));
    INFO("d=" << d << " aspect=" << aspect);
    CHECK(e.values(d - 1) / e.values(0) <= 4.0);
  }
}

TEST_CASE("projection walker") {
  // K = Δ((1, δ)) projected onto e1 is [0, 1].
  const double delta = 0.01;
  const Polytope K = simplex(vec({1, delta}));
  OrthoBasis S(2), L(2);
  S.push_back_orthogonalized(vec({0, 1}));
  L.push_back_orthogonalized(vec({1, 0}));
  ProjectionWalker w(K, S, L, vec({0.3}));
  const Chord ch = w.chord(vec({1}));
  CHECK(ch.lo == doctest::Approx(-0.3).epsilon(1e-9));
  CHECK(ch.hi == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(w.contains(vec({0.999})));
  CHECK_FALSE(w.contains(vec({1.01})));

  Rng rng(4);
  const auto ps = sample_walk(w, cfg(4000, 100, 1), AffineMap::identity(1), rng);
  double m = 0;
  for (const Vec& p : ps) {
    CHECK(p(0) >= -1e-9);
    CHECK(p(0) <= 1 + 1e-9);
    m += p(0);
  }
  m /= static_cast<double>(ps.size());
  CHECK(std::abs(m - 0.5) <= 0.03);

  // Oblique S in 3D: projection chord matches the LP support along L.
  const Polytope C = cube(3);
  OrthoBasis S3(3);
  S3.push_back_orthogonalized(vec({1, 1, 0}));
  const OrthoBasis L3 = complement_basis(S3, 3);
  ProjectionWalker w3(C, S3, L3, Vec::Zero(2));
  for (int i = 0; i < 2; ++i) {
    const Chord c3 = w3.chord(Vec::Unit(2, i));
    CHECK(c3.hi == doctest::Approx(support(C, L3[i])).epsilon(1e-9));
    CHECK(-c3.lo == doctest::Approx(support(C, -L3[i])).epsilon(1e-9));
  }
}
