#include "pvsearch/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "pvsearch/baselines.hpp"
#include "pvsearch/bodies.hpp"
#include "pvsearch/sampling.hpp"

namespace pvs {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Mix of round polygons and ones squashed up to 100x along a random axis.
std::vector<Polytope> polygon_set(std::uint64_t seed, int n) {
  Rng rng(seed, 0x901);
  std::vector<Polytope> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int m = 3 + static_cast<int>(rng.uniform() * 10);
    Polytope P = bodies::random_polygon(rng, m);
    if (i % 3 == 2) P = bodies::squash(P, rng.unit_vector(2), std::pow(10.0, rng.uniform(-2.0, 0.0)));
    out.push_back(std::move(P));
  }
  return out;
}

std::string csv_text(const RunRecord& r) {
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

// Is the L-coordinate point p in the projection of K along v?
bool in_shadow(const Polytope& K, const OrthoBasis& L, const Vec& v, const Vec& p) {
  const Vec x = L.lift(p);
  const Vec slack = K.slack(x);
  const Vec av = K.A() * v;
  double lo = -INFINITY, hi = INFINITY;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    if (std::abs(av(i)) < 1e-15) {
      if (slack(i) < 0.0) return false;
      continue;
    }
    const double t = slack(i) / av(i);
    if (av(i) > 0.0)
      hi = std::min(hi, t);
    else
      lo = std::max(lo, t);
  }
  return lo <= hi;
}

double mean_of(const std::vector<RunRecord>& rs, int d, const std::string& learner) {
  double sum = 0.0;
  int n = 0;
  for (const RunRecord& r : rs) {
    if (r.config.d != d || r.config.learner != learner) continue;
    sum += static_cast<double>(r.summary.total_regret);
    ++n;
  }
  return n ? sum / n : NAN;
}

}  // namespace

std::string format_line(const CriterionResult& r) {
  return fmt::format("criterion {:>2} {} {}: {} ({:.1f}s)", r.id, r.pass ? "PASS" : "FAIL", r.name, r.detail,
                     r.seconds);
}

CriterionResult check_simplex_centroid(const VerifyOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult res{1, "simplex centroid", false, "", 0.0};
  Rng rng(opt.seed, 1);
  int ok = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const int k = 2 + t % 5;
    Vec s(k);
    for (int i = 0; i < k; ++i) s(i) = rng.uniform(0.3, 2.0);
    const Polytope P = bodies::simplex(s);
    const CentroidEstimate est = estimate_centroid(P, SamplerConfig::defaults(k), rng);
    const Vec err = (est.z - s / (k + 1.0)).cwiseAbs();
    ok += err.maxCoeff() <= 4.0 * est.stderr_bound;
  }
  double exact_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Vec s = bodies::vec({rng.uniform(0.1, 5.0), rng.uniform(0.1, 5.0)});
    exact_err = std::max(exact_err, (exact_polygon(bodies::simplex(s)).centroid - s / 3.0).cwiseAbs().maxCoeff());
  }
  res.pass = ok >= 0.95 * trials && exact_err <= 1e-10;
  res.detail = fmt::format("{}/{} sampled trials within 4 stderr; exact 2D error {:.2e}", ok, trials, exact_err);
  res.seconds = since(t0);
  return res;
}

CriterionResult check_grunbaum(const VerifyOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult res{2, "centroid cuts split area", false, "", 0.0};
  const double lo = 1.0 / std::exp(1.0) - 0.01, hi = 1.0 - 1.0 / std::exp(1.0) + 0.01;
  Rng rng(opt.seed, 2);
  int bad = 0;
  double worst = 1.0;
  for (const Polytope& K : polygon_set(opt.seed, 200)) {
    const Polygon2D poly = exact_polygon(K);
    const Vec u = rng.unit_vector(2);
    const double c = u.dot(poly.centroid);
    const double a = exact_polygon(add_halfspace(K, u, c, CutSense::ge)).area / poly.area;
    const double b = exact_polygon(add_halfspace(K, u, c, CutSense::le)).area / poly.area;
    worst = std::min({worst, a, b});
    if (std::min(a, b) < lo || std::max(a, b) > hi || std::abs(a + b - 1.0) > 1e-9) ++bad;
  }
  res.pass = bad == 0;
  res.detail = fmt::format("200 bodies, {} outside [{:.4f}, {:.4f}]; smallest side {:.4f}", bad, lo, hi, worst);
  res.seconds = since(t0);
  return res;
}

CriterionResult check_directional_grunbaum(const VerifyOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult res{3, "directional widths after a centroid cut", false, "", 0.0};
  Rng rng(opt.seed, 3);
  int bad = 0;
  long checks = 0;
  double worst = INFINITY;
  for (const Polytope& K : polygon_set(opt.seed, 200)) {
    const Vec u = rng.unit_vector(2);
    const double c = u.dot(exact_polygon(K).centroid);
    const Polytope halves[2] = {add_halfspace(K, u, c, CutSense::ge), add_halfspace(K, u, c, CutSense::le)};
    for (int j = 0; j < 50; ++j) {
      const Vec v = rng.unit_vector(2);
      const double w = width(K, v);
      for (const Polytope& H : halves) {
        const double wh = width(H, v);
        ++checks;
        worst = std::min(worst, wh / w);
        if (wh < w / 3.0 - 1e-7) ++bad;
      }
    }
  }
  res.pass = bad == 0;
  res.detail = fmt::format("{} checks, {} violations; smallest width ratio {:.4f} (bound 1/3)", checks, bad, worst);
  res.seconds = since(t0);
  return res;
}

CriterionResult check_approximate_grunbaum(const VerifyOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult res{4, "off-centroid cuts", false, "", 0.0};
  const double floor_frac = std::exp(-2.0);
  Rng rng(opt.seed, 4);
  const auto set = polygon_set(opt.seed, 200);
  int bad = 0;
  double worst = 1.0;
  for (int i = 0; i < 100; ++i) {
    const Polytope& K = set[static_cast<std::size_t>(i)];
    const Polygon2D poly = exact_polygon(K);
    const Vec u = rng.unit_vector(2);
    const double w = width(K, u);
    const double c = u.dot(poly.centroid);
    for (double m : {0.2, 0.6, 1.0}) {
      const double off = m * w / 9.0;
      for (const auto& [at, sense] : {std::pair{c + off, CutSense::ge}, std::pair{c - off, CutSense::le}}) {
        const double a = exact_polygon(add_halfspace(K, u, at, sense)).area;
        worst = std::min(worst, a / poly.area);
        if (a < floor_frac * poly.area - 1e-7) ++bad;
      }
    }
  }
  res.pass = bad == 0;
  res.detail = fmt::format("600 cuts, {} violations; smallest kept fraction {:.4f} (bound {:.4f})", bad, worst,
                           floor_frac);
  res.seconds = since(t0);
  return res;
}

CriterionResult check_cylindrification(const VerifyOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult res{5, "projection volume vs min width", false, "", 0.0};
  Rng rng(opt.seed, 5);
  const int n_mc = 20000;
  int bad = 0, checks = 0;
  double tightest = 0.0;
  for (int b = 0; b < 50; ++b) {
    const int d = b < 25 ? 2 : 3;
    Polytope K = bodies::random_body(rng, d, d + 3 + static_cast<int>(rng.uniform() * 8));
    if (b % 2 == 1) K = bodies::squash(K, rng.unit_vector(d), std::pow(10.0, rng.uniform(-1.5, 0.0)));

    std::vector<Vec> probes;
    for (int i = 0; i < d; ++i) probes.push_back(Vec::Unit(d, i));
    for (int i = 0; i < 200; ++i) probes.push_back(rng.unit_vector(d));
    double delta_hat = INFINITY;
    Vec thin;
    for (const Vec& v : probes) {
      const double w = width(K, v);
      if (w < delta_hat) {
        delta_hat = w;
        thin = v;
      }
    }

    const auto [lo, hi] = bounding_box(K);
    const VolumeEstimate vk = mc_volume(K, lo, hi, n_mc, rng);
    const double factor = d * (d + 1.0) / delta_hat;

    std::vector<Vec> normals = {thin};
    for (int i = 0; i < 3; ++i) normals.push_back(rng.unit_vector(d));
    for (const Vec& v : normals) {
      OrthoBasis full(d);
      full.push_back_orthogonalized(v);
      for (int i = 0; i < d; ++i) full.push_back_orthogonalized(Vec::Unit(d, i));
      OrthoBasis L(d);
      for (int i = 1; i < d; ++i) L.push_back_orthogonalized(full[i]);
      Vec plo(d - 1), phi(d - 1);
      for (int i = 0; i < d - 1; ++i) std::tie(plo(i), phi(i)) = support_interval(K, L[i]);
      const VolumeEstimate vp =
          mc_volume([&](const Vec& p) { return in_shadow(K, L, full[0], p); }, plo, phi, n_mc, rng);
      const double se = std::hypot(vp.std_error, factor * vk.std_error);
      const double rhs = factor * vk.estimate + 3.0 * se;
      ++checks;
      tightest = std::max(tightest, vp.estimate / rhs);
      if (vp.estimate > rhs) ++bad;
    }
  }
  res.pass = bad == 0;
  res.detail = fmt::format("{} subspaces over 50 bodies, {} violations; largest lhs/rhs {:.4f}", checks, bad,
                           tightest);
  res.seconds = since(t0);
  return res;
}

CriterionResult check_ellipsoid_update(const VerifyOptions& opt) {
  const auto t0 = Clock::now();
  CriterionResult res{6, "ellipsoid update", false, "", 0.0};
  Rng rng(opt.seed, 6);
  double worst_factor = 0.0;
  int outside = 0, over_bound = 0, steps = 0;
  for (int d = 2; d <= 8; ++d) {
    const Mat B = Mat::NullaryExpr(d, d, [&] { return rng.normal(); });
    Ellipsoid E{rng.gaussian(d), B * B.transpose() + 0.1 * Mat::Identity(d, d)};
    const double want = ellipsoid_volume_ratio(d);
    if (want > std::exp(-1.0 / (2.0 * (d + 1.0)))) ++over_bound;
    for (int step = 0; step < 10; ++step, ++steps) {
      const Vec u = rng.unit_vector(d);
      const CutSense keep = rng.uniform() < 0.5 ? CutSense::le : CutSense::ge;
      const Ellipsoid next = ellipsoid_update(E, u, keep);
      worst_factor = std::max(worst_factor, std::abs(E.volume_factor_to(next) - want));
      const Mat Lc = E.shape.llt().matrixL();
      for (int i = 0; i < 500; ++i) {
        const Vec y = rng.unit_vector(d) * std::pow(rng.uniform(), 1.0 / d);
        Vec x = E.center + Lc * y;
        const bool kept = keep == CutSense::le ? u.dot(x) <= u.dot(E.center) : u.dot(x) >= u.dot(E.center);
        if (!kept) x = 2.0 * E.center - x;
        if (next.quadratic_form(x) > 1.0 + 1e-7) ++outside;
      }
      E = next;
    }
  }
  const double f2 = ellipsoid_volume_ratio(2);
  res.pass = worst_factor <= 1e-10 && outside == 0 && over_bound == 0;
  res.detail = fmt::format(
      "{} steps d=2..8, max factor error {:.1e}, {} points outside; d=2 factor {:.4f} vs e^(-1/4) = {:.4f}, "
      "both within e^(-1/6) = {:.4f}",
      steps, worst_factor, outside, f2, std::exp(-0.25), std::exp(-1.0 / 6.0));
  res.seconds = since(t0);
  return res;
}

std::vector<CriterionResult> verify_geometry(const VerifyOptions& opt) {
  return {check_simplex_centroid(opt),     check_grunbaum(opt),          check_directional_grunbaum(opt),
          check_approximate_grunbaum(opt), check_cylindrification(opt), check_ellipsoid_update(opt)};
}

std::vector<CriterionResult> verify_experiments(const VerifyOptions& opt) {
  auto grid = [&](std::vector<int> ds, std::vector<double> es, std::vector<std::string> ls,
                  std::vector<std::string> as, std::uint64_t seed, int replicas) {
    SweepSpec s;
    s.base.max_rounds = opt.max_rounds;
    s.base.seed = seed;
    s.base.replicas = replicas;
    s.ds = std::move(ds);
    s.epsilons = std::move(es);
    s.learners = std::move(ls);
    s.adversaries = std::move(as);
    return expand_sweep(s);
  };
  auto run = [&](const std::vector<ExperimentConfig>& cfgs, const char* name, double& secs) {
    const auto t0 = Clock::now();
    auto recs = run_all(cfgs, opt.threads);
    secs = since(t0);
    if (opt.out) write_sweep(*opt.out / name, recs);
    return recs;
  };

  double t8 = 0, t7 = 0, t9 = 0, t10 = 0;
  const auto c8 = run(grid({2, 3, 4, 5}, {0.05, 0.01}, {"projected_volume"}, {"fixed_random", "greedy_width"}, 1, 10),
                      "regret", t8);
  const auto c7 = run(grid({2}, {0.01}, {"projected_volume", "centroid", "ellipsoid"}, {"fixed_random"}, 101, 20),
                      "fixed_d2", t7);
  const double eps9 = 1.0 / 128.0;
  const auto c9 =
      run(grid({2, 3, 4}, {eps9}, {"projected_volume", "ellipsoid"}, {"round_robin_adaptive"}, 1, 1), "lower", t9);
  const auto c10 =
      run(grid({4, 5, 6}, {0.01}, {"centroid", "projected_volume"}, {"simplex_counterexample"}, 1, 10), "separation",
          t10);

  std::vector<CriterionResult> out;

  {  // 7
    CriterionResult r{7, "soundness of fixed-theta runs", false, "", t7};
    long runs = 0, viol = 0, degenerate = 0;
    for (const auto* set : {&c8, &c7})
      for (const RunRecord& rec : *set) {
        ++runs;
        viol += rec.summary.soundness_violations;
        degenerate += rec.summary.terminated_reason == "degenerate";
      }
    r.pass = runs >= 200 && viol == 0;
    std::string cmp;
    for (const char* l : {"projected_volume", "centroid", "ellipsoid"})
      cmp += fmt::format(" {}={:.1f}", l, mean_of(c7, 2, l));
    r.detail = fmt::format("{} runs, {} violations, {} degenerate stops; d=2 eps=0.01 mean regret:{}", runs, viol,
                           degenerate, cmp);
    out.push_back(r);
  }

  {  // 8
    CriterionResult r{8, "regret bound and growth law", false, "", t8};
    int over = 0, degenerate = 0;
    double worst = 0.0;
    for (const RunRecord& rec : c8) {
      const double ratio = rec.summary.total_regret / regret_bound(rec.config.d, rec.config.epsilon);
      worst = std::max(worst, ratio);
      over += ratio > 1.0;
      degenerate += rec.summary.terminated_reason == "degenerate";
    }
    const auto pts = regret_points(c8);
    const FitResult dl = fit_regret_constant(pts, RegretModel::d_log);
    const FitResult d2 = fit_regret_constant(pts, RegretModel::d2_log);
    r.pass = over == 0 && dl.residual < d2.residual;
    r.detail = fmt::format(
        "{} runs, {} over 50 d ln(d/eps) (max ratio {:.3f}), {} degenerate; d_log C={:.3f} residual {:.3f}, "
        "d2_log C={:.3f} residual {:.3f}",
        c8.size(), over, worst, degenerate, dl.C, dl.residual, d2.C, d2.residual);
    out.push_back(r);
  }

  {  // 9
    CriterionResult r{9, "round-robin lower bound", true, "", t9};
    std::string parts;
    for (const RunRecord& rec : c9) {
      const int d = rec.config.d;
      const long need =
          static_cast<long>(d * std::floor(std::log2(1.0 / (2.0 * eps9 * std::sqrt(static_cast<double>(d)))))) - d;
      if (rec.summary.total_regret < need) r.pass = false;
      parts += fmt::format("{}{} d={} {}>={}", parts.empty() ? "" : ", ", rec.config.learner, d,
                           rec.summary.total_regret, need);
    }
    r.detail = parts;
    out.push_back(r);
  }

  {  // 10
    CriterionResult r{10, "centroid vs projected volume under the simplex adversary", true, "", t10};
    std::string parts;
    double prev = -INFINITY;
    for (int d : {4, 5, 6}) {
      const double c = mean_of(c10, d, "centroid");
      const double p = mean_of(c10, d, "projected_volume");
      const double ratio = c / p;
      if (!(ratio >= 1.5) || ratio < prev) r.pass = false;
      prev = ratio;
      parts += fmt::format("{}d={} centroid {:.1f} pv {:.1f} ratio {:.2f}", parts.empty() ? "" : "; ", d, c, p,
                           ratio);
    }
    r.detail = parts + " (need >= 1.50, non-decreasing)";
    out.push_back(r);
  }

  {  // 11
    const auto t0 = Clock::now();
    CriterionResult r{11, "replay determinism", true, "", 0.0};
    std::vector<const RunRecord*> picks;
    std::set<std::string> seen;
    for (const auto* set : {&c8, &c9, &c10})
      for (const RunRecord& rec : *set)
        if (seen.insert(rec.config.adversary + rec.config.learner).second) picks.push_back(&rec);
    int same = 0;
    for (const RunRecord* rec : picks) same += csv_text(run_experiment(rec->config)) == csv_text(*rec);
    r.pass = same == static_cast<int>(picks.size());
    r.detail = fmt::format("{}/{} replayed runs byte-identical", same, picks.size());
    r.seconds = since(t0);
    out.push_back(r);
  }
  return out;
}

std::vector<CriterionResult> verify(const VerifyOptions& opt, const std::vector<int>& ids) {
  auto want = [&](int id) { return ids.empty() || std::find(ids.begin(), ids.end(), id) != ids.end(); };
  std::vector<CriterionResult> out;
  using Check = CriterionResult (*)(const VerifyOptions&);
  const Check geometry[] = {check_simplex_centroid,     check_grunbaum,          check_directional_grunbaum,
                            check_approximate_grunbaum, check_cylindrification, check_ellipsoid_update};
  for (int id = 1; id <= 6; ++id)
    if (want(id)) out.push_back(geometry[id - 1](opt));
  bool any = false;
  for (int id = 7; id <= 11; ++id) any = any || want(id);
  if (any)
    for (CriterionResult& r : verify_experiments(opt))
      if (want(r.id)) out.push_back(std::move(r));
  return out;
}

}  // namespace pvs
