#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pvsearch/harness.hpp"

using namespace pvs;

namespace {

std::string csv_of(const RunRecord& r) {
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string x;
    while (std::getline(ls, x, ',')) f.push_back(x);
    out.push_back(f);
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pvsearch_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

ExperimentConfig small(const std::string& learner, const std::string& adversary, int d, double eps) {
  ExperimentConfig c;
  c.d = d;
  c.epsilon = eps;
  c.learner = learner;
  c.adversary = adversary;
  c.max_rounds = 2000;
  return c;
}

}  // namespace

TEST_CASE("config validation and delta policies") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.d = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c.d = 17;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = ExperimentConfig{};
  c.epsilon = 1.0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = ExperimentConfig{};
  c.max_rounds = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = ExperimentConfig{};
  c.learner = "oracle";
  CHECK_THROWS_AS(c.validate(), InputError);

  c = ExperimentConfig{};
  c.d = 3;
  c.epsilon = 0.1;
  CHECK(c.delta() == doctest::Approx(0.1 / 6));
  c.delta_policy = DeltaPolicy::paper_main;
  CHECK(c.delta() == doctest::Approx(0.01 / (16.0 * 3 * 16)));
  c.delta_policy = DeltaPolicy::paper_appendix;
  const double da = 0.01 / (16.0 * std::pow(3.0, 1.5) * 64.0);
  CHECK(c.delta() == doctest::Approx(da));
  CHECK(c.rho() == doctest::Approx(da * da / 8.0));
  apply_setting(c, "delta", "0.002");
  CHECK(c.delta_policy == DeltaPolicy::explicit_value);
  CHECK(c.delta() == 0.002);
}

TEST_CASE("settings and config files") {
  ExperimentConfig c;
  apply_setting(c, "d", "4");
  apply_setting(c, "epsilon", " 0.05 ");
  apply_setting(c, "rounds", "77");
  apply_setting(c, "seed", "12");
  apply_setting(c, "phi_estimate", "on");
  apply_setting(c, "n_samples", "300");
  CHECK(c.d == 4);
  CHECK(c.epsilon == 0.05);
  CHECK(c.max_rounds == 77);
  CHECK(c.seed == 12);
  CHECK(c.phi_estimate);
  CHECK(c.n_samples == 300);
  CHECK_THROWS_AS(apply_setting(c, "d", "four"), InputError);
  CHECK_THROWS_AS(apply_setting(c, "epsilon", "0.1x"), InputError);
  CHECK_THROWS_AS(apply_setting(c, "colour", "red"), InputError);
  CHECK_THROWS_AS(apply_setting(c, "seed", "-1"), InputError);

  const auto dir = scratch_dir("config");
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "a.cfg");
    f << "# experiment\nd = 3\nlearner=centroid  # trailing\n\nepsilon=0.2\n";
  }
  const auto kv = read_config_file(dir / "a.cfg");
  REQUIRE(kv.size() == 3);
  CHECK(kv.at("d") == "3");
  CHECK(kv.at("learner") == "centroid");
  {
    std::ofstream f(dir / "b.cfg");
    f << "d=3\njust words\n";
  }
  try {
    read_config_file(dir / "b.cfg");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("b.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(read_config_file(dir / "missing.cfg"), InputError);
}

TEST_CASE("1-D halving from [-1, 1]") {
  // Widths 2, 1, 0.5: at most three guesses can be off by more than 0.25.
  ExperimentConfig c = small("projected_volume", "fixed_random", 1, 0.25);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    c.seed = seed;
    FixedThetaEnvironment env(default_body("fixed_random", 1), 0.25, Vec::Constant(1, 0.6),
                              FixedThetaEnvironment::Directions::random, seed);
    const RunRecord r = run_experiment(c, env);
    CHECK(r.summary.total_regret <= 3);
    CHECK(r.summary.soundness_violations == 0);
    CHECK(r.summary.terminated_reason == "converged");
    CHECK(r.summary.confirmation_flags == 0);
  }
}

TEST_CASE("empty record gives a header-only CSV") {
  RunRecord r;
  CHECK(csv_of(r) == "t,u,x,side,mistake,n_small,n_t_flag,min_width,phi_mc\n");
}

TEST_CASE("short fixed run: rows, JSON and CSV agree") {
  ExperimentConfig c = small("projected_volume", "fixed_random", 3, 0.05);
  c.max_rounds = 3;
  c.seed = 9;
  const RunRecord r = run_experiment(c);
  CHECK(r.summary.terminated_reason == "max_rounds");
  const auto rows = parse_csv(csv_of(r));
  REQUIRE(rows.size() == 4);
  long mistakes = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 9);
    CHECK(rows[i][0] == std::to_string(i));
    mistakes += rows[i][4] == "1";
  }
  const auto j = summary_json(r);
  CHECK(j["schema"] == "v1");
  CHECK(j["summary"]["total_regret"].get<long>() == mistakes);
  CHECK(j["summary"]["rounds"].get<long>() == 3);
  CHECK_FALSE(j["summary"].contains("wall_time"));
}

TEST_CASE("reruns with the same seed are byte-identical") {
  const auto dir = scratch_dir("replay");
  std::filesystem::create_directories(dir);
  for (const std::string adv : {"fixed_random", "greedy_width", "round_robin_adaptive", "simplex_counterexample"}) {
    ExperimentConfig c = small("projected_volume", adv, 3, 0.05);
    c.max_rounds = 150;
    c.seed = 4;
    const RunRecord a = run_experiment(c);
    const RunRecord b = run_experiment(c);
    emit_csv(a, dir / "a.csv");
    emit_csv(b, dir / "b.csv");
    emit_json(a, dir / "a.json");
    emit_json(b, dir / "b.json");
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(slurp(dir / "a.csv").size() > 100);
  }
}

TEST_CASE("emit reports the failing path") {
  RunRecord r;
  try {
    emit_csv(r, "/nonexistent-dir/x.csv");
    FAIL("expected failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/x.csv") != std::string::npos);
  }
}

TEST_CASE("fixed runs in d=2 stay sound and under the bound") {
  for (const std::string learner : {"projected_volume", "centroid", "ellipsoid"}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      ExperimentConfig c = small(learner, "fixed_random", 2, 0.01);
      c.seed = seed;
      const RunRecord r = run_experiment(c);
      CAPTURE(learner);
      CHECK(r.summary.soundness_violations == 0);
      CHECK(r.summary.total_regret <= regret_bound(2, 0.01));
      CHECK(r.summary.terminated_reason == "converged");
      CHECK(r.summary.confirmation_flags == 0);
    }
  }
}

TEST_CASE("adaptive runs are recounted against theta*") {
  ExperimentConfig c = small("projected_volume", "round_robin_adaptive", 2, 1.0 / 128);
  const RunRecord r = run_experiment(c);
  REQUIRE(r.summary.theta.size() == 2);
  long m = 0;
  for (const RoundRow& row : r.rows) {
    const bool expect = std::abs(row.x - row.u.dot(r.summary.theta)) > c.epsilon;
    CHECK(row.mistake == expect);
    m += expect;
  }
  CHECK(r.summary.total_regret == m);
  const double floor_log = std::floor(std::log2(1.0 / (2.0 * c.epsilon * std::sqrt(2.0))));
  CHECK(m >= 2 * floor_log - 2);
}

TEST_CASE("simplex adversary ends the run") {
  ExperimentConfig c = small("centroid", "simplex_counterexample", 3, 0.05);
  const RunRecord r = run_experiment(c);
  CHECK(r.summary.terminated_reason == "adversary_finished");
  CHECK(r.summary.total_regret > 0);
}

TEST_CASE("regret fit") {
  std::vector<RegretPoint> pts;
  for (int d = 2; d <= 5; ++d)
    for (double e : {0.05, 0.01}) pts.push_back({d, e, 7.0 * d * std::log(d / e)});
  const FitResult f = fit_regret_constant(pts, RegretModel::d_log);
  CHECK(f.C == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(f.residual == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_FALSE(f.poor_fit);
  CHECK(f.n == 8);

  std::vector<RegretPoint> sq;
  for (int d = 2; d <= 12; d += 2)
    for (double e : {0.05, 0.01}) sq.push_back({d, e, 3.0 * d * d * std::log(1.0 / (e * std::sqrt(d)))});
  const FitResult wrong = fit_regret_constant(sq, RegretModel::d_log);
  const FitResult right = fit_regret_constant(sq, RegretModel::d2_log);
  CHECK(wrong.poor_fit);
  CHECK(right.C == doctest::Approx(3.0));
  CHECK(right.residual < 1e-9 * wrong.residual);

  pts.resize(3);
  CHECK_THROWS_AS(fit_regret_constant(pts, RegretModel::d_log), InputError);
}

TEST_CASE("sweep: grid order, threads, files") {
  SweepSpec s;
  s.base.max_rounds = 60;
  s.base.replicas = 2;
  s.base.seed = 5;
  s.ds = {2, 3};
  s.epsilons = {0.05};
  s.learners = {"projected_volume", "ellipsoid"};
  s.adversaries = {"fixed_random"};
  const auto cfgs = expand_sweep(s);
  REQUIRE(cfgs.size() == 8);
  CHECK(cfgs[0].d == 2);
  CHECK(cfgs[0].learner == "projected_volume");
  CHECK(cfgs[0].seed == 5);
  CHECK(cfgs[1].seed == 6);
  CHECK(cfgs[2].learner == "ellipsoid");
  CHECK(cfgs[7].d == 3);

  const auto serial = run_all(cfgs, 1);
  const auto parallel = run_all(cfgs, 3);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < cfgs.size(); ++i) CHECK(csv_of(serial[i]) == csv_of(parallel[i]));

  const auto dir = scratch_dir("sweep");
  write_sweep(dir, serial);
  CHECK(std::filesystem::exists(dir / "runs" / (run_tag(cfgs[0]) + ".csv")));
  CHECK(std::filesystem::exists(dir / "runs" / (run_tag(cfgs[0]) + ".json")));
  const auto all = read_sweep_points(dir);
  const auto pv = read_sweep_points(dir, "projected_volume");
  CHECK(all.size() == 8);
  REQUIRE(pv.size() == 4);
  CHECK(pv[0].regret == serial[0].summary.total_regret);
  CHECK(pv[3].d == 3);
}
