// pvsearch: run, sweep, fit, verify.
// Exit codes: 0 success, 1 property failure, 2 config error.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "pvsearch/harness.hpp"
#include "pvsearch/verify.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kPropertyFailure = 1;
constexpr int kConfigError = 2;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string x;
  while (std::getline(ss, x, ',')) {
    x.erase(0, x.find_first_not_of(" \t"));
    x.erase(x.find_last_not_of(" \t") + 1);
    if (!x.empty()) out.push_back(x);
  }
  return out;
}

int default_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// Settings shared by run and sweep: config file first, then flags.
struct Settings {
  std::string config_file;
  std::map<std::string, std::string> flags;  // only the flags given
  std::string out;
  std::string format = "both";
  int threads = default_threads();

  void add_flags(CLI::App* app) {
    app->add_option("--config", config_file, "key=value config file; flags win");
    for (const char* key : {"d", "epsilon", "delta", "learner", "adversary", "rounds", "seed", "replicas"}) {
      app->add_option_function<std::string>(
          std::string("--") + key, [this, key](const std::string& v) { flags[key] = v; },
          fmt::format("override '{}'", key));
    }
    app->add_option_function<std::string>("--out", [this](const std::string& v) { flags["out"] = v; },
                                          "output directory");
    app->add_option_function<std::string>("--format", [this](const std::string& v) { flags["format"] = v; },
                                          "csv | json | both");
    app->add_option_function<std::string>("--threads", [this](const std::string& v) { flags["threads"] = v; },
                                          "worker threads");
  }

  // Merged key -> value map with flags taking precedence.
  std::map<std::string, std::string> merged() const {
    std::map<std::string, std::string> kv;
    if (!config_file.empty()) kv = pvs::read_config_file(config_file);
    for (const auto& [k, v] : flags) kv[k] = v;
    return kv;
  }

  // Pulls out, format and threads; everything else goes to the experiment config.
  std::map<std::string, std::string> take_io(std::map<std::string, std::string> kv) {
    if (auto it = kv.find("out"); it != kv.end()) {
      out = it->second;
      kv.erase(it);
    }
    if (auto it = kv.find("format"); it != kv.end()) {
      format = it->second;
      kv.erase(it);
    }
    if (auto it = kv.find("threads"); it != kv.end()) {
      try {
        threads = std::stoi(it->second);
      } catch (const std::exception&) {
        throw pvs::InputError("threads: not an integer: " + it->second);
      }
      if (threads < 1) throw pvs::InputError("threads must be >= 1");
      kv.erase(it);
    }
    if (format != "csv" && format != "json" && format != "both")
      throw pvs::InputError("format must be csv, json or both");
    return kv;
  }
};

int cmd_run(Settings& s) {
  pvs::ExperimentConfig cfg;
  for (const auto& [k, v] : s.take_io(s.merged())) pvs::apply_setting(cfg, k, v);
  cfg.validate();
  std::vector<pvs::ExperimentConfig> cfgs;
  for (int i = 0; i < cfg.replicas; ++i) {
    pvs::ExperimentConfig c = cfg;
    c.seed = pvs::replica_seed(cfg.seed, i);
    c.replicas = 1;
    cfgs.push_back(c);
  }
  const auto recs = pvs::run_all(cfgs, s.threads);
  bool sound = true;
  for (const auto& r : recs) {
    sound = sound && r.summary.soundness_violations == 0;
    std::cerr << fmt::format("{}: regret {} in {} rounds ({}), {:.2f}s\n", pvs::run_tag(r.config),
                             r.summary.total_regret, r.summary.rounds, r.summary.terminated_reason,
                             r.summary.wall_time);
    if (!s.out.empty()) {
      fs::create_directories(s.out);
      const fs::path base = fs::path(s.out) / pvs::run_tag(r.config);
      if (s.format != "json") pvs::emit_csv(r, base.string() + ".csv");
      if (s.format != "csv") pvs::emit_json(r, base.string() + ".json");
    } else if (s.format == "csv") {
      pvs::write_csv(r, std::cout);
    } else {
      std::cout << pvs::summary_json(r).dump(2) << '\n';
    }
  }
  return sound ? kOk : kPropertyFailure;
}

int cmd_sweep(Settings& s) {
  auto kv = s.take_io(s.merged());
  if (s.out.empty()) throw pvs::InputError("sweep needs --out");
  pvs::SweepSpec spec;
  auto take = [&](const char* key) {
    std::vector<std::string> v;
    if (auto it = kv.find(key); it != kv.end()) {
      v = split_list(it->second);
      kv.erase(it);
    }
    return v;
  };
  for (const auto& d : take("d")) {
    pvs::ExperimentConfig tmp;
    pvs::apply_setting(tmp, "d", d);
    spec.ds.push_back(tmp.d);
  }
  for (const auto& e : take("epsilon")) {
    pvs::ExperimentConfig tmp;
    pvs::apply_setting(tmp, "epsilon", e);
    spec.epsilons.push_back(tmp.epsilon);
  }
  spec.learners = take("learner");
  spec.adversaries = take("adversary");
  for (const auto& [k, v] : kv) pvs::apply_setting(spec.base, k, v);
  const auto cfgs = pvs::expand_sweep(spec);
  const auto recs = pvs::run_all(cfgs, s.threads);
  pvs::write_sweep(s.out, recs);
  bool sound = true;
  for (const auto& r : recs) sound = sound && r.summary.soundness_violations == 0;
  std::cout << fmt::format("{} runs written to {}\n", recs.size(), s.out);
  return sound ? kOk : kPropertyFailure;
}

int cmd_fit(const std::string& dir, const std::string& learner, const std::string& format) {
  const auto pts = pvs::read_sweep_points(dir, learner);
  const auto dl = pvs::fit_regret_constant(pts, pvs::RegretModel::d_log);
  const auto d2 = pvs::fit_regret_constant(pts, pvs::RegretModel::d2_log);
  const std::string preferred = dl.residual <= d2.residual ? "d_log" : "d2_log";
  if (format == "json") {
    nlohmann::json j = {{"schema", "v1"}, {"points", dl.n}, {"preferred", preferred}};
    for (const auto& [name, f] : {std::pair{"d_log", dl}, std::pair{"d2_log", d2}})
      j["models"][name] = {{"C", f.C}, {"residual", f.residual}, {"relative_residual", f.relative_residual},
                           {"poor_fit", f.poor_fit}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "model,C,residual,relative_residual,poor_fit\n";
    for (const auto& [name, f] : {std::pair{"d_log", dl}, std::pair{"d2_log", d2}})
      std::cout << fmt::format("{},{:.6g},{:.6g},{:.6g},{}\n", name, f.C, f.residual, f.relative_residual,
                               f.poor_fit ? 1 : 0);
    std::cout << "preferred," << preferred << '\n';
  }
  return kOk;
}

int cmd_verify(bool all, const std::string& only, std::uint64_t seed, int threads, const std::string& out) {
  pvs::VerifyOptions opt;
  opt.seed = seed;
  opt.threads = threads;
  if (!out.empty()) opt.out = out;
  std::vector<int> ids;
  if (!only.empty()) {
    for (const auto& x : split_list(only)) {
      int id = 0;
      try {
        id = std::stoi(x);
      } catch (const std::exception&) {
        throw pvs::InputError("--only: not a criterion id: " + x);
      }
      if (id < 1 || id > 11) throw pvs::InputError("--only: criteria are 1..11");
      ids.push_back(id);
    }
  } else if (!all) {
    ids = {1, 2, 3, 4, 5, 6};
  }
  bool ok = true;
  for (const auto& r : pvs::verify(opt, ids)) {
    std::cout << pvs::format_line(r) << std::endl;
    ok = ok && r.pass;
  }
  return ok ? kOk : kPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multidimensional binary search simulator"};
  app.require_subcommand(1);

  Settings run_s, sweep_s;
  auto* run = app.add_subcommand("run", "single experiment (replicas share the config)");
  run_s.add_flags(run);
  auto* sweep = app.add_subcommand("sweep", "grid over comma lists of d, epsilon, learner, adversary");
  sweep_s.add_flags(sweep);

  auto* fit = app.add_subcommand("fit", "fit regret laws over a sweep directory");
  std::string fit_dir, fit_learner = "projected_volume", fit_format = "csv";
  fit->add_option("--out,dir", fit_dir, "sweep output directory")->required();
  fit->add_option("--learner", fit_learner, "learner rows to fit ('' for all)");
  fit->add_option("--format", fit_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  auto* ver = app.add_subcommand("verify", "property suites; criteria 1-6 unless --all or --only");
  bool ver_all = false;
  std::string ver_only, ver_out;
  std::uint64_t ver_seed = pvs::VerifyOptions{}.seed;
  int ver_threads = default_threads();
  ver->add_flag("--all", ver_all, "also run the experiment criteria 7-11");
  ver->add_option("--only", ver_only, "comma list of criterion ids");
  ver->add_option("--seed", ver_seed, "seed of the geometry suites");
  ver->add_option("--threads", ver_threads, "worker threads")->check(CLI::PositiveNumber);
  ver->add_option("--out", ver_out, "write experiment runs here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(run_s);
    if (*sweep) return cmd_sweep(sweep_s);
    if (*fit) return cmd_fit(fit_dir, fit_learner, fit_format);
    if (*ver) return cmd_verify(ver_all, ver_only, ver_seed, ver_threads, ver_out);
  } catch (const pvs::InputError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPropertyFailure;
  }
  return kOk;
}
