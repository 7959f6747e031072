#include "pvsearch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "pvsearch/baselines.hpp"
#include "pvsearch/projected_volume.hpp"

namespace pvs {

namespace {

const std::vector<std::string> kLearners = {"projected_volume", "centroid", "ellipsoid"};
const std::vector<std::string> kAdversaries = {"fixed_random", "round_robin_adaptive", "simplex_counterexample",
                                               "greedy_width"};

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw InputError(fmt::format("{}: not a number: '{}'", key, v));
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw InputError(fmt::format("{}: not an integer: '{}'", key, v));
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw InputError(fmt::format("{}: not a boolean: '{}'", key, v));
}

bool known(const std::vector<std::string>& names, const std::string& s) {
  return std::find(names.begin(), names.end(), s) != names.end();
}

}  // namespace

std::string to_string(DeltaPolicy p) {
  switch (p) {
    case DeltaPolicy::practical: return "practical";
    case DeltaPolicy::paper_main: return "paper_main";
    case DeltaPolicy::paper_appendix: return "paper_appendix";
    case DeltaPolicy::explicit_value: return "explicit";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (d < 1 || d > 16) throw InputError(fmt::format("d must be in [1, 16], got {}", d));
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError(fmt::format("epsilon must be in (0, 1), got {}", epsilon));
  if (max_rounds < 1) throw InputError("rounds must be >= 1");
  if (replicas < 1) throw InputError("replicas must be >= 1");
  if (confirmation_rounds < 0) throw InputError("confirmation_rounds must be >= 0");
  if (delta_policy == DeltaPolicy::explicit_value && !(delta_value > 0.0))
    throw InputError("explicit delta must be positive");
  if (!known(kLearners, learner)) throw InputError("unknown learner: " + learner);
  if (!known(kAdversaries, adversary)) throw InputError("unknown adversary: " + adversary);
  if (n_samples && *n_samples < 1) throw InputError("n_samples must be >= 1");
  if (burn_in && *burn_in < 0) throw InputError("burn_in must be >= 0");
  if (thinning && *thinning < 1) throw InputError("thinning must be >= 1");
}

double ExperimentConfig::delta() const {
  const double dd = d;
  switch (delta_policy) {
    case DeltaPolicy::practical: return epsilon / (2.0 * dd);
    case DeltaPolicy::paper_main: return epsilon * epsilon / (16.0 * dd * (dd + 1.0) * (dd + 1.0));
    case DeltaPolicy::paper_appendix:
      return epsilon * epsilon / (16.0 * std::pow(dd, 1.5) * std::pow(dd + 1.0, 3.0));
    case DeltaPolicy::explicit_value: return delta_value;
  }
  return 0.0;
}

double ExperimentConfig::rho() const {
  if (delta_policy == DeltaPolicy::paper_appendix) {
    const double dl = delta();
    return dl * dl / (2.0 * (d + 1.0));
  }
  return epsilon / (8.0 * (d + 1.0) * (d + 1.0));
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "d") {
    cfg.d = static_cast<int>(parse_int(key, v));
  } else if (key == "epsilon") {
    cfg.epsilon = parse_double(key, v);
  } else if (key == "delta") {
    if (v == "practical") {
      cfg.delta_policy = DeltaPolicy::practical;
    } else if (v == "paper_main") {
      cfg.delta_policy = DeltaPolicy::paper_main;
    } else if (v == "paper_appendix") {
      cfg.delta_policy = DeltaPolicy::paper_appendix;
    } else {
      cfg.delta_policy = DeltaPolicy::explicit_value;
      cfg.delta_value = parse_double(key, v);
    }
  } else if (key == "learner") {
    cfg.learner = v;
  } else if (key == "adversary") {
    cfg.adversary = v;
  } else if (key == "rounds" || key == "max_rounds") {
    cfg.max_rounds = static_cast<long>(parse_int(key, v));
  } else if (key == "seed") {
    const long long s = parse_int(key, v);
    if (s < 0) throw InputError("seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (key == "replicas") {
    cfg.replicas = static_cast<int>(parse_int(key, v));
  } else if (key == "n_samples") {
    cfg.n_samples = static_cast<int>(parse_int(key, v));
  } else if (key == "burn_in") {
    cfg.burn_in = static_cast<int>(parse_int(key, v));
  } else if (key == "thinning") {
    cfg.thinning = static_cast<int>(parse_int(key, v));
  } else if (key == "enforce_rho") {
    cfg.enforce_rho = parse_bool(key, v);
  } else if (key == "phi_estimate") {
    cfg.phi_estimate = parse_bool(key, v);
  } else if (key == "confirmation_rounds") {
    cfg.confirmation_rounds = static_cast<int>(parse_int(key, v));
  } else {
    throw InputError("unknown setting: " + key);
  }
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot read config file {}", path.string()));
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      throw InputError(fmt::format("{}:{}: expected key=value", path.string(), lineno));
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::unique_ptr<Learner> make_learner(const ExperimentConfig& cfg, const Polytope& K0, std::uint64_t seed) {
  if (cfg.learner == "ellipsoid") return std::make_unique<EllipsoidLearner>(K0, cfg.epsilon);
  PvOptions opt;
  opt.epsilon = cfg.epsilon;
  opt.delta = cfg.delta();
  opt.rho = cfg.rho();
  opt.enforce_rho = cfg.enforce_rho;
  opt.phi_estimate = cfg.phi_estimate;
  if (cfg.n_samples || cfg.burn_in || cfg.thinning) {
    SamplerConfig sc = SamplerConfig::defaults(cfg.d);
    if (cfg.n_samples) sc.n_samples = *cfg.n_samples;
    if (cfg.burn_in) sc.burn_in = *cfg.burn_in;
    if (cfg.thinning) sc.thinning = *cfg.thinning;
    opt.sampler = sc;
  }
  if (cfg.learner == "projected_volume") return std::make_unique<ProjectedVolumeLearner>(K0, opt, seed);
  if (cfg.learner == "centroid") return std::make_unique<CentroidLearner>(K0, opt, seed);
  throw InputError("unknown learner: " + cfg.learner);
}

RunRecord run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Polytope K0 = default_body(cfg.adversary, cfg.d);
  auto env = make_environment(cfg.adversary, K0, cfg.epsilon, cfg.seed);
  return run_experiment(cfg, *env);
}

RunRecord run_experiment(const ExperimentConfig& cfg, Environment& env) {
  cfg.validate();
  if (env.dim() != cfg.d) throw InputError("environment dimension does not match config");
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.config = cfg;
  RunSummary& sum = rec.summary;
  const bool fixed = env.mode() == EnvMode::fixed_theta;
  auto learner = make_learner(cfg, env.initial_body(), splitmix64(cfg.seed ^ 0x1ea7'0000'0000ULL));
  if (fixed) sum.theta = env.final_theta();

  long confirm_left = -1;
  try {
    for (long t = 1; t <= cfg.max_rounds; ++t) {
      if (env.finished()) {
        sum.terminated_reason = "adversary_finished";
        break;
      }
      RoundRow row;
      row.t = t;
      row.u = env.next_direction(*learner);
      row.x = learner->predict(row.u);
      row.side = env.respond(row.u, row.x);
      learner->observe(row.side);
      row.diag = learner->diagnostics();
      if (fixed) {
        row.mistake = std::abs(row.x - row.u.dot(sum.theta)) > cfg.epsilon;
        if (!learner->knows_consistent(sum.theta, 1e-9)) ++sum.soundness_violations;
      }
      rec.rows.push_back(std::move(row));
      if (confirm_left > 0) {
        if (rec.rows.back().diag.n_t_flag) ++sum.confirmation_flags;
        if (--confirm_left == 0) {
          sum.terminated_reason = "converged";
          break;
        }
      } else if (confirm_left < 0 && learner->converged()) {
        confirm_left = cfg.confirmation_rounds;
        if (confirm_left == 0) {
          sum.terminated_reason = "converged";
          break;
        }
      }
    }
    if (sum.terminated_reason.empty()) sum.terminated_reason = env.finished() ? "adversary_finished" : "max_rounds";
  } catch (const DegenerateError& e) {
    sum.terminated_reason = "degenerate";
    sum.detail = e.what();
  }

  if (!fixed) {
    try {
      sum.theta = env.final_theta();
      for (RoundRow& row : rec.rows) row.mistake = std::abs(row.x - row.u.dot(sum.theta)) > cfg.epsilon;
    } catch (const DegenerateError& e) {
      sum.terminated_reason = "degenerate";
      sum.detail = e.what();
    }
  }
  sum.rounds = static_cast<long>(rec.rows.size());
  sum.total_regret = std::count_if(rec.rows.begin(), rec.rows.end(), [](const RoundRow& r) { return r.mistake; });
  sum.skipped_cuts = env.skipped_cuts();
  sum.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

double regret_bound(int d, double epsilon) { return 50.0 * d * std::log(d / epsilon); }

void write_csv(const RunRecord& rec, std::ostream& os) {
  os << "t,u,x,side,mistake,n_small,n_t_flag,min_width,phi_mc\n";
  for (const RoundRow& r : rec.rows) {
    std::string u;
    for (Eigen::Index i = 0; i < r.u.size(); ++i) {
      if (i) u += ';';
      u += num(r.u(i));
    }
    os << r.t << ',' << u << ',' << num(r.x) << ',' << to_string(r.side) << ',' << (r.mistake ? 1 : 0) << ','
       << r.diag.n_small << ',' << (r.diag.n_t_flag ? 1 : 0) << ',' << num(r.diag.min_width) << ','
       << num(r.diag.phi) << '\n';
  }
}

nlohmann::json summary_json(const RunRecord& rec) {
  const ExperimentConfig& c = rec.config;
  const RunSummary& s = rec.summary;
  nlohmann::json cfg = {{"d", c.d},
                        {"epsilon", c.epsilon},
                        {"delta_policy", to_string(c.delta_policy)},
                        {"delta", c.delta()},
                        {"learner", c.learner},
                        {"adversary", c.adversary},
                        {"max_rounds", c.max_rounds},
                        {"seed", c.seed},
                        {"phi_estimate", c.phi_estimate},
                        {"enforce_rho", c.enforce_rho},
                        {"confirmation_rounds", c.confirmation_rounds}};
  if (c.n_samples) cfg["n_samples"] = *c.n_samples;
  if (c.burn_in) cfg["burn_in"] = *c.burn_in;
  if (c.thinning) cfg["thinning"] = *c.thinning;
  std::vector<double> theta(s.theta.data(), s.theta.data() + s.theta.size());
  nlohmann::json sum = {{"total_regret", s.total_regret},
                        {"rounds", s.rounds},
                        {"terminated_reason", s.terminated_reason},
                        {"regret_bound", regret_bound(c.d, c.epsilon)},
                        {"soundness_violations", s.soundness_violations},
                        {"confirmation_flags", s.confirmation_flags},
                        {"skipped_cuts", s.skipped_cuts},
                        {"theta", theta}};
  if (!s.detail.empty()) sum["detail"] = s.detail;
  return {{"schema", "v1"}, {"config", cfg}, {"summary", sum}};
}

void emit_csv(const RunRecord& rec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(rec, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void emit_json(const RunRecord& rec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << summary_json(rec).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string to_string(RegretModel m) { return m == RegretModel::d_log ? "d_log" : "d2_log"; }

FitResult fit_regret_constant(const std::vector<RegretPoint>& points, RegretModel model) {
  if (points.size() < 4) throw InputError(fmt::format("need at least 4 points to fit, got {}", points.size()));
  std::vector<double> f(points.size());
  double ff = 0.0, fr = 0.0, rsum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const RegretPoint& p = points[i];
    if (p.d < 1 || !(p.epsilon > 0.0 && p.epsilon < 1.0)) throw InputError("fit: bad (d, epsilon) point");
    const double d = p.d;
    f[i] = model == RegretModel::d_log ? d * std::log(d / p.epsilon)
                                       : d * d * std::log(1.0 / (p.epsilon * std::sqrt(d)));
    ff += f[i] * f[i];
    fr += f[i] * p.regret;
    rsum += p.regret;
  }
  if (!(ff > 0.0)) throw InputError("fit: model features vanish on these points");
  FitResult out;
  out.n = static_cast<int>(points.size());
  out.C = fr / ff;
  double ss = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double e = points[i].regret - out.C * f[i];
    ss += e * e;
  }
  out.residual = std::sqrt(ss / out.n);
  const double mean = rsum / out.n;
  out.relative_residual = mean > 0.0 ? out.residual / mean : (out.residual > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  out.poor_fit = out.relative_residual > 0.1;
  return out;
}

std::vector<RegretPoint> regret_points(const std::vector<RunRecord>& records) {
  std::vector<RegretPoint> out;
  out.reserve(records.size());
  for (const RunRecord& r : records)
    out.push_back({r.config.d, r.config.epsilon, static_cast<double>(r.summary.total_regret)});
  return out;
}

std::uint64_t replica_seed(std::uint64_t base, int i) { return base + static_cast<std::uint64_t>(i); }

std::vector<ExperimentConfig> expand_sweep(const SweepSpec& spec) {
  std::vector<ExperimentConfig> out;
  const auto ds = spec.ds.empty() ? std::vector<int>{spec.base.d} : spec.ds;
  const auto es = spec.epsilons.empty() ? std::vector<double>{spec.base.epsilon} : spec.epsilons;
  const auto ls = spec.learners.empty() ? std::vector<std::string>{spec.base.learner} : spec.learners;
  const auto as = spec.adversaries.empty() ? std::vector<std::string>{spec.base.adversary} : spec.adversaries;
  for (int d : ds)
    for (double e : es)
      for (const auto& l : ls)
        for (const auto& a : as)
          for (int i = 0; i < spec.base.replicas; ++i) {
            ExperimentConfig c = spec.base;
            c.d = d;
            c.epsilon = e;
            c.learner = l;
            c.adversary = a;
            c.seed = replica_seed(spec.base.seed, i);
            c.replicas = 1;
            c.validate();
            out.push_back(c);
          }
  return out;
}

std::vector<RunRecord> run_all(const std::vector<ExperimentConfig>& configs, int threads) {
  std::vector<RunRecord> out(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        out[i] = run_experiment(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string run_tag(const ExperimentConfig& c) {
  return fmt::format("d{}_eps{:g}_{}_{}_s{}", c.d, c.epsilon, c.learner, c.adversary, c.seed);
}

void write_sweep(const std::filesystem::path& dir, const std::vector<RunRecord>& records) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "runs", ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", (dir / "runs").string(), ec.message()));
  const auto table = dir / "sweep.csv";
  std::ofstream out(table, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + table.string());
  out << "d,epsilon,delta,learner,adversary,seed,total_regret,rounds,terminated_reason,soundness_violations\n";
  for (const RunRecord& r : records) {
    const std::string tag = run_tag(r.config);
    emit_csv(r, dir / "runs" / (tag + ".csv"));
    emit_json(r, dir / "runs" / (tag + ".json"));
    out << r.config.d << ',' << num(r.config.epsilon) << ',' << num(r.config.delta()) << ',' << r.config.learner
        << ',' << r.config.adversary << ',' << r.config.seed << ',' << r.summary.total_regret << ','
        << r.summary.rounds << ',' << r.summary.terminated_reason << ',' << r.summary.soundness_violations << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + table.string());
}

std::vector<RegretPoint> read_sweep_points(const std::filesystem::path& dir, const std::string& learner) {
  const auto table = dir / "sweep.csv";
  std::ifstream in(table);
  if (!in) throw InputError("cannot read " + table.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(table.string() + ": empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::stringstream ss(s);
    std::string x;
    while (std::getline(ss, x, ',')) f.push_back(trim(x));
    return f;
  };
  const auto head = split(line);
  auto col = [&](const std::string& name) {
    const auto it = std::find(head.begin(), head.end(), name);
    if (it == head.end()) throw InputError(table.string() + ": missing column " + name);
    return static_cast<std::size_t>(it - head.begin());
  };
  const std::size_t cd = col("d"), ce = col("epsilon"), cl = col("learner"), cr = col("total_regret");
  std::vector<RegretPoint> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != head.size()) throw InputError(fmt::format("{}:{}: wrong field count", table.string(), lineno));
    if (!learner.empty() && f[cl] != learner) continue;
    out.push_back({static_cast<int>(parse_int("d", f[cd])), parse_double("epsilon", f[ce]),
                   parse_double("total_regret", f[cr])});
  }
  return out;
}

}  // namespace pvs
