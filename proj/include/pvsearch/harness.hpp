#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pvsearch/adversaries.hpp"
#include "pvsearch/learner.hpp"

namespace pvs {

enum class DeltaPolicy { practical, paper_main, paper_appendix, explicit_value };

std::string to_string(DeltaPolicy p);

struct ExperimentConfig {
  int d = 2;
  double epsilon = 0.01;
  DeltaPolicy delta_policy = DeltaPolicy::practical;
  double delta_value = 0.0;  // explicit_value only
  std::string learner = "projected_volume";
  std::string adversary = "fixed_random";
  long max_rounds = 5000;
  std::uint64_t seed = 1;
  int replicas = 1;
  // sampler overrides; unset fields keep the per-dimension defaults
  std::optional<int> n_samples, burn_in, thinning;
  bool enforce_rho = false;
  bool phi_estimate = false;
  int confirmation_rounds = 100;

  /// Throws InputError.
  void validate() const;
  double delta() const;
  double rho() const;
};

/// Sets one key=value setting. Keys match the long CLI flags plus
/// n_samples, burn_in, thinning, enforce_rho, phi_estimate,
/// confirmation_rounds. `delta` takes a policy name or a number.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Flat key=value lines; '#' starts a comment. Throws InputError with the
/// path and line number.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// projected_volume | centroid | ellipsoid
std::unique_ptr<Learner> make_learner(const ExperimentConfig& cfg, const Polytope& K0, std::uint64_t seed);

struct RoundRow {
  long t = 0;
  Vec u;
  double x = 0.0;
  Side side = Side::below;
  bool mistake = false;
  RoundDiagnostics diag;
};

struct RunSummary {
  long total_regret = 0;
  long rounds = 0;
  std::string terminated_reason;  // max_rounds | converged | adversary_finished | degenerate
  double wall_time = 0.0;         // seconds; kept out of the JSON
  long soundness_violations = 0;  // fixed theta outside the learner's region after a round
  long confirmation_flags = 0;    // n_t_flag rounds after convergence
  long skipped_cuts = 0;          // environment answers that would have emptied its set
  Vec theta;                      // hidden theta, or theta* for adaptive runs
  std::string detail;             // message of a degenerate stop
};

struct RunRecord {
  ExperimentConfig config;
  std::vector<RoundRow> rows;
  RunSummary summary;
};

RunRecord run_experiment(const ExperimentConfig& cfg);

/// Same, against a caller-built environment (the config still names the learner).
RunRecord run_experiment(const ExperimentConfig& cfg, Environment& env);

/// 50 d ln(d / epsilon)
double regret_bound(int d, double epsilon);

void write_csv(const RunRecord& rec, std::ostream& os);
nlohmann::json summary_json(const RunRecord& rec);
/// Throws std::runtime_error naming the path on IO failure.
void emit_csv(const RunRecord& rec, const std::filesystem::path& path);
void emit_json(const RunRecord& rec, const std::filesystem::path& path);

enum class RegretModel { d_log, d2_log };

std::string to_string(RegretModel m);

struct RegretPoint {
  int d = 0;
  double epsilon = 0.0;
  double regret = 0.0;
};

struct FitResult {
  double C = 0.0;
  double residual = 0.0;           // RMS of regret - C f
  double relative_residual = 0.0;  // residual / mean regret
  bool poor_fit = false;           // relative_residual > 0.1
  int n = 0;
};

/// f = d ln(d/eps) or d^2 ln(1/(eps sqrt d)); C = sum(f r) / sum(f^2).
FitResult fit_regret_constant(const std::vector<RegretPoint>& points, RegretModel model);
std::vector<RegretPoint> regret_points(const std::vector<RunRecord>& records);

/// Seed of replica i.
std::uint64_t replica_seed(std::uint64_t base, int i);

struct SweepSpec {
  ExperimentConfig base;
  std::vector<int> ds;
  std::vector<double> epsilons;
  std::vector<std::string> learners;
  std::vector<std::string> adversaries;
};

/// All grid configs in d, epsilon, learner, adversary, replica order.
std::vector<ExperimentConfig> expand_sweep(const SweepSpec& spec);

/// Runs the configs on `threads` workers; results keep the input order.
std::vector<RunRecord> run_all(const std::vector<ExperimentConfig>& configs, int threads);

std::string run_tag(const ExperimentConfig& cfg);

/// Writes runs/<tag>.csv, runs/<tag>.json and sweep.csv under dir.
void write_sweep(const std::filesystem::path& dir, const std::vector<RunRecord>& records);

/// Reads the (d, epsilon, regret) points of sweep.csv, optionally for one learner.
std::vector<RegretPoint> read_sweep_points(const std::filesystem::path& dir, const std::string& learner = "");

}  // namespace pvs
