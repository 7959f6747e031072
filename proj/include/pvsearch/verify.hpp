#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pvsearch/harness.hpp"

namespace pvs {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::string format_line(const CriterionResult& r);

struct VerifyOptions {
  std::uint64_t seed = 20240611;
  int threads = 1;
  long max_rounds = 20000;
  /// Experiment runs are written here when set.
  std::optional<std::filesystem::path> out;
};

// Geometry suites, criteria 1-6.
CriterionResult check_simplex_centroid(const VerifyOptions& opt);
CriterionResult check_grunbaum(const VerifyOptions& opt);
CriterionResult check_directional_grunbaum(const VerifyOptions& opt);
CriterionResult check_approximate_grunbaum(const VerifyOptions& opt);
CriterionResult check_cylindrification(const VerifyOptions& opt);
CriterionResult check_ellipsoid_update(const VerifyOptions& opt);

std::vector<CriterionResult> verify_geometry(const VerifyOptions& opt);

/// Experiment suites, criteria 7-11. Run order: regret sweep, extra fixed
/// runs, lower bound, separation, then replays of one run per adversary.
std::vector<CriterionResult> verify_experiments(const VerifyOptions& opt);

/// Criteria ids -> results, in id order. Empty ids means all.
std::vector<CriterionResult> verify(const VerifyOptions& opt, const std::vector<int>& ids = {});

}  // namespace pvs
