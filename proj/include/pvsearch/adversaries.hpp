#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pvsearch/learner.hpp"

namespace pvs {

enum class EnvMode { fixed_theta, adaptive };

struct RoundOutcome {
  Vec u;
  double x = 0.0;
  Side side = Side::below;
  std::optional<bool> mistake;  // empty while deferred
};

/// below iff x <= u^T theta; mistake iff |x - u^T theta| > epsilon.
RoundOutcome fixed_theta_feedback(const Vec& theta, const Vec& u, double x, double epsilon);

/// e_{(t mod d)+1}
Vec round_robin_direction(int d, long t);

/// Widest of n_probe random directions and the covariance eigenvectors of
/// their LP support points.
Vec greedy_width_direction(const Polytope& K, int n_probe, Rng& rng);

/// Drives a learner: proposes u_t, answers guesses, and keeps the set of
/// theta consistent with its answers.
class Environment {
 public:
  Environment(Polytope K0, double epsilon);
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual EnvMode mode() const = 0;
  int dim() const { return K0_.dim(); }
  double epsilon() const { return epsilon_; }
  const Polytope& initial_body() const { return K0_; }

  /// The learner is passed for white-box adversaries; theta never flows back.
  virtual Vec next_direction(const Learner& learner) = 0;
  virtual Side respond(const Vec& u, double x) = 0;
  /// The adversary has no more rounds to play.
  virtual bool finished() const { return false; }
  /// Fixed mode: the hidden theta. Adaptive: the post-hoc theta*.
  virtual Vec final_theta() const = 0;

  const Polytope& consistent_set() const { return consistent_; }
  long skipped_cuts() const { return skipped_; }
  long rounds() const { return rounds_; }

 protected:
  /// Cuts the consistent set by an answer. A cut that would leave no
  /// interior is skipped and counted.
  void record(const Vec& u, double x, Side side);
  /// Would this answer keep a set with interior?
  bool keeps_interior(const Vec& u, double x, Side side) const;

  Polytope K0_;
  double epsilon_;
  Polytope consistent_;
  long skipped_ = 0;
  long rounds_ = 0;
};

/// Hidden theta; directions uniform on the sphere or greedy max-width.
class FixedThetaEnvironment final : public Environment {
 public:
  enum class Directions { random, greedy_width };

  FixedThetaEnvironment(Polytope K0, double epsilon, Vec theta, Directions dirs, std::uint64_t seed,
                        int n_probe = 16);
  /// theta uniform on K0.
  static Vec draw_theta(const Polytope& K0, Rng& rng);

  std::string name() const override;
  EnvMode mode() const override { return EnvMode::fixed_theta; }
  Vec next_direction(const Learner& learner) override;
  Side respond(const Vec& u, double x) override;
  Vec final_theta() const override { return theta_; }

 private:
  Vec theta_;
  Directions dirs_;
  Rng rng_;
  int n_probe_;
};

/// Round-robin axis directions; every answer keeps the longer part of the
/// active coordinate interval. theta* sits at the far end of each final
/// interval.
class BisectionAdversary final : public Environment {
 public:
  /// Parts within tie_tolerance (relative) count as a tie and resolve to below.
  BisectionAdversary(Polytope K0, double epsilon, double tie_tolerance = 0.05);

  std::string name() const override { return "round_robin_adaptive"; }
  EnvMode mode() const override { return EnvMode::adaptive; }
  Vec next_direction(const Learner& learner) override;
  Side respond(const Vec& u, double x) override;
  Vec final_theta() const override;

  const Vec& lower() const { return lo_; }
  const Vec& upper() const { return hi_; }

 private:
  Vec lo_, hi_;
  double tie_;
  std::vector<std::pair<int, double>> guesses_;  // (coordinate, x)
};

/// Forced-side adversary against centroid cuts on [0, h]^d. Phases per k:
/// step1 shrinks the simplex along e_k, step2 cuts by the tilted vector,
/// step3 removes the leftover slab along e_{k+1}.
class SimplexAdversary final : public Environment {
 public:
  enum class Phase { step1, step2, step3, done };

  struct Health {
    std::vector<int> step1_rounds, step3_rounds;  // per k
    long flipped = 0;                             // forced sides that would have emptied the set
    bool step3_capped = false;
  };

  SimplexAdversary(Polytope K0, double epsilon, int step3_cap = 200);

  std::string name() const override { return "simplex_counterexample"; }
  EnvMode mode() const override { return EnvMode::adaptive; }
  Vec next_direction(const Learner& learner) override;
  Side respond(const Vec& u, double x) override;
  bool finished() const override { return phase_ == Phase::done; }
  Vec final_theta() const override;

  int k() const { return k_; }
  Phase phase() const { return phase_; }
  const Health& health() const { return health_; }

  /// Step-2 direction from the side lengths s_hat (k entries) and the
  /// extent h of coordinate k+1, in dimension d.
  static Vec step2_direction(const Vec& s_hat, double h, int d);

 private:
  const Polytope& observed(const Learner& learner) const;
  void advance(const Polytope& K);
  bool slab_left(const Polytope& K) const;

  int k_ = 1;  // 1-based as in the construction
  Phase phase_ = Phase::step1;
  Side forced_ = Side::below;
  Vec offset_, s_hat_;  // simplex frame frozen at step 2
  double g_full_ = 0.0;
  int step3_cap_;
  int phase_rounds_ = 0;
  Health health_;
};

/// Chebyshev center of the consistent set.
Vec finalize_theta(const Polytope& consistent_set);

/// fixed_random | round_robin_adaptive | simplex_counterexample | greedy_width
std::unique_ptr<Environment> make_environment(const std::string& name, const Polytope& K0, double epsilon,
                                              std::uint64_t seed);

/// The initial body the named adversary is defined on.
Polytope default_body(const std::string& adversary, int d);

std::string to_string(SimplexAdversary::Phase p);

}  // namespace pvs
