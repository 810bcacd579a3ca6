#pragma once

#include <string>
#include <vector>

#include "dagbandit/graph.hpp"
#include "dagbandit/learner.hpp"

namespace dagbandit {

// Picks y_t before the learner commits; observe() reveals the played path
// afterwards, so adaptive adversaries see only the past.
class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual LossVector losses(int round) = 0;  // round is 1-based
  virtual void observe(const PathIncidence& /*played*/) {}
  virtual std::string name() const = 0;
};

struct RoundLog {
  int round = 0;
  std::vector<EdgeId> path;
  double loss = 0.0;
  double cum_regret = 0.0;
  int solver_iterations = 0;
  double min_marginal = 0.0;
};

struct RegretReport {
  std::string policy;
  std::string adversary;
  int horizon = 0;
  std::vector<RoundLog> rounds;
  double realized = 0.0;
  double hindsight_loss = 0.0;
  PathIncidence hindsight_path;
  double regret = 0.0;
  double wall_seconds = 0.0;
};

// Running min over paths of the cumulative loss, one DP per round.
class HindsightTracker {
 public:
  explicit HindsightTracker(const Dag& dag);
  void add(const LossVector& y);
  double value() const;
  const LossVector& cumulative() const { return cum_; }

 private:
  const Dag& dag_;
  std::vector<VertexId> order_;
  LossVector cum_;
};

struct EpisodeOptions {
  int horizon = 1;
  bool check_losses = true;  // min/max path DP on every emitted vector
};

// Realized loss minus the best fixed path in hindsight over the summed loss
// vectors. The final row's cum_regret equals `regret`.
RegretReport run_episode(Policy& policy, Adversary& adversary, const Dag& dag, const EpisodeOptions& options);
RegretReport run_episode(const Dag& dag, const LearnerConfig& config, Adversary& adversary);

}  // namespace dagbandit
