#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "dagbandit/episode.hpp"
#include "dagbandit/learner.hpp"
#include "dagbandit/reductions.hpp"
#include "dagbandit/rng.hpp"

namespace dagbandit {

// ---- adversaries ----

// Means plus independent uniform noise of half-width noise/L on every edge,
// L the longest path length, so a path's noise never exceeds `noise`.
// Rejected (RangeViolation) unless every path mean is within 1 - noise.
class StochasticAdversary final : public Adversary {
 public:
  StochasticAdversary(const Dag& dag, LossVector means, double noise, std::uint64_t seed);
  LossVector losses(int round) override;
  std::string name() const override { return "stochastic-iid"; }
  const LossVector& means() const { return means_; }

 private:
  LossVector means_;
  double half_width_;
  Rng rng_;
};

// Means for a planted best path: the smallest-edge-id path gets 0, every edge
// leaving it (tail on the path, edge not on it) gets `gap`. Each other path
// then has mean >= gap.
LossVector gap_means(const Dag& dag, double gap, PathIncidence* best = nullptr);

// Puts +magnitude (spread evenly over its edges) on the most played path so
// far; ties go to the lexicographically smallest edge sequence. Round 1 is 0.
class AdaptiveTargetingAdversary final : public Adversary {
 public:
  AdaptiveTargetingAdversary(const Dag& dag, double magnitude);
  LossVector losses(int round) override;
  void observe(const PathIncidence& played) override;
  std::string name() const override { return "adaptive-targeting"; }

 private:
  const Dag& dag_;
  double magnitude_;
  std::vector<std::pair<std::vector<EdgeId>, int>> counts_;  // sorted by edges
  std::vector<EdgeId> leader_;
  int leader_count_ = 0;
};

class ZeroAdversary final : public Adversary {
 public:
  explicit ZeroAdversary(const Dag& dag) : m_(dag.num_edges()) {}
  LossVector losses(int) override { return LossVector(static_cast<std::size_t>(m_), 0.0); }
  std::string name() const override { return "zero"; }

 private:
  int m_;
};

// Hidden arm tuple drawn at construction. Each round one task j is drawn
// uniformly; its arms get Bernoulli(1/2 - eps_j [arm is hidden]) losses, all
// other tasks 0. eps_j = m sqrt(d_j) / (10 sqrt(T)).
class MultitaskLowerBoundAdversary final : public Adversary {
 public:
  MultitaskLowerBoundAdversary(const MultitaskReduction& red, int horizon, std::uint64_t seed);
  LossVector losses(int round) override;
  std::string name() const override { return "multitask-lower-bound"; }
  const std::vector<double>& epsilon() const { return eps_; }
  const Action& hidden() const { return hidden_; }
  int last_task() const { return last_task_; }

 private:
  const MultitaskReduction& red_;
  std::vector<double> eps_;
  Action hidden_;
  Rng rng_;
  int last_task_ = -1;
};

// eps_j for the lower-bound family
std::vector<double> lower_bound_epsilon(const std::vector<int>& arms, int horizon);

// Per battlefield loss (1[a < b] - 1[a > b]) / K against a uniformly random
// composition b of `opponent` soldiers, redrawn every round.
class BlottoAdversary final : public Adversary {
 public:
  BlottoAdversary(const BlottoReduction& red, int opponent, std::uint64_t seed);
  LossVector losses(int round) override;
  std::string name() const override { return "blotto-random"; }
  const std::vector<int>& last_allocation() const { return b_; }

 private:
  const BlottoReduction& red_;
  int opponent_;
  std::vector<std::vector<std::vector<double>>> table_;
  std::vector<int> b_;
  Rng rng_;
};

// Terminal losses mu_z + U(-noise, noise) with fixed mu_z in [-(1-noise), 1-noise];
// observation actions uniform each round.
class EfgAdversary final : public Adversary {
 public:
  EfgAdversary(const EfgReduction& red, double noise, std::uint64_t seed);
  LossVector losses(int round) override;
  std::string name() const override { return "efg-random"; }

 private:
  const EfgReduction& red_;
  double noise_;
  std::vector<double> mu_;
  Rng rng_;
};

// ---- baselines ----

// Uniform over paths (walks proportional to downstream path counts).
class UniformPolicy final : public Policy {
 public:
  UniformPolicy(const Dag& dag, std::uint64_t seed);
  const PathIncidence& choose() override;
  void feed(double loss) override;
  std::string name() const override { return "uniform"; }
  int round() const override { return round_; }

 private:
  Dag dag_;
  std::vector<double> prob_;  // per edge: count(head) / count(tail)
  Rng rng_;
  PathIncidence chosen_;
  int round_ = 0;
  bool pending_ = false;
};

// Independent EXP3-IX per task, each fed the shared scalar loss as is.
// eta_i = sqrt(2 ln d_i / (d_i T)), gamma_i = eta_i / 2.
class Exp3IxMultitask final : public Policy {
 public:
  Exp3IxMultitask(const MultitaskReduction& red, int horizon, std::uint64_t seed);
  const PathIncidence& choose() override;
  void feed(double loss) override;
  std::string name() const override { return "exp3-ix"; }
  int round() const override { return round_; }
  const std::vector<std::vector<double>>& cumulative() const { return cum_; }

 private:
  const MultitaskReduction& red_;
  int horizon_;
  std::vector<double> eta_, gamma_;
  std::vector<std::vector<double>> cum_;  // estimated losses per task and arm
  std::vector<std::vector<double>> prob_;
  Action arms_;
  PathIncidence chosen_;
  Rng rng_;
  int round_ = 0;
  bool pending_ = false;
};

// EXP3 with explicit uniform mixing over an enumerated path set.
// gamma = min(1, sqrt(N ln N / ((e - 1) T))), eta = gamma / N.
class Exp3Paths final : public Policy {
 public:
  Exp3Paths(const Dag& dag, int horizon, std::uint64_t seed, std::size_t cap = 5000);
  const PathIncidence& choose() override;
  void feed(double loss) override;
  std::string name() const override { return "exp3-paths"; }
  int round() const override { return round_; }
  const std::vector<double>& probabilities() const { return prob_; }
  std::size_t num_paths() const { return paths_.size(); }

 private:
  std::vector<PathIncidence> paths_;
  double gamma_, eta_;
  std::vector<double> cum_;
  std::vector<double> prob_;
  std::size_t idx_ = 0;
  Rng rng_;
  int round_ = 0;
  bool pending_ = false;
  int horizon_;
};

// ---- experiments ----

struct GraphSpec {
  Dag dag;
  std::shared_ptr<const Reduction> reduction;  // null for plain graphs
  nlohmann::json source;                        // as written in the config
};

struct AlgorithmSpec {
  std::string name;   // ftrl | exp3-ix | exp3-paths | uniform
  std::string label;  // run directory prefix; defaults to name (+ mode)
  nlohmann::json params;
};

struct AdversarySpec {
  std::string kind;
  std::string label;
  nlohmann::json params;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string output_dir;  // empty: nothing written
  GraphSpec graph;
  int horizon = 1000;
  double delta = 0.05;
  std::vector<std::uint64_t> seeds{0};
  std::vector<AlgorithmSpec> algorithms;
  std::vector<AdversarySpec> adversaries;
  int checkpoints = 20;
  int threads = 0;  // 0: DAGBANDIT_THREADS or hardware
};

// Throws Config naming the offending field; relative file paths resolve
// against base_dir.
ExperimentConfig parse_experiment(const nlohmann::json& j, const std::string& base_dir = ".");
// Parse errors carry line and column.
ExperimentConfig load_experiment(const std::string& path);
nlohmann::json load_json_file(const std::string& path);

GraphSpec make_graph(const nlohmann::json& spec, const std::string& base_dir = ".");

std::unique_ptr<Policy> make_policy(const AlgorithmSpec& spec, const GraphSpec& graph, int horizon,
                                    double delta, std::uint64_t seed);
std::unique_ptr<Adversary> make_adversary(const AdversarySpec& spec, const GraphSpec& graph, int horizon,
                                          std::uint64_t seed);

// The config with every default filled in, including each learner's
// eta / gamma / tol.
nlohmann::json resolve_config(const ExperimentConfig& config);

struct RunResult {
  std::string algorithm;
  std::string adversary;
  std::uint64_t seed = 0;
  RegretReport report;
  std::string directory;  // empty when nothing was written
};

struct ExperimentResult {
  std::vector<RunResult> runs;  // algorithm-major, then adversary, then seed
  nlohmann::json summary;
  std::string summary_csv;  // same text as summary.csv
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> v, double q);

// Regret recomputed from a persisted trajectory.csv and summary.json.
double recompute_regret(const std::string& run_directory);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace dagbandit
