#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dagbandit/compress.hpp"
#include "dagbandit/ftrl.hpp"
#include "dagbandit/graph.hpp"
#include "dagbandit/rng.hpp"

namespace dagbandit {

enum class LearnerMode { EqualLength, Augmented, Compressed };

const char* mode_name(LearnerMode mode);
LearnerMode parse_mode(const std::string& name);

struct LearnerConfig {
  LearnerMode mode = LearnerMode::Compressed;
  int horizon = 1000;
  double delta = 0.05;
  std::optional<double> eta;
  std::optional<double> gamma;                      // one value for every coordinate
  std::optional<std::vector<double>> gamma_coords;  // over V∪E of the input graph
  std::optional<double> tol;
  std::uint64_t seed = 0;
  bool warm_start = true;
  int max_solver_iterations = 10000;  // per round; SolverStall beyond
  std::string solution_dump;  // CSV path; empty disables
};

void validate_config(const LearnerConfig& config);

// What one round looked like from inside the learner.
struct RoundDiagnostics {
  int solver_iterations = 0;
  double min_marginal = 0.0;  // rarest coordinate of the chosen (working-graph) path
  double kkt_residual = 0.0;
};

// choose/feed interface shared by the learner and every baseline.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual const PathIncidence& choose() = 0;
  virtual void feed(double loss) = 0;
  virtual std::string name() const = 0;
  virtual int round() const = 0;
  virtual RoundDiagnostics diagnostics() const { return {}; }
};

// FTRL with the Tsallis-1/2 regularizer over the (possibly augmented and
// compressed) flow polytope. Paths are reported in the input graph.
class Learner final : public Policy {
 public:
  Learner(const Dag& dag, const LearnerConfig& config);
  ~Learner() override;

  const PathIncidence& choose() override;
  void feed(double loss) override;
  std::string name() const override;
  int round() const override { return round_; }
  RoundDiagnostics diagnostics() const override { return diag_; }

  const LearnerConfig& config() const { return config_; }
  const LearnerSchedule& schedule() const { return schedule_; }
  const FtrlDomain& domain() const { return domain_; }
  const Dag& working_graph() const { return domain_.dag; }
  const std::vector<double>& cumulative_estimates() const { return cumulative_; }
  // x̃ of the current round (valid after choose)
  const std::vector<double>& marginals() const { return marginals_; }
  const CompressedDag* compressed() const { return compressed_.get(); }

 private:
  PathIncidence to_input(const PathIncidence& working_path) const;

  Dag input_;
  LearnerConfig config_;
  PrunedDag pruned_;                        // input -> G
  std::unique_ptr<CompressedDag> compressed_;
  PrunedDag pruned_dagger_;                 // G† -> working graph
  FtrlDomain domain_;
  LearnerSchedule schedule_;
  std::vector<double> gamma_full_;
  std::unique_ptr<FtrlSolver> solver_;
  std::vector<double> cumulative_;
  std::vector<double> marginals_;
  std::vector<std::uint8_t> chosen_working_;
  PathIncidence chosen_;
  Rng rng_;
  int round_ = 0;
  bool pending_ = false;
  RoundDiagnostics diag_;
  std::unique_ptr<std::ofstream> dump_;
};

}  // namespace dagbandit
