#include "dagbandit/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "dagbandit/error.hpp"
#include "dagbandit/estimators.hpp"
#include "dagbandit/sampler.hpp"

namespace dagbandit {

const char* mode_name(LearnerMode mode) {
  switch (mode) {
    case LearnerMode::EqualLength: return "equal-length";
    case LearnerMode::Augmented: return "augmented";
    case LearnerMode::Compressed: return "compressed";
  }
  return "?";
}

LearnerMode parse_mode(const std::string& name) {
  if (name == "equal-length") return LearnerMode::EqualLength;
  if (name == "augmented") return LearnerMode::Augmented;
  if (name == "compressed") return LearnerMode::Compressed;
  fail(ErrorCode::InvalidArgument, "unknown mode '" + name + "' (equal-length|augmented|compressed)");
}

void validate_config(const LearnerConfig& c) {
  if (c.max_solver_iterations < 1) fail(ErrorCode::InvalidArgument, "max_solver_iterations must be >= 1");
  if (c.horizon < 1) fail(ErrorCode::InvalidArgument, "horizon T must be >= 1");
  if (!(c.delta > 0.0 && c.delta < 1.0)) fail(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
  if (c.eta && !(*c.eta > 0.0)) fail(ErrorCode::InvalidArgument, "eta must be positive");
  if (c.gamma && !(*c.gamma > 0.0)) fail(ErrorCode::InvalidArgument, "gamma must be positive");
  if (c.tol && !(*c.tol > 0.0)) fail(ErrorCode::InvalidArgument, "tol must be positive");
  if (c.gamma_coords) {
    for (double g : *c.gamma_coords)
      if (!(g > 0.0)) fail(ErrorCode::InvalidArgument, "per-coordinate gamma must be positive");
    if (c.mode == LearnerMode::Compressed)
      fail(ErrorCode::InvalidArgument, "per-coordinate gamma is indexed by the input graph; not available in compressed mode");
  }
}

Learner::Learner(const Dag& dag, const LearnerConfig& config)
    : input_(dag), config_(config), rng_(config.seed) {
  validate_config(config_);
  pruned_ = prune_with_map(dag);
  const Dag& g = pruned_.dag;

  switch (config_.mode) {
    case LearnerMode::EqualLength:
      if (!has_uniform_path_length(g))
        fail(ErrorCode::UnequalLengths, "equal-length mode needs every source-sink path to have the same length");
      domain_ = make_domain(g, false);
      break;
    case LearnerMode::Augmented:
      domain_ = make_domain(g, true);
      break;
    case LearnerMode::Compressed:
      compressed_ = std::make_unique<CompressedDag>(build_gdagger(g));
      pruned_dagger_ = prune_with_map(compressed_->gdag);
      domain_ = make_domain(pruned_dagger_.dag, true);
      break;
  }

  schedule_ = default_schedule(domain_, config_.horizon, config_.delta);
  if (config_.eta) schedule_.eta = *config_.eta;
  if (config_.tol) schedule_.tol = *config_.tol;
  if (config_.gamma) {
    std::fill(schedule_.gamma.begin(), schedule_.gamma.end(), *config_.gamma);
    std::fill(schedule_.gamma_hat.begin(), schedule_.gamma_hat.end(), *config_.gamma);
  }
  if (config_.gamma_coords) {
    const auto& gc = *config_.gamma_coords;
    if (static_cast<int>(gc.size()) != dag.num_coordinates())
      fail(ErrorCode::DimensionMismatch, "per-coordinate gamma must have |V|+|E| entries");
    for (VertexId v = 0; v < g.num_vertices(); ++v)
      schedule_.gamma[static_cast<std::size_t>(v)] = gc[static_cast<std::size_t>(pruned_.vertex_to_old[static_cast<std::size_t>(v)])];
    for (EdgeId e = 0; e < g.num_edges(); ++e)
      schedule_.gamma[static_cast<std::size_t>(g.edge_coordinate(e))] =
          gc[static_cast<std::size_t>(dag.edge_coordinate(pruned_.edge_to_old[static_cast<std::size_t>(e)]))];
  }
  gamma_full_ = schedule_.full_gamma();

  solver_ = std::make_unique<FtrlSolver>(domain_, config_.max_solver_iterations);
  solver_->set_warm_start(config_.warm_start);
  cumulative_.assign(static_cast<std::size_t>(domain_.dim), 0.0);

  if (!config_.solution_dump.empty()) {
    dump_ = std::make_unique<std::ofstream>(config_.solution_dump);
    if (!*dump_) fail(ErrorCode::Io, "cannot write " + config_.solution_dump);
    *dump_ << "round";
    auto names = coordinate_names(domain_.dag, domain_.bits);
    names.resize(static_cast<std::size_t>(domain_.dim));
    for (const auto& n : names) *dump_ << ',' << n;
    *dump_ << '\n' << std::setprecision(17);
  }
}

Learner::~Learner() = default;

std::string Learner::name() const { return std::string("ftrl-") + mode_name(config_.mode); }

PathIncidence Learner::to_input(const PathIncidence& w) const {
  std::vector<EdgeId> in_g;
  if (compressed_) {
    std::vector<EdgeId> full;
    for (EdgeId e : w.edges) full.push_back(pruned_dagger_.edge_to_old[static_cast<std::size_t>(e)]);
    PathIncidence dagger = make_path(compressed_->gdag, std::move(full));
    in_g = project_path(*compressed_, dagger).edges;
  } else {
    in_g = w.edges;
  }
  std::vector<EdgeId> in_input;
  for (EdgeId e : in_g) in_input.push_back(pruned_.edge_to_old[static_cast<std::size_t>(e)]);
  return make_path(input_, std::move(in_input));
}

const PathIncidence& Learner::choose() {
  if (pending_) fail(ErrorCode::ProtocolViolation, "choose called twice without feed");
  if (round_ >= config_.horizon) fail(ErrorCode::ProtocolViolation, "horizon exhausted");
  marginals_ = solver_->solve(cumulative_, schedule_.eta, schedule_.tol);
  const Dag& w = domain_.dag;
  PathIncidence p = sample_path(w, marginals_, rng_);
  chosen_working_ = domain_.augmented ? augment_path(w, p, domain_.bits) : p.bits;
  chosen_ = to_input(p);
  diag_.solver_iterations = solver_->stats().iterations;
  diag_.kkt_residual = solver_->stats().kkt_residual;
  diag_.min_marginal = 1.0;
  for (std::size_t i = 0; i < chosen_working_.size(); ++i)
    if (chosen_working_[i]) diag_.min_marginal = std::min(diag_.min_marginal, marginals_[i]);
  if (dump_) {
    *dump_ << round_ + 1;
    for (double v : marginals_) *dump_ << ',' << v;
    *dump_ << '\n';
  }
  pending_ = true;
  return chosen_;
}

void Learner::feed(double loss) {
  if (!pending_) fail(ErrorCode::ProtocolViolation, "feed called without a preceding choose");
  if (!(loss >= -1.0 && loss <= 1.0))
    fail(ErrorCode::OutOfRangeLoss, "loss " + std::to_string(loss) + " outside [-1, 1]");
  RoundObservation obs{chosen_working_, loss, marginals_};
  accumulate_biased_estimate(domain_.dag, obs, gamma_full_, cumulative_);
  pending_ = false;
  ++round_;
}

}  // namespace dagbandit
