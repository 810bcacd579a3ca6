#include "dagbandit/episode.hpp"

#include <chrono>
#include <limits>

#include "dagbandit/error.hpp"

namespace dagbandit {

HindsightTracker::HindsightTracker(const Dag& dag)
    : dag_(dag), order_(topo_order(dag)), cum_(static_cast<std::size_t>(dag.num_edges()), 0.0) {}

void HindsightTracker::add(const LossVector& y) {
  for (std::size_t i = 0; i < cum_.size(); ++i) cum_[i] += y[i];
}

double HindsightTracker::value() const {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(static_cast<std::size_t>(dag_.num_vertices()), inf);
  best[static_cast<std::size_t>(dag_.source())] = 0.0;
  for (VertexId v : order_) {
    const double bv = best[static_cast<std::size_t>(v)];
    if (bv == inf) continue;
    for (EdgeId e : dag_.out_edges(v)) {
      auto h = static_cast<std::size_t>(dag_.edge(e).head);
      best[h] = std::min(best[h], bv + cum_[static_cast<std::size_t>(e)]);
    }
  }
  return best[static_cast<std::size_t>(dag_.sink())];
}

RegretReport run_episode(Policy& policy, Adversary& adversary, const Dag& dag, const EpisodeOptions& options) {
  if (options.horizon < 1) fail(ErrorCode::InvalidArgument, "horizon T must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  RegretReport rep;
  rep.policy = policy.name();
  rep.adversary = adversary.name();
  rep.horizon = options.horizon;
  rep.rounds.reserve(static_cast<std::size_t>(options.horizon));
  HindsightTracker tracker(dag);
  double realized = 0.0;
  for (int t = 1; t <= options.horizon; ++t) {
    LossVector y = adversary.losses(t);
    if (static_cast<int>(y.size()) != dag.num_edges())
      fail(ErrorCode::DimensionMismatch, "adversary emitted a loss vector of the wrong length");
    if (options.check_losses && !satisfies_loss_bound(dag, y))
      fail(ErrorCode::RangeViolation, "round " + std::to_string(t) + ": some path loss leaves [-1, 1]");
    const PathIncidence& x = policy.choose();
    const double loss = path_loss(y, x);
    policy.feed(loss);
    adversary.observe(x);
    realized += loss;
    tracker.add(y);
    RoundLog log;
    log.round = t;
    log.path = x.edges;
    log.loss = loss;
    log.cum_regret = realized - tracker.value();
    auto d = policy.diagnostics();
    log.solver_iterations = d.solver_iterations;
    log.min_marginal = d.min_marginal;
    rep.rounds.push_back(std::move(log));
  }
  auto best = best_path_in_hindsight(dag, tracker.cumulative());
  rep.realized = realized;
  rep.hindsight_loss = best.loss;
  rep.hindsight_path = std::move(best.path);
  rep.regret = realized - rep.hindsight_loss;
  rep.rounds.back().cum_regret = rep.regret;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

RegretReport run_episode(const Dag& dag, const LearnerConfig& config, Adversary& adversary) {
  Learner learner(dag, config);
  return run_episode(learner, adversary, dag, {config.horizon, true});
}

}  // namespace dagbandit
