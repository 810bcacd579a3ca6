#include "dagbandit/estimators.hpp"

#include <string>

#include "dagbandit/error.hpp"
#include "dagbandit/sampler.hpp"

namespace dagbandit {

namespace {

void check(const Dag& dag, const RoundObservation& obs, std::size_t gamma_size, bool with_gamma) {
  if (obs.chosen.size() != obs.marginals.size())
    fail(ErrorCode::DimensionMismatch, "chosen vector and marginals differ in length");
  if (static_cast<int>(obs.chosen.size()) < dag.num_coordinates())
    fail(ErrorCode::DimensionMismatch, "observation is shorter than |V|+|E|");
  if (with_gamma && gamma_size != obs.chosen.size())
    fail(ErrorCode::DimensionMismatch, "gamma has the wrong length");
  if (!(obs.loss >= -1.0 && obs.loss <= 1.0))
    fail(ErrorCode::OutOfRangeLoss, "loss " + std::to_string(obs.loss) + " outside [-1, 1]");
}

double numerator(const Dag& dag, std::size_t i, double loss) {
  const auto nv = static_cast<std::size_t>(dag.num_vertices());
  if (i < nv) {
    if (static_cast<VertexId>(i) == dag.source() || static_cast<VertexId>(i) == dag.sink()) return 0.0;
    return 1.0 - loss;
  }
  if (i < static_cast<std::size_t>(dag.num_coordinates())) return 1.0 + loss;
  return 2.0;
}

void add_estimate(const Dag& dag, const RoundObservation& obs, std::span<const double> gamma,
                  std::span<double> out) {
  for (std::size_t i = 0; i < obs.chosen.size(); ++i) {
    if (!obs.chosen[i]) continue;
    const double num = numerator(dag, i, obs.loss);
    if (num == 0.0) continue;
    const double den = obs.marginals[i] + (gamma.empty() ? 0.0 : gamma[i]);
    if (!(den > 0.0)) fail(ErrorCode::ZeroMarginal, "zero marginal on chosen coordinate " + std::to_string(i));
    out[i] += num / den;
  }
}

}  // namespace

std::vector<double> biased_estimate(const Dag& dag, const RoundObservation& obs,
                                    std::span<const double> gamma) {
  check(dag, obs, gamma.size(), true);
  std::vector<double> out(obs.chosen.size(), 0.0);
  add_estimate(dag, obs, gamma, out);
  return out;
}

std::vector<double> unbiased_estimate(const Dag& dag, const RoundObservation& obs) {
  check(dag, obs, 0, false);
  std::vector<double> out(obs.chosen.size(), 0.0);
  add_estimate(dag, obs, {}, out);
  return out;
}

void accumulate_biased_estimate(const Dag& dag, const RoundObservation& obs,
                                std::span<const double> gamma, std::span<double> acc) {
  check(dag, obs, gamma.size(), true);
  if (acc.size() != obs.chosen.size()) fail(ErrorCode::DimensionMismatch, "accumulator has the wrong length");
  add_estimate(dag, obs, gamma, acc);
}

double exact_estimator_expectation(const Dag& dag, const BitIndexMap* bits,
                                   std::span<const double> marginals, const LossVector& y,
                                   const PathIncidence& target, std::size_t cap) {
  auto law = sampler_law(dag, marginals, cap);
  auto incidence = [&](const PathIncidence& p) {
    if (bits) return augment_path(dag, p, *bits);
    return p.bits;
  };
  const auto x = incidence(target);
  if (x.size() != marginals.size())
    fail(ErrorCode::DimensionMismatch, "marginals do not match the coordinate space");
  double expectation = 0.0;
  for (const auto& [p, prob] : law) {
    if (prob == 0.0) continue;
    const auto chosen = incidence(p);
    RoundObservation obs{chosen, path_loss(y, p), marginals};
    auto est = unbiased_estimate(dag, obs);
    double inner = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i]) inner += est[i];
    expectation += prob * inner;
  }
  return expectation;
}

}  // namespace dagbandit
