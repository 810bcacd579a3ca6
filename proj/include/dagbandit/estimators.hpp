#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dagbandit/augment.hpp"
#include "dagbandit/graph.hpp"

namespace dagbandit {

// One round as seen by the estimator. `chosen` and `marginals` span the
// augmented coordinates [V | E | live bits].
struct RoundObservation {
  std::span<const std::uint8_t> chosen;
  double loss = 0.0;
  std::span<const double> marginals;
};

// Vertex coordinates use numerator (1 - loss), edges (1 + loss), bits 2;
// source and sink are always 0. Denominator marginal + gamma.
std::vector<double> biased_estimate(const Dag& dag, const RoundObservation& obs,
                                    std::span<const double> gamma);

// Same with gamma = 0.
std::vector<double> unbiased_estimate(const Dag& dag, const RoundObservation& obs);

// Adds the biased estimate into `acc` touching only chosen coordinates.
void accumulate_biased_estimate(const Dag& dag, const RoundObservation& obs,
                                std::span<const double> gamma, std::span<double> acc);

// E_p[<x, est(p)>] for the unbiased estimator under the sampler law of
// `marginals`, where x is the augmented incidence of `target`. Test oracle;
// enumerates every path.
double exact_estimator_expectation(const Dag& dag, const BitIndexMap* bits,
                                   std::span<const double> marginals, const LossVector& y,
                                   const PathIncidence& target, std::size_t cap = 5000);

}  // namespace dagbandit
