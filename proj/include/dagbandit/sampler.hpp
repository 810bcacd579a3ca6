#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dagbandit/graph.hpp"
#include "dagbandit/rng.hpp"

namespace dagbandit {

// Markov walk from the source: at each vertex pick an out-edge with
// probability x[e] / sum of out-edge x. `x` is indexed like the domain
// (V∪E first; trailing bit coordinates are ignored). Throws DeadEnd.
PathIncidence sample_path(const Dag& dag, std::span<const double> x, Rng& rng);

// Exact law of sample_path, by enumeration. Throws TooManyPaths.
std::vector<std::pair<PathIncidence, double>> sampler_law(const Dag& dag, std::span<const double> x,
                                                          std::size_t cap = 5000);

}  // namespace dagbandit
