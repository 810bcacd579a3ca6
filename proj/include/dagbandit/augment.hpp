#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dagbandit/graph.hpp"

namespace dagbandit {

// Skipped-level bits. Bit i (1 <= i <= K-1) is live when some edge (u,v) has
// K(u) < i < K(v); dead bits are dropped, so live bits get dense slots.
struct BitIndexMap {
  int K = 0;
  std::vector<int> k_labels;
  std::vector<int> live_bits;              // slot -> bit index i
  std::vector<int> slot_of_bit;            // i -> slot or -1, size K
  std::vector<std::vector<EdgeId>> support;  // slot -> edges e with i in I(e)

  int num_live() const { return static_cast<int>(live_bits.size()); }

  // I(e) as a half-open slot range is not available once dead bits are
  // removed, so this returns the bit indices directly.
  std::vector<int> interval(const Dag& dag, EdgeId e) const;
};

BitIndexMap interval_set(const Dag& dag, const std::vector<int>& k_labels);
inline BitIndexMap interval_set(const Dag& dag) { return interval_set(dag, longest_dist(dag)); }

// Full augmented 0/1 vector: [vertices | edges | live bits].
std::vector<std::uint8_t> augment_path(const Dag& dag, const PathIncidence& path,
                                       const BitIndexMap& map);

// sparse row: sum(coef * x[index]) == rhs
struct LinearEquality {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;
};

// Flow rows over V∪E: x[s] = 1, x[v] = inflow (v != s), x[v] = outflow
// (v != t). On a pruned DAG these 2|V|-1 rows are linearly independent.
std::vector<LinearEquality> flow_constraints(const Dag& dag);

// One row per live bit: x[bit] - sum of supporting edge coordinates = 0.
std::vector<LinearEquality> augmented_constraints(const Dag& dag, const BitIndexMap& map);

// Names for every augmented coordinate ("v3", "e7:3->5", "b2").
std::vector<std::string> coordinate_names(const Dag& dag, const BitIndexMap& map);

}  // namespace dagbandit
