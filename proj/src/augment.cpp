#include "dagbandit/augment.hpp"

#include "dagbandit/error.hpp"

namespace dagbandit {

std::vector<int> BitIndexMap::interval(const Dag& dag, EdgeId e) const {
  const Edge& ed = dag.edge(e);
  std::vector<int> out;
  for (int i = k_labels[static_cast<std::size_t>(ed.tail)] + 1;
       i < k_labels[static_cast<std::size_t>(ed.head)]; ++i)
    out.push_back(i);
  return out;
}

BitIndexMap interval_set(const Dag& dag, const std::vector<int>& k_labels) {
  if (static_cast<int>(k_labels.size()) != dag.num_vertices())
    fail(ErrorCode::DimensionMismatch, "K labels do not match vertex count");
  BitIndexMap map;
  map.k_labels = k_labels;
  map.K = k_labels[static_cast<std::size_t>(dag.sink())];
  if (map.K < 1) fail(ErrorCode::NoPath, "sink is not reachable from source");
  std::vector<std::vector<EdgeId>> by_bit(static_cast<std::size_t>(map.K));
  for (EdgeId e = 0; e < dag.num_edges(); ++e) {
    const Edge& ed = dag.edge(e);
    int ku = k_labels[static_cast<std::size_t>(ed.tail)];
    int kv = k_labels[static_cast<std::size_t>(ed.head)];
    if (ku < 0 || kv < 0) continue;
    for (int i = ku + 1; i < kv; ++i) by_bit[static_cast<std::size_t>(i)].push_back(e);
  }
  map.slot_of_bit.assign(static_cast<std::size_t>(map.K), -1);
  for (int i = 1; i < map.K; ++i) {
    if (by_bit[static_cast<std::size_t>(i)].empty()) continue;
    map.slot_of_bit[static_cast<std::size_t>(i)] = map.num_live();
    map.live_bits.push_back(i);
    map.support.push_back(std::move(by_bit[static_cast<std::size_t>(i)]));
  }
  return map;
}

std::vector<std::uint8_t> augment_path(const Dag& dag, const PathIncidence& path,
                                       const BitIndexMap& map) {
  std::vector<std::uint8_t> out(path.bits);
  out.resize(static_cast<std::size_t>(dag.num_coordinates() + map.num_live()), 0);
  const std::size_t base = static_cast<std::size_t>(dag.num_coordinates());
  for (EdgeId e : path.edges) {
    const Edge& ed = dag.edge(e);
    for (int i = map.k_labels[static_cast<std::size_t>(ed.tail)] + 1;
         i < map.k_labels[static_cast<std::size_t>(ed.head)]; ++i) {
      int slot = map.slot_of_bit[static_cast<std::size_t>(i)];
      if (slot >= 0) out[base + static_cast<std::size_t>(slot)] = 1;
    }
  }
  return out;
}

std::vector<LinearEquality> flow_constraints(const Dag& dag) {
  std::vector<LinearEquality> rows;
  rows.push_back({{{dag.source(), 1.0}}, 1.0});
  for (VertexId v = 0; v < dag.num_vertices(); ++v) {
    if (v != dag.source()) {
      LinearEquality r{{{v, 1.0}}, 0.0};
      for (EdgeId e : dag.in_edges(v)) r.terms.push_back({dag.edge_coordinate(e), -1.0});
      rows.push_back(std::move(r));
    }
    if (v != dag.sink()) {
      LinearEquality r{{{v, 1.0}}, 0.0};
      for (EdgeId e : dag.out_edges(v)) r.terms.push_back({dag.edge_coordinate(e), -1.0});
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::vector<LinearEquality> augmented_constraints(const Dag& dag, const BitIndexMap& map) {
  std::vector<LinearEquality> rows;
  for (int slot = 0; slot < map.num_live(); ++slot) {
    LinearEquality r{{{dag.num_coordinates() + slot, 1.0}}, 0.0};
    for (EdgeId e : map.support[static_cast<std::size_t>(slot)])
      r.terms.push_back({dag.edge_coordinate(e), -1.0});
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<std::string> coordinate_names(const Dag& dag, const BitIndexMap& map) {
  std::vector<std::string> names;
  for (VertexId v = 0; v < dag.num_vertices(); ++v) names.push_back("v" + dag.vertex_name(v));
  for (EdgeId e = 0; e < dag.num_edges(); ++e)
    names.push_back("e" + std::to_string(e) + ":" + dag.vertex_name(dag.edge(e).tail) + "->" +
                    dag.vertex_name(dag.edge(e).head));
  for (int i : map.live_bits) names.push_back("b" + std::to_string(i));
  return names;
}

}  // namespace dagbandit
