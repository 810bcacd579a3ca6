#include "dagbandit/sampler.hpp"

#include "dagbandit/error.hpp"

namespace dagbandit {

namespace {

void check_dim(const Dag& dag, std::span<const double> x) {
  if (static_cast<int>(x.size()) < dag.num_coordinates())
    fail(ErrorCode::DimensionMismatch, "flow point is shorter than |V|+|E|");
}

double out_mass(const Dag& dag, std::span<const double> x, VertexId v) {
  double s = 0.0;
  for (EdgeId e : dag.out_edges(v)) s += x[static_cast<std::size_t>(dag.edge_coordinate(e))];
  return s;
}

}  // namespace

PathIncidence sample_path(const Dag& dag, std::span<const double> x, Rng& rng) {
  check_dim(dag, x);
  std::vector<EdgeId> edges;
  VertexId v = dag.source();
  while (v != dag.sink()) {
    const double total = out_mass(dag, x, v);
    if (!(total > 0.0)) fail(ErrorCode::DeadEnd, "walk stuck at vertex " + dag.vertex_name(v));
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    EdgeId pick = -1;
    for (EdgeId e : dag.out_edges(v)) {
      const double xe = x[static_cast<std::size_t>(dag.edge_coordinate(e))];
      if (!(xe > 0.0)) continue;
      pick = e;
      acc += xe;
      if (u < acc) break;
    }
    edges.push_back(pick);
    v = dag.edge(pick).head;
  }
  return make_path(dag, std::move(edges));
}

std::vector<std::pair<PathIncidence, double>> sampler_law(const Dag& dag, std::span<const double> x,
                                                          std::size_t cap) {
  check_dim(dag, x);
  auto paths = enumerate_paths(dag, cap);
  std::vector<std::pair<PathIncidence, double>> law;
  law.reserve(paths.size());
  for (auto& p : paths) {
    double prob = 1.0;
    for (EdgeId e : p.edges) {
      const double total = out_mass(dag, x, dag.edge(e).tail);
      if (!(total > 0.0)) {
        prob = 0.0;
        break;
      }
      prob *= x[static_cast<std::size_t>(dag.edge_coordinate(e))] / total;
    }
    law.emplace_back(std::move(p), prob);
  }
  return law;
}

}  // namespace dagbandit
