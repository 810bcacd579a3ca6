#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace dagbandit {

using VertexId = int;
using EdgeId = int;
using BigInt = boost::multiprecision::cpp_int;

class Dag;

struct Edge {
  VertexId tail = 0;
  VertexId head = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Directed graph with a designated source and sink. Vertices and edges carry
// dense indices; every vector over V∪E uses the layout [vertices | edges].
//
// Construction rejects out-of-range endpoints, self loops and parallel edges.
// Acyclicity and reachability are not enforced here: topo_order() reports
// cycles and prune() removes vertices off every source-sink path.
class Dag {
 public:
  Dag() = default;
  Dag(int num_vertices, std::vector<Edge> edges, VertexId source, VertexId sink);

  int num_vertices() const { return num_vertices_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_coordinates() const { return num_vertices_ + num_edges(); }
  int edge_coordinate(EdgeId e) const { return num_vertices_ + e; }

  VertexId source() const { return source_; }
  VertexId sink() const { return sink_; }

  const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const EdgeId> out_edges(VertexId v) const {
    return out_[static_cast<std::size_t>(v)];
  }
  std::span<const EdgeId> in_edges(VertexId v) const {
    return in_[static_cast<std::size_t>(v)];
  }

  std::optional<EdgeId> find_edge(VertexId tail, VertexId head) const;

  // Optional human-readable vertex names (empty when unnamed).
  const std::vector<std::string>& vertex_names() const { return names_; }
  void set_vertex_names(std::vector<std::string> names);
  std::string vertex_name(VertexId v) const;

 private:
  int num_vertices_ = 0;
  std::vector<Edge> edges_;
  VertexId source_ = 0;
  VertexId sink_ = 0;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<std::vector<EdgeId>> in_;
  std::vector<std::string> names_;
};

// One source-sink path. `edges` is in walk order; `bits` is the 0/1 incidence
// vector over V∪E.
struct PathIncidence {
  std::vector<EdgeId> edges;
  std::vector<std::uint8_t> bits;

  int length() const { return static_cast<int>(edges.size()); }
  int l1_norm() const { return 2 * length() + 1; }
  std::vector<VertexId> vertices(const Dag& dag) const;

  friend bool operator==(const PathIncidence& a, const PathIncidence& b) {
    return a.edges == b.edges;
  }
  friend bool operator<(const PathIncidence& a, const PathIncidence& b) {
    return a.edges < b.edges;
  }
};

// Builds the incidence of a walk given as consecutive edges from source to
// sink. Throws InvalidPath otherwise.
PathIncidence make_path(const Dag& dag, std::vector<EdgeId> edges);

// Builds a path from a vertex sequence.
PathIncidence make_path_from_vertices(const Dag& dag, std::span<const VertexId> vertices);

// Checks the PathIncidence invariants on a raw 0/1 vector.
bool is_path_incidence(const Dag& dag, std::span<const std::uint8_t> bits);

// Edge weights; vertex coordinates of a loss vector are implicitly zero.
using LossVector = std::vector<double>;

double path_loss(const LossVector& weights, const PathIncidence& path);

struct PathLossRange {
  double min = 0.0;
  double max = 0.0;
};

// Minimum and maximum path weight by dynamic programming over a topological
// order (paths from source to sink only).
PathLossRange path_loss_range(const Dag& dag, const LossVector& weights);

// True iff every source-sink path weight lies in [-1, 1].
bool satisfies_loss_bound(const Dag& dag, const LossVector& weights, double slack = 1e-12);

// Kahn's algorithm, always releasing the smallest ready vertex id first so the
// order is canonical. Throws CycleDetected.
std::vector<VertexId> topo_order(const Dag& dag);

struct PrunedDag {
  Dag dag;
  std::vector<int> vertex_to_new;   // old id -> new id or -1
  std::vector<int> edge_to_new;     // old id -> new id or -1
  std::vector<VertexId> vertex_to_old;
  std::vector<EdgeId> edge_to_old;
};

// Keeps exactly the vertices and edges lying on some source-sink path.
// Relative order of surviving vertices and edges is preserved. Throws NoPath.
PrunedDag prune_with_map(const Dag& dag);
Dag prune(const Dag& dag);

// C(v): number of source->v paths, exact.
std::vector<BigInt> count_paths(const Dag& dag);

// Number of v->sink paths, exact.
std::vector<BigInt> count_paths_to_sink(const Dag& dag);

// K(v): length of the longest source->v path (-1 if unreachable).
std::vector<int> longest_dist(const Dag& dag);

// Length of the shortest source->v path (-1 if unreachable).
std::vector<int> shortest_dist(const Dag& dag);

// True iff every source-sink path has the same number of edges.
bool has_uniform_path_length(const Dag& dag);

// All source-sink paths in lexicographic order of their edge-index sequence.
// Throws TooManyPaths if the count exceeds cap.
std::vector<PathIncidence> enumerate_paths(const Dag& dag, std::size_t cap);

inline constexpr double kFlowTolerance = 1e-8;

// Membership test for the flow polytope co(X). Throws DimensionMismatch if
// the point is not indexed by V∪E.
bool validate_flow(std::span<const double> point, const Dag& dag,
                   double tol = kFlowTolerance);

struct BestPath {
  PathIncidence path;
  double loss = 0.0;
};

// argmin over paths of the cumulative loss; ties go to the lexicographically
// smallest edge sequence reachable by the DP.
BestPath best_path_in_hindsight(const Dag& dag, const LossVector& cumulative);

// Converts a BigInt to double (may round; saturates to +inf).
double to_double(const BigInt& value);

// log2 of a positive BigInt, accurate for arbitrarily large values.
double log2_big(const BigInt& value);

}  // namespace dagbandit
