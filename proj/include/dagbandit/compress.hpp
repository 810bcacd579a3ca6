#pragma once

#include <vector>

#include "dagbandit/graph.hpp"

namespace dagbandit {

// Directed spanning tree rooted at the source: every other vertex keeps the
// incoming edge whose tail has the most source paths.
struct SpanningTree {
  std::vector<EdgeId> parent_edge;   // -1 at the source
  std::vector<VertexId> parent;      // -1 at the source
  std::vector<char> is_tree_edge;    // per edge
  std::vector<std::vector<VertexId>> children;
  std::vector<int> depth;            // depth in the tree

  std::vector<EdgeId> tree_edges() const;
  std::vector<EdgeId> non_tree_edges() const;
  // true when a is an ancestor of b (or a == b)
  bool is_ancestor(VertexId a, VertexId b) const;
  // tree edges from a down to b; requires is_ancestor(a, b)
  std::vector<EdgeId> tree_path(VertexId a, VertexId b) const;
};

// Ties go to the tail that comes last in topo_order(dag).
SpanningTree build_spanning_tree(const Dag& dag, const std::vector<BigInt>& counts);

// Recursive centroid decomposition of the undirected tree.
struct CentroidDecomp {
  std::vector<int> level;                        // recursion depth at which v is centroid
  std::vector<VertexId> parent_centroid;         // -1 for the top centroid
  std::vector<std::vector<VertexId>> subtree;    // V_c, sorted
  VertexId root = -1;
};

// Generic form over an undirected adjacency list (used by tests on random
// trees); ties go to the smallest vertex id.
CentroidDecomp centroid_decompose(const std::vector<std::vector<int>>& adjacency);
CentroidDecomp centroid_decompose(const SpanningTree& tree);

enum class DaggerEdgeKind { IntoCentroid, OutOfCentroid, NonTree };

struct CompressedDag {
  Dag original;
  SpanningTree tree;
  CentroidDecomp decomp;
  Dag gdag;                                     // vertices 3v (flat), 3v+1 (v), 3v+2 (sharp)
  std::vector<std::vector<EdgeId>> sigma;       // per G† edge, original edges in walk order
  std::vector<DaggerEdgeKind> kind;

  static VertexId flat(VertexId v) { return 3 * v; }
  static VertexId mid(VertexId v) { return 3 * v + 1; }
  static VertexId sharp(VertexId v) { return 3 * v + 2; }
};

// Expects a pruned DAG.
CompressedDag build_gdagger(const Dag& dag);

const std::vector<EdgeId>& sigma(const CompressedDag& cdag, EdgeId dagger_edge);

PathIncidence project_path(const CompressedDag& cdag, const PathIncidence& dagger_path);
PathIncidence lift_path(const CompressedDag& cdag, const PathIncidence& path);

LossVector convert_weights(const CompressedDag& cdag, const LossVector& weights);

}  // namespace dagbandit
