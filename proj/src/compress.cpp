#include "dagbandit/compress.hpp"

#include <algorithm>

#include "dagbandit/error.hpp"

namespace dagbandit {

std::vector<EdgeId> SpanningTree::tree_edges() const {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < static_cast<EdgeId>(is_tree_edge.size()); ++e)
    if (is_tree_edge[static_cast<std::size_t>(e)]) out.push_back(e);
  return out;
}

std::vector<EdgeId> SpanningTree::non_tree_edges() const {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < static_cast<EdgeId>(is_tree_edge.size()); ++e)
    if (!is_tree_edge[static_cast<std::size_t>(e)]) out.push_back(e);
  return out;
}

bool SpanningTree::is_ancestor(VertexId a, VertexId b) const {
  while (b >= 0 && depth[static_cast<std::size_t>(b)] > depth[static_cast<std::size_t>(a)])
    b = parent[static_cast<std::size_t>(b)];
  return a == b;
}

std::vector<EdgeId> SpanningTree::tree_path(VertexId a, VertexId b) const {
  std::vector<EdgeId> out;
  while (b != a) {
    if (b < 0) fail(ErrorCode::InvalidPath, "tree_path: not an ancestor");
    out.push_back(parent_edge[static_cast<std::size_t>(b)]);
    b = parent[static_cast<std::size_t>(b)];
  }
  std::reverse(out.begin(), out.end());
  return out;
}

SpanningTree build_spanning_tree(const Dag& dag, const std::vector<BigInt>& counts) {
  auto order = topo_order(dag);
  std::vector<int> pos(static_cast<std::size_t>(dag.num_vertices()));
  for (std::size_t i = 0; i < order.size(); ++i) pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);

  SpanningTree t;
  const auto n = static_cast<std::size_t>(dag.num_vertices());
  t.parent_edge.assign(n, -1);
  t.parent.assign(n, -1);
  t.children.assign(n, {});
  t.depth.assign(n, 0);
  t.is_tree_edge.assign(static_cast<std::size_t>(dag.num_edges()), 0);
  for (VertexId v : order) {
    if (v == dag.source()) continue;
    EdgeId best = -1;
    for (EdgeId e : dag.in_edges(v)) {
      if (best < 0) {
        best = e;
        continue;
      }
      const VertexId u = dag.edge(e).tail, b = dag.edge(best).tail;
      const auto& cu = counts[static_cast<std::size_t>(u)];
      const auto& cb = counts[static_cast<std::size_t>(b)];
      if (cu > cb || (cu == cb && pos[static_cast<std::size_t>(u)] > pos[static_cast<std::size_t>(b)]))
        best = e;
    }
    if (best < 0) fail(ErrorCode::NoPath, "vertex " + dag.vertex_name(v) + " has no incoming edge");
    const VertexId u = dag.edge(best).tail;
    t.parent_edge[static_cast<std::size_t>(v)] = best;
    t.parent[static_cast<std::size_t>(v)] = u;
    t.is_tree_edge[static_cast<std::size_t>(best)] = 1;
    t.children[static_cast<std::size_t>(u)].push_back(v);
    t.depth[static_cast<std::size_t>(v)] = t.depth[static_cast<std::size_t>(u)] + 1;
  }
  return t;
}

CentroidDecomp centroid_decompose(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  CentroidDecomp d;
  d.level.assign(static_cast<std::size_t>(n), -1);
  d.parent_centroid.assign(static_cast<std::size_t>(n), -1);
  d.subtree.assign(static_cast<std::size_t>(n), {});
  if (n == 0) return d;

  std::vector<char> removed(static_cast<std::size_t>(n), 0);
  std::vector<int> size(static_cast<std::size_t>(n), 0), par(static_cast<std::size_t>(n), -1);

  struct Task {
    int start;
    int parent_centroid;
    int level;
  };
  std::vector<Task> tasks{{0, -1, 0}};
  while (!tasks.empty()) {
    Task task = tasks.back();
    tasks.pop_back();
    // collect the component in DFS preorder
    std::vector<int> comp{task.start};
    par[static_cast<std::size_t>(task.start)] = -1;
    for (std::size_t i = 0; i < comp.size(); ++i) {
      int v = comp[i];
      for (int w : adj[static_cast<std::size_t>(v)]) {
        if (removed[static_cast<std::size_t>(w)] || w == par[static_cast<std::size_t>(v)]) continue;
        par[static_cast<std::size_t>(w)] = v;
        comp.push_back(w);
      }
    }
    for (auto it = comp.rbegin(); it != comp.rend(); ++it) {
      int v = *it;
      size[static_cast<std::size_t>(v)] = 1;
      for (int w : adj[static_cast<std::size_t>(v)])
        if (!removed[static_cast<std::size_t>(w)] && w != par[static_cast<std::size_t>(v)])
          size[static_cast<std::size_t>(v)] += size[static_cast<std::size_t>(w)];
    }
    const int total = static_cast<int>(comp.size());
    int centroid = -1;
    for (int v : comp) {
      int biggest = total - size[static_cast<std::size_t>(v)];
      for (int w : adj[static_cast<std::size_t>(v)])
        if (!removed[static_cast<std::size_t>(w)] && w != par[static_cast<std::size_t>(v)])
          biggest = std::max(biggest, size[static_cast<std::size_t>(w)]);
      if (2 * biggest <= total && (centroid < 0 || v < centroid)) centroid = v;
    }
    std::sort(comp.begin(), comp.end());
    d.subtree[static_cast<std::size_t>(centroid)] = comp;
    d.level[static_cast<std::size_t>(centroid)] = task.level;
    d.parent_centroid[static_cast<std::size_t>(centroid)] = task.parent_centroid;
    if (task.parent_centroid < 0) d.root = centroid;
    removed[static_cast<std::size_t>(centroid)] = 1;
    const auto& nb = adj[static_cast<std::size_t>(centroid)];
    for (auto it = nb.rbegin(); it != nb.rend(); ++it)
      if (!removed[static_cast<std::size_t>(*it)]) tasks.push_back({*it, centroid, task.level + 1});
  }
  return d;
}

CentroidDecomp centroid_decompose(const SpanningTree& tree) {
  std::vector<std::vector<int>> adj(tree.parent.size());
  for (std::size_t v = 0; v < tree.parent.size(); ++v) {
    for (VertexId c : tree.children[v]) {
      adj[v].push_back(c);
      adj[static_cast<std::size_t>(c)].push_back(static_cast<int>(v));
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return centroid_decompose(adj);
}

CompressedDag build_gdagger(const Dag& dag) {
  CompressedDag c;
  c.original = dag;
  c.tree = build_spanning_tree(dag, count_paths(dag));
  c.decomp = centroid_decompose(c.tree);

  std::vector<Edge> edges;
  auto add = [&](VertexId u, VertexId v, std::vector<EdgeId> s, DaggerEdgeKind k) {
    edges.push_back({u, v});
    c.sigma.push_back(std::move(s));
    c.kind.push_back(k);
  };
  for (VertexId cen = 0; cen < dag.num_vertices(); ++cen) {
    for (VertexId v : c.decomp.subtree[static_cast<std::size_t>(cen)]) {
      if (c.tree.is_ancestor(v, cen))
        add(CompressedDag::flat(v), CompressedDag::mid(cen), c.tree.tree_path(v, cen),
            DaggerEdgeKind::IntoCentroid);
    }
    for (VertexId v : c.decomp.subtree[static_cast<std::size_t>(cen)]) {
      if (c.tree.is_ancestor(cen, v))
        add(CompressedDag::mid(cen), CompressedDag::sharp(v), c.tree.tree_path(cen, v),
            DaggerEdgeKind::OutOfCentroid);
    }
  }
  for (EdgeId e : c.tree.non_tree_edges())
    add(CompressedDag::sharp(dag.edge(e).tail), CompressedDag::flat(dag.edge(e).head), {e},
        DaggerEdgeKind::NonTree);

  c.gdag = Dag(3 * dag.num_vertices(), std::move(edges), CompressedDag::flat(dag.source()),
               CompressedDag::sharp(dag.sink()));
  std::vector<std::string> names;
  for (VertexId v = 0; v < dag.num_vertices(); ++v) {
    const std::string base = dag.vertex_name(v);
    names.push_back(base + "_flat");
    names.push_back(base);
    names.push_back(base + "_sharp");
  }
  c.gdag.set_vertex_names(std::move(names));
  return c;
}

const std::vector<EdgeId>& sigma(const CompressedDag& cdag, EdgeId dagger_edge) {
  if (dagger_edge < 0 || dagger_edge >= cdag.gdag.num_edges())
    fail(ErrorCode::UnknownEdge, "no G-dagger edge " + std::to_string(dagger_edge));
  return cdag.sigma[static_cast<std::size_t>(dagger_edge)];
}

PathIncidence project_path(const CompressedDag& cdag, const PathIncidence& dagger_path) {
  std::vector<EdgeId> edges;
  for (EdgeId ed : dagger_path.edges) {
    const auto& s = sigma(cdag, ed);
    edges.insert(edges.end(), s.begin(), s.end());
  }
  return make_path(cdag.original, std::move(edges));
}

PathIncidence lift_path(const CompressedDag& cdag, const PathIncidence& path) {
  const Dag& g = cdag.original;
  if (static_cast<int>(path.bits.size()) != g.num_coordinates())
    fail(ErrorCode::InvalidPath, "path does not belong to the original graph");
  std::vector<EdgeId> out;
  auto edge_of = [&](VertexId u, VertexId v) {
    auto e = cdag.gdag.find_edge(u, v);
    if (!e) fail(ErrorCode::InvalidPath, "lift: missing G-dagger edge");
    return *e;
  };
  VertexId seg_start = g.source();
  VertexId best = g.source();  // vertex of the segment with the smallest centroid level
  auto close_segment = [&](VertexId seg_end) {
    out.push_back(edge_of(CompressedDag::flat(seg_start), CompressedDag::mid(best)));
    out.push_back(edge_of(CompressedDag::mid(best), CompressedDag::sharp(seg_end)));
  };
  for (EdgeId e : path.edges) {
    if (e < 0 || e >= g.num_edges()) fail(ErrorCode::InvalidPath, "edge index out of range");
    const Edge& ed = g.edge(e);
    if (cdag.tree.is_tree_edge[static_cast<std::size_t>(e)]) {
      if (cdag.decomp.level[static_cast<std::size_t>(ed.head)] <
          cdag.decomp.level[static_cast<std::size_t>(best)])
        best = ed.head;
    } else {
      close_segment(ed.tail);
      out.push_back(edge_of(CompressedDag::sharp(ed.tail), CompressedDag::flat(ed.head)));
      seg_start = best = ed.head;
    }
  }
  close_segment(g.sink());
  return make_path(cdag.gdag, std::move(out));
}

LossVector convert_weights(const CompressedDag& cdag, const LossVector& weights) {
  if (static_cast<int>(weights.size()) != cdag.original.num_edges())
    fail(ErrorCode::DimensionMismatch, "loss vector length does not match edge count");
  LossVector out(static_cast<std::size_t>(cdag.gdag.num_edges()), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (EdgeId e : cdag.sigma[i]) out[i] += weights[static_cast<std::size_t>(e)];
  return out;
}

}  // namespace dagbandit
