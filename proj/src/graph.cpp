#include "dagbandit/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <unordered_set>

#include "dagbandit/error.hpp"

namespace dagbandit {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::TooManyPaths: return "TooManyPaths";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownEdge: return "UnknownEdge";
    case ErrorCode::InvalidPath: return "InvalidPath";
    case ErrorCode::NonPositiveCoordinate: return "NonPositiveCoordinate";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::SolverStall: return "SolverStall";
    case ErrorCode::ZeroMarginal: return "ZeroMarginal";
    case ErrorCode::DeadEnd: return "DeadEnd";
    case ErrorCode::UnequalLengths: return "UnequalLengths";
    case ErrorCode::OutOfRangeLoss: return "OutOfRangeLoss";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::MalformedGame: return "MalformedGame";
    case ErrorCode::NoWalk: return "NoWalk";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

namespace {

std::uint64_t edge_key(VertexId u, VertexId v) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

}  // namespace

Dag::Dag(int num_vertices, std::vector<Edge> edges, VertexId source, VertexId sink)
    : num_vertices_(num_vertices), edges_(std::move(edges)), source_(source), sink_(sink) {
  if (num_vertices < 1) fail(ErrorCode::InvalidArgument, "graph needs at least one vertex");
  auto in_range = [&](VertexId v) { return v >= 0 && v < num_vertices_; };
  if (!in_range(source) || !in_range(sink))
    fail(ErrorCode::InvalidArgument, "source/sink out of range");
  if (source == sink) fail(ErrorCode::InvalidArgument, "source and sink must differ");
  out_.assign(static_cast<std::size_t>(num_vertices_), {});
  in_.assign(static_cast<std::size_t>(num_vertices_), {});
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges_.size() * 2);
  for (EdgeId e = 0; e < num_edges(); ++e) {
    const Edge& ed = edges_[static_cast<std::size_t>(e)];
    if (!in_range(ed.tail) || !in_range(ed.head))
      fail(ErrorCode::InvalidArgument, "edge " + std::to_string(e) + " has an endpoint out of range");
    if (ed.tail == ed.head)
      fail(ErrorCode::CycleDetected, "edge " + std::to_string(e) + " is a self loop");
    if (!seen.insert(edge_key(ed.tail, ed.head)).second)
      fail(ErrorCode::InvalidArgument, "parallel edge " + std::to_string(ed.tail) + "->" +
                                           std::to_string(ed.head));
    out_[static_cast<std::size_t>(ed.tail)].push_back(e);
    in_[static_cast<std::size_t>(ed.head)].push_back(e);
  }
}

std::optional<EdgeId> Dag::find_edge(VertexId tail, VertexId head) const {
  if (tail < 0 || tail >= num_vertices_) return std::nullopt;
  for (EdgeId e : out_edges(tail))
    if (edge(e).head == head) return e;
  return std::nullopt;
}

void Dag::set_vertex_names(std::vector<std::string> names) {
  if (!names.empty() && static_cast<int>(names.size()) != num_vertices_)
    fail(ErrorCode::DimensionMismatch, "vertex name count does not match vertex count");
  names_ = std::move(names);
}

std::string Dag::vertex_name(VertexId v) const {
  if (!names_.empty()) return names_[static_cast<std::size_t>(v)];
  return std::to_string(v);
}

std::vector<VertexId> PathIncidence::vertices(const Dag& dag) const {
  std::vector<VertexId> out;
  out.reserve(edges.size() + 1);
  out.push_back(dag.source());
  for (EdgeId e : edges) out.push_back(dag.edge(e).head);
  return out;
}

PathIncidence make_path(const Dag& dag, std::vector<EdgeId> edges) {
  if (edges.empty()) fail(ErrorCode::InvalidPath, "empty path");
  PathIncidence p;
  p.bits.assign(static_cast<std::size_t>(dag.num_coordinates()), 0);
  VertexId at = dag.source();
  p.bits[static_cast<std::size_t>(at)] = 1;
  for (EdgeId e : edges) {
    if (e < 0 || e >= dag.num_edges()) fail(ErrorCode::InvalidPath, "edge index out of range");
    const Edge& ed = dag.edge(e);
    if (ed.tail != at) fail(ErrorCode::InvalidPath, "edges are not consecutive");
    at = ed.head;
    auto& vb = p.bits[static_cast<std::size_t>(at)];
    if (vb) fail(ErrorCode::InvalidPath, "path revisits a vertex");
    vb = 1;
    p.bits[static_cast<std::size_t>(dag.edge_coordinate(e))] = 1;
  }
  if (at != dag.sink()) fail(ErrorCode::InvalidPath, "path does not end at the sink");
  p.edges = std::move(edges);
  return p;
}

PathIncidence make_path_from_vertices(const Dag& dag, std::span<const VertexId> vertices) {
  if (vertices.size() < 2) fail(ErrorCode::InvalidPath, "path needs at least two vertices");
  std::vector<EdgeId> edges;
  for (std::size_t i = 0; i + 1 < vertices.size(); ++i) {
    auto e = dag.find_edge(vertices[i], vertices[i + 1]);
    if (!e) fail(ErrorCode::InvalidPath, "no edge " + std::to_string(vertices[i]) + "->" +
                                             std::to_string(vertices[i + 1]));
    edges.push_back(*e);
  }
  return make_path(dag, std::move(edges));
}

bool is_path_incidence(const Dag& dag, std::span<const std::uint8_t> bits) {
  if (static_cast<int>(bits.size()) != dag.num_coordinates()) return false;
  std::size_t ones = 0;
  for (auto b : bits) {
    if (b > 1) return false;
    ones += b;
  }
  VertexId at = dag.source();
  if (!bits[static_cast<std::size_t>(at)]) return false;
  std::size_t walked = 1;
  while (at != dag.sink()) {
    EdgeId next = -1;
    for (EdgeId e : dag.out_edges(at)) {
      if (bits[static_cast<std::size_t>(dag.edge_coordinate(e))]) {
        if (next >= 0) return false;
        next = e;
      }
    }
    if (next < 0) return false;
    at = dag.edge(next).head;
    if (!bits[static_cast<std::size_t>(at)]) return false;
    walked += 2;
    if (walked > bits.size()) return false;
  }
  return walked == ones;
}

double path_loss(const LossVector& weights, const PathIncidence& path) {
  double s = 0.0;
  for (EdgeId e : path.edges) s += weights[static_cast<std::size_t>(e)];
  return s;
}

std::vector<VertexId> topo_order(const Dag& dag) {
  const int n = dag.num_vertices();
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  for (const Edge& e : dag.edges()) ++indeg[static_cast<std::size_t>(e.head)];
  std::priority_queue<VertexId, std::vector<VertexId>, std::greater<>> ready;
  for (VertexId v = 0; v < n; ++v)
    if (indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
  std::vector<VertexId> order;
  order.reserve(static_cast<std::size_t>(n));
  while (!ready.empty()) {
    VertexId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (EdgeId e : dag.out_edges(v)) {
      VertexId h = dag.edge(e).head;
      if (--indeg[static_cast<std::size_t>(h)] == 0) ready.push(h);
    }
  }
  if (static_cast<int>(order.size()) != n) fail(ErrorCode::CycleDetected, "graph has a directed cycle");
  return order;
}

namespace {

std::vector<char> forward_reach(const Dag& dag) {
  std::vector<char> seen(static_cast<std::size_t>(dag.num_vertices()), 0);
  std::vector<VertexId> stack{dag.source()};
  seen[static_cast<std::size_t>(dag.source())] = 1;
  while (!stack.empty()) {
    VertexId v = stack.back();
    stack.pop_back();
    for (EdgeId e : dag.out_edges(v)) {
      VertexId h = dag.edge(e).head;
      if (!seen[static_cast<std::size_t>(h)]) {
        seen[static_cast<std::size_t>(h)] = 1;
        stack.push_back(h);
      }
    }
  }
  return seen;
}

std::vector<char> backward_reach(const Dag& dag) {
  std::vector<char> seen(static_cast<std::size_t>(dag.num_vertices()), 0);
  std::vector<VertexId> stack{dag.sink()};
  seen[static_cast<std::size_t>(dag.sink())] = 1;
  while (!stack.empty()) {
    VertexId v = stack.back();
    stack.pop_back();
    for (EdgeId e : dag.in_edges(v)) {
      VertexId t = dag.edge(e).tail;
      if (!seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = 1;
        stack.push_back(t);
      }
    }
  }
  return seen;
}

}  // namespace

PrunedDag prune_with_map(const Dag& dag) {
  topo_order(dag);
  auto fwd = forward_reach(dag);
  if (!fwd[static_cast<std::size_t>(dag.sink())])
    fail(ErrorCode::NoPath, "sink is not reachable from source");
  auto bwd = backward_reach(dag);

  PrunedDag out;
  out.vertex_to_new.assign(static_cast<std::size_t>(dag.num_vertices()), -1);
  out.edge_to_new.assign(static_cast<std::size_t>(dag.num_edges()), -1);
  for (VertexId v = 0; v < dag.num_vertices(); ++v) {
    if (fwd[static_cast<std::size_t>(v)] && bwd[static_cast<std::size_t>(v)]) {
      out.vertex_to_new[static_cast<std::size_t>(v)] = static_cast<int>(out.vertex_to_old.size());
      out.vertex_to_old.push_back(v);
    }
  }
  std::vector<Edge> edges;
  for (EdgeId e = 0; e < dag.num_edges(); ++e) {
    const Edge& ed = dag.edge(e);
    int t = out.vertex_to_new[static_cast<std::size_t>(ed.tail)];
    int h = out.vertex_to_new[static_cast<std::size_t>(ed.head)];
    if (t < 0 || h < 0) continue;
    if (ed.head == dag.source() || ed.tail == dag.sink()) continue;
    out.edge_to_new[static_cast<std::size_t>(e)] = static_cast<int>(edges.size());
    out.edge_to_old.push_back(e);
    edges.push_back({t, h});
  }
  out.dag = Dag(static_cast<int>(out.vertex_to_old.size()), std::move(edges),
                out.vertex_to_new[static_cast<std::size_t>(dag.source())],
                out.vertex_to_new[static_cast<std::size_t>(dag.sink())]);
  if (!dag.vertex_names().empty()) {
    std::vector<std::string> names;
    for (VertexId v : out.vertex_to_old) names.push_back(dag.vertex_names()[static_cast<std::size_t>(v)]);
    out.dag.set_vertex_names(std::move(names));
  }
  return out;
}

Dag prune(const Dag& dag) { return prune_with_map(dag).dag; }

std::vector<BigInt> count_paths(const Dag& dag) {
  auto order = topo_order(dag);
  std::vector<BigInt> c(static_cast<std::size_t>(dag.num_vertices()));
  c[static_cast<std::size_t>(dag.source())] = 1;
  for (VertexId v : order)
    for (EdgeId e : dag.out_edges(v))
      c[static_cast<std::size_t>(dag.edge(e).head)] += c[static_cast<std::size_t>(v)];
  return c;
}

std::vector<BigInt> count_paths_to_sink(const Dag& dag) {
  auto order = topo_order(dag);
  std::vector<BigInt> c(static_cast<std::size_t>(dag.num_vertices()));
  c[static_cast<std::size_t>(dag.sink())] = 1;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    for (EdgeId e : dag.out_edges(*it))
      c[static_cast<std::size_t>(*it)] += c[static_cast<std::size_t>(dag.edge(e).head)];
  return c;
}

std::vector<int> longest_dist(const Dag& dag) {
  auto order = topo_order(dag);
  std::vector<int> k(static_cast<std::size_t>(dag.num_vertices()), -1);
  k[static_cast<std::size_t>(dag.source())] = 0;
  for (VertexId v : order) {
    int kv = k[static_cast<std::size_t>(v)];
    if (kv < 0) continue;
    for (EdgeId e : dag.out_edges(v)) {
      int& kh = k[static_cast<std::size_t>(dag.edge(e).head)];
      kh = std::max(kh, kv + 1);
    }
  }
  return k;
}

std::vector<int> shortest_dist(const Dag& dag) {
  auto order = topo_order(dag);
  std::vector<int> k(static_cast<std::size_t>(dag.num_vertices()), -1);
  k[static_cast<std::size_t>(dag.source())] = 0;
  for (VertexId v : order) {
    int kv = k[static_cast<std::size_t>(v)];
    if (kv < 0) continue;
    for (EdgeId e : dag.out_edges(v)) {
      int& kh = k[static_cast<std::size_t>(dag.edge(e).head)];
      if (kh < 0 || kv + 1 < kh) kh = kv + 1;
    }
  }
  return k;
}

bool has_uniform_path_length(const Dag& dag) {
  Dag p = prune(dag);
  auto lo = shortest_dist(p);
  auto hi = longest_dist(p);
  return lo == hi;
}

std::vector<PathIncidence> enumerate_paths(const Dag& dag, std::size_t cap) {
  auto to_sink = count_paths_to_sink(dag);
  const BigInt& total = to_sink[static_cast<std::size_t>(dag.source())];
  if (total > BigInt(cap))
    fail(ErrorCode::TooManyPaths, "path count " + total.str() + " exceeds cap " + std::to_string(cap));
  std::vector<PathIncidence> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<EdgeId> stack;
  std::function<void(VertexId)> dfs = [&](VertexId v) {
    if (v == dag.sink()) {
      out.push_back(make_path(dag, stack));
      return;
    }
    for (EdgeId e : dag.out_edges(v)) {
      VertexId h = dag.edge(e).head;
      if (to_sink[static_cast<std::size_t>(h)] == 0) continue;
      stack.push_back(e);
      dfs(h);
      stack.pop_back();
    }
  };
  if (total > 0) dfs(dag.source());
  return out;
}

bool validate_flow(std::span<const double> point, const Dag& dag, double tol) {
  if (static_cast<int>(point.size()) != dag.num_coordinates())
    fail(ErrorCode::DimensionMismatch, "flow point has " + std::to_string(point.size()) +
                                           " coordinates, expected " +
                                           std::to_string(dag.num_coordinates()));
  for (double x : point)
    if (!(x >= -tol && x <= 1.0 + tol)) return false;
  if (std::abs(point[static_cast<std::size_t>(dag.source())] - 1.0) > tol) return false;
  if (std::abs(point[static_cast<std::size_t>(dag.sink())] - 1.0) > tol) return false;
  for (VertexId v = 0; v < dag.num_vertices(); ++v) {
    const double xv = point[static_cast<std::size_t>(v)];
    if (v != dag.source()) {
      double s = 0.0;
      for (EdgeId e : dag.in_edges(v)) s += point[static_cast<std::size_t>(dag.edge_coordinate(e))];
      if (std::abs(s - xv) > tol) return false;
    }
    if (v != dag.sink()) {
      double s = 0.0;
      for (EdgeId e : dag.out_edges(v)) s += point[static_cast<std::size_t>(dag.edge_coordinate(e))];
      if (std::abs(s - xv) > tol) return false;
    }
  }
  return true;
}

PathLossRange path_loss_range(const Dag& dag, const LossVector& weights) {
  if (static_cast<int>(weights.size()) != dag.num_edges())
    fail(ErrorCode::DimensionMismatch, "loss vector length does not match edge count");
  auto order = topo_order(dag);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lo(static_cast<std::size_t>(dag.num_vertices()), inf);
  std::vector<double> hi(static_cast<std::size_t>(dag.num_vertices()), -inf);
  lo[static_cast<std::size_t>(dag.source())] = 0.0;
  hi[static_cast<std::size_t>(dag.source())] = 0.0;
  for (VertexId v : order) {
    if (lo[static_cast<std::size_t>(v)] == inf) continue;
    for (EdgeId e : dag.out_edges(v)) {
      auto h = static_cast<std::size_t>(dag.edge(e).head);
      double w = weights[static_cast<std::size_t>(e)];
      lo[h] = std::min(lo[h], lo[static_cast<std::size_t>(v)] + w);
      hi[h] = std::max(hi[h], hi[static_cast<std::size_t>(v)] + w);
    }
  }
  auto t = static_cast<std::size_t>(dag.sink());
  if (lo[t] == inf) fail(ErrorCode::NoPath, "sink is not reachable from source");
  return {lo[t], hi[t]};
}

bool satisfies_loss_bound(const Dag& dag, const LossVector& weights, double slack) {
  auto r = path_loss_range(dag, weights);
  return r.min >= -1.0 - slack && r.max <= 1.0 + slack;
}

BestPath best_path_in_hindsight(const Dag& dag, const LossVector& cumulative) {
  if (static_cast<int>(cumulative.size()) != dag.num_edges())
    fail(ErrorCode::DimensionMismatch, "loss vector length does not match edge count");
  auto order = topo_order(dag);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> suffix(static_cast<std::size_t>(dag.num_vertices()), inf);
  std::vector<EdgeId> choice(static_cast<std::size_t>(dag.num_vertices()), -1);
  suffix[static_cast<std::size_t>(dag.sink())] = 0.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VertexId v = *it;
    if (v == dag.sink()) continue;
    for (EdgeId e : dag.out_edges(v)) {
      double tail = suffix[static_cast<std::size_t>(dag.edge(e).head)];
      if (tail == inf) continue;
      double cand = cumulative[static_cast<std::size_t>(e)] + tail;
      if (cand < suffix[static_cast<std::size_t>(v)]) {
        suffix[static_cast<std::size_t>(v)] = cand;
        choice[static_cast<std::size_t>(v)] = e;
      }
    }
  }
  if (choice[static_cast<std::size_t>(dag.source())] < 0)
    fail(ErrorCode::NoPath, "sink is not reachable from source");
  std::vector<EdgeId> edges;
  for (VertexId v = dag.source(); v != dag.sink();) {
    EdgeId e = choice[static_cast<std::size_t>(v)];
    edges.push_back(e);
    v = dag.edge(e).head;
  }
  BestPath best;
  best.path = make_path(dag, std::move(edges));
  best.loss = path_loss(cumulative, best.path);
  return best;
}

double to_double(const BigInt& value) { return value.convert_to<double>(); }

double log2_big(const BigInt& value) {
  if (value <= 0) fail(ErrorCode::InvalidArgument, "log2 of a non-positive integer");
  std::size_t msb = boost::multiprecision::msb(value);
  if (msb < 1000) return std::log2(value.convert_to<double>());
  std::size_t shift = msb - 60;
  BigInt top = value >> shift;
  return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

}  // namespace dagbandit
