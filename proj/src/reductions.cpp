#include "dagbandit/reductions.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "dagbandit/error.hpp"

namespace dagbandit {

namespace {

std::size_t at(int i) { return static_cast<std::size_t>(i); }

EdgeId edge_between(const Dag& g, VertexId u, VertexId v) {
  auto e = g.find_edge(u, v);
  if (!e) fail(ErrorCode::InvalidPath, "no edge " + g.vertex_name(u) + " -> " + g.vertex_name(v));
  return *e;
}

void check_path(const Dag& g, const PathIncidence& p) {
  if (static_cast<int>(p.bits.size()) != g.num_coordinates() || !is_path_incidence(g, p.bits))
    fail(ErrorCode::InvalidPath, "not a path of the reduction graph");
}

void check_len(const std::vector<double>& y, int d) {
  if (static_cast<int>(y.size()) != d)
    fail(ErrorCode::DimensionMismatch, "domain loss has " + std::to_string(y.size()) + " entries, expected " + std::to_string(d));
}

}  // namespace

nlohmann::json Reduction::metadata() const {
  nlohmann::json j;
  j["domain"] = domain();
  j["vertices"] = dag_.num_vertices();
  j["edges"] = dag_.num_edges();
  j["paths"] = count_paths(dag_)[at(dag_.sink())].str();
  j["uniform_length"] = has_uniform_path_length(dag_);
  j["edge_labels"] = labels_;
  return j;
}

// ---- hypercube ----

HypercubeReduction::HypercubeReduction(int d) : d_(d) {
  if (d < 1) fail(ErrorCode::InvalidArgument, "hypercube needs d >= 1");
  std::vector<Edge> edges;
  std::vector<std::string> names;
  for (int i = 0; i <= d; ++i) names.push_back("v" + std::to_string(i));
  for (int i = 1; i <= d; ++i) names.push_back("v" + std::to_string(i) + "'");
  for (int i = 1; i <= d; ++i) {
    const VertexId prev = i - 1, cur = i, detour = d + i;
    edges.push_back({prev, cur});
    edges.push_back({prev, detour});
    edges.push_back({detour, cur});
    labels_.push_back("skip " + std::to_string(i));
    labels_.push_back("bit " + std::to_string(i));
    labels_.push_back("detour " + std::to_string(i));
  }
  dag_ = Dag(2 * d + 1, std::move(edges), 0, d);
  dag_.set_vertex_names(std::move(names));
}

PathIncidence HypercubeReduction::encode(const Action& bits) const {
  if (static_cast<int>(bits.size()) != d_) fail(ErrorCode::DimensionMismatch, "hypercube action needs d bits");
  std::vector<EdgeId> edges;
  for (int i = 0; i < d_; ++i) {
    if (bits[at(i)] == 1) {
      edges.push_back(3 * i + 1);
      edges.push_back(3 * i + 2);
    } else if (bits[at(i)] == 0) {
      edges.push_back(3 * i);
    } else {
      fail(ErrorCode::InvalidArgument, "hypercube action entries must be 0 or 1");
    }
  }
  return make_path(dag_, std::move(edges));
}

Action HypercubeReduction::decode(const PathIncidence& path) const {
  check_path(dag_, path);
  Action x(at(d_), 0);
  for (EdgeId e : path.edges)
    if (e % 3 == 1) x[at(e / 3)] = 1;
  return x;
}

LossVector HypercubeReduction::lift_loss(const std::vector<double>& y) const {
  check_len(y, d_);
  LossVector w(at(dag_.num_edges()), 0.0);
  for (int i = 0; i < d_; ++i) w[at(3 * i + 1)] = y[at(i)];
  return w;
}

// ---- multitask ----

MultitaskReduction::MultitaskReduction(std::vector<int> arms) : d_(std::move(arms)) {
  if (d_.empty()) fail(ErrorCode::InvalidArgument, "multitask needs at least one task");
  const int m = static_cast<int>(d_.size());
  int total = 0;
  for (int di : d_) {
    if (di < 2) fail(ErrorCode::InvalidArgument, "every task needs at least 2 arms");
    offset_.push_back(total);
    total += di;
  }
  std::vector<Edge> edges;
  std::vector<std::string> names;
  for (int i = 0; i <= m; ++i) names.push_back("v" + std::to_string(i));
  for (int i = 1; i <= m; ++i) {
    for (int j = 0; j < d_[at(i - 1)]; ++j) {
      names.push_back("v" + std::to_string(i) + "^" + std::to_string(j));
      const VertexId a = m + 1 + offset_[at(i - 1)] + j;
      edges.push_back({i - 1, a});
      edges.push_back({a, i});
      labels_.push_back("task " + std::to_string(i) + " arm " + std::to_string(j));
      labels_.push_back("task " + std::to_string(i) + " arm " + std::to_string(j) + " return");
    }
  }
  dag_ = Dag(m + 1 + total, std::move(edges), 0, m);
  dag_.set_vertex_names(std::move(names));
}

int MultitaskReduction::total_arms() const { return std::accumulate(d_.begin(), d_.end(), 0); }

VertexId MultitaskReduction::arm_vertex(int task, int arm) const {
  return static_cast<int>(d_.size()) + 1 + offset_[at(task)] + arm;
}
EdgeId MultitaskReduction::in_edge(int task, int arm) const { return 2 * (offset_[at(task)] + arm); }
EdgeId MultitaskReduction::out_edge(int task, int arm) const { return 2 * (offset_[at(task)] + arm) + 1; }

PathIncidence MultitaskReduction::encode(const Action& arms) const {
  if (arms.size() != d_.size()) fail(ErrorCode::DimensionMismatch, "multitask action needs one arm per task");
  std::vector<EdgeId> edges;
  for (std::size_t i = 0; i < d_.size(); ++i) {
    if (arms[i] < 0 || arms[i] >= d_[i]) fail(ErrorCode::InvalidArgument, "arm index out of range");
    edges.push_back(in_edge(static_cast<int>(i), arms[i]));
    edges.push_back(out_edge(static_cast<int>(i), arms[i]));
  }
  return make_path(dag_, std::move(edges));
}

Action MultitaskReduction::decode(const PathIncidence& path) const {
  check_path(dag_, path);
  Action a;
  for (std::size_t k = 0; k < path.edges.size(); k += 2) {
    const int flat = path.edges[k] / 2;
    const int task = static_cast<int>(k / 2);
    a.push_back(flat - offset_[at(task)]);
  }
  return a;
}

LossVector MultitaskReduction::lift_loss(const std::vector<double>& y) const {
  check_len(y, total_arms());
  LossVector w(at(dag_.num_edges()), 0.0);
  for (int k = 0; k < total_arms(); ++k) w[at(2 * k)] = y[at(k)];
  return w;
}

std::vector<double> MultitaskReduction::gamma_coords(int horizon, double delta) const {
  if (horizon < 1 || !(delta > 0.0 && delta < 1.0)) fail(ErrorCode::InvalidArgument, "need T >= 1 and delta in (0,1)");
  const double L = std::log2(static_cast<double>(total_arms()) / delta);
  const double T = horizon;
  std::vector<double> g(at(dag_.num_coordinates()));
  const int m = static_cast<int>(d_.size());
  for (int i = 0; i <= m; ++i) g[at(i)] = std::sqrt(L / T);
  for (int i = 0; i < m; ++i) {
    const double gi = std::sqrt(L / (d_[at(i)] * T));
    for (int j = 0; j < d_[at(i)]; ++j) {
      g[at(arm_vertex(i, j))] = gi;
      g[at(dag_.edge_coordinate(in_edge(i, j)))] = gi;
      g[at(dag_.edge_coordinate(out_edge(i, j)))] = gi;
    }
  }
  return g;
}

nlohmann::json MultitaskReduction::metadata() const {
  auto j = Reduction::metadata();
  j["arms"] = d_;
  return j;
}

// ---- m-sets ----

MsetReduction::MsetReduction(int d, int m) : d_(d), m_(m) {
  if (m < 1 || m > d) fail(ErrorCode::InvalidArgument, "m-sets need 1 <= m <= d");
  const int cols = d - m + 1, rows = m + 1;
  std::vector<Edge> edges;
  std::vector<std::string> names(at(cols * rows));
  for (int i = 0; i < cols; ++i)
    for (int j = 0; j < rows; ++j) names[at(vertex(i, j))] = "v" + std::to_string(i) + "^" + std::to_string(j);
  for (int i = 0; i < cols; ++i) {
    for (int j = 0; j < rows; ++j) {
      if (j > 0) {
        edges.push_back({vertex(i, j - 1), vertex(i, j)});
        labels_.push_back("bit " + std::to_string(i + j));
      }
      if (i > 0) {
        edges.push_back({vertex(i - 1, j), vertex(i, j)});
        labels_.push_back("skip");
      }
    }
  }
  dag_ = Dag(cols * rows, std::move(edges), vertex(0, 0), vertex(cols - 1, m));
  dag_.set_vertex_names(std::move(names));
}

PathIncidence MsetReduction::encode(const Action& bits) const {
  if (static_cast<int>(bits.size()) != d_) fail(ErrorCode::DimensionMismatch, "m-set action needs d bits");
  int ones = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) fail(ErrorCode::InvalidArgument, "m-set entries must be 0 or 1");
    ones += b;
  }
  if (ones != m_) fail(ErrorCode::InvalidArgument, "m-set action needs exactly m ones");
  std::vector<VertexId> walk{vertex(0, 0)};
  int i = 0, j = 0;
  for (int k = 0; k < d_; ++k) {
    if (bits[at(k)]) ++j;
    else ++i;
    walk.push_back(vertex(i, j));
  }
  return make_path_from_vertices(dag_, walk);
}

Action MsetReduction::decode(const PathIncidence& path) const {
  check_path(dag_, path);
  Action x(at(d_), 0);
  for (EdgeId e : path.edges) {
    const Edge& ed = dag_.edge(e);
    const int i = ed.head / (m_ + 1), j = ed.head % (m_ + 1);
    if (ed.head == ed.tail + 1) x[at(i + j - 1)] = 1;  // vertical, bit i+j (1-based)
  }
  return x;
}

LossVector MsetReduction::lift_loss(const std::vector<double>& y) const {
  check_len(y, d_);
  LossVector w(at(dag_.num_edges()), 0.0);
  for (EdgeId e = 0; e < dag_.num_edges(); ++e) {
    const Edge& ed = dag_.edge(e);
    if (ed.head == ed.tail + 1) {
      const int i = ed.head / (m_ + 1), j = ed.head % (m_ + 1);
      w[at(e)] = y[at(i + j - 1)];
    }
  }
  return w;
}

// ---- walks ----

WalkReduction::WalkReduction(const Dag& graph, int K) : graph_(graph), K_(K) {
  const int n = graph.num_vertices(), m = graph.num_edges();
  if (K < 1) fail(ErrorCode::InvalidArgument, "walk length bound K must be >= 1");
  if (K > m) fail(ErrorCode::InvalidArgument, "walk length bound K must not exceed |E|");
  if (!graph.out_edges(graph.sink()).empty())
    fail(ErrorCode::InvalidArgument, "walk reduction needs a sink without outgoing edges");
  const VertexId t = graph.sink();
  std::vector<Edge> edges;
  std::vector<int> origin;
  for (int i = 1; i <= K; ++i) {
    for (EdgeId e = 0; e < m; ++e) {
      edges.push_back({(i - 1) * n + graph.edge(e).tail, i * n + graph.edge(e).head});
      origin.push_back(e);
    }
    edges.push_back({(i - 1) * n + t, i * n + t});
    origin.push_back(-1);
  }
  Dag layered(n * (K + 1), std::move(edges), graph.source(), K * n + t);
  std::vector<std::string> names;
  for (int i = 0; i <= K; ++i)
    for (VertexId v = 0; v < n; ++v) names.push_back(graph.vertex_name(v) + "@" + std::to_string(i));
  layered.set_vertex_names(std::move(names));
  PrunedDag p;
  try {
    p = prune_with_map(layered);
  } catch (const Error& err) {
    if (err.code() == ErrorCode::NoPath) fail(ErrorCode::NoWalk, "sink not reachable within " + std::to_string(K) + " steps");
    throw;
  }
  dag_ = std::move(p.dag);
  for (EdgeId e = 0; e < dag_.num_edges(); ++e) {
    const int old = p.edge_to_old[at(e)];
    const int o = origin[at(old)];
    layered_edge_origin_.push_back(o);
    layer_of_edge_.push_back(old / (m + 1) + 1);
    labels_.push_back(o < 0 ? "pad" : "edge " + std::to_string(o) + " step " + std::to_string(old / (m + 1) + 1));
  }
  layered_vertex_ = p.vertex_to_old;
}

PathIncidence WalkReduction::encode(const Action& walk) const {
  const int n = graph_.num_vertices(), m = graph_.num_edges();
  if (walk.empty() || static_cast<int>(walk.size()) > K_)
    fail(ErrorCode::InvalidPath, "walk must have between 1 and K edges");
  VertexId cur = graph_.source();
  std::vector<VertexId> verts{cur};
  for (int e : walk) {
    if (e < 0 || e >= m || graph_.edge(e).tail != cur) fail(ErrorCode::InvalidPath, "not a walk from the source");
    cur = graph_.edge(e).head;
    verts.push_back(cur);
  }
  if (cur != graph_.sink()) fail(ErrorCode::InvalidPath, "walk does not end at the sink");
  while (static_cast<int>(verts.size()) <= K_) verts.push_back(cur);
  // layered ids -> pruned ids
  std::map<int, VertexId> to_new;
  for (VertexId v = 0; v < dag_.num_vertices(); ++v) to_new[layered_vertex_[at(v)]] = v;
  std::vector<VertexId> path;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    auto it = to_new.find(static_cast<int>(i) * n + verts[i]);
    if (it == to_new.end()) fail(ErrorCode::InvalidPath, "walk leaves the layered graph");
    path.push_back(it->second);
  }
  return make_path_from_vertices(dag_, path);
}

Action WalkReduction::decode(const PathIncidence& path) const {
  check_path(dag_, path);
  Action walk;
  for (EdgeId e : path.edges)
    if (layered_edge_origin_[at(e)] >= 0) walk.push_back(layered_edge_origin_[at(e)]);
  return walk;
}

LossVector WalkReduction::lift_loss(const LossVector& w) const {
  check_len(w, graph_.num_edges());
  LossVector out(at(dag_.num_edges()), 0.0);
  for (EdgeId e = 0; e < dag_.num_edges(); ++e) {
    const int o = layered_edge_origin_[at(e)];
    if (o >= 0) out[at(e)] = w[at(o)];
  }
  return out;
}

// ---- Colonel Blotto ----

VertexId BlottoReduction::vertex(int i, int j) const {
  if (i == 0) return 0;
  if (i == K_) return 1 + (K_ - 1) * (N_ + 1);
  return 1 + (i - 1) * (N_ + 1) + j;
}

BlottoReduction::BlottoReduction(int N, int K) : N_(N), K_(K) {
  if (N < 0 || K < 1) fail(ErrorCode::InvalidArgument, "blotto needs N >= 0 and K >= 1");
  std::vector<Edge> edges;
  auto add = [&](int i, int j0, int j1) {
    edges.push_back({vertex(i - 1, j0), vertex(i, j1)});
    info_.push_back({i - 1, j1 - j0});
    labels_.push_back("field " + std::to_string(i) + " gets " + std::to_string(j1 - j0));
  };
  if (K == 1) {
    add(1, 0, N);
  } else {
    for (int j = 0; j <= N; ++j) add(1, 0, j);
    for (int i = 2; i <= K - 1; ++i)
      for (int j0 = 0; j0 <= N; ++j0)
        for (int j1 = j0; j1 <= N; ++j1) add(i, j0, j1);
    for (int j = 0; j <= N; ++j) add(K, j, N);
  }
  const int nv = 2 + (K - 1) * (N + 1);
  std::vector<std::string> names(at(nv));
  names[0] = "v0^0";
  for (int i = 1; i < K; ++i)
    for (int j = 0; j <= N; ++j) names[at(vertex(i, j))] = "v" + std::to_string(i) + "^" + std::to_string(j);
  names[at(vertex(K, N))] = "v" + std::to_string(K) + "^" + std::to_string(N);
  dag_ = Dag(nv, std::move(edges), 0, vertex(K, N));
  dag_.set_vertex_names(std::move(names));
}

PathIncidence BlottoReduction::encode(const Action& a) const {
  if (static_cast<int>(a.size()) != K_) fail(ErrorCode::DimensionMismatch, "allocation needs K entries");
  int sum = 0;
  std::vector<VertexId> walk{vertex(0, 0)};
  for (int i = 1; i <= K_; ++i) {
    if (a[at(i - 1)] < 0) fail(ErrorCode::InvalidArgument, "allocation entries must be nonnegative");
    sum += a[at(i - 1)];
    if (sum > N_) break;
    walk.push_back(vertex(i, sum));
  }
  if (sum != N_) fail(ErrorCode::InvalidArgument, "allocation must sum to N");
  return make_path_from_vertices(dag_, walk);
}

Action BlottoReduction::decode(const PathIncidence& path) const {
  check_path(dag_, path);
  Action a;
  for (EdgeId e : path.edges) a.push_back(info_[at(e)].amount);
  return a;
}

LossVector BlottoReduction::lift_loss(const std::vector<std::vector<std::vector<double>>>& y,
                                      const std::vector<int>& b) const {
  if (static_cast<int>(y.size()) != K_ || static_cast<int>(b.size()) != K_)
    fail(ErrorCode::DimensionMismatch, "blotto loss needs one table and one opponent count per battlefield");
  for (int i = 0; i < K_; ++i) {
    if (static_cast<int>(y[at(i)].size()) != N_ + 1)
      fail(ErrorCode::DimensionMismatch, "blotto loss table needs N+1 rows");
    for (const auto& row : y[at(i)])
      if (b[at(i)] < 0 || b[at(i)] >= static_cast<int>(row.size()))
        fail(ErrorCode::DimensionMismatch, "opponent count outside the loss table");
  }
  LossVector w(at(dag_.num_edges()));
  for (std::size_t e = 0; e < w.size(); ++e) {
    const auto& inf = info_[e];
    w[e] = y[at(inf.battlefield)][at(inf.amount)][at(b[at(inf.battlefield)])];
  }
  return w;
}

// ---- extensive-form games ----

namespace {

const char* kind_name(EfgNode::Kind k) {
  switch (k) {
    case EfgNode::Kind::Decision: return "decision";
    case EfgNode::Kind::Observation: return "observation";
    case EfgNode::Kind::Terminal: return "terminal";
  }
  return "?";
}

}  // namespace

EfgGame efg_from_json(const nlohmann::json& j) {
  auto bad = [](const std::string& msg) { fail(ErrorCode::MalformedGame, msg); };
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array()) bad("game needs a \"nodes\" array");
  EfgGame g;
  std::map<std::string, int> index;
  for (const auto& n : j["nodes"]) {
    if (!n.is_object() || !n.contains("name") || !n["name"].is_string()) bad("every node needs a string \"name\"");
    EfgNode node;
    node.name = n["name"].get<std::string>();
    const std::string kind = n.value("kind", "");
    if (kind == "decision") node.kind = EfgNode::Kind::Decision;
    else if (kind == "observation") node.kind = EfgNode::Kind::Observation;
    else if (kind == "terminal") node.kind = EfgNode::Kind::Terminal;
    else bad("node " + node.name + ": kind must be decision, observation or terminal");
    if (!index.emplace(node.name, static_cast<int>(g.nodes.size())).second) bad("duplicate node name " + node.name);
    g.nodes.push_back(std::move(node));
  }
  std::size_t k = 0;
  for (const auto& n : j["nodes"]) {
    if (n.contains("children")) {
      if (!n["children"].is_array()) bad("node " + g.nodes[k].name + ": children must be an array");
      for (const auto& c : n["children"]) {
        if (!c.is_string()) bad("node " + g.nodes[k].name + ": children must be names");
        auto it = index.find(c.get<std::string>());
        if (it == index.end()) bad("node " + g.nodes[k].name + ": unknown child " + c.get<std::string>());
        g.nodes[k].children.push_back(it->second);
      }
    }
    ++k;
  }
  if (!j.contains("root") || !j["root"].is_string()) bad("game needs a string \"root\"");
  auto r = index.find(j["root"].get<std::string>());
  if (r == index.end()) bad("unknown root " + j["root"].get<std::string>());
  g.root = r->second;
  validate_game(g);
  return g;
}

nlohmann::json efg_to_json(const EfgGame& game) {
  nlohmann::json j;
  j["root"] = game.nodes[at(game.root)].name;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : game.nodes) {
    nlohmann::json o{{"name", n.name}, {"kind", kind_name(n.kind)}};
    if (!n.children.empty()) {
      o["children"] = nlohmann::json::array();
      for (int c : n.children) o["children"].push_back(game.nodes[at(c)].name);
    }
    j["nodes"].push_back(std::move(o));
  }
  return j;
}

void validate_game(const EfgGame& g) {
  auto bad = [](const std::string& msg) { fail(ErrorCode::MalformedGame, msg); };
  const int n = static_cast<int>(g.nodes.size());
  if (g.root < 0 || g.root >= n) bad("root out of range");
  if (g.nodes[at(g.root)].kind != EfgNode::Kind::Decision) bad("root must be a decision node");
  std::vector<int> parents(at(n), 0);
  for (const auto& node : g.nodes) {
    if (node.kind == EfgNode::Kind::Terminal) {
      if (!node.children.empty()) bad("terminal " + node.name + " has children");
    } else if (node.children.size() < 2) {
      bad("node " + node.name + " needs at least 2 actions");
    }
    for (int c : node.children) {
      if (c < 0 || c >= n) bad("child index out of range at " + node.name);
      ++parents[at(c)];
    }
  }
  if (parents[at(g.root)] != 0) bad("root has a parent");
  for (int v = 0; v < n; ++v)
    if (v != g.root && parents[at(v)] != 1) bad("node " + g.nodes[at(v)].name + " must have exactly one parent");
  // every node reachable from the root (no detached cycles)
  std::vector<char> seen(at(n), 0);
  std::vector<int> stack{g.root};
  int count = 0;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (seen[at(v)]) bad("node visited twice");
    seen[at(v)] = 1;
    ++count;
    for (int c : g.nodes[at(v)].children) stack.push_back(c);
  }
  if (count != n) bad("some nodes are not reachable from the root");
}

BigInt efg_strategy_count(const EfgGame& g) {
  validate_game(g);
  std::function<BigInt(int)> rec = [&](int v) -> BigInt {
    const auto& node = g.nodes[at(v)];
    if (node.kind == EfgNode::Kind::Terminal) return 1;
    BigInt acc = node.kind == EfgNode::Kind::Decision ? 0 : 1;
    for (int c : node.children) {
      if (node.kind == EfgNode::Kind::Decision) acc += rec(c);
      else acc *= rec(c);
    }
    return acc;
  };
  return rec(g.root);
}

EfgReduction::EfgReduction(EfgGame game) : game_(std::move(game)) {
  validate_game(game_);
  const int n = static_cast<int>(game_.nodes.size());
  index_in_kind_.assign(at(n), -1);
  for (int v = 0; v < n; ++v) {
    auto& list = game_.nodes[at(v)].kind == EfgNode::Kind::Decision      ? decisions_
                 : game_.nodes[at(v)].kind == EfgNode::Kind::Observation ? observations_
                                                                         : terminals_;
    index_in_kind_[at(v)] = static_cast<int>(list.size());
    list.push_back(v);
  }
  std::vector<Edge> edges;
  auto s = [](int v) { return 2 * v; };
  auto t = [](int v) { return 2 * v + 1; };
  auto add = [&](VertexId a, VertexId b, std::string label) {
    edges.push_back({a, b});
    labels_.push_back(std::move(label));
  };
  std::function<void(int)> build = [&](int v) {
    const auto& node = game_.nodes[at(v)];
    switch (node.kind) {
      case EfgNode::Kind::Terminal:
        add(s(v), t(v), "terminal " + node.name);
        break;
      case EfgNode::Kind::Decision:
        for (std::size_t a = 0; a < node.children.size(); ++a) {
          const int c = node.children[a];
          add(s(v), s(c), node.name + " plays " + std::to_string(a));
          build(c);
          add(t(c), t(v), "return");
        }
        break;
      case EfgNode::Kind::Observation:
        add(s(v), s(node.children.front()), "enter " + node.name);
        for (std::size_t b = 0; b < node.children.size(); ++b) {
          build(node.children[b]);
          if (b + 1 < node.children.size()) add(t(node.children[b]), s(node.children[b + 1]), "next");
        }
        add(t(node.children.back()), t(v), "leave " + node.name);
        break;
    }
  };
  build(game_.root);
  dag_ = Dag(2 * n, std::move(edges), s(game_.root), t(game_.root));
  std::vector<std::string> names;
  for (const auto& node : game_.nodes) {
    names.push_back(node.name + "_s");
    names.push_back(node.name + "_t");
  }
  dag_.set_vertex_names(std::move(names));
}

PathIncidence EfgReduction::encode(const Action& config) const {
  if (config.size() != decisions_.size()) fail(ErrorCode::DimensionMismatch, "one action per decision node expected");
  for (std::size_t i = 0; i < config.size(); ++i)
    if (config[i] < 0 || config[i] >= static_cast<int>(game_.nodes[at(decisions_[i])].children.size()))
      fail(ErrorCode::InvalidArgument, "action out of range at " + game_.nodes[at(decisions_[i])].name);
  std::vector<VertexId> walk;
  std::function<void(int)> visit = [&](int v) {
    const auto& node = game_.nodes[at(v)];
    walk.push_back(2 * v);
    if (node.kind == EfgNode::Kind::Decision) {
      visit(node.children[at(config[at(index_in_kind_[at(v)])])]);
    } else if (node.kind == EfgNode::Kind::Observation) {
      for (int c : node.children) visit(c);
    }
    walk.push_back(2 * v + 1);
  };
  visit(game_.root);
  return make_path_from_vertices(dag_, walk);
}

Action EfgReduction::decode(const PathIncidence& path) const {
  check_path(dag_, path);
  Action a(decisions_.size(), 0);
  for (EdgeId e : path.edges) {
    const Edge& ed = dag_.edge(e);
    if (ed.tail % 2 != 0 || ed.head % 2 != 0) continue;
    const int v = ed.tail / 2, c = ed.head / 2;
    const auto& node = game_.nodes[at(v)];
    if (node.kind != EfgNode::Kind::Decision) continue;
    for (std::size_t k = 0; k < node.children.size(); ++k)
      if (node.children[k] == c) a[at(index_in_kind_[at(v)])] = static_cast<int>(k);
  }
  return a;
}

Action EfgReduction::canonical(const Action& config) const {
  return decode(encode(config));
}

int EfgReduction::play(const Action& config, const std::vector<int>& b) const {
  if (config.size() != decisions_.size() || b.size() != observations_.size())
    fail(ErrorCode::DimensionMismatch, "play needs one action per decision and per observation node");
  int v = game_.root;
  while (game_.nodes[at(v)].kind != EfgNode::Kind::Terminal) {
    const auto& node = game_.nodes[at(v)];
    const int a = node.kind == EfgNode::Kind::Decision ? config[at(index_in_kind_[at(v)])] : b[at(index_in_kind_[at(v)])];
    if (a < 0 || a >= static_cast<int>(node.children.size())) fail(ErrorCode::InvalidArgument, "action out of range at " + node.name);
    v = node.children[at(a)];
  }
  return index_in_kind_[at(v)];
}

LossVector EfgReduction::lift_loss(const std::vector<double>& y, const std::vector<int>& b) const {
  check_len(y, static_cast<int>(terminals_.size()));
  if (b.size() != observations_.size()) fail(ErrorCode::DimensionMismatch, "one action per observation node expected");
  LossVector w(at(dag_.num_edges()), 0.0);
  std::vector<int> stack{game_.root};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    const auto& node = game_.nodes[at(v)];
    if (node.kind == EfgNode::Kind::Terminal) {
      w[at(edge_between(dag_, 2 * v, 2 * v + 1))] = y[at(index_in_kind_[at(v)])];
    } else if (node.kind == EfgNode::Kind::Decision) {
      for (int c : node.children) stack.push_back(c);
    } else {
      const int bi = b[at(index_in_kind_[at(v)])];
      if (bi < 0 || bi >= static_cast<int>(node.children.size())) fail(ErrorCode::InvalidArgument, "observation action out of range at " + node.name);
      stack.push_back(node.children[at(bi)]);
    }
  }
  return w;
}

}  // namespace dagbandit
