#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "dagbandit/graph.hpp"

namespace dagbandit {

// A domain action as integers; its meaning depends on the reduction (bit
// vector, arm per task, allocation, edge list of a walk, action per decision
// node).
using Action = std::vector<int>;

class Reduction {
 public:
  virtual ~Reduction() = default;
  const Dag& dag() const { return dag_; }
  virtual std::string domain() const = 0;
  virtual PathIncidence encode(const Action& action) const = 0;
  virtual Action decode(const PathIncidence& path) const = 0;
  // per-edge role, e.g. "bit 3" or "task 2 arm 0"
  const std::vector<std::string>& edge_labels() const { return labels_; }
  virtual nlohmann::json metadata() const;

 protected:
  Dag dag_;
  std::vector<std::string> labels_;
};

// {0,1}^d. Edge (v_{i-1}, v_i') carries y[i]; taking that detour sets bit i.
class HypercubeReduction final : public Reduction {
 public:
  explicit HypercubeReduction(int d);
  std::string domain() const override { return "hypercube"; }
  PathIncidence encode(const Action& bits) const override;
  Action decode(const PathIncidence& path) const override;
  LossVector lift_loss(const std::vector<double>& y) const;
  int d() const { return d_; }

 private:
  int d_;
};

// One arm per task; arms are 0-based, loss vector is the tasks' arm losses
// concatenated.
class MultitaskReduction final : public Reduction {
 public:
  explicit MultitaskReduction(std::vector<int> arms);
  std::string domain() const override { return "multitask"; }
  PathIncidence encode(const Action& arms) const override;
  Action decode(const PathIncidence& path) const override;
  LossVector lift_loss(const std::vector<double>& y) const;
  nlohmann::json metadata() const override;

  const std::vector<int>& arms() const { return d_; }
  int total_arms() const;
  int task_offset(int task) const { return offset_[static_cast<std::size_t>(task)]; }
  VertexId spine(int i) const { return i; }
  VertexId arm_vertex(int task, int arm) const;
  EdgeId in_edge(int task, int arm) const;   // (v_{i-1}, v_i^j)
  EdgeId out_edge(int task, int arm) const;  // (v_i^j, v_i)

  // spine vertices sqrt(log2(d/delta)/T); arm vertices and both arm edges
  // sqrt(log2(d/delta)/(d_i T)); d = total arms
  std::vector<double> gamma_coords(int horizon, double delta) const;

 private:
  std::vector<int> d_;
  std::vector<int> offset_;
};

// Vectors in {0,1}^d with m ones; action index k is 0-based (bit k+1).
class MsetReduction final : public Reduction {
 public:
  MsetReduction(int d, int m);
  std::string domain() const override { return "mset"; }
  PathIncidence encode(const Action& bits) const override;
  Action decode(const PathIncidence& path) const override;
  LossVector lift_loss(const std::vector<double>& y) const;
  VertexId vertex(int i, int j) const { return i * (m_ + 1) + j; }

 private:
  int d_, m_;
};

// Walks of length <= K from source to sink in `graph` (cycles allowed, no
// self loops, sink without out-edges). Actions are input edge lists.
class WalkReduction final : public Reduction {
 public:
  WalkReduction(const Dag& graph, int K);
  std::string domain() const override { return "walk"; }
  PathIncidence encode(const Action& walk) const override;
  Action decode(const PathIncidence& path) const override;
  LossVector lift_loss(const LossVector& w) const;
  const Dag& graph() const { return graph_; }
  int K() const { return K_; }

 private:
  Dag graph_;
  int K_;
  std::vector<int> layered_edge_origin_;  // per DAG edge: input edge or -1 for padding
  std::vector<int> layered_vertex_;       // per DAG vertex: layer index * n + v
  std::vector<int> layer_of_edge_;
};

// N soldiers over K battlefields. Action = allocation (a_1..a_K).
class BlottoReduction final : public Reduction {
 public:
  BlottoReduction(int N, int K);
  std::string domain() const override { return "blotto"; }
  PathIncidence encode(const Action& allocation) const override;
  Action decode(const PathIncidence& path) const override;
  // y[i][a][b]: loss on battlefield i for own count a against opponent count b
  LossVector lift_loss(const std::vector<std::vector<std::vector<double>>>& y, const std::vector<int>& b) const;
  int N() const { return N_; }
  int K() const { return K_; }
  VertexId vertex(int i, int j) const;

 private:
  int N_, K_;
  struct EdgeInfo {
    int battlefield;  // 0-based
    int amount;
  };
  std::vector<EdgeInfo> info_;
};

struct EfgNode {
  enum class Kind { Decision, Observation, Terminal };
  Kind kind = Kind::Terminal;
  std::string name;
  std::vector<int> children;  // by action index
};

struct EfgGame {
  std::vector<EfgNode> nodes;
  int root = 0;
};

// {"root": name, "nodes": [{"name":..., "kind": "decision"|"observation"|"terminal",
//   "children": [names]}]}. Throws MalformedGame.
EfgGame efg_from_json(const nlohmann::json& j);
nlohmann::json efg_to_json(const EfgGame& game);
void validate_game(const EfgGame& game);

// n(z) = 1, n(x) = sum over actions, n(y) = product over actions
BigInt efg_strategy_count(const EfgGame& game);

// Action = one action index per decision node, in the order of
// decision_nodes(). Off-path decision nodes decode to action 0.
class EfgReduction final : public Reduction {
 public:
  explicit EfgReduction(EfgGame game);
  std::string domain() const override { return "efg"; }
  PathIncidence encode(const Action& config) const override;
  Action decode(const PathIncidence& path) const override;
  // y over terminal nodes (indexed like terminal_nodes()), b one action per
  // observation node (indexed like observation_nodes())
  LossVector lift_loss(const std::vector<double>& y, const std::vector<int>& b) const;
  // terminal index reached by playing config against b
  int play(const Action& config, const std::vector<int>& b) const;
  // sets every decision node off the realized tree to action 0
  Action canonical(const Action& config) const;

  const EfgGame& game() const { return game_; }
  const std::vector<int>& decision_nodes() const { return decisions_; }
  const std::vector<int>& observation_nodes() const { return observations_; }
  const std::vector<int>& terminal_nodes() const { return terminals_; }

 private:
  EfgGame game_;
  std::vector<int> decisions_, observations_, terminals_;
  std::vector<int> index_in_kind_;
};

}  // namespace dagbandit
