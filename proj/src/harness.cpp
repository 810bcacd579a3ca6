#include "dagbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "dagbandit/error.hpp"
#include "dagbandit/graph_io.hpp"

namespace dagbandit {

namespace fs = std::filesystem;

namespace {

std::size_t at(int i) { return static_cast<std::size_t>(i); }

std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) { return Rng(seed).split(tag).seed(); }

// sample index from unnormalized nonnegative weights
std::size_t draw(const std::vector<double>& w, Rng& rng) {
  double total = 0.0;
  for (double x : w) total += x;
  double u = rng.uniform01() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  for (std::size_t i = w.size(); i-- > 0;)
    if (w[i] > 0.0) return i;
  return 0;
}

// uniform random composition of n into k nonnegative parts (stars and bars)
std::vector<int> random_composition(int n, int k, Rng& rng) {
  // choose k-1 bar positions among n+k-1 slots
  std::vector<int> slots(at(n + k - 1));
  for (int i = 0; i < n + k - 1; ++i) slots[at(i)] = i;
  for (int i = 0; i < k - 1; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n + k - 1 - i)));
    std::swap(slots[at(i)], slots[at(j)]);
  }
  std::vector<int> bars(slots.begin(), slots.begin() + (k - 1));
  std::sort(bars.begin(), bars.end());
  std::vector<int> out;
  int prev = -1;
  for (int b : bars) {
    out.push_back(b - prev - 1);
    prev = b;
  }
  out.push_back(n + k - 1 - prev - 1);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) fail(ErrorCode::InvalidArgument, "quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// ---- adversaries ----

StochasticAdversary::StochasticAdversary(const Dag& dag, LossVector means, double noise, std::uint64_t seed)
    : means_(std::move(means)), rng_(seed) {
  if (static_cast<int>(means_.size()) != dag.num_edges())
    fail(ErrorCode::DimensionMismatch, "means need one entry per edge");
  if (!(noise >= 0.0)) fail(ErrorCode::InvalidArgument, "noise must be nonnegative");
  const Dag g = prune(dag);
  auto range = path_loss_range(dag, means_);
  if (std::max(std::abs(range.min), std::abs(range.max)) + noise > 1.0 + 1e-12)
    fail(ErrorCode::RangeViolation, "path mean " + format_double(std::abs(range.min) > std::abs(range.max) ? range.min : range.max) +
                                        " plus noise " + format_double(noise) + " can leave [-1, 1]");
  int longest = 0;
  for (int k : longest_dist(g)) longest = std::max(longest, k);
  half_width_ = longest > 0 ? noise / longest : 0.0;
}

LossVector StochasticAdversary::losses(int) {
  LossVector y = means_;
  for (double& v : y) v += half_width_ * (2.0 * rng_.uniform01() - 1.0);
  return y;
}

LossVector gap_means(const Dag& dag, double gap, PathIncidence* best) {
  auto b = best_path_in_hindsight(dag, LossVector(at(dag.num_edges()), 0.0));
  std::vector<char> on_vertex(at(dag.num_vertices()), 0), on_edge(at(dag.num_edges()), 0);
  for (VertexId v : b.path.vertices(dag)) on_vertex[at(v)] = 1;
  for (EdgeId e : b.path.edges) on_edge[at(e)] = 1;
  LossVector means(at(dag.num_edges()), 0.0);
  for (EdgeId e = 0; e < dag.num_edges(); ++e)
    if (on_vertex[at(dag.edge(e).tail)] && !on_edge[at(e)]) means[at(e)] = gap;
  if (best) *best = b.path;
  return means;
}

AdaptiveTargetingAdversary::AdaptiveTargetingAdversary(const Dag& dag, double magnitude)
    : dag_(dag), magnitude_(magnitude) {
  if (!(std::abs(magnitude) <= 1.0)) fail(ErrorCode::InvalidArgument, "magnitude must lie in [-1, 1]");
}

LossVector AdaptiveTargetingAdversary::losses(int) {
  LossVector y(at(dag_.num_edges()), 0.0);
  if (leader_.empty()) return y;
  const double share = magnitude_ / static_cast<double>(leader_.size());
  for (EdgeId e : leader_) y[at(e)] = share;
  return y;
}

void AdaptiveTargetingAdversary::observe(const PathIncidence& played) {
  auto it = std::lower_bound(counts_.begin(), counts_.end(), played.edges,
                             [](const auto& entry, const std::vector<EdgeId>& key) { return entry.first < key; });
  if (it == counts_.end() || it->first != played.edges) it = counts_.insert(it, {played.edges, 0});
  const int c = ++it->second;
  if (c > leader_count_ || (c == leader_count_ && played.edges < leader_)) {
    leader_ = played.edges;
    leader_count_ = c;
  }
}

std::vector<double> lower_bound_epsilon(const std::vector<int>& arms, int horizon) {
  if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be >= 1");
  const double m = static_cast<double>(arms.size());
  std::vector<double> eps;
  for (int d : arms) {
    const double e = m * std::sqrt(static_cast<double>(d)) / (10.0 * std::sqrt(static_cast<double>(horizon)));
    if (e > 0.5) fail(ErrorCode::InvalidArgument, "horizon too short: epsilon exceeds 1/2");
    eps.push_back(e);
  }
  return eps;
}

MultitaskLowerBoundAdversary::MultitaskLowerBoundAdversary(const MultitaskReduction& red, int horizon, std::uint64_t seed)
    : red_(red), eps_(lower_bound_epsilon(red.arms(), horizon)), rng_(seed) {
  Rng pick = rng_.split(1);
  for (int d : red.arms()) hidden_.push_back(static_cast<int>(pick.below(static_cast<std::uint64_t>(d))));
}

LossVector MultitaskLowerBoundAdversary::losses(int) {
  const auto& d = red_.arms();
  const int j = static_cast<int>(rng_.below(d.size()));
  last_task_ = j;
  std::vector<double> y(at(red_.total_arms()), 0.0);
  for (int k = 0; k < d[at(j)]; ++k) {
    const double p = 0.5 - eps_[at(j)] * (k == hidden_[at(j)] ? 1.0 : 0.0);
    y[at(red_.task_offset(j) + k)] = rng_.bernoulli(p) ? 1.0 : 0.0;
  }
  return red_.lift_loss(y);
}

BlottoAdversary::BlottoAdversary(const BlottoReduction& red, int opponent, std::uint64_t seed)
    : red_(red), opponent_(opponent), rng_(seed) {
  if (opponent < 0) fail(ErrorCode::InvalidArgument, "opponent soldiers must be >= 0");
  const int K = red.K(), N = red.N();
  table_.assign(at(K), std::vector<std::vector<double>>(at(N + 1), std::vector<double>(at(opponent + 1))));
  for (auto& tab : table_)
    for (int a = 0; a <= N; ++a)
      for (int b = 0; b <= opponent; ++b) tab[at(a)][at(b)] = ((a < b) - (a > b)) / static_cast<double>(K);
}

LossVector BlottoAdversary::losses(int) {
  b_ = random_composition(opponent_, red_.K(), rng_);
  return red_.lift_loss(table_, b_);
}

EfgAdversary::EfgAdversary(const EfgReduction& red, double noise, std::uint64_t seed)
    : red_(red), noise_(noise), rng_(seed) {
  if (!(noise >= 0.0 && noise <= 1.0)) fail(ErrorCode::InvalidArgument, "noise must lie in [0, 1]");
  for (std::size_t z = 0; z < red.terminal_nodes().size(); ++z)
    mu_.push_back((1.0 - noise) * (2.0 * rng_.uniform01() - 1.0));
}

LossVector EfgAdversary::losses(int) {
  std::vector<double> y(mu_.size());
  for (std::size_t z = 0; z < y.size(); ++z) y[z] = mu_[z] + noise_ * (2.0 * rng_.uniform01() - 1.0);
  std::vector<int> b;
  for (int v : red_.observation_nodes())
    b.push_back(static_cast<int>(rng_.below(red_.game().nodes[at(v)].children.size())));
  return red_.lift_loss(y, b);
}

// ---- baselines ----

UniformPolicy::UniformPolicy(const Dag& dag, std::uint64_t seed) : dag_(dag), rng_(seed) {
  auto down = count_paths_to_sink(dag);
  if (down[at(dag.source())] == 0) fail(ErrorCode::NoPath, "no source-sink path");
  for (EdgeId e = 0; e < dag.num_edges(); ++e) {
    const auto& ch = down[at(dag.edge(e).head)];
    const auto& ct = down[at(dag.edge(e).tail)];
    prob_.push_back(ch == 0 || ct == 0 ? 0.0 : std::exp2(log2_big(ch) - log2_big(ct)));
  }
}

const PathIncidence& UniformPolicy::choose() {
  if (pending_) fail(ErrorCode::ProtocolViolation, "choose called twice without feed");
  std::vector<EdgeId> edges;
  VertexId v = dag_.source();
  while (v != dag_.sink()) {
    auto out = dag_.out_edges(v);
    std::vector<double> w;
    for (EdgeId e : out) w.push_back(prob_[at(e)]);
    const EdgeId e = out[draw(w, rng_)];
    edges.push_back(e);
    v = dag_.edge(e).head;
  }
  chosen_ = make_path(dag_, std::move(edges));
  pending_ = true;
  return chosen_;
}

void UniformPolicy::feed(double loss) {
  if (!pending_) fail(ErrorCode::ProtocolViolation, "feed called without a preceding choose");
  if (!(loss >= -1.0 && loss <= 1.0)) fail(ErrorCode::OutOfRangeLoss, "loss outside [-1, 1]");
  pending_ = false;
  ++round_;
}

Exp3IxMultitask::Exp3IxMultitask(const MultitaskReduction& red, int horizon, std::uint64_t seed)
    : red_(red), horizon_(horizon), rng_(seed) {
  if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be >= 1");
  for (int d : red.arms()) {
    const double eta = std::sqrt(2.0 * std::log(static_cast<double>(d)) / (d * static_cast<double>(horizon)));
    eta_.push_back(eta);
    gamma_.push_back(eta / 2.0);
    cum_.emplace_back(at(d), 0.0);
    prob_.emplace_back(at(d), 1.0 / d);
  }
}

const PathIncidence& Exp3IxMultitask::choose() {
  if (pending_) fail(ErrorCode::ProtocolViolation, "choose called twice without feed");
  if (round_ >= horizon_) fail(ErrorCode::ProtocolViolation, "horizon exhausted");
  arms_.clear();
  for (std::size_t i = 0; i < cum_.size(); ++i) {
    const double lo = *std::min_element(cum_[i].begin(), cum_[i].end());
    double total = 0.0;
    for (std::size_t k = 0; k < cum_[i].size(); ++k) total += prob_[i][k] = std::exp(-eta_[i] * (cum_[i][k] - lo));
    for (double& p : prob_[i]) p /= total;
    arms_.push_back(static_cast<int>(draw(prob_[i], rng_)));
  }
  chosen_ = red_.encode(arms_);
  pending_ = true;
  return chosen_;
}

void Exp3IxMultitask::feed(double loss) {
  if (!pending_) fail(ErrorCode::ProtocolViolation, "feed called without a preceding choose");
  if (!(loss >= -1.0 && loss <= 1.0)) fail(ErrorCode::OutOfRangeLoss, "loss outside [-1, 1]");
  for (std::size_t i = 0; i < cum_.size(); ++i) {
    const auto k = at(arms_[i]);
    cum_[i][k] += loss / (prob_[i][k] + gamma_[i]);
  }
  pending_ = false;
  ++round_;
}

Exp3Paths::Exp3Paths(const Dag& dag, int horizon, std::uint64_t seed, std::size_t cap)
    : paths_(enumerate_paths(dag, cap)), rng_(seed), horizon_(horizon) {
  if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be >= 1");
  const double N = static_cast<double>(paths_.size());
  gamma_ = N < 2 ? 1.0 : std::min(1.0, std::sqrt(N * std::log(N) / ((std::exp(1.0) - 1.0) * horizon)));
  eta_ = gamma_ / N;
  cum_.assign(paths_.size(), 0.0);
  prob_.assign(paths_.size(), 1.0 / N);
}

const PathIncidence& Exp3Paths::choose() {
  if (pending_) fail(ErrorCode::ProtocolViolation, "choose called twice without feed");
  if (round_ >= horizon_) fail(ErrorCode::ProtocolViolation, "horizon exhausted");
  const double lo = *std::min_element(cum_.begin(), cum_.end());
  double total = 0.0;
  for (std::size_t i = 0; i < cum_.size(); ++i) total += prob_[i] = std::exp(-eta_ * (cum_[i] - lo));
  const double N = static_cast<double>(paths_.size());
  for (double& p : prob_) p = (1.0 - gamma_) * p / total + gamma_ / N;
  idx_ = draw(prob_, rng_);
  pending_ = true;
  return paths_[idx_];
}

void Exp3Paths::feed(double loss) {
  if (!pending_) fail(ErrorCode::ProtocolViolation, "feed called without a preceding choose");
  if (!(loss >= -1.0 && loss <= 1.0)) fail(ErrorCode::OutOfRangeLoss, "loss outside [-1, 1]");
  cum_[idx_] += loss / prob_[idx_];
  pending_ = false;
  ++round_;
}

// ---- configuration ----

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  fail(ErrorCode::Config, "field '" + field + "': " + msg);
}

const nlohmann::json& need(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) config_error(where.empty() ? key : where + "." + key, "missing");
  return j.at(key);
}

double get_number(const nlohmann::json& j, const char* key, const std::string& where, std::optional<double> def = {}) {
  const std::string field = where.empty() ? key : where + "." + key;
  if (!j.is_object() || !j.contains(key)) {
    if (def) return *def;
    config_error(field, "missing");
  }
  if (!j.at(key).is_number()) config_error(field, "must be a number");
  return j.at(key).get<double>();
}

int get_int(const nlohmann::json& j, const char* key, const std::string& where, std::optional<int> def = {}) {
  const std::string field = where.empty() ? key : where + "." + key;
  if (!j.is_object() || !j.contains(key)) {
    if (def) return *def;
    config_error(field, "missing");
  }
  if (!j.at(key).is_number_integer()) config_error(field, "must be an integer");
  return j.at(key).get<int>();
}

std::vector<int> get_int_list(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto& v = need(j, key, where);
  const std::string field = where + "." + key;
  if (!v.is_array()) config_error(field, "must be an array of integers");
  std::vector<int> out;
  for (const auto& x : v) {
    if (!x.is_number_integer()) config_error(field, "must be an array of integers");
    out.push_back(x.get<int>());
  }
  return out;
}

std::string resolve_path(const std::string& p, const std::string& base) {
  fs::path path(p);
  if (path.is_relative()) path = fs::path(base) / path;
  return path.string();
}

template <class T>
const T* reduction_as(const GraphSpec& g) {
  return dynamic_cast<const T*>(g.reduction.get());
}

std::string default_label(const AlgorithmSpec& a) {
  if (a.name == "ftrl") return "ftrl-" + a.params.value("mode", std::string("compressed"));
  return a.name;
}

const char* kKnownAlgorithms[] = {"ftrl", "exp3-ix", "exp3-paths", "uniform"};
const char* kKnownAdversaries[] = {"zero", "stochastic-iid", "stochastic-gap", "adaptive-targeting",
                                   "multitask-lower-bound", "blotto-random", "efg-random"};

template <std::size_t N>
bool known(const char* const (&list)[N], const std::string& s) {
  return std::find_if(std::begin(list), std::end(list), [&](const char* k) { return s == k; }) != std::end(list);
}

template <std::size_t N>
std::string joined(const char* const (&list)[N]) {
  std::string out;
  for (const char* k : list) out += (out.empty() ? "" : "|") + std::string(k);
  return out;
}

}  // namespace

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = std::min(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::Parse, path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

GraphSpec make_graph(const nlohmann::json& spec, const std::string& base_dir) {
  GraphSpec g;
  g.source = spec;
  if (!spec.is_object()) config_error("graph", "must be an object with 'file', 'dag' or 'reduction'");
  if (spec.contains("file")) {
    if (!spec["file"].is_string()) config_error("graph.file", "must be a path");
    g.dag = load_dag(resolve_path(spec["file"].get<std::string>(), base_dir));
    return g;
  }
  if (spec.contains("dag")) {
    g.dag = dag_from_json(spec["dag"]);
    return g;
  }
  if (!spec.contains("reduction")) config_error("graph", "needs 'file', 'dag' or 'reduction'");
  const auto& r = spec["reduction"];
  const std::string where = "graph.reduction";
  const auto& dom = need(r, "domain", where);
  if (!dom.is_string()) config_error(where + ".domain", "must be a string");
  const std::string domain = dom.get<std::string>();
  std::shared_ptr<Reduction> red;
  if (domain == "hypercube") {
    red = std::make_shared<HypercubeReduction>(get_int(r, "d", where));
  } else if (domain == "multitask") {
    red = std::make_shared<MultitaskReduction>(get_int_list(r, "arms", where));
  } else if (domain == "mset") {
    red = std::make_shared<MsetReduction>(get_int(r, "d", where), get_int(r, "m", where));
  } else if (domain == "blotto") {
    red = std::make_shared<BlottoReduction>(get_int(r, "N", where), get_int(r, "K", where));
  } else if (domain == "walk") {
    const auto& src = need(r, "graph", where);
    Dag base = src.is_string() ? load_dag(resolve_path(src.get<std::string>(), base_dir)) : dag_from_json(src);
    red = std::make_shared<WalkReduction>(base, get_int(r, "K", where));
  } else if (domain == "efg") {
    const auto& src = need(r, "game", where);
    EfgGame game = efg_from_json(src.is_string() ? load_json_file(resolve_path(src.get<std::string>(), base_dir)) : src);
    red = std::make_shared<EfgReduction>(std::move(game));
  } else {
    config_error(where + ".domain", "unknown domain '" + domain + "' (hypercube|multitask|mset|walk|blotto|efg)");
  }
  g.dag = red->dag();
  g.reduction = std::move(red);
  return g;
}

ExperimentConfig parse_experiment(const nlohmann::json& j, const std::string& base_dir) {
  if (!j.is_object()) config_error("<root>", "config must be a JSON object");
  static const char* kFields[] = {"name", "output_dir", "graph", "horizon", "delta", "seeds",
                                  "algorithms", "adversaries", "checkpoints", "threads"};
  for (const auto& [key, _] : j.items())
    if (!known(kFields, key)) config_error(key, "unknown field");
  ExperimentConfig c;
  if (j.contains("name")) {
    if (!j["name"].is_string()) config_error("name", "must be a string");
    c.name = j["name"].get<std::string>();
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) config_error("output_dir", "must be a string");
    c.output_dir = j["output_dir"].get<std::string>();
    if (!c.output_dir.empty()) c.output_dir = resolve_path(c.output_dir, base_dir);
  }
  c.horizon = get_int(j, "horizon", "");
  if (c.horizon < 1) config_error("horizon", "must be >= 1");
  c.delta = get_number(j, "delta", "", 0.05);
  if (!(c.delta > 0.0 && c.delta < 1.0)) config_error("delta", "must lie in (0, 1)");
  c.checkpoints = get_int(j, "checkpoints", "", 20);
  if (c.checkpoints < 1) config_error("checkpoints", "must be >= 1");
  c.threads = get_int(j, "threads", "", 0);
  if (c.threads < 0) config_error("threads", "must be >= 0");
  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    c.seeds.clear();
    if (s.is_number_integer()) {
      for (int k = 0; k < s.get<int>(); ++k) c.seeds.push_back(static_cast<std::uint64_t>(k));
    } else if (s.is_array()) {
      for (const auto& x : s) {
        if (!x.is_number_integer() || x.get<long long>() < 0)
          config_error("seeds", "must be a count or a list of nonnegative integers");
        c.seeds.push_back(x.get<std::uint64_t>());
      }
    } else {
      config_error("seeds", "must be a count or a list of nonnegative integers");
    }
    if (c.seeds.empty()) config_error("seeds", "must not be empty");
  }
  c.graph = make_graph(need(j, "graph", ""), base_dir);

  const auto& algs = need(j, "algorithms", "");
  if (!algs.is_array() || algs.empty()) config_error("algorithms", "must be a non-empty array");
  for (std::size_t i = 0; i < algs.size(); ++i) {
    const std::string where = "algorithms[" + std::to_string(i) + "]";
    const auto& a = algs[i];
    AlgorithmSpec spec;
    if (a.is_string()) {
      spec.name = a.get<std::string>();
      spec.params = nlohmann::json::object();
    } else {
      const auto& nm = need(a, "name", where);
      if (!nm.is_string()) config_error(where + ".name", "must be a string");
      spec.name = nm.get<std::string>();
      spec.params = a;
      spec.params.erase("name");
      if (a.contains("label")) {
        spec.label = a["label"].get<std::string>();
        spec.params.erase("label");
      }
    }
    if (!known(kKnownAlgorithms, spec.name))
      config_error(where + ".name", "unknown algorithm '" + spec.name + "' (" + joined(kKnownAlgorithms) + ")");
    if (spec.label.empty()) spec.label = default_label(spec);
    c.algorithms.push_back(std::move(spec));
  }
  const auto& advs = need(j, "adversaries", "");
  if (!advs.is_array() || advs.empty()) config_error("adversaries", "must be a non-empty array");
  for (std::size_t i = 0; i < advs.size(); ++i) {
    const std::string where = "adversaries[" + std::to_string(i) + "]";
    const auto& a = advs[i];
    AdversarySpec spec;
    if (a.is_string()) {
      spec.kind = a.get<std::string>();
      spec.params = nlohmann::json::object();
    } else {
      const auto& k = need(a, "kind", where);
      if (!k.is_string()) config_error(where + ".kind", "must be a string");
      spec.kind = k.get<std::string>();
      spec.params = a;
      spec.params.erase("kind");
      if (a.contains("label")) {
        spec.label = a["label"].get<std::string>();
        spec.params.erase("label");
      }
    }
    if (!known(kKnownAdversaries, spec.kind))
      config_error(where + ".kind", "unknown adversary '" + spec.kind + "' (" + joined(kKnownAdversaries) + ")");
    if (spec.label.empty()) spec.label = spec.kind;
    if (spec.params.contains("means_file")) {
      if (!spec.params["means_file"].is_string()) config_error(where + ".means_file", "must be a path");
      spec.params["means_file"] = resolve_path(spec.params["means_file"].get<std::string>(), base_dir);
    }
    c.adversaries.push_back(std::move(spec));
  }
  auto unique = [](auto& list, const char* field) {
    for (std::size_t i = 0; i < list.size(); ++i)
      for (std::size_t k = 0; k < i; ++k)
        if (list[i].label == list[k].label)
          config_error(std::string(field) + "[" + std::to_string(i) + "].label", "duplicate label '" + list[i].label + "'");
  };
  unique(c.algorithms, "algorithms");
  unique(c.adversaries, "adversaries");
  // construct everything once so bad parameters surface before any run starts
  resolve_config(c);
  for (const auto& adv : c.adversaries) make_adversary(adv, c.graph, c.horizon, 0);
  return c;
}

ExperimentConfig load_experiment(const std::string& path) {
  auto j = load_json_file(path);
  return parse_experiment(j, fs::path(path).parent_path().string());
}

namespace {

LearnerConfig learner_config(const AlgorithmSpec& spec, const GraphSpec& graph, int horizon, double delta,
                             std::uint64_t seed) {
  const auto& p = spec.params;
  const std::string where = "algorithms[" + spec.label + "]";
  static const char* kFields[] = {"mode", "eta", "gamma", "tol", "warm_start", "solution_dump", "max_solver_iterations"};
  for (const auto& [key, _] : p.items())
    if (!known(kFields, key)) config_error(where + "." + key, "unknown parameter for ftrl");
  LearnerConfig c;
  c.horizon = horizon;
  c.delta = delta;
  c.seed = seed;
  if (p.contains("mode")) {
    if (!p["mode"].is_string()) config_error(where + ".mode", "must be a string");
    try {
      c.mode = parse_mode(p["mode"].get<std::string>());
    } catch (const Error& e) {
      config_error(where + ".mode", e.what());
    }
  }
  if (p.contains("eta")) c.eta = get_number(p, "eta", where);
  if (p.contains("tol")) c.tol = get_number(p, "tol", where);
  c.max_solver_iterations = get_int(p, "max_solver_iterations", where, c.max_solver_iterations);
  if (p.contains("warm_start")) {
    if (!p["warm_start"].is_boolean()) config_error(where + ".warm_start", "must be true or false");
    c.warm_start = p["warm_start"].get<bool>();
  }
  if (p.contains("gamma")) {
    const auto& g = p["gamma"];
    if (g.is_number()) {
      c.gamma = g.get<double>();
    } else if (g.is_string() && g.get<std::string>() == "multitask") {
      const auto* mt = reduction_as<MultitaskReduction>(graph);
      if (!mt) config_error(where + ".gamma", "'multitask' needs a multitask reduction graph");
      c.gamma_coords = mt->gamma_coords(horizon, delta);
    } else if (g.is_array()) {
      c.gamma_coords = g.get<std::vector<double>>();
    } else {
      config_error(where + ".gamma", "must be a number, a per-coordinate array or \"multitask\"");
    }
  }
  try {
    validate_config(c);
  } catch (const Error& e) {
    config_error(where, e.what());
  }
  return c;
}

}  // namespace

std::unique_ptr<Policy> make_policy(const AlgorithmSpec& spec, const GraphSpec& graph, int horizon, double delta,
                                    std::uint64_t seed) {
  const std::string where = "algorithms[" + spec.label + "]";
  if (spec.name == "ftrl") return std::make_unique<Learner>(graph.dag, learner_config(spec, graph, horizon, delta, seed));
  if (spec.name == "uniform") return std::make_unique<UniformPolicy>(graph.dag, seed);
  if (spec.name == "exp3-ix") {
    const auto* mt = reduction_as<MultitaskReduction>(graph);
    if (!mt) config_error(where, "exp3-ix needs a multitask reduction graph");
    return std::make_unique<Exp3IxMultitask>(*mt, horizon, seed);
  }
  if (spec.name == "exp3-paths") {
    const int cap = get_int(spec.params, "cap", where, 5000);
    if (cap < 1) config_error(where + ".cap", "must be >= 1");
    return std::make_unique<Exp3Paths>(graph.dag, horizon, seed, static_cast<std::size_t>(cap));
  }
  config_error(where + ".name", "unknown algorithm '" + spec.name + "'");
}

std::unique_ptr<Adversary> make_adversary(const AdversarySpec& spec, const GraphSpec& graph, int horizon,
                                          std::uint64_t seed) {
  const auto& p = spec.params;
  const std::string where = "adversaries[" + spec.label + "]";
  static const char* kParams[] = {"means", "means_file", "noise", "gap", "magnitude", "opponent"};
  for (const auto& [key, _] : p.items())
    if (!known(kParams, key)) config_error(where + "." + key, "unknown parameter");
  const Dag& g = graph.dag;
  if (spec.kind == "zero") return std::make_unique<ZeroAdversary>(g);
  if (spec.kind == "stochastic-iid") {
    LossVector means;
    if (p.contains("means_file")) {
      means = load_loss_csv(p["means_file"].get<std::string>(), g.num_edges());
    } else {
      const auto& m = need(p, "means", where);
      if (!m.is_array()) config_error(where + ".means", "must be an array with one entry per edge");
      means = m.get<LossVector>();
    }
    if (static_cast<int>(means.size()) != g.num_edges())
      config_error(where + ".means", "needs " + std::to_string(g.num_edges()) + " entries");
    return std::make_unique<StochasticAdversary>(g, std::move(means), get_number(p, "noise", where, 0.0), seed);
  }
  if (spec.kind == "stochastic-gap") {
    const double gap = get_number(p, "gap", where, 0.2);
    return std::make_unique<StochasticAdversary>(g, gap_means(g, gap), get_number(p, "noise", where, 0.1), seed);
  }
  if (spec.kind == "adaptive-targeting")
    return std::make_unique<AdaptiveTargetingAdversary>(g, get_number(p, "magnitude", where, 1.0));
  if (spec.kind == "multitask-lower-bound") {
    const auto* mt = reduction_as<MultitaskReduction>(graph);
    if (!mt) config_error(where, "multitask-lower-bound needs a multitask reduction graph");
    return std::make_unique<MultitaskLowerBoundAdversary>(*mt, horizon, seed);
  }
  if (spec.kind == "blotto-random") {
    const auto* b = reduction_as<BlottoReduction>(graph);
    if (!b) config_error(where, "blotto-random needs a blotto reduction graph");
    return std::make_unique<BlottoAdversary>(*b, get_int(p, "opponent", where, b->N()), seed);
  }
  if (spec.kind == "efg-random") {
    const auto* e = reduction_as<EfgReduction>(graph);
    if (!e) config_error(where, "efg-random needs an efg reduction graph");
    return std::make_unique<EfgAdversary>(*e, get_number(p, "noise", where, 0.2), seed);
  }
  config_error(where + ".kind", "unknown adversary '" + spec.kind + "'");
}

namespace {

nlohmann::json resolved_algorithm(const AlgorithmSpec& spec, const GraphSpec& graph, int horizon, double delta) {
  nlohmann::json j = spec.params;
  j["name"] = spec.name;
  j["label"] = spec.label;
  if (spec.name == "ftrl") {
    Learner l(graph.dag, learner_config(spec, graph, horizon, delta, 0));
    const auto& s = l.schedule();
    j["mode"] = mode_name(l.config().mode);
    j["eta"] = s.eta;
    const auto full = s.full_gamma();
    const bool uniform = std::all_of(full.begin(), full.end(), [&](double v) { return v == full.front(); });
    if (uniform) j["gamma"] = full.front();
    else j["gamma"] = full;
    j["tol"] = s.tol;
    j["warm_start"] = l.config().warm_start;
    j["max_solver_iterations"] = l.config().max_solver_iterations;
    j["working_vertices"] = l.working_graph().num_vertices();
    j["working_edges"] = l.working_graph().num_edges();
    j["live_bits"] = l.domain().num_live_bits();
  } else if (spec.name == "exp3-paths") {
    Exp3Paths p(graph.dag, horizon, 0, static_cast<std::size_t>(spec.params.value("cap", 5000)));
    const double N = static_cast<double>(p.num_paths());
    const double gamma = N < 2 ? 1.0 : std::min(1.0, std::sqrt(N * std::log(N) / ((std::exp(1.0) - 1.0) * horizon)));
    j["paths"] = p.num_paths();
    j["gamma"] = gamma;
    j["eta"] = gamma / N;
    j["cap"] = spec.params.value("cap", 5000);
  } else if (spec.name == "exp3-ix") {
    const auto* mt = reduction_as<MultitaskReduction>(graph);
    if (!mt) config_error("algorithms[" + spec.label + "]", "exp3-ix needs a multitask reduction graph");
    std::vector<double> eta, gamma;
    for (int d : mt->arms()) {
      eta.push_back(std::sqrt(2.0 * std::log(static_cast<double>(d)) / (d * static_cast<double>(horizon))));
      gamma.push_back(eta.back() / 2.0);
    }
    j["eta"] = eta;
    j["gamma"] = gamma;
  } else {
    make_policy(spec, graph, horizon, delta, 0);
  }
  return j;
}

nlohmann::json adversary_json(const AdversarySpec& spec, const GraphSpec& graph) {
  nlohmann::json j = spec.params;
  j["kind"] = spec.kind;
  j["label"] = spec.label;
  if (spec.kind == "stochastic-iid" && !j.contains("noise")) j["noise"] = 0.0;
  if (spec.kind == "stochastic-gap") {
    if (!j.contains("gap")) j["gap"] = 0.2;
    if (!j.contains("noise")) j["noise"] = 0.1;
  }
  if (spec.kind == "adaptive-targeting" && !j.contains("magnitude")) j["magnitude"] = 1.0;
  if (spec.kind == "efg-random" && !j.contains("noise")) j["noise"] = 0.2;
  if (spec.kind == "blotto-random" && !j.contains("opponent"))
    if (const auto* b = reduction_as<BlottoReduction>(graph)) j["opponent"] = b->N();
  return j;
}

nlohmann::json graph_json(const GraphSpec& g) {
  nlohmann::json j;
  j["source"] = g.source;
  j["vertices"] = g.dag.num_vertices();
  j["edges"] = g.dag.num_edges();
  j["paths"] = count_paths(g.dag)[at(g.dag.sink())].str();
  if (g.reduction) j["domain"] = g.reduction->domain();
  return j;
}

}  // namespace

nlohmann::json resolve_config(const ExperimentConfig& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["output_dir"] = c.output_dir;
  j["graph"] = graph_json(c.graph);
  j["horizon"] = c.horizon;
  j["delta"] = c.delta;
  j["seeds"] = c.seeds;
  j["checkpoints"] = c.checkpoints;
  j["algorithms"] = nlohmann::json::array();
  for (const auto& a : c.algorithms) j["algorithms"].push_back(resolved_algorithm(a, c.graph, c.horizon, c.delta));
  j["adversaries"] = nlohmann::json::array();
  for (const auto& a : c.adversaries) j["adversaries"].push_back(adversary_json(a, c.graph));
  return j;
}

// ---- running ----

namespace {

std::string path_id(const std::vector<EdgeId>& edges) {
  std::string s;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(edges[i]);
  }
  return s;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + p.string());
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for " + p.string());
}

nlohmann::json report_json(const RunResult& r) {
  nlohmann::json j;
  j["algorithm"] = r.algorithm;
  j["adversary"] = r.adversary;
  j["seed"] = r.seed;
  j["horizon"] = r.report.horizon;
  j["realized_loss"] = r.report.realized;
  j["hindsight_loss"] = r.report.hindsight_loss;
  j["hindsight_path"] = r.report.hindsight_path.edges;
  j["regret"] = r.report.regret;
  j["wall_seconds"] = r.report.wall_seconds;
  long iters = 0;
  double min_marg = 1.0;
  for (const auto& row : r.report.rounds) {
    iters += row.solver_iterations;
    if (row.solver_iterations > 0) min_marg = std::min(min_marg, row.min_marginal);
  }
  j["mean_solver_iterations"] = static_cast<double>(iters) / r.report.horizon;
  if (iters > 0) j["min_marginal"] = min_marg;
  return j;
}

void persist_run(const RunResult& r, const nlohmann::json& config_echo) {
  const fs::path dir(r.directory);
  fs::create_directories(dir);
  write_text(dir / "config.json", config_echo.dump(2) + "\n");
  std::string csv = "round,path_id,loss,cum_regret,solver_iterations,min_marginal\n";
  for (const auto& row : r.report.rounds) {
    csv += std::to_string(row.round) + ',' + path_id(row.path) + ',' + format_double(row.loss) + ',' +
           format_double(row.cum_regret) + ',' + std::to_string(row.solver_iterations) + ',' +
           format_double(row.min_marginal) + '\n';
  }
  write_text(dir / "trajectory.csv", csv);
  write_text(dir / "summary.json", report_json(r).dump(2) + "\n");
}

std::vector<int> checkpoint_rounds(int T, int k) {
  std::vector<int> out;
  for (int i = 1; i <= k; ++i) {
    const int r = static_cast<int>(std::llround(static_cast<double>(T) * i / k));
    if (r >= 1 && (out.empty() || r > out.back())) out.push_back(r);
  }
  return out;
}

int thread_count(int requested, std::size_t jobs) {
  int n = requested;
  if (n <= 0) {
    n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("DAGBANDIT_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && v > 0) n = static_cast<int>(v);
    }
  }
  n = std::max(n, 1);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(jobs, 1)));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c) {
  if (c.algorithms.empty() || c.adversaries.empty() || c.seeds.empty())
    fail(ErrorCode::Config, "experiment needs at least one algorithm, adversary and seed");
  const nlohmann::json resolved = resolve_config(c);

  ExperimentResult result;
  for (const auto& alg : c.algorithms)
    for (const auto& adv : c.adversaries)
      for (std::uint64_t seed : c.seeds) {
        RunResult r;
        r.algorithm = alg.label;
        r.adversary = adv.label;
        r.seed = seed;
        if (!c.output_dir.empty())
          r.directory = (fs::path(c.output_dir) / (alg.label + "__" + adv.label + "__seed" + std::to_string(seed))).string();
        result.runs.push_back(std::move(r));
      }
  const std::size_t per_alg = c.adversaries.size() * c.seeds.size();

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed) {
      const std::size_t i = next++;
      if (i >= result.runs.size()) return;
      try {
        auto& r = result.runs[i];
        const auto& alg = c.algorithms[i / per_alg];
        const auto& adv = c.adversaries[(i % per_alg) / c.seeds.size()];
        auto policy = make_policy(alg, c.graph, c.horizon, c.delta, derive(r.seed, 1));
        auto adversary = make_adversary(adv, c.graph, c.horizon, derive(r.seed, 2));
        r.report = run_episode(*policy, *adversary, c.graph.dag, {c.horizon, true});
        if (!r.directory.empty()) {
          nlohmann::json echo;
          echo["experiment"] = c.name;
          echo["graph"] = resolved["graph"];
          echo["horizon"] = c.horizon;
          echo["delta"] = c.delta;
          echo["seed"] = r.seed;
          echo["algorithm"] = resolved["algorithms"][i / per_alg];
          echo["adversary"] = resolved["adversaries"][(i % per_alg) / c.seeds.size()];
          persist_run(r, echo);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };
  const int n = thread_count(c.threads, result.runs.size());
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // aggregate
  const auto rounds = checkpoint_rounds(c.horizon, c.checkpoints);
  nlohmann::json summary;
  summary["name"] = c.name;
  summary["runs"] = result.runs.size();
  summary["horizon"] = c.horizon;
  summary["checkpoints"] = rounds;
  summary["groups"] = nlohmann::json::array();
  std::string table = "algorithm,adversary,seeds,regret_median,regret_q10,regret_q25,regret_q75,regret_q90\n";
  std::string curves = "algorithm,adversary,round,median,q25,q75\n";
  for (std::size_t g = 0; g < result.runs.size(); g += c.seeds.size()) {
    std::vector<double> finals;
    std::vector<std::vector<double>> at_round(rounds.size());
    for (std::size_t k = g; k < g + c.seeds.size(); ++k) {
      const auto& rep = result.runs[k].report;
      finals.push_back(rep.regret);
      for (std::size_t q = 0; q < rounds.size(); ++q) at_round[q].push_back(rep.rounds[at(rounds[q] - 1)].cum_regret);
    }
    nlohmann::json grp;
    grp["algorithm"] = result.runs[g].algorithm;
    grp["adversary"] = result.runs[g].adversary;
    grp["seeds"] = c.seeds.size();
    grp["regret_median"] = quantile(finals, 0.5);
    grp["regret_q10"] = quantile(finals, 0.1);
    grp["regret_q25"] = quantile(finals, 0.25);
    grp["regret_q75"] = quantile(finals, 0.75);
    grp["regret_q90"] = quantile(finals, 0.9);
    grp["regrets"] = finals;
    nlohmann::json med = nlohmann::json::array(), lo = nlohmann::json::array(), hi = nlohmann::json::array();
    for (std::size_t q = 0; q < rounds.size(); ++q) {
      med.push_back(quantile(at_round[q], 0.5));
      lo.push_back(quantile(at_round[q], 0.25));
      hi.push_back(quantile(at_round[q], 0.75));
      curves += grp["algorithm"].get<std::string>() + ',' + grp["adversary"].get<std::string>() + ',' +
                std::to_string(rounds[q]) + ',' + format_double(med.back().get<double>()) + ',' +
                format_double(lo.back().get<double>()) + ',' + format_double(hi.back().get<double>()) + '\n';
    }
    grp["curve_median"] = med;
    grp["curve_q25"] = lo;
    grp["curve_q75"] = hi;
    table += grp["algorithm"].get<std::string>() + ',' + grp["adversary"].get<std::string>() + ',' +
             std::to_string(c.seeds.size()) + ',' + format_double(grp["regret_median"].get<double>()) + ',' +
             format_double(grp["regret_q10"].get<double>()) + ',' + format_double(grp["regret_q25"].get<double>()) + ',' +
             format_double(grp["regret_q75"].get<double>()) + ',' + format_double(grp["regret_q90"].get<double>()) + '\n';
    summary["groups"].push_back(std::move(grp));
  }
  if (!c.output_dir.empty()) {
    fs::create_directories(c.output_dir);
    write_text(fs::path(c.output_dir) / "config.json", resolved.dump(2) + "\n");
    write_text(fs::path(c.output_dir) / "summary.json", summary.dump(2) + "\n");
    write_text(fs::path(c.output_dir) / "summary.csv", table);
    write_text(fs::path(c.output_dir) / "curves.csv", curves);
  }
  result.summary = std::move(summary);
  result.summary_csv = std::move(table);
  return result;
}

double recompute_regret(const std::string& run_directory) {
  const fs::path dir(run_directory);
  std::ifstream in(dir / "trajectory.csv");
  if (!in) fail(ErrorCode::Io, "cannot open " + (dir / "trajectory.csv").string());
  std::string line;
  std::getline(in, line);
  double realized = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string round, path, loss;
    std::getline(ss, round, ',');
    std::getline(ss, path, ',');
    std::getline(ss, loss, ',');
    double v = 0.0;
    auto r = std::from_chars(loss.data(), loss.data() + loss.size(), v);
    if (r.ec != std::errc()) fail(ErrorCode::Parse, "bad loss value '" + loss + "'");
    realized += v;
  }
  auto s = load_json_file((dir / "summary.json").string());
  return realized - s.at("hindsight_loss").get<double>();
}

}  // namespace dagbandit
