// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only N] [--configs DIR]
//
// Exit status is 0 only when every selected criterion passes inside its
// time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dagbandit/augment.hpp"
#include "dagbandit/compress.hpp"
#include "dagbandit/error.hpp"
#include "dagbandit/estimators.hpp"
#include "dagbandit/ftrl.hpp"
#include "dagbandit/graph_io.hpp"
#include "dagbandit/harness.hpp"
#include "dagbandit/reductions.hpp"
#include "dagbandit/sampler.hpp"
#include "oracles.hpp"

using namespace dagbandit;
using oracle::Rational;
using nlohmann::json;

namespace {

std::string g_configs = DAGBANDIT_CONFIG_DIR;

struct Outcome {
  bool ok = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// first failure wins the detail line
struct Tally {
  bool ok = true;
  std::string first;
  void check(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      first = what;
    }
  }
};

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// probability that the Markov walk picks `path` under marginals x
double walk_probability(const Dag& g, const std::vector<double>& x, const std::vector<int>& path) {
  double p = 1.0;
  for (int e : path) {
    const int u = g.edge(e).tail;
    double out = 0;
    for (int f = 0; f < g.num_edges(); ++f)
      if (g.edge(f).tail == u) out += x[static_cast<std::size_t>(g.num_vertices() + f)];
    p *= x[static_cast<std::size_t>(g.num_vertices() + e)] / out;
  }
  return p;
}

// live skipped levels in increasing order, from brute-force longest distances
std::vector<int> live_levels(const Dag& g) {
  auto K = oracle::brute_longest(g);
  std::set<int> live;
  for (const Edge& e : g.edges())
    for (int i = K[static_cast<std::size_t>(e.tail)] + 1; i < K[static_cast<std::size_t>(e.head)]; ++i) live.insert(i);
  return {live.begin(), live.end()};
}

// [V | E | live bits] incidence of a path given as edges
std::vector<std::uint8_t> augmented_incidence(const Dag& g, const std::vector<int>& path, const std::vector<int>& levels) {
  auto K = oracle::brute_longest(g);
  std::vector<std::uint8_t> a(static_cast<std::size_t>(g.num_coordinates()) + levels.size(), 0);
  a[static_cast<std::size_t>(g.source())] = 1;
  for (int e : path) {
    const Edge& ed = g.edge(e);
    a[static_cast<std::size_t>(ed.head)] = 1;
    a[static_cast<std::size_t>(g.num_vertices() + e)] = 1;
    for (std::size_t s = 0; s < levels.size(); ++s)
      if (K[static_cast<std::size_t>(ed.tail)] < levels[s] && levels[s] < K[static_cast<std::size_t>(ed.head)])
        a[static_cast<std::size_t>(g.num_coordinates()) + s] = 1;
  }
  return a;
}

std::vector<Dag> estimator_corpus() {
  Rng rng(101);
  std::vector<Dag> out;
  for (int i = 0; i < 50; ++i) out.push_back(oracle::random_dag(rng, 10, 0.4 + 0.55 * rng.uniform01(), 5000));
  return out;
}

// E<x, y~> against <x, y> + offset(x) for every path x
Outcome offset_identity(bool augmented) {
  Rng rng(augmented ? 202 : 201);
  double worst = 0;
  std::size_t total = 0;
  Tally t;
  for (const Dag& g : estimator_corpus()) {
    auto x = oracle::random_flow(g, rng);
    auto y = oracle::random_valid_losses(g, rng);
    auto paths = oracle::brute_paths(g);
    std::vector<int> levels;
    std::vector<double> marg = x;
    if (augmented) {
      levels = live_levels(g);
      auto map = interval_set(g);
      t.check(map.live_bits == levels, "live bit levels disagree with brute force");
      auto K = oracle::brute_longest(g);
      for (int lvl : levels) {
        double v = 0;
        for (int e = 0; e < g.num_edges(); ++e)
          if (K[static_cast<std::size_t>(g.edge(e).tail)] < lvl && lvl < K[static_cast<std::size_t>(g.edge(e).head)])
            v += x[static_cast<std::size_t>(g.num_vertices() + e)];
        marg.push_back(v);
      }
    }
    const std::size_t dim = marg.size();
    std::vector<double> mean(dim, 0.0);
    double mass = 0;
    std::vector<std::vector<std::uint8_t>> incid;
    std::vector<double> inner;
    for (const auto& p : paths) {
      const double prob = walk_probability(g, x, p);
      mass += prob;
      auto inc = augmented ? augmented_incidence(g, p, levels) : augmented_incidence(g, p, {});
      if (augmented) {
        auto lib = augment_path(g, make_path(g, p), interval_set(g));
        t.check(lib == inc, "augment_path disagrees with brute force");
      }
      double loss = 0;
      for (int e : p) loss += y[static_cast<std::size_t>(e)];
      RoundObservation obs{inc, loss, marg};
      auto est = unbiased_estimate(g, obs);
      for (std::size_t i = 0; i < dim; ++i) mean[i] += prob * est[i];
      incid.push_back(std::move(inc));
      inner.push_back(loss);
    }
    t.check(std::abs(mass - 1.0) <= 1e-12, "walk law does not sum to 1");
    const int K = oracle::brute_longest(g)[static_cast<std::size_t>(g.sink())];
    for (std::size_t k = 0; k < paths.size(); ++k) {
      double lhs = 0;
      for (std::size_t i = 0; i < dim; ++i) lhs += incid[k][i] * mean[i];
      const double offset = augmented ? 2.0 * K - 1 : 2.0 * static_cast<double>(paths[k].size()) + 1 - 2;
      worst = std::max(worst, std::abs(lhs - (inner[k] + offset)));
    }
    total += paths.size();
  }
  t.check(worst <= 1e-9, fmt("max error %.3g > 1e-9", worst));
  return {t.ok, t.ok ? fmt("max |error| %.2e over 50 graphs, %zu paths", worst, total) : t.first};
}

Outcome criterion_1() { return offset_identity(false); }
Outcome criterion_2() { return offset_identity(true); }

Outcome criterion_3() {
  Rng rng(301);
  double worst = 0;
  Tally t;
  for (const Dag& g : estimator_corpus()) {
    auto x = oracle::random_flow(g, rng);
    auto law = sampler_law(g, x);
    std::vector<double> m(x.size(), 0.0);
    for (const auto& [p, prob] : law) {
      t.check(std::abs(prob - walk_probability(g, x, p.edges)) <= 1e-12, "sampler_law probability off");
      for (std::size_t i = 0; i < m.size(); ++i) m[i] += prob * p.bits[i];
    }
    t.check(law.size() == oracle::brute_paths(g).size(), "sampler_law misses paths");
    worst = std::max(worst, sup_diff(m, x));
  }
  t.check(worst <= 1e-12, fmt("marginal error %.3g > 1e-12", worst));

  Dag g = oracle::worked_example();
  auto x = oracle::random_flow(g, rng);
  const int N = 200000;
  std::vector<int> hits(static_cast<std::size_t>(g.num_edges()), 0);
  Rng draw(302);
  for (int i = 0; i < N; ++i)
    for (int e : sample_path(g, x, draw).edges) ++hits[static_cast<std::size_t>(e)];
  double zmax = 0;
  for (int e = 0; e < g.num_edges(); ++e) {
    const double p = x[static_cast<std::size_t>(g.edge_coordinate(e))];
    const double sd = std::sqrt(N * p * (1 - p));
    const double z = sd > 0 ? std::abs(hits[static_cast<std::size_t>(e)] - N * p) / sd : 0.0;
    zmax = std::max(zmax, z);
  }
  t.check(zmax <= 4.0, fmt("edge frequency %.2f sigma off", zmax));
  return {t.ok, t.ok ? fmt("exact marginals within %.1e; 2e5 draws max %.2f sigma", worst, zmax) : t.first};
}

std::vector<Dag> compression_corpus() {
  Rng rng(401);
  std::vector<Dag> out;
  for (int i = 0; i < 100; ++i) out.push_back(oracle::random_dag(rng, 14, 0.3 + 0.6 * rng.uniform01(), 5000));
  return out;
}

Outcome criterion_4() {
  Rng rng(402);
  Tally t;
  int graphs = 0;
  double slack_edges = 1e9;
  for (const Dag& g : compression_corpus()) {
    auto c = build_gdagger(g);
    const int V = g.num_vertices(), E = g.num_edges();
    auto paths = oracle::brute_paths(g);
    const BigInt X = paths.size();
    t.check(count_paths(g)[static_cast<std::size_t>(g.sink())] == X, "path count disagrees with enumeration");
    t.check(c.gdag.num_vertices() <= 3 * V, fmt("|V+| = %d > 3|V| = %d", c.gdag.num_vertices(), 3 * V));
    const double ebound = V * std::log2(static_cast<double>(V)) + 2.0 * V + E;
    t.check(c.gdag.num_edges() <= ebound, fmt("|E+| = %d > %.1f", c.gdag.num_edges(), ebound));
    slack_edges = std::min(slack_edges, ebound - c.gdag.num_edges());
    // longest <= 3 log2 X + 2  <=>  2^(L-2) <= X^3
    const int L = oracle::brute_longest(c.gdag)[static_cast<std::size_t>(c.gdag.sink())];
    if (L > 2) t.check((BigInt(1) << (L - 2)) <= X * X * X, fmt("longest compressed path %d too long", L));

    std::set<std::vector<int>> original(paths.begin(), paths.end()), mapped;
    auto dpaths = oracle::brute_paths(c.gdag);
    t.check(dpaths.size() == paths.size(), "compressed path count differs");
    // exact rational weights pushed through sigma
    std::vector<Rational> w(static_cast<std::size_t>(E));
    for (auto& v : w) v = Rational(static_cast<long>(rng.below(41)) - 20, 1 + static_cast<long>(rng.below(9)));
    std::vector<Rational> wd(static_cast<std::size_t>(c.gdag.num_edges()));
    for (int f = 0; f < c.gdag.num_edges(); ++f)
      for (int e : sigma(c, f)) wd[static_cast<std::size_t>(f)] += w[static_cast<std::size_t>(e)];
    LossVector wdy(static_cast<std::size_t>(E));
    for (int e = 0; e < E; ++e) wdy[static_cast<std::size_t>(e)] = oracle::dyadic(rng);
    auto conv = convert_weights(c, wdy);
    for (int f = 0; f < c.gdag.num_edges(); ++f) {
      Rational s = 0;
      for (int e : sigma(c, f)) s += Rational(wdy[static_cast<std::size_t>(e)]);
      t.check(Rational(conv[static_cast<std::size_t>(f)]) == s, "convert_weights is not the sigma sum");
    }
    for (const auto& q : dpaths) {
      std::vector<int> walk;
      Rational wq = 0;
      for (int f : q) {
        for (int e : sigma(c, f)) walk.push_back(e);
        wq += wd[static_cast<std::size_t>(f)];
      }
      std::set<int> uniq(walk.begin(), walk.end());
      t.check(uniq.size() == walk.size(), "sigma images overlap along a path");
      t.check(original.count(walk) == 1, "sigma concatenation is not a path");
      mapped.insert(walk);
      Rational wp = 0;
      for (int e : walk) wp += w[static_cast<std::size_t>(e)];
      t.check(wq == wp, "path weight changed");
      auto qi = make_path(c.gdag, q);
      auto proj = project_path(c, qi);
      t.check(proj.edges == walk, "project_path disagrees with sigma");
      t.check(lift_path(c, proj) == qi, "lift(project(q)) != q");
    }
    t.check(mapped == original, "sigma map is not onto");
    for (const auto& p : paths) t.check(project_path(c, lift_path(c, make_path(g, p))).edges == p, "project(lift(p)) != p");
    ++graphs;
  }
  return {t.ok, t.ok ? fmt("%d graphs, min edge-bound slack %.1f", graphs, slack_edges) : t.first};
}

Outcome criterion_5() {
  Rng rng(501);
  Tally t;
  double worst_ratio = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(128));
    auto adj = oracle::random_tree(rng, n);
    auto d = centroid_decompose(adj);
    const auto N = static_cast<std::size_t>(n);
    std::vector<std::vector<char>> in(N, std::vector<char>(N, 0));
    double total = 0;
    for (int c = 0; c < n; ++c) {
      const auto& S = d.subtree[static_cast<std::size_t>(c)];
      total += static_cast<double>(S.size());
      for (int v : S) in[static_cast<std::size_t>(c)][static_cast<std::size_t>(v)] = 1;
      // V_c is c's component among vertices at level >= level(c)
      const int lc = d.level[static_cast<std::size_t>(c)];
      std::vector<int> comp{c}, stack{c};
      std::vector<char> seen(N, 0);
      seen[static_cast<std::size_t>(c)] = 1;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int w : adj[static_cast<std::size_t>(u)])
          if (!seen[static_cast<std::size_t>(w)] && d.level[static_cast<std::size_t>(w)] >= lc) {
            seen[static_cast<std::size_t>(w)] = 1;
            comp.push_back(w);
            stack.push_back(w);
          }
      }
      std::sort(comp.begin(), comp.end());
      t.check(comp == S, "subtree is not the component left after removing ancestors");
      const int p = d.parent_centroid[static_cast<std::size_t>(c)];
      if (p < 0) {
        t.check(static_cast<int>(S.size()) == n && c == d.root, "top centroid does not own the tree");
      } else {
        t.check(2 * S.size() <= d.subtree[static_cast<std::size_t>(p)].size(), "component did not halve");
        t.check(d.level[static_cast<std::size_t>(p)] + 1 == lc, "level is not parent level + 1");
      }
    }
    const double bound = (1 + std::log2(static_cast<double>(n))) * n;
    t.check(total <= bound, fmt("sum |V_c| = %.0f > %.1f", total, bound));
    worst_ratio = std::max(worst_ratio, total / bound);

    // tree paths via BFS parents from vertex 0
    std::vector<int> par(N, -1), depth(N, 0), order{0};
    std::vector<char> vis(N, 0);
    vis[0] = 1;
    for (std::size_t i = 0; i < order.size(); ++i)
      for (int w : adj[static_cast<std::size_t>(order[i])])
        if (!vis[static_cast<std::size_t>(w)]) {
          vis[static_cast<std::size_t>(w)] = 1;
          par[static_cast<std::size_t>(w)] = order[i];
          depth[static_cast<std::size_t>(w)] = depth[static_cast<std::size_t>(order[i])] + 1;
          order.push_back(w);
        }
    for (int u = 0; u < n; ++u)
      for (int v = u; v < n; ++v) {
        std::vector<int> on;
        int a = u, b = v;
        while (a != b) {
          if (depth[static_cast<std::size_t>(a)] >= depth[static_cast<std::size_t>(b)]) {
            on.push_back(a);
            a = par[static_cast<std::size_t>(a)];
          } else {
            on.push_back(b);
            b = par[static_cast<std::size_t>(b)];
          }
        }
        on.push_back(a);
        int owners = 0;
        for (int w : on)
          if (in[static_cast<std::size_t>(w)][static_cast<std::size_t>(u)] && in[static_cast<std::size_t>(w)][static_cast<std::size_t>(v)]) ++owners;
        t.check(owners == 1, fmt("pair (%d,%d) has %d owning centroids", u, v, owners));
      }
  }
  return {t.ok, t.ok ? fmt("200 trees, worst sum/bound %.3f", worst_ratio) : t.first};
}

Outcome criterion_6() {
  Tally t;
  std::vector<Dag> corpus = estimator_corpus();
  for (auto& g : compression_corpus()) corpus.push_back(std::move(g));
  corpus.push_back(oracle::worked_example());
  std::size_t paths_seen = 0;
  int tightest = 1 << 30;
  for (const Dag& g : corpus) {
    auto counts = count_paths(g);
    auto tree = build_spanning_tree(g, counts);
    // every non-source vertex keeps an in-edge with a maximal-count tail
    for (int v = 0; v < g.num_vertices(); ++v) {
      if (v == g.source()) continue;
      BigInt best = 0;
      for (int e : g.in_edges(v)) best = std::max(best, counts[static_cast<std::size_t>(g.edge(e).tail)]);
      const int pe = tree.parent_edge[static_cast<std::size_t>(v)];
      t.check(pe >= 0 && counts[static_cast<std::size_t>(g.edge(pe).tail)] == best, "tree edge tail is not a max-count tail");
    }
    auto paths = oracle::brute_paths(g);
    const BigInt X = paths.size();
    for (const auto& p : paths) {
      int k = 0;
      for (int e : p) k += tree.is_tree_edge[static_cast<std::size_t>(e)] ? 0 : 1;
      t.check((BigInt(1) << k) <= X, fmt("path with %d non-tree edges among %zu paths", k, paths.size()));
      int room = 0;
      while ((BigInt(1) << (room + 1)) <= X) ++room;
      tightest = std::min(tightest, room - k);
    }
    paths_seen += paths.size();
  }
  return {t.ok, t.ok ? fmt("%zu graphs, %zu paths, min slack %d", corpus.size(), paths_seen, tightest) : t.first};
}

std::vector<std::vector<double>> domain_rows(const FtrlDomain& dom, std::vector<double>& b) {
  std::vector<std::vector<double>> A;
  oracle::flow_rows(dom.dag, A, b);
  for (auto& r : A) r.resize(static_cast<std::size_t>(dom.dim), 0.0);
  for (int s = 0; s < dom.num_live_bits(); ++s) {
    std::vector<double> r(static_cast<std::size_t>(dom.dim), 0.0);
    r[static_cast<std::size_t>(dom.dag.num_coordinates() + s)] = 1;
    for (EdgeId e : dom.bits.support[static_cast<std::size_t>(s)]) r[static_cast<std::size_t>(dom.dag.edge_coordinate(e))] = -1;
    A.push_back(r);
    b.push_back(0);
  }
  return A;
}

Outcome criterion_7() {
  Rng rng(701);
  Tally t;
  double worst = 0, worst_res = 0;
  for (int trial = 0; trial < 30; ++trial) {
    Dag g = oracle::random_dag(rng, 10, 0.5);
    auto dom = make_domain(g, trial % 2 == 1);
    std::vector<double> b;
    auto A = domain_rows(dom, b);
    FtrlSolver solver(dom);
    std::vector<double> L(static_cast<std::size_t>(dom.dim));
    for (auto& v : L) v = 50.0 * rng.uniform01();
    const double eta = 0.05 + rng.uniform01();
    auto x = solver.solve(L, eta, 1e-10);
    std::vector<double> c(L);
    for (auto& v : c) v *= eta;
    auto ref = oracle::nullspace_newton(A, b, initial_point(dom), c);
    worst = std::max(worst, sup_diff(x, ref));
    for (std::size_t i = 0; i < A.size(); ++i) {
      double r = -b[i];
      for (std::size_t j = 0; j < x.size(); ++j) r += A[i][j] * x[j];
      worst_res = std::max(worst_res, std::abs(r));
    }
    for (double v : x) t.check(v > 0, "solution leaves the open orthant");
  }
  t.check(worst <= 1e-6, fmt("sup distance to oracle %.3g > 1e-6", worst));
  t.check(worst_res <= 1e-8, fmt("residual %.3g > 1e-8", worst_res));

  // symmetric instances: k routes, and a complete 2x2 layered graph
  double sym = 0;
  for (bool aug : {false, true}) {
    for (int k = 2; k <= 6; ++k) {
      auto dom = make_domain(oracle::k_routes(k), aug);
      FtrlSolver solver(dom);
      std::vector<double> L(static_cast<std::size_t>(dom.dim), 0.0);
      auto x = solver.solve(L, 0.3, 1e-10);
      for (EdgeId e = 0; e < dom.dag.num_edges(); ++e)
        sym = std::max(sym, std::abs(x[static_cast<std::size_t>(dom.dag.edge_coordinate(e))] - 1.0 / k));
    }
    // s=0 a=1 b=2 c=3 d=4 t=5
    Dag layered(6, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 5}, {4, 5}}, 0, 5);
    auto dom = make_domain(layered, aug);
    FtrlSolver solver(dom);
    std::vector<double> L(static_cast<std::size_t>(dom.dim), 1.0);
    auto x = solver.solve(L, 0.7, 1e-10);
    const double expect[] = {0.5, 0.5, 0.25, 0.25, 0.25, 0.25, 0.5, 0.5};
    for (EdgeId e = 0; e < 8; ++e) sym = std::max(sym, std::abs(x[static_cast<std::size_t>(dom.dag.edge_coordinate(e))] - expect[e]));
  }
  t.check(sym <= 1e-9, fmt("symmetric split off by %.3g", sym));
  return {t.ok, t.ok ? fmt("oracle sup %.1e, residual %.1e, symmetric %.1e", worst, worst_res, sym) : t.first};
}

// ---- regret experiments ----

json load_config(const std::string& file) { return load_json_file(g_configs + "/" + file); }

// median regret per algorithm label
std::map<std::string, double> median_regret(json cfg, int horizon) {
  cfg["horizon"] = horizon;
  auto result = run_experiment(parse_experiment(cfg, g_configs));
  std::map<std::string, std::vector<double>> by;
  for (const auto& r : result.runs) by[r.algorithm].push_back(r.report.regret);
  std::map<std::string, double> out;
  for (auto& [k, v] : by) out[k] = oracle::median(v);
  return out;
}

struct Slope {
  double short_rate = 0, long_rate = 0, long_median = 0;
  bool sublinear() const { return long_rate <= 0.6 * short_rate; }
};

Slope slope(const json& cfg, const std::string& label) {
  Slope s;
  const double a = median_regret(cfg, 2000).at(label);
  s.long_median = median_regret(cfg, 20000).at(label);
  s.short_rate = a / 2000.0;
  s.long_rate = s.long_median / 20000.0;
  return s;
}

Outcome criterion_8() {
  auto cfg = load_config("regret_slope.json");
  Dag g = prune(load_dag(g_configs + "/" + cfg["graph"]["file"].get<std::string>()));
  Dag work = prune(build_gdagger(g).gdag);
  const double K = longest_dist(work)[static_cast<std::size_t>(work.sink())];
  const double E = work.num_edges();
  const double T = 20000;
  const double bound = 25.0 * std::sqrt(K * E * T * std::log2(E / 0.05));
  auto s = slope(cfg, "ftrl");
  const bool a = s.long_median <= bound;
  const bool b = s.sublinear();
  return {a && b, fmt("(a) %s median R(20000) %.1f vs bound %.0f; (b) %s R/T %.4f at 20000 vs 0.6 x %.4f at 2000 (ratio %.3f)",
                      a ? "ok" : "FAIL", s.long_median, bound, b ? "ok" : "FAIL", s.long_rate, s.short_rate,
                      s.long_rate / s.short_rate)};
}

template <class R>
void check_bijection(Tally& t, const R& red, const std::vector<Action>& domain, const std::string& what) {
  auto paths = oracle::brute_paths(red.dag());
  t.check(paths.size() == domain.size(), what + ": path count != domain size");
  std::set<std::vector<int>> seen;
  for (const auto& a : domain) {
    auto p = red.encode(a);
    t.check(red.decode(p) == a, what + ": decode(encode(a)) != a");
    seen.insert(p.edges);
  }
  t.check(seen.size() == domain.size(), what + ": encode not injective");
  std::set<std::vector<int>> all(paths.begin(), paths.end());
  t.check(seen == all, what + ": encode not onto");
}

double loss_on(const LossVector& w, const PathIncidence& p) {
  double s = 0;
  for (int e : p.edges) s += w[static_cast<std::size_t>(e)];
  return s;
}

Outcome criterion_9() {
  Rng rng(901);
  Tally t;
  int instances = 0;
  for (int d = 1; d <= 6; ++d) {
    HypercubeReduction h(d);
    auto domain = oracle::product(std::vector<int>(static_cast<std::size_t>(d), 2));
    check_bijection(t, h, domain, fmt("hypercube d=%d", d));
    for (int rep = 0; rep < 20; ++rep) {
      auto y = oracle::dyadics(rng, static_cast<std::size_t>(d));
      auto w = h.lift_loss(y);
      for (const auto& x : domain) {
        double v = 0;
        for (int i = 0; i < d; ++i) v += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
        t.check(loss_on(w, h.encode(x)) == v, fmt("hypercube d=%d loss mismatch", d));
      }
    }
    ++instances;
  }

  // every task tuple with d_i >= 2 and product <= 64
  std::vector<std::vector<int>> tuples;
  std::function<void(std::vector<int>&, int)> grow = [&](std::vector<int>& cur, int prod) {
    if (!cur.empty()) tuples.push_back(cur);
    for (int di = 2; prod * di <= 64; ++di) {
      cur.push_back(di);
      grow(cur, prod * di);
      cur.pop_back();
    }
  };
  std::vector<int> cur;
  grow(cur, 1);
  for (const auto& d : tuples) {
    MultitaskReduction r(d);
    auto domain = oracle::product(d);
    check_bijection(t, r, domain, "multitask");
    std::vector<int> off{0};
    for (int di : d) off.push_back(off.back() + di);
    for (int rep = 0; rep < 20; ++rep) {
      auto y = oracle::dyadics(rng, static_cast<std::size_t>(off.back()));
      auto w = r.lift_loss(y);
      for (const auto& a : domain) {
        double v = 0;
        for (std::size_t i = 0; i < d.size(); ++i) v += y[static_cast<std::size_t>(off[i] + a[i])];
        t.check(loss_on(w, r.encode(a)) == v, "multitask loss mismatch");
      }
    }
    ++instances;
  }

  for (int d = 1; d <= 8; ++d)
    for (int m = 1; m <= d; ++m) {
      MsetReduction r(d, m);
      std::vector<Action> domain;
      for (const auto& a : oracle::product(std::vector<int>(static_cast<std::size_t>(d), 2)))
        if (std::count(a.begin(), a.end(), 1) == m) domain.push_back(a);
      check_bijection(t, r, domain, fmt("mset d=%d m=%d", d, m));
      for (int rep = 0; rep < 20; ++rep) {
        auto y = oracle::dyadics(rng, static_cast<std::size_t>(d));
        auto w = r.lift_loss(y);
        for (const auto& x : domain) {
          double v = 0;
          for (int k = 0; k < d; ++k) v += x[static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(k)];
          t.check(loss_on(w, r.encode(x)) == v, "mset loss mismatch");
        }
      }
      ++instances;
    }

  for (int N = 0; N <= 5; ++N)
    for (int K = 1; K <= 4; ++K) {
      BlottoReduction r(N, K);
      std::vector<Action> domain;
      for (const auto& a : oracle::product(std::vector<int>(static_cast<std::size_t>(K), N + 1))) {
        int s = 0;
        for (int v : a) s += v;
        if (s == N) domain.push_back(a);
      }
      check_bijection(t, r, domain, fmt("blotto N=%d K=%d", N, K));
      const int M = 3;
      for (int rep = 0; rep < 20; ++rep) {
        std::vector<std::vector<std::vector<double>>> y(static_cast<std::size_t>(K));
        for (auto& tab : y) {
          tab.resize(static_cast<std::size_t>(N + 1));
          for (auto& row : tab) row = oracle::dyadics(rng, M + 1);
        }
        std::vector<int> b;
        for (int i = 0; i < K; ++i) b.push_back(static_cast<int>(rng.below(M + 1)));
        auto w = r.lift_loss(y, b);
        for (const auto& a : domain) {
          double v = 0;
          for (std::size_t i = 0; i < a.size(); ++i) v += y[i][static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])];
          t.check(loss_on(w, r.encode(a)) == v, "blotto loss mismatch");
        }
      }
      ++instances;
    }

  int walks = 0;
  for (int rep = 0; walks < 40 && rep < 400; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(5));
    Dag g = oracle::random_digraph(rng, n, 0.45);
    const int K = 1 + static_cast<int>(rng.below(5));
    if (K > g.num_edges()) continue;
    auto domain = oracle::brute_walks(g, K);
    if (domain.empty()) continue;
    WalkReduction r(g, K);
    check_bijection(t, r, domain, "walk");
    for (int k = 0; k < 20; ++k) {
      auto w = oracle::dyadics(rng, static_cast<std::size_t>(g.num_edges()));
      auto lifted = r.lift_loss(w);
      for (const auto& walk : domain) {
        double v = 0;
        for (int e : walk) v += w[static_cast<std::size_t>(e)];
        t.check(loss_on(lifted, r.encode(walk)) == v, "walk loss mismatch");
      }
    }
    ++walks;
  }
  t.check(walks >= 40, "too few walk instances");
  instances += walks;

  std::vector<EfgGame> games{efg_from_json(load_json_file(std::string(DAGBANDIT_DATA_DIR) + "/efg_example.json"))};
  for (int i = 0; i < 40; ++i) games.push_back(oracle::random_game(rng, 16));
  for (const auto& g : games) {
    EfgReduction r(g);
    const auto& dec = r.decision_nodes();
    std::vector<int> radix;
    for (int v : dec) radix.push_back(static_cast<int>(g.nodes[static_cast<std::size_t>(v)].children.size()));
    std::set<Action> canon;
    for (const auto& a : oracle::product(radix)) {
      std::map<int, int> cfg;
      for (std::size_t i = 0; i < dec.size(); ++i) cfg[dec[i]] = a[i];
      std::set<int> on;
      oracle::efg_reached(g, g.root, cfg, on);
      Action c = a;
      for (std::size_t i = 0; i < dec.size(); ++i)
        if (!on.count(dec[i])) c[i] = 0;
      canon.insert(c);
    }
    std::vector<Action> domain(canon.begin(), canon.end());
    check_bijection(t, r, domain, "efg");
    t.check(BigInt(domain.size()) == efg_strategy_count(g), "efg strategy count");
    std::vector<int> bradix;
    for (int v : r.observation_nodes()) bradix.push_back(static_cast<int>(g.nodes[static_cast<std::size_t>(v)].children.size()));
    for (int rep = 0; rep < 20; ++rep) {
      std::map<int, double> yz;
      std::vector<double> y;
      for (int z : r.terminal_nodes()) y.push_back(yz[z] = oracle::dyadic(rng));
      std::vector<int> b;
      std::map<int, int> obs;
      for (std::size_t i = 0; i < bradix.size(); ++i) {
        b.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(bradix[i]))));
        obs[r.observation_nodes()[i]] = b.back();
      }
      auto w = r.lift_loss(y, b);
      for (const auto& a : domain) {
        std::map<int, int> cfg;
        for (std::size_t i = 0; i < dec.size(); ++i) cfg[dec[i]] = a[i];
        t.check(loss_on(w, r.encode(a)) == yz.at(oracle::efg_walk(g, cfg, obs)), "efg loss mismatch");
      }
    }
    ++instances;
  }

  // anchors
  MsetReduction ms(5, 2);
  std::vector<VertexId> shaded{ms.vertex(0, 0), ms.vertex(1, 0), ms.vertex(2, 0), ms.vertex(2, 1), ms.vertex(3, 1), ms.vertex(3, 2)};
  auto sx = ms.decode(make_path_from_vertices(ms.dag(), shaded));
  t.check(sx == Action{0, 0, 1, 0, 1}, "shaded m-set path is not x[3]=x[5]=1");
  BlottoReduction bl(4, 3);
  std::vector<VertexId> bv{bl.vertex(0, 0), bl.vertex(1, 0), bl.vertex(2, 1), bl.vertex(3, 4)};
  t.check(bl.encode({0, 1, 3}).vertices(bl.dag()) == bv, "allocation (0,1,3) path");
  t.check(count_paths(oracle::worked_example())[7] == 10, "worked example path count != 10");
  return {t.ok, t.ok ? fmt("%d instances exhaustive, anchors hold", instances) : t.first};
}

Outcome criterion_10() {
  auto cfg = load_config("multitask_schedule.json");
  const auto arms = cfg["graph"]["reduction"]["arms"].get<std::vector<int>>();
  double d = 0, bound = 0;
  for (int di : arms) d += di;
  for (int di : arms) bound += std::sqrt(di * 20000.0 * std::log2(d / 0.05));
  bound *= 25;
  const double med = median_regret(cfg, 20000).at("ftrl-multitask");
  auto skew = median_regret(load_config("multitask_skewed.json"), 20000);
  const double mt = skew.at("ftrl-multitask"), un = skew.at("ftrl-uniform");
  const bool a = med <= bound, b = mt < un;
  return {a && b, fmt("%s median %.1f vs bound %.0f on (2,4,8); %s skewed (2,2,64) per-coordinate %.1f vs uniform %.1f",
                      a ? "ok" : "FAIL", med, bound, b ? "ok" : "FAIL", mt, un)};
}

Outcome criterion_11() {
  auto ix = slope(load_config("baseline_exp3_ix.json"), "exp3-ix");
  auto ps = slope(load_config("baseline_exp3_paths.json"), "exp3-paths");
  const bool a = ix.sublinear(), b = ps.sublinear();
  return {a && b, fmt("exp3-ix %s R/T %.4f -> %.4f (ratio %.3f); exp3-paths %s R/T %.4f -> %.4f (ratio %.3f)",
                      a ? "ok" : "FAIL", ix.short_rate, ix.long_rate, ix.long_rate / ix.short_rate, b ? "ok" : "FAIL",
                      ps.short_rate, ps.long_rate, ps.long_rate / ps.short_rate)};
}

Outcome criterion_12() {
  Tally t;
  long rounds = 0;
  for (const auto& [arms, T] : std::vector<std::pair<std::vector<int>, int>>{{{4, 4}, 10000}, {{2, 3, 5}, 3000}, {{8}, 2000}, {{2, 2, 2, 2}, 5000}}) {
    MultitaskReduction red(arms);
    const double m = static_cast<double>(arms.size());
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      MultitaskLowerBoundAdversary adv(red, T, seed);
      for (std::size_t j = 0; j < arms.size(); ++j) {
        const double e = m * std::sqrt(static_cast<double>(arms[j])) / (10.0 * std::sqrt(static_cast<double>(T)));
        t.check(adv.epsilon()[j] == e, "epsilon differs from m sqrt(d_j) / (10 sqrt(T))");
      }
      for (int r = 1; r <= T; ++r) {
        auto y = adv.losses(r);
        auto range = path_loss_range(red.dag(), y);
        t.check(range.min >= -1.0 && range.max <= 1.0, fmt("round %d leaves [-1, 1]", r));
        ++rounds;
      }
    }
  }
  auto cfg = load_config("lower_bound_uniform.json");
  const auto arms = cfg["graph"]["reduction"]["arms"].get<std::vector<int>>();
  const double T = cfg["horizon"].get<double>();
  double floor = 0;
  for (int d : arms) floor += std::sqrt(d * T);
  floor *= 0.5 / 40.0;
  const double med = median_regret(cfg, static_cast<int>(T)).at("uniform");
  t.check(med > floor, fmt("uniform median regret %.2f <= %.2f", med, floor));
  return {t.ok, t.ok ? fmt("%ld rounds in range, epsilon exact; uniform median %.1f > %.1f", rounds, med, floor) : t.first};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "estimator offset, flow space", 30, criterion_1},
    {2, "estimator offset, augmented space", 30, criterion_2},
    {3, "sampler marginals", 60, criterion_3},
    {4, "compressed graph bounds", 60, criterion_4},
    {5, "centroid decomposition", 60, criterion_5},
    {6, "non-tree edges per path", 30, criterion_6},
    {7, "solver agreement", 60, criterion_7},
    {8, "regret slope, worked example", 600, criterion_8},
    {9, "reductions exhaustive", 60, criterion_9},
    {10, "multitask schedule", 600, criterion_10},
    {11, "baselines sublinear", 300, criterion_11},
    {12, "lower-bound instances", 300, criterion_12},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion");
  app.add_option("--configs", g_configs, "directory holding the pinned experiment configs");
  CLI11_PARSE(app, argc, argv);

  int failed = 0, ran = 0;
  for (const auto& c : kCriteria) {
    if (only && c.id != only) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.ok = false;
      o.detail += fmt("; over budget %.0f s", c.budget_s);
    }
    std::printf("[%s] %2d %s: %s (%.1f s)\n", o.ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.ok) ++failed;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return failed ? 1 : 0;
}
