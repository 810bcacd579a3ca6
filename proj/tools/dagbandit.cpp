// dagbandit command line. Talks to the library only through dagbandit.h.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dagbandit.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kSolver = 3 };

int exit_for(db_status s) {
  switch (s) {
    case DB_OK: return kOk;
    case DB_CONFIG:
    case DB_INVALID_ARGUMENT: return kUsage;
    case DB_SOLVER_STALL:
    case DB_INFEASIBLE:
    case DB_NON_POSITIVE_COORDINATE:
    case DB_ZERO_MARGINAL: return kSolver;
    default: return kValidation;
  }
}

int report(db_status s, const std::string& context = {}) {
  std::cerr << "error";
  if (!context.empty()) std::cerr << " (" << context << ")";
  std::cerr << ": " << db_status_name(s) << ": " << db_last_error() << "\n";
  return exit_for(s);
}

struct Owned {
  char* p = nullptr;
  ~Owned() { db_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct DagHandle {
  db_dag* p = nullptr;
  ~DagHandle() { db_dag_free(p); }
};

std::optional<std::string> read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string base_dir_of(const std::string& path) {
  auto p = fs::path(path).parent_path().string();
  return p.empty() ? "." : p;
}

// Echo on stderr so stdout stays machine readable.
void echo_config(const json& resolved) { std::cerr << "# resolved config\n" << resolved.dump(2) << "\n"; }

int run_config(json cfg, const std::string& base_dir, const std::string& format) {
  Owned resolved;
  const std::string text = cfg.dump();
  db_status s = db_experiment_resolve(text.c_str(), base_dir.c_str(), &resolved.p);
  if (s != DB_OK) return report(s, "config");
  echo_config(json::parse(resolved.str()));
  Owned result;
  s = db_experiment_run(text.c_str(), base_dir.c_str(), &result.p);
  if (s != DB_OK) return report(s, "run");
  auto r = json::parse(result.str());
  if (format == "json")
    std::cout << json{{"config", r["config"]}, {"summary", r["summary"]}}.dump(2) << "\n";
  else
    std::cout << r["summary_csv"].get<std::string>();
  return kOk;
}

struct RunArgs {
  std::string dag;
  int horizon = 1000;
  std::uint64_t seed = 0;
  double delta = 0.05;
  std::string algorithm = "ftrl";
  std::string mode = "compressed";
  std::optional<double> eta, gamma, tol;
  std::optional<int> max_iterations;
  std::string adversary = "stochastic-gap";
  std::optional<double> gap, noise, magnitude;
  std::string means;
  std::string out;
  int checkpoints = 20;
};

struct SweepArgs {
  std::string config;
  std::string out;
  int threads = -1;
  int seeds = 0;
};

struct ValidateArgs {
  std::string dag, losses, config;
};

struct ConvertArgs {
  std::string dag, out;
};

struct ReduceArgs {
  std::string domain, out, meta;
  int d = 0, m = 0, N = 0, K = 0;
  std::vector<int> arms;
  std::string graph, game;
};

int cmd_run(const RunArgs& a, const std::string& format) {
  json alg = {{"name", a.algorithm}};
  if (a.algorithm == "ftrl") {
    alg["mode"] = a.mode;
    if (a.eta) alg["eta"] = *a.eta;
    if (a.gamma) alg["gamma"] = *a.gamma;
    if (a.tol) alg["tol"] = *a.tol;
    if (a.max_iterations) alg["max_solver_iterations"] = *a.max_iterations;
  }
  json adv = {{"kind", a.adversary}};
  if (a.gap) adv["gap"] = *a.gap;
  if (a.noise) adv["noise"] = *a.noise;
  if (a.magnitude) adv["magnitude"] = *a.magnitude;
  if (!a.means.empty()) adv["means_file"] = fs::absolute(a.means).string();
  json cfg = {
      {"name", "run"},
      {"graph", {{"file", fs::absolute(a.dag).string()}}},
      {"horizon", a.horizon},
      {"delta", a.delta},
      {"seeds", json::array({a.seed})},
      {"algorithms", json::array({alg})},
      {"adversaries", json::array({adv})},
      {"checkpoints", a.checkpoints},
  };
  if (!a.out.empty()) cfg["output_dir"] = fs::absolute(a.out).string();
  return run_config(cfg, ".", format);
}

int cmd_sweep(const SweepArgs& a, const std::string& format) {
  auto text = read_text(a.config);
  if (!text) {
    std::cerr << "error: cannot read config " << a.config << "\n";
    return kUsage;
  }
  json cfg;
  try {
    cfg = json::parse(*text);
  } catch (const json::parse_error& e) {
    std::cerr << "error: " << a.config << ": " << e.what() << "\n";
    return kUsage;
  }
  if (!cfg.is_object()) {
    std::cerr << "error: " << a.config << ": config must be a JSON object\n";
    return kUsage;
  }
  if (!a.out.empty()) cfg["output_dir"] = fs::absolute(a.out).string();
  if (a.threads >= 0) cfg["threads"] = a.threads;
  if (a.seeds > 0) cfg["seeds"] = a.seeds;
  return run_config(cfg, base_dir_of(a.config), format);
}

int cmd_validate(const ValidateArgs& a, const std::string& format) {
  if (a.dag.empty() && a.config.empty()) {
    std::cerr << "error: validate needs --dag or --config\n";
    return kUsage;
  }
  json out = json::object();
  int code = kOk;
  if (!a.dag.empty()) {
    DagHandle dag;
    db_status s = db_dag_load(a.dag.c_str(), &dag.p);
    if (s != DB_OK) {
      report(s, a.dag);
      return kValidation;
    }
    Owned rep;
    s = db_dag_validate(dag.p, &rep.p);
    out["dag"] = json::parse(rep.str());
    if (s != DB_OK) {
      report(s, a.dag);
      code = kValidation;
    }
    if (s == DB_OK && !a.losses.empty()) {
      double lo = 0.0, hi = 0.0;
      s = db_check_loss_file(dag.p, a.losses.c_str(), &lo, &hi);
      out["losses"] = {{"file", a.losses}, {"ok", s == DB_OK}};
      if (s == DB_OK || s == DB_RANGE_VIOLATION) {
        out["losses"]["min_path_loss"] = lo;
        out["losses"]["max_path_loss"] = hi;
      }
      if (s != DB_OK) {
        report(s, a.losses);
        code = kValidation;
      }
    }
  }
  if (!a.config.empty()) {
    auto text = read_text(a.config);
    if (!text) {
      std::cerr << "error: cannot read config " << a.config << "\n";
      return kValidation;
    }
    Owned resolved;
    db_status s = db_experiment_resolve(text->c_str(), base_dir_of(a.config).c_str(), &resolved.p);
    if (s != DB_OK) {
      report(s, a.config);
      out["config"] = {{"ok", false}, {"error", db_last_error()}};
      code = kValidation;
    } else {
      out["config"] = {{"ok", true}, {"resolved", json::parse(resolved.str())}};
    }
  }
  if (format == "json") {
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "check,ok,detail\n";
    if (out.contains("dag")) {
      const auto& d = out["dag"];
      std::cout << "dag," << (d["ok"].get<bool>() ? 1 : 0) << ",";
      if (d["ok"].get<bool>())
        std::cout << d["vertices"] << " vertices " << d["edges"] << " edges " << d["paths"].get<std::string>()
                  << " paths longest " << d["longest_path"];
      std::cout << "\n";
    }
    if (out.contains("losses"))
      std::cout << "losses," << (out["losses"]["ok"].get<bool>() ? 1 : 0) << ",\n";
    if (out.contains("config")) std::cout << "config," << (out["config"]["ok"].get<bool>() ? 1 : 0) << ",\n";
  }
  return code;
}

int cmd_convert(const ConvertArgs& a) {
  DagHandle dag;
  db_status s = db_dag_load(a.dag.c_str(), &dag.p);
  if (s != DB_OK) return report(s, a.dag);
  std::string prefix = a.out;
  if (prefix.empty()) {
    fs::path p(a.dag);
    prefix = (p.parent_path() / p.stem()).string() + ".dagger";
  }
  const std::string dag_out = prefix + ".dag", sigma_out = prefix + ".sigma.json";
  s = db_convert(dag.p, dag_out.c_str(), sigma_out.c_str());
  if (s != DB_OK) return report(s, "convert");
  std::cout << dag_out << "\n" << sigma_out << "\n";
  return kOk;
}

int cmd_reduce(const ReduceArgs& a) {
  json spec = {{"domain", a.domain}};
  auto put = [&](const char* key, int v) {
    if (v > 0) spec[key] = v;
  };
  put("d", a.d);
  put("m", a.m);
  put("N", a.N);
  put("K", a.K);
  if (!a.arms.empty()) spec["arms"] = a.arms;
  if (!a.graph.empty()) spec["graph"] = fs::absolute(a.graph).string();
  if (!a.game.empty()) spec["game"] = fs::absolute(a.game).string();
  Owned result;
  const std::string text = spec.dump();
  db_status s = db_reduce(text.c_str(), ".", &result.p);
  if (s != DB_OK) return report(s, "reduce");
  auto r = json::parse(result.str());
  const std::string meta = a.meta.empty() ? a.out + ".meta.json" : a.meta;
  {
    std::ofstream f(a.out, std::ios::binary);
    f << r["dag"].dump(2) << "\n";
    if (!f) {
      std::cerr << "error: cannot write " << a.out << "\n";
      return kValidation;
    }
  }
  {
    std::ofstream f(meta, std::ios::binary);
    f << r["metadata"].dump(2) << "\n";
    if (!f) {
      std::cerr << "error: cannot write " << meta << "\n";
      return kValidation;
    }
  }
  std::cout << a.out << "\n" << meta << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online shortest paths in DAGs under bandit feedback"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", db_version());
  std::string format = "csv";
  app.add_option("--format", format, "Output format for machine consumption")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Single run: one algorithm, one adversary, one seed");
  run->add_option("--dag", ra.dag, "DAG file (text or JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-T,--horizon", ra.horizon, "Number of rounds T")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--seed", ra.seed, "Seed; policy and adversary streams derive from it")->capture_default_str();
  run->add_option("--delta", ra.delta, "Confidence parameter delta, in (0, 1)")->capture_default_str();
  run->add_option("--algorithm", ra.algorithm, "ftrl | exp3-paths | uniform | exp3-ix")->capture_default_str();
  run->add_option("--mode", ra.mode, "ftrl mode: compressed | augmented | equal-length")->capture_default_str();
  run->add_option("--eta", ra.eta, "ftrl learning rate")->default_str("1/sqrt(T)");
  run->add_option("--gamma", ra.gamma, "ftrl implicit exploration, every coordinate")
      ->default_str("sqrt(K*log2(5(|V|+|E|+K)/delta)/(|E|*T)); equal-length: log2(5(|V|+|E|)/delta)");
  run->add_option("--tol", ra.tol, "ftrl solver tolerance")->default_str("min(1/T^2, 1e-7)");
  run->add_option("--max-iterations", ra.max_iterations, "ftrl solver iteration cap per round")->default_str("10000");
  run->add_option("--adversary", ra.adversary,
                  "stochastic-gap | stochastic-iid | adaptive-targeting | zero")
      ->capture_default_str();
  run->add_option("--gap", ra.gap, "stochastic-gap: mean gap of the planted path")->default_str("0.2");
  run->add_option("--noise", ra.noise, "stochastic adversaries: per-path noise bound")->default_str("0.1");
  run->add_option("--magnitude", ra.magnitude, "adaptive-targeting: loss on the leader")->default_str("1");
  run->add_option("--means", ra.means, "stochastic-iid: CSV of edge,mean")->check(CLI::ExistingFile);
  run->add_option("--checkpoints", ra.checkpoints, "Points on the summary regret curve")->capture_default_str();
  run->add_option("--out", ra.out, "Directory for per-run logs and summaries (none if empty)");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Grid of algorithms x adversaries x seeds from a JSON config");
  sweep->add_option("--config", sa.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sa.out, "Override output_dir");
  sweep->add_option("--threads", sa.threads, "Worker threads (0: DAGBANDIT_THREADS or hardware)");
  sweep->add_option("--seeds", sa.seeds, "Override seeds with 0..n-1");

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check a DAG, a loss vector or an experiment config");
  validate->add_option("--dag", va.dag, "DAG file");
  validate->add_option("--losses", va.losses, "CSV of edge,weight checked against the [-1, 1] path bound")
      ->needs(validate->get_option("--dag"));
  validate->add_option("--config", va.config, "Experiment config (JSON)");

  ConvertArgs ca;
  auto* convert = app.add_subcommand("convert", "Write the compressed graph and its edge-to-subpath sidecar");
  convert->add_option("--dag", ca.dag, "DAG file")->required()->check(CLI::ExistingFile);
  convert->add_option("--out", ca.out, "Output prefix; writes PREFIX.dag and PREFIX.sigma.json")
      ->default_str("<dag stem>.dagger");

  ReduceArgs rd;
  auto* reduce = app.add_subcommand("reduce", "Build the DAG for a combinatorial domain");
  reduce->add_option("--domain", rd.domain, "hypercube | multitask | mset | walk | blotto | efg")
      ->required()
      ->check(CLI::IsMember({"hypercube", "multitask", "mset", "walk", "blotto", "efg"}));
  reduce->add_option("--d", rd.d, "hypercube / mset dimension");
  reduce->add_option("--m", rd.m, "mset: number of ones");
  reduce->add_option("--arms", rd.arms, "multitask: arms per task, e.g. --arms 2 4 8")->delimiter(',');
  reduce->add_option("--N", rd.N, "blotto: soldiers");
  reduce->add_option("--K", rd.K, "blotto: battlefields; walk: length");
  reduce->add_option("--graph", rd.graph, "walk: base graph file")->check(CLI::ExistingFile);
  reduce->add_option("--game", rd.game, "efg: game tree JSON")->check(CLI::ExistingFile);
  reduce->add_option("--out", rd.out, "DAG output (JSON)")->required();
  reduce->add_option("--meta", rd.meta, "Codec metadata output")->default_str("<out>.meta.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (*run) return cmd_run(ra, format);
  if (*sweep) return cmd_sweep(sa, format);
  if (*validate) return cmd_validate(va, format);
  if (*convert) return cmd_convert(ca);
  if (*reduce) return cmd_reduce(rd);
  return kUsage;
}
