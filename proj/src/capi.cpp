#include "dagbandit.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "dagbandit/compress.hpp"
#include "dagbandit/error.hpp"
#include "dagbandit/graph.hpp"
#include "dagbandit/graph_io.hpp"
#include "dagbandit/harness.hpp"
#include "dagbandit/learner.hpp"

using namespace dagbandit;

struct db_dag {
  Dag dag;
};

struct db_learner {
  std::unique_ptr<Learner> learner;
  bool has_choice = false;
  std::vector<EdgeId> choice;
};

namespace {

thread_local std::string last_error;

db_status to_status(ErrorCode c) { return static_cast<db_status>(static_cast<int>(c) + 1); }

template <class F>
db_status guarded(F&& fn) {
  try {
    fn();
    return DB_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return DB_PARSE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DB_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DB_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nlohmann::json parse_json(const char* text, const char* what) {
  need(text, what);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::Parse, std::string(what) + ": " + e.what());
  }
}

std::string base_or_dot(const char* base) { return base && *base ? base : "."; }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

LearnerConfig learner_config(const nlohmann::json& j) {
  static const char* kFields[] = {"mode", "horizon", "delta", "eta", "gamma", "tol", "seed", "warm_start",
                                  "max_solver_iterations"};
  if (!j.is_object()) fail(ErrorCode::Config, "learner config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* f : kFields) ok = ok || key == f;
    if (!ok) fail(ErrorCode::Config, "field '" + key + "': unknown field");
  }
  auto number = [&](const char* key) {
    if (!j[key].is_number()) fail(ErrorCode::Config, std::string("field '") + key + "': must be a number");
    return j[key].get<double>();
  };
  LearnerConfig c;
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) fail(ErrorCode::Config, "field 'mode': must be a string");
    c.mode = parse_mode(j["mode"].get<std::string>());
  }
  if (j.contains("horizon")) {
    if (!j["horizon"].is_number_integer()) fail(ErrorCode::Config, "field 'horizon': must be an integer");
    c.horizon = j["horizon"].get<int>();
  }
  if (j.contains("delta")) c.delta = number("delta");
  if (j.contains("eta")) c.eta = number("eta");
  if (j.contains("tol")) c.tol = number("tol");
  if (j.contains("gamma")) {
    if (j["gamma"].is_array())
      c.gamma_coords = j["gamma"].get<std::vector<double>>();
    else
      c.gamma = number("gamma");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
      fail(ErrorCode::Config, "field 'seed': must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("max_solver_iterations")) {
    if (!j["max_solver_iterations"].is_number_integer())
      fail(ErrorCode::Config, "field 'max_solver_iterations': must be an integer");
    c.max_solver_iterations = j["max_solver_iterations"].get<int>();
  }
  if (j.contains("warm_start")) {
    if (!j["warm_start"].is_boolean()) fail(ErrorCode::Config, "field 'warm_start': must be true or false");
    c.warm_start = j["warm_start"].get<bool>();
  }
  return c;
}

}  // namespace

extern "C" {

const char* db_version(void) { return "1.0.0"; }

const char* db_status_name(db_status status) {
  if (status == DB_OK) return "Ok";
  if (status == DB_INTERNAL) return "Internal";
  if (status > DB_OK && status < DB_INTERNAL) return error_code_name(static_cast<ErrorCode>(status - 1));
  return "Unknown";
}

const char* db_last_error(void) { return last_error.c_str(); }

void db_string_free(char* s) { std::free(s); }

db_status db_dag_load(const char* path, db_dag** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new db_dag{load_dag(path)};
  });
}

db_status db_dag_from_edges(int vertices, int edges, const int* tails, const int* heads, int source, int sink,
                            db_dag** out) {
  return guarded([&] {
    need(out, "out");
    if (edges < 0) fail(ErrorCode::InvalidArgument, "edge count must be >= 0");
    if (edges > 0) {
      need(tails, "tails");
      need(heads, "heads");
    }
    std::vector<Edge> list;
    for (int e = 0; e < edges; ++e) list.push_back({tails[e], heads[e]});
    *out = new db_dag{Dag(vertices, std::move(list), source, sink)};
  });
}

db_status db_dag_save(const db_dag* dag, const char* path) {
  return guarded([&] {
    need(dag, "dag");
    need(path, "path");
    save_dag(path, dag->dag);
  });
}

void db_dag_free(db_dag* dag) { delete dag; }

db_status db_dag_info_get(const db_dag* dag, db_dag_info* out) {
  return guarded([&] {
    need(dag, "dag");
    need(out, "out");
    const Dag& g = dag->dag;
    auto counts = count_paths(g);
    const BigInt& paths = counts[static_cast<std::size_t>(g.sink())];
    if (paths == 0) fail(ErrorCode::NoPath, "no source-sink path");
    Dag p = prune(g);
    auto K = longest_dist(p);
    db_dag_info info{};
    info.vertices = g.num_vertices();
    info.edges = g.num_edges();
    info.source = g.source();
    info.sink = g.sink();
    info.paths = to_double(paths);
    info.log2_paths = log2_big(paths);
    info.longest_path = K[static_cast<std::size_t>(p.sink())];
    info.uniform_length = has_uniform_path_length(p) ? 1 : 0;
    *out = info;
  });
}

db_status db_dag_validate(const db_dag* dag, char** report_json) {
  nlohmann::json r;
  db_status st = guarded([&] {
    need(dag, "dag");
    const Dag& g = dag->dag;
    r["vertices"] = g.num_vertices();
    r["edges"] = g.num_edges();
    r["source"] = g.source();
    r["sink"] = g.sink();
    r["acyclic"] = false;
    topo_order(g);
    r["acyclic"] = true;
    auto counts = count_paths(g);
    const BigInt& paths = counts[static_cast<std::size_t>(g.sink())];
    r["paths"] = paths.str();
    if (paths == 0) fail(ErrorCode::NoPath, "no source-sink path");
    r["log2_paths"] = log2_big(paths);
    auto pruned = prune_with_map(g);
    nlohmann::json off_v = nlohmann::json::array(), off_e = nlohmann::json::array();
    for (std::size_t v = 0; v < pruned.vertex_to_new.size(); ++v)
      if (pruned.vertex_to_new[v] < 0) off_v.push_back(v);
    for (std::size_t e = 0; e < pruned.edge_to_new.size(); ++e)
      if (pruned.edge_to_new[e] < 0) off_e.push_back(e);
    r["off_path_vertices"] = off_v;
    r["off_path_edges"] = off_e;
    auto K = longest_dist(pruned.dag);
    r["longest_path"] = K[static_cast<std::size_t>(pruned.dag.sink())];
    r["uniform_length"] = has_uniform_path_length(pruned.dag);
  });
  r["ok"] = st == DB_OK;
  if (st != DB_OK) r["error"] = last_error;
  if (report_json) {
    const std::string saved = last_error;
    db_status s2 = guarded([&] { *report_json = dup(r.dump(2)); });
    if (s2 != DB_OK) return s2;
    last_error = saved;
  }
  return st;
}

db_status db_dag_path_count(const db_dag* dag, char** count) {
  return guarded([&] {
    need(dag, "dag");
    need(count, "count");
    *count = dup(count_paths(dag->dag)[static_cast<std::size_t>(dag->dag.sink())].str());
  });
}

db_status db_check_losses(const db_dag* dag, const double* weights, int count, double* min_out, double* max_out) {
  return guarded([&] {
    need(dag, "dag");
    if (count != dag->dag.num_edges())
      fail(ErrorCode::DimensionMismatch, "expected " + std::to_string(dag->dag.num_edges()) + " edge weights, got " +
                                             std::to_string(count));
    if (count > 0) need(weights, "weights");
    LossVector y(weights, weights + count);
    auto range = path_loss_range(dag->dag, y);
    if (min_out) *min_out = range.min;
    if (max_out) *max_out = range.max;
    if (!satisfies_loss_bound(dag->dag, y))
      fail(ErrorCode::RangeViolation, "path losses span [" + format_double(range.min) + ", " +
                                          format_double(range.max) + "], outside [-1, 1]");
  });
}

db_status db_check_loss_file(const db_dag* dag, const char* path, double* min_out, double* max_out) {
  LossVector y;
  db_status st = guarded([&] {
    need(dag, "dag");
    need(path, "path");
    y = load_loss_csv(path, dag->dag.num_edges());
  });
  if (st != DB_OK) return st;
  return db_check_losses(dag, y.data(), static_cast<int>(y.size()), min_out, max_out);
}

db_status db_convert(const db_dag* dag, const char* dag_path, const char* sigma_path) {
  return guarded([&] {
    need(dag, "dag");
    need(dag_path, "dag_path");
    need(sigma_path, "sigma_path");
    auto pruned = prune_with_map(dag->dag);
    auto cdag = build_gdagger(pruned.dag);
    static const char* kinds[] = {"into-centroid", "out-of-centroid", "non-tree"};
    nlohmann::json side;
    side["input_vertices"] = dag->dag.num_vertices();
    side["input_edges"] = dag->dag.num_edges();
    side["vertices"] = cdag.gdag.num_vertices();
    side["edges"] = nlohmann::json::array();
    for (EdgeId e = 0; e < cdag.gdag.num_edges(); ++e) {
      nlohmann::json row;
      row["edge"] = e;
      row["kind"] = kinds[static_cast<int>(cdag.kind[static_cast<std::size_t>(e)])];
      nlohmann::json orig = nlohmann::json::array();
      for (EdgeId o : cdag.sigma[static_cast<std::size_t>(e)])
        orig.push_back(pruned.edge_to_old[static_cast<std::size_t>(o)]);
      row["sigma"] = orig;
      side["edges"].push_back(std::move(row));
    }
    save_dag(dag_path, cdag.gdag);
    write_file(sigma_path, side.dump(2) + "\n");
  });
}

db_status db_reduce(const char* spec_json, const char* base_dir, char** result_json) {
  return guarded([&] {
    need(result_json, "result_json");
    auto spec = parse_json(spec_json, "reduction spec");
    auto g = make_graph(nlohmann::json{{"reduction", spec}}, base_or_dot(base_dir));
    nlohmann::json r;
    r["dag"] = dag_to_json(g.dag);
    r["metadata"] = g.reduction->metadata();
    *result_json = dup(r.dump(2));
  });
}

db_status db_learner_new(const db_dag* dag, const char* config_json, db_learner** out) {
  return guarded([&] {
    need(dag, "dag");
    need(out, "out");
    LearnerConfig c = config_json ? learner_config(parse_json(config_json, "learner config")) : LearnerConfig{};
    auto h = std::make_unique<db_learner>();
    h->learner = std::make_unique<Learner>(dag->dag, c);
    *out = h.release();
  });
}

void db_learner_free(db_learner* learner) { delete learner; }

db_status db_learner_choose(db_learner* learner, int* edges, int capacity, int* length) {
  return guarded([&] {
    need(learner, "learner");
    if (!learner->has_choice) {
      learner->choice = learner->learner->choose().edges;
      learner->has_choice = true;
    }
    const int n = static_cast<int>(learner->choice.size());
    if (length) *length = n;
    if (!edges || capacity < n)
      fail(ErrorCode::InvalidArgument, "path has " + std::to_string(n) + " edges, buffer holds " +
                                           std::to_string(edges ? capacity : 0));
    std::copy(learner->choice.begin(), learner->choice.end(), edges);
  });
}

db_status db_learner_feed(db_learner* learner, double loss) {
  return guarded([&] {
    need(learner, "learner");
    learner->learner->feed(loss);
    learner->has_choice = false;
  });
}

db_status db_learner_describe(const db_learner* learner, char** json) {
  return guarded([&] {
    need(learner, "learner");
    need(json, "json");
    const Learner& l = *learner->learner;
    const auto& s = l.schedule();
    nlohmann::json j;
    j["mode"] = mode_name(l.config().mode);
    j["horizon"] = s.horizon;
    j["delta"] = s.delta;
    j["eta"] = s.eta;
    j["tol"] = s.tol;
    bool uniform = true;
    for (double g : s.gamma) uniform = uniform && g == s.gamma.front();
    for (double g : s.gamma_hat) uniform = uniform && g == s.gamma.front();
    if (uniform && !s.gamma.empty())
      j["gamma"] = s.gamma.front();
    else
      j["gamma"] = s.full_gamma();
    j["working_vertices"] = l.working_graph().num_vertices();
    j["working_edges"] = l.working_graph().num_edges();
    j["live_bits"] = l.domain().num_live_bits();
    j["round"] = l.round();
    *json = dup(j.dump(2));
  });
}

db_status db_experiment_resolve(const char* config_json, const char* base_dir, char** resolved_json) {
  return guarded([&] {
    need(resolved_json, "resolved_json");
    auto cfg = parse_experiment(parse_json(config_json, "experiment config"), base_or_dot(base_dir));
    *resolved_json = dup(resolve_config(cfg).dump(2));
  });
}

db_status db_experiment_run(const char* config_json, const char* base_dir, char** result_json) {
  return guarded([&] {
    auto cfg = parse_experiment(parse_json(config_json, "experiment config"), base_or_dot(base_dir));
    auto res = run_experiment(cfg);
    if (result_json) {
      nlohmann::json r;
      r["config"] = resolve_config(cfg);
      r["summary"] = std::move(res.summary);
      r["summary_csv"] = std::move(res.summary_csv);
      *result_json = dup(r.dump(2));
    }
  });
}

}  // extern "C"
