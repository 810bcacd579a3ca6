#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dagbandit.h"
#include "dagbandit/graph_io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kFig = std::string(DAGBANDIT_DATA_DIR) + "/worked_example.dag";

struct Str {
  char* p = nullptr;
  ~Str() { db_string_free(p); }
  json parsed() const { return json::parse(p); }
};

struct DagPtr {
  db_dag* p = nullptr;
  ~DagPtr() { db_dag_free(p); }
};

}  // namespace

TEST_CASE("status names and last error") {
  CHECK(std::string(db_status_name(DB_OK)) == "Ok");
  CHECK(std::string(db_status_name(DB_RANGE_VIOLATION)) == "RangeViolation");
  CHECK(std::string(db_status_name(DB_CONFIG)) == "Config");
  CHECK(std::string(db_status_name(DB_INTERNAL)) == "Internal");
  db_dag* out = nullptr;
  CHECK(db_dag_load("/nonexistent/x.dag", &out) == DB_IO);
  CHECK(out == nullptr);
  CHECK(std::string(db_last_error()).find("x.dag") != std::string::npos);
  CHECK(db_dag_load(nullptr, &out) == DB_INVALID_ARGUMENT);
}

TEST_CASE("last error is per thread") {
  db_dag* out = nullptr;
  CHECK(db_dag_load("/nonexistent/main.dag", &out) == DB_IO);
  std::string other;
  std::thread t([&] {
    db_dag* o = nullptr;
    db_dag_load("/nonexistent/worker.dag", &o);
    other = db_last_error();
  });
  t.join();
  CHECK(other.find("worker") != std::string::npos);
  CHECK(std::string(db_last_error()).find("main") != std::string::npos);
}

TEST_CASE("graph info and validation") {
  DagPtr d;
  REQUIRE(db_dag_load(kFig.c_str(), &d.p) == DB_OK);
  db_dag_info info{};
  REQUIRE(db_dag_info_get(d.p, &info) == DB_OK);
  CHECK(info.vertices == 8);
  CHECK(info.edges == 13);
  CHECK(info.paths == 10.0);
  CHECK(info.log2_paths == doctest::Approx(std::log2(10.0)));
  CHECK(info.longest_path == oracle::brute_longest(oracle::worked_example())[7]);
  Str count;
  REQUIRE(db_dag_path_count(d.p, &count.p) == DB_OK);
  CHECK(std::string(count.p) == "10");
  Str rep;
  REQUIRE(db_dag_validate(d.p, &rep.p) == DB_OK);
  CHECK(rep.parsed()["ok"] == true);
  CHECK(rep.parsed()["off_path_vertices"].empty());

  const int tails[] = {0, 1, 2, 1};
  const int heads[] = {1, 2, 1, 3};
  DagPtr cyc;
  REQUIRE(db_dag_from_edges(4, 4, tails, heads, 0, 3, &cyc.p) == DB_OK);
  Str crep;
  CHECK(db_dag_validate(cyc.p, &crep.p) == DB_CYCLE_DETECTED);
  CHECK(crep.parsed()["acyclic"] == false);
  CHECK(crep.parsed()["ok"] == false);

  // vertex 2 hangs off the graph
  const int t2[] = {0, 0, 1};
  const int h2[] = {1, 2, 3};
  DagPtr dangling;
  REQUIRE(db_dag_from_edges(4, 3, t2, h2, 0, 3, &dangling.p) == DB_OK);
  Str drep;
  CHECK(db_dag_validate(dangling.p, &drep.p) == DB_OK);
  CHECK(drep.parsed()["off_path_vertices"] == json::array({2}));
  CHECK(drep.parsed()["off_path_edges"] == json::array({1}));

  const int t3[] = {0};
  const int h3[] = {0};
  db_dag* bad = nullptr;
  CHECK(db_dag_from_edges(2, 1, t3, h3, 0, 1, &bad) != DB_OK);
}

TEST_CASE("loss checks") {
  DagPtr d;
  REQUIRE(db_dag_load(kFig.c_str(), &d.p) == DB_OK);
  std::vector<double> y(13, 0.0);
  double lo = 0, hi = 0;
  CHECK(db_check_losses(d.p, y.data(), 13, &lo, &hi) == DB_OK);
  y[0] = 0.75;
  y[8] = 0.5;
  CHECK(db_check_losses(d.p, y.data(), 13, &lo, &hi) == DB_RANGE_VIOLATION);
  CHECK(hi == 1.25);
  CHECK(lo == 0.0);
  CHECK(db_check_losses(d.p, y.data(), 12, &lo, &hi) == DB_DIMENSION_MISMATCH);
}

TEST_CASE("convert round trip") {
  DagPtr d;
  REQUIRE(db_dag_load(kFig.c_str(), &d.p) == DB_OK);
  const fs::path dir = fs::temp_directory_path() / "dagbandit_capi_convert";
  fs::create_directories(dir);
  const std::string gd = (dir / "g.dag").string(), sg = (dir / "g.sigma.json").string();
  REQUIRE(db_convert(d.p, gd.c_str(), sg.c_str()) == DB_OK);
  auto dagger = dagbandit::load_dag(gd);
  std::ifstream in(sg);
  json side = json::parse(in);
  REQUIRE(static_cast<int>(side["edges"].size()) == dagger.num_edges());

  std::set<std::vector<int>> mapped;
  // G† may keep vertices off every path, only source-sink paths count
  for (const auto& p : oracle::brute_paths(dagger)) {
    std::vector<int> walk;
    for (int e : p)
      for (int o : side["edges"][static_cast<std::size_t>(e)]["sigma"]) walk.push_back(o);
    CHECK(mapped.insert(walk).second);
  }
  auto original = oracle::brute_paths(oracle::worked_example());
  CHECK(mapped == std::set<std::vector<int>>(original.begin(), original.end()));
  fs::remove_all(dir);
}

TEST_CASE("reduce") {
  Str r;
  REQUIRE(db_reduce(R"({"domain": "mset", "d": 5, "m": 2})", nullptr, &r.p) == DB_OK);
  auto j = r.parsed();
  CHECK(j["metadata"]["paths"] == "10");
  CHECK(j["metadata"]["domain"] == "mset");
  CHECK(j["dag"]["edges"].size() == 17);
  Str bad;
  CHECK(db_reduce(R"({"domain": "torus"})", nullptr, &bad.p) == DB_CONFIG);
  CHECK(std::string(db_last_error()).find("domain") != std::string::npos);
  CHECK(db_reduce(R"({"domain": "mset", "d": 5)", nullptr, &bad.p) == DB_PARSE);
  CHECK(db_reduce(R"({"domain": "mset", "d": 3, "m": 5})", nullptr, &bad.p) == DB_INVALID_ARGUMENT);
}

TEST_CASE("learner through handles") {
  DagPtr d;
  REQUIRE(db_dag_load(kFig.c_str(), &d.p) == DB_OK);
  db_learner* l = nullptr;
  REQUIRE(db_learner_new(d.p, R"({"horizon": 400, "seed": 9})", &l) == DB_OK);
  Str desc;
  REQUIRE(db_learner_describe(l, &desc.p) == DB_OK);
  auto j = desc.parsed();
  CHECK(j["eta"].get<double>() == doctest::Approx(1.0 / 20.0));
  CHECK(j["mode"] == "compressed");
  CHECK(j["tol"].get<double>() == doctest::Approx(1e-7));

  int small[1];
  int len = -1;
  CHECK(db_learner_choose(l, small, 1, &len) == DB_INVALID_ARGUMENT);
  CHECK(len >= 2);
  std::vector<int> a(static_cast<std::size_t>(len)), b(static_cast<std::size_t>(len));
  int len2 = 0;
  REQUIRE(db_learner_choose(l, a.data(), len, &len2) == DB_OK);
  REQUIRE(db_learner_choose(l, b.data(), len, &len2) == DB_OK);
  CHECK(a == b);
  CHECK(db_learner_feed(l, 0.0) == DB_OK);
  CHECK(db_learner_feed(l, 0.0) == DB_PROTOCOL_VIOLATION);
  int buf[16];
  REQUIRE(db_learner_choose(l, buf, 16, &len) == DB_OK);
  CHECK(db_learner_feed(l, 1.5) == DB_OUT_OF_RANGE_LOSS);
  db_learner_free(l);

  db_learner* bad = nullptr;
  CHECK(db_learner_new(d.p, R"({"horizon": 10, "colour": 1})", &bad) == DB_CONFIG);
  CHECK(db_learner_new(d.p, R"({"horizon": 10, "mode": "fast"})", &bad) == DB_INVALID_ARGUMENT);
  CHECK(bad == nullptr);
}

TEST_CASE("experiments") {
  json cfg = {{"graph", {{"file", kFig}}},
              {"horizon", 100},
              {"seeds", 2},
              {"algorithms", {"uniform", "ftrl"}},
              {"adversaries", {"stochastic-gap"}}};
  Str res;
  REQUIRE(db_experiment_run(cfg.dump().c_str(), nullptr, &res.p) == DB_OK);
  auto j = res.parsed();
  CHECK(j["summary"]["groups"].size() == 2);
  CHECK(j["summary_csv"].get<std::string>().rfind("algorithm,adversary,seeds,regret_median", 0) == 0);
  CHECK(j["config"]["algorithms"][1].contains("gamma"));
  CHECK(j["config"]["adversaries"][0]["gap"] == 0.2);

  cfg["algorithms"] = {"ftrl", "bogus"};
  Str r2;
  CHECK(db_experiment_resolve(cfg.dump().c_str(), nullptr, &r2.p) == DB_CONFIG);
  CHECK(std::string(db_last_error()).find("algorithms[1].name") != std::string::npos);
  CHECK(db_experiment_run("{\"horizon\": ", nullptr, &r2.p) == DB_PARSE);
}
