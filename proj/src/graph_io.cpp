#include "dagbandit/graph_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "dagbandit/error.hpp"

namespace dagbandit {

namespace {

bool skip_line(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool next_content_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (!skip_line(line)) return true;
  }
  return false;
}

[[noreturn]] void parse_fail(int lineno, const std::string& what) {
  fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": " + what);
}

}  // namespace

Dag read_dag_text(std::istream& in) {
  std::string line;
  int lineno = 0;
  if (!next_content_line(in, line, lineno)) fail(ErrorCode::Parse, "empty DAG file");
  long n = 0, m = 0, s = 0, t = 0;
  {
    std::istringstream ls(line);
    if (!(ls >> n >> m >> s >> t)) parse_fail(lineno, "expected `n m src dst`");
    std::string extra;
    if (ls >> extra) parse_fail(lineno, "trailing token '" + extra + "'");
  }
  if (n < 1 || m < 0) parse_fail(lineno, "bad vertex or edge count");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long i = 0; i < m; ++i) {
    if (!next_content_line(in, line, lineno))
      fail(ErrorCode::Parse, "expected " + std::to_string(m) + " edges, found " + std::to_string(i));
    std::istringstream ls(line);
    long u = 0, v = 0;
    if (!(ls >> u >> v)) parse_fail(lineno, "expected `tail head`");
    std::string extra;
    if (ls >> extra) parse_fail(lineno, "trailing token '" + extra + "'");
    edges.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v)});
  }
  if (next_content_line(in, line, lineno)) parse_fail(lineno, "unexpected content after edge list");
  return Dag(static_cast<int>(n), std::move(edges), static_cast<VertexId>(s), static_cast<VertexId>(t));
}

void write_dag_text(std::ostream& out, const Dag& dag) {
  out << dag.num_vertices() << ' ' << dag.num_edges() << ' ' << dag.source() << ' ' << dag.sink()
      << '\n';
  for (const Edge& e : dag.edges()) out << e.tail << ' ' << e.head << '\n';
}

Dag dag_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) fail(ErrorCode::Parse, "DAG JSON must be an object");
    std::vector<std::string> names;
    std::unordered_map<std::string, VertexId> by_name;
    int n = 0;
    const auto& jv = j.at("vertices");
    if (jv.is_number_integer()) {
      n = jv.get<int>();
    } else if (jv.is_array()) {
      n = static_cast<int>(jv.size());
      for (const auto& x : jv) {
        std::string name = x.is_string() ? x.get<std::string>() : x.dump();
        if (!by_name.emplace(name, static_cast<VertexId>(names.size())).second)
          fail(ErrorCode::Parse, "duplicate vertex name '" + name + "'");
        names.push_back(name);
      }
    } else {
      fail(ErrorCode::Parse, "field 'vertices' must be a count or an array");
    }
    auto resolve = [&](const nlohmann::json& x, const char* field) -> VertexId {
      if (x.is_number_integer()) {
        if (!names.empty()) {
          auto it = by_name.find(x.dump());
          if (it != by_name.end()) return it->second;
        }
        return x.get<VertexId>();
      }
      if (x.is_string()) {
        auto it = by_name.find(x.get<std::string>());
        if (it == by_name.end())
          fail(ErrorCode::Parse, std::string("unknown vertex '") + x.get<std::string>() + "' in " + field);
        return it->second;
      }
      fail(ErrorCode::Parse, std::string("bad vertex reference in ") + field);
    };
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) fail(ErrorCode::Parse, "each edge must be [tail, head]");
      edges.push_back({resolve(e[0], "edges"), resolve(e[1], "edges")});
    }
    Dag dag(n, std::move(edges), resolve(j.at("source"), "source"), resolve(j.at("sink"), "sink"));
    if (!names.empty()) dag.set_vertex_names(std::move(names));
    return dag;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("DAG JSON: ") + e.what());
  }
}

nlohmann::json dag_to_json(const Dag& dag) {
  nlohmann::json j;
  if (dag.vertex_names().empty())
    j["vertices"] = dag.num_vertices();
  else
    j["vertices"] = dag.vertex_names();
  auto edges = nlohmann::json::array();
  for (const Edge& e : dag.edges()) edges.push_back({e.tail, e.head});
  j["edges"] = std::move(edges);
  j["source"] = dag.source();
  j["sink"] = dag.sink();
  return j;
}

Dag load_dag(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (!json) {
    in >> std::ws;
    json = in.peek() == '{';
  }
  if (json) {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::Parse, path + ": " + e.what());
    }
    return dag_from_json(j);
  }
  try {
    return read_dag_text(in);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

void save_dag(const std::string& path, const Dag& dag) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    out << dag_to_json(dag).dump(2) << '\n';
  else
    write_dag_text(out, dag);
}

LossVector read_loss_csv(std::istream& in, int num_edges) {
  LossVector w(static_cast<std::size_t>(num_edges), 0.0);
  std::string line;
  int lineno = 0;
  bool first = true;
  while (next_content_line(in, line, lineno)) {
    auto comma = line.find(',');
    if (comma == std::string::npos) parse_fail(lineno, "expected `edge_index,weight`");
    std::string a = line.substr(0, comma), b = line.substr(comma + 1);
    std::size_t pa = 0, pb = 0;
    long idx = 0;
    double val = 0;
    try {
      idx = std::stol(a, &pa);
      val = std::stod(b, &pb);
    } catch (const std::exception&) {
      if (first) {
        first = false;
        continue;  // header
      }
      parse_fail(lineno, "expected `edge_index,weight`");
    }
    first = false;
    if (idx < 0 || idx >= num_edges) parse_fail(lineno, "edge index " + std::to_string(idx) + " out of range");
    w[static_cast<std::size_t>(idx)] = val;
  }
  return w;
}

LossVector load_loss_csv(const std::string& path, int num_edges) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  return read_loss_csv(in, num_edges);
}

}  // namespace dagbandit
