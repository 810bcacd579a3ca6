#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "dagbandit/graph.hpp"

namespace dagbandit {

// Text format: first line `n m src dst`, then m lines `tail head`.
// Blank lines and lines starting with '#' are ignored.
Dag read_dag_text(std::istream& in);
void write_dag_text(std::ostream& out, const Dag& dag);

// JSON format: {"vertices": n or [names], "edges": [[tail, head], ...],
// "source": v, "sink": v}. With named vertices, endpoints may be names.
Dag dag_from_json(const nlohmann::json& j);
nlohmann::json dag_to_json(const Dag& dag);

// Picks the format from the extension (.json) or the first non-space byte.
Dag load_dag(const std::string& path);
void save_dag(const std::string& path, const Dag& dag);

// CSV rows `edge_index,weight`; an optional header line is skipped. Edges not
// listed get weight 0.
LossVector read_loss_csv(std::istream& in, int num_edges);
LossVector load_loss_csv(const std::string& path, int num_edges);

}  // namespace dagbandit
