#pragma once

#include <string>
#include <vector>

#include "nkm/dataset.hpp"
#include "nkm/graph.hpp"
#include "nkm/nkmeans.hpp"
#include "nkm/verify.hpp"

namespace nkm {

// %.17g: round-trip exact for 64-bit floats, byte-stable across runs.
std::string fmt_double(double v);

// Dataset file: {"dim": p, "agents": [[[c1,...,cp],...], ...]}.
std::string dataset_to_json(const FederatedDataset& d);
FederatedDataset dataset_from_json(const std::string& text);

// Topology file: {"num_agents": M, "edges": [[m,l],...]} with m < l, edges
// sorted lexicographically.
std::string topology_to_json(const Topology& t);
Topology topology_from_json(const std::string& text);

std::string report_to_json(const GenMinReport& report);

// Full run state: {"dim":p,"k":K,"heads":[[[...]...]...],"assign":[[...]...]}.
std::string state_to_json(const NetworkHeads& x, const Clustering& c);
void state_from_json(const std::string& text, NetworkHeads* x, Clustering* c);

// Trace CSV: round,cost_J,cost_Q,descent_slack,innovation_norm,consensus_dev,
// partition_changed; one row per round.
std::string trace_to_csv(const std::vector<RoundMetrics>& trace);

// Head-trajectory CSV: round,agent,cluster,coord_index,value.
void append_trajectory_csv(std::string* out, int round, const NetworkHeads& x);
std::string trajectory_csv_header();

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace nkm
