#include "nkm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace nkm {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string dataset_to_json(const FederatedDataset& d) {
  std::string out = "{\"dim\": " + std::to_string(d.dim()) + ", \"agents\": [";
  for (int m = 0; m < d.num_agents(); ++m) {
    if (m > 0) out += ", ";
    out += "[";
    const Mat& block = d.agent(m);
    for (int n = 0; n < block.cols(); ++n) {
      if (n > 0) out += ", ";
      out += "[";
      for (int i = 0; i < block.rows(); ++i) {
        if (i > 0) out += ", ";
        out += fmt_double(block(i, n));
      }
      out += "]";
    }
    out += "]";
  }
  out += "]}\n";
  return out;
}

FederatedDataset dataset_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::io_error, std::string("dataset parse error: ") + e.what());
  }
  if (!doc.contains("dim") || !doc.contains("agents"))
    fail(Errc::io_error, "dataset file needs dim and agents");
  const int p = doc["dim"].get<int>();
  std::vector<Mat> agents;
  for (const auto& agent : doc["agents"]) {
    Mat block(p, agent.size());
    int n = 0;
    for (const auto& point : agent) {
      if (static_cast<int>(point.size()) != p)
        fail(Errc::io_error, "point dimension does not match dim");
      for (int i = 0; i < p; ++i) block(i, n) = point[i].get<double>();
      ++n;
    }
    agents.push_back(std::move(block));
  }
  return FederatedDataset(p, std::move(agents));
}

std::string topology_to_json(const Topology& t) {
  std::string out = "{\"num_agents\": " + std::to_string(t.num_agents()) + ", \"edges\": [";
  bool first = true;
  for (const auto& [a, b] : t.edges()) {
    if (!first) out += ", ";
    first = false;
    out += "[" + std::to_string(a) + ", " + std::to_string(b) + "]";
  }
  out += "]}\n";
  return out;
}

Topology topology_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::io_error, std::string("topology parse error: ") + e.what());
  }
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : doc["edges"]) edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  return Topology(doc["num_agents"].get<int>(), std::move(edges));
}

std::string report_to_json(const GenMinReport& report) {
  return std::string("{\"nearest_violation\": ") + fmt_double(report.nearest_violation) +
         ", \"fixed_point_residual\": " + fmt_double(report.fixed_point_residual) +
         ", \"passes\": " + (report.passes ? "true" : "false") +
         ", \"in_hull_box\": " + (report.in_hull_box ? "true" : "false") + "}";
}

std::string state_to_json(const NetworkHeads& x, const Clustering& c) {
  const int p = static_cast<int>(x.front().rows());
  const int k = static_cast<int>(x.front().cols());
  std::string out =
      "{\"dim\": " + std::to_string(p) + ", \"k\": " + std::to_string(k) + ", \"heads\": [";
  for (size_t m = 0; m < x.size(); ++m) {
    if (m > 0) out += ", ";
    out += "[";
    for (int j = 0; j < k; ++j) {
      if (j > 0) out += ", ";
      out += "[";
      for (int i = 0; i < p; ++i) {
        if (i > 0) out += ", ";
        out += fmt_double(x[m](i, j));
      }
      out += "]";
    }
    out += "]";
  }
  out += "], \"assign\": [";
  for (size_t m = 0; m < c.assign.size(); ++m) {
    if (m > 0) out += ", ";
    out += "[";
    for (size_t n = 0; n < c.assign[m].size(); ++n) {
      if (n > 0) out += ", ";
      out += std::to_string(c.assign[m][n]);
    }
    out += "]";
  }
  out += "]}\n";
  return out;
}

void state_from_json(const std::string& text, NetworkHeads* x, Clustering* c) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::io_error, std::string("state parse error: ") + e.what());
  }
  const int p = doc["dim"].get<int>();
  const int k = doc["k"].get<int>();
  x->clear();
  for (const auto& agent : doc["heads"]) {
    Heads h(p, k);
    if (static_cast<int>(agent.size()) != k) fail(Errc::io_error, "head count mismatch");
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < p; ++i) h(i, j) = agent[j][i].get<double>();
    x->push_back(std::move(h));
  }
  c->assign.clear();
  for (const auto& agent : doc["assign"]) {
    std::vector<int> row;
    for (const auto& a : agent) row.push_back(a.get<int>());
    c->assign.push_back(std::move(row));
  }
}

std::string trace_to_csv(const std::vector<RoundMetrics>& trace) {
  std::string out = "round,cost_J,cost_Q,descent_slack,innovation_norm,consensus_dev,partition_changed\n";
  for (const RoundMetrics& row : trace) {
    out += std::to_string(row.round) + "," + fmt_double(row.cost_J) + "," +
           fmt_double(row.cost_Q) + "," + fmt_double(row.descent_slack) + "," +
           fmt_double(row.innovation_norm) + "," + fmt_double(row.consensus_dev) + "," +
           (row.partition_changed ? "1" : "0") + "\n";
  }
  return out;
}

std::string trajectory_csv_header() { return "round,agent,cluster,coord_index,value\n"; }

void append_trajectory_csv(std::string* out, int round, const NetworkHeads& x) {
  for (size_t m = 0; m < x.size(); ++m)
    for (int j = 0; j < x[m].cols(); ++j)
      for (int i = 0; i < x[m].rows(); ++i)
        *out += std::to_string(round) + "," + std::to_string(m) + "," + std::to_string(j) +
                "," + std::to_string(i) + "," + fmt_double(x[m](i, j)) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot write " + path);
  out << content;
  if (!out) fail(Errc::io_error, "write failed for " + path);
}

}  // namespace nkm
