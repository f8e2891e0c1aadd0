#include "nkm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "nkm/io.hpp"
#include "nkm/rng.hpp"

namespace nkm::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

GraphKind parse_kind(const std::string& name) {
  if (name == "ring") return GraphKind::ring;
  if (name == "path") return GraphKind::path;
  if (name == "complete") return GraphKind::complete;
  if (name == "star") return GraphKind::star;
  if (name == "erdos_renyi") return GraphKind::erdos_renyi;
  fail(Errc::invalid_param, "unknown topology kind: " + name);
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return p.string();
  return (fs::path(base_dir) / p).string();
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) fail(Errc::invalid_param, "referenced file does not exist: " + path);
}

// compact rho tag for file names: integral values print without a fraction
std::string rho_tag(double rho) {
  if (rho == std::floor(rho) && std::abs(rho) < 1e15)
    return std::to_string(static_cast<long long>(rho));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", rho);
  return buf;
}

std::string ensure_dir(const std::string& dir) {
  fs::create_directories(dir);
  return dir;
}

std::string heads_json_array(const Heads& h) {
  std::string out = "[";
  for (int j = 0; j < h.cols(); ++j) {
    if (j > 0) out += ", ";
    out += "[";
    for (int i = 0; i < h.rows(); ++i) {
      if (i > 0) out += ", ";
      out += fmt_double(h(i, j));
    }
    out += "]";
  }
  return out + "]";
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::invalid_param, std::string("config parse error: ") + e.what());
  }

  ExperimentConfig cfg;

  if (!doc.contains("dataset")) fail(Errc::invalid_param, "config needs a dataset section");
  const json& ds = doc["dataset"];
  if (ds.contains("path")) {
    const std::string path = resolve_path(base_dir, ds["path"].get<std::string>());
    require_file(path);
    cfg.dataset = path;
  } else if (ds.contains("mixture")) {
    MixtureSource src;
    const json& mix = ds["mixture"];
    src.seed = mix.at("seed").get<std::uint64_t>();
    for (const auto& comp : mix.at("components")) {
      MixtureComponent c;
      const auto& mean = comp.at("mean");
      c.mean = Vec(mean.size());
      for (size_t i = 0; i < mean.size(); ++i) c.mean(i) = mean[i].get<double>();
      c.stddev = comp.at("std").get<double>();
      c.count = comp.at("count").get<int>();
      src.spec.push_back(std::move(c));
    }
    cfg.dataset = std::move(src);
  } else {
    fail(Errc::invalid_param, "dataset needs either path or mixture");
  }

  if (!doc.contains("topology")) fail(Errc::invalid_param, "config needs a topology section");
  const json& topo = doc["topology"];
  if (topo.contains("path")) {
    cfg.topology.path = resolve_path(base_dir, topo["path"].get<std::string>());
    require_file(*cfg.topology.path);
  } else if (topo.contains("edges")) {
    cfg.topology.num_agents = topo.at("num_agents").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : topo["edges"]) edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    cfg.topology.edges = std::move(edges);
  } else {
    cfg.topology.kind = parse_kind(topo.at("kind").get<std::string>());
    cfg.topology.num_agents = topo.at("num_agents").get<int>();
    if (topo.contains("edge_prob")) cfg.topology.edge_prob = topo["edge_prob"].get<double>();
    if (topo.contains("seed")) cfg.topology.seed = topo["seed"].get<std::uint64_t>();
  }

  cfg.k = doc.at("k").get<int>();
  if (cfg.k < 1) fail(Errc::invalid_param, "k must be positive");

  if (doc.contains("rho")) {
    if (doc["rho"].is_array())
      for (const auto& r : doc["rho"]) cfg.rho_list.push_back(r.get<double>());
    else
      cfg.rho_list.push_back(doc["rho"].get<double>());
  }
  if (cfg.rho_list.empty()) fail(Errc::invalid_param, "rho list must be non-empty");
  for (double r : cfg.rho_list)
    if (!(r > 0.0)) fail(Errc::invalid_param, "rho values must be positive");

  if (doc.contains("alpha") && !doc["alpha"].is_string())
    cfg.alpha = doc["alpha"].get<double>();
  if (doc.contains("max_rounds")) cfg.max_rounds = doc["max_rounds"].get<int>();
  if (doc.contains("head_tol")) cfg.head_tol = doc["head_tol"].get<double>();
  if (doc.contains("stability_window")) cfg.stability_window = doc["stability_window"].get<int>();

  if (!doc.contains("init")) fail(Errc::invalid_param, "config needs an init section");
  const json& init = doc["init"];
  const std::string scheme = init.at("scheme").get<std::string>();
  if (scheme == "shared-vector") {
    cfg.init.scheme = InitSpec::Scheme::shared_vector;
    const auto& heads = init.at("heads");
    if (heads.empty()) fail(Errc::invalid_param, "shared-vector init needs heads");
    const int p = static_cast<int>(heads[0].size());
    cfg.init.heads = Heads(p, heads.size());
    for (size_t j = 0; j < heads.size(); ++j) {
      if (static_cast<int>(heads[j].size()) != p)
        fail(Errc::invalid_param, "init heads differ in dimension");
      for (int i = 0; i < p; ++i) cfg.init.heads(i, j) = heads[j][i].get<double>();
    }
  } else if (scheme == "random-datapoints") {
    cfg.init.scheme = InitSpec::Scheme::random_datapoints;
    cfg.init.seed = init.at("seed").get<std::uint64_t>();
  } else {
    fail(Errc::invalid_param, "unknown init scheme: " + scheme);
  }

  if (doc.contains("out_dir"))
    cfg.out_dir = resolve_path(base_dir, doc["out_dir"].get<std::string>());
  else
    cfg.out_dir = resolve_path(base_dir, "out");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  require_file(path);
  return config_from_json(read_file(path), fs::path(path).parent_path().string());
}

FederatedDataset resolve_dataset(const ExperimentConfig& cfg) {
  if (const auto* path = std::get_if<std::string>(&cfg.dataset))
    return dataset_from_json(read_file(*path));
  const auto& src = std::get<MixtureSource>(cfg.dataset);
  return generate_mixture(src.spec, src.seed);
}

Topology resolve_topology(const ExperimentConfig& cfg) {
  const TopologySpec& spec = cfg.topology;
  if (spec.path) return topology_from_json(read_file(*spec.path));
  if (spec.edges) return Topology(spec.num_agents, *spec.edges);
  if (!spec.kind) fail(Errc::invalid_param, "topology needs kind, edges, or path");
  return build_topology(*spec.kind, spec.num_agents, spec.edge_prob, spec.seed);
}

NetworkHeads build_init(const ExperimentConfig& cfg, const FederatedDataset& d, int num_agents) {
  NetworkHeads x;
  if (cfg.init.scheme == InitSpec::Scheme::shared_vector) {
    if (cfg.init.heads.rows() != d.dim())
      fail(Errc::invalid_param, "init head dimension does not match dataset");
    if (cfg.init.heads.cols() != cfg.k)
      fail(Errc::invalid_param, "init head count does not match k");
    x.assign(num_agents, cfg.init.heads);
    return x;
  }
  // random-datapoints: each agent seeds each head at a point drawn from the
  // joint dataset, so all heads start inside the data hull
  if (d.total_count() == 0) fail(Errc::empty_data, "cannot init from an empty dataset");
  std::vector<std::pair<int, int>> idx;
  for (int m = 0; m < d.num_agents(); ++m)
    for (int n = 0; n < d.count(m); ++n) idx.emplace_back(m, n);
  Rng rng(cfg.init.seed);
  for (int m = 0; m < num_agents; ++m) {
    Heads h(d.dim(), cfg.k);
    for (int j = 0; j < cfg.k; ++j) {
      const auto [am, an] = idx[rng.next_below(idx.size())];
      h.col(j) = d.agent(am).col(an);
    }
    x.push_back(std::move(h));
  }
  return x;
}

GenerateResult cmd_generate(const ExperimentConfig& cfg, const std::string& out_dir) {
  const auto* src = std::get_if<MixtureSource>(&cfg.dataset);
  if (!src) fail(Errc::invalid_param, "generate needs a mixture dataset source");
  const FederatedDataset d = generate_mixture(src->spec, src->seed);

  const std::string dir = ensure_dir(out_dir);
  GenerateResult res;
  res.dataset_path = (fs::path(dir) / "dataset.json").string();
  write_file(res.dataset_path, dataset_to_json(d));

  std::string prov = "{\"seed\": " + std::to_string(src->seed) + ", \"prng\": \"" + kPrngName +
                     "\", \"components\": [";
  for (size_t i = 0; i < src->spec.size(); ++i) {
    const MixtureComponent& c = src->spec[i];
    if (i > 0) prov += ", ";
    prov += "{\"mean\": [";
    for (int j = 0; j < c.mean.size(); ++j) {
      if (j > 0) prov += ", ";
      prov += fmt_double(c.mean(j));
    }
    prov += "], \"std\": " + fmt_double(c.stddev) + ", \"count\": " + std::to_string(c.count) + "}";
  }
  prov += "]}\n";
  res.provenance_path = (fs::path(dir) / "dataset.provenance.json").string();
  write_file(res.provenance_path, prov);
  return res;
}

RunArtifacts cmd_run(const ExperimentConfig& cfg, double rho, const std::string& out_dir) {
  if (!(rho > 0.0)) fail(Errc::invalid_param, "rho must be positive");
  const FederatedDataset d = resolve_dataset(cfg);
  const Topology t = resolve_topology(cfg);
  const NetworkHeads init = build_init(cfg, d, t.num_agents());

  RunConfig rc;
  rc.rho = rho;
  rc.alpha = cfg.alpha;
  rc.max_rounds = cfg.max_rounds;
  rc.head_tol = cfg.head_tol;
  rc.stability_window = cfg.stability_window;
  rc.seed = cfg.init.seed;

  // trajectories of long runs are thinned: every round below 1000, then one
  // in a hundred, plus the final round (appended after the run)
  std::string trajectory = trajectory_csv_header();
  int last_written = -1;
  RunArtifacts art;
  art.result = run(d, t, cfg.k, init, rc, [&](int round, const NetworkHeads& x) {
    if (round < 1000 || round % 100 == 0) {
      append_trajectory_csv(&trajectory, round, x);
      last_written = round;
    }
  });
  if (last_written != art.result.rounds)
    append_trajectory_csv(&trajectory, art.result.rounds, art.result.heads);

  const double verify_tol = 10.0 * cfg.head_tol;
  art.report = is_generalized_minimum(art.result.heads, art.result.clustering, t, d, rho,
                                      verify_tol);

  const std::string dir = ensure_dir(out_dir);
  const std::string tag = rho_tag(rho);
  art.trace_path = (fs::path(dir) / ("trace_rho" + tag + ".csv")).string();
  write_file(art.trace_path, trace_to_csv(art.result.trace));
  art.trajectory_path = (fs::path(dir) / ("trajectory_rho" + tag + ".csv")).string();
  write_file(art.trajectory_path, trajectory);
  art.state_path = (fs::path(dir) / ("state_rho" + tag + ".json")).string();
  write_file(art.state_path, state_to_json(art.result.heads, art.result.clustering));

  const bool descent_ok = art.result.max_descent_violation <= 1e-9;
  const bool bounded_ok = art.result.max_box_violation <= 1e-12;
  // a run that claims convergence must satisfy the stationarity verifier
  const bool verify_ok = !art.result.converged || art.report.passes;

  std::string status = "ok";
  if (!descent_ok || !bounded_ok || !verify_ok) {
    art.status = ExitCode::invariant_violation;
    status = "invariant_violation";
  } else if (!art.result.converged) {
    art.status = ExitCode::max_rounds;
    status = "max_rounds";
  }

  std::string report = "{\"rho\": " + fmt_double(rho) + ", \"status\": \"" + status +
                       "\", \"converged\": " + (art.result.converged ? "true" : "false") +
                       ", \"rounds\": " + std::to_string(art.result.rounds) +
                       ", \"partition_convergence_round\": " +
                       (art.result.partition_convergence_round
                            ? std::to_string(*art.result.partition_convergence_round)
                            : "null") +
                       ", \"max_box_violation\": " + fmt_double(art.result.max_box_violation) +
                       ", \"max_descent_violation\": " +
                       fmt_double(art.result.max_descent_violation) +
                       ", \"consensus_dev\": " + fmt_double(art.result.trace.back().consensus_dev) +
                       ", \"consensus_bound\": " + fmt_double(consensus_bound(t, d, rho)) +
                       ", \"init_seed\": " + std::to_string(rc.seed) +
                       ", \"prng\": \"" + kPrngName + "\", \"verifier\": " +
                       report_to_json(art.report) + "}\n";
  art.report_path = (fs::path(dir) / ("report_rho" + tag + ".json")).string();
  write_file(art.report_path, report);
  return art;
}

SweepResult cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
  const FederatedDataset d = resolve_dataset(cfg);
  const Topology t = resolve_topology(cfg);

  SweepResult sweep;
  for (double rho : cfg.rho_list) {
    SweepRow row;
    row.rho = rho;
    try {
      const RunArtifacts art = cmd_run(cfg, rho, out_dir);
      const RoundMetrics& last = art.result.trace.back();
      row.final_cost_q = last.cost_Q;
      row.rho_cost_q = rho * last.cost_Q;
      row.consensus_dev = last.consensus_dev;
      row.consensus_bound = consensus_bound(t, d, rho);
      row.partition_convergence_round = art.result.partition_convergence_round;
      row.rounds_run = art.result.rounds;
      row.nearest_violation = art.report.nearest_violation;
      row.fixed_point_residual = art.report.fixed_point_residual;
      switch (art.status) {
        case ExitCode::ok: row.status = "ok"; break;
        case ExitCode::max_rounds: row.status = "max_rounds"; break;
        default: row.status = "invariant_violation"; break;
      }
      if (static_cast<int>(art.status) > static_cast<int>(sweep.status))
        sweep.status = art.status;
    } catch (const Error& e) {
      row.status = std::string("error:") + e.what();
      sweep.status = ExitCode::validation_error;
    }
    sweep.rows.push_back(std::move(row));
  }

  std::string csv =
      "rho,final_cost_Q,rho_cost_Q,consensus_dev,consensus_bound,"
      "partition_convergence_round,rounds_run,nearest_violation,fixed_point_residual,status\n";
  for (const SweepRow& row : sweep.rows) {
    csv += fmt_double(row.rho) + "," + fmt_double(row.final_cost_q) + "," +
           fmt_double(row.rho_cost_q) + "," + fmt_double(row.consensus_dev) + "," +
           fmt_double(row.consensus_bound) + ",";
    if (row.partition_convergence_round) csv += std::to_string(*row.partition_convergence_round);
    csv += "," + std::to_string(row.rounds_run) + "," + fmt_double(row.nearest_violation) + "," +
           fmt_double(row.fixed_point_residual) + "," + row.status + "\n";
  }
  sweep.summary_path = (fs::path(ensure_dir(out_dir)) / "sweep_summary.csv").string();
  write_file(sweep.summary_path, csv);
  return sweep;
}

OracleResult cmd_oracle(const ExperimentConfig& cfg, double rho, const std::string& out_dir) {
  const FederatedDataset d = resolve_dataset(cfg);
  const Topology t = resolve_topology(cfg);

  OracleResult res;
  const BruteForceResult central = brute_force_global(d, cfg.k);
  res.f_star = central.cost;
  const QGlobalResult relaxed = brute_force_Q_global(t, d, cfg.k, rho);
  res.q_global_cost = relaxed.cost;
  res.gap = check_gap_bound(t, d, cfg.k, rho);
  res.z_g = brute_force_global_set(d, cfg.k);

  std::string out = "{\"f_star\": " + fmt_double(res.f_star) +
                    ", \"q_global_cost\": " + fmt_double(res.q_global_cost) +
                    ", \"gap_lhs\": " + fmt_double(res.gap.lhs) +
                    ", \"gap_rhs\": " + fmt_double(res.gap.rhs) +
                    ", \"gap_holds\": " + (res.gap.holds ? "true" : "false") + ", \"z_g\": [";
  for (size_t i = 0; i < res.z_g.size(); ++i) {
    if (i > 0) out += ", ";
    out += heads_json_array(res.z_g[i]);
  }
  out += "]}\n";
  res.report_path =
      (fs::path(ensure_dir(out_dir)) / ("oracle_rho" + rho_tag(rho) + ".json")).string();
  write_file(res.report_path, out);
  return res;
}

LloydArtifacts cmd_lloyd(const ExperimentConfig& cfg, const std::string& out_dir) {
  const FederatedDataset d = resolve_dataset(cfg);
  const NetworkHeads init = build_init(cfg, d, 1);

  LloydArtifacts art;
  art.result = lloyd_run(d, cfg.k, init.front());
  art.cost = cost_F(art.result.heads, d);

  std::string out = "{\"heads\": " + heads_json_array(art.result.heads) +
                    ", \"cost\": " + fmt_double(art.cost) +
                    ", \"iters\": " + std::to_string(art.result.iters) + ", \"is_minimum\": " +
                    (is_lloyd_minimum(art.result.heads, art.result.partition, d, 1e-9) ? "true"
                                                                                       : "false") +
                    "}\n";
  art.report_path = (fs::path(ensure_dir(out_dir)) / "lloyd.json").string();
  write_file(art.report_path, out);
  return art;
}

VerifyArtifacts cmd_verify(const ExperimentConfig& cfg, double rho,
                           const std::string& state_path, double tol) {
  const FederatedDataset d = resolve_dataset(cfg);
  const Topology t = resolve_topology(cfg);

  NetworkHeads x;
  Clustering c;
  state_from_json(read_file(state_path), &x, &c);

  VerifyArtifacts art;
  art.report = is_generalized_minimum(x, c, t, d, rho, tol);
  art.report_json = report_to_json(art.report) + "\n";
  art.status = art.report.passes ? ExitCode::ok : ExitCode::invariant_violation;
  return art;
}

}  // namespace nkm::harness
