// Command-line front end: generate | run | lloyd | sweep | oracle | verify.
// Exit codes: 0 success, 2 validation error, 3 invariant violation,
// 4 enumeration guard exceeded, 5 max rounds exhausted (partial trace kept).

#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nkm/harness.hpp"
#include "nkm/io.hpp"

namespace {

int to_exit(nkm::harness::ExitCode code) { return static_cast<int>(code); }

int map_error(const nkm::Error& e) {
  std::fprintf(stderr, "error: %s\n", e.what());
  switch (e.code()) {
    case nkm::Errc::too_large:
      return to_exit(nkm::harness::ExitCode::guard_exceeded);
    case nkm::Errc::max_iters_exceeded:
      return to_exit(nkm::harness::ExitCode::max_rounds);
    default:
      return to_exit(nkm::harness::ExitCode::validation_error);
  }
}

}  // namespace

int main(int argc, char** argv) {
  using nkm::harness::ExitCode;

  CLI::App app{"Distributed K-means over simulated agent networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string state_path;
  std::optional<double> rho;
  std::optional<std::uint64_t> seed;
  double tol = 1e-9;

  auto add_common = [&](CLI::App* cmd, bool needs_rho) {
    cmd->add_option("--config", config_path, "experiment config JSON")->required();
    cmd->add_option("--out", out_dir, "output directory (default: config out_dir)");
    if (needs_rho) cmd->add_option("--rho", rho, "relaxation parameter");
  };

  CLI::App* generate = app.add_subcommand("generate", "write the configured mixture dataset");
  add_common(generate, false);
  generate->add_option("--seed", seed, "override the mixture seed");

  CLI::App* run = app.add_subcommand("run", "one NK-means run at a fixed rho");
  add_common(run, true);

  CLI::App* lloyd = app.add_subcommand("lloyd", "centralized Lloyd baseline on the joint data");
  add_common(lloyd, false);

  CLI::App* sweep = app.add_subcommand("sweep", "NK-means runs over the configured rho list");
  add_common(sweep, false);

  CLI::App* oracle = app.add_subcommand("oracle", "brute-force optima and gap-bound check");
  add_common(oracle, true);

  CLI::App* verify = app.add_subcommand("verify", "re-check a saved state against the verifier");
  add_common(verify, true);
  verify->add_option("--state", state_path, "state JSON written by run")->required();
  verify->add_option("--tol", tol, "verifier tolerance (default 1e-9)");

  CLI11_PARSE(app, argc, argv);

  try {
    nkm::harness::ExperimentConfig cfg = nkm::harness::load_config(config_path);
    const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
    if (seed) {
      if (auto* src = std::get_if<nkm::harness::MixtureSource>(&cfg.dataset)) src->seed = *seed;
    }

    if (*generate) {
      const auto res = nkm::harness::cmd_generate(cfg, dir);
      std::printf("wrote %s\n", res.dataset_path.c_str());
      return 0;
    }
    if (*run) {
      const double r = rho ? *rho : cfg.rho_list.front();
      const auto art = nkm::harness::cmd_run(cfg, r, dir);
      std::printf("rho=%s rounds=%d converged=%s report=%s\n", nkm::fmt_double(r).c_str(),
                  art.result.rounds, art.result.converged ? "yes" : "no",
                  art.report_path.c_str());
      return to_exit(art.status);
    }
    if (*lloyd) {
      const auto art = nkm::harness::cmd_lloyd(cfg, dir);
      std::printf("lloyd cost=%s iters=%d report=%s\n", nkm::fmt_double(art.cost).c_str(),
                  art.result.iters, art.report_path.c_str());
      return 0;
    }
    if (*sweep) {
      const auto res = nkm::harness::cmd_sweep(cfg, dir);
      std::printf("wrote %s (%zu rows)\n", res.summary_path.c_str(), res.rows.size());
      return to_exit(res.status);
    }
    if (*oracle) {
      const double r = rho ? *rho : cfg.rho_list.front();
      const auto res = nkm::harness::cmd_oracle(cfg, r, dir);
      std::printf("f_star=%s q_global=%s gap_holds=%s report=%s\n",
                  nkm::fmt_double(res.f_star).c_str(), nkm::fmt_double(res.q_global_cost).c_str(),
                  res.gap.holds ? "yes" : "no", res.report_path.c_str());
      return 0;
    }
    if (*verify) {
      const double r = rho ? *rho : cfg.rho_list.front();
      const auto res = nkm::harness::cmd_verify(cfg, r, state_path, tol);
      std::printf("%s", res.report_json.c_str());
      return to_exit(res.status);
    }
  } catch (const nkm::Error& e) {
    return map_error(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return to_exit(ExitCode::validation_error);
  }
  return 0;
}
