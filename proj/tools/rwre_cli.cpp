// Command-line front end: run experiments from config files, verify
// acceptance suites, inspect run manifests, export tables and trajectories.
// Exit codes: 0 success, 1 criterion failure, 2 usage error, 3 resource error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rwre/acceptance.hpp"
#include "rwre/config.hpp"
#include "rwre/error.hpp"
#include "rwre/report.hpp"
#include "rwre/runner.hpp"
#include "rwre/version.hpp"
#include "rwre/walk.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path, int workers, long long seed, const std::string& out,
            bool restart) {
  rwre::ExperimentConfig cfg = rwre::ExperimentConfig::from_file(config_path);
  rwre::RunnerOptions opts;
  if (workers > 0) opts.workers = workers;
  if (seed >= 0) opts.seed = static_cast<std::uint64_t>(seed);
  if (!out.empty()) opts.out_dir = out;
  opts.restart = restart;
  rwre::RunOutcome outcome = rwre::run_experiment(cfg, opts);
  if (outcome.reused) {
    std::cout << "run already complete: " << outcome.dir.string()
              << " (use --restart to redo)\n";
  } else {
    std::cout << "run complete: " << outcome.dir.string() << "\n";
  }
  for (const auto& [file, digest] : outcome.manifest.file_digests)
    std::cout << "  " << file << " " << digest << "\n";
  return 0;
}

int cmd_verify(const std::string& suite, int workers, const std::string& scratch) {
  rwre::AcceptanceOptions opts;
  if (workers > 0) opts.workers = workers;
  if (!scratch.empty()) opts.scratch_dir = scratch;
  const int failed = rwre::run_suite(suite, opts, std::cout);
  return failed == 0 ? 0 : 1;
}

int cmd_inspect(const std::string& path) {
  fs::path p(path);
  if (fs::is_directory(p)) p /= "manifest.txt";
  rwre::Manifest m = rwre::Manifest::from_file(p);
  std::cout << "manifest       " << p.string() << "\n";
  std::cout << "config hash    " << m.config_hash << "\n";
  std::cout << "version        " << m.version << "\n";
  std::cout << "status         " << m.status << "\n";
  std::cout << "workers        " << m.workers << "\n";
  std::cout << "elapsed (s)    " << m.elapsed_seconds << "\n";
  std::cout << "seed scheme    " << m.seed_scheme << "\n";
  for (const auto& [file, digest] : m.file_digests)
    std::cout << "digest         " << file << " " << digest << "\n";
  return 0;
}

int cmd_export_table(const std::string& run_dir, const std::string& table) {
  const fs::path p = fs::path(run_dir) / table;
  std::cout << rwre::read_text_file(p);
  return 0;
}

int cmd_export_trajectory(const std::string& config_path, size_t replica, long long n_override,
                          const std::string& text_path, const std::string& binary_path) {
  rwre::ExperimentConfig cfg = rwre::ExperimentConfig::from_file(config_path);
  const size_t n = n_override >= 0 ? static_cast<size_t>(n_override) : cfg.n_max();
  rwre::Trajectory traj = rwre::simulate_annealed(cfg.env, n, cfg.master_seed, replica);
  if (!text_path.empty()) {
    std::ofstream out(text_path, std::ios::binary);
    if (!out) throw rwre::UsageError("cannot write " + text_path);
    rwre::write_trajectory_text(traj, out);
    std::cout << "wrote " << text_path << "\n";
  }
  if (!binary_path.empty()) {
    std::ofstream out(binary_path, std::ios::binary);
    if (!out) throw rwre::UsageError("cannot write " + binary_path);
    rwre::write_trajectory_binary(traj, out);
    std::cout << "wrote " << binary_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random walk in random environment: simulation lab and LIL verification harness"};
  app.set_version_flag("--version", std::string(rwre::kVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir, suite = "all", scratch, run_dir, table = "table.tsv";
  std::string traj_text, traj_binary;
  int workers = 0;
  long long seed = -1, n_override = -1;
  size_t replica = 0;
  bool restart = false;

  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--workers", workers, "worker threads (result bytes do not depend on this)");
  run->add_option("--seed", seed, "override the master seed");
  run->add_option("--out", out_dir, "output directory root");
  run->add_flag("--restart", restart, "redo the run even if a complete one exists");

  CLI::App* verify = app.add_subcommand("verify", "run an acceptance suite");
  verify->add_option("suite", suite, "suite name (default: all)");
  verify->add_option("--workers", workers, "worker threads");
  verify->add_option("--scratch", scratch, "scratch directory for the determinism criterion");

  CLI::App* inspect = app.add_subcommand("inspect", "pretty-print a run manifest");
  inspect->add_option("path", run_dir, "run directory or manifest file")->required();

  CLI::App* exp = app.add_subcommand("export", "export flat tables or trajectories");
  exp->add_option("rundir", run_dir, "run directory (table export)");
  exp->add_option("--table", table, "table file name inside the run directory");
  exp->add_option("--config", config_path, "config file (trajectory export)");
  exp->add_option("--replica", replica, "replica index for trajectory export");
  exp->add_option("--n", n_override, "trajectory length override");
  exp->add_option("--traj-text", traj_text, "write the trajectory in columnar text");
  exp->add_option("--traj-binary", traj_binary, "write the trajectory binary frame");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // flag/argument misuse is a usage error
  }

  try {
    if (run->parsed()) return cmd_run(config_path, workers, seed, out_dir, restart);
    if (verify->parsed()) return cmd_verify(suite, workers, scratch);
    if (inspect->parsed()) return cmd_inspect(run_dir);
    if (exp->parsed()) {
      if (!traj_text.empty() || !traj_binary.empty())
        return cmd_export_trajectory(config_path, replica, n_override, traj_text, traj_binary);
      if (run_dir.empty())
        throw rwre::UsageError("export needs a run directory or --traj-text/--traj-binary");
      return cmd_export_table(run_dir, table);
    }
  } catch (const rwre::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 3;
  } catch (const rwre::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rwre::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const rwre::UnsupportedModelError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
