#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rwre/acceptance.hpp"
#include "rwre/config.hpp"
#include "rwre/error.hpp"
#include "rwre/phase_chain.hpp"
#include "rwre/report.hpp"
#include "rwre/runner.hpp"

using namespace rwre;
namespace fs = std::filesystem;

namespace {

ExperimentConfig drift_config() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Drift;
  cfg.env = deterministic_spec_07();
  cfg.n_grid = {1000};
  cfg.replicas = 1000;
  cfg.master_seed = 99;
  cfg.workers = 2;
  cfg.out_dir = "harness-test-out";
  return cfg;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config round-trips bit-identically") {
  ExperimentConfig cfg = drift_config();
  const std::string text = cfg.to_text();
  ExperimentConfig back = ExperimentConfig::from_text(text);
  CHECK(back.to_text() == text);
  CHECK(back.content_hash() == cfg.content_hash());
}

TEST_CASE("config parser rejects unknown keys with the line number") {
  const std::string text =
      "kind drift\nn 100\nreplicas 10\nseed 1\nworkerz 2\nenv.dim 1\nenv.range 1\n"
      "env.model deterministic\nenv.kernel 0 : 1 0.7 ; -1 0.3\nenv.seed 0\n";
  try {
    ExperimentConfig::from_text(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
    CHECK(std::string(e.what()).find("workerz") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = drift_config();
  cfg.n_grid = {100, 100};
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg.n_grid = {100, 50};
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg.n_grid = {};
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::from_text("n 10\nreplicas 1\n"), ParseError);
}

TEST_CASE("experiment identity excludes execution details") {
  ExperimentConfig a = drift_config();
  ExperimentConfig b = drift_config();
  b.workers = 8;
  b.out_dir = "elsewhere";
  CHECK(science_text(a) == science_text(b));
  ExperimentConfig c = drift_config();
  c.master_seed = 100;
  CHECK(science_text(a) != science_text(c));
}

TEST_CASE("drift experiment produces a complete, reusable, content-addressed run") {
  TempDir tmp("rwre-harness-drift");
  ExperimentConfig cfg = drift_config();
  RunnerOptions opts;
  opts.out_dir = tmp.path.string();

  RunOutcome first = run_experiment(cfg, opts);
  CHECK_FALSE(first.reused);
  CHECK(first.manifest.status == "complete");
  CHECK(fs::exists(first.dir / "result.txt"));
  CHECK(fs::exists(first.dir / "table.tsv"));
  CHECK(fs::exists(first.dir / "config.txt"));

  // digests match the file contents
  for (const auto& [file, digest] : first.manifest.file_digests) {
    const std::string content = read_text_file(first.dir / file);
    CHECK(hex16(fnv1a64(content)) == digest);
  }

  // the estimate in the table is within 3 SE of the exact drift 0.4
  std::istringstream table(read_text_file(first.dir / "table.tsv"));
  std::string header, row;
  std::getline(table, header);
  std::getline(table, row);
  std::istringstream cells(row);
  std::string coord, est_s, se_s, exact_s;
  cells >> coord >> est_s >> se_s >> exact_s;
  const double est = std::stod(est_s), se = std::stod(se_s), exact = std::stod(exact_s);
  CHECK(exact == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(std::abs(est - exact) <= 3.0 * se);

  // rerunning reuses the completed run; --restart redoes it
  RunOutcome second = run_experiment(cfg, opts);
  CHECK(second.reused);
  RunnerOptions redo = opts;
  redo.restart = true;
  RunOutcome third = run_experiment(cfg, redo);
  CHECK_FALSE(third.reused);
  CHECK(third.manifest.file_digests == first.manifest.file_digests);
}

TEST_CASE("incomplete runs are restarted") {
  TempDir tmp("rwre-harness-incomplete");
  ExperimentConfig cfg = drift_config();
  cfg.replicas = 50;
  RunnerOptions opts;
  opts.out_dir = tmp.path.string();
  RunOutcome first = run_experiment(cfg, opts);

  // fake a crash: mark the manifest incomplete
  Manifest m = first.manifest;
  m.status = "incomplete";
  m.write(first.dir / "manifest.txt");
  RunOutcome second = run_experiment(cfg, opts);
  CHECK_FALSE(second.reused);
  CHECK(second.manifest.status == "complete");
}

TEST_CASE("worker count does not change a single output byte") {
  TempDir tmp("rwre-harness-workers");
  ExperimentConfig cfg = drift_config();
  cfg.replicas = 400;
  std::map<std::string, std::string> digests;
  for (int workers : {1, 2, 3}) {
    RunnerOptions opts;
    opts.out_dir = (tmp.path / ("w" + std::to_string(workers))).string();
    opts.workers = workers;
    RunOutcome out = run_experiment(cfg, opts);
    std::string joined;
    for (const auto& [file, digest] : out.manifest.file_digests) joined += file + digest;
    digests[std::to_string(workers)] = joined;
  }
  CHECK(digests["1"] == digests["2"]);
  CHECK(digests["2"] == digests["3"]);
}

TEST_CASE("seed override changes the run identity") {
  TempDir tmp("rwre-harness-seed");
  ExperimentConfig cfg = drift_config();
  cfg.replicas = 50;
  RunnerOptions opts;
  opts.out_dir = tmp.path.string();
  RunOutcome a = run_experiment(cfg, opts);
  opts.seed = 12345;
  RunOutcome b = run_experiment(cfg, opts);
  CHECK(a.dir != b.dir);
}

TEST_CASE("exact decomposition on an iid model is rejected with the mc alternative") {
  TempDir tmp("rwre-harness-unsupported");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Decomposition;
  cfg.env.dim = 1;
  cfg.env.range = 1;
  cfg.env.model = ModelKind::IidDirichlet;
  cfg.env.offsets_flat = {1, -1};
  cfg.env.alpha = {1.0, 1.0};
  cfg.n_grid = {100};
  cfg.replicas = 2;
  RunnerOptions opts;
  opts.out_dir = tmp.path.string();
  try {
    run_experiment(cfg, opts);
    FAIL("expected UnsupportedModelError");
  } catch (const UnsupportedModelError& e) {
    CHECK(std::string(e.what()).find("Monte-Carlo") != std::string::npos);
  }
}

TEST_CASE("decomposition experiment reports the identity residual") {
  TempDir tmp("rwre-harness-decomp");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Decomposition;
  cfg.env = period2_spec();
  cfg.n_grid = {10000};
  cfg.replicas = 100;
  cfg.master_seed = 20260808;
  cfg.workers = 2;
  RunnerOptions opts;
  opts.out_dir = tmp.path.string();
  RunOutcome out = run_experiment(cfg, opts);
  const std::string result = read_text_file(out.dir / "result.txt");
  std::istringstream in(result);
  std::string line;
  double max_residual = 1.0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "max-identity-residual") ls >> max_residual;
  }
  CHECK(max_residual <= 1e-9);
  CHECK(fs::exists(out.dir / "chain.txt"));
}

TEST_CASE("lil experiment supports quenched centering on small budgets") {
  TempDir tmp("rwre-harness-qcenter");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Lil;
  cfg.env = period2_spec();
  cfg.n_grid = {100, 1000};
  cfg.replicas = 2;
  cfg.master_seed = 3;
  cfg.quenched_center = true;
  RunnerOptions opts;
  opts.out_dir = tmp.path.string();
  RunOutcome out = run_experiment(cfg, opts);
  const std::string result = read_text_file(out.dir / "result.txt");
  CHECK(result.find("quenched mean") != std::string::npos);

  // the quenched-centering propagation is budgeted
  cfg.n_grid = {100, 100000};
  CHECK_THROWS_AS(run_experiment(cfg, opts), ResourceError);
}

TEST_CASE("small-set experiment writes the chain audit") {
  TempDir tmp("rwre-harness-smallset");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::SmallSet;
  cfg.env = lazy_period2_spec();
  cfg.n_grid = {1};
  cfg.replicas = 1;
  cfg.small_set_lmax = 4;
  RunnerOptions opts;
  opts.out_dir = tmp.path.string();
  RunOutcome out = run_experiment(cfg, opts);
  const std::string result = read_text_file(out.dir / "result.txt");
  CHECK(result.find("l 2") != std::string::npos);
  CHECK(result.find("lambda 0.5") != std::string::npos);
  CHECK(fs::exists(out.dir / "chain.txt"));
}

TEST_CASE("quenched-variance experiment reports the fit") {
  TempDir tmp("rwre-harness-qv");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::QuenchedVariance;
  cfg.env = period2_spec();
  cfg.n_grid = {65, 101, 215, 465, 1001};
  cfg.replicas = 2;
  cfg.master_seed = 1;
  RunnerOptions opts;
  opts.out_dir = tmp.path.string();
  RunOutcome out = run_experiment(cfg, opts);
  const std::string result = read_text_file(out.dir / "result.txt");
  CHECK(result.find("alpha-hat") != std::string::npos);
  CHECK(result.find("fresh-environment") != std::string::npos);
  const std::string table = read_text_file(out.dir / "table.tsv");
  CHECK(table.find("mean_sq_deviation") != std::string::npos);
}

TEST_CASE("decomposition experiment accepts a positive epsilon") {
  TempDir tmp("rwre-harness-eps");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Decomposition;
  cfg.env = period2_spec();
  cfg.n_grid = {1000};
  cfg.replicas = 10;
  cfg.master_seed = 4;
  cfg.epsilon = 0.1;
  RunnerOptions opts;
  opts.out_dir = tmp.path.string();
  RunOutcome out = run_experiment(cfg, opts);
  const std::string result = read_text_file(out.dir / "result.txt");
  CHECK(result.find("epsilon 0.1") != std::string::npos);
  std::istringstream in(result);
  std::string line;
  double identity = 1.0, resolvent = 1.0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "max-identity-residual") ls >> identity;
    if (key == "resolvent-residual") ls >> resolvent;
  }
  CHECK(identity <= 1e-9);
  CHECK(resolvent <= 1e-12);
}

TEST_CASE("cluster experiment writes the strassen tables") {
  TempDir tmp("rwre-harness-cluster");
  // probe file on disk, loaded through the config
  const fs::path probe_path = tmp.path / "probe.txt";
  {
    std::ofstream probe(probe_path);
    probe << "# dim 1\n0 0\n1 0.5\n";
  }
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Cluster;
  cfg.env = srw_spec(1);
  cfg.n_grid = {200, 500, 1000};
  cfg.replicas = 3;
  cfg.master_seed = 8;
  cfg.probe_files = {probe_path.string()};
  RunnerOptions opts;
  opts.out_dir = tmp.path.string();
  RunOutcome out = run_experiment(cfg, opts);
  const std::string table = read_text_file(out.dir / "table.tsv");
  CHECK(table.find("k_dist_median") != std::string::npos);
  CHECK(table.find("probe2_min_median") != std::string::npos);  // the loaded probe
  CHECK(fs::exists(out.dir / "replicas.tsv"));
  const std::string result = read_text_file(out.dir / "result.txt");
  CHECK(result.find("probe-2-name") != std::string::npos);
}

TEST_CASE("manifests round-trip") {
  TempDir tmp("rwre-manifest");
  Manifest m;
  m.config_hash = "abc123";
  m.version = "0.1.0";
  m.status = "complete";
  m.workers = 4;
  m.elapsed_seconds = 1.25;
  m.seed_scheme = seed_scheme_description();
  m.file_digests["table.tsv"] = "deadbeef00000000";
  m.write(tmp.path / "manifest.txt");
  Manifest back = Manifest::from_file(tmp.path / "manifest.txt");
  CHECK(back.config_hash == m.config_hash);
  CHECK(back.status == m.status);
  CHECK(back.workers == m.workers);
  CHECK(back.seed_scheme == m.seed_scheme);
  CHECK(back.file_digests == m.file_digests);
}

TEST_CASE("criterion 1 core flags a corrupted transition row") {
  PhaseChain chain = build_phase_chain(period2_spec());
  chain.transition.at(0, 1) = 0.9;  // row no longer sums to 1
  bool failed = false;
  try {
    failed = resolvent_check_residual(chain, 7) > 1e-12;
  } catch (const std::exception&) {
    failed = true;
  }
  CHECK(failed);
}

TEST_CASE("suite registry") {
  CHECK(suite_criteria("all").size() == 10);
  CHECK(suite_criteria("oracles") == std::vector<int>{1, 2, 3, 4, 5, 9});
  CHECK(suite_criteria("lil-envelope") == std::vector<int>{6});
  CHECK_THROWS_AS(suite_criteria("nope"), UsageError);
  CHECK(list_suites().size() >= 10);
}
