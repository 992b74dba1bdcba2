#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "rwre/config.hpp"
#include "rwre/report.hpp"

namespace rwre {

struct RunnerOptions {
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool restart = false;  // wipe and redo an existing (or incomplete) run
};

struct RunOutcome {
  std::filesystem::path dir;
  Manifest manifest;
  bool reused = false;  // run directory was already complete and was kept
};

// Executes the experiment, writing result.txt, table.tsv (plus
// kind-specific extras) and manifest.txt into a content-addressed
// directory <out>/<kind>-<hash>. Worker count and output location are
// execution details: they are excluded from the content hash and do not
// influence a single output byte of the result tables.
RunOutcome run_experiment(ExperimentConfig cfg, const RunnerOptions& opts = {});

// Canonical experiment identity: config text minus execution details.
std::string science_text(const ExperimentConfig& cfg);

// Documented derivation of per-replica seeds, recorded in manifests.
std::string seed_scheme_description();

}  // namespace rwre
