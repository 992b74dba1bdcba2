#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rwre/env.hpp"

namespace rwre {

enum class ExperimentKind {
  Drift,
  Diffusion,
  Decomposition,
  QuenchedVariance,
  Lil,
  Cluster,
  SmallSet,
};

const char* experiment_kind_name(ExperimentKind k);
ExperimentKind experiment_kind_from_name(const std::string& name);

// Parsed experiment description. The file format is a strict line-based
// "key value..." text: unknown keys are rejected with their line number.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Drift;
  EnvironmentSpec env;
  std::vector<size_t> n_grid;     // strictly increasing; single n = one entry
  size_t replicas = 1;
  std::uint64_t master_seed = 0;
  int workers = 1;
  std::string out_dir = "results";
  double epsilon = 0.0;           // decomposition experiments; 0 = limit corrector
  int small_set_lmax = 8;
  bool quenched_center = false;   // center by E_0^w X_k instead of n v (finite budgets only)
  std::vector<std::string> probe_files;

  size_t n_max() const { return n_grid.empty() ? 0 : n_grid.back(); }

  void validate() const;
  std::string to_text() const;  // canonical; round-trips bit-identically
  static ExperimentConfig from_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  std::uint64_t content_hash() const;
};

}  // namespace rwre
