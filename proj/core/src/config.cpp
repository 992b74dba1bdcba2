#include "rwre/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rwre/error.hpp"
#include "rwre/report.hpp"

namespace rwre {

const char* experiment_kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Drift: return "drift";
    case ExperimentKind::Diffusion: return "diffusion";
    case ExperimentKind::Decomposition: return "decomposition";
    case ExperimentKind::QuenchedVariance: return "quenched-variance";
    case ExperimentKind::Lil: return "lil";
    case ExperimentKind::Cluster: return "cluster";
    case ExperimentKind::SmallSet: return "small-set";
  }
  return "?";
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
  if (name == "drift") return ExperimentKind::Drift;
  if (name == "diffusion") return ExperimentKind::Diffusion;
  if (name == "decomposition") return ExperimentKind::Decomposition;
  if (name == "quenched-variance") return ExperimentKind::QuenchedVariance;
  if (name == "lil") return ExperimentKind::Lil;
  if (name == "cluster") return ExperimentKind::Cluster;
  if (name == "small-set") return ExperimentKind::SmallSet;
  throw ParseError("unknown experiment kind '" + name + "'");
}

void ExperimentConfig::validate() const {
  env.validate();
  if (n_grid.empty()) throw UsageError("config needs an n or n-grid");
  for (size_t i = 0; i + 1 < n_grid.size(); ++i)
    if (n_grid[i] >= n_grid[i + 1]) throw UsageError("n-grid must be strictly increasing");
  if (replicas < 1) throw UsageError("replica count must be >= 1");
  if (workers < 1) throw UsageError("worker count must be >= 1");
  if (epsilon < 0.0) throw UsageError("epsilon must be >= 0");
  if (small_set_lmax < 1) throw UsageError("small-set l-max must be >= 1");
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  out << "kind " << experiment_kind_name(kind) << "\n";
  out << "n-grid";
  for (size_t n : n_grid) out << " " << n;
  out << "\n";
  out << "replicas " << replicas << "\n";
  out << "seed " << master_seed << "\n";
  out << "workers " << workers << "\n";
  out << "out " << out_dir << "\n";
  if (kind == ExperimentKind::Decomposition) out << "epsilon " << fmt_full(epsilon) << "\n";
  if (kind == ExperimentKind::SmallSet) out << "small-set-lmax " << small_set_lmax << "\n";
  if (quenched_center) out << "quenched-center 1\n";
  for (const std::string& p : probe_files) out << "probe-file " << p << "\n";
  std::istringstream env_lines(env.to_text());
  std::string line;
  while (std::getline(env_lines, line)) out << "env." << line << "\n";
  return out.str();
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  ExperimentConfig cfg;
  std::string env_text;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_kind = false;
  while (std::getline(in, line)) {
    ++line_no;
    // strip trailing carriage returns from files edited elsewhere
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    std::string rest;
    std::getline(ls, rest);
    if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
    try {
      if (key == "kind") {
        cfg.kind = experiment_kind_from_name(rest);
        saw_kind = true;
      } else if (key == "n") {
        cfg.n_grid = {static_cast<size_t>(std::stoull(rest))};
      } else if (key == "n-grid") {
        cfg.n_grid.clear();
        std::istringstream rs(rest);
        size_t n;
        while (rs >> n) cfg.n_grid.push_back(n);
      } else if (key == "replicas") {
        cfg.replicas = static_cast<size_t>(std::stoull(rest));
      } else if (key == "seed") {
        cfg.master_seed = std::stoull(rest);
      } else if (key == "workers") {
        cfg.workers = std::stoi(rest);
      } else if (key == "out") {
        cfg.out_dir = rest;
      } else if (key == "epsilon") {
        cfg.epsilon = std::stod(rest);
      } else if (key == "small-set-lmax") {
        cfg.small_set_lmax = std::stoi(rest);
      } else if (key == "quenched-center") {
        cfg.quenched_center = std::stoi(rest) != 0;
      } else if (key == "probe-file") {
        cfg.probe_files.push_back(rest);
      } else if (key.rfind("env.", 0) == 0) {
        env_text += key.substr(4) + " " + rest + "\n";
      } else {
        throw ParseError("unknown config key '" + key + "'", line_no);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad value for '") + key + "': " + e.what(), line_no);
    }
  }
  if (!saw_kind) throw ParseError("config is missing 'kind'");
  if (env_text.empty()) throw ParseError("config is missing the env.* block");
  cfg.env = EnvironmentSpec::from_text(env_text);
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

std::uint64_t ExperimentConfig::content_hash() const {
  return fnv1a64(to_text());
}

}  // namespace rwre
