#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rwre/models.hpp"
#include "rwre/phase_chain.hpp"

namespace rwre {

struct AcceptanceOptions {
  int workers = 2;
  std::string scratch_dir = "acceptance-scratch";  // used by the determinism criterion
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;  // 0 = no runtime budget
  std::string summary;
  std::vector<std::string> detail;
};

// Max residual over the criterion-1 solve set (eps in {0.1, 1e-3} and the
// eps = 0 limit) with seeded random right-hand sides; exposed so tests can
// run the same check against corrupted fixtures.
double resolvent_check_residual(const PhaseChain& chain, std::uint64_t g_seed);

CriterionResult run_criterion(int id, const AcceptanceOptions& opts);

// Suite names: all, oracles, and the per-criterion names printed by
// `list_suites`. Unknown names throw UsageError.
std::vector<int> suite_criteria(const std::string& suite);
std::vector<std::string> list_suites();

// Runs a suite, printing one pass/fail line per criterion; returns the
// number of failed criteria.
int run_suite(const std::string& suite, const AcceptanceOptions& opts, std::ostream& out);

}  // namespace rwre
