#pragma once

#include <string>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/linalg.hpp"

namespace rwre {

// Finite-state representation of the environment chain viewed from the
// particle. Each phase carries its site kernel; stepping by offset i from
// phase p lands in phase step_phase[p][i].
struct PhaseChain {
  int dim = 0;
  int range = 0;
  std::vector<JumpKernel> kernels;           // one per phase
  std::vector<std::vector<int>> step_phase;  // [phase][offset index] -> next phase
  Mat transition;                            // row-stochastic
  std::vector<double> stationary;
  std::vector<double> drifts;                // nphases x dim: D(p)
  std::vector<double> mean_drift;            // v = sum_p stationary(p) D(p)
  IVec period;                               // nonempty only for periodic models

  int phases() const { return static_cast<int>(kernels.size()); }
  std::span<const double> drift_of(int p) const {
    return {drifts.data() + static_cast<size_t>(p) * dim, static_cast<size_t>(dim)};
  }

  int phase_of_site(std::span<const Coord> site) const;

  // row sums, stationarity and step-phase consistency
  void validate(double tol = 1e-10) const;

  // Structured-text audit document: transition matrix, stationary vector,
  // per-phase kernels.
  std::string audit_text() const;
};

// Builds the finite chain for deterministic, periodic, or single-kernel
// iid-finite specs; throws UnsupportedModelError otherwise (Monte-Carlo
// estimators remain available for those models).
PhaseChain build_phase_chain(const EnvironmentSpec& spec);

}  // namespace rwre
