#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rwre/phase_chain.hpp"

namespace rwre {

// Solution of (1+eps) h - Pi h = g on a finite phase chain; for eps = 0
// this is the limit solve (I - Pi) h = g with stationary-mean-zero h.
// Vector-valued g is handled coordinatewise: columns are spatial
// coordinates, rows are phases.
struct ResolventSolution {
  double epsilon = 0.0;
  int dim = 0;
  std::vector<double> g;     // nphases x dim
  std::vector<double> h;     // nphases x dim
  std::vector<double> pi_h;  // Pi h, cached for H evaluations
  double residual = 0.0;     // max norm of (1+eps) h - Pi h - g

  double h_at(int phase, int c) const { return h[static_cast<size_t>(phase) * dim + c]; }
  // H(p, q) = h(q) - (Pi h)(p), the conditionally centered martingale kernel
  double H(int p, int q, int c) const {
    return h[static_cast<size_t>(q) * dim + c] - pi_h[static_cast<size_t>(p) * dim + c];
  }
};

ResolventSolution solve_resolvent(const PhaseChain& chain, std::span<const double> g, int dim,
                                  double epsilon);

// eps -> 0 limit via a direct singular-consistent solve on the mean-zero
// subspace (I - Pi + 1 s^T). Requires stationary-mean-zero g.
ResolventSolution solve_limit(const PhaseChain& chain, std::span<const double> g, int dim);

// Truncated series sum_{k=1..K} (1+eps)^{-k} Pi^{k-1} g; used to validate
// exact solves against the analytic tail bound.
std::vector<double> resolvent_series(const PhaseChain& chain, std::span<const double> g, int dim,
                                     double epsilon, int terms);

// g = D - v on the chain's phases, the decomposition's driving function.
std::vector<double> centered_drift(const PhaseChain& chain);

struct SeriesMcResult {
  std::vector<double> estimate;    // dim
  std::vector<double> std_error;   // dim
  double tail_bound = 0.0;         // (1+eps)^{-K} sup|g| / eps
  size_t samples = 0;
  int truncation = 0;
};

// Monte-Carlo estimate of h_eps at the given environment (viewed from its
// origin): simulates the environment chain and averages
// sum_{k=1..K} (1+eps)^{-k} g(omega-bar(k-1)). Works for any model,
// including those without a finite phase chain.
SeriesMcResult corrector_series_mc(
    const EnvironmentView& start,
    const std::function<std::vector<double>(const EnvironmentView&)>& g_eval, int dim,
    double epsilon, int truncation, size_t budget, double g_sup, std::uint64_t seed);

}  // namespace rwre
