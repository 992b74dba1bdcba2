#include "rwre/resolvent.hpp"

#include <cmath>

#include "rwre/error.hpp"
#include "rwre/rng.hpp"
#include "rwre/walk.hpp"

namespace rwre {

namespace {

void fill_residual(const PhaseChain& chain, ResolventSolution& sol) {
  const int n = chain.phases();
  sol.pi_h.assign(static_cast<size_t>(n) * sol.dim, 0.0);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      const double w = chain.transition.at(p, q);
      if (w == 0.0) continue;
      for (int c = 0; c < sol.dim; ++c)
        sol.pi_h[static_cast<size_t>(p) * sol.dim + c] += w * sol.h[static_cast<size_t>(q) * sol.dim + c];
    }
  }
  double r = 0.0;
  for (int p = 0; p < n; ++p) {
    for (int c = 0; c < sol.dim; ++c) {
      const double lhs = (1.0 + sol.epsilon) * sol.h[static_cast<size_t>(p) * sol.dim + c] -
                         sol.pi_h[static_cast<size_t>(p) * sol.dim + c];
      r = std::max(r, std::abs(lhs - sol.g[static_cast<size_t>(p) * sol.dim + c]));
    }
  }
  sol.residual = r;
}

}  // namespace

ResolventSolution solve_resolvent(const PhaseChain& chain, std::span<const double> g, int dim,
                                  double epsilon) {
  if (!(epsilon > 0.0)) throw UsageError("solve_resolvent needs epsilon > 0; use solve_limit");
  const int n = chain.phases();
  if (static_cast<int>(g.size()) != n * dim)
    throw UsageError("g must have one value per (phase, coordinate)");
  ResolventSolution sol;
  sol.epsilon = epsilon;
  sol.dim = dim;
  sol.g.assign(g.begin(), g.end());
  sol.h.assign(g.size(), 0.0);

  // ((1+eps) I - Pi) h = g, solved per coordinate; strictly diagonally
  // dominant, so a pivoted solve cannot fail on a well-formed chain.
  for (int c = 0; c < dim; ++c) {
    Mat m(n, n);
    std::vector<double> rhs(static_cast<size_t>(n));
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) m.at(p, q) = (p == q ? 1.0 + epsilon : 0.0) - chain.transition.at(p, q);
      rhs[static_cast<size_t>(p)] = g[static_cast<size_t>(p) * dim + c];
    }
    std::vector<double> h = lu_solve(std::move(m), std::move(rhs));
    for (int p = 0; p < n; ++p) sol.h[static_cast<size_t>(p) * dim + c] = h[static_cast<size_t>(p)];
  }
  fill_residual(chain, sol);
  return sol;
}

ResolventSolution solve_limit(const PhaseChain& chain, std::span<const double> g, int dim) {
  const int n = chain.phases();
  if (static_cast<int>(g.size()) != n * dim)
    throw UsageError("g must have one value per (phase, coordinate)");
  for (int c = 0; c < dim; ++c) {
    double mean = 0.0;
    for (int p = 0; p < n; ++p)
      mean += chain.stationary[static_cast<size_t>(p)] * g[static_cast<size_t>(p) * dim + c];
    if (std::abs(mean) > 1e-10)
      throw UsageError("solve_limit requires stationary mean zero g (coordinate " +
                       std::to_string(c) + " has mean " + std::to_string(mean) + ")");
  }
  ResolventSolution sol;
  sol.epsilon = 0.0;
  sol.dim = dim;
  sol.g.assign(g.begin(), g.end());
  sol.h.assign(g.size(), 0.0);

  // For mean-zero g the nonsingular system (I - Pi + 1 s^T) h = g yields
  // (I - Pi) h = g with s^T h = 0.
  for (int c = 0; c < dim; ++c) {
    Mat m(n, n);
    std::vector<double> rhs(static_cast<size_t>(n));
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q)
        m.at(p, q) = (p == q ? 1.0 : 0.0) - chain.transition.at(p, q) +
                     chain.stationary[static_cast<size_t>(q)];
      rhs[static_cast<size_t>(p)] = g[static_cast<size_t>(p) * dim + c];
    }
    std::vector<double> h;
    try {
      h = lu_solve(std::move(m), std::move(rhs));
    } catch (const UsageError&) {
      throw UnsupportedModelError(
          "limit solve failed; the phase chain does not appear to be ergodic");
    }
    // polish: re-center against the stationary vector
    double mean = 0.0;
    for (int p = 0; p < n; ++p) mean += chain.stationary[static_cast<size_t>(p)] * h[static_cast<size_t>(p)];
    for (int p = 0; p < n; ++p)
      sol.h[static_cast<size_t>(p) * dim + c] = h[static_cast<size_t>(p)] - mean;
  }
  fill_residual(chain, sol);
  return sol;
}

std::vector<double> resolvent_series(const PhaseChain& chain, std::span<const double> g, int dim,
                                     double epsilon, int terms) {
  const int n = chain.phases();
  std::vector<double> term(g.begin(), g.end());  // Pi^{k-1} g
  std::vector<double> acc(g.size(), 0.0);
  double factor = 1.0;
  for (int k = 1; k <= terms; ++k) {
    factor /= (1.0 + epsilon);
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += factor * term[i];
    // term <- Pi term
    std::vector<double> next(g.size(), 0.0);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const double w = chain.transition.at(p, q);
        if (w == 0.0) continue;
        for (int c = 0; c < dim; ++c)
          next[static_cast<size_t>(p) * dim + c] += w * term[static_cast<size_t>(q) * dim + c];
      }
    term.swap(next);
  }
  return acc;
}

std::vector<double> centered_drift(const PhaseChain& chain) {
  std::vector<double> g(chain.drifts.size());
  for (int p = 0; p < chain.phases(); ++p)
    for (int c = 0; c < chain.dim; ++c)
      g[static_cast<size_t>(p) * chain.dim + c] =
          chain.drifts[static_cast<size_t>(p) * chain.dim + c] - chain.mean_drift[static_cast<size_t>(c)];
  return g;
}

SeriesMcResult corrector_series_mc(
    const EnvironmentView& start,
    const std::function<std::vector<double>(const EnvironmentView&)>& g_eval, int dim,
    double epsilon, int truncation, size_t budget, double g_sup, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw UsageError("corrector_series_mc needs epsilon > 0");
  if (budget == 0) throw UsageError("corrector_series_mc needs a positive sample budget");
  if (truncation < 1) throw UsageError("corrector_series_mc needs truncation >= 1");

  std::vector<double> mean(static_cast<size_t>(dim), 0.0);
  std::vector<double> m2(static_cast<size_t>(dim), 0.0);
  std::vector<double> discounts(static_cast<size_t>(truncation));
  double factor = 1.0;
  for (int k = 0; k < truncation; ++k) {
    factor /= (1.0 + epsilon);
    discounts[static_cast<size_t>(k)] = factor;
  }

  std::vector<double> sample(static_cast<size_t>(dim));
  for (size_t s = 0; s < budget; ++s) {
    std::fill(sample.begin(), sample.end(), 0.0);
    const std::uint64_t walk_seed = derive_stream_seed(seed, s, StreamRole::Scratch);
    // omega-bar(k-1) = T_{X_{k-1}} omega along a quenched path from start
    walk_quenched(start, static_cast<size_t>(truncation - 1), walk_seed,
                  [&](size_t k, std::span<const Coord> pos) {
                    const std::vector<double> gval = g_eval(start.shift(pos));
                    for (int c = 0; c < dim; ++c)
                      sample[static_cast<size_t>(c)] += discounts[k] * gval[static_cast<size_t>(c)];
                  });
    // Welford update
    for (int c = 0; c < dim; ++c) {
      const double x = sample[static_cast<size_t>(c)];
      const double d = x - mean[static_cast<size_t>(c)];
      mean[static_cast<size_t>(c)] += d / static_cast<double>(s + 1);
      m2[static_cast<size_t>(c)] += d * (x - mean[static_cast<size_t>(c)]);
    }
  }

  SeriesMcResult res;
  res.estimate = mean;
  res.std_error.assign(static_cast<size_t>(dim), 0.0);
  if (budget > 1) {
    for (int c = 0; c < dim; ++c)
      res.std_error[static_cast<size_t>(c)] =
          std::sqrt(m2[static_cast<size_t>(c)] / static_cast<double>(budget - 1) /
                    static_cast<double>(budget));
  }
  res.tail_bound = std::pow(1.0 + epsilon, -truncation) * g_sup / epsilon;
  res.samples = budget;
  res.truncation = truncation;
  return res;
}

}  // namespace rwre
