#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/lattice.hpp"
#include "rwre/rng.hpp"

namespace rwre {

inline constexpr std::uint64_t kWalkStreamId = 0x57414c4bULL;  // "WALK"

// A realized path X_0..X_n, always started at the origin of its view
// (shifted starts are realized by shifting the environment).
struct Trajectory {
  int dim = 0;
  std::uint64_t walk_seed = 0;
  IVec env_origin;                // origin of the view the walk ran under
  std::vector<Coord> positions;   // (n+1) x dim, row-major

  size_t steps() const { return positions.size() / static_cast<size_t>(dim) - 1; }
  std::span<const Coord> at(size_t k) const {
    return {positions.data() + k * static_cast<size_t>(dim), static_cast<size_t>(dim)};
  }
};

Trajectory simulate_quenched(const EnvironmentView& env, size_t n, std::uint64_t walk_seed);

// Streaming variant: calls on_step(k, position) for k = 0..n without
// storing the path. Identical draws to simulate_quenched.
template <typename OnStep>
void walk_quenched(const EnvironmentView& env, size_t n, std::uint64_t walk_seed,
                   OnStep&& on_step) {
  const int dim = env.spec().dim;
  IVec pos = zero_site(dim);
  IVec step(static_cast<size_t>(dim));
  Philox4x32 rng(walk_seed, kWalkStreamId);
  on_step(size_t{0}, std::span<const Coord>(pos));
  for (size_t k = 1; k <= n; ++k) {
    env.sample_step(pos, rng.next_unit(), step);
    for (int c = 0; c < dim; ++c) pos[static_cast<size_t>(c)] += step[static_cast<size_t>(c)];
    on_step(k, std::span<const Coord>(pos));
  }
}

// Environment used by replica r of an annealed sweep (fresh seed derived
// from the master seed).
EnvironmentView annealed_environment(const EnvironmentSpec& spec, std::uint64_t master_seed,
                                     std::uint64_t replica);
std::uint64_t annealed_walk_seed(std::uint64_t master_seed, std::uint64_t replica);

Trajectory simulate_annealed(const EnvironmentSpec& spec, size_t n, std::uint64_t master_seed,
                             std::uint64_t replica);

// W_k = X_k - sum_{j<k} D(T_{X_j} omega), flat (n+1) x dim.
// Throws UsageError if a step leaves the support of its site kernel.
std::vector<double> martingale_part(const Trajectory& traj, const EnvironmentView& env);

struct QuenchedMeanOptions {
  size_t max_sites = 8'000'000;  // support budget; exceeding it raises ResourceError
  double prune_below = 1e-15;    // per-site mass pruning threshold
};

// Law of X_n under the quenched measure: site -> probability mass.
struct SiteDistribution {
  int dim = 0;
  std::vector<std::pair<IVec, double>> support;  // positive-mass sites only

  double total_mass() const;
  // masses nonnegative, total within tol of expected (1 minus pruned
  // mass), support within |x| <= reach
  void validate(double expected_mass, double reach, double tol = 1e-10) const;
};

struct QuenchedMeanResult {
  int dim = 0;
  std::vector<double> means;  // (n+1) x dim: E_0^omega X_k
  double pruned_mass = 0.0;   // total probability mass dropped by pruning
  size_t peak_support = 0;
  SiteDistribution final_distribution;  // law of X_n

  std::span<const double> mean_at(size_t k) const {
    return {means.data() + k * static_cast<size_t>(dim), static_cast<size_t>(dim)};
  }
};

// Exact (up to rounding and reported pruning) quenched mean by forward
// propagation of the site distribution.
QuenchedMeanResult quenched_mean(const EnvironmentView& env, size_t n,
                                 const QuenchedMeanOptions& opts = {});

// Columnar text: header line, then "step x_1 .. x_d" rows.
void write_trajectory_text(const Trajectory& traj, std::ostream& out);
// Little-endian binary frame, layout documented in the README:
//   magic "RWTJ", u32 version=1, u32 dim, u64 n, u64 walk_seed,
//   i64 origin[dim], then (n+1)*dim of i64 positions.
void write_trajectory_binary(const Trajectory& traj, std::ostream& out);
Trajectory read_trajectory_binary(std::istream& in);

}  // namespace rwre
