#pragma once

#include <span>
#include <vector>

#include "rwre/linalg.hpp"
#include "rwre/phase_chain.hpp"
#include "rwre/resolvent.hpp"
#include "rwre/walk.hpp"

namespace rwre {

// Pathwise realization of S_n(g) = M_n^eps + R_n^eps + eps S_n(h_eps)
// with g = D - v, alongside the walk martingale W. All sequences are
// (n+1) x dim flat arrays indexed like the trajectory.
struct Decomposition {
  double epsilon = 0.0;
  int dim = 0;
  size_t n = 0;
  std::vector<double> W;       // walk martingale
  std::vector<double> M;       // corrector martingale M^eps
  std::vector<double> R;       // remainder h(omega-bar(0)) - h(omega-bar(k))
  std::vector<double> eps_Sh;  // eps * S_k(h_eps)
  std::vector<double> S_g;     // S_k(g)
  double identity_residual = 0.0;  // max_k |S_g - M - R - eps_Sh|_inf

  std::span<const double> row(const std::vector<double>& seq, size_t k) const {
    return {seq.data() + k * static_cast<size_t>(dim), static_cast<size_t>(dim)};
  }
};

// Requires traj consistent with the chain's phase rule and h solved on the
// same chain (epsilon from h). v is the centering drift.
Decomposition decompose(const Trajectory& traj, const PhaseChain& chain,
                        const ResolventSolution& h, std::span<const double> v);

// Exact diffusion matrix: stationary expectation of the outer product of
// X_1 - D(omega) + H(omega, T_{X_1} omega). h must come from solve_limit.
Mat diffusion_matrix_exact(const PhaseChain& chain, const ResolventSolution& h);

}  // namespace rwre
