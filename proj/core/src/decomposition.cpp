#include "rwre/decomposition.hpp"

#include <cmath>

#include "rwre/error.hpp"

namespace rwre {

namespace {

// offset index of the realized step, validated against the phase kernel
int step_offset_index(const JumpKernel& kernel, std::span<const Coord> prev,
                      std::span<const Coord> cur, size_t k) {
  const int dim = kernel.dim;
  for (int i = 0; i < kernel.size(); ++i) {
    auto z = kernel.offset(i);
    bool eq = true;
    for (int c = 0; c < dim; ++c) eq = eq && (cur[c] - prev[c]) == z[c];
    if (eq) {
      if (kernel.probs[static_cast<size_t>(i)] <= 0.0) break;
      return i;
    }
  }
  throw UsageError("trajectory step " + std::to_string(k) +
                   " is inconsistent with the phase chain's kernels");
}

}  // namespace

Decomposition decompose(const Trajectory& traj, const PhaseChain& chain,
                        const ResolventSolution& h, std::span<const double> v) {
  const int dim = traj.dim;
  if (dim != chain.dim) throw UsageError("decompose: dimension mismatch");
  if (h.dim != dim) throw UsageError("decompose: corrector solved for a different dimension");
  if (static_cast<int>(v.size()) != dim) throw UsageError("decompose: drift dimension mismatch");
  const size_t n = traj.steps();

  Decomposition dec;
  dec.epsilon = h.epsilon;
  dec.dim = dim;
  dec.n = n;
  const size_t len = (n + 1) * static_cast<size_t>(dim);
  dec.W.assign(len, 0.0);
  dec.M.assign(len, 0.0);
  dec.R.assign(len, 0.0);
  dec.eps_Sh.assign(len, 0.0);
  dec.S_g.assign(len, 0.0);

  // env_origin shifts the phase of the start site
  IVec start(traj.env_origin);
  const int phase0 = chain.phase_of_site(start);

  int phase = phase0;
  double residual = 0.0;
  for (size_t k = 1; k <= n; ++k) {
    auto prev = traj.at(k - 1);
    auto cur = traj.at(k);
    const JumpKernel& kernel = chain.kernels[static_cast<size_t>(phase)];
    const int zi = step_offset_index(kernel, prev, cur, k);
    const int next_phase = chain.step_phase[static_cast<size_t>(phase)][static_cast<size_t>(zi)];

    auto drift = chain.drift_of(phase);
    for (int c = 0; c < dim; ++c) {
      const size_t i = k * static_cast<size_t>(dim) + static_cast<size_t>(c);
      const size_t p = (k - 1) * static_cast<size_t>(dim) + static_cast<size_t>(c);
      const double step_c = static_cast<double>(cur[c] - prev[c]);
      dec.W[i] = dec.W[p] + step_c - drift[static_cast<size_t>(c)];
      dec.M[i] = dec.M[p] + h.H(phase, next_phase, c);
      dec.R[i] = h.h_at(phase0, c) - h.h_at(next_phase, c);
      dec.eps_Sh[i] = dec.eps_Sh[p] + h.epsilon * h.h_at(phase, c);
      dec.S_g[i] = dec.S_g[p] + (drift[static_cast<size_t>(c)] - v[static_cast<size_t>(c)]);
      residual = std::max(residual,
                          std::abs(dec.S_g[i] - dec.M[i] - dec.R[i] - dec.eps_Sh[i]));
    }
    phase = next_phase;
  }
  dec.identity_residual = residual;
  return dec;
}

Mat diffusion_matrix_exact(const PhaseChain& chain, const ResolventSolution& h) {
  if (h.epsilon != 0.0)
    throw UsageError("diffusion_matrix_exact needs the epsilon = 0 limit solution");
  if (h.dim != chain.dim) throw UsageError("corrector/chain dimension mismatch");
  const int dim = chain.dim;
  Mat d(dim, dim);
  std::vector<double> u(static_cast<size_t>(dim));
  for (int p = 0; p < chain.phases(); ++p) {
    const double sp = chain.stationary[static_cast<size_t>(p)];
    const JumpKernel& kernel = chain.kernels[static_cast<size_t>(p)];
    auto drift = chain.drift_of(p);
    for (int i = 0; i < kernel.size(); ++i) {
      const double w = sp * kernel.probs[static_cast<size_t>(i)];
      if (w == 0.0) continue;
      const int q = chain.step_phase[static_cast<size_t>(p)][static_cast<size_t>(i)];
      auto z = kernel.offset(i);
      for (int c = 0; c < dim; ++c)
        u[static_cast<size_t>(c)] =
            static_cast<double>(z[c]) - drift[static_cast<size_t>(c)] + h.H(p, q, c);
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) d.at(r, c) += w * u[static_cast<size_t>(r)] * u[static_cast<size_t>(c)];
    }
  }
  return d;
}

}  // namespace rwre
