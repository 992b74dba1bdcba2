#include "rwre/phase_chain.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "rwre/error.hpp"

namespace rwre {

int PhaseChain::phase_of_site(std::span<const Coord> site) const {
  if (period.empty()) return 0;
  int idx = 0;
  for (int c = 0; c < dim; ++c) {
    idx = idx * static_cast<int>(period[static_cast<size_t>(c)]) +
          static_cast<int>(floored_mod(site[static_cast<size_t>(c)], period[static_cast<size_t>(c)]));
  }
  return idx;
}

void PhaseChain::validate(double tol) const {
  const int n = phases();
  if (transition.rows != n || transition.cols != n)
    throw UsageError("phase chain transition matrix has wrong shape");
  for (int r = 0; r < n; ++r) {
    double s = 0.0;
    for (int c = 0; c < n; ++c) {
      if (transition.at(r, c) < -1e-15) throw UsageError("negative transition probability");
      s += transition.at(r, c);
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw UsageError("transition row " + std::to_string(r) + " sums to " + std::to_string(s));
  }
  std::vector<double> s2 = mat_vec(transition.transposed(), stationary);
  for (int i = 0; i < n; ++i) {
    if (std::abs(s2[static_cast<size_t>(i)] - stationary[static_cast<size_t>(i)]) > tol)
      throw UsageError("stationary vector is not invariant under the transition matrix");
  }
}

std::string PhaseChain::audit_text() const {
  std::ostringstream out;
  out << "phase-chain phases " << phases() << " dim " << dim << "\n";
  out << "transition\n";
  char buf[40];
  for (int r = 0; r < phases(); ++r) {
    for (int c = 0; c < phases(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", transition.at(r, c));
      out << (c ? " " : "") << buf;
    }
    out << "\n";
  }
  out << "stationary";
  for (double s : stationary) {
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    out << " " << buf;
  }
  out << "\n";
  for (int p = 0; p < phases(); ++p) {
    out << "phase " << p << " kernel";
    for (int i = 0; i < kernels[static_cast<size_t>(p)].size(); ++i) {
      out << (i ? " ;" : "");
      for (Coord c : kernels[static_cast<size_t>(p)].offset(i)) out << " " << c;
      std::snprintf(buf, sizeof(buf), "%.17g", kernels[static_cast<size_t>(p)].probs[static_cast<size_t>(i)]);
      out << " " << buf;
    }
    out << "\n";
  }
  return out.str();
}

PhaseChain build_phase_chain(const EnvironmentSpec& spec) {
  spec.validate();
  PhaseChain chain;
  chain.dim = spec.dim;
  chain.range = spec.range;

  switch (spec.model) {
    case ModelKind::Deterministic:
      chain.kernels = {spec.kernels[0]};
      break;
    case ModelKind::IidFinite:
      if (spec.kernels.size() != 1)
        throw UnsupportedModelError(
            "iid-finite environments with more than one kernel do not induce a finite-state "
            "environment chain; use the Monte-Carlo corrector estimator instead");
      chain.kernels = {spec.kernels[0]};
      break;
    case ModelKind::Periodic:
      chain.kernels = spec.kernels;
      chain.period = spec.period;
      break;
    default:
      throw UnsupportedModelError(
          std::string("model '") + model_kind_name(spec.model) +
          "' does not induce a finite-state environment chain; use the Monte-Carlo corrector "
          "estimator instead");
  }

  const int n = chain.phases();
  chain.transition = Mat(n, n);
  chain.step_phase.assign(static_cast<size_t>(n), {});
  chain.drifts.assign(static_cast<size_t>(n) * chain.dim, 0.0);

  // phase coordinates for periodic models: mixed-radix decode of the index
  IVec phase_site(static_cast<size_t>(chain.dim), 0);
  for (int p = 0; p < n; ++p) {
    const JumpKernel& k = chain.kernels[static_cast<size_t>(p)];
    if (!chain.period.empty()) {
      int rem = p;
      for (int c = chain.dim - 1; c >= 0; --c) {
        const int per = static_cast<int>(chain.period[static_cast<size_t>(c)]);
        phase_site[static_cast<size_t>(c)] = rem % per;
        rem /= per;
      }
    }
    chain.step_phase[static_cast<size_t>(p)].resize(static_cast<size_t>(k.size()));
    for (int i = 0; i < k.size(); ++i) {
      int q = 0;
      if (!chain.period.empty()) {
        IVec dest = add_sites(phase_site, k.offset(i));
        q = chain.phase_of_site(dest);
      }
      chain.step_phase[static_cast<size_t>(p)][static_cast<size_t>(i)] = q;
      chain.transition.at(p, q) += k.probs[static_cast<size_t>(i)];
    }
    std::vector<double> d = k.drift();
    for (int c = 0; c < chain.dim; ++c)
      chain.drifts[static_cast<size_t>(p) * chain.dim + c] = d[static_cast<size_t>(c)];
  }

  chain.stationary = stationary_distribution(chain.transition);
  chain.mean_drift.assign(static_cast<size_t>(chain.dim), 0.0);
  for (int p = 0; p < n; ++p) {
    for (int c = 0; c < chain.dim; ++c)
      chain.mean_drift[static_cast<size_t>(c)] +=
          chain.stationary[static_cast<size_t>(p)] * chain.drifts[static_cast<size_t>(p) * chain.dim + c];
  }
  chain.validate();
  return chain;
}

}  // namespace rwre
