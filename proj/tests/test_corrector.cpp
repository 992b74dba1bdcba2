#include <cmath>

#include "doctest.h"
#include "rwre/decomposition.hpp"
#include "rwre/error.hpp"
#include "rwre/estimators.hpp"
#include "rwre/models.hpp"
#include "rwre/phase_chain.hpp"
#include "rwre/resolvent.hpp"
#include "rwre/walk.hpp"

using namespace rwre;

namespace {

EnvironmentSpec period3_spec(double p) {
  EnvironmentSpec spec;
  spec.dim = 1;
  spec.range = 1;
  spec.model = ModelKind::Periodic;
  spec.period = {3};
  for (int i = 0; i < 3; ++i)
    spec.kernels.push_back(JumpKernel::make(1, {{1}, {-1}}, {p, 1.0 - p}));
  spec.validate();
  return spec;
}

}  // namespace

TEST_CASE("deterministic model induces a one-state chain") {
  PhaseChain chain = build_phase_chain(deterministic_spec_07());
  CHECK(chain.phases() == 1);
  CHECK(chain.transition.at(0, 0) == 1.0);
  CHECK(chain.stationary[0] == 1.0);
  CHECK(chain.mean_drift[0] == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("period-2 chain alternates parity deterministically") {
  PhaseChain chain = build_phase_chain(period2_spec());
  REQUIRE(chain.phases() == 2);
  CHECK(chain.transition.at(0, 0) == 0.0);
  CHECK(chain.transition.at(0, 1) == 1.0);
  CHECK(chain.transition.at(1, 0) == 1.0);
  CHECK(chain.transition.at(1, 1) == 0.0);
  CHECK(chain.stationary[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(chain.stationary[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(chain.mean_drift[0] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("period-3 chain is a circulant with uniform stationary law") {
  // +-1 steps on a period-3 lattice: Pi[i][(i+1)%3] = p, Pi[i][(i-1)%3] = 1-p;
  // doubly stochastic, so the stationary vector is uniform
  const double p = 0.7;
  PhaseChain chain = build_phase_chain(period3_spec(p));
  REQUIRE(chain.phases() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(chain.transition.at(i, (i + 1) % 3) == doctest::Approx(p).epsilon(1e-14));
    CHECK(chain.transition.at(i, (i + 2) % 3) == doctest::Approx(1.0 - p).epsilon(1e-14));
    CHECK(chain.transition.at(i, i) == 0.0);
    CHECK(chain.stationary[static_cast<size_t>(i)] ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  // enumerate transitions directly from the kernels as an oracle
  for (int i = 0; i < 3; ++i) {
    std::vector<double> row(3, 0.0);
    const JumpKernel& k = chain.kernels[static_cast<size_t>(i)];
    for (int j = 0; j < k.size(); ++j) {
      const int q = static_cast<int>(floored_mod(i + k.offset(j)[0], 3));
      row[static_cast<size_t>(q)] += k.probs[static_cast<size_t>(j)];
    }
    for (int q = 0; q < 3; ++q) CHECK(chain.transition.at(i, q) == doctest::Approx(row[static_cast<size_t>(q)]));
  }
}

TEST_CASE("non-finite-state models are rejected with guidance") {
  EnvironmentSpec spec;
  spec.dim = 1;
  spec.range = 1;
  spec.model = ModelKind::IidDirichlet;
  spec.offsets_flat = {1, -1};
  spec.alpha = {1.0, 1.0};
  CHECK_THROWS_WITH_AS(build_phase_chain(spec),
                       doctest::Contains("Monte-Carlo"), UnsupportedModelError);

  EnvironmentSpec fin;
  fin.dim = 1;
  fin.range = 1;
  fin.model = ModelKind::IidFinite;
  fin.kernels = {JumpKernel::make(1, {{1}, {-1}}, {0.8, 0.2}),
                 JumpKernel::make(1, {{1}, {-1}}, {0.4, 0.6})};
  fin.weights = {0.5, 0.5};
  CHECK_THROWS_AS(build_phase_chain(fin), UnsupportedModelError);
}

TEST_CASE("resolvent solve: trivial cases") {
  PhaseChain one = build_phase_chain(deterministic_spec_07());
  // g = 0 -> h = 0
  const std::vector<double> zero = {0.0};
  ResolventSolution s0 = solve_resolvent(one, zero, 1, 0.5);
  CHECK(s0.h[0] == 0.0);
  CHECK(s0.residual == 0.0);
  // one-state identity chain: h = g / eps
  const std::vector<double> g = {2.0};
  ResolventSolution s1 = solve_resolvent(one, g, 1, 0.25);
  CHECK(s1.h[0] == doctest::Approx(8.0).epsilon(1e-13));
}

TEST_CASE("period-2 resolvent matches the 2x2 hand solve") {
  PhaseChain chain = build_phase_chain(period2_spec());
  const std::vector<double> g = centered_drift(chain);
  CHECK(g[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(-0.4).epsilon(1e-12));
  for (double eps : {0.1, 0.01}) {
    ResolventSolution sol = solve_resolvent(chain, g, 1, eps);
    // hand solve of (1+e) h0 - h1 = g0, (1+e) h1 - h0 = g1
    const double det = (1.0 + eps) * (1.0 + eps) - 1.0;
    const double h0 = ((1.0 + eps) * g[0] + g[1]) / det;
    const double h1 = ((1.0 + eps) * g[1] + g[0]) / det;
    CHECK(std::abs(sol.h[0] - h0) <= 1e-12);
    CHECK(std::abs(sol.h[1] - h1) <= 1e-12);
    CHECK(sol.residual <= 1e-12);
  }
}

TEST_CASE("truncated series agrees with the exact solve within its tail bound") {
  PhaseChain chain = build_phase_chain(period2_spec());
  const std::vector<double> g = centered_drift(chain);
  for (double eps : {0.1, 0.01}) {
    ResolventSolution sol = solve_resolvent(chain, g, 1, eps);
    for (int terms : {10, 50, 200}) {
      std::vector<double> series = resolvent_series(chain, g, 1, eps, terms);
      const double tail = std::pow(1.0 + eps, -terms) * 0.4 / eps;
      for (size_t i = 0; i < series.size(); ++i)
        CHECK(std::abs(series[i] - sol.h[i]) <= tail + 1e-13);
    }
  }
}

TEST_CASE("limit solve: period-2 oracle and epsilon-sequence convergence") {
  PhaseChain chain = build_phase_chain(period2_spec());
  const std::vector<double> g = centered_drift(chain);
  ResolventSolution lim = solve_limit(chain, g, 1);
  CHECK(std::abs(lim.h[0] - 0.2) <= 1e-12);
  CHECK(std::abs(lim.h[1] + 0.2) <= 1e-12);
  CHECK(lim.residual <= 1e-12);
  // stationary mean zero
  CHECK(std::abs(0.5 * lim.h[0] + 0.5 * lim.h[1]) <= 1e-12);
  // resolvent solutions converge to the limit as eps -> 0
  double prev_gap = 1e300;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    ResolventSolution sol = solve_resolvent(chain, g, 1, eps);
    const double gap = std::max(std::abs(sol.h[0] - lim.h[0]), std::abs(sol.h[1] - lim.h[1]));
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap <= 1e-4);
}

TEST_CASE("limit solve rejects g without stationary mean zero") {
  PhaseChain chain = build_phase_chain(period2_spec());
  const std::vector<double> g = {1.0, 0.0};
  CHECK_THROWS_AS(solve_limit(chain, g, 1), UsageError);
}

TEST_CASE("monte-carlo corrector series") {
  PhaseChain chain = build_phase_chain(period2_spec());
  const std::vector<double> g = centered_drift(chain);
  const double eps = 0.1;
  EnvironmentView env{period2_spec()};
  const std::vector<double> v = chain.mean_drift;
  auto g_eval = [&](const EnvironmentView& view) {
    std::vector<double> d = view.local_drift(zero_site(1));
    for (size_t c = 0; c < d.size(); ++c) d[c] -= v[c];
    return d;
  };

  // g = 0 evaluator gives a zero estimate with zero variance
  auto zero_eval = [](const EnvironmentView&) { return std::vector<double>{0.0}; };
  SeriesMcResult z = corrector_series_mc(env, zero_eval, 1, eps, 50, 64, 0.0, 5);
  CHECK(z.estimate[0] == 0.0);
  CHECK(z.std_error[0] == 0.0);
  CHECK(z.tail_bound == 0.0);

  // deterministic environment: the estimate equals the closed-form
  // discounted sum of the constant g
  EnvironmentView det(deterministic_spec_07());
  auto const_eval = [&](const EnvironmentView& view) {
    std::vector<double> d = view.local_drift(zero_site(1));
    d[0] -= 0.1;  // arbitrary centering, keeps g constant and nonzero
    return d;
  };
  const int terms = 200;
  SeriesMcResult c = corrector_series_mc(det, const_eval, 1, eps, terms, 8, 0.3, 6);
  double closed = 0.0, factor = 1.0;
  const double g_const = 0.4 - 0.1 + (0.7 - 0.3 - 0.4);  // exact drift minus centering
  for (int k = 1; k <= terms; ++k) {
    factor /= (1.0 + eps);
    closed += factor * g_const;
  }
  CHECK(c.estimate[0] == doctest::Approx(closed).epsilon(1e-12));
  CHECK(c.std_error[0] <= 1e-12);
  CHECK(std::abs(c.estimate[0] - g_const / eps) <= c.tail_bound + 1e-12);

  // period-2: within 3 standard errors (plus the tail bound) of the exact h_eps
  ResolventSolution exact = solve_resolvent(chain, g, 1, eps);
  SeriesMcResult mc = corrector_series_mc(env, g_eval, 1, eps, 200, 4000, 0.4, 7);
  CHECK(std::abs(mc.estimate[0] - exact.h[0]) <= 3.0 * mc.std_error[0] + mc.tail_bound);

  CHECK_THROWS_AS(corrector_series_mc(env, g_eval, 1, eps, 10, 0, 0.4, 8), UsageError);
}

TEST_CASE("monte-carlo corrector is the supported route for iid environments") {
  // no finite chain exists here; the estimator must still converge on a
  // deterministic budget with a valid tail bound
  EnvironmentSpec spec;
  spec.dim = 1;
  spec.range = 1;
  spec.model = ModelKind::IidDirichlet;
  spec.offsets_flat = {1, -1};
  spec.alpha = {2.0, 1.0};
  spec.seed = 5150;
  spec.validate();
  EnvironmentView env(spec);

  // center g by the known annealed drift E[D] = (2-1)/3
  const double v = 1.0 / 3.0;
  auto g_eval = [&](const EnvironmentView& view) {
    std::vector<double> d = view.local_drift(zero_site(1));
    d[0] -= v;
    return d;
  };
  const double eps = 0.05;
  SeriesMcResult small = corrector_series_mc(env, g_eval, 1, eps, 300, 500, 1.4, 1);
  SeriesMcResult big = corrector_series_mc(env, g_eval, 1, eps, 300, 4000, 1.4, 2);
  CHECK(std::isfinite(small.estimate[0]));
  CHECK(big.std_error[0] < small.std_error[0]);
  // independent budgets estimate the same quantity
  const double combined =
      std::sqrt(small.std_error[0] * small.std_error[0] + big.std_error[0] * big.std_error[0]);
  CHECK(std::abs(small.estimate[0] - big.estimate[0]) <= 4.0 * combined + 2.0 * small.tail_bound);
  // the tail bound is the documented geometric remainder
  CHECK(big.tail_bound == doctest::Approx(std::pow(1.05, -300) * 1.4 / 0.05));
  CHECK(big.samples == 4000);
  CHECK(big.truncation == 300);
}

TEST_CASE("decomposition on the one-state chain: X - n v equals W") {
  EnvironmentSpec spec = deterministic_spec_07();
  PhaseChain chain = build_phase_chain(spec);
  ResolventSolution h = solve_limit(chain, centered_drift(chain), 1);
  EnvironmentView env(spec);
  Trajectory traj = simulate_quenched(env, 5000, 11);
  Decomposition dec = decompose(traj, chain, h, chain.mean_drift);
  CHECK(dec.identity_residual <= 1e-10 * 5000);
  for (size_t k = 0; k <= traj.steps(); ++k) {
    CHECK(dec.M[k] == 0.0);
    CHECK(dec.R[k] == 0.0);
    const double lhs = static_cast<double>(traj.at(k)[0]) -
                       static_cast<double>(k) * chain.mean_drift[0];
    CHECK(std::abs(lhs - dec.W[k]) <= 1e-9);
  }
}

TEST_CASE("period-2 decomposition: residual and remainder bound") {
  EnvironmentSpec spec = period2_spec();
  PhaseChain chain = build_phase_chain(spec);
  ResolventSolution h = solve_limit(chain, centered_drift(chain), 1);
  const size_t n = 10000;
  for (std::uint64_t r = 0; r < 5; ++r) {
    Trajectory traj = simulate_annealed(spec, n, 77, r);
    Decomposition dec = decompose(traj, chain, h, chain.mean_drift);
    CHECK(dec.identity_residual <= 1e-9);
    for (size_t k = 0; k <= n; ++k) CHECK(std::abs(dec.R[k]) <= 0.4 + 1e-12);
  }
}

TEST_CASE("decomposition identity holds pathwise on every finite-state model") {
  const std::vector<EnvironmentSpec> models = {deterministic_spec_07(), period2_spec(),
                                               period3_spec(0.7), lazy_period2_spec(),
                                               srw_spec(2)};
  const size_t n = 2000;
  for (const EnvironmentSpec& spec : models) {
    PhaseChain chain = build_phase_chain(spec);
    const std::vector<double> g = centered_drift(chain);
    for (double eps : {0.0, 0.05}) {
      ResolventSolution h = eps > 0.0 ? solve_resolvent(chain, g, chain.dim, eps)
                                      : solve_limit(chain, g, chain.dim);
      for (std::uint64_t r = 0; r < 3; ++r) {
        Trajectory traj = simulate_annealed(spec, n, 4242, r);
        Decomposition dec = decompose(traj, chain, h, chain.mean_drift);
        CHECK(dec.identity_residual <= 1e-10 * static_cast<double>(n));
        // R is reconstructible from h and the phase path, hence bounded
        double h_span = 0.0;
        for (double hv : h.h) h_span = std::max(h_span, std::abs(hv));
        for (size_t k = 0; k <= n; ++k)
          for (int c = 0; c < chain.dim; ++c)
            CHECK(std::abs(dec.R[k * static_cast<size_t>(chain.dim) + static_cast<size_t>(c)]) <=
                  2.0 * h_span + 1e-12);
      }
    }
  }
}

TEST_CASE("balanced model: replica diffusion matches the ergodic variance average") {
  // with zero local drift the walk is its own martingale (corrector-free);
  // the clock average v_n^2/n and the replica covariance of X_n/sqrt(n)
  // estimate the same diffusion constant
  EnvironmentSpec spec = balanced_spec_m2(3);
  const std::vector<double> v = {0.0};
  DiffusionEstimate est = estimate_diffusion_empirical(spec, 4000, 2000, v, 515, 2);

  double clock = 0.0;
  const size_t n_long = 100000, env_count = 4;
  for (std::uint64_t r = 0; r < env_count; ++r) {
    EnvironmentView env = annealed_environment(spec, 616, r);
    Trajectory traj = simulate_quenched(env, n_long, annealed_walk_seed(616, r));
    CovarianceTrack track = conditional_covariance(traj, env);
    clock += track.vn2() / static_cast<double>(n_long) / static_cast<double>(env_count);
  }
  CHECK(std::abs(est.value.at(0, 0) - clock) <= 5.0 * est.std_error.at(0, 0));
}

TEST_CASE("decomposition flags a trajectory inconsistent with the chain") {
  EnvironmentSpec spec = period2_spec();
  PhaseChain chain = build_phase_chain(spec);
  ResolventSolution h = solve_limit(chain, centered_drift(chain), 1);
  Trajectory traj = simulate_annealed(spec, 50, 7, 0);
  traj.positions[10] += 1;  // even step, never in the +-1 support
  CHECK_THROWS_AS(decompose(traj, chain, h, chain.mean_drift), UsageError);
}

TEST_CASE("exact diffusion matrix on the oracle models") {
  {
    PhaseChain chain = build_phase_chain(srw_spec(1));
    ResolventSolution h = solve_limit(chain, centered_drift(chain), 1);
    Mat d = diffusion_matrix_exact(chain, h);
    CHECK(d.at(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  }
  {
    PhaseChain chain = build_phase_chain(deterministic_spec_07());
    ResolventSolution h = solve_limit(chain, centered_drift(chain), 1);
    Mat d = diffusion_matrix_exact(chain, h);
    // Bernoulli step variance 1 - v^2
    const double v = chain.mean_drift[0];
    CHECK(d.at(0, 0) == doctest::Approx(1.0 - v * v).epsilon(1e-13));
    CHECK(d.at(0, 0) == doctest::Approx(0.84).epsilon(1e-12));
  }
  {
    PhaseChain chain = build_phase_chain(period2_spec());
    ResolventSolution h = solve_limit(chain, centered_drift(chain), 1);
    // deterministic phase transitions make the corrector kernel vanish
    CHECK(std::abs(h.H(0, 1, 0)) <= 1e-14);
    CHECK(std::abs(h.H(1, 0, 0)) <= 1e-14);
    Mat d = diffusion_matrix_exact(chain, h);
    // stationary average of the per-phase step variances
    const double expected = 0.5 * (4.0 * 0.8 * 0.2 + 4.0 * 0.4 * 0.6);
    CHECK(expected == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(d.at(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  }
  {
    PhaseChain chain = build_phase_chain(srw_spec(2));
    ResolventSolution h = solve_limit(chain, centered_drift(chain), 2);
    Mat d = diffusion_matrix_exact(chain, h);
    CHECK(d.at(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(d.at(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(d.at(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(d.at(0, 1) == d.at(1, 0));
  }
}

TEST_CASE("chain audit document lists transition, stationary law and kernels") {
  PhaseChain chain = build_phase_chain(period2_spec());
  const std::string audit = chain.audit_text();
  CHECK(audit.find("phase-chain phases 2") != std::string::npos);
  CHECK(audit.find("transition") != std::string::npos);
  CHECK(audit.find("stationary") != std::string::npos);
  CHECK(audit.find("phase 0 kernel") != std::string::npos);
}
