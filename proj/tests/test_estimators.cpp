#include <cmath>
#include <random>

#include "doctest.h"
#include "rwre/models.hpp"
#include "rwre/error.hpp"
#include "rwre/estimators.hpp"
#include "rwre/resolvent.hpp"

using namespace rwre;

TEST_CASE("drift estimator on the oracle models") {
  {
    DriftEstimate est = estimate_drift(srw_spec(1), 2000, 1000, 5);
    CHECK(std::abs(est.value[0]) <= 3.0 * est.std_error[0]);
    REQUIRE(est.exact.has_value());
    CHECK((*est.exact)[0] == 0.0);
  }
  {
    DriftEstimate est = estimate_drift(deterministic_spec_07(), 2000, 1000, 6);
    REQUIRE(est.exact.has_value());
    CHECK((*est.exact)[0] == doctest::Approx(0.4).epsilon(1e-13));
    CHECK(std::abs(est.value[0] - (*est.exact)[0]) <= 3.0 * est.std_error[0]);
  }
  {
    DriftEstimate est = estimate_drift(period2_spec(), 2000, 1000, 7);
    REQUIRE(est.exact.has_value());
    CHECK((*est.exact)[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::abs(est.value[0] - (*est.exact)[0]) <= 3.0 * est.std_error[0]);
  }
  CHECK_THROWS_AS(estimate_drift(srw_spec(1), 1, 10, 5), UsageError);
}

TEST_CASE("conditional covariance tracks") {
  // srw d1: unit conditional variance, v_n^2 = n exactly
  {
    EnvironmentView env(srw_spec(1));
    Trajectory traj = simulate_quenched(env, 500, 3);
    CovarianceTrack track = conditional_covariance(traj, env, nullptr, nullptr, true);
    CHECK(track.label.find("martingale-part") != std::string::npos);
    for (size_t k = 0; k <= 500; ++k) CHECK(track.traces[k] == static_cast<double>(k));
    // per-step increments are PSD (1x1: nonnegative)
    for (size_t k = 1; k <= 500; ++k) {
      const double inc = track.a_steps[k].at(0, 0) - track.a_steps[k - 1].at(0, 0);
      CHECK(inc >= -1e-12);
    }
  }
  // deterministic 0.7/0.3: v_n^2 = 0.84 n
  {
    EnvironmentView env(deterministic_spec_07());
    Trajectory traj = simulate_quenched(env, 1000, 4);
    CovarianceTrack track = conditional_covariance(traj, env);
    CHECK(track.vn2() == doctest::Approx(0.84 * 1000).epsilon(1e-12));
  }
  // period-2 with the corrector: v_n^2/n -> 0.8 within 1% at n = 1e5
  {
    EnvironmentSpec spec = period2_spec();
    PhaseChain chain = build_phase_chain(spec);
    ResolventSolution h = solve_limit(chain, centered_drift(chain), 1);
    EnvironmentView env(spec);
    Trajectory traj = simulate_quenched(env, 100000, 5);
    CovarianceTrack track = conditional_covariance(traj, env, &chain, &h);
    CHECK(track.label.find("z = w + m") != std::string::npos);
    CHECK(std::abs(track.vn2() / 100000.0 - 0.8) <= 0.008);
    // traces nondecreasing
    for (size_t k = 1; k < track.traces.size(); ++k)
      CHECK(track.traces[k] >= track.traces[k - 1]);
  }
  // d = 2 increments are symmetric PSD and traces match the matrices
  {
    EnvironmentSpec spec = srw_spec(2);
    PhaseChain chain = build_phase_chain(spec);
    ResolventSolution h = solve_limit(chain, centered_drift(chain), 2);
    EnvironmentView env(spec);
    Trajectory traj = simulate_quenched(env, 300, 6);
    CovarianceTrack track = conditional_covariance(traj, env, &chain, &h, true);
    for (size_t k = 1; k <= 300; ++k) {
      const Mat& cur = track.a_steps[k];
      const Mat& prev = track.a_steps[k - 1];
      const double d00 = cur.at(0, 0) - prev.at(0, 0);
      const double d01 = cur.at(0, 1) - prev.at(0, 1);
      const double d10 = cur.at(1, 0) - prev.at(1, 0);
      const double d11 = cur.at(1, 1) - prev.at(1, 1);
      CHECK(d01 == doctest::Approx(d10).epsilon(1e-12));
      CHECK(d00 >= -1e-12);
      CHECK(d00 * d11 - d01 * d10 >= -1e-12);  // 2x2 PSD
      CHECK(track.traces[k] ==
            doctest::Approx(cur.at(0, 0) + cur.at(1, 1)).epsilon(1e-10));
    }
  }
}

TEST_CASE("matrix norm by power iteration") {
  CHECK(matrix_norm(Mat::identity(3)) == doctest::Approx(1.0).epsilon(1e-9));
  Mat diag(2, 2);
  diag.at(0, 0) = 3.0;
  diag.at(1, 1) = -4.0;
  CHECK(matrix_norm(diag) == doctest::Approx(4.0).epsilon(1e-9));
  // nilpotent [[0,1],[0,0]]: singular values {1, 0} (2x2 svd oracle:
  // eigenvalues of A^T A = diag(0, 1))
  Mat nil(2, 2);
  nil.at(0, 1) = 1.0;
  CHECK(matrix_norm(nil) == doctest::Approx(1.0).epsilon(1e-9));

  Mat bad(1, 1);
  bad.at(0, 0) = std::nan("");
  CHECK_THROWS_AS(matrix_norm(bad), UsageError);
}

TEST_CASE("matrix norm: scaling and triangle inequality on random matrices") {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Mat a(3, 3), b(3, 3), sum(3, 3), scaled(3, 3);
    const double c = normal(gen) * 2.0;
    for (int i = 0; i < 9; ++i) {
      a.a[static_cast<size_t>(i)] = normal(gen);
      b.a[static_cast<size_t>(i)] = normal(gen);
      sum.a[static_cast<size_t>(i)] = a.a[static_cast<size_t>(i)] + b.a[static_cast<size_t>(i)];
      scaled.a[static_cast<size_t>(i)] = c * a.a[static_cast<size_t>(i)];
    }
    const double na = matrix_norm(a), nb = matrix_norm(b);
    CHECK(matrix_norm(scaled) == doctest::Approx(std::abs(c) * na).epsilon(1e-8));
    CHECK(matrix_norm(sum) <= na + nb + 1e-8);
  }
}

TEST_CASE("empirical diffusion smoke test against the exact matrix") {
  EnvironmentSpec spec = srw_spec(2);
  PhaseChain chain = build_phase_chain(spec);
  ResolventSolution h = solve_limit(chain, centered_drift(chain), 2);
  Mat exact = diffusion_matrix_exact(chain, h);
  DiffusionEstimate est = estimate_diffusion_empirical(spec, 2000, 500, chain.mean_drift, 17, 2);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      CHECK(std::abs(est.value.at(r, c) - exact.at(r, c)) <= 4.0 * est.std_error.at(r, c));
  CHECK_THROWS_AS(estimate_diffusion_empirical(spec, 50, 100, chain.mean_drift, 1, 1),
                  UsageError);
}

TEST_CASE("log-log exponent fit recovers a synthetic power law") {
  std::vector<double> ns, values;
  for (double n : {100.0, 215.0, 464.0, 1000.0, 2154.0, 4641.0, 10000.0}) {
    ns.push_back(n);
    values.push_back(3.0 * std::pow(n, 0.6));  // alpha = 0.3
  }
  ExponentFit fit = fit_loglog(ns, values);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.alpha_hat == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(fit.half_width <= 1e-9);
  CHECK(fit.note.empty());
  // the smallest-n point is dropped
  CHECK(fit.ns.front() == 215.0);
}

TEST_CASE("exponent fit reports degenerate zero curves") {
  std::vector<double> ns = {100.0, 1000.0, 10000.0};
  std::vector<double> values = {1e-20, 3e-19, 2e-18};
  ExponentFit fit = fit_loglog(ns, values);
  CHECK(fit.degenerate);
  CHECK(fit.note == "degenerate (zero curve)");
}

TEST_CASE("exponent fit flags insufficient span") {
  std::vector<double> ns = {100.0, 200.0, 400.0, 800.0, 1000.0};
  std::vector<double> values = {1.0, 2.0, 4.0, 8.0, 10.0};
  ExponentFit fit = fit_loglog(ns, values);
  CHECK(fit.note.find("insufficient span") != std::string::npos);
}

TEST_CASE("quenched variance curve on the balanced model is a zero curve") {
  const std::vector<size_t> grid = {33, 65, 129, 257, 513};
  const std::vector<double> v = {0.0};
  QuenchedMeanOptions opts;
  opts.prune_below = 0.0;
  QuenchedVarianceCurve curve =
      quenched_variance_curve(balanced_spec_m2(), grid, 4, v, 23, opts, 2);
  CHECK(curve.fit.degenerate);
  CHECK(curve.measure_label.find("fresh-environment") != std::string::npos);
}

TEST_CASE("small-set checker") {
  // one-state chain: l = 1, lambda = 1
  {
    PhaseChain one = build_phase_chain(deterministic_spec_07());
    SmallSetReport rep = check_small_set(one, 3);
    CHECK(rep.found);
    CHECK(rep.l == 1);
    CHECK(rep.lambda == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.verified);
  }
  // strict alternation: uniform-mu minorization fails for l in {1, 2}
  {
    PhaseChain strict = build_phase_chain(period2_spec());
    SmallSetReport rep = check_small_set(strict, 2);
    CHECK_FALSE(rep.found);
    CHECK(rep.lambda_by_l == std::vector<double>{0.0, 0.0});
    CHECK(rep.detail.find("inconclusive") != std::string::npos);
  }
  // lazy fixture: l = 2, lambda = 0.5, and the report re-verifies
  {
    PhaseChain lazy = build_phase_chain(lazy_period2_spec());
    SmallSetReport rep = check_small_set(lazy, 4);
    CHECK(rep.found);
    CHECK(rep.l == 2);
    CHECK(rep.lambda == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.verified);
    // supplied (l, lambda, mu): feasible and infeasible cases
    const std::vector<double> uniform = {0.5, 0.5};
    SmallSetReport ok = check_small_set(lazy, 2, 0.4, uniform);
    CHECK(ok.found);
    CHECK(ok.verified);
    SmallSetReport too_big = check_small_set(lazy, 2, 0.9, uniform);
    CHECK_FALSE(too_big.found);
  }
}
