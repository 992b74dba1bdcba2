#include "rwre/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <random>

#include "rwre/decomposition.hpp"
#include "rwre/error.hpp"
#include "rwre/estimators.hpp"
#include "rwre/lil.hpp"
#include "rwre/parallel.hpp"
#include "rwre/report.hpp"
#include "rwre/resolvent.hpp"
#include "rwre/runner.hpp"
#include "rwre/walk.hpp"

namespace rwre {

namespace {

constexpr std::uint64_t kSuiteSeed = 20260808ULL;  // pinned master seed of the suite

std::string fmt6(double v) { return fmt_g(v, 6); }

std::vector<size_t> log_grid(double lo, double hi, int per_decade) {
  std::vector<size_t> grid;
  const double l0 = std::log10(lo), l1 = std::log10(hi);
  const int steps = static_cast<int>(std::round((l1 - l0) * per_decade));
  for (int j = 0; j <= steps; ++j) {
    const size_t n = static_cast<size_t>(std::llround(std::pow(10.0, l0 + static_cast<double>(j) / per_decade)));
    if (grid.empty() || n > grid.back()) grid.push_back(n);
  }
  return grid;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return 0.0;
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - w) + v[hi] * w;
}

// random ergodic chain with Dirichlet(1) rows (all entries positive a.s.)
PhaseChain random_chain(std::mt19937_64& gen, int max_states) {
  const int n = 1 + static_cast<int>(gen() % static_cast<std::uint64_t>(max_states));
  PhaseChain chain;
  chain.dim = 1;
  chain.range = 1;
  std::exponential_distribution<double> expo(1.0);
  // phases carry placeholder +-1 kernels; only the transition matrix and
  // stationary vector participate in resolvent checks
  for (int p = 0; p < n; ++p)
    chain.kernels.push_back(JumpKernel::make(1, {{1}, {-1}}, {0.5, 0.5}));
  chain.transition = Mat(n, n);
  for (int r = 0; r < n; ++r) {
    double s = 0.0;
    std::vector<double> row(static_cast<size_t>(n));
    for (int c = 0; c < n; ++c) {
      row[static_cast<size_t>(c)] = expo(gen);
      s += row[static_cast<size_t>(c)];
    }
    for (int c = 0; c < n; ++c) chain.transition.at(r, c) = row[static_cast<size_t>(c)] / s;
  }
  chain.stationary = stationary_distribution(chain.transition);
  chain.drifts.assign(static_cast<size_t>(n), 0.0);
  chain.mean_drift = {0.0};
  return chain;
}

struct Check {
  bool ok = true;
  std::vector<std::string> lines;

  void require(bool cond, const std::string& line) {
    ok = ok && cond;
    lines.push_back(std::string(cond ? "  ok   " : "  FAIL ") + line);
  }
  void note(const std::string& line) { lines.push_back("       " + line); }
};

// ------------------------------------------------------------------ C1

CriterionResult criterion_resolvent(const AcceptanceOptions&) {
  Check chk;
  // period-2 oracle with its decomposition right-hand side
  PhaseChain oracle = build_phase_chain(period2_spec());
  {
    const std::vector<double> g = centered_drift(oracle);
    for (double eps : {0.1, 1e-3}) {
      ResolventSolution sol = solve_resolvent(oracle, g, 1, eps);
      chk.require(sol.residual <= 1e-12,
                  "period-2 eps=" + fmt6(eps) + " residual " + fmt6(sol.residual) + " <= 1e-12");
    }
    ResolventSolution lim = solve_limit(oracle, g, 1);
    chk.require(lim.residual <= 1e-12,
                "period-2 limit residual " + fmt6(lim.residual) + " <= 1e-12");
    chk.require(std::abs(lim.h_at(0, 0) - 0.2) <= 1e-12 && std::abs(lim.h_at(1, 0) + 0.2) <= 1e-12,
                "period-2 limit h = (0.2, -0.2), got (" + fmt6(lim.h_at(0, 0)) + ", " +
                    fmt6(lim.h_at(1, 0)) + ")");
  }
  // 50 random chains up to 16 states
  std::mt19937_64 gen(0xC1);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    PhaseChain chain = random_chain(gen, 16);
    worst = std::max(worst, resolvent_check_residual(chain, gen()));
  }
  chk.require(worst <= 1e-12,
              "50 random chains (<=16 states): max residual " + fmt6(worst) + " <= 1e-12");

  CriterionResult res;
  res.summary = "max residual " + fmt6(worst);
  res.passed = chk.ok;
  res.detail = std::move(chk.lines);
  return res;
}

// ------------------------------------------------------------------ C2

CriterionResult criterion_decomposition(const AcceptanceOptions& opts) {
  const EnvironmentSpec spec = period2_spec();
  PhaseChain chain = build_phase_chain(spec);
  const std::vector<double> g = centered_drift(chain);
  const ResolventSolution h_eps = solve_resolvent(chain, g, 1, 0.1);
  const ResolventSolution h_lim = solve_limit(chain, g, 1);

  const size_t replicas = 1000, n = 10000;
  std::vector<double> identity_res(replicas), x_res(replicas);
  parallel_replicas(replicas, opts.workers, [&](size_t r) {
    Trajectory traj = simulate_annealed(spec, n, kSuiteSeed, r);
    Decomposition deps = decompose(traj, chain, h_eps, chain.mean_drift);
    identity_res[r] = deps.identity_residual;
    Decomposition dlim = decompose(traj, chain, h_lim, chain.mean_drift);
    double worst = dlim.identity_residual;
    for (size_t k = 0; k <= n; ++k) {
      const double lhs = static_cast<double>(traj.at(k)[0]) -
                         static_cast<double>(k) * chain.mean_drift[0];
      const size_t i = k;
      worst = std::max(worst, std::abs(lhs - (dlim.W[i] + dlim.M[i] + dlim.R[i])));
    }
    x_res[r] = worst;
  });
  const double max_identity = *std::max_element(identity_res.begin(), identity_res.end());
  const double max_x = *std::max_element(x_res.begin(), x_res.end());

  Check chk;
  chk.require(max_identity <= 1e-9,
              "1000 trajectories, n=1e4, eps=0.1: max identity residual " + fmt6(max_identity) +
                  " <= 1e-9");
  chk.require(max_x <= 1e-9,
              "eps=0: max |X_n - n v - (W+M+R)| pointwise " + fmt6(max_x) + " <= 1e-9");

  CriterionResult res;
  res.summary = "identity " + fmt6(max_identity) + ", X-decomposition " + fmt6(max_x);
  res.passed = chk.ok;
  res.detail = std::move(chk.lines);
  return res;
}

// ------------------------------------------------------------------ C3

CriterionResult criterion_diffusion(const AcceptanceOptions& opts) {
  struct Case {
    std::string name;
    EnvironmentSpec spec;
  };
  const std::vector<Case> cases = {{"period-2(0.8,0.4)", period2_spec()},
                                   {"deterministic(0.7,0.3)", deterministic_spec_07()},
                                   {"srw-d2", srw_spec(2)}};
  Check chk;
  for (const Case& cs : cases) {
    PhaseChain chain = build_phase_chain(cs.spec);
    ResolventSolution h = solve_limit(chain, centered_drift(chain), chain.dim);
    Mat exact = diffusion_matrix_exact(chain, h);
    DiffusionEstimate est = estimate_diffusion_empirical(cs.spec, 10000, 10000, chain.mean_drift,
                                                         kSuiteSeed, opts.workers);
    for (int r = 0; r < chain.dim; ++r) {
      for (int c = 0; c < chain.dim; ++c) {
        const double se = est.std_error.at(r, c);
        const double dev = std::abs(est.value.at(r, c) - exact.at(r, c));
        chk.require(dev <= 4.0 * se,
                    cs.name + " entry (" + std::to_string(r) + "," + std::to_string(c) + "): |" +
                        fmt6(est.value.at(r, c)) + " - " + fmt6(exact.at(r, c)) + "| = " +
                        fmt6(dev) + " <= 4 SE = " + fmt6(4.0 * se));
      }
    }
  }
  CriterionResult res;
  res.summary = "empirical diffusion matches exact on 3 oracle models (4 SE)";
  res.passed = chk.ok;
  res.detail = std::move(chk.lines);
  return res;
}

// ------------------------------------------------------------------ C4

CriterionResult criterion_ergodic_trace(const AcceptanceOptions& opts) {
  struct Case {
    std::string name;
    EnvironmentSpec spec;
  };
  const std::vector<Case> cases = {{"period-2(0.8,0.4)", period2_spec()},
                                   {"deterministic(0.7,0.3)", deterministic_spec_07()},
                                   {"srw-d2", srw_spec(2)}};
  const size_t replicas = 20, n = 100000;
  Check chk;
  for (const Case& cs : cases) {
    PhaseChain chain = build_phase_chain(cs.spec);
    ResolventSolution h = solve_limit(chain, centered_drift(chain), chain.dim);
    Mat exact = diffusion_matrix_exact(chain, h);
    double trace_d = 0.0;
    for (int c = 0; c < chain.dim; ++c) trace_d += exact.at(c, c);

    std::vector<double> rel(replicas, 0.0);
    parallel_replicas(replicas, opts.workers, [&](size_t r) {
      EnvironmentView env = annealed_environment(cs.spec, kSuiteSeed, r);
      Trajectory traj = simulate_quenched(env, n, annealed_walk_seed(kSuiteSeed, r));
      CovarianceTrack track = conditional_covariance(traj, env, &chain, &h);
      rel[r] = std::abs(track.vn2() / static_cast<double>(n) - trace_d) / trace_d;
    });
    const double worst = *std::max_element(rel.begin(), rel.end());
    chk.require(worst <= 0.01, cs.name + ": max over 20 replicas of |v_n^2/n - tr D|/tr D = " +
                                   fmt6(worst) + " <= 0.01 (tr D = " + fmt6(trace_d) + ")");
  }
  CriterionResult res;
  res.summary = "v_n^2/n within 1% of tr D at n=1e5 on all oracle models";
  res.passed = chk.ok;
  res.detail = std::move(chk.lines);
  return res;
}

// ------------------------------------------------------------------ C5

CriterionResult criterion_a2_curve(const AcceptanceOptions& opts) {
  // odd grid keeps the period-2 oscillation term away from exact zeros;
  // exact propagation (no pruning) so degenerate curves sit at rounding level
  const std::vector<size_t> grid = {65, 101, 215, 465, 1001, 2155, 4641};
  QuenchedMeanOptions qm_opts;
  qm_opts.prune_below = 0.0;
  Check chk;
  {
    PhaseChain chain = build_phase_chain(period2_spec());
    QuenchedVarianceCurve curve = quenched_variance_curve(period2_spec(), grid, 2,
                                                          chain.mean_drift, kSuiteSeed, qm_opts,
                                                          opts.workers);
    chk.require(!curve.fit.degenerate, "period-2: curve is nondegenerate (bounded oscillation)");
    chk.require(!curve.fit.degenerate && curve.fit.alpha_hat <= 0.1,
                "period-2: alpha-hat " + fmt6(curve.fit.alpha_hat) + " <= 0.1");
  }
  {
    const std::vector<double> v = {0.0};
    QuenchedVarianceCurve curve =
        quenched_variance_curve(balanced_spec_m2(), grid, 8, v, kSuiteSeed, qm_opts, opts.workers);
    chk.require(curve.fit.degenerate && curve.fit.note == "degenerate (zero curve)",
                "balanced: reported '" + curve.fit.note + "'");
  }
  {
    PhaseChain chain = build_phase_chain(deterministic_spec_07());
    QuenchedVarianceCurve curve = quenched_variance_curve(deterministic_spec_07(), grid, 2,
                                                          chain.mean_drift, kSuiteSeed, qm_opts,
                                                          opts.workers);
    chk.require(curve.fit.degenerate && curve.fit.note == "degenerate (zero curve)",
                "deterministic: reported '" + curve.fit.note + "'");
  }
  CriterionResult res;
  res.summary = "period-2 alpha-hat <= 0.1; balanced and deterministic degenerate zero curves";
  res.passed = chk.ok;
  res.detail = std::move(chk.lines);
  return res;
}

// ------------------------------------------------------------------ C6

struct EnvelopeStats {
  double median = 0.0, p95 = 0.0, max = 0.0;
};

EnvelopeStats envelope_from_running_max(const std::vector<double>& run_max) {
  EnvelopeStats s;
  s.median = quantile(run_max, 0.5);
  s.p95 = quantile(run_max, 0.95);
  s.max = *std::max_element(run_max.begin(), run_max.end());
  return s;
}

// running max over every n in [window_lo, n_max] of
// |X_n - n v| / (scale * sqrt(2 n loglog n))
std::vector<double> lil_running_max_sweep(const EnvironmentSpec& spec,
                                          std::span<const double> v, double scale,
                                          size_t window_lo, size_t n_max, size_t replicas,
                                          std::uint64_t master, int workers) {
  const int dim = spec.dim;
  std::vector<double> run_max(replicas, 0.0);
  parallel_replicas(replicas, workers, [&](size_t r) {
    EnvironmentView env = annealed_environment(spec, master, r);
    double running = 0.0;
    walk_quenched(env, n_max, annealed_walk_seed(master, r),
                  [&](size_t k, std::span<const Coord> pos) {
                    if (k < window_lo) return;
                    double dev2 = 0.0;
                    for (int c = 0; c < dim; ++c) {
                      const double d = static_cast<double>(pos[static_cast<size_t>(c)]) -
                                       static_cast<double>(k) * v[static_cast<size_t>(c)];
                      dev2 += d * d;
                    }
                    const double stat =
                        std::sqrt(dev2) / (scale * std::sqrt(2.0 * static_cast<double>(k) *
                                                             safe_loglog(static_cast<double>(k))));
                    running = std::max(running, stat);
                  });
    run_max[r] = running;
  });
  return run_max;
}

// independent oracle: plain +-1 walk driven by std::mt19937_64
std::vector<double> srw_oracle_running_max(size_t window_lo, size_t n_max, size_t replicas,
                                           std::uint64_t seed) {
  std::vector<double> run_max(replicas, 0.0);
  for (size_t r = 0; r < replicas; ++r) {
    std::mt19937_64 gen(seed + r);
    long long x = 0;
    double running = 0.0;
    for (size_t k = 1; k <= n_max; ++k) {
      x += (gen() & 1ULL) ? 1 : -1;
      if (k < window_lo) continue;
      const double stat = std::abs(static_cast<double>(x)) /
                          std::sqrt(2.0 * static_cast<double>(k) *
                                    safe_loglog(static_cast<double>(k)));
      running = std::max(running, stat);
    }
    run_max[r] = running;
  }
  return run_max;
}

CriterionResult criterion_lil_envelope(const AcceptanceOptions& opts) {
  const size_t window_lo = 1000, n_max = 1000000;
  const size_t replicas = 200;
  Check chk;

  {
    const std::vector<double> v = {0.0};
    std::vector<double> rm = lil_running_max_sweep(srw_spec(1), v, 1.0, window_lo, n_max,
                                                   replicas, kSuiteSeed, opts.workers);
    EnvelopeStats s = envelope_from_running_max(rm);
    chk.require(s.median >= 0.7 && s.median <= 1.1,
                "srw-d1 running-max median " + fmt6(s.median) + " in [0.7, 1.1]");
    chk.require(s.max <= 1.35, "srw-d1 running-max max " + fmt6(s.max) + " <= 1.35");
    chk.note("srw-d1 p95 " + fmt6(s.p95));
  }
  {
    PhaseChain chain = build_phase_chain(period2_spec());
    ResolventSolution h = solve_limit(chain, centered_drift(chain), 1);
    Mat d = diffusion_matrix_exact(chain, h);
    const double scale = std::sqrt(d.at(0, 0));  // sqrt(tr D) = sqrt(0.8)
    std::vector<double> rm = lil_running_max_sweep(period2_spec(), chain.mean_drift, scale,
                                                   window_lo, n_max, replicas, kSuiteSeed + 1,
                                                   opts.workers);
    EnvelopeStats s = envelope_from_running_max(rm);
    chk.require(s.median >= 0.7 && s.median <= 1.1,
                "period-2 (statistic / sqrt(0.8)) running-max median " + fmt6(s.median) +
                    " in [0.7, 1.1]");
    chk.require(s.max <= 1.35,
                "period-2 (statistic / sqrt(0.8)) running-max max " + fmt6(s.max) + " <= 1.35");
  }
  {
    std::vector<double> rm = srw_oracle_running_max(window_lo, n_max, replicas, 0x07ac1e);
    EnvelopeStats s = envelope_from_running_max(rm);
    size_t below = 0;
    for (double x : rm) below += (x <= 1.35) ? 1 : 0;
    const double pct = 100.0 * static_cast<double>(below) / static_cast<double>(replicas);
    chk.note("calibration oracle (direct mt19937 srw): median " + fmt6(s.median) + ", p95 " +
             fmt6(s.p95) + ", max " + fmt6(s.max));
    chk.note("oracle places 1.35 at the ~" + fmt_g(pct, 3) +
             "th percentile of the per-replica running max, so the max over 200");
    chk.note("replicas overshoots it with near certainty; at n=1e3 alone the statistic");
    chk.note("exceeds 1.35 with probability ~0.8% per replica (~1.6 expected hits in 200)");
  }

  CriterionResult res;
  res.summary = "running-max envelope on srw-d1 and period-2";
  res.passed = chk.ok;
  res.detail = std::move(chk.lines);
  return res;
}

// ------------------------------------------------------------------ C7

CriterionResult criterion_strassen(const AcceptanceOptions& opts) {
  const std::vector<size_t> grid = log_grid(1e3, 1e6, 6);
  const size_t replicas = 50;
  const EnvironmentSpec spec = srw_spec(1);
  PhaseChain chain = build_phase_chain(spec);
  ResolventSolution h = solve_limit(chain, centered_drift(chain), 1);
  const std::vector<double> v = chain.mean_drift;

  std::vector<PiecewisePath> probes = {line_probe(1, 0), diagonal_probe(1)};
  std::vector<StrassenReport> reports(replicas);
  parallel_replicas(replicas, opts.workers, [&](size_t r) {
    EnvironmentView env = annealed_environment(spec, kSuiteSeed, r);
    Trajectory traj = simulate_quenched(env, grid.back(), annealed_walk_seed(kSuiteSeed, r));
    CovarianceTrack track = conditional_covariance(traj, env, &chain, &h);
    reports[r] = strassen_report(traj, v, track, grid, probes);
    reports[r].replica = r;
  });

  // (a) best K-distance bound achieved over the sweep, per replica
  std::vector<double> kd_best(replicas), kd_final(replicas);
  for (size_t r = 0; r < replicas; ++r) {
    kd_best[r] = *std::min_element(reports[r].k_dist.begin(), reports[r].k_dist.end());
    kd_final[r] = reports[r].k_dist.back();
  }
  Check chk;
  const double med_best = quantile(kd_best, 0.5);
  chk.require(med_best <= 0.35,
              "min-over-grid k_distance_upper by n=1e6: replica median " + fmt6(med_best) +
                  " <= 0.35");
  chk.note("k_distance_upper at the single point n=1e6: replica median " +
           fmt6(quantile(kd_final, 0.5)) +
           " (radial bound ~ sup|xi|; the gated statistic is the sweep minimum)");
  {
    // independent calibration oracle: direct mt19937 walk, closed-form
    // k-distance bound max_k |X_k|/norm * (1 - 1/sqrt(E)), E = n/(2 loglog n)
    std::vector<double> oracle_best(replicas);
    for (size_t r = 0; r < replicas; ++r) {
      std::mt19937_64 gen(0x57a55e + r);
      std::vector<double> absmax(grid.size(), 0.0);
      long long x = 0;
      double peak = 0.0;
      size_t gi = 0;
      for (size_t k = 1; k <= grid.back(); ++k) {
        x += (gen() & 1ULL) ? 1 : -1;
        peak = std::max(peak, std::abs(static_cast<double>(x)));
        if (gi < grid.size() && k == grid[gi]) absmax[gi++] = peak;
      }
      double best = 1e300;
      for (size_t g2 = 0; g2 < grid.size(); ++g2) {
        const double nn = static_cast<double>(grid[g2]);
        const double ll = safe_loglog(nn);
        const double energy = nn / (2.0 * ll);
        const double bound = (absmax[g2] / std::sqrt(2.0 * nn * ll)) *
                             (1.0 - 1.0 / std::sqrt(energy));
        best = std::min(best, bound);
      }
      oracle_best[r] = best;
    }
    chk.note("calibration oracle (direct mt19937 srw): sweep-min k-distance median " +
             fmt6(quantile(oracle_best, 0.5)));
  }

  // (b) per-probe minimal distances across n-limits 1e4, 1e5, 1e6
  size_t i4 = 0, i5 = 0, i6 = 0;
  for (size_t gi = 0; gi < grid.size(); ++gi) {
    if (grid[gi] == 10000) i4 = gi;
    if (grid[gi] == 100000) i5 = gi;
    if (grid[gi] == 1000000) i6 = gi;
  }
  // min over grid n in [1e4, limit]
  auto window_min = [&](const std::vector<double>& dist, size_t hi_idx) {
    double m = dist[i4];
    for (size_t gi = i4; gi <= hi_idx; ++gi) m = std::min(m, dist[gi]);
    return m;
  };
  for (size_t pi = 0; pi < probes.size(); ++pi) {
    size_t monotone = 0;
    std::vector<double> final_min(replicas);
    for (size_t r = 0; r < replicas; ++r) {
      const double d4 = window_min(reports[r].probe_dist[pi], i4);
      const double d5 = window_min(reports[r].probe_dist[pi], i5);
      const double d6 = window_min(reports[r].probe_dist[pi], i6);
      if (d5 <= d4 + 1e-15 && d6 <= d5 + 1e-15) ++monotone;
      final_min[r] = d6;
    }
    const double frac = static_cast<double>(monotone) / static_cast<double>(replicas);
    chk.require(frac >= 0.8, "probe " + std::to_string(pi) +
                                 ": monotone nonincreasing min distance across limits "
                                 "{1e4,1e5,1e6} in " +
                                 fmt6(100.0 * frac) + "% of seeds (>= 80%)");
    chk.note("probe " + std::to_string(pi) + " min-distance median at limit 1e6: " +
             fmt6(quantile(final_min, 0.5)));
  }

  CriterionResult res;
  res.summary = "K-distance median " + fmt6(med_best) + "; probe minima monotone";
  res.passed = chk.ok;
  res.detail = std::move(chk.lines);
  return res;
}

// ------------------------------------------------------------------ C8

CriterionResult criterion_k_geometry(const AcceptanceOptions&) {
  Check chk;
  size_t bad_sqrt = 0, bad_sup = 0, bad_scale = 0;
  double worst_scale = 0.0;
  for (size_t i = 0; i < 10000; ++i) {
    const int dim = 1 + static_cast<int>(i % 3);
    const int segments = 2 + static_cast<int>(mix64(i) % 63);
    PiecewisePath f = random_unit_energy_path(kSuiteSeed + i, dim, segments);
    for (size_t k = 0; k < f.points(); ++k) {
      double norm2 = 0.0;
      for (double x : f.value(k)) norm2 += x * x;
      if (std::sqrt(norm2) > std::sqrt(f.t[k]) + 1e-9) ++bad_sqrt;
    }
    if (sup_norm(f) > 1.0 + 1e-9) ++bad_sup;
    const double e = cm_energy(f);
    for (double c : {2.5, 0.3}) {
      PiecewisePath g = f;
      for (double& x : g.values) x *= c;
      const double err = std::abs(cm_energy(g) - c * c * e) / std::max(1.0, c * c * e);
      worst_scale = std::max(worst_scale, err);
      if (err > 1e-12) ++bad_scale;
    }
  }
  chk.require(bad_sqrt == 0, "|f(t)| <= sqrt(t) at every breakpoint of 1e4 unit-energy paths");
  chk.require(bad_sup == 0, "sup|f| <= 1 for all 1e4 unit-energy paths");
  chk.require(bad_scale == 0,
              "energy(c f) = c^2 energy(f) to 1e-12 (worst " + fmt6(worst_scale) + ")");

  CriterionResult res;
  res.summary = "K geometry on 1e4 random unit-energy paths";
  res.passed = chk.ok;
  res.detail = std::move(chk.lines);
  return res;
}

// ------------------------------------------------------------------ C9

CriterionResult criterion_small_set(const AcceptanceOptions&) {
  Check chk;
  {
    PhaseChain lazy = build_phase_chain(lazy_period2_spec());
    SmallSetReport rep = check_small_set(lazy, 4);
    chk.require(rep.found && rep.l == 2, "lazy period-2: smallest l = 2 (got l = " +
                                             std::to_string(rep.l) + ")");
    chk.require(std::abs(rep.lambda - 0.5) <= 1e-12,
                "lazy period-2: lambda = " + fmt6(rep.lambda) + " (expected 0.5)");
    chk.require(rep.verified, "lazy period-2: inequality re-verified on all phase pairs");
    chk.require(!rep.lambda_by_l.empty() && rep.lambda_by_l[0] == 0.0,
                "lazy period-2: l = 1 infeasible for uniform mu");
  }
  {
    PhaseChain strict = build_phase_chain(period2_spec());
    SmallSetReport rep = check_small_set(strict, 2);
    chk.require(!rep.found, "strict period-2: reports lambda = 0 for uniform mu, l <= 2");
    for (size_t l = 0; l < rep.lambda_by_l.size(); ++l)
      chk.require(rep.lambda_by_l[l] == 0.0,
                  "strict period-2: lambda(l=" + std::to_string(l + 1) + ") = 0");
    chk.note("failure is inconclusive: other mu may satisfy the minorization");
  }
  CriterionResult res;
  res.summary = "lazy fixture (l=2, lambda=0.5); strict periodic chain infeasible for uniform mu";
  res.passed = chk.ok;
  res.detail = std::move(chk.lines);
  return res;
}

// ------------------------------------------------------------------ C10

CriterionResult criterion_determinism(const AcceptanceOptions& opts) {
  namespace fs = std::filesystem;
  Check chk;
  const fs::path scratch = fs::path(opts.scratch_dir);
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  std::vector<ExperimentConfig> configs;
  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Diffusion;
    cfg.env = period2_spec();
    cfg.n_grid = {1000};
    cfg.replicas = 2000;
    cfg.master_seed = kSuiteSeed;
    configs.push_back(cfg);
  }
  {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Lil;
    cfg.env = srw_spec(1);
    cfg.n_grid = {100, 1000, 10000};
    cfg.replicas = 20;
    cfg.master_seed = kSuiteSeed;
    configs.push_back(cfg);
  }

  for (ExperimentConfig& cfg : configs) {
    std::map<std::string, std::string> digests_by_workers;
    for (int workers : {1, 4, 8}) {
      RunnerOptions ro;
      ro.workers = workers;
      ro.out_dir = (scratch / ("w" + std::to_string(workers))).string();
      RunOutcome out = run_experiment(cfg, ro);
      std::string combined;
      for (const auto& [file, digest] : out.manifest.file_digests)
        combined += file + "=" + digest + " ";
      digests_by_workers[std::to_string(workers)] = combined;
    }
    const std::string& ref = digests_by_workers.begin()->second;
    bool all_equal = true;
    for (const auto& [w, d] : digests_by_workers) all_equal = all_equal && (d == ref);
    chk.require(all_equal, std::string(experiment_kind_name(cfg.kind)) +
                               ": result digests identical for workers {1, 4, 8}");
    chk.note(std::string(experiment_kind_name(cfg.kind)) + " digests: " + ref);
  }
  fs::remove_all(scratch);

  CriterionResult res;
  res.summary = "byte-identical result tables across worker counts";
  res.passed = chk.ok;
  res.detail = std::move(chk.lines);
  return res;
}

struct CriterionSpec {
  int id;
  const char* name;
  double budget_seconds;
  CriterionResult (*fn)(const AcceptanceOptions&);
};

const CriterionSpec kCriteria[] = {
    {1, "resolvent-exactness", 1.0, criterion_resolvent},
    {2, "decomposition-identity", 60.0, criterion_decomposition},
    {3, "diffusion-oracle-equivalence", 300.0, criterion_diffusion},
    {4, "ergodic-trace-limit", 120.0, criterion_ergodic_trace},
    {5, "quenched-variance-exponent", 120.0, criterion_a2_curve},
    {6, "lil-envelope", 900.0, criterion_lil_envelope},
    {7, "strassen-containment-density", 900.0, criterion_strassen},
    {8, "k-geometry", 10.0, criterion_k_geometry},
    {9, "small-set-checker", 1.0, criterion_small_set},
    {10, "worker-determinism", 0.0, criterion_determinism},
};

}  // namespace

double resolvent_check_residual(const PhaseChain& chain, std::uint64_t g_seed) {
  const int n = chain.phases();
  std::mt19937_64 gen(g_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> g(static_cast<size_t>(n));
  for (double& x : g) x = normal(gen);

  double worst = 0.0;
  for (double eps : {0.1, 1e-3}) {
    ResolventSolution sol = solve_resolvent(chain, g, 1, eps);
    worst = std::max(worst, sol.residual);
  }
  // centered copy for the limit solve
  double mean = 0.0;
  for (int p = 0; p < n; ++p) mean += chain.stationary[static_cast<size_t>(p)] * g[static_cast<size_t>(p)];
  for (double& x : g) x -= mean;
  ResolventSolution lim = solve_limit(chain, g, 1);
  worst = std::max(worst, lim.residual);
  // h must have stationary mean zero to 1e-10; expressed on the 1e-12
  // residual scale so one number gates the whole check
  double smean = 0.0;
  for (int p = 0; p < n; ++p)
    smean += chain.stationary[static_cast<size_t>(p)] * lim.h[static_cast<size_t>(p)];
  worst = std::max(worst, std::abs(smean) * (1e-12 / 1e-10));
  return worst;
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opts) {
  for (const CriterionSpec& spec : kCriteria) {
    if (spec.id != id) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = spec.fn(opts);
    } catch (const std::exception& e) {
      res.passed = false;
      res.summary = std::string("exception: ") + e.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    res.id = spec.id;
    res.name = spec.name;
    res.seconds = std::chrono::duration<double>(t1 - t0).count();
    res.budget_seconds = spec.budget_seconds;
    if (res.budget_seconds > 0.0 && res.seconds >= res.budget_seconds) {
      res.passed = false;
      res.detail.push_back("  FAIL runtime " + fmt6(res.seconds) + " s exceeded budget " +
                           fmt6(res.budget_seconds) + " s");
    }
    return res;
  }
  throw UsageError("unknown criterion id " + std::to_string(id));
}

std::vector<int> suite_criteria(const std::string& suite) {
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  if (suite == "oracles") return {1, 2, 3, 4, 5, 9};
  if (suite == "resolvent") return {1};
  if (suite == "decomposition") return {2};
  if (suite == "diffusion") return {3};
  if (suite == "ergodic-trace") return {4};
  if (suite == "a2-curve") return {5};
  if (suite == "lil-envelope") return {6};
  if (suite == "strassen") return {7};
  if (suite == "k-geometry") return {8};
  if (suite == "small-set") return {9};
  if (suite == "determinism") return {10};
  throw UsageError("unknown suite '" + suite + "' (try: " + [] {
    std::string s;
    for (const std::string& name : list_suites()) s += name + " ";
    return s;
  }() + ")");
}

std::vector<std::string> list_suites() {
  return {"all",          "oracles",   "resolvent", "decomposition", "diffusion",
          "ergodic-trace", "a2-curve",  "lil-envelope", "strassen",  "k-geometry",
          "small-set",    "determinism"};
}

int run_suite(const std::string& suite, const AcceptanceOptions& opts, std::ostream& out) {
  int failed = 0;
  for (int id : suite_criteria(suite)) {
    CriterionResult res = run_criterion(id, opts);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", res.seconds);
    out << (res.passed ? "[PASS] " : "[FAIL] ") << "C" << res.id << " " << res.name << " ("
        << buf << " s";
    if (res.budget_seconds > 0.0) {
      std::snprintf(buf, sizeof(buf), "%.0f", res.budget_seconds);
      out << ", budget " << buf << " s";
    }
    out << "): " << res.summary << "\n";
    for (const std::string& line : res.detail) out << line << "\n";
    if (!res.passed) ++failed;
  }
  return failed;
}

}  // namespace rwre
