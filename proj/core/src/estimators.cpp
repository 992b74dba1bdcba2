#include "rwre/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "rwre/error.hpp"
#include "rwre/parallel.hpp"
#include "rwre/resolvent.hpp"

namespace rwre {

CovarianceTrack conditional_covariance(const Trajectory& traj, const EnvironmentView& env,
                                       const PhaseChain* chain, const ResolventSolution* h,
                                       bool store_matrices) {
  const int dim = traj.dim;
  if (dim != env.spec().dim) throw UsageError("conditional_covariance: dimension mismatch");
  if ((chain == nullptr) != (h == nullptr))
    throw UsageError("conditional_covariance needs chain and corrector together");
  const size_t n = traj.steps();

  CovarianceTrack track;
  track.dim = dim;
  track.traces.assign(n + 1, 0.0);
  track.label = chain ? "conditional-covariance(z = w + m)" : "martingale-part-covariance(w only)";

  Mat acc(dim, dim);
  std::vector<Mat> per_phase;
  if (chain) {
    if (h->epsilon != 0.0)
      throw UsageError("conditional_covariance needs the epsilon = 0 corrector");
    // per-phase closed form: sum_z pi(z) (z - D + H)(z - D + H)^t
    per_phase.reserve(static_cast<size_t>(chain->phases()));
    std::vector<double> u(static_cast<size_t>(dim));
    for (int p = 0; p < chain->phases(); ++p) {
      Mat m(dim, dim);
      const JumpKernel& kernel = chain->kernels[static_cast<size_t>(p)];
      auto drift = chain->drift_of(p);
      for (int i = 0; i < kernel.size(); ++i) {
        const double w = kernel.probs[static_cast<size_t>(i)];
        if (w == 0.0) continue;
        const int q = chain->step_phase[static_cast<size_t>(p)][static_cast<size_t>(i)];
        auto z = kernel.offset(i);
        for (int c = 0; c < dim; ++c)
          u[static_cast<size_t>(c)] =
              static_cast<double>(z[c]) - drift[static_cast<size_t>(c)] + h->H(p, q, c);
        for (int r = 0; r < dim; ++r)
          for (int c = 0; c < dim; ++c)
            m.at(r, c) += w * u[static_cast<size_t>(r)] * u[static_cast<size_t>(c)];
      }
      per_phase.push_back(std::move(m));
    }
  }

  if (store_matrices) track.a_steps.reserve(n + 1);
  if (store_matrices) track.a_steps.push_back(acc);

  IVec abs_site(static_cast<size_t>(dim));
  for (size_t k = 1; k <= n; ++k) {
    auto prev = traj.at(k - 1);
    if (chain) {
      for (int c = 0; c < dim; ++c)
        abs_site[static_cast<size_t>(c)] =
            traj.env_origin[static_cast<size_t>(c)] + prev[static_cast<size_t>(c)];
      const int p = chain->phase_of_site(abs_site);
      const Mat& m = per_phase[static_cast<size_t>(p)];
      for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += m.a[i];
    } else {
      const JumpKernel* t = env.table_kernel_at(prev);
      JumpKernel local;
      if (!t) {
        local = env.kernel_at(prev);
        t = &local;
      }
      const std::vector<double> d = t->drift();
      t->accumulate_step_covariance(d, acc.a);
    }
    double tr = 0.0;
    for (int c = 0; c < dim; ++c) tr += acc.at(c, c);
    track.traces[k] = tr;
    if (store_matrices) track.a_steps.push_back(acc);
  }
  track.a_final = std::move(acc);
  return track;
}

DriftEstimate estimate_drift(const EnvironmentSpec& spec, size_t replicas, size_t n,
                             std::uint64_t master_seed, int workers) {
  if (replicas < 2) throw UsageError("estimate_drift needs at least 2 replicas");
  const int dim = spec.dim;
  DriftEstimate est;
  est.replicas = replicas;
  est.value.assign(static_cast<size_t>(dim), 0.0);
  est.std_error.assign(static_cast<size_t>(dim), 0.0);

  std::vector<double> per_replica(replicas * static_cast<size_t>(dim));
  parallel_replicas(replicas, workers, [&](size_t r) {
    EnvironmentView env = annealed_environment(spec, master_seed, r);
    walk_quenched(env, n, annealed_walk_seed(master_seed, r),
                  [&](size_t k, std::span<const Coord> pos) {
                    if (k != n) return;
                    for (int c = 0; c < dim; ++c)
                      per_replica[r * static_cast<size_t>(dim) + static_cast<size_t>(c)] =
                          static_cast<double>(pos[static_cast<size_t>(c)]) / static_cast<double>(n);
                  });
  });
  std::vector<KahanSum> sum(static_cast<size_t>(dim)), sum2(static_cast<size_t>(dim));
  for (size_t r = 0; r < replicas; ++r) {
    for (int c = 0; c < dim; ++c) {
      const double x = per_replica[r * static_cast<size_t>(dim) + static_cast<size_t>(c)];
      sum[static_cast<size_t>(c)].add(x);
      sum2[static_cast<size_t>(c)].add(x * x);
    }
  }
  for (int c = 0; c < dim; ++c) {
    const double m = sum[static_cast<size_t>(c)].value() / static_cast<double>(replicas);
    const double var =
        std::max(0.0, sum2[static_cast<size_t>(c)].value() / static_cast<double>(replicas) - m * m);
    est.value[static_cast<size_t>(c)] = m;
    est.std_error[static_cast<size_t>(c)] = std::sqrt(var / static_cast<double>(replicas));
  }
  if (spec.finite_chain()) {
    est.exact = build_phase_chain(spec).mean_drift;
  }
  return est;
}

double matrix_norm(const Mat& a) {
  for (double x : a.a)
    if (!std::isfinite(x)) throw UsageError("matrix_norm needs finite entries");
  if (a.rows == 0 || a.cols == 0) return 0.0;
  // power iteration on B = A^T A; documented tolerance 1e-10
  const Mat b = mat_mul(a.transposed(), a);
  const int n = b.rows;
  std::vector<double> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = 1.0 + 1e-3 * static_cast<double>(i);
  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    std::vector<double> w = mat_vec(b, v);
    double norm = std::sqrt(dot(w, w));
    if (norm == 0.0) return 0.0;  // v in the kernel of A^T A and no growth anywhere
    for (double& x : w) x /= norm;
    const double next = dot(w, mat_vec(b, w));
    v.swap(w);
    if (std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(0.0, lambda));
}

DiffusionEstimate estimate_diffusion_empirical(const EnvironmentSpec& spec, size_t replicas,
                                               size_t n, std::span<const double> v,
                                               std::uint64_t master_seed, int workers) {
  if (replicas < 100) throw UsageError("estimate_diffusion_empirical needs >= 100 replicas");
  const int dim = spec.dim;
  if (static_cast<int>(v.size()) != dim) throw UsageError("drift dimension mismatch");

  // per-replica scaled deviations u = (X_n - n v)/sqrt(n)
  std::vector<double> dev(replicas * static_cast<size_t>(dim));
  const double sqn = std::sqrt(static_cast<double>(n));
  parallel_replicas(replicas, workers, [&](size_t r) {
    EnvironmentView env = annealed_environment(spec, master_seed, r);
    walk_quenched(env, n, annealed_walk_seed(master_seed, r),
                  [&](size_t k, std::span<const Coord> pos) {
                    if (k != n) return;
                    for (int c = 0; c < dim; ++c)
                      dev[r * static_cast<size_t>(dim) + static_cast<size_t>(c)] =
                          (static_cast<double>(pos[static_cast<size_t>(c)]) -
                           static_cast<double>(n) * v[static_cast<size_t>(c)]) /
                          sqn;
                  });
  });

  DiffusionEstimate est;
  est.replicas = replicas;
  est.value = Mat(dim, dim);
  est.std_error = Mat(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      KahanSum s, s2;
      for (size_t i = 0; i < replicas; ++i) {
        const double y = dev[i * static_cast<size_t>(dim) + static_cast<size_t>(r)] *
                         dev[i * static_cast<size_t>(dim) + static_cast<size_t>(c)];
        s.add(y);
        s2.add(y * y);
      }
      const double m = s.value() / static_cast<double>(replicas);
      const double var =
          std::max(0.0, s2.value() / static_cast<double>(replicas) - m * m);
      est.value.at(r, c) = m;
      est.std_error.at(r, c) = std::sqrt(var / static_cast<double>(replicas));
    }
  }
  return est;
}

ExponentFit fit_loglog(std::span<const double> ns, std::span<const double> values,
                       double zero_floor) {
  if (ns.size() != values.size() || ns.size() < 2) throw UsageError("fit_loglog needs paired points");
  ExponentFit fit;
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  if (vmax <= zero_floor) {
    fit.degenerate = true;
    fit.note = "degenerate (zero curve)";
    return fit;
  }
  // drop the smallest-n point
  size_t skip = 0;
  for (size_t i = 1; i < ns.size(); ++i)
    if (ns[i] < ns[skip]) skip = i;
  std::vector<double> lx, ly;
  for (size_t i = 0; i < ns.size(); ++i) {
    if (i == skip) continue;
    if (values[i] <= 0.0) {
      fit.note = "mixed zero values; zero points excluded from fit";
      continue;
    }
    fit.ns.push_back(ns[i]);
    fit.values.push_back(values[i]);
    lx.push_back(std::log(ns[i]));
    ly.push_back(std::log(values[i]));
  }
  if (lx.size() < 2) {
    fit.degenerate = true;
    fit.note = "degenerate (zero curve)";
    return fit;
  }
  const size_t k = lx.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < k; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.alpha_hat = 0.5 * fit.slope;
  double ss_res = 0.0;
  for (size_t i = 0; i < k; ++i) {
    const double r = ly[i] - (my + fit.slope * (lx[i] - mx));
    ss_res += r * r;
  }
  if (k > 2) fit.half_width = 1.96 * std::sqrt(ss_res / static_cast<double>(k - 2) / sxx);
  const double decades = (lx.back() - lx.front()) / std::log(10.0);
  if (k < 5 || std::abs(decades) < 1.5)
    fit.note = "insufficient span: need >= 5 points over >= 1.5 decades";
  return fit;
}

QuenchedVarianceCurve quenched_variance_curve(const EnvironmentSpec& spec,
                                              std::span<const size_t> n_grid,
                                              size_t env_replicas, std::span<const double> v,
                                              std::uint64_t master_seed,
                                              const QuenchedMeanOptions& opts, int workers) {
  if (n_grid.empty()) throw UsageError("quenched_variance_curve needs a nonempty n grid");
  if (env_replicas < 1) throw UsageError("quenched_variance_curve needs >= 1 environment");
  const int dim = spec.dim;
  const size_t n_max = *std::max_element(n_grid.begin(), n_grid.end());

  QuenchedVarianceCurve curve;
  curve.measure_label =
      "fresh-environment sampling law (not the environment chain's invariant law)";
  curve.ns.assign(n_grid.begin(), n_grid.end());
  std::sort(curve.ns.begin(), curve.ns.end());
  curve.values.assign(curve.ns.size(), 0.0);

  std::vector<double> per_env(env_replicas * curve.ns.size());
  std::vector<double> pruned(env_replicas, 0.0);
  parallel_replicas(env_replicas, workers, [&](size_t r) {
    EnvironmentView env = annealed_environment(spec, master_seed, r);
    QuenchedMeanResult qm = quenched_mean(env, n_max, opts);
    pruned[r] = qm.pruned_mass;
    for (size_t gi = 0; gi < curve.ns.size(); ++gi) {
      const size_t nk = static_cast<size_t>(curve.ns[gi]);
      auto mean = qm.mean_at(nk);
      double dev2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double d = mean[static_cast<size_t>(c)] -
                         static_cast<double>(nk) * v[static_cast<size_t>(c)];
        dev2 += d * d;
      }
      per_env[r * curve.ns.size() + gi] = dev2;
    }
  });
  for (size_t r = 0; r < env_replicas; ++r)
    for (size_t gi = 0; gi < curve.ns.size(); ++gi)
      curve.values[gi] += per_env[r * curve.ns.size() + gi] / static_cast<double>(env_replicas);
  curve.max_pruned_mass = *std::max_element(pruned.begin(), pruned.end());

  curve.fit = fit_loglog(curve.ns, curve.values);
  return curve;
}

SmallSetReport check_small_set(const PhaseChain& chain, int l_max, std::optional<double> lambda,
                               std::span<const double> mu) {
  const int n = chain.phases();
  std::vector<double> mu_used(mu.begin(), mu.end());
  if (mu_used.empty()) mu_used.assign(static_cast<size_t>(n), 1.0 / static_cast<double>(n));
  if (static_cast<int>(mu_used.size()) != n)
    throw UsageError("mu must be a probability vector over phases");
  double msum = 0.0;
  for (double m : mu_used) {
    if (!(m >= 0.0)) throw UsageError("mu entries must be nonnegative");
    msum += m;
  }
  if (std::abs(msum - 1.0) > 1e-10) throw UsageError("mu must sum to 1");

  SmallSetReport rep;
  rep.mu = mu_used;

  auto feasible_lambda = [&](const Mat& pl) {
    double lam = 1.0;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        if (mu_used[static_cast<size_t>(q)] == 0.0) continue;
        lam = std::min(lam, pl.at(p, q) / mu_used[static_cast<size_t>(q)]);
      }
    return std::max(0.0, lam);
  };
  auto verify = [&](const Mat& pl, double lam) {
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        if (pl.at(p, q) < lam * mu_used[static_cast<size_t>(q)] - 1e-12) return false;
    return true;
  };

  if (lambda.has_value()) {
    if (!(*lambda > 0.0 && *lambda <= 1.0)) throw UsageError("lambda must be in (0, 1]");
    if (l_max < 1) throw UsageError("l must be >= 1");
    Mat pl = chain.transition;
    for (int l = 1; l < l_max; ++l) pl = mat_mul(pl, chain.transition);
    rep.l = l_max;  // interpreted as the requested l
    rep.lambda = *lambda;
    rep.found = rep.verified = verify(pl, *lambda);
    rep.detail = rep.found ? "supplied (l, lambda, mu) verified on all phase pairs"
                           : "supplied (l, lambda, mu) violated; inconclusive for other mu";
    return rep;
  }

  Mat pl = Mat::identity(n);
  for (int l = 1; l <= l_max; ++l) {
    pl = mat_mul(pl, chain.transition);
    const double lam = feasible_lambda(pl);
    rep.lambda_by_l.push_back(lam);
    if (!rep.found && lam > 0.0) {
      rep.found = true;
      rep.l = l;
      rep.lambda = lam;
      rep.verified = verify(pl, lam);
    }
  }
  rep.detail = rep.found
                   ? "minorization holds at the reported (l, lambda) for the given mu"
                   : "no l <= " + std::to_string(l_max) +
                         " works for this mu; inconclusive (other mu may work)";
  return rep;
}

}  // namespace rwre
