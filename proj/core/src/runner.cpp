#include "rwre/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rwre/decomposition.hpp"
#include "rwre/error.hpp"
#include "rwre/estimators.hpp"
#include "rwre/lil.hpp"
#include "rwre/parallel.hpp"
#include "rwre/phase_chain.hpp"
#include "rwre/resolvent.hpp"
#include "rwre/version.hpp"
#include "rwre/walk.hpp"

namespace rwre {

namespace fs = std::filesystem;

namespace {

struct RunFiles {
  TextDoc result;
  std::map<std::string, std::string> extra;  // file name -> content
  Table table{std::vector<std::string>{}};
};

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, 0.5);
}

// drift vector used for centering: exact on finite chains, estimated
// otherwise (labeled in the result document)
std::pair<std::vector<double>, std::string> centering_drift(const ExperimentConfig& cfg) {
  if (cfg.env.finite_chain()) {
    PhaseChain chain = build_phase_chain(cfg.env);
    return {chain.mean_drift, "exact (stationary average over the finite phase chain)"};
  }
  const size_t n = std::min<size_t>(cfg.n_max(), 10000);
  DriftEstimate est = estimate_drift(cfg.env, std::max<size_t>(cfg.replicas, 200), n,
                                     derive_stream_seed(cfg.master_seed, 0xD21F7, StreamRole::Scratch),
                                     cfg.workers);
  return {est.value, "estimated from " + std::to_string(est.replicas) + " replicas at n = " +
                         std::to_string(n)};
}

RunFiles run_drift(const ExperimentConfig& cfg) {
  RunFiles out;
  DriftEstimate est =
      estimate_drift(cfg.env, cfg.replicas, cfg.n_max(), cfg.master_seed, cfg.workers);
  out.result.add("estimator", std::string("drift"));
  out.result.add("replicas", std::to_string(est.replicas));
  out.result.add("n", std::to_string(cfg.n_max()));
  for (int c = 0; c < cfg.env.dim; ++c) {
    const std::string tag = "[" + std::to_string(c) + "]";
    out.result.add("estimate" + tag, fmt_g(est.value[static_cast<size_t>(c)]));
    out.result.add("std-error" + tag, fmt_g(est.std_error[static_cast<size_t>(c)]));
    if (est.exact) out.result.add("exact" + tag, fmt_g((*est.exact)[static_cast<size_t>(c)]));
  }
  out.table = Table({"coordinate", "estimate", "std_error", "exact"});
  for (int c = 0; c < cfg.env.dim; ++c) {
    out.table.add_row({std::to_string(c), fmt_g(est.value[static_cast<size_t>(c)]),
                       fmt_g(est.std_error[static_cast<size_t>(c)]),
                       est.exact ? fmt_g((*est.exact)[static_cast<size_t>(c)]) : "n/a"});
  }
  return out;
}

RunFiles run_diffusion(const ExperimentConfig& cfg) {
  RunFiles out;
  auto [v, v_label] = centering_drift(cfg);
  DiffusionEstimate est = estimate_diffusion_empirical(cfg.env, cfg.replicas, cfg.n_max(), v,
                                                       cfg.master_seed, cfg.workers);
  out.result.add("estimator", std::string("diffusion-empirical"));
  out.result.add("replicas", std::to_string(est.replicas));
  out.result.add("n", std::to_string(cfg.n_max()));
  out.result.add("centering-drift", v_label);
  for (int r = 0; r < cfg.env.dim; ++r) {
    for (int c = 0; c < cfg.env.dim; ++c) {
      const std::string tag = "[" + std::to_string(r) + "," + std::to_string(c) + "]";
      out.result.add("estimate" + tag, fmt_g(est.value.at(r, c)));
      out.result.add("std-error" + tag, fmt_g(est.std_error.at(r, c)));
    }
  }

  Mat exact;
  bool have_exact = false;
  if (cfg.env.finite_chain()) {
    PhaseChain chain = build_phase_chain(cfg.env);
    ResolventSolution h = solve_limit(chain, centered_drift(chain), chain.dim);
    exact = diffusion_matrix_exact(chain, h);
    have_exact = true;
    out.extra["chain.txt"] = chain.audit_text();
    std::ostringstream dm;
    dm << "diffusion-matrix-exact\n";
    for (int r = 0; r < exact.rows; ++r) {
      for (int c = 0; c < exact.cols; ++c) dm << (c ? " " : "") << fmt_full(exact.at(r, c));
      dm << "\n";
    }
    out.extra["diffusion_exact.txt"] = dm.str();
  }
  out.table = Table({"row", "col", "estimate", "std_error", "exact", "sigma_distance"});
  for (int r = 0; r < cfg.env.dim; ++r) {
    for (int c = 0; c < cfg.env.dim; ++c) {
      const double se = est.std_error.at(r, c);
      std::string exact_s = "n/a", sig_s = "n/a";
      if (have_exact) {
        exact_s = fmt_g(exact.at(r, c));
        sig_s = fmt_g(se > 0.0 ? std::abs(est.value.at(r, c) - exact.at(r, c)) / se : 0.0, 6);
      }
      out.table.add_row({std::to_string(r), std::to_string(c), fmt_g(est.value.at(r, c)),
                         fmt_g(se), exact_s, sig_s});
    }
  }
  return out;
}

RunFiles run_decomposition(const ExperimentConfig& cfg) {
  RunFiles out;
  PhaseChain chain = build_phase_chain(cfg.env);  // throws UnsupportedModelError if infeasible
  const std::vector<double> g = centered_drift(chain);
  const ResolventSolution h = cfg.epsilon > 0.0
                                  ? solve_resolvent(chain, g, chain.dim, cfg.epsilon)
                                  : solve_limit(chain, g, chain.dim);
  const size_t n = cfg.n_max();

  std::vector<double> residuals(cfg.replicas, 0.0), xres(cfg.replicas, 0.0), rmax(cfg.replicas, 0.0);
  parallel_replicas(cfg.replicas, cfg.workers, [&](size_t r) {
    Trajectory traj = simulate_annealed(cfg.env, n, cfg.master_seed, r);
    Decomposition dec = decompose(traj, chain, h, chain.mean_drift);
    residuals[r] = dec.identity_residual;
    double worst = 0.0, rbound = 0.0;
    for (size_t k = 0; k <= n; ++k) {
      auto pos = traj.at(k);
      for (int c = 0; c < chain.dim; ++c) {
        const size_t i = k * static_cast<size_t>(chain.dim) + static_cast<size_t>(c);
        const double lhs = static_cast<double>(pos[c]) -
                           static_cast<double>(k) * chain.mean_drift[static_cast<size_t>(c)];
        const double rhs = dec.W[i] + dec.M[i] + dec.R[i] + dec.eps_Sh[i];
        worst = std::max(worst, std::abs(lhs - rhs));
        rbound = std::max(rbound, std::abs(dec.R[i]));
      }
    }
    xres[r] = worst;
    rmax[r] = rbound;
  });

  out.result.add("estimator", std::string("decomposition"));
  out.result.add("epsilon", fmt_full(cfg.epsilon));
  out.result.add("resolvent-residual", fmt_g(h.residual, 6));
  out.result.add("max-identity-residual", fmt_g(*std::max_element(residuals.begin(), residuals.end()), 6));
  out.result.add("max-X-decomposition-residual", fmt_g(*std::max_element(xres.begin(), xres.end()), 6));
  out.result.add("max-|R|", fmt_g(*std::max_element(rmax.begin(), rmax.end()), 6));
  out.extra["chain.txt"] = chain.audit_text();

  out.table = Table({"replica", "identity_residual", "x_decomposition_residual", "max_R"});
  for (size_t r = 0; r < cfg.replicas; ++r)
    out.table.add_row({std::to_string(r), fmt_g(residuals[r], 6), fmt_g(xres[r], 6), fmt_g(rmax[r], 6)});
  return out;
}

RunFiles run_quenched_variance(const ExperimentConfig& cfg) {
  RunFiles out;
  auto [v, v_label] = centering_drift(cfg);
  QuenchedVarianceCurve curve = quenched_variance_curve(cfg.env, cfg.n_grid, cfg.replicas, v,
                                                        cfg.master_seed, {}, cfg.workers);
  out.result.add("estimator", std::string("quenched-variance"));
  out.result.add("environment-replicas", std::to_string(cfg.replicas));
  out.result.add("centering-drift", v_label);
  out.result.add("environment-measure", curve.measure_label);
  out.result.add("max-pruned-mass", fmt_g(curve.max_pruned_mass, 6));
  if (curve.fit.degenerate) {
    out.result.add("fit", curve.fit.note.empty() ? "degenerate (zero curve)" : curve.fit.note);
  } else {
    out.result.add("fit-slope", fmt_g(curve.fit.slope, 6));
    out.result.add("alpha-hat", fmt_g(curve.fit.alpha_hat, 6));
    out.result.add("fit-half-width", fmt_g(curve.fit.half_width, 6));
    if (!curve.fit.note.empty()) out.result.add("fit-note", curve.fit.note);
  }
  out.table = Table({"n", "mean_sq_deviation"});
  for (size_t i = 0; i < curve.ns.size(); ++i)
    out.table.add_row({fmt_g(curve.ns[i], 12), fmt_g(curve.values[i], 12)});
  return out;
}

RunFiles run_lil(const ExperimentConfig& cfg) {
  RunFiles out;
  auto [v, v_label] = centering_drift(cfg);
  const size_t n = cfg.n_max();
  const size_t grid_size = cfg.n_grid.size();

  double trace_d = 0.0;
  if (cfg.env.finite_chain()) {
    PhaseChain chain = build_phase_chain(cfg.env);
    ResolventSolution h = solve_limit(chain, centered_drift(chain), chain.dim);
    Mat d = diffusion_matrix_exact(chain, h);
    for (int c = 0; c < d.rows; ++c) trace_d += d.at(c, c);
  }

  if (cfg.quenched_center && n > 20000)
    throw ResourceError("quenched centering propagates the full site distribution; n must be <= 20000");

  std::vector<double> values(cfg.replicas * grid_size);
  std::vector<double> run_at(cfg.replicas * grid_size);  // running max at each grid point
  std::vector<double> run_max(cfg.replicas, 0.0);
  parallel_replicas(cfg.replicas, cfg.workers, [&](size_t r) {
    EnvironmentView env = annealed_environment(cfg.env, cfg.master_seed, r);
    std::vector<double> center;  // quenched centering, optional
    if (cfg.quenched_center) center = quenched_mean(env, n).means;
    // running max over every step from the first grid point (grid
    // refinement leaves it unchanged at shared points)
    size_t gi = 0;
    double running = 0.0;
    walk_quenched(env, n, annealed_walk_seed(cfg.master_seed, r),
                  [&](size_t k, std::span<const Coord> pos) {
                    if (k < cfg.n_grid.front()) return;
                    double dev2 = 0.0;
                    for (int c = 0; c < cfg.env.dim; ++c) {
                      const double ctr =
                          cfg.quenched_center
                              ? center[k * static_cast<size_t>(cfg.env.dim) + static_cast<size_t>(c)]
                              : static_cast<double>(k) * v[static_cast<size_t>(c)];
                      const double d = static_cast<double>(pos[static_cast<size_t>(c)]) - ctr;
                      dev2 += d * d;
                    }
                    const double stat = std::sqrt(dev2) /
                                        std::sqrt(2.0 * static_cast<double>(k) *
                                                  safe_loglog(static_cast<double>(k)));
                    running = std::max(running, stat);
                    if (gi < grid_size && k == cfg.n_grid[gi]) {
                      values[r * grid_size + gi] = stat;
                      run_at[r * grid_size + gi] = running;
                      run_max[r] = running;
                      ++gi;
                    }
                  });
  });

  out.result.add("estimator", std::string("lil"));
  out.result.add("replicas", std::to_string(cfg.replicas));
  out.result.add("centering", cfg.quenched_center ? "quenched mean E_0^w X_k" : "n v, " + v_label);
  if (trace_d > 0.0) {
    out.result.add("trace-diffusion", fmt_g(trace_d));
    out.result.add("sqrt-trace-diffusion", fmt_g(std::sqrt(trace_d)));
  }
  std::vector<double> rm_sorted = run_max;
  std::sort(rm_sorted.begin(), rm_sorted.end());
  out.result.add("running-max-median", fmt_g(quantile_sorted(rm_sorted, 0.5), 6));
  out.result.add("running-max-p95", fmt_g(quantile_sorted(rm_sorted, 0.95), 6));
  out.result.add("running-max-max", fmt_g(rm_sorted.back(), 6));

  out.table = Table({"n", "stat_median", "stat_p95", "stat_max", "running_max_median"});
  for (size_t gi = 0; gi < grid_size; ++gi) {
    std::vector<double> col(cfg.replicas), rmx(cfg.replicas);
    for (size_t r = 0; r < cfg.replicas; ++r) {
      col[r] = values[r * grid_size + gi];
      rmx[r] = run_at[r * grid_size + gi];
    }
    std::sort(col.begin(), col.end());
    std::sort(rmx.begin(), rmx.end());
    out.table.add_row({std::to_string(cfg.n_grid[gi]), fmt_g(quantile_sorted(col, 0.5), 6),
                       fmt_g(quantile_sorted(col, 0.95), 6), fmt_g(col.back(), 6),
                       fmt_g(quantile_sorted(rmx, 0.5), 6)});
  }
  return out;
}

RunFiles run_cluster(const ExperimentConfig& cfg) {
  RunFiles out;
  auto [v, v_label] = centering_drift(cfg);
  const size_t n = cfg.n_max();
  const int dim = cfg.env.dim;

  // probes: the two canonical Strassen elements plus any loaded files
  std::vector<PiecewisePath> probes;
  probes.push_back(line_probe(dim, 0));
  probes.push_back(diagonal_probe(dim));
  std::vector<std::string> probe_names = {"t*e_1", "(t/sqrt(d))*sum(e_i)"};
  for (const std::string& pf : cfg.probe_files) {
    std::ifstream in(pf);
    if (!in) throw UsageError("cannot open probe file " + pf);
    probes.push_back(read_probe(in));
    probe_names.push_back(pf);
  }

  const PhaseChain* chain_ptr = nullptr;
  PhaseChain chain;
  ResolventSolution h;
  if (cfg.env.finite_chain()) {
    chain = build_phase_chain(cfg.env);
    h = solve_limit(chain, centered_drift(chain), chain.dim);
    chain_ptr = &chain;
  }

  if (cfg.quenched_center && n > 20000)
    throw ResourceError("quenched centering propagates the full site distribution; n must be <= 20000");

  std::vector<StrassenReport> reports(cfg.replicas);
  parallel_replicas(cfg.replicas, cfg.workers, [&](size_t r) {
    EnvironmentView env = annealed_environment(cfg.env, cfg.master_seed, r);
    Trajectory traj = simulate_quenched(env, n, annealed_walk_seed(cfg.master_seed, r));
    CovarianceTrack track = conditional_covariance(traj, env, chain_ptr, chain_ptr ? &h : nullptr);
    std::vector<double> center;
    if (cfg.quenched_center) center = quenched_mean(env, n).means;
    reports[r] = strassen_report(traj, v, track, cfg.n_grid, probes, center);
    reports[r].replica = r;
  });

  out.result.add("estimator", std::string("cluster"));
  out.result.add("replicas", std::to_string(cfg.replicas));
  out.result.add("centering",
                 cfg.quenched_center ? "quenched mean E_0^w X_k" : "n v, " + v_label);
  for (size_t pi = 0; pi < probes.size(); ++pi) {
    std::vector<double> final_min(cfg.replicas);
    for (size_t r = 0; r < cfg.replicas; ++r) final_min[r] = reports[r].probe_min[pi].back();
    out.result.add("probe-" + std::to_string(pi) + "-name", probe_names[pi]);
    out.result.add("probe-" + std::to_string(pi) + "-min-distance-median",
                   fmt_g(median_of(final_min), 6));
  }

  // flat Strassen table: per n, replica medians of the statistic, the
  // K-distance bound, its running min, and per-probe running min distances
  std::vector<std::string> cols = {"n", "lil_stat_median", "k_dist_median", "k_dist_runmin_median"};
  for (size_t pi = 0; pi < probes.size(); ++pi)
    cols.push_back("probe" + std::to_string(pi) + "_min_median");
  out.table = Table(cols);
  for (size_t gi = 0; gi < cfg.n_grid.size(); ++gi) {
    std::vector<double> stat(cfg.replicas), kd(cfg.replicas), kdmin(cfg.replicas);
    for (size_t r = 0; r < cfg.replicas; ++r) {
      stat[r] = reports[r].lil_value[gi];
      kd[r] = reports[r].k_dist[gi];
      double m = reports[r].k_dist[0];
      for (size_t gj = 1; gj <= gi; ++gj) m = std::min(m, reports[r].k_dist[gj]);
      kdmin[r] = m;
    }
    std::vector<std::string> row = {std::to_string(cfg.n_grid[gi]), fmt_g(median_of(stat), 6),
                                    fmt_g(median_of(kd), 6), fmt_g(median_of(kdmin), 6)};
    for (size_t pi = 0; pi < probes.size(); ++pi) {
      std::vector<double> pm(cfg.replicas);
      for (size_t r = 0; r < cfg.replicas; ++r) pm[r] = reports[r].probe_min[pi][gi];
      row.push_back(fmt_g(median_of(pm), 6));
    }
    out.table.add_row(row);
  }

  // per-replica detail table
  Table detail({"replica", "n", "lil_stat", "k_dist", "probe0_min", "probe1_min"});
  for (size_t r = 0; r < cfg.replicas; ++r) {
    for (size_t gi = 0; gi < cfg.n_grid.size(); ++gi) {
      detail.add_row({std::to_string(r), std::to_string(cfg.n_grid[gi]),
                      fmt_g(reports[r].lil_value[gi], 6), fmt_g(reports[r].k_dist[gi], 6),
                      fmt_g(reports[r].probe_min[0][gi], 6), fmt_g(reports[r].probe_min[1][gi], 6)});
    }
  }
  out.extra["replicas.tsv"] = detail.to_tsv();
  return out;
}

RunFiles run_small_set(const ExperimentConfig& cfg) {
  RunFiles out;
  PhaseChain chain = build_phase_chain(cfg.env);
  SmallSetReport rep = check_small_set(chain, cfg.small_set_lmax);
  out.result.add("estimator", std::string("small-set"));
  out.result.add("l-max", std::to_string(cfg.small_set_lmax));
  out.result.add("found", rep.found ? "yes" : "no");
  if (rep.found) {
    out.result.add("l", std::to_string(rep.l));
    out.result.add("lambda", fmt_g(rep.lambda));
    out.result.add("verified", rep.verified ? "yes" : "no");
  }
  out.result.add("detail", rep.detail);
  out.extra["chain.txt"] = chain.audit_text();
  out.table = Table({"l", "lambda_max_uniform_mu"});
  for (size_t i = 0; i < rep.lambda_by_l.size(); ++i)
    out.table.add_row({std::to_string(i + 1), fmt_g(rep.lambda_by_l[i])});
  return out;
}

}  // namespace

std::string science_text(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.workers = 1;
  c.out_dir = "";
  std::string text = c.to_text();
  // drop execution-detail lines entirely
  std::istringstream in(text);
  std::ostringstream keep;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("workers ", 0) == 0 || line.rfind("out ", 0) == 0) continue;
    keep << line << "\n";
  }
  return keep.str();
}

std::string seed_scheme_description() {
  return "env[r]=mix64(mix64(mix64(master)^r)^0x656e76) walk[r]=mix64(mix64(mix64(master)^r)^0x776c6b)";
}

RunOutcome run_experiment(ExperimentConfig cfg, const RunnerOptions& opts) {
  if (opts.workers) cfg.workers = *opts.workers;
  if (opts.out_dir) cfg.out_dir = *opts.out_dir;
  if (opts.seed) cfg.master_seed = *opts.seed;
  cfg.validate();

  const std::string hash = hex16(fnv1a64(science_text(cfg)));
  const fs::path dir =
      fs::path(cfg.out_dir) / (std::string(experiment_kind_name(cfg.kind)) + "-" + hash);
  const fs::path manifest_path = dir / "manifest.txt";

  if (fs::exists(manifest_path) && !opts.restart) {
    Manifest m = Manifest::from_file(manifest_path);
    if (m.status == "complete") {
      return {dir, m, true};
    }
    // incomplete leftover: restart
  }
  fs::remove_all(dir);
  fs::create_directories(dir);

  Manifest manifest;
  manifest.config_hash = hash;
  manifest.version = kVersion;
  manifest.status = "incomplete";
  manifest.workers = cfg.workers;
  manifest.seed_scheme = seed_scheme_description();
  manifest.write(manifest_path);

  const auto t0 = std::chrono::steady_clock::now();
  RunFiles files;
  switch (cfg.kind) {
    case ExperimentKind::Drift: files = run_drift(cfg); break;
    case ExperimentKind::Diffusion: files = run_diffusion(cfg); break;
    case ExperimentKind::Decomposition: files = run_decomposition(cfg); break;
    case ExperimentKind::QuenchedVariance: files = run_quenched_variance(cfg); break;
    case ExperimentKind::Lil: files = run_lil(cfg); break;
    case ExperimentKind::Cluster: files = run_cluster(cfg); break;
    case ExperimentKind::SmallSet: files = run_small_set(cfg); break;
  }
  const auto t1 = std::chrono::steady_clock::now();

  TextDoc header;
  header.add("rwre-result", std::string("v1"));
  header.add("experiment", experiment_kind_name(cfg.kind));
  header.add("config-hash", hash);
  header.add("model-hash", hex16(cfg.env.content_hash()));
  header.add("master-seed", std::to_string(cfg.master_seed));
  header.add("seed-scheme", seed_scheme_description());
  const std::string result_text = header.str() + files.result.str();
  const std::string table_text = files.table.to_tsv();

  write_text_file(dir / "result.txt", result_text);
  write_text_file(dir / "table.tsv", table_text);
  write_text_file(dir / "config.txt", cfg.to_text());
  manifest.file_digests["result.txt"] = hex16(fnv1a64(result_text));
  manifest.file_digests["table.tsv"] = hex16(fnv1a64(table_text));
  for (const auto& [name, content] : files.extra) {
    write_text_file(dir / name, content);
    manifest.file_digests[name] = hex16(fnv1a64(content));
  }

  manifest.status = "complete";
  manifest.elapsed_seconds = std::chrono::duration<double>(t1 - t0).count();
  manifest.write(manifest_path);
  return {dir, manifest, false};
}

}  // namespace rwre
