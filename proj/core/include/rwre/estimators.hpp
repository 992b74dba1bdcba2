#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwre/decomposition.hpp"
#include "rwre/env.hpp"
#include "rwre/linalg.hpp"
#include "rwre/phase_chain.hpp"
#include "rwre/walk.hpp"

namespace rwre {

// Cumulative predictable covariance A_k of the martingale increments and
// its trace v_k^2 (the intrinsic clock of the rescaled path).
struct CovarianceTrack {
  int dim = 0;
  std::vector<double> traces;    // v_k^2 for k = 0..n, v_0^2 = 0
  Mat a_final;                   // A_n
  std::vector<Mat> a_steps;      // per-step cumulative matrices when requested
  std::string label;             // which increment the track conditions on

  double vn2() const { return traces.empty() ? 0.0 : traces.back(); }
};

// Closed-form per-step conditional covariance from the current site kernel.
// With a chain and limit corrector it conditions on the full increment
// z = w + m; without them, on the w-increment only, and the label says so.
CovarianceTrack conditional_covariance(const Trajectory& traj, const EnvironmentView& env,
                                       const PhaseChain* chain = nullptr,
                                       const ResolventSolution* h = nullptr,
                                       bool store_matrices = false);

struct DriftEstimate {
  std::vector<double> value;  // mean over replicas of X_n / n
  std::vector<double> std_error;
  std::optional<std::vector<double>> exact;  // stationary-average drift on finite chains
  size_t replicas = 0;
};

DriftEstimate estimate_drift(const EnvironmentSpec& spec, size_t replicas, size_t n,
                             std::uint64_t master_seed, int workers = 1);

// Operator norm (largest singular value), power iteration on A^T A with
// tolerance 1e-10.
double matrix_norm(const Mat& a);

struct DiffusionEstimate {
  Mat value;      // empirical covariance of (X_n - n v)/sqrt(n)
  Mat std_error;  // per-entry standard errors
  size_t replicas = 0;
};

DiffusionEstimate estimate_diffusion_empirical(const EnvironmentSpec& spec, size_t replicas,
                                               size_t n, std::span<const double> v,
                                               std::uint64_t master_seed, int workers = 1);

struct ExponentFit {
  std::vector<double> ns, values;  // the retained fit points
  bool degenerate = false;         // zero curve, no slope to fit
  double slope = 0.0;              // log-log slope of the squared deviation
  double alpha_hat = 0.0;          // slope / 2
  double half_width = 0.0;         // 1.96 x OLS slope standard error
  std::string note;
};

// OLS on log-log points; drops the smallest-n point (transient) before
// fitting. A curve whose largest value stays at or below zero_floor is
// indistinguishable from propagation rounding and reported degenerate.
ExponentFit fit_loglog(std::span<const double> ns, std::span<const double> values,
                       double zero_floor = 1e-16);

struct QuenchedVarianceCurve {
  std::vector<double> ns;
  std::vector<double> values;  // mean over environments of |E_0^w X_n - n v|^2
  ExponentFit fit;
  std::string measure_label;   // environment law the average was taken under
  double max_pruned_mass = 0.0;  // worst propagation mass loss across environments
};

QuenchedVarianceCurve quenched_variance_curve(const EnvironmentSpec& spec,
                                              std::span<const size_t> n_grid,
                                              size_t env_replicas, std::span<const double> v,
                                              std::uint64_t master_seed,
                                              const QuenchedMeanOptions& opts = {},
                                              int workers = 1);

struct SmallSetReport {
  bool found = false;
  int l = 0;
  double lambda = 0.0;
  std::vector<double> mu;
  bool verified = false;             // inequality re-checked on all phase pairs
  std::vector<double> lambda_by_l;   // maximal feasible lambda for l = 1..l_max
  std::string detail;
};

// Verifies the l-step minorization Pi^l(p, .) >= lambda mu(.). With lambda
// and mu given, checks them; otherwise reports the maximal feasible lambda
// for uniform mu and the smallest l <= l_max with lambda > 0. A failed
// search is inconclusive (other mu may work).
SmallSetReport check_small_set(const PhaseChain& chain, int l_max = 8,
                               std::optional<double> lambda = std::nullopt,
                               std::span<const double> mu = {});

}  // namespace rwre
