#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rwre/estimators.hpp"
#include "rwre/walk.hpp"

namespace rwre {

// log log x with the small-argument convention: 1 for 0 < x <= e^e.
double safe_loglog(double x);

// Continuous piecewise-linear function [0,1] -> R^d through (t_k, v_k).
struct PiecewisePath {
  int dim = 0;
  std::vector<double> t;       // strictly increasing, t.front() = 0
  std::vector<double> values;  // points x dim, row-major

  size_t points() const { return t.size(); }
  std::span<const double> value(size_t i) const {
    return {values.data() + i * static_cast<size_t>(dim), static_cast<size_t>(dim)};
  }
  void eval(double time, std::span<double> out) const;
};

// The rescaled path xi_n on the intrinsic clock t_k = v_k^2 / v_n^2.
struct RescaledPath {
  PiecewisePath path;
  double normalizer = 0.0;  // sqrt(2 v_n^2 loglog v_n^2)
  double vn2 = 0.0;
  size_t n = 0;
};

// Degenerate clock segments (v_{k+1}^2 = v_k^2) are collapsed to a point,
// keeping the latest value at that time. The default centering is the
// annealed k v; passing quenched_center ((n+1) x dim, e.g. the propagated
// quenched means) switches to the random-centering variant.
RescaledPath build_xi(const Trajectory& traj, std::span<const double> v,
                      const CovarianceTrack& track,
                      std::span<const double> quenched_center = {});

// Cameron-Martin energy sum |df_k|^2 / dt_k; exact for piecewise-linear f.
double cm_energy(const PiecewisePath& f);

double sup_norm(const PiecewisePath& f);

// 0 when energy <= 1; otherwise the radial-scaling upper bound
// ||f||_inf (1 - 1/sqrt(E)) on the sup-distance to the Strassen set K.
double k_distance_upper(const PiecewisePath& f);

// Sup-distance on the merged breakpoint grid plus uniform guard points;
// exact for piecewise-linear pairs.
double sup_distance(const PiecewisePath& a, const PiecewisePath& b, int uniform_points = 1000);

struct LilSeries {
  std::vector<size_t> ns;
  std::vector<double> values;       // |X_n - n v| / sqrt(2 n loglog n)
  std::vector<double> running_max;
};

LilSeries lil_statistic(const Trajectory& traj, std::span<const double> v,
                        std::span<const size_t> n_grid);

// Per-probe minimum over the supplied paths of sup_t |xi(t) - f(t)|.
// Probes must satisfy cm_energy <= 1 + 1e-12.
std::vector<double> cluster_probe(std::span<const RescaledPath> paths,
                                  std::span<const PiecewisePath> probes);

PiecewisePath line_probe(int dim, int axis);  // f(t) = t e_axis
PiecewisePath diagonal_probe(int dim);        // f(t) = (t/sqrt(d)) sum_i e_i
PiecewisePath zero_probe(int dim);

// Flat probe file: "# dim d" header then "t v_1 .. v_d" rows.
void write_probe(const PiecewisePath& f, std::ostream& out);
PiecewisePath read_probe(std::istream& in);

// Random element of K: piecewise-linear path from 0 scaled to unit energy.
PiecewisePath random_unit_energy_path(std::uint64_t seed, int dim, int segments);

// One replica's Strassen diagnostics over an n-grid: per-n K-distance
// upper bounds of xi_n, the LIL statistic with its running max, and
// per-probe running minimal sup-distances.
struct StrassenReport {
  size_t replica = 0;
  std::uint64_t walk_seed = 0;
  std::vector<size_t> ns;
  std::vector<double> k_dist;           // per-n k_distance_upper(xi_n)
  std::vector<double> lil_value;        // per-n statistic
  std::vector<double> lil_running_max;
  std::vector<std::vector<double>> probe_dist;  // [probe][grid index]: sup distance at n
  std::vector<std::vector<double>> probe_min;   // [probe][grid index]: min over n' <= n
};

StrassenReport strassen_report(const Trajectory& traj, std::span<const double> v,
                               const CovarianceTrack& track, std::span<const size_t> n_grid,
                               std::span<const PiecewisePath> probes,
                               std::span<const double> quenched_center = {});

}  // namespace rwre
