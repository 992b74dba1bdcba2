#include "rwre/lil.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "rwre/error.hpp"
#include "rwre/rng.hpp"

namespace rwre {

namespace {

const double kEE = std::exp(std::exp(1.0));

double segment_norm2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = b[i] - a[i];
    s += d * d;
  }
  return s;
}

}  // namespace

double safe_loglog(double x) {
  if (!(x > 0.0)) throw UsageError("safe_loglog needs a positive argument");
  if (x <= kEE) return 1.0;
  return std::log(std::log(x));
}

void PiecewisePath::eval(double time, std::span<double> out) const {
  const size_t k = points();
  if (k == 0) throw UsageError("empty path");
  if (time <= t.front()) {
    auto v0 = value(0);
    std::copy(v0.begin(), v0.end(), out.begin());
    return;
  }
  if (time >= t.back()) {
    auto vn = value(k - 1);
    std::copy(vn.begin(), vn.end(), out.begin());
    return;
  }
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const size_t hi = static_cast<size_t>(it - t.begin());
  const size_t lo = hi - 1;
  const double w = (time - t[lo]) / (t[hi] - t[lo]);
  auto a = value(lo);
  auto b = value(hi);
  for (int c = 0; c < dim; ++c)
    out[static_cast<size_t>(c)] = a[static_cast<size_t>(c)] +
                                  w * (b[static_cast<size_t>(c)] - a[static_cast<size_t>(c)]);
}

RescaledPath build_xi(const Trajectory& traj, std::span<const double> v,
                      const CovarianceTrack& track, std::span<const double> quenched_center) {
  const int dim = traj.dim;
  if (static_cast<int>(v.size()) != dim) throw UsageError("build_xi: drift dimension mismatch");
  const size_t n = traj.steps();
  if (track.traces.size() != n + 1)
    throw UsageError("build_xi: covariance track does not match the trajectory");
  if (!quenched_center.empty() && quenched_center.size() != (n + 1) * static_cast<size_t>(dim))
    throw UsageError("build_xi: quenched centering must cover every step");
  const double vn2 = track.vn2();
  if (!(vn2 > 0.0))
    throw UsageError("build_xi: degenerate model, v_n^2 = 0 (no martingale variance)");

  RescaledPath xi;
  xi.vn2 = vn2;
  xi.n = n;
  xi.normalizer = std::sqrt(2.0 * vn2 * safe_loglog(vn2));
  xi.path.dim = dim;
  xi.path.t.reserve(n + 1);
  xi.path.values.reserve((n + 1) * static_cast<size_t>(dim));

  for (size_t k = 0; k <= n; ++k) {
    const double tk = track.traces[k] / vn2;
    auto pos = traj.at(k);
    const bool collapse = !xi.path.t.empty() && !(tk > xi.path.t.back());
    if (!collapse) {
      xi.path.t.push_back(tk);
      xi.path.values.resize(xi.path.values.size() + static_cast<size_t>(dim));
    }
    double* out = xi.path.values.data() + xi.path.values.size() - static_cast<size_t>(dim);
    for (int c = 0; c < dim; ++c) {
      const double center =
          quenched_center.empty()
              ? static_cast<double>(k) * v[static_cast<size_t>(c)]
              : quenched_center[k * static_cast<size_t>(dim) + static_cast<size_t>(c)];
      out[c] = (static_cast<double>(pos[c]) - center) / xi.normalizer;
    }
  }
  return xi;
}

double cm_energy(const PiecewisePath& f) {
  if (f.points() < 1) throw UsageError("empty path");
  double e = 0.0;
  for (size_t k = 0; k + 1 < f.points(); ++k) {
    const double dt = f.t[k + 1] - f.t[k];
    const double d2 = segment_norm2(f.value(k), f.value(k + 1));
    if (dt <= 0.0) {
      if (d2 > 0.0) throw UsageError("malformed path: zero-length segment with a nonzero jump");
      continue;
    }
    e += d2 / dt;
  }
  return e;
}

double sup_norm(const PiecewisePath& f) {
  double best = 0.0;
  for (size_t k = 0; k < f.points(); ++k) {
    double s = 0.0;
    for (double v : f.value(k)) s += v * v;
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

double k_distance_upper(const PiecewisePath& f) {
  const double e = cm_energy(f);
  if (e <= 1.0) return 0.0;
  return sup_norm(f) * (1.0 - 1.0 / std::sqrt(e));
}

namespace {

// forward-only interpolation cursor; amortized O(1) when queried with
// nondecreasing times
struct PathCursor {
  const PiecewisePath& f;
  size_t seg = 0;

  void eval(double time, std::span<double> out) {
    const size_t last = f.points() - 1;
    while (seg < last && f.t[seg + 1] <= time) ++seg;
    auto a = f.value(seg);
    if (seg == last || time <= f.t[seg]) {
      std::copy(a.begin(), a.end(), out.begin());
      return;
    }
    auto b = f.value(seg + 1);
    const double w = (time - f.t[seg]) / (f.t[seg + 1] - f.t[seg]);
    for (int c = 0; c < f.dim; ++c)
      out[static_cast<size_t>(c)] = a[static_cast<size_t>(c)] +
                                    w * (b[static_cast<size_t>(c)] - a[static_cast<size_t>(c)]);
  }
};

}  // namespace

double sup_distance(const PiecewisePath& a, const PiecewisePath& b, int uniform_points) {
  if (a.dim != b.dim) throw UsageError("sup_distance: dimension mismatch");
  // small side of the merged grid: b's breakpoints plus uniform guards
  std::vector<double> extra;
  extra.reserve(b.points() + static_cast<size_t>(uniform_points) + 1);
  extra.insert(extra.end(), b.t.begin(), b.t.end());
  for (int i = 0; i <= uniform_points; ++i)
    extra.push_back(static_cast<double>(i) / static_cast<double>(uniform_points));
  std::sort(extra.begin(), extra.end());
  extra.erase(std::unique(extra.begin(), extra.end()), extra.end());

  PathCursor ca{a}, cb{b};
  std::vector<double> va(static_cast<size_t>(a.dim)), vb(static_cast<size_t>(b.dim));
  double best = 0.0;
  size_t ia = 0, ie = 0;
  while (ia < a.points() || ie < extra.size()) {
    double tt;
    if (ie >= extra.size() || (ia < a.points() && a.t[ia] <= extra[ie])) {
      tt = a.t[ia];
      if (ie < extra.size() && extra[ie] == tt) ++ie;
      ++ia;
    } else {
      tt = extra[ie];
      ++ie;
    }
    ca.eval(tt, va);
    cb.eval(tt, vb);
    best = std::max(best, segment_norm2(va, vb));
  }
  return std::sqrt(best);
}

LilSeries lil_statistic(const Trajectory& traj, std::span<const double> v,
                        std::span<const size_t> n_grid) {
  const int dim = traj.dim;
  for (size_t nk : n_grid) {
    if (nk < 1 || nk > traj.steps())
      throw UsageError("lil_statistic: grid point " + std::to_string(nk) +
                       " outside the trajectory");
  }
  LilSeries out;
  if (n_grid.empty()) return out;
  // the running max scans every step from the first grid point, so grid
  // refinement cannot change it at shared points
  double running = 0.0;
  size_t gi = 0;
  for (size_t k = n_grid.front(); k <= n_grid.back(); ++k) {
    auto pos = traj.at(k);
    double dev2 = 0.0;
    for (int c = 0; c < dim; ++c) {
      const double d = static_cast<double>(pos[c]) -
                       static_cast<double>(k) * v[static_cast<size_t>(c)];
      dev2 += d * d;
    }
    const double value =
        std::sqrt(dev2) /
        std::sqrt(2.0 * static_cast<double>(k) * safe_loglog(static_cast<double>(k)));
    running = std::max(running, value);
    if (k == n_grid[gi]) {
      out.ns.push_back(k);
      out.values.push_back(value);
      out.running_max.push_back(running);
      ++gi;
    }
  }
  return out;
}

std::vector<double> cluster_probe(std::span<const RescaledPath> paths,
                                  std::span<const PiecewisePath> probes) {
  for (const PiecewisePath& f : probes) {
    if (cm_energy(f) > 1.0 + 1e-12)
      throw UsageError("cluster_probe: probe outside the Strassen set (energy > 1)");
  }
  std::vector<double> best(probes.size(), std::numeric_limits<double>::infinity());
  for (const RescaledPath& xi : paths) {
    for (size_t i = 0; i < probes.size(); ++i) {
      best[i] = std::min(best[i], sup_distance(xi.path, probes[i]));
    }
  }
  return best;
}

PiecewisePath line_probe(int dim, int axis) {
  PiecewisePath f;
  f.dim = dim;
  f.t = {0.0, 1.0};
  f.values.assign(2 * static_cast<size_t>(dim), 0.0);
  f.values[static_cast<size_t>(dim) + static_cast<size_t>(axis)] = 1.0;
  return f;
}

PiecewisePath diagonal_probe(int dim) {
  PiecewisePath f;
  f.dim = dim;
  f.t = {0.0, 1.0};
  f.values.assign(2 * static_cast<size_t>(dim), 0.0);
  for (int c = 0; c < dim; ++c)
    f.values[static_cast<size_t>(dim) + static_cast<size_t>(c)] = 1.0 / std::sqrt(dim);
  return f;
}

PiecewisePath zero_probe(int dim) {
  PiecewisePath f;
  f.dim = dim;
  f.t = {0.0, 1.0};
  f.values.assign(2 * static_cast<size_t>(dim), 0.0);
  return f;
}

void write_probe(const PiecewisePath& f, std::ostream& out) {
  out << "# dim " << f.dim << "\n";
  char buf[40];
  for (size_t k = 0; k < f.points(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", f.t[k]);
    out << buf;
    for (double v : f.value(k)) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << " " << buf;
    }
    out << "\n";
  }
}

PiecewisePath read_probe(std::istream& in) {
  PiecewisePath f;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line);
      std::string hash, key;
      hs >> hash >> key;
      if (key == "dim") hs >> f.dim;
      continue;
    }
    if (f.dim == 0) throw ParseError("probe file needs a '# dim d' header first", line_no);
    std::istringstream ls(line);
    double tv;
    if (!(ls >> tv)) throw ParseError("bad probe row", line_no);
    f.t.push_back(tv);
    for (int c = 0; c < f.dim; ++c) {
      double x;
      if (!(ls >> x)) throw ParseError("probe row has too few coordinates", line_no);
      f.values.push_back(x);
    }
  }
  if (f.points() < 2) throw ParseError("probe needs at least two breakpoints");
  if (f.t.front() != 0.0) throw ParseError("probe must start at t = 0");
  return f;
}

StrassenReport strassen_report(const Trajectory& traj, std::span<const double> v,
                               const CovarianceTrack& track, std::span<const size_t> n_grid,
                               std::span<const PiecewisePath> probes,
                               std::span<const double> quenched_center) {
  StrassenReport rep;
  rep.walk_seed = traj.walk_seed;
  rep.ns.assign(n_grid.begin(), n_grid.end());
  LilSeries lil = lil_statistic(traj, v, n_grid);
  rep.lil_value = std::move(lil.values);
  rep.lil_running_max = std::move(lil.running_max);
  rep.probe_dist.assign(probes.size(), std::vector<double>(n_grid.size(), 0.0));
  rep.probe_min.assign(probes.size(),
                       std::vector<double>(n_grid.size(), std::numeric_limits<double>::infinity()));
  for (size_t gi = 0; gi < n_grid.size(); ++gi) {
    const size_t nk = n_grid[gi];
    // xi over the first nk steps: prefix trajectory and clock
    Trajectory prefix;
    prefix.dim = traj.dim;
    prefix.walk_seed = traj.walk_seed;
    prefix.env_origin = traj.env_origin;
    prefix.positions.assign(traj.positions.begin(),
                            traj.positions.begin() +
                                static_cast<long>((nk + 1) * static_cast<size_t>(traj.dim)));
    CovarianceTrack sub;
    sub.dim = track.dim;
    sub.label = track.label;
    sub.traces.assign(track.traces.begin(), track.traces.begin() + static_cast<long>(nk + 1));
    const std::span<const double> center =
        quenched_center.empty()
            ? quenched_center
            : quenched_center.subspan(0, (nk + 1) * static_cast<size_t>(traj.dim));
    RescaledPath xi = build_xi(prefix, v, sub, center);
    rep.k_dist.push_back(k_distance_upper(xi.path));
    for (size_t pi = 0; pi < probes.size(); ++pi) {
      const double d = sup_distance(xi.path, probes[pi]);
      const double prev = gi == 0 ? std::numeric_limits<double>::infinity()
                                  : rep.probe_min[pi][gi - 1];
      rep.probe_dist[pi][gi] = d;
      rep.probe_min[pi][gi] = std::min(prev, d);
    }
  }
  return rep;
}

PiecewisePath random_unit_energy_path(std::uint64_t seed, int dim, int segments) {
  if (segments < 1) throw UsageError("need at least one segment");
  Philox4x32 rng(seed, 0x70726f6265ULL);  // "probe"
  PiecewisePath f;
  f.dim = dim;
  f.t.resize(static_cast<size_t>(segments) + 1);
  f.values.assign((static_cast<size_t>(segments) + 1) * static_cast<size_t>(dim), 0.0);
  // random strictly increasing times
  f.t[0] = 0.0;
  for (int k = 1; k <= segments; ++k)
    f.t[static_cast<size_t>(k)] = f.t[static_cast<size_t>(k - 1)] + rng.next_open();
  const double tmax = f.t.back();
  for (int k = 1; k <= segments; ++k) f.t[static_cast<size_t>(k)] /= tmax;
  for (int k = 1; k <= segments; ++k)
    for (int c = 0; c < dim; ++c)
      f.values[static_cast<size_t>(k) * dim + c] =
          f.values[static_cast<size_t>(k - 1) * dim + c] +
          rng.next_normal() * std::sqrt(f.t[static_cast<size_t>(k)] - f.t[static_cast<size_t>(k - 1)]);
  double e = cm_energy(f);
  if (e <= 0.0) {
    // all-zero draw; fall back to a straight line
    return line_probe(dim, 0);
  }
  // scale to energy 1 with a one-ulp safety margin so the K inequalities
  // hold without tolerance gymnastics
  const double scale = 1.0 / std::sqrt(e * (1.0 + 1e-13));
  for (double& v : f.values) v *= scale;
  return f;
}

}  // namespace rwre
