#include "rwre/walk.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "rwre/error.hpp"
#include "rwre/rng.hpp"

namespace rwre {

Trajectory simulate_quenched(const EnvironmentView& env, size_t n, std::uint64_t walk_seed) {
  Trajectory traj;
  traj.dim = env.spec().dim;
  traj.walk_seed = walk_seed;
  traj.env_origin.assign(env.origin().begin(), env.origin().end());
  traj.positions.reserve((n + 1) * static_cast<size_t>(traj.dim));
  walk_quenched(env, n, walk_seed, [&](size_t, std::span<const Coord> pos) {
    traj.positions.insert(traj.positions.end(), pos.begin(), pos.end());
  });
  return traj;
}

EnvironmentView annealed_environment(const EnvironmentSpec& spec, std::uint64_t master_seed,
                                     std::uint64_t replica) {
  auto fresh = std::make_shared<EnvironmentSpec>(spec);
  fresh->seed = derive_stream_seed(master_seed, replica, StreamRole::Environment);
  return EnvironmentView(std::shared_ptr<const EnvironmentSpec>(std::move(fresh)));
}

std::uint64_t annealed_walk_seed(std::uint64_t master_seed, std::uint64_t replica) {
  return derive_stream_seed(master_seed, replica, StreamRole::Walk);
}

Trajectory simulate_annealed(const EnvironmentSpec& spec, size_t n, std::uint64_t master_seed,
                             std::uint64_t replica) {
  EnvironmentView env = annealed_environment(spec, master_seed, replica);
  return simulate_quenched(env, n, annealed_walk_seed(master_seed, replica));
}

std::vector<double> martingale_part(const Trajectory& traj, const EnvironmentView& env) {
  const int dim = traj.dim;
  if (dim != env.spec().dim) throw UsageError("martingale_part: dimension mismatch");
  const size_t n = traj.steps();
  std::vector<double> w((n + 1) * static_cast<size_t>(dim), 0.0);
  for (size_t k = 1; k <= n; ++k) {
    auto prev = traj.at(k - 1);
    auto cur = traj.at(k);
    const JumpKernel* kernel_ptr = env.table_kernel_at(prev);
    JumpKernel local;
    if (!kernel_ptr) {
      local = env.kernel_at(prev);
      kernel_ptr = &local;
    }
    const JumpKernel& kernel = *kernel_ptr;
    // the realized step must be in the support of the site kernel
    int found = -1;
    for (int i = 0; i < kernel.size(); ++i) {
      auto z = kernel.offset(i);
      bool eq = true;
      for (int c = 0; c < dim; ++c) eq = eq && (cur[c] - prev[c]) == z[c];
      if (eq) {
        found = i;
        break;
      }
    }
    if (found < 0 || kernel.probs[static_cast<size_t>(found)] <= 0.0)
      throw UsageError("trajectory step " + std::to_string(k) +
                       " not in the support of the site kernel (environment mismatch?)");
    const std::vector<double> d = kernel.drift();
    for (int c = 0; c < dim; ++c) {
      const size_t i = k * static_cast<size_t>(dim) + static_cast<size_t>(c);
      const size_t p = (k - 1) * static_cast<size_t>(dim) + static_cast<size_t>(c);
      w[i] = w[p] + static_cast<double>(cur[c] - prev[c]) - d[static_cast<size_t>(c)];
    }
  }
  return w;
}

double SiteDistribution::total_mass() const {
  double s = 0.0;
  for (const auto& [site, mass] : support) s += mass;
  return s;
}

void SiteDistribution::validate(double expected_mass, double reach, double tol) const {
  for (const auto& [site, mass] : support) {
    if (!(mass >= 0.0)) throw UsageError("site distribution has a negative mass");
    if (euclid_norm(site) > reach + 1e-9)
      throw UsageError("site " + format_site(site) + " outside the reachable ball");
  }
  const double s = total_mass();
  if (std::abs(s - expected_mass) > tol)
    throw UsageError("site distribution mass " + std::to_string(s) + " != expected " +
                     std::to_string(expected_mass));
}

namespace {

// Dense 1-d propagation over [-nM, nM] with a per-site kernel cache.
QuenchedMeanResult quenched_mean_dense_1d(const EnvironmentView& env, size_t n,
                                          const QuenchedMeanOptions& opts) {
  const Coord reach = static_cast<Coord>(n) * env.spec().range;
  const size_t width = static_cast<size_t>(2 * reach + 1);
  if (width > opts.max_sites)
    throw ResourceError("quenched_mean support " + std::to_string(width) +
                        " sites exceeds budget " + std::to_string(opts.max_sites));
  QuenchedMeanResult res;
  res.dim = 1;
  res.means.assign(n + 1, 0.0);

  std::vector<double> mass(width, 0.0), next(width, 0.0);
  const auto idx = [&](Coord x) { return static_cast<size_t>(x + reach); };
  mass[idx(0)] = 1.0;

  // cache kernels for every reachable site
  std::vector<JumpKernel> cache(width);
  std::vector<bool> cached(width, false);
  IVec site(1);
  Coord lo = 0, hi = 0;
  res.peak_support = 1;
  for (size_t k = 1; k <= n; ++k) {
    const Coord next_lo = lo - env.spec().range, next_hi = hi + env.spec().range;
    std::fill(next.begin() + idx(next_lo), next.begin() + idx(next_hi) + 1, 0.0);
    for (Coord x = lo; x <= hi; ++x) {
      const double m = mass[idx(x)];
      if (m <= 0.0) continue;
      if (m < opts.prune_below) {
        res.pruned_mass += m;
        continue;
      }
      const size_t ci = idx(x);
      if (!cached[ci]) {
        site[0] = x;
        cache[ci] = env.kernel_at(site);
        cached[ci] = true;
      }
      const JumpKernel& kern = cache[ci];
      for (int i = 0; i < kern.size(); ++i) {
        next[idx(x + kern.offset(i)[0])] += m * kern.probs[static_cast<size_t>(i)];
      }
    }
    lo = next_lo;
    hi = next_hi;
    double mean = 0.0;
    size_t support = 0;
    for (Coord x = lo; x <= hi; ++x) {
      const double m = next[idx(x)];
      if (m > 0.0) {
        ++support;
        mean += m * static_cast<double>(x);
      }
      mass[idx(x)] = m;
    }
    if (support > res.peak_support) res.peak_support = support;
    res.means[k] = mean;
  }
  res.final_distribution.dim = 1;
  for (Coord x = lo; x <= hi; ++x) {
    const double m = mass[idx(x)];
    if (m > 0.0) res.final_distribution.support.emplace_back(IVec{x}, m);
  }
  return res;
}

QuenchedMeanResult quenched_mean_sparse(const EnvironmentView& env, size_t n,
                                        const QuenchedMeanOptions& opts) {
  const int dim = env.spec().dim;
  double est = 1.0;
  for (int c = 0; c < dim; ++c) est *= static_cast<double>(2 * n * env.spec().range + 1);
  QuenchedMeanResult res;
  res.dim = dim;
  res.means.assign((n + 1) * static_cast<size_t>(dim), 0.0);

  std::unordered_map<IVec, double, IVecHash> mass, next;
  mass.emplace(zero_site(dim), 1.0);
  res.peak_support = 1;
  for (size_t k = 1; k <= n; ++k) {
    next.clear();
    for (const auto& [x, m] : mass) {
      if (m < opts.prune_below) {
        res.pruned_mass += m;
        continue;
      }
      JumpKernel kern = env.kernel_at(x);
      for (int i = 0; i < kern.size(); ++i) {
        IVec y = add_sites(x, kern.offset(i));
        next[std::move(y)] += m * kern.probs[static_cast<size_t>(i)];
      }
    }
    if (next.size() > opts.max_sites)
      throw ResourceError("quenched_mean support " + std::to_string(next.size()) +
                          " sites exceeds budget " + std::to_string(opts.max_sites) +
                          " at step " + std::to_string(k));
    if (next.size() > res.peak_support) res.peak_support = next.size();
    double* mean = res.means.data() + k * static_cast<size_t>(dim);
    for (const auto& [x, m] : next) {
      for (int c = 0; c < dim; ++c) mean[c] += m * static_cast<double>(x[static_cast<size_t>(c)]);
    }
    mass.swap(next);
  }
  res.final_distribution.dim = dim;
  res.final_distribution.support.assign(mass.begin(), mass.end());
  // deterministic order independent of the hash layout
  std::sort(res.final_distribution.support.begin(), res.final_distribution.support.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return res;
}

}  // namespace

QuenchedMeanResult quenched_mean(const EnvironmentView& env, size_t n,
                                 const QuenchedMeanOptions& opts) {
  if (env.spec().dim == 1) return quenched_mean_dense_1d(env, n, opts);
  return quenched_mean_sparse(env, n, opts);
}

void write_trajectory_text(const Trajectory& traj, std::ostream& out) {
  out << "# step";
  for (int c = 0; c < traj.dim; ++c) out << " x_" << (c + 1);
  out << "\n";
  for (size_t k = 0; k <= traj.steps(); ++k) {
    out << k;
    for (Coord c : traj.at(k)) out << " " << c;
    out << "\n";
  }
}

namespace {

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_trajectory_binary(const Trajectory& traj, std::ostream& out) {
  out.write("RWTJ", 4);
  put_le<std::uint32_t>(out, 1u);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(traj.dim));
  put_le<std::uint64_t>(out, traj.steps());
  put_le<std::uint64_t>(out, traj.walk_seed);
  for (Coord c : traj.env_origin) put_le<std::uint64_t>(out, static_cast<std::uint64_t>(c));
  for (Coord c : traj.positions) put_le<std::uint64_t>(out, static_cast<std::uint64_t>(c));
}

Trajectory read_trajectory_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RWTJ", 4) != 0) throw ParseError("bad trajectory magic");
  const auto version = get_le<std::uint32_t>(in);
  if (version != 1) throw ParseError("unsupported trajectory version");
  Trajectory traj;
  traj.dim = static_cast<int>(get_le<std::uint32_t>(in));
  const std::uint64_t n = get_le<std::uint64_t>(in);
  traj.walk_seed = get_le<std::uint64_t>(in);
  traj.env_origin.resize(static_cast<size_t>(traj.dim));
  for (Coord& c : traj.env_origin) c = static_cast<Coord>(get_le<std::uint64_t>(in));
  traj.positions.resize((n + 1) * static_cast<size_t>(traj.dim));
  for (Coord& c : traj.positions) c = static_cast<Coord>(get_le<std::uint64_t>(in));
  if (!in) throw ParseError("truncated trajectory frame");
  return traj;
}

}  // namespace rwre
