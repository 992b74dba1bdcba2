#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rwre/models.hpp"
#include "rwre/error.hpp"
#include "rwre/linalg.hpp"
#include "rwre/walk.hpp"

using namespace rwre;

namespace {

EnvironmentSpec prob1_spec() {
  EnvironmentSpec spec;
  spec.dim = 1;
  spec.range = 1;
  spec.model = ModelKind::Deterministic;
  spec.kernels = {JumpKernel::make(1, {{1}}, {1.0})};
  spec.validate();
  return spec;
}

EnvironmentSpec dirichlet_spec(std::uint64_t seed, double a_plus, double a_minus) {
  EnvironmentSpec spec;
  spec.dim = 1;
  spec.range = 1;
  spec.model = ModelKind::IidDirichlet;
  spec.offsets_flat = {1, -1};
  spec.alpha = {a_plus, a_minus};
  spec.seed = seed;
  spec.validate();
  return spec;
}

}  // namespace

TEST_CASE("zero-step trajectory is the origin") {
  EnvironmentView env(srw_spec(2));
  Trajectory traj = simulate_quenched(env, 0, 1);
  CHECK(traj.steps() == 0);
  CHECK(traj.at(0)[0] == 0);
  CHECK(traj.at(0)[1] == 0);
}

TEST_CASE("degenerate kernel walks in a straight line") {
  EnvironmentView env(prob1_spec());
  Trajectory traj = simulate_quenched(env, 10, 99);
  for (size_t k = 0; k <= 10; ++k) CHECK(traj.at(k)[0] == static_cast<Coord>(k));
}

TEST_CASE("lln at simulation scale, against a binomial oracle") {
  // |X_n|/n < 0.01 for at least 99 of 100 seeds at n = 1e6
  EnvironmentView env(srw_spec(1));
  const size_t n = 1000000;
  int ours = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Trajectory traj = simulate_quenched(env, n, 1000 + s);
    if (std::abs(static_cast<double>(traj.at(n)[0])) / static_cast<double>(n) < 0.01) ++ours;
  }
  CHECK(ours >= 99);
  // independent binomial sampling oracle: X_n = 2 B(n, 1/2) - n
  std::mt19937_64 gen(4242);
  std::binomial_distribution<long long> binom(static_cast<long long>(n), 0.5);
  int oracle = 0;
  for (int s = 0; s < 100; ++s) {
    const long long x = 2 * binom(gen) - static_cast<long long>(n);
    if (std::abs(static_cast<double>(x)) / static_cast<double>(n) < 0.01) ++oracle;
  }
  CHECK(oracle >= 99);
}

TEST_CASE("annealed replicas are reproducible and distinct") {
  EnvironmentSpec spec = dirichlet_spec(5, 1.0, 1.0);
  Trajectory a = simulate_annealed(spec, 100, 7, 3);
  Trajectory b = simulate_annealed(spec, 100, 7, 3);
  Trajectory c = simulate_annealed(spec, 100, 7, 4);
  CHECK(a.positions == b.positions);
  CHECK(a.positions != c.positions);
}

TEST_CASE("annealed equals quenched on a deterministic environment") {
  // P is a point mass, so the annealed replica is the quenched walk under
  // the derived walk seed
  EnvironmentSpec spec = deterministic_spec_07();
  Trajectory annealed = simulate_annealed(spec, 200, 9, 5);
  EnvironmentView env(annealed_environment(spec, 9, 5));
  Trajectory quenched = simulate_quenched(env, 200, annealed_walk_seed(9, 5));
  CHECK(annealed.positions == quenched.positions);
}

TEST_CASE("annealed one-step mean matches the closed-form dirichlet drift") {
  // E[D] = (a+ - a-)/(a+ + a-) = 1/3 for alpha = (2, 1)
  EnvironmentSpec spec = dirichlet_spec(21, 2.0, 1.0);
  const size_t replicas = 100000;
  KahanSum sum, sum2;
  for (size_t r = 0; r < replicas; ++r) {
    Trajectory traj = simulate_annealed(spec, 1, 31, r);
    const double x = static_cast<double>(traj.at(1)[0]);
    sum.add(x);
    sum2.add(x * x);
  }
  const double mean = sum.value() / static_cast<double>(replicas);
  const double var = sum2.value() / static_cast<double>(replicas) - mean * mean;
  const double se = std::sqrt(var / static_cast<double>(replicas));
  CHECK(std::abs(mean - 1.0 / 3.0) <= 3.0 * se);
}

TEST_CASE("quenched mean: srw is centered, deterministic drifts linearly") {
  EnvironmentView srw(srw_spec(1));
  QuenchedMeanResult qm = quenched_mean(srw, 100);
  for (size_t k = 0; k <= 100; ++k) CHECK(std::abs(qm.means[k]) <= 1e-12);

  EnvironmentView det(deterministic_spec_07());
  QuenchedMeanResult qd = quenched_mean(det, 200);
  for (size_t k = 0; k <= 200; ++k)
    CHECK(qd.means[k] == doctest::Approx(0.4 * static_cast<double>(k)).epsilon(1e-9));
}

TEST_CASE("quenched mean matches a dense transfer-matrix oracle") {
  // periodic (0.8, 0.4), n = 50: propagate a dense vector with an explicit
  // (2n+1) x (2n+1) one-step matrix
  const size_t n = 50;
  EnvironmentSpec spec = period2_spec();
  EnvironmentView env(spec);

  const int width = 2 * static_cast<int>(n) + 3;
  const int mid = width / 2;
  Mat step(width, width);
  for (int i = 0; i < width; ++i) {
    const Coord site = static_cast<Coord>(i - mid);
    const double up = floored_mod(site, 2) == 0 ? 0.8 : 0.4;
    if (i + 1 < width) step.at(i, i + 1) = up;
    if (i - 1 >= 0) step.at(i, i - 1) = 1.0 - up;
    else step.at(i, i) += 1.0 - up;  // boundary never reached at this n
  }
  std::vector<double> mass(static_cast<size_t>(width), 0.0);
  mass[static_cast<size_t>(mid)] = 1.0;
  std::vector<double> oracle_means;
  oracle_means.push_back(0.0);
  for (size_t k = 1; k <= n; ++k) {
    mass = mat_vec(step.transposed(), mass);
    double m = 0.0;
    for (int i = 0; i < width; ++i)
      m += mass[static_cast<size_t>(i)] * static_cast<double>(i - mid);
    oracle_means.push_back(m);
  }

  QuenchedMeanResult qm = quenched_mean(env, n);
  for (size_t k = 0; k <= n; ++k)
    CHECK(std::abs(qm.means[k] - oracle_means[k]) <= 1e-10);
}

TEST_CASE("quenched mean agrees with monte carlo at 4 standard errors") {
  EnvironmentSpec spec = dirichlet_spec(77, 1.0, 1.0);
  EnvironmentView env(spec);
  const size_t n = 100, replicas = 100000;
  QuenchedMeanResult qm = quenched_mean(env, n);

  KahanSum sum, sum2;
  for (size_t r = 0; r < replicas; ++r) {
    Trajectory traj = simulate_quenched(env, n, 50000 + r);
    const double x = static_cast<double>(traj.at(n)[0]);
    sum.add(x);
    sum2.add(x * x);
  }
  const double mean = sum.value() / static_cast<double>(replicas);
  const double var = sum2.value() / static_cast<double>(replicas) - mean * mean;
  const double se = std::sqrt(var / static_cast<double>(replicas));
  CHECK(std::abs(mean - qm.means[n]) <= 4.0 * se);
}

TEST_CASE("sparse propagation (d >= 2) matches monte carlo and keeps mass") {
  EnvironmentSpec spec = srw_spec(2);
  EnvironmentView env(spec);
  const size_t n = 60;
  QuenchedMeanResult qm = quenched_mean(env, n);
  CHECK(qm.means[2 * n] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(qm.means[2 * n + 1] == doctest::Approx(0.0).epsilon(1e-12));
  qm.final_distribution.validate(1.0 - qm.pruned_mass, static_cast<double>(n));

  const size_t replicas = 50000;
  KahanSum sx, sy;
  for (size_t r = 0; r < replicas; ++r) {
    Trajectory traj = simulate_quenched(env, n, 7000 + r);
    sx.add(static_cast<double>(traj.at(n)[0]));
    sy.add(static_cast<double>(traj.at(n)[1]));
  }
  // each coordinate has variance n/2 at step n
  const double se = std::sqrt(static_cast<double>(n) / 2.0 / static_cast<double>(replicas));
  CHECK(std::abs(sx.value() / static_cast<double>(replicas)) <= 4.0 * se);
  CHECK(std::abs(sy.value() / static_cast<double>(replicas)) <= 4.0 * se);
}

TEST_CASE("site distribution invariants and pruning accounting") {
  EnvironmentView env(srw_spec(1));
  QuenchedMeanOptions opts;  // default pruning 1e-15
  QuenchedMeanResult qm = quenched_mean(env, 2000, opts);
  // binomial tails below the pruning threshold exist at this n
  CHECK(qm.pruned_mass > 0.0);
  CHECK(qm.pruned_mass < 1e-8);
  qm.final_distribution.validate(1.0 - qm.pruned_mass, 2000.0, 1e-10);
  // parity: odd sites carry no mass after an even number of steps
  for (const auto& [site, mass] : qm.final_distribution.support)
    CHECK(floored_mod(site[0], 2) == 0);

  QuenchedMeanResult exact = quenched_mean(env, 0);
  REQUIRE(exact.final_distribution.support.size() == 1);
  CHECK(exact.final_distribution.support[0].second == 1.0);
}

TEST_CASE("quenched mean budget raises a resource error") {
  EnvironmentView env(srw_spec(1));
  QuenchedMeanOptions opts;
  opts.max_sites = 50;
  CHECK_THROWS_AS(quenched_mean(env, 1000, opts), ResourceError);
}

TEST_CASE("martingale part") {
  // step equals drift: W vanishes
  EnvironmentView one(prob1_spec());
  Trajectory straight = simulate_quenched(one, 50, 3);
  std::vector<double> w = martingale_part(straight, one);
  for (double x : w) CHECK(std::abs(x) <= 1e-12);

  // balanced model: D = 0, so W = X
  EnvironmentView bal(balanced_spec_m2());
  Trajectory btraj = simulate_quenched(bal, 10000, 4);
  std::vector<double> bw = martingale_part(btraj, bal);
  for (size_t k = 0; k <= btraj.steps(); ++k)
    CHECK(std::abs(bw[k] - static_cast<double>(btraj.at(k)[0])) <= 1e-9);
}

TEST_CASE("martingale increments are conditionally centered per site") {
  EnvironmentSpec spec = dirichlet_spec(123, 1.0, 1.0);
  EnvironmentView env(spec);
  const size_t n = 200000;
  Trajectory traj = simulate_quenched(env, n, 9);
  std::vector<double> w = martingale_part(traj, env);
  // gather increments by conditioning site
  std::map<Coord, std::pair<double, std::pair<double, size_t>>> by_site;  // sum, (sum2, count)
  for (size_t k = 1; k <= n; ++k) {
    const double inc = w[k] - w[k - 1];
    auto& cell = by_site[traj.at(k - 1)[0]];
    cell.first += inc;
    cell.second.first += inc * inc;
    cell.second.second += 1;
  }
  size_t tested = 0;
  for (const auto& [site, cell] : by_site) {
    const size_t count = cell.second.second;
    if (count < 1000) continue;
    const double mean = cell.first / static_cast<double>(count);
    const double var = cell.second.first / static_cast<double>(count) - mean * mean;
    const double se = std::sqrt(var / static_cast<double>(count));
    CHECK(std::abs(mean) <= 4.0 * se);
    if (++tested == 20) break;
  }
  CHECK(tested >= 10);
}

TEST_CASE("every trajectory step lies in the support of its site kernel") {
  const std::vector<EnvironmentSpec> models = {srw_spec(2), period2_spec(),
                                               dirichlet_spec(3, 1.0, 2.0)};
  for (const EnvironmentSpec& spec : models) {
    EnvironmentView env(spec);
    Trajectory traj = simulate_quenched(env, 2000, 17);
    CHECK_NOTHROW(martingale_part(traj, env));  // validates support membership per step
  }
}

TEST_CASE("environment/trajectory mismatch is detected") {
  EnvironmentView env(prob1_spec());
  Trajectory traj = simulate_quenched(env, 5, 1);
  traj.positions[3] -= 2;  // break a step
  CHECK_THROWS_AS(martingale_part(traj, env), UsageError);
}

TEST_CASE("trajectory binary frame round-trips") {
  EnvironmentView env(srw_spec(2));
  Trajectory traj = simulate_quenched(env.shift(std::vector<Coord>{3, -1}), 257, 12345);
  std::stringstream buf;
  write_trajectory_binary(traj, buf);
  Trajectory back = read_trajectory_binary(buf);
  CHECK(back.dim == traj.dim);
  CHECK(back.walk_seed == traj.walk_seed);
  CHECK(back.env_origin == traj.env_origin);
  CHECK(back.positions == traj.positions);
}

TEST_CASE("trajectory text export is columnar") {
  EnvironmentView env(srw_spec(2));
  Trajectory traj = simulate_quenched(env, 3, 5);
  std::ostringstream out;
  write_trajectory_text(traj, out);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "# step x_1 x_2");
  size_t rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);
}
