#pragma once

#include <cstdint>

#include "rwre/env.hpp"

namespace rwre {

// Reference environments with closed-form statistics, used by the
// acceptance suite, the tests and the benchmarks.

// +-e_i each with probability 1/(2d)
EnvironmentSpec srw_spec(int dim);

// d=1, probability 0.7 on +1 and 0.3 on -1; v = 0.4, diffusion 0.84
EnvironmentSpec deterministic_spec_07();

// d=1 period-2 kernels (a, 1-a) / (b, 1-b) on (+1, -1); for the default
// (0.8, 0.4): v = 0.2, corrector h = (0.2, -0.2), diffusion 0.8
EnvironmentSpec period2_spec(double a = 0.8, double b = 0.4);

// d=1, range 2, symmetrized dirichlet kernels: zero local drift everywhere
EnvironmentSpec balanced_spec_m2(std::uint64_t seed = 7);

// period-2 with a holding step in phase 0 only; minorization fixture with
// l = 2, lambda = 1/2 for the uniform measure
EnvironmentSpec lazy_period2_spec();

}  // namespace rwre
