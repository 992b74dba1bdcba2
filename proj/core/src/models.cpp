#include "rwre/models.hpp"

namespace rwre {

EnvironmentSpec srw_spec(int dim) {
  EnvironmentSpec spec;
  spec.dim = dim;
  spec.range = 1;
  spec.model = ModelKind::Deterministic;
  std::vector<IVec> offs;
  std::vector<double> probs;
  for (int c = 0; c < dim; ++c) {
    IVec plus = zero_site(dim), minus = zero_site(dim);
    plus[static_cast<size_t>(c)] = 1;
    minus[static_cast<size_t>(c)] = -1;
    offs.push_back(plus);
    offs.push_back(minus);
    probs.push_back(1.0 / (2.0 * dim));
    probs.push_back(1.0 / (2.0 * dim));
  }
  spec.kernels = {JumpKernel::make(dim, offs, probs)};
  spec.validate();
  return spec;
}

EnvironmentSpec deterministic_spec_07() {
  EnvironmentSpec spec;
  spec.dim = 1;
  spec.range = 1;
  spec.model = ModelKind::Deterministic;
  spec.kernels = {JumpKernel::make(1, {{1}, {-1}}, {0.7, 0.3})};
  spec.validate();
  return spec;
}

EnvironmentSpec period2_spec(double a, double b) {
  EnvironmentSpec spec;
  spec.dim = 1;
  spec.range = 1;
  spec.model = ModelKind::Periodic;
  spec.period = {2};
  spec.kernels = {JumpKernel::make(1, {{1}, {-1}}, {a, 1.0 - a}),
                  JumpKernel::make(1, {{1}, {-1}}, {b, 1.0 - b})};
  spec.validate();
  return spec;
}

EnvironmentSpec balanced_spec_m2(std::uint64_t seed) {
  EnvironmentSpec spec;
  spec.dim = 1;
  spec.range = 2;
  spec.model = ModelKind::Balanced;
  spec.offsets_flat = {1, -1, 2, -2};
  spec.alpha = {1.0, 1.0, 1.0, 1.0};
  spec.seed = seed;
  spec.validate();
  return spec;
}

EnvironmentSpec lazy_period2_spec() {
  EnvironmentSpec spec;
  spec.dim = 1;
  spec.range = 1;
  spec.model = ModelKind::Periodic;
  spec.period = {2};
  spec.kernels = {JumpKernel::make(1, {{0}, {1}, {-1}}, {0.5, 0.25, 0.25}),
                  JumpKernel::make(1, {{1}, {-1}}, {0.5, 0.5})};
  spec.validate();
  return spec;
}

}  // namespace rwre
