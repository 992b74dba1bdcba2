#pragma once

#include <span>
#include <string>
#include <vector>

#include "rwre/lattice.hpp"

namespace rwre {

// One-site jump distribution: offsets z with |z| <= range and aligned
// probabilities. Offset order is part of the kernel's identity (it drives
// deterministic sampling), so construction order is preserved.
struct JumpKernel {
  int dim = 0;
  std::vector<Coord> offsets;  // k x dim, row-major
  std::vector<double> probs;   // k
  std::vector<double> cdf;     // k, inclusive prefix sums, cdf.back() == 1

  int size() const { return static_cast<int>(probs.size()); }
  std::span<const Coord> offset(int i) const {
    return {offsets.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
  }

  static JumpKernel make(int dim, const std::vector<IVec>& offs, const std::vector<double>& probs);

  // Checks the three kernel invariants against the given jump range.
  void validate(int range, double prob_tol = 1e-12) const;

  std::vector<double> drift() const;  // sum_z z p(z)

  // out (dim x dim, row-major) += sum_z p(z) (z - center)(z - center)^t
  void accumulate_step_covariance(std::span<const double> center, std::span<double> out) const;

  int sample(double u) const;

  // Averages p(z) and p(-z); requires the offset set to be closed under
  // negation. Resulting site drift is zero.
  JumpKernel symmetrized() const;

  bool same_bits(const JumpKernel& other) const;
  void rebuild_cdf();
};

}  // namespace rwre
