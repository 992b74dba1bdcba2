#include "rwre/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rwre/error.hpp"

namespace rwre {

JumpKernel JumpKernel::make(int dim, const std::vector<IVec>& offs, const std::vector<double>& probs) {
  if (offs.size() != probs.size()) throw UsageError("offset/probability count mismatch");
  JumpKernel k;
  k.dim = dim;
  k.probs = probs;
  k.offsets.reserve(offs.size() * static_cast<size_t>(dim));
  for (const IVec& z : offs) {
    if (static_cast<int>(z.size()) != dim) throw UsageError("offset dimension mismatch");
    k.offsets.insert(k.offsets.end(), z.begin(), z.end());
  }
  k.rebuild_cdf();
  return k;
}

void JumpKernel::rebuild_cdf() {
  cdf.resize(probs.size());
  double s = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    s += probs[i];
    cdf[i] = s;
  }
  if (!cdf.empty()) cdf.back() = std::max(cdf.back(), 1.0);
}

void JumpKernel::validate(int range, double prob_tol) const {
  if (size() == 0) throw UsageError("kernel has no offsets");
  double s = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw UsageError("kernel probability negative or NaN");
    s += p;
  }
  if (std::abs(s - 1.0) > prob_tol)
    throw UsageError("kernel probabilities sum to " + std::to_string(s) + ", not 1");
  for (int i = 0; i < size(); ++i) {
    if (euclid_norm(offset(i)) > static_cast<double>(range) + 1e-12)
      throw UsageError("kernel offset " + format_site(offset(i)) + " exceeds jump range " +
                       std::to_string(range));
  }
  // offsets must be distinct
  std::map<IVec, int> seen;
  for (int i = 0; i < size(); ++i) {
    IVec z(offset(i).begin(), offset(i).end());
    if (!seen.emplace(std::move(z), i).second)
      throw UsageError("kernel offset " + format_site(offset(i)) + " repeated");
  }
}

std::vector<double> JumpKernel::drift() const {
  std::vector<double> d(static_cast<size_t>(dim), 0.0);
  for (int i = 0; i < size(); ++i) {
    auto z = offset(i);
    for (int c = 0; c < dim; ++c) d[c] += static_cast<double>(z[c]) * probs[i];
  }
  return d;
}

void JumpKernel::accumulate_step_covariance(std::span<const double> center,
                                            std::span<double> out) const {
  for (int i = 0; i < size(); ++i) {
    auto z = offset(i);
    const double p = probs[i];
    for (int r = 0; r < dim; ++r) {
      const double zr = static_cast<double>(z[r]) - center[r];
      for (int c = 0; c < dim; ++c) {
        const double zc = static_cast<double>(z[c]) - center[c];
        out[static_cast<size_t>(r) * dim + c] += p * zr * zc;
      }
    }
  }
}

int JumpKernel::sample(double u) const {
  const int k = size();
  for (int i = 0; i < k - 1; ++i) {
    if (u < cdf[i]) return i;
  }
  return k - 1;
}

JumpKernel JumpKernel::symmetrized() const {
  JumpKernel out = *this;
  std::map<IVec, int> index;
  for (int i = 0; i < size(); ++i) {
    index.emplace(IVec(offset(i).begin(), offset(i).end()), i);
  }
  for (int i = 0; i < size(); ++i) {
    IVec neg(offset(i).begin(), offset(i).end());
    for (Coord& c : neg) c = -c;
    auto it = index.find(neg);
    if (it == index.end())
      throw UsageError("symmetrization requires an offset set closed under negation; missing " +
                       format_site(neg));
    if (it->second < i) continue;  // pair already handled
    const double avg = 0.5 * (probs[i] + probs[it->second]);
    out.probs[i] = avg;
    out.probs[it->second] = avg;
  }
  out.rebuild_cdf();
  return out;
}

bool JumpKernel::same_bits(const JumpKernel& other) const {
  return dim == other.dim && offsets == other.offsets && probs == other.probs;
}

}  // namespace rwre
