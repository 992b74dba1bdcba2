#pragma once

#include <cstdint>
#include <span>

namespace rwre {

// SplitMix64 finalizer; the basic 64-bit mixing primitive used for seed
// derivation and site fingerprints.
std::uint64_t mix64(std::uint64_t x);

enum class StreamRole : std::uint64_t {
  Environment = 0x656e76,  // per-replica environment seed
  Walk = 0x776c6b,         // per-replica walk seed
  Scratch = 0x736372,      // auxiliary draws (probe generation, MC estimators)
};

// Splittable derivation of a child seed from (master, index, role).
// Documented scheme: three chained mix64 rounds, see README.
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index, StreamRole role);

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// The 128-bit counter is split: the high 64 bits select a stream (e.g. a
// lattice site), the low 64 bits advance with consumption. Two streams
// with distinct (key, counter-high) never overlap.
class Philox4x32 {
 public:
  explicit Philox4x32(std::uint64_t key, std::uint64_t stream = 0);

  void set_counter(std::uint64_t lo);

  std::uint64_t next_u64();
  // uniform in [0, 1)
  double next_unit();
  // uniform in (0, 1]; safe as a log() argument
  double next_open();
  double next_normal();
  // Marsaglia-Tsang; alpha < 1 handled by the boost G(a) = G(a+1) U^{1/a}.
  double next_gamma(double alpha);
  void next_dirichlet(std::span<const double> alpha, std::span<double> out);

  // raw block generation, exposed for known-answer tests
  static void block(const std::uint32_t key[2], const std::uint32_t ctr[4], std::uint32_t out[4]);

 private:
  void refill();

  std::uint32_t key_[2];
  std::uint32_t ctr_[4];
  std::uint32_t buf_[4];
  int avail_ = 0;
  double normal_cache_ = 0.0;
  bool has_normal_ = false;
};

}  // namespace rwre
