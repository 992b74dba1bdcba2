#include "rwre/rng.hpp"

#include <cmath>

#include "rwre/error.hpp"

namespace rwre {

namespace {

constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index, StreamRole role) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ index);
  h = mix64(h ^ static_cast<std::uint64_t>(role));
  return h;
}

void Philox4x32::block(const std::uint32_t key[2], const std::uint32_t ctr[4], std::uint32_t out[4]) {
  std::uint32_t k0 = key[0], k1 = key[1];
  std::uint32_t x0 = ctr[0], x1 = ctr[1], x2 = ctr[2], x3 = ctr[3];
  for (int round = 0; round < 10; ++round) {
    if (round) {
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t y0 = hi1 ^ x1 ^ k0;
    const std::uint32_t y1 = lo1;
    const std::uint32_t y2 = hi0 ^ x3 ^ k1;
    const std::uint32_t y3 = lo0;
    x0 = y0;
    x1 = y1;
    x2 = y2;
    x3 = y3;
  }
  out[0] = x0;
  out[1] = x1;
  out[2] = x2;
  out[3] = x3;
}

Philox4x32::Philox4x32(std::uint64_t key, std::uint64_t stream) {
  key_[0] = static_cast<std::uint32_t>(key);
  key_[1] = static_cast<std::uint32_t>(key >> 32);
  ctr_[0] = 0;
  ctr_[1] = 0;
  ctr_[2] = static_cast<std::uint32_t>(stream);
  ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
}

void Philox4x32::set_counter(std::uint64_t lo) {
  ctr_[0] = static_cast<std::uint32_t>(lo);
  ctr_[1] = static_cast<std::uint32_t>(lo >> 32);
  avail_ = 0;
  has_normal_ = false;
}

void Philox4x32::refill() {
  block(key_, ctr_, buf_);
  avail_ = 4;
  // advance the low 64 counter bits
  if (++ctr_[0] == 0) ++ctr_[1];
}

std::uint64_t Philox4x32::next_u64() {
  if (avail_ < 2) refill();
  const std::uint32_t lo = buf_[4 - avail_];
  const std::uint32_t hi = buf_[4 - avail_ + 1];
  avail_ -= 2;
  return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
}

double Philox4x32::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Philox4x32::next_open() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Philox4x32::next_normal() {
  if (has_normal_) {
    has_normal_ = false;
    return normal_cache_;
  }
  const double u1 = next_open();
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  normal_cache_ = r * std::sin(kTwoPi * u2);
  has_normal_ = true;
  return r * std::cos(kTwoPi * u2);
}

double Philox4x32::next_gamma(double alpha) {
  if (!(alpha > 0.0)) throw UsageError("gamma shape must be positive");
  if (alpha < 1.0) {
    const double g = next_gamma(alpha + 1.0);
    const double u = next_open();
    return g * std::pow(u, 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = next_normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = next_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

void Philox4x32::next_dirichlet(std::span<const double> alpha, std::span<double> out) {
  double total = 0.0;
  for (size_t i = 0; i < alpha.size(); ++i) {
    double g = next_gamma(alpha[i]);
    if (g < 1e-300) g = 1e-300;  // guard against underflow for tiny shapes
    out[i] = g;
    total += g;
  }
  for (size_t i = 0; i < alpha.size(); ++i) out[i] /= total;
}

}  // namespace rwre
