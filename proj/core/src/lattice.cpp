#include "rwre/lattice.hpp"

#include <cmath>

#include "rwre/error.hpp"
#include "rwre/rng.hpp"

namespace rwre {

double euclid_norm(std::span<const Coord> v) {
  double s = 0.0;
  for (Coord c : v) s += static_cast<double>(c) * static_cast<double>(c);
  return std::sqrt(s);
}

IVec add_sites(std::span<const Coord> a, std::span<const Coord> b) {
  if (a.size() != b.size()) throw UsageError("site dimension mismatch");
  IVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Coord floored_mod(Coord a, Coord m) {
  Coord r = a % m;
  return r < 0 ? r + m : r;
}

std::string format_site(std::span<const Coord> v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  s += ")";
  return s;
}

std::uint64_t site_fingerprint(std::uint64_t salt, std::span<const Coord> v) {
  std::uint64_t h = mix64(salt ^ 0x51ed270b74a0e3c5ULL);
  for (Coord c : v) {
    h = mix64(h ^ (static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL));
  }
  return h;
}

std::uint64_t site_fingerprint_sum(std::uint64_t salt, std::span<const Coord> a,
                                   std::span<const Coord> b) {
  std::uint64_t h = mix64(salt ^ 0x51ed270b74a0e3c5ULL);
  for (size_t i = 0; i < a.size(); ++i) {
    h = mix64(h ^ (static_cast<std::uint64_t>(a[i] + b[i]) + 0x9e3779b97f4a7c15ULL));
  }
  return h;
}

}  // namespace rwre
