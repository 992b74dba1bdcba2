#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rwre {

using Coord = std::int64_t;
using IVec = std::vector<Coord>;

double euclid_norm(std::span<const Coord> v);

inline IVec zero_site(int dim) { return IVec(static_cast<size_t>(dim), 0); }

IVec add_sites(std::span<const Coord> a, std::span<const Coord> b);

// Mathematical mod: result in [0, m) for m > 0, also for negative a.
Coord floored_mod(Coord a, Coord m);

std::string format_site(std::span<const Coord> v);

// Order-sensitive fingerprint of (salt, coordinates); drives per-site
// random streams and hash containers.
std::uint64_t site_fingerprint(std::uint64_t salt, std::span<const Coord> v);

// Fingerprint of the elementwise sum a + b without materializing it;
// identical to site_fingerprint(salt, a + b).
std::uint64_t site_fingerprint_sum(std::uint64_t salt, std::span<const Coord> a,
                                   std::span<const Coord> b);

struct IVecHash {
  std::size_t operator()(const IVec& v) const {
    return static_cast<std::size_t>(site_fingerprint(0x9e3779b97f4a7c15ULL, v));
  }
};

}  // namespace rwre
