#pragma once
// Deterministic counter-based randomness.
//
// Every uniform is a pure function of (master seed, stream, site, channel).
// Coupled processes can therefore share one designation field, workers can
// query any site without coordination, and replaying a trial only needs its
// stream index.  Mixing is SplitMix64-style: the packed coordinates are
// spread by an odd multiplier and pushed through the 64-bit finalizer.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace operc {

// Designation channels.  Values are part of the determinism contract: the
// output for a given (seed, stream, site, channel) must never change.
enum class Channel : std::uint32_t {
  site_open = 1,
  bond_left = 2,   // bond (y, n) -> (y - 1, n + 1), keyed by the source site
  bond_right = 3,  // bond (y, n) -> (y + 1, n + 1)
  init_occupancy = 4,
  subset = 5,
  aux = 6,
};

struct SiteCoord {
  int y = 0;
  int n = 0;
};

// Sites live on the sublattice y + n even, n >= 0.
inline bool site_ok(SiteCoord s) { return s.n >= 0 && ((s.y + s.n) & 1) == 0; }

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

// Level coordinates must stay below this bound so the packed key cannot
// collide across channels.  Desk-scale horizons are nowhere near it.
inline constexpr int kMaxLevel = 1 << 28;

class RandomSource {
 public:
  RandomSource(std::uint64_t master_seed, std::uint64_t stream)
      : master_seed_(master_seed),
        stream_(stream),
        key_(detail::mix64(detail::mix64(master_seed) ^ stream * detail::kGolden)) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream() const { return stream_; }

  // 53-bit draw; uniform_at() == raw53() * 2^-53.  The integer form lets hot
  // loops compare against a precomputed threshold without touching doubles.
  // No parity check here: callers in stepping code construct valid sites.
  std::uint64_t raw53(int y, int n, Channel c) const {
    std::uint64_t packed =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(n)) << 36) |
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c)) << 32) |
        static_cast<std::uint64_t>(static_cast<std::uint32_t>(y));
    return detail::mix64(key_ ^ (packed * 0xff51afd7ed558ccdull)) >> 11;
  }

  double uniform_at(SiteCoord s, Channel c) const {
    if (!site_ok(s) || s.n >= kMaxLevel)
      throw std::invalid_argument("uniform_at: site off the lattice");
    return static_cast<double>(raw53(s.y, s.n, c)) * 0x1p-53;
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
};

// Threshold t with  raw53 < t  <=>  raw53 * 2^-53 < prob.  ceil() handles the
// boundary exactly: prob = 1 always opens, prob = 0 never does.
inline std::uint64_t threshold53(double prob) {
  if (!(prob >= 0.0 && prob <= 1.0))
    throw std::invalid_argument("threshold53: probability outside [0, 1]");
  return static_cast<std::uint64_t>(
      std::ceil(static_cast<long double>(prob) * 9007199254740992.0L));
}

}  // namespace operc
