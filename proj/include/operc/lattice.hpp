#pragma once
// Level sets of the oriented lattice {(y, n) : y + n even, n >= 0}.
//
// A LevelSet is a windowed bitmap over one level: bit i stands for the site
// y_lo + 2i.  Windows always satisfy y_lo == y_hi == n (mod 2).  The censor
// flags say whether the true set may extend past the window on either side
// (infinite initial conditions truncated to a finite window).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "operc/rng.hpp"

namespace operc {

// Largest even integer strictly smaller than r (5.3 -> 4, 4.0 -> 2, -1.2 -> -2).
long long floor_even(double r);

// Largest even integer <= r; the non-strict companion, reported alongside the
// strict one where interval endpoints can land exactly on an even integer.
long long floor_even_le(double r);

class LevelSet {
 public:
  LevelSet() = default;

  // Empty set on the window [y_lo, y_hi] at the given level.
  LevelSet(int level, int y_lo, int y_hi);

  int level() const { return level_; }
  int y_lo() const { return y_lo_; }
  int y_hi() const { return y_hi_; }
  int width() const { return static_cast<int>(size_); }  // number of sites

  bool left_censored = false;   // true set may extend past y_lo
  bool right_censored = false;  // true set may extend past y_hi

  bool in_window(int y) const { return y >= y_lo_ && y <= y_hi_ && ((y ^ level_) & 1) == 0; }

  bool test(int y) const {
    std::size_t i = index(y);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(int y) {
    std::size_t i = index(y);
    words_[i >> 6] |= std::uint64_t{1} << (i & 63);
  }
  void clear(int y) {
    std::size_t i = index(y);
    words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }
  void fill();   // every site in the window
  void reset();  // no sites

  int count() const;
  bool any() const;

  // Extremes; empty window set -> nullopt.
  std::optional<int> sup() const;
  std::optional<int> inf() const;

  std::vector<int> sites() const;  // occupied sites in increasing y

  // Raw word access for bit-parallel stepping.  Bits beyond width() are zero.
  std::vector<std::uint64_t>& words() { return words_; }
  const std::vector<std::uint64_t>& words() const { return words_; }

  // True when *this is a subset of other; windows may differ, sites outside
  // the other window fail the test.
  bool subset_of(const LevelSet& other) const;

  bool same_window(const LevelSet& other) const {
    return level_ == other.level_ && y_lo_ == other.y_lo_ && y_hi_ == other.y_hi_;
  }
  bool operator==(const LevelSet& other) const;

 private:
  std::size_t index(int y) const {
    if (!in_window(y)) throw std::out_of_range("LevelSet: site outside window");
    return static_cast<std::size_t>(y - y_lo_) / 2;
  }

  int level_ = 0;
  int y_lo_ = 0;
  int y_hi_ = 0;
  std::size_t size_ = 1;
  std::vector<std::uint64_t> words_{0};
};

// All sites at level n with |y| <= a * n, 0 < a <= 1.  Throws when no site
// qualifies (only possible at odd levels with a * n < 1).
LevelSet cone_sites(int n, double a);

// The m parity-valid sites closest to the origin at the given level.
LevelSet centered_sites(int level, int m);

// Initial conditions.  All sets live at level 0 on even sites.
struct Singleton {};              // {0}
struct IntervalInit { int k; };   // {-2k, ..., 0, ..., 2k}
struct HalfLineInit {};           // {..., -4, -2, 0}
struct FullLineInit {};           // all of 2Z
struct ProductInit { double p; }; // each even site independently with prob p
using InitialKind = std::variant<Singleton, IntervalInit, HalfLineInit, FullLineInit, ProductInit>;

std::string initial_name(const InitialKind& k);

// Inverse of initial_name: singleton | interval:k | halfline | fullline | product:p.
InitialKind parse_initial(const std::string& text);

// How each window edge evolves per level.  grow: the true set cannot reach
// past the edge, widen by one site (exact).  shrink: the initial condition was
// truncated there, so drop the outermost site each level; everything kept is
// then exact as if the lattice were infinite.
enum class EdgePolicy { grow, shrink };

struct Initial {
  LevelSet set0;
  EdgePolicy left = EdgePolicy::grow;
  EdgePolicy right = EdgePolicy::grow;
};

// Build the level-0 set with the window sized so that every reported site up
// to `horizon` levels is exact.  `observe_halfwidth` is the |y| range that
// must stay observable at the horizon for the infinite initial conditions.
// Product sampling draws from the init_occupancy channel of `src`.
Initial make_initial(const InitialKind& kind, int horizon, int observe_halfwidth,
                     const RandomSource* src = nullptr);

}  // namespace operc
