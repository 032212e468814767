#include "operc/lattice.hpp"

#include <bit>
#include <cmath>

namespace operc {

long long floor_even(double r) {
  if (!std::isfinite(r)) throw std::invalid_argument("floor_even: non-finite input");
  return 2 * (static_cast<long long>(std::ceil(r / 2.0)) - 1);
}

long long floor_even_le(double r) {
  if (!std::isfinite(r)) throw std::invalid_argument("floor_even_le: non-finite input");
  return 2 * static_cast<long long>(std::floor(r / 2.0));
}

LevelSet::LevelSet(int level, int y_lo, int y_hi) : level_(level), y_lo_(y_lo), y_hi_(y_hi) {
  if (level < 0 || y_hi < y_lo || ((y_lo ^ level) & 1) || ((y_hi ^ level) & 1))
    throw std::invalid_argument("LevelSet: bad window");
  size_ = static_cast<std::size_t>(y_hi - y_lo) / 2 + 1;
  words_.assign((size_ + 63) / 64, 0);
}

void LevelSet::fill() {
  for (auto& w : words_) w = ~std::uint64_t{0};
  // mask off the bits past the last site
  std::size_t tail = size_ & 63;
  if (tail) words_.back() &= (std::uint64_t{1} << tail) - 1;
}

void LevelSet::reset() {
  for (auto& w : words_) w = 0;
}

int LevelSet::count() const {
  int c = 0;
  for (auto w : words_) c += std::popcount(w);
  return c;
}

bool LevelSet::any() const {
  for (auto w : words_) {
    if (w) return true;
  }
  return false;
}

std::optional<int> LevelSet::sup() const {
  for (std::size_t wi = words_.size(); wi-- > 0;) {
    if (words_[wi]) {
      int bit = 63 - std::countl_zero(words_[wi]);
      return y_lo_ + 2 * (static_cast<int>(wi) * 64 + bit);
    }
  }
  return std::nullopt;
}

std::optional<int> LevelSet::inf() const {
  for (std::size_t wi = 0; wi < words_.size(); ++wi) {
    if (words_[wi]) {
      int bit = std::countr_zero(words_[wi]);
      return y_lo_ + 2 * (static_cast<int>(wi) * 64 + bit);
    }
  }
  return std::nullopt;
}

std::vector<int> LevelSet::sites() const {
  std::vector<int> out;
  for (std::size_t wi = 0; wi < words_.size(); ++wi) {
    std::uint64_t w = words_[wi];
    while (w) {
      int bit = std::countr_zero(w);
      out.push_back(y_lo_ + 2 * (static_cast<int>(wi) * 64 + bit));
      w &= w - 1;
    }
  }
  return out;
}

bool LevelSet::subset_of(const LevelSet& other) const {
  if (level_ != other.level_) return false;
  for (int y : sites()) {
    if (!other.in_window(y) || !other.test(y)) return false;
  }
  return true;
}

bool LevelSet::operator==(const LevelSet& other) const {
  if (level_ != other.level_) return false;
  return subset_of(other) && other.subset_of(*this);
}

LevelSet cone_sites(int n, double a) {
  if (n < 0 || !(a > 0.0 && a <= 1.0)) throw std::invalid_argument("cone_sites: need n >= 0, 0 < a <= 1");
  int t = static_cast<int>(std::floor(a * n));
  if (((t ^ n) & 1)) --t;
  if (t < 0) throw std::invalid_argument("cone_sites: no site with |y| <= a*n at this level");
  LevelSet s(n, -t, t);
  s.fill();
  return s;
}

LevelSet centered_sites(int level, int m) {
  if (m <= 0) throw std::invalid_argument("centered_sites: need m > 0");
  // span [lo, lo + 2(m-1)] straddling 0, nudged onto the level's parity
  int lo = -(m - 1);
  if (((lo ^ level) & 1)) lo -= 1;
  LevelSet s(level, lo, lo + 2 * (m - 1));
  s.fill();
  return s;
}

std::string initial_name(const InitialKind& k) {
  struct V {
    std::string operator()(Singleton) const { return "singleton"; }
    std::string operator()(IntervalInit i) const { return "interval:" + std::to_string(i.k); }
    std::string operator()(HalfLineInit) const { return "halfline"; }
    std::string operator()(FullLineInit) const { return "fullline"; }
    std::string operator()(ProductInit p) const { return "product:" + std::to_string(p.p); }
  };
  return std::visit(V{}, k);
}

InitialKind parse_initial(const std::string& text) {
  if (text == "singleton") return Singleton{};
  if (text == "halfline") return HalfLineInit{};
  if (text == "fullline") return FullLineInit{};
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (head == "interval") return IntervalInit{std::stoi(arg)};
    if (head == "product") return ProductInit{std::stod(arg)};
  } catch (const std::exception&) {
    // fall through to the uniform message below
  }
  throw std::invalid_argument(
      "initial condition: expected singleton, interval:k, halfline, fullline, or product:p");
}

namespace {

// Even bound >= v, for level-0 windows.
int even_up(int v) { return v + (v & 1); }

}  // namespace

Initial make_initial(const InitialKind& kind, int horizon, int observe_halfwidth,
                     const RandomSource* src) {
  if (horizon < 0 || horizon >= kMaxLevel) throw std::invalid_argument("make_initial: bad horizon");
  if (observe_halfwidth < 0) throw std::invalid_argument("make_initial: bad window");

  Initial out;
  if (std::holds_alternative<Singleton>(kind)) {
    out.set0 = LevelSet(0, 0, 0);
    out.set0.set(0);
  } else if (auto* iv = std::get_if<IntervalInit>(&kind)) {
    if (iv->k < 0) throw std::invalid_argument("make_initial: interval needs k >= 0");
    out.set0 = LevelSet(0, -2 * iv->k, 2 * iv->k);
    out.set0.fill();
  } else if (std::holds_alternative<HalfLineInit>(kind)) {
    // truncated at -2*horizon; the right edge is free to grow
    out.set0 = LevelSet(0, -2 * horizon, 0);
    out.set0.fill();
    out.set0.left_censored = true;
    out.left = EdgePolicy::shrink;
  } else {
    // full line or product: light-cone closure of the observation window,
    // shrinking one site per side per level keeps everything reported exact
    int w = even_up(observe_halfwidth + horizon);
    out.set0 = LevelSet(0, -w, w);
    out.set0.left_censored = true;
    out.set0.right_censored = true;
    out.left = EdgePolicy::shrink;
    out.right = EdgePolicy::shrink;
    if (std::holds_alternative<FullLineInit>(kind)) {
      out.set0.fill();
    } else {
      double p = std::get<ProductInit>(kind).p;
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("make_initial: product prob outside [0, 1]");
      if (!src) throw std::invalid_argument("make_initial: product start needs a random source");
      std::uint64_t thr = threshold53(p);
      for (int y = -w; y <= w; y += 2) {
        if (src->raw53(y, 0, Channel::init_occupancy) < thr) out.set0.set(y);
      }
    }
    // both edges shrinking costs one site per level
    if (out.set0.width() <= horizon)
      throw std::invalid_argument("make_initial: window too narrow for horizon");
  }
  return out;
}

}  // namespace operc
