#include "operc/engine.hpp"

#include <bit>

namespace operc {

namespace {

// Word-level shift by one site toward higher indices; bits beyond `nbits` cleared.
void shl1_or(const std::vector<std::uint64_t>& in, std::vector<std::uint64_t>& out,
             std::size_t nwords) {
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < nwords; ++i) {
    std::uint64_t w = i < in.size() ? in[i] : 0;
    out[i] = (w << 1) | carry | w;
    carry = w >> 63;
  }
}

void shr1_or(const std::vector<std::uint64_t>& in, std::vector<std::uint64_t>& out,
             std::size_t nwords) {
  for (std::size_t i = 0; i < nwords; ++i) {
    std::uint64_t w = i < in.size() ? in[i] : 0;
    std::uint64_t next = i + 1 < in.size() ? in[i + 1] : 0;
    out[i] = w | (w >> 1) | (next << 63);
  }
}

void mask_tail(std::vector<std::uint64_t>& words, std::size_t nbits) {
  std::size_t tail = nbits & 63;
  if (tail) words[(nbits - 1) >> 6] &= (std::uint64_t{1} << tail) - 1;
  for (std::size_t i = (nbits + 63) / 64; i < words.size(); ++i) words[i] = 0;
}

// Next-level window from the edge policies.
void next_window(const LevelSet& in, EdgePolicy left, EdgePolicy right, int& lo, int& hi) {
  lo = in.y_lo() + (left == EdgePolicy::grow ? -1 : 1);
  hi = in.y_hi() + (right == EdgePolicy::grow ? 1 : -1);
  if (hi < lo) throw std::invalid_argument("step: window exhausted");
}

// out bit i' = T[i' + d] | T[i' + d + 1] with d = -1 (left grow) or 0 (left shrink).
LevelSet spread(const LevelSet& in, const std::vector<std::uint64_t>& T,
                EdgePolicy left, EdgePolicy right) {
  int lo, hi;
  next_window(in, left, right, lo, hi);
  LevelSet out(in.level() + 1, lo, hi);
  std::size_t nbits = static_cast<std::size_t>(out.width());
  if (left == EdgePolicy::grow) {
    shl1_or(T, out.words(), out.words().size());
  } else {
    shr1_or(T, out.words(), out.words().size());
  }
  mask_tail(out.words(), nbits);
  out.left_censored = in.left_censored;
  out.right_censored = in.right_censored;
  return out;
}

template <class K>
void open_mask_of(const LevelSet& in, const std::vector<std::uint64_t>& occ, const K& kernel,
                  const RandomSource& src, std::vector<std::uint64_t>& mask) {
  mask.assign(in.words().size(), 0);
  int n = in.level();
  int lo = in.y_lo();
  for (std::size_t wi = 0; wi < occ.size(); ++wi) {
    std::uint64_t rem = occ[wi];
    std::uint64_t m = 0;
    int base = static_cast<int>(wi) * 64;
    while (rem) {
      int b = std::countr_zero(rem);
      rem &= rem - 1;
      if (kernel.open(src, lo + 2 * (base + b), n)) m |= std::uint64_t{1} << b;
    }
    mask[wi] = m;
  }
}

template <class K>
LevelSet site_step_impl(const LevelSet& in, const K& kernel, const RandomSource& src,
                        EdgePolicy left, EdgePolicy right, std::vector<std::uint64_t>& scratch) {
  if (in.level() == 0) return spread(in, in.words(), left, right);
  open_mask_of(in, in.words(), kernel, src, scratch);
  return spread(in, scratch, left, right);
}

struct BondOpen {
  std::uint64_t thr;
  Channel ch;
  bool open(const RandomSource& src, int y, int n) const { return src.raw53(y, n, ch) < thr; }
};

LevelSet bond_step_impl(const LevelSet& in, double p, const RandomSource& src,
                        EdgePolicy left, EdgePolicy right,
                        std::vector<std::uint64_t>& sl, std::vector<std::uint64_t>& sr) {
  std::uint64_t thr = threshold53(p);
  open_mask_of(in, in.words(), BondOpen{thr, Channel::bond_left}, src, sl);
  open_mask_of(in, in.words(), BondOpen{thr, Channel::bond_right}, src, sr);
  for (std::size_t i = 0; i < sl.size(); ++i) {
    sl[i] &= in.words()[i];
    sr[i] &= in.words()[i];
  }
  // child via right bond sits one index above its source, via left bond one below
  int lo, hi;
  next_window(in, left, right, lo, hi);
  LevelSet out(in.level() + 1, lo, hi);
  int d = left == EdgePolicy::grow ? -1 : 0;
  auto& W = out.words();
  for (std::size_t i = 0; i < W.size(); ++i) {
    auto at = [&](const std::vector<std::uint64_t>& v, std::ptrdiff_t j) -> std::uint64_t {
      return j >= 0 && j < static_cast<std::ptrdiff_t>(v.size()) ? v[j] : 0;
    };
    std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i);
    // out[i'] = R[i' + d] | L[i' + d + 1]
    std::uint64_t r_part, l_part;
    if (d == -1) {
      r_part = (at(sr, j) << 1) | (at(sr, j - 1) >> 63);
      l_part = at(sl, j);
    } else {
      r_part = at(sr, j);
      l_part = (at(sl, j) >> 1) | (at(sl, j + 1) << 63);
    }
    W[i] = r_part | l_part;
  }
  mask_tail(W, static_cast<std::size_t>(out.width()));
  out.left_censored = in.left_censored;
  out.right_censored = in.right_censored;
  return out;
}

struct Recorder {
  TrajectoryStats* st;
  const ProcessParams* params;
  bool halfline_rule;  // left-truncated with a live right edge

  void operator()(const LevelSet& s, int n) {
    auto hi = s.sup();
    auto lo = s.inf();
    st->r[n] = hi ? *hi : kNoEdge;
    st->l[n] = lo ? *lo : kNoEdge;
    bool censored;
    if (s.left_censored && s.right_censored) {
      censored = true;  // edges of a two-sided truncation are never trusted
    } else if (halfline_rule) {
      censored = !hi || *hi <= -st->horizon;
    } else {
      censored = false;
    }
    st->edge_censored[n] = censored ? 1 : 0;
    if (s.any() && n > st->survived_to) st->survived_to = n;
    for (int c : params->checkpoints) {
      if (c == n) st->snapshots.emplace(n, s);
    }
  }
};

template <class K>
TrajectoryStats run_site_impl(const ProcessParams& P, const K& kernel, const RandomSource& src) {
  Initial init = make_initial(P.init, P.horizon, P.observe_halfwidth, &src);
  TrajectoryStats st;
  st.horizon = P.horizon;
  st.r.assign(P.horizon + 1, kNoEdge);
  st.l.assign(P.horizon + 1, kNoEdge);
  st.edge_censored.assign(P.horizon + 1, 0);
  Recorder rec{&st, &P, init.set0.left_censored && !init.set0.right_censored};

  LevelSet cur = std::move(init.set0);
  std::vector<std::uint64_t> scratch;
  for (int n = 0;; ++n) {
    if (!P.include_reached_closed && n >= 1) {
      open_mask_of(cur, cur.words(), kernel, src, scratch);
      LevelSet filtered = cur;
      for (std::size_t i = 0; i < filtered.words().size(); ++i) filtered.words()[i] &= scratch[i];
      rec(filtered, n);
    } else {
      rec(cur, n);
    }
    if (n == P.horizon || !cur.any()) break;
    cur = site_step_impl(cur, kernel, src, init.left, init.right, scratch);
  }
  return st;
}

TrajectoryStats run_bond_impl(const ProcessParams& P, const RandomSource& src) {
  Initial init = make_initial(P.init, P.horizon, P.observe_halfwidth, &src);
  TrajectoryStats st;
  st.horizon = P.horizon;
  st.r.assign(P.horizon + 1, kNoEdge);
  st.l.assign(P.horizon + 1, kNoEdge);
  st.edge_censored.assign(P.horizon + 1, 0);
  Recorder rec{&st, &P, init.set0.left_censored && !init.set0.right_censored};

  LevelSet cur = std::move(init.set0);
  std::vector<std::uint64_t> sl, sr;
  for (int n = 0;; ++n) {
    rec(cur, n);
    if (n == P.horizon || !cur.any()) break;
    cur = bond_step_impl(cur, P.bond_p, src, init.left, init.right, sl, sr);
  }
  return st;
}

}  // namespace

LevelSet site_step(const LevelSet& in, const SiteKernel& kernel, const RandomSource& src,
                   EdgePolicy left, EdgePolicy right) {
  std::vector<std::uint64_t> scratch;
  return std::visit(
      [&](const auto& k) { return site_step_impl(in, k, src, left, right, scratch); }, kernel);
}

LevelSet bond_step(const LevelSet& in, double p, const RandomSource& src,
                   EdgePolicy left, EdgePolicy right) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bond_step: p outside [0, 1]");
  std::vector<std::uint64_t> sl, sr;
  return bond_step_impl(in, p, src, left, right, sl, sr);
}

TrajectoryStats run_process(const ProcessParams& params, std::uint64_t seed, std::uint64_t stream) {
  if (params.horizon < 0 || params.horizon >= kMaxLevel)
    throw std::invalid_argument("run_process: bad horizon");
  RandomSource src(seed, stream);
  if (params.mode == ProcessMode::bond) {
    if (!(params.bond_p >= 0.0 && params.bond_p <= 1.0))
      throw std::invalid_argument("run_process: p outside [0, 1]");
    return run_bond_impl(params, src);
  }
  return std::visit([&](const auto& k) { return run_site_impl(params, k, src); }, params.kernel);
}

CoupledResult run_coupled(const SiteKernel& kernel, const InitialKind& init_site,
                          const InitialKind& init_bond, int horizon,
                          std::uint64_t seed, std::uint64_t stream,
                          const std::vector<int>& checkpoints) {
  RandomSource src(seed, stream);
  Initial a0 = make_initial(init_site, horizon, 0, &src);
  Initial b0 = make_initial(init_bond, horizon, 0, &src);
  if (a0.left != b0.left || a0.right != b0.right)
    throw std::invalid_argument("run_coupled: initial conditions need matching window policies");

  // realign both to the union window so the sets stay word-comparable
  int lo = std::min(a0.set0.y_lo(), b0.set0.y_lo());
  int hi = std::max(a0.set0.y_hi(), b0.set0.y_hi());
  auto embed = [&](const LevelSet& s) {
    LevelSet out(0, lo, hi);
    out.left_censored = s.left_censored;
    out.right_censored = s.right_censored;
    for (int y : s.sites()) out.set(y);
    return out;
  };
  LevelSet A = embed(a0.set0);
  LevelSet B = embed(b0.set0);
  for (int y : B.sites()) {
    if (!A.test(y)) throw std::invalid_argument("run_coupled: bond start not inside site start");
  }

  CoupledResult res;
  auto& sa = res.site;
  auto& sb = res.bond;
  for (TrajectoryStats* s : {&sa, &sb}) {
    s->horizon = horizon;
    s->r.assign(horizon + 1, kNoEdge);
    s->l.assign(horizon + 1, kNoEdge);
    s->edge_censored.assign(horizon + 1, 0);
  }
  ProcessParams prec;
  prec.checkpoints = checkpoints;
  prec.horizon = horizon;
  Recorder reca{&sa, &prec, false};
  Recorder recb{&sb, &prec, false};

  std::vector<std::uint64_t> open_now, occ_union, bpre;
  auto do_level = [&](int n) {
    reca(A, n);
    recb(B, n);
    for (std::size_t i = 0; i < A.words().size(); ++i) {
      if (B.words()[i] & ~A.words()[i]) {
        res.contained = false;
        if (!res.first_violation) {
          std::uint64_t bad = B.words()[i] & ~A.words()[i];
          int b = std::countr_zero(bad);
          res.first_violation = SiteCoord{A.y_lo() + 2 * (static_cast<int>(i) * 64 + b), n};
        }
      }
    }
  };

  std::visit(
      [&](const auto& k) {
        do_level(0);
        for (int n = 0; n < horizon; ++n) {
          // transmit set of A at level n; level 0 transmits everything
          if (n == 0) {
            open_now.assign(A.words().size(), ~std::uint64_t{0});
          } else {
            occ_union.resize(A.words().size());
            for (std::size_t i = 0; i < occ_union.size(); ++i)
              occ_union[i] = A.words()[i] | B.words()[i];
            open_mask_of(A, occ_union, k, src, open_now);
          }
          std::vector<std::uint64_t> ta(A.words().size());
          for (std::size_t i = 0; i < ta.size(); ++i) ta[i] = A.words()[i] & open_now[i];
          LevelSet nextA = spread(A, n == 0 ? A.words() : ta, a0.left, a0.right);
          LevelSet pre = spread(B, B.words(), a0.left, a0.right);
          // coupled bond rule: the bond into (y, n+1) is open iff that site is open
          open_mask_of(pre, pre.words(), k, src, bpre);
          for (std::size_t i = 0; i < pre.words().size(); ++i) pre.words()[i] &= bpre[i];
          A = std::move(nextA);
          B = std::move(pre);
          do_level(n + 1);
          if (!A.any() && !B.any()) break;
        }
      },
      kernel);
  return res;
}

std::optional<int> edge_right(const TrajectoryStats& t, int n) {
  if (n < 0 || n > t.horizon) throw std::invalid_argument("edge_right: level outside horizon");
  if (n >= static_cast<int>(t.r.size()) || t.r[n] == kNoEdge || t.edge_censored[n]) return std::nullopt;
  return t.r[n];
}

}  // namespace operc
