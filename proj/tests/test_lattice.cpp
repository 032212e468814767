#include <stdexcept>

#include "doctest.h"
#include "operc/lattice.hpp"
#include "operc/rng.hpp"

using operc::LevelSet;

TEST_CASE("biggest even integer strictly below") {
  CHECK(operc::floor_even(5.3) == 4);
  CHECK(operc::floor_even(4.0) == 2);  // strict: 4 itself does not qualify
  CHECK(operc::floor_even(2.1) == 2);
  CHECK(operc::floor_even(0.5) == 0);
  CHECK(operc::floor_even(-1.2) == -2);
  CHECK(operc::floor_even(-2.0) == -4);
}

TEST_CASE("biggest even integer at or below") {
  CHECK(operc::floor_even_le(5.3) == 4);
  CHECK(operc::floor_even_le(4.0) == 4);
  CHECK(operc::floor_even_le(-1.2) == -2);
  CHECK(operc::floor_even_le(-2.0) == -2);
  CHECK(operc::floor_even_le(0.0) == 0);
}

TEST_CASE("level sets hold parity-valid sites in a window") {
  LevelSet s(3, -5, 5);  // level 3: odd y only
  CHECK(s.width() == 6);
  CHECK_FALSE(s.any());
  CHECK(s.in_window(-5));
  CHECK_FALSE(s.in_window(0));  // wrong parity
  CHECK_FALSE(s.in_window(7));  // outside
  s.set(-3);
  s.set(5);
  CHECK(s.count() == 2);
  CHECK(s.test(-3));
  CHECK_FALSE(s.test(-1));
  CHECK(s.inf().value() == -3);
  CHECK(s.sup().value() == 5);
  CHECK(s.sites() == std::vector<int>{-3, 5});
  CHECK_THROWS_AS(s.set(0), std::out_of_range);
  CHECK_THROWS_AS(s.test(2), std::out_of_range);
  s.clear(-3);
  CHECK(s.count() == 1);
  s.reset();
  CHECK_FALSE(s.any());
  CHECK_FALSE(s.sup().has_value());
  s.fill();
  CHECK(s.count() == 6);
}

TEST_CASE("subset relation tolerates differing windows") {
  LevelSet a(2, -4, 4);
  a.set(0);
  a.set(2);
  LevelSet b(2, -8, 8);
  b.set(0);
  b.set(2);
  b.set(4);
  CHECK(a.subset_of(b));
  CHECK_FALSE(b.subset_of(a));
  LevelSet c(2, -2, 2);
  c.set(0);
  CHECK(c.subset_of(a));
}

TEST_CASE("cone sites cover |y| <= a*n at the level's parity") {
  auto c = operc::cone_sites(4, 0.5);
  CHECK(c.level() == 4);
  CHECK(c.sites() == std::vector<int>{-2, 0, 2});
  auto full = operc::cone_sites(3, 1.0);
  CHECK(full.sites() == std::vector<int>{-3, -1, 1, 3});
  CHECK_THROWS_AS(operc::cone_sites(3, 0.1), std::invalid_argument);
}

TEST_CASE("centered sites pick the m sites closest to the origin") {
  CHECK(operc::centered_sites(0, 3).sites() == std::vector<int>{-2, 0, 2});
  CHECK(operc::centered_sites(0, 4).sites() == std::vector<int>{-4, -2, 0, 2});
  CHECK(operc::centered_sites(1, 2).sites() == std::vector<int>{-1, 1});
  CHECK(operc::centered_sites(1, 3).sites() == std::vector<int>{-3, -1, 1});
}

TEST_CASE("initial conditions: finite starts are exact, infinite starts censor") {
  operc::RandomSource src(5, 0);

  auto point = operc::make_initial(operc::Singleton{}, 8, 0, &src);
  CHECK(point.set0.sites() == std::vector<int>{0});
  CHECK_FALSE(point.set0.left_censored);
  CHECK_FALSE(point.set0.right_censored);
  CHECK(point.left == operc::EdgePolicy::grow);
  CHECK(point.right == operc::EdgePolicy::grow);

  auto iv = operc::make_initial(operc::IntervalInit{2}, 8, 0, &src);
  CHECK(iv.set0.sites() == std::vector<int>{-4, -2, 0, 2, 4});

  auto half = operc::make_initial(operc::HalfLineInit{}, 8, 0, &src);
  CHECK(half.set0.left_censored);
  CHECK_FALSE(half.set0.right_censored);
  CHECK(half.set0.sup().value() == 0);
  CHECK(half.set0.y_lo() == -16);  // window depth 2 * horizon
  CHECK(half.set0.count() == half.set0.width());
  CHECK(half.left == operc::EdgePolicy::shrink);
  CHECK(half.right == operc::EdgePolicy::grow);

  auto fullline = operc::make_initial(operc::FullLineInit{}, 8, 4, &src);
  CHECK(fullline.set0.left_censored);
  CHECK(fullline.set0.right_censored);
  CHECK(fullline.set0.count() == fullline.set0.width());
  CHECK(fullline.left == operc::EdgePolicy::shrink);
  CHECK(fullline.right == operc::EdgePolicy::shrink);
  // wide enough that every |y| <= observe_halfwidth site stays exact at the horizon
  CHECK(fullline.set0.y_hi() >= 4 + 8);

  auto prod = operc::make_initial(operc::ProductInit{0.5}, 8, 4, &src);
  CHECK(prod.set0.left_censored);
  CHECK(prod.set0.right_censored);
  CHECK(prod.set0.count() < prod.set0.width());  // a fair coin leaves gaps
  // occupancy is decided per site by the dedicated channel
  bool expect0 = src.raw53(prod.set0.y_lo(), 0, operc::Channel::init_occupancy) <
                 operc::threshold53(0.5);
  CHECK(prod.set0.test(prod.set0.y_lo()) == expect0);
}

TEST_CASE("random starts demand a source and a valid density") {
  CHECK_THROWS_AS(operc::make_initial(operc::ProductInit{0.5}, 8, 0, nullptr),
                  std::invalid_argument);
  operc::RandomSource src(5, 0);
  CHECK_THROWS_AS(operc::make_initial(operc::ProductInit{1.5}, 8, 0, &src),
                  std::invalid_argument);
  CHECK_THROWS_AS(operc::make_initial(operc::IntervalInit{-1}, 8, 0, &src),
                  std::invalid_argument);
}
