#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "grouprl/group.hpp"
#include "grouprl/rng.hpp"

using namespace grouprl;

TEST_CASE("cyclic group basics") {
  const auto z96 = GroupTable::cyclic(96);
  CHECK(z96.order() == 96);
  CHECK(z96.identity() == 0);
  CHECK(z96.abelian());
  CHECK(z96.act(10, 90) == 4);

  const auto z6 = GroupTable::cyclic(6);
  CHECK(z6.compose(2, 3) == 5);
  CHECK(z6.compose(4, 5) == 3);
  const auto z2 = GroupTable::cyclic(2);
  CHECK(z2.compose(1, 1) == 0);

  CHECK_THROWS_AS(GroupTable::cyclic(1), Error);
}

TEST_CASE("permutation group orders and flags") {
  const auto s3 = GroupTable::symmetric(3);
  CHECK(s3.order() == 6);
  CHECK_FALSE(s3.abelian());
  const auto a4 = GroupTable::alternating(4);
  CHECK(a4.order() == 12);
  const auto a5 = GroupTable::alternating(5);
  CHECK(a5.order() == 60);
  CHECK_FALSE(a5.abelian());
  CHECK_THROWS_AS(GroupTable::symmetric(9), Error);
  CHECK_THROWS_AS(GroupTable::alternating(2), Error);
  CHECK_THROWS_AS(GroupTable::symmetric(8), Error);  // 40320 exceeds the table cap
}

TEST_CASE("identity, inverses and the Latin-square property") {
  for (const auto& g : {GroupTable::cyclic(7), GroupTable::symmetric(4), GroupTable::alternating(4)}) {
    const int d = g.order();
    for (int a = 0; a < d; ++a) {
      CHECK(g.compose(static_cast<Elem>(a), g.inverse(static_cast<Elem>(a))) == g.identity());
      CHECK(g.compose(g.identity(), static_cast<Elem>(a)) == a);
      // row a is a permutation
      std::set<Elem> row;
      for (int b = 0; b < d; ++b) row.insert(g.compose(static_cast<Elem>(a), static_cast<Elem>(b)));
      CHECK(static_cast<int>(row.size()) == d);
    }
  }
}

TEST_CASE("action is a bijection in g for fixed y") {
  for (const auto& g : {GroupTable::cyclic(96), GroupTable::symmetric(3)}) {
    const Elem y = static_cast<Elem>(g.order() / 2);
    std::set<Elem> image;
    for (int a = 0; a < g.order(); ++a) image.insert(g.act(static_cast<Elem>(a), y));
    CHECK(static_cast<int>(image.size()) == g.order());
  }
}

TEST_CASE("two transpositions compose to a 3-cycle in S3") {
  const auto s3 = GroupTable::symmetric(3);
  // enumerate orders: element order 2 = transposition, order 3 = 3-cycle
  auto elem_order = [&](Elem a) {
    int n = 1;
    Elem x = a;
    while (x != s3.identity()) {
      x = s3.compose(x, a);
      ++n;
    }
    return n;
  };
  std::vector<Elem> transpositions, threecycles;
  for (int a = 0; a < 6; ++a) {
    if (elem_order(static_cast<Elem>(a)) == 2) transpositions.push_back(static_cast<Elem>(a));
    if (elem_order(static_cast<Elem>(a)) == 3) threecycles.push_back(static_cast<Elem>(a));
  }
  REQUIRE(transpositions.size() == 3);
  REQUIRE(threecycles.size() == 2);
  bool found_noncommuting = false;
  for (Elem a : transpositions)
    for (Elem b : transpositions) {
      if (a == b) continue;
      const Elem c = s3.compose(a, b);
      CHECK(elem_order(c) == 3);
      if (s3.compose(a, b) != s3.compose(b, a)) found_noncommuting = true;
    }
  CHECK(found_noncommuting);
}

TEST_CASE("compose_path matches the folded product") {
  const auto z6 = GroupTable::cyclic(6);
  const std::vector<Elem> ts{1, 1, 1};
  const auto states = z6.compose_path(ts, 0);
  CHECK(states == std::vector<Elem>{1, 2, 3});
  CHECK_THROWS_AS(z6.compose_path({}, 0), Error);

  const auto s3 = GroupTable::symmetric(3);
  for (int g1 = 0; g1 < 6; ++g1)
    for (int g2 = 0; g2 < 6; ++g2)
      for (int g3 = 0; g3 < 6; ++g3) {
        const std::vector<Elem> path{static_cast<Elem>(g1), static_cast<Elem>(g2),
                                     static_cast<Elem>(g3)};
        for (int y0 = 0; y0 < 6; ++y0) {
          const auto ys = s3.compose_path(path, static_cast<Elem>(y0));
          CHECK(ys.back() == s3.act(s3.fold_compose(path), static_cast<Elem>(y0)));
        }
      }

  // random paths on a larger group
  auto rng = make_stream(7, 7);
  const auto a4 = GroupTable::alternating(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Elem> path(1 + rng() % 6);
    for (auto& e : path) e = static_cast<Elem>(rng() % a4.order());
    const Elem y0 = static_cast<Elem>(rng() % a4.order());
    CHECK(a4.compose_path(path, y0).back() == a4.act(a4.fold_compose(path), y0));
  }
}

TEST_CASE("simplicity scan") {
  CHECK(GroupTable::cyclic(7).simple() == true);    // prime order
  CHECK(GroupTable::cyclic(12).simple() == false);  // plenty of subgroups
  CHECK(GroupTable::symmetric(3).simple() == false);
  CHECK(GroupTable::alternating(5).simple() == true);
  CHECK_FALSE(GroupTable::cyclic(96).simple().has_value());  // above the scan cap
}
