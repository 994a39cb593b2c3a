#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "grouprl/rng.hpp"
#include "grouprl/taskgen.hpp"

using namespace grouprl;

TEST_CASE("position space construction") {
  const PositionSpace space(64, 3);
  CHECK(space.dpos() == 64);
  CHECK(space.l_max() == 63);
  // permutation composed with its inverse is the identity
  for (int x = 0; x < 64; ++x) CHECK(space.align_inv(space.align(x)) == x);
  // same seed gives the identical permutation
  const PositionSpace again(64, 3);
  for (int x = 0; x < 64; ++x) CHECK(space.align(x) == again.align(x));
  CHECK_THROWS_AS(PositionSpace(2, 0), Error);
}

TEST_CASE("tokenizer bijectivity") {
  const Tokenizer ident(12);
  for (int i = 0; i < 12; ++i) CHECK(ident.to_class(static_cast<Elem>(i)) == i);
  const Tokenizer shuf(12, 99);
  std::set<int> classes;
  for (int i = 0; i < 12; ++i) {
    const int c = shuf.to_class(static_cast<Elem>(i));
    classes.insert(c);
    CHECK(shuf.to_state(c) == i);
  }
  CHECK(classes.size() == 12);
}

TEST_CASE("sampled instances satisfy every invariant") {
  const auto z96 = GroupTable::cyclic(96);
  const PositionSpace space(64, 7);
  auto rng = make_stream(1, 2);
  for (int trial = 0; trial < 500; ++trial) {
    const int L = 2 + int(rng() % 40);
    const Instance inst = sample_instance(z96, space, L, rng);
    const auto violations = validate_instance(inst, z96, space);
    CHECK(violations.empty());
    // alignment holds exhaustively
    for (int l = 0; l < L; ++l) CHECK(inst.answer_pos[l] == space.align(inst.prompt_pos[l]));
    // final state equals the folded product acting on y0
    CHECK(inst.states.back() == z96.act(z96.fold_compose(inst.transitions), inst.y0));
  }
}

TEST_CASE("horizon bounds are enforced") {
  const auto z6 = GroupTable::cyclic(6);
  const PositionSpace space(64, 7);
  auto rng = make_stream(3, 1);
  CHECK_THROWS_AS(sample_instance(z6, space, 7, rng), Error);  // L > d
  CHECK_THROWS_AS(sample_instance(z6, space, 1, rng), Error);
  const PositionSpace tiny(4, 7);
  const auto z96 = GroupTable::cyclic(96);
  CHECK_THROWS_AS(sample_instance(z96, tiny, 4, rng), Error);  // L > dpos - 1
  CHECK_NOTHROW(sample_instance(z96, tiny, 3, rng));
}

TEST_CASE("validator reports corruptions") {
  const auto z96 = GroupTable::cyclic(96);
  const PositionSpace space(64, 7);
  auto rng = make_stream(5, 5);
  Instance inst = sample_instance(z96, space, 5, rng);

  Instance dup = inst;
  dup.transitions[1] = dup.transitions[0];
  CHECK_FALSE(validate_instance(dup, z96, space).empty());

  Instance broken_chain = inst;
  broken_chain.states[2] = static_cast<Elem>((broken_chain.states[2] + 1) % 96);
  CHECK_FALSE(validate_instance(broken_chain, z96, space).empty());

  Instance misaligned = inst;
  misaligned.answer_pos[0] = (misaligned.answer_pos[0] + 1) % 64;
  CHECK_FALSE(validate_instance(misaligned, z96, space).empty());
}

TEST_CASE("marginals: uniform y0 and uniform first transition") {
  const auto z96 = GroupTable::cyclic(96);
  const PositionSpace space(64, 11);
  auto rng = make_stream(17, 23);
  const int n = 100000;
  std::vector<int> y0_count(96, 0), g1_count(96, 0);
  for (int i = 0; i < n; ++i) {
    const Instance inst = sample_instance(z96, space, 5, rng);
    ++y0_count[inst.y0];
    ++g1_count[inst.transitions[0]];
  }
  // chi-square against uniform, 95 degrees of freedom: mean 95, sd ~13.8
  auto chi2 = [&](const std::vector<int>& counts) {
    const double expect = double(n) / 96.0;
    double stat = 0.0;
    for (int c : counts) stat += (c - expect) * (c - expect) / expect;
    return stat;
  };
  CHECK(chi2(y0_count) < 95.0 + 4.0 * std::sqrt(2.0 * 95.0));
  CHECK(chi2(g1_count) < 95.0 + 4.0 * std::sqrt(2.0 * 95.0));
}
