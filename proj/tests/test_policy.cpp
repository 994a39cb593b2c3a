#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grouprl/policy.hpp"
#include "grouprl/rng.hpp"

using namespace grouprl;

namespace {

AttentionParams random_full(int dpos, std::mt19937_64& rng, double scale = 1.5) {
  AttentionParams p = AttentionParams::full_zero(dpos);
  std::uniform_real_distribution<double> unif(-scale, scale);
  for (auto& v : p.qmat) v = unif(rng);
  return p;
}

}  // namespace

TEST_CASE("attention weights: reduced closed form and full-path agreement") {
  const auto z12 = GroupTable::cyclic(12);
  const PositionSpace space(16, 5);
  auto rng = make_stream(2, 9);
  const Instance inst = sample_instance(z12, space, 5, rng);

  // q = r gives the uniform 1/L pattern
  const auto uni = attention_weights(AttentionParams::reduced(0.7, 0.7), space, inst, 2);
  for (double w : uni) CHECK(w == doctest::Approx(0.2).epsilon(1e-12));

  // q - r = ln(L-1) puts weight 1/2 on the target
  const auto half = attention_weights(AttentionParams::reduced(std::log(4.0), 0.0), space, inst, 3);
  CHECK(half[3] == doctest::Approx(0.5).epsilon(1e-12));

  // L = 5, q = 2, r = 0: target weight e^2/(e^2+4), and the reduced params
  // match their own full-matrix materialization
  const auto params = AttentionParams::reduced(2.0, 0.0);
  const auto full = params.to_full(space);
  for (int step = 0; step < 5; ++step) {
    const auto wr = attention_weights(params, space, inst, step);
    const auto wf = attention_weights(full, space, inst, step);
    CHECK(wr[step] == doctest::Approx(std::exp(2.0) / (std::exp(2.0) + 4.0)).epsilon(1e-12));
    for (int m = 0; m < 5; ++m) CHECK(wr[m] == doctest::Approx(wf[m]).epsilon(1e-12));
  }
}

TEST_CASE("step law closed form") {
  // attn = 1/L makes target and context probabilities coincide
  const StepLaw sym = step_probabilities(1.0 / 4, 4, 24, 3);
  CHECK(sym.p1 == doctest::Approx(sym.p2).epsilon(1e-12));

  // attn = 1, L = 2, d = 96, C_B = 2: p1 = 96^2 / (96^2 + 1 + 94)
  const StepLaw sat = step_probabilities(1.0, 2, 96, 2);
  CHECK(sat.p1 == doctest::Approx(96.0 * 96.0 / (96.0 * 96.0 + 1.0 + 94.0)).epsilon(1e-12));

  // normalization over 1000 random inputs
  auto rng = make_stream(31, 2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const int d = 4 + int(rng() % 93);
    const int L = 2 + int(rng() % std::min(6, d - 1));
    const StepLaw law = step_probabilities(unif(rng), L, d, 2 + int(rng() % 4));
    CHECK(law.p1 + (L - 1) * law.p2 + (d - L) * law.p3 == doctest::Approx(1.0).epsilon(1e-12));
  }

  // p1 is strictly increasing in the target attention
  double prev = -1.0;
  for (double a = 0.0; a <= 1.0; a += 0.05) {
    const double p1 = step_probabilities(a, 5, 96, 3).p1;
    CHECK(p1 > prev);
    prev = p1;
  }

  // degenerate flag when every class is in-context
  CHECK(step_probabilities(0.5, 12, 12, 3).degenerate);
  CHECK_FALSE(step_probabilities(0.5, 11, 12, 3).degenerate);
}

TEST_CASE("structured logits match the designated-neuron closed forms") {
  const auto z12 = GroupTable::cyclic(12);
  const PositionSpace space(16, 5);
  const Tokenizer tok(12);
  const MlpConfig mlp = MlpConfig::make(3, 12);
  auto rng = make_stream(8, 8);
  const Instance inst = sample_instance(z12, space, 4, rng);

  // full target attention: target logit B + σ0, everything else σ0
  AttentionParams big = AttentionParams::reduced(40.0, 0.0);
  const auto logits = step_logits(big, mlp, space, tok, z12, inst, inst.y0, 0);
  const int target = tok.to_class(z12.act(inst.transitions[0], inst.y0));
  CHECK(logits[target] == doctest::Approx(mlp.b + mlp.sigma0).epsilon(1e-9));
  for (int j = 0; j < 12; ++j)
    if (j != target) CHECK(logits[j] <= mlp.b / 4 + mlp.sigma0);

  // uniform attention: every context class gets B/L + σ0
  const auto uni = step_logits(AttentionParams::reduced(0.0, 0.0), mlp, space, tok, z12, inst,
                               inst.y0, 1);
  for (int m = 0; m < 4; ++m) {
    const int cls = tok.to_class(z12.act(inst.transitions[m], inst.y0));
    CHECK(uni[cls] == doctest::Approx(mlp.b / 4 + mlp.sigma0).epsilon(1e-12));
  }
}

TEST_CASE("structured and literal MLP paths agree") {
  auto rng = make_stream(3, 33);
  for (int d : {6, 8, 12}) {
    const auto table = GroupTable::cyclic(d);
    const PositionSpace space(16, 4);
    const Tokenizer tok(d, /*shuffle_seed=*/d);  // exercise a nontrivial tokenizer
    const MlpConfig mlp = MlpConfig::make(3, d);
    const LiteralMlp literal(table, tok, mlp);
    for (int L : {2, 3}) {
      for (int trial = 0; trial < 8; ++trial) {
        const Instance inst = sample_instance(table, space, L, rng);
        const auto params = random_full(16, rng);
        for (int step = 0; step < L; ++step)
          for (int y = 0; y < d; ++y) {
            const auto fast =
                step_logits(params, mlp, space, tok, table, inst, static_cast<Elem>(y), step);
            const auto slow = literal.logits(params, space, inst, static_cast<Elem>(y), step);
            for (int j = 0; j < d; ++j) CHECK(fast[j] == doctest::Approx(slow[j]).epsilon(1e-12));
          }
      }
    }
  }
  // the literal path refuses to materialize beyond its cap
  const auto z96 = GroupTable::cyclic(96);
  CHECK_THROWS_AS(LiteralMlp(z96, Tokenizer(96), MlpConfig::make(3, 96)), Error);
}

TEST_CASE("step distribution matches the closed-form law under reduced params") {
  const auto z96 = GroupTable::cyclic(96);
  const PositionSpace space(64, 9);
  const Tokenizer tok(96);
  const MlpConfig mlp = MlpConfig::make(3, 96);
  auto rng = make_stream(6, 21);
  const Instance inst = sample_instance(z96, space, 5, rng);
  const auto params = AttentionParams::reduced(3.0, 0.0);
  const auto dist = step_distribution(params, mlp, space, tok, z96, inst, inst.y0, 2);
  const double attn = std::exp(3.0) / (std::exp(3.0) + 4.0);
  const StepLaw law = step_probabilities(attn, 5, 96, 3);
  CHECK(dist.law.p1 == doctest::Approx(law.p1).epsilon(1e-12));
  CHECK(dist.law.p2 == doctest::Approx(law.p2).epsilon(1e-12));
  CHECK(dist.law.p3 == doctest::Approx(law.p3).epsilon(1e-12));
  double mass = 0.0;
  for (double p : dist.probs) mass += p;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  double attn_mass = 0.0;
  for (double w : dist.attn) attn_mass += w;
  CHECK(attn_mass == doctest::Approx(1.0).epsilon(1e-12));
  // exactly three distinct probability levels
  CHECK(dist.probs[tok.to_class(z96.act(inst.transitions[2], inst.y0))] ==
        doctest::Approx(law.p1));
  CHECK(dist.probs[tok.to_class(z96.act(inst.transitions[0], inst.y0))] ==
        doctest::Approx(law.p2));
}

TEST_CASE("step invariance of the law across steps") {
  const auto z96 = GroupTable::cyclic(96);
  const PositionSpace space(64, 9);
  const Tokenizer tok(96);
  const MlpConfig mlp = MlpConfig::make(5, 96);
  auto rng = make_stream(61, 2);
  const Instance inst = sample_instance(z96, space, 7, rng);
  const auto params = AttentionParams::reduced(1.3, 0.2);
  Elem y = static_cast<Elem>(rng() % 96);
  StepLaw first{};
  for (int step = 0; step < 7; ++step) {
    const auto law = step_distribution(params, mlp, space, tok, z96, inst, y, step).law;
    if (step == 0) {
      first = law;
    } else {
      CHECK(law.p1 == doctest::Approx(first.p1).epsilon(1e-12));
      CHECK(law.p2 == doctest::Approx(first.p2).epsilon(1e-12));
      CHECK(law.p3 == doctest::Approx(first.p3).epsilon(1e-12));
    }
  }
}

TEST_CASE("greedy rollout with concentrated attention is perfect") {
  const auto z96 = GroupTable::cyclic(96);
  const PositionSpace space(64, 13);
  const Tokenizer tok(96);
  const MlpConfig mlp = MlpConfig::make(3, 96);
  auto rng = make_stream(14, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = sample_instance(z96, space, 8, rng);
    const auto roll =
        rollout(AttentionParams::reduced(30.0, 0.0), mlp, space, tok, z96, inst, rng, true);
    CHECK(roll.reward == 1);
    for (char h : roll.attention_hit) CHECK(h == 1);
    CHECK(roll.trajectory == inst.states);
  }
}

TEST_CASE("rollout log-probabilities factorize") {
  const auto z12 = GroupTable::cyclic(12);
  const PositionSpace space(16, 3);
  const Tokenizer tok(12);
  const MlpConfig mlp = MlpConfig::make(3, 12);
  auto rng = make_stream(25, 12);
  const Instance inst = sample_instance(z12, space, 4, rng);
  const auto params = AttentionParams::reduced(0.8, 0.1);
  const auto roll = rollout(params, mlp, space, tok, z12, inst, rng, false);
  // recompute each conditional from the step distribution
  Elem y = inst.y0;
  double total = 0.0;
  for (int step = 0; step < 4; ++step) {
    const auto dist = step_distribution(params, mlp, space, tok, z12, inst, y, step);
    y = roll.trajectory[step];
    total += std::log(dist.probs[tok.to_class(y)]);
  }
  double sum = 0.0;
  for (double lp : roll.log_probs) sum += lp;
  CHECK(sum == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("zero-Q hit rate is 1/L under deterministic tie-breaking") {
  const auto z96 = GroupTable::cyclic(96);
  const PositionSpace space(64, 5);
  const Tokenizer tok(96);
  const MlpConfig mlp = MlpConfig::make(3, 96);
  auto rng = make_stream(42, 42);
  const auto params = AttentionParams::full_zero(64);
  int hits = 0, steps = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Instance inst = sample_instance(z96, space, 5, rng);
    const auto roll = rollout(params, mlp, space, tok, z96, inst, rng, true);
    for (char h : roll.attention_hit) hits += h;
    steps += 5;
  }
  const double rate = double(hits) / steps;
  CHECK(rate == doctest::Approx(1.0 / 5).epsilon(0.01));
}

TEST_CASE("atomic one-step distribution follows the closed form for any Q") {
  // L = 1: attention is a softmax over a single position, so the target
  // probability is d^{C_B} / (d^{C_B} + d - 1) regardless of Q
  const int d = 96, cb = 3;
  const auto z96 = GroupTable::cyclic(d);
  const PositionSpace space(64, 17);
  const Tokenizer tok(d);
  const MlpConfig mlp = MlpConfig::make(cb, d);
  auto rng = make_stream(10, 70);
  Instance inst;
  inst.horizon = 1;
  inst.transitions = {static_cast<Elem>(rng() % d)};
  inst.prompt_pos = {int(rng() % 64)};
  inst.answer_pos = {space.align(inst.prompt_pos[0]), int(space.align(inst.prompt_pos[0]) + 1) % 64};
  inst.y0 = static_cast<Elem>(rng() % d);
  inst.states = {z96.act(inst.transitions[0], inst.y0)};
  const double expect = std::pow(double(d), cb) / (std::pow(double(d), cb) + d - 1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto params = random_full(64, rng, 3.0);
    const auto dist = step_distribution(params, mlp, space, tok, z96, inst, inst.y0, 0);
    CHECK(dist.probs[tok.to_class(inst.states[0])] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(dist.probs[tok.to_class(inst.states[0])] > 1.0 - 1.0 / (d * d));
  }
}
