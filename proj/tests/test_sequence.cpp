#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wmark/sequence.hpp"

using namespace wmark;

namespace {

GeneratorConfig next_token_config(std::uint64_t n = 256, std::uint32_t k = 64) {
  GeneratorConfig cfg;
  cfg.paradigm = Paradigm::next_token;
  cfg.codebook_size = k;
  cfg.length = n;
  return cfg;
}

}  // namespace

TEST_CASE("next-token generation produces N tokens and no boundaries") {
  TokenSequence seq = get_token_sequence(next_token_config(), nullptr, 1);
  CHECK(seq.size() == 256);
  CHECK(seq.paradigm == Paradigm::next_token);
  CHECK(seq.scale_boundaries.empty());
  seq.validate(64);
}

TEST_CASE("the default scale schedule concatenates to 680 tokens") {
  GeneratorConfig cfg;
  cfg.paradigm = Paradigm::next_scale;
  cfg.codebook_size = 64;
  cfg.scale_sizes = default_scale_schedule();
  TokenSequence seq = get_token_sequence(cfg, nullptr, 2);
  CHECK(seq.size() == 680);
  REQUIRE(seq.scale_boundaries.size() == 10);
  CHECK(seq.scale_boundaries.front() == 1);
  CHECK(seq.scale_boundaries.back() == 680);
  seq.validate(64);
}

TEST_CASE("identical seeds give identical sequences, distinct seeds differ") {
  TokenSequence a = get_token_sequence(next_token_config(), nullptr, 7);
  TokenSequence b = get_token_sequence(next_token_config(), nullptr, 7);
  TokenSequence c = get_token_sequence(next_token_config(), nullptr, 8);
  CHECK(a.tokens == b.tokens);
  CHECK(a.tokens != c.tokens);
}

TEST_CASE("markov family upweights embedding neighbors of the previous token") {
  Codebook cb = Codebook::synth(3, 64, 8);
  cb.build_neighbor_lists();
  GeneratorConfig cfg = next_token_config(4000, 64);
  cfg.family = GeneratorFamily::markov;
  cfg.markov_neighbor_prob = 0.8;
  cfg.markov_neighbor_count = 8;
  TokenSequence seq = get_token_sequence(cfg, &cb, 5);
  int in_neighborhood = 0;
  for (std::size_t i = 1; i < seq.tokens.size(); ++i) {
    auto nb = cb.neighbors(seq.tokens[i - 1]);
    for (std::size_t j = 0; j < 8; ++j) {
      if (nb[j] == seq.tokens[i]) {
        ++in_neighborhood;
        break;
      }
    }
  }
  // ~0.8 by neighbor draws plus ~0.025 by accidental uniform hits
  const double frac = static_cast<double>(in_neighborhood) / (seq.size() - 1);
  CHECK(frac > 0.7);
  CHECK(frac < 0.9);
}

TEST_CASE("markov family requires neighbor lists") {
  GeneratorConfig cfg = next_token_config();
  cfg.family = GeneratorFamily::markov;
  CHECK_THROWS_AS(get_token_sequence(cfg, nullptr, 1), std::invalid_argument);
}

TEST_CASE("decode_image is the identity") {
  TokenSequence seq = get_token_sequence(next_token_config(), nullptr, 9);
  TokenSequence out = decode_image(seq);
  CHECK(out.tokens == seq.tokens);
  CHECK(out.paradigm == seq.paradigm);
  CHECK(out.position_offset == seq.position_offset);
}

TEST_CASE("sequence validation catches inconsistencies") {
  TokenSequence seq;
  seq.tokens = {1, 2, 3};
  seq.paradigm = Paradigm::next_scale;
  CHECK_THROWS_AS(seq.validate(64), std::invalid_argument);  // missing boundaries
  seq.scale_boundaries = {2, 2};
  CHECK_THROWS_AS(seq.validate(64), std::invalid_argument);  // not increasing
  seq.scale_boundaries = {2, 4};
  CHECK_THROWS_AS(seq.validate(64), std::invalid_argument);  // last != N
  seq.scale_boundaries = {2, 3};
  seq.validate(64);
  seq.tokens[0] = 64;
  CHECK_THROWS_AS(seq.validate(64), std::invalid_argument);  // token out of range
}

TEST_CASE("generator config validation") {
  GeneratorConfig cfg = next_token_config(0);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = next_token_config();
  cfg.codebook_size = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = next_token_config();
  cfg.paradigm = Paradigm::next_scale;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // no scales
}
