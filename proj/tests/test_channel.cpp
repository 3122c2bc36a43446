#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wmark/channel.hpp"
#include "wmark/sequence.hpp"

using namespace wmark;

namespace {

TokenSequence uniform_sequence(std::uint64_t n, std::uint32_t k, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.paradigm = Paradigm::next_token;
  cfg.codebook_size = k;
  cfg.length = n;
  return get_token_sequence(cfg, nullptr, seed);
}

TokenSequence scale_sequence(std::uint32_t k, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.paradigm = Paradigm::next_scale;
  cfg.codebook_size = k;
  cfg.scale_sizes = {4, 8, 16, 32};
  return get_token_sequence(cfg, nullptr, seed);
}

}  // namespace

TEST_CASE("zero intensity is the identity for every kind") {
  Codebook cb = Codebook::synth(1, 64, 8);
  cb.build_neighbor_lists();
  TokenSequence seq = uniform_sequence(200, 64, 1);
  for (ChannelKind kind : {ChannelKind::uniform_flip, ChannelKind::neighbor_flip,
                           ChannelKind::span_erase, ChannelKind::prefix_crop}) {
    ChannelSpec spec{kind, 0.0, 42};
    TokenSequence out = apply_channel(seq, spec, cb);
    CHECK(out.tokens == seq.tokens);
    CHECK(out.position_offset == seq.position_offset);
  }
  TokenSequence scaled = scale_sequence(64, 2);
  ChannelSpec drop{ChannelKind::scale_drop, 0.0, 42};
  CHECK(apply_channel(scaled, drop, cb).tokens == scaled.tokens);
}

TEST_CASE("uniform flips hit close to the nominal fraction") {
  Codebook cb = Codebook::synth(2, 512, 4);
  TokenSequence seq = uniform_sequence(10000, 512, 3);
  ChannelSpec spec{ChannelKind::uniform_flip, 0.1, 7};
  TokenSequence out = apply_channel(seq, spec, cb);
  int changed = 0;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    changed += out.tokens[i] != seq.tokens[i] ? 1 : 0;
  }
  // a uniform replacement re-draws the original token w.p. 1/K
  const double frac = changed / 10000.0;
  CHECK(std::abs(frac - 0.1 * (1.0 - 1.0 / 512)) < 0.01);
}

TEST_CASE("neighbor flips stay within the requested neighborhood") {
  Codebook cb = Codebook::synth(3, 128, 8);
  cb.build_neighbor_lists();
  TokenSequence seq = uniform_sequence(2000, 128, 4);
  ChannelSpec spec{ChannelKind::neighbor_flip, 0.5, 11};
  spec.neighbor_count = 8;
  TokenSequence out = apply_channel(seq, spec, cb);
  int changed = 0;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (out.tokens[i] == seq.tokens[i]) continue;
    ++changed;
    auto nb = cb.neighbors(seq.tokens[i]);
    const bool in_top8 =
        std::find(nb.begin(), nb.begin() + 8, out.tokens[i]) != nb.begin() + 8;
    CHECK(in_top8);
  }
  CHECK(changed > 800);
  CHECK(changed < 1200);
}

TEST_CASE("span erase randomizes an exactly sized contiguous window") {
  Codebook cb = Codebook::synth(4, 512, 4);
  TokenSequence seq = uniform_sequence(256, 512, 5);
  ChannelSpec spec{ChannelKind::span_erase, 0.25, 13};
  TokenSequence out = apply_channel(seq, spec, cb);
  REQUIRE(out.size() == 256);
  std::vector<std::size_t> changed;
  for (std::size_t i = 0; i < 256; ++i) {
    if (out.tokens[i] != seq.tokens[i]) changed.push_back(i);
  }
  REQUIRE(!changed.empty());
  // all changes inside one 64-position window (some window tokens may
  // redraw their original value)
  CHECK(changed.back() - changed.front() < 64);
  CHECK(changed.size() > 50);
}

TEST_CASE("prefix crop shortens, re-indexes, and optionally stays aligned") {
  Codebook cb = Codebook::synth(5, 512, 4);
  TokenSequence seq = uniform_sequence(256, 512, 6);
  ChannelSpec unaligned{ChannelKind::prefix_crop, 0.25, 17};
  TokenSequence out = apply_channel(seq, unaligned, cb);
  REQUIRE(out.size() == 192);  // ceil(0.75 * 256)
  CHECK(out.position_offset == 0);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out.tokens[i] == seq.tokens[i + 64]);

  ChannelSpec aligned = unaligned;
  aligned.assume_aligned = true;
  TokenSequence out2 = apply_channel(seq, aligned, cb);
  CHECK(out2.position_offset == 64);
  CHECK(out2.tokens == out.tokens);
}

TEST_CASE("prefix crop clips scale boundaries") {
  Codebook cb = Codebook::synth(6, 64, 4);
  TokenSequence seq = scale_sequence(64, 7);  // boundaries 4, 12, 28, 60
  ChannelSpec spec{ChannelKind::prefix_crop, 0.2, 19};  // crop 12 positions
  TokenSequence out = apply_channel(seq, spec, cb);
  REQUIRE(out.size() == 48);
  CHECK(out.scale_boundaries == std::vector<std::uint64_t>{16, 48});
}

TEST_CASE("scale drop randomizes exactly the finest scales") {
  Codebook cb = Codebook::synth(7, 512, 4);
  TokenSequence seq = scale_sequence(512, 8);  // sizes 4, 8, 16, 32
  ChannelSpec spec{ChannelKind::scale_drop, 2.0, 23};
  TokenSequence out = apply_channel(seq, spec, cb);
  for (std::size_t i = 0; i < 12; ++i) CHECK(out.tokens[i] == seq.tokens[i]);
  int changed = 0;
  for (std::size_t i = 12; i < 60; ++i) changed += out.tokens[i] != seq.tokens[i] ? 1 : 0;
  CHECK(changed > 40);  // 48 positions redrawn uniformly over K=512
}

TEST_CASE("scale drop on a next-token sequence is a paradigm error") {
  Codebook cb = Codebook::synth(8, 64, 4);
  TokenSequence seq = uniform_sequence(64, 64, 9);
  ChannelSpec spec{ChannelKind::scale_drop, 1.0, 29};
  CHECK_THROWS_AS(apply_channel(seq, spec, cb), std::invalid_argument);
}

TEST_CASE("channels are deterministic under a fixed seed") {
  Codebook cb = Codebook::synth(9, 256, 4);
  cb.build_neighbor_lists();
  TokenSequence seq = uniform_sequence(500, 256, 10);
  for (ChannelKind kind : {ChannelKind::uniform_flip, ChannelKind::neighbor_flip,
                           ChannelKind::span_erase, ChannelKind::prefix_crop}) {
    ChannelSpec spec{kind, 0.3, 31};
    TokenSequence a = apply_channel(seq, spec, cb);
    TokenSequence b = apply_channel(seq, spec, cb);
    CHECK(a.tokens == b.tokens);
    spec.seed = 32;
    TokenSequence c = apply_channel(seq, spec, cb);
    if (kind != ChannelKind::prefix_crop) CHECK(a.tokens != c.tokens);
  }
}

TEST_CASE("intensity validation") {
  Codebook cb = Codebook::synth(10, 64, 4);
  TokenSequence seq = uniform_sequence(64, 64, 11);
  CHECK_THROWS_AS(apply_channel(seq, {ChannelKind::uniform_flip, 1.5, 0}, cb),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_channel(seq, {ChannelKind::prefix_crop, 1.0, 0}, cb),
                  std::invalid_argument);
  TokenSequence scaled = scale_sequence(64, 12);
  CHECK_THROWS_AS(apply_channel(scaled, {ChannelKind::scale_drop, 4.0, 0}, cb),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_channel(scaled, {ChannelKind::scale_drop, 1.5, 0}, cb),
                  std::invalid_argument);
}
