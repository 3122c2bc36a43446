#include "wmark/sequence.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "wmark/rng.hpp"

namespace wmark {

void TokenSequence::validate(std::uint32_t codebook_size) const {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= codebook_size) {
      throw std::invalid_argument("token " + std::to_string(tokens[i]) + " at index " +
                                  std::to_string(i) + " exceeds codebook size " +
                                  std::to_string(codebook_size));
    }
  }
  if (paradigm == Paradigm::next_token) {
    if (!scale_boundaries.empty()) {
      throw std::invalid_argument("next-token sequence must not carry scale boundaries");
    }
    return;
  }
  if (scale_boundaries.empty()) {
    throw std::invalid_argument("next-scale sequence requires scale boundaries");
  }
  std::uint64_t prev = 0;
  for (std::uint64_t b : scale_boundaries) {
    if (b <= prev) throw std::invalid_argument("scale boundaries must be strictly increasing");
    prev = b;
  }
  if (scale_boundaries.back() != size()) {
    throw std::invalid_argument("last scale boundary must equal the token count");
  }
}

std::uint64_t GeneratorConfig::total_length() const {
  if (paradigm == Paradigm::next_token) return length;
  return std::accumulate(scale_sizes.begin(), scale_sizes.end(), std::uint64_t{0});
}

void GeneratorConfig::validate() const {
  if (codebook_size < 2) throw std::invalid_argument("generator requires codebook size >= 2");
  if (paradigm == Paradigm::next_token) {
    if (length == 0) throw std::invalid_argument("next-token generator requires length >= 1");
  } else {
    if (scale_sizes.empty()) {
      throw std::invalid_argument("next-scale generator requires a scale schedule");
    }
    for (std::uint64_t s : scale_sizes) {
      if (s == 0) throw std::invalid_argument("scale sizes must be positive");
    }
  }
  if (family == GeneratorFamily::markov) {
    if (!(markov_neighbor_prob >= 0.0 && markov_neighbor_prob <= 1.0)) {
      throw std::invalid_argument("markov neighbor probability must lie in [0, 1]");
    }
    if (markov_neighbor_count < 1) {
      throw std::invalid_argument("markov neighbor count must be >= 1");
    }
  }
}

TokenSequence get_token_sequence(const GeneratorConfig& config, const Codebook* codebook,
                                 std::uint64_t condition_seed) {
  config.validate();
  if (config.family == GeneratorFamily::markov) {
    if (codebook == nullptr || !codebook->has_neighbor_lists()) {
      throw std::invalid_argument("markov generator requires a codebook with neighbor lists");
    }
    if (codebook->size() != config.codebook_size) {
      throw std::invalid_argument("codebook size does not match generator config");
    }
  }

  const std::uint64_t n = config.total_length();
  TokenSequence seq;
  seq.paradigm = config.paradigm;
  seq.tokens.resize(n);
  if (config.paradigm == Paradigm::next_scale) {
    seq.scale_boundaries.reserve(config.scale_sizes.size());
    std::uint64_t cum = 0;
    for (std::uint64_t s : config.scale_sizes) {
      cum += s;
      seq.scale_boundaries.push_back(cum);
    }
  }

  RngStream rng = derive_stream(condition_seed, "token-sequence", 0);
  const std::uint32_t k = config.codebook_size;
  if (config.family == GeneratorFamily::uniform) {
    for (std::uint64_t i = 0; i < n; ++i) {
      seq.tokens[i] = static_cast<std::uint32_t>(rng.bounded(k));
    }
  } else {
    std::uint32_t prev = static_cast<std::uint32_t>(rng.bounded(k));
    seq.tokens[0] = prev;
    for (std::uint64_t i = 1; i < n; ++i) {
      std::uint32_t tok;
      if (rng.uniform_double() < config.markov_neighbor_prob) {
        auto nb = codebook->neighbors(prev);
        std::size_t span = std::min<std::size_t>(config.markov_neighbor_count, nb.size());
        tok = nb[rng.bounded(span)];
      } else {
        tok = static_cast<std::uint32_t>(rng.bounded(k));
      }
      seq.tokens[i] = tok;
      prev = tok;
    }
  }
  return seq;
}

TokenSequence decode_image(const TokenSequence& seq) { return seq; }

std::vector<std::uint64_t> default_scale_schedule() {
  return {1, 4, 9, 16, 25, 36, 64, 100, 169, 256};
}

WatermarkLayout layout_for(const TokenSequence& seq, std::uint32_t block_count) {
  if (seq.paradigm == Paradigm::next_scale) {
    return assign_blocks_scale_aware(seq.scale_boundaries, block_count);
  }
  return partition_blocks(seq.size(), block_count);
}

}  // namespace wmark
