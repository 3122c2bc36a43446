#pragma once

#include <cstdint>
#include <string>

#include "wmark/codebook.hpp"
#include "wmark/sequence.hpp"

namespace wmark {

// Token-level corruption standing in for pixel attacks plus
// re-tokenization.
enum class ChannelKind {
  uniform_flip,   // each token replaced w.p. p by a uniform entry
  neighbor_flip,  // each token replaced w.p. p by one of its top neighbors
  span_erase,     // a contiguous fraction replaced by uniform entries
  prefix_crop,    // a leading fraction of positions deleted
  scale_drop,     // whole fine scales replaced by uniform entries
};

struct ChannelSpec {
  ChannelKind kind = ChannelKind::uniform_flip;
  double intensity = 0.0;   // probability, fraction, or scale count by kind
  std::uint64_t seed = 0;
  // prefix_crop only: keep original position indices so detection stays
  // aligned with the embedding positions. Off by default because real
  // cropping destroys the position <-> partition correspondence.
  bool assume_aligned = false;
  // neighbor_flip only
  std::uint32_t neighbor_count = 8;

  void validate(const TokenSequence& seq) const;
};

TokenSequence apply_channel(const TokenSequence& seq, const ChannelSpec& spec,
                            const Codebook& codebook);

std::string channel_kind_name(ChannelKind kind);
ChannelKind channel_kind_from_name(const std::string& name);

}  // namespace wmark
