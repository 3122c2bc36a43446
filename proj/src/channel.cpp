#include "wmark/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wmark/rng.hpp"

namespace wmark {

void ChannelSpec::validate(const TokenSequence& seq) const {
  switch (kind) {
    case ChannelKind::uniform_flip:
    case ChannelKind::neighbor_flip:
      if (!(intensity >= 0.0 && intensity <= 1.0)) {
        throw std::invalid_argument("flip probability must lie in [0, 1]");
      }
      break;
    case ChannelKind::span_erase:
    case ChannelKind::prefix_crop:
      if (!(intensity >= 0.0 && intensity < 1.0)) {
        throw std::invalid_argument("erase/crop fraction must lie in [0, 1)");
      }
      break;
    case ChannelKind::scale_drop: {
      if (seq.paradigm != Paradigm::next_scale) {
        throw std::invalid_argument("scale-drop requires a next-scale sequence");
      }
      double count = 0.0;
      if (std::modf(intensity, &count) != 0.0 || intensity < 0.0) {
        throw std::invalid_argument("scale-drop intensity must be a non-negative integer");
      }
      if (intensity >= static_cast<double>(seq.scale_boundaries.size())) {
        throw std::invalid_argument("scale-drop count must be below the number of scales");
      }
      break;
    }
  }
}

TokenSequence apply_channel(const TokenSequence& seq, const ChannelSpec& spec,
                            const Codebook& codebook) {
  spec.validate(seq);
  const std::uint32_t k = codebook.size();
  const std::uint64_t n = seq.size();
  RngStream rng = derive_stream(spec.seed, "channel", static_cast<std::uint64_t>(spec.kind));
  TokenSequence out = seq;

  switch (spec.kind) {
    case ChannelKind::uniform_flip: {
      for (std::uint64_t i = 0; i < n; ++i) {
        if (rng.uniform_double() < spec.intensity) {
          out.tokens[i] = static_cast<std::uint32_t>(rng.bounded(k));
        }
      }
      break;
    }
    case ChannelKind::neighbor_flip: {
      for (std::uint64_t i = 0; i < n; ++i) {
        if (rng.uniform_double() < spec.intensity) {
          auto nb = codebook.neighbors(out.tokens[i]);
          std::size_t span = std::min<std::size_t>(spec.neighbor_count, nb.size());
          out.tokens[i] = nb[rng.bounded(span)];
        }
      }
      break;
    }
    case ChannelKind::span_erase: {
      const auto span_len = static_cast<std::uint64_t>(
          std::llround(spec.intensity * static_cast<double>(n)));
      if (span_len == 0) break;
      const std::uint64_t start = rng.bounded(n - span_len + 1);
      for (std::uint64_t i = start; i < start + span_len; ++i) {
        out.tokens[i] = static_cast<std::uint32_t>(rng.bounded(k));
      }
      break;
    }
    case ChannelKind::prefix_crop: {
      const auto crop = static_cast<std::uint64_t>(
          std::floor(spec.intensity * static_cast<double>(n)));
      out.tokens.erase(out.tokens.begin(), out.tokens.begin() + crop);
      // Aligned mode remembers where the surviving tokens came from;
      // otherwise positions restart at zero, as a cropped image's would.
      out.position_offset = spec.assume_aligned ? seq.position_offset + crop : 0;
      if (!out.scale_boundaries.empty()) {
        std::vector<std::uint64_t> adjusted;
        for (std::uint64_t b : out.scale_boundaries) {
          if (b > crop) adjusted.push_back(b - crop);
        }
        out.scale_boundaries = std::move(adjusted);
      }
      break;
    }
    case ChannelKind::scale_drop: {
      const auto drop = static_cast<std::size_t>(spec.intensity);
      if (drop == 0) break;
      const std::size_t scales = seq.scale_boundaries.size();
      const std::uint64_t first = seq.scale_boundaries[scales - drop - 1];
      for (std::uint64_t i = first; i < n; ++i) {
        out.tokens[i] = static_cast<std::uint32_t>(rng.bounded(k));
      }
      break;
    }
  }
  return out;
}

std::string channel_kind_name(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::uniform_flip: return "uniform-flip";
    case ChannelKind::neighbor_flip: return "neighbor-flip";
    case ChannelKind::span_erase: return "span-erase";
    case ChannelKind::prefix_crop: return "prefix-crop";
    case ChannelKind::scale_drop: return "scale-drop";
  }
  throw std::logic_error("unknown channel kind");
}

ChannelKind channel_kind_from_name(const std::string& name) {
  if (name == "uniform-flip") return ChannelKind::uniform_flip;
  if (name == "neighbor-flip") return ChannelKind::neighbor_flip;
  if (name == "span-erase") return ChannelKind::span_erase;
  if (name == "prefix-crop") return ChannelKind::prefix_crop;
  if (name == "scale-drop") return ChannelKind::scale_drop;
  throw std::invalid_argument("unknown channel kind: " + name);
}

}  // namespace wmark
