#include "wmark/layout.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace wmark {

namespace {

void check_capacity(std::uint64_t total, std::uint32_t blocks) {
  if (blocks < 1) throw std::invalid_argument("block count must be >= 1");
  if (blocks > total) {
    throw CapacityError("cannot fit " + std::to_string(blocks) + " blocks into " +
                        std::to_string(total) +
                        " positions; use a shorter code or a longer sequence");
  }
}

}  // namespace

WatermarkLayout partition_blocks(std::uint64_t total_positions, std::uint32_t block_count) {
  check_capacity(total_positions, block_count);
  WatermarkLayout layout;
  layout.total_positions = total_positions;
  layout.blocks.reserve(block_count);
  for (std::uint32_t j = 1; j <= block_count; ++j) {
    std::uint64_t begin = (static_cast<unsigned __int128>(j - 1) * total_positions) / block_count;
    std::uint64_t end = (static_cast<unsigned __int128>(j) * total_positions) / block_count;
    layout.blocks.push_back({begin, end});
  }
  return layout;
}

WatermarkLayout assign_blocks_scale_aware(std::span<const std::uint64_t> scale_boundaries,
                                          std::uint32_t block_count) {
  if (scale_boundaries.empty()) {
    throw std::invalid_argument("scale-aware layout requires at least one scale");
  }
  const std::size_t scales = scale_boundaries.size();
  const std::uint64_t total = scale_boundaries.back();
  check_capacity(total, block_count);

  std::vector<std::uint64_t> counts(scales), offsets(scales);
  std::uint64_t prev = 0;
  for (std::size_t s = 0; s < scales; ++s) {
    if (scale_boundaries[s] <= prev) {
      throw std::invalid_argument("scale boundaries must be strictly increasing");
    }
    offsets[s] = prev;
    counts[s] = scale_boundaries[s] - prev;
    prev = scale_boundaries[s];
  }

  WatermarkLayout layout;
  layout.total_positions = total;
  layout.scale_boundaries.assign(scale_boundaries.begin(), scale_boundaries.end());

  if (block_count >= scales) {
    // Largest-remainder apportionment of blocks to scales.
    std::vector<std::uint32_t> alloc(scales);
    std::vector<std::uint64_t> remainder(scales);
    std::uint32_t assigned = 0;
    for (std::size_t s = 0; s < scales; ++s) {
      unsigned __int128 q = static_cast<unsigned __int128>(block_count) * counts[s];
      alloc[s] = static_cast<std::uint32_t>(q / total);
      remainder[s] = static_cast<std::uint64_t>(q % total);
      assigned += alloc[s];
    }
    std::vector<std::size_t> order(scales);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
      return a < b;
    });
    for (std::size_t idx = 0; assigned < block_count; ++idx) {
      ++alloc[order[idx % scales]];
      ++assigned;
    }
    // Every scale must own at least one block (blocks cannot straddle a
    // boundary); donate from the largest allocation.
    for (std::size_t s = 0; s < scales; ++s) {
      while (alloc[s] == 0) {
        std::size_t donor = std::max_element(alloc.begin(), alloc.end()) - alloc.begin();
        --alloc[donor];
        ++alloc[s];
      }
      // A scale cannot hold more blocks than tokens; push surplus to the
      // smallest allocation that still has room.
      while (alloc[s] > counts[s]) {
        std::size_t best = scales;
        for (std::size_t c = 0; c < scales; ++c) {
          if (c != s && alloc[c] < counts[c] && (best == scales || alloc[c] < alloc[best])) {
            best = c;
          }
        }
        --alloc[s];
        ++alloc[best];
      }
    }
    for (std::size_t s = 0; s < scales; ++s) {
      WatermarkLayout inner = partition_blocks(counts[s], alloc[s]);
      for (const BlockRange& b : inner.blocks) {
        layout.blocks.push_back({offsets[s] + b.begin, offsets[s] + b.end});
      }
    }
  } else {
    // Fewer blocks than scales: group whole scales coarse-to-fine.
    std::uint64_t remaining = total;
    std::uint32_t groups_left = block_count;
    std::uint64_t group_begin = 0;
    std::uint64_t group_count = 0;
    for (std::size_t s = 0; s < scales; ++s) {
      group_count += counts[s];
      const std::size_t scales_left = scales - s - 1;
      const std::uint64_t target = (remaining + groups_left - 1) / groups_left;
      const bool must_close = scales_left < groups_left;  // leave a scale per group
      if (groups_left > 1 && (group_count >= target || must_close)) {
        layout.blocks.push_back({group_begin, group_begin + group_count});
        group_begin += group_count;
        remaining -= group_count;
        group_count = 0;
        --groups_left;
      }
    }
    layout.blocks.push_back({group_begin, total});
  }

  return layout;
}

}  // namespace wmark
