#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "wmark/layout.hpp"
#include "wmark/sequence.hpp"

using namespace wmark;

namespace {

void check_covering(const WatermarkLayout& layout) {
  REQUIRE(!layout.blocks.empty());
  CHECK(layout.blocks.front().begin == 0);
  CHECK(layout.blocks.back().end == layout.total_positions);
  for (std::size_t j = 0; j < layout.blocks.size(); ++j) {
    CHECK(layout.blocks[j].size() >= 1);
    if (j > 0) CHECK(layout.blocks[j].begin == layout.blocks[j - 1].end);
  }
}

}  // namespace

TEST_CASE("floor-formula bounds for N=10, n=3") {
  WatermarkLayout layout = partition_blocks(10, 3);
  REQUIRE(layout.block_count() == 3);
  CHECK(layout.blocks[0].begin == 0);
  CHECK(layout.blocks[0].end == 3);
  CHECK(layout.blocks[1].begin == 3);
  CHECK(layout.blocks[1].end == 6);
  CHECK(layout.blocks[2].begin == 6);
  CHECK(layout.blocks[2].end == 10);
}

TEST_CASE("N == n gives single-position blocks") {
  WatermarkLayout layout = partition_blocks(63, 63);
  check_covering(layout);
  for (const BlockRange& b : layout.blocks) CHECK(b.size() == 1);
}

TEST_CASE("N=256, n=63 matches brute-force evaluation of the floor formula") {
  WatermarkLayout layout = partition_blocks(256, 63);
  check_covering(layout);
  std::uint64_t total = 0;
  for (std::uint32_t j = 1; j <= 63; ++j) {
    const std::uint64_t lo = (static_cast<std::uint64_t>(j - 1) * 256) / 63;
    const std::uint64_t hi = (static_cast<std::uint64_t>(j) * 256) / 63;
    CHECK(layout.blocks[j - 1].begin == lo);
    CHECK(layout.blocks[j - 1].end == hi);
    const std::uint64_t size = layout.blocks[j - 1].size();
    CHECK(size >= 4);
    CHECK(size <= 5);
    total += size;
  }
  CHECK(total == 256);
}

TEST_CASE("block sizes never differ by more than one") {
  for (std::uint64_t n_pos : {17ull, 100ull, 680ull, 1001ull}) {
    for (std::uint32_t blocks : {1u, 2u, 7u, 16u}) {
      WatermarkLayout layout = partition_blocks(n_pos, blocks);
      check_covering(layout);
      std::uint64_t lo = n_pos, hi = 0;
      for (const BlockRange& b : layout.blocks) {
        lo = std::min(lo, b.size());
        hi = std::max(hi, b.size());
      }
      CHECK(hi - lo <= 1);
    }
  }
}

TEST_CASE("too many blocks is a capacity error") {
  CHECK_THROWS_AS(partition_blocks(10, 11), CapacityError);
  CHECK_THROWS_WITH_AS(partition_blocks(10, 11), doctest::Contains("shorter code"),
                       CapacityError);
  CHECK_THROWS_AS(partition_blocks(10, 0), std::invalid_argument);
}

TEST_CASE("one block per scale when counts allow") {
  const std::uint64_t bounds[] = {4, 16};  // scales of 4 and 12 tokens
  WatermarkLayout layout = assign_blocks_scale_aware(bounds, 2);
  REQUIRE(layout.block_count() == 2);
  CHECK(layout.blocks[0].begin == 0);
  CHECK(layout.blocks[0].end == 4);
  CHECK(layout.blocks[1].begin == 4);
  CHECK(layout.blocks[1].end == 16);
}

TEST_CASE("largest-remainder apportionment splits blocks proportionally") {
  const std::uint64_t bounds[] = {4, 16};
  WatermarkLayout layout = assign_blocks_scale_aware(bounds, 4);
  REQUIRE(layout.block_count() == 4);
  // scale 1 (4 tokens) gets 1 block, scale 2 (12 tokens) gets 3 of size 4
  CHECK(layout.blocks[0].begin == 0);
  CHECK(layout.blocks[0].end == 4);
  for (int j = 1; j < 4; ++j) {
    CHECK(layout.blocks[j].size() == 4);
    CHECK(layout.blocks[j].begin == 4 + 4 * static_cast<std::uint64_t>(j - 1));
  }
}

TEST_CASE("blocks never straddle a boundary when n >= #scales") {
  const std::vector<std::uint64_t> schedule = default_scale_schedule();
  std::vector<std::uint64_t> bounds(schedule.size());
  std::partial_sum(schedule.begin(), schedule.end(), bounds.begin());
  for (std::uint32_t n_blocks : {10u, 31u, 63u, 127u}) {
    WatermarkLayout layout = assign_blocks_scale_aware(bounds, n_blocks);
    check_covering(layout);
    REQUIRE(layout.block_count() == n_blocks);
    for (const BlockRange& b : layout.blocks) {
      for (std::uint64_t boundary : bounds) {
        const bool straddles = b.begin < boundary && boundary < b.end;
        CHECK(!straddles);
      }
    }
  }
}

TEST_CASE("coarse scales are grouped when blocks are scarce") {
  const std::uint64_t bounds[] = {1, 5, 14, 30, 55, 91};  // six scales
  for (std::uint32_t n_blocks : {1u, 2u, 3u, 5u}) {
    WatermarkLayout layout = assign_blocks_scale_aware(bounds, n_blocks);
    check_covering(layout);
    REQUIRE(layout.block_count() == n_blocks);
    // group edges must be scale boundaries
    for (const BlockRange& b : layout.blocks) {
      const bool at_boundary = b.end == 91 ||
                               std::find(std::begin(bounds), std::end(bounds), b.end) !=
                                   std::end(bounds);
      CHECK(at_boundary);
    }
  }
}

TEST_CASE("scale-aware layout with uneven proportions conserves block count") {
  const std::uint64_t bounds[] = {1, 3, 400};
  for (std::uint32_t n_blocks = 3; n_blocks <= 60; ++n_blocks) {
    WatermarkLayout layout = assign_blocks_scale_aware(bounds, n_blocks);
    check_covering(layout);
    CHECK(layout.block_count() == n_blocks);
  }
}

TEST_CASE("scale-aware capacity and validation errors") {
  const std::uint64_t bounds[] = {4, 16};
  CHECK_THROWS_AS(assign_blocks_scale_aware(bounds, 17), CapacityError);
  const std::uint64_t bad[] = {4, 4};
  CHECK_THROWS_AS(assign_blocks_scale_aware(bad, 2), std::invalid_argument);
  CHECK_THROWS_AS(assign_blocks_scale_aware({}, 1), std::invalid_argument);
}
