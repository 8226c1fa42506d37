// Copyright 2026 The isc-tee-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ISCTEE_FLASH_HPP_
#define ISCTEE_FLASH_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "isctee/sim_core.hpp"

namespace isctee {

struct FlashGeometry {
  std::uint32_t channels = 8;
  std::uint32_t chips_per_channel = 4;
  std::uint32_t dies_per_chip = 4;
  std::uint32_t planes_per_die = 2;
  std::uint32_t blocks_per_plane = 2048;
  std::uint32_t pages_per_block = 512;
  std::uint32_t page_size = 4096;

  // Throws ConfigError when a count is zero, page_size is not a power of two,
  // or the page count does not fit the 32-bit PPA.
  void validate() const;

  std::uint64_t dies() const {
    return std::uint64_t{channels} * chips_per_channel * dies_per_chip;
  }
  // A parallel unit is one plane; each owns blocks_per_plane blocks.
  std::uint64_t units() const { return dies() * planes_per_die; }
  std::uint64_t total_blocks() const { return units() * blocks_per_plane; }
  std::uint64_t total_pages() const { return total_blocks() * pages_per_block; }
  std::uint64_t lines_per_page() const { return page_size / 64; }

  bool operator==(const FlashGeometry&) const = default;
};

struct FlashTimings {
  Nanos t_rd = 50'000;
  Nanos t_wr = 300'000;
  Nanos t_erase = 3'000'000;
  std::uint64_t channel_bw = 600'000'000;    // bytes/s
  std::uint64_t external_bw = 3'200'000'000; // bytes/s, host link

  void validate() const;
  Nanos channel_transfer(std::uint64_t bytes) const;
  Nanos external_transfer(std::uint64_t bytes) const;
};

// Rounded-up transfer time of `bytes` at `bytes_per_sec`.
Nanos transfer_time(std::uint64_t bytes, std::uint64_t bytes_per_sec);

struct Ppa {
  std::uint32_t value = 0;
  bool operator==(const Ppa&) const = default;
  auto operator<=>(const Ppa&) const = default;
};

struct PageAddress {
  std::uint32_t channel = 0;
  std::uint32_t chip = 0;
  std::uint32_t die = 0;
  std::uint32_t plane = 0;
  std::uint32_t block = 0;
  std::uint32_t page = 0;
  bool operator==(const PageAddress&) const = default;
};

// Mixed-radix packing, channel most significant, page least significant.
Ppa encode_ppa(const FlashGeometry& g, const PageAddress& a);
PageAddress decode_ppa(const FlashGeometry& g, Ppa ppa);

enum class PageStatus : std::uint8_t { kFree, kValid, kInvalid };

inline constexpr std::uint32_t kNoLpa = 0xFFFFFFFFu;

struct BlockMeta {
  std::uint32_t erase_count = 0;
  std::uint32_t valid_page_count = 0;
  std::uint32_t free_page_cursor = 0;  // next programmable page
};

struct ReadResult {
  std::vector<std::uint8_t> content;
  Nanos completion = 0;
};

struct FlashStats {
  std::uint64_t reads = 0;
  std::uint64_t programs = 0;
  std::uint64_t erases = 0;
};

// Byte-accurate NAND array with a resource-reservation timing model: the
// array phase (t_rd / t_wr / t_erase) occupies the die, the data transfer
// occupies the channel bus. Phases are additive per operation; transfers
// sharing a channel never overlap.
class FlashArray {
 public:
  FlashArray(FlashGeometry geometry, FlashTimings timings,
             bool zero_fill = false);

  const FlashGeometry& geometry() const { return geometry_; }
  const FlashTimings& timings() const { return timings_; }
  void set_timings(const FlashTimings& t);

  ReadResult read_page(Ppa ppa, Nanos issue_at);
  // Event-driven variant: schedules kFlashReadDone at the completion time.
  Nanos read_page(Simulator& sim, Ppa ppa,
                  std::function<void(Ppa, std::vector<std::uint8_t>)> done);

  // Stamps the page VALID with its owning logical page.
  Nanos program_page(Ppa ppa, std::span<const std::uint8_t> content,
                     Nanos issue_at, std::uint32_t owner_lpa = kNoLpa);
  Nanos erase_block(std::uint64_t block_id, Nanos issue_at);

  void invalidate(Ppa ppa);

  PageStatus status(Ppa ppa) const;
  std::optional<std::uint32_t> owner(Ppa ppa) const;
  const BlockMeta& block(std::uint64_t block_id) const;
  std::uint64_t block_of(Ppa ppa) const { return ppa.value / geometry_.pages_per_block; }
  Ppa first_page(std::uint64_t block_id) const {
    return Ppa{static_cast<std::uint32_t>(block_id * geometry_.pages_per_block)};
  }

  Nanos channel_free_at(std::uint32_t channel) const { return channel_free_[channel]; }
  void reset_timing();
  const FlashStats& stats() const { return stats_; }

 private:
  struct PageSlot {
    PageStatus status = PageStatus::kFree;
    std::uint32_t owner = kNoLpa;
    std::vector<std::uint8_t> content;
  };
  struct Block {
    BlockMeta meta;
    std::unique_ptr<PageSlot[]> pages;  // allocated on first program
  };

  void check(Ppa ppa) const;
  std::uint64_t die_index(const PageAddress& a) const;

  FlashGeometry geometry_;
  FlashTimings timings_;
  bool zero_fill_;
  std::vector<Block> blocks_;
  std::vector<Nanos> die_free_;
  std::vector<Nanos> channel_free_;
  FlashStats stats_;
};

}  // namespace isctee

#endif  // ISCTEE_FLASH_HPP_
