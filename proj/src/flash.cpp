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

#include "isctee/flash.hpp"

#include <algorithm>
#include <string>

#include "isctee/errors.hpp"

namespace isctee {

void FlashGeometry::validate() const {
  const std::pair<const char*, std::uint64_t> counts[] = {
      {"flash.channels", channels},
      {"flash.chips_per_channel", chips_per_channel},
      {"flash.dies_per_chip", dies_per_chip},
      {"flash.planes_per_die", planes_per_die},
      {"flash.blocks_per_plane", blocks_per_plane},
      {"flash.pages_per_block", pages_per_block},
      {"flash.page_size", page_size},
  };
  for (const auto& [name, value] : counts)
    if (value == 0)
      throw SimError(ErrorCode::kConfigError, std::string(name) + ": must be >= 1");
  if ((page_size & (page_size - 1)) != 0 || page_size < 64)
    throw SimError(ErrorCode::kConfigError,
                   "flash.page_size: must be a power of two >= 64");
  if (total_pages() > 0xFFFFFFFFull)
    throw SimError(ErrorCode::kConfigError,
                   "flash.blocks_per_plane: page count exceeds the 32-bit PPA space");
}

void FlashTimings::validate() const {
  const std::pair<const char*, std::int64_t> values[] = {
      {"flash.t_rd_ns", t_rd},
      {"flash.t_wr_ns", t_wr},
      {"flash.t_erase_ns", t_erase},
      {"flash.channel_bw", static_cast<std::int64_t>(channel_bw)},
      {"flash.external_bw", static_cast<std::int64_t>(external_bw)},
  };
  for (const auto& [name, value] : values)
    if (value <= 0)
      throw SimError(ErrorCode::kConfigError, std::string(name) + ": must be > 0");
  if (t_wr < t_rd)
    throw SimError(ErrorCode::kConfigError, "flash.t_wr_ns: must be >= flash.t_rd_ns");
}

Nanos transfer_time(std::uint64_t bytes, std::uint64_t bytes_per_sec) {
  const unsigned __int128 num =
      static_cast<unsigned __int128>(bytes) * 1'000'000'000ULL;
  return static_cast<Nanos>((num + bytes_per_sec - 1) / bytes_per_sec);
}

Nanos FlashTimings::channel_transfer(std::uint64_t bytes) const {
  return transfer_time(bytes, channel_bw);
}

Nanos FlashTimings::external_transfer(std::uint64_t bytes) const {
  return transfer_time(bytes, external_bw);
}

Ppa encode_ppa(const FlashGeometry& g, const PageAddress& a) {
  if (a.channel >= g.channels || a.chip >= g.chips_per_channel ||
      a.die >= g.dies_per_chip || a.plane >= g.planes_per_die ||
      a.block >= g.blocks_per_plane || a.page >= g.pages_per_block)
    throw SimError(ErrorCode::kOutOfBounds, "page address outside geometry");
  std::uint64_t v = a.channel;
  v = v * g.chips_per_channel + a.chip;
  v = v * g.dies_per_chip + a.die;
  v = v * g.planes_per_die + a.plane;
  v = v * g.blocks_per_plane + a.block;
  v = v * g.pages_per_block + a.page;
  return Ppa{static_cast<std::uint32_t>(v)};
}

PageAddress decode_ppa(const FlashGeometry& g, Ppa ppa) {
  if (ppa.value >= g.total_pages())
    throw SimError(ErrorCode::kOutOfBounds,
                   "ppa " + std::to_string(ppa.value) + " outside geometry");
  std::uint64_t v = ppa.value;
  PageAddress a;
  a.page = static_cast<std::uint32_t>(v % g.pages_per_block);
  v /= g.pages_per_block;
  a.block = static_cast<std::uint32_t>(v % g.blocks_per_plane);
  v /= g.blocks_per_plane;
  a.plane = static_cast<std::uint32_t>(v % g.planes_per_die);
  v /= g.planes_per_die;
  a.die = static_cast<std::uint32_t>(v % g.dies_per_chip);
  v /= g.dies_per_chip;
  a.chip = static_cast<std::uint32_t>(v % g.chips_per_channel);
  v /= g.chips_per_channel;
  a.channel = static_cast<std::uint32_t>(v);
  return a;
}

FlashArray::FlashArray(FlashGeometry geometry, FlashTimings timings,
                       bool zero_fill)
    : geometry_(geometry), timings_(timings), zero_fill_(zero_fill) {
  geometry_.validate();
  timings_.validate();
  blocks_.resize(geometry_.total_blocks());
  die_free_.assign(geometry_.dies(), 0);
  channel_free_.assign(geometry_.channels, 0);
}

void FlashArray::set_timings(const FlashTimings& t) {
  t.validate();
  timings_ = t;
}

void FlashArray::check(Ppa ppa) const {
  if (ppa.value >= geometry_.total_pages())
    throw SimError(ErrorCode::kOutOfBounds,
                   "ppa " + std::to_string(ppa.value) + " outside geometry");
}

std::uint64_t FlashArray::die_index(const PageAddress& a) const {
  return (std::uint64_t{a.channel} * geometry_.chips_per_channel + a.chip) *
             geometry_.dies_per_chip +
         a.die;
}

PageStatus FlashArray::status(Ppa ppa) const {
  check(ppa);
  const Block& b = blocks_[block_of(ppa)];
  if (!b.pages) return PageStatus::kFree;
  return b.pages[ppa.value % geometry_.pages_per_block].status;
}

std::optional<std::uint32_t> FlashArray::owner(Ppa ppa) const {
  check(ppa);
  const Block& b = blocks_[block_of(ppa)];
  if (!b.pages) return std::nullopt;
  const PageSlot& s = b.pages[ppa.value % geometry_.pages_per_block];
  if (s.status != PageStatus::kValid || s.owner == kNoLpa) return std::nullopt;
  return s.owner;
}

const BlockMeta& FlashArray::block(std::uint64_t block_id) const {
  if (block_id >= blocks_.size())
    throw SimError(ErrorCode::kOutOfBounds,
                   "block " + std::to_string(block_id) + " outside geometry");
  return blocks_[block_id].meta;
}

ReadResult FlashArray::read_page(Ppa ppa, Nanos issue_at) {
  check(ppa);
  Block& b = blocks_[block_of(ppa)];
  const PageSlot* slot =
      b.pages ? &b.pages[ppa.value % geometry_.pages_per_block] : nullptr;
  if (slot == nullptr || slot->status != PageStatus::kValid)
    throw SimError(ErrorCode::kReadOfFreePage,
                   "ppa " + std::to_string(ppa.value) + " is not VALID");

  const PageAddress a = decode_ppa(geometry_, ppa);
  Nanos& die = die_free_[die_index(a)];
  Nanos& bus = channel_free_[a.channel];
  const Nanos array_done = std::max(issue_at, die) + timings_.t_rd;
  const Nanos done =
      std::max(array_done, bus) + timings_.channel_transfer(geometry_.page_size);
  die = done;
  bus = done;
  ++stats_.reads;

  ReadResult r;
  r.completion = done;
  if (slot->content.empty())
    r.content.assign(geometry_.page_size, 0);
  else
    r.content = slot->content;
  return r;
}

Nanos FlashArray::read_page(
    Simulator& sim, Ppa ppa,
    std::function<void(Ppa, std::vector<std::uint8_t>)> done) {
  ReadResult r = read_page(ppa, sim.now());
  auto content = std::make_shared<std::vector<std::uint8_t>>(std::move(r.content));
  sim.schedule_at(r.completion, EventKind::kFlashReadDone, ppa.value,
                  [ppa, content, cb = std::move(done)](const Event&) {
                    if (cb) cb(ppa, std::move(*content));
                  });
  return r.completion;
}

Nanos FlashArray::program_page(Ppa ppa, std::span<const std::uint8_t> content,
                               Nanos issue_at, std::uint32_t owner_lpa) {
  check(ppa);
  Block& b = blocks_[block_of(ppa)];
  if (!b.pages) b.pages = std::make_unique<PageSlot[]>(geometry_.pages_per_block);
  PageSlot& slot = b.pages[ppa.value % geometry_.pages_per_block];
  if (slot.status != PageStatus::kFree)
    throw SimError(ErrorCode::kProgramOfNonFreePage,
                   "ppa " + std::to_string(ppa.value) + " already programmed");
  if (!content.empty() && content.size() != geometry_.page_size)
    throw SimError(ErrorCode::kBadLength, "program content must be one page");

  const PageAddress a = decode_ppa(geometry_, ppa);
  Nanos& die = die_free_[die_index(a)];
  Nanos& bus = channel_free_[a.channel];
  const Nanos xfer_done = std::max({issue_at, die, bus}) +
                          timings_.channel_transfer(geometry_.page_size);
  bus = xfer_done;
  const Nanos done = xfer_done + timings_.t_wr;
  die = done;
  ++stats_.programs;

  slot.status = PageStatus::kValid;
  slot.owner = owner_lpa;
  const bool all_zero =
      std::all_of(content.begin(), content.end(), [](auto c) { return c == 0; });
  if (zero_fill_ || all_zero)
    slot.content.clear();
  else
    slot.content.assign(content.begin(), content.end());
  ++b.meta.valid_page_count;
  b.meta.free_page_cursor = std::max(
      b.meta.free_page_cursor, ppa.value % geometry_.pages_per_block + 1);
  return done;
}

Nanos FlashArray::erase_block(std::uint64_t block_id, Nanos issue_at) {
  if (block_id >= blocks_.size())
    throw SimError(ErrorCode::kOutOfBounds,
                   "block " + std::to_string(block_id) + " outside geometry");
  Block& b = blocks_[block_id];
  b.pages.reset();
  b.meta.valid_page_count = 0;
  b.meta.free_page_cursor = 0;
  ++b.meta.erase_count;
  ++stats_.erases;

  const PageAddress a = decode_ppa(geometry_, first_page(block_id));
  Nanos& die = die_free_[die_index(a)];
  die = std::max(issue_at, die) + timings_.t_erase;
  return die;
}

void FlashArray::invalidate(Ppa ppa) {
  check(ppa);
  Block& b = blocks_[block_of(ppa)];
  if (!b.pages) return;
  PageSlot& slot = b.pages[ppa.value % geometry_.pages_per_block];
  if (slot.status != PageStatus::kValid) return;
  slot.status = PageStatus::kInvalid;
  slot.owner = kNoLpa;
  slot.content.clear();
  slot.content.shrink_to_fit();
  --b.meta.valid_page_count;
}

void FlashArray::reset_timing() {
  std::fill(die_free_.begin(), die_free_.end(), 0);
  std::fill(channel_free_.begin(), channel_free_.end(), 0);
}

}  // namespace isctee
