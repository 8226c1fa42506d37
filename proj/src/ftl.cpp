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

#include "isctee/ftl.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "isctee/errors.hpp"

namespace isctee {

const char* to_string(TablePlacement p) {
  return p == TablePlacement::kSecureWorld ? "SECURE_WORLD" : "PROTECTED_REGION";
}

Ftl::Ftl(FlashArray& flash, MemProtect& mem, FtlConfig config)
    : flash_(flash), mem_(mem), config_(config) {
  const FlashGeometry& g = flash_.geometry();
  if (config_.logical_pages == 0)
    throw SimError(ErrorCode::kConfigError, "ftl.logical_pages must be > 0");
  if (!(config_.gc_low_watermark > 0 &&
        config_.gc_low_watermark <= config_.gc_high_watermark &&
        config_.gc_high_watermark < 1))
    throw SimError(ErrorCode::kConfigError,
                   "ftl watermarks must satisfy 0 < low <= high < 1");

  table_.assign(config_.logical_pages, MappingEntry{});
  units_.resize(g.units());
  reserved_.assign(g.total_blocks(), false);

  // Translation pages are striped over units from the top block down.
  const std::uint64_t tpages =
      (config_.logical_pages + kEntriesPerTranslationPage - 1) /
      kEntriesPerTranslationPage;
  translation_pages_.reserve(tpages);
  for (std::uint64_t i = 0; i < tpages; ++i) {
    const std::uint64_t unit = unit_of_stripe(i % g.units());
    const std::uint64_t slot = i / g.units();
    const std::uint64_t depth = slot / g.pages_per_block;
    if (depth >= g.blocks_per_plane / 2)
      throw SimError(ErrorCode::kConfigError,
                     "translation pages would consume half of a plane");
    const std::uint64_t block =
        unit * g.blocks_per_plane + (g.blocks_per_plane - 1 - depth);
    reserved_[block] = true;
    const Ppa ppa = Ppa{static_cast<std::uint32_t>(
        block * g.pages_per_block + slot % g.pages_per_block)};
    flash_.program_page(ppa, {}, 0);
    translation_pages_.push_back(ppa);
  }

  for (std::uint64_t u = 0; u < g.units(); ++u)
    for (std::uint32_t b = 0; b < g.blocks_per_plane; ++b)
      if (!reserved_[u * g.blocks_per_plane + b]) {
        units_[u].free_blocks.push_back(b);
        free_pages_ += g.pages_per_block;
      }
  data_pages_ = free_pages_;
  if (data_pages_ <= config_.logical_pages)
    throw SimError(ErrorCode::kConfigError,
                   "logical space must be smaller than physical data space");
  flash_.reset_timing();
}

// Stripe order visits channels fastest so consecutive allocations land on
// different channels, then chips, dies and planes.
std::uint64_t Ftl::unit_of_stripe(std::uint64_t stripe) const {
  const FlashGeometry& g = flash_.geometry();
  const std::uint64_t ch = stripe % g.channels;
  std::uint64_t r = stripe / g.channels;
  const std::uint64_t chip = r % g.chips_per_channel;
  r /= g.chips_per_channel;
  const std::uint64_t die = r % g.dies_per_chip;
  r /= g.dies_per_chip;
  const std::uint64_t plane = r % g.planes_per_die;
  return ((ch * g.chips_per_channel + chip) * g.dies_per_chip + die) *
             g.planes_per_die +
         plane;
}

Ppa Ftl::allocate() {
  const FlashGeometry& g = flash_.geometry();
  for (std::uint64_t tries = 0; tries < units_.size(); ++tries) {
    const std::uint64_t u = unit_of_stripe(stripe_cursor_++ % units_.size());
    Unit& unit = units_[u];
    if (unit.active >= 0 &&
        flash_.block(unit.active).free_page_cursor >= g.pages_per_block)
      unit.active = -1;
    if (unit.active < 0) {
      if (unit.free_blocks.empty()) continue;
      // Dynamic wear leveling: open the least-erased free block.
      auto it = std::min_element(
          unit.free_blocks.begin(), unit.free_blocks.end(),
          [&](std::uint32_t a, std::uint32_t b) {
            return flash_.block(u * g.blocks_per_plane + a).erase_count <
                   flash_.block(u * g.blocks_per_plane + b).erase_count;
          });
      unit.active = static_cast<std::int64_t>(u * g.blocks_per_plane + *it);
      unit.free_blocks.erase(it);
    }
    const BlockMeta& meta = flash_.block(unit.active);
    --free_pages_;
    return Ppa{static_cast<std::uint32_t>(unit.active * g.pages_per_block +
                                          meta.free_page_cursor)};
  }
  throw SimError(ErrorCode::kDeviceFull, "no free flash pages");
}

std::uint64_t Ftl::protected_address(std::uint32_t lpa) const {
  const AddressRange r = mem_.range(RegionKind::kProtected);
  const std::uint64_t slots = std::max<std::uint64_t>(1, r.size / 8);
  return r.base + (lpa % slots) * 8;
}

Ppa Ftl::translation_page_ppa(std::uint32_t lpa) const {
  return translation_pages_.at(lpa / kEntriesPerTranslationPage);
}

MappingEntry Ftl::entry(std::uint32_t lpa) const {
  if (lpa >= table_.size())
    throw SimError(ErrorCode::kOutOfBounds,
                   "lpa " + std::to_string(lpa) + " outside logical space");
  return table_[lpa];
}

void Ftl::touch(std::uint32_t lpa) {
  auto it = cache_index_.find(lpa);
  cache_lru_.splice(cache_lru_.begin(), cache_lru_, it->second);
}

void Ftl::install(std::uint32_t lpa) {
  const std::uint64_t capacity = config_.effective_cache_entries();
  if (capacity == 0) return;
  if (cache_index_.contains(lpa)) {
    touch(lpa);
    return;
  }
  if (cache_lru_.size() >= capacity) {
    cache_index_.erase(cache_lru_.back());
    cache_lru_.pop_back();
  }
  cache_lru_.push_front(lpa);
  cache_index_[lpa] = cache_lru_.begin();
}

void Ftl::flush_cache() {
  cache_lru_.clear();
  cache_index_.clear();
}

bool Ftl::declared(std::uint8_t tee, std::uint32_t lpa) const {
  auto it = declared_.find(tee);
  return it != declared_.end() && it->second.contains(lpa);
}

AccessCheck Ftl::check_access(std::uint8_t tee, MappingEntry e,
                              bool is_declared) const {
  if (e.id_bits() == tee && tee != MappingEntry::kUnowned)
    return AccessCheck::kAllow;
  if (e.id_bits() == MappingEntry::kUnowned && is_declared)
    return AccessCheck::kAllow;
  return AccessCheck::kDeny;
}

AccessCheck Ftl::check_access(std::uint8_t tee, std::uint32_t lpa) const {
  return check_access(tee, entry(lpa), declared(tee, lpa));
}

TranslateResult Ftl::translate(std::uint8_t tee, std::uint32_t lpa, Nanos now) {
  const MappingEntry e = entry(lpa);
  ++stats_.lookups;
  TranslateResult r;

  const bool leave_normal_world =
      config_.isolation && config_.placement == TablePlacement::kSecureWorld;
  const bool hit = cache_index_.contains(lpa);
  Nanos t = now;
  if (leave_normal_world) t += mem_.switch_world(World::kSecure);
  if (hit) {
    touch(lpa);
    if (config_.isolation && !leave_normal_world)
      mem_.access(World::kNormal, protected_address(lpa), AccessMode::kRead);
    t += config_.dram_access_ns;
  } else {
    ++stats_.misses;
    // Miss service: enter the secure world, load the translation page,
    // install its entries, return.
    if (config_.isolation && !leave_normal_world) {
      t += mem_.switch_world(World::kSecure);
      r.world_switch = true;
    }
    t = flash_.read_page(translation_page_ppa(lpa), t).completion;
    const std::uint32_t first =
        lpa / kEntriesPerTranslationPage * kEntriesPerTranslationPage;
    const std::uint32_t last = std::min<std::uint32_t>(
        first + kEntriesPerTranslationPage, config_.logical_pages);
    for (std::uint32_t l = first; l < last; ++l)
      if (l != lpa) install(l);
    install(lpa);
    if (r.world_switch) t += mem_.switch_world(World::kNormal);
  }
  if (leave_normal_world) {
    t += mem_.switch_world(World::kNormal);
    r.world_switch = true;
  }
  if (r.world_switch) {
    ++stats_.switched_translations;
    stats_.world_switches += 2;
  }
  r.cache_hit = hit;
  r.cost = t - now;

  if (config_.isolation) {
    ++stats_.checked_requests;
    if (check_access(tee, e, declared(tee, lpa)) == AccessCheck::kDeny) {
      ++stats_.denials;
      throw SimError(ErrorCode::kPermissionDenied,
                     "tee " + std::to_string(tee) + " may not access lpa " +
                         std::to_string(lpa));
    }
  }
  if (!e.valid())
    throw SimError(ErrorCode::kUnmappedLpa,
                   "lpa " + std::to_string(lpa) + " is unmapped");
  r.ppa = e.ppa();
  return r;
}

void Ftl::store_entry(World world, std::uint32_t lpa, MappingEntry e) {
  if (lpa >= table_.size())
    throw SimError(ErrorCode::kOutOfBounds,
                   "lpa " + std::to_string(lpa) + " outside logical space");
  if (mem_.access(world, protected_address(lpa), AccessMode::kWrite) ==
      Decision::kFault)
    throw SimError(ErrorCode::kFault,
                   std::string("mapping update from ") + to_string(world) +
                       " world");
  table_[lpa] = e;
}

Nanos Ftl::write(std::uint8_t tee, std::uint32_t lpa,
                 std::span<const std::uint8_t> content, Nanos now) {
  if (tee != MappingEntry::kUnowned && config_.isolation) {
    ++stats_.checked_requests;
    if (check_access(tee, entry(lpa), declared(tee, lpa)) == AccessCheck::kDeny) {
      ++stats_.denials;
      throw SimError(ErrorCode::kPermissionDenied,
                     "tee " + std::to_string(tee) + " may not write lpa " +
                         std::to_string(lpa));
    }
  }
  Nanos t = now;
  if (free_page_ratio() < config_.gc_low_watermark)
    t += garbage_collect(t).cost;
  // Read after GC: it may have moved this page.
  const MappingEntry old = entry(lpa);

  const bool switched = tee != MappingEntry::kUnowned && config_.isolation;
  if (switched) t += mem_.switch_world(World::kSecure);
  const Ppa ppa = allocate();
  t = flash_.program_page(ppa, content, t, lpa);
  if (old.valid()) flash_.invalidate(old.ppa());
  store_entry(World::kSecure, lpa, old.with_ppa(ppa));
  if (switched) {
    t += mem_.switch_world(World::kNormal);
    stats_.world_switches += 2;
  }
  return t - now;
}

double Ftl::free_page_ratio() const {
  return static_cast<double>(free_pages_) / static_cast<double>(data_pages_);
}

void Ftl::recycle(std::uint64_t block_id) {
  const FlashGeometry& g = flash_.geometry();
  units_[block_id / g.blocks_per_plane].free_blocks.push_back(
      static_cast<std::uint32_t>(block_id % g.blocks_per_plane));
  free_pages_ += g.pages_per_block;
}

Nanos Ftl::relocate_block(std::uint64_t block_id, Nanos now,
                          std::uint64_t* moved) {
  const FlashGeometry& g = flash_.geometry();
  Nanos t = now;
  const Ppa first = flash_.first_page(block_id);
  for (std::uint32_t p = 0; p < g.pages_per_block; ++p) {
    const Ppa src{first.value + p};
    const auto owner = flash_.owner(src);
    if (!owner) continue;
    ReadResult data = flash_.read_page(src, t);
    const Ppa dst = allocate();
    t = flash_.program_page(dst, data.content, data.completion, *owner);
    flash_.invalidate(src);
    store_entry(World::kSecure, *owner, table_[*owner].with_ppa(dst));
    ++*moved;
  }
  t = flash_.erase_block(block_id, t);
  recycle(block_id);
  return t - now;
}

GcResult Ftl::garbage_collect(Nanos now, bool force) {
  const FlashGeometry& g = flash_.geometry();
  GcResult result;
  ++stats_.gc_runs;
  Nanos t = now;
  while (force || free_page_ratio() < config_.gc_high_watermark) {
    force = false;
    std::int64_t victim = -1;
    std::uint32_t fewest = std::numeric_limits<std::uint32_t>::max();
    for (std::uint64_t b = 0; b < reserved_.size(); ++b) {
      if (reserved_[b]) continue;
      const BlockMeta& m = flash_.block(b);
      if (m.free_page_cursor < g.pages_per_block) continue;  // free or active
      if (m.valid_page_count >= g.pages_per_block) continue;  // nothing to gain
      if (m.valid_page_count < fewest) {
        fewest = m.valid_page_count;
        victim = static_cast<std::int64_t>(b);
      }
    }
    if (victim < 0) break;
    std::uint64_t moved = 0;
    t += relocate_block(static_cast<std::uint64_t>(victim), t, &moved);
    result.relocated += moved;
    ++result.erased_blocks;
  }
  stats_.gc_relocations += result.relocated;
  result.cost = t - now;
  return result;
}

std::pair<std::uint32_t, std::uint32_t> Ftl::erase_spread() const {
  std::uint32_t lo = std::numeric_limits<std::uint32_t>::max(), hi = 0;
  for (std::uint64_t b = 0; b < reserved_.size(); ++b) {
    if (reserved_[b]) continue;
    const std::uint32_t c = flash_.block(b).erase_count;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return {lo, hi};
}

std::uint64_t Ftl::wear_level(Nanos now) {
  const FlashGeometry& g = flash_.geometry();
  std::uint64_t migrations = 0;
  Nanos t = now;
  for (std::uint32_t round = 0; round < config_.wear_batch; ++round) {
    const auto [lo, hi] = erase_spread();
    if (hi - lo <= config_.wear_threshold) break;
    // Coldest block still holding data.
    std::int64_t cold = -1;
    std::uint32_t coldest = std::numeric_limits<std::uint32_t>::max();
    for (std::uint64_t b = 0; b < reserved_.size(); ++b) {
      if (reserved_[b]) continue;
      const BlockMeta& m = flash_.block(b);
      if (m.free_page_cursor < g.pages_per_block || m.valid_page_count == 0)
        continue;
      if (m.erase_count < coldest) {
        coldest = m.erase_count;
        cold = static_cast<std::int64_t>(b);
      }
    }
    if (cold < 0 || hi - coldest <= config_.wear_threshold) break;
    std::uint64_t moved = 0;
    t += relocate_block(static_cast<std::uint64_t>(cold), t, &moved);
    ++migrations;
  }
  stats_.wear_migrations += migrations;
  return migrations;
}

std::size_t Ftl::set_id_bits(std::uint8_t tee,
                             std::span<const std::uint32_t> lpas) {
  if (tee == MappingEntry::kUnowned || tee > 15)
    throw SimError(ErrorCode::kInvalidState, "tee id must be in 1..15");
  for (std::uint32_t lpa : lpas) {
    const std::uint8_t id = entry(lpa).id_bits();
    if (id != MappingEntry::kUnowned && id != tee)
      throw SimError(ErrorCode::kAlreadyOwned,
                     "lpa " + std::to_string(lpa) + " owned by tee " +
                         std::to_string(id));
  }
  for (std::uint32_t lpa : lpas)
    store_entry(World::kSecure, lpa, table_[lpa].with_id(tee));
  return lpas.size();
}

void Ftl::clear_id_bits(std::uint8_t tee) {
  for (std::uint32_t lpa = 0; lpa < table_.size(); ++lpa)
    if (table_[lpa].id_bits() == tee)
      store_entry(World::kSecure, lpa,
                  table_[lpa].with_id(MappingEntry::kUnowned));
}

void Ftl::declare(std::uint8_t tee, std::span<const std::uint32_t> lpas) {
  auto& set = declared_[tee];
  set.insert(lpas.begin(), lpas.end());
}

void Ftl::forget(std::uint8_t tee) { declared_.erase(tee); }

}  // namespace isctee
