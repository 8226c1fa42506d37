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

#ifndef ISCTEE_FTL_HPP_
#define ISCTEE_FTL_HPP_

#include <cstdint>
#include <list>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "isctee/flash.hpp"
#include "isctee/mem_protect.hpp"

namespace isctee {

// 64-bit packed mapping entry:
//   bits  0..31  physical page address
//   bits 32..35  owner TEE id (0 = unowned)
//   bit      36  valid
//   bits 37..63  reserved
class MappingEntry {
 public:
  static constexpr std::uint8_t kUnowned = 0;
  static constexpr unsigned kIdBits = 4;

  constexpr MappingEntry() = default;
  static constexpr MappingEntry make(Ppa ppa, std::uint8_t id, bool valid) {
    MappingEntry e;
    e.raw_ = std::uint64_t{ppa.value} | (std::uint64_t{id & 0xFu} << 32) |
             (std::uint64_t{valid} << 36);
    return e;
  }

  constexpr Ppa ppa() const { return Ppa{static_cast<std::uint32_t>(raw_)}; }
  constexpr std::uint8_t id_bits() const { return (raw_ >> 32) & 0xFu; }
  constexpr bool valid() const { return (raw_ >> 36) & 1u; }
  constexpr std::uint64_t raw() const { return raw_; }

  constexpr MappingEntry with_id(std::uint8_t id) const {
    return make(ppa(), id, valid());
  }
  constexpr MappingEntry with_ppa(Ppa p) const { return make(p, id_bits(), true); }

  constexpr bool operator==(const MappingEntry&) const = default;

 private:
  std::uint64_t raw_ = 0;
};
static_assert(sizeof(MappingEntry) == 8);

enum class TablePlacement : std::uint8_t { kProtectedRegion, kSecureWorld };
enum class AccessCheck : std::uint8_t { kAllow, kDeny };

const char* to_string(TablePlacement p);

struct FtlConfig {
  std::uint32_t logical_pages = 1u << 20;
  std::uint64_t cache_entries = 0;  // 0: 75% of logical_pages
  double gc_low_watermark = 0.05;
  double gc_high_watermark = 0.10;
  std::uint32_t wear_threshold = 20;
  std::uint32_t wear_batch = 4;
  TablePlacement placement = TablePlacement::kProtectedRegion;
  // Off for the unprotected baselines: no ID checks, no world switches.
  bool isolation = true;
  Nanos dram_access_ns = 50;

  std::uint64_t effective_cache_entries() const {
    return cache_entries != 0 ? cache_entries : logical_pages / 4 * 3;
  }
};

inline constexpr std::uint32_t kEntriesPerTranslationPage = 512;

struct TranslateResult {
  Ppa ppa;
  Nanos cost = 0;
  bool world_switch = false;
  bool cache_hit = false;
};

struct GcResult {
  std::uint64_t relocated = 0;
  std::uint64_t erased_blocks = 0;
  Nanos cost = 0;
};

struct FtlStats {
  std::uint64_t lookups = 0;
  std::uint64_t misses = 0;
  // Translations that left the normal world (each is an enter + return pair).
  std::uint64_t switched_translations = 0;
  std::uint64_t world_switches = 0;
  std::uint64_t checked_requests = 0;
  std::uint64_t denials = 0;
  std::uint64_t gc_runs = 0;
  std::uint64_t gc_relocations = 0;
  std::uint64_t wear_migrations = 0;

  double miss_ratio() const {
    return lookups == 0 ? 0.0 : static_cast<double>(misses) / lookups;
  }
};

// Page-level FTL. The authoritative table is flash resident (translation
// pages in reserved blocks); an LRU cache of entries lives in the protected
// region, written through from the secure world.
class Ftl {
 public:
  Ftl(FlashArray& flash, MemProtect& mem, FtlConfig config);

  const FtlConfig& config() const { return config_; }
  void set_placement(TablePlacement p) { config_.placement = p; }

  TranslateResult translate(std::uint8_t tee, std::uint32_t lpa, Nanos now);

  AccessCheck check_access(std::uint8_t tee, MappingEntry entry,
                           bool declared) const;
  AccessCheck check_access(std::uint8_t tee, std::uint32_t lpa) const;

  // Out-of-place write issued through the secure-world checker. tee 0 is
  // firmware (dataset population) and bypasses ownership checks.
  Nanos write(std::uint8_t tee, std::uint32_t lpa,
              std::span<const std::uint8_t> content, Nanos now);

  // Updates one mapping entry as `world`; the normal world faults.
  void store_entry(World world, std::uint32_t lpa, MappingEntry entry);

  GcResult garbage_collect(Nanos now, bool force = false);
  std::uint64_t wear_level(Nanos now);

  std::size_t set_id_bits(std::uint8_t tee, std::span<const std::uint32_t> lpas);
  void clear_id_bits(std::uint8_t tee);
  void declare(std::uint8_t tee, std::span<const std::uint32_t> lpas);
  void forget(std::uint8_t tee);

  MappingEntry entry(std::uint32_t lpa) const;
  void flush_cache();
  bool cached(std::uint32_t lpa) const { return cache_index_.contains(lpa); }
  std::size_t cache_size() const { return cache_lru_.size(); }

  Ppa translation_page_ppa(std::uint32_t lpa) const;
  double free_page_ratio() const;
  std::uint64_t free_pages() const { return free_pages_; }
  std::uint64_t data_pages() const { return data_pages_; }
  std::pair<std::uint32_t, std::uint32_t> erase_spread() const;
  bool reserved(std::uint64_t block_id) const { return reserved_[block_id]; }

  const FtlStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

  FlashArray& flash() { return flash_; }

 private:
  struct Unit {
    std::vector<std::uint32_t> free_blocks;  // block indices within the unit
    std::int64_t active = -1;                // global block id
  };

  std::uint64_t unit_of_stripe(std::uint64_t stripe) const;
  Ppa allocate();
  void install(std::uint32_t lpa);
  void touch(std::uint32_t lpa);
  std::uint64_t protected_address(std::uint32_t lpa) const;
  bool declared(std::uint8_t tee, std::uint32_t lpa) const;
  Nanos relocate_block(std::uint64_t block_id, Nanos now, std::uint64_t* moved);
  void recycle(std::uint64_t block_id);

  FlashArray& flash_;
  MemProtect& mem_;
  FtlConfig config_;
  std::vector<MappingEntry> table_;
  std::vector<Unit> units_;
  std::vector<bool> reserved_;
  std::vector<Ppa> translation_pages_;
  std::uint64_t stripe_cursor_ = 0;
  std::uint64_t free_pages_ = 0;
  std::uint64_t data_pages_ = 0;

  std::list<std::uint32_t> cache_lru_;  // front = most recent
  std::unordered_map<std::uint32_t, std::list<std::uint32_t>::iterator> cache_index_;
  std::unordered_map<std::uint8_t, std::unordered_set<std::uint32_t>> declared_;
  FtlStats stats_;
};

}  // namespace isctee

#endif  // ISCTEE_FTL_HPP_
