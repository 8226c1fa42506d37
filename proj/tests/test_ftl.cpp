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

#include <doctest.h>

#include <map>
#include <unordered_map>
#include <vector>

#include "isctee/errors.hpp"
#include "isctee/ftl.hpp"

using namespace isctee;

namespace {

FlashGeometry ftl_geometry() {
  FlashGeometry g;
  g.channels = 2;
  g.chips_per_channel = 1;
  g.dies_per_chip = 2;
  g.planes_per_die = 2;
  g.blocks_per_plane = 32;
  g.pages_per_block = 16;
  return g;
}

struct Rig {
  explicit Rig(FtlConfig cfg = {}, FlashGeometry g = ftl_geometry())
      : flash(g, FlashTimings{}), mem(RegionLayout{}), ftl(flash, mem, fix(cfg)) {}

  static FtlConfig fix(FtlConfig cfg) {
    if (cfg.logical_pages == FtlConfig{}.logical_pages) cfg.logical_pages = 2048;
    return cfg;
  }

  FlashArray flash;
  MemProtect mem;
  Ftl ftl;
};

std::vector<std::uint8_t> stamp(std::uint32_t lpa, std::uint64_t version) {
  std::vector<std::uint8_t> p(4096);
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = static_cast<std::uint8_t>((lpa * 131 + version * 17 + i) & 0xFF);
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(lpa >> (8 * i));
  for (int i = 0; i < 8; ++i) p[4 + i] = static_cast<std::uint8_t>(version >> (8 * i));
  return p;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const SimError& e) {
    return e.code();
  }
  FAIL("expected a SimError");
  return ErrorCode::kConfigError;
}

}  // namespace

TEST_CASE("translation hit and miss costs under the protected-region placement") {
  Rig r;
  r.ftl.write(0, 7, stamp(7, 0), 0);
  r.ftl.set_id_bits(3, std::vector<std::uint32_t>{7});
  r.ftl.flush_cache();
  r.flash.reset_timing();
  const Nanos xfer = transfer_time(4096, 600'000'000);

  const TranslateResult miss = r.ftl.translate(3, 7, 0);
  CHECK_FALSE(miss.cache_hit);
  CHECK(miss.world_switch);
  // Switch in, translation-page read, switch out.
  CHECK(miss.cost == 3'800 + 50'000 + xfer + 3'800);

  const TranslateResult hit = r.ftl.translate(3, 7, miss.cost);
  CHECK(hit.cache_hit);
  CHECK_FALSE(hit.world_switch);
  CHECK(hit.cost == 50);
  CHECK(hit.ppa == miss.ppa);
}

TEST_CASE("secure-world placement switches on every translation") {
  FtlConfig cfg;
  cfg.placement = TablePlacement::kSecureWorld;
  Rig r(cfg);
  r.ftl.write(0, 1, stamp(1, 0), 0);
  r.ftl.set_id_bits(2, std::vector<std::uint32_t>{1});
  r.ftl.translate(2, 1, 0);
  const TranslateResult hit = r.ftl.translate(2, 1, 0);
  CHECK(hit.cache_hit);
  CHECK(hit.world_switch);
  CHECK(hit.cost == 3'800 + 50 + 3'800);
  CHECK(r.ftl.stats().world_switches == 4);
}

TEST_CASE("a miss installs the whole translation page") {
  Rig r;
  for (std::uint32_t l = 0; l < 600; ++l) r.ftl.write(0, l, stamp(l, 0), 0);
  r.ftl.set_id_bits(1, [] {
    std::vector<std::uint32_t> v(600);
    for (std::uint32_t i = 0; i < 600; ++i) v[i] = i;
    return v;
  }());
  r.ftl.flush_cache();
  r.ftl.reset_stats();
  for (std::uint32_t l = 0; l < 600; ++l) r.ftl.translate(1, l, 0);
  CHECK(r.ftl.stats().lookups == 600);
  CHECK(r.ftl.stats().misses == 2);  // entries 0..511 and 512..599
  // Miss accounting: one switched translation (two switches) per miss.
  CHECK(r.ftl.stats().switched_translations == r.ftl.stats().misses);
  CHECK(r.ftl.stats().world_switches == 2 * r.ftl.stats().misses);
}

TEST_CASE("access control on mapping entries") {
  Rig r;
  for (std::uint32_t l = 0; l < 8; ++l) r.ftl.write(0, l, stamp(l, 0), 0);
  CHECK(r.ftl.set_id_bits(3, std::vector<std::uint32_t>{}) == 0);
  CHECK(r.ftl.set_id_bits(3, std::vector<std::uint32_t>{0, 1}) == 2);
  CHECK(r.ftl.check_access(3, 0) == AccessCheck::kAllow);
  CHECK(r.ftl.check_access(5, 0) == AccessCheck::kDeny);
  CHECK(code_of([&] { r.ftl.translate(5, 0, 0); }) == ErrorCode::kPermissionDenied);
  CHECK(code_of([&] { r.ftl.set_id_bits(5, std::vector<std::uint32_t>{1}); }) ==
        ErrorCode::kAlreadyOwned);
  // Declared but unowned entries are reachable by the declaring TEE only.
  r.ftl.declare(6, std::vector<std::uint32_t>{4});
  CHECK(r.ftl.check_access(6, 4) == AccessCheck::kAllow);
  CHECK(r.ftl.check_access(7, 4) == AccessCheck::kDeny);
  r.ftl.forget(6);
  CHECK(r.ftl.check_access(6, 4) == AccessCheck::kDeny);
  r.ftl.clear_id_bits(3);
  CHECK(r.ftl.entry(0).id_bits() == MappingEntry::kUnowned);
  CHECK(r.ftl.check_access(3, 0) == AccessCheck::kDeny);
}

TEST_CASE("exhaustive probe by a malicious TEE is denied on every foreign entry") {
  Rig r;
  const std::uint32_t n = r.ftl.config().logical_pages;
  for (std::uint32_t l = 0; l < n; ++l) r.ftl.write(0, l, stamp(l, 0), 0);
  std::vector<std::uint32_t> mine, theirs;
  for (std::uint32_t l = 0; l < n; ++l) (l % 3 == 0 ? mine : theirs).push_back(l);
  r.ftl.set_id_bits(1, mine);
  r.ftl.set_id_bits(2, theirs);
  std::uint64_t denied = 0, allowed = 0;
  for (std::uint32_t l = 0; l < n; ++l) {
    try {
      r.ftl.translate(2, l, 0);
      ++allowed;
      CHECK(l % 3 != 0);
    } catch (const SimError& e) {
      CHECK(e.code() == ErrorCode::kPermissionDenied);
      CHECK(l % 3 == 0);
      ++denied;
    }
  }
  CHECK(denied == mine.size());
  CHECK(allowed == theirs.size());
  CHECK(r.ftl.stats().denials == denied);
}

TEST_CASE("mapping updates from the normal world fault") {
  Rig r;
  CHECK(code_of([&] { r.ftl.store_entry(World::kNormal, 0, MappingEntry{}); }) == ErrorCode::kFault);
  CHECK(r.mem.fault_count() == 1);
  r.ftl.store_entry(World::kSecure, 0, MappingEntry::make(Ppa{5}, 0, true));
  CHECK(r.ftl.entry(0).ppa() == Ppa{5});
}

TEST_CASE("out-of-place writes leave one valid page per logical page") {
  Rig r;
  for (std::uint64_t v = 0; v < 10; ++v) r.ftl.write(0, 9, stamp(9, v), 0);
  std::uint64_t valid = 0, invalid = 0;
  const FlashGeometry& g = r.flash.geometry();
  for (std::uint32_t p = 0; p < g.total_pages(); ++p) {
    if (r.flash.owner(Ppa{p}) == 9u) ++valid;
    if (r.flash.status(Ppa{p}) == PageStatus::kInvalid) ++invalid;  // only lpa 9 was written
  }
  CHECK(valid == 1);
  CHECK(invalid == 9);
  CHECK(r.flash.read_page(r.ftl.entry(9).ppa(), 0).content == stamp(9, 9));
}

TEST_CASE("consecutive writes stripe across channels") {
  Rig r;
  const FlashGeometry& g = r.flash.geometry();
  for (std::uint32_t l = 0; l < 4; ++l) r.ftl.write(0, l, stamp(l, 0), 0);
  CHECK(decode_ppa(g, r.ftl.entry(0).ppa()).channel == 0);
  CHECK(decode_ppa(g, r.ftl.entry(1).ppa()).channel == 1);
  CHECK(decode_ppa(g, r.ftl.entry(2).ppa()).channel == 0);
  CHECK(decode_ppa(g, r.ftl.entry(3).ppa()).channel == 1);
}

TEST_CASE("garbage collection with nothing to reclaim does nothing") {
  Rig r;
  for (std::uint32_t l = 0; l < 100; ++l) r.ftl.write(0, l, stamp(l, 0), 0);
  const GcResult gc = r.ftl.garbage_collect(0, true);
  CHECK(gc.relocated == 0);
  CHECK(gc.erased_blocks == 0);
}

TEST_CASE("a fully invalid block is erased without relocations") {
  Rig r;
  const FlashGeometry& g = r.flash.geometry();
  // Fill one full stripe round so every unit has its first block complete.
  const std::uint32_t stripe = static_cast<std::uint32_t>(g.units() * g.pages_per_block);
  for (std::uint32_t l = 0; l < stripe; ++l) r.ftl.write(0, l, stamp(l, 0), 0);
  for (std::uint32_t l = 0; l < stripe; ++l) r.ftl.write(0, l, stamp(l, 1), 0);
  const GcResult gc = r.ftl.garbage_collect(0, true);
  CHECK(gc.erased_blocks >= 1);
  CHECK(gc.relocated == 0);
  for (std::uint32_t l = 0; l < stripe; ++l)
    CHECK(r.flash.read_page(r.ftl.entry(l).ppa(), 0).content == stamp(l, 1));
}

TEST_CASE("flushing the cache does not change translations") {
  Rig r;
  for (std::uint32_t l = 0; l < 700; ++l) r.ftl.write(0, l, stamp(l, 0), 0);
  std::vector<std::uint32_t> all(700);
  for (std::uint32_t l = 0; l < 700; ++l) all[l] = l;
  r.ftl.set_id_bits(4, all);
  std::vector<Ppa> before;
  for (std::uint32_t l = 0; l < 700; ++l) before.push_back(r.ftl.translate(4, l, 0).ppa);
  r.ftl.flush_cache();
  CHECK(r.ftl.cache_size() == 0);
  for (std::uint32_t l = 0; l < 700; ++l) CHECK(r.ftl.translate(4, l, 0).ppa == before[l]);
}

TEST_CASE("the cache is bounded and evicts least recently used entries") {
  FtlConfig cfg;
  cfg.cache_entries = 600;
  cfg.isolation = false;
  Rig r(cfg);
  for (std::uint32_t l = 0; l < 1100; ++l) r.ftl.write(0, l, stamp(l, 0), 0);
  r.ftl.translate(0, 0, 0);     // installs 0..511
  r.ftl.translate(0, 600, 0);   // installs 512..1023, evicting the oldest
  CHECK(r.ftl.cache_size() == 600);
  CHECK(r.ftl.cached(600));
  CHECK(r.ftl.cached(0));       // the requested entry is installed last
  CHECK_FALSE(r.ftl.cached(1));
}

TEST_CASE("unmapped and out of range logical pages") {
  FtlConfig cfg;
  cfg.isolation = false;
  Rig r(cfg);
  CHECK(code_of([&] { r.ftl.translate(0, 5, 0); }) == ErrorCode::kUnmappedLpa);
  CHECK(code_of([&] { r.ftl.translate(0, 1u << 20, 0); }) == ErrorCode::kOutOfBounds);
}

TEST_CASE("shadow-store equivalence over a randomized write storm with GC and wear leveling") {
  FtlConfig cfg;
  cfg.isolation = false;
  cfg.wear_threshold = 6;
  Rig r(cfg);
  const std::uint32_t n = r.ftl.config().logical_pages;
  std::unordered_map<std::uint32_t, std::uint64_t> shadow;  // lpa -> version
  SeededRng rng(2026);
  std::uint64_t gc_forced = 0, migrations = 0;
  for (std::uint64_t i = 0; i < 100'000; ++i) {
    // Skewed: most writes hit a small hot set so erase counts diverge.
    const std::uint32_t lpa = rng.below(10) < 9 ? static_cast<std::uint32_t>(rng.below(n / 10))
                                                : static_cast<std::uint32_t>(rng.below(n));
    const std::uint64_t version = ++shadow[lpa];
    r.ftl.write(0, lpa, stamp(lpa, version), 0);
    if (i % 5'000 == 4'999) {
      r.ftl.garbage_collect(0, true);
      ++gc_forced;
    }
    if (i % 1'000 == 999) {
      const auto [lo, hi] = r.ftl.erase_spread();
      migrations += r.ftl.wear_level(0);
      const auto [lo2, hi2] = r.ftl.erase_spread();
      CHECK(hi2 - lo2 <= hi - lo);
    }
  }
  CHECK(gc_forced == 20);
  CHECK(r.ftl.stats().gc_runs > gc_forced);  // watermark-triggered runs too
  CHECK(r.ftl.stats().gc_relocations > 0);
  CHECK(migrations > 0);

  std::uint64_t mismatches = 0;
  for (const auto& [lpa, version] : shadow) {
    const Ppa ppa = r.ftl.translate(0, lpa, 0).ppa;
    if (r.flash.read_page(ppa, 0).content != stamp(lpa, version)) ++mismatches;
  }
  CHECK(mismatches == 0);

  // At most one valid physical page per logical page.
  std::map<std::uint32_t, int> valid;
  const FlashGeometry& g = r.flash.geometry();
  for (std::uint32_t p = 0; p < g.total_pages(); ++p)
    if (r.flash.status(Ppa{p}) == PageStatus::kValid)
      if (const auto o = r.flash.owner(Ppa{p}); o && *o != kNoLpa) ++valid[*o];
  for (const auto& [lpa, count] : valid) CHECK(count == 1);
  CHECK(valid.size() == shadow.size());
}
