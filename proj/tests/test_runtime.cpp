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

#include <functional>
#include <vector>

#include "isctee/errors.hpp"
#include "isctee/tee_runtime.hpp"

using namespace isctee;

namespace {

constexpr std::uint32_t kPages = 2048;

FlashGeometry rig_geometry() {
  FlashGeometry g;
  g.channels = 2;
  g.chips_per_channel = 1;
  g.dies_per_chip = 2;
  g.planes_per_die = 2;
  g.blocks_per_plane = 32;
  g.pages_per_block = 16;
  return g;
}

FtlConfig rig_ftl() {
  FtlConfig c;
  c.logical_pages = kPages;
  return c;
}

SecureMemoryConfig rig_smem() {
  SecureMemoryConfig c;
  c.dram_bytes = RegionLayout{}.dram_bytes;
  return c;
}

struct Rig {
  Rig() : flash(rig_geometry(), FlashTimings{}), mem(RegionLayout{}), ftl(flash, mem, rig_ftl()),
          smem(rig_smem()), rt(ftl, mem, &smem) {
    const std::vector<std::uint8_t> page(4096, 0xAB);
    for (std::uint32_t l = 0; l < kPages; ++l) ftl.write(0, l, page, 0);
  }

  FlashArray flash;
  MemProtect mem;
  Ftl ftl;
  SecureMemory smem;
  TeeRuntime rt;
};

std::vector<std::uint32_t> span_of(std::uint32_t first, std::uint32_t n) {
  std::vector<std::uint32_t> v(n);
  for (std::uint32_t i = 0; i < n; ++i) v[i] = first + i;
  return v;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const SimError& e) {
    return e.code();
  }
  return ErrorCode::kConfigError;  // sentinel: nothing thrown
}

}  // namespace

TEST_CASE("create and terminate charge fixed costs and reclaim memory plus metadata") {
  Rig r;
  const std::uint8_t eid = r.rt.create_tee({1, span_of(0, 10), 0, 64 * 1024});
  CHECK(eid == 1);
  CHECK(r.rt.descriptor(eid).state == TeeState::kRunning);
  CHECK(r.rt.stats().management_ns == 95'000);
  CHECK(r.ftl.entry(3).id_bits() == eid);
  CHECK(r.rt.descriptor(eid).memory_region.size == 16ULL << 20);
  CHECK(r.rt.descriptor(eid).metadata_slot.size == 64 * 1024);
  CHECK(r.mem.region_of(r.rt.descriptor(eid).metadata_slot.base) == RegionKind::kSecure);

  const std::uint64_t reclaimed = r.rt.terminate_tee(eid);
  CHECK(reclaimed == (16ULL << 20) + 64 * 1024);
  CHECK(r.rt.stats().management_ns == 95'000 + 58'000);
  CHECK(r.ftl.entry(3).id_bits() == MappingEntry::kUnowned);
  CHECK(r.mem.ranges_of(eid).empty());
  CHECK_FALSE(r.rt.live(eid));
  CHECK(code_of([&] { r.rt.descriptor(eid); }) == ErrorCode::kUnknownTee);
}

TEST_CASE("fifteen TEEs at most, and freed ids are reused") {
  Rig r;
  for (int i = 0; i < 15; ++i) r.rt.create_tee({0, span_of(static_cast<std::uint32_t>(i * 10), 10), 0, 4096});
  CHECK(r.rt.live_count() == 15);
  CHECK(code_of([&] { r.rt.create_tee({0, {}, 0, 4096}); }) == ErrorCode::kNoFreeId);
  r.rt.terminate_tee(4);
  CHECK(r.rt.create_tee({0, {}, 0, 4096}) == 4);
}

TEST_CASE("memory regions are disjoint and coalesce on release") {
  Rig r;
  const std::uint8_t a = r.rt.create_tee({0, {}, 0, 4096});
  const std::uint8_t b = r.rt.create_tee({0, {}, 0, 4096});
  const AddressRange ra = r.rt.descriptor(a).memory_region;
  const AddressRange rb = r.rt.descriptor(b).memory_region;
  CHECK((ra.end() <= rb.base || rb.end() <= ra.base));
  r.rt.terminate_tee(a);
  r.rt.terminate_tee(b);
  const std::uint8_t c = r.rt.create_tee({0, {}, 32ULL << 20, 4096});
  CHECK(r.rt.descriptor(c).memory_region.base == ra.base);
}

TEST_CASE("quota failures") {
  Rig r;
  CHECK(code_of([&] { r.rt.create_tee({0, {}, 8ULL << 30, 4096}); }) == ErrorCode::kOutOfMemory);
  CHECK(code_of([&] { r.rt.create_tee({0, {}, 4096, 8192}); }) == ErrorCode::kOutOfMemory);
  CHECK(r.rt.live_count() == 0);
}

TEST_CASE("granting a page owned by another TEE fails and leaks nothing") {
  Rig r;
  r.rt.create_tee({0, span_of(0, 4), 0, 4096});
  CHECK(code_of([&] { r.rt.create_tee({0, span_of(2, 4), 0, 4096}); }) == ErrorCode::kAlreadyOwned);
  CHECK(r.rt.live_count() == 1);
  CHECK(r.ftl.entry(5).id_bits() == MappingEntry::kUnowned);
}

TEST_CASE("offloads are keyed by tid") {
  Rig r;
  OffloadRequest req;
  req.program = 2;
  req.lpas = span_of(0, 8);
  req.tid = 77;
  CHECK(r.rt.offload_code(req) == 77);
  CHECK(r.rt.eid_of(77).has_value());
  req.lpas = span_of(100, 8);
  CHECK(code_of([&] { r.rt.offload_code(req); }) == ErrorCode::kDuplicateTid);
}

TEST_CASE("result retrieval") {
  Rig r;
  OffloadRequest req;
  req.tid = 5;
  r.rt.offload_code(req);
  const std::uint8_t eid = *r.rt.eid_of(5);
  CHECK(code_of([&] { r.rt.get_result(5); }) == ErrorCode::kNotFinished);
  CHECK(code_of([&] { r.rt.get_result(6); }) == ErrorCode::kUnknownTee);
  CHECK(code_of([&] { r.rt.complete(eid, std::vector<std::uint8_t>(65 * 1024)); }) ==
        ErrorCode::kBadLength);
  const std::vector<std::uint8_t> answer(1000, 7);
  r.rt.complete(eid, answer);
  CHECK(code_of([&] { r.rt.get_result(5); }) == ErrorCode::kNotFinished);  // not terminated yet
  r.rt.terminate_tee(eid);
  Nanos xfer = 0;
  CHECK(r.rt.get_result(5, &xfer) == answer);
  CHECK(xfer == transfer_time(1000, 3'200'000'000ULL));

  req.tid = 6;
  r.rt.offload_code(req);
  r.rt.terminate_tee(*r.rt.eid_of(6));
  CHECK(code_of([&] { r.rt.get_result(6); }) == ErrorCode::kNotFinished);
}

TEST_CASE("exhaustive probe of another TEE's mapping entries") {
  Rig r;
  const std::uint8_t victim = r.rt.create_tee({0, span_of(0, 256), 0, 4096});
  std::uint64_t denied = 0, reasons_ok = 0;
  for (std::uint32_t lpa = 0; lpa < 256; ++lpa) {
    OffloadRequest probe;
    probe.tid = 1000 + lpa;
    r.rt.offload_code(probe);
    const std::uint8_t attacker = *r.rt.eid_of(probe.tid);
    try {
      r.rt.read_mapping_entry(attacker, lpa, 0);
    } catch (const SimError& e) {
      denied += e.code() == ErrorCode::kPermissionDenied;
    }
    const TeeDescriptor& d = r.rt.descriptor(attacker);
    reasons_ok += d.state == TeeState::kAborted && d.abort &&
                  d.abort->reason == AbortReason::kAccessViolation;
    // An aborted TEE cannot keep probing.
    CHECK(code_of([&] { r.rt.read_mapping_entry(attacker, lpa, 0); }) == ErrorCode::kInvalidState);
    r.rt.terminate_tee(attacker);
    CHECK(code_of([&] { r.rt.get_result(probe.tid); }) == ErrorCode::kAborted);
  }
  CHECK(denied == 256);
  CHECK(reasons_ok == 256);
  CHECK(r.rt.aborts().size() == 256);
  // The victim is untouched and still translates its own pages.
  CHECK(r.rt.descriptor(victim).state == TeeState::kRunning);
  for (std::uint32_t lpa = 0; lpa < 256; ++lpa) {
    CHECK(r.ftl.entry(lpa).id_bits() == victim);
    CHECK(r.rt.read_mapping_entry(victim, lpa, 0).ppa == r.ftl.entry(lpa).ppa());
  }
}

TEST_CASE("TEE memory accesses are confined and integrity checked") {
  Rig r;
  const std::uint8_t a = r.rt.create_tee({0, {}, 0, 4096});
  const std::uint8_t b = r.rt.create_tee({0, {}, 0, 4096});
  const std::uint64_t base_a = r.rt.descriptor(a).memory_region.base;
  const std::uint64_t base_b = r.rt.descriptor(b).memory_region.base;
  const std::vector<std::uint8_t> page(4096, 0x42);
  r.smem.ingest_page(base_a, page);
  r.smem.ingest_page(base_b, page);
  CHECK(r.rt.tee_read(a, base_a).bytes[0] == 0x42);

  // Foreign memory: fault, ACCESS_VIOLATION.
  CHECK(code_of([&] { r.rt.tee_read(a, base_b); }) == ErrorCode::kFault);
  CHECK(r.rt.descriptor(a).abort->reason == AbortReason::kAccessViolation);

  // Corrupted memory: MEMORY_CORRUPTION.
  r.smem.flip_data_bit(base_b + 10, 1);
  CHECK(code_of([&] { r.rt.tee_read(b, base_b); }) == ErrorCode::kIntegrityViolation);
  CHECK(r.rt.descriptor(b).abort->reason == AbortReason::kMemoryCorruption);
  CHECK(r.rt.stats().aborted == 2);

  // Secure memory is never reachable from a TEE.
  const std::uint8_t c = r.rt.create_tee({0, {}, 0, 4096});
  Line l{};
  CHECK(code_of([&] { r.rt.tee_write(c, 0, l); }) == ErrorCode::kFault);
}

TEST_CASE("aborts are recorded once and terminate still reclaims") {
  Rig r;
  const std::uint8_t eid = r.rt.create_tee({0, span_of(0, 2), 0, 4096});
  r.rt.throw_out_tee(eid, AbortReason::kProgramException, "divide by zero");
  r.rt.throw_out_tee(eid, AbortReason::kAccessViolation, "later");
  CHECK(r.rt.aborts().size() == 1);
  CHECK(r.rt.descriptor(eid).abort->reason == AbortReason::kProgramException);
  CHECK(code_of([&] { r.rt.complete(eid, {}); }) == ErrorCode::kInvalidState);
  CHECK(r.rt.terminate_tee(eid) == (16ULL << 20) + 64 * 1024);
  CHECK(r.ftl.entry(0).id_bits() == MappingEntry::kUnowned);
}
