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
#include <string>
#include <vector>

#include "isctee/errors.hpp"
#include "isctee/secure_memory.hpp"

using namespace isctee;

namespace {

constexpr std::uint64_t kDataPages = 4;

SecureMemoryConfig small_config(CounterScheme scheme = CounterScheme::kHybrid) {
  SecureMemoryConfig c;
  c.scheme = scheme;
  c.dram_bytes = 1ULL << 20;  // 256 pages, three tree levels
  c.counter_cache_bytes = 16 * 64;
  return c;
}

std::vector<std::uint8_t> random_page(SeededRng& rng) {
  std::vector<std::uint8_t> p(kPageBytes);
  for (auto& b : p) b = static_cast<std::uint8_t>(rng.next());
  return p;
}

Line line_from(const std::vector<std::uint8_t>& page, std::uint64_t line) {
  Line l;
  std::copy_n(page.begin() + static_cast<std::ptrdiff_t>(line * kLineSize), kLineSize, l.begin());
  return l;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const SimError& e) {
    return e.code();
  }
  return ErrorCode::kConfigError;  // sentinel: nothing thrown
}

// A 4-page store: pages 0..1 stay read-only, pages 2..3 are made writable.
struct Store {
  explicit Store(CounterScheme scheme = CounterScheme::kHybrid) : mem(small_config(scheme)) {
    SeededRng rng(99);
    for (std::uint64_t p = 0; p < kDataPages; ++p) {
      plain.push_back(random_page(rng));
      mem.ingest_page(p * kPageBytes, plain.back());
    }
    for (std::uint64_t p = 2; p < kDataPages; ++p)
      mem.change_permission(p * kPageBytes, PagePermission::kWritable);
  }

  // Writes one line on a writable page and then reads every line back.
  void exercise() {
    Line l{};
    l.fill(0x5a);
    mem.mem_write(2 * kPageBytes + 64, l);
    std::copy(l.begin(), l.end(), plain[2].begin() + 64);
    CHECK(read_all());
  }

  // True when every line decrypts to the shadow plaintext. Violations throw.
  bool read_all() {
    bool same = true;
    for (std::uint64_t p = 0; p < kDataPages; ++p)
      for (std::uint64_t i = 0; i < kLinesPerPage; ++i)
        same &= mem.mem_read(p * kPageBytes + i * kLineSize).bytes == line_from(plain[p], i);
    return same;
  }

  SecureMemory mem;
  std::vector<std::vector<std::uint8_t>> plain;
};

}  // namespace

TEST_CASE("counter block packing roundtrips") {
  SplitCounterBlock s;
  s.major = 0x0123456789abcdefULL;
  for (std::uint64_t i = 0; i < kLinesPerPage; ++i) s.minors[i] = static_cast<std::uint8_t>((i * 37) & 0x7F);
  CHECK(SplitCounterBlock::unpack(s.pack()) == s);
  MajorCounterBlock m;
  for (unsigned i = 0; i < 8; ++i) m.majors[i] = 1000 + i;
  CHECK(MajorCounterBlock::unpack(m.pack()).majors == m.majors);
}

TEST_CASE("tree geometry") {
  SecureMemory mem(small_config());
  const TreeFootprint split = mem.footprint(TreeKind::kSplit);
  CHECK(split.leaves == 256);
  CHECK(split.levels == 3);
  CHECK(split.interior_nodes == 32 + 4 + 1);
  const TreeFootprint major = mem.footprint(TreeKind::kMajor);
  CHECK(major.leaves == 32);
  CHECK(major.levels == 2);
  CHECK(major.interior_nodes == 4 + 1);
  CHECK(mem.counter_cache_capacity() == 16);
}

TEST_CASE("randomized write/read roundtrip against a plaintext shadow") {
  Store s;
  SeededRng rng(5);
  for (int op = 0; op < 10'000; ++op) {
    const std::uint64_t page = 2 + rng.below(2);
    // Writes stay on a few hot lines so minor counters overflow.
    const std::uint64_t line = rng.below(8);
    const std::uint64_t addr = page * kPageBytes + line * kLineSize;
    if (rng.below(2) == 0) {
      Line l;
      for (auto& b : l) b = static_cast<std::uint8_t>(rng.next());
      s.mem.mem_write(addr, l);
      std::copy(l.begin(), l.end(), s.plain[page].begin() + static_cast<std::ptrdiff_t>(line * kLineSize));
    } else {
      const std::uint64_t any = rng.below(kDataPages);
      const std::uint64_t a = any * kPageBytes + line * kLineSize;
      const LineRead r = s.mem.mem_read(a);
      CHECK(r.verified);
      CHECK(r.bytes == line_from(s.plain[any], line));
    }
    if (op % 997 == 0) s.mem.flush_counter_cache();
  }
  CHECK(s.mem.stats().violations == 0);
  CHECK(s.mem.stats().overflows > 0);
  CHECK(s.mem.audit() == Verdict::kOk);
}

TEST_CASE("stored bytes are ciphertext") {
  Store s;
  const SecureMemory::Snapshot snap = s.mem.snapshot(0, kDataPages, false);
  REQUIRE(snap.pages.size() == kDataPages);
  for (const auto& img : snap.pages) {
    std::uint64_t same = 0;
    for (std::uint64_t i = 0; i < kPageBytes; ++i) same += img.bytes[i] == s.plain[img.page][i];
    CHECK(same < kPageBytes / 64);  // about 1/256 by chance
  }
}

TEST_CASE("a minor counter overflow bumps the major once and re-encrypts the page") {
  Store s;
  const std::uint64_t page = 2 * kPageBytes;
  const std::uint64_t major_before = s.mem.split_counter(page).major;
  const std::uint64_t reenc_before = s.mem.stats().reencryptions;
  Line l{};
  for (int i = 0; i < 127; ++i) {
    l[0] = static_cast<std::uint8_t>(i);
    s.mem.mem_write(page, l);
  }
  CHECK(s.mem.split_counter(page).minors[0] == 127);
  CHECK(s.mem.split_counter(page).major == major_before);
  l[0] = 0xEE;
  s.mem.mem_write(page, l);
  const SplitCounterBlock after = s.mem.split_counter(page);
  CHECK(after.major == major_before + 1);
  for (std::uint8_t m : after.minors) CHECK(m == 0);
  CHECK(s.mem.stats().overflows == 1);
  CHECK(s.mem.stats().reencryptions - reenc_before == kLinesPerPage);
  std::copy(l.begin(), l.end(), s.plain[2].begin());
  CHECK(s.read_all());
}

TEST_CASE("counter fetch and write costs") {
  Store s;
  s.mem.flush_counter_cache();
  const LineRead miss = s.mem.mem_read(0);
  CHECK(miss.cost.verification_ps == 151'200);
  CHECK(miss.cost.encryption_ps == 50 * 1000);  // counter block fetch
  const LineRead hit = s.mem.mem_read(64);
  CHECK(hit.cost.total() == 0);
  Line l{};
  const OpCost w = s.mem.mem_write(2 * kPageBytes, l);
  CHECK(w.encryption_ps >= 102'600);
}

TEST_CASE("hybrid permission transitions move pages between trees and keep content") {
  Store s;
  const std::uint64_t ro = 0, rw = 2 * kPageBytes;
  CHECK(s.mem.permission(ro) == PagePermission::kReadOnly);
  CHECK(s.mem.tree_for(ro) == TreeKind::kMajor);
  CHECK(s.mem.tree_for(rw) == TreeKind::kSplit);
  Line l{};
  CHECK(code_of([&] { s.mem.mem_write(ro, l); }) == ErrorCode::kWriteToReadOnly);
  CHECK(code_of([&] { s.mem.change_permission(ro, PagePermission::kReadOnly); }) ==
        ErrorCode::kInvalidState);

  const std::uint64_t before = s.mem.stats().permission_changes;
  s.mem.change_permission(ro, PagePermission::kWritable);
  CHECK(s.mem.tree_for(ro) == TreeKind::kSplit);
  s.mem.mem_write(ro + 128, l);
  std::copy(l.begin(), l.end(), s.plain[0].begin() + 128);
  s.mem.change_permission(ro, PagePermission::kReadOnly);
  CHECK(s.mem.tree_for(ro) == TreeKind::kMajor);
  CHECK(s.mem.stats().permission_changes - before == 2);
  CHECK(s.read_all());
  CHECK(s.mem.audit() == Verdict::kOk);
}

TEST_CASE("split-only scheme keeps every page on the split tree") {
  Store s(CounterScheme::kSplitOnly);
  CHECK(s.mem.tree_for(0) == TreeKind::kSplit);
  s.exercise();
  CHECK(s.mem.audit() == Verdict::kOk);
}

TEST_CASE("unprotected scheme stores plaintext and charges nothing") {
  Store s(CounterScheme::kNone);
  s.exercise();
  CHECK(s.mem.stats().encryption_ps == 0);
  CHECK(s.mem.stats().verification_ps == 0);
  CHECK(s.mem.stats().traffic.mac_bytes == 0);
  const auto snap = s.mem.snapshot(0, 1, false);
  CHECK(std::equal(snap.pages[0].bytes.begin(), snap.pages[0].bytes.end(), s.plain[0].begin()));
}

TEST_CASE("tamper suite: every attack is detected, clean runs never are") {
  struct Attack {
    std::string name;
    std::function<void(Store&)> tamper;
  };
  const std::uint64_t rw = 2 * kPageBytes;
  const std::vector<Attack> attacks = {
      {"data bit", [](Store& s) { s.mem.flip_data_bit(5, 3); }},
      {"data bit on writable page", [&](Store& s) { s.mem.flip_data_bit(rw + 70, 0); }},
      {"mac bit", [](Store& s) { s.mem.flip_mac_bit(0, 7); }},
      {"split counter bit",
       [](Store& s) {
         s.mem.flush_counter_cache();
         s.mem.flip_counter_bit(TreeKind::kSplit, 2, 3);
       }},
      {"major counter bit",
       [](Store& s) {
         s.mem.flush_counter_cache();
         s.mem.flip_counter_bit(TreeKind::kMajor, 0, 3);
       }},
      {"split tree node bit",
       [](Store& s) {
         s.mem.flush_counter_cache();
         s.mem.flip_node_bit(TreeKind::kSplit, 1, 0, 0);
       }},
      {"major tree node bit",
       [](Store& s) {
         s.mem.flush_counter_cache();
         s.mem.flip_node_bit(TreeKind::kMajor, 1, 0, 9);
       }},
      {"counter block swap",
       [&](Store& s) {
         // Make the two blocks differ first; swapping equal blocks changes nothing.
         Line l{};
         s.mem.mem_write(rw, l);
         std::copy(l.begin(), l.end(), s.plain[2].begin());
         s.mem.flush_counter_cache();
         s.mem.swap_counter_blocks(TreeKind::kSplit, 2, 3);
       }},
      {"replay of data and counter",
       [&](Store& s) {
         const auto old = s.mem.snapshot(rw, 1, false);
         Line l{};
         l.fill(1);
         s.mem.mem_write(rw, l);
         std::copy(l.begin(), l.end(), s.plain[2].begin());
         s.mem.flush_counter_cache();
         s.mem.restore(old);
       }},
      {"replay including tree nodes",
       [&](Store& s) {
         s.mem.flush_counter_cache();
         const auto old = s.mem.snapshot(rw, 1, true);
         Line l{};
         l.fill(2);
         s.mem.mem_write(rw, l);
         std::copy(l.begin(), l.end(), s.plain[2].begin());
         s.mem.flush_counter_cache();
         s.mem.restore(old);
       }},
  };

  for (const Attack& a : attacks) {
    CAPTURE(a.name);
    Store s;
    a.tamper(s);
    bool detected = false;
    try {
      const bool same = s.read_all();
      CHECK(same);  // tampering must never yield wrong plaintext silently
      detected = s.mem.audit() == Verdict::kViolation;
    } catch (const SimError& e) {
      CHECK(e.code() == ErrorCode::kIntegrityViolation);
      detected = true;
    }
    CHECK(detected);
  }

  // The same sequences without tampering: zero false positives.
  for (int run = 0; run < 10; ++run) {
    Store s;
    s.exercise();
    s.mem.flush_counter_cache();
    const auto snap = s.mem.snapshot(rw, 1, true);
    s.mem.restore(snap);  // restoring the current image is not an attack
    CHECK(s.read_all());
    CHECK(s.mem.audit() == Verdict::kOk);
    CHECK(s.mem.stats().violations == 0);
  }
}

TEST_CASE("range and state errors") {
  SecureMemory mem(small_config());
  CHECK(code_of([&] { mem.mem_read(1ULL << 20); }) == ErrorCode::kOutOfBounds);
  CHECK(code_of([&] { mem.mem_read(0); }) == ErrorCode::kInvalidState);
  std::vector<std::uint8_t> shortpage(100);
  CHECK(code_of([&] { mem.ingest_page(0, shortpage); }) == ErrorCode::kBadLength);
  std::vector<std::uint8_t> page(kPageBytes);
  CHECK(code_of([&] { mem.ingest_page(7, page); }) == ErrorCode::kOutOfBounds);
  SecureMemoryConfig bad = small_config();
  bad.dram_bytes = 1000;
  CHECK(code_of([&] { SecureMemory m(bad); }) == ErrorCode::kConfigError);
}
