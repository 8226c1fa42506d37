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

#include "isctee/secure_memory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "isctee/errors.hpp"

namespace isctee {
namespace {

constexpr std::uint64_t kDefaultIndex = ~std::uint64_t{0};

void put_le64(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_le64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void put_tag(std::uint8_t* p, TreeKind t, unsigned level, std::uint64_t index) {
  p[0] = static_cast<std::uint8_t>(t);
  p[1] = static_cast<std::uint8_t>(level);
  put_le64(p + 2, index);
  p[10] = 'B';
  p[11] = 'M';
  p[12] = 'T';
  p[13] = '1';
  p[14] = 0;
  p[15] = 0;
}

bool all_zero(const Line& l) {
  return std::all_of(l.begin(), l.end(), [](std::uint8_t b) { return b == 0; });
}

std::uint64_t counter_word(std::uint64_t major, std::uint8_t minor) {
  return (major << SplitCounterBlock::kMinorBits) | minor;
}

}  // namespace

const char* to_string(CounterScheme s) {
  switch (s) {
    case CounterScheme::kNone: return "NONE";
    case CounterScheme::kSplitOnly: return "SPLIT_ONLY";
    case CounterScheme::kHybrid: return "HYBRID";
  }
  return "?";
}

// Split block layout: bytes 0..7 major (LE), then 64 x 7-bit minors packed
// LSB-first into the remaining 56 bytes.
Line SplitCounterBlock::pack() const {
  Line out{};
  put_le64(out.data(), major);
  for (unsigned i = 0; i < kLinesPerPage; ++i) {
    unsigned bit = i * kMinorBits;
    for (unsigned b = 0; b < kMinorBits; ++b, ++bit)
      if ((minors[i] >> b) & 1u) out[8 + bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
  }
  return out;
}

SplitCounterBlock SplitCounterBlock::unpack(const Line& line) {
  SplitCounterBlock blk;
  blk.major = get_le64(line.data());
  for (unsigned i = 0; i < kLinesPerPage; ++i) {
    unsigned bit = i * kMinorBits;
    std::uint8_t m = 0;
    for (unsigned b = 0; b < kMinorBits; ++b, ++bit)
      m |= static_cast<std::uint8_t>(((line[8 + bit / 8] >> (bit % 8)) & 1u) << b);
    blk.minors[i] = m;
  }
  return blk;
}

Line MajorCounterBlock::pack() const {
  Line out{};
  for (unsigned i = 0; i < kPagesPerBlock; ++i) put_le64(out.data() + 8 * i, majors[i]);
  return out;
}

MajorCounterBlock MajorCounterBlock::unpack(const Line& line) {
  MajorCounterBlock blk;
  for (unsigned i = 0; i < kPagesPerBlock; ++i) blk.majors[i] = get_le64(line.data() + 8 * i);
  return blk;
}

SecureMemory::SecureMemory(SecureMemoryConfig config)
    : config_(config), cipher_(config.key) {
  if (config_.dram_bytes == 0 || config_.dram_bytes % kPageBytes != 0)
    throw SimError(ErrorCode::kConfigError, "secure memory size must be whole pages");
  if (config_.counter_cache_bytes < kLineSize)
    throw SimError(ErrorCode::kConfigError, "counter cache smaller than one block");
  if (config_.parallel_update_discount <= 0.0 || config_.parallel_update_discount > 1.0)
    throw SimError(ErrorCode::kConfigError, "parallel update discount must be in (0, 1]");
  pages_ = config_.dram_bytes / kPageBytes;
  cache_capacity_ = config_.counter_cache_bytes / kLineSize;

  for (TreeKind t : {TreeKind::kSplit, TreeKind::kMajor}) {
    Tree& tr = tree(t);
    tr.leaves = t == TreeKind::kSplit
                    ? pages_
                    : (pages_ + MajorCounterBlock::kPagesPerBlock - 1) /
                          MajorCounterBlock::kPagesPerBlock;
    tr.levels = 1;
    for (std::uint64_t span = 8; span < tr.leaves; span *= 8) ++tr.levels;
    tr.defaults.resize(tr.levels + 1);
    std::uint8_t buf[80] = {};
    put_tag(buf + 64, t, 0, kDefaultIndex);
    tr.defaults[0] = cipher_.cbc_mac64(buf);
    for (unsigned level = 1; level <= tr.levels; ++level) {
      for (int c = 0; c < 8; ++c) put_le64(buf + 8 * c, tr.defaults[level - 1]);
      put_tag(buf + 64, t, level, kDefaultIndex);
      tr.defaults[level] = cipher_.cbc_mac64(buf);
    }
    tr.root = tr.defaults[tr.levels];
  }
}

SecureMemory::~SecureMemory() = default;

std::uint64_t SecureMemory::leaf_of(TreeKind t, std::uint64_t page) const {
  return t == TreeKind::kSplit ? page : page / MajorCounterBlock::kPagesPerBlock;
}

std::uint64_t SecureMemory::leaf_hash(TreeKind t, std::uint64_t index,
                                      const Line& block) const {
  if (all_zero(block)) return tree(t).defaults[0];
  std::uint8_t buf[80];
  std::copy(block.begin(), block.end(), buf);
  put_tag(buf + 64, t, 0, index);
  return cipher_.cbc_mac64(buf);
}

std::uint64_t SecureMemory::node_hash(TreeKind t, unsigned level, std::uint64_t index,
                                      const Node& children) const {
  const Tree& tr = tree(t);
  if (std::all_of(children.begin(), children.end(),
                  [&](std::uint64_t h) { return h == tr.defaults[level - 1]; }))
    return tr.defaults[level];
  std::uint8_t buf[80];
  for (int c = 0; c < 8; ++c) put_le64(buf + 8 * c, children[c]);
  put_tag(buf + 64, t, level, index);
  return cipher_.cbc_mac64(buf);
}

SecureMemory::Node SecureMemory::load_node(TreeKind t, unsigned level,
                                           std::uint64_t index) const {
  const Tree& tr = tree(t);
  auto it = tr.nodes.find(node_key(level, index));
  if (it != tr.nodes.end()) return it->second;
  Node n;
  n.fill(tr.defaults[level - 1]);
  return n;
}

Line SecureMemory::dram_leaf(TreeKind t, std::uint64_t leaf) const {
  const Tree& tr = tree(t);
  auto it = tr.leaf_store.find(leaf);
  return it == tr.leaf_store.end() ? Line{} : it->second;
}

bool SecureMemory::path_valid(TreeKind t, std::uint64_t leaf, const Line& block) const {
  const Tree& tr = tree(t);
  std::uint64_t h = leaf_hash(t, leaf, block);
  std::uint64_t idx = leaf;
  for (unsigned level = 1; level <= tr.levels; ++level) {
    const std::uint64_t parent = idx / 8;
    const Node children = load_node(t, level, parent);
    if (children[idx % 8] != h) return false;
    h = node_hash(t, level, parent, children);
    idx = parent;
  }
  return h == tr.root;
}

void SecureMemory::update_path(TreeKind t, std::uint64_t leaf, const Line& block) {
  Tree& tr = tree(t);
  if (all_zero(block))
    tr.leaf_store.erase(leaf);
  else
    tr.leaf_store[leaf] = block;
  std::uint64_t h = leaf_hash(t, leaf, block);
  std::uint64_t idx = leaf;
  for (unsigned level = 1; level <= tr.levels; ++level) {
    const std::uint64_t parent = idx / 8;
    Node children = load_node(t, level, parent);
    children[idx % 8] = h;
    h = node_hash(t, level, parent, children);
    if (h == tr.defaults[level])
      tr.nodes.erase(node_key(level, parent));
    else
      tr.nodes[node_key(level, parent)] = children;
    idx = parent;
  }
  tr.root = h;
}

std::unordered_map<std::uint64_t, SecureMemory::Node> SecureMemory::rebuild(
    TreeKind t, std::uint64_t* root) const {
  const Tree& tr = tree(t);
  std::unordered_map<std::uint64_t, Node> out;
  std::unordered_map<std::uint64_t, std::uint64_t> hashes;
  for (const auto& [idx, block] : tr.leaf_store) {
    const std::uint64_t h = leaf_hash(t, idx, block);
    if (h != tr.defaults[0]) hashes[idx] = h;
  }
  for (unsigned level = 1; level <= tr.levels; ++level) {
    std::unordered_map<std::uint64_t, Node> parents;
    for (const auto& [idx, h] : hashes) {
      auto [it, fresh] = parents.try_emplace(idx / 8);
      if (fresh) it->second.fill(tr.defaults[level - 1]);
      it->second[idx % 8] = h;
    }
    hashes.clear();
    for (const auto& [idx, children] : parents) {
      const std::uint64_t h = node_hash(t, level, idx, children);
      if (h != tr.defaults[level]) {
        hashes[idx] = h;
        out[node_key(level, idx)] = children;
      }
    }
  }
  auto top = hashes.find(0);
  *root = top == hashes.end() ? tr.defaults[tr.levels] : top->second;
  return out;
}

void SecureMemory::violation(const std::string& what) {
  ++stats_.violations;
  throw SimError(ErrorCode::kIntegrityViolation, what);
}

SecureMemory::CacheEntry& SecureMemory::cache_fetch(TreeKind t, std::uint64_t leaf,
                                                    OpCost& cost) {
  const std::uint64_t key = cache_key(t, leaf);
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    ++stats_.counter_hits;
    lru_.splice(lru_.begin(), lru_, it->second.lru);
    return it->second;
  }
  ++stats_.counter_misses;
  if (cache_.size() >= cache_capacity_) {
    const std::uint64_t victim = lru_.back();
    auto vit = cache_.find(victim);
    if (vit->second.dirty) write_back(victim, vit->second, cost);
    lru_.pop_back();
    cache_.erase(vit);
  }
  const Line block = dram_leaf(t, leaf);
  const Tree& tr = tree(t);
  stats_.traffic.counter_bytes += kLineSize;
  stats_.traffic.tree_bytes += tr.levels * kLineSize;
  ++stats_.verify_ops;
  const Picos fetch_ps = config_.dram_access_ns * 1000;
  cost.encryption_ps += fetch_ps;
  cost.verification_ps += config_.verify_ps;
  stats_.encryption_ps += fetch_ps;
  stats_.verification_ps += config_.verify_ps;
  if (!path_valid(t, leaf, block))
    violation("counter block failed integrity-tree verification");
  lru_.push_front(key);
  CacheEntry& e = cache_[key];
  e.value = block;
  e.dirty = false;
  e.lru = lru_.begin();
  return e;
}

void SecureMemory::write_back(std::uint64_t key, CacheEntry& entry, OpCost& cost) {
  const TreeKind t = static_cast<TreeKind>(key >> 63);
  const std::uint64_t leaf = key & ~(std::uint64_t{1} << 63);
  // The path being replaced must still be authentic before it is rewritten.
  if (!path_valid(t, leaf, dram_leaf(t, leaf)))
    violation("integrity tree tampered before counter write-back");
  update_path(t, leaf, entry.value);
  entry.dirty = false;
  const Tree& tr = tree(t);
  ++stats_.writebacks;
  stats_.traffic.counter_bytes += kLineSize;
  stats_.traffic.tree_bytes += 2 * tr.levels * kLineSize;
  const Picos ps = static_cast<Picos>(
      std::llround(static_cast<double>(config_.verify_ps) * config_.parallel_update_discount));
  cost.verification_ps += ps;
  stats_.verification_ps += ps;
}

Line SecureMemory::load_counter(TreeKind t, std::uint64_t leaf, OpCost& cost) {
  return cache_fetch(t, leaf, cost).value;
}

void SecureMemory::store_counter(TreeKind t, std::uint64_t leaf, const Line& value,
                                 OpCost& cost) {
  CacheEntry& e = cache_fetch(t, leaf, cost);
  e.value = value;
  e.dirty = true;
}

void SecureMemory::flush_counter_cache() {
  OpCost cost;
  for (std::uint64_t key : lru_) {
    CacheEntry& e = cache_.at(key);
    if (e.dirty) write_back(key, e, cost);
  }
  lru_.clear();
  cache_.clear();
}

void SecureMemory::pad(std::uint64_t line_addr, std::uint64_t major,
                       std::uint8_t minor, Line& out) const {
  Line in;
  for (std::uint64_t i = 0; i < 4; ++i) {
    put_le64(in.data() + 16 * i, line_addr | i);
    put_le64(in.data() + 16 * i + 8, counter_word(major, minor));
  }
  cipher_.encrypt_blocks(in, out);
}

std::uint64_t SecureMemory::line_mac(std::uint64_t line_addr, const std::uint8_t* ct,
                                     std::uint64_t major, std::uint8_t minor) const {
  std::uint8_t buf[80];
  std::copy(ct, ct + kLineSize, buf);
  put_le64(buf + 64, line_addr);
  put_le64(buf + 72, counter_word(major, minor));
  return cipher_.cbc_mac64(buf);
}

SecureMemory::PageData& SecureMemory::page_data(std::uint64_t page) {
  auto it = data_.find(page);
  if (it == data_.end())
    throw SimError(ErrorCode::kInvalidState,
                   "secure memory page " + std::to_string(page) + " was never loaded");
  return *it->second;
}

Line SecureMemory::decrypt_line(const PageData& page, std::uint64_t line_addr,
                                std::uint64_t major, std::uint8_t minor) {
  const std::uint64_t off = line_addr % kPageBytes;
  const std::uint8_t* ct = page.bytes.data() + off;
  if (line_mac(line_addr, ct, major, minor) != page.macs[off / kLineSize])
    violation("MAC mismatch at line 0x" + [&] {
      char buf[24];
      std::snprintf(buf, sizeof buf, "%llx", static_cast<unsigned long long>(line_addr));
      return std::string(buf);
    }());
  Line p;
  pad(line_addr, major, minor, p);
  for (std::uint64_t i = 0; i < kLineSize; ++i) p[i] ^= ct[i];
  return p;
}

void SecureMemory::encrypt_line(PageData& page, std::uint64_t line_addr,
                                const Line& plain, std::uint64_t major,
                                std::uint8_t minor) {
  const std::uint64_t off = line_addr % kPageBytes;
  Line p;
  pad(line_addr, major, minor, p);
  std::uint8_t* ct = page.bytes.data() + off;
  for (std::uint64_t i = 0; i < kLineSize; ++i) ct[i] = plain[i] ^ p[i];
  page.macs[off / kLineSize] = line_mac(line_addr, ct, major, minor);
}

TreeKind SecureMemory::tree_for(std::uint64_t page_address) const {
  if (config_.scheme != CounterScheme::kHybrid) return TreeKind::kSplit;
  return permission(page_address) == PagePermission::kReadOnly ? TreeKind::kMajor
                                                               : TreeKind::kSplit;
}

PagePermission SecureMemory::permission(std::uint64_t page_address) const {
  auto it = perms_.find(page_address / kPageBytes);
  return it == perms_.end() ? PagePermission::kReadOnly : it->second;
}

bool SecureMemory::resident(std::uint64_t page_address) const {
  return data_.contains(page_address / kPageBytes);
}

void SecureMemory::release_page(std::uint64_t page_address) {
  const std::uint64_t page = page_address / kPageBytes;
  data_.erase(page);
  perms_.erase(page);
}

std::pair<std::uint64_t, std::uint8_t> SecureMemory::line_counter(std::uint64_t line_addr,
                                                                  OpCost& cost) {
  const std::uint64_t page = line_addr / kPageBytes;
  const TreeKind t = tree_for(line_addr);
  const Line block = load_counter(t, leaf_of(t, page), cost);
  if (t == TreeKind::kMajor)
    return {MajorCounterBlock::unpack(block).majors[page % MajorCounterBlock::kPagesPerBlock], 0};
  const SplitCounterBlock s = SplitCounterBlock::unpack(block);
  return {s.major, s.minors[(line_addr % kPageBytes) / kLineSize]};
}

LineRead SecureMemory::mem_read(std::uint64_t address) {
  if (address >= config_.dram_bytes)
    throw SimError(ErrorCode::kOutOfBounds, "secure memory read out of range");
  const std::uint64_t line_addr = address & ~(kLineSize - 1);
  PageData& page = page_data(line_addr / kPageBytes);
  LineRead r;
  ++stats_.reads;
  stats_.traffic.payload_bytes += kLineSize;
  if (config_.scheme == CounterScheme::kNone) {
    const std::uint8_t* src = page.bytes.data() + line_addr % kPageBytes;
    std::copy(src, src + kLineSize, r.bytes.begin());
    r.verified = true;
    return r;
  }
  stats_.traffic.mac_bytes += 8;
  const auto [major, minor] = line_counter(line_addr, r.cost);
  r.bytes = decrypt_line(page, line_addr, major, minor);
  r.verified = true;
  return r;
}

OpCost SecureMemory::mem_write(std::uint64_t address, const Line& plaintext) {
  if (address >= config_.dram_bytes)
    throw SimError(ErrorCode::kOutOfBounds, "secure memory write out of range");
  const std::uint64_t line_addr = address & ~(kLineSize - 1);
  const std::uint64_t page_no = line_addr / kPageBytes;
  if (permission(line_addr) != PagePermission::kWritable)
    throw SimError(ErrorCode::kWriteToReadOnly, "write to a read-only page");
  PageData& page = page_data(page_no);
  OpCost cost;
  ++stats_.writes;
  stats_.traffic.payload_bytes += kLineSize;
  if (config_.scheme == CounterScheme::kNone) {
    std::copy(plaintext.begin(), plaintext.end(),
              page.bytes.begin() + static_cast<std::ptrdiff_t>(line_addr % kPageBytes));
    return cost;
  }
  stats_.traffic.mac_bytes += 8;
  SplitCounterBlock blk =
      SplitCounterBlock::unpack(load_counter(TreeKind::kSplit, page_no, cost));
  const std::uint64_t slot = (line_addr % kPageBytes) / kLineSize;
  const std::uint64_t page_base = page_no * kPageBytes;
  if (blk.minors[slot] == SplitCounterBlock::kMinorMax) {
    // Minor overflow: bump the major counter and re-encrypt the whole page.
    std::array<Line, kLinesPerPage> plain;
    for (std::uint64_t i = 0; i < kLinesPerPage; ++i)
      plain[i] = i == slot ? plaintext
                           : decrypt_line(page, page_base + i * kLineSize, blk.major,
                                          blk.minors[i]);
    ++blk.major;
    blk.minors.fill(0);
    for (std::uint64_t i = 0; i < kLinesPerPage; ++i)
      encrypt_line(page, page_base + i * kLineSize, plain[i], blk.major, 0);
    ++stats_.overflows;
    stats_.reencryptions += kLinesPerPage;
    stats_.encrypt_ops += kLinesPerPage;
    stats_.traffic.reencryption_bytes += 2 * (kLinesPerPage - 1) * kLineSize;
    stats_.traffic.mac_bytes += 2 * (kLinesPerPage - 1) * 8;
    const Picos ps = config_.encrypt_ps * static_cast<Picos>(kLinesPerPage);
    cost.encryption_ps += ps;
    stats_.encryption_ps += ps;
  } else {
    ++blk.minors[slot];
    encrypt_line(page, line_addr, plaintext, blk.major, blk.minors[slot]);
    ++stats_.encrypt_ops;
    cost.encryption_ps += config_.encrypt_ps;
    stats_.encryption_ps += config_.encrypt_ps;
  }
  store_counter(TreeKind::kSplit, page_no, blk.pack(), cost);
  return cost;
}

OpCost SecureMemory::ingest_page(std::uint64_t page_address,
                                 std::span<const std::uint8_t> bytes) {
  if (page_address % kPageBytes != 0 || page_address >= config_.dram_bytes)
    throw SimError(ErrorCode::kOutOfBounds, "ingest address is not a page in range");
  if (bytes.size() != kPageBytes)
    throw SimError(ErrorCode::kBadLength, "ingest expects exactly one page");
  const std::uint64_t page_no = page_address / kPageBytes;
  auto& slot = data_[page_no];
  if (!slot) slot = std::make_unique<PageData>();
  PageData& page = *slot;
  OpCost cost;
  ++stats_.ingests;
  stats_.traffic.payload_bytes += kPageBytes;
  if (config_.scheme == CounterScheme::kNone) {
    std::copy(bytes.begin(), bytes.end(), page.bytes.begin());
    return cost;
  }
  stats_.traffic.mac_bytes += kLinesPerPage * 8;
  const TreeKind t = tree_for(page_address);
  std::uint64_t major = 0;
  if (t == TreeKind::kMajor) {
    MajorCounterBlock mb = MajorCounterBlock::unpack(load_counter(t, leaf_of(t, page_no), cost));
    major = ++mb.majors[page_no % MajorCounterBlock::kPagesPerBlock];
    store_counter(t, leaf_of(t, page_no), mb.pack(), cost);
  } else {
    SplitCounterBlock sb = SplitCounterBlock::unpack(load_counter(t, page_no, cost));
    major = ++sb.major;
    sb.minors.fill(0);
    store_counter(t, page_no, sb.pack(), cost);
  }
  for (std::uint64_t i = 0; i < kLinesPerPage; ++i) {
    Line l;
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(i * kLineSize), kLineSize, l.begin());
    encrypt_line(page, page_address + i * kLineSize, l, major, 0);
  }
  // The page-wide pad stream is generated in one pipelined pass.
  ++stats_.encrypt_ops;
  cost.encryption_ps += config_.encrypt_ps;
  stats_.encryption_ps += config_.encrypt_ps;
  return cost;
}

OpCost SecureMemory::change_permission(std::uint64_t page_address, PagePermission to) {
  if (page_address % kPageBytes != 0 || page_address >= config_.dram_bytes)
    throw SimError(ErrorCode::kOutOfBounds, "permission change on a non-page address");
  const PagePermission from = permission(page_address);
  if (from == to) throw SimError(ErrorCode::kInvalidState, "page already has that permission");
  const std::uint64_t page_no = page_address / kPageBytes;
  OpCost cost;
  ++stats_.permission_changes;
  if (config_.scheme != CounterScheme::kHybrid) {
    perms_[page_no] = to;
    return cost;
  }
  const std::uint64_t major_leaf = leaf_of(TreeKind::kMajor, page_no);
  const unsigned major_slot = page_no % MajorCounterBlock::kPagesPerBlock;
  MajorCounterBlock mb = MajorCounterBlock::unpack(load_counter(TreeKind::kMajor, major_leaf, cost));
  SplitCounterBlock sb = SplitCounterBlock::unpack(load_counter(TreeKind::kSplit, page_no, cost));

  std::array<Line, kLinesPerPage> plain;
  PageData* page = nullptr;
  if (auto it = data_.find(page_no); it != data_.end()) {
    page = it->second.get();
    for (std::uint64_t i = 0; i < kLinesPerPage; ++i) {
      const std::uint64_t a = page_address + i * kLineSize;
      plain[i] = from == PagePermission::kReadOnly
                     ? decrypt_line(*page, a, mb.majors[major_slot], 0)
                     : decrypt_line(*page, a, sb.major, sb.minors[i]);
    }
  }
  const std::uint64_t next =
      (from == PagePermission::kReadOnly ? mb.majors[major_slot] : sb.major) + 1;
  mb.majors[major_slot] = next;
  sb.major = next;
  sb.minors.fill(0);
  store_counter(TreeKind::kMajor, major_leaf, mb.pack(), cost);
  store_counter(TreeKind::kSplit, page_no, sb.pack(), cost);
  perms_[page_no] = to;
  if (page != nullptr) {
    for (std::uint64_t i = 0; i < kLinesPerPage; ++i)
      encrypt_line(*page, page_address + i * kLineSize, plain[i], next, 0);
    stats_.reencryptions += kLinesPerPage;
    stats_.encrypt_ops += kLinesPerPage;
    stats_.traffic.reencryption_bytes += 2 * kPageBytes;
    stats_.traffic.mac_bytes += 2 * kLinesPerPage * 8;
    const Picos ps = config_.encrypt_ps * static_cast<Picos>(kLinesPerPage);
    cost.encryption_ps += ps;
    stats_.encryption_ps += ps;
  }
  return cost;
}

Verdict SecureMemory::verify_root(TreeKind t) {
  OpCost ignored;
  for (std::uint64_t key : lru_) {
    if (static_cast<TreeKind>(key >> 63) != t) continue;
    CacheEntry& e = cache_.at(key);
    if (e.dirty) {
      const std::uint64_t leaf = key & ~(std::uint64_t{1} << 63);
      if (!path_valid(t, leaf, dram_leaf(t, leaf))) return Verdict::kViolation;
      write_back(key, e, ignored);
    }
  }
  std::uint64_t computed = 0;
  rebuild(t, &computed);
  return computed == tree(t).root ? Verdict::kOk : Verdict::kViolation;
}

Verdict SecureMemory::audit() {
  for (TreeKind t : {TreeKind::kSplit, TreeKind::kMajor}) {
    if (verify_root(t) != Verdict::kOk) return Verdict::kViolation;
    std::uint64_t computed = 0;
    const auto expected = rebuild(t, &computed);
    const Tree& tr = tree(t);
    if (expected.size() != tr.nodes.size()) return Verdict::kViolation;
    for (const auto& [key, node] : tr.nodes) {
      auto it = expected.find(key);
      if (it == expected.end() || it->second != node) return Verdict::kViolation;
    }
  }
  return Verdict::kOk;
}

SplitCounterBlock SecureMemory::split_counter(std::uint64_t page_address) const {
  const std::uint64_t page = page_address / kPageBytes;
  auto it = cache_.find(cache_key(TreeKind::kSplit, page));
  return SplitCounterBlock::unpack(it != cache_.end() ? it->second.value
                                                      : dram_leaf(TreeKind::kSplit, page));
}

std::uint64_t SecureMemory::major_counter(std::uint64_t page_address) const {
  const std::uint64_t page = page_address / kPageBytes;
  const std::uint64_t leaf = leaf_of(TreeKind::kMajor, page);
  auto it = cache_.find(cache_key(TreeKind::kMajor, leaf));
  const Line block = it != cache_.end() ? it->second.value : dram_leaf(TreeKind::kMajor, leaf);
  return MajorCounterBlock::unpack(block).majors[page % MajorCounterBlock::kPagesPerBlock];
}

std::uint64_t SecureMemory::root(TreeKind t) const { return tree(t).root; }

TreeFootprint SecureMemory::footprint(TreeKind t) const {
  const Tree& tr = tree(t);
  TreeFootprint f;
  f.leaves = tr.leaves;
  f.levels = tr.levels;
  std::uint64_t width = tr.leaves;
  for (unsigned level = 1; level <= tr.levels; ++level) {
    width = (width + 7) / 8;
    f.interior_nodes += width;
  }
  f.counter_bytes = f.leaves * kLineSize;
  f.node_bytes = f.interior_nodes * kLineSize;
  return f;
}

void SecureMemory::flip_data_bit(std::uint64_t address, unsigned bit) {
  PageData& page = page_data(address / kPageBytes);
  page.bytes[address % kPageBytes] ^= static_cast<std::uint8_t>(1u << (bit % 8));
}

void SecureMemory::flip_mac_bit(std::uint64_t address, unsigned bit) {
  PageData& page = page_data(address / kPageBytes);
  page.macs[(address % kPageBytes) / kLineSize] ^= std::uint64_t{1} << (bit % 64);
}

void SecureMemory::flip_counter_bit(TreeKind t, std::uint64_t leaf, unsigned bit) {
  Line block = dram_leaf(t, leaf);
  block[(bit / 8) % kLineSize] ^= static_cast<std::uint8_t>(1u << (bit % 8));
  tree(t).leaf_store[leaf] = block;
}

void SecureMemory::flip_node_bit(TreeKind t, unsigned level, std::uint64_t index,
                                 unsigned bit) {
  Tree& tr = tree(t);
  if (level == 0 || level > tr.levels)
    throw SimError(ErrorCode::kOutOfBounds, "no such tree level");
  Node n = load_node(t, level, index);
  n[(bit / 64) % 8] ^= std::uint64_t{1} << (bit % 64);
  tr.nodes[node_key(level, index)] = n;
}

void SecureMemory::swap_counter_blocks(TreeKind t, std::uint64_t a, std::uint64_t b) {
  Tree& tr = tree(t);
  const Line la = dram_leaf(t, a);
  const Line lb = dram_leaf(t, b);
  tr.leaf_store[a] = lb;
  tr.leaf_store[b] = la;
}

SecureMemory::Snapshot SecureMemory::snapshot(std::uint64_t page_address,
                                              std::uint64_t pages,
                                              bool include_tree) const {
  Snapshot s;
  const std::uint64_t first = page_address / kPageBytes;
  for (std::uint64_t p = first; p < first + pages; ++p) {
    if (auto it = data_.find(p); it != data_.end())
      s.pages.push_back({p, {it->second->bytes.begin(), it->second->bytes.end()},
                         it->second->macs});
    for (TreeKind t : {TreeKind::kSplit, TreeKind::kMajor}) {
      const std::uint64_t leaf = leaf_of(t, p);
      const auto& store = tree(t).leaf_store;
      auto lit = store.find(leaf);
      s.leaves.push_back({t, leaf,
                          lit == store.end() ? std::nullopt : std::optional<Line>(lit->second)});
    }
  }
  if (include_tree) s.nodes = {{trees_[0].nodes, trees_[1].nodes}};
  return s;
}

void SecureMemory::restore(const Snapshot& snap) {
  for (const auto& img : snap.pages) {
    auto& slot = data_[img.page];
    if (!slot) slot = std::make_unique<PageData>();
    std::copy(img.bytes.begin(), img.bytes.end(), slot->bytes.begin());
    slot->macs = img.macs;
  }
  for (const auto& leaf : snap.leaves) {
    auto& store = tree(leaf.tree).leaf_store;
    if (leaf.value)
      store[leaf.leaf] = *leaf.value;
    else
      store.erase(leaf.leaf);
  }
  if (snap.nodes) {
    trees_[0].nodes = (*snap.nodes)[0];
    trees_[1].nodes = (*snap.nodes)[1];
  }
}

std::vector<std::pair<unsigned, std::uint64_t>> SecureMemory::stored_nodes(TreeKind t) const {
  std::vector<std::pair<unsigned, std::uint64_t>> out;
  for (const auto& [key, node] : tree(t).nodes)
    out.emplace_back(static_cast<unsigned>(key >> 56), key & ((std::uint64_t{1} << 56) - 1));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace isctee
