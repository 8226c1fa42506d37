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

// Counter-mode memory encryption with Bonsai Merkle trees over the counter
// blocks.
//
// Read-only pages keep a single 64-bit major counter, eight per 64-byte
// block. Writable pages use split blocks: a 64-bit major counter followed by
// 64 seven-bit minor counters, one per cache line. Each layout has its own
// integrity tree (arity 8) whose root lives in an on-chip register.
//
// Pinned primitives (AES-128 = E_k):
//   pad(addr, major, minor)  = E_k(w0_i || w1) for i in 0..3, where
//                              w0_i = addr | i and w1 = major << 7 | minor,
//                              both 64-bit little-endian
//   line MAC                 = CBC-MAC64(ciphertext || addr || major<<7|minor)
//   leaf hash                = CBC-MAC64(block || tag(tree, 0, index))
//   node hash                = CBC-MAC64(8 child hashes || tag(tree, level, index))
//   tag(tree, level, index)  = 16 bytes: tree, level, index (8 bytes LE),
//                              "BMT1\0\0"
// A block or node whose content equals the all-default value hashes to a
// per-level constant, so untouched memory needs no storage.

#ifndef ISCTEE_SECURE_MEMORY_HPP_
#define ISCTEE_SECURE_MEMORY_HPP_

#include <array>
#include <cstdint>
#include <list>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "isctee/block_cipher.hpp"
#include "isctee/sim_core.hpp"

namespace isctee {

using Picos = std::int64_t;
using Line = std::array<std::uint8_t, 64>;

inline constexpr std::uint64_t kLineSize = 64;
inline constexpr std::uint64_t kPageBytes = 4096;
inline constexpr std::uint64_t kLinesPerPage = kPageBytes / kLineSize;

enum class CounterScheme : std::uint8_t { kNone, kSplitOnly, kHybrid };
enum class PagePermission : std::uint8_t { kReadOnly, kWritable };
enum class TreeKind : std::uint8_t { kSplit = 0, kMajor = 1 };
enum class Verdict : std::uint8_t { kOk, kViolation };

const char* to_string(CounterScheme s);

struct SplitCounterBlock {
  static constexpr unsigned kMinorBits = 7;
  static constexpr std::uint8_t kMinorMax = (1u << kMinorBits) - 1;

  std::uint64_t major = 0;
  std::array<std::uint8_t, kLinesPerPage> minors{};

  Line pack() const;
  static SplitCounterBlock unpack(const Line& line);
  bool operator==(const SplitCounterBlock&) const = default;
};

struct MajorCounterBlock {
  static constexpr unsigned kPagesPerBlock = 8;
  std::array<std::uint64_t, kPagesPerBlock> majors{};

  Line pack() const;
  static MajorCounterBlock unpack(const Line& line);
};

struct SecureMemoryConfig {
  CounterScheme scheme = CounterScheme::kHybrid;
  std::uint64_t dram_bytes = 4ULL << 30;
  std::uint64_t counter_cache_bytes = 128 * 1024;
  Picos block_cipher_ps = 60'000;
  Picos encrypt_ps = 102'600;
  Picos verify_ps = 151'200;
  Nanos dram_access_ns = 50;
  double parallel_update_discount = 1.0;
  Key128 key = {0x2b, 0x7e, 0x15, 0x16, 0x28, 0xae, 0xd2, 0xa6,
                0xab, 0xf7, 0x15, 0x88, 0x09, 0xcf, 0x4f, 0x3c};
};

struct OpCost {
  Picos encryption_ps = 0;
  Picos verification_ps = 0;

  Picos total() const { return encryption_ps + verification_ps; }
  OpCost& operator+=(const OpCost& o) {
    encryption_ps += o.encryption_ps;
    verification_ps += o.verification_ps;
    return *this;
  }
};

struct LineRead {
  Line bytes{};
  OpCost cost;
  bool verified = false;
};

// Byte counters. "Extra" traffic is everything beyond the 64-byte payloads.
struct MemTraffic {
  std::uint64_t payload_bytes = 0;
  std::uint64_t counter_bytes = 0;
  std::uint64_t reencryption_bytes = 0;
  std::uint64_t mac_bytes = 0;
  std::uint64_t tree_bytes = 0;

  std::uint64_t encryption_extra() const { return counter_bytes + reencryption_bytes; }
  std::uint64_t verification_extra() const { return mac_bytes + tree_bytes; }
};

struct SecureMemoryStats {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t ingests = 0;
  std::uint64_t encrypt_ops = 0;
  std::uint64_t verify_ops = 0;
  std::uint64_t reencryptions = 0;
  std::uint64_t overflows = 0;
  std::uint64_t counter_hits = 0;
  std::uint64_t counter_misses = 0;
  std::uint64_t writebacks = 0;
  std::uint64_t permission_changes = 0;
  std::uint64_t violations = 0;
  MemTraffic traffic;
  Picos encryption_ps = 0;
  Picos verification_ps = 0;
};

struct TreeFootprint {
  std::uint64_t leaves = 0;
  std::uint64_t levels = 0;
  std::uint64_t interior_nodes = 0;
  std::uint64_t counter_bytes = 0;
  std::uint64_t node_bytes = 0;
};

class SecureMemory {
 public:
  // DRAM image captured by the adversary for replay.
  struct Snapshot {
    struct PageImage {
      std::uint64_t page;
      std::vector<std::uint8_t> bytes;
      std::array<std::uint64_t, kLinesPerPage> macs;
    };
    struct LeafImage {
      TreeKind tree;
      std::uint64_t leaf;
      std::optional<Line> value;
    };
    std::vector<PageImage> pages;
    std::vector<LeafImage> leaves;
    // Full copy of stored tree nodes, when captured.
    std::optional<std::array<std::unordered_map<std::uint64_t, std::array<std::uint64_t, 8>>, 2>> nodes;
  };

  explicit SecureMemory(SecureMemoryConfig config);
  ~SecureMemory();
  SecureMemory(const SecureMemory&) = delete;
  SecureMemory& operator=(const SecureMemory&) = delete;

  const SecureMemoryConfig& config() const { return config_; }
  CounterScheme scheme() const { return config_.scheme; }

  LineRead mem_read(std::uint64_t address);
  OpCost mem_write(std::uint64_t address, const Line& plaintext);
  // Controller-side load of a whole page (DMA from the cipher engine): the
  // page is re-keyed with a fresh counter and every line re-encrypted.
  OpCost ingest_page(std::uint64_t page_address,
                     std::span<const std::uint8_t> bytes);
  OpCost change_permission(std::uint64_t page_address, PagePermission to);
  PagePermission permission(std::uint64_t page_address) const;
  bool resident(std::uint64_t page_address) const;
  void release_page(std::uint64_t page_address);

  Verdict verify_root(TreeKind tree);
  // verify_root for both trees plus a node-by-node comparison of every stored
  // interior node against a rebuild from the counter blocks.
  Verdict audit();
  void flush_counter_cache();

  TreeKind tree_for(std::uint64_t page_address) const;
  SplitCounterBlock split_counter(std::uint64_t page_address) const;
  std::uint64_t major_counter(std::uint64_t page_address) const;
  std::uint64_t root(TreeKind tree) const;
  TreeFootprint footprint(TreeKind tree) const;
  std::uint64_t counter_cache_capacity() const { return cache_capacity_; }

  // Adversarial store hooks. Roots and key are out of reach.
  void flip_data_bit(std::uint64_t address, unsigned bit);
  void flip_mac_bit(std::uint64_t address, unsigned bit);
  void flip_counter_bit(TreeKind tree, std::uint64_t leaf, unsigned bit);
  void flip_node_bit(TreeKind tree, unsigned level, std::uint64_t index,
                     unsigned bit);
  void swap_counter_blocks(TreeKind tree, std::uint64_t a, std::uint64_t b);
  Snapshot snapshot(std::uint64_t page_address, std::uint64_t pages,
                    bool include_tree) const;
  void restore(const Snapshot& snap);
  // (level, index) of every interior node currently stored in DRAM.
  std::vector<std::pair<unsigned, std::uint64_t>> stored_nodes(TreeKind tree) const;

  const SecureMemoryStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

 private:
  struct PageData {
    std::array<std::uint8_t, kPageBytes> bytes{};
    std::array<std::uint64_t, kLinesPerPage> macs{};
  };
  using Node = std::array<std::uint64_t, 8>;
  struct Tree {
    unsigned levels = 1;
    std::uint64_t leaves = 0;
    std::unordered_map<std::uint64_t, Line> leaf_store;
    std::unordered_map<std::uint64_t, Node> nodes;  // key: level << 56 | index
    std::vector<std::uint64_t> defaults;            // per level
    std::uint64_t root = 0;
  };
  struct CacheEntry {
    Line value;
    bool dirty = false;
    std::list<std::uint64_t>::iterator lru;
  };

  static std::uint64_t node_key(unsigned level, std::uint64_t index) {
    return (std::uint64_t{level} << 56) | index;
  }
  static std::uint64_t cache_key(TreeKind t, std::uint64_t leaf) {
    return (std::uint64_t{static_cast<std::uint8_t>(t)} << 63) | leaf;
  }

  Tree& tree(TreeKind t) { return trees_[static_cast<int>(t)]; }
  const Tree& tree(TreeKind t) const { return trees_[static_cast<int>(t)]; }
  std::uint64_t leaf_of(TreeKind t, std::uint64_t page) const;

  std::uint64_t leaf_hash(TreeKind t, std::uint64_t index, const Line& block) const;
  std::uint64_t node_hash(TreeKind t, unsigned level, std::uint64_t index,
                          const Node& children) const;
  Node load_node(TreeKind t, unsigned level, std::uint64_t index) const;
  Line dram_leaf(TreeKind t, std::uint64_t leaf) const;
  bool path_valid(TreeKind t, std::uint64_t leaf, const Line& block) const;
  void update_path(TreeKind t, std::uint64_t leaf, const Line& block);
  // Rebuilds every non-default node from the counter blocks in DRAM.
  std::unordered_map<std::uint64_t, Node> rebuild(TreeKind t, std::uint64_t* root) const;

  Line load_counter(TreeKind t, std::uint64_t leaf, OpCost& cost);
  void store_counter(TreeKind t, std::uint64_t leaf, const Line& value, OpCost& cost);
  CacheEntry& cache_fetch(TreeKind t, std::uint64_t leaf, OpCost& cost);
  void write_back(std::uint64_t key, CacheEntry& entry, OpCost& cost);

  void pad(std::uint64_t line_addr, std::uint64_t major, std::uint8_t minor,
           Line& out) const;
  std::uint64_t line_mac(std::uint64_t line_addr, const std::uint8_t* ct,
                         std::uint64_t major, std::uint8_t minor) const;
  // Counter (major, minor) currently protecting one line.
  std::pair<std::uint64_t, std::uint8_t> line_counter(std::uint64_t line_addr,
                                                      OpCost& cost);
  Line decrypt_line(const PageData& page, std::uint64_t line_addr,
                    std::uint64_t major, std::uint8_t minor);
  void encrypt_line(PageData& page, std::uint64_t line_addr, const Line& plain,
                    std::uint64_t major, std::uint8_t minor);
  PageData& page_data(std::uint64_t page);
  [[noreturn]] void violation(const std::string& what);

  SecureMemoryConfig config_;
  BlockCipher cipher_;
  std::uint64_t pages_ = 0;
  std::array<Tree, 2> trees_;
  std::unordered_map<std::uint64_t, std::unique_ptr<PageData>> data_;
  std::unordered_map<std::uint64_t, PagePermission> perms_;
  std::uint64_t cache_capacity_ = 0;
  std::list<std::uint64_t> lru_;
  std::unordered_map<std::uint64_t, CacheEntry> cache_;
  SecureMemoryStats stats_;
};

}  // namespace isctee

#endif  // ISCTEE_SECURE_MEMORY_HPP_
