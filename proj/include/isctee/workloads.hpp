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

// Benchmark datasets and the in-storage programs that scan them.

#ifndef ISCTEE_WORKLOADS_HPP_
#define ISCTEE_WORKLOADS_HPP_

#include <cstdint>
#include <list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "isctee/secure_memory.hpp"

namespace isctee {

enum class WorkloadKind : std::uint8_t {
  kArithmetic,
  kAggregate,
  kFilter,
  kTpchQ1,
  kTpchQ3,
  kTpchQ12,
  kTpchQ14,
  kTpchQ19,
  kTpcB,
  kTpcC,
  kWordcount,
};

const char* to_string(WorkloadKind k);
std::optional<WorkloadKind> parse_workload(std::string_view name);
const std::vector<WorkloadKind>& all_workloads();
// Arithmetic, Aggregate, Filter, Q1, Q12, Q14.
const std::vector<WorkloadKind>& read_intensive_workloads();

inline constexpr std::uint32_t kRowBytes = 64;
inline constexpr std::uint32_t kWordVocabulary = 65536;

// One 64-byte row, little-endian:
//    0 key u64        8 quantity u32    12 discount u32 (percent)
//   16 price u64 (cents)                24 ship_date u32 (days)
//   28 commit_date u32                  32 receipt_date u32
//   36 return_flag u8  37 line_status u8  38 ship_mode u8  39 priority u8
//   40 cust_key u32   44 brand u16      46 container u16
//   48 tokens u32[4]
struct Row {
  std::uint64_t key = 0;
  std::uint32_t quantity = 0;
  std::uint32_t discount = 0;
  std::uint64_t price = 0;
  std::uint32_t ship_date = 0;
  std::uint32_t commit_date = 0;
  std::uint32_t receipt_date = 0;
  std::uint8_t return_flag = 0;
  std::uint8_t line_status = 0;
  std::uint8_t ship_mode = 0;
  std::uint8_t priority = 0;
  std::uint32_t cust_key = 0;
  std::uint16_t brand = 0;
  std::uint16_t container = 0;
  std::uint32_t tokens[4] = {};

  static Row decode(const std::uint8_t* p);
  void encode(std::uint8_t* p) const;
};

struct Dataset {
  std::vector<std::uint8_t> bytes;  // whole pages; rows fill every page

  std::uint64_t rows() const { return bytes.size() / kRowBytes; }
  std::uint64_t pages() const { return bytes.size() / kPageBytes; }
  Row row(std::uint64_t i) const { return Row::decode(bytes.data() + i * kRowBytes); }
  std::uint64_t checksum() const;  // FNV-1a 64
};

Dataset generate_dataset(std::uint64_t bytes, std::uint64_t seed);

// Flat file: "ISCTEEDS" magic, u32 version (1), u32 row width, u64 row
// count, then the rows. Integers little-endian.
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

// Line-granular memory as seen by a program.
class MemoryPort {
 public:
  virtual ~MemoryPort() = default;
  virtual Line read(std::uint64_t address) = 0;
  virtual void write(std::uint64_t address, const Line& line) = 0;
};

// Write-back LRU cache in front of another port (the core's L2). Misses and
// dirty evictions are forwarded.
class LineCache : public MemoryPort {
 public:
  struct Stats {
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t writebacks = 0;
  };

  LineCache(MemoryPort& backing, std::uint64_t capacity_lines);

  Line read(std::uint64_t address) override;
  void write(std::uint64_t address, const Line& line) override;
  void flush();

  const Stats& stats() const { return stats_; }

 private:
  struct Entry {
    Line data;
    bool dirty = false;
    std::list<std::uint64_t>::iterator lru;
  };
  Entry& fill(std::uint64_t line_addr, bool load);

  MemoryPort& backing_;
  std::uint64_t capacity_;
  std::list<std::uint64_t> lru_;
  std::unordered_map<std::uint64_t, Entry> lines_;
  Stats stats_;
};

struct WorkloadParams {
  // Arithmetic divides by (discount + divisor_bias); 0 lets rows with a zero
  // discount raise a program exception.
  std::uint32_t divisor_bias = 1;
};

// An offloaded program. Rows are streamed in by the runtime; state that does
// not fit in registers lives in scratch memory reached through the port.
class Program {
 public:
  virtual ~Program() = default;
  virtual WorkloadKind kind() const = 0;
  virtual void consume(const Row& row) = 0;
  virtual std::vector<std::uint8_t> finish() = 0;
};

// Scratch bytes the program needs, rounded up to whole pages.
std::uint64_t scratch_bytes(WorkloadKind kind);

std::unique_ptr<Program> make_program(WorkloadKind kind, MemoryPort& scratch,
                                      std::uint64_t scratch_base,
                                      const WorkloadParams& params = {});

}  // namespace isctee

#endif  // ISCTEE_WORKLOADS_HPP_
