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

// Three-region DRAM protection (normal / protected / secure) on top of the
// two TrustZone worlds.
//
// Descriptor encoding (ARMv8-style stage-1 attributes plus the ES bit):
//
//   region      NS  AP[2:1]  ES   normal world   secure world
//   SECURE       0    00      0   none           read/write
//   PROTECTED    1    11      1   read-only      read/write
//   NORMAL       1    01      0   read/write     read/write
//
// Every other combination is rejected by decode_region().

#ifndef ISCTEE_MEM_PROTECT_HPP_
#define ISCTEE_MEM_PROTECT_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "isctee/sim_core.hpp"

namespace isctee {

enum class World : std::uint8_t { kNormal, kSecure };
enum class RegionKind : std::uint8_t { kNormal, kProtected, kSecure };
enum class AccessMode : std::uint8_t { kRead, kWrite };
enum class Decision : std::uint8_t { kAllow, kFault };

const char* to_string(World w);
const char* to_string(RegionKind r);

struct AddressRange {
  std::uint64_t base = 0;
  std::uint64_t size = 0;

  std::uint64_t end() const { return base + size; }
  bool contains(std::uint64_t addr) const { return addr >= base && addr < end(); }
  bool operator==(const AddressRange&) const = default;
};

struct DescriptorBits {
  std::uint8_t ns = 0;  // 1 bit
  std::uint8_t ap = 0;  // AP[2:1], 2 bits
  std::uint8_t es = 0;  // 1 bit
  bool operator==(const DescriptorBits&) const = default;
};

DescriptorBits encode_region(RegionKind kind);
std::optional<RegionKind> decode_region(DescriptorBits bits);

// The permission matrix, total over (world, region, mode).
Decision permission(World world, RegionKind region, AccessMode mode);

struct RegionLayout {
  std::uint64_t dram_bytes = 4ULL << 30;
  std::uint64_t secure_bytes = 64ULL << 20;
  std::uint64_t protected_bytes = 6ULL << 20;
};

struct FaultRecord {
  World world;
  std::uint64_t address;
  AccessMode mode;
  std::uint8_t tee;
};

class MemProtect {
 public:
  static constexpr Nanos kDefaultSwitchCost = 3'800;

  explicit MemProtect(RegionLayout layout, Nanos switch_cost = kDefaultSwitchCost);

  const RegionLayout& layout() const { return layout_; }
  AddressRange range(RegionKind kind) const;
  RegionKind region_of(std::uint64_t address) const;

  // Checks one access. A non-zero `tee` additionally confines normal-world
  // accesses to that TEE's assigned ranges in the NORMAL region. Faults are
  // logged, never silent.
  Decision access(World world, std::uint64_t address, AccessMode mode,
                  std::uint8_t tee = 0);

  void assign(std::uint8_t tee, AddressRange range);
  void release(std::uint8_t tee);
  std::vector<AddressRange> ranges_of(std::uint8_t tee) const;

  World current() const { return current_; }
  Nanos switch_cost() const { return switch_cost_; }
  // Throws InvalidState when target == current().
  Nanos switch_world(World target);

  std::uint64_t switches() const { return switches_; }
  const std::vector<FaultRecord>& faults() const { return faults_; }
  std::uint64_t fault_count() const { return faults_.size(); }

 private:
  RegionLayout layout_;
  Nanos switch_cost_;
  World current_ = World::kNormal;
  std::uint64_t switches_ = 0;
  std::multimap<std::uint8_t, AddressRange> owned_;
  std::vector<FaultRecord> faults_;
};

}  // namespace isctee

#endif  // ISCTEE_MEM_PROTECT_HPP_
