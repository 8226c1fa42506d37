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

#include "isctee/mem_protect.hpp"

#include <string>

#include "isctee/errors.hpp"

namespace isctee {

const char* to_string(World w) {
  return w == World::kSecure ? "SECURE" : "NORMAL";
}

const char* to_string(RegionKind r) {
  switch (r) {
    case RegionKind::kNormal: return "NORMAL";
    case RegionKind::kProtected: return "PROTECTED";
    case RegionKind::kSecure: return "SECURE";
  }
  return "?";
}

DescriptorBits encode_region(RegionKind kind) {
  switch (kind) {
    case RegionKind::kSecure: return {0, 0b00, 0};
    case RegionKind::kProtected: return {1, 0b11, 1};
    case RegionKind::kNormal: return {1, 0b01, 0};
  }
  return {};
}

std::optional<RegionKind> decode_region(DescriptorBits bits) {
  for (RegionKind k :
       {RegionKind::kSecure, RegionKind::kProtected, RegionKind::kNormal})
    if (encode_region(k) == bits) return k;
  return std::nullopt;
}

Decision permission(World world, RegionKind region, AccessMode mode) {
  if (world == World::kSecure) return Decision::kAllow;
  switch (region) {
    case RegionKind::kNormal: return Decision::kAllow;
    case RegionKind::kProtected:
      return mode == AccessMode::kRead ? Decision::kAllow : Decision::kFault;
    case RegionKind::kSecure: return Decision::kFault;
  }
  return Decision::kFault;
}

MemProtect::MemProtect(RegionLayout layout, Nanos switch_cost)
    : layout_(layout), switch_cost_(switch_cost) {
  if (switch_cost_ <= 0)
    throw SimError(ErrorCode::kConfigError, "world switch cost must be > 0");
  if (layout_.secure_bytes + layout_.protected_bytes >= layout_.dram_bytes)
    throw SimError(ErrorCode::kConfigError,
                   "secure + protected regions leave no normal memory");
}

// Layout: [secure][protected][normal ... end of DRAM].
AddressRange MemProtect::range(RegionKind kind) const {
  switch (kind) {
    case RegionKind::kSecure: return {0, layout_.secure_bytes};
    case RegionKind::kProtected:
      return {layout_.secure_bytes, layout_.protected_bytes};
    case RegionKind::kNormal: {
      const std::uint64_t base = layout_.secure_bytes + layout_.protected_bytes;
      return {base, layout_.dram_bytes - base};
    }
  }
  return {};
}

RegionKind MemProtect::region_of(std::uint64_t address) const {
  if (address >= layout_.dram_bytes)
    throw SimError(ErrorCode::kOutOfBounds,
                   "address " + std::to_string(address) + " outside DRAM");
  if (address < layout_.secure_bytes) return RegionKind::kSecure;
  if (address < layout_.secure_bytes + layout_.protected_bytes)
    return RegionKind::kProtected;
  return RegionKind::kNormal;
}

Decision MemProtect::access(World world, std::uint64_t address,
                            AccessMode mode, std::uint8_t tee) {
  const RegionKind region = region_of(address);
  Decision d = permission(world, region, mode);
  if (d == Decision::kAllow && world == World::kNormal && tee != 0 &&
      region == RegionKind::kNormal) {
    bool inside = false;
    auto [lo, hi] = owned_.equal_range(tee);
    for (auto it = lo; it != hi && !inside; ++it)
      inside = it->second.contains(address);
    if (!inside) d = Decision::kFault;
  }
  if (d == Decision::kFault) faults_.push_back({world, address, mode, tee});
  return d;
}

void MemProtect::assign(std::uint8_t tee, AddressRange r) {
  owned_.emplace(tee, r);
}

void MemProtect::release(std::uint8_t tee) { owned_.erase(tee); }

std::vector<AddressRange> MemProtect::ranges_of(std::uint8_t tee) const {
  std::vector<AddressRange> out;
  auto [lo, hi] = owned_.equal_range(tee);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

Nanos MemProtect::switch_world(World target) {
  if (target == current_)
    throw SimError(ErrorCode::kInvalidState,
                   std::string("already in ") + to_string(target) + " world");
  current_ = target;
  ++switches_;
  return switch_cost_;
}

}  // namespace isctee
