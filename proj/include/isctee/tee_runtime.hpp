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

// In-storage TEE lifecycle: creation, ID assignment, aborts, termination and
// result return.

#ifndef ISCTEE_TEE_RUNTIME_HPP_
#define ISCTEE_TEE_RUNTIME_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isctee/ftl.hpp"
#include "isctee/mem_protect.hpp"
#include "isctee/secure_memory.hpp"

namespace isctee {

enum class TeeState : std::uint8_t { kCreating, kRunning, kAborted, kTerminated };
enum class AbortReason : std::uint8_t {
  kAccessViolation,
  kMemoryCorruption,
  kProgramException,
};

const char* to_string(TeeState s);
const char* to_string(AbortReason r);

struct AbortRecord {
  std::uint8_t eid = 0;
  AbortReason reason = AbortReason::kProgramException;
  std::string message;
};

// The CreateTEE configuration argument.
struct TeeConfig {
  std::uint32_t program = 0;
  std::vector<std::uint32_t> grants;
  std::uint64_t quota = 16ULL << 20;
  std::uint64_t code_size = 64 * 1024;
};

struct OffloadRequest {
  std::uint32_t program = 0;
  std::vector<std::uint32_t> lpas;
  std::vector<std::uint8_t> args;
  std::uint32_t tid = 0;
  std::uint64_t code_size = 64 * 1024;
};

struct TeeDescriptor {
  std::uint8_t eid = 0;
  TeeState state = TeeState::kCreating;
  std::uint32_t program = 0;
  std::uint32_t tid = 0;
  std::uint64_t code_size = 0;
  std::vector<std::uint32_t> lpa_grant;
  AddressRange memory_region;
  AddressRange metadata_slot;
  std::vector<std::uint8_t> result;
  bool finished = false;
  std::optional<AbortRecord> abort;
};

struct RuntimeConfig {
  Nanos create_ns = 95'000;
  Nanos destroy_ns = 58'000;
  std::uint64_t default_quota = 16ULL << 20;
  std::uint64_t metadata_slot_bytes = 64 * 1024;
  double external_bw = 3.2e9;  // bytes/s, for GetResult
};

struct RuntimeStats {
  std::uint64_t created = 0;
  std::uint64_t terminated = 0;
  std::uint64_t aborted = 0;
  Nanos management_ns = 0;
};

class TeeRuntime {
 public:
  static constexpr std::uint8_t kMaxTees = 15;

  // `smem` may be null when no memory encryption is modeled.
  TeeRuntime(Ftl& ftl, MemProtect& mem, SecureMemory* smem, RuntimeConfig config = {});

  const RuntimeConfig& config() const { return config_; }

  // Queues the request and creates its TEE. Returns the tid.
  std::uint32_t offload_code(const OffloadRequest& request);
  std::uint8_t create_tee(const TeeConfig& config);
  std::uint64_t terminate_tee(std::uint8_t eid);
  const AbortRecord& throw_out_tee(std::uint8_t eid, AbortReason reason,
                                   const std::string& message);
  // Aborts the TEE with ACCESS_VIOLATION before rethrowing PermissionDenied.
  TranslateResult read_mapping_entry(std::uint8_t eid, std::uint32_t lpa, Nanos now);

  // Program completion: the result is copied into the metadata slot.
  void complete(std::uint8_t eid, std::vector<std::uint8_t> result);
  std::vector<std::uint8_t> get_result(std::uint32_t tid, Nanos* transfer_ns = nullptr) const;

  // TEE memory accesses from the normal world. Faults abort with
  // ACCESS_VIOLATION, integrity failures with MEMORY_CORRUPTION; both rethrow.
  LineRead tee_read(std::uint8_t eid, std::uint64_t address);
  OpCost tee_write(std::uint8_t eid, std::uint64_t address, const Line& line);

  const TeeDescriptor& descriptor(std::uint8_t eid) const;
  std::optional<std::uint8_t> eid_of(std::uint32_t tid) const;
  bool live(std::uint8_t eid) const;
  std::size_t live_count() const;
  const std::vector<AbortRecord>& aborts() const { return aborts_; }
  const RuntimeStats& stats() const { return stats_; }

 private:
  TeeDescriptor& slot(std::uint8_t eid);
  std::optional<AddressRange> allocate(std::uint64_t bytes);
  void release(AddressRange range);

  Ftl& ftl_;
  MemProtect& mem_;
  SecureMemory* smem_;
  RuntimeConfig config_;
  std::array<std::optional<TeeDescriptor>, kMaxTees + 1> tees_;
  std::map<std::uint32_t, TeeDescriptor> finished_;  // by tid, after termination
  std::map<std::uint64_t, std::uint64_t> free_;      // base -> size
  std::vector<AbortRecord> aborts_;
  RuntimeStats stats_;
};

}  // namespace isctee

#endif  // ISCTEE_TEE_RUNTIME_HPP_
