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

#include "isctee/tee_runtime.hpp"

#include <iterator>

#include "isctee/errors.hpp"

namespace isctee {

const char* to_string(TeeState s) {
  switch (s) {
    case TeeState::kCreating: return "CREATING";
    case TeeState::kRunning: return "RUNNING";
    case TeeState::kAborted: return "ABORTED";
    case TeeState::kTerminated: return "TERMINATED";
  }
  return "?";
}

const char* to_string(AbortReason r) {
  switch (r) {
    case AbortReason::kAccessViolation: return "ACCESS_VIOLATION";
    case AbortReason::kMemoryCorruption: return "MEMORY_CORRUPTION";
    case AbortReason::kProgramException: return "PROGRAM_EXCEPTION";
  }
  return "?";
}

TeeRuntime::TeeRuntime(Ftl& ftl, MemProtect& mem, SecureMemory* smem, RuntimeConfig config)
    : ftl_(ftl), mem_(mem), smem_(smem), config_(config) {
  const AddressRange secure = mem_.range(RegionKind::kSecure);
  if (config_.metadata_slot_bytes * kMaxTees > secure.size)
    throw SimError(ErrorCode::kConfigError, "secure region too small for TEE metadata");
  const AddressRange normal = mem_.range(RegionKind::kNormal);
  free_[normal.base] = normal.size;
}

TeeDescriptor& TeeRuntime::slot(std::uint8_t eid) {
  if (eid == 0 || eid > kMaxTees || !tees_[eid])
    throw SimError(ErrorCode::kUnknownTee, "no live TEE with id " + std::to_string(eid));
  return *tees_[eid];
}

const TeeDescriptor& TeeRuntime::descriptor(std::uint8_t eid) const {
  if (eid == 0 || eid > kMaxTees || !tees_[eid])
    throw SimError(ErrorCode::kUnknownTee, "no live TEE with id " + std::to_string(eid));
  return *tees_[eid];
}

bool TeeRuntime::live(std::uint8_t eid) const {
  return eid != 0 && eid <= kMaxTees && tees_[eid].has_value();
}

std::size_t TeeRuntime::live_count() const {
  std::size_t n = 0;
  for (const auto& t : tees_) n += t.has_value();
  return n;
}

std::optional<std::uint8_t> TeeRuntime::eid_of(std::uint32_t tid) const {
  for (std::uint8_t e = 1; e <= kMaxTees; ++e)
    if (tees_[e] && tees_[e]->tid == tid) return e;
  return std::nullopt;
}

// First fit over the NORMAL region.
std::optional<AddressRange> TeeRuntime::allocate(std::uint64_t bytes) {
  for (auto it = free_.begin(); it != free_.end(); ++it) {
    if (it->second < bytes) continue;
    const AddressRange r{it->first, bytes};
    const std::uint64_t rest = it->second - bytes;
    free_.erase(it);
    if (rest > 0) free_[r.end()] = rest;
    return r;
  }
  return std::nullopt;
}

void TeeRuntime::release(AddressRange range) {
  auto [it, inserted] = free_.emplace(range.base, range.size);
  (void)inserted;
  auto next = std::next(it);
  if (next != free_.end() && it->first + it->second == next->first) {
    it->second += next->second;
    free_.erase(next);
  }
  if (it != free_.begin()) {
    auto prev = std::prev(it);
    if (prev->first + prev->second == it->first) {
      prev->second += it->second;
      free_.erase(it);
    }
  }
}

std::uint8_t TeeRuntime::create_tee(const TeeConfig& cfg) {
  std::uint8_t eid = 0;
  for (std::uint8_t e = 1; e <= kMaxTees; ++e)
    if (!tees_[e]) {
      eid = e;
      break;
    }
  if (eid == 0) throw SimError(ErrorCode::kNoFreeId, "all TEE ids are in use");
  const std::uint64_t quota = cfg.quota != 0 ? cfg.quota : config_.default_quota;
  if (cfg.code_size > quota)
    throw SimError(ErrorCode::kOutOfMemory, "program does not fit the TEE memory quota");
  const auto region = allocate(quota);
  if (!region) throw SimError(ErrorCode::kOutOfMemory, "SSD DRAM exhausted");
  try {
    ftl_.set_id_bits(eid, cfg.grants);
  } catch (...) {
    release(*region);
    throw;
  }
  ftl_.declare(eid, cfg.grants);
  mem_.assign(eid, *region);

  TeeDescriptor d;
  d.eid = eid;
  d.state = TeeState::kCreating;
  d.program = cfg.program;
  d.code_size = cfg.code_size;
  d.lpa_grant = cfg.grants;
  d.memory_region = *region;
  const AddressRange secure = mem_.range(RegionKind::kSecure);
  d.metadata_slot = {secure.base + (eid - 1) * config_.metadata_slot_bytes,
                     config_.metadata_slot_bytes};
  d.state = TeeState::kRunning;
  tees_[eid] = std::move(d);
  ++stats_.created;
  stats_.management_ns += config_.create_ns;
  return eid;
}

std::uint32_t TeeRuntime::offload_code(const OffloadRequest& request) {
  if (eid_of(request.tid))
    throw SimError(ErrorCode::kDuplicateTid, "tid " + std::to_string(request.tid) + " in flight");
  const std::uint8_t eid = create_tee({request.program, request.lpas,
                                       config_.default_quota, request.code_size});
  tees_[eid]->tid = request.tid;
  return request.tid;
}

std::uint64_t TeeRuntime::terminate_tee(std::uint8_t eid) {
  TeeDescriptor& d = slot(eid);
  if (d.state != TeeState::kRunning && d.state != TeeState::kAborted)
    throw SimError(ErrorCode::kInvalidState, "TEE cannot be terminated from its state");
  ftl_.clear_id_bits(eid);
  ftl_.forget(eid);
  mem_.release(eid);
  if (smem_ != nullptr)
    for (std::uint64_t a = d.memory_region.base; a < d.memory_region.end(); a += kPageBytes)
      smem_->release_page(a);
  release(d.memory_region);
  const std::uint64_t reclaimed = d.memory_region.size + d.metadata_slot.size;
  if (d.state == TeeState::kRunning) d.state = TeeState::kTerminated;
  finished_[d.tid] = std::move(d);
  tees_[eid].reset();
  ++stats_.terminated;
  stats_.management_ns += config_.destroy_ns;
  return reclaimed;
}

const AbortRecord& TeeRuntime::throw_out_tee(std::uint8_t eid, AbortReason reason,
                                             const std::string& message) {
  TeeDescriptor& d = slot(eid);
  if (d.abort) return *d.abort;
  d.state = TeeState::kAborted;
  d.abort = AbortRecord{eid, reason, message};
  aborts_.push_back(*d.abort);
  ++stats_.aborted;
  return *d.abort;
}

TranslateResult TeeRuntime::read_mapping_entry(std::uint8_t eid, std::uint32_t lpa,
                                               Nanos now) {
  TeeDescriptor& d = slot(eid);
  if (d.state != TeeState::kRunning)
    throw SimError(ErrorCode::kInvalidState, "TEE is not running");
  try {
    return ftl_.translate(eid, lpa, now);
  } catch (const SimError& e) {
    if (e.code() == ErrorCode::kPermissionDenied)
      throw_out_tee(eid, AbortReason::kAccessViolation, e.what());
    throw;
  }
}

LineRead TeeRuntime::tee_read(std::uint8_t eid, std::uint64_t address) {
  slot(eid);
  if (mem_.access(World::kNormal, address, AccessMode::kRead, eid) == Decision::kFault) {
    throw_out_tee(eid, AbortReason::kAccessViolation, "read fault");
    throw SimError(ErrorCode::kFault, "TEE " + std::to_string(eid) + " read outside its memory");
  }
  try {
    return smem_->mem_read(address);
  } catch (const SimError& e) {
    if (e.code() == ErrorCode::kIntegrityViolation)
      throw_out_tee(eid, AbortReason::kMemoryCorruption, e.what());
    throw;
  }
}

OpCost TeeRuntime::tee_write(std::uint8_t eid, std::uint64_t address, const Line& line) {
  slot(eid);
  if (mem_.access(World::kNormal, address, AccessMode::kWrite, eid) == Decision::kFault) {
    throw_out_tee(eid, AbortReason::kAccessViolation, "write fault");
    throw SimError(ErrorCode::kFault, "TEE " + std::to_string(eid) + " wrote outside its memory");
  }
  try {
    return smem_->mem_write(address, line);
  } catch (const SimError& e) {
    if (e.code() == ErrorCode::kIntegrityViolation)
      throw_out_tee(eid, AbortReason::kMemoryCorruption, e.what());
    throw;
  }
}

void TeeRuntime::complete(std::uint8_t eid, std::vector<std::uint8_t> result) {
  TeeDescriptor& d = slot(eid);
  if (d.state != TeeState::kRunning)
    throw SimError(ErrorCode::kInvalidState, "only a running TEE can complete");
  if (result.size() > d.metadata_slot.size)
    throw SimError(ErrorCode::kBadLength, "result exceeds the metadata slot");
  d.result = std::move(result);
  d.finished = true;
}

std::vector<std::uint8_t> TeeRuntime::get_result(std::uint32_t tid, Nanos* transfer_ns) const {
  if (eid_of(tid)) throw SimError(ErrorCode::kNotFinished, "task still running");
  auto it = finished_.find(tid);
  if (it == finished_.end()) throw SimError(ErrorCode::kUnknownTee, "unknown tid");
  const TeeDescriptor& d = it->second;
  if (d.abort)
    throw SimError(ErrorCode::kAborted,
                   std::string("task aborted: ") + to_string(d.abort->reason) + ": " +
                       d.abort->message);
  if (!d.finished) throw SimError(ErrorCode::kNotFinished, "task terminated without result");
  if (transfer_ns != nullptr) *transfer_ns = transfer_time(d.result.size(), static_cast<std::uint64_t>(config_.external_bw));
  return d.result;
}

}  // namespace isctee
