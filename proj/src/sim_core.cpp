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

#include "isctee/sim_core.hpp"

#include <string>

#include "isctee/errors.hpp"

namespace isctee {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEventCapExceeded: return "EventCapExceeded";
    case ErrorCode::kNegativeDelay: return "NegativeDelay";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kReadOfFreePage: return "ReadOfFreePage";
    case ErrorCode::kProgramOfNonFreePage: return "ProgramOfNonFreePage";
    case ErrorCode::kPermissionDenied: return "PermissionDenied";
    case ErrorCode::kUnmappedLpa: return "UnmappedLpa";
    case ErrorCode::kDeviceFull: return "DeviceFull";
    case ErrorCode::kAlreadyOwned: return "AlreadyOwned";
    case ErrorCode::kFault: return "Fault";
    case ErrorCode::kWriteToReadOnly: return "WriteToReadOnly";
    case ErrorCode::kIntegrityViolation: return "IntegrityViolation";
    case ErrorCode::kBadLength: return "BadLength";
    case ErrorCode::kNoFreeId: return "NoFreeId";
    case ErrorCode::kOutOfMemory: return "OutOfMemory";
    case ErrorCode::kUnknownTee: return "UnknownTee";
    case ErrorCode::kDuplicateTid: return "DuplicateTid";
    case ErrorCode::kNotFinished: return "NotFinished";
    case ErrorCode::kAborted: return "Aborted";
    case ErrorCode::kInvalidState: return "InvalidState";
    case ErrorCode::kProgramException: return "ProgramException";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
  }
  return "Unknown";
}

std::uint64_t Simulator::schedule(Nanos delay, EventKind kind,
                                  std::uint64_t payload, Handler on_fire) {
  if (delay < 0)
    throw SimError(ErrorCode::kNegativeDelay,
                   "delay " + std::to_string(delay));
  return schedule_at(clock_.now_ + delay, kind, payload, std::move(on_fire));
}

std::uint64_t Simulator::schedule_at(Nanos when, EventKind kind,
                                     std::uint64_t payload, Handler on_fire) {
  if (when < clock_.now_)
    throw SimError(ErrorCode::kNegativeDelay,
                   "event at " + std::to_string(when) + " precedes clock " +
                       std::to_string(clock_.now_));
  Event ev{when, kind, payload, next_seq_++};
  queue_.push(Entry{ev, std::move(on_fire)});
  return ev.seq;
}

bool Simulator::step() {
  if (queue_.empty()) return false;
  if (dispatched_ >= event_cap_)
    throw SimError(ErrorCode::kEventCapExceeded,
                   "more than " + std::to_string(event_cap_) + " events");
  Entry entry = queue_.top();
  queue_.pop();
  clock_.now_ = entry.event.fire_at;
  ++dispatched_;
  if (entry.handler) entry.handler(entry.event);
  return true;
}

Nanos Simulator::run_until_idle() {
  while (step()) {
  }
  return clock_.now_;
}

void SeededRng::reseed(std::uint64_t seed) {
  seed_ = seed;
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  state_ = z == 0 ? 1 : z;
}

std::uint64_t SeededRng::next() {
  std::uint64_t x = state_;
  x ^= x >> 12;
  x ^= x << 25;
  x ^= x >> 27;
  state_ = x;
  return x * 0x2545F4914F6CDD1DULL;
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
  // Rejection keeps the draw unbiased and the stream portable.
  const std::uint64_t limit = ~0ULL - (~0ULL % bound);
  std::uint64_t v;
  do {
    v = next();
  } while (v >= limit);
  return v % bound;
}

double SeededRng::unit() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

}  // namespace isctee
