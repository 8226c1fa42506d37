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

// Discrete-event engine: integer-nanosecond virtual clock, a stable event
// queue and a portable seeded generator.

#ifndef ISCTEE_SIM_CORE_HPP_
#define ISCTEE_SIM_CORE_HPP_

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace isctee {

using Nanos = std::int64_t;

enum class EventKind : std::uint8_t {
  kNoop,
  kFlashReadDone,
  kFlashProgramDone,
  kFlashEraseDone,
  kCpuSliceDone,
  kPhaseDone,
};

struct Event {
  Nanos fire_at = 0;
  EventKind kind = EventKind::kNoop;
  std::uint64_t payload = 0;
  std::uint64_t seq = 0;
};

class SimClock {
 public:
  Nanos now() const { return now_; }

 private:
  friend class Simulator;
  Nanos now_ = 0;
};

// Single-threaded event loop. Events with equal fire_at dispatch in
// insertion order.
class Simulator {
 public:
  using Handler = std::function<void(const Event&)>;

  static constexpr std::uint64_t kDefaultEventCap = 1'000'000'000ULL;

  explicit Simulator(std::uint64_t event_cap = kDefaultEventCap)
      : event_cap_(event_cap) {}

  Nanos now() const { return clock_.now(); }

  // Returns the event id (its sequence number). Throws on negative delay.
  std::uint64_t schedule(Nanos delay, EventKind kind, std::uint64_t payload = 0,
                         Handler on_fire = {});

  // Schedules at an absolute time, which must not precede now().
  std::uint64_t schedule_at(Nanos when, EventKind kind,
                            std::uint64_t payload = 0, Handler on_fire = {});

  // Dispatches one event. Returns false when the queue is empty.
  bool step();

  Nanos run_until_idle();

  std::uint64_t dispatched() const { return dispatched_; }
  std::size_t pending() const { return queue_.size(); }

 private:
  struct Entry {
    Event event;
    Handler handler;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.event.fire_at != b.event.fire_at)
        return a.event.fire_at > b.event.fire_at;
      return a.event.seq > b.event.seq;
    }
  };

  SimClock clock_;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  std::uint64_t event_cap_;
};

// xorshift64* seeded through splitmix64:
//   seeding:  z = seed + 0x9E3779B97F4A7C15;
//             z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//             z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//             state = z ^ (z >> 31), replaced by 1 if zero
//   step:     x ^= x >> 12; x ^= x << 25; x ^= x >> 27;
//             out = x * 0x2545F4914F6CDD1D
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed);
  std::uint64_t seed() const { return seed_; }

  std::uint64_t next();
  // Uniform in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  double unit();  // [0, 1)

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t state_ = 1;
};

}  // namespace isctee

#endif  // ISCTEE_SIM_CORE_HPP_
