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

// Runs offloaded programs on a simulated device under the four baselines:
//   HOST      rows cross the external link and are processed by the host CPU
//   HOST_SGX  HOST with the compute time scaled by the enclave multiplier
//   ISC       in-storage processing without any protection
//   ICECLAVE  ISC inside a TEE: ID-checked translation, the page cipher,
//             memory encryption and integrity verification
//
// A run is a sequence of steps per TEE. CPU steps occupy the single
// in-storage core; I/O steps occupy flash dies, channels and the host link.
// Steps of several TEEs interleave on the core in round-robin slices.

#ifndef ISCTEE_EXECUTOR_HPP_
#define ISCTEE_EXECUTOR_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "isctee/cipher_engine.hpp"
#include "isctee/flash.hpp"
#include "isctee/ftl.hpp"
#include "isctee/mem_protect.hpp"
#include "isctee/secure_memory.hpp"
#include "isctee/tee_runtime.hpp"
#include "isctee/workloads.hpp"

namespace isctee {

enum class BaselineMode : std::uint8_t { kHost, kHostSgx, kIsc, kIceclave };

const char* to_string(BaselineMode m);
std::optional<BaselineMode> parse_mode(std::string_view name);
const std::vector<BaselineMode>& all_modes();

// Calibration knobs of the compute model. Cycle counts are per streamed row;
// scratch operations and L2 misses are charged on top.
struct ComputeModel {
  // a72 (out-of-order) or a53 (in-order); selects device_ipc.
  std::string cpu_model = "a72";
  double device_ghz = 1.6;
  double device_ipc = 1.0;
  double host_ghz = 4.2;
  double host_ipc = 1.0;
  double sgx_multiplier = 2.03;
  std::uint64_t l2_bytes = 1 << 20;
  double scratch_op_cycles = 4.0;
  // Host-side block-layer and driver cost per 4 KB request, serialized with
  // the external transfer.
  Nanos host_io_overhead_ns = 1'500;
  std::array<double, 11> cycles_per_record = {
      12.0,  // arithmetic
      6.0,   // aggregate
      8.0,   // filter
      30.0,  // tpch-q1
      24.0,  // tpch-q3
      20.0,  // tpch-q12
      14.0,  // tpch-q14
      18.0,  // tpch-q19
      40.0,  // tpc-b
      48.0,  // tpc-c
      60.0,  // wordcount
  };

  double cycles(WorkloadKind k) const { return cycles_per_record[static_cast<int>(k)]; }
};

struct SimConfig {
  FlashGeometry geometry;
  FlashTimings timings;
  RegionLayout layout;
  Nanos switch_ns = 3'800;
  FtlConfig ftl;
  SecureMemoryConfig memory;
  CipherEngineConfig cipher;
  RuntimeConfig runtime;
  ComputeModel compute;
  WorkloadParams params;
  std::uint64_t dataset_bytes = 64ULL << 20;
  std::uint32_t batch_pages = 1024;
  Nanos slice_ns = 100'000;
  // Seeds the dataset generator and the page-IV PRNG.
  std::uint64_t seed = 42;
  // Optional dataset file; empty means generate from the seed.
  std::string dataset_file;
  // Fault injection into TEE memory after a batch is loaded: none, data,
  // mac, counter, node or replay.
  std::string attack = "none";
  std::uint64_t attack_batch = 0;
  std::vector<WorkloadKind> workloads = all_workloads();
  std::vector<BaselineMode> modes = all_modes();

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct PhaseTimes {
  Nanos management = 0;
  Nanos translation = 0;
  Nanos load = 0;
  Nanos compute = 0;
  Nanos encryption = 0;
  Nanos verification = 0;
  Nanos result = 0;
  Nanos wait = 0;  // queueing behind other TEEs

  Nanos total() const {
    return management + translation + load + compute + encryption + verification + result + wait;
  }
};

struct CellReport {
  WorkloadKind workload = WorkloadKind::kAggregate;
  BaselineMode mode = BaselineMode::kIceclave;
  std::uint8_t eid = 0;
  PhaseTimes phases;
  Nanos total_ns = 0;
  std::uint64_t pages = 0;
  std::uint64_t rows = 0;
  std::uint64_t program_reads = 0;
  std::uint64_t program_writes = 0;
  std::uint64_t l2_hits = 0;
  std::uint64_t l2_misses = 0;
  std::uint64_t l2_writebacks = 0;
  std::uint64_t lookups = 0;
  std::uint64_t mapping_misses = 0;
  std::uint64_t world_switches = 0;
  std::uint64_t switched_translations = 0;
  SecureMemoryStats memory;
  std::uint64_t cipher_pages = 0;
  double cipher_energy_nj = 0.0;
  std::uint64_t tee_created = 0;
  std::uint64_t tee_terminated = 0;
  std::vector<std::uint8_t> answer;
  std::optional<AbortRecord> abort;

  double write_ratio() const {
    const std::uint64_t n = program_reads + program_writes;
    return n == 0 ? 0.0 : static_cast<double>(program_writes) / n;
  }
  double miss_ratio() const {
    return lookups == 0 ? 0.0 : static_cast<double>(mapping_misses) / lookups;
  }
};

// All simulated hardware of one computational SSD.
class Device {
 public:
  Device(const SimConfig& config, BaselineMode mode);

  // Firmware writes the dataset to LPAs [first_lpa, first_lpa + pages), then
  // clears timing state, statistics and the mapping cache.
  void populate(const Dataset& data, std::uint32_t first_lpa);

  BaselineMode mode() const { return mode_; }
  FlashArray& flash() { return flash_; }
  MemProtect& mem() { return mem_; }
  Ftl& ftl() { return ftl_; }
  SecureMemory& memory() { return memory_; }
  CipherEngine& cipher() { return cipher_; }
  TeeRuntime& runtime() { return runtime_; }
  Nanos& host_link_free() { return host_link_free_; }

 private:
  BaselineMode mode_;
  FlashArray flash_;
  MemProtect mem_;
  Ftl ftl_;
  SecureMemory memory_;
  CipherEngine cipher_;
  TeeRuntime runtime_;
  Nanos host_link_free_ = 0;
};

// One offloaded task on a device. Under ICECLAVE the job offloads itself and
// terminates its TEE at the end, unless a live TEE already carries `tid`; it
// then runs inside that TEE and leaves termination to the caller.
class Job {
 public:
  struct Step {
    enum Kind : std::uint8_t { kCpu, kIo, kDone } kind;
    Nanos value;  // CPU duration, or absolute I/O completion time
  };

  Job(Device& device, const SimConfig& config, WorkloadKind workload,
      std::uint32_t first_lpa, std::uint64_t pages, std::uint32_t tid);
  ~Job();

  // Performs the next step at `now`; timing is returned, effects are
  // immediate.
  Step advance(Nanos now);

  // Final report; `finished_at` is the completion time of the last step.
  CellReport report(Nanos started_at, Nanos finished_at) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Round-robin over the in-storage core. Returns completion time per job
// (all jobs start at 0).
std::vector<Nanos> run_jobs(std::vector<Job*>& jobs, Nanos slice_ns);

// One (workload, mode) cell on a fresh device.
CellReport run_cell(const SimConfig& config, const Dataset& data, WorkloadKind workload,
                    BaselineMode mode);

// Every (workload, mode) cell of the configuration, workload-major.
std::vector<CellReport> run_matrix(const SimConfig& config, const Dataset& data);

// The configured dataset file, or a dataset generated from the seed.
Dataset make_dataset(const SimConfig& config);

// Several TEEs sharing one device, each over its own copy of `data`.
std::vector<CellReport> run_multi_tenant(const SimConfig& config, const Dataset& data,
                                         const std::vector<WorkloadKind>& workloads);

}  // namespace isctee

#endif  // ISCTEE_EXECUTOR_HPP_
