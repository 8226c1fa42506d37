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

#include "isctee/executor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

#include "isctee/errors.hpp"

namespace isctee {
namespace {

FtlConfig ftl_config(const SimConfig& c, BaselineMode mode) {
  FtlConfig f = c.ftl;
  f.isolation = mode == BaselineMode::kIceclave;
  return f;
}

SecureMemoryConfig memory_config(const SimConfig& c, BaselineMode mode) {
  SecureMemoryConfig m = c.memory;
  m.dram_bytes = c.layout.dram_bytes;
  if (mode != BaselineMode::kIceclave) m.scheme = CounterScheme::kNone;
  return m;
}

CipherEngineConfig cipher_config(const SimConfig& c) {
  CipherEngineConfig e = c.cipher;
  e.seed = c.seed;
  return e;
}

RuntimeConfig runtime_config(const SimConfig& c) {
  RuntimeConfig r = c.runtime;
  r.external_bw = static_cast<double>(c.timings.external_bw);
  return r;
}

// Accumulates the engine charges of every line access.
class EnginePort : public MemoryPort {
 public:
  EnginePort(Device& dev, std::uint8_t eid, OpCost& acc) : dev_(dev), eid_(eid), acc_(acc) {}

  Line read(std::uint64_t address) override {
    const LineRead r = eid_ != 0 ? dev_.runtime().tee_read(eid_, address)
                                 : dev_.memory().mem_read(address);
    acc_ += r.cost;
    return r.bytes;
  }
  void write(std::uint64_t address, const Line& line) override {
    acc_ += eid_ != 0 ? dev_.runtime().tee_write(eid_, address, line)
                      : dev_.memory().mem_write(address, line);
  }

 private:
  Device& dev_;
  std::uint8_t eid_;
  OpCost& acc_;
};

}  // namespace

const char* to_string(BaselineMode m) {
  switch (m) {
    case BaselineMode::kHost: return "HOST";
    case BaselineMode::kHostSgx: return "HOST_SGX";
    case BaselineMode::kIsc: return "ISC";
    case BaselineMode::kIceclave: return "ICECLAVE";
  }
  return "?";
}

std::optional<BaselineMode> parse_mode(std::string_view name) {
  for (BaselineMode m : all_modes())
    if (name == to_string(m)) return m;
  return std::nullopt;
}

const std::vector<BaselineMode>& all_modes() {
  static const std::vector<BaselineMode> v = {BaselineMode::kHost, BaselineMode::kHostSgx,
                                              BaselineMode::kIsc, BaselineMode::kIceclave};
  return v;
}

void SimConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw SimError(ErrorCode::kConfigError, field + ": " + why);
  };
  geometry.validate();
  timings.validate();
  if (geometry.page_size != kPageBytes) fail("flash.page_size", "must be 4096");
  if (layout.secure_bytes + layout.protected_bytes >= layout.dram_bytes)
    fail("mem_protect.dram_bytes", "smaller than the secure and protected regions");
  if (switch_ns <= 0) fail("mem_protect.switch_ns", "must be > 0");
  if (compute.cpu_model != "a72" && compute.cpu_model != "a53")
    fail("compute.cpu_model", "must be a72 or a53");
  if (compute.device_ghz <= 0) fail("compute.device_ghz", "must be > 0");
  if (compute.device_ipc <= 0) fail("compute.device_ipc", "must be > 0");
  if (compute.host_ghz <= 0) fail("compute.host_ghz", "must be > 0");
  if (compute.host_ipc <= 0) fail("compute.host_ipc", "must be > 0");
  if (compute.sgx_multiplier < 1) fail("compute.sgx_multiplier", "must be >= 1");
  if (compute.l2_bytes < kLineSize) fail("compute.l2_bytes", "must hold one line");
  if (compute.host_io_overhead_ns < 0) fail("compute.host_io_overhead_ns", "must be >= 0");
  for (double c : compute.cycles_per_record)
    if (c < 0) fail("compute.cycles", "per-record cycles must be >= 0");
  if (dataset_bytes < kPageBytes) fail("workloads.dataset_bytes", "must hold one page");
  if (dataset_bytes / kPageBytes > ftl.logical_pages)
    fail("workloads.dataset_bytes", "exceeds ftl.logical_pages");
  if (batch_pages == 0) fail("workloads.batch_pages", "must be > 0");
  if (slice_ns <= 0) fail("tee_runtime.slice_ns", "must be > 0");
  if (attack != "none" && attack != "data" && attack != "mac" && attack != "counter" &&
      attack != "node" && attack != "replay")
    fail("run.attack", "unknown attack '" + attack + "'");
  if (workloads.empty()) fail("workloads.list", "empty");
  if (modes.empty()) fail("workloads.modes", "empty");
  if (ftl.logical_pages == 0) fail("ftl.logical_pages", "must be > 0");
  if (!(ftl.gc_low_watermark > 0 && ftl.gc_low_watermark < 1))
    fail("ftl.gc_low_watermark", "must be in (0, 1)");
  if (!(ftl.gc_high_watermark >= ftl.gc_low_watermark && ftl.gc_high_watermark < 1))
    fail("ftl.gc_high_watermark", "must be in [gc_low_watermark, 1)");
  if (memory.counter_cache_bytes < kLineSize)
    fail("secure_memory.counter_cache_bytes", "must hold one counter block");
  if (!(memory.parallel_update_discount > 0 && memory.parallel_update_discount <= 1))
    fail("secure_memory.parallel_update_discount", "must be in (0, 1]");
  if (cipher.cycle_ns <= 0) fail("cipher_engine.cycle_ns", "must be > 0");
  if (runtime.metadata_slot_bytes * TeeRuntime::kMaxTees > layout.secure_bytes)
    fail("tee_runtime.metadata_slot_bytes", "15 slots do not fit in mem_protect.secure_bytes");
  if (runtime.default_quota == 0) fail("tee_runtime.quota_bytes", "must be > 0");
}

Device::Device(const SimConfig& config, BaselineMode mode)
    : mode_(mode),
      flash_(config.geometry, config.timings),
      mem_(config.layout, config.switch_ns),
      ftl_(flash_, mem_, ftl_config(config, mode)),
      memory_(memory_config(config, mode)),
      cipher_(cipher_config(config)),
      runtime_(ftl_, mem_, &memory_, runtime_config(config)) {}

void Device::populate(const Dataset& data, std::uint32_t first_lpa) {
  for (std::uint64_t p = 0; p < data.pages(); ++p)
    ftl_.write(0, first_lpa + static_cast<std::uint32_t>(p),
               std::span<const std::uint8_t>(data.bytes.data() + p * kPageBytes, kPageBytes), 0);
  flash_.reset_timing();
  ftl_.flush_cache();
  ftl_.reset_stats();
  host_link_free_ = 0;
}

struct Job::Impl {
  enum class Stage { kSetup, kTranslate, kLoad, kIngest, kCompute, kFinish, kDone };

  Impl(Device& d, const SimConfig& c, WorkloadKind w, std::uint32_t lpa, std::uint64_t n,
       std::uint32_t t)
      : dev(d), cfg(c), mode(d.mode()), workload(w), first_lpa(lpa), pages(n), tid(t) {}

  Device& dev;
  const SimConfig& cfg;
  BaselineMode mode;
  WorkloadKind workload;
  std::uint32_t first_lpa;
  std::uint64_t pages;
  std::uint32_t tid;

  Stage stage = Stage::kSetup;
  std::uint8_t eid = 0;
  bool attached = false;  // TEE created by the caller; its lifecycle stays there
  std::uint64_t region_base = 0;
  std::uint64_t ring_pages = 0;
  std::uint64_t scratch_base = 0;
  std::unique_ptr<EnginePort> port;
  std::unique_ptr<LineCache> l2;
  std::unique_ptr<Program> program;

  std::uint64_t batch = 0;
  std::uint64_t batch_begin = 0, batch_end = 0;
  std::vector<Ppa> ppas;
  std::vector<std::vector<std::uint8_t>> buffers;

  PhaseTimes phases;
  OpCost engine;
  Nanos encryption_charged = 0, verification_charged = 0;
  double cycles = 0;
  Nanos compute_charged = 0;
  std::uint64_t scratch_ops_seen = 0;
  std::uint64_t record_reads = 0;
  std::uint64_t lookups = 0, mapping_misses = 0, switched = 0;
  std::uint64_t cipher_pages = 0;
  double cipher_energy = 0.0;
  std::vector<std::uint8_t> answer;
  std::optional<AbortRecord> abort;

  bool iceclave() const { return mode == BaselineMode::kIceclave; }
  bool host() const { return mode == BaselineMode::kHost || mode == BaselineMode::kHostSgx; }

  Nanos charge_engine() {
    const Nanos enc = engine.encryption_ps / 1000 - encryption_charged;
    const Nanos ver = engine.verification_ps / 1000 - verification_charged;
    encryption_charged += enc;
    verification_charged += ver;
    phases.encryption += enc;
    phases.verification += ver;
    return enc + ver;
  }

  Nanos charge_compute() {
    const std::uint64_t ops = l2->stats().reads + l2->stats().writes;
    cycles += static_cast<double>(ops - scratch_ops_seen) * cfg.compute.scratch_op_cycles;
    scratch_ops_seen = ops;
    const ComputeModel& cm = cfg.compute;
    double ns = host() ? cycles / (cm.host_ghz * cm.host_ipc) : cycles / (cm.device_ghz * cm.device_ipc);
    if (mode == BaselineMode::kHostSgx) ns *= cm.sgx_multiplier;
    const Nanos total = static_cast<Nanos>(ns) +
                        static_cast<Nanos>(l2->stats().misses) * cfg.ftl.dram_access_ns;
    const Nanos delta = total - compute_charged;
    compute_charged = total;
    phases.compute += delta;
    return delta;
  }

  Step setup() {
    Nanos mgmt = 0;
    const std::uint64_t quota = cfg.runtime.default_quota;
    if (iceclave() && dev.runtime().eid_of(tid)) {
      eid = *dev.runtime().eid_of(tid);
      attached = true;
      region_base = dev.runtime().descriptor(eid).memory_region.base;
    } else if (iceclave()) {
      OffloadRequest req;
      req.program = static_cast<std::uint32_t>(workload);
      req.tid = tid;
      req.lpas.reserve(pages);
      for (std::uint64_t p = 0; p < pages; ++p)
        req.lpas.push_back(first_lpa + static_cast<std::uint32_t>(p));
      dev.runtime().offload_code(req);
      eid = *dev.runtime().eid_of(tid);
      region_base = dev.runtime().descriptor(eid).memory_region.base;
      mgmt = cfg.runtime.create_ns;
      phases.management += mgmt;
    } else {
      region_base = dev.mem().range(RegionKind::kNormal).base + (tid - 1) * quota;
    }
    ring_pages = std::min<std::uint64_t>(cfg.batch_pages, pages);
    scratch_base = region_base + ring_pages * kPageBytes;
    const std::uint64_t scratch_pages = (scratch_bytes(workload) + kPageBytes - 1) / kPageBytes;
    if ((ring_pages + scratch_pages) * kPageBytes > quota)
      throw SimError(ErrorCode::kConfigError,
                     "workload.batch_pages: batch and scratch exceed the TEE memory quota");
    const std::vector<std::uint8_t> zeros(kPageBytes, 0);
    for (std::uint64_t p = 0; p < scratch_pages; ++p) {
      const std::uint64_t a = scratch_base + p * kPageBytes;
      engine += dev.memory().ingest_page(a, zeros);
      engine += dev.memory().change_permission(a, PagePermission::kWritable);
    }
    port = std::make_unique<EnginePort>(dev, eid, engine);
    l2 = std::make_unique<LineCache>(*port, cfg.compute.l2_bytes / kLineSize);
    program = make_program(workload, *l2, scratch_base, cfg.params);
    stage = Stage::kTranslate;
    return {Step::kCpu, mgmt + charge_engine()};
  }

  Step translate(Nanos now) {
    batch_end = std::min(batch_begin + cfg.batch_pages, pages);
    ppas.clear();
    Nanos t = now;
    for (std::uint64_t p = batch_begin; p < batch_end; ++p) {
      const std::uint32_t lpa = first_lpa + static_cast<std::uint32_t>(p);
      const TranslateResult r = iceclave() ? dev.runtime().read_mapping_entry(eid, lpa, t)
                                           : dev.ftl().translate(0, lpa, t);
      t += r.cost;
      ++lookups;
      mapping_misses += !r.cache_hit;
      switched += r.world_switch;
      ppas.push_back(r.ppa);
    }
    phases.translation += t - now;
    stage = Stage::kLoad;
    return {Step::kCpu, t - now};
  }

  Step load(Nanos now) {
    buffers.assign(ppas.size(), {});
    Nanos done = now;
    const Nanos link_xfer = transfer_time(kPageBytes, cfg.timings.external_bw);
    for (std::size_t i = 0; i < ppas.size(); ++i) {
      ReadResult rr = dev.flash().read_page(ppas[i], now);
      Nanos c = rr.completion;
      if (iceclave()) {
        const EncryptedPage enc = dev.cipher().encrypt_page(ppas[i], rr.content);
        c = dev.cipher().completion(c);
        ++cipher_pages;
        cipher_energy += enc.energy_nj;
        buffers[i] = dev.cipher().decrypt_page(enc.iv, enc.ciphertext);
      } else {
        buffers[i] = std::move(rr.content);
      }
      if (host()) {
        Nanos& link = dev.host_link_free();
        link = std::max(link, c) + link_xfer + cfg.compute.host_io_overhead_ns;
        c = link;
      }
      done = std::max(done, c);
    }
    phases.load += done - now;
    stage = Stage::kIngest;
    return {Step::kIo, done};
  }

  std::uint64_t ring_address(std::uint64_t index) const {
    return region_base + (index % ring_pages) * kPageBytes;
  }

  Step ingest() {
    const bool replay = cfg.attack == "replay" && batch == cfg.attack_batch && iceclave();
    std::optional<SecureMemory::Snapshot> snap;
    if (replay) snap = dev.memory().snapshot(ring_address(0), 1, false);
    for (std::size_t i = 0; i < buffers.size(); ++i)
      engine += dev.memory().ingest_page(ring_address(i), buffers[i]);
    if (iceclave() && batch == cfg.attack_batch) inject(snap);
    stage = Stage::kCompute;
    return {Step::kCpu, charge_engine()};
  }

  void inject(const std::optional<SecureMemory::Snapshot>& snap) {
    SecureMemory& m = dev.memory();
    const std::uint64_t a = ring_address(0);
    const TreeKind tree = m.tree_for(a);
    const std::uint64_t leaf =
        tree == TreeKind::kSplit ? a / kPageBytes : a / kPageBytes / MajorCounterBlock::kPagesPerBlock;
    if (cfg.attack == "data") {
      m.flip_data_bit(a + 5, 3);
    } else if (cfg.attack == "mac") {
      m.flip_mac_bit(a, 7);
    } else if (cfg.attack == "counter") {
      m.flush_counter_cache();
      m.flip_counter_bit(tree, leaf, 3);
    } else if (cfg.attack == "node") {
      m.flush_counter_cache();
      m.flip_node_bit(tree, 1, leaf / 8, 0);
    } else if (cfg.attack == "replay" && snap) {
      m.flush_counter_cache();
      m.restore(*snap);
    }
  }

  Step compute() {
    const double cpr = cfg.compute.cycles(workload);
    for (std::size_t i = 0; i < buffers.size(); ++i) {
      const std::uint64_t base = ring_address(i);
      for (std::uint64_t l = 0; l < kLinesPerPage; ++l) {
        const Line line = port->read(base + l * kLineSize);
        ++record_reads;
        program->consume(Row::decode(line.data()));
        cycles += cpr;
      }
    }
    buffers.clear();
    batch_begin = batch_end;
    ++batch;
    stage = batch_begin < pages ? Stage::kTranslate : Stage::kFinish;
    const Nanos c = charge_compute();
    return {Step::kCpu, c + charge_engine()};
  }

  Step finish() {
    answer = program->finish();
    l2->flush();
    Nanos d = charge_compute() + charge_engine();
    if (attached) {
      dev.runtime().complete(eid, answer);
    } else if (iceclave()) {
      dev.runtime().complete(eid, answer);
      dev.runtime().terminate_tee(eid);
      phases.management += cfg.runtime.destroy_ns;
      Nanos xfer = 0;
      dev.runtime().get_result(tid, &xfer);
      phases.result += xfer;
      d += cfg.runtime.destroy_ns + xfer;
    } else if (!host()) {
      const Nanos xfer = transfer_time(answer.size(), cfg.timings.external_bw);
      phases.result += xfer;
      d += xfer;
    }
    stage = Stage::kDone;
    return {Step::kCpu, d};
  }

  Step fail(const SimError& e) {
    AbortReason reason;
    switch (e.code()) {
      case ErrorCode::kPermissionDenied:
      case ErrorCode::kFault: reason = AbortReason::kAccessViolation; break;
      case ErrorCode::kIntegrityViolation: reason = AbortReason::kMemoryCorruption; break;
      case ErrorCode::kProgramException: reason = AbortReason::kProgramException; break;
      default: throw e;
    }
    Nanos d = 0;
    if (iceclave() && eid != 0 && dev.runtime().live(eid)) {
      abort = dev.runtime().throw_out_tee(eid, reason, e.what());
      if (!attached) {
        dev.runtime().terminate_tee(eid);
        phases.management += cfg.runtime.destroy_ns;
        d += cfg.runtime.destroy_ns;
      }
    } else {
      abort = AbortRecord{eid, reason, e.what()};
    }
    buffers.clear();
    stage = Stage::kDone;
    return {Step::kCpu, d + charge_engine()};
  }

  Step advance(Nanos now) {
    try {
      switch (stage) {
        case Stage::kSetup: return setup();
        case Stage::kTranslate: return translate(now);
        case Stage::kLoad: return load(now);
        case Stage::kIngest: return ingest();
        case Stage::kCompute: return compute();
        case Stage::kFinish: return finish();
        case Stage::kDone: return {Step::kDone, 0};
      }
    } catch (const SimError& e) {
      return fail(e);
    }
    return {Step::kDone, 0};
  }
};

Job::Job(Device& device, const SimConfig& config, WorkloadKind workload,
         std::uint32_t first_lpa, std::uint64_t pages, std::uint32_t tid)
    : impl_(std::make_unique<Impl>(device, config, workload, first_lpa, pages, tid)) {
  if (tid == 0) throw SimError(ErrorCode::kConfigError, "tid 0 is reserved");
}

Job::~Job() = default;

Job::Step Job::advance(Nanos now) { return impl_->advance(now); }

CellReport Job::report(Nanos started_at, Nanos finished_at) const {
  const Impl& j = *impl_;
  CellReport r;
  r.workload = j.workload;
  r.mode = j.mode;
  r.eid = j.eid;
  r.phases = j.phases;
  r.total_ns = finished_at - started_at;
  r.phases.wait = 0;
  r.phases.wait = r.total_ns - r.phases.total();
  r.pages = j.pages;
  r.rows = j.record_reads;
  if (j.l2) {
    r.program_reads = j.record_reads + j.l2->stats().reads;
    r.program_writes = j.l2->stats().writes;
    r.l2_hits = j.l2->stats().hits;
    r.l2_misses = j.l2->stats().misses;
    r.l2_writebacks = j.l2->stats().writebacks;
  }
  r.lookups = j.lookups;
  r.mapping_misses = j.mapping_misses;
  r.switched_translations = j.switched;
  r.world_switches = 2 * j.switched;
  r.memory = j.dev.memory().stats();
  r.cipher_pages = j.cipher_pages;
  r.cipher_energy_nj = j.cipher_energy;
  r.tee_created = j.dev.runtime().stats().created;
  r.tee_terminated = j.dev.runtime().stats().terminated;
  r.answer = j.answer;
  r.abort = j.abort;
  return r;
}

std::vector<Nanos> run_jobs(std::vector<Job*>& jobs, Nanos slice_ns) {
  const std::size_t n = jobs.size();
  Simulator sim;
  std::vector<Nanos> cpu_left(n, 0), budget(n, 0), finish(n, 0);
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) ready.push_back(i);
  bool core_busy = false;

  std::function<void()> dispatch;
  // Runs job i on the core from sim.now() until its slice ends, it blocks on
  // I/O or it finishes.
  std::function<void(std::size_t)> resume = [&](std::size_t i) {
    while (cpu_left[i] == 0) {
      const Job::Step s = jobs[i]->advance(sim.now());
      if (s.kind == Job::Step::kDone) {
        finish[i] = sim.now();
        core_busy = false;
        dispatch();
        return;
      }
      if (s.kind == Job::Step::kIo) {
        sim.schedule_at(std::max(s.value, sim.now()), EventKind::kFlashReadDone, i,
                        [&](const Event& e) {
                          ready.push_back(e.payload);
                          dispatch();
                        });
        core_busy = false;
        dispatch();
        return;
      }
      cpu_left[i] = s.value;
    }
    const Nanos run = std::min(budget[i], cpu_left[i]);
    sim.schedule(run, EventKind::kCpuSliceDone, i, [&, run](const Event& e) {
      const std::size_t j = e.payload;
      cpu_left[j] -= run;
      budget[j] -= run;
      if (budget[j] > 0) {
        resume(j);
        return;
      }
      ready.push_back(j);
      core_busy = false;
      dispatch();
    });
  };
  dispatch = [&] {
    if (core_busy || ready.empty()) return;
    const std::size_t i = ready.front();
    ready.pop_front();
    core_busy = true;
    budget[i] = slice_ns;
    resume(i);
  };

  dispatch();
  sim.run_until_idle();
  return finish;
}

CellReport run_cell(const SimConfig& config, const Dataset& data, WorkloadKind workload,
                    BaselineMode mode) {
  Device dev(config, mode);
  dev.populate(data, 0);
  Job job(dev, config, workload, 0, data.pages(), 1);
  std::vector<Job*> jobs = {&job};
  const std::vector<Nanos> finish = run_jobs(jobs, config.slice_ns);
  return job.report(0, finish[0]);
}

std::vector<CellReport> run_matrix(const SimConfig& config, const Dataset& data) {
  std::vector<CellReport> out;
  for (WorkloadKind w : config.workloads)
    for (BaselineMode m : config.modes) out.push_back(run_cell(config, data, w, m));
  return out;
}

Dataset make_dataset(const SimConfig& config) {
  if (config.dataset_file.empty()) return generate_dataset(config.dataset_bytes, config.seed);
  Dataset d = load_dataset(config.dataset_file);
  if (d.pages() == 0 || d.pages() > config.ftl.logical_pages)
    throw SimError(ErrorCode::kConfigError, "workloads.dataset_file: page count out of range");
  return d;
}

std::vector<CellReport> run_multi_tenant(const SimConfig& config, const Dataset& data,
                                         const std::vector<WorkloadKind>& workloads) {
  Device dev(config, BaselineMode::kIceclave);
  const auto pages = static_cast<std::uint32_t>(data.pages());
  if (static_cast<std::uint64_t>(pages) * workloads.size() > config.ftl.logical_pages)
    throw SimError(ErrorCode::kConfigError, "tenants exceed ftl.logical_pages");
  for (std::size_t k = 0; k < workloads.size(); ++k)
    dev.populate(data, static_cast<std::uint32_t>(k) * pages);
  std::vector<std::unique_ptr<Job>> owned;
  std::vector<Job*> jobs;
  for (std::size_t k = 0; k < workloads.size(); ++k) {
    owned.push_back(std::make_unique<Job>(dev, config, workloads[k],
                                          static_cast<std::uint32_t>(k) * pages, pages,
                                          static_cast<std::uint32_t>(k + 1)));
    jobs.push_back(owned.back().get());
  }
  const std::vector<Nanos> finish = run_jobs(jobs, config.slice_ns);
  std::vector<CellReport> out;
  for (std::size_t k = 0; k < jobs.size(); ++k) out.push_back(jobs[k]->report(0, finish[k]));
  return out;
}

}  // namespace isctee
