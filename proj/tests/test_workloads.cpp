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

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "isctee/errors.hpp"
#include "isctee/executor.hpp"
#include "oracles.hpp"

using namespace isctee;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.dataset_bytes = 2ULL << 20;
  c.batch_pages = 64;
  return c;
}

// Counts traffic reaching the backing store of a LineCache.
class CountingPort : public MemoryPort {
 public:
  Line read(std::uint64_t address) override {
    ++reads;
    return store[address];
  }
  void write(std::uint64_t address, const Line& line) override {
    ++writes;
    store[address] = line;
  }
  std::unordered_map<std::uint64_t, Line> store;
  int reads = 0;
  int writes = 0;
};

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("row encoding roundtrips") {
  Row r;
  r.key = 0x1122334455667788ULL;
  r.quantity = 49;
  r.discount = 7;
  r.price = 123456;
  r.ship_date = 2000;
  r.commit_date = 2010;
  r.receipt_date = 2020;
  r.return_flag = 2;
  r.line_status = 1;
  r.ship_mode = 5;
  r.priority = 3;
  r.cust_key = 99;
  r.brand = 24;
  r.container = 33;
  for (int i = 0; i < 4; ++i) r.tokens[i] = 1000u + static_cast<std::uint32_t>(i);
  std::uint8_t buf[kRowBytes];
  r.encode(buf);
  const Row d = Row::decode(buf);
  CHECK(d.key == r.key);
  CHECK(d.price == r.price);
  CHECK(d.receipt_date == r.receipt_date);
  CHECK(d.priority == r.priority);
  CHECK(d.container == r.container);
  CHECK(d.tokens[3] == 1003u);
}

TEST_CASE("workload names roundtrip") {
  CHECK(all_workloads().size() == 11);
  CHECK(read_intensive_workloads().size() == 6);
  for (WorkloadKind k : all_workloads()) CHECK(parse_workload(to_string(k)) == k);
  CHECK_FALSE(parse_workload("no-such-workload").has_value());
  for (BaselineMode m : all_modes()) CHECK(parse_mode(to_string(m)) == m);
}

TEST_CASE("datasets are deterministic per seed and survive a save/load roundtrip") {
  const Dataset a = generate_dataset(1 << 20, 7);
  const Dataset b = generate_dataset(1 << 20, 7);
  const Dataset c = generate_dataset(1 << 20, 8);
  CHECK(a.bytes == b.bytes);
  CHECK(a.checksum() != c.checksum());
  CHECK(a.pages() == 256);
  CHECK(a.rows() == 256 * 64);

  const auto path = temp_file("isctee_ds_roundtrip.bin");
  save_dataset(a, path.string());
  const Dataset back = load_dataset(path.string());
  CHECK(back.checksum() == a.checksum());
  CHECK(back.bytes == a.bytes);

  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << "NOTADATASET-------------------";
  }
  try {
    load_dataset(path.string());
    FAIL("expected SchemaMismatch");
  } catch (const SimError& e) {
    CHECK(e.code() == ErrorCode::kSchemaMismatch);
  }
  std::filesystem::remove(path);
}

TEST_CASE("line cache is write-back and counts hits and misses") {
  CountingPort port;
  LineCache cache(port, 2);
  Line l{};
  l[0] = 1;
  cache.write(0, l);
  CHECK(port.writes == 0);
  CHECK(cache.read(0)[0] == 1);
  cache.read(64);
  cache.read(128);  // evicts line 0, which is dirty
  CHECK(port.writes == 1);
  CHECK(port.store[0][0] == 1);
  CHECK(cache.stats().hits == 1);
  CHECK(cache.stats().misses == 3);
  cache.write(64, l);
  cache.flush();
  CHECK(port.writes == 2);
}

TEST_CASE("every workload answer matches the host reference in every mode") {
  const SimConfig cfg = small_config();
  const Dataset data = make_dataset(cfg);
  for (WorkloadKind k : all_workloads()) {
    const auto expect = oracle::reference_answer(k, data);
    for (BaselineMode m : all_modes()) {
      CAPTURE(to_string(k));
      CAPTURE(to_string(m));
      const CellReport r = run_cell(cfg, data, k, m);
      CHECK_FALSE(r.abort.has_value());
      CHECK(r.answer == expect);
      CHECK(r.pages == data.pages());
      CHECK(r.rows == data.rows());
      CHECK(r.total_ns == r.phases.total());
    }
  }
}

TEST_CASE("write-heavy workloads write more than the read-intensive ones") {
  const SimConfig cfg = small_config();
  const Dataset data = make_dataset(cfg);
  double max_read_intensive = 0.0;
  for (WorkloadKind k : read_intensive_workloads())
    max_read_intensive =
        std::max(max_read_intensive, run_cell(cfg, data, k, BaselineMode::kIsc).write_ratio());
  for (WorkloadKind k : {WorkloadKind::kTpcB, WorkloadKind::kTpcC, WorkloadKind::kWordcount}) {
    CAPTURE(to_string(k));
    CHECK(run_cell(cfg, data, k, BaselineMode::kIsc).write_ratio() > max_read_intensive);
  }
}

TEST_CASE("runs are deterministic") {
  const SimConfig cfg = small_config();
  const Dataset data = make_dataset(cfg);
  const CellReport a = run_cell(cfg, data, WorkloadKind::kTpchQ1, BaselineMode::kIceclave);
  const CellReport b = run_cell(cfg, data, WorkloadKind::kTpchQ1, BaselineMode::kIceclave);
  CHECK(a.total_ns == b.total_ns);
  CHECK(a.answer == b.answer);
  CHECK(a.memory.verify_ops == b.memory.verify_ops);
  CHECK(a.world_switches == b.world_switches);
}

TEST_CASE("a division by zero aborts with a program exception") {
  SimConfig cfg = small_config();
  cfg.params.divisor_bias = 0;
  const Dataset data = make_dataset(cfg);
  for (BaselineMode m : all_modes()) {
    CAPTURE(to_string(m));
    const CellReport r = run_cell(cfg, data, WorkloadKind::kArithmetic, m);
    REQUIRE(r.abort.has_value());
    CHECK(r.abort->reason == AbortReason::kProgramException);
    CHECK(r.answer.empty());
  }
  // The TEE is torn down after the abort.
  const CellReport r = run_cell(cfg, data, WorkloadKind::kArithmetic, BaselineMode::kIceclave);
  CHECK(r.tee_created == 1);
  CHECK(r.tee_terminated == 1);
  // Other workloads are unaffected by the bias.
  CHECK_FALSE(run_cell(cfg, data, WorkloadKind::kAggregate, BaselineMode::kIceclave).abort);
}

TEST_CASE("a slower or in-order core spends more time computing") {
  SimConfig fast = small_config();
  const Dataset data = make_dataset(fast);
  SimConfig slow = fast;
  slow.compute.device_ghz = 0.8;
  SimConfig in_order = fast;
  in_order.compute.cpu_model = "a53";
  in_order.compute.device_ipc = 0.8;
  for (WorkloadKind k : {WorkloadKind::kAggregate, WorkloadKind::kTpchQ1}) {
    const Nanos base = run_cell(fast, data, k, BaselineMode::kIsc).phases.compute;
    CHECK(run_cell(slow, data, k, BaselineMode::kIsc).phases.compute > base);
    CHECK(run_cell(in_order, data, k, BaselineMode::kIsc).phases.compute > base);
  }
}

TEST_CASE("only the protected mode pays for protection") {
  const SimConfig cfg = small_config();
  const Dataset data = make_dataset(cfg);
  const CellReport isc = run_cell(cfg, data, WorkloadKind::kFilter, BaselineMode::kIsc);
  const CellReport ice = run_cell(cfg, data, WorkloadKind::kFilter, BaselineMode::kIceclave);
  const CellReport host = run_cell(cfg, data, WorkloadKind::kFilter, BaselineMode::kHost);
  const CellReport sgx = run_cell(cfg, data, WorkloadKind::kFilter, BaselineMode::kHostSgx);
  CHECK(isc.phases.encryption == 0);
  CHECK(isc.phases.verification == 0);
  CHECK(isc.phases.management == 0);
  CHECK(isc.world_switches == 0);
  CHECK(isc.cipher_pages == 0);
  CHECK(ice.phases.encryption > 0);
  CHECK(ice.phases.verification > 0);
  CHECK(ice.phases.management == 95'000 + 58'000);
  CHECK(ice.cipher_pages == data.pages());
  CHECK(ice.total_ns > isc.total_ns);
  // The enclave multiplier scales core cycles; DRAM miss time is added after.
  const double miss_ns = static_cast<double>(host.l2_misses) * 50.0;
  CHECK(sgx.l2_misses == host.l2_misses);
  CHECK(static_cast<double>(sgx.phases.compute) - miss_ns ==
        doctest::Approx((static_cast<double>(host.phases.compute) - miss_ns) * 2.03).epsilon(0.001));
}
