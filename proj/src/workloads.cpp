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

#include "isctee/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "isctee/errors.hpp"
#include "isctee/sim_core.hpp"

namespace isctee {
namespace {

template <typename T>
T load_le(const std::uint8_t* p) {
  T v = 0;
  for (int i = sizeof(T) - 1; i >= 0; --i) v = static_cast<T>((v << 8) | p[i]);
  return v;
}

template <typename T>
void store_le(std::uint8_t* p, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFF;
    h *= kFnvPrime;
  }
  return h;
}

std::vector<std::uint8_t> pack_u64(std::initializer_list<std::uint64_t> values) {
  std::vector<std::uint8_t> out(values.size() * 8);
  std::size_t off = 0;
  for (std::uint64_t v : values) {
    store_le(out.data() + off, v);
    off += 8;
  }
  return out;
}

// Array of u64 in scratch memory, eight per line.
class ScratchTable {
 public:
  ScratchTable(MemoryPort& port, std::uint64_t base) : port_(port), base_(base) {}

  std::uint64_t get(std::uint64_t i) {
    const Line l = port_.read(line_of(i));
    return load_le<std::uint64_t>(l.data() + 8 * (i % 8));
  }
  void add(std::uint64_t i, std::uint64_t delta) {
    Line l = port_.read(line_of(i));
    std::uint8_t* p = l.data() + 8 * (i % 8);
    store_le(p, load_le<std::uint64_t>(p) + delta);
    port_.write(line_of(i), l);
  }
  void put_line(std::uint64_t line, const std::uint64_t (&v)[8]) {
    Line l{};
    for (int k = 0; k < 8; ++k) store_le(l.data() + 8 * k, v[k]);
    port_.write(base_ + line * kLineSize, l);
  }

 private:
  std::uint64_t line_of(std::uint64_t i) const { return base_ + (i / 8) * kLineSize; }
  MemoryPort& port_;
  std::uint64_t base_;
};

std::uint64_t net_price(const Row& r) { return r.price * (100 - r.discount) / 100; }

class Arithmetic : public Program {
 public:
  Arithmetic(MemoryPort& port, std::uint64_t base, std::uint32_t bias)
      : table_(port, base), bias_(bias) {}
  WorkloadKind kind() const override { return WorkloadKind::kArithmetic; }
  void consume(const Row& r) override {
    const std::uint64_t divisor = r.discount + bias_;
    if (divisor == 0) throw SimError(ErrorCode::kProgramException, "division by zero");
    sum_ += r.price * r.quantity / divisor + r.discount;
    if (++n_ % 4096 == 0) table_.put_line((n_ / 4096) % 64, {sum_, n_});
  }
  std::vector<std::uint8_t> finish() override { return pack_u64({sum_, n_}); }

 private:
  ScratchTable table_;
  std::uint32_t bias_;
  std::uint64_t sum_ = 0, n_ = 0;
};

class Aggregate : public Program {
 public:
  Aggregate(MemoryPort& port, std::uint64_t base) : table_(port, base) {}
  WorkloadKind kind() const override { return WorkloadKind::kAggregate; }
  void consume(const Row& r) override {
    sum_ += r.price;
    if (++n_ % 4096 == 0) table_.put_line((n_ / 4096) % 64, {sum_, n_});
  }
  std::vector<std::uint8_t> finish() override { return pack_u64({sum_, n_}); }

 private:
  ScratchTable table_;
  std::uint64_t sum_ = 0, n_ = 0;
};

// price < 2.00: roughly one row in a thousand.
class Filter : public Program {
 public:
  static constexpr std::uint64_t kThreshold = 200;
  static constexpr std::uint64_t kOutputLines = 16 * kLinesPerPage;

  Filter(MemoryPort& port, std::uint64_t base) : table_(port, base) {}
  WorkloadKind kind() const override { return WorkloadKind::kFilter; }
  void consume(const Row& r) override {
    if (r.price >= kThreshold) return;
    ++count_;
    key_sum_ += r.key;
    key_xor_ ^= r.key;
    pending_[fill_++] = r.key;
    if (fill_ == 8) flush();
  }
  std::vector<std::uint8_t> finish() override {
    if (fill_ > 0) flush();
    return pack_u64({count_, key_sum_, key_xor_});
  }

 private:
  void flush() {
    std::fill(pending_ + fill_, pending_ + 8, 0);
    table_.put_line(out_line_++ % kOutputLines, pending_);
    fill_ = 0;
  }
  ScratchTable table_;
  std::uint64_t pending_[8] = {};
  int fill_ = 0;
  std::uint64_t out_line_ = 0;
  std::uint64_t count_ = 0, key_sum_ = 0, key_xor_ = 0;
};

// Pricing summary grouped by (return_flag, line_status).
class TpchQ1 : public Program {
 public:
  static constexpr std::uint32_t kCutoff = 2556 - 90;

  TpchQ1(MemoryPort& port, std::uint64_t base) : table_(port, base) {}
  WorkloadKind kind() const override { return WorkloadKind::kTpchQ1; }
  void consume(const Row& r) override {
    if (r.ship_date > kCutoff) return;
    auto& g = groups_[r.return_flag * 2 + r.line_status];
    g[0] += r.quantity;
    g[1] += r.price;
    g[2] += net_price(r);
    g[3] += 1;
  }
  std::vector<std::uint8_t> finish() override {
    std::vector<std::uint8_t> out;
    for (int pair = 0; pair < 3; ++pair) {
      const auto& a = groups_[2 * pair];
      const auto& b = groups_[2 * pair + 1];
      table_.put_line(pair, {a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]});
    }
    for (const auto& g : groups_)
      for (std::uint64_t v : g) {
        const auto bytes = pack_u64({v});
        out.insert(out.end(), bytes.begin(), bytes.end());
      }
    return out;
  }

 private:
  ScratchTable table_;
  std::uint64_t groups_[6][4] = {};
};

// Revenue per customer bucket for one segment over a five-week window.
class TpchQ3 : public Program {
 public:
  static constexpr std::uint32_t kBuckets = 1024;

  TpchQ3(MemoryPort& port, std::uint64_t base) : table_(port, base) {}
  WorkloadKind kind() const override { return WorkloadKind::kTpchQ3; }
  void consume(const Row& r) override {
    if (r.priority != 1 || r.ship_date < 1200 || r.ship_date >= 1236) return;
    table_.add(r.cust_key % kBuckets, net_price(r));
    ++count_;
  }
  std::vector<std::uint8_t> finish() override {
    std::uint64_t total = 0, best = 0, best_rev = 0, h = kFnvOffset;
    for (std::uint32_t b = 0; b < kBuckets; ++b) {
      const std::uint64_t v = table_.get(b);
      total += v;
      h = fnv_mix(h, v);
      if (v > best_rev) {
        best_rev = v;
        best = b;
      }
    }
    return pack_u64({count_, total, best, best_rev, h});
  }

 private:
  ScratchTable table_;
  std::uint64_t count_ = 0;
};

// Late-delivery counts per ship mode, split by order priority.
class TpchQ12 : public Program {
 public:
  TpchQ12(MemoryPort& port, std::uint64_t base) : table_(port, base) {}
  WorkloadKind kind() const override { return WorkloadKind::kTpchQ12; }
  void consume(const Row& r) override {
    ++n_;
    if (n_ % 32768 == 0) table_.put_line((n_ / 32768) % 64, {c_[0], c_[1], c_[2], c_[3], n_});
    if (r.ship_mode != 2 && r.ship_mode != 5) return;
    if (!(r.commit_date < r.receipt_date && r.ship_date < r.commit_date)) return;
    if (r.receipt_date < 730 || r.receipt_date >= 1095) return;
    const int mode = r.ship_mode == 2 ? 0 : 2;
    ++c_[mode + (r.priority < 2 ? 0 : 1)];
  }
  std::vector<std::uint8_t> finish() override { return pack_u64({c_[0], c_[1], c_[2], c_[3]}); }

 private:
  ScratchTable table_;
  std::uint64_t c_[4] = {};
  std::uint64_t n_ = 0;
};

// Promotion share of revenue over one month.
class TpchQ14 : public Program {
 public:
  TpchQ14(MemoryPort& port, std::uint64_t base) : table_(port, base) {}
  WorkloadKind kind() const override { return WorkloadKind::kTpchQ14; }
  void consume(const Row& r) override {
    if (r.ship_date < 1500 || r.ship_date >= 1530) return;
    const std::uint64_t rev = net_price(r);
    total_ += rev;
    if (r.brand < 5) promo_ += rev;
  }
  std::vector<std::uint8_t> finish() override {
    table_.put_line(0, {promo_, total_});
    return pack_u64({promo_, total_});
  }

 private:
  ScratchTable table_;
  std::uint64_t promo_ = 0, total_ = 0;
};

// Discounted revenue over three brand/container/quantity clauses.
class TpchQ19 : public Program {
 public:
  TpchQ19(MemoryPort& port, std::uint64_t base) : table_(port, base) {}
  WorkloadKind kind() const override { return WorkloadKind::kTpchQ19; }
  void consume(const Row& r) override {
    const bool a = r.brand == 12 && r.container < 10 && r.quantity >= 1 && r.quantity <= 11;
    const bool b = r.brand == 23 && r.container >= 10 && r.container < 20 &&
                   r.quantity >= 10 && r.quantity <= 20;
    const bool c = r.brand == 24 && r.container >= 30 && r.quantity >= 20 && r.quantity <= 30;
    if (!(a || b || c)) return;
    revenue_ += net_price(r);
    ++count_;
  }
  std::vector<std::uint8_t> finish() override {
    table_.put_line(0, {revenue_, count_});
    return pack_u64({revenue_, count_});
  }

 private:
  ScratchTable table_;
  std::uint64_t revenue_ = 0, count_ = 0;
};

// Groups of 16 rows form one transaction that moves a branch balance.
class TpcB : public Program {
 public:
  static constexpr std::uint32_t kBranches = 64;
  static constexpr std::uint32_t kGroup = 16;

  TpcB(MemoryPort& port, std::uint64_t base) : table_(port, base) {}
  WorkloadKind kind() const override { return WorkloadKind::kTpcB; }
  void consume(const Row& r) override {
    if (fill_ == 0) branch_ = r.tokens[2] % kBranches;
    delta_ += static_cast<std::uint64_t>(r.quantity) - 25;
    if (++fill_ == kGroup) commit();
  }
  std::vector<std::uint8_t> finish() override {
    if (fill_ > 0) commit();
    std::vector<std::uint8_t> out;
    for (std::uint32_t b = 0; b < kBranches; ++b) {
      const auto bytes = pack_u64({table_.get(b)});
      out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
  }

 private:
  void commit() {
    table_.add(branch_, delta_);
    delta_ = 0;
    fill_ = 0;
  }
  ScratchTable table_;
  std::uint32_t branch_ = 0, fill_ = 0;
  std::uint64_t delta_ = 0;
};

// Groups of 8 rows form one order that restocks an item.
class TpcC : public Program {
 public:
  static constexpr std::uint32_t kItems = 4096;
  static constexpr std::uint32_t kGroup = 8;

  TpcC(MemoryPort& port, std::uint64_t base) : table_(port, base) {}
  WorkloadKind kind() const override { return WorkloadKind::kTpcC; }
  void consume(const Row& r) override {
    if (fill_ == 0) item_ = r.tokens[1] % kItems;
    qty_ += r.quantity;
    if (++fill_ == kGroup) commit();
  }
  std::vector<std::uint8_t> finish() override {
    if (fill_ > 0) commit();
    std::uint64_t total = 0, h = kFnvOffset;
    for (std::uint32_t i = 0; i < kItems; ++i) {
      const std::uint64_t v = table_.get(i);
      total += v;
      h = fnv_mix(h, v);
    }
    return pack_u64({total, h, orders_});
  }

 private:
  void commit() {
    table_.add(item_, qty_);
    qty_ = 0;
    fill_ = 0;
    ++orders_;
  }
  ScratchTable table_;
  std::uint32_t item_ = 0, fill_ = 0;
  std::uint64_t qty_ = 0, orders_ = 0;
};

class Wordcount : public Program {
 public:
  Wordcount(MemoryPort& port, std::uint64_t base) : table_(port, base) {}
  WorkloadKind kind() const override { return WorkloadKind::kWordcount; }
  void consume(const Row& r) override {
    for (std::uint32_t t : r.tokens) table_.add(t % kWordVocabulary, 1);
    total_ += 4;
  }
  std::vector<std::uint8_t> finish() override {
    std::uint64_t h = kFnvOffset, best = 0, best_count = 0;
    for (std::uint32_t w = 0; w < kWordVocabulary; ++w) {
      const std::uint64_t v = table_.get(w);
      h = fnv_mix(h, v);
      if (v > best_count) {
        best_count = v;
        best = w;
      }
    }
    return pack_u64({total_, h, best, best_count});
  }

 private:
  ScratchTable table_;
  std::uint64_t total_ = 0;
};

struct NameEntry {
  WorkloadKind kind;
  const char* name;
};

constexpr NameEntry kNames[] = {
    {WorkloadKind::kArithmetic, "arithmetic"}, {WorkloadKind::kAggregate, "aggregate"},
    {WorkloadKind::kFilter, "filter"},         {WorkloadKind::kTpchQ1, "tpch-q1"},
    {WorkloadKind::kTpchQ3, "tpch-q3"},        {WorkloadKind::kTpchQ12, "tpch-q12"},
    {WorkloadKind::kTpchQ14, "tpch-q14"},      {WorkloadKind::kTpchQ19, "tpch-q19"},
    {WorkloadKind::kTpcB, "tpc-b"},            {WorkloadKind::kTpcC, "tpc-c"},
    {WorkloadKind::kWordcount, "wordcount"},
};

}  // namespace

const char* to_string(WorkloadKind k) {
  for (const auto& e : kNames)
    if (e.kind == k) return e.name;
  return "?";
}

std::optional<WorkloadKind> parse_workload(std::string_view name) {
  for (const auto& e : kNames)
    if (name == e.name) return e.kind;
  return std::nullopt;
}

const std::vector<WorkloadKind>& all_workloads() {
  static const std::vector<WorkloadKind> all = [] {
    std::vector<WorkloadKind> v;
    for (const auto& e : kNames) v.push_back(e.kind);
    return v;
  }();
  return all;
}

const std::vector<WorkloadKind>& read_intensive_workloads() {
  static const std::vector<WorkloadKind> v = {
      WorkloadKind::kArithmetic, WorkloadKind::kAggregate, WorkloadKind::kFilter,
      WorkloadKind::kTpchQ1,     WorkloadKind::kTpchQ12,   WorkloadKind::kTpchQ14};
  return v;
}

Row Row::decode(const std::uint8_t* p) {
  Row r;
  r.key = load_le<std::uint64_t>(p);
  r.quantity = load_le<std::uint32_t>(p + 8);
  r.discount = load_le<std::uint32_t>(p + 12);
  r.price = load_le<std::uint64_t>(p + 16);
  r.ship_date = load_le<std::uint32_t>(p + 24);
  r.commit_date = load_le<std::uint32_t>(p + 28);
  r.receipt_date = load_le<std::uint32_t>(p + 32);
  r.return_flag = p[36];
  r.line_status = p[37];
  r.ship_mode = p[38];
  r.priority = p[39];
  r.cust_key = load_le<std::uint32_t>(p + 40);
  r.brand = load_le<std::uint16_t>(p + 44);
  r.container = load_le<std::uint16_t>(p + 46);
  for (int i = 0; i < 4; ++i) r.tokens[i] = load_le<std::uint32_t>(p + 48 + 4 * i);
  return r;
}

void Row::encode(std::uint8_t* p) const {
  store_le(p, key);
  store_le(p + 8, quantity);
  store_le(p + 12, discount);
  store_le(p + 16, price);
  store_le(p + 24, ship_date);
  store_le(p + 28, commit_date);
  store_le(p + 32, receipt_date);
  p[36] = return_flag;
  p[37] = line_status;
  p[38] = ship_mode;
  p[39] = priority;
  store_le(p + 40, cust_key);
  store_le(p + 44, brand);
  store_le(p + 46, container);
  for (int i = 0; i < 4; ++i) store_le(p + 48 + 4 * i, tokens[i]);
}

std::uint64_t Dataset::checksum() const {
  std::uint64_t h = kFnvOffset;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

Dataset generate_dataset(std::uint64_t bytes, std::uint64_t seed) {
  if (bytes < kPageBytes) throw SimError(ErrorCode::kConfigError, "dataset must hold at least one page");
  Dataset d;
  d.bytes.resize((bytes + kPageBytes - 1) / kPageBytes * kPageBytes);
  SeededRng rng(seed);
  const double log_vocab = std::log(static_cast<double>(kWordVocabulary) + 1.0);
  // Approximately Zipf(1): rank = floor(exp(u * ln(V + 1))) - 1.
  auto word = [&] {
    const auto w = static_cast<std::uint32_t>(std::exp(rng.unit() * log_vocab)) - 1;
    return std::min<std::uint32_t>(w, kWordVocabulary - 1);
  };
  for (std::uint64_t i = 0; i < d.rows(); ++i) {
    Row r;
    r.key = i + 1;
    r.quantity = 1 + static_cast<std::uint32_t>(rng.below(50));
    r.discount = static_cast<std::uint32_t>(rng.below(11));
    r.price = 100 + rng.below(99901);
    r.ship_date = static_cast<std::uint32_t>(rng.below(2556));
    r.commit_date = r.ship_date + static_cast<std::uint32_t>(rng.below(90));
    r.receipt_date = r.ship_date + 1 + static_cast<std::uint32_t>(rng.below(30));
    r.return_flag = static_cast<std::uint8_t>(rng.below(3));
    r.line_status = static_cast<std::uint8_t>(rng.below(2));
    r.ship_mode = static_cast<std::uint8_t>(rng.below(7));
    r.priority = static_cast<std::uint8_t>(rng.below(5));
    r.cust_key = static_cast<std::uint32_t>(rng.below(150000));
    r.brand = static_cast<std::uint16_t>(rng.below(25));
    r.container = static_cast<std::uint16_t>(rng.below(40));
    for (auto& t : r.tokens) t = word();
    r.encode(d.bytes.data() + i * kRowBytes);
  }
  return d;
}

namespace {
constexpr char kMagic[8] = {'I', 'S', 'C', 'T', 'E', 'E', 'D', 'S'};
constexpr std::uint32_t kFormatVersion = 1;
}  // namespace

void save_dataset(const Dataset& d, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw SimError(ErrorCode::kConfigError, "cannot write dataset file " + path);
  std::uint8_t header[24];
  std::memcpy(header, kMagic, 8);
  store_le(header + 8, kFormatVersion);
  store_le(header + 12, kRowBytes);
  store_le(header + 16, d.rows());
  f.write(reinterpret_cast<const char*>(header), sizeof header);
  f.write(reinterpret_cast<const char*>(d.bytes.data()),
          static_cast<std::streamsize>(d.bytes.size()));
}

Dataset load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw SimError(ErrorCode::kConfigError, "cannot read dataset file " + path);
  std::uint8_t header[24];
  if (!f.read(reinterpret_cast<char*>(header), sizeof header) ||
      std::memcmp(header, kMagic, 8) != 0)
    throw SimError(ErrorCode::kSchemaMismatch, path + " is not a dataset file");
  if (load_le<std::uint32_t>(header + 8) != kFormatVersion ||
      load_le<std::uint32_t>(header + 12) != kRowBytes)
    throw SimError(ErrorCode::kSchemaMismatch, path + " has an unsupported layout");
  const std::uint64_t rows = load_le<std::uint64_t>(header + 16);
  Dataset d;
  d.bytes.resize(rows * kRowBytes);
  if (d.bytes.size() % kPageBytes != 0 ||
      !f.read(reinterpret_cast<char*>(d.bytes.data()),
              static_cast<std::streamsize>(d.bytes.size())))
    throw SimError(ErrorCode::kSchemaMismatch, path + " is truncated");
  return d;
}

LineCache::LineCache(MemoryPort& backing, std::uint64_t capacity_lines)
    : backing_(backing), capacity_(capacity_lines) {
  if (capacity_ == 0) throw SimError(ErrorCode::kConfigError, "cache needs at least one line");
}

LineCache::Entry& LineCache::fill(std::uint64_t line_addr, bool load) {
  auto it = lines_.find(line_addr);
  if (it != lines_.end()) {
    ++stats_.hits;
    lru_.splice(lru_.begin(), lru_, it->second.lru);
    return it->second;
  }
  ++stats_.misses;
  if (lines_.size() >= capacity_) {
    const std::uint64_t victim = lru_.back();
    auto v = lines_.find(victim);
    if (v->second.dirty) {
      ++stats_.writebacks;
      backing_.write(victim, v->second.data);
    }
    lru_.pop_back();
    lines_.erase(v);
  }
  lru_.push_front(line_addr);
  Entry& e = lines_[line_addr];
  e.data = load ? backing_.read(line_addr) : Line{};
  e.dirty = false;
  e.lru = lru_.begin();
  return e;
}

Line LineCache::read(std::uint64_t address) {
  ++stats_.reads;
  return fill(address & ~(kLineSize - 1), true).data;
}

void LineCache::write(std::uint64_t address, const Line& line) {
  ++stats_.writes;
  Entry& e = fill(address & ~(kLineSize - 1), false);
  e.data = line;
  e.dirty = true;
}

void LineCache::flush() {
  for (auto it = lru_.rbegin(); it != lru_.rend(); ++it) {
    Entry& e = lines_.at(*it);
    if (e.dirty) {
      ++stats_.writebacks;
      backing_.write(*it, e.data);
    }
  }
  lru_.clear();
  lines_.clear();
}

std::uint64_t scratch_bytes(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::kFilter: return 16 * kPageBytes;
    case WorkloadKind::kTpchQ3: return TpchQ3::kBuckets * 8;
    case WorkloadKind::kTpcC: return TpcC::kItems * 8;
    case WorkloadKind::kWordcount: return std::uint64_t{kWordVocabulary} * 8;
    default: return kPageBytes;
  }
}

std::unique_ptr<Program> make_program(WorkloadKind kind, MemoryPort& scratch,
                                      std::uint64_t base, const WorkloadParams& params) {
  switch (kind) {
    case WorkloadKind::kArithmetic:
      return std::make_unique<Arithmetic>(scratch, base, params.divisor_bias);
    case WorkloadKind::kAggregate: return std::make_unique<Aggregate>(scratch, base);
    case WorkloadKind::kFilter: return std::make_unique<Filter>(scratch, base);
    case WorkloadKind::kTpchQ1: return std::make_unique<TpchQ1>(scratch, base);
    case WorkloadKind::kTpchQ3: return std::make_unique<TpchQ3>(scratch, base);
    case WorkloadKind::kTpchQ12: return std::make_unique<TpchQ12>(scratch, base);
    case WorkloadKind::kTpchQ14: return std::make_unique<TpchQ14>(scratch, base);
    case WorkloadKind::kTpchQ19: return std::make_unique<TpchQ19>(scratch, base);
    case WorkloadKind::kTpcB: return std::make_unique<TpcB>(scratch, base);
    case WorkloadKind::kTpcC: return std::make_unique<TpcC>(scratch, base);
    case WorkloadKind::kWordcount: return std::make_unique<Wordcount>(scratch, base);
  }
  throw SimError(ErrorCode::kConfigError, "unknown workload");
}

}  // namespace isctee
