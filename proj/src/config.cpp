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

#include "isctee/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "isctee/errors.hpp"

namespace isctee {
namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw SimError(ErrorCode::kConfigError, key + ": " + why);
}

template <typename T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    bad(key, "expected an integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    bad(key, "expected a number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, "expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Picoseconds written as nanoseconds with up to three decimals.
std::string fmt_ps(Picos ps) {
  std::string s = std::to_string(ps / 1000);
  if (const Picos frac = ps % 1000; frac != 0) {
    char buf[8];
    std::snprintf(buf, sizeof buf, ".%03lld", static_cast<long long>(frac));
    s += buf;
    while (s.back() == '0') s.pop_back();
  }
  return s;
}

Picos parse_ps(const std::string& key, const std::string& v) {
  const double ns = parse_double(key, v);
  if (ns < 0) bad(key, "must be >= 0");
  return static_cast<Picos>(ns * 1000.0 + 0.5);
}

template <std::size_t N>
std::string fmt_hex(const std::array<std::uint8_t, N>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (std::uint8_t b : bytes) {
    s += digits[b >> 4];
    s += digits[b & 15];
  }
  return s;
}

template <std::size_t N>
std::array<std::uint8_t, N> parse_hex(const std::string& key, const std::string& v) {
  if (v.size() != 2 * N) bad(key, "expected " + std::to_string(2 * N) + " hex digits");
  std::array<std::uint8_t, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    unsigned b = 0;
    const auto [p, ec] = std::from_chars(v.data() + 2 * i, v.data() + 2 * i + 2, b, 16);
    if (ec != std::errc() || p != v.data() + 2 * i + 2) bad(key, "bad hex digit");
    out[i] = static_cast<std::uint8_t>(b);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  boost::split(parts, v, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
  return parts;
}

struct Field {
  std::string key;
  std::function<std::string(const SimConfig&)> get;
  std::function<void(SimConfig&, const std::string&)> set;
};

#define ISCTEE_INT(name, member)                                                         \
  Field {                                                                                \
    name, [](const SimConfig& c) { return std::to_string(c.member); },                   \
        [](SimConfig& c, const std::string& v) {                                         \
          c.member = parse_int<std::remove_reference_t<decltype(c.member)>>(name, v);    \
        }                                                                                \
  }
#define ISCTEE_DBL(name, member)                                                         \
  Field {                                                                                \
    name, [](const SimConfig& c) { return fmt(c.member); },                              \
        [](SimConfig& c, const std::string& v) { c.member = parse_double(name, v); }     \
  }
#define ISCTEE_PS(name, member)                                                          \
  Field {                                                                                \
    name, [](const SimConfig& c) { return fmt_ps(c.member); },                           \
        [](SimConfig& c, const std::string& v) { c.member = parse_ps(name, v); }         \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t = {
        ISCTEE_INT("flash.channels", geometry.channels),
        ISCTEE_INT("flash.chips_per_channel", geometry.chips_per_channel),
        ISCTEE_INT("flash.dies_per_chip", geometry.dies_per_chip),
        ISCTEE_INT("flash.planes_per_die", geometry.planes_per_die),
        ISCTEE_INT("flash.blocks_per_plane", geometry.blocks_per_plane),
        ISCTEE_INT("flash.pages_per_block", geometry.pages_per_block),
        ISCTEE_INT("flash.page_size", geometry.page_size),
        ISCTEE_INT("flash.t_rd_ns", timings.t_rd),
        ISCTEE_INT("flash.t_wr_ns", timings.t_wr),
        ISCTEE_INT("flash.t_erase_ns", timings.t_erase),
        ISCTEE_INT("flash.channel_bw", timings.channel_bw),
        ISCTEE_INT("flash.external_bw", timings.external_bw),

        ISCTEE_INT("ftl.logical_pages", ftl.logical_pages),
        ISCTEE_INT("ftl.cache_entries", ftl.cache_entries),
        ISCTEE_DBL("ftl.gc_low_watermark", ftl.gc_low_watermark),
        ISCTEE_DBL("ftl.gc_high_watermark", ftl.gc_high_watermark),
        ISCTEE_INT("ftl.wear_threshold", ftl.wear_threshold),
        ISCTEE_INT("ftl.wear_batch", ftl.wear_batch),
        Field{"ftl.placement",
              [](const SimConfig& c) { return std::string(to_string(c.ftl.placement)); },
              [](SimConfig& c, const std::string& v) {
                if (v == "PROTECTED_REGION") c.ftl.placement = TablePlacement::kProtectedRegion;
                else if (v == "SECURE_WORLD") c.ftl.placement = TablePlacement::kSecureWorld;
                else bad("ftl.placement", "expected PROTECTED_REGION or SECURE_WORLD");
              }},
        ISCTEE_INT("ftl.dram_access_ns", ftl.dram_access_ns),

        ISCTEE_INT("mem_protect.dram_bytes", layout.dram_bytes),
        ISCTEE_INT("mem_protect.secure_bytes", layout.secure_bytes),
        ISCTEE_INT("mem_protect.protected_bytes", layout.protected_bytes),
        ISCTEE_INT("mem_protect.switch_ns", switch_ns),

        Field{"secure_memory.scheme",
              [](const SimConfig& c) { return std::string(to_string(c.memory.scheme)); },
              [](SimConfig& c, const std::string& v) {
                if (v == "HYBRID") c.memory.scheme = CounterScheme::kHybrid;
                else if (v == "SPLIT_ONLY") c.memory.scheme = CounterScheme::kSplitOnly;
                else if (v == "NONE") c.memory.scheme = CounterScheme::kNone;
                else bad("secure_memory.scheme", "expected HYBRID, SPLIT_ONLY or NONE");
              }},
        ISCTEE_INT("secure_memory.counter_cache_bytes", memory.counter_cache_bytes),
        ISCTEE_PS("secure_memory.block_cipher_ns", memory.block_cipher_ps),
        ISCTEE_PS("secure_memory.encrypt_ns", memory.encrypt_ps),
        ISCTEE_PS("secure_memory.verify_ns", memory.verify_ps),
        ISCTEE_INT("secure_memory.dram_access_ns", memory.dram_access_ns),
        ISCTEE_DBL("secure_memory.parallel_update_discount", memory.parallel_update_discount),
        Field{"secure_memory.key", [](const SimConfig& c) { return fmt_hex(c.memory.key); },
              [](SimConfig& c, const std::string& v) {
                c.memory.key = parse_hex<16>("secure_memory.key", v);
              }},

        Field{"cipher_engine.key", [](const SimConfig& c) { return fmt_hex(c.cipher.key); },
              [](SimConfig& c, const std::string& v) {
                c.cipher.key = parse_hex<10>("cipher_engine.key", v);
              }},
        Field{"cipher_engine.overlap",
              [](const SimConfig& c) { return std::string(c.cipher.overlap ? "true" : "false"); },
              [](SimConfig& c, const std::string& v) {
                c.cipher.overlap = parse_bool("cipher_engine.overlap", v);
              }},
        ISCTEE_INT("cipher_engine.cycle_ns", cipher.cycle_ns),
        ISCTEE_DBL("cipher_engine.energy_per_page_nj", cipher.energy_per_page_nj),
        ISCTEE_DBL("cipher_engine.area_fraction", cipher.area_fraction),

        ISCTEE_INT("tee_runtime.create_ns", runtime.create_ns),
        ISCTEE_INT("tee_runtime.destroy_ns", runtime.destroy_ns),
        ISCTEE_INT("tee_runtime.quota_bytes", runtime.default_quota),
        ISCTEE_INT("tee_runtime.metadata_slot_bytes", runtime.metadata_slot_bytes),
        ISCTEE_INT("tee_runtime.slice_ns", slice_ns),

        Field{"compute.cpu_model", [](const SimConfig& c) { return c.compute.cpu_model; },
              [](SimConfig& c, const std::string& v) {
                // Relative throughput per cycle of the two cores.
                if (v == "a72") c.compute.device_ipc = 1.0;
                else if (v == "a53") c.compute.device_ipc = 0.8;
                else bad("compute.cpu_model", "expected a72 or a53");
                c.compute.cpu_model = v;
              }},
        ISCTEE_DBL("compute.device_ghz", compute.device_ghz),
        ISCTEE_DBL("compute.device_ipc", compute.device_ipc),
        ISCTEE_DBL("compute.host_ghz", compute.host_ghz),
        ISCTEE_DBL("compute.host_ipc", compute.host_ipc),
        ISCTEE_DBL("compute.sgx_multiplier", compute.sgx_multiplier),
        ISCTEE_INT("compute.l2_bytes", compute.l2_bytes),
        ISCTEE_DBL("compute.scratch_op_cycles", compute.scratch_op_cycles),
        ISCTEE_INT("compute.host_io_overhead_ns", compute.host_io_overhead_ns),
    };
    for (WorkloadKind k : all_workloads()) {
      const std::string key = std::string("compute.cycles.") + to_string(k);
      const auto idx = static_cast<std::size_t>(k);
      t.push_back(Field{key,
                        [idx](const SimConfig& c) { return fmt(c.compute.cycles_per_record[idx]); },
                        [idx, key](SimConfig& c, const std::string& v) {
                          c.compute.cycles_per_record[idx] = parse_double(key, v);
                        }});
    }
    const std::vector<Field> tail = {
        ISCTEE_INT("workloads.dataset_bytes", dataset_bytes),
        Field{"workloads.dataset_file", [](const SimConfig& c) { return c.dataset_file; },
              [](SimConfig& c, const std::string& v) { c.dataset_file = v; }},
        ISCTEE_INT("workloads.batch_pages", batch_pages),
        ISCTEE_INT("workloads.divisor_bias", params.divisor_bias),
        Field{"workloads.list",
              [](const SimConfig& c) {
                std::string s;
                for (WorkloadKind k : c.workloads) s += (s.empty() ? "" : ",") + std::string(to_string(k));
                return s;
              },
              [](SimConfig& c, const std::string& v) {
                c.workloads.clear();
                for (const auto& name : split_list(v)) {
                  const auto k = parse_workload(name);
                  if (!k) bad("workloads.list", "unknown workload '" + name + "'");
                  c.workloads.push_back(*k);
                }
              }},
        Field{"workloads.modes",
              [](const SimConfig& c) {
                std::string s;
                for (BaselineMode m : c.modes) s += (s.empty() ? "" : ",") + std::string(to_string(m));
                return s;
              },
              [](SimConfig& c, const std::string& v) {
                c.modes.clear();
                for (const auto& name : split_list(v)) {
                  const auto m = parse_mode(name);
                  if (!m) bad("workloads.modes", "unknown mode '" + name + "'");
                  c.modes.push_back(*m);
                }
              }},

        ISCTEE_INT("run.seed", seed),
        Field{"run.attack", [](const SimConfig& c) { return c.attack; },
              [](SimConfig& c, const std::string& v) { c.attack = v; }},
        ISCTEE_INT("run.attack_batch", attack_batch),
    };
    t.insert(t.end(), tail.begin(), tail.end());
    return t;
  }();
  return table;
}

#undef ISCTEE_INT
#undef ISCTEE_DBL
#undef ISCTEE_PS

const Field* find_field(const std::string& key) {
  for (const Field& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

}  // namespace

void apply_setting(SimConfig& config, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (f == nullptr) bad(key, "unknown key");
  f->set(config, boost::trim_copy(value));
}

std::vector<Setting> echo_config(const SimConfig& config) {
  std::vector<Setting> out;
  for (const Field& f : fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

ConfigFile parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw SimError(ErrorCode::kConfigError,
                   "line " + std::to_string(e.line()) + ": " + e.message());
  }
  ConfigFile file;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      bad(section, "key outside of a section");
    for (const auto& [key, node] : body) {
      const std::string value = node.get_value<std::string>();
      if (section == "sweep") {
        if (find_field(key) == nullptr) bad("sweep." + key, "unknown key");
        SweepAxis axis{key, split_list(value)};
        if (axis.values.empty()) bad("sweep." + key, "no values");
        // Each value must parse on its own.
        SimConfig probe;
        for (const auto& v : axis.values) apply_setting(probe, key, v);
        file.sweep.push_back(std::move(axis));
      } else {
        apply_setting(file.config, section + "." + key, value);
      }
    }
  }
  std::sort(file.sweep.begin(), file.sweep.end(),
            [](const SweepAxis& a, const SweepAxis& b) { return a.key < b.key; });
  file.config.validate();
  return file;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError(ErrorCode::kConfigError, path + ": cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::vector<SweepPoint> expand_sweep(const ConfigFile& file) {
  std::vector<SweepPoint> points = {{"", file.config}};
  for (const SweepAxis& axis : file.sweep) {
    std::vector<SweepPoint> next;
    for (const SweepPoint& p : points)
      for (const std::string& v : axis.values) {
        SweepPoint q = p;
        apply_setting(q.config, axis.key, v);
        q.label += (q.label.empty() ? "" : ",") + axis.key + "=" + v;
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  for (const SweepPoint& p : points) p.config.validate();
  return points;
}

}  // namespace isctee
