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

#include "isctee/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "isctee/errors.hpp"

namespace isctee {
namespace {

const char* kHeader = "#isctee-report";

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string ns_from_ps(Picos ps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%03lld", static_cast<long long>(ps / 1000),
                static_cast<long long>(ps % 1000));
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

double ratio(std::uint64_t a, std::uint64_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

[[noreturn]] void mismatch(const std::string& why) {
  throw SimError(ErrorCode::kSchemaMismatch, why);
}

void write_cell(std::ostream& out, const SimConfig& cfg, const CellReport& c,
                const CellReport* base, BaselineMode baseline) {
  const PhaseTimes& p = c.phases;
  const MemTraffic& t = c.memory.traffic;
  out << "cell workload=" << to_string(c.workload) << " mode=" << to_string(c.mode)
      << " total_ns=" << c.total_ns << " management_ns=" << p.management
      << " translation_ns=" << p.translation << " load_ns=" << p.load
      << " compute_ns=" << p.compute << " encryption_ns=" << p.encryption
      << " verification_ns=" << p.verification << " result_ns=" << p.result
      << " wait_ns=" << p.wait << " pages=" << c.pages << " rows=" << c.rows
      << " program_reads=" << c.program_reads << " program_writes=" << c.program_writes
      << " write_ratio=" << num(c.write_ratio()) << " l2_hits=" << c.l2_hits
      << " l2_misses=" << c.l2_misses << " l2_writebacks=" << c.l2_writebacks
      << " lookups=" << c.lookups << " mapping_misses=" << c.mapping_misses
      << " miss_ratio=" << num(c.miss_ratio()) << " world_switches=" << c.world_switches
      << " mem_reads=" << c.memory.reads << " mem_writes=" << c.memory.writes
      << " ingests=" << c.memory.ingests << " encrypt_ops=" << c.memory.encrypt_ops
      << " verify_ops=" << c.memory.verify_ops << " reencryptions=" << c.memory.reencryptions
      << " overflows=" << c.memory.overflows << " counter_hits=" << c.memory.counter_hits
      << " counter_misses=" << c.memory.counter_misses
      << " permission_changes=" << c.memory.permission_changes
      << " violations=" << c.memory.violations << " payload_bytes=" << t.payload_bytes
      << " counter_bytes=" << t.counter_bytes << " reencryption_bytes=" << t.reencryption_bytes
      << " mac_bytes=" << t.mac_bytes << " tree_bytes=" << t.tree_bytes
      << " encryption_traffic=" << num(ratio(t.encryption_extra(), t.payload_bytes))
      << " verification_traffic=" << num(ratio(t.verification_extra(), t.payload_bytes))
      << " cipher_pages=" << c.cipher_pages << " cipher_energy_nj=" << num(c.cipher_energy_nj)
      << " tee_created=" << c.tee_created << " tee_terminated=" << c.tee_terminated;
  // Unit costs, printed where they were charged.
  if (c.tee_created > 0) out << " create_ns=" << cfg.runtime.create_ns;
  if (c.tee_terminated > 0) out << " delete_ns=" << cfg.runtime.destroy_ns;
  if (c.world_switches > 0) out << " switch_ns=" << cfg.switch_ns;
  if (p.encryption > 0) out << " encrypt_ns=" << ns_from_ps(cfg.memory.encrypt_ps);
  if (p.verification > 0) out << " verify_ns=" << ns_from_ps(cfg.memory.verify_ps);
  if (base != nullptr && c.total_ns > 0)
    out << " speedup_vs_" << to_string(baseline) << "="
        << num(static_cast<double>(base->total_ns) / static_cast<double>(c.total_ns));
  out << " status=" << (c.abort ? "aborted" : "ok") << " answer=" << to_hex(c.answer) << "\n";
  if (c.abort)
    out << "abort workload=" << to_string(c.workload) << " mode=" << to_string(c.mode)
        << " eid=" << int{c.abort->eid} << " reason=" << to_string(c.abort->reason)
        << " message=" << c.abort->message << "\n";
}

const std::vector<std::string>& required_cell_fields() {
  static const std::vector<std::string> f = {
      "workload", "mode", "total_ns", "load_ns", "compute_ns", "encryption_ns", "verification_ns"};
  return f;
}

}  // namespace

std::string to_hex(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    s += digits[b >> 4];
    s += digits[b & 15];
  }
  return s;
}

void write_report(std::ostream& out, const SimConfig& config, const std::string& label,
                  const std::vector<CellReport>& cells, BaselineMode baseline,
                  const std::vector<TenantResult>& tenants) {
  out << kHeader << " schema=" << kReportSchema << "\n";
  for (const auto& [k, v] : echo_config(config)) out << "config " << k << "=" << v << "\n";
  out << "point label=" << label << "\n";
  for (const CellReport& c : cells) {
    const CellReport* base = nullptr;
    for (const CellReport& b : cells)
      if (b.workload == c.workload && b.mode == baseline) base = &b;
    write_cell(out, config, c, base, baseline);
  }
  for (std::size_t i = 0; i < tenants.size(); ++i) {
    const TenantResult& t = tenants[i];
    out << "tenant index=" << i << " workload=" << to_string(t.workload)
        << " solo_ns=" << t.solo.total_ns << " shared_ns=" << t.shared.total_ns
        << " wait_ns=" << t.shared.phases.wait << " slowdown="
        << num(static_cast<double>(t.shared.total_ns) / static_cast<double>(t.solo.total_ns) - 1.0)
        << " solo_miss_ratio=" << num(t.solo.miss_ratio())
        << " shared_miss_ratio=" << num(t.shared.miss_ratio())
        << " status=" << (t.shared.abort ? "aborted" : "ok")
        << " answer=" << to_hex(t.shared.answer) << "\n";
    if (t.shared.abort)
      out << "abort workload=" << to_string(t.workload) << " mode=ICECLAVE eid="
          << int{t.shared.abort->eid} << " reason=" << to_string(t.shared.abort->reason)
          << " message=" << t.shared.abort->message << "\n";
  }
}

const std::string& ParsedRecord::at(const std::string& key) const {
  auto it = fields.find(key);
  if (it == fields.end()) mismatch(kind + " record lacks field '" + key + "'");
  return it->second;
}

double ParsedRecord::number(const std::string& key) const {
  const std::string& v = at(key);
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    mismatch(kind + " field '" + key + "' is not a number");
  return out;
}

ParsedReport read_report(std::istream& in) {
  ParsedReport r;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (!header) {
      if (line.rfind(kHeader, 0) != 0) mismatch(where + "missing report header");
      const auto pos = line.find("schema=");
      if (pos == std::string::npos) mismatch(where + "header lacks schema");
      r.schema = std::atoi(line.c_str() + pos + 7);
      if (r.schema != kReportSchema)
        mismatch(where + "unsupported schema " + std::to_string(r.schema));
      header = true;
      continue;
    }
    const auto sp = line.find(' ');
    const std::string kind = line.substr(0, sp);
    const std::string rest = sp == std::string::npos ? "" : line.substr(sp + 1);
    if (kind == "config") {
      const auto eq = rest.find('=');
      if (eq == std::string::npos) mismatch(where + "config record without '='");
      r.config.emplace_back(rest.substr(0, eq), rest.substr(eq + 1));
    } else if (kind == "point") {
      if (rest.rfind("label=", 0) != 0) mismatch(where + "point record without label");
      r.label = rest.substr(6);
    } else if (kind == "cell" || kind == "abort" || kind == "tenant") {
      ParsedRecord rec;
      rec.kind = kind;
      std::size_t i = 0;
      while (i < rest.size()) {
        const auto eq = rest.find('=', i);
        if (eq == std::string::npos) mismatch(where + "field without '='");
        const std::string key = rest.substr(i, eq - i);
        if (key == "message") {
          rec.fields[key] = rest.substr(eq + 1);
          break;
        }
        auto end = rest.find(' ', eq);
        if (end == std::string::npos) end = rest.size();
        rec.fields[key] = rest.substr(eq + 1, end - eq - 1);
        i = end + 1;
      }
      if (kind == "cell")
        for (const auto& f : required_cell_fields()) rec.at(f);
      r.records.push_back(std::move(rec));
    } else {
      mismatch(where + "unknown record '" + kind + "'");
    }
  }
  if (!header) mismatch("empty report");
  return r;
}

ParsedReport read_report_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) mismatch(path + ": cannot open");
  try {
    return read_report(in);
  } catch (const SimError& e) {
    mismatch(path + ": " + e.what());
  }
}

Summary summarize(const std::vector<ParsedReport>& reports, BaselineMode baseline) {
  if (reports.empty()) mismatch("no reports");
  std::set<std::string> keys;
  for (const auto& [k, v] : reports.front().config) keys.insert(k);
  for (const ParsedReport& r : reports) {
    std::set<std::string> other;
    for (const auto& [k, v] : r.config) other.insert(k);
    if (other != keys) mismatch("reports were written with different configuration keys");
  }

  struct Row {
    std::string point, workload, mode;
    double total, speedup, load, compute, encryption, verification;
  };
  std::vector<Row> rows;
  const std::string base_name = to_string(baseline);
  for (const ParsedReport& r : reports)
    for (const ParsedRecord& c : r.records) {
      if (c.kind != "cell") continue;
      const ParsedRecord* base = nullptr;
      for (const ParsedRecord& b : r.records)
        if (b.kind == "cell" && b.at("workload") == c.at("workload") && b.at("mode") == base_name)
          base = &b;
      if (base == nullptr || c.at("mode") == base_name) continue;
      const double total = c.number("total_ns");
      rows.push_back({r.label.empty() ? "-" : r.label, c.at("workload"), c.at("mode"), total,
                      total > 0 ? base->number("total_ns") / total : 0.0,
                      c.number("load_ns") / total, c.number("compute_ns") / total,
                      c.number("encryption_ns") / total, c.number("verification_ns") / total});
    }
  if (rows.empty()) mismatch("no cell shares a workload with a " + base_name + " cell");

  std::ostringstream table, plot;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28s %-11s %-9s %12s %8s %6s %6s %6s %6s\n", "point",
                "workload", "mode", "total_ms", "speedup", "load", "comp", "enc", "ver");
  table << "normalized to " << base_name << "\n" << buf;
  plot << "point workload mode total_ns speedup load compute encryption verification\n";
  for (const Row& row : rows) {
    std::snprintf(buf, sizeof buf, "%-28s %-11s %-9s %12.3f %8.3f %6.3f %6.3f %6.3f %6.3f\n",
                  row.point.c_str(), row.workload.c_str(), row.mode.c_str(), row.total / 1e6,
                  row.speedup, row.load, row.compute, row.encryption, row.verification);
    table << buf;
    plot << row.point << ' ' << row.workload << ' ' << row.mode << ' ' << num(row.total) << ' '
         << num(row.speedup) << ' ' << num(row.load) << ' ' << num(row.compute) << ' '
         << num(row.encryption) << ' ' << num(row.verification) << "\n";
  }
  return {table.str(), plot.str()};
}

}  // namespace isctee
