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

// Run reports. Line-oriented text, one record per line:
//
//   #isctee-report schema=1
//   config <section.key>=<value>         full configuration echo
//   point label=<sweep label>
//   cell workload=<w> mode=<m> total_ns=<n> ... answer=<hex>
//   abort workload=<w> mode=<m> eid=<e> reason=<r> message=<rest of line>
//   tenant index=<i> workload=<w> solo_ns=<n> shared_ns=<n> ...
//
// Fields within a record are space-separated key=value pairs; only the
// trailing `message` and config values may contain spaces.

#ifndef ISCTEE_REPORT_HPP_
#define ISCTEE_REPORT_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "isctee/config.hpp"
#include "isctee/executor.hpp"

namespace isctee {

inline constexpr int kReportSchema = 1;

// Solo and shared runs of one tenant in a multi-tenant scenario.
struct TenantResult {
  WorkloadKind workload = WorkloadKind::kAggregate;
  CellReport solo;
  CellReport shared;
};

void write_report(std::ostream& out, const SimConfig& config, const std::string& label,
                  const std::vector<CellReport>& cells, BaselineMode baseline,
                  const std::vector<TenantResult>& tenants = {});

struct ParsedRecord {
  std::string kind;  // cell, abort, tenant
  std::map<std::string, std::string> fields;

  const std::string& at(const std::string& key) const;  // SchemaMismatch if absent
  double number(const std::string& key) const;
};

struct ParsedReport {
  int schema = 0;
  std::string label;
  std::vector<Setting> config;
  std::vector<ParsedRecord> records;
};

// Throws SchemaMismatch on a missing or unknown header, an unknown record
// kind, or a cell lacking a required field.
ParsedReport read_report(std::istream& in);
ParsedReport read_report_file(const std::string& path);

// Normalized-speedup table with the load/compute/encryption/verification
// breakdown, and the same data as whitespace-separated columns for plotting.
// Throws SchemaMismatch when the reports were produced under different key
// sets, or when no (point, workload) pair has both the baseline and another
// mode.
struct Summary {
  std::string table;
  std::string plot_data;
};
Summary summarize(const std::vector<ParsedReport>& reports, BaselineMode baseline);

std::string to_hex(const std::vector<std::uint8_t>& bytes);

}  // namespace isctee

#endif  // ISCTEE_REPORT_HPP_
