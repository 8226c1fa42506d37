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

// isctee-sim: command-line front end.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 configuration error,
// 3 integrity violation detected, 4 other TEE abort.

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "isctee/config.hpp"
#include "isctee/errors.hpp"
#include "isctee/executor.hpp"
#include "isctee/report.hpp"

namespace {

using namespace isctee;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIntegrity = 3;
constexpr int kExitAbort = 4;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string baseline = "HOST";
};

ConfigFile load(const Common& c) {
  ConfigFile f = c.config_path.empty() ? parse_config("") : load_config(c.config_path);
  if (c.seed) f.config.seed = *c.seed;
  return f;
}

BaselineMode baseline_of(const Common& c) {
  const auto m = parse_mode(c.baseline);
  if (!m) throw SimError(ErrorCode::kConfigError, "--baseline: unknown mode '" + c.baseline + "'");
  return *m;
}

int exit_for(const std::vector<CellReport>& cells) {
  int code = kExitOk;
  for (const CellReport& c : cells) {
    if (!c.abort) continue;
    if (c.abort->reason == AbortReason::kMemoryCorruption) return kExitIntegrity;
    code = kExitAbort;
  }
  return code;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot write");
  out << text;
}

int cmd_run(const Common& c) {
  const ConfigFile f = load(c);
  const Dataset data = make_dataset(f.config);
  const std::vector<CellReport> cells = run_matrix(f.config, data);
  std::ostringstream text;
  write_report(text, f.config, "", cells, baseline_of(c));
  emit(c.out, text.str());
  return exit_for(cells);
}

std::string file_name(std::size_t index, const std::string& label) {
  std::string s = label.empty() ? "base" : label;
  for (char& ch : s)
    if (ch == '/' || ch == ',' || ch == ' ') ch = '_';
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%03zu_", index);
  return prefix + s + ".report";
}

int cmd_sweep(const Common& c, unsigned parallel) {
  const ConfigFile f = load(c);
  const std::vector<SweepPoint> points = expand_sweep(f);
  const BaselineMode baseline = baseline_of(c);
  const std::filesystem::path dir = c.out.empty() ? "sweep-out" : c.out;
  std::filesystem::create_directories(dir);

  std::vector<int> codes(points.size(), kExitOk);
  std::vector<std::string> errors(points.size());
  std::atomic<std::size_t> next{0};
  std::mutex log;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        const Dataset data = make_dataset(points[i].config);
        const std::vector<CellReport> cells = run_matrix(points[i].config, data);
        std::ofstream out(dir / file_name(i, points[i].label));
        write_report(out, points[i].config, points[i].label, cells, baseline);
        codes[i] = exit_for(cells);
        std::lock_guard<std::mutex> lock(log);
        std::cerr << "point " << i << " " << points[i].label << " done\n";
      } catch (const std::exception& e) {
        errors[i] = e.what();
        codes[i] = kExitError;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < std::max(parallel, 1u); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kExitOk;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!errors[i].empty()) std::cerr << "point " << i << ": " << errors[i] << "\n";
    code = std::max(code, codes[i]);
  }
  std::cout << points.size() << " reports in " << dir.string() << "\n";
  return code;
}

int cmd_report(const Common& c, const std::vector<std::string>& files) {
  std::vector<ParsedReport> reports;
  for (const auto& path : files) {
    if (std::filesystem::is_directory(path)) {
      std::vector<std::string> inside;
      for (const auto& e : std::filesystem::directory_iterator(path))
        if (e.path().extension() == ".report") inside.push_back(e.path().string());
      std::sort(inside.begin(), inside.end());
      for (const auto& p : inside) reports.push_back(read_report_file(p));
    } else {
      reports.push_back(read_report_file(path));
    }
  }
  const Summary s = summarize(reports, baseline_of(c));
  std::cout << s.table;
  if (!c.out.empty()) emit(c.out, s.plot_data);
  return kExitOk;
}

int cmd_attack(const Common& c, const std::string& kind, std::uint64_t batch,
               const std::string& workload, bool expect_violation) {
  ConfigFile f = load(c);
  f.config.attack = kind;
  f.config.attack_batch = batch;
  f.config.modes = {BaselineMode::kIceclave};
  if (!workload.empty()) {
    const auto w = parse_workload(workload);
    if (!w) throw SimError(ErrorCode::kConfigError, "--workload: unknown workload '" + workload + "'");
    f.config.workloads = {*w};
  }
  f.config.validate();
  const Dataset data = make_dataset(f.config);
  const std::vector<CellReport> cells = run_matrix(f.config, data);
  std::ostringstream text;
  write_report(text, f.config, "attack=" + kind, cells, BaselineMode::kIceclave);
  emit(c.out, text.str());
  const int code = exit_for(cells);
  if (expect_violation) {
    if (code == kExitIntegrity) return kExitOk;
    std::cerr << "expected an integrity violation, none was detected\n";
    return kExitError;
  }
  return code;
}

int cmd_tenants(const Common& c) {
  const ConfigFile f = load(c);
  const Dataset data = make_dataset(f.config);
  const std::vector<CellReport> shared = run_multi_tenant(f.config, data, f.config.workloads);
  std::vector<TenantResult> tenants;
  std::vector<CellReport> solos;
  for (std::size_t k = 0; k < shared.size(); ++k) {
    TenantResult t{f.config.workloads[k],
                   run_cell(f.config, data, f.config.workloads[k], BaselineMode::kIceclave),
                   shared[k]};
    solos.push_back(t.solo);
    tenants.push_back(std::move(t));
  }
  std::ostringstream text;
  write_report(text, f.config, "tenants", solos, BaselineMode::kIceclave, tenants);
  emit(c.out, text.str());
  return exit_for(shared);
}

// Scenario scripts: one runtime call per line against a populated ICECLAVE
// device, e.g.
//   CreateTEE program=filter lpas=0-15
//   ReadMappingEntry eid=1 lpa=20
//   OffloadCode program=aggregate lpas=16-31 tid=7
//   TerminateTEE eid=2
//   GetResult tid=7
std::pair<std::uint32_t, std::uint32_t> lpa_range(const std::string& v) {
  const auto dash = v.find('-');
  const auto lo = static_cast<std::uint32_t>(std::stoul(v.substr(0, dash)));
  const auto hi = dash == std::string::npos ? lo : static_cast<std::uint32_t>(std::stoul(v.substr(dash + 1)));
  if (hi < lo) throw SimError(ErrorCode::kConfigError, "lpas: empty range " + v);
  return {lo, hi};
}

int cmd_script(const Common& c, const std::string& path) {
  const ConfigFile f = load(c);
  const Dataset data = make_dataset(f.config);
  Device dev(f.config, BaselineMode::kIceclave);
  dev.populate(data, 0);
  TeeRuntime& rt = dev.runtime();

  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::string verb;
    if (!(words >> verb)) continue;
    std::map<std::string, std::string> args;
    for (std::string w; words >> w;) {
      const auto eq = w.find('=');
      if (eq == std::string::npos)
        throw SimError(ErrorCode::kConfigError, path + ":" + std::to_string(lineno) + ": bad argument '" + w + "'");
      args[w.substr(0, eq)] = w.substr(eq + 1);
    }
    auto arg = [&](const std::string& k) -> const std::string& {
      auto it = args.find(k);
      if (it == args.end())
        throw SimError(ErrorCode::kConfigError, path + ":" + std::to_string(lineno) + ": " + verb + " needs " + k + "=");
      return it->second;
    };
    auto program = [&]() {
      const auto w = parse_workload(arg("program"));
      if (!w) throw SimError(ErrorCode::kConfigError, "unknown program " + arg("program"));
      return *w;
    };
    auto grants = [&]() {
      const auto [lo, hi] = lpa_range(arg("lpas"));
      std::vector<std::uint32_t> v;
      for (std::uint32_t l = lo; l <= hi; ++l) v.push_back(l);
      return v;
    };
    std::cout << verb;
    try {
      if (verb == "OffloadCode") {
        OffloadRequest req;
        req.program = static_cast<std::uint32_t>(program());
        req.lpas = grants();
        req.tid = static_cast<std::uint32_t>(std::stoul(arg("tid")));
        if (args.count("code_size")) req.code_size = std::stoull(args["code_size"]);
        rt.offload_code(req);
        const std::uint8_t eid = *rt.eid_of(req.tid);
        Job job(dev, f.config, program(), req.lpas.front(), req.lpas.size(), req.tid);
        std::vector<Job*> jobs = {&job};
        const Nanos done = run_jobs(jobs, f.config.slice_ns)[0];
        const CellReport r = job.report(0, done);
        std::cout << " ok tid=" << req.tid << " eid=" << int{eid}
                  << " state=" << to_string(rt.descriptor(eid).state) << " total_ns=" << done;
        if (r.abort) std::cout << " abort=" << to_string(r.abort->reason);
      } else if (verb == "CreateTEE") {
        TeeConfig cfg{static_cast<std::uint32_t>(program()), grants(), f.config.runtime.default_quota,
                      f.config.runtime.default_quota / 256};
        if (args.count("quota")) cfg.quota = std::stoull(args["quota"]);
        if (args.count("code_size")) cfg.code_size = std::stoull(args["code_size"]);
        const std::uint8_t eid = rt.create_tee(cfg);
        std::cout << " ok eid=" << int{eid} << " cost_ns=" << f.config.runtime.create_ns;
      } else if (verb == "ReadMappingEntry") {
        const auto eid = static_cast<std::uint8_t>(std::stoul(arg("eid")));
        const auto lpa = static_cast<std::uint32_t>(std::stoul(arg("lpa")));
        const TranslateResult r = rt.read_mapping_entry(eid, lpa, 0);
        std::cout << " ok ppa=" << r.ppa.value << " cost_ns=" << r.cost
                  << " hit=" << (r.cache_hit ? 1 : 0);
      } else if (verb == "ThrowOutTEE") {
        const auto eid = static_cast<std::uint8_t>(std::stoul(arg("eid")));
        AbortReason reason = AbortReason::kProgramException;
        if (args.count("reason")) {
          const std::string& r = args["reason"];
          if (r == "ACCESS_VIOLATION") reason = AbortReason::kAccessViolation;
          else if (r == "MEMORY_CORRUPTION") reason = AbortReason::kMemoryCorruption;
          else if (r != "PROGRAM_EXCEPTION") throw SimError(ErrorCode::kConfigError, "unknown reason " + r);
        }
        const AbortRecord& a = rt.throw_out_tee(eid, reason, args.count("message") ? args["message"] : "");
        std::cout << " ok eid=" << int{a.eid} << " reason=" << to_string(a.reason);
      } else if (verb == "TerminateTEE") {
        const auto eid = static_cast<std::uint8_t>(std::stoul(arg("eid")));
        std::cout << " ok reclaimed=" << rt.terminate_tee(eid)
                  << " cost_ns=" << f.config.runtime.destroy_ns;
      } else if (verb == "GetResult") {
        Nanos xfer = 0;
        const auto bytes = rt.get_result(static_cast<std::uint32_t>(std::stoul(arg("tid"))), &xfer);
        std::cout << " ok bytes=" << to_hex(bytes) << " transfer_ns=" << xfer;
      } else {
        throw SimError(ErrorCode::kConfigError,
                       path + ":" + std::to_string(lineno) + ": unknown verb " + verb);
      }
    } catch (const SimError& e) {
      if (e.code() == ErrorCode::kConfigError) {
        std::cout << "\n";
        throw;
      }
      std::cout << " error " << e.what();
    } catch (const std::logic_error&) {
      std::cout << "\n";
      throw SimError(ErrorCode::kConfigError,
                     path + ":" + std::to_string(lineno) + ": malformed number");
    }
    std::cout << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Computational SSD simulator with in-storage TEEs"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool with_out = true) {
    sub->add_option("--config", common.config_path, "INI configuration file");
    sub->add_option("--seed", common.seed, "Overrides run.seed");
    sub->add_option("--baseline", common.baseline, "Normalization baseline mode");
    if (with_out) sub->add_option("--out", common.out, "Output path");
  };

  auto* run = app.add_subcommand("run", "Run every (workload, mode) cell");
  add_common(run);

  unsigned parallel = 1;
  auto* sweep = app.add_subcommand("sweep", "Run every point of the [sweep] section");
  add_common(sweep);
  sweep->add_option("--parallel", parallel, "Worker count")->check(CLI::PositiveNumber);

  std::vector<std::string> files;
  auto* report = app.add_subcommand("report", "Summarize report files or directories");
  report->add_option("files", files, "Reports")->required();
  report->add_option("--baseline", common.baseline, "Normalization baseline mode");
  report->add_option("--out", common.out, "Plot-data output path");

  std::string kind = "data", workload;
  std::uint64_t batch = 0;
  bool expect = false;
  auto* attack = app.add_subcommand("attack", "Inject a fault into TEE memory");
  add_common(attack);
  attack->add_option("--kind", kind, "data, mac, counter, node or replay");
  attack->add_option("--batch", batch, "Batch after which to inject");
  attack->add_option("--workload", workload, "Single workload to run");
  attack->add_flag("--expect-violation", expect, "Exit 0 when the violation is detected");

  auto* tenants = app.add_subcommand("tenants", "Run the workload list as concurrent TEEs");
  add_common(tenants);

  std::string script_path;
  auto* script = app.add_subcommand("script", "Execute runtime API calls from a file");
  add_common(script, false);
  script->add_option("file", script_path, "Scenario script")->required();

  auto* validate = app.add_subcommand("validate-config", "Check a configuration file");
  validate->add_option("--config", common.config_path, "INI configuration file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(common);
    if (*sweep) return cmd_sweep(common, parallel);
    if (*report) return cmd_report(common, files);
    if (*attack) return cmd_attack(common, kind, batch, workload, expect);
    if (*tenants) return cmd_tenants(common);
    if (*script) return cmd_script(common, script_path);
    if (*validate) {
      const ConfigFile f = load(common);
      std::cout << "ok: " << expand_sweep(f).size() << " point(s)\n";
      return kExitOk;
    }
  } catch (const SimError& e) {
    std::cerr << e.what() << "\n";
    return e.code() == ErrorCode::kConfigError ? kExitConfig : kExitError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
