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

// Run configuration files. The format is INI: one section per module, one
// `key = value` per line, `;` or `#` comments. Every key has a default, so an
// empty file is the reference configuration. A `[sweep]` section lists
// comma-separated values for any other key, e.g. `flash.channels = 4,8,16,32`.

#ifndef ISCTEE_CONFIG_HPP_
#define ISCTEE_CONFIG_HPP_

#include <string>
#include <utility>
#include <vector>

#include "isctee/executor.hpp"

namespace isctee {

using Setting = std::pair<std::string, std::string>;  // "section.key", value

// Sets one dotted key. Throws ConfigError naming the field on an unknown key
// or a malformed value.
void apply_setting(SimConfig& config, const std::string& key, const std::string& value);

// Every key with its current value, in a fixed order. Feeding the list back
// through apply_setting reproduces the configuration exactly.
std::vector<Setting> echo_config(const SimConfig& config);

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

struct ConfigFile {
  SimConfig config;
  std::vector<SweepAxis> sweep;  // sorted by key
};

// Parses and validates. Throws ConfigError.
ConfigFile load_config(const std::string& path);
ConfigFile parse_config(const std::string& text);

struct SweepPoint {
  std::string label;  // "key=value,key=value"; empty without axes
  SimConfig config;
};

// Cartesian product of the axes, lexicographic in axis order.
std::vector<SweepPoint> expand_sweep(const ConfigFile& file);

}  // namespace isctee

#endif  // ISCTEE_CONFIG_HPP_
