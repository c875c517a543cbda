/*
 * Copyright (c) 2026 The ardpo Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ardpo/driver/config.hpp"

namespace ardpo::driver {

// CSV artifacts start with a "# config_hash=<hash>" line.
std::string read_stamp(const std::filesystem::path& csv);

struct ReportRow {
  std::string name;
  std::optional<double> reward;
  std::optional<double> reward_std_error;
  std::optional<double> kl;
};

struct Report {
  std::string config_hash;
  std::vector<ReportRow> rows;
};

// Rows: Base, Bo-K for each K, RAFT iter i, DPO; one row per stage that has
// finished, cells without data are left empty.
Report build_report(const ExperimentConfig& cfg);

inline constexpr const char* kMissingCell = "-";

std::string report_text(const Report& report);
nlohmann::json report_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

}  // namespace ardpo::driver
