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

#include "ardpo/driver/report.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ardpo/driver/recipe.hpp"
#include "ardpo/error.hpp"

namespace ardpo::driver {

namespace fs = std::filesystem;

namespace {

struct Table {
  std::string stamp;
  std::vector<std::vector<std::string>> rows;  // data rows, header dropped
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

Table read_table(const fs::path& path) {
  Table t;
  t.stamp = read_stamp(path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // stamp
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (!line.empty()) t.rows.push_back(split_csv(line));
  }
  return t;
}

double cell(const std::vector<std::string>& row, std::size_t i, const fs::path& path) {
  if (i >= row.size()) throw CorruptionError(path.string() + ": short row", -1);
  return std::stod(row[i]);
}

std::string format_cell(const std::optional<double>& v) {
  if (!v) return kMissingCell;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

}  // namespace

std::string read_stamp(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw MissingArtifactError("cannot open " + csv.string());
  std::string line;
  std::getline(in, line);
  const std::string prefix = "# config_hash=";
  if (line.rfind(prefix, 0) != 0) throw CorruptionError(csv.string() + ": missing config hash", -1);
  return line.substr(prefix.size());
}

Report build_report(const ExperimentConfig& cfg) {
  Report report;
  report.config_hash = cfg.hash();
  const fs::path run = cfg.out;

  std::map<std::string, ReportRow> evaluated;
  const fs::path eval_path = run / files::kEval;
  if (stage_done(cfg, Stage::Eval)) {
    const Table t = read_table(eval_path);
    if (t.stamp != cfg.stage_hash(Stage::Eval)) {
      throw ConfigError("report: " + eval_path.string() + " has a different config hash");
    }
    for (const auto& row : t.rows) {
      evaluated[row.at(0)] = {row.at(0), cell(row, 1, eval_path), cell(row, 2, eval_path),
                              cell(row, 3, eval_path)};
    }
  } else if (fs::exists(eval_path) && read_stamp(eval_path) != cfg.stage_hash(Stage::Eval)) {
    throw ConfigError("report: " + eval_path.string() + " has a different config hash");
  }
  auto row_for = [&](const std::string& key, const std::string& label) {
    auto it = evaluated.find(key);
    ReportRow r = it == evaluated.end() ? ReportRow{} : it->second;
    r.name = label;
    return r;
  };

  report.rows.push_back(row_for("base", "Base"));

  if (stage_done(cfg, Stage::Bok)) {
    const fs::path path = run / files::kBok;
    const Table t = read_table(path);
    if (t.stamp != cfg.stage_hash(Stage::Bok)) {
      throw ConfigError("report: " + path.string() + " has a different config hash");
    }
    for (const auto& row : t.rows) {
      report.rows.push_back({"Bo" + row.at(0), cell(row, 1, path), cell(row, 2, path), std::nullopt});
    }
  }
  if (stage_done(cfg, Stage::Raft)) {
    for (std::size_t i = 1; i <= cfg.raft.iterations; ++i) {
      report.rows.push_back(row_for("raft" + std::to_string(i), "RAFT iter " + std::to_string(i)));
    }
  }
  if (stage_done(cfg, Stage::Dpo)) {
    char label[96];
    std::snprintf(label, sizeof(label), "DPO (beta=%g, steps=%zu)", cfg.dpo.beta, cfg.dpo.max_steps);
    report.rows.push_back(row_for("dpo", label));
  }
  return report;
}

std::string report_text(const Report& report) {
  std::string out = "# config_hash=" + report.config_hash + "\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %12s %12s %12s\n", "method", "reward", "reward_se", "kl");
  out += line;
  for (const ReportRow& r : report.rows) {
    std::snprintf(line, sizeof(line), "%-28s %12s %12s %12s\n", r.name.c_str(),
                  format_cell(r.reward).c_str(), format_cell(r.reward_std_error).c_str(),
                  format_cell(r.kl).c_str());
    out += line;
  }
  return out;
}

nlohmann::json report_json(const Report& report) {
  nlohmann::json rows = nlohmann::json::array();
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  for (const ReportRow& r : report.rows) {
    rows.push_back({{"method", r.name},
                    {"reward", opt(r.reward)},
                    {"reward_se", opt(r.reward_std_error)},
                    {"kl", opt(r.kl)}});
  }
  return {{"config_hash", report.config_hash}, {"rows", rows}};
}

Report report_from_json(const nlohmann::json& j) {
  Report r;
  r.config_hash = j.at("config_hash").get<std::string>();
  auto opt = [](const nlohmann::json& v) {
    return v.is_null() ? std::optional<double>() : std::optional<double>(v.get<double>());
  };
  for (const auto& row : j.at("rows")) {
    r.rows.push_back({row.at("method").get<std::string>(), opt(row.at("reward")),
                      opt(row.at("reward_se")), opt(row.at("kl"))});
  }
  return r;
}

}  // namespace ardpo::driver
