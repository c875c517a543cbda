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

#include "ardpo/ardm/io.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include "ardpo/error.hpp"

namespace ardpo::ardm {

std::string hex_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::hex);
  if (res.ec != std::errc()) throw Error("hex_double: formatting failed");
  std::string body(buf, res.ptr);
  // to_chars omits the prefix; keep the sign in front of it.
  if (!body.empty() && body[0] == '-') return "-0x" + body.substr(1);
  if (body == "inf" || body == "nan") return body;
  return "0x" + body;
}

double parse_hex_double(std::string_view text) {
  bool negative = false;
  if (!text.empty() && text[0] == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) {
    throw CorruptionError("not a hex float: " + std::string(text), -1);
  }
  text.remove_prefix(2);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw CorruptionError("not a hex float: " + std::string(text), -1);
  }
  return negative ? -value : value;
}

nlohmann::json vector_to_hex(const Tensor& t) {
  nlohmann::json out = nlohmann::json::array();
  for (double v : t.data()) out.push_back(hex_double(v));
  return out;
}

nlohmann::json matrix_to_hex(const Tensor& t) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (double v : t.row(r)) row.push_back(hex_double(v));
    out.push_back(std::move(row));
  }
  return out;
}

Tensor vector_from_hex(const nlohmann::json& j) {
  if (!j.is_array()) throw CorruptionError("expected an array of hex floats", -1);
  Tensor out = Tensor::vector(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out[i] = parse_hex_double(j[i].get<std::string>());
  return out;
}

Tensor matrix_from_hex(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw CorruptionError("expected a non-empty matrix", -1);
  const std::size_t cols = j[0].size();
  Tensor out = Tensor::matrix(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw CorruptionError("ragged matrix rows", -1);
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) = parse_hex_double(j[r][c].get<std::string>());
  }
  return out;
}

nlohmann::json sequence_record(const Sequence& seq, std::uint64_t seed, std::string_view config_hash) {
  nlohmann::json tokens = nlohmann::json::array();
  for (std::size_t r = 0; r < seq.length(); ++r) {
    tokens.push_back(std::vector<double>(seq.tokens.row(r).begin(), seq.tokens.row(r).end()));
  }
  return {{"prompt", seq.prompt.storage()},
          {"tokens", std::move(tokens)},
          {"seed", seed},
          {"config_hash", std::string(config_hash)}};
}

Sequence sequence_from_record(const nlohmann::json& record) {
  const auto prompt = record.at("prompt").get<std::vector<double>>();
  const auto rows = record.at("tokens").get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw CorruptionError("sequence record without tokens", -1);
  Sequence seq{Tensor::vector(prompt.size()), Tensor::matrix(rows.size(), rows[0].size())};
  std::copy(prompt.begin(), prompt.end(), seq.prompt.data().begin());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != seq.token_dim()) throw CorruptionError("ragged token rows", -1);
    std::copy(rows[r].begin(), rows[r].end(), seq.tokens.row(r).begin());
  }
  return seq;
}

void write_sequences_jsonl(const std::filesystem::path& path, std::span<const Sequence> seqs,
                           std::span<const std::uint64_t> seeds, std::string_view config_hash) {
  if (seeds.size() != seqs.size()) throw InvalidArgument("write_sequences_jsonl: one seed per sequence");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    out << sequence_record(seqs[i], seeds[i], config_hash).dump() << '\n';
  }
}

}  // namespace ardpo::ardm
