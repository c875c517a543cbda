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

#include "ardpo/netcore/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "ardpo/error.hpp"

namespace ardpo::netcore {

namespace {

constexpr char kMagic[8] = {'A', 'R', 'D', 'P', 'O', 'C', 'K', '1'};

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

void write_u64(std::ostream& out, std::uint64_t v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw CorruptionError("checkpoint: truncated file", -1);
  return to_little(v);
}

void write_array(std::ostream& out, const Tensor& t) {
  for (double d : t.data()) write_u64(out, std::bit_cast<std::uint64_t>(d));
}

Tensor read_array(std::istream& in, std::vector<std::size_t> shape, long record) {
  Tensor t(std::move(shape));
  for (double& d : t.data()) {
    std::uint64_t raw = 0;
    in.read(reinterpret_cast<char*>(&raw), sizeof raw);
    if (!in) throw CorruptionError("checkpoint: truncated tensor data", record);
    d = std::bit_cast<double>(to_little(raw));
  }
  return t;
}

nlohmann::json describe(const std::string& section, const ParamSet& set) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [path, t] : set) {
    out.push_back({{"section", section}, {"path", path}, {"shape", t.shape()}});
  }
  return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  nlohmann::json header;
  header["format"] = "ardpo-checkpoint";
  header["version"] = 1;
  header["step"] = ck.step;
  header["config_hash"] = ck.config_hash;
  nlohmann::json tensors = describe("params", ck.params);
  if (ck.optimizer) {
    const AdamWState& s = *ck.optimizer;
    header["optimizer"] = {{"lr", s.hyper.lr},
                           {"beta1", s.hyper.beta1},
                           {"beta2", s.hyper.beta2},
                           {"weight_decay", s.hyper.weight_decay},
                           {"eps", s.hyper.eps},
                           {"step", s.step}};
    for (auto& e : describe("adam_m", s.m)) tensors.push_back(e);
    for (auto& e : describe("adam_v", s.v)) tensors.push_back(e);
  }
  header["tensors"] = tensors;
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("checkpoint: cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof kMagic);
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [_, t] : ck.params) write_array(out, t);
  if (ck.optimizer) {
    for (const auto& [_, t] : ck.optimizer->m) write_array(out, t);
    for (const auto& [_, t] : ck.optimizer->v) write_array(out, t);
  }
  if (!out) throw Error("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("checkpoint: cannot open " + path.string());
  char magic[sizeof kMagic] = {};
  in.read(magic, sizeof magic);
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw CorruptionError("checkpoint: bad magic in " + path.string(), -1);
  }
  const std::uint64_t length = read_u64(in);
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw CorruptionError("checkpoint: truncated header", -1);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("checkpoint: unreadable header: ") + e.what(), -1);
  }

  Checkpoint ck;
  ck.step = header.at("step").get<std::int64_t>();
  ck.config_hash = header.at("config_hash").get<std::string>();
  ParamSet m;
  ParamSet v;
  long record = 0;
  for (const auto& e : header.at("tensors")) {
    const auto section = e.at("section").get<std::string>();
    const auto name = e.at("path").get<std::string>();
    Tensor t = read_array(in, e.at("shape").get<std::vector<std::size_t>>(), record++);
    if (section == "params") {
      ck.params.add(name, std::move(t));
    } else if (section == "adam_m") {
      m.add(name, std::move(t));
    } else if (section == "adam_v") {
      v.add(name, std::move(t));
    } else {
      throw CorruptionError("checkpoint: unknown section " + section, record - 1);
    }
  }
  if (header.contains("optimizer")) {
    const auto& o = header["optimizer"];
    AdamWState s;
    s.hyper = {o.at("lr").get<double>(), o.at("beta1").get<double>(), o.at("beta2").get<double>(),
               o.at("weight_decay").get<double>(), o.at("eps").get<double>()};
    s.step = o.at("step").get<std::int64_t>();
    s.m = std::move(m);
    s.v = std::move(v);
    if (!ck.params.same_layout(s.m) || !ck.params.same_layout(s.v)) {
      throw CorruptionError("checkpoint: optimizer moments do not mirror parameters", -1);
    }
    ck.optimizer = std::move(s);
  }
  return ck;
}

}  // namespace ardpo::netcore
