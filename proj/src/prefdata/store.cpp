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

#include "ardpo/prefdata/store.hpp"

#include <bit>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ardpo/ardm/io.hpp"
#include "ardpo/error.hpp"
#include "ardpo/netcore/hash.hpp"

namespace ardpo::prefdata {

namespace {

using nlohmann::json;

json pair_record(const PreferencePair& p, std::size_t index, const std::string& reward) {
  return {{"index", index},
          {"reward", reward},
          {"prompt", ardm::vector_to_hex(p.prompt)},
          {"winner", ardm::matrix_to_hex(p.winner.tokens)},
          {"loser", ardm::matrix_to_hex(p.loser.tokens)},
          {"r_w", ardm::hex_double(p.reward_winner)},
          {"r_l", ardm::hex_double(p.reward_loser)},
          {"model_hash", p.model_hash},
          {"seed", p.seed}};
}

PreferencePair parse_record(const json& j, std::size_t index, const StoreHeader& header) {
  if (j.at("index").get<std::size_t>() != index) {
    throw CorruptionError("pair store: record " + std::to_string(index) + " is out of order",
                          static_cast<long>(index));
  }
  if (j.at("reward").get<std::string>() != header.reward) {
    throw CorruptionError("pair store: record " + std::to_string(index) +
                              " reward spec does not match the header",
                          static_cast<long>(index));
  }
  PreferencePair p;
  p.prompt = ardm::vector_from_hex(j.at("prompt"));
  p.winner = {p.prompt, ardm::matrix_from_hex(j.at("winner"))};
  p.loser = {p.prompt, ardm::matrix_from_hex(j.at("loser"))};
  p.reward_winner = ardm::parse_hex_double(j.at("r_w").get<std::string>());
  p.reward_loser = ardm::parse_hex_double(j.at("r_l").get<std::string>());
  p.model_hash = j.at("model_hash").get<std::string>();
  p.seed = j.at("seed").get<std::uint64_t>();
  if (p.model_hash != header.model_hash) {
    throw CorruptionError("pair store: record " + std::to_string(index) +
                              " comes from a different model than the header",
                          static_cast<long>(index));
  }
  p.validate();
  return p;
}

}  // namespace

bool operator==(const PairStore& a, const PairStore& b) {
  if (a.header.reward != b.header.reward || a.header.candidates != b.header.candidates ||
      a.header.model_hash != b.header.model_hash || a.header.config_hash != b.header.config_hash ||
      a.pairs.size() != b.pairs.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    const PreferencePair& x = a.pairs[i];
    const PreferencePair& y = b.pairs[i];
    if (!(x.prompt == y.prompt && x.winner.tokens == y.winner.tokens &&
          x.loser.tokens == y.loser.tokens && x.winner.prompt == y.winner.prompt &&
          x.loser.prompt == y.loser.prompt &&
          std::bit_cast<std::uint64_t>(x.reward_winner) == std::bit_cast<std::uint64_t>(y.reward_winner) &&
          std::bit_cast<std::uint64_t>(x.reward_loser) == std::bit_cast<std::uint64_t>(y.reward_loser) &&
          x.model_hash == y.model_hash && x.seed == y.seed)) {
      return false;
    }
  }
  return true;
}

void save_store(const std::filesystem::path& path, const PairStore& store) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("pair store: cannot open " + path.string());
  const json header = {{"format", "ardpo-pairs"},
                       {"version", 1},
                       {"reward", store.header.reward},
                       {"k", store.header.candidates},
                       {"model_hash", store.header.model_hash},
                       {"config_hash", store.header.config_hash},
                       {"count", store.pairs.size()}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < store.pairs.size(); ++i) {
    out << pair_record(store.pairs[i], i, store.header.reward).dump() << '\n';
  }
  if (!out) throw Error("pair store: write failed for " + path.string());
}

PairStore load_store(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("pair store: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw CorruptionError("pair store: missing header", -1);

  PairStore store;
  std::size_t count = 0;
  try {
    const json h = json::parse(line);
    if (h.at("format").get<std::string>() != "ardpo-pairs") {
      throw CorruptionError("pair store: unknown format", -1);
    }
    store.header.reward = h.at("reward").get<std::string>();
    store.header.candidates = h.at("k").get<std::size_t>();
    store.header.model_hash = h.at("model_hash").get<std::string>();
    store.header.config_hash = h.at("config_hash").get<std::string>();
    count = h.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("pair store: unreadable header: ") + e.what(), -1);
  }

  store.pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) {
      throw CorruptionError("pair store: record " + std::to_string(i) + " of " +
                                std::to_string(count) + " is missing (truncated file)",
                            static_cast<long>(i));
    }
    try {
      store.pairs.push_back(parse_record(json::parse(line), i, store.header));
    } catch (const CorruptionError&) {
      throw;
    } catch (const std::exception& e) {
      throw CorruptionError("pair store: record " + std::to_string(i) + " is corrupt: " + e.what(),
                            static_cast<long>(i));
    }
  }
  while (std::getline(in, line)) {
    if (!line.empty()) {
      throw CorruptionError("pair store: more records than the header count",
                            static_cast<long>(count));
    }
  }
  return store;
}

PairStore store_roundtrip(const PairStore& store, const std::filesystem::path& path) {
  save_store(path, store);
  return load_store(path);
}

PairStore mine_pairs(const ardm::ArdmModel& model, const rewards::RewardSpec& spec,
                     const MiningConfig& cfg, const schedule::SamplerConfig& sampler,
                     const Rng& master, const std::string& config_hash) {
  spec.validate(model.arch().token_dim);
  PairStore store;
  store.header = {spec.describe(), cfg.candidates, netcore::param_fingerprint(model.params()),
                  config_hash};
  store.pairs.reserve(cfg.pairs);
  const ardm::CachedArdm denoiser(model);
  std::size_t skips = 0;
  for (std::size_t index = 0; store.pairs.size() < cfg.pairs; ++index) {
    const Tensor prompt = draw_prompt(master, index, model.arch().prompt_dim);
    const Rng rng = master.split(index).split(1);
    auto candidates =
        generate_candidates(denoiser, prompt, cfg.candidates, cfg.length, sampler, rng);
    const auto sel = select_pair(candidates, spec, cfg.tie_epsilon);
    if (!sel) {
      if (++skips > cfg.max_consecutive_skips) {
        throw Error("mine_pairs: too many degenerate prompts in a row");
      }
      continue;
    }
    skips = 0;
    PreferencePair p;
    p.prompt = prompt;
    p.winner = std::move(candidates[sel->winner]);
    p.loser = std::move(candidates[sel->loser]);
    p.reward_winner = sel->reward_winner;
    p.reward_loser = sel->reward_loser;
    p.model_hash = store.header.model_hash;
    p.seed = index;
    store.pairs.push_back(std::move(p));
  }
  return store;
}

}  // namespace ardpo::prefdata
