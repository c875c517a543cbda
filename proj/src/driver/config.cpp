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

#include "ardpo/driver/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "ardpo/error.hpp"
#include "ardpo/netcore/hash.hpp"

namespace ardpo::driver {

namespace {

enum class Group { Location, Pretrain, Shared, Prefs, Dpo, Raft, Bok, Eval };

std::string key_error(std::string_view key, std::string_view value, std::string_view expected) {
  return "config: '" + std::string(key) + " = " + std::string(value) + "' is not " +
         std::string(expected);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key_error(key, v, "a number"));
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key_error(key, v, "a non-negative integer"));
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError(key_error(key, v, "a boolean"));
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

struct Field {
  std::string key;
  Group group;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field size_field(std::string key, Group g, T ExperimentConfig::*outer, std::size_t T::*inner) {
  return {key, g,
          [=](ExperimentConfig& c, std::string_view v) {
            (c.*outer).*inner = static_cast<std::size_t>(to_u64(key, v));
          },
          [=](const ExperimentConfig& c) { return fmt(static_cast<std::uint64_t>((c.*outer).*inner)); }};
}

template <typename T>
Field double_field(std::string key, Group g, T ExperimentConfig::*outer, double T::*inner) {
  return {key, g, [=](ExperimentConfig& c, std::string_view v) { (c.*outer).*inner = to_double(key, v); },
          [=](const ExperimentConfig& c) { return fmt((c.*outer).*inner); }};
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"seed", Group::Pretrain, [](C& c, std::string_view v) { c.seed = to_u64("seed", v); },
                 [](const C& c) { return fmt(c.seed); }});
    f.push_back({"out", Group::Location, [](C& c, std::string_view v) { c.out = std::string(v); },
                 [](const C& c) { return c.out.string(); }});

    f.push_back(size_field("model.token_dim", Group::Pretrain, &C::arch, &ardm::ArdmArch::token_dim));
    f.push_back(size_field("model.prompt_dim", Group::Pretrain, &C::arch, &ardm::ArdmArch::prompt_dim));
    f.push_back(size_field("model.hidden", Group::Pretrain, &C::arch, &ardm::ArdmArch::hidden));
    f.push_back(size_field("model.encoder_depth", Group::Pretrain, &C::arch, &ardm::ArdmArch::encoder_depth));
    f.push_back(size_field("model.head_depth", Group::Pretrain, &C::arch, &ardm::ArdmArch::head_depth));
    f.push_back(size_field("model.time_dim", Group::Pretrain, &C::arch, &ardm::ArdmArch::time_dim));
    f.push_back(size_field("model.position_dim", Group::Pretrain, &C::arch, &ardm::ArdmArch::position_dim));
    f.push_back(size_field("model.max_tokens", Group::Pretrain, &C::arch, &ardm::ArdmArch::max_tokens));
    f.push_back(double_field("model.cond_dropout", Group::Pretrain, &C::arch, &ardm::ArdmArch::cond_dropout));

    f.push_back({"process.decay", Group::Pretrain,
                 [](C& c, std::string_view v) { c.process_decay = to_double("process.decay", v); },
                 [](const C& c) { return fmt(c.process_decay); }});
    f.push_back({"process.noise_scale", Group::Pretrain,
                 [](C& c, std::string_view v) { c.process_noise = to_double("process.noise_scale", v); },
                 [](const C& c) { return fmt(c.process_noise); }});

    f.push_back({"reward", Group::Shared, [](C& c, std::string_view v) { c.reward = std::string(v); },
                 [](const C& c) { return c.reward; }});
    f.push_back({"sampler.steps", Group::Shared,
                 [](C& c, std::string_view v) {
                   c.sampler.num_steps = static_cast<int>(to_u64("sampler.steps", v));
                 },
                 [](const C& c) { return std::to_string(c.sampler.num_steps); }});
    f.push_back(double_field("sampler.eta", Group::Shared, &C::sampler, &schedule::SamplerConfig::eta));
    f.push_back(double_field("sampler.guidance", Group::Shared, &C::sampler, &schedule::SamplerConfig::guidance_w));

    f.push_back(size_field("pretrain.steps", Group::Pretrain, &C::pretrain, &PretrainSettings::steps));
    f.push_back(size_field("pretrain.batch", Group::Pretrain, &C::pretrain, &PretrainSettings::batch));
    f.push_back(size_field("pretrain.length", Group::Pretrain, &C::pretrain, &PretrainSettings::length));
    f.push_back(double_field("pretrain.lr", Group::Pretrain, &C::pretrain, &PretrainSettings::lr));

    f.push_back(size_field("prefs.k", Group::Prefs, &C::mining, &prefdata::MiningConfig::candidates));
    f.push_back(size_field("prefs.pairs", Group::Prefs, &C::mining, &prefdata::MiningConfig::pairs));
    f.push_back(size_field("prefs.length", Group::Prefs, &C::mining, &prefdata::MiningConfig::length));
    f.push_back(double_field("prefs.tie_epsilon", Group::Prefs, &C::mining, &prefdata::MiningConfig::tie_epsilon));

    f.push_back(double_field("dpo.beta", Group::Dpo, &C::dpo, &align::DpoConfig::beta));
    f.push_back({"dpo.d_norm", Group::Dpo,
                 [](C& c, std::string_view v) { c.dpo.d_norm = to_bool("dpo.d_norm", v); },
                 [](const C& c) { return fmt(c.dpo.d_norm); }});
    f.push_back(size_field("dpo.batch_pairs", Group::Dpo, &C::dpo, &align::DpoConfig::batch_pairs));
    f.push_back(size_field("dpo.accumulation", Group::Dpo, &C::dpo, &align::DpoConfig::accumulation));
    f.push_back(size_field("dpo.steps", Group::Dpo, &C::dpo, &align::DpoConfig::max_steps));
    f.push_back(size_field("dpo.eval_every", Group::Dpo, &C::dpo, &align::DpoConfig::eval_interval));
    f.push_back(double_field("dpo.kl_ceiling", Group::Dpo, &C::dpo, &align::DpoConfig::kl_ceiling));
    f.push_back(double_field("dpo.grad_clip", Group::Dpo, &C::dpo, &align::DpoConfig::grad_clip));
    auto hyper = [](std::string key, double netcore::AdamWHyper::*m) {
      return Field{key, Group::Dpo,
                   [=](C& c, std::string_view v) { c.dpo.optimizer.*m = to_double(key, v); },
                   [=](const C& c) { return fmt(c.dpo.optimizer.*m); }};
    };
    f.push_back(hyper("dpo.lr", &netcore::AdamWHyper::lr));
    f.push_back(hyper("dpo.beta1", &netcore::AdamWHyper::beta1));
    f.push_back(hyper("dpo.beta2", &netcore::AdamWHyper::beta2));
    f.push_back(hyper("dpo.weight_decay", &netcore::AdamWHyper::weight_decay));
    f.push_back(hyper("dpo.eps", &netcore::AdamWHyper::eps));

    f.push_back(size_field("eval.prompts", Group::Eval, &C::eval, &EvalSettings::prompts));
    f.push_back(size_field("eval.length", Group::Eval, &C::eval, &EvalSettings::length));
    f.push_back(size_field("eval.kl_samples", Group::Eval, &C::eval, &EvalSettings::kl_samples));

    f.push_back(size_field("raft.iters", Group::Raft, &C::raft, &RaftSettings::iterations));
    f.push_back(size_field("raft.k", Group::Raft, &C::raft, &RaftSettings::candidates));
    f.push_back(size_field("raft.prompts", Group::Raft, &C::raft, &RaftSettings::prompts));
    f.push_back(size_field("raft.sft_steps", Group::Raft, &C::raft, &RaftSettings::sft_steps));
    f.push_back(size_field("raft.batch", Group::Raft, &C::raft, &RaftSettings::batch));
    f.push_back(double_field("raft.lr", Group::Raft, &C::raft, &RaftSettings::lr));

    f.push_back({"bok.k", Group::Bok,
                 [](C& c, std::string_view v) {
                   c.bok.clear();
                   std::string_view rest = v;
                   while (!rest.empty()) {
                     const auto comma = rest.find(',');
                     c.bok.push_back(static_cast<std::size_t>(to_u64("bok.k", trim(rest.substr(0, comma)))));
                     if (comma == std::string_view::npos) break;
                     rest = rest.substr(comma + 1);
                   }
                 },
                 [](const C& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.bok.size(); ++i) s += (i ? "," : "") + std::to_string(c.bok[i]);
                   return s;
                 }});
    std::sort(f.begin(), f.end(), [](const Field& a, const Field& b) { return a.key < b.key; });
    return f;
  }();
  return table;
}

const Field& field(std::string_view key) {
  for (const Field& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("config: unknown key '" + std::string(key) + "'");
}

std::set<Group> stage_groups(Stage stage) {
  switch (stage) {
    case Stage::Pretrain:
      return {Group::Pretrain};
    case Stage::GenPrefs:
      return {Group::Pretrain, Group::Shared, Group::Prefs};
    case Stage::Dpo:
      return {Group::Pretrain, Group::Shared, Group::Prefs, Group::Dpo, Group::Eval};
    case Stage::Raft:
      return {Group::Pretrain, Group::Shared, Group::Raft, Group::Eval};
    case Stage::Bok:
      return {Group::Pretrain, Group::Shared, Group::Bok, Group::Eval};
    case Stage::Eval:
    case Stage::Report:
      break;
  }
  return {Group::Pretrain, Group::Shared, Group::Prefs, Group::Dpo,
          Group::Raft,     Group::Bok,    Group::Eval};
}

const char* const kBase = R"(# Desk-scale defaults shared by every task.
seed = 1
out = runs/base
model.token_dim = 2
model.prompt_dim = 2
model.hidden = 64
model.encoder_depth = 2
model.head_depth = 3
model.time_dim = 16
model.position_dim = 8
model.max_tokens = 16
model.cond_dropout = 0.1
process.decay = 0.8
process.noise_scale = 1
reward = variance:0
sampler.steps = 16
sampler.eta = 0
sampler.guidance = 2
pretrain.steps = 5000
pretrain.batch = 64
pretrain.length = 16
pretrain.lr = 0.001
prefs.k = 32
prefs.pairs = 4000
prefs.length = 16
prefs.tie_epsilon = 1e-9
dpo.beta = 200
dpo.d_norm = true
dpo.batch_pairs = 8
dpo.accumulation = 8
dpo.steps = 500
dpo.eval_every = 50
dpo.kl_ceiling = inf
dpo.grad_clip = 0
dpo.lr = 0.001
dpo.beta1 = 0.9
dpo.beta2 = 0.95
dpo.weight_decay = 0.01
dpo.eps = 1e-8
eval.prompts = 500
eval.length = 16
eval.kl_samples = 1
raft.iters = 3
raft.k = 32
raft.prompts = 256
raft.sft_steps = 10
raft.batch = 32
raft.lr = 0.0001
bok.k = 16,64
)";

const char* const kTaskA = R"(extends = base
out = runs/task-a
reward = variance:0
prefs.k = 32
dpo.beta = 200
)";

const char* const kTaskB = R"(extends = base
out = runs/task-b
reward = oracle_nll
prefs.k = 16
prefs.pairs = 8000
dpo.beta = 800
)";

const char* const kPaper = R"(extends = task-a
out = runs/paper
dpo.lr = 2e-6
dpo.beta1 = 0.9
dpo.beta2 = 0.95
dpo.weight_decay = 0.01
dpo.batch_pairs = 32
dpo.accumulation = 32
)";

const char* const kSmoke = R"(extends = task-a
out = runs/smoke
model.hidden = 32
pretrain.steps = 200
pretrain.batch = 16
prefs.pairs = 48
dpo.steps = 20
dpo.eval_every = 10
dpo.batch_pairs = 4
dpo.accumulation = 2
eval.prompts = 32
raft.prompts = 16
raft.k = 4
raft.sft_steps = 5
raft.batch = 8
bok.k = 2,4
)";

const char* preset_text(std::string_view name) {
  if (name == "base") return kBase;
  if (name == "task-a") return kTaskA;
  if (name == "task-b") return kTaskB;
  if (name == "paper") return kPaper;
  if (name == "smoke") return kSmoke;
  return nullptr;
}

ExperimentConfig parse_with_depth(std::string_view text, const std::filesystem::path& base_dir,
                                  int depth);

ExperimentConfig resolve_parent(std::string_view name, const std::filesystem::path& base_dir,
                                int depth) {
  if (depth > 16) throw ConfigError("config: 'extends' chain is too deep (cycle?)");
  if (const char* text = preset_text(name)) return parse_with_depth(text, ".", depth + 1);
  std::filesystem::path path(name);
  if (path.is_relative()) path = base_dir / path;
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_with_depth(ss.str(), path.parent_path(), depth + 1);
}

ExperimentConfig parse_with_depth(std::string_view text, const std::filesystem::path& base_dir,
                                  int depth) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string parent;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) + " has no '='");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!seen.insert(key).second) {
      throw ConfigError("config: key '" + key + "' appears twice");
    }
    if (key == "extends") {
      parent = value;
    } else {
      entries.emplace_back(key, value);
    }
  }
  ExperimentConfig cfg = parent.empty() ? ExperimentConfig{} : resolve_parent(parent, base_dir, depth);
  for (const auto& [k, v] : entries) cfg.set(k, v);
  return cfg;
}

}  // namespace

std::string_view stage_name(Stage s) noexcept {
  switch (s) {
    case Stage::Pretrain: return "pretrain";
    case Stage::GenPrefs: return "gen-prefs";
    case Stage::Dpo: return "dpo";
    case Stage::Raft: return "raft";
    case Stage::Bok: return "bok";
    case Stage::Eval: return "eval";
    case Stage::Report: return "report";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : {Stage::Pretrain, Stage::GenPrefs, Stage::Dpo, Stage::Raft, Stage::Bok, Stage::Eval,
                  Stage::Report}) {
    if (stage_name(s) == name) return s;
  }
  throw ConfigError("unknown stage '" + std::string(name) + "'");
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  field(key).set(*this, trim(value));
}

std::string ExperimentConfig::get(std::string_view key) const { return field(key).get(*this); }

std::vector<std::string> ExperimentConfig::keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.push_back(f.key);
  return out;
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(*this) + "\n";
  return out;
}

std::string ExperimentConfig::stage_hash(Stage stage) const {
  const std::set<Group> groups = stage_groups(stage);
  netcore::Fnv1a h;
  h.text(stage == Stage::Eval || stage == Stage::Report ? "all" : stage_name(stage));
  for (const Field& f : fields()) {
    if (groups.count(f.group)) h.text(f.key).text("=").text(f.get(*this)).text("\n");
  }
  return h.hex();
}

std::string ExperimentConfig::hash() const { return stage_hash(Stage::Report); }

void ExperimentConfig::validate() const {
  arch.validate();
  if (pretrain.length < 1 || pretrain.length > arch.max_tokens ||
      mining.length < 1 || mining.length > arch.max_tokens || eval.length < 1 ||
      eval.length > arch.max_tokens) {
    throw ConfigError("config: sequence lengths must lie in [1, model.max_tokens]");
  }
  if (pretrain.batch == 0) throw ConfigError("config: pretrain.batch must be positive");
  if (!(pretrain.lr > 0.0)) throw ConfigError("config: pretrain.lr must be positive");
  if (mining.candidates < 2) throw ConfigError("config: prefs.k must be at least 2");
  if (mining.pairs == 0) throw ConfigError("config: prefs.pairs must be positive");
  sampler.validate();
  dpo.validate();
  if (eval.prompts < 2 || eval.kl_samples == 0) {
    throw ConfigError("config: eval.prompts must be at least 2 and eval.kl_samples positive");
  }
  if (raft.candidates == 0 || raft.prompts == 0 || raft.batch == 0 || !(raft.lr > 0.0)) {
    throw ConfigError("config: raft settings must be positive");
  }
  for (std::size_t k : bok) {
    if (k == 0) throw ConfigError("config: bok.k entries must be positive");
  }
  (void)process();
  reward_spec().validate(arch.token_dim);
}

rewards::ArProcess ExperimentConfig::process() const {
  try {
    return rewards::ArProcess::default_process(arch.token_dim, arch.prompt_dim, process_decay,
                                               process_noise);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

rewards::RewardSpec ExperimentConfig::reward_spec() const {
  if (reward == "oracle_nll") return rewards::RewardSpec::oracle(process());
  if (reward.rfind("variance:", 0) == 0) {
    return rewards::RewardSpec::variance(
        static_cast<std::size_t>(to_u64("reward", std::string_view(reward).substr(9))));
  }
  throw ConfigError("config: reward must be 'variance:<k>' or 'oracle_nll'");
}

bool is_preset(std::string_view name) { return preset_text(name) != nullptr; }

std::vector<std::string> preset_names() { return {"base", "task-a", "task-b", "paper", "smoke"}; }

ExperimentConfig load_preset(std::string_view name) {
  const char* text = preset_text(name);
  if (!text) throw ConfigError("config: unknown preset '" + std::string(name) + "'");
  return parse_with_depth(text, ".", 0);
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  return parse_with_depth(text, base_dir, 0);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

ExperimentConfig resolve_config(const std::string& name_or_path) {
  if (is_preset(name_or_path)) return load_preset(name_or_path);
  return load_config(name_or_path);
}

}  // namespace ardpo::driver
