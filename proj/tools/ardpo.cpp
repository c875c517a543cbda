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

// Command-line driver: ardpo <stage> [--config preset|file] [--set key=value]...

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ardpo/driver/config.hpp"
#include "ardpo/driver/recipe.hpp"
#include "ardpo/error.hpp"

namespace {

using ardpo::driver::ExperimentConfig;
using ardpo::driver::RecipeOptions;
using ardpo::driver::Stage;

struct Common {
  std::string config = "task-a";
  std::vector<std::string> overrides;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

// Flags that map one-to-one onto config keys.
struct KeyFlag {
  std::string key;
  std::optional<std::string> value;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "preset name or config file")->capture_default_str();
  app->add_option("-s,--set", c.overrides, "override a config key (key=value)");
  app->add_option("--out", c.out, "run directory");
  app->add_option("--seed", c.seed, "master seed");
  app->add_flag("--force", c.force, "rerun stages that are already up to date");
}

void add_key_flag(CLI::App* app, std::vector<KeyFlag>& flags, const std::string& flag,
                  const std::string& key, const std::string& help) {
  flags.push_back({key, std::nullopt});
  app->add_option(flag, flags.back().value, help + " (" + key + ")");
}

std::string reward_value(const std::string& v) {
  if (v == "task-a") return "variance:0";
  if (v == "task-b") return "oracle_nll";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Autoregressive diffusion models with preference alignment on synthetic tasks"};
  app.require_subcommand(1);

  Common common;
  std::optional<std::string> model_path;
  std::optional<std::string> pairs_path;
  std::optional<std::string> reward;
  bool show_config = false;
  // Reserved up front; KeyFlag addresses are bound into CLI11 options.
  std::vector<KeyFlag> keys;
  keys.reserve(32);

  struct Sub {
    CLI::App* app;
    std::optional<Stage> stage;
  };
  std::vector<Sub> subs;
  auto sub = [&](const std::string& name, const std::string& help, std::optional<Stage> stage) {
    CLI::App* s = app.add_subcommand(name, help);
    add_common(s, common);
    subs.push_back({s, stage});
    return s;
  };

  sub("pretrain", "train the base model on the autoregressive source", Stage::Pretrain);

  CLI::App* gen = sub("gen-prefs", "mine best/worst preference pairs from the base model", Stage::GenPrefs);
  gen->add_option("--model", model_path, "base checkpoint (default: <out>/base.ckpt)");
  gen->add_option("--reward", reward, "task-a | task-b | variance:<k> | oracle_nll");
  add_key_flag(gen, keys, "--k", "prefs.k", "candidates per prompt");
  add_key_flag(gen, keys, "--pairs", "prefs.pairs", "number of pairs");
  gen->remove_option(gen->get_option("--out"));
  gen->add_option("--out", common.out, "run directory, or a .jsonl path for the pair store");

  CLI::App* dpo = sub("dpo", "align the base model on the pair store", Stage::Dpo);
  dpo->add_option("--pairs", pairs_path, "pair store (default: <out>/pairs.jsonl)");
  dpo->add_option("--model", model_path, "base checkpoint (default: <out>/base.ckpt)");
  add_key_flag(dpo, keys, "--beta", "dpo.beta", "preference temperature");
  add_key_flag(dpo, keys, "--steps", "dpo.steps", "optimizer steps");
  add_key_flag(dpo, keys, "--eval-every", "dpo.eval_every", "evaluation interval");

  CLI::App* raft = sub("raft", "reward-ranked fine-tuning baseline", Stage::Raft);
  add_key_flag(raft, keys, "--iters", "raft.iters", "iterations");
  add_key_flag(raft, keys, "--k", "raft.k", "candidates per prompt");

  CLI::App* bok = sub("bok", "best-of-K baseline", Stage::Bok);
  add_key_flag(bok, keys, "--k", "bok.k", "K values, comma separated");

  sub("eval", "reward and KL metric of every trained model", Stage::Eval);
  sub("report", "summary table of a run", Stage::Report);
  sub("all", "run every stage in order", std::nullopt);
  CLI::App* cfg_cmd = app.add_subcommand("config", "print the resolved configuration and its hash");
  add_common(cfg_cmd, common);
  cfg_cmd->callback([&] { show_config = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    ExperimentConfig cfg = ardpo::driver::resolve_config(common.config);
    for (const std::string& kv : common.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ardpo::ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const KeyFlag& k : keys) {
      if (k.value) cfg.set(k.key, *k.value);
    }
    if (reward) cfg.set("reward", reward_value(*reward));
    if (common.seed) cfg.seed = *common.seed;

    RecipeOptions options;
    options.force = common.force;
    if (model_path) options.model = *model_path;
    if (pairs_path) options.pairs = *pairs_path;
    if (common.out) {
      const std::filesystem::path out(*common.out);
      if (out.extension() == ".jsonl") {
        options.pairs_out = out;
      } else {
        cfg.out = out;
      }
    }

    if (show_config) {
      std::cout << "# config_hash=" << cfg.hash() << '\n' << cfg.to_text();
      return 0;
    }
    cfg.validate();
    for (const Sub& s : subs) {
      if (!s.app->parsed()) continue;
      if (s.stage) {
        ardpo::driver::run_stage(cfg, *s.stage, std::cout, options);
      } else {
        ardpo::driver::run_all(cfg, std::cout, options);
      }
    }
  } catch (const ardpo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
