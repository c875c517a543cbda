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

#include "ardpo/driver/recipe.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "ardpo/align/baselines.hpp"
#include "ardpo/align/trainer.hpp"
#include "ardpo/ardm/pretrain.hpp"
#include "ardpo/driver/report.hpp"
#include "ardpo/error.hpp"
#include "ardpo/netcore/checkpoint.hpp"
#include "ardpo/netcore/hash.hpp"
#include "ardpo/prefdata/store.hpp"

namespace ardpo::driver {

namespace fs = std::filesystem;
using netcore::Rng;

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_stamped_csv(const fs::path& path, const std::string& hash, const std::string& header,
                       const std::vector<std::string>& rows) {
  std::ofstream out = open_out(path);
  out << "# config_hash=" << hash << '\n' << header << '\n';
  for (const std::string& r : rows) out << r << '\n';
}

void mark_done(const ExperimentConfig& cfg, Stage stage) {
  open_out(done_marker(cfg.out, stage)) << cfg.stage_hash(stage) << '\n';
}

void require_file(const fs::path& path, Stage producer) {
  if (!fs::exists(path)) {
    throw MissingArtifactError("missing " + path.string() + "; run the '" +
                               std::string(stage_name(producer)) + "' stage first");
  }
}

void require_done(const ExperimentConfig& cfg, Stage producer) {
  const fs::path marker = done_marker(cfg.out, producer);
  require_file(marker, producer);
  if (!stage_done(cfg, producer)) {
    throw ConfigError("the '" + std::string(stage_name(producer)) + "' artifacts in " +
                      cfg.out.string() + " come from a different configuration; rerun that stage");
  }
}

align::EvalConfig eval_config(const ExperimentConfig& cfg) {
  align::EvalConfig e;
  e.reward = cfg.reward_spec();
  e.sampling = {cfg.eval.prompts, cfg.eval.length, cfg.sampler};
  e.kl_samples_per_token = cfg.eval.kl_samples;
  e.rng = stream_rng(cfg, Stream::Eval);
  return e;
}

void save_model(const fs::path& path, const ardm::ArdmModel& model, std::int64_t step,
                const std::string& hash) {
  netcore::save_checkpoint(path, {model.params(), std::nullopt, step, hash});
}

void stage_pretrain(const ExperimentConfig& cfg, std::ostream& log) {
  std::vector<std::string> rows;
  const std::size_t every = std::max<std::size_t>(1, cfg.pretrain.steps / 50);
  const ardm::ArdmModel model = pretrain_model(cfg, [&](const PretrainProgress& p) {
    if (p.step % every == 0 || p.step + 1 == cfg.pretrain.steps) {
      rows.push_back(std::to_string(p.step) + "," + num(p.loss));
      log << "pretrain step " << p.step << " loss " << p.loss << '\n';
    }
  });
  const std::string hash = cfg.stage_hash(Stage::Pretrain);
  save_model(cfg.out / files::kBase, model, static_cast<std::int64_t>(cfg.pretrain.steps), hash);
  write_stamped_csv(cfg.out / files::kPretrainLog, hash, "step,loss", rows);
}

// The base model: an explicit checkpoint (no stamp check) or the run's own.
ardm::ArdmModel base_model(const ExperimentConfig& cfg, const RecipeOptions& options) {
  if (options.model) {
    require_file(*options.model, Stage::Pretrain);
    return ardm::ArdmModel(cfg.arch, netcore::load_checkpoint(*options.model).params);
  }
  require_done(cfg, Stage::Pretrain);
  return load_model(cfg, cfg.out / files::kBase, Stage::Pretrain);
}

void stage_gen_prefs(const ExperimentConfig& cfg, std::ostream& log, const RecipeOptions& options) {
  const ardm::ArdmModel base = base_model(cfg, options);
  const prefdata::PairStore store =
      prefdata::mine_pairs(base, cfg.reward_spec(), cfg.mining, cfg.sampler,
                           stream_rng(cfg, Stream::Mining), cfg.stage_hash(Stage::GenPrefs));
  prefdata::save_store(options.pairs_out ? *options.pairs_out : cfg.out / files::kPairs, store);
  log << "gen-prefs: " << store.pairs.size() << " pairs (K = " << cfg.mining.candidates << ")\n";
}

void stage_dpo(const ExperimentConfig& cfg, std::ostream& log, const RecipeOptions& options) {
  const ardm::ArdmModel base = base_model(cfg, options);
  prefdata::PairStore store;
  if (options.pairs) {
    require_file(*options.pairs, Stage::GenPrefs);
    store = prefdata::load_store(*options.pairs);
  } else {
    require_done(cfg, Stage::GenPrefs);
    store = prefdata::load_store(cfg.out / files::kPairs);
    if (store.header.config_hash != cfg.stage_hash(Stage::GenPrefs)) {
      throw ConfigError("pair store comes from a different configuration; rerun 'gen-prefs'");
    }
  }
  if (store.header.model_hash != netcore::param_fingerprint(base.params())) {
    throw ConfigError("pair store was mined from a different base model");
  }
  if (store.header.reward != cfg.reward_spec().describe()) {
    throw ConfigError("pair store reward '" + store.header.reward + "' differs from the config");
  }

  const std::string hash = cfg.stage_hash(Stage::Dpo);
  const fs::path dir = cfg.out / files::kDpoDir;
  fs::create_directories(dir);
  const ardm::ArdmModel ref = base.frozen_copy();
  const auto sink = [&](const align::TrainCheckpoint& ck, const align::MetricsRecord& m) {
    netcore::save_checkpoint(dir / ("step_" + std::to_string(ck.step) + ".ckpt"),
                             {ck.params, std::nullopt, static_cast<std::int64_t>(ck.step), hash});
    log << "dpo step " << m.step << " reward " << m.reward << " kl " << m.kl << " d+ "
        << m.delta_plus << " d- " << m.delta_minus << " acc " << m.margin_accuracy << '\n';
  };
  const align::DpoResult result =
      align::dpo_train(base, ref, store, cfg.dpo, eval_config(cfg), stream_rng(cfg, Stream::Dpo), sink);

  std::vector<std::string> rows;
  nlohmann::json records = nlohmann::json::array();
  for (const align::MetricsRecord& m : result.metrics) {
    rows.push_back(std::to_string(m.step) + "," + num(m.reward) + "," + num(m.kl) + "," +
                   num(m.delta_plus) + "," + num(m.delta_minus) + "," + num(m.margin_accuracy));
    records.push_back({{"step", m.step},
                       {"reward", m.reward},
                       {"reward_std_error", m.reward_std_error},
                       {"kl", m.kl},
                       {"delta_plus", m.delta_plus},
                       {"delta_minus", m.delta_minus},
                       {"margin_acc", m.margin_accuracy},
                       {"wall_clock", m.wall_clock}});
  }
  write_stamped_csv(cfg.out / files::kMetrics, hash, "step,reward,kl,delta_plus,delta_minus,margin_acc",
                    rows);
  nlohmann::json summary = {{"config_hash", hash},
                            {"beta", cfg.dpo.beta},
                            {"steps", cfg.dpo.max_steps},
                            {"pairs", store.pairs.size()},
                            {"records", records}};
  if (!result.metrics.empty()) {
    const align::MetricsRecord& sel = result.metrics[result.selected];
    summary["selected_step"] = sel.step;
    summary["selected_reward"] = sel.reward;
    summary["selected_kl"] = sel.kl;
    summary["base_reward"] = result.metrics.front().reward;
  }
  open_out(cfg.out / files::kDpoSummary) << summary.dump(2) << '\n';
  const ardm::ArdmModel selected = result.selected_model();
  const std::int64_t sel_step =
      result.metrics.empty() ? 0 : static_cast<std::int64_t>(result.metrics[result.selected].step);
  save_model(cfg.out / files::kDpoSelected, selected, sel_step, hash);
}

void stage_raft(const ExperimentConfig& cfg, std::ostream& log) {
  require_done(cfg, Stage::Pretrain);
  ardm::ArdmModel policy = load_model(cfg, cfg.out / files::kBase, Stage::Pretrain);
  align::RaftConfig rc;
  rc.candidates = cfg.raft.candidates;
  rc.sft_steps = cfg.raft.sft_steps;
  rc.batch = cfg.raft.batch;
  rc.optimizer = netcore::adamw_preset("pretrain");
  rc.optimizer.lr = cfg.raft.lr;
  rc.sampling = {cfg.raft.prompts, cfg.eval.length, cfg.sampler};
  const std::string hash = cfg.stage_hash(Stage::Raft);
  const Rng rng = stream_rng(cfg, Stream::Raft);
  for (std::size_t i = 1; i <= cfg.raft.iterations; ++i) {
    policy = align::raft_iteration(policy, cfg.reward_spec(), rc, rng.split(i));
    save_model(raft_checkpoint(cfg.out, i), policy, static_cast<std::int64_t>(i), hash);
    log << "raft iteration " << i << " done\n";
  }
}

void stage_bok(const ExperimentConfig& cfg, std::ostream& log) {
  require_done(cfg, Stage::Pretrain);
  const ardm::ArdmModel base = load_model(cfg, cfg.out / files::kBase, Stage::Pretrain);
  const align::EvalConfig e = eval_config(cfg);
  std::vector<std::string> rows;
  for (std::size_t k : cfg.bok) {
    const align::RewardStats s = align::best_of_k(base, e.reward, k, e.sampling, e.rng);
    rows.push_back(std::to_string(k) + "," + num(s.mean) + "," + num(s.std_error));
    log << "best-of-" << k << " reward " << s.mean << " +- " << s.std_error << '\n';
  }
  write_stamped_csv(cfg.out / files::kBok, cfg.stage_hash(Stage::Bok), "k,reward,std_error", rows);
}

void stage_eval(const ExperimentConfig& cfg, std::ostream& log) {
  require_done(cfg, Stage::Pretrain);
  const ardm::ArdmModel base = load_model(cfg, cfg.out / files::kBase, Stage::Pretrain);
  const ardm::ArdmModel ref = base.frozen_copy();
  const align::EvalConfig e = eval_config(cfg);
  std::vector<std::string> rows;
  auto add = [&](const std::string& name, const ardm::ArdmModel& model) {
    const align::Evaluation ev = align::evaluate_policy(model, ref, e);
    rows.push_back(name + "," + num(ev.reward.mean) + "," + num(ev.reward.std_error) + "," + num(ev.kl));
    log << "eval " << name << " reward " << ev.reward.mean << " kl " << ev.kl << '\n';
  };
  add("base", base);
  if (stage_done(cfg, Stage::Raft)) {
    for (std::size_t i = 1; i <= cfg.raft.iterations; ++i) {
      add("raft" + std::to_string(i), load_model(cfg, raft_checkpoint(cfg.out, i), Stage::Raft));
    }
  }
  if (stage_done(cfg, Stage::Dpo)) {
    add("dpo", load_model(cfg, cfg.out / files::kDpoSelected, Stage::Dpo));
  }
  write_stamped_csv(cfg.out / files::kEval, cfg.stage_hash(Stage::Eval), "name,reward,std_error,kl",
                    rows);
}

void stage_report(const ExperimentConfig& cfg, std::ostream& log) {
  const Report report = build_report(cfg);
  const std::string text = report_text(report);
  open_out(cfg.out / files::kTable) << text;
  open_out(cfg.out / files::kSummary) << report_json(report).dump(2) << '\n';
  log << text;
}

}  // namespace

Rng stream_rng(const ExperimentConfig& cfg, Stream s) {
  return Rng(cfg.seed).split(static_cast<std::uint64_t>(s));
}

fs::path raft_checkpoint(const fs::path& run, std::size_t iteration) {
  return run / files::kRaftDir / ("iter_" + std::to_string(iteration) + ".ckpt");
}

fs::path done_marker(const fs::path& run, Stage stage) {
  return run / (std::string(stage_name(stage)) + ".done");
}

bool stage_done(const ExperimentConfig& cfg, Stage stage) {
  std::ifstream in(done_marker(cfg.out, stage));
  std::string stamp;
  return in && std::getline(in, stamp) && stamp == cfg.stage_hash(stage);
}

ardm::ArdmModel pretrain_model(const ExperimentConfig& cfg,
                               const std::function<void(const PretrainProgress&)>& on_step) {
  cfg.validate();
  ardm::ArdmModel model = ardm::ArdmModel::init(cfg.arch, stream_rng(cfg, Stream::ModelInit));
  const rewards::ArProcess proc = cfg.process();
  netcore::AdamWHyper hyper = netcore::adamw_preset("pretrain");
  hyper.lr = cfg.pretrain.lr;
  netcore::AdamWState state = netcore::AdamWState::init(model.params(), hyper);
  const Rng data = stream_rng(cfg, Stream::PretrainData);
  const Rng noise = stream_rng(cfg, Stream::PretrainLoss);
  std::vector<ardm::Sequence> batch(cfg.pretrain.batch);
  for (std::size_t step = 0; step < cfg.pretrain.steps; ++step) {
    for (std::size_t i = 0; i < cfg.pretrain.batch; ++i) {
      const Rng r = data.split(step).split(i);
      netcore::Tensor prompt = netcore::Tensor::vector(cfg.arch.prompt_dim);
      for (std::size_t j = 0; j < prompt.size(); ++j) prompt[j] = r.split(0).normal_at(j);
      batch[i] = rewards::gen_sequence(proc, prompt, cfg.pretrain.length, r.split(1));
    }
    const ardm::LossAndGrad lg = ardm::pretrain_loss(model, batch, noise.split(step));
    if (on_step) on_step({step, lg.loss});
    netcore::adamw_step(model.mutable_params(), lg.grads, state);
  }
  return model;
}

ardm::ArdmModel load_model(const ExperimentConfig& cfg, const fs::path& path, Stage producer) {
  require_file(path, producer);
  netcore::Checkpoint ck = netcore::load_checkpoint(path);
  if (ck.config_hash != cfg.stage_hash(producer)) {
    throw ConfigError(path.string() + " was written under a different configuration; rerun the '" +
                      std::string(stage_name(producer)) + "' stage");
  }
  return ardm::ArdmModel(cfg.arch, std::move(ck.params));
}

void run_stage(const ExperimentConfig& cfg, Stage stage, std::ostream& log,
               const RecipeOptions& options) {
  cfg.validate();
  fs::create_directories(cfg.out);
  open_out(cfg.out / files::kConfig) << "# config_hash=" << cfg.hash() << '\n' << cfg.to_text();
  const bool cacheable = (stage == Stage::Pretrain || stage == Stage::GenPrefs) && !options.model &&
                         !options.pairs_out;
  if (cacheable && !options.force && stage_done(cfg, stage)) {
    log << stage_name(stage) << ": up to date\n";
    return;
  }
  fs::remove(done_marker(cfg.out, stage));
  switch (stage) {
    case Stage::Pretrain: stage_pretrain(cfg, log); break;
    case Stage::GenPrefs: stage_gen_prefs(cfg, log, options); break;
    case Stage::Dpo: stage_dpo(cfg, log, options); break;
    case Stage::Raft: stage_raft(cfg, log); break;
    case Stage::Bok: stage_bok(cfg, log); break;
    case Stage::Eval: stage_eval(cfg, log); break;
    case Stage::Report: stage_report(cfg, log); break;
  }
  // A store written elsewhere does not make the run directory's gen-prefs current.
  if (!(stage == Stage::GenPrefs && (options.model || options.pairs_out))) mark_done(cfg, stage);
}

void run_all(const ExperimentConfig& cfg, std::ostream& log, const RecipeOptions& options) {
  for (Stage s : {Stage::Pretrain, Stage::GenPrefs, Stage::Dpo, Stage::Raft, Stage::Bok, Stage::Eval,
                  Stage::Report}) {
    run_stage(cfg, s, log, options);
  }
}

}  // namespace ardpo::driver
