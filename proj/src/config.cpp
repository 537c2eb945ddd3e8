// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/config.hpp"

#include <fstream>

#include "echoscout/common.hpp"
#include "echoscout/io.hpp"
#include "echoscout/rng.hpp"

namespace echoscout {

json EpisodeConfig::to_json() const {
    return {{"horizon", horizon},
            {"budget", budget},
            {"eval_queries", eval_queries},
            {"scan_rays", scan_rays},
            {"scan_range", scan_range}};
}

EpisodeConfig EpisodeConfig::from_json(const json& j) {
    require_keys(j, {"horizon", "budget", "eval_queries", "scan_rays", "scan_range"}, "episode");
    EpisodeConfig c;
    if (j.contains("horizon")) c.horizon = j["horizon"].get<int>();
    if (j.contains("budget")) c.budget = j["budget"].get<int>();
    if (j.contains("eval_queries")) c.eval_queries = j["eval_queries"].get<int>();
    if (j.contains("scan_rays")) c.scan_rays = j["scan_rays"].get<int>();
    if (j.contains("scan_range")) c.scan_range = j["scan_range"].get<double>();
    return c;
}

void validate_episode(const EpisodeConfig& cfg) {
    if (cfg.horizon < 1) throw ConfigInvalid("episode horizon must be >= 1");
    if (cfg.budget < 1 || cfg.budget > cfg.horizon)
        throw ConfigInvalid("episode budget must be in [1, horizon]");
    if (cfg.eval_queries < 1) throw ConfigInvalid("episode eval_queries must be >= 1");
    if (cfg.scan_rays < 4) throw ConfigInvalid("episode scan_rays must be >= 4");
    if (cfg.scan_range <= 0.0) throw ConfigInvalid("episode scan_range must be > 0");
}

std::string to_string(AcousticRewardMode mode) {
    return mode == AcousticRewardMode::kGlobal ? "global" : "local";
}

AcousticRewardMode acoustic_mode_from_string(const std::string& s) {
    if (s == "global") return AcousticRewardMode::kGlobal;
    if (s == "local") return AcousticRewardMode::kLocal;
    throw ConfigInvalid("unknown acoustic reward mode: " + s);
}

json TrainerConfig::to_json() const {
    return {{"num_envs", num_envs},
            {"train_worlds", train_worlds},
            {"val_worlds", val_worlds},
            {"train_eval_queries", train_eval_queries},
            {"val_every", val_every},
            {"val_episodes", val_episodes},
            {"reward_mode", reward_mode}};
}

TrainerConfig TrainerConfig::from_json(const json& j) {
    require_keys(j,
                 {"num_envs", "train_worlds", "val_worlds", "train_eval_queries", "val_every",
                  "val_episodes", "reward_mode"},
                 "trainer");
    TrainerConfig c;
    if (j.contains("num_envs")) c.num_envs = j["num_envs"].get<int>();
    if (j.contains("train_worlds")) c.train_worlds = j["train_worlds"].get<int>();
    if (j.contains("val_worlds")) c.val_worlds = j["val_worlds"].get<int>();
    if (j.contains("train_eval_queries"))
        c.train_eval_queries = j["train_eval_queries"].get<int>();
    if (j.contains("val_every")) c.val_every = j["val_every"].get<int>();
    if (j.contains("val_episodes")) c.val_episodes = j["val_episodes"].get<int>();
    if (j.contains("reward_mode")) c.reward_mode = j["reward_mode"].get<std::string>();
    return c;
}

void validate_trainer(const TrainerConfig& cfg) {
    if (cfg.num_envs < 1) throw ConfigInvalid("trainer num_envs must be >= 1");
    if (cfg.train_worlds < 1) throw ConfigInvalid("trainer train_worlds must be >= 1");
    if (cfg.val_worlds < 1) throw ConfigInvalid("trainer val_worlds must be >= 1");
    if (cfg.train_eval_queries < 1)
        throw ConfigInvalid("trainer train_eval_queries must be >= 1");
    if (cfg.val_every < 1) throw ConfigInvalid("trainer val_every must be >= 1");
    if (cfg.val_episodes < 1) throw ConfigInvalid("trainer val_episodes must be >= 1");
    realize_reward_mode(cfg.reward_mode, RewardWeights{});
}

std::pair<RewardWeights, AcousticRewardMode> realize_reward_mode(const std::string& mode,
                                                                 const RewardWeights& base) {
    RewardWeights w = base;
    if (mode == "full") return {w, AcousticRewardMode::kGlobal};
    if (mode == "local") return {w, AcousticRewardMode::kLocal};
    if (mode == "coverage") {
        w.lambda_A = 0.0;
        w.lambda_N = 0.0;
        return {w, AcousticRewardMode::kGlobal};
    }
    if (mode == "novelty") {
        w.lambda_A = 0.0;
        w.lambda_V = 0.0;
        return {w, AcousticRewardMode::kGlobal};
    }
    if (mode == "exploration") {
        w.lambda_A = 0.0;
        return {w, AcousticRewardMode::kGlobal};
    }
    throw ConfigInvalid("unknown reward mode: " + mode);
}

json AgentSpec::to_json() const {
    return {{"name", name}, {"kind", kind}, {"checkpoint", checkpoint}};
}

AgentSpec AgentSpec::from_json(const json& j) {
    require_keys(j, {"name", "kind", "checkpoint"}, "agent spec");
    AgentSpec s;
    if (j.contains("name")) s.name = j["name"].get<std::string>();
    if (j.contains("kind")) s.kind = j["kind"].get<std::string>();
    if (j.contains("checkpoint")) s.checkpoint = j["checkpoint"].get<std::string>();
    if (s.kind.empty()) throw ConfigInvalid("agent spec needs a kind");
    if (s.name.empty()) s.name = s.kind;
    return s;
}

json SuiteConfig::to_json() const {
    json arr = json::array();
    for (const auto& a : agents) arr.push_back(a.to_json());
    return {{"agents", arr}, {"test_worlds", test_worlds}, {"episode_seeds", episode_seeds}};
}

SuiteConfig SuiteConfig::from_json(const json& j) {
    require_keys(j, {"agents", "test_worlds", "episode_seeds"}, "suite");
    SuiteConfig c;
    if (j.contains("agents")) {
        c.agents.clear();
        for (const auto& a : j["agents"]) c.agents.push_back(AgentSpec::from_json(a));
    }
    if (j.contains("test_worlds")) c.test_worlds = j["test_worlds"].get<int>();
    if (j.contains("episode_seeds")) c.episode_seeds = j["episode_seeds"].get<int>();
    return c;
}

void validate_suite(const SuiteConfig& cfg) {
    if (cfg.test_worlds < 1) throw ConfigInvalid("suite test_worlds must be >= 1");
    if (cfg.episode_seeds < 1) throw ConfigInvalid("suite episode_seeds must be >= 1");
    static const std::set<std::string> kinds{"random",        "forward",
                                             "greedy",        "policy",
                                             "policy-argmax", "uniform-schedule"};
    for (const auto& a : cfg.agents) {
        if (!kinds.count(a.kind)) throw ConfigInvalid("unknown agent kind: " + a.kind);
        const bool needs_ckpt =
            a.kind == "policy" || a.kind == "policy-argmax" || a.kind == "uniform-schedule";
        if (needs_ckpt && a.checkpoint.empty())
            throw ConfigInvalid("agent '" + a.name + "' needs a checkpoint");
    }
}

RunConfig::RunConfig() {
    world.material_palette = default_palette();
    suite.agents = {{"random", "random", ""}, {"forward", "forward", ""}, {"greedy", "greedy", ""}};
}

json RunConfig::to_json() const {
    return {{"master_seed", master_seed},
            {"world", spec_to_json(world)},
            {"acoustics", acoustics_to_json(acoustics)},
            {"predictor", predictor_to_json(predictor)},
            {"noise", noise_to_json(noise)},
            {"rewards", rewards.to_json()},
            {"policy", policy.to_json()},
            {"train", train.to_json()},
            {"trainer", trainer.to_json()},
            {"episode", episode.to_json()},
            {"suite", suite.to_json()}};
}

RunConfig RunConfig::from_json(const json& j) {
    require_keys(j,
                 {"master_seed", "world", "acoustics", "predictor", "noise", "rewards", "policy",
                  "train", "trainer", "episode", "suite"},
                 "run config");
    RunConfig c;
    if (j.contains("master_seed")) c.master_seed = j["master_seed"].get<uint64_t>();
    if (j.contains("world")) c.world = spec_from_json(j["world"]);
    if (j.contains("acoustics")) c.acoustics = acoustics_from_json(j["acoustics"]);
    if (j.contains("predictor")) c.predictor = predictor_from_json(j["predictor"]);
    if (j.contains("noise")) c.noise = noise_from_json(j["noise"]);
    if (j.contains("rewards")) c.rewards = RewardWeights::from_json(j["rewards"]);
    if (j.contains("policy")) c.policy = PolicyConfig::from_json(j["policy"]);
    if (j.contains("train")) c.train = TrainConfig::from_json(j["train"]);
    if (j.contains("trainer")) c.trainer = TrainerConfig::from_json(j["trainer"]);
    if (j.contains("episode")) c.episode = EpisodeConfig::from_json(j["episode"]);
    if (j.contains("suite")) c.suite = SuiteConfig::from_json(j["suite"]);
    return c;
}

void validate_run(const RunConfig& cfg) {
    validate_spec(cfg.world);
    validate_acoustics(cfg.acoustics);
    validate_predictor(cfg.predictor);
    validate_noise(cfg.noise);
    validate_weights(cfg.rewards);
    validate_policy_config(cfg.policy);
    validate_train_config(cfg.train);
    validate_trainer(cfg.trainer);
    validate_episode(cfg.episode);
    validate_suite(cfg.suite);
}

RunConfig load_run_config(const std::filesystem::path& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigInvalid("cannot parse " + path.string() + ": " + e.what());
    }
    auto cfg = RunConfig::from_json(j);
    validate_run(cfg);
    return cfg;
}

uint64_t config_hash(const json& j) { return fnv1a(j.dump()); }

uint64_t split_world_seed(uint64_t master, const std::string& split, int index) {
    return derive_seed(derive_seed(master, "worlds"), split, static_cast<uint64_t>(index));
}

}  // namespace echoscout
