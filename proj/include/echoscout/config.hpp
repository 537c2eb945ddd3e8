// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "echoscout/acoustics.hpp"
#include "echoscout/embodiment.hpp"
#include "echoscout/policy.hpp"
#include "echoscout/renderer.hpp"
#include "echoscout/rewards.hpp"
#include "echoscout/world.hpp"

namespace echoscout {

struct EpisodeConfig {
    int horizon = 200;      // steps per episode
    int budget = 20;        // echo samples per episode
    int eval_queries = 60;  // query pairs scoring a context
    int scan_rays = 16;
    double scan_range = 10.0;  // m

    json to_json() const;
    static EpisodeConfig from_json(const json& j);
};

void validate_episode(const EpisodeConfig& cfg);

// global: gain of the query-set error; local: gain at the sampled pose only
enum class AcousticRewardMode { kGlobal, kLocal };

std::string to_string(AcousticRewardMode mode);
AcousticRewardMode acoustic_mode_from_string(const std::string& s);

struct TrainerConfig {
    int num_envs = 4;
    int train_worlds = 40;
    int val_worlds = 8;
    int train_eval_queries = 8;  // smaller query set while training
    int val_every = 25;          // updates between validation passes
    int val_episodes = 8;
    std::string reward_mode = "full";  // full|coverage|novelty|exploration|local

    json to_json() const;
    static TrainerConfig from_json(const json& j);
};

void validate_trainer(const TrainerConfig& cfg);

// weight vector and acoustic mode for a named reward ablation
std::pair<RewardWeights, AcousticRewardMode> realize_reward_mode(const std::string& mode,
                                                                 const RewardWeights& base);

// one evaluated agent: scripted kinds need no checkpoint
struct AgentSpec {
    std::string name;
    std::string kind;  // random|forward|greedy|policy|policy-argmax|uniform-schedule
    std::string checkpoint;

    json to_json() const;
    static AgentSpec from_json(const json& j);
};

struct SuiteConfig {
    std::vector<AgentSpec> agents;
    int test_worlds = 10;
    int episode_seeds = 3;

    json to_json() const;
    static SuiteConfig from_json(const json& j);
};

void validate_suite(const SuiteConfig& cfg);

struct RunConfig {
    uint64_t master_seed = 0;
    WorldSpec world;  // seed field is a template; streams derive per-split seeds
    AcousticsConfig acoustics;
    PredictorConfig predictor;
    NoiseConfig noise;
    RewardWeights rewards;
    PolicyConfig policy;
    TrainConfig train;
    TrainerConfig trainer;
    EpisodeConfig episode;
    SuiteConfig suite;

    RunConfig();

    json to_json() const;
    static RunConfig from_json(const json& j);
};

void validate_run(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);
uint64_t config_hash(const json& j);

// world seeds for the train/val/test splits
uint64_t split_world_seed(uint64_t master, const std::string& split, int index);

}  // namespace echoscout
