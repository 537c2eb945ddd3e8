// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "echoscout/baselines.hpp"
#include "echoscout/config.hpp"

namespace echoscout {

// free cell and heading drawn from the episode stream; identical for every
// agent evaluated under the same seed
AgentPose spawn_pose(const World& world, uint64_t episode_seed);

struct StepRecord {
    int t = 0;
    int action = 0;
    bool blocked = false;
    bool sampled = false;
    AgentPose pose;  // post-action
    RewardBreakdown reward;
    double coverage = 0.0;  // believed free area, m^2
    int64_t visit_count = 0;
    double error = std::numeric_limits<double>::quiet_NaN();  // L^R after the step
};

struct EpisodeResult {
    std::vector<StepRecord> steps;
    ContextSet context;
    OccupancyMap map;                    // believed map at episode end
    std::vector<Vec2> sample_positions;  // believed
    AgentPose spawn;
    double initial_error = std::numeric_limits<double>::quiet_NaN();
    double final_error = std::numeric_limits<double>::quiet_NaN();
    double total_reward = 0.0;
    int samples_used = 0;
    int64_t evaluator_calls = 0;  // made by this episode
};

struct EpisodeOptions {
    EpisodeConfig episode;
    RewardWeights rewards;
    AcousticRewardMode acoustic_mode = AcousticRewardMode::kGlobal;
    NoiseConfig noise;
    PredictorConfig predictor;
    AcousticsConfig acoustics;
};

// Steps the believed-state loop: act, move, scan from the true pose, update
// the believed map, then capture/score an echo on sample steps. The evaluator
// runs only when a sample lands (the error trace is piecewise constant), and
// may be null whenever the reward does not read it; the error trace is NaN
// then. A recorder captures the tracing agent's rollout for PPO.
EpisodeResult run_episode(const World& world, Agent& agent, const EpisodeOptions& opt,
                          uint64_t episode_seed, ModelEvaluator* evaluator,
                          RolloutSeq* recorder = nullptr);

void write_episode_jsonl(const std::filesystem::path& path, const EpisodeResult& result,
                         const json& header);
std::vector<json> read_jsonl(const std::filesystem::path& path);

struct TrainResult {
    int updates_run = 0;
    double best_val_error = std::numeric_limits<double>::quiet_NaN();
    std::filesystem::path best_checkpoint;
    std::filesystem::path latest_checkpoint;
    std::filesystem::path metrics_csv;
};

// PPO over full-episode rollouts; resumable from <out_dir>/ckpt_latest.bin.
// Worker count never changes results: env slots are index-keyed.
TrainResult train_policy(const RunConfig& cfg, const std::filesystem::path& out_dir, int workers,
                         bool resume);

std::unique_ptr<Agent> make_agent(const AgentSpec& spec);

struct SuiteCell {
    std::string agent;
    int world_index = 0;
    uint64_t world_seed = 0;
    uint64_t episode_seed = 0;
    double initial_error = std::numeric_limits<double>::quiet_NaN();
    double final_error = std::numeric_limits<double>::quiet_NaN();
    double coverage = 0.0;
    double total_reward = 0.0;
    int samples_used = 0;
    bool failed = false;
    std::string failure;
    std::vector<double> error_curve;  // L^R after each step
};

struct SuiteResult {
    std::vector<SuiteCell> cells;
    json summary;  // per-agent aggregates
};

// agents x test worlds x episode seeds; every cell failure is recorded rather
// than aborting the sweep
SuiteResult evaluate_suite(const RunConfig& cfg, const std::filesystem::path& out_dir,
                           int workers);
void write_suite_report(const std::filesystem::path& out_dir, const SuiteResult& result,
                        const RunConfig& cfg);

// occupancy images, trajectory overlay, context dir, episode log
void dump_artifacts(const std::filesystem::path& out_dir, const World& world,
                    const EpisodeResult& result, const EpisodeOptions& opt, const json& header);

// per-component reward magnitudes over random-agent rollouts
json calibrate_rewards(const RunConfig& cfg, int episodes, int workers);

}  // namespace echoscout
