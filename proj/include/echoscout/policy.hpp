// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "echoscout/embodiment.hpp"
#include "echoscout/nn.hpp"
#include "echoscout/renderer.hpp"

namespace echoscout {

// composite action space: {MoveForward, TurnLeft, TurnRight} x {Sample, Skip}
constexpr int kNumActions = 6;

inline Motion action_motion(int a) { return static_cast<Motion>(a / 2); }
inline bool action_samples(int a) { return a % 2 == 0; }
inline int make_action(Motion m, bool sample) {
    return 2 * static_cast<int>(m) + (sample ? 0 : 1);
}

constexpr int kEchoFeatDim = 10;  // 4 rt60 + 4 band energies + drr + sampled flag
constexpr int kMiscFeatDim = 4;   // budget fraction + min/mean/max depth
constexpr double kPoseEmbedPeriod = 64.0;  // m; longest wavelength, no alias in-world

struct PolicyConfig {
    int patch = 21;     // egocentric occupancy crop side, odd
    int pose_dim = 24;  // sinusoidal embedding size, divisible by 6
    int hidden = 128;
    int enc_occ = 64;
    int enc_pose = 16;
    int enc_echo = 16;
    int enc_misc = 8;
    uint64_t seed = 0;

    int input_dim() const { return patch * patch + pose_dim + kEchoFeatDim + kMiscFeatDim; }
    int concat_dim() const { return enc_occ + enc_pose + enc_echo + enc_misc; }
    json to_json() const;
    static PolicyConfig from_json(const json& j);
};

void validate_policy_config(const PolicyConfig& cfg);

struct ObservationFeatures {
    Vec occ;   // patch*patch, {-1, 0, +1}
    Vec pose;  // pose_dim sinusoids
    Vec echo;  // kEchoFeatDim
    Vec misc;  // kMiscFeatDim
};

Vec pose_embedding(const Vec2& pos, int theta_deg, int dims);

// prev_echo is null when the previous step skipped; the echo block then
// zeroes out with flag 0
ObservationFeatures encode_observation(const OccupancyMap& map, const AgentPose& pose,
                                       const FeatureVec* prev_echo, int samples_used,
                                       int budget, const DepthScan& scan, double max_range,
                                       const PolicyConfig& cfg);

struct PolicyStepCache {
    ObservationFeatures obs;
    Vec occ_h, pose_h, echo_h, misc_h;  // encoder tanh outputs
    Vec zcat;
    GruCache gru;
    Vec h_next;
    Vec logits;
    double value = 0.0;
};

class PolicyNet {
  public:
    PolicyNet() = default;
    explicit PolicyNet(const PolicyConfig& cfg);

    struct Output {
        Vec logits;
        double value = 0.0;
        Vec h_next;
    };

    Vec initial_state() const { return Vec(static_cast<size_t>(cfg_.hidden), 0.0); }
    Output forward(const ObservationFeatures& obs, const Vec& h_prev,
                   PolicyStepCache* cache = nullptr) const;
    // accumulates parameter grads; returns dL/dh_prev
    Vec backward(const PolicyStepCache& cache, const Vec& dlogits, double dvalue,
                 const Vec& dh_next);

    std::vector<Param*> params();
    int64_t param_count() const;
    const PolicyConfig& config() const { return cfg_; }

  private:
    PolicyConfig cfg_;
    Linear enc_occ_, enc_pose_, enc_echo_, enc_misc_;
    GruCell gru_;
    Linear actor_, critic_;
};

// categorical draw over the masked softmax
int sample_action(const Vec& logits, const std::vector<bool>& allowed, Rng& rng);

struct TrainConfig {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_eps = 0.2;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double learning_rate = 2.5e-4;
    double grad_clip = 0.5;
    double reward_scale = 1e-3;  // conditions the value target; logs stay unscaled
    int epochs = 4;
    int minibatch_seqs = 2;
    int updates = 300;
    uint64_t seed = 0;

    json to_json() const;
    static TrainConfig from_json(const json& j);
};

void validate_train_config(const TrainConfig& cfg);

struct RolloutSeq {
    std::vector<ObservationFeatures> obs;
    std::vector<int> actions;
    std::vector<double> logprobs;  // behavior-policy log-probs
    std::vector<double> values;    // behavior-policy values
    std::vector<double> rewards;
    std::vector<uint8_t> dones;
    std::vector<std::vector<bool>> masks;
    Vec h0;
    double bootstrap_value = 0.0;
    std::vector<double> advantages, returns;  // filled by the trainer

    size_t steps() const { return actions.size(); }
};

struct RolloutBatch {
    std::vector<RolloutSeq> seqs;
};

struct GaeResult {
    std::vector<double> advantages, returns;
};

GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<uint8_t>& dones, double bootstrap_value, double gamma,
                      double gae_lambda);

// fills advantages/returns and normalizes advantages across the whole batch
void prepare_batch(RolloutBatch& batch, const TrainConfig& cfg);

// loss over the chosen sequences; accumulates grads when do_backward
double ppo_minibatch_loss(PolicyNet& net, const RolloutBatch& batch,
                          const std::vector<size_t>& seq_indices, const TrainConfig& cfg,
                          bool do_backward);

struct PpoStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double total_loss = 0.0;
    double grad_norm = 0.0;
};

// batch must already be prepared; performs epochs x minibatches Adam steps
PpoStats ppo_update(PolicyNet& net, Adam& adam, RolloutBatch& batch, const TrainConfig& cfg);

void save_checkpoint(const std::filesystem::path& path, PolicyNet& net, const Adam& adam,
                     int64_t update_index, const json& extra);

struct Checkpoint {
    PolicyNet net;
    Adam adam;
    int64_t update_index = 0;
    json extra;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace echoscout
