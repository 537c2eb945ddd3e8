// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "echoscout/acoustics.hpp"
#include "echoscout/embodiment.hpp"
#include "echoscout/world.hpp"

namespace echoscout {

constexpr double kDirectWindowSeconds = 0.005;  // echo head treated as direct
constexpr double kDrrCapDb = 80.0;
constexpr double kMinRt60 = 0.01;
constexpr double kMaxRt60 = 10.0;  // numeric bound on the rt60 feature
// physical coupling between source and receiver: each wall crossed on the
// straight line and each meter of free-space detour past it cost level
constexpr double kCouplingDbPerRun = 5.0;
constexpr double kDetourDbPerMeter = 4.0;
constexpr double kCouplingCapDb = 60.0;
// interpolation bias: occluded context samples describe another room, so they
// are suppressed much harder than the physical coupling loss
constexpr double kSampleOcclusionDb = 10.0;
// amplitude applied to the synthetic tail: L1-optimal shrinkage of a smooth
// envelope toward the spiky traced truth (calibrated on random worlds)
constexpr double kTailShrink = 0.4;
constexpr double kMixingTimeSeconds = 0.03;  // onset of the diffuse late field
constexpr int kMaxOcclusionRuns = 8;         // cap on counted wall crossings

// band_energy is measured past the mixing time so the near-field transient of a
// colocated echo does not leak into a quantity that must transfer across poses
inline double tail_window_start(const AcousticsConfig& cfg) {
    return std::min(kMixingTimeSeconds, 0.25 * cfg.max_rir_seconds);
}

struct FeatureVec {
    std::array<double, kBands> rt60{};         // s, per band (ceiling on no decay)
    std::array<double, kBands> band_energy{};  // diffuse late-tail energy per band
    double drr_db = 0.0;                       // direct-to-reverberant ratio
    double mean_depth = 0.0;
    double min_depth = 0.0;
};

json features_to_json(const FeatureVec& f);
FeatureVec features_from_json(const json& j);

FeatureVec extract_features(const RIR& echo, const DepthScan& scan, const AcousticsConfig& acfg);

struct ContextSample {
    RIR echo;
    Spectrogram spectrogram;  // cached stft_mag of echo
    FeatureVec features;
    AgentPose pose;
};

ContextSample make_context_sample(const RIR& echo, const DepthScan& scan, const AgentPose& pose,
                                  const AcousticsConfig& acfg);

struct ContextSet {
    std::vector<ContextSample> samples;
    int budget = 0;
    size_t size() const { return samples.size(); }
};

void add_sample(ContextSet& ctx, ContextSample sample);

enum class PredictorMode { Parametric, NearestContext };

struct PredictorConfig {
    int k_neighbors = 4;
    double distance_power = 2.0;
    PredictorMode mode = PredictorMode::Parametric;
    bool occlusion_aware = false;
};

void validate_predictor(const PredictorConfig& cfg);
json predictor_to_json(const PredictorConfig& cfg);
PredictorConfig predictor_from_json(const json& j);

// Inverse-distance-weighted features over the k nearest context samples;
// distances run from the anchor point to each (believed) context pose, with a
// 1e-6 m epsilon. Weights are non-negative and sum to 1. With a map and
// cfg.occlusion_aware, samples behind mapped walls are further attenuated by
// kSampleOcclusionDb per wall crossing.
FeatureVec interpolate_features(const ContextSet& ctx, const Vec2& anchor,
                                const PredictorConfig& cfg,
                                const OccupancyMap* map = nullptr);

// Context-only prediction: never consults world geometry. The optional map is
// used solely when cfg.occlusion_aware is set: it gates the analytic direct
// path, attenuates the tail per wall crossed, and biases interpolation toward
// unoccluded context samples.
RIR predict_rir(const ContextSet& ctx, const SourceReceiverQuery& query,
                const PredictorConfig& cfg, const AcousticsConfig& acfg,
                const OccupancyMap* map = nullptr);
RIR predict_rir_cached(const ContextSet& ctx, const SourceReceiverQuery& query,
                       const PredictorConfig& cfg, const AcousticsConfig& acfg,
                       const std::array<std::vector<double>, kBands>& noise,
                       const OccupancyMap* map = nullptr);

// Farthest-point sampling of free-cell centers; evens become sources, odds
// receivers, headings drawn from the seed.
std::vector<SourceReceiverQuery> make_eval_queries(const World& world, int count, uint64_t seed);
json queries_to_json(const std::vector<SourceReceiverQuery>& queries);
std::vector<SourceReceiverQuery> queries_from_json(const json& j);

// Owns ground-truth spectrograms and per-query noise so repeated evaluations
// within an episode only pay for prediction synthesis.
class ModelEvaluator {
  public:
    ModelEvaluator(const World& world, std::vector<SourceReceiverQuery> queries,
                   PredictorConfig pcfg, AcousticsConfig acfg);

    double evaluate(const ContextSet& ctx, const OccupancyMap* map = nullptr) const;
    double zero_prediction_error() const;
    size_t eval_calls() const { return eval_calls_.load(std::memory_order_relaxed); }
    const std::vector<SourceReceiverQuery>& queries() const { return queries_; }

  private:
    const World& world_;
    std::vector<SourceReceiverQuery> queries_;
    PredictorConfig pcfg_;
    AcousticsConfig acfg_;
    std::vector<Spectrogram> gt_specs_;
    std::vector<std::array<std::vector<double>, kBands>> noises_;
    mutable std::atomic<size_t> eval_calls_{0};  // evaluate() is used concurrently
};

double evaluate_model(const World& world, const ContextSet& ctx,
                      const std::vector<SourceReceiverQuery>& queries,
                      const PredictorConfig& pcfg, const AcousticsConfig& acfg);

// JSON manifest + per-echo WAV files, enough to re-run evaluate_model offline.
void save_context(const std::filesystem::path& dir, const ContextSet& ctx);
ContextSet load_context(const std::filesystem::path& dir, const AcousticsConfig& acfg);

}  // namespace echoscout
