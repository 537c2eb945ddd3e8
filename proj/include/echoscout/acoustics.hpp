// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "echoscout/common.hpp"
#include "echoscout/world.hpp"

namespace echoscout {

constexpr double kReceiverRadius = 0.15;  // m, receiver disc for energy deposits
constexpr double kEarOffset = 0.09;       // m, ears sit perpendicular to heading
constexpr double kMinDistance = 0.1;      // m, clamp for the 1/d singularity
constexpr double kHistBinDt = 1e-3;       // s, energy-time histogram bin width

struct AcousticsConfig {
    double sample_rate = 16000.0;
    double max_rir_seconds = 0.5;
    double speed_of_sound = 343.0;
    int rays_per_band = 4096;
    int max_bounces = 64;
    int window = 512;
    int hop = 256;
    uint64_t rng_seed = 0;
};

void validate_acoustics(const AcousticsConfig& cfg);
json acoustics_to_json(const AcousticsConfig& cfg);
AcousticsConfig acoustics_from_json(const json& j);

struct ReceiverPose {
    Vec2 pos;
    int theta_deg = 0;  // one of 0, 90, 180, 270
};

struct SourceReceiverQuery {
    Vec2 source;
    ReceiverPose receiver;
};

struct RIR {
    double sample_rate = 0.0;
    std::array<std::vector<double>, 2> channels;
    size_t length() const { return channels[0].size(); }
};

struct Spectrogram {
    int window = 0, hop = 0, fft_size = 0;
    int frames = 0, bins = 0;
    std::array<std::vector<double>, 2> mags;  // frames × bins, row-major
};

// Per-band reverberant energy on the 1 ms histogram grid (direct path excluded).
struct BandHist {
    int nbins = 0;
    std::array<std::vector<double>, kBands> energy;
};

enum class StftWindow { Hann, Rect };

size_t rir_length_samples(const AcousticsConfig& cfg);
std::array<Vec2, 2> ear_positions(const ReceiverPose& receiver);

// Seeded per-band tail noise shared by the tracer and any predictor so two
// syntheses of the same query differ only in their envelopes. Depends on the
// source/receiver positions (1 mm quantized) and cfg.rng_seed, not on heading.
std::array<std::vector<double>, kBands> make_tail_noise(const SourceReceiverQuery& query,
                                                        const AcousticsConfig& cfg);

BandHist trace_energy_histogram(const World& world, const Vec2& source, const Vec2& receiver,
                                const AcousticsConfig& cfg);

// Envelope-shape the histogram onto tail noise and add per-ear direct paths.
// The gated variant takes explicit per-ear direct-path flags so callers that
// must not consult world geometry (the context-only predictor) can use it.
RIR synth_rir_gated(const SourceReceiverQuery& query, const AcousticsConfig& cfg,
                    const BandHist& hist, const std::array<std::vector<double>, kBands>& noise,
                    const std::array<bool, 2>& direct_gate);
RIR synth_rir(const World& world, const SourceReceiverQuery& query, const AcousticsConfig& cfg,
              const BandHist& hist, const std::array<std::vector<double>, kBands>& noise);
RIR synth_rir(const World& world, const SourceReceiverQuery& query, const AcousticsConfig& cfg,
              const BandHist& hist);

RIR trace_rir(const World& world, const SourceReceiverQuery& query, const AcousticsConfig& cfg);

Spectrogram stft_mag(const RIR& rir, const AcousticsConfig& cfg,
                     StftWindow window = StftWindow::Hann);
double stft_l1(const Spectrogram& a, const Spectrogram& b);

// Backward-integrated energy decay; exposed for the monotonicity property.
std::vector<double> schroeder_curve(const std::vector<double>& x);
// band -1 = broadband, otherwise one of the kBands band indices.
std::array<double, 2> schroeder_rt60(const RIR& rir, int band, const AcousticsConfig& cfg);

void save_rir_wav(const std::filesystem::path& path, const RIR& rir);
RIR load_rir_wav(const std::filesystem::path& path);
// Binary f64 dump (channel-major) plus a JSON shape/window sidecar.
void save_spectrogram(const std::filesystem::path& path_base, const Spectrogram& spec);

}  // namespace echoscout
