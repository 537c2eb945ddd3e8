// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "echoscout/fft.hpp"
#include "echoscout/io.hpp"
#include "echoscout/raycast.hpp"
#include "echoscout/rng.hpp"

namespace echoscout {

namespace {

uint64_t quantize_mm(double meters) {
    return static_cast<uint64_t>(static_cast<int64_t>(std::llround(meters * 1000.0)));
}

uint64_t query_hash(const SourceReceiverQuery& q, uint64_t seed) {
    const uint64_t s = mix64(quantize_mm(q.source.x), quantize_mm(q.source.y));
    const uint64_t r = mix64(quantize_mm(q.receiver.pos.x), quantize_mm(q.receiver.pos.y));
    return mix64(mix64(s, r), seed);
}

void validate_query(const World& world, const SourceReceiverQuery& q) {
    const int t = q.receiver.theta_deg;
    if (t != 0 && t != 90 && t != 180 && t != 270)
        throw ConfigInvalid("receiver heading must be one of 0/90/180/270");
    if (!world.is_free_point(q.source)) throw QueryOutOfFreeSpace("source not in free space");
    if (!world.is_free_point(q.receiver.pos))
        throw QueryOutOfFreeSpace("receiver not in free space");
}

// linear interpolation over histogram-bin centers, clamped at both ends
double envelope_at(const std::vector<double>& env, double t) {
    if (env.empty()) return 0.0;
    const double u = t / kHistBinDt - 0.5;
    if (u <= 0.0) return env.front();
    const auto i = static_cast<size_t>(u);
    if (i + 1 >= env.size()) return env.back();
    const double frac = u - static_cast<double>(i);
    return env[i] + frac * (env[i + 1] - env[i]);
}

}  // namespace

void validate_acoustics(const AcousticsConfig& cfg) {
    if (cfg.sample_rate <= 0.0) throw ConfigInvalid("sample_rate must be positive");
    if (cfg.max_rir_seconds <= 0.0) throw ConfigInvalid("max_rir_seconds must be positive");
    if (cfg.speed_of_sound <= 0.0) throw ConfigInvalid("speed_of_sound must be positive");
    if (cfg.rays_per_band < 1) throw ConfigInvalid("rays_per_band must be >= 1");
    if (cfg.max_bounces < 0) throw ConfigInvalid("max_bounces must be >= 0");
    if (cfg.window < 2) throw ConfigInvalid("window must be >= 2");
    if (cfg.hop < 1 || cfg.hop > cfg.window) throw ConfigInvalid("hop must be in [1, window]");
}

json acoustics_to_json(const AcousticsConfig& cfg) {
    json j;
    j["sample_rate"] = cfg.sample_rate;
    j["max_rir_seconds"] = cfg.max_rir_seconds;
    j["speed_of_sound"] = cfg.speed_of_sound;
    j["rays_per_band"] = cfg.rays_per_band;
    j["max_bounces"] = cfg.max_bounces;
    j["window"] = cfg.window;
    j["hop"] = cfg.hop;
    j["rng_seed"] = cfg.rng_seed;
    return j;
}

AcousticsConfig acoustics_from_json(const json& j) {
    require_keys(j,
                 {"sample_rate", "max_rir_seconds", "speed_of_sound", "rays_per_band",
                  "max_bounces", "window", "hop", "rng_seed"},
                 "acoustics config");
    AcousticsConfig c;
    if (j.contains("sample_rate")) c.sample_rate = j["sample_rate"].get<double>();
    if (j.contains("max_rir_seconds")) c.max_rir_seconds = j["max_rir_seconds"].get<double>();
    if (j.contains("speed_of_sound")) c.speed_of_sound = j["speed_of_sound"].get<double>();
    if (j.contains("rays_per_band")) c.rays_per_band = j["rays_per_band"].get<int>();
    if (j.contains("max_bounces")) c.max_bounces = j["max_bounces"].get<int>();
    if (j.contains("window")) c.window = j["window"].get<int>();
    if (j.contains("hop")) c.hop = j["hop"].get<int>();
    if (j.contains("rng_seed")) c.rng_seed = j["rng_seed"].get<uint64_t>();
    validate_acoustics(c);
    return c;
}

size_t rir_length_samples(const AcousticsConfig& cfg) {
    return static_cast<size_t>(std::ceil(cfg.max_rir_seconds * cfg.sample_rate));
}

std::array<Vec2, 2> ear_positions(const ReceiverPose& receiver) {
    const Vec2 h = heading_vec(receiver.theta_deg);
    const Vec2 perp{-h.y, h.x};
    return {Vec2{receiver.pos.x + kEarOffset * perp.x, receiver.pos.y + kEarOffset * perp.y},
            Vec2{receiver.pos.x - kEarOffset * perp.x, receiver.pos.y - kEarOffset * perp.y}};
}

std::array<std::vector<double>, kBands> make_tail_noise(const SourceReceiverQuery& query,
                                                        const AcousticsConfig& cfg) {
    const size_t len = rir_length_samples(cfg);
    const uint64_t qh = query_hash(query, cfg.rng_seed);
    std::array<std::vector<double>, kBands> out;
    for (int b = 0; b < kBands; ++b) {
        Rng rng(derive_seed(qh, "tailnoise", b));
        std::vector<double> white(len);
        for (auto& v : white) v = rng.normal();
        auto band = bandpass_fft(white, cfg.sample_rate, kBandEdgesHz[b], kBandEdgesHz[b + 1]);
        double ss = 0.0;
        for (double v : band) ss += v * v;
        const double rms = std::sqrt(ss / static_cast<double>(len));
        // unit-RMS noise scaled so squared samples integrate to the bin energy
        const double scale =
            rms > 0.0 ? 1.0 / (rms * std::sqrt(cfg.sample_rate * kHistBinDt)) : 0.0;
        for (auto& v : band) v *= scale;
        out[b] = std::move(band);
    }
    return out;
}

BandHist trace_energy_histogram(const World& world, const Vec2& source, const Vec2& receiver,
                                const AcousticsConfig& cfg) {
    validate_acoustics(cfg);
    if (!world.is_free_point(source)) throw QueryOutOfFreeSpace("source not in free space");
    if (!world.is_free_point(receiver)) throw QueryOutOfFreeSpace("receiver not in free space");

    BandHist hist;
    hist.nbins = static_cast<int>(std::ceil(cfg.max_rir_seconds / kHistBinDt));
    for (auto& h : hist.energy) h.assign(hist.nbins, 0.0);

    const double c = cfg.speed_of_sound;
    const double max_path = c * cfg.max_rir_seconds;
    const int R = cfg.rays_per_band;
    SourceReceiverQuery q{source, {receiver, 0}};
    const uint64_t qh = mix64(query_hash(q, cfg.rng_seed), fnv1a("trace"));

    for (int r = 0; r < R; ++r) {
        Rng rng(derive_seed(qh, "ray", r));
        const double ang = 2.0 * kPi * (r + rng.uniform()) / R;
        Vec2 pos = source;
        Vec2 dir{std::cos(ang), std::sin(ang)};
        std::array<double, kBands> energy;
        energy.fill(1.0 / R);
        double path = 0.0;
        for (int bounce = 0; bounce <= cfg.max_bounces; ++bounce) {
            const auto hit = raycast(world, pos, dir, 1e9);
            if (!hit) break;
            if (bounce >= 1) {
                // the direct segment is handled analytically in synth_rir;
                // deposits weight by chord length through the receiver disc
                // (unbiased density estimator, preserves reciprocity)
                const Vec2 w{receiver.x - pos.x, receiver.y - pos.y};
                const double s0 = w.x * dir.x + w.y * dir.y;
                const Vec2 perp{w.x - dir.x * s0, w.y - dir.y * s0};
                const double h2 = perp.x * perp.x + perp.y * perp.y;
                const double r2 = kReceiverRadius * kReceiverRadius;
                if (h2 <= r2) {
                    const double half = std::sqrt(r2 - h2);
                    const double lo = std::max(0.0, s0 - half);
                    const double hi = std::min(hit->t, s0 + half);
                    if (hi > lo) {
                        const double chord = (hi - lo) / (2.0 * kReceiverRadius);
                        const int idx =
                            static_cast<int>((path + 0.5 * (lo + hi)) / (c * kHistBinDt));
                        if (idx >= 0 && idx < hist.nbins)
                            for (int b = 0; b < kBands; ++b)
                                hist.energy[b][idx] += energy[b] * chord;
                    }
                }
            }
            path += hit->t;
            if (path >= max_path) break;
            const Material& mat = world.material_at(hit->ix, hit->iy);
            double peak = 0.0;
            for (int b = 0; b < kBands; ++b) {
                energy[b] *= 1.0 - mat.absorption[b];
                peak = std::max(peak, energy[b]);
            }
            if (peak < 1e-14) break;
            pos = {pos.x + dir.x * hit->t + hit->nx * 1e-9,
                   pos.y + dir.y * hit->t + hit->ny * 1e-9};
            if (!world.is_free_point(pos)) break;  // corner graze
            if (rng.uniform() < mat.scattering) {
                // Lambertian: cosine-weighted half-space keeps transport reciprocal
                const double u = std::clamp(2.0 * rng.uniform() - 1.0, -0.999999, 0.999999);
                const double phi = std::asin(u);
                const double cp = std::cos(phi), sp = std::sin(phi);
                dir = {hit->nx * cp - hit->ny * sp, hit->nx * sp + hit->ny * cp};
            } else {
                if (hit->nx != 0.0) dir.x = -dir.x;
                if (hit->ny != 0.0) dir.y = -dir.y;
            }
        }
    }
    return hist;
}

RIR synth_rir_gated(const SourceReceiverQuery& query, const AcousticsConfig& cfg,
                    const BandHist& hist, const std::array<std::vector<double>, kBands>& noise,
                    const std::array<bool, 2>& direct_gate) {
    validate_acoustics(cfg);
    const size_t len = rir_length_samples(cfg);
    const double fs = cfg.sample_rate;
    const double c = cfg.speed_of_sound;

    std::array<std::vector<double>, kBands> env;
    for (int b = 0; b < kBands; ++b) {
        env[b].resize(hist.energy[b].size());
        for (size_t i = 0; i < env[b].size(); ++i) env[b][i] = std::sqrt(hist.energy[b][i]);
    }
    std::vector<double> tail(len, 0.0);
    for (int b = 0; b < kBands; ++b) {
        if (noise[b].size() != len) throw ShapeMismatch("tail noise length mismatch");
        for (size_t n = 0; n < len; ++n)
            tail[n] += noise[b][n] * envelope_at(env[b], static_cast<double>(n) / fs);
    }

    RIR rir;
    rir.sample_rate = fs;
    const double d_center =
        Vec2{query.source.x - query.receiver.pos.x, query.source.y - query.receiver.pos.y}.norm();
    const auto ears = ear_positions(query.receiver);
    for (int e = 0; e < 2; ++e) {
        auto& ch = rir.channels[e];
        ch.assign(len, 0.0);
        const double d_ear =
            Vec2{query.source.x - ears[e].x, query.source.y - ears[e].y}.norm();
        const auto shift = static_cast<long>(std::lround((d_ear - d_center) / c * fs));
        const double scale =
            std::max(d_center, kMinDistance) / std::max(d_ear, kMinDistance);
        for (size_t n = 0; n < len; ++n) {
            const long m = static_cast<long>(n) - shift;
            if (m >= 0 && m < static_cast<long>(len)) ch[n] = scale * tail[m];
        }
        if (direct_gate[e]) {
            const auto n0 = static_cast<size_t>(std::lround(d_ear / c * fs));
            if (n0 < len) ch[n0] += 1.0 / std::max(d_ear, kMinDistance);
        }
        for (double v : ch)
            if (!std::isfinite(v)) throw Error("non-finite RIR sample");
    }
    return rir;
}

RIR synth_rir(const World& world, const SourceReceiverQuery& query, const AcousticsConfig& cfg,
              const BandHist& hist, const std::array<std::vector<double>, kBands>& noise) {
    validate_query(world, query);
    const auto ears = ear_positions(query.receiver);
    const std::array<bool, 2> gate{line_of_sight(world, query.source, ears[0]),
                                   line_of_sight(world, query.source, ears[1])};
    return synth_rir_gated(query, cfg, hist, noise, gate);
}

RIR synth_rir(const World& world, const SourceReceiverQuery& query, const AcousticsConfig& cfg,
              const BandHist& hist) {
    return synth_rir(world, query, cfg, hist, make_tail_noise(query, cfg));
}

RIR trace_rir(const World& world, const SourceReceiverQuery& query, const AcousticsConfig& cfg) {
    validate_acoustics(cfg);
    validate_query(world, query);
    const auto hist = trace_energy_histogram(world, query.source, query.receiver.pos, cfg);
    return synth_rir(world, query, cfg, hist);
}

Spectrogram stft_mag(const RIR& rir, const AcousticsConfig& cfg, StftWindow window) {
    validate_acoustics(cfg);
    if (rir.channels[0].size() != rir.channels[1].size())
        throw ShapeMismatch("RIR channels differ in length");
    Spectrogram out;
    out.window = cfg.window;
    out.hop = cfg.hop;
    out.fft_size = static_cast<int>(next_pow2(static_cast<size_t>(cfg.window)));
    out.bins = out.fft_size / 2 + 1;
    const auto len = static_cast<long>(rir.channels[0].size());
    out.frames = len >= cfg.window ? 1 + static_cast<int>((len - cfg.window) / cfg.hop) : 0;

    std::vector<double> win(cfg.window, 1.0);
    if (window == StftWindow::Hann)
        for (int n = 0; n < cfg.window; ++n)
            win[n] = 0.5 * (1.0 - std::cos(2.0 * kPi * n / cfg.window));

    std::vector<std::complex<double>> buf;
    for (int ch = 0; ch < 2; ++ch) {
        out.mags[ch].assign(static_cast<size_t>(out.frames) * out.bins, 0.0);
        for (int f = 0; f < out.frames; ++f) {
            buf.assign(out.fft_size, {0.0, 0.0});
            const size_t start = static_cast<size_t>(f) * cfg.hop;
            for (int n = 0; n < cfg.window; ++n)
                buf[n] = rir.channels[ch][start + n] * win[n];
            fft_inplace(buf, false);
            for (int k = 0; k < out.bins; ++k)
                out.mags[ch][static_cast<size_t>(f) * out.bins + k] = std::abs(buf[k]);
        }
    }
    return out;
}

double stft_l1(const Spectrogram& a, const Spectrogram& b) {
    if (a.frames != b.frames || a.bins != b.bins || a.mags[0].size() != b.mags[0].size() ||
        a.mags[1].size() != b.mags[1].size())
        throw ShapeMismatch("spectrogram shapes differ");
    const size_t total = a.mags[0].size() + a.mags[1].size();
    if (total == 0) return 0.0;
    double sum = 0.0;
    for (int ch = 0; ch < 2; ++ch)
        for (size_t i = 0; i < a.mags[ch].size(); ++i)
            sum += std::abs(a.mags[ch][i] - b.mags[ch][i]);
    return sum / static_cast<double>(total);
}

std::vector<double> schroeder_curve(const std::vector<double>& x) {
    std::vector<double> s(x.size(), 0.0);
    double acc = 0.0;
    for (size_t i = x.size(); i-- > 0;) {
        acc += x[i] * x[i];
        s[i] = acc;
    }
    return s;
}

std::array<double, 2> schroeder_rt60(const RIR& rir, int band, const AcousticsConfig& cfg) {
    validate_acoustics(cfg);
    if (band < -1 || band >= kBands) throw ConfigInvalid("band index out of range");
    std::array<double, 2> out{};
    for (int ch = 0; ch < 2; ++ch) {
        std::vector<double> x =
            band < 0 ? rir.channels[ch]
                     : bandpass_fft(rir.channels[ch], cfg.sample_rate, kBandEdgesHz[band],
                                    kBandEdgesHz[band + 1]);
        const auto s = schroeder_curve(x);
        if (s.empty() || s[0] <= 0.0) throw InsufficientDecay("silent signal");
        std::vector<double> db;
        db.reserve(s.size());
        for (size_t n = 0; n < s.size() && s[n] > 0.0; ++n)
            db.push_back(10.0 * std::log10(s[n] / s[0]));
        long n5 = -1, n_end = -1;
        for (size_t n = 0; n < db.size(); ++n) {
            if (n5 < 0 && db[n] <= -5.0) n5 = static_cast<long>(n);
            if (db[n] <= -35.0) {
                n_end = static_cast<long>(n);
                break;
            }
        }
        if (n_end < 0 && !db.empty()) {
            // truncated decay: fit down to 5 dB above the late-curve level instead,
            // stopping clear of the backward-integration plunge at the buffer end
            const size_t n_ref = std::min(db.size() - 1, (9 * s.size()) / 10);
            const double target = db[n_ref] + 5.0;
            if (target <= -15.0)
                for (size_t n = n5 < 0 ? 0 : static_cast<size_t>(n5); n < db.size(); ++n)
                    if (db[n] <= target) {
                        n_end = static_cast<long>(n);
                        break;
                    }
        }
        if (n5 < 0 || n_end < 0 || n_end - n5 < 2)
            throw InsufficientDecay("decay never spans a usable fit range below -5 dB");
        // least-squares line through the decay segment, extrapolated to -60 dB
        double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
        const double m = static_cast<double>(n_end - n5 + 1);
        for (long n = n5; n <= n_end; ++n) {
            const double t = static_cast<double>(n) / cfg.sample_rate;
            const double y = 10.0 * std::log10(s[n] / s[0]);
            st += t;
            sy += y;
            stt += t * t;
            sty += t * y;
        }
        const double denom = m * stt - st * st;
        const double slope = denom != 0.0 ? (m * sty - st * sy) / denom : 0.0;
        if (slope >= -1e-9) throw InsufficientDecay("non-decreasing decay curve");
        out[ch] = -60.0 / slope;
    }
    return out;
}

void save_rir_wav(const std::filesystem::path& path, const RIR& rir) {
    write_wav_f32(path, rir.sample_rate, rir.channels);
}

RIR load_rir_wav(const std::filesystem::path& path) {
    const auto w = read_wav_f32(path);
    RIR r;
    r.sample_rate = w.sample_rate;
    r.channels = w.channels;
    return r;
}

void save_spectrogram(const std::filesystem::path& path_base, const Spectrogram& spec) {
    std::vector<double> flat;
    flat.reserve(spec.mags[0].size() + spec.mags[1].size());
    flat.insert(flat.end(), spec.mags[0].begin(), spec.mags[0].end());
    flat.insert(flat.end(), spec.mags[1].begin(), spec.mags[1].end());
    auto bin = path_base;
    bin += ".f64";
    write_f64_raw(bin, flat);
    json meta;
    meta["channels"] = 2;
    meta["frames"] = spec.frames;
    meta["bins"] = spec.bins;
    meta["window"] = spec.window;
    meta["hop"] = spec.hop;
    meta["fft_size"] = spec.fft_size;
    meta["layout"] = "channel-major row-major frames x bins";
    auto side = path_base;
    side += ".json";
    write_text_file(side, meta.dump(2) + "\n");
}

}  // namespace echoscout
