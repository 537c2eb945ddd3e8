// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>

#include "echoscout/fft.hpp"
#include "echoscout/io.hpp"
#include "echoscout/rng.hpp"

namespace echoscout {

namespace {

Vec2 query_midpoint(const SourceReceiverQuery& q) {
    return {0.5 * (q.source.x + q.receiver.pos.x), 0.5 * (q.source.y + q.receiver.pos.y)};
}

// k nearest context indices by midpoint distance, ties broken by insertion order
std::vector<size_t> nearest_indices(const ContextSet& ctx, const Vec2& midpoint, int k) {
    std::vector<std::pair<double, size_t>> dist;
    dist.reserve(ctx.samples.size());
    for (size_t i = 0; i < ctx.samples.size(); ++i) {
        const Vec2& p = ctx.samples[i].pose.believed_pos;
        dist.emplace_back(Vec2{p.x - midpoint.x, p.y - midpoint.y}.norm(), i);
    }
    std::sort(dist.begin(), dist.end());
    const size_t n = std::min<size_t>(static_cast<size_t>(k), dist.size());
    std::vector<size_t> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = dist[i].second;
    return out;
}

bool map_segment_blocked(const OccupancyMap& map, const Vec2& a, const Vec2& b) {
    const double len = Vec2{b.x - a.x, b.y - a.y}.norm();
    const double cs = map.cell_size();
    if (len < 1e-12) return false;
    const Vec2 u{(b.x - a.x) / len, (b.y - a.y) / len};
    const int steps = static_cast<int>(len / (0.5 * cs)) + 1;
    for (int i = 0; i <= steps; ++i) {
        const double t = std::min(len, i * 0.5 * cs);
        const int ix = static_cast<int>(std::floor((a.x + u.x * t) / cs));
        const int iy = static_cast<int>(std::floor((a.y + u.y * t) / cs));
        if (map.in_bounds(ix, iy) && map.cell(ix, iy) == OccupancyMap::kOccupied) return true;
    }
    return false;
}

// number of maximal occupied runs (walls) the segment passes through
int map_segment_wall_runs(const OccupancyMap& map, const Vec2& a, const Vec2& b) {
    const double len = Vec2{b.x - a.x, b.y - a.y}.norm();
    const double cs = map.cell_size();
    if (len < 1e-12) return 0;
    const Vec2 u{(b.x - a.x) / len, (b.y - a.y) / len};
    const int steps = static_cast<int>(len / (0.5 * cs)) + 1;
    int runs = 0;
    bool in_wall = false;
    for (int i = 0; i <= steps; ++i) {
        const double t = std::min(len, i * 0.5 * cs);
        const int ix = static_cast<int>(std::floor((a.x + u.x * t) / cs));
        const int iy = static_cast<int>(std::floor((a.y + u.y * t) / cs));
        const bool occ =
            map.in_bounds(ix, iy) && map.cell(ix, iy) == OccupancyMap::kOccupied;
        if (occ && !in_wall) ++runs;
        in_wall = occ;
    }
    return runs;
}

// meters of free-space detour beyond the straight line; unknown cells count as
// traversable so a half-built map degrades toward no detour. Unreachable pairs
// return a large detour that the dB cap absorbs.
double map_geodesic_excess(const OccupancyMap& map, const Vec2& a, const Vec2& b) {
    const double cs = map.cell_size();
    const int w = map.width(), h = map.height();
    auto cell_of = [&](const Vec2& p) {
        return std::pair<int, int>{
            std::clamp(static_cast<int>(std::floor(p.x / cs)), 0, w - 1),
            std::clamp(static_cast<int>(std::floor(p.y / cs)), 0, h - 1)};
    };
    const auto [ax, ay] = cell_of(a);
    const auto [bx, by] = cell_of(b);
    const double euclid = Vec2{b.x - a.x, b.y - a.y}.norm();
    if (ax == bx && ay == by) return 0.0;
    std::vector<double> dist(static_cast<size_t>(w) * h, 1e300);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    dist[static_cast<size_t>(ay) * w + ax] = 0.0;
    pq.emplace(0.0, ay * w + ax);
    while (!pq.empty()) {
        const auto [d, id] = pq.top();
        pq.pop();
        if (d > dist[static_cast<size_t>(id)]) continue;
        const int x = id % w, y = id / w;
        if (x == bx && y == by) return std::max(0.0, d * cs - euclid);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx, ny = y + dy;
                if (!map.in_bounds(nx, ny) || map.cell(nx, ny) == OccupancyMap::kOccupied)
                    continue;
                const double nd = d + (dx != 0 && dy != 0 ? std::numbers::sqrt2 : 1.0);
                const size_t ni = static_cast<size_t>(ny) * w + nx;
                if (nd < dist[ni]) {
                    dist[ni] = nd;
                    pq.emplace(nd, ny * w + nx);
                }
            }
        }
    }
    return 1e6;
}

}  // namespace

json features_to_json(const FeatureVec& f) {
    json j;
    j["rt60"] = f.rt60;
    j["band_energy"] = f.band_energy;
    j["drr_db"] = f.drr_db;
    j["mean_depth"] = f.mean_depth;
    j["min_depth"] = f.min_depth;
    return j;
}

FeatureVec features_from_json(const json& j) {
    require_keys(j, {"rt60", "band_energy", "drr_db", "mean_depth", "min_depth"}, "features");
    FeatureVec f;
    for (int b = 0; b < kBands; ++b) {
        f.rt60[b] = j.at("rt60")[b].get<double>();
        f.band_energy[b] = j.at("band_energy")[b].get<double>();
    }
    f.drr_db = j.at("drr_db").get<double>();
    f.mean_depth = j.at("mean_depth").get<double>();
    f.min_depth = j.at("min_depth").get<double>();
    return f;
}

FeatureVec extract_features(const RIR& echo, const DepthScan& scan, const AcousticsConfig& acfg) {
    if (echo.channels[0].size() != echo.channels[1].size() || echo.length() == 0)
        throw ShapeMismatch("echo must have two equal non-empty channels");
    if (scan.ranges.empty()) throw ShapeMismatch("scan must be non-empty");
    FeatureVec f;
    const auto head =
        std::min(echo.length(), static_cast<size_t>(kDirectWindowSeconds * echo.sample_rate));
    // decay features describe the reverberant tail, so the direct head is zeroed
    // first; otherwise the brickwall bandpass smears a lone direct impulse into
    // ringing with a long spurious decay
    RIR tail_echo = echo;
    for (int ch = 0; ch < 2; ++ch)
        std::fill(tail_echo.channels[ch].begin(), tail_echo.channels[ch].begin() + head, 0.0);
    // near-field early bounces inflate a colocated echo; only the diffuse part
    // past the mixing time transfers to other poses, so energy is windowed there
    const auto late = std::min(
        echo.length(), static_cast<size_t>(tail_window_start(acfg) * echo.sample_rate));
    for (int b = 0; b < kBands; ++b) {
        try {
            const auto rt = schroeder_rt60(tail_echo, b, acfg);
            f.rt60[b] = std::clamp(0.5 * (rt[0] + rt[1]), kMinRt60, kMaxRt60);
        } catch (const InsufficientDecay&) {
            f.rt60[b] = acfg.max_rir_seconds;  // config ceiling fallback
        }
        double tail = 0.0;
        for (int ch = 0; ch < 2; ++ch) {
            const auto band = bandpass_fft(echo.channels[ch], echo.sample_rate,
                                           kBandEdgesHz[b], kBandEdgesHz[b + 1]);
            for (size_t n = late; n < band.size(); ++n) tail += band[n] * band[n];
        }
        f.band_energy[b] = 0.5 * tail;
    }
    double direct = 0.0, reverb = 0.0;
    for (int ch = 0; ch < 2; ++ch) {
        for (size_t n = 0; n < head; ++n)
            direct += echo.channels[ch][n] * echo.channels[ch][n];
        for (size_t n = head; n < echo.length(); ++n)
            reverb += echo.channels[ch][n] * echo.channels[ch][n];
    }
    if (reverb <= 0.0)
        f.drr_db = kDrrCapDb;
    else if (direct <= 0.0)
        f.drr_db = -kDrrCapDb;
    else
        f.drr_db = std::clamp(10.0 * std::log10(direct / reverb), -kDrrCapDb, kDrrCapDb);
    f.mean_depth = std::accumulate(scan.ranges.begin(), scan.ranges.end(), 0.0) /
                   static_cast<double>(scan.ranges.size());
    f.min_depth = *std::min_element(scan.ranges.begin(), scan.ranges.end());
    return f;
}

ContextSample make_context_sample(const RIR& echo, const DepthScan& scan, const AgentPose& pose,
                                  const AcousticsConfig& acfg) {
    ContextSample s;
    s.echo = echo;
    s.spectrogram = stft_mag(echo, acfg);
    s.features = extract_features(echo, scan, acfg);
    s.pose = pose;
    return s;
}

void add_sample(ContextSet& ctx, ContextSample sample) {
    if (static_cast<int>(ctx.samples.size()) >= ctx.budget)
        throw BudgetExhausted("context budget of " + std::to_string(ctx.budget) + " reached");
    ctx.samples.push_back(std::move(sample));
}

void validate_predictor(const PredictorConfig& cfg) {
    if (cfg.k_neighbors < 1) throw ConfigInvalid("k_neighbors must be >= 1");
    if (cfg.distance_power < 0.0) throw ConfigInvalid("distance_power must be >= 0");
}

json predictor_to_json(const PredictorConfig& cfg) {
    json j;
    j["k_neighbors"] = cfg.k_neighbors;
    j["distance_power"] = cfg.distance_power;
    j["mode"] = cfg.mode == PredictorMode::Parametric ? "parametric" : "nearest-context";
    j["occlusion_aware"] = cfg.occlusion_aware;
    return j;
}

PredictorConfig predictor_from_json(const json& j) {
    require_keys(j, {"k_neighbors", "distance_power", "mode", "occlusion_aware"},
                 "predictor config");
    PredictorConfig c;
    if (j.contains("k_neighbors")) c.k_neighbors = j["k_neighbors"].get<int>();
    if (j.contains("distance_power")) c.distance_power = j["distance_power"].get<double>();
    if (j.contains("mode")) {
        const auto m = j["mode"].get<std::string>();
        if (m == "parametric")
            c.mode = PredictorMode::Parametric;
        else if (m == "nearest-context")
            c.mode = PredictorMode::NearestContext;
        else
            throw ConfigInvalid("unknown predictor mode: " + m);
    }
    if (j.contains("occlusion_aware")) c.occlusion_aware = j["occlusion_aware"].get<bool>();
    validate_predictor(c);
    return c;
}

FeatureVec interpolate_features(const ContextSet& ctx, const Vec2& anchor,
                                const PredictorConfig& cfg, const OccupancyMap* map) {
    validate_predictor(cfg);
    if (ctx.samples.empty()) throw EmptyContext("cannot interpolate from an empty context");
    const auto idx = nearest_indices(ctx, anchor, cfg.k_neighbors);
    std::vector<double> w(idx.size());
    double wsum = 0.0;
    for (size_t i = 0; i < idx.size(); ++i) {
        const Vec2& p = ctx.samples[idx[i]].pose.believed_pos;
        const double d = Vec2{p.x - anchor.x, p.y - anchor.y}.norm() + 1e-6;
        w[i] = 1.0 / std::pow(d, cfg.distance_power);
        if (cfg.occlusion_aware && map != nullptr) {
            const int runs = std::min(map_segment_wall_runs(*map, p, anchor), kMaxOcclusionRuns);
            w[i] *= std::pow(10.0, -0.1 * kSampleOcclusionDb * runs);
        }
        wsum += w[i];
    }
    if (!(wsum > 0.0)) {
        // everything occluded into underflow: fall back to plain distance weights
        wsum = 0.0;
        for (size_t i = 0; i < idx.size(); ++i) {
            const Vec2& p = ctx.samples[idx[i]].pose.believed_pos;
            const double d = Vec2{p.x - anchor.x, p.y - anchor.y}.norm() + 1e-6;
            w[i] = 1.0 / std::pow(d, cfg.distance_power);
            wsum += w[i];
        }
    }
    FeatureVec out;
    for (size_t i = 0; i < idx.size(); ++i) {
        const double wi = w[i] / wsum;
        const FeatureVec& f = ctx.samples[idx[i]].features;
        for (int b = 0; b < kBands; ++b) {
            out.rt60[b] += wi * f.rt60[b];
            out.band_energy[b] += wi * f.band_energy[b];
        }
        out.drr_db += wi * f.drr_db;
        out.mean_depth += wi * f.mean_depth;
        out.min_depth += wi * f.min_depth;
    }
    return out;
}

RIR predict_rir_cached(const ContextSet& ctx, const SourceReceiverQuery& query,
                       const PredictorConfig& cfg, const AcousticsConfig& acfg,
                       const std::array<std::vector<double>, kBands>& noise,
                       const OccupancyMap* map) {
    validate_predictor(cfg);
    validate_acoustics(acfg);
    if (ctx.samples.empty()) throw EmptyContext("prediction needs at least one context sample");
    const size_t len = rir_length_samples(acfg);
    const double fs = acfg.sample_rate;
    const double c = acfg.speed_of_sound;

    if (cfg.mode == PredictorMode::NearestContext) {
        const auto idx = nearest_indices(ctx, query_midpoint(query), 1);
        const RIR& echo = ctx.samples[idx[0]].echo;
        const double d = Vec2{query.source.x - query.receiver.pos.x,
                              query.source.y - query.receiver.pos.y}
                             .norm();
        // context echoes are colocated, so their direct delay is 0 in this frame
        const auto shift = static_cast<long>(std::lround(d / c * fs));
        RIR out;
        out.sample_rate = fs;
        for (int ch = 0; ch < 2; ++ch) {
            out.channels[ch].assign(len, 0.0);
            for (size_t n = 0; n < len; ++n) {
                const long m = static_cast<long>(n) - shift;
                if (m >= 0 && m < static_cast<long>(echo.channels[ch].size()))
                    out.channels[ch][n] = echo.channels[ch][m];
            }
        }
        return out;
    }

    const FeatureVec f = interpolate_features(ctx, query_midpoint(query), cfg,
                                              cfg.occlusion_aware ? map : nullptr);

    std::array<bool, 2> gate{true, true};
    double tail_scale = 1.0;
    if (cfg.occlusion_aware && map != nullptr) {
        const auto ears = ear_positions(query.receiver);
        for (int e = 0; e < 2; ++e)
            gate[e] = !map_segment_blocked(*map, query.source, ears[e]);
        const int runs = std::min(
            map_segment_wall_runs(*map, query.source, query.receiver.pos), kMaxOcclusionRuns);
        const double detour = map_geodesic_excess(*map, query.source, query.receiver.pos);
        const double loss_db = std::min(
            kCouplingCapDb, kCouplingDbPerRun * runs + kDetourDbPerMeter * detour);
        tail_scale = std::pow(10.0, -0.1 * loss_db);
    }

    // absolute-time decay anchored at source emission: the level is chosen so the
    // late window reproduces band_energy, the support starts at the direct delay
    const double d_query = Vec2{query.source.x - query.receiver.pos.x,
                                query.source.y - query.receiver.pos.y}
                               .norm();
    const double t_onset = d_query / c;
    const double t_late = tail_window_start(acfg);
    BandHist hist;
    hist.nbins = static_cast<int>(std::ceil(acfg.max_rir_seconds / kHistBinDt));
    for (int b = 0; b < kBands; ++b) {
        hist.energy[b].assign(hist.nbins, 0.0);
        const double rt = std::clamp(f.rt60[b], kMinRt60, kMaxRt60);
        const double energy = std::max(f.band_energy[b], 0.0) * tail_scale;
        if (energy <= 0.0) continue;
        double norm = 0.0;
        for (int i = 0; i < hist.nbins; ++i) {
            const double t = (i + 0.5) * kHistBinDt;
            if (t >= t_late) norm += std::pow(10.0, -6.0 * t / rt);
        }
        if (norm <= 0.0) continue;
        // kTailShrink damps the smooth synthetic envelope: the traced truth is
        // spiky across bins, and under L1 the best smooth estimate sits below
        // the mean level (toward the median)
        const double gain = energy / norm * kTailShrink * kTailShrink;
        for (int i = 0; i < hist.nbins; ++i) {
            const double t = (i + 0.5) * kHistBinDt;
            if (t >= t_onset) hist.energy[b][i] = std::pow(10.0, -6.0 * t / rt) * gain;
        }
    }
    return synth_rir_gated(query, acfg, hist, noise, gate);
}

RIR predict_rir(const ContextSet& ctx, const SourceReceiverQuery& query,
                const PredictorConfig& cfg, const AcousticsConfig& acfg,
                const OccupancyMap* map) {
    return predict_rir_cached(ctx, query, cfg, acfg, make_tail_noise(query, acfg), map);
}

std::vector<SourceReceiverQuery> make_eval_queries(const World& world, int count, uint64_t seed) {
    if (count < 1) throw ConfigInvalid("query count must be >= 1");
    std::vector<Vec2> candidates;
    for (int iy = 0; iy < world.height(); ++iy)
        for (int ix = 0; ix < world.width(); ++ix)
            if (world.cell(ix, iy) == 0) candidates.push_back(world.cell_center(ix, iy));
    if (candidates.empty()) throw InfeasibleSpec("world has no free cells");

    Rng rng(derive_seed(seed, "evalq", 0));
    const size_t want = std::min(candidates.size(), static_cast<size_t>(2 * count));
    std::vector<size_t> picked;
    picked.push_back(static_cast<size_t>(rng.uniform_int(0, candidates.size() - 1)));
    std::vector<double> best_d(candidates.size(), 1e300);
    while (picked.size() < want) {
        const Vec2& last = candidates[picked.back()];
        size_t far_idx = 0;
        double far_d = -1.0;
        for (size_t i = 0; i < candidates.size(); ++i) {
            const double d = Vec2{candidates[i].x - last.x, candidates[i].y - last.y}.norm();
            best_d[i] = std::min(best_d[i], d);
            if (best_d[i] > far_d) {
                far_d = best_d[i];
                far_idx = i;
            }
        }
        picked.push_back(far_idx);
    }
    std::vector<SourceReceiverQuery> out;
    const int thetas[4] = {0, 90, 180, 270};
    for (size_t i = 0; i + 1 < picked.size(); i += 2) {
        SourceReceiverQuery q;
        q.source = candidates[picked[i]];
        q.receiver.pos = candidates[picked[i + 1]];
        q.receiver.theta_deg = thetas[rng.uniform_int(0, 3)];
        out.push_back(q);
    }
    // tiny worlds may not yield 2*count distinct points; duplicate tail queries
    while (static_cast<int>(out.size()) < count && !out.empty()) out.push_back(out.back());
    return out;
}

json queries_to_json(const std::vector<SourceReceiverQuery>& queries) {
    json arr = json::array();
    for (const auto& q : queries) {
        json j;
        j["source"] = {q.source.x, q.source.y};
        j["receiver"] = {q.receiver.pos.x, q.receiver.pos.y};
        j["theta_deg"] = q.receiver.theta_deg;
        arr.push_back(j);
    }
    return arr;
}

std::vector<SourceReceiverQuery> queries_from_json(const json& j) {
    std::vector<SourceReceiverQuery> out;
    for (const auto& e : j) {
        require_keys(e, {"source", "receiver", "theta_deg"}, "query");
        SourceReceiverQuery q;
        q.source = {e.at("source")[0].get<double>(), e.at("source")[1].get<double>()};
        q.receiver.pos = {e.at("receiver")[0].get<double>(), e.at("receiver")[1].get<double>()};
        q.receiver.theta_deg = e.at("theta_deg").get<int>();
        out.push_back(q);
    }
    return out;
}

ModelEvaluator::ModelEvaluator(const World& world, std::vector<SourceReceiverQuery> queries,
                               PredictorConfig pcfg, AcousticsConfig acfg)
    : world_(world), queries_(std::move(queries)), pcfg_(pcfg), acfg_(acfg) {
    if (queries_.empty()) throw ConfigInvalid("evaluator needs at least one query");
    validate_predictor(pcfg_);
    validate_acoustics(acfg_);
    gt_specs_.reserve(queries_.size());
    noises_.reserve(queries_.size());
    for (const auto& q : queries_) {
        gt_specs_.push_back(stft_mag(trace_rir(world_, q, acfg_), acfg_));
        noises_.push_back(make_tail_noise(q, acfg_));
    }
}

double ModelEvaluator::evaluate(const ContextSet& ctx, const OccupancyMap* map) const {
    eval_calls_.fetch_add(1, std::memory_order_relaxed);
    double sum = 0.0;
    for (size_t i = 0; i < queries_.size(); ++i) {
        if (ctx.samples.empty()) {
            // empty context scores against the all-zeros prediction
            double s = 0.0;
            for (int ch = 0; ch < 2; ++ch)
                for (double v : gt_specs_[i].mags[ch]) s += v;
            const size_t total = gt_specs_[i].mags[0].size() + gt_specs_[i].mags[1].size();
            sum += total > 0 ? s / static_cast<double>(total) : 0.0;
            continue;
        }
        const RIR pred = predict_rir_cached(ctx, queries_[i], pcfg_, acfg_, noises_[i], map);
        sum += stft_l1(stft_mag(pred, acfg_), gt_specs_[i]);
    }
    return sum / static_cast<double>(queries_.size());
}

double ModelEvaluator::zero_prediction_error() const {
    ContextSet empty;
    empty.budget = 0;
    return evaluate(empty);
}

double evaluate_model(const World& world, const ContextSet& ctx,
                      const std::vector<SourceReceiverQuery>& queries,
                      const PredictorConfig& pcfg, const AcousticsConfig& acfg) {
    return ModelEvaluator(world, queries, pcfg, acfg).evaluate(ctx);
}

void save_context(const std::filesystem::path& dir, const ContextSet& ctx) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["budget"] = ctx.budget;
    json samples = json::array();
    for (size_t i = 0; i < ctx.samples.size(); ++i) {
        const auto& s = ctx.samples[i];
        const std::string wav = "echo_" + std::to_string(i) + ".wav";
        save_rir_wav(dir / wav, s.echo);
        json e;
        e["echo_wav"] = wav;
        e["features"] = features_to_json(s.features);
        e["pose"] = {{"x", s.pose.pos.x},
                     {"y", s.pose.pos.y},
                     {"theta_deg", s.pose.theta_deg},
                     {"believed_x", s.pose.believed_pos.x},
                     {"believed_y", s.pose.believed_pos.y},
                     {"believed_theta_deg", s.pose.believed_theta_deg}};
        samples.push_back(e);
    }
    manifest["samples"] = samples;
    write_text_file(dir / "context.json", manifest.dump(2) + "\n");
}

ContextSet load_context(const std::filesystem::path& dir, const AcousticsConfig& acfg) {
    const auto manifest = parse_json(read_text_file(dir / "context.json"), "context manifest");
    require_keys(manifest, {"budget", "samples"}, "context manifest");
    ContextSet ctx;
    ctx.budget = manifest.at("budget").get<int>();
    for (const auto& e : manifest.at("samples")) {
        require_keys(e, {"echo_wav", "features", "pose"}, "context sample");
        ContextSample s;
        s.echo = load_rir_wav(dir / e.at("echo_wav").get<std::string>());
        s.features = features_from_json(e.at("features"));
        const auto& p = e.at("pose");
        s.pose.pos = {p.at("x").get<double>(), p.at("y").get<double>()};
        s.pose.theta_deg = p.at("theta_deg").get<int>();
        s.pose.believed_pos = {p.at("believed_x").get<double>(), p.at("believed_y").get<double>()};
        s.pose.believed_theta_deg = p.at("believed_theta_deg").get<int>();
        s.spectrogram = stft_mag(s.echo, acfg);
        ctx.samples.push_back(std::move(s));
    }
    return ctx;
}

}  // namespace echoscout
