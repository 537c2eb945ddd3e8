// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "echoscout/renderer.hpp"
#include "echoscout/rng.hpp"

using namespace echoscout;

namespace {

World multiroom(uint64_t seed) {
    WorldSpec s;
    s.seed = seed;
    s.extent_x = 14.0;
    s.extent_y = 12.0;
    s.room_count = 4;
    s.corridor_width = 1.5;
    s.cell_size = 0.25;
    s.material_palette = default_palette();
    return generate_world(s);
}

World box(double absorption) {
    WorldSpec s;
    s.seed = 1;
    s.extent_x = 8.0;
    s.extent_y = 6.0;
    s.room_count = 1;
    s.corridor_width = 1.5;
    s.cell_size = 0.25;
    Material m;
    m.id = 0;
    m.absorption.fill(absorption);
    m.scattering = 0.3;
    s.material_palette = {m};
    return generate_world(s);
}

AcousticsConfig test_acfg() {
    AcousticsConfig c;
    c.rays_per_band = 512;
    c.max_bounces = 64;
    c.max_rir_seconds = 0.25;
    return c;
}

ContextSample sample_at(const World& w, const Vec2& pos, int theta, const AcousticsConfig& acfg) {
    const auto pose = make_pose(pos, theta);
    return make_context_sample(capture_echo(w, pose, acfg), depth_scan(w, pose, 64, 10.0), pose,
                               acfg);
}

// spread context via the same FPS machinery used for queries
ContextSet spread_context(const World& w, int n, const AcousticsConfig& acfg, uint64_t seed) {
    ContextSet ctx;
    ctx.budget = n;
    const auto pts = make_eval_queries(w, n, seed);
    for (int i = 0; i < n && i < static_cast<int>(pts.size()); ++i)
        add_sample(ctx, sample_at(w, pts[i].source, 0, acfg));
    return ctx;
}

}  // namespace

TEST_CASE("direct-only echoes give capped DRR and ceiling RT60") {
    const auto w = box(1.0);
    auto acfg = test_acfg();
    acfg.rays_per_band = 64;
    const auto pose = make_pose({4.0, 3.0}, 0);
    const auto f = extract_features(capture_echo(w, pose, acfg), depth_scan(w, pose, 64, 10.0),
                                    acfg);
    CHECK(f.drr_db > 20.0);
    for (int b = 0; b < kBands; ++b) CHECK(f.rt60[b] == acfg.max_rir_seconds);
    CHECK(f.mean_depth > 0.0);
    CHECK(f.min_depth > 0.0);
    CHECK(f.min_depth <= f.mean_depth);
}

TEST_CASE("feature extraction is deterministic and matches schroeder exactly") {
    const auto w = box(0.2);
    const auto acfg = test_acfg();
    const auto pose = make_pose({3.0, 2.0}, 90);
    const auto echo = capture_echo(w, pose, acfg);
    const auto scan = depth_scan(w, pose, 64, 10.0);
    const auto f1 = extract_features(echo, scan, acfg);
    const auto f2 = extract_features(echo, scan, acfg);
    // rt60 features measure the tail with the direct head zeroed out
    RIR tail = echo;
    const auto head = static_cast<size_t>(kDirectWindowSeconds * echo.sample_rate);
    for (int ch = 0; ch < 2; ++ch)
        std::fill(tail.channels[ch].begin(), tail.channels[ch].begin() + head, 0.0);
    for (int b = 0; b < kBands; ++b) {
        CHECK(f1.rt60[b] == f2.rt60[b]);
        CHECK(f1.band_energy[b] == f2.band_energy[b]);
        const auto rt = schroeder_rt60(tail, b, acfg);
        CHECK(f1.rt60[b] == std::clamp(0.5 * (rt[0] + rt[1]), kMinRt60, kMaxRt60));
    }
    CHECK(f1.drr_db == f2.drr_db);
}

TEST_CASE("context budget is enforced and insertion never mutates") {
    const auto w = box(0.2);
    const auto acfg = test_acfg();
    ContextSet ctx;
    ctx.budget = 2;
    add_sample(ctx, sample_at(w, {2.0, 2.0}, 0, acfg));
    CHECK(ctx.size() == 1);
    const auto first_echo = ctx.samples[0].echo.channels[0];
    add_sample(ctx, sample_at(w, {5.0, 3.0}, 90, acfg));
    CHECK(ctx.size() == 2);
    for (size_t n = 0; n < first_echo.size(); ++n)
        REQUIRE(ctx.samples[0].echo.channels[0][n] == first_echo[n]);
    CHECK_THROWS_AS(add_sample(ctx, sample_at(w, {6.0, 4.0}, 0, acfg)), BudgetExhausted);
    CHECK(ctx.size() == 2);
}

TEST_CASE("interpolation degenerates to exact features at a context pose") {
    const auto w = box(0.2);
    const auto acfg = test_acfg();
    ContextSet ctx;
    ctx.budget = 4;
    add_sample(ctx, sample_at(w, {2.0, 2.0}, 0, acfg));
    add_sample(ctx, sample_at(w, {6.0, 4.0}, 0, acfg));
    PredictorConfig pcfg;
    pcfg.k_neighbors = 1;
    const auto f = interpolate_features(ctx, {2.0, 2.0}, pcfg);
    for (int b = 0; b < kBands; ++b) {
        CHECK(f.rt60[b] == ctx.samples[0].features.rt60[b]);
        CHECK(f.band_energy[b] == ctx.samples[0].features.band_energy[b]);
    }
    CHECK(f.drr_db == ctx.samples[0].features.drr_db);
}

TEST_CASE("two equidistant neighbors at power 1 average exactly") {
    const auto w = box(0.2);
    const auto acfg = test_acfg();
    ContextSet ctx;
    ctx.budget = 2;
    add_sample(ctx, sample_at(w, {2.0, 3.0}, 0, acfg));
    add_sample(ctx, sample_at(w, {6.0, 3.0}, 0, acfg));
    PredictorConfig pcfg;
    pcfg.k_neighbors = 2;
    pcfg.distance_power = 1.0;
    const auto f = interpolate_features(ctx, {4.0, 3.0}, pcfg);
    const auto& a = ctx.samples[0].features;
    const auto& b = ctx.samples[1].features;
    for (int band = 0; band < kBands; ++band)
        CHECK(f.rt60[band] == 0.5 * a.rt60[band] + 0.5 * b.rt60[band]);
    CHECK(f.mean_depth == 0.5 * a.mean_depth + 0.5 * b.mean_depth);
}

TEST_CASE("prediction beats the zero predictor across random queries") {
    const auto w = multiroom(31);
    const auto acfg = test_acfg();
    const auto ctx = spread_context(w, 20, acfg, 7);
    PredictorConfig pcfg;
    pcfg.occlusion_aware = true;
    const auto map = OccupancyMap::perfect(w);
    const auto queries = make_eval_queries(w, 50, 99);
    REQUIRE(queries.size() == 50);
    ModelEvaluator ev(w, queries, pcfg, acfg);
    const double zero_err = ev.zero_prediction_error();
    const double pred_err = ev.evaluate(ctx, &map);
    CHECK(pred_err < zero_err);
}

TEST_CASE("prediction length and rate always match the acoustics config") {
    const auto w = box(0.2);
    auto acfg = test_acfg();
    acfg.max_rir_seconds = 0.17;  // 2720 samples
    ContextSet ctx;
    ctx.budget = 1;
    add_sample(ctx, sample_at(w, {2.0, 2.0}, 0, acfg));
    PredictorConfig pcfg;
    SourceReceiverQuery q{{5.0, 3.0}, {{3.0, 3.0}, 180}};
    for (auto mode : {PredictorMode::Parametric, PredictorMode::NearestContext}) {
        pcfg.mode = mode;
        const auto pred = predict_rir(ctx, q, pcfg, acfg);
        CHECK(pred.sample_rate == acfg.sample_rate);
        CHECK(pred.length() == rir_length_samples(acfg));
    }
}

TEST_CASE("nearest-context mode reproduces a colocated query exactly") {
    const auto w = box(0.2);
    const auto acfg = test_acfg();
    ContextSet ctx;
    ctx.budget = 2;
    add_sample(ctx, sample_at(w, {2.5, 2.5}, 0, acfg));
    add_sample(ctx, sample_at(w, {6.0, 4.0}, 0, acfg));
    PredictorConfig pcfg;
    pcfg.mode = PredictorMode::NearestContext;
    SourceReceiverQuery q{{2.5, 2.5}, {{2.5, 2.5}, 0}};
    const auto pred = predict_rir(ctx, q, pcfg, acfg);
    const auto& echo = ctx.samples[0].echo;
    for (int ch = 0; ch < 2; ++ch)
        for (size_t n = 0; n < pred.channels[ch].size(); ++n)
            REQUIRE(pred.channels[ch][n] == echo.channels[ch][n]);
}

TEST_CASE("empty context raises EmptyContext from predict_rir") {
    const auto acfg = test_acfg();
    ContextSet ctx;
    ctx.budget = 3;
    PredictorConfig pcfg;
    SourceReceiverQuery q{{2.0, 2.0}, {{3.0, 3.0}, 0}};
    CHECK_THROWS_AS(predict_rir(ctx, q, pcfg, acfg), EmptyContext);
}

TEST_CASE("evaluator determinism, duplicates, and the dense-context oracle") {
    // two contrasting materials so room placement actually matters acoustically
    WorldSpec s;
    s.seed = 4;
    s.extent_x = 13.0;
    s.extent_y = 11.0;
    s.room_count = 3;
    s.corridor_width = 1.5;
    s.cell_size = 0.25;
    s.material_palette = {default_palette()[0], default_palette()[2]};
    s.material_palette[1].id = 1;
    const auto w = generate_world(s);
    const auto acfg = test_acfg();
    PredictorConfig pcfg;

    // colocated queries so a context echo can sit exactly at each midpoint
    std::vector<SourceReceiverQuery> queries;
    for (const auto& q : make_eval_queries(w, 6, 5)) {
        SourceReceiverQuery col;
        col.source = q.source;
        col.receiver = {q.source, 0};
        queries.push_back(col);
    }
    ModelEvaluator ev(w, queries, pcfg, acfg);

    ContextSet dense;
    dense.budget = static_cast<int>(queries.size());
    for (const auto& q : queries) add_sample(dense, sample_at(w, q.source, 0, acfg));
    const double dense_err = ev.evaluate(dense);

    // a context covering every query beats the average lone sample
    double mean_solo = 0.0;
    for (size_t i = 0; i < queries.size(); ++i) {
        ContextSet solo;
        solo.budget = 1;
        solo.samples.push_back(dense.samples[i]);
        mean_solo += ev.evaluate(solo) / static_cast<double>(queries.size());
    }
    CHECK(dense_err < mean_solo);

    // determinism
    CHECK(ev.evaluate(dense) == dense_err);

    // duplicated query list leaves the mean unchanged
    auto doubled = queries;
    doubled.insert(doubled.end(), queries.begin(), queries.end());
    ModelEvaluator ev2(w, doubled, pcfg, acfg);
    CHECK(ev2.evaluate(dense) == doctest::Approx(dense_err).epsilon(1e-12));
    CHECK(ev.eval_calls() == 2 + static_cast<int>(queries.size()));
}

TEST_CASE("well-spread 20-sample contexts beat 5-sample ones on average") {
    const auto acfg = test_acfg();
    PredictorConfig pcfg;
    double err5 = 0.0, err20 = 0.0;
    int episodes = 0;
    for (uint64_t seed = 200; episodes < 30; ++seed) {
        World w = multiroom(seed);
        const auto queries = make_eval_queries(w, 6, seed * 7 + 1);
        ModelEvaluator ev(w, queries, pcfg, acfg);
        err5 += ev.evaluate(spread_context(w, 5, acfg, seed + 1));
        err20 += ev.evaluate(spread_context(w, 20, acfg, seed + 1));
        ++episodes;
    }
    CHECK(err20 / episodes < err5 / episodes);
}

TEST_CASE("context round-trips through the export manifest") {
    const auto w = box(0.2);
    const auto acfg = test_acfg();
    ContextSet ctx;
    ctx.budget = 3;
    add_sample(ctx, sample_at(w, {2.0, 2.0}, 0, acfg));
    add_sample(ctx, sample_at(w, {5.0, 3.5}, 90, acfg));
    const auto dir = std::filesystem::temp_directory_path() / "echoscout_ctx_test";
    save_context(dir, ctx);
    const auto back = load_context(dir, acfg);
    REQUIRE(back.size() == ctx.size());
    CHECK(back.budget == ctx.budget);
    for (size_t i = 0; i < ctx.size(); ++i) {
        // features round-trip exactly through JSON doubles
        for (int b = 0; b < kBands; ++b) {
            CHECK(back.samples[i].features.rt60[b] == ctx.samples[i].features.rt60[b]);
            CHECK(back.samples[i].features.band_energy[b] ==
                  ctx.samples[i].features.band_energy[b]);
        }
        CHECK(back.samples[i].pose.pos.x == ctx.samples[i].pose.pos.x);
        CHECK(back.samples[i].pose.believed_pos.y == ctx.samples[i].pose.believed_pos.y);
        // echoes round-trip through float32 wav
        for (size_t n = 0; n < ctx.samples[i].echo.length(); ++n) {
            const double want = static_cast<double>(
                static_cast<float>(ctx.samples[i].echo.channels[0][n]));
            REQUIRE(back.samples[i].echo.channels[0][n] == want);
        }
    }
}

TEST_CASE("cached spectrogram stays coherent with the echo") {
    const auto w = box(0.3);
    const auto acfg = test_acfg();
    const auto s = sample_at(w, {3.5, 2.5}, 270, acfg);
    const auto recomputed = stft_mag(s.echo, acfg);
    REQUIRE(s.spectrogram.frames == recomputed.frames);
    for (int ch = 0; ch < 2; ++ch)
        for (size_t i = 0; i < recomputed.mags[ch].size(); ++i)
            REQUIRE(s.spectrogram.mags[ch][i] == recomputed.mags[ch][i]);
}
