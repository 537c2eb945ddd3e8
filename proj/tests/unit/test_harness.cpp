// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <set>
#include <vector>

#include "echoscout/harness.hpp"
#include "echoscout/threadpool.hpp"

using namespace echoscout;

namespace {

RunConfig tiny_run() {
    RunConfig c;
    c.world.extent_x = 8.0;
    c.world.extent_y = 6.0;
    c.world.room_count = 1;
    c.acoustics.rays_per_band = 64;
    c.acoustics.max_bounces = 24;
    c.acoustics.max_rir_seconds = 0.12;
    c.acoustics.window = 256;
    c.acoustics.hop = 128;
    c.episode.horizon = 40;
    c.episode.budget = 4;
    c.episode.eval_queries = 4;
    c.episode.scan_rays = 12;
    c.policy.patch = 5;
    c.policy.pose_dim = 6;
    c.policy.hidden = 8;
    c.policy.enc_occ = 8;
    c.policy.enc_pose = 4;
    c.policy.enc_echo = 4;
    c.policy.enc_misc = 3;
    return c;
}

World make_test_world(const RunConfig& cfg, uint64_t seed) {
    WorldSpec s = cfg.world;
    s.seed = seed;
    return generate_world(s);
}

ModelEvaluator make_evaluator(const RunConfig& cfg, const World& w, uint64_t seed) {
    return {w, make_eval_queries(w, cfg.episode.eval_queries, seed), cfg.predictor,
            cfg.acoustics};
}

EpisodeOptions options_for(const RunConfig& cfg,
                           AcousticRewardMode mode = AcousticRewardMode::kGlobal) {
    EpisodeOptions opt;
    opt.episode = cfg.episode;
    opt.rewards = cfg.rewards;
    opt.acoustic_mode = mode;
    opt.noise = cfg.noise;
    opt.predictor = cfg.predictor;
    opt.acoustics = cfg.acoustics;
    return opt;
}

// misbehaving agent: samples every step ignoring the budget
struct SamplingSpammer : Agent {
    void reset(uint64_t) override {}
    int act(const AgentContext&) override { return 0; }
    std::string name() const override { return "spammer"; }
};

}  // namespace

TEST_CASE("spawn poses are deterministic free cells with axis headings") {
    const auto cfg = tiny_run();
    const auto w = make_test_world(cfg, 31);
    std::set<std::pair<double, double>> seen;
    for (uint64_t s = 0; s < 24; ++s) {
        const auto p = spawn_pose(w, s);
        const auto q = spawn_pose(w, s);
        CHECK(p.pos.x == q.pos.x);
        CHECK(p.pos.y == q.pos.y);
        CHECK(p.theta_deg == q.theta_deg);
        CHECK(p.theta_deg % 90 == 0);
        CHECK(p.believed_pos.x == p.pos.x);
        const int ix = static_cast<int>(p.pos.x / w.cell_size());
        const int iy = static_cast<int>(p.pos.y / w.cell_size());
        CHECK(w.is_free_cell(ix, iy));
        seen.insert({p.pos.x, p.pos.y});
    }
    CHECK(seen.size() > 4);  // seeds actually move the spawn
}

TEST_CASE("episodes enforce the reward identities stepwise") {
    const auto cfg = tiny_run();
    const auto w = make_test_world(cfg, 32);
    auto ev = make_evaluator(cfg, w, 5);
    ForwardAgent agent;
    const auto ep = run_episode(w, agent, options_for(cfg), 77, &ev);

    REQUIRE(ep.steps.size() == 40);
    CHECK(ep.samples_used == 4);
    CHECK(ep.evaluator_calls == 1 + ep.samples_used);
    CHECK(ep.initial_error == ev.zero_prediction_error());
    CHECK(ep.context.size() == 4);
    CHECK(ep.sample_positions.size() == 4);

    double L = ep.initial_error;
    double cov_prev = -1.0;
    double reward_sum = 0.0;
    for (const auto& s : ep.steps) {
        // acoustic term telescopes bitwise against the logged error trace
        CHECK(s.reward.L_R_before == L);
        if (s.sampled) {
            CHECK(s.reward.r_A == s.reward.L_R_before - s.reward.L_R_after);
        } else {
            CHECK(s.reward.r_A == 0.0);
            CHECK(s.reward.L_R_after == s.reward.L_R_before);
        }
        L = s.reward.L_R_after;
        CHECK(s.error == L);

        CHECK(s.reward.r_V >= 0.0);
        CHECK(s.reward.r_N > 0.0);
        CHECK(s.reward.r_N <= 1.0);
        CHECK(s.coverage >= cov_prev);
        cov_prev = s.coverage;
        const double total = cfg.rewards.lambda_A * s.reward.r_A +
                             cfg.rewards.lambda_V * s.reward.r_V +
                             cfg.rewards.lambda_N * s.reward.r_N;
        CHECK(s.reward.total == total);
        reward_sum += s.reward.total;
    }
    CHECK(ep.final_error == L);
    CHECK(ep.total_reward == doctest::Approx(reward_sum).epsilon(1e-12));
    // the error telescopes to the summed acoustic gains
    double gain = 0.0;
    for (const auto& s : ep.steps) gain += s.reward.r_A;
    CHECK(ep.initial_error - ep.final_error == doctest::Approx(gain).epsilon(1e-9));
}

TEST_CASE("episodes are bitwise reproducible") {
    const auto cfg = tiny_run();
    const auto w = make_test_world(cfg, 33);
    auto ev = make_evaluator(cfg, w, 6);
    RandomAgent a1, a2;
    const auto e1 = run_episode(w, a1, options_for(cfg), 9, &ev);
    const auto e2 = run_episode(w, a2, options_for(cfg), 9, &ev);
    REQUIRE(e1.steps.size() == e2.steps.size());
    for (size_t i = 0; i < e1.steps.size(); ++i) {
        CHECK(e1.steps[i].action == e2.steps[i].action);
        CHECK(e1.steps[i].reward.total == e2.steps[i].reward.total);
        CHECK(e1.steps[i].error == e2.steps[i].error);
        CHECK(e1.steps[i].pose.pos.x == e2.steps[i].pose.pos.x);
    }
    CHECK(e1.final_error == e2.final_error);
    CHECK(e1.map.to_json() == e2.map.to_json());
}

TEST_CASE("zero acoustic weight runs without any evaluator call") {
    auto cfg = tiny_run();
    const auto w = make_test_world(cfg, 34);
    const auto [weights, mode] = realize_reward_mode("exploration", cfg.rewards);
    auto opt = options_for(cfg, mode);
    opt.rewards = weights;
    RandomAgent agent;
    const auto ep = run_episode(w, agent, opt, 3, nullptr);
    CHECK(ep.evaluator_calls == 0);
    CHECK(std::isnan(ep.initial_error));
    CHECK(std::isnan(ep.final_error));
    for (const auto& s : ep.steps) {
        CHECK(s.reward.r_A == 0.0);
        CHECK(std::isfinite(s.reward.total));
        CHECK(std::isnan(s.error));
    }
    // but an evaluator-needing config without one is rejected
    CHECK_THROWS_AS(run_episode(w, agent, options_for(cfg), 3, nullptr), ConfigInvalid);
}

TEST_CASE("local acoustic mode scores sampled poses without an evaluator") {
    const auto cfg = tiny_run();
    const auto w = make_test_world(cfg, 35);
    auto opt = options_for(cfg, AcousticRewardMode::kLocal);
    ForwardAgent agent;
    const auto ep = run_episode(w, agent, opt, 21, nullptr);
    CHECK(ep.evaluator_calls == 0);
    CHECK(ep.samples_used == 4);
    int nonzero = 0;
    for (const auto& s : ep.steps) {
        if (s.sampled) {
            CHECK(std::isfinite(s.reward.r_A));
            if (s.reward.r_A != 0.0) ++nonzero;
        } else {
            CHECK(s.reward.r_A == 0.0);
        }
    }
    CHECK(nonzero >= 3);  // the first sample always improves on the zero prediction
}

TEST_CASE("rollout recording mirrors the episode stepwise") {
    const auto cfg = tiny_run();
    const auto w = make_test_world(cfg, 36);
    auto ev = make_evaluator(cfg, w, 7);
    PolicyAgent agent{PolicyNet(cfg.policy)};
    agent.set_tracing(true);
    RolloutSeq seq;
    seq.h0 = PolicyNet(cfg.policy).initial_state();
    const auto ep = run_episode(w, agent, options_for(cfg), 15, &ev, &seq);

    REQUIRE(seq.steps() == ep.steps.size());
    for (size_t t = 0; t < seq.steps(); ++t) {
        CHECK(seq.actions[t] == ep.steps[t].action);
        CHECK(seq.rewards[t] == ep.steps[t].reward.total);
        CHECK(std::isfinite(seq.logprobs[t]));
        CHECK(std::isfinite(seq.values[t]));
        CHECK(seq.dones[t] == (t + 1 == seq.steps() ? 1 : 0));
        REQUIRE(seq.masks[t].size() == static_cast<size_t>(kNumActions));
    }
    // once the budget is gone the mask forbids sampling
    int used = 0;
    for (size_t t = 0; t < seq.steps(); ++t) {
        if (used >= cfg.episode.budget)
            for (int a = 0; a < kNumActions; a += 2) CHECK(!seq.masks[t][static_cast<size_t>(a)]);
        if (ep.steps[t].sampled) ++used;
    }
    CHECK(ep.samples_used == cfg.episode.budget);

    // a non-tracing agent cannot feed a recorder
    ForwardAgent fwd;
    RolloutSeq seq2;
    CHECK_THROWS_AS(run_episode(w, fwd, options_for(cfg), 15, &ev, &seq2), ConfigInvalid);
}

TEST_CASE("over-budget sampling is an environment error") {
    const auto cfg = tiny_run();
    const auto w = make_test_world(cfg, 37);
    auto ev = make_evaluator(cfg, w, 8);
    SamplingSpammer spammer;
    CHECK_THROWS_AS(run_episode(w, spammer, options_for(cfg), 2, &ev), BudgetExhausted);
}

TEST_CASE("pose noise drifts belief but keeps episodes deterministic") {
    auto cfg = tiny_run();
    cfg.noise.enabled = true;
    cfg.noise.translation_sigma = 0.05;
    cfg.noise.rotation_sigma = 2.0;
    const auto w = make_test_world(cfg, 38);
    auto ev = make_evaluator(cfg, w, 9);
    ForwardAgent a1, a2;
    const auto e1 = run_episode(w, a1, options_for(cfg), 4, &ev);
    const auto e2 = run_episode(w, a2, options_for(cfg), 4, &ev);
    CHECK(e1.final_error == e2.final_error);
    bool drifted = false;
    for (size_t i = 0; i < e1.steps.size(); ++i) {
        const auto& p = e1.steps[i].pose;
        if (p.believed_pos.x != p.pos.x || p.believed_pos.y != p.pos.y) drifted = true;
        CHECK(e1.steps[i].pose.pos.x == e2.steps[i].pose.pos.x);
        CHECK(e1.steps[i].pose.believed_pos.x == e2.steps[i].pose.believed_pos.x);
    }
    CHECK(drifted);
}

TEST_CASE("episode logs round-trip through jsonl") {
    const auto cfg = tiny_run();
    const auto w = make_test_world(cfg, 39);
    auto ev = make_evaluator(cfg, w, 10);
    ForwardAgent agent;
    const auto ep = run_episode(w, agent, options_for(cfg), 5, &ev);

    const auto dir = std::filesystem::temp_directory_path() / "echoscout_harness_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "episode.jsonl";
    write_episode_jsonl(path, ep, {{"agent", "forward"}, {"world_seed", 39}});
    const auto lines = read_jsonl(path);
    REQUIRE(lines.size() == ep.steps.size() + 2);
    CHECK(lines.front()["type"] == "header");
    CHECK(lines.front()["agent"] == "forward");
    CHECK(lines.back()["type"] == "summary");
    CHECK(lines.back()["samples_used"] == ep.samples_used);
    CHECK(lines.back()["final_error"].get<double>() == ep.final_error);
    int sampled = 0;
    for (size_t i = 1; i + 1 < lines.size(); ++i) {
        const auto& l = lines[i];
        CHECK(l["type"] == "step");
        CHECK(l["t"] == static_cast<int>(i - 1));
        const auto& s = ep.steps[i - 1];
        CHECK(l["action"] == s.action);
        CHECK(l["reward"]["total"].get<double>() == s.reward.total);
        if (l["sampled"].get<bool>()) ++sampled;
    }
    CHECK(sampled == ep.samples_used);
}

TEST_CASE("dumped artifacts reload into the same model error") {
    const auto cfg = tiny_run();
    const auto w = make_test_world(cfg, 40);
    const auto queries = make_eval_queries(w, cfg.episode.eval_queries, 11);
    ModelEvaluator ev(w, queries, cfg.predictor, cfg.acoustics);
    ForwardAgent agent;
    const auto opt = options_for(cfg);
    const auto ep = run_episode(w, agent, opt, 6, &ev);

    const auto dir = std::filesystem::temp_directory_path() / "echoscout_dump_test";
    std::filesystem::remove_all(dir);
    dump_artifacts(dir, w, ep, opt, {{"agent", "forward"}});
    for (const char* name : {"episode.jsonl", "occupancy.pgm", "trajectory.ppm",
                             "error_curve.ppm"})
        CHECK(std::filesystem::exists(dir / name));
    REQUIRE(std::filesystem::exists(dir / "context"));

    const auto loaded = load_context(dir / "context", cfg.acoustics);
    REQUIRE(loaded.size() == ep.context.size());
    const double reloaded_error = ev.evaluate(loaded, &ep.map);
    CHECK(reloaded_error ==
          doctest::Approx(ep.final_error).epsilon(1e-4));  // wav quantization only
}

TEST_CASE("parallel_for is schedule-independent and propagates failures") {
    std::vector<uint64_t> a(257), b(257);
    parallel_for(1, 257, [&](int i) { a[static_cast<size_t>(i)] = derive_seed(5, "x", i); });
    parallel_for(8, 257, [&](int i) { b[static_cast<size_t>(i)] = derive_seed(5, "x", i); });
    CHECK(a == b);
    std::atomic<int> ran{0};
    CHECK_THROWS_AS(parallel_for(4, 100,
                                 [&](int i) {
                                     ran.fetch_add(1);
                                     if (i == 13) throw IoError("boom");
                                 }),
                    IoError);
    CHECK(ran.load() >= 1);
}

TEST_CASE("reward calibration reports per-component magnitudes") {
    auto cfg = tiny_run();
    cfg.trainer.train_eval_queries = 3;
    const json stats = calibrate_rewards(cfg, 2, 2);
    CHECK(stats["episodes"] == 2);
    CHECK(stats["steps"] == 2 * cfg.episode.horizon);
    for (const char* k : {"r_A", "r_V", "r_N"}) {
        CHECK(stats[k]["mean_abs"].get<double>() >= 0.0);
        CHECK(stats[k]["weighted_mean_abs"].get<double>() >= 0.0);
        CHECK(std::isfinite(stats[k]["max_abs"].get<double>()));
    }
    CHECK(stats["r_N"]["mean_abs"].get<double>() > 0.0);
}
