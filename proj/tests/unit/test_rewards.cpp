// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <vector>

#include "echoscout/rewards.hpp"
#include "echoscout/rng.hpp"

using namespace echoscout;

TEST_CASE("acoustic reward is the sampled error drop and zero on skip") {
    CHECK(acoustic_reward(0.010, 0.008, true) == doctest::Approx(0.002).epsilon(1e-15));
    CHECK(acoustic_reward(0.010, 0.008, false) == 0.0);
    CHECK(acoustic_reward(123.0, 7.0, false) == 0.0);
    CHECK(acoustic_reward(0.005, 0.009, true) < 0.0);  // a bad sample is penalized
    CHECK_THROWS_AS(acoustic_reward(-0.1, 0.0, true), ConfigInvalid);
}

TEST_CASE("acoustic rewards telescope over an episode exactly") {
    Rng rng(99);
    std::vector<double> trace{0.25};
    std::vector<bool> sampled;
    for (int t = 0; t < 64; ++t) {
        const bool s = rng.uniform() < 0.4;
        sampled.push_back(s);
        // error changes only when a sample is taken
        trace.push_back(s ? std::max(0.0, trace.back() + (-0.01 + 0.02 * rng.normal()))
                          : trace.back());
    }
    double sum = 0.0;
    for (size_t t = 0; t < sampled.size(); ++t) {
        const double r = acoustic_reward(trace[t], trace[t + 1], sampled[t]);
        // each step reproduces the defining difference bitwise
        CHECK(r == (sampled[t] ? trace[t] - trace[t + 1] : 0.0));
        sum += r;
    }
    // fixed-order sum telescopes to the end-to-end drop up to accumulation rounding
    CHECK(sum == doctest::Approx(trace.front() - trace.back()).epsilon(1e-12));
}

TEST_CASE("coverage reward handles growth, stasis, and the zero floor") {
    CHECK(coverage_reward(12.0, 10.0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(coverage_reward(10.0, 10.0) == 0.0);
    CHECK(coverage_reward(7.0, 0.0) == 7.0);
    CHECK(coverage_reward(0.5, 0.25) == 0.25);  // below-floor divisor clamps to 1
    CHECK(coverage_reward(5.0, 5.0) >= 0.0);
    CHECK_THROWS_AS(coverage_reward(9.0, 10.0), ConfigInvalid);
}

TEST_CASE("novelty reward is inverse square root and strictly decreasing") {
    CHECK(novelty_reward(1) == 1.0);
    CHECK(novelty_reward(4) == 0.5);
    CHECK(novelty_reward(9) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    for (int64_t n = 1; n < 1000; ++n) CHECK(novelty_reward(n + 1) < novelty_reward(n));
    CHECK_THROWS_AS(novelty_reward(0), ConfigInvalid);
}

TEST_CASE("total reward is the exact weighted sum with default weights") {
    const RewardWeights w;
    CHECK(w.lambda_A == 2e5);
    CHECK(w.lambda_V == 2e2);
    CHECK(w.lambda_N == 10.0);

    auto b = total_reward(0.0, 0.0, 1.0, 0.0, 0.0, w);
    CHECK(b.total == 10.0);

    b = total_reward(1e-5, 0.01, 0.5, 0.02, 0.019, w);
    CHECK(b.total == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(b.total == w.lambda_A * b.r_A + w.lambda_V * b.r_V + w.lambda_N * b.r_N);
    CHECK(b.L_R_before == 0.02);
    CHECK(b.L_R_after == 0.019);

    RewardWeights zero;
    zero.lambda_A = zero.lambda_V = zero.lambda_N = 0.0;
    CHECK(total_reward(100.0, 100.0, 100.0, 0.0, 0.0, zero).total == 0.0);
}

TEST_CASE("total reward is linear in each component") {
    RewardWeights w;
    w.lambda_A = 3.0;
    w.lambda_V = 5.0;
    w.lambda_N = 7.0;
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.normal();
        const double v = rng.uniform(), n = rng.uniform();
        const double base = total_reward(a, v, n, 0, 0, w).total;
        CHECK(total_reward(2.0 * a, v, n, 0, 0, w).total ==
              doctest::Approx(base + 3.0 * a).epsilon(1e-12));
        CHECK(total_reward(a, v + 1.0, n, 0, 0, w).total ==
              doctest::Approx(base + 5.0).epsilon(1e-12));
    }
}

TEST_CASE("local acoustic reward mirrors the global form") {
    CHECK(local_acoustic_reward(0.02, 0.015, true) == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(local_acoustic_reward(0.02, 0.015, false) == 0.0);
    // with a single query the global and local definitions coincide
    CHECK(local_acoustic_reward(0.33, 0.21, true) == acoustic_reward(0.33, 0.21, true));
}

TEST_CASE("reward weights reject negatives and unknown keys") {
    CHECK_THROWS_AS(RewardWeights::from_json(json::parse(R"({"lambda_A": -1.0})")),
                    ConfigInvalid);
    CHECK_THROWS_AS(RewardWeights::from_json(json::parse(R"({"lambda_Q": 1.0})")),
                    ConfigInvalid);
    const auto w = RewardWeights::from_json(json::parse(R"({"lambda_A": 5.0})"));
    CHECK(w.lambda_A == 5.0);
    CHECK(w.lambda_V == 2e2);
    const auto round = RewardWeights::from_json(w.to_json());
    CHECK(round.lambda_A == w.lambda_A);
    CHECK(round.lambda_N == w.lambda_N);
}
