// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "echoscout/io.hpp"

namespace echoscout {

struct RewardWeights {
    double lambda_A = 2e5;
    double lambda_V = 2e2;
    double lambda_N = 10.0;

    json to_json() const;
    static RewardWeights from_json(const json& j);
};

void validate_weights(const RewardWeights& w);

struct RewardBreakdown {
    double r_A = 0.0;
    double r_V = 0.0;
    double r_N = 0.0;
    double total = 0.0;
    double L_R_before = 0.0;
    double L_R_after = 0.0;

    json to_json() const;
};

// L_prev - L_cur when a sample was taken, else 0; may be negative
double acoustic_reward(double L_prev, double L_cur, bool sampled);

// relative coverage increase, floored at 1 m^2 for the first step
double coverage_reward(double V_cur, double V_prev);

// 1/sqrt(visit count); count is incremented before the reward is computed
double novelty_reward(int64_t visit_count);

RewardBreakdown total_reward(double r_A, double r_V, double r_N, double L_before, double L_after,
                             const RewardWeights& w);

// per-query error delta at the query nearest the agent; the Table-style
// "local" ablation swaps this in for the full-set acoustic term
double local_acoustic_reward(double err_before, double err_after, bool sampled);

}  // namespace echoscout
