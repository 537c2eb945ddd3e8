// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/rewards.hpp"

#include <cmath>

#include "echoscout/common.hpp"

namespace echoscout {

namespace {
constexpr double kCoverageFloor = 1.0;  // m^2, guards the undefined first-step division
}

json RewardWeights::to_json() const {
    json j;
    j["lambda_A"] = lambda_A;
    j["lambda_V"] = lambda_V;
    j["lambda_N"] = lambda_N;
    return j;
}

RewardWeights RewardWeights::from_json(const json& j) {
    require_keys(j, {"lambda_A", "lambda_V", "lambda_N"}, "reward weights");
    RewardWeights w;
    if (j.contains("lambda_A")) w.lambda_A = j["lambda_A"].get<double>();
    if (j.contains("lambda_V")) w.lambda_V = j["lambda_V"].get<double>();
    if (j.contains("lambda_N")) w.lambda_N = j["lambda_N"].get<double>();
    validate_weights(w);
    return w;
}

void validate_weights(const RewardWeights& w) {
    if (!(w.lambda_A >= 0.0) || !(w.lambda_V >= 0.0) || !(w.lambda_N >= 0.0))
        throw ConfigInvalid("reward weights must be non-negative");
}

json RewardBreakdown::to_json() const {
    json j;
    j["r_A"] = r_A;
    j["r_V"] = r_V;
    j["r_N"] = r_N;
    j["total"] = total;
    j["L_R_before"] = L_R_before;
    j["L_R_after"] = L_R_after;
    return j;
}

double acoustic_reward(double L_prev, double L_cur, bool sampled) {
    if (L_prev < 0.0 || L_cur < 0.0) throw ConfigInvalid("model errors must be non-negative");
    return sampled ? L_prev - L_cur : 0.0;
}

double coverage_reward(double V_cur, double V_prev) {
    if (V_prev < 0.0 || V_cur < V_prev)
        throw ConfigInvalid("coverage must be non-negative and monotone");
    return (V_cur - V_prev) / std::max(V_prev, kCoverageFloor);
}

double novelty_reward(int64_t visit_count) {
    if (visit_count < 1) throw ConfigInvalid("visit count must be >= 1");
    return 1.0 / std::sqrt(static_cast<double>(visit_count));
}

RewardBreakdown total_reward(double r_A, double r_V, double r_N, double L_before, double L_after,
                             const RewardWeights& w) {
    validate_weights(w);
    RewardBreakdown b;
    b.r_A = r_A;
    b.r_V = r_V;
    b.r_N = r_N;
    b.total = w.lambda_A * r_A + w.lambda_V * r_V + w.lambda_N * r_N;
    b.L_R_before = L_before;
    b.L_R_after = L_after;
    return b;
}

double local_acoustic_reward(double err_before, double err_after, bool sampled) {
    if (err_before < 0.0 || err_after < 0.0)
        throw ConfigInvalid("query errors must be non-negative");
    return sampled ? err_before - err_after : 0.0;
}

}  // namespace echoscout
