// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/baselines.hpp"

#include <algorithm>

#include "echoscout/common.hpp"

namespace echoscout {

namespace {

bool can_sample(const AgentContext& ctx) { return ctx.samples_used < ctx.budget; }

int pick_masked(const Vec& probs, const std::vector<bool>& allowed, Rng& rng) {
    double total = 0.0;
    for (size_t i = 0; i < probs.size(); ++i)
        if (allowed[i]) total += probs[i];
    const double u = rng.uniform() * total;
    double acc = 0.0;
    int last = 0;
    for (size_t i = 0; i < probs.size(); ++i) {
        if (!allowed[i]) continue;
        last = static_cast<int>(i);
        acc += probs[i];
        if (u < acc) return last;
    }
    return last;
}

}  // namespace

bool schedule_fires(int t, int horizon, int budget) {
    if (horizon < 1 || budget < 1) throw ConfigInvalid("schedule needs horizon, budget >= 1");
    const int interval = std::max(1, horizon / budget);
    return (t + 1) % interval == 0;
}

int RandomAgent::act(const AgentContext& ctx) {
    const auto mask = action_mask(can_sample(ctx));
    std::vector<int> allowed;
    for (int a = 0; a < kNumActions; ++a)
        if (mask[a]) allowed.push_back(a);
    return allowed[static_cast<size_t>(rng_.uniform_int(0, static_cast<int>(allowed.size()) - 1))];
}

int ForwardAgent::act(const AgentContext& ctx) {
    const Motion m = ctx.last_blocked ? Motion::TurnLeft : Motion::MoveForward;
    const bool s = can_sample(ctx) && schedule_fires(ctx.t, ctx.horizon, ctx.budget);
    return make_action(m, s);
}

int GreedyAgent::act(const AgentContext& ctx) {
    const Motion m = static_cast<Motion>(rng_.uniform_int(0, 2));
    return make_action(m, can_sample(ctx));
}

PolicyAgent::PolicyAgent(PolicyNet net, std::string name, bool argmax)
    : net_(std::move(net)), name_(std::move(name)), argmax_(argmax), h_(net_.initial_state()) {}

void PolicyAgent::reset(uint64_t seed) {
    h_ = net_.initial_state();
    rng_ = Rng(derive_seed(seed, "policy-agent"));
}

int PolicyAgent::act(const AgentContext& ctx) {
    auto obs = encode_observation(ctx.map, ctx.pose, ctx.prev_echo, ctx.samples_used, ctx.budget,
                                  ctx.scan, ctx.max_range, net_.config());
    const auto out = net_.forward(obs, h_);
    h_ = out.h_next;
    const auto mask = action_mask(can_sample(ctx));
    int action;
    if (argmax_) {
        action = -1;
        for (int a = 0; a < kNumActions; ++a) {
            if (!mask[a]) continue;
            if (action < 0 || out.logits[a] > out.logits[action]) action = a;
        }
    } else {
        action = sample_action(out.logits, mask, rng_);
    }
    if (tracing_) {
        const Vec lp = masked_log_softmax(out.logits, mask);
        trace_.obs = std::move(obs);
        trace_.logits = out.logits;
        trace_.value = out.value;
        trace_.logprob = lp[action];
        trace_.mask = mask;
        trace_.action = action;
    }
    return action;
}

UniformScheduleAgent::UniformScheduleAgent(PolicyNet net, std::string name)
    : net_(std::move(net)), name_(std::move(name)), h_(net_.initial_state()) {}

void UniformScheduleAgent::reset(uint64_t seed) {
    h_ = net_.initial_state();
    rng_ = Rng(derive_seed(seed, "uniform-agent"));
}

int UniformScheduleAgent::act(const AgentContext& ctx) {
    const auto obs = encode_observation(ctx.map, ctx.pose, ctx.prev_echo, ctx.samples_used,
                                        ctx.budget, ctx.scan, ctx.max_range, net_.config());
    const auto out = net_.forward(obs, h_);
    h_ = out.h_next;
    const auto p = softmax(out.logits);
    Vec marginal(3, 0.0);
    for (int m = 0; m < 3; ++m) marginal[m] = p[2 * m] + p[2 * m + 1];
    const int m = pick_masked(marginal, std::vector<bool>(3, true), rng_);
    const bool s = can_sample(ctx) && schedule_fires(ctx.t, ctx.horizon, ctx.budget);
    return make_action(static_cast<Motion>(m), s);
}

std::unique_ptr<Agent> make_scripted(const std::string& name) {
    if (name == "random") return std::make_unique<RandomAgent>();
    if (name == "forward") return std::make_unique<ForwardAgent>();
    if (name == "greedy") return std::make_unique<GreedyAgent>();
    throw ConfigInvalid("unknown scripted agent: " + name);
}

}  // namespace echoscout
