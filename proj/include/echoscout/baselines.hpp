// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "echoscout/embodiment.hpp"
#include "echoscout/policy.hpp"
#include "echoscout/renderer.hpp"
#include "echoscout/rng.hpp"

namespace echoscout {

// believed state visible to an agent at decision time
struct AgentContext {
    const OccupancyMap& map;
    const AgentPose& pose;
    const DepthScan& scan;
    double max_range = 0.0;
    const FeatureVec* prev_echo = nullptr;  // null when the previous step skipped
    int samples_used = 0;
    int budget = 0;
    int t = 0;        // 0-based step index
    int horizon = 0;  // steps per episode
    bool last_blocked = false;
};

inline std::vector<bool> action_mask(bool can_sample) {
    std::vector<bool> m(kNumActions, true);
    if (!can_sample) m[0] = m[2] = m[4] = false;
    return m;
}

inline ActionCommand to_command(int action) {
    return {action_motion(action), action_samples(action) ? Sampling::Sample : Sampling::Skip};
}

// 1-indexed uniform schedule: fires budget times over horizon steps when
// budget divides horizon, at steps {k*horizon/budget}
bool schedule_fires(int t, int horizon, int budget);

// per-decision internals a policy exposes for on-policy training
struct ActTrace {
    ObservationFeatures obs;
    Vec logits;
    double value = 0.0;
    double logprob = 0.0;
    std::vector<bool> mask;
    int action = 0;
};

class Agent {
  public:
    virtual ~Agent() = default;
    virtual void reset(uint64_t seed) = 0;
    virtual int act(const AgentContext& ctx) = 0;
    virtual std::string name() const = 0;
    // non-null only for tracing policies, valid until the next act()
    virtual const ActTrace* trace() const { return nullptr; }
};

// uniform over the allowed composite actions
class RandomAgent : public Agent {
  public:
    void reset(uint64_t seed) override { rng_ = Rng(derive_seed(seed, "random-agent")); }
    int act(const AgentContext& ctx) override;
    std::string name() const override { return "random"; }

  private:
    Rng rng_{0};
};

// always forward, one left turn after a blocked move; samples on the
// uniform schedule
class ForwardAgent : public Agent {
  public:
    void reset(uint64_t) override {}
    int act(const AgentContext& ctx) override;
    std::string name() const override { return "forward"; }
};

// uniform random motion; spends the whole budget on the first steps
class GreedyAgent : public Agent {
  public:
    void reset(uint64_t seed) override { rng_ = Rng(derive_seed(seed, "greedy-agent")); }
    int act(const AgentContext& ctx) override;
    std::string name() const override { return "greedy"; }

  private:
    Rng rng_{0};
};

// recurrent policy over the full composite space
class PolicyAgent : public Agent {
  public:
    explicit PolicyAgent(PolicyNet net, std::string name = "active", bool argmax = false);
    void reset(uint64_t seed) override;
    int act(const AgentContext& ctx) override;
    std::string name() const override { return name_; }
    const PolicyNet& net() const { return net_; }
    void set_tracing(bool on) { tracing_ = on; }
    const ActTrace* trace() const override { return tracing_ ? &trace_ : nullptr; }

  private:
    PolicyNet net_;
    std::string name_;
    bool argmax_ = false;
    bool tracing_ = false;
    ActTrace trace_;
    Vec h_;
    Rng rng_{0};
};

// policy motion marginal, sampling forced onto the uniform schedule
class UniformScheduleAgent : public Agent {
  public:
    explicit UniformScheduleAgent(PolicyNet net, std::string name = "uniform");
    void reset(uint64_t seed) override;
    int act(const AgentContext& ctx) override;
    std::string name() const override { return name_; }

  private:
    PolicyNet net_;
    std::string name_;
    Vec h_;
    Rng rng_{0};
};

// random | forward | greedy
std::unique_ptr<Agent> make_scripted(const std::string& name);

}  // namespace echoscout
