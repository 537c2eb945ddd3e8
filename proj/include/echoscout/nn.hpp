// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "echoscout/common.hpp"
#include "echoscout/rng.hpp"

namespace echoscout {

using Vec = std::vector<double>;

// one named tensor with its gradient and optimizer moments
struct Param {
    std::string name;
    int rows = 0, cols = 1;
    Vec value, grad, m, v;

    void init(const std::string& n, int r, int c);
    size_t size() const { return value.size(); }
};

// y = W x + b with W stored row-major (out x in)
struct Linear {
    Param W, b;
    int out = 0, in = 0;

    Linear() = default;
    Linear(const std::string& name, int out_dim, int in_dim, Rng& rng);
    Vec forward(const Vec& x) const;
    // accumulates dW/db, returns dL/dx
    Vec backward(const Vec& x, const Vec& dy);
    void collect(std::vector<Param*>& out_params);
};

struct GruCache {
    Vec x, h_prev, r, z, n, hn_lin;  // hn_lin = W_hn h + b_hn before the reset gate
};

// gated recurrent unit, torch gate conventions (separate input/hidden biases)
struct GruCell {
    Linear ir, iz, in_, hr, hz, hn;
    int hidden = 0, input = 0;

    GruCell() = default;
    GruCell(const std::string& name, int input_dim, int hidden_dim, Rng& rng);
    Vec forward(const Vec& x, const Vec& h_prev, GruCache* cache = nullptr) const;
    // returns (dL/dx, dL/dh_prev) and accumulates parameter gradients
    std::pair<Vec, Vec> backward(const GruCache& c, const Vec& dh_next);
    void collect(std::vector<Param*>& out_params);
};

struct AdamConfig {
    double lr = 2.5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 0.5;  // global gradient norm clip, <= 0 disables
};

struct Adam {
    AdamConfig cfg;
    int64_t t = 0;

    void zero_grad(const std::vector<Param*>& params) const;
    // clips the global norm, then applies one bias-corrected step
    void step(const std::vector<Param*>& params);
};

double global_grad_norm(const std::vector<Param*>& params);

Vec softmax(const Vec& logits);
// disallowed entries get probability 0 / log-prob -inf
Vec masked_log_softmax(const Vec& logits, const std::vector<bool>& allowed);

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

}  // namespace echoscout
