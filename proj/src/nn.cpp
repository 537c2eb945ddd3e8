// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace echoscout {

void Param::init(const std::string& n, int r, int c) {
    name = n;
    rows = r;
    cols = c;
    const size_t sz = static_cast<size_t>(r) * c;
    value.assign(sz, 0.0);
    grad.assign(sz, 0.0);
    m.assign(sz, 0.0);
    v.assign(sz, 0.0);
}

Linear::Linear(const std::string& name, int out_dim, int in_dim, Rng& rng)
    : out(out_dim), in(in_dim) {
    W.init(name + ".W", out_dim, in_dim);
    b.init(name + ".b", out_dim, 1);
    const double limit = std::sqrt(6.0 / (in_dim + out_dim));
    for (auto& w : W.value) w = rng.uniform(-limit, limit);
}

Vec Linear::forward(const Vec& x) const {
    if (static_cast<int>(x.size()) != in) throw ShapeMismatch("linear input size");
    Vec y(out);
    for (int i = 0; i < out; ++i) {
        double acc = b.value[i];
        const double* w = &W.value[static_cast<size_t>(i) * in];
        for (int j = 0; j < in; ++j) acc += w[j] * x[j];
        y[i] = acc;
    }
    return y;
}

Vec Linear::backward(const Vec& x, const Vec& dy) {
    if (static_cast<int>(dy.size()) != out || static_cast<int>(x.size()) != in)
        throw ShapeMismatch("linear backward size");
    Vec dx(in, 0.0);
    for (int i = 0; i < out; ++i) {
        const double g = dy[i];
        b.grad[i] += g;
        double* wg = &W.grad[static_cast<size_t>(i) * in];
        const double* w = &W.value[static_cast<size_t>(i) * in];
        for (int j = 0; j < in; ++j) {
            wg[j] += g * x[j];
            dx[j] += g * w[j];
        }
    }
    return dx;
}

void Linear::collect(std::vector<Param*>& out_params) {
    out_params.push_back(&W);
    out_params.push_back(&b);
}

GruCell::GruCell(const std::string& name, int input_dim, int hidden_dim, Rng& rng)
    : ir(name + ".ir", hidden_dim, input_dim, rng),
      iz(name + ".iz", hidden_dim, input_dim, rng),
      in_(name + ".in", hidden_dim, input_dim, rng),
      hr(name + ".hr", hidden_dim, hidden_dim, rng),
      hz(name + ".hz", hidden_dim, hidden_dim, rng),
      hn(name + ".hn", hidden_dim, hidden_dim, rng),
      hidden(hidden_dim),
      input(input_dim) {}

Vec GruCell::forward(const Vec& x, const Vec& h_prev, GruCache* cache) const {
    if (static_cast<int>(h_prev.size()) != hidden) throw ShapeMismatch("gru hidden size");
    const Vec ar_i = ir.forward(x), ar_h = hr.forward(h_prev);
    const Vec az_i = iz.forward(x), az_h = hz.forward(h_prev);
    const Vec an_i = in_.forward(x);
    Vec hn_lin = hn.forward(h_prev);
    Vec r(hidden), z(hidden), n(hidden), h_next(hidden);
    for (int i = 0; i < hidden; ++i) {
        r[i] = sigmoid(ar_i[i] + ar_h[i]);
        z[i] = sigmoid(az_i[i] + az_h[i]);
        n[i] = std::tanh(an_i[i] + r[i] * hn_lin[i]);
        h_next[i] = (1.0 - z[i]) * n[i] + z[i] * h_prev[i];
    }
    if (cache != nullptr) {
        cache->x = x;
        cache->h_prev = h_prev;
        cache->r = std::move(r);
        cache->z = std::move(z);
        cache->n = n;
        cache->hn_lin = std::move(hn_lin);
    }
    return h_next;
}

std::pair<Vec, Vec> GruCell::backward(const GruCache& c, const Vec& dh_next) {
    if (static_cast<int>(dh_next.size()) != hidden) throw ShapeMismatch("gru backward size");
    Vec da_n(hidden), da_r(hidden), da_z(hidden), du(hidden), dh(hidden);
    for (int i = 0; i < hidden; ++i) {
        const double g = dh_next[i];
        const double dn = g * (1.0 - c.z[i]);
        const double dz = g * (c.h_prev[i] - c.n[i]);
        dh[i] = g * c.z[i];
        da_n[i] = dn * (1.0 - c.n[i] * c.n[i]);
        du[i] = da_n[i] * c.r[i];
        const double dr = da_n[i] * c.hn_lin[i];
        da_r[i] = dr * c.r[i] * (1.0 - c.r[i]);
        da_z[i] = dz * c.z[i] * (1.0 - c.z[i]);
    }
    Vec dx = in_.backward(c.x, da_n);
    const Vec dx_r = ir.backward(c.x, da_r);
    const Vec dx_z = iz.backward(c.x, da_z);
    for (int j = 0; j < input; ++j) dx[j] += dx_r[j] + dx_z[j];
    const Vec dh_n = hn.backward(c.h_prev, du);
    const Vec dh_r = hr.backward(c.h_prev, da_r);
    const Vec dh_z = hz.backward(c.h_prev, da_z);
    for (int i = 0; i < hidden; ++i) dh[i] += dh_n[i] + dh_r[i] + dh_z[i];
    return {std::move(dx), std::move(dh)};
}

void GruCell::collect(std::vector<Param*>& out_params) {
    ir.collect(out_params);
    iz.collect(out_params);
    in_.collect(out_params);
    hr.collect(out_params);
    hz.collect(out_params);
    hn.collect(out_params);
}

void Adam::zero_grad(const std::vector<Param*>& params) const {
    for (auto* p : params) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

double global_grad_norm(const std::vector<Param*>& params) {
    double sq = 0.0;
    for (const auto* p : params)
        for (const double g : p->grad) sq += g * g;
    return std::sqrt(sq);
}

void Adam::step(const std::vector<Param*>& params) {
    double scale = 1.0;
    if (cfg.clip_norm > 0.0) {
        const double norm = global_grad_norm(params);
        if (!std::isfinite(norm)) throw NonFiniteLoss("non-finite gradient norm");
        if (norm > cfg.clip_norm) scale = cfg.clip_norm / norm;
    }
    ++t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (auto* p : params) {
        for (size_t i = 0; i < p->size(); ++i) {
            const double g = p->grad[i] * scale;
            p->m[i] = cfg.beta1 * p->m[i] + (1.0 - cfg.beta1) * g;
            p->v[i] = cfg.beta2 * p->v[i] + (1.0 - cfg.beta2) * g * g;
            const double mh = p->m[i] / bc1;
            const double vh = p->v[i] / bc2;
            p->value[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
        }
    }
}

Vec softmax(const Vec& logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    Vec p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

Vec masked_log_softmax(const Vec& logits, const std::vector<bool>& allowed) {
    if (logits.size() != allowed.size()) throw ShapeMismatch("mask size");
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < logits.size(); ++i)
        if (allowed[i]) mx = std::max(mx, logits[i]);
    if (!std::isfinite(mx)) throw ConfigInvalid("mask disallows every action");
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i)
        if (allowed[i]) sum += std::exp(logits[i] - mx);
    const double lse = mx + std::log(sum);
    Vec out(logits.size());
    for (size_t i = 0; i < logits.size(); ++i)
        out[i] = allowed[i] ? logits[i] - lse : -std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace echoscout
