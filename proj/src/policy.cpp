// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

namespace echoscout {

namespace {

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

void put_u64(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_f64s(std::ostream& os, const Vec& v) {
    static_assert(sizeof(double) == 8);
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * 8));
}

void get_f64s(std::istream& is, Vec& v) {
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
}

constexpr char kCkptMagic[4] = {'E', 'S', 'C', 'P'};
constexpr uint32_t kCkptVersion = 1;

}  // namespace

json PolicyConfig::to_json() const {
    json j;
    j["patch"] = patch;
    j["pose_dim"] = pose_dim;
    j["hidden"] = hidden;
    j["enc_occ"] = enc_occ;
    j["enc_pose"] = enc_pose;
    j["enc_echo"] = enc_echo;
    j["enc_misc"] = enc_misc;
    j["seed"] = seed;
    return j;
}

PolicyConfig PolicyConfig::from_json(const json& j) {
    require_keys(j, {"patch", "pose_dim", "hidden", "enc_occ", "enc_pose", "enc_echo",
                     "enc_misc", "seed"},
                 "policy config");
    PolicyConfig c;
    if (j.contains("patch")) c.patch = j["patch"].get<int>();
    if (j.contains("pose_dim")) c.pose_dim = j["pose_dim"].get<int>();
    if (j.contains("hidden")) c.hidden = j["hidden"].get<int>();
    if (j.contains("enc_occ")) c.enc_occ = j["enc_occ"].get<int>();
    if (j.contains("enc_pose")) c.enc_pose = j["enc_pose"].get<int>();
    if (j.contains("enc_echo")) c.enc_echo = j["enc_echo"].get<int>();
    if (j.contains("enc_misc")) c.enc_misc = j["enc_misc"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    validate_policy_config(c);
    return c;
}

void validate_policy_config(const PolicyConfig& cfg) {
    if (cfg.patch < 3 || cfg.patch % 2 == 0)
        throw ConfigInvalid("occupancy patch must be odd and >= 3");
    if (cfg.pose_dim < 6 || cfg.pose_dim % 6 != 0)
        throw ConfigInvalid("pose_dim must be a positive multiple of 6");
    if (cfg.hidden < 1 || cfg.enc_occ < 1 || cfg.enc_pose < 1 || cfg.enc_echo < 1 ||
        cfg.enc_misc < 1)
        throw ConfigInvalid("layer widths must be positive");
}

Vec pose_embedding(const Vec2& pos, int theta_deg, int dims) {
    if (dims < 6 || dims % 6 != 0)
        throw ConfigInvalid("pose embedding size must be a multiple of 6");
    const int k_freqs = dims / 6;
    const double theta = deg_to_rad(static_cast<double>(theta_deg));
    Vec out;
    out.reserve(static_cast<size_t>(dims));
    for (int k = 0; k < k_freqs; ++k) {
        // positions: octave ladder below the alias-free base period;
        // heading: integer multiples (theta lives on a circle already)
        const double w = 2.0 * kPi * std::pow(2.0, k) / kPoseEmbedPeriod;
        out.push_back(std::sin(w * pos.x));
        out.push_back(std::cos(w * pos.x));
        out.push_back(std::sin(w * pos.y));
        out.push_back(std::cos(w * pos.y));
        out.push_back(std::sin((k + 1.0) * theta));
        out.push_back(std::cos((k + 1.0) * theta));
    }
    return out;
}

ObservationFeatures encode_observation(const OccupancyMap& map, const AgentPose& pose,
                                       const FeatureVec* prev_echo, int samples_used,
                                       int budget, const DepthScan& scan, double max_range,
                                       const PolicyConfig& cfg) {
    validate_policy_config(cfg);
    if (scan.ranges.empty()) throw ShapeMismatch("scan must be non-empty");
    if (budget < 1 || samples_used < 0 || samples_used > budget)
        throw ConfigInvalid("invalid budget state");
    if (max_range <= 0.0) throw ConfigInvalid("max_range must be positive");

    ObservationFeatures f;
    // egocentric crop in the believed frame: rows ahead of the agent, columns
    // to its right; cells outside the map read as occupied
    const int P = cfg.patch, c0 = P / 2;
    const double cs = map.cell_size();
    const Vec2 h = heading_vec(pose.believed_theta_deg);
    const Vec2 right{h.y, -h.x};
    f.occ.reserve(static_cast<size_t>(P) * P);
    for (int pr = 0; pr < P; ++pr) {
        const double fwd = (c0 - pr) * cs;
        for (int pc = 0; pc < P; ++pc) {
            const double lat = (pc - c0) * cs;
            const Vec2 p{pose.believed_pos.x + fwd * h.x + lat * right.x,
                         pose.believed_pos.y + fwd * h.y + lat * right.y};
            const int ix = static_cast<int>(std::floor(p.x / cs));
            const int iy = static_cast<int>(std::floor(p.y / cs));
            double v = -1.0;
            if (map.in_bounds(ix, iy)) {
                const auto c = map.cell(ix, iy);
                v = c == OccupancyMap::kFree ? 1.0 : (c == OccupancyMap::kUnknown ? 0.0 : -1.0);
            }
            f.occ.push_back(v);
        }
    }

    f.pose = pose_embedding(pose.believed_pos, pose.believed_theta_deg, cfg.pose_dim);

    f.echo.assign(kEchoFeatDim, 0.0);
    if (prev_echo != nullptr) {
        for (int b = 0; b < kBands; ++b) {
            f.echo[b] = prev_echo->rt60[b] / kMaxRt60;
            f.echo[kBands + b] =
                std::log10(std::max(prev_echo->band_energy[b], 1e-12)) / 6.0;
        }
        f.echo[2 * kBands] = prev_echo->drr_db / kDrrCapDb;
        f.echo[2 * kBands + 1] = 1.0;  // sampled flag
    }

    double mn = scan.ranges[0], mx = scan.ranges[0], mean = 0.0;
    for (const double r : scan.ranges) {
        mn = std::min(mn, r);
        mx = std::max(mx, r);
        mean += r;
    }
    mean /= static_cast<double>(scan.ranges.size());
    f.misc = {static_cast<double>(samples_used) / budget, mn / max_range, mean / max_range,
              mx / max_range};
    return f;
}

PolicyNet::PolicyNet(const PolicyConfig& cfg) : cfg_(cfg) {
    validate_policy_config(cfg);
    Rng rng(derive_seed(cfg.seed, "policy-init", 0));
    enc_occ_ = Linear("enc_occ", cfg.enc_occ, cfg.patch * cfg.patch, rng);
    enc_pose_ = Linear("enc_pose", cfg.enc_pose, cfg.pose_dim, rng);
    enc_echo_ = Linear("enc_echo", cfg.enc_echo, kEchoFeatDim, rng);
    enc_misc_ = Linear("enc_misc", cfg.enc_misc, kMiscFeatDim, rng);
    gru_ = GruCell("gru", cfg.concat_dim(), cfg.hidden, rng);
    actor_ = Linear("actor", kNumActions, cfg.hidden, rng);
    critic_ = Linear("critic", 1, cfg.hidden, rng);
}

namespace {

Vec tanh_vec(Vec v) {
    for (auto& x : v) x = std::tanh(x);
    return v;
}

}  // namespace

PolicyNet::Output PolicyNet::forward(const ObservationFeatures& obs, const Vec& h_prev,
                                     PolicyStepCache* cache) const {
    const Vec occ_h = tanh_vec(enc_occ_.forward(obs.occ));
    const Vec pose_h = tanh_vec(enc_pose_.forward(obs.pose));
    const Vec echo_h = tanh_vec(enc_echo_.forward(obs.echo));
    const Vec misc_h = tanh_vec(enc_misc_.forward(obs.misc));
    Vec zcat;
    zcat.reserve(static_cast<size_t>(cfg_.concat_dim()));
    zcat.insert(zcat.end(), occ_h.begin(), occ_h.end());
    zcat.insert(zcat.end(), pose_h.begin(), pose_h.end());
    zcat.insert(zcat.end(), echo_h.begin(), echo_h.end());
    zcat.insert(zcat.end(), misc_h.begin(), misc_h.end());

    Output out;
    out.h_next = gru_.forward(zcat, h_prev, cache != nullptr ? &cache->gru : nullptr);
    out.logits = actor_.forward(out.h_next);
    out.value = critic_.forward(out.h_next)[0];
    if (cache != nullptr) {
        cache->obs = obs;
        cache->occ_h = occ_h;
        cache->pose_h = pose_h;
        cache->echo_h = echo_h;
        cache->misc_h = misc_h;
        cache->zcat = std::move(zcat);
        cache->h_next = out.h_next;
        cache->logits = out.logits;
        cache->value = out.value;
    }
    return out;
}

Vec PolicyNet::backward(const PolicyStepCache& cache, const Vec& dlogits, double dvalue,
                        const Vec& dh_next) {
    Vec dh = dh_next;
    const Vec dh_a = actor_.backward(cache.h_next, dlogits);
    const Vec dh_c = critic_.backward(cache.h_next, {dvalue});
    for (int i = 0; i < cfg_.hidden; ++i) dh[i] += dh_a[i] + dh_c[i];

    auto [dz, dh_prev] = gru_.backward(cache.gru, dh);

    size_t off = 0;
    const auto block = [&](Linear& enc, const Vec& act, const Vec& x) {
        Vec dpre(act.size());
        for (size_t i = 0; i < act.size(); ++i)
            dpre[i] = dz[off + i] * (1.0 - act[i] * act[i]);
        enc.backward(x, dpre);
        off += act.size();
    };
    block(enc_occ_, cache.occ_h, cache.obs.occ);
    block(enc_pose_, cache.pose_h, cache.obs.pose);
    block(enc_echo_, cache.echo_h, cache.obs.echo);
    block(enc_misc_, cache.misc_h, cache.obs.misc);
    return dh_prev;
}

std::vector<Param*> PolicyNet::params() {
    std::vector<Param*> out;
    enc_occ_.collect(out);
    enc_pose_.collect(out);
    enc_echo_.collect(out);
    enc_misc_.collect(out);
    gru_.collect(out);
    actor_.collect(out);
    critic_.collect(out);
    return out;
}

int64_t PolicyNet::param_count() const {
    auto& self = const_cast<PolicyNet&>(*this);
    int64_t n = 0;
    for (const auto* p : self.params()) n += static_cast<int64_t>(p->size());
    return n;
}

int sample_action(const Vec& logits, const std::vector<bool>& allowed, Rng& rng) {
    const Vec lp = masked_log_softmax(logits, allowed);
    const double u = rng.uniform();
    double cdf = 0.0;
    int last_allowed = -1;
    for (size_t i = 0; i < lp.size(); ++i) {
        if (!allowed[i]) continue;
        last_allowed = static_cast<int>(i);
        cdf += std::exp(lp[i]);
        if (u < cdf) return static_cast<int>(i);
    }
    return last_allowed;  // u landed in the rounding tail
}

json TrainConfig::to_json() const {
    json j;
    j["gamma"] = gamma;
    j["gae_lambda"] = gae_lambda;
    j["clip_eps"] = clip_eps;
    j["entropy_coef"] = entropy_coef;
    j["value_coef"] = value_coef;
    j["learning_rate"] = learning_rate;
    j["grad_clip"] = grad_clip;
    j["reward_scale"] = reward_scale;
    j["epochs"] = epochs;
    j["minibatch_seqs"] = minibatch_seqs;
    j["updates"] = updates;
    j["seed"] = seed;
    return j;
}

TrainConfig TrainConfig::from_json(const json& j) {
    require_keys(j,
                 {"gamma", "gae_lambda", "clip_eps", "entropy_coef", "value_coef",
                  "learning_rate", "grad_clip", "epochs", "minibatch_seqs", "updates", "seed"},
                 "train config");
    TrainConfig c;
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("gae_lambda")) c.gae_lambda = j["gae_lambda"].get<double>();
    if (j.contains("clip_eps")) c.clip_eps = j["clip_eps"].get<double>();
    if (j.contains("entropy_coef")) c.entropy_coef = j["entropy_coef"].get<double>();
    if (j.contains("value_coef")) c.value_coef = j["value_coef"].get<double>();
    if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("grad_clip")) c.grad_clip = j["grad_clip"].get<double>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("minibatch_seqs")) c.minibatch_seqs = j["minibatch_seqs"].get<int>();
    if (j.contains("updates")) c.updates = j["updates"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    validate_train_config(c);
    return c;
}

void validate_train_config(const TrainConfig& cfg) {
    if (!(cfg.gamma > 0.0) || cfg.gamma > 1.0) throw ConfigInvalid("gamma must be in (0, 1]");
    if (cfg.gae_lambda < 0.0 || cfg.gae_lambda > 1.0)
        throw ConfigInvalid("gae_lambda must be in [0, 1]");
    if (!(cfg.clip_eps > 0.0)) throw ConfigInvalid("clip_eps must be positive");
    if (cfg.entropy_coef < 0.0 || cfg.value_coef < 0.0)
        throw ConfigInvalid("loss coefficients must be non-negative");
    if (!(cfg.learning_rate > 0.0)) throw ConfigInvalid("learning rate must be positive");
    if (cfg.epochs < 1 || cfg.minibatch_seqs < 1 || cfg.updates < 1)
        throw ConfigInvalid("epochs, minibatch size, and updates must be positive");
}

GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<uint8_t>& dones, double bootstrap_value, double gamma,
                      double gae_lambda) {
    const size_t T = rewards.size();
    if (values.size() != T || dones.size() != T)
        throw LengthMismatch("rewards, values, and dones must align");
    GaeResult out;
    out.advantages.assign(T, 0.0);
    out.returns.assign(T, 0.0);
    double acc = 0.0;
    for (size_t i = T; i-- > 0;) {
        const double v_next = (i + 1 == T) ? bootstrap_value : values[i + 1];
        const double nonterm = dones[i] ? 0.0 : 1.0;
        const double delta = rewards[i] + gamma * v_next * nonterm - values[i];
        acc = delta + gamma * gae_lambda * nonterm * acc;
        out.advantages[i] = acc;
        out.returns[i] = acc + values[i];
    }
    return out;
}

void prepare_batch(RolloutBatch& batch, const TrainConfig& cfg) {
    validate_train_config(cfg);
    size_t total = 0;
    for (auto& seq : batch.seqs) {
        auto g = compute_gae(seq.rewards, seq.values, seq.dones, seq.bootstrap_value,
                             cfg.gamma, cfg.gae_lambda);
        seq.advantages = std::move(g.advantages);
        seq.returns = std::move(g.returns);
        total += seq.steps();
    }
    if (total == 0) throw ConfigInvalid("empty rollout batch");
    double mean = 0.0;
    for (const auto& seq : batch.seqs)
        for (const double a : seq.advantages) mean += a;
    mean /= static_cast<double>(total);
    double var = 0.0;
    for (const auto& seq : batch.seqs)
        for (const double a : seq.advantages) var += (a - mean) * (a - mean);
    var /= static_cast<double>(total);
    const double inv = 1.0 / (std::sqrt(var) + 1e-8);
    for (auto& seq : batch.seqs)
        for (auto& a : seq.advantages) a = (a - mean) * inv;
}

namespace {

struct StepGrads {
    Vec dlogits;
    double dvalue = 0.0;
};

struct LossAccum {
    double policy = 0.0, value = 0.0, entropy = 0.0;
};

}  // namespace

static double ppo_minibatch_impl(PolicyNet& net, const RolloutBatch& batch,
                                 const std::vector<size_t>& seq_indices,
                                 const TrainConfig& cfg, bool do_backward, LossAccum* accum) {
    size_t total = 0;
    for (const size_t si : seq_indices) total += batch.seqs[si].steps();
    if (total == 0) throw ConfigInvalid("empty minibatch");
    const double inv_total = 1.0 / static_cast<double>(total);

    LossAccum acc;
    for (const size_t si : seq_indices) {
        const auto& seq = batch.seqs[si];
        const size_t T = seq.steps();
        if (seq.obs.size() != T || seq.logprobs.size() != T || seq.advantages.size() != T ||
            seq.returns.size() != T || seq.masks.size() != T || seq.dones.size() != T)
            throw LengthMismatch("rollout sequence fields must align");

        std::vector<PolicyStepCache> caches(do_backward ? T : 1);
        std::vector<StepGrads> grads(do_backward ? T : 0);
        Vec h = seq.h0.empty() ? net.initial_state() : seq.h0;
        for (size_t t = 0; t < T; ++t) {
            PolicyStepCache* cache = do_backward ? &caches[t] : &caches[0];
            const auto out = net.forward(seq.obs[t], h, cache);
            h = out.h_next;
            if (t + 1 < T && seq.dones[t]) h = net.initial_state();

            const Vec lp = masked_log_softmax(out.logits, seq.masks[t]);
            const int a = seq.actions[t];
            const double ratio = std::exp(lp[a] - seq.logprobs[t]);
            const double adv = seq.advantages[t];
            const double rc = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
            const double surr1 = ratio * adv;
            const double surr2 = rc * adv;
            acc.policy -= std::min(surr1, surr2);
            const double verr = out.value - seq.returns[t];
            acc.value += verr * verr;
            Vec p(lp.size(), 0.0);
            double ent = 0.0;
            for (size_t i = 0; i < lp.size(); ++i)
                if (seq.masks[t][i]) {
                    p[i] = std::exp(lp[i]);
                    ent -= p[i] * lp[i];
                }
            acc.entropy += ent;

            if (do_backward) {
                auto& g = grads[t];
                g.dlogits.assign(lp.size(), 0.0);
                // clipped surrogate: gradient only flows on the unclipped branch
                if (surr1 <= surr2) {
                    const double c = -inv_total * adv * ratio;
                    for (size_t i = 0; i < lp.size(); ++i)
                        if (seq.masks[t][i])
                            g.dlogits[i] = c * ((static_cast<int>(i) == a ? 1.0 : 0.0) - p[i]);
                }
                // entropy bonus: d(-c_e H)/dz_i = c_e p_i (log p_i + H)
                for (size_t i = 0; i < lp.size(); ++i)
                    if (seq.masks[t][i] && p[i] > 0.0)
                        g.dlogits[i] += inv_total * cfg.entropy_coef * p[i] * (lp[i] + ent);
                g.dvalue = inv_total * cfg.value_coef * 2.0 * verr;
            }
        }

        if (do_backward) {
            Vec carry(net.initial_state());
            for (size_t t = T; t-- > 0;) {
                const bool flow = (t + 1 < T) && !seq.dones[t];
                const Vec dh_next = flow ? carry : net.initial_state();
                carry = net.backward(caches[t], grads[t].dlogits, grads[t].dvalue, dh_next);
            }
        }
    }

    const double loss = (acc.policy + cfg.value_coef * acc.value - cfg.entropy_coef * acc.entropy) *
                        inv_total;
    if (!std::isfinite(loss))
        throw NonFiniteLoss("ppo loss is not finite (policy=" + std::to_string(acc.policy) +
                            " value=" + std::to_string(acc.value) +
                            " entropy=" + std::to_string(acc.entropy) + ")");
    if (accum != nullptr) {
        accum->policy += acc.policy * inv_total;
        accum->value += acc.value * inv_total;
        accum->entropy += acc.entropy * inv_total;
    }
    return loss;
}

double ppo_minibatch_loss(PolicyNet& net, const RolloutBatch& batch,
                          const std::vector<size_t>& seq_indices, const TrainConfig& cfg,
                          bool do_backward) {
    return ppo_minibatch_impl(net, batch, seq_indices, cfg, do_backward, nullptr);
}

PpoStats ppo_update(PolicyNet& net, Adam& adam, RolloutBatch& batch, const TrainConfig& cfg) {
    prepare_batch(batch, cfg);
    adam.cfg.lr = cfg.learning_rate;
    adam.cfg.clip_norm = cfg.grad_clip;
    const auto params = net.params();

    PpoStats stats;
    int n_minibatches = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t start = 0; start < batch.seqs.size();
             start += static_cast<size_t>(cfg.minibatch_seqs)) {
            std::vector<size_t> idx;
            for (size_t i = start;
                 i < std::min(batch.seqs.size(), start + static_cast<size_t>(cfg.minibatch_seqs));
                 ++i)
                idx.push_back(i);
            adam.zero_grad(params);
            LossAccum acc;
            const double loss = ppo_minibatch_impl(net, batch, idx, cfg, true, &acc);
            stats.policy_loss += acc.policy;
            stats.value_loss += acc.value;
            stats.entropy += acc.entropy;
            stats.total_loss += loss;
            stats.grad_norm += global_grad_norm(params);
            adam.step(params);
            ++n_minibatches;
        }
    }
    const double inv = 1.0 / std::max(1, n_minibatches);
    stats.policy_loss *= inv;
    stats.value_loss *= inv;
    stats.entropy *= inv;
    stats.total_loss *= inv;
    stats.grad_norm *= inv;
    return stats;
}

void save_checkpoint(const std::filesystem::path& path, PolicyNet& net, const Adam& adam,
                     int64_t update_index, const json& extra) {
    auto os = open_out(path);
    os.write(kCkptMagic, 4);
    put_u32(os, kCkptVersion);

    const auto params = net.params();
    json header;
    header["policy"] = net.config().to_json();
    header["config_hash"] = fnv1a(net.config().to_json().dump());
    header["adam"] = {{"lr", adam.cfg.lr},       {"beta1", adam.cfg.beta1},
                      {"beta2", adam.cfg.beta2}, {"eps", adam.cfg.eps},
                      {"clip_norm", adam.cfg.clip_norm}, {"t", adam.t}};
    header["update_index"] = update_index;
    header["extra"] = extra;
    json plist = json::array();
    for (const auto* p : params)
        plist.push_back({{"name", p->name}, {"rows", p->rows}, {"cols", p->cols}});
    header["params"] = plist;
    const std::string htxt = header.dump();
    put_u64(os, htxt.size());
    os.write(htxt.data(), static_cast<std::streamsize>(htxt.size()));
    for (const auto* p : params) {
        put_f64s(os, p->value);
        put_f64s(os, p->m);
        put_f64s(os, p->v);
    }
    if (!os) throw IoError("failed to write checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCkptMagic, 4) != 0)
        throw IoError("not a checkpoint file: " + path.string());
    const uint32_t version = get_u32(is);
    if (version != kCkptVersion) throw IoError("unsupported checkpoint version");
    const uint64_t hlen = get_u64(is);
    std::string htxt(hlen, '\0');
    is.read(htxt.data(), static_cast<std::streamsize>(hlen));
    const json header = parse_json(htxt, "checkpoint header");

    Checkpoint ck;
    ck.net = PolicyNet(PolicyConfig::from_json(header.at("policy")));
    ck.adam.cfg.lr = header.at("adam").at("lr").get<double>();
    ck.adam.cfg.beta1 = header.at("adam").at("beta1").get<double>();
    ck.adam.cfg.beta2 = header.at("adam").at("beta2").get<double>();
    ck.adam.cfg.eps = header.at("adam").at("eps").get<double>();
    ck.adam.cfg.clip_norm = header.at("adam").at("clip_norm").get<double>();
    ck.adam.t = header.at("adam").at("t").get<int64_t>();
    ck.update_index = header.at("update_index").get<int64_t>();
    ck.extra = header.at("extra");

    const auto params = ck.net.params();
    const auto& plist = header.at("params");
    if (plist.size() != params.size()) throw IoError("checkpoint parameter list mismatch");
    for (size_t i = 0; i < params.size(); ++i) {
        if (plist[i].at("name").get<std::string>() != params[i]->name ||
            plist[i].at("rows").get<int>() != params[i]->rows ||
            plist[i].at("cols").get<int>() != params[i]->cols)
            throw IoError("checkpoint parameter shape mismatch at " + params[i]->name);
        get_f64s(is, params[i]->value);
        get_f64s(is, params[i]->m);
        get_f64s(is, params[i]->v);
    }
    if (!is) throw IoError("truncated checkpoint: " + path.string());
    return ck;
}

}  // namespace echoscout
