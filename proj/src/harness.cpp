// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "echoscout/common.hpp"
#include "echoscout/io.hpp"
#include "echoscout/plot.hpp"
#include "echoscout/threadpool.hpp"

namespace echoscout {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json pose_to_json(const AgentPose& p) {
    return {{"x", p.pos.x},          {"y", p.pos.y},          {"theta", p.theta_deg},
            {"bx", p.believed_pos.x}, {"by", p.believed_pos.y}, {"btheta", p.believed_theta_deg}};
}

SourceReceiverQuery believed_query(const AgentPose& pose) {
    return {pose.believed_pos, {pose.believed_pos, pose.believed_theta_deg}};
}

// prediction error at one query against a known ground-truth spectrogram;
// the empty-context convention is the all-zero prediction
double query_error(const ContextSet& ctx, const SourceReceiverQuery& q, const Spectrogram& gt,
                   const PredictorConfig& pcfg, const AcousticsConfig& acfg,
                   const OccupancyMap* map) {
    if (ctx.size() == 0) {
        RIR zero;
        zero.sample_rate = acfg.sample_rate;
        const auto n =
            static_cast<size_t>(std::llround(acfg.max_rir_seconds * acfg.sample_rate));
        zero.channels[0].assign(n, 0.0);
        zero.channels[1].assign(n, 0.0);
        return stft_l1(stft_mag(zero, acfg), gt);
    }
    return stft_l1(stft_mag(predict_rir(ctx, q, pcfg, acfg, map), acfg), gt);
}

}  // namespace

AgentPose spawn_pose(const World& world, uint64_t episode_seed) {
    Rng rng(derive_seed(episode_seed, "spawn"));
    std::vector<std::pair<int, int>> free_cells;
    for (int iy = 0; iy < world.height(); ++iy)
        for (int ix = 0; ix < world.width(); ++ix)
            if (world.is_free_cell(ix, iy)) free_cells.emplace_back(ix, iy);
    if (free_cells.empty()) throw InfeasibleSpec("world has no free cells");
    const auto [ix, iy] =
        free_cells[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(free_cells.size()) - 1))];
    const int theta = 90 * static_cast<int>(rng.uniform_int(0, 3));
    return make_pose(world.cell_center(ix, iy), theta);
}

EpisodeResult run_episode(const World& world, Agent& agent, const EpisodeOptions& opt,
                          uint64_t episode_seed, ModelEvaluator* evaluator,
                          RolloutSeq* recorder) {
    validate_episode(opt.episode);
    validate_weights(opt.rewards);
    validate_noise(opt.noise);
    const bool global_mode = opt.acoustic_mode == AcousticRewardMode::kGlobal;
    const bool wants_acoustic = opt.rewards.lambda_A > 0.0;
    if (global_mode && wants_acoustic && !evaluator)
        throw ConfigInvalid("global acoustic reward needs an evaluator");

    EpisodeResult res;
    res.spawn = spawn_pose(world, episode_seed);
    AgentPose pose = res.spawn;
    Rng env_rng(derive_seed(episode_seed, "episode"));
    res.map = OccupancyMap::for_world(world);
    res.context.budget = opt.episode.budget;
    const size_t calls_before = evaluator ? evaluator->eval_calls() : 0;

    auto scan = depth_scan(world, pose, opt.episode.scan_rays, opt.episode.scan_range);
    update_occupancy(res.map, pose, scan);
    double coverage_prev = res.map.covered_area();

    double L = kNan;
    if (evaluator) L = evaluator->zero_prediction_error();
    res.initial_error = L;

    agent.reset(episode_seed);
    FeatureVec last_echo;
    bool last_sampled = false;
    bool last_blocked = false;
    int used = 0;

    for (int t = 0; t < opt.episode.horizon; ++t) {
        const AgentContext actx{res.map, pose,  scan,
                                opt.episode.scan_range, last_sampled ? &last_echo : nullptr,
                                used,    opt.episode.budget, t,
                                opt.episode.horizon,    last_blocked};
        const int a = agent.act(actx);
        const ActTrace* tr = agent.trace();
        if (recorder && !tr) throw ConfigInvalid("rollout recording needs a tracing agent");
        if (action_samples(a) && used >= opt.episode.budget)
            throw BudgetExhausted("agent sampled beyond the episode budget");

        const auto [next_pose, blocked] = apply_action(world, pose, to_command(a), opt.noise,
                                                       env_rng);
        pose = next_pose;
        last_blocked = blocked;
        scan = depth_scan(world, pose, opt.episode.scan_rays, opt.episode.scan_range);
        update_occupancy(res.map, pose, scan);
        const double coverage = res.map.covered_area();
        const int64_t visits = res.map.visit_count_at(pose.believed_pos);

        const bool sampled = action_samples(a);
        double r_A = 0.0;
        const double L_before = L;
        last_sampled = false;
        if (sampled) {
            ++used;
            const RIR echo = capture_echo(world, pose, opt.acoustics);
            auto sample = make_context_sample(echo, scan, pose, opt.acoustics);
            last_echo = sample.features;
            res.sample_positions.push_back(pose.believed_pos);
            if (!global_mode && wants_acoustic) {
                const auto q = believed_query(pose);
                const double before = query_error(res.context, q, sample.spectrogram,
                                                  opt.predictor, opt.acoustics, &res.map);
                const Spectrogram gt_spec = sample.spectrogram;
                add_sample(res.context, std::move(sample));
                const double after = query_error(res.context, q, gt_spec, opt.predictor,
                                                 opt.acoustics, &res.map);
                r_A = local_acoustic_reward(before, after, true);
            } else {
                add_sample(res.context, std::move(sample));
            }
            if (evaluator) {
                const double L_new = evaluator->evaluate(res.context, &res.map);
                if (global_mode && wants_acoustic) r_A = acoustic_reward(L, L_new, true);
                L = L_new;
            }
            last_sampled = true;
        }

        const double r_V = coverage_reward(coverage, coverage_prev);
        const double r_N = novelty_reward(visits);
        coverage_prev = coverage;

        StepRecord rec;
        rec.t = t;
        rec.action = a;
        rec.blocked = blocked;
        rec.sampled = sampled;
        rec.pose = pose;
        rec.reward = total_reward(r_A, r_V, r_N, L_before, L, opt.rewards);
        rec.coverage = coverage;
        rec.visit_count = visits;
        rec.error = L;
        res.total_reward += rec.reward.total;
        res.steps.push_back(rec);

        if (recorder) {
            recorder->obs.push_back(tr->obs);
            recorder->actions.push_back(tr->action);
            recorder->logprobs.push_back(tr->logprob);
            recorder->values.push_back(tr->value);
            recorder->rewards.push_back(rec.reward.total);
            recorder->dones.push_back(t + 1 == opt.episode.horizon ? 1 : 0);
            recorder->masks.push_back(tr->mask);
        }
    }
    res.samples_used = used;
    res.final_error = L;
    res.evaluator_calls =
        evaluator ? static_cast<int64_t>(evaluator->eval_calls() - calls_before) : 0;
    if (recorder) recorder->bootstrap_value = 0.0;
    return res;
}

void write_episode_jsonl(const std::filesystem::path& path, const EpisodeResult& result,
                         const json& header) {
    auto f = open_out(path);
    json head = header;
    head["type"] = "header";
    head["spawn"] = pose_to_json(result.spawn);
    head["initial_error"] = finite_or_null(result.initial_error);
    f << head.dump() << "\n";
    for (const auto& s : result.steps) {
        json j{{"type", "step"},
               {"t", s.t},
               {"action", s.action},
               {"blocked", s.blocked},
               {"sampled", s.sampled},
               {"pose", pose_to_json(s.pose)},
               {"reward", s.reward.to_json()},
               {"coverage", s.coverage},
               {"visits", s.visit_count},
               {"error", finite_or_null(s.error)}};
        f << j.dump() << "\n";
    }
    const json tail{{"type", "summary"},
                    {"samples_used", result.samples_used},
                    {"final_error", finite_or_null(result.final_error)},
                    {"total_reward", result.total_reward},
                    {"evaluator_calls", result.evaluator_calls}};
    f << tail.dump() << "\n";
    if (!f) throw IoError("failed writing " + path.string());
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    auto f = open_in(path);
    std::vector<json> lines;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        try {
            lines.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw IoError("bad JSONL line in " + path.string() + ": " + e.what());
        }
    }
    return lines;
}

std::unique_ptr<Agent> make_agent(const AgentSpec& spec) {
    if (spec.kind == "random" || spec.kind == "forward" || spec.kind == "greedy")
        return make_scripted(spec.kind);
    if (spec.kind == "policy" || spec.kind == "policy-argmax" || spec.kind == "uniform-schedule") {
        auto ck = load_checkpoint(spec.checkpoint);
        if (spec.kind == "uniform-schedule")
            return std::make_unique<UniformScheduleAgent>(std::move(ck.net), spec.name);
        return std::make_unique<PolicyAgent>(std::move(ck.net), spec.name,
                                             spec.kind == "policy-argmax");
    }
    throw ConfigInvalid("unknown agent kind: " + spec.kind);
}

namespace {

struct WorldBundle {
    std::vector<World> worlds;
    std::vector<std::unique_ptr<ModelEvaluator>> evaluators;  // may hold nulls
};

WorldBundle build_worlds(const RunConfig& cfg, const std::string& split, int count, int queries,
                         bool with_evaluators, int workers) {
    WorldBundle b;
    b.worlds.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        WorldSpec spec = cfg.world;
        spec.seed = split_world_seed(cfg.master_seed, split, i);
        b.worlds.push_back(generate_world(spec));
    }
    b.evaluators.resize(static_cast<size_t>(count));
    if (with_evaluators) {
        parallel_for(workers, count, [&](int i) {
            auto qs = make_eval_queries(
                b.worlds[static_cast<size_t>(i)], queries,
                derive_seed(split_world_seed(cfg.master_seed, split, i), "queries"));
            b.evaluators[static_cast<size_t>(i)] = std::make_unique<ModelEvaluator>(
                b.worlds[static_cast<size_t>(i)], std::move(qs), cfg.predictor, cfg.acoustics);
        });
    }
    return b;
}

EpisodeOptions episode_options(const RunConfig& cfg, const RewardWeights& weights,
                               AcousticRewardMode mode) {
    EpisodeOptions opt;
    opt.episode = cfg.episode;
    opt.rewards = weights;
    opt.acoustic_mode = mode;
    opt.noise = cfg.noise;
    opt.predictor = cfg.predictor;
    opt.acoustics = cfg.acoustics;
    return opt;
}

std::string csv_num(double v) {
    if (!std::isfinite(v)) return "";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

TrainResult train_policy(const RunConfig& cfg, const std::filesystem::path& out_dir, int workers,
                         bool resume) {
    validate_run(cfg);
    if (cfg.trainer.train_worlds < cfg.trainer.num_envs)
        throw ConfigInvalid("train_worlds must be >= num_envs so evaluators are not shared");
    std::filesystem::create_directories(out_dir);

    const auto [weights, mode] = realize_reward_mode(cfg.trainer.reward_mode, cfg.rewards);
    const bool needs_eval =
        weights.lambda_A > 0.0 && mode == AcousticRewardMode::kGlobal;

    auto train_b = build_worlds(cfg, "train", cfg.trainer.train_worlds,
                                cfg.trainer.train_eval_queries, needs_eval, workers);
    auto val_b = build_worlds(cfg, "val", cfg.trainer.val_worlds, cfg.trainer.train_eval_queries,
                              true, workers);
    const auto opt = episode_options(cfg, weights, mode);
    EpisodeOptions val_opt = opt;  // validation always tracks the error trace

    TrainResult result;
    result.latest_checkpoint = out_dir / "ckpt_latest.bin";
    result.best_checkpoint = out_dir / "ckpt_best.bin";
    result.metrics_csv = out_dir / "metrics.csv";

    PolicyNet net(cfg.policy);
    Adam adam;
    adam.cfg.lr = cfg.train.learning_rate;
    adam.cfg.clip_norm = cfg.train.grad_clip;
    int start_update = 0;
    double best_val = kNan;

    if (resume && std::filesystem::exists(result.latest_checkpoint)) {
        auto ck = load_checkpoint(result.latest_checkpoint);
        net = std::move(ck.net);
        adam = ck.adam;
        start_update = static_cast<int>(ck.update_index);
        if (ck.extra.contains("best_val_error") && !ck.extra["best_val_error"].is_null())
            best_val = ck.extra["best_val_error"].get<double>();
    }

    const bool fresh_csv = !resume || !std::filesystem::exists(result.metrics_csv);
    std::ofstream csv;
    if (fresh_csv) {
        csv = open_out(result.metrics_csv);
        csv << "update,mean_reward,mean_r_A,mean_r_V,mean_r_N,policy_loss,value_loss,entropy,"
               "val_error\n";
    } else {
        csv.open(result.metrics_csv, std::ios::app);
        if (!csv) throw IoError("cannot append to " + result.metrics_csv.string());
    }

    const int num_envs = cfg.trainer.num_envs;
    for (int u = start_update; u < cfg.train.updates; ++u) {
        RolloutBatch batch;
        batch.seqs.resize(static_cast<size_t>(num_envs));
        std::vector<EpisodeResult> eps(static_cast<size_t>(num_envs));
        parallel_for(workers, num_envs, [&](int e) {
            const size_t wi =
                (static_cast<size_t>(u) * num_envs + static_cast<size_t>(e)) % train_b.worlds.size();
            PolicyAgent actor(net, "train");
            actor.set_tracing(true);
            RolloutSeq seq;
            seq.h0 = net.initial_state();
            const uint64_t eseed =
                derive_seed(derive_seed(cfg.master_seed, "update", static_cast<uint64_t>(u)),
                            "env", static_cast<uint64_t>(e));
            eps[static_cast<size_t>(e)] =
                run_episode(train_b.worlds[wi], actor, opt, eseed,
                            needs_eval ? train_b.evaluators[wi].get() : nullptr, &seq);
            batch.seqs[static_cast<size_t>(e)] = std::move(seq);
        });

        double mean_reward = 0.0, mean_rA = 0.0, mean_rV = 0.0, mean_rN = 0.0;
        for (const auto& ep : eps) {
            mean_reward += ep.total_reward;
            for (const auto& s : ep.steps) {
                mean_rA += s.reward.r_A;
                mean_rV += s.reward.r_V;
                mean_rN += s.reward.r_N;
            }
        }
        const double steps_total = static_cast<double>(num_envs) * cfg.episode.horizon;
        mean_reward /= num_envs;
        mean_rA /= steps_total;
        mean_rV /= steps_total;
        mean_rN /= steps_total;

        const PpoStats stats = ppo_update(net, adam, batch, cfg.train);

        double val_err = kNan;
        const bool do_val = (u + 1) % cfg.trainer.val_every == 0 || u + 1 == cfg.train.updates;
        if (do_val) {
            const int n_val = cfg.trainer.val_episodes;
            std::vector<double> errs(static_cast<size_t>(n_val), kNan);
            parallel_for(workers, n_val, [&](int k) {
                const size_t wi = static_cast<size_t>(k) % val_b.worlds.size();
                PolicyAgent actor(net, "val");
                const uint64_t eseed = derive_seed(cfg.master_seed, "val-episode",
                                                   static_cast<uint64_t>(k));
                const auto ep = run_episode(val_b.worlds[wi], actor, val_opt, eseed,
                                            val_b.evaluators[wi].get(), nullptr);
                errs[static_cast<size_t>(k)] = ep.final_error;
            });
            val_err = std::accumulate(errs.begin(), errs.end(), 0.0) / n_val;
            json extra{{"val_error", val_err},
                       {"best_val_error", finite_or_null(best_val)},
                       {"reward_mode", cfg.trainer.reward_mode}};
            if (!std::isfinite(best_val) || val_err < best_val) {
                best_val = val_err;
                extra["best_val_error"] = best_val;
                save_checkpoint(result.best_checkpoint, net, adam, u + 1, extra);
            }
            save_checkpoint(result.latest_checkpoint, net, adam, u + 1, extra);
        }

        csv << u << ',' << csv_num(mean_reward) << ',' << csv_num(mean_rA) << ','
            << csv_num(mean_rV) << ',' << csv_num(mean_rN) << ',' << csv_num(stats.policy_loss)
            << ',' << csv_num(stats.value_loss) << ',' << csv_num(stats.entropy) << ','
            << csv_num(val_err) << "\n";
        csv.flush();
        result.updates_run = u + 1;
    }

    if (result.updates_run == 0) result.updates_run = start_update;
    result.best_val_error = best_val;
    if (!std::filesystem::exists(result.best_checkpoint) &&
        std::filesystem::exists(result.latest_checkpoint))
        result.best_checkpoint = result.latest_checkpoint;
    return result;
}

SuiteResult evaluate_suite(const RunConfig& cfg, const std::filesystem::path& out_dir,
                           int workers) {
    validate_run(cfg);
    std::filesystem::create_directories(out_dir);
    auto test_b = build_worlds(cfg, "test", cfg.suite.test_worlds, cfg.episode.eval_queries, true,
                               workers);
    const auto opt = episode_options(cfg, cfg.rewards, AcousticRewardMode::kGlobal);

    struct Cell {
        const AgentSpec* spec;
        int world_index;
        int seed_index;
    };
    std::vector<Cell> cells;
    for (const auto& spec : cfg.suite.agents)
        for (int w = 0; w < cfg.suite.test_worlds; ++w)
            for (int s = 0; s < cfg.suite.episode_seeds; ++s) cells.push_back({&spec, w, s});

    SuiteResult result;
    result.cells.resize(cells.size());
    // evaluators are shared across cells of a world: evaluate() is thread-safe
    parallel_for(workers, static_cast<int>(cells.size()), [&](int i) {
        const auto& cell = cells[static_cast<size_t>(i)];
        SuiteCell& out = result.cells[static_cast<size_t>(i)];
        out.agent = cell.spec->name;
        out.world_index = cell.world_index;
        out.world_seed = split_world_seed(cfg.master_seed, "test", cell.world_index);
        out.episode_seed =
            derive_seed(derive_seed(cfg.master_seed, "suite-world",
                                    static_cast<uint64_t>(cell.world_index)),
                        "suite-seed", static_cast<uint64_t>(cell.seed_index));
        try {
            auto agent = make_agent(*cell.spec);
            const auto ep = run_episode(test_b.worlds[static_cast<size_t>(cell.world_index)],
                                        *agent, opt, out.episode_seed,
                                        test_b.evaluators[static_cast<size_t>(cell.world_index)].get(),
                                        nullptr);
            out.initial_error = ep.initial_error;
            out.final_error = ep.final_error;
            out.coverage = ep.steps.empty() ? 0.0 : ep.steps.back().coverage;
            out.total_reward = ep.total_reward;
            out.samples_used = ep.samples_used;
            out.error_curve.reserve(ep.steps.size());
            for (const auto& s : ep.steps) out.error_curve.push_back(s.error);
        } catch (const std::exception& e) {
            out.failed = true;
            out.failure = e.what();
        }
    });

    std::map<std::string, std::vector<const SuiteCell*>> by_agent;
    for (const auto& c : result.cells) by_agent[c.agent].push_back(&c);
    json summary = json::object();
    for (const auto& [name, agent_cells] : by_agent) {
        double final_sum = 0.0, init_sum = 0.0, cov_sum = 0.0, reward_sum = 0.0;
        int samples_sum = 0, ok = 0, failures = 0;
        for (const auto* c : agent_cells) {
            if (c->failed) {
                ++failures;
                continue;
            }
            ++ok;
            final_sum += c->final_error;
            init_sum += c->initial_error;
            cov_sum += c->coverage;
            reward_sum += c->total_reward;
            samples_sum += c->samples_used;
        }
        json a;
        a["cells"] = agent_cells.size();
        a["failures"] = failures;
        if (ok > 0) {
            a["mean_final_error"] = final_sum / ok;
            a["mean_initial_error"] = init_sum / ok;
            a["mean_coverage"] = cov_sum / ok;
            a["mean_total_reward"] = reward_sum / ok;
            a["mean_samples_used"] = static_cast<double>(samples_sum) / ok;
        }
        summary[name] = a;
    }
    result.summary = std::move(summary);
    write_suite_report(out_dir, result, cfg);
    return result;
}

void write_suite_report(const std::filesystem::path& out_dir, const SuiteResult& result,
                        const RunConfig& cfg) {
    std::filesystem::create_directories(out_dir);
    {
        auto f = open_out(out_dir / "report.csv");
        f << "agent,world_index,world_seed,episode_seed,initial_error,final_error,coverage,"
             "samples_used,total_reward,failed,failure\n";
        for (const auto& c : result.cells) {
            std::string failure = c.failure;
            std::replace(failure.begin(), failure.end(), ',', ';');
            std::replace(failure.begin(), failure.end(), '\n', ' ');
            f << c.agent << ',' << c.world_index << ',' << c.world_seed << ',' << c.episode_seed
              << ',' << csv_num(c.initial_error) << ',' << csv_num(c.final_error) << ','
              << csv_num(c.coverage) << ',' << c.samples_used << ',' << csv_num(c.total_reward)
              << ',' << (c.failed ? 1 : 0) << ',' << failure << "\n";
        }
    }
    {
        auto f = open_out(out_dir / "curves.csv");
        f << "agent,world_index,episode_seed,t,error\n";
        for (const auto& c : result.cells)
            for (size_t t = 0; t < c.error_curve.size(); ++t)
                f << c.agent << ',' << c.world_index << ',' << c.episode_seed << ',' << t << ','
                  << csv_num(c.error_curve[t]) << "\n";
    }
    {
        json rep;
        rep["config_hash"] = config_hash(cfg.to_json());
        rep["summary"] = result.summary;
        json cells = json::array();
        for (const auto& c : result.cells) {
            cells.push_back({{"agent", c.agent},
                             {"world_index", c.world_index},
                             {"world_seed", c.world_seed},
                             {"episode_seed", c.episode_seed},
                             {"initial_error", finite_or_null(c.initial_error)},
                             {"final_error", finite_or_null(c.final_error)},
                             {"coverage", c.coverage},
                             {"samples_used", c.samples_used},
                             {"total_reward", c.total_reward},
                             {"failed", c.failed},
                             {"failure", c.failure}});
        }
        rep["cells"] = std::move(cells);
        auto f = open_out(out_dir / "report.json");
        f << rep.dump(2) << "\n";
    }
    {
        // mean error curve per agent
        std::map<std::string, std::pair<std::vector<double>, int>> acc;
        for (const auto& c : result.cells) {
            if (c.failed || c.error_curve.empty()) continue;
            auto& [sum, n] = acc[c.agent];
            if (sum.empty()) sum.assign(c.error_curve.size(), 0.0);
            if (sum.size() != c.error_curve.size()) continue;
            for (size_t t = 0; t < sum.size(); ++t) sum[t] += c.error_curve[t];
            ++n;
        }
        static const std::vector<Rgb> kPalette{{200, 40, 40},  {40, 90, 200}, {30, 150, 60},
                                               {200, 140, 20}, {130, 60, 180}, {60, 60, 60},
                                               {20, 160, 160}, {220, 80, 160}};
        std::vector<std::vector<double>> curves;
        std::vector<Rgb> colors;
        json legend = json::object();
        size_t k = 0;
        for (auto& [name, pair] : acc) {
            auto& [sum, n] = pair;
            if (n == 0) continue;
            for (auto& v : sum) v /= n;
            legend[name] = {{"color", kPalette[k % kPalette.size()]}, {"episodes", n}};
            curves.push_back(std::move(sum));
            colors.push_back(kPalette[k % kPalette.size()]);
            ++k;
        }
        if (!curves.empty()) {
            plot_curves(curves, colors, 640, 360).write_ppm(out_dir / "curves.ppm");
            auto f = open_out(out_dir / "curves_legend.json");
            f << legend.dump(2) << "\n";
        }
    }
}

void dump_artifacts(const std::filesystem::path& out_dir, const World& world,
                    const EpisodeResult& result, const EpisodeOptions& opt, const json& header) {
    std::filesystem::create_directories(out_dir);
    write_episode_jsonl(out_dir / "episode.jsonl", result, header);
    result.map.write_pgm(out_dir / "occupancy.pgm");
    save_context(out_dir / "context", result.context);

    const int scale = 6;
    Image img = render_world_image(world, scale);
    const double cs = world.cell_size();
    const Rgb path_color{40, 90, 200}, sample_color{200, 40, 40}, spawn_color{30, 150, 60};
    const auto [sx, sy] = world_to_pixel(result.spawn.pos, cs, world.height(), scale);
    Vec2 prev = result.spawn.pos;
    for (const auto& s : result.steps) {
        const auto [x0, y0] = world_to_pixel(prev, cs, world.height(), scale);
        const auto [x1, y1] = world_to_pixel(s.pose.pos, cs, world.height(), scale);
        img.line(x0, y0, x1, y1, path_color);
        prev = s.pose.pos;
    }
    for (const auto& p : result.sample_positions) {
        const auto [x, y] = world_to_pixel(p, cs, world.height(), scale);
        img.disc(x, y, 3, sample_color);
    }
    img.disc(sx, sy, 4, spawn_color);
    img.write_ppm(out_dir / "trajectory.ppm");

    std::vector<double> curve;
    curve.reserve(result.steps.size());
    for (const auto& s : result.steps) curve.push_back(s.error);
    plot_curves({curve}, {path_color}, 640, 360).write_ppm(out_dir / "error_curve.ppm");
}

json calibrate_rewards(const RunConfig& cfg, int episodes, int workers) {
    validate_run(cfg);
    if (episodes < 1) throw ConfigInvalid("calibrate needs episodes >= 1");
    auto b = build_worlds(cfg, "calibrate", std::min(episodes, 8), cfg.trainer.train_eval_queries,
                          true, workers);
    const auto opt = episode_options(cfg, cfg.rewards, AcousticRewardMode::kGlobal);

    struct Stats {
        double abs_sum = 0.0, sum = 0.0, max_abs = 0.0;
        int64_t n = 0;
        void add(double v) {
            abs_sum += std::fabs(v);
            sum += v;
            max_abs = std::max(max_abs, std::fabs(v));
            ++n;
        }
        json to_json(double weight) const {
            const double mean_abs = n ? abs_sum / n : 0.0;
            return {{"mean", n ? sum / n : 0.0},
                    {"mean_abs", mean_abs},
                    {"max_abs", max_abs},
                    {"weighted_mean_abs", weight * mean_abs}};
        }
    };
    std::vector<std::array<Stats, 3>> slots(static_cast<size_t>(episodes));
    parallel_for(workers, episodes, [&](int i) {
        const size_t wi = static_cast<size_t>(i) % b.worlds.size();
        RandomAgent agent;
        const auto ep = run_episode(b.worlds[wi], agent, opt,
                                    derive_seed(cfg.master_seed, "calibrate", static_cast<uint64_t>(i)),
                                    b.evaluators[wi].get(), nullptr);
        auto& s = slots[static_cast<size_t>(i)];
        for (const auto& step : ep.steps) {
            s[0].add(step.reward.r_A);
            s[1].add(step.reward.r_V);
            s[2].add(step.reward.r_N);
        }
    });
    std::array<Stats, 3> total;
    for (const auto& s : slots)
        for (int k = 0; k < 3; ++k) {
            total[static_cast<size_t>(k)].abs_sum += s[static_cast<size_t>(k)].abs_sum;
            total[static_cast<size_t>(k)].sum += s[static_cast<size_t>(k)].sum;
            total[static_cast<size_t>(k)].max_abs =
                std::max(total[static_cast<size_t>(k)].max_abs, s[static_cast<size_t>(k)].max_abs);
            total[static_cast<size_t>(k)].n += s[static_cast<size_t>(k)].n;
        }
    return {{"episodes", episodes},
            {"steps", total[0].n},
            {"r_A", total[0].to_json(cfg.rewards.lambda_A)},
            {"r_V", total[1].to_json(cfg.rewards.lambda_V)},
            {"r_N", total[2].to_json(cfg.rewards.lambda_N)}};
}

}  // namespace echoscout
