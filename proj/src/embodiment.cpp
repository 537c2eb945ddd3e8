// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/embodiment.hpp"

#include <algorithm>
#include <cmath>

#include "echoscout/io.hpp"
#include "echoscout/raycast.hpp"

namespace echoscout {

namespace {

constexpr double kStepMeters = 1.0;

int norm_theta(int theta) {
    int t = theta % 360;
    if (t < 0) t += 360;
    return t;
}

double truncated_normal(Rng& rng, double sigma) {
    return std::clamp(rng.normal(), -2.0, 2.0) * sigma;
}

Vec2 rotated(const Vec2& v, double deg) {
    const double rad = deg * kPi / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    return {v.x * c - v.y * s, v.x * s + v.y * c};
}

}  // namespace

void validate_noise(const NoiseConfig& n) {
    if (n.translation_sigma < 0.0 || n.rotation_sigma < 0.0)
        throw ConfigInvalid("noise sigmas must be >= 0");
}

json noise_to_json(const NoiseConfig& n) {
    json j;
    j["translation_sigma"] = n.translation_sigma;
    j["rotation_sigma"] = n.rotation_sigma;
    j["enabled"] = n.enabled;
    j["stream_id"] = n.stream_id;
    return j;
}

NoiseConfig noise_from_json(const json& j) {
    require_keys(j, {"translation_sigma", "rotation_sigma", "enabled", "stream_id"},
                 "noise config");
    NoiseConfig n;
    if (j.contains("translation_sigma")) n.translation_sigma = j["translation_sigma"].get<double>();
    if (j.contains("rotation_sigma")) n.rotation_sigma = j["rotation_sigma"].get<double>();
    if (j.contains("enabled")) n.enabled = j["enabled"].get<bool>();
    if (j.contains("stream_id")) n.stream_id = j["stream_id"].get<uint64_t>();
    validate_noise(n);
    return n;
}

AgentPose make_pose(const Vec2& pos, int theta_deg) {
    AgentPose p;
    p.pos = pos;
    p.theta_deg = norm_theta(theta_deg);
    p.believed_pos = pos;
    p.believed_theta_deg = p.theta_deg;
    return p;
}

std::pair<AgentPose, bool> apply_action(const World& world, const AgentPose& pose,
                                        const ActionCommand& cmd, const NoiseConfig& noise,
                                        Rng& rng) {
    validate_noise(noise);
    AgentPose next = pose;
    if (cmd.motion == Motion::TurnLeft) {
        next.theta_deg = norm_theta(pose.theta_deg + 90);
        next.believed_theta_deg = next.theta_deg;
        return {next, false};
    }
    if (cmd.motion == Motion::TurnRight) {
        next.theta_deg = norm_theta(pose.theta_deg - 90);
        next.believed_theta_deg = next.theta_deg;
        return {next, false};
    }

    // MoveForward: consume a fixed number of draws whether or not it succeeds
    double walk_rot = 0.0, walk_len = 0.0, bel_rot = 0.0, bel_len = 0.0;
    if (noise.enabled) {
        walk_rot = truncated_normal(rng, noise.rotation_sigma);
        walk_len = truncated_normal(rng, noise.translation_sigma);
        bel_rot = truncated_normal(rng, noise.rotation_sigma);
        bel_len = truncated_normal(rng, noise.translation_sigma);
    }

    const Vec2 h = heading_vec(pose.theta_deg);
    const Vec2 nominal{pose.pos.x + kStepMeters * h.x, pose.pos.y + kStepMeters * h.y};
    const auto hit = raycast(world, pose.pos, h, kStepMeters);
    if (hit.has_value() || !world.is_free_point(nominal)) return {next, true};

    Vec2 dest = nominal;
    if (noise.enabled) {
        const Vec2 dir = rotated(h, walk_rot);
        const double len = kStepMeters + walk_len;
        const Vec2 noisy{pose.pos.x + len * dir.x, pose.pos.y + len * dir.y};
        // re-project: fall back to the nominal destination if noise lands in a wall
        if (world.is_free_point(noisy) && line_of_sight(world, pose.pos, noisy)) dest = noisy;
    }
    next.pos = dest;

    Vec2 bel = {pose.believed_pos.x + kStepMeters * h.x, pose.believed_pos.y + kStepMeters * h.y};
    if (noise.enabled) {
        const Vec2 dir = rotated(h, bel_rot);
        const double len = kStepMeters + bel_len;
        bel = {pose.believed_pos.x + len * dir.x, pose.believed_pos.y + len * dir.y};
    }
    next.believed_pos = bel;
    return {next, false};
}

double scan_bearing_deg(int theta_deg, int ray, int ray_count) {
    return theta_deg - 45.0 + 90.0 * ray / (ray_count - 1);
}

DepthScan depth_scan(const World& world, const AgentPose& pose, int ray_count, double max_range) {
    if (ray_count < 3) throw ConfigInvalid("depth scan needs at least 3 rays");
    if (max_range <= 0.0) throw ConfigInvalid("max_range must be positive");
    if (!world.is_free_point(pose.pos)) throw QueryOutOfFreeSpace("agent not in free space");
    DepthScan scan;
    scan.max_range = max_range;
    scan.ranges.resize(ray_count);
    for (int r = 0; r < ray_count; ++r) {
        const double rad = scan_bearing_deg(pose.theta_deg, r, ray_count) * kPi / 180.0;
        const Vec2 dir{std::cos(rad), std::sin(rad)};
        const auto hit = raycast(world, pose.pos, dir, max_range);
        scan.ranges[r] = hit ? std::min(hit->t, max_range) : max_range;
    }
    return scan;
}

OccupancyMap::OccupancyMap(int width, int height, double cell_size)
    : width_(width), height_(height), cell_size_(cell_size) {
    if (width < 1 || height < 1 || cell_size <= 0.0)
        throw ConfigInvalid("bad occupancy map shape");
    cells_.assign(static_cast<size_t>(width) * height, kUnknown);
    visit_width_ = std::max(1, static_cast<int>(std::ceil(width * cell_size)));
    visit_height_ = std::max(1, static_cast<int>(std::ceil(height * cell_size)));
    visits_.assign(static_cast<size_t>(visit_width_) * visit_height_, 0);
}

OccupancyMap OccupancyMap::for_world(const World& world) {
    return OccupancyMap(world.width(), world.height(), world.cell_size());
}

OccupancyMap OccupancyMap::perfect(const World& world) {
    auto map = for_world(world);
    for (int iy = 0; iy < world.height(); ++iy)
        for (int ix = 0; ix < world.width(); ++ix)
            map.set_first_write(ix, iy, world.is_free_cell(ix, iy) ? kFree : kOccupied);
    return map;
}

int64_t OccupancyMap::visit_count(int vx, int vy) const {
    if (vx < 0 || vy < 0 || vx >= visit_width_ || vy >= visit_height_)
        throw OutOfBounds("visit cell outside grid");
    return visits_[static_cast<size_t>(vy) * visit_width_ + vx];
}

std::pair<int, int> OccupancyMap::visit_cell(const Vec2& pos) const {
    // 1 m grid anchored at the origin; clamp so every step lands somewhere
    const int vx = std::clamp(static_cast<int>(std::floor(pos.x)), 0, visit_width_ - 1);
    const int vy = std::clamp(static_cast<int>(std::floor(pos.y)), 0, visit_height_ - 1);
    return {vx, vy};
}

int64_t OccupancyMap::visit_count_at(const Vec2& pos) const {
    const auto [vx, vy] = visit_cell(pos);
    return visits_[static_cast<size_t>(vy) * visit_width_ + vx];
}

void OccupancyMap::set_first_write(int ix, int iy, Cell value) {
    if (!in_bounds(ix, iy)) return;
    auto& c = cells_[static_cast<size_t>(iy) * width_ + ix];
    if (c != kUnknown) return;
    c = value;
    if (value == kFree) ++free_cells_;
}

void update_occupancy(OccupancyMap& map, const AgentPose& pose, const DepthScan& scan) {
    const int R = static_cast<int>(scan.ranges.size());
    if (R < 3) throw ConfigInvalid("scan needs at least 3 rays");
    const double cs = map.cell_size_;
    for (int r = 0; r < R; ++r) {
        const double range = scan.ranges[r];
        const double rad =
            scan_bearing_deg(pose.believed_theta_deg, r, R) * kPi / 180.0;
        const Vec2 dir{std::cos(rad), std::sin(rad)};
        const Vec2 o = pose.believed_pos;
        // grid walk in map space; the world is not consulted here
        int ix = static_cast<int>(std::floor(o.x / cs));
        int iy = static_cast<int>(std::floor(o.y / cs));
        const int step_x = dir.x > 0.0 ? 1 : (dir.x < 0.0 ? -1 : 0);
        const int step_y = dir.y > 0.0 ? 1 : (dir.y < 0.0 ? -1 : 0);
        const double inf = 1e300;
        double t_max_x =
            step_x != 0 ? ((step_x > 0 ? (ix + 1) * cs : ix * cs) - o.x) / dir.x : inf;
        double t_max_y =
            step_y != 0 ? ((step_y > 0 ? (iy + 1) * cs : iy * cs) - o.y) / dir.y : inf;
        const double t_dx = step_x != 0 ? cs / std::abs(dir.x) : inf;
        const double t_dy = step_y != 0 ? cs / std::abs(dir.y) : inf;
        const bool is_hit = range < scan.max_range - 1e-9;
        double t = 0.0;
        while (t < range - 1e-9) {
            map.set_first_write(ix, iy, OccupancyMap::kFree);
            if (t_max_x <= t_max_y) {
                t = t_max_x;
                ix += step_x;
                t_max_x += t_dx;
            } else {
                t = t_max_y;
                iy += step_y;
                t_max_y += t_dy;
            }
        }
        if (is_hit) map.set_first_write(ix, iy, OccupancyMap::kOccupied);
    }
    const auto [vx, vy] = map.visit_cell(pose.believed_pos);
    ++map.visits_[static_cast<size_t>(vy) * map.visit_width_ + vx];
    ++map.total_visits_;
}

void OccupancyMap::write_pgm(const std::filesystem::path& path) const {
    std::vector<uint8_t> gray(cells_.size());
    for (size_t i = 0; i < cells_.size(); ++i) {
        switch (cells_[i]) {
            case kFree: gray[i] = 255; break;
            case kOccupied: gray[i] = 0; break;
            default: gray[i] = 128;
        }
    }
    // flip rows so +y points up in the image
    std::vector<uint8_t> flipped(gray.size());
    for (int y = 0; y < height_; ++y)
        std::copy_n(gray.begin() + static_cast<size_t>(y) * width_, width_,
                    flipped.begin() + static_cast<size_t>(height_ - 1 - y) * width_);
    echoscout::write_pgm(path, width_, height_, flipped);
}

json OccupancyMap::to_json() const {
    json j;
    j["width"] = width_;
    j["height"] = height_;
    j["cell_size"] = cell_size_;
    json rle = json::array();
    size_t i = 0;
    while (i < cells_.size()) {
        size_t run = 1;
        while (i + run < cells_.size() && cells_[i + run] == cells_[i]) ++run;
        rle.push_back({cells_[i], run});
        i += run;
    }
    j["cells_rle"] = rle;
    j["visits"] = visits_;
    j["total_visits"] = total_visits_;
    return j;
}

OccupancyMap OccupancyMap::from_json(const json& j) {
    require_keys(j, {"width", "height", "cell_size", "cells_rle", "visits", "total_visits"},
                 "occupancy map");
    OccupancyMap m(j.at("width").get<int>(), j.at("height").get<int>(),
                   j.at("cell_size").get<double>());
    m.cells_.clear();
    for (const auto& run : j.at("cells_rle")) {
        const auto v = run[0].get<uint8_t>();
        const auto n = run[1].get<size_t>();
        if (v > kOccupied) throw ConfigInvalid("bad occupancy cell value");
        m.cells_.insert(m.cells_.end(), n, v);
    }
    if (m.cells_.size() != static_cast<size_t>(m.width_) * m.height_)
        throw ConfigInvalid("occupancy rle does not cover the grid");
    m.free_cells_ = std::count(m.cells_.begin(), m.cells_.end(), uint8_t{kFree});
    m.visits_ = j.at("visits").get<std::vector<int64_t>>();
    if (m.visits_.size() != static_cast<size_t>(m.visit_width_) * m.visit_height_)
        throw ConfigInvalid("visit grid size mismatch");
    m.total_visits_ = j.at("total_visits").get<int64_t>();
    return m;
}

RIR capture_echo(const World& world, const AgentPose& pose, const AcousticsConfig& cfg) {
    SourceReceiverQuery q;
    q.source = pose.pos;
    q.receiver = {pose.pos, pose.theta_deg};
    return trace_rir(world, q, cfg);
}

}  // namespace echoscout
