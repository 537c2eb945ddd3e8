// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>

#include "echoscout/embodiment.hpp"
#include "echoscout/raycast.hpp"
#include "echoscout/world.hpp"

using namespace echoscout;

namespace {

World box(double ex, double ey, double absorption = 0.2, double scattering = 0.3) {
    WorldSpec s;
    s.seed = 1;
    s.extent_x = ex;
    s.extent_y = ey;
    s.room_count = 1;
    s.corridor_width = 1.5;
    s.cell_size = 0.25;
    Material m;
    m.id = 0;
    m.absorption.fill(absorption);
    m.scattering = scattering;
    s.material_palette = {m};
    return generate_world(s);
}

NoiseConfig no_noise() { return {}; }

}  // namespace

TEST_CASE("forward step moves exactly one meter in open space") {
    const auto w = box(8.0, 6.0);
    Rng rng(1);
    const auto pose = make_pose({2.0, 2.0}, 0);
    const auto [next, blocked] = apply_action(w, pose, {Motion::MoveForward, Sampling::Skip},
                                              no_noise(), rng);
    CHECK_FALSE(blocked);
    CHECK(next.pos.x == 3.0);
    CHECK(next.pos.y == 2.0);
    CHECK(next.theta_deg == 0);
    CHECK(next.believed_pos.x == 3.0);
    CHECK(next.believed_pos.y == 2.0);
}

TEST_CASE("turns wrap modulo 360") {
    const auto w = box(8.0, 6.0);
    Rng rng(1);
    auto pose = make_pose({2.0, 2.0}, 270);
    auto [left, b1] = apply_action(w, pose, {Motion::TurnLeft, Sampling::Skip}, no_noise(), rng);
    CHECK_FALSE(b1);
    CHECK(left.theta_deg == 0);
    pose = make_pose({2.0, 2.0}, 0);
    auto [right, b2] = apply_action(w, pose, {Motion::TurnRight, Sampling::Skip}, no_noise(), rng);
    CHECK(right.theta_deg == 270);
    CHECK(right.pos.x == 2.0);
}

TEST_CASE("forward into a nearby wall blocks and leaves position bitwise intact") {
    const auto w = box(8.0, 6.0);
    Rng rng(1);
    // east free space ends at x = 7.75; from 7.25 the wall is 0.5 m ahead
    const auto pose = make_pose({7.25, 3.0}, 0);
    const auto hit = raycast(w, pose.pos, {1.0, 0.0}, 1.0);
    REQUIRE(hit.has_value());  // oracle: obstruction within one step
    REQUIRE(hit->t == doctest::Approx(0.5));
    const auto [next, blocked] =
        apply_action(w, pose, {Motion::MoveForward, Sampling::Skip}, no_noise(), rng);
    CHECK(blocked);
    CHECK(next.pos.x == pose.pos.x);
    CHECK(next.pos.y == pose.pos.y);
    CHECK(next.believed_pos.x == pose.believed_pos.x);

    NoiseConfig noisy{0.1, 5.0, true, 0};
    Rng rng2(2);
    const auto [next2, blocked2] =
        apply_action(w, pose, {Motion::MoveForward, Sampling::Skip}, noisy, rng2);
    CHECK(blocked2);
    CHECK(next2.pos.x == pose.pos.x);
    CHECK(next2.pos.y == pose.pos.y);
    CHECK(next2.believed_pos.x == pose.believed_pos.x);
    CHECK(next2.believed_pos.y == pose.believed_pos.y);
}

TEST_CASE("noiseless trajectories keep believed pose equal to true pose") {
    const auto w = box(10.0, 8.0);
    Rng rng(3);
    auto pose = make_pose({2.0, 2.0}, 0);
    const Motion script[] = {Motion::MoveForward, Motion::TurnLeft, Motion::MoveForward,
                             Motion::MoveForward, Motion::TurnRight, Motion::MoveForward,
                             Motion::MoveForward, Motion::MoveForward};
    for (Motion m : script) {
        auto [next, blocked] = apply_action(w, pose, {m, Sampling::Skip}, no_noise(), rng);
        pose = next;
        CHECK(pose.believed_pos.x == pose.pos.x);
        CHECK(pose.believed_pos.y == pose.pos.y);
        CHECK(pose.believed_theta_deg == pose.theta_deg);
        CHECK(w.is_free_point(pose.pos));
    }
}

TEST_CASE("noise perturbs true and believed poses independently") {
    const auto w = box(12.0, 10.0);
    NoiseConfig noisy{0.08, 4.0, true, 0};
    Rng rng(7);
    auto pose = make_pose({3.0, 3.0}, 0);
    bool true_differs = false, believed_differs = false;
    for (int i = 0; i < 12; ++i) {
        const Motion m = (i % 4 == 3) ? Motion::TurnLeft : Motion::MoveForward;
        auto [next, blocked] = apply_action(w, pose, {m, Sampling::Skip}, noisy, rng);
        pose = next;
        REQUIRE(w.is_free_point(pose.pos));  // true pose stays in free space
        if (m == Motion::MoveForward && !blocked) {
            if (std::abs(pose.pos.x - pose.believed_pos.x) > 1e-12) true_differs = true;
            if (std::abs(pose.believed_pos.y - pose.pos.y) > 1e-12) believed_differs = true;
        }
    }
    CHECK(true_differs);
    CHECK(believed_differs);
}

TEST_CASE("depth scan center ray measures the facing wall") {
    const auto w = box(8.0, 8.0);
    const auto pose = make_pose({4.0, 4.0}, 0);
    const auto scan = depth_scan(w, pose, 65, 10.0);
    REQUIRE(scan.ranges.size() == 65);
    // wall face at x = 7.75 -> 3.75 m ahead
    CHECK(std::abs(scan.ranges[32] - 3.75) <= w.cell_size());
    for (double r : scan.ranges) {
        CHECK(r > 0.0);
        CHECK(r <= 10.0);
    }
}

TEST_CASE("square room scan is invariant under quarter turns") {
    const auto w = box(8.0, 8.0);
    const auto a = depth_scan(w, make_pose({4.0, 4.0}, 0), 33, 10.0);
    const auto b = depth_scan(w, make_pose({4.0, 4.0}, 90), 33, 10.0);
    for (size_t i = 0; i < a.ranges.size(); ++i)
        CHECK(a.ranges[i] == doctest::Approx(b.ranges[i]).epsilon(1e-9));
}

TEST_CASE("short max_range clamps every ray") {
    const auto w = box(8.0, 8.0);
    const auto scan = depth_scan(w, make_pose({4.0, 4.0}, 0), 17, 0.5);
    for (double r : scan.ranges) CHECK(r == 0.5);
}

TEST_CASE("occupancy update marks free strips and occupied walls") {
    const auto w = box(8.0, 6.0);
    auto map = OccupancyMap::for_world(w);
    CHECK(map.covered_area() == 0.0);
    const auto pose = make_pose({4.0, 3.0}, 0);
    const auto scan = depth_scan(w, pose, 64, 10.0);
    update_occupancy(map, pose, scan);
    CHECK(map.covered_area() > 0.0);
    bool has_occ = false;
    for (int y = 0; y < map.height() && !has_occ; ++y)
        for (int x = 0; x < map.width() && !has_occ; ++x)
            if (map.cell(x, y) == OccupancyMap::kOccupied) has_occ = true;
    CHECK(has_occ);
    CHECK(map.total_visits() == 1);
    CHECK(map.visit_count_at(pose.pos) == 1);

    // idempotent apart from the visit counter
    auto again = map;
    update_occupancy(again, pose, scan);
    CHECK(again.covered_area() == map.covered_area());
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) REQUIRE(again.cell(x, y) == map.cell(x, y));
    CHECK(again.total_visits() == 2);
}

TEST_CASE("exhaustive sweep covers the room within 10%") {
    const auto w = box(8.0, 6.0);
    auto map = OccupancyMap::for_world(w);
    double prev_covered = 0.0;
    int64_t steps = 0;
    for (double y = 1.0; y < 6.0; y += 2.0)
        for (double x = 1.0; x < 8.0; x += 2.0) {
            if (!w.is_free_point({x, y})) continue;
            for (int theta : {0, 90, 180, 270}) {
                const auto pose = make_pose({x, y}, theta);
                update_occupancy(map, pose, depth_scan(w, pose, 128, 12.0));
                ++steps;
                CHECK(map.covered_area() >= prev_covered);  // non-decreasing
                prev_covered = map.covered_area();
            }
        }
    CHECK(map.total_visits() == steps);
    CHECK(map.covered_area() <= w.free_area() + 1e-9);
    CHECK(map.covered_area() > 0.9 * w.free_area());
    CHECK(map.covered_area() < 1.1 * w.free_area());
}

TEST_CASE("occupancy map json round-trip is lossless") {
    const auto w = box(8.0, 6.0);
    auto map = OccupancyMap::for_world(w);
    const auto pose = make_pose({4.0, 3.0}, 90);
    update_occupancy(map, pose, depth_scan(w, pose, 64, 10.0));
    const auto j = map.to_json();
    const auto back = OccupancyMap::from_json(j);
    CHECK(back.covered_area() == map.covered_area());
    CHECK(back.total_visits() == map.total_visits());
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) REQUIRE(back.cell(x, y) == map.cell(x, y));
    CHECK(back.to_json().dump() == j.dump());
}

TEST_CASE("capture_echo equals the colocated trace_rir exactly") {
    const auto w = box(8.0, 6.0);
    AcousticsConfig cfg;
    cfg.rays_per_band = 256;
    cfg.max_rir_seconds = 0.25;
    const auto pose = make_pose({3.0, 2.5}, 90);
    const auto echo = capture_echo(w, pose, cfg);
    SourceReceiverQuery q{pose.pos, {pose.pos, pose.theta_deg}};
    const auto ref = trace_rir(w, q, cfg);
    for (int ch = 0; ch < 2; ++ch) {
        REQUIRE(echo.channels[ch].size() == ref.channels[ch].size());
        for (size_t n = 0; n < ref.channels[ch].size(); ++n)
            REQUIRE(echo.channels[ch][n] == ref.channels[ch][n]);
    }
}

TEST_CASE("echo in a fully absorptive room is direct-only") {
    const auto w = box(8.0, 6.0, 1.0);
    AcousticsConfig cfg;
    cfg.rays_per_band = 128;
    cfg.max_rir_seconds = 0.25;
    const auto echo = capture_echo(w, make_pose({4.0, 3.0}, 0), cfg);
    for (int ch = 0; ch < 2; ++ch) {
        double direct = 0.0, tail = 0.0;
        for (size_t n = 0; n < echo.channels[ch].size(); ++n) {
            const double e = echo.channels[ch][n] * echo.channels[ch][n];
            if (n < 16)
                direct += e;
            else
                tail += e;
        }
        CHECK(direct > 0.0);
        CHECK(tail < 1e-6 * direct);
    }
}

TEST_CASE("live rooms ring longer than dampened ones") {
    AcousticsConfig cfg;
    cfg.rays_per_band = 2048;
    cfg.max_bounces = 250;
    cfg.max_rir_seconds = 1.2;
    const auto pose = make_pose({3.0, 2.5}, 0);
    const auto live = capture_echo(box(8.0, 6.0, 0.15), pose, cfg);
    const auto damp = capture_echo(box(8.0, 6.0, 0.65), pose, cfg);
    const auto rt_live = schroeder_rt60(live, -1, cfg);
    const auto rt_damp = schroeder_rt60(damp, -1, cfg);
    for (int ch = 0; ch < 2; ++ch) CHECK(rt_live[ch] > rt_damp[ch]);
}
