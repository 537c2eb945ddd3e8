// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <vector>

#include "echoscout/world.hpp"

using namespace echoscout;

namespace {

WorldSpec base_spec(uint64_t seed, int rooms) {
    WorldSpec s;
    s.seed = seed;
    s.extent_x = 16.0;
    s.extent_y = 12.0;
    s.room_count = rooms;
    s.corridor_width = 1.5;
    s.cell_size = 0.25;
    s.material_palette = default_palette();
    return s;
}

// independent BFS oracle (recursion-free, 4-connected)
size_t bfs_free_count(const World& w, int sx, int sy) {
    std::vector<uint8_t> seen(static_cast<size_t>(w.width()) * w.height(), 0);
    std::vector<std::pair<int, int>> stack{{sx, sy}};
    seen[static_cast<size_t>(sy) * w.width() + sx] = 1;
    size_t n = 0;
    while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        ++n;
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int nx = x + dx[k], ny = y + dy[k];
            if (!w.in_bounds(nx, ny) || w.cell(nx, ny) != 0) continue;
            auto& s = seen[static_cast<size_t>(ny) * w.width() + nx];
            if (!s) {
                s = 1;
                stack.emplace_back(nx, ny);
            }
        }
    }
    return n;
}

}  // namespace

TEST_CASE("same spec twice yields bytewise-identical worlds") {
    const auto s = base_spec(1234, 4);
    const auto a = generate_world(s);
    const auto b = generate_world(s);
    CHECK(a.to_json().dump() == b.to_json().dump());
}

TEST_CASE("room_count=1 leaves interior free and boundary walled") {
    auto s = base_spec(7, 1);
    const auto w = generate_world(s);
    for (int y = 0; y < w.height(); ++y)
        for (int x = 0; x < w.width(); ++x) {
            const bool boundary =
                x == 0 || y == 0 || x == w.width() - 1 || y == w.height() - 1;
            if (boundary)
                REQUIRE(w.cell(x, y) > 0);
            else
                REQUIRE(w.cell(x, y) == 0);
        }
}

TEST_CASE("multi-room worlds are fully connected") {
    for (uint64_t seed : {11ull, 22ull, 33ull, 44ull, 55ull}) {
        const auto w = generate_world(base_spec(seed, 4));
        const size_t total = w.free_cell_count();
        REQUIRE(total > 0);
        bool checked = false;
        for (int y = 0; y < w.height() && !checked; ++y)
            for (int x = 0; x < w.width() && !checked; ++x)
                if (w.cell(x, y) == 0) {
                    CHECK(bfs_free_count(w, x, y) == total);
                    checked = true;
                }
        REQUIRE(checked);
    }
}

TEST_CASE("is_navigable matches an exhaustive scan and bounds-checks") {
    const auto w = generate_world(base_spec(5, 3));
    size_t nav = 0;
    for (int y = 0; y < w.height(); ++y)
        for (int x = 0; x < w.width(); ++x) {
            const bool n = is_navigable(w, x, y);
            CHECK(n == (w.cell(x, y) == 0));
            nav += n;
        }
    CHECK(nav == w.free_cell_count());
    CHECK_FALSE(is_navigable(w, 0, 0));
    CHECK_THROWS_AS(is_navigable(w, -1, 0), OutOfBounds);
    CHECK_THROWS_AS(is_navigable(w, w.width(), 0), OutOfBounds);
}

TEST_CASE("world json round-trip is lossless") {
    const auto w = generate_world(base_spec(99, 4));
    const auto j = w.to_json();
    const auto w2 = World::from_json(j);
    CHECK(w2.width() == w.width());
    CHECK(w2.height() == w.height());
    CHECK(w2.spec().seed == w.spec().seed);
    CHECK(w2.spec().cell_size == w.spec().cell_size);
    REQUIRE(w2.materials().size() == w.materials().size());
    for (int y = 0; y < w.height(); ++y)
        for (int x = 0; x < w.width(); ++x) REQUIRE(w2.cell(x, y) == w.cell(x, y));
    CHECK(w2.to_json().dump() == j.dump());
}

TEST_CASE("every wall cell holds a valid material index") {
    const auto w = generate_world(base_spec(3, 5));
    const int npal = static_cast<int>(w.materials().size());
    for (int y = 0; y < w.height(); ++y)
        for (int x = 0; x < w.width(); ++x) {
            const int16_t v = w.cell(x, y);
            REQUIRE(v >= 0);
            REQUIRE(v <= npal);
            if (v > 0) CHECK(w.material_at(x, y).id == w.materials()[v - 1].id);
        }
}

TEST_CASE("impossible layouts raise InfeasibleSpec") {
    auto s = base_spec(1, 60);
    s.extent_x = 6.0;
    s.extent_y = 6.0;
    CHECK_THROWS_AS(generate_world(s), InfeasibleSpec);
}

TEST_CASE("invalid specs are rejected") {
    auto s = base_spec(1, 2);
    s.corridor_width = 0.5;
    CHECK_THROWS_AS(generate_world(s), ConfigInvalid);
    s = base_spec(1, 2);
    s.extent_x = 16.1;  // not a multiple of 0.25? 16.1/0.25 = 64.4
    CHECK_THROWS_AS(generate_world(s), ConfigInvalid);
    s = base_spec(1, 0);
    CHECK_THROWS_AS(generate_world(s), ConfigInvalid);
    s = base_spec(1, 2);
    s.material_palette.clear();
    CHECK_THROWS_AS(generate_world(s), ConfigInvalid);
    s = base_spec(1, 2);
    s.material_palette[0].absorption[2] = 1.5;
    CHECK_THROWS_AS(generate_world(s), ConfigInvalid);
}

TEST_CASE("different seeds give different layouts") {
    const auto a = generate_world(base_spec(100, 4));
    const auto b = generate_world(base_spec(101, 4));
    bool differ = false;
    for (int y = 0; y < a.height() && !differ; ++y)
        for (int x = 0; x < a.width() && !differ; ++x)
            if (a.cell(x, y) != b.cell(x, y)) differ = true;
    CHECK(differ);
}

TEST_CASE("point helpers map coordinates to cells") {
    const auto w = generate_world(base_spec(7, 1));
    const auto [ix, iy] = w.point_cell({1.05, 2.9});
    CHECK(ix == 4);
    CHECK(iy == 11);
    const auto c = w.cell_center(4, 11);
    CHECK(c.x == doctest::Approx(1.125));
    CHECK(c.y == doctest::Approx(2.875));
    CHECK(w.is_free_point({8.0, 6.0}));
    CHECK_FALSE(w.is_free_point({0.1, 0.1}));
    CHECK_FALSE(w.is_free_point({-1.0, 2.0}));
}
