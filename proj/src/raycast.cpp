// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/raycast.hpp"

#include <cmath>
#include <limits>

namespace echoscout {

std::optional<RayHit> raycast(const World& world, const Vec2& origin, const Vec2& dir,
                              double max_t) {
    const double cs = world.cell_size();
    int ix = static_cast<int>(std::floor(origin.x / cs));
    int iy = static_cast<int>(std::floor(origin.y / cs));
    if (!world.in_bounds(ix, iy)) throw OutOfBounds("raycast origin outside grid");
    if (world.cell(ix, iy) != 0) throw Error("raycast origin inside a wall");

    const double inf = std::numeric_limits<double>::infinity();
    const int step_x = dir.x > 0.0 ? 1 : (dir.x < 0.0 ? -1 : 0);
    const int step_y = dir.y > 0.0 ? 1 : (dir.y < 0.0 ? -1 : 0);
    const double inv_dx = dir.x != 0.0 ? 1.0 / dir.x : inf;
    const double inv_dy = dir.y != 0.0 ? 1.0 / dir.y : inf;

    const double next_x = (step_x > 0 ? (ix + 1) * cs : ix * cs);
    const double next_y = (step_y > 0 ? (iy + 1) * cs : iy * cs);
    double t_max_x = step_x != 0 ? (next_x - origin.x) * inv_dx : inf;
    double t_max_y = step_y != 0 ? (next_y - origin.y) * inv_dy : inf;
    const double t_delta_x = step_x != 0 ? cs * std::abs(inv_dx) : inf;
    const double t_delta_y = step_y != 0 ? cs * std::abs(inv_dy) : inf;

    while (true) {
        double t_cross;
        double nx = 0.0, ny = 0.0;
        if (t_max_x <= t_max_y) {
            t_cross = t_max_x;
            ix += step_x;
            t_max_x += t_delta_x;
            nx = -step_x;
        } else {
            t_cross = t_max_y;
            iy += step_y;
            t_max_y += t_delta_y;
            ny = -step_y;
        }
        if (t_cross > max_t) return std::nullopt;
        if (!world.in_bounds(ix, iy)) return std::nullopt;  // closed worlds never get here
        if (world.cell(ix, iy) != 0) return RayHit{t_cross, ix, iy, nx, ny};
    }
}

bool line_of_sight(const World& world, const Vec2& a, const Vec2& b) {
    if (!world.is_free_point(a) || !world.is_free_point(b)) return false;
    const Vec2 d{b.x - a.x, b.y - a.y};
    const double len = d.norm();
    if (len < 1e-12) return true;
    const Vec2 u{d.x / len, d.y / len};
    return !raycast(world, a, u, len).has_value();
}

}  // namespace echoscout
