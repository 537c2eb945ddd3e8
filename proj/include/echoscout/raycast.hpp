// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <optional>

#include "echoscout/common.hpp"
#include "echoscout/world.hpp"

namespace echoscout {

struct RayHit {
    double t = 0.0;       // distance along the (unit) ray direction
    int ix = 0, iy = 0;   // wall cell that was hit
    double nx = 0.0, ny = 0.0;  // outward face normal (axis aligned)
};

// Grid DDA march from origin along unit direction dir, up to max_t meters.
// Returns the first wall-cell face crossed, or nullopt if max_t is reached
// first. The origin must lie in free space.
std::optional<RayHit> raycast(const World& world, const Vec2& origin, const Vec2& dir,
                              double max_t);

bool line_of_sight(const World& world, const Vec2& a, const Vec2& b);

}  // namespace echoscout
