// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "echoscout/embodiment.hpp"
#include "echoscout/world.hpp"

namespace echoscout {

using Rgb = std::array<uint8_t, 3>;

struct Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgb;  // row-major, 3 bytes per pixel

    Image(int w, int h, Rgb fill = {255, 255, 255});
    void set(int x, int y, Rgb c);
    void line(int x0, int y0, int x1, int y1, Rgb c);
    void disc(int cx, int cy, int radius, Rgb c);
    void write_ppm(const std::filesystem::path& path) const;
};

// occupancy / ground-truth cells scaled up; y flipped so north is up
Image render_map_image(const OccupancyMap& map, int scale);
Image render_world_image(const World& world, int scale);

// world position -> pixel for images produced above
std::pair<int, int> world_to_pixel(const Vec2& pos, double cell_size, int map_height, int scale);

// equal-length curves on shared axes, tight value range, 1px grid-less frame
Image plot_curves(const std::vector<std::vector<double>>& curves,
                  const std::vector<Rgb>& colors, int width, int height);

}  // namespace echoscout
