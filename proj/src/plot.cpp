// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "echoscout/common.hpp"
#include "echoscout/io.hpp"

namespace echoscout {

Image::Image(int w, int h, Rgb fill) : width(w), height(h) {
    if (w < 1 || h < 1) throw ConfigInvalid("image dimensions must be positive");
    rgb.resize(static_cast<size_t>(w) * h * 3);
    for (size_t i = 0; i < rgb.size(); i += 3) {
        rgb[i] = fill[0];
        rgb[i + 1] = fill[1];
        rgb[i + 2] = fill[2];
    }
}

void Image::set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const size_t i = (static_cast<size_t>(y) * width + x) * 3;
    rgb[i] = c[0];
    rgb[i + 1] = c[1];
    rgb[i + 2] = c[2];
}

void Image::line(int x0, int y0, int x1, int y1, Rgb c) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        set(x0, y0, c);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void Image::disc(int cx, int cy, int radius, Rgb c) {
    for (int y = -radius; y <= radius; ++y)
        for (int x = -radius; x <= radius; ++x)
            if (x * x + y * y <= radius * radius) set(cx + x, cy + y, c);
}

void Image::write_ppm(const std::filesystem::path& path) const {
    auto f = open_out(path);
    f << "P6\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    if (!f) throw IoError("failed writing " + path.string());
}

namespace {

template <typename CellColor>
Image render_cells(int w, int h, int scale, CellColor color) {
    Image img(w * scale, h * scale);
    for (int iy = 0; iy < h; ++iy) {
        for (int ix = 0; ix < w; ++ix) {
            const Rgb c = color(ix, iy);
            const int py = (h - 1 - iy) * scale;  // north up
            for (int dy = 0; dy < scale; ++dy)
                for (int dx = 0; dx < scale; ++dx) img.set(ix * scale + dx, py + dy, c);
        }
    }
    return img;
}

}  // namespace

Image render_map_image(const OccupancyMap& map, int scale) {
    return render_cells(map.width(), map.height(), scale, [&](int ix, int iy) -> Rgb {
        switch (map.cell(ix, iy)) {
            case OccupancyMap::kFree: return {235, 235, 235};
            case OccupancyMap::kOccupied: return {40, 40, 40};
            default: return {150, 150, 170};
        }
    });
}

Image render_world_image(const World& world, int scale) {
    return render_cells(world.width(), world.height(), scale, [&](int ix, int iy) -> Rgb {
        return world.is_free_cell(ix, iy) ? Rgb{245, 245, 245} : Rgb{30, 30, 30};
    });
}

std::pair<int, int> world_to_pixel(const Vec2& pos, double cell_size, int map_height, int scale) {
    const int px = static_cast<int>(std::floor(pos.x / cell_size * scale));
    const int py = map_height * scale - 1 - static_cast<int>(std::floor(pos.y / cell_size * scale));
    return {px, py};
}

Image plot_curves(const std::vector<std::vector<double>>& curves, const std::vector<Rgb>& colors,
                  int width, int height) {
    if (curves.size() != colors.size()) throw ShapeMismatch("one color per curve");
    Image img(width, height);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    size_t longest = 0;
    for (const auto& c : curves) {
        longest = std::max(longest, c.size());
        for (const double v : c)
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    }
    const Rgb frame{120, 120, 120};
    img.line(0, 0, width - 1, 0, frame);
    img.line(0, height - 1, width - 1, height - 1, frame);
    img.line(0, 0, 0, height - 1, frame);
    img.line(width - 1, 0, width - 1, height - 1, frame);
    if (longest < 2 || !(hi > lo)) return img;

    const int mx = 4, my = 4;  // margins
    auto to_px = [&](size_t i, size_t n) {
        return mx + static_cast<int>(std::llround(static_cast<double>(i) / (n - 1) *
                                                  (width - 1 - 2 * mx)));
    };
    auto to_py = [&](double v) {
        const double f = (v - lo) / (hi - lo);
        return height - 1 - my - static_cast<int>(std::llround(f * (height - 1 - 2 * my)));
    };
    for (size_t k = 0; k < curves.size(); ++k) {
        const auto& c = curves[k];
        if (c.size() < 2) continue;
        for (size_t i = 0; i + 1 < c.size(); ++i) {
            if (!std::isfinite(c[i]) || !std::isfinite(c[i + 1])) continue;
            img.line(to_px(i, c.size()), to_py(c[i]), to_px(i + 1, c.size()), to_py(c[i + 1]),
                     colors[k]);
        }
    }
    return img;
}

}  // namespace echoscout
