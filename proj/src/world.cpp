// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/world.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "echoscout/rng.hpp"

namespace echoscout {

namespace {

constexpr int16_t kUnassignedWall = -1;

int to_cells(double meters, double cell_size) {
    return static_cast<int>(std::llround(meters / cell_size));
}

}  // namespace

std::vector<Material> default_palette() {
    return {
        {0, {0.02, 0.03, 0.04, 0.05}, 0.10},  // concrete
        {1, {0.10, 0.15, 0.25, 0.30}, 0.15},  // drywall
        {2, {0.30, 0.45, 0.55, 0.60}, 0.40},  // curtain
    };
}

void validate_spec(const WorldSpec& spec) {
    if (spec.cell_size <= 0.0) throw ConfigInvalid("cell_size must be positive");
    if (spec.extent_x <= 0.0 || spec.extent_y <= 0.0)
        throw ConfigInvalid("extent must be positive");
    for (double e : {spec.extent_x, spec.extent_y}) {
        const double cells = e / spec.cell_size;
        if (std::abs(cells - std::round(cells)) > 1e-6)
            throw ConfigInvalid("extent must be an integral number of cells");
        if (std::round(cells) < 3.0) throw ConfigInvalid("extent must span at least 3 cells");
    }
    if (spec.room_count < 1) throw ConfigInvalid("room_count must be >= 1");
    if (spec.corridor_width < 1.0)
        throw ConfigInvalid("corridor_width must be >= 1 m (the agent step)");
    if (spec.material_palette.empty()) throw ConfigInvalid("material_palette must be non-empty");
    for (const auto& m : spec.material_palette) {
        for (double a : m.absorption)
            if (a < 0.0 || a > 1.0) throw ConfigInvalid("absorption out of [0,1]");
        if (m.scattering < 0.0 || m.scattering > 1.0)
            throw ConfigInvalid("scattering out of [0,1]");
    }
}

json material_to_json(const Material& m) {
    json j;
    j["id"] = m.id;
    j["absorption"] = m.absorption;
    j["scattering"] = m.scattering;
    return j;
}

Material material_from_json(const json& j) {
    require_keys(j, {"id", "absorption", "scattering"}, "material");
    Material m;
    m.id = j.at("id").get<int>();
    const auto& a = j.at("absorption");
    if (!a.is_array() || a.size() != kBands)
        throw ConfigInvalid("material absorption must list " + std::to_string(kBands) + " bands");
    for (int b = 0; b < kBands; ++b) m.absorption[b] = a[b].get<double>();
    m.scattering = j.at("scattering").get<double>();
    return m;
}

json spec_to_json(const WorldSpec& spec) {
    json j;
    j["seed"] = spec.seed;
    j["extent"] = {spec.extent_x, spec.extent_y};
    j["room_count"] = spec.room_count;
    j["corridor_width"] = spec.corridor_width;
    j["cell_size"] = spec.cell_size;
    json pal = json::array();
    for (const auto& m : spec.material_palette) pal.push_back(material_to_json(m));
    j["material_palette"] = pal;
    return j;
}

WorldSpec spec_from_json(const json& j) {
    require_keys(j, {"seed", "extent", "room_count", "corridor_width", "cell_size",
                     "material_palette"},
                 "world spec");
    WorldSpec s;
    s.seed = j.at("seed").get<uint64_t>();
    const auto& e = j.at("extent");
    if (!e.is_array() || e.size() != 2) throw ConfigInvalid("extent must be [x, y]");
    s.extent_x = e[0].get<double>();
    s.extent_y = e[1].get<double>();
    s.room_count = j.at("room_count").get<int>();
    s.corridor_width = j.at("corridor_width").get<double>();
    s.cell_size = j.at("cell_size").get<double>();
    s.material_palette.clear();
    for (const auto& m : j.at("material_palette")) s.material_palette.push_back(material_from_json(m));
    return s;
}

const Material& World::material_at(int ix, int iy) const {
    if (!in_bounds(ix, iy)) throw OutOfBounds("material_at outside grid");
    const int16_t v = cell(ix, iy);
    if (v <= 0) throw Error("material_at called on a free cell");
    return materials_[static_cast<size_t>(v - 1)];
}

std::pair<int, int> World::point_cell(const Vec2& p) const {
    return {static_cast<int>(std::floor(p.x / spec_.cell_size)),
            static_cast<int>(std::floor(p.y / spec_.cell_size))};
}

Vec2 World::cell_center(int ix, int iy) const {
    return {(ix + 0.5) * spec_.cell_size, (iy + 0.5) * spec_.cell_size};
}

bool World::is_free_point(const Vec2& p) const {
    const auto [ix, iy] = point_cell(p);
    return is_free_cell(ix, iy);
}

size_t World::free_cell_count() const {
    size_t n = 0;
    for (int16_t v : cells_) n += (v == 0);
    return n;
}

json World::to_json() const {
    json j;
    j["spec"] = spec_to_json(spec_);
    j["width"] = width_;
    j["height"] = height_;
    json mats = json::array();
    for (const auto& m : materials_) mats.push_back(material_to_json(m));
    j["materials"] = mats;
    json rle = json::array();
    size_t i = 0;
    while (i < cells_.size()) {
        size_t run = 1;
        while (i + run < cells_.size() && cells_[i + run] == cells_[i]) ++run;
        rle.push_back({cells_[i], run});
        i += run;
    }
    j["grid_rle"] = rle;
    return j;
}

World World::from_json(const json& j) {
    require_keys(j, {"spec", "width", "height", "materials", "grid_rle"}, "world");
    World w;
    w.spec_ = spec_from_json(j.at("spec"));
    w.width_ = j.at("width").get<int>();
    w.height_ = j.at("height").get<int>();
    if (w.width_ < 3 || w.height_ < 3) throw ConfigInvalid("world grid too small");
    w.materials_.clear();
    for (const auto& m : j.at("materials")) w.materials_.push_back(material_from_json(m));
    w.cells_.reserve(static_cast<size_t>(w.width_) * w.height_);
    for (const auto& run : j.at("grid_rle")) {
        if (!run.is_array() || run.size() != 2) throw ConfigInvalid("grid_rle entries must be pairs");
        const int16_t v = run[0].get<int16_t>();
        const size_t n = run[1].get<size_t>();
        if (v < 0 || v > static_cast<int>(w.materials_.size()))
            throw ConfigInvalid("grid_rle value out of range");
        w.cells_.insert(w.cells_.end(), n, v);
    }
    if (w.cells_.size() != static_cast<size_t>(w.width_) * w.height_)
        throw ConfigInvalid("grid_rle does not cover the grid");
    return w;
}

World generate_world(const WorldSpec& spec) {
    validate_spec(spec);
    World w;
    w.spec_ = spec;
    w.materials_ = spec.material_palette;
    w.width_ = to_cells(spec.extent_x, spec.cell_size);
    w.height_ = to_cells(spec.extent_y, spec.cell_size);
    const int W = w.width_, H = w.height_;
    w.cells_.assign(static_cast<size_t>(W) * H, kUnassignedWall);

    Rng rng(derive_seed(spec.seed, "worldgen", 0));
    const int npal = static_cast<int>(spec.material_palette.size());
    const int base_mat = static_cast<int>(rng.uniform_int(0, npal - 1));

    struct Carve {
        std::vector<std::pair<int, int>> cells;
        int mat;
    };
    std::vector<Carve> carves;
    std::vector<std::pair<int, int>> centers;

    auto at = [&](int ix, int iy) -> int16_t& {
        return w.cells_[static_cast<size_t>(iy) * W + ix];
    };
    auto carve_rect = [&](int x0, int y0, int x1, int y1, int mat) {
        Carve c;
        c.mat = mat;
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                at(x, y) = 0;
                c.cells.emplace_back(x, y);
            }
        carves.push_back(std::move(c));
    };

    if (spec.room_count == 1) {
        carve_rect(1, 1, W - 2, H - 2, static_cast<int>(rng.uniform_int(0, npal - 1)));
        centers.emplace_back(W / 2, H / 2);
    } else {
        const int corr = std::max(1, to_cells(spec.corridor_width, spec.cell_size));
        const double min_side_m = std::max(2.0, spec.corridor_width);
        const double max_side_m =
            std::max(min_side_m, 0.35 * std::min(spec.extent_x, spec.extent_y));
        const int min_c = std::max(2, to_cells(min_side_m, spec.cell_size));
        const int max_c = std::max(min_c, to_cells(max_side_m, spec.cell_size));

        auto carve_span = [&](int a0, int a1, int cross, bool horizontal, Carve& c) {
            const int lo = std::min(a0, a1), hi = std::max(a0, a1);
            for (int a = lo; a <= hi; ++a) {
                for (int t = cross - (corr - 1) / 2; t <= cross + corr / 2; ++t) {
                    const int x = horizontal ? a : t;
                    const int y = horizontal ? t : a;
                    if (x < 1 || y < 1 || x > W - 2 || y > H - 2) continue;
                    at(x, y) = 0;
                    c.cells.emplace_back(x, y);
                }
            }
        };

        for (int i = 0; i < spec.room_count; ++i) {
            bool placed = false;
            for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
                const int rw = static_cast<int>(rng.uniform_int(min_c, max_c));
                const int rh = static_cast<int>(rng.uniform_int(min_c, max_c));
                if (rw > W - 2 || rh > H - 2) continue;
                const int x0 = static_cast<int>(rng.uniform_int(1, W - 1 - rw));
                const int y0 = static_cast<int>(rng.uniform_int(1, H - 1 - rh));
                bool clear = true;
                for (int y = y0 - 1; y <= y0 + rh && clear; ++y)
                    for (int x = x0 - 1; x <= x0 + rw && clear; ++x)
                        if (at(x, y) == 0) clear = false;
                if (!clear) continue;
                const int mat = static_cast<int>(rng.uniform_int(0, npal - 1));
                carve_rect(x0, y0, x0 + rw - 1, y0 + rh - 1, mat);
                centers.emplace_back(x0 + rw / 2, y0 + rh / 2);
                placed = true;
            }
            if (!placed)
                throw InfeasibleSpec("could not place room " + std::to_string(i) +
                                     " within extent after 64 retries");
            if (i > 0) {
                // L-corridor to the nearest earlier room keeps everything connected
                const auto [cx, cy] = centers.back();
                int best = 0;
                double best_d2 = 1e300;
                for (int k = 0; k + 1 < static_cast<int>(centers.size()); ++k) {
                    const double dx = centers[k].first - cx, dy = centers[k].second - cy;
                    const double d2 = dx * dx + dy * dy;
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = k;
                    }
                }
                const auto [tx, ty] = centers[best];
                Carve c;
                c.mat = static_cast<int>(rng.uniform_int(0, npal - 1));
                if (rng.uniform() < 0.5) {
                    carve_span(cx, tx, cy, true, c);
                    carve_span(cy, ty, tx, false, c);
                } else {
                    carve_span(cy, ty, cx, false, c);
                    carve_span(cx, tx, ty, true, c);
                }
                carves.push_back(std::move(c));
            }
        }
    }

    // walls touching a carve take its material; later carves win at doorways
    for (const auto& c : carves) {
        for (const auto& [x, y] : c.cells) {
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (!w.in_bounds(nx, ny)) continue;
                    if (at(nx, ny) != 0) at(nx, ny) = static_cast<int16_t>(c.mat + 1);
                }
        }
    }
    for (auto& v : w.cells_)
        if (v == kUnassignedWall) v = static_cast<int16_t>(base_mat + 1);

    const size_t total_free = w.free_cell_count();
    if (total_free == 0) throw InfeasibleSpec("no free space generated");
    for (int iy = 0; iy < H; ++iy)
        for (int ix = 0; ix < W; ++ix)
            if (w.cell(ix, iy) == 0) {
                if (flood_fill_count(w, ix, iy) != total_free)
                    throw Error("worldgen produced disconnected free space");
                iy = H;
                break;
            }
    return w;
}

bool is_navigable(const World& world, int ix, int iy) {
    if (!world.in_bounds(ix, iy)) throw OutOfBounds("is_navigable outside grid");
    return world.cell(ix, iy) == 0;
}

size_t flood_fill_count(const World& world, int ix, int iy) {
    if (!world.is_free_cell(ix, iy)) return 0;
    std::vector<uint8_t> seen(static_cast<size_t>(world.width()) * world.height(), 0);
    std::deque<std::pair<int, int>> queue{{ix, iy}};
    seen[static_cast<size_t>(iy) * world.width() + ix] = 1;
    size_t count = 0;
    while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        ++count;
        const int nx[4] = {x + 1, x - 1, x, x};
        const int ny[4] = {y, y, y + 1, y - 1};
        for (int k = 0; k < 4; ++k) {
            if (!world.is_free_cell(nx[k], ny[k])) continue;
            auto& s = seen[static_cast<size_t>(ny[k]) * world.width() + nx[k]];
            if (!s) {
                s = 1;
                queue.emplace_back(nx[k], ny[k]);
            }
        }
    }
    return count;
}

}  // namespace echoscout
