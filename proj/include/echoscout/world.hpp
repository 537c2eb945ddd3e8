// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "echoscout/common.hpp"
#include "echoscout/io.hpp"

namespace echoscout {

struct Material {
    int id = 0;
    std::array<double, kBands> absorption{};
    double scattering = 0.0;
};

struct WorldSpec {
    uint64_t seed = 0;
    double extent_x = 16.0;
    double extent_y = 16.0;
    int room_count = 4;
    double corridor_width = 1.5;
    double cell_size = 0.25;
    std::vector<Material> material_palette;
};

std::vector<Material> default_palette();
void validate_spec(const WorldSpec& spec);

json material_to_json(const Material& m);
Material material_from_json(const json& j);
json spec_to_json(const WorldSpec& spec);
WorldSpec spec_from_json(const json& j);

// Immutable occupancy grid. Cell value 0 is free space; value k > 0 is a wall
// made of materials()[k - 1].
class World {
  public:
    const WorldSpec& spec() const { return spec_; }
    int width() const { return width_; }
    int height() const { return height_; }
    double cell_size() const { return spec_.cell_size; }
    double extent_x() const { return width_ * spec_.cell_size; }
    double extent_y() const { return height_ * spec_.cell_size; }
    const std::vector<Material>& materials() const { return materials_; }

    bool in_bounds(int ix, int iy) const {
        return ix >= 0 && iy >= 0 && ix < width_ && iy < height_;
    }
    int16_t cell(int ix, int iy) const { return cells_[static_cast<size_t>(iy) * width_ + ix]; }
    bool is_free_cell(int ix, int iy) const { return in_bounds(ix, iy) && cell(ix, iy) == 0; }
    const Material& material_at(int ix, int iy) const;

    std::pair<int, int> point_cell(const Vec2& p) const;
    Vec2 cell_center(int ix, int iy) const;
    bool is_free_point(const Vec2& p) const;

    size_t free_cell_count() const;
    double free_area() const { return free_cell_count() * spec_.cell_size * spec_.cell_size; }

    json to_json() const;
    static World from_json(const json& j);

  private:
    friend World generate_world(const WorldSpec& spec);
    WorldSpec spec_;
    int width_ = 0;
    int height_ = 0;
    std::vector<int16_t> cells_;
    std::vector<Material> materials_;
};

World generate_world(const WorldSpec& spec);
bool is_navigable(const World& world, int ix, int iy);
size_t flood_fill_count(const World& world, int ix, int iy);

}  // namespace echoscout
