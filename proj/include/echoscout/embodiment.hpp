// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "echoscout/acoustics.hpp"
#include "echoscout/common.hpp"
#include "echoscout/rng.hpp"
#include "echoscout/world.hpp"

namespace echoscout {

struct AgentPose {
    Vec2 pos;
    int theta_deg = 0;  // {0, 90, 180, 270}
    Vec2 believed_pos;  // equals pos unless noise is enabled
    int believed_theta_deg = 0;
};

enum class Motion { MoveForward = 0, TurnLeft = 1, TurnRight = 2 };
enum class Sampling { Sample = 0, Skip = 1 };

struct ActionCommand {
    Motion motion = Motion::MoveForward;
    Sampling sampling = Sampling::Skip;
};

struct NoiseConfig {
    double translation_sigma = 0.0;  // m
    double rotation_sigma = 0.0;     // deg, perturbs the walk direction
    bool enabled = false;
    uint64_t stream_id = 0;
};

void validate_noise(const NoiseConfig& n);
json noise_to_json(const NoiseConfig& n);
NoiseConfig noise_from_json(const json& j);

struct DepthScan {
    std::vector<double> ranges;
    double max_range = 0.0;
};

AgentPose make_pose(const Vec2& pos, int theta_deg);

// Returns the new pose and whether a MoveForward was blocked. Blocked moves
// leave both true and believed positions bitwise unchanged. Noise draws are
// consumed in a fixed count per call so RNG streams stay aligned.
std::pair<AgentPose, bool> apply_action(const World& world, const AgentPose& pose,
                                        const ActionCommand& cmd, const NoiseConfig& noise,
                                        Rng& rng);

double scan_bearing_deg(int theta_deg, int ray, int ray_count);
DepthScan depth_scan(const World& world, const AgentPose& pose, int ray_count, double max_range);

class OccupancyMap {
  public:
    enum Cell : uint8_t { kUnknown = 0, kFree = 1, kOccupied = 2 };

    OccupancyMap() = default;
    static OccupancyMap for_world(const World& world);
    static OccupancyMap perfect(const World& world);  // fully observed ground truth
    OccupancyMap(int width, int height, double cell_size);

    int width() const { return width_; }
    int height() const { return height_; }
    double cell_size() const { return cell_size_; }
    Cell cell(int ix, int iy) const {
        return static_cast<Cell>(cells_[static_cast<size_t>(iy) * width_ + ix]);
    }
    bool in_bounds(int ix, int iy) const {
        return ix >= 0 && iy >= 0 && ix < width_ && iy < height_;
    }
    double covered_area() const { return free_cells_ * cell_size_ * cell_size_; }

    int visit_width() const { return visit_width_; }
    int visit_height() const { return visit_height_; }
    int64_t visit_count(int vx, int vy) const;
    int64_t visit_count_at(const Vec2& pos) const;
    int64_t total_visits() const { return total_visits_; }

    void write_pgm(const std::filesystem::path& path) const;
    json to_json() const;
    static OccupancyMap from_json(const json& j);

  private:
    friend void update_occupancy(OccupancyMap& map, const AgentPose& pose,
                                 const DepthScan& scan);
    void set_first_write(int ix, int iy, Cell value);
    std::pair<int, int> visit_cell(const Vec2& pos) const;

    int width_ = 0, height_ = 0;
    double cell_size_ = 0.0;
    std::vector<uint8_t> cells_;
    int visit_width_ = 0, visit_height_ = 0;
    std::vector<int64_t> visits_;
    int64_t free_cells_ = 0;
    int64_t total_visits_ = 0;
};

// Registers the scan into the map in the believed frame (first-write wins) and
// increments the believed 1 m visit cell once.
void update_occupancy(OccupancyMap& map, const AgentPose& pose, const DepthScan& scan);

RIR capture_echo(const World& world, const AgentPose& pose, const AcousticsConfig& cfg);

}  // namespace echoscout
