// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace echoscout {

// Frequency bands used for material absorption and acoustic features.
constexpr int kBands = 4;
constexpr std::array<double, kBands + 1> kBandEdgesHz = {0.0, 500.0, 1500.0, 4000.0, 8000.0};

constexpr double kPi = 3.14159265358979323846;

// ln(10^6): the 60 dB decay constant used by Eyring-style formulas.
constexpr double kDecay60 = 13.815510557964274;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Discrete headings are multiples of 90 degrees; unit vectors are exact.
inline Vec2 heading_vec(int theta_deg) {
    switch (((theta_deg % 360) + 360) % 360) {
        case 0: return {1.0, 0.0};
        case 90: return {0.0, 1.0};
        case 180: return {-1.0, 0.0};
        case 270: return {0.0, -1.0};
        default: break;
    }
    const double rad = theta_deg * kPi / 180.0;
    return {std::cos(rad), std::sin(rad)};
}

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleSpec : Error { using Error::Error; };
struct OutOfBounds : Error { using Error::Error; };
struct QueryOutOfFreeSpace : Error { using Error::Error; };
struct ConfigInvalid : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct InsufficientDecay : Error { using Error::Error; };
struct BudgetExhausted : Error { using Error::Error; };
struct EmptyContext : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace echoscout
