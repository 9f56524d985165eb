#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cvreg {

// Engine-level failure (dimension mismatch, degenerate input, ...).
// File/format failures use io::IoError.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct Vec3 {
    float x = 0.0f, y = 0.0f, z = 0.0f;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(float s) const { return {x * s, y * s, z * s}; }
    float norm2() const { return x * x + y * y + z * z; }
    float norm() const { return std::sqrt(norm2()); }
    float max_abs() const { return std::max({std::fabs(x), std::fabs(y), std::fabs(z)}); }
};

struct IVec3 {
    int x = 0, y = 0, z = 0;
    bool operator==(const IVec3&) const = default;
};

inline int clamp_index(int i, int n)
{
    return i < 0 ? 0 : (i >= n ? n - 1 : i);
}

} // namespace cvreg
