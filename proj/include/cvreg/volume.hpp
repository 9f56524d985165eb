#pragma once

// 3D multi-channel grid container plus sampling, pyramid downsampling and
// affine warping. Layout is channel-major with z fastest:
//   index(c,x,y,z) = ((c*nx + x)*ny + y)*nz + z
// Out-of-range coordinates clamp to the border everywhere.

#include "cvreg/common.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace cvreg {

enum class Kind : std::uint8_t {
    ScalarImage = 0,
    LabelMap = 1,
    FeatureMap = 2,
    VectorField = 3,
};

class Volume {
public:
    Volume() = default;
    Volume(IVec3 dims, int channels, Kind kind, Vec3 spacing = {1.0f, 1.0f, 1.0f});

    IVec3 dims() const { return dims_; }
    Vec3 spacing() const { return spacing_; }
    int channels() const { return channels_; }
    Kind kind() const { return kind_; }

    std::int64_t voxel_count() const
    {
        return std::int64_t(dims_.x) * dims_.y * dims_.z;
    }

    std::int64_t index(int c, int x, int y, int z) const
    {
        return ((std::int64_t(c) * dims_.x + x) * dims_.y + y) * dims_.z + z;
    }

    float& at(int c, int x, int y, int z) { return data_[index(c, x, y, z)]; }
    float at(int c, int x, int y, int z) const { return data_[index(c, x, y, z)]; }

    float* channel_data(int c) { return data_.data() + std::int64_t(c) * voxel_count(); }
    const float* channel_data(int c) const { return data_.data() + std::int64_t(c) * voxel_count(); }

    std::vector<float>& data() { return data_; }
    const std::vector<float>& data() const { return data_; }

    // Linear voxel id (channel-independent) <-> grid coordinates, z fastest.
    IVec3 delinearize(std::int64_t v) const
    {
        const int z = int(v % dims_.z);
        const int y = int((v / dims_.z) % dims_.y);
        const int x = int(v / (std::int64_t(dims_.z) * dims_.y));
        return {x, y, z};
    }

    Vec3 grid_center() const
    {
        return {0.5f * float(dims_.x - 1), 0.5f * float(dims_.y - 1), 0.5f * float(dims_.z - 1)};
    }

    bool same_grid(const Volume& o) const
    {
        return dims_.x == o.dims_.x && dims_.y == o.dims_.y && dims_.z == o.dims_.z;
    }

private:
    IVec3 dims_{0, 0, 0};
    Vec3 spacing_{1.0f, 1.0f, 1.0f};
    int channels_ = 0;
    Kind kind_ = Kind::ScalarImage;
    std::vector<float> data_;
};

struct AffineTransform {
    // Forward map about `center`: T(p) = center + M*(p - center) + translation.
    std::array<float, 9> matrix{1, 0, 0, 0, 1, 0, 0, 0, 1}; // row-major
    Vec3 translation{};
    std::optional<Vec3> center; // grid center of the warped volume when unset

    float det() const;
    AffineTransform inverse() const; // throws Error on |det| <= 1e-12

    static AffineTransform rotation_deg(int axis, float degrees);
    // other * this: apply `this` first, then `other`.
    AffineTransform compose_after(const AffineTransform& other) const;
};

// Trilinear sample of all channels at continuous voxel coordinate p,
// clamp-to-edge. out must hold channels() floats. Not for label maps.
void sample_trilinear(const Volume& vol, Vec3 p, float* out);
float sample_trilinear1(const Volume& vol, Vec3 p); // single-channel shorthand

// Nearest-neighbor sample (label maps).
void sample_nearest(const Volume& vol, Vec3 p, float* out);

// Analytic Jacobian of sample_trilinear w.r.t. p; out is C x 3 row-major
// (out[c*3 + axis]). Derivative is 0 along any axis where p is clamped.
void sample_gradient(const Volume& vol, Vec3 p, float* out);

// Halve every axis (ceil), double the spacing. Scalar/feature/vector volumes
// use 2^3 average pooling with the window clamped at the borders, label maps
// take the even-index voxel. Throws "degenerate axis" when all dims are 1.
Volume downsample_half(const Volume& vol);

// Resample through the inverse of A (nearest for label maps); output grid
// equals the input grid.
Volume warp_affine(const Volume& vol, const AffineTransform& A);

} // namespace cvreg
