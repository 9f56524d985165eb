#include "cvreg/volume.hpp"

#include "cvreg/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace cvreg {

Volume::Volume(IVec3 dims, int channels, Kind kind, Vec3 spacing)
    : dims_(dims), spacing_(spacing), channels_(channels), kind_(kind)
{
    if (dims.x <= 0 || dims.y <= 0 || dims.z <= 0)
        throw Error("volume dims must be positive");
    if (channels < 1)
        throw Error("volume needs at least one channel");
    if (!(spacing.x > 0.0f) || !(spacing.y > 0.0f) || !(spacing.z > 0.0f) ||
        !std::isfinite(spacing.x) || !std::isfinite(spacing.y) || !std::isfinite(spacing.z))
        throw Error("volume spacing must be positive and finite");
    data_.assign(std::int64_t(channels) * voxel_count(), 0.0f);
}

namespace {

struct CellAxis {
    int i0;      // low corner, in [0, n-2] (or 0 when n == 1)
    float frac;  // offset within the cell, in [0, 1]
    bool clamped; // p was strictly outside [0, n-1]
    bool flat;    // singleton axis
};

inline CellAxis cell_axis(float p, int n)
{
    CellAxis a;
    a.flat = (n == 1);
    a.clamped = (p < 0.0f) || (p > float(n - 1));
    if (a.flat) {
        a.i0 = 0;
        a.frac = 0.0f;
        return a;
    }
    float q = std::clamp(p, 0.0f, float(n - 1));
    int i0 = int(std::floor(q));
    i0 = std::min(i0, n - 2);
    a.i0 = i0;
    a.frac = q - float(i0);
    return a;
}

} // namespace

void sample_trilinear(const Volume& vol, Vec3 p, float* out)
{
    const IVec3 d = vol.dims();
    const CellAxis ax = cell_axis(p.x, d.x);
    const CellAxis ay = cell_axis(p.y, d.y);
    const CellAxis az = cell_axis(p.z, d.z);

    const int x1 = ax.flat ? 0 : ax.i0 + 1;
    const int y1 = ay.flat ? 0 : ay.i0 + 1;
    const int z1 = az.flat ? 0 : az.i0 + 1;

    const float fx = ax.frac, fy = ay.frac, fz = az.frac;
    // Two-weight lerps stay exact at both cell endpoints, so sampling at a
    // voxel center reproduces the stored value bit for bit.
    const float gx = 1.0f - fx, gy = 1.0f - fy, gz = 1.0f - fz;
    for (int c = 0; c < vol.channels(); ++c) {
        const float c000 = vol.at(c, ax.i0, ay.i0, az.i0);
        const float c100 = vol.at(c, x1, ay.i0, az.i0);
        const float c010 = vol.at(c, ax.i0, y1, az.i0);
        const float c110 = vol.at(c, x1, y1, az.i0);
        const float c001 = vol.at(c, ax.i0, ay.i0, z1);
        const float c101 = vol.at(c, x1, ay.i0, z1);
        const float c011 = vol.at(c, ax.i0, y1, z1);
        const float c111 = vol.at(c, x1, y1, z1);

        const float c00 = gz * c000 + fz * c001;
        const float c10 = gz * c100 + fz * c101;
        const float c01 = gz * c010 + fz * c011;
        const float c11 = gz * c110 + fz * c111;
        const float c0 = gy * c00 + fy * c01;
        const float c1 = gy * c10 + fy * c11;
        out[c] = gx * c0 + fx * c1;
    }
}

float sample_trilinear1(const Volume& vol, Vec3 p)
{
    float v;
    sample_trilinear(vol, p, &v);
    return v;
}

void sample_nearest(const Volume& vol, Vec3 p, float* out)
{
    const IVec3 d = vol.dims();
    const int x = clamp_index(int(std::floor(p.x + 0.5f)), d.x);
    const int y = clamp_index(int(std::floor(p.y + 0.5f)), d.y);
    const int z = clamp_index(int(std::floor(p.z + 0.5f)), d.z);
    for (int c = 0; c < vol.channels(); ++c)
        out[c] = vol.at(c, x, y, z);
}

void sample_gradient(const Volume& vol, Vec3 p, float* out)
{
    const IVec3 d = vol.dims();
    const CellAxis ax = cell_axis(p.x, d.x);
    const CellAxis ay = cell_axis(p.y, d.y);
    const CellAxis az = cell_axis(p.z, d.z);

    const int x1 = ax.flat ? 0 : ax.i0 + 1;
    const int y1 = ay.flat ? 0 : ay.i0 + 1;
    const int z1 = az.flat ? 0 : az.i0 + 1;

    const float fx = ax.frac, fy = ay.frac, fz = az.frac;
    const bool zx = ax.flat || ax.clamped;
    const bool zy = ay.flat || ay.clamped;
    const bool zz = az.flat || az.clamped;

    for (int c = 0; c < vol.channels(); ++c) {
        const float c000 = vol.at(c, ax.i0, ay.i0, az.i0);
        const float c100 = vol.at(c, x1, ay.i0, az.i0);
        const float c010 = vol.at(c, ax.i0, y1, az.i0);
        const float c110 = vol.at(c, x1, y1, az.i0);
        const float c001 = vol.at(c, ax.i0, ay.i0, z1);
        const float c101 = vol.at(c, x1, ay.i0, z1);
        const float c011 = vol.at(c, ax.i0, y1, z1);
        const float c111 = vol.at(c, x1, y1, z1);

        // d/dx: difference of the two x-faces, each bilinear in (y,z).
        const float gx = (1 - fy) * ((1 - fz) * (c100 - c000) + fz * (c101 - c001)) +
                         fy * ((1 - fz) * (c110 - c010) + fz * (c111 - c011));
        const float gy = (1 - fx) * ((1 - fz) * (c010 - c000) + fz * (c011 - c001)) +
                         fx * ((1 - fz) * (c110 - c100) + fz * (c111 - c101));
        const float gz = (1 - fx) * ((1 - fy) * (c001 - c000) + fy * (c011 - c010)) +
                         fx * ((1 - fy) * (c101 - c100) + fy * (c111 - c110));

        out[c * 3 + 0] = zx ? 0.0f : gx;
        out[c * 3 + 1] = zy ? 0.0f : gy;
        out[c * 3 + 2] = zz ? 0.0f : gz;
    }
}

Volume downsample_half(const Volume& vol)
{
    const IVec3 d = vol.dims();
    if (d.x < 2 && d.y < 2 && d.z < 2)
        throw Error("downsample_half: degenerate axis");

    const IVec3 od{(d.x + 1) / 2, (d.y + 1) / 2, (d.z + 1) / 2};
    const Vec3 os{vol.spacing().x * 2, vol.spacing().y * 2, vol.spacing().z * 2};
    Volume out(od, vol.channels(), vol.kind(), os);

    const bool labels = vol.kind() == Kind::LabelMap;
    for (int c = 0; c < vol.channels(); ++c) {
        parallel_for(0, od.x, [&](std::int64_t xb, std::int64_t xe) {
            for (int x = int(xb); x < int(xe); ++x)
                for (int y = 0; y < od.y; ++y)
                    for (int z = 0; z < od.z; ++z) {
                        if (labels) {
                            out.at(c, x, y, z) = vol.at(c, 2 * x, 2 * y, 2 * z);
                            continue;
                        }
                        float sum = 0.0f;
                        for (int dx = 0; dx < 2; ++dx)
                            for (int dy = 0; dy < 2; ++dy)
                                for (int dz = 0; dz < 2; ++dz)
                                    sum += vol.at(c,
                                                  std::min(2 * x + dx, d.x - 1),
                                                  std::min(2 * y + dy, d.y - 1),
                                                  std::min(2 * z + dz, d.z - 1));
                        out.at(c, x, y, z) = sum * 0.125f;
                    }
        });
    }
    return out;
}

float AffineTransform::det() const
{
    const auto& m = matrix;
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

AffineTransform AffineTransform::inverse() const
{
    const float dt = det();
    if (std::fabs(dt) <= 1e-12f)
        throw Error("affine transform is singular");
    const auto& m = matrix;
    AffineTransform inv;
    const float id = 1.0f / dt;
    inv.matrix = {
        (m[4] * m[8] - m[5] * m[7]) * id,
        (m[2] * m[7] - m[1] * m[8]) * id,
        (m[1] * m[5] - m[2] * m[4]) * id,
        (m[5] * m[6] - m[3] * m[8]) * id,
        (m[0] * m[8] - m[2] * m[6]) * id,
        (m[2] * m[3] - m[0] * m[5]) * id,
        (m[3] * m[7] - m[4] * m[6]) * id,
        (m[1] * m[6] - m[0] * m[7]) * id,
        (m[0] * m[4] - m[1] * m[3]) * id,
    };
    // T^-1(p) = center + M^-1*(p - center - translation)
    const Vec3 t = translation;
    inv.translation = {
        -(inv.matrix[0] * t.x + inv.matrix[1] * t.y + inv.matrix[2] * t.z),
        -(inv.matrix[3] * t.x + inv.matrix[4] * t.y + inv.matrix[5] * t.z),
        -(inv.matrix[6] * t.x + inv.matrix[7] * t.y + inv.matrix[8] * t.z),
    };
    inv.center = center;
    return inv;
}

AffineTransform AffineTransform::rotation_deg(int axis, float degrees)
{
    if (axis < 0 || axis > 2)
        throw Error("rotation axis must be 0, 1 or 2");
    constexpr float kPi = 3.14159265358979323846f;
    const float r = degrees * kPi / 180.0f;
    const float c = std::cos(r), s = std::sin(r);
    AffineTransform a;
    switch (axis) {
    case 0: a.matrix = {1, 0, 0, 0, c, -s, 0, s, c}; break;
    case 1: a.matrix = {c, 0, s, 0, 1, 0, -s, 0, c}; break;
    default: a.matrix = {c, -s, 0, s, c, 0, 0, 0, 1}; break;
    }
    return a;
}

AffineTransform AffineTransform::compose_after(const AffineTransform& other) const
{
    AffineTransform r;
    const auto& a = other.matrix;
    const auto& b = matrix;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r.matrix[i * 3 + j] = a[i * 3] * b[j] + a[i * 3 + 1] * b[3 + j] + a[i * 3 + 2] * b[6 + j];
    const Vec3 t = translation;
    r.translation = {
        a[0] * t.x + a[1] * t.y + a[2] * t.z + other.translation.x,
        a[3] * t.x + a[4] * t.y + a[5] * t.z + other.translation.y,
        a[6] * t.x + a[7] * t.y + a[8] * t.z + other.translation.z,
    };
    r.center = center ? center : other.center;
    return r;
}

Volume warp_affine(const Volume& vol, const AffineTransform& A)
{
    const AffineTransform inv = A.inverse();
    const Vec3 c = A.center.value_or(vol.grid_center());
    const auto& m = inv.matrix;
    const Vec3 it = inv.translation;

    Volume out(vol.dims(), vol.channels(), vol.kind(), vol.spacing());
    const IVec3 d = vol.dims();
    const bool labels = vol.kind() == Kind::LabelMap;
    const int C = vol.channels();

    parallel_for(0, d.x, [&](std::int64_t xb, std::int64_t xe) {
        std::vector<float> buf(C);
        for (int x = int(xb); x < int(xe); ++x)
            for (int y = 0; y < d.y; ++y)
                for (int z = 0; z < d.z; ++z) {
                    const Vec3 q{float(x) - c.x, float(y) - c.y, float(z) - c.z};
                    const Vec3 p{
                        c.x + m[0] * q.x + m[1] * q.y + m[2] * q.z + it.x,
                        c.y + m[3] * q.x + m[4] * q.y + m[5] * q.z + it.y,
                        c.z + m[6] * q.x + m[7] * q.y + m[8] * q.z + it.z,
                    };
                    if (labels)
                        sample_nearest(vol, p, buf.data());
                    else
                        sample_trilinear(vol, p, buf.data());
                    for (int ch = 0; ch < C; ++ch)
                        out.at(ch, x, y, z) = buf[ch];
                }
    });
    return out;
}

} // namespace cvreg
