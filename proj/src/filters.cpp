#include "cvreg/filters.hpp"

#include "cvreg/kernels.hpp"
#include "cvreg/parallel.hpp"

#include <cstring>
#include <vector>

namespace cvreg {
namespace {

// out slab(x) = sum_j in slab(clamp(x+j)); a slab is the contiguous ny*nz block.
void box_sum_axis_x(const float* in, float* out, IVec3 d, int r)
{
    const std::int64_t slab = std::int64_t(d.y) * d.z;
    const auto& k = kern::ops();
    parallel_for(0, d.x, [&](std::int64_t xb, std::int64_t xe) {
        for (int x = int(xb); x < int(xe); ++x) {
            float* o = out + x * slab;
            std::memcpy(o, in + std::int64_t(clamp_index(x - r, d.x)) * slab, slab * sizeof(float));
            for (int j = x - r + 1; j <= x + r; ++j)
                k.add(o, in + std::int64_t(clamp_index(j, d.x)) * slab, o, slab);
        }
    });
}

void box_sum_axis_y(const float* in, float* out, IVec3 d, int r)
{
    const auto& k = kern::ops();
    parallel_for(0, d.x, [&](std::int64_t xb, std::int64_t xe) {
        for (int x = int(xb); x < int(xe); ++x) {
            const float* ix = in + std::int64_t(x) * d.y * d.z;
            float* ox = out + std::int64_t(x) * d.y * d.z;
            for (int y = 0; y < d.y; ++y) {
                float* o = ox + std::int64_t(y) * d.z;
                std::memcpy(o, ix + std::int64_t(clamp_index(y - r, d.y)) * d.z, d.z * sizeof(float));
                for (int j = y - r + 1; j <= y + r; ++j)
                    k.add(o, ix + std::int64_t(clamp_index(j, d.y)) * d.z, o, d.z);
            }
        }
    });
}

void box_sum_axis_z(const float* in, float* out, IVec3 d, int r)
{
    parallel_for(0, std::int64_t(d.x) * d.y, [&](std::int64_t lb, std::int64_t le) {
        for (std::int64_t line = lb; line < le; ++line) {
            const float* i = in + line * d.z;
            float* o = out + line * d.z;
            for (int z = 0; z < d.z; ++z) {
                float s = 0.0f;
                for (int j = z - r; j <= z + r; ++j)
                    s += i[clamp_index(j, d.z)];
                o[z] = s;
            }
        }
    });
}

} // namespace

void box_sum3(const float* in, float* out, IVec3 dims, int radius)
{
    const std::int64_t n = std::int64_t(dims.x) * dims.y * dims.z;
    std::vector<float> tmp(n);
    box_sum_axis_x(in, tmp.data(), dims, radius);
    box_sum_axis_y(tmp.data(), out, dims, radius);
    std::memcpy(tmp.data(), out, n * sizeof(float));
    box_sum_axis_z(tmp.data(), out, dims, radius);
}

void box_average(Volume& vol, int radius, int passes)
{
    if (radius <= 0 || passes <= 0)
        return;
    const IVec3 d = vol.dims();
    const std::int64_t n = vol.voxel_count();
    const int w = 2 * radius + 1;
    const float inv = 1.0f / (float(w) * float(w) * float(w));
    std::vector<float> tmp(n);
    for (int c = 0; c < vol.channels(); ++c) {
        float* plane = vol.channel_data(c);
        for (int p = 0; p < passes; ++p) {
            box_sum3(plane, tmp.data(), d, radius);
            std::memcpy(plane, tmp.data(), n * sizeof(float));
            kern::ops().scale(plane, inv, std::size_t(n));
        }
    }
}

} // namespace cvreg
