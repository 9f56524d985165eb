#include "cvreg/cost_volume.hpp"

#include "cvreg/kernels.hpp"
#include "cvreg/parallel.hpp"

#include <string>

namespace cvreg {
namespace {

void check_pair(const FeatureVolume& f_fix, const FeatureVolume& f_mov)
{
    if (!f_fix.vol.same_grid(f_mov.vol))
        throw Error("cost volume: feature grids do not match");
    if (f_fix.vol.channels() != f_mov.vol.channels())
        throw Error("cost volume: channel counts do not match");
}

} // namespace

CostVolume CostVolume::build(const FeatureVolume& f_fix, const FeatureVolume& f_mov,
                             int radius, Mode mode)
{
    check_pair(f_fix, f_mov);
    if (radius < 0)
        throw Error("cost volume: search radius must be non-negative");
    if (mode == Mode::Materialized && radius > kMaxMaterializedRadius)
        throw Error("cost volume: radius " + std::to_string(radius) +
                    " exceeds the materialized-mode guard (" +
                    std::to_string(kMaxMaterializedRadius) + "); use streaming mode");

    CostVolume cv;
    cv.radius_ = radius;
    cv.side_ = 2 * radius + 1;
    cv.dims_ = f_fix.vol.dims();
    cv.channels_ = f_fix.vol.channels();
    cv.mode_ = mode;

    std::vector<float> fix_pk = pack_interleaved(f_fix.vol);
    std::vector<float> mov_pk = pack_interleaved(f_mov.vol);

    if (mode == Mode::Streaming) {
        cv.fix_pk_ = std::move(fix_pk);
        cv.mov_pk_ = std::move(mov_pk);
        return cv;
    }

    const std::int64_t n = cv.voxel_count();
    const int K = cv.candidate_count();
    const int C = cv.channels_;
    const IVec3 d = cv.dims_;
    cv.values_.resize(std::size_t(n) * K);

    const auto& kops = kern::ops();
    parallel_for(0, n, [&](std::int64_t vb, std::int64_t ve) {
        for (std::int64_t v = vb; v < ve; ++v) {
            const IVec3 p{int(v / (std::int64_t(d.y) * d.z)), int((v / d.z) % d.y), int(v % d.z)};
            const float* a = fix_pk.data() + std::size_t(v) * C;
            float* out = cv.values_.data() + std::size_t(v) * K;
            int k = 0;
            for (int dx = -radius; dx <= radius; ++dx) {
                const int nx = clamp_index(p.x + dx, d.x);
                for (int dy = -radius; dy <= radius; ++dy) {
                    const int ny = clamp_index(p.y + dy, d.y);
                    for (int dz = -radius; dz <= radius; ++dz) {
                        const int nz = clamp_index(p.z + dz, d.z);
                        const std::int64_t nb = (std::int64_t(nx) * d.y + ny) * d.z + nz;
                        out[k++] = kops.dot(a, mov_pk.data() + std::size_t(nb) * C, std::size_t(C));
                    }
                }
            }
        }
    });
    return cv;
}

float CostVolume::stream_value(std::int64_t voxel, int k) const
{
    const IVec3 d = dims_;
    const int z = int(voxel % d.z);
    const int y = int((voxel / d.z) % d.y);
    const int x = int(voxel / (std::int64_t(d.y) * d.z));
    const IVec3 disp = unrank(k);
    const std::int64_t nb =
        (std::int64_t(clamp_index(x + disp.x, d.x)) * d.y + clamp_index(y + disp.y, d.y)) * d.z +
        clamp_index(z + disp.z, d.z);
    return kern::ops().dot(fix_pk_.data() + std::size_t(voxel) * channels_,
                           mov_pk_.data() + std::size_t(nb) * channels_, std::size_t(channels_));
}

float stream_candidate(const FeatureVolume& f_fix, const FeatureVolume& f_mov, IVec3 x, IVec3 d)
{
    check_pair(f_fix, f_mov);
    const IVec3 dims = f_fix.vol.dims();
    const int C = f_fix.vol.channels();
    const std::int64_t n = f_fix.vol.voxel_count();

    const std::int64_t va = (std::int64_t(clamp_index(x.x, dims.x)) * dims.y +
                             clamp_index(x.y, dims.y)) * dims.z + clamp_index(x.z, dims.z);
    const std::int64_t vb = (std::int64_t(clamp_index(x.x + d.x, dims.x)) * dims.y +
                             clamp_index(x.y + d.y, dims.y)) * dims.z + clamp_index(x.z + d.z, dims.z);

    // Gather the two channel vectors so the dot runs over contiguous memory,
    // matching the packed layout the builder uses.
    std::vector<float> a(C), b(C);
    for (int c = 0; c < C; ++c) {
        a[c] = f_fix.vol.data()[std::int64_t(c) * n + va];
        b[c] = f_mov.vol.data()[std::int64_t(c) * n + vb];
    }
    return kern::ops().dot(a.data(), b.data(), std::size_t(C));
}

} // namespace cvreg
