#pragma once

// Shared fixtures for the test suites.

#include "cvreg/features.hpp"
#include "cvreg/filters.hpp"
#include "cvreg/volume.hpp"

#include <random>

namespace testutil {

inline cvreg::Volume random_volume(cvreg::IVec3 dims, int channels, unsigned seed,
                                   cvreg::Kind kind = cvreg::Kind::ScalarImage,
                                   float lo = -1.0f, float hi = 1.0f)
{
    cvreg::Volume v(dims, channels, kind);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(lo, hi);
    for (auto& x : v.data())
        x = u(rng);
    return v;
}

// Smooth normalized feature volume, the workhorse for solver/cost tests.
inline cvreg::FeatureVolume smooth_features(cvreg::IVec3 dims, int channels, unsigned seed,
                                            int radius = 2)
{
    cvreg::FeatureVolume f{random_volume(dims, channels, seed, cvreg::Kind::FeatureMap), false};
    cvreg::box_average(f.vol, radius, 1);
    cvreg::normalize_per_voxel(f);
    return f;
}

// out(x) = g(x - t) for integer t: content moved by +t, clamped at borders.
inline cvreg::Volume shift_volume(const cvreg::Volume& g, cvreg::IVec3 t)
{
    cvreg::Volume out(g.dims(), g.channels(), g.kind(), g.spacing());
    const cvreg::IVec3 d = g.dims();
    for (int c = 0; c < g.channels(); ++c)
        for (int x = 0; x < d.x; ++x)
            for (int y = 0; y < d.y; ++y)
                for (int z = 0; z < d.z; ++z)
                    out.at(c, x, y, z) = g.at(c, cvreg::clamp_index(x - t.x, d.x),
                                              cvreg::clamp_index(y - t.y, d.y),
                                              cvreg::clamp_index(z - t.z, d.z));
    return out;
}

} // namespace testutil
