#pragma once

// Seeded synthetic data: ellipsoid phantoms with labeled organs, and smooth
// fold-free ground-truth deformations for oracles and benchmarks.

#include "cvreg/displacement.hpp"
#include "cvreg/volume.hpp"

#include <cstdint>

namespace cvreg {

struct Phantom {
    Volume image;  // scalar, textured
    Volume labels; // 0 background/body, 1..K organs
    int organ_count = 0;
};

// Body ellipsoid containing 4-8 non-overlapping ellipsoidal organs with
// distinct intensities, plus low-amplitude smooth texture. dims >= 16.
Phantom make_phantom(IVec3 dims, std::uint64_t seed);

// Same anatomy and texture as make_phantom(dims, seed), but evaluated
// analytically at x + field(x): a ground-truth-warped acquisition with no
// interpolation blur and exact labels. The field must live on dims.
Phantom make_phantom_warped(IVec3 dims, std::uint64_t seed, const DisplacementField& field);

// Smoothed white noise rescaled so the max vector norm equals
// max_magnitude_vox, then shrunk by 0.8 steps until min det(I + grad u) >
// 0.1 (error after 10 retries).
DisplacementField make_smooth_field(IVec3 dims, float max_magnitude_vox,
                                    float smoothness_sigma_vox, std::uint64_t seed);

} // namespace cvreg
