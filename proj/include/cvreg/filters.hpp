#pragma once

// Separable box sums/averages with clamp-to-edge borders. Every output voxel
// is a direct sum over its (clamped) window, so results are exactly
// shift-equivariant on the interior and independent of threading.

#include "cvreg/volume.hpp"

namespace cvreg {

// out(x) = sum of in over the clamped (2r+1)^3 window. Single channel plane.
void box_sum3(const float* in, float* out, IVec3 dims, int radius);

// In-place (2r+1)^3 box average of every channel, `passes` times.
void box_average(Volume& vol, int radius, int passes = 1);

} // namespace cvreg
