#pragma once

// One pyramid level of the decoupled discrete optimization: alternate a
// point-wise coupled argmax over the cost volume with mean-field smoothing
// (average pooling), walking a schedule of increasing coupling weights
// w = 1/(2*theta).

#include "cvreg/cost_volume.hpp"
#include "cvreg/displacement.hpp"

#include <vector>

namespace cvreg {

struct SolverConfig {
    std::vector<float> coupling_schedule{0.003f, 0.01f, 0.03f, 0.1f, 0.3f, 1.0f};
    int smooth_kernel = 3; // odd
    int smooth_passes = 1;

    void validate() const;
};

struct SolveDiagnostics {
    // max |v_hat - u_hat| before smoothing, one entry per schedule step.
    std::vector<float> coupling_gaps;
};

// v_hat(x) = argmax_d [ sim(x,d) - w*||d - u_hat(x)||^2 ], components in
// [-N, N]; ties break to the smallest candidate rank (lexicographically
// smallest d).
DisplacementField pointwise_update(const CostVolume& cost, const DisplacementField& u_hat, float w);

// k^3 box average of each component, clamp-to-edge, `passes` times.
DisplacementField smooth_update(const DisplacementField& v_hat, const SolverConfig& cfg);

DisplacementField solve_level(const CostVolume& cost, const DisplacementField& u_init,
                              const SolverConfig& cfg, SolveDiagnostics* diag = nullptr);

} // namespace cvreg
