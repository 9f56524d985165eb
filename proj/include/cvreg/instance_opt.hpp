#pragma once

// Continuous per-pair refinement: adaptive-moment gradient descent on
//   loss(u) = -(1/|O|) sum_x <f_fix(x), f_mov(x + u(x))>
//             + lambda (1/|O|) sum_x ||grad u(x)||_F^2
// with the gradient of u by forward differences (zero at the far border).

#include "cvreg/displacement.hpp"
#include "cvreg/features.hpp"

#include <vector>

namespace cvreg {

struct InstanceOptConfig {
    float learning_rate = 0.05f;
    int iterations = 50;
    float lambda_diffusion = 0.1f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float epsilon = 1e-8f;

    void validate() const;
};

// Accumulated in double so finite-difference probes of single components are
// not drowned by summation noise.
double instance_loss(const FeatureVolume& f_fix, const FeatureVolume& f_mov,
                     const DisplacementField& u, float lambda);

// Exact gradient of instance_loss w.r.t. every component of u: chain rule
// through the trilinear sampler plus the adjoint of the forward differences.
DisplacementField instance_loss_gradient(const FeatureVolume& f_fix, const FeatureVolume& f_mov,
                                         const DisplacementField& u, float lambda);

DisplacementField instance_optimize(const FeatureVolume& f_fix, const FeatureVolume& f_mov,
                                    const DisplacementField& u_init, const InstanceOptConfig& cfg,
                                    std::vector<double>* loss_trace = nullptr);

} // namespace cvreg
