#pragma once

// Coarse-to-fine registration driver: image pyramid, per-level feature
// extraction at half the level resolution, progressive warping, convex solve,
// field composition, optional instance refinement.

#include "cvreg/cost_volume.hpp"
#include "cvreg/instance_opt.hpp"
#include "cvreg/solver.hpp"

#include <vector>

namespace cvreg {

struct PyramidConfig {
    int levels = 3;
    std::vector<int> radii{2, 3, 3}; // coarse -> fine, one per level
    SolverConfig solver;
    FeatureProviderConfig provider;
    InstanceOptConfig instance;
    bool run_instance_opt = true;
    CostVolume::Mode cost_mode = CostVolume::Mode::Materialized;

    void validate() const;
};

struct LevelReport {
    int level = 0; // 0 = finest
    IVec3 image_dims{};
    IVec3 feature_dims{};
    int radius = 0;
    std::vector<float> coupling_gaps;
    float delta_max_abs = 0.0f; // per-level increment, voxels
    double seconds = 0.0;
};

struct RegistrationResult {
    DisplacementField field; // full image resolution
    std::vector<LevelReport> levels; // coarsest first (execution order)
    std::vector<double> instance_loss_trace;
    double instance_seconds = 0.0;
    double total_seconds = 0.0;
    int capture_radius_voxels = 0;
    float field_max_abs = 0.0f;
};

RegistrationResult register_volumes(const Volume& fixed, const Volume& moving,
                                    const PyramidConfig& cfg);

// Largest displacement the configuration can represent:
// sum over levels of radius * 2^(level+1) — the +1 is the half-resolution
// feature grid.
int effective_capture_radius(const PyramidConfig& cfg);

} // namespace cvreg
