#pragma once

// Similarity-landscape analysis: sweep rotations along two axes and record
// the global feature-similarity score per (alpha, beta) cell. Reveals the
// capture range and convergence basin of a feature provider.

#include "cvreg/features.hpp"

#include <string>
#include <vector>

namespace cvreg {

// Mean over voxels of the per-voxel feature dot product.
double similarity_score(const FeatureVolume& f_a, const FeatureVolume& f_b);

struct LandscapeConfig {
    int axis_i = 0;
    int axis_j = 1;
    float range_deg = 60.0f; // sweep covers [-range, +range]
    float step_deg = 5.0f;
    // Restrict the score to voxels above the image's mid-intensity
    // (re-extracting providers only).
    bool foreground_mask = false;
};

struct LandscapeGrid {
    std::vector<float> angles;  // shared alpha/beta axis
    std::vector<double> scores; // alpha-major: scores[a * angles.size() + b]

    double at(std::size_t ai, std::size_t bi) const { return scores[ai * angles.size() + bi]; }
};

// Rotate by alpha about axis_i then beta about axis_j (one combined resample
// about the volume center), extract features of both versions, score.
// The embedded provider rotates its stored feature volume instead.
LandscapeGrid rotation_landscape(const Volume& image, const FeatureProvider& provider,
                                 const LandscapeConfig& cfg);

// Header alpha_deg,beta_deg,score; rows lexicographic in (alpha, beta);
// scores at 6 significant digits.
void write_landscape_csv(const LandscapeGrid& grid, const std::string& path);

} // namespace cvreg
