#pragma once

// Evaluation metrics: per-label and mean Dice overlap, the standard
// deviation of log det(I + grad u), and endpoint error against synthetic
// ground truth.

#include "cvreg/displacement.hpp"
#include "cvreg/volume.hpp"

#include <vector>

namespace cvreg {

// 2|A^B| / (|A|+|B|). Both sets empty -> 1.0, exactly one empty -> 0.0.
double dice(const Volume& labels_a, const Volume& labels_b, int label);

// Arithmetic mean of dice over label_set; empty set is an error.
double mean_dice(const Volume& labels_a, const Volume& labels_b, const std::vector<int>& label_set);

// Population standard deviation of log(max(det, 1e-6)) over all voxels.
double sd_log_j(const DisplacementField& u);

struct EndpointError {
    double mean = 0.0;
    double max = 0.0;
};

// Per-voxel Euclidean error in voxels; mask (optional scalar volume,
// nonzero = evaluate) restricts the statistics.
EndpointError endpoint_error(const DisplacementField& u_est, const DisplacementField& u_true,
                             const Volume* mask = nullptr);

// Distinct nonzero labels present in either map, ascending.
std::vector<int> labels_present(const Volume& labels_a, const Volume& labels_b);

} // namespace cvreg
