#pragma once

// Dense feature-similarity volume over a bounded displacement search:
//   value(x, d) = <f_fix(x), f_mov(x + d)>,  d in [-N, N]^3
// with x + d clamped to the border so every voxel keeps a full candidate set.
// Higher values mean better alignment. Candidate-major memory layout: the
// (2N+1)^3 values of one voxel are contiguous.

#include "cvreg/features.hpp"

#include <cstdint>
#include <vector>

namespace cvreg {

// Materialized candidate storage caps the radius at 8 (4913 floats/voxel);
// larger sweeps use streaming evaluation.
inline constexpr int kMaxMaterializedRadius = 8;

class CostVolume {
public:
    enum class Mode { Materialized, Streaming };

    static CostVolume build(const FeatureVolume& f_fix, const FeatureVolume& f_mov,
                            int radius, Mode mode = Mode::Materialized);

    int radius() const { return radius_; }
    IVec3 dims() const { return dims_; }
    Mode mode() const { return mode_; }
    int candidate_count() const { return side_ * side_ * side_; }

    std::int64_t voxel_count() const { return std::int64_t(dims_.x) * dims_.y * dims_.z; }

    // Candidate rank <-> displacement, lexicographic over (dx, dy, dz).
    IVec3 unrank(int k) const
    {
        const int dz = k % side_;
        const int dy = (k / side_) % side_;
        const int dx = k / (side_ * side_);
        return {dx - radius_, dy - radius_, dz - radius_};
    }
    int rank(IVec3 d) const
    {
        return ((d.x + radius_) * side_ + (d.y + radius_)) * side_ + (d.z + radius_);
    }

    // voxel is the spatial linear id (z fastest).
    float value(std::int64_t voxel, int k) const
    {
        if (mode_ == Mode::Materialized)
            return values_[voxel * candidate_count() + k];
        return stream_value(voxel, k);
    }

    // Materialized only: the K contiguous candidate values of one voxel.
    const float* voxel_values(std::int64_t voxel) const
    {
        return values_.data() + voxel * candidate_count();
    }

private:
    float stream_value(std::int64_t voxel, int k) const;

    int radius_ = 0;
    int side_ = 1;
    IVec3 dims_{};
    int channels_ = 0;
    Mode mode_ = Mode::Materialized;
    std::vector<float> values_;   // materialized
    std::vector<float> fix_pk_;   // streaming: voxel-major packed features
    std::vector<float> mov_pk_;
};

// Single candidate straight from the feature volumes; bit-identical to the
// materialized value at (x, d) (same packed dot kernel, same channel order).
float stream_candidate(const FeatureVolume& f_fix, const FeatureVolume& f_mov,
                       IVec3 x, IVec3 d);

} // namespace cvreg
