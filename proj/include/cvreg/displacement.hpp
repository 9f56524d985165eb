#pragma once

// Displacement-field algebra. A field u stores per-voxel vectors in voxel
// units of its own grid and realizes the backward map phi^-1(x) = x + u(x):
// warped(x) = source(x + u(x)). The all-zero field is the identity.

#include "cvreg/volume.hpp"

namespace cvreg {

class DisplacementField {
public:
    DisplacementField() = default;
    explicit DisplacementField(Volume vol);
    static DisplacementField zero(IVec3 dims, Vec3 spacing = {1.0f, 1.0f, 1.0f});

    IVec3 dims() const { return vol_.dims(); }
    Vec3 spacing() const { return vol_.spacing(); }
    std::int64_t voxel_count() const { return vol_.voxel_count(); }

    Vec3 at(int x, int y, int z) const
    {
        return {vol_.at(0, x, y, z), vol_.at(1, x, y, z), vol_.at(2, x, y, z)};
    }
    void set(int x, int y, int z, Vec3 v)
    {
        vol_.at(0, x, y, z) = v.x;
        vol_.at(1, x, y, z) = v.y;
        vol_.at(2, x, y, z) = v.z;
    }

    Volume& volume() { return vol_; }
    const Volume& volume() const { return vol_; }

    float max_abs() const;

private:
    Volume vol_;
};

// warped(x) = vol(x + u(x)); trilinear, nearest-neighbor for label maps.
// u must live on vol's grid.
Volume warp(const Volume& vol, const DisplacementField& u);

// Field equal to applying u_inner first, then u_outer (the coarser, earlier
// field): result(x) = u_inner(x) + u_outer(x + u_inner(x)).
DisplacementField compose(const DisplacementField& u_outer, const DisplacementField& u_inner);

// Trilinear-resample to target_dims (expected within +-1 of twice the source
// dims) and double the vector components: voxel units scale with resolution.
DisplacementField upsample2x(const DisplacementField& u, IVec3 target_dims);

// Per-voxel det(I + grad u), central differences inside, one-sided at the
// borders. Voxel units.
Volume jacobian_determinant(const DisplacementField& u);

} // namespace cvreg
