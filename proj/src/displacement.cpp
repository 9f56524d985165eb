#include "cvreg/displacement.hpp"

#include "cvreg/parallel.hpp"

#include <cmath>

namespace cvreg {

DisplacementField::DisplacementField(Volume vol) : vol_(std::move(vol))
{
    if (vol_.channels() != 3)
        throw Error("displacement field needs exactly 3 channels");
    for (float v : vol_.data())
        if (!std::isfinite(v))
            throw Error("displacement field contains non-finite entries");
}

DisplacementField DisplacementField::zero(IVec3 dims, Vec3 spacing)
{
    return DisplacementField(Volume(dims, 3, Kind::VectorField, spacing));
}

float DisplacementField::max_abs() const
{
    float m = 0.0f;
    for (float v : vol_.data())
        m = std::max(m, std::fabs(v));
    return m;
}

Volume warp(const Volume& vol, const DisplacementField& u)
{
    if (!vol.same_grid(u.volume()))
        throw Error("warp: displacement grid does not match volume dims");

    Volume out(vol.dims(), vol.channels(), vol.kind(), vol.spacing());
    const IVec3 d = vol.dims();
    const int C = vol.channels();
    const bool labels = vol.kind() == Kind::LabelMap;

    parallel_for(0, d.x, [&](std::int64_t xb, std::int64_t xe) {
        std::vector<float> buf(C);
        for (int x = int(xb); x < int(xe); ++x)
            for (int y = 0; y < d.y; ++y)
                for (int z = 0; z < d.z; ++z) {
                    const Vec3 v = u.at(x, y, z);
                    const Vec3 p{float(x) + v.x, float(y) + v.y, float(z) + v.z};
                    if (labels)
                        sample_nearest(vol, p, buf.data());
                    else
                        sample_trilinear(vol, p, buf.data());
                    for (int c = 0; c < C; ++c)
                        out.at(c, x, y, z) = buf[c];
                }
    });
    return out;
}

DisplacementField compose(const DisplacementField& u_outer, const DisplacementField& u_inner)
{
    if (!u_outer.volume().same_grid(u_inner.volume()))
        throw Error("compose: displacement grids do not match");

    DisplacementField out = DisplacementField::zero(u_inner.dims(), u_inner.spacing());
    const IVec3 d = u_inner.dims();

    parallel_for(0, d.x, [&](std::int64_t xb, std::int64_t xe) {
        float sampled[3];
        for (int x = int(xb); x < int(xe); ++x)
            for (int y = 0; y < d.y; ++y)
                for (int z = 0; z < d.z; ++z) {
                    const Vec3 vi = u_inner.at(x, y, z);
                    const Vec3 p{float(x) + vi.x, float(y) + vi.y, float(z) + vi.z};
                    sample_trilinear(u_outer.volume(), p, sampled);
                    out.set(x, y, z, {vi.x + sampled[0], vi.y + sampled[1], vi.z + sampled[2]});
                }
    });
    return out;
}

DisplacementField upsample2x(const DisplacementField& u, IVec3 target_dims)
{
    const IVec3 s = u.dims();
    auto ok = [](int tgt, int src) { return std::abs(tgt - 2 * src) <= 1; };
    if (!ok(target_dims.x, s.x) || !ok(target_dims.y, s.y) || !ok(target_dims.z, s.z))
        throw Error("upsample2x: target dims are not within +-1 of twice the source dims");

    Vec3 sp = u.spacing();
    DisplacementField out = DisplacementField::zero(target_dims, {sp.x * 0.5f, sp.y * 0.5f, sp.z * 0.5f});

    parallel_for(0, target_dims.x, [&](std::int64_t xb, std::int64_t xe) {
        float v[3];
        for (int x = int(xb); x < int(xe); ++x)
            for (int y = 0; y < target_dims.y; ++y)
                for (int z = 0; z < target_dims.z; ++z) {
                    // Coarse voxel i averages fine voxels {2i, 2i+1}, so its
                    // center sits at fine coordinate 2i + 0.5.
                    const Vec3 p{0.5f * float(x) - 0.25f, 0.5f * float(y) - 0.25f,
                                 0.5f * float(z) - 0.25f};
                    sample_trilinear(u.volume(), p, v);
                    out.set(x, y, z, {2.0f * v[0], 2.0f * v[1], 2.0f * v[2]});
                }
    });
    return out;
}

Volume jacobian_determinant(const DisplacementField& u)
{
    const IVec3 d = u.dims();
    if (d.x < 3 || d.y < 3 || d.z < 3)
        throw Error("jacobian_determinant: each axis needs at least 3 voxels");

    Volume out(d, 1, Kind::ScalarImage, u.spacing());

    // diff(c, axis) at a voxel: central inside, one-sided at the borders.
    auto deriv = [&](int c, int x, int y, int z, int axis) {
        const Volume& v = u.volume();
        int lo[3] = {x, y, z}, hi[3] = {x, y, z};
        const int n = axis == 0 ? d.x : (axis == 1 ? d.y : d.z);
        int& l = lo[axis];
        int& h = hi[axis];
        float scale = 0.5f;
        if (h + 1 >= n || l - 1 < 0)
            scale = 1.0f;
        h = std::min(h + 1, n - 1);
        l = std::max(l - 1, 0);
        return (v.at(c, hi[0], hi[1], hi[2]) - v.at(c, lo[0], lo[1], lo[2])) * scale;
    };

    parallel_for(0, d.x, [&](std::int64_t xb, std::int64_t xe) {
        for (int x = int(xb); x < int(xe); ++x)
            for (int y = 0; y < d.y; ++y)
                for (int z = 0; z < d.z; ++z) {
                    float J[9];
                    for (int c = 0; c < 3; ++c)
                        for (int a = 0; a < 3; ++a)
                            J[c * 3 + a] = deriv(c, x, y, z, a) + (c == a ? 1.0f : 0.0f);
                    out.at(0, x, y, z) =
                        J[0] * (J[4] * J[8] - J[5] * J[7]) -
                        J[1] * (J[3] * J[8] - J[5] * J[6]) +
                        J[2] * (J[3] * J[7] - J[4] * J[6]);
                }
    });
    return out;
}

} // namespace cvreg
