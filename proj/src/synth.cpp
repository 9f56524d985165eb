#include "cvreg/synth.hpp"

#include "cvreg/filters.hpp"
#include "cvreg/kernels.hpp"
#include "cvreg/parallel.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace cvreg {
namespace {

struct Ellipsoid {
    Vec3 center;
    Vec3 radii;

    // Squared normalized radius; <= 1 inside.
    float rho2(float x, float y, float z) const
    {
        const float dx = (x - center.x) / radii.x;
        const float dy = (y - center.y) / radii.y;
        const float dz = (z - center.z) / radii.z;
        return dx * dx + dy * dy + dz * dz;
    }
    float max_radius() const { return std::max({radii.x, radii.y, radii.z}); }
};

// Quintic-blended value noise on a coarse lattice: smooth (C^2), analytic at
// any point, correlation length ~ the lattice spacing.
struct ValueNoise {
    IVec3 n{};
    float spacing = 1.0f;
    std::vector<float> lattice;

    void init(IVec3 dims, float spacing_vox, std::mt19937_64& rng)
    {
        spacing = spacing_vox;
        n = {int(dims.x / spacing_vox) + 3, int(dims.y / spacing_vox) + 3,
             int(dims.z / spacing_vox) + 3};
        lattice.resize(std::size_t(n.x) * n.y * n.z);
        std::uniform_real_distribution<float> unit(-1.0f, 1.0f);
        for (auto& v : lattice)
            v = unit(rng);
    }

    float at(int i, int j, int k) const
    {
        i = clamp_index(i, n.x);
        j = clamp_index(j, n.y);
        k = clamp_index(k, n.z);
        return lattice[(std::size_t(i) * n.y + j) * n.z + k];
    }

    static float fade(float t) { return t * t * t * (t * (t * 6.0f - 15.0f) + 10.0f); }

    float eval(float x, float y, float z) const
    {
        const float gx = x / spacing + 1.0f;
        const float gy = y / spacing + 1.0f;
        const float gz = z / spacing + 1.0f;
        const int i = int(std::floor(gx)), j = int(std::floor(gy)), k = int(std::floor(gz));
        const float tx = fade(gx - float(i));
        const float ty = fade(gy - float(j));
        const float tz = fade(gz - float(k));

        auto lerp = [](float a, float b, float t) { return a + t * (b - a); };
        const float c00 = lerp(at(i, j, k), at(i + 1, j, k), tx);
        const float c10 = lerp(at(i, j + 1, k), at(i + 1, j + 1, k), tx);
        const float c01 = lerp(at(i, j, k + 1), at(i + 1, j, k + 1), tx);
        const float c11 = lerp(at(i, j + 1, k + 1), at(i + 1, j + 1, k + 1), tx);
        return lerp(lerp(c00, c10, ty), lerp(c01, c11, ty), tz);
    }
};

// The analytic phantom: evaluable at arbitrary (warped) positions, so both
// sides of a synthetic pair stay equally sharp.
struct PhantomModel {
    Ellipsoid body;
    std::vector<Ellipsoid> organs;
    ValueNoise tex_blob;
    ValueNoise tex_blob2;
    ValueNoise tex_coarse;

    float image_at(float x, float y, float z) const
    {
        float value = 0.0f;
        const float rb = body.rho2(x, y, z);
        if (rb <= 1.0f) {
            value = 100.0f - 20.0f * rb;
            for (std::size_t k = 0; k < organs.size(); ++k) {
                const float ro = organs[k].rho2(x, y, z);
                if (ro <= 1.0f) {
                    value = 160.0f + 14.0f * float(k) - 25.0f * ro;
                    break;
                }
            }
        }
        // Soft-thresholded blob fields put curved quasi-edges everywhere (the
        // anisotropic structure self-similarity descriptors key on); the
        // coarse component keeps a smooth intensity drift on top.
        value += 16.0f * std::tanh(3.0f * tex_blob.eval(x, y, z)) +
                 12.0f * std::tanh(3.0f * tex_blob2.eval(x, y, z)) +
                 18.0f * std::tanh(2.0f * tex_coarse.eval(x, y, z));
        return value;
    }

    int label_at(float x, float y, float z) const
    {
        if (body.rho2(x, y, z) > 1.0f)
            return 0;
        for (std::size_t k = 0; k < organs.size(); ++k)
            if (organs[k].rho2(x, y, z) <= 1.0f)
                return int(k) + 1;
        return 0;
    }
};

PhantomModel build_model(IVec3 dims, std::uint64_t seed)
{
    if (dims.x < 16 || dims.y < 16 || dims.z < 16)
        throw Error("make_phantom: dims must be >= 16 on every axis");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> unit(0.0f, 1.0f);

    PhantomModel m;
    const Vec3 c{0.5f * (dims.x - 1), 0.5f * (dims.y - 1), 0.5f * (dims.z - 1)};
    m.body = {c, {0.44f * dims.x, 0.44f * dims.y, 0.44f * dims.z}};

    const int organ_count = 4 + int(rng() % 5); // 4..8
    const float min_dim = float(std::min({dims.x, dims.y, dims.z}));

    float radius_hi = 0.14f;
    while (int(m.organs.size()) < organ_count) {
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            Ellipsoid e;
            e.radii = {(0.05f + (radius_hi - 0.05f) * unit(rng)) * min_dim,
                       (0.05f + (radius_hi - 0.05f) * unit(rng)) * min_dim,
                       (0.05f + (radius_hi - 0.05f) * unit(rng)) * min_dim};
            // Keep the organ fully inside the body.
            const float margin = e.max_radius();
            e.center = {c.x + (2.0f * unit(rng) - 1.0f) * (m.body.radii.x * 0.8f - margin),
                        c.y + (2.0f * unit(rng) - 1.0f) * (m.body.radii.y * 0.8f - margin),
                        c.z + (2.0f * unit(rng) - 1.0f) * (m.body.radii.z * 0.8f - margin)};

            bool overlaps = false;
            for (const Ellipsoid& o : m.organs) {
                const Vec3 dd = e.center - o.center;
                if (dd.norm() < 1.05f * (e.max_radius() + o.max_radius())) {
                    overlaps = true;
                    break;
                }
            }
            if (!overlaps) {
                m.organs.push_back(e);
                placed = true;
            }
        }
        if (!placed)
            radius_hi = std::max(0.055f, radius_hi * 0.85f); // shrink and retry
    }

    m.tex_blob.init(dims, 6.0f, rng);
    m.tex_blob2.init(dims, 11.0f, rng);
    m.tex_coarse.init(dims, 16.0f, rng);
    return m;
}

Phantom render(const PhantomModel& m, IVec3 dims, const DisplacementField* field)
{
    Phantom ph;
    ph.image = Volume(dims, 1, Kind::ScalarImage);
    ph.labels = Volume(dims, 1, Kind::LabelMap);
    ph.organ_count = int(m.organs.size());

    parallel_for(0, dims.x, [&](std::int64_t xb, std::int64_t xe) {
        for (int x = int(xb); x < int(xe); ++x)
            for (int y = 0; y < dims.y; ++y)
                for (int z = 0; z < dims.z; ++z) {
                    Vec3 p{float(x), float(y), float(z)};
                    if (field) {
                        const Vec3 u = field->at(x, y, z);
                        p = {p.x + u.x, p.y + u.y, p.z + u.z};
                    }
                    ph.image.at(0, x, y, z) = m.image_at(p.x, p.y, p.z);
                    ph.labels.at(0, x, y, z) = float(m.label_at(p.x, p.y, p.z));
                }
    });
    return ph;
}

} // namespace

Phantom make_phantom(IVec3 dims, std::uint64_t seed)
{
    return render(build_model(dims, seed), dims, nullptr);
}

Phantom make_phantom_warped(IVec3 dims, std::uint64_t seed, const DisplacementField& field)
{
    if (field.dims().x != dims.x || field.dims().y != dims.y || field.dims().z != dims.z)
        throw Error("make_phantom_warped: field grid must match dims");
    return render(build_model(dims, seed), dims, &field);
}

DisplacementField make_smooth_field(IVec3 dims, float max_magnitude_vox,
                                    float smoothness_sigma_vox, std::uint64_t seed)
{
    if (max_magnitude_vox < 0.0f)
        throw Error("make_smooth_field: max magnitude must be >= 0");
    if (dims.x < 3 || dims.y < 3 || dims.z < 3)
        throw Error("make_smooth_field: dims must be >= 3 on every axis");

    DisplacementField field = DisplacementField::zero(dims);
    if (max_magnitude_vox == 0.0f)
        return field;

    // Three box passes approximate a Gaussian: sigma^2 = passes*(w^2-1)/12.
    const float sigma = std::max(smoothness_sigma_vox, 0.5f);
    int w = int(std::lround(std::sqrt(4.0f * sigma * sigma + 1.0f)));
    if (w % 2 == 0)
        ++w;
    w = std::max(w, 3);
    const int r = (w - 1) / 2;

    // Smooth on a padded grid and crop, so border windows average real noise
    // instead of replicated edges (clamped windows inflate the variance near
    // corners and the max-norm rescale would be dominated by border peaks).
    const int pad = 3 * r;
    const IVec3 pd{dims.x + 2 * pad, dims.y + 2 * pad, dims.z + 2 * pad};
    Volume noise(pd, 3, Kind::VectorField);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> unit(-1.0f, 1.0f);
    for (auto& v : noise.data())
        v = unit(rng);
    box_average(noise, r, 3);
    for (int c = 0; c < 3; ++c)
        for (int x = 0; x < dims.x; ++x)
            for (int y = 0; y < dims.y; ++y)
                for (int z = 0; z < dims.z; ++z)
                    field.volume().at(c, x, y, z) = noise.at(c, x + pad, y + pad, z + pad);

    const std::int64_t n = field.voxel_count();
    auto max_norm = [&]() {
        float mx = 0.0f;
        for (std::int64_t v = 0; v < n; ++v) {
            const IVec3 p = field.volume().delinearize(v);
            mx = std::max(mx, field.at(p.x, p.y, p.z).norm());
        }
        return mx;
    };

    const float base = max_norm();
    if (base <= 0.0f)
        throw Error("make_smooth_field: smoothed noise collapsed to zero");
    kern::ops().scale(field.volume().data().data(), max_magnitude_vox / base,
                      field.volume().data().size());

    for (int retry = 0; retry <= 10; ++retry) {
        const Volume det = jacobian_determinant(field);
        float mn = det.data()[0];
        for (float v : det.data())
            mn = std::min(mn, v);
        if (mn > 0.1f)
            return field;
        if (retry == 10)
            break;
        kern::ops().scale(field.volume().data().data(), 0.8f, field.volume().data().size());
    }
    throw Error("make_smooth_field: could not reach a fold-free field within 10 retries");
}

} // namespace cvreg
