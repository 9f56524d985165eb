#include "cvreg/landscape.hpp"

#include "cvreg/io.hpp"
#include "cvreg/kernels.hpp"
#include "cvreg/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace cvreg {

double similarity_score(const FeatureVolume& f_a, const FeatureVolume& f_b)
{
    if (!f_a.vol.same_grid(f_b.vol) || f_a.vol.channels() != f_b.vol.channels())
        throw Error("similarity_score: feature grids do not match");

    const std::int64_t n = f_a.vol.voxel_count();
    const int C = f_a.vol.channels();
    const std::vector<float> pa = pack_interleaved(f_a.vol);
    const std::vector<float> pb = pack_interleaved(f_b.vol);

    std::vector<double> dots(n);
    const auto& k = kern::ops();
    parallel_for(0, n, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t v = b; v < e; ++v)
            dots[v] = k.dot(pa.data() + std::size_t(v) * C, pb.data() + std::size_t(v) * C,
                            std::size_t(C));
    });
    double sum = 0.0;
    for (std::int64_t v = 0; v < n; ++v)
        sum += dots[v];
    return sum / double(n);
}

namespace {

double masked_score(const FeatureVolume& f_a, const FeatureVolume& f_b,
                    const std::vector<std::uint8_t>& mask)
{
    const std::int64_t n = f_a.vol.voxel_count();
    const int C = f_a.vol.channels();
    const std::vector<float> pa = pack_interleaved(f_a.vol);
    const std::vector<float> pb = pack_interleaved(f_b.vol);
    const auto& k = kern::ops();
    double sum = 0.0;
    std::int64_t count = 0;
    for (std::int64_t v = 0; v < n; ++v) {
        if (!mask[v])
            continue;
        sum += k.dot(pa.data() + std::size_t(v) * C, pb.data() + std::size_t(v) * C,
                     std::size_t(C));
        ++count;
    }
    return count > 0 ? sum / double(count) : 0.0;
}

} // namespace

LandscapeGrid rotation_landscape(const Volume& image, const FeatureProvider& provider,
                                 const LandscapeConfig& cfg)
{
    if (cfg.axis_i < 0 || cfg.axis_i > 2 || cfg.axis_j < 0 || cfg.axis_j > 2 ||
        cfg.axis_i == cfg.axis_j)
        throw Error("rotation_landscape: axes must be distinct and in {0,1,2}");
    if (!(cfg.range_deg >= 0.0f) || !(cfg.step_deg > 0.0f))
        throw Error("rotation_landscape: bad range/step");

    LandscapeGrid grid;
    for (float a = -cfg.range_deg; a <= cfg.range_deg + 1e-4f; a += cfg.step_deg)
        grid.angles.push_back(a);
    const std::size_t m = grid.angles.size();
    grid.scores.assign(m * m, 0.0);

    const bool embedded = !provider.reextracts();
    FeatureVolume reference;
    Volume feature_source; // what gets rotated per cell
    if (embedded) {
        reference = provider.load_fused();
        feature_source = reference.vol;
    } else {
        reference = provider.extract(image);
    }

    std::vector<std::uint8_t> mask;
    if (cfg.foreground_mask) {
        if (embedded)
            throw Error("rotation_landscape: foreground mask needs a re-extracting provider");
        float lo = image.data()[0], hi = image.data()[0];
        for (float v : image.data()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const float mid = 0.5f * (lo + hi);
        mask.resize(std::size_t(image.voxel_count()));
        for (std::int64_t i = 0; i < image.voxel_count(); ++i)
            mask[i] = image.data()[i] > mid ? 1 : 0;
    }

    for (std::size_t ai = 0; ai < m; ++ai) {
        for (std::size_t bi = 0; bi < m; ++bi) {
            const AffineTransform rot =
                AffineTransform::rotation_deg(cfg.axis_i, grid.angles[ai])
                    .compose_after(AffineTransform::rotation_deg(cfg.axis_j, grid.angles[bi]));
            FeatureVolume rotated;
            if (embedded) {
                rotated.vol = warp_affine(feature_source, rot);
                rotated.normalized = reference.normalized;
            } else {
                rotated = provider.extract(warp_affine(image, rot));
            }
            grid.scores[ai * m + bi] = mask.empty()
                                           ? similarity_score(reference, rotated)
                                           : masked_score(reference, rotated, mask);
        }
    }
    return grid;
}

void write_landscape_csv(const LandscapeGrid& grid, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw io::IoError(io::IoCode::WriteFailed, path + ": cannot open for writing");
    f << "alpha_deg,beta_deg,score\n";
    const std::size_t m = grid.angles.size();
    char buf[64];
    for (std::size_t ai = 0; ai < m; ++ai)
        for (std::size_t bi = 0; bi < m; ++bi) {
            std::snprintf(buf, sizeof(buf), "%g,%g,%.6g", double(grid.angles[ai]),
                          double(grid.angles[bi]), grid.scores[ai * m + bi]);
            f << buf << "\n";
        }
    if (!f)
        throw io::IoError(io::IoCode::WriteFailed, path + ": write failed");
}

} // namespace cvreg
