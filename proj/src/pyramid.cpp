#include "cvreg/pyramid.hpp"

#include <chrono>
#include <cmath>

namespace cvreg {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

IVec3 half_dims(IVec3 d)
{
    return {(d.x + 1) / 2, (d.y + 1) / 2, (d.z + 1) / 2};
}

} // namespace

void PyramidConfig::validate() const
{
    if (levels < 1)
        throw Error("pyramid: need at least one level");
    if (int(radii.size()) != levels)
        throw Error("pyramid: radii count (" + std::to_string(radii.size()) +
                    ") must equal the level count (" + std::to_string(levels) + ")");
    for (int r : radii)
        if (r < 0)
            throw Error("pyramid: search radii must be non-negative");
    solver.validate();
    instance.validate();
}

int effective_capture_radius(const PyramidConfig& cfg)
{
    cfg.validate();
    int total = 0;
    for (int i = 0; i < cfg.levels; ++i) {
        const int level = cfg.levels - 1 - i; // radii are listed coarse -> fine
        total += cfg.radii[i] * (1 << (level + 1));
    }
    return total;
}

RegistrationResult register_volumes(const Volume& fixed, const Volume& moving,
                                    const PyramidConfig& cfg)
{
    cfg.validate();
    if (!fixed.same_grid(moving))
        throw Error("register: dimension mismatch between fixed and moving volumes");
    if (fixed.kind() == Kind::LabelMap || moving.kind() == Kind::LabelMap)
        throw Error("register: inputs must be intensity images, not label maps");

    const auto t_start = Clock::now();
    RegistrationResult result;
    result.capture_radius_voxels = effective_capture_radius(cfg);

    // Image pyramid, level 0 = full resolution.
    std::vector<Volume> fixed_pyr{fixed};
    std::vector<Volume> moving_pyr{moving};
    for (int l = 1; l < cfg.levels; ++l) {
        fixed_pyr.push_back(downsample_half(fixed_pyr.back()));
        moving_pyr.push_back(downsample_half(moving_pyr.back()));
    }
    for (const Volume& v : fixed_pyr) {
        const IVec3 d = v.dims();
        if (d.x < 4 || d.y < 4 || d.z < 4)
            throw Error("register: degenerate pyramid (a level axis fell below 4 voxels)");
    }

    const FeatureProvider provider(cfg.provider);

    // The embedded provider cannot re-extract; its features are pooled down
    // the pyramid once and warped per level.
    std::vector<FeatureVolume> fixed_emb, moving_emb;
    if (!provider.reextracts()) {
        fixed_emb.push_back(provider.load_fused(false));
        moving_emb.push_back(provider.load_fused(true));
        const IVec3 want = half_dims(fixed.dims());
        const IVec3 got = fixed_emb[0].vol.dims();
        if (got.x != want.x || got.y != want.y || got.z != want.z)
            throw Error("register: embedding grid does not match half the image resolution");
        if (!fixed_emb[0].vol.same_grid(moving_emb[0].vol) ||
            fixed_emb[0].vol.channels() != moving_emb[0].vol.channels())
            throw Error("register: fixed and moving embeddings do not share a grid");
        for (int l = 1; l < cfg.levels; ++l) {
            for (auto* pyr : {&fixed_emb, &moving_emb}) {
                FeatureVolume f;
                f.vol = downsample_half((*pyr)[l - 1].vol);
                normalize_per_voxel(f);
                pyr->push_back(std::move(f));
            }
        }
    }

    DisplacementField u_total = DisplacementField::zero(half_dims(fixed_pyr[cfg.levels - 1].dims()));

    for (int level = cfg.levels - 1; level >= 0; --level) {
        const auto t_level = Clock::now();
        const Volume& fix_img = fixed_pyr[level];
        const int radius = cfg.radii[cfg.levels - 1 - level];

        FeatureVolume f_fix, f_mov;
        if (provider.reextracts()) {
            const DisplacementField u_img = upsample2x(u_total, fix_img.dims());
            const Volume warped = warp(moving_pyr[level], u_img);
            f_fix = provider.extract(downsample_half(fix_img));
            f_mov = provider.extract(downsample_half(warped));
        } else {
            f_fix = fixed_emb[level];
            f_mov.vol = warp(moving_emb[level].vol, u_total);
            normalize_per_voxel(f_mov);
        }

        const CostVolume cost = CostVolume::build(f_fix, f_mov, radius, cfg.cost_mode);

        SolveDiagnostics diag;
        const DisplacementField zero = DisplacementField::zero(f_fix.vol.dims());
        const DisplacementField delta = solve_level(cost, zero, cfg.solver, &diag);
        u_total = compose(u_total, delta);

        LevelReport rep;
        rep.level = level;
        rep.image_dims = fix_img.dims();
        rep.feature_dims = f_fix.vol.dims();
        rep.radius = radius;
        rep.coupling_gaps = std::move(diag.coupling_gaps);
        rep.delta_max_abs = delta.max_abs();
        rep.seconds = seconds_since(t_level);
        result.levels.push_back(std::move(rep));

        if (level > 0)
            u_total = upsample2x(u_total, half_dims(fixed_pyr[level - 1].dims()));
    }

    if (cfg.run_instance_opt && cfg.instance.iterations > 0) {
        const auto t_inst = Clock::now();
        FeatureVolume f_fix, f_mov;
        if (provider.reextracts()) {
            f_fix = provider.extract(downsample_half(fixed_pyr[0]));
            f_mov = provider.extract(downsample_half(moving_pyr[0]));
        } else {
            f_fix = fixed_emb[0];
            f_mov = moving_emb[0];
        }
        u_total = instance_optimize(f_fix, f_mov, u_total, cfg.instance,
                                    &result.instance_loss_trace);
        result.instance_seconds = seconds_since(t_inst);
    }

    result.field = upsample2x(u_total, fixed.dims());
    result.field_max_abs = result.field.max_abs();
    result.total_seconds = seconds_since(t_start);
    return result;
}

} // namespace cvreg
