#include "cvreg/solver.hpp"

#include "cvreg/filters.hpp"
#include "cvreg/parallel.hpp"

#include <cmath>
#include <limits>

namespace cvreg {

void SolverConfig::validate() const
{
    if (coupling_schedule.empty())
        throw Error("solver: coupling schedule is empty");
    float prev = 0.0f;
    bool first = true;
    for (float w : coupling_schedule) {
        if (w < 0.0f || !std::isfinite(w))
            throw Error("solver: coupling weights must be non-negative and finite");
        if (!first && w <= prev)
            throw Error("solver: coupling schedule must be strictly increasing");
        prev = w;
        first = false;
    }
    if (smooth_kernel < 1 || smooth_kernel % 2 == 0)
        throw Error("solver: smoothing kernel must be odd and >= 1");
    if (smooth_passes < 1)
        throw Error("solver: smoothing passes must be >= 1");
}

DisplacementField pointwise_update(const CostVolume& cost, const DisplacementField& u_hat, float w)
{
    const IVec3 d = cost.dims();
    if (u_hat.dims().x != d.x || u_hat.dims().y != d.y || u_hat.dims().z != d.z)
        throw Error("pointwise_update: field grid does not match cost volume");

    DisplacementField out = DisplacementField::zero(d, u_hat.spacing());
    const int N = cost.radius();
    const bool materialized = cost.mode() == CostVolume::Mode::Materialized;

    parallel_for(0, cost.voxel_count(), [&](std::int64_t vb, std::int64_t ve) {
        for (std::int64_t v = vb; v < ve; ++v) {
            const IVec3 p = out.volume().delinearize(v);
            const Vec3 u = u_hat.at(p.x, p.y, p.z);
            const float* vals = materialized ? cost.voxel_values(v) : nullptr;

            float best = -std::numeric_limits<float>::infinity();
            int best_k = 0;
            int k = 0;
            for (int dx = -N; dx <= N; ++dx) {
                const float ex = float(dx) - u.x;
                for (int dy = -N; dy <= N; ++dy) {
                    const float ey = float(dy) - u.y;
                    for (int dz = -N; dz <= N; ++dz) {
                        const float ez = float(dz) - u.z;
                        const float sim = vals ? vals[k] : cost.value(v, k);
                        const float score = sim - w * (ex * ex + ey * ey + ez * ez);
                        if (score > best) {
                            best = score;
                            best_k = k;
                        }
                        ++k;
                    }
                }
            }
            const IVec3 bd = cost.unrank(best_k);
            out.set(p.x, p.y, p.z, {float(bd.x), float(bd.y), float(bd.z)});
        }
    });
    return out;
}

DisplacementField smooth_update(const DisplacementField& v_hat, const SolverConfig& cfg)
{
    cfg.validate();
    DisplacementField out = v_hat;
    box_average(out.volume(), (cfg.smooth_kernel - 1) / 2, cfg.smooth_passes);
    return out;
}

DisplacementField solve_level(const CostVolume& cost, const DisplacementField& u_init,
                              const SolverConfig& cfg, SolveDiagnostics* diag)
{
    cfg.validate();
    DisplacementField u = u_init;
    for (float w : cfg.coupling_schedule) {
        DisplacementField v = pointwise_update(cost, u, w);
        if (diag) {
            float gap = 0.0f;
            const auto& a = v.volume().data();
            const auto& b = u.volume().data();
            for (std::size_t i = 0; i < a.size(); ++i)
                gap = std::max(gap, std::fabs(a[i] - b[i]));
            diag->coupling_gaps.push_back(gap);
        }
        u = smooth_update(v, cfg);
    }
    return u;
}

} // namespace cvreg
