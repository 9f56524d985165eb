#include "cvreg/instance_opt.hpp"

#include "cvreg/kernels.hpp"
#include "cvreg/parallel.hpp"

#include <cmath>

namespace cvreg {

void InstanceOptConfig::validate() const
{
    if (!(learning_rate > 0.0f))
        throw Error("instance-opt: learning rate must be positive");
    if (iterations < 0)
        throw Error("instance-opt: iterations must be >= 0");
    if (lambda_diffusion < 0.0f)
        throw Error("instance-opt: diffusion weight must be >= 0");
}

namespace {

void check_grids(const FeatureVolume& f_fix, const FeatureVolume& f_mov,
                 const DisplacementField& u)
{
    if (!f_fix.vol.same_grid(f_mov.vol) || f_fix.vol.channels() != f_mov.vol.channels())
        throw Error("instance-opt: feature volumes do not share a grid");
    if (!f_fix.vol.same_grid(u.volume()))
        throw Error("instance-opt: field grid does not match the feature grid");
}

// Double-precision trilinear sample of all channels, clamp-to-edge.
void sample_channels_d(const Volume& vol, double px, double py, double pz, double* out)
{
    const IVec3 d = vol.dims();
    auto cell = [](double p, int n, int& i0, double& f) {
        if (n == 1) {
            i0 = 0;
            f = 0.0;
            return;
        }
        double q = p < 0.0 ? 0.0 : (p > double(n - 1) ? double(n - 1) : p);
        i0 = int(std::floor(q));
        if (i0 > n - 2)
            i0 = n - 2;
        f = q - double(i0);
    };
    int x0, y0, z0;
    double fx, fy, fz;
    cell(px, d.x, x0, fx);
    cell(py, d.y, y0, fy);
    cell(pz, d.z, z0, fz);
    const int x1 = d.x == 1 ? 0 : x0 + 1;
    const int y1 = d.y == 1 ? 0 : y0 + 1;
    const int z1 = d.z == 1 ? 0 : z0 + 1;

    const double gx = 1.0 - fx, gy = 1.0 - fy, gz = 1.0 - fz;
    for (int c = 0; c < vol.channels(); ++c) {
        const double c000 = vol.at(c, x0, y0, z0), c100 = vol.at(c, x1, y0, z0);
        const double c010 = vol.at(c, x0, y1, z0), c110 = vol.at(c, x1, y1, z0);
        const double c001 = vol.at(c, x0, y0, z1), c101 = vol.at(c, x1, y0, z1);
        const double c011 = vol.at(c, x0, y1, z1), c111 = vol.at(c, x1, y1, z1);
        const double c00 = gz * c000 + fz * c001;
        const double c10 = gz * c100 + fz * c101;
        const double c01 = gz * c010 + fz * c011;
        const double c11 = gz * c110 + fz * c111;
        const double c0 = gy * c00 + fy * c01;
        const double c1 = gy * c10 + fy * c11;
        out[c] = gx * c0 + fx * c1;
    }
}

} // namespace

double instance_loss(const FeatureVolume& f_fix, const FeatureVolume& f_mov,
                     const DisplacementField& u, float lambda)
{
    check_grids(f_fix, f_mov, u);
    const IVec3 d = u.dims();
    const std::int64_t n = u.voxel_count();
    const int C = f_fix.vol.channels();

    std::vector<double> contrib(n);
    parallel_for(0, n, [&](std::int64_t vb, std::int64_t ve) {
        std::vector<double> sampled(C);
        for (std::int64_t v = vb; v < ve; ++v) {
            const IVec3 p = u.volume().delinearize(v);
            const Vec3 uv = u.at(p.x, p.y, p.z);
            sample_channels_d(f_mov.vol, double(p.x) + uv.x, double(p.y) + uv.y,
                              double(p.z) + uv.z, sampled.data());
            double s = 0.0;
            for (int c = 0; c < C; ++c)
                s += double(f_fix.vol.data()[std::int64_t(c) * n + v]) * sampled[c];

            double reg = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double uc = u.volume().at(c, p.x, p.y, p.z);
                if (p.x + 1 < d.x) {
                    const double t = double(u.volume().at(c, p.x + 1, p.y, p.z)) - uc;
                    reg += t * t;
                }
                if (p.y + 1 < d.y) {
                    const double t = double(u.volume().at(c, p.x, p.y + 1, p.z)) - uc;
                    reg += t * t;
                }
                if (p.z + 1 < d.z) {
                    const double t = double(u.volume().at(c, p.x, p.y, p.z + 1)) - uc;
                    reg += t * t;
                }
            }
            contrib[v] = -s + double(lambda) * reg;
        }
    });

    double total = 0.0;
    for (std::int64_t v = 0; v < n; ++v)
        total += contrib[v];
    return total / double(n);
}

DisplacementField instance_loss_gradient(const FeatureVolume& f_fix, const FeatureVolume& f_mov,
                                         const DisplacementField& u, float lambda)
{
    check_grids(f_fix, f_mov, u);
    const IVec3 d = u.dims();
    const std::int64_t n = u.voxel_count();
    const int C = f_fix.vol.channels();
    const float inv_n = 1.0f / float(n);

    DisplacementField grad = DisplacementField::zero(d, u.spacing());

    parallel_for(0, n, [&](std::int64_t vb, std::int64_t ve) {
        std::vector<float> jac(std::size_t(C) * 3);
        for (std::int64_t v = vb; v < ve; ++v) {
            const IVec3 p = u.volume().delinearize(v);
            const Vec3 uv = u.at(p.x, p.y, p.z);
            sample_gradient(f_mov.vol, {float(p.x) + uv.x, float(p.y) + uv.y, float(p.z) + uv.z},
                            jac.data());

            float gx = 0.0f, gy = 0.0f, gz = 0.0f;
            for (int c = 0; c < C; ++c) {
                const float fc = f_fix.vol.data()[std::int64_t(c) * n + v];
                gx += fc * jac[std::size_t(c) * 3 + 0];
                gy += fc * jac[std::size_t(c) * 3 + 1];
                gz += fc * jac[std::size_t(c) * 3 + 2];
            }

            // Adjoint of the forward differences: each component couples to
            // its six axis neighbors where the stencil exists.
            for (int c = 0; c < 3; ++c) {
                const float uc = u.volume().at(c, p.x, p.y, p.z);
                float r = 0.0f;
                if (p.x > 0)
                    r += uc - u.volume().at(c, p.x - 1, p.y, p.z);
                if (p.x + 1 < d.x)
                    r -= u.volume().at(c, p.x + 1, p.y, p.z) - uc;
                if (p.y > 0)
                    r += uc - u.volume().at(c, p.x, p.y - 1, p.z);
                if (p.y + 1 < d.y)
                    r -= u.volume().at(c, p.x, p.y + 1, p.z) - uc;
                if (p.z > 0)
                    r += uc - u.volume().at(c, p.x, p.y, p.z - 1);
                if (p.z + 1 < d.z)
                    r -= u.volume().at(c, p.x, p.y, p.z + 1) - uc;

                const float sim = c == 0 ? gx : (c == 1 ? gy : gz);
                grad.volume().at(c, p.x, p.y, p.z) = inv_n * (-sim + 2.0f * lambda * r);
            }
        }
    });
    return grad;
}

DisplacementField instance_optimize(const FeatureVolume& f_fix, const FeatureVolume& f_mov,
                                    const DisplacementField& u_init, const InstanceOptConfig& cfg,
                                    std::vector<double>* loss_trace)
{
    cfg.validate();
    check_grids(f_fix, f_mov, u_init);

    DisplacementField u = u_init;
    const std::size_t n = u.volume().data().size();
    std::vector<float> m(n, 0.0f), v(n, 0.0f);

    if (loss_trace)
        loss_trace->push_back(instance_loss(f_fix, f_mov, u, cfg.lambda_diffusion));

    double b1t = 1.0, b2t = 1.0;
    for (int it = 1; it <= cfg.iterations; ++it) {
        const DisplacementField g =
            instance_loss_gradient(f_fix, f_mov, u, cfg.lambda_diffusion);
        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        kern::ops().adam_step(u.volume().data().data(), m.data(), v.data(),
                              g.volume().data().data(), n, cfg.learning_rate, cfg.beta1,
                              cfg.beta2, float(1.0 - b1t), float(1.0 - b2t), cfg.epsilon);
        if (loss_trace)
            loss_trace->push_back(instance_loss(f_fix, f_mov, u, cfg.lambda_diffusion));
    }
    return u;
}

} // namespace cvreg
