#include "cvreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cvreg {

double dice(const Volume& labels_a, const Volume& labels_b, int label)
{
    if (!labels_a.same_grid(labels_b))
        throw Error("dice: label maps do not share a grid");

    std::int64_t na = 0, nb = 0, inter = 0;
    const auto& a = labels_a.data();
    const auto& b = labels_b.data();
    const std::int64_t n = labels_a.voxel_count();
    for (std::int64_t i = 0; i < n; ++i) {
        const bool ia = std::lround(a[i]) == label;
        const bool ib = std::lround(b[i]) == label;
        na += ia;
        nb += ib;
        inter += ia && ib;
    }
    if (na + nb == 0)
        return 1.0;
    return 2.0 * double(inter) / double(na + nb);
}

double mean_dice(const Volume& labels_a, const Volume& labels_b, const std::vector<int>& label_set)
{
    if (label_set.empty())
        throw Error("mean_dice: empty label set");
    double sum = 0.0;
    for (int label : label_set)
        sum += dice(labels_a, labels_b, label);
    return sum / double(label_set.size());
}

double sd_log_j(const DisplacementField& u)
{
    const Volume det = jacobian_determinant(u);
    const std::int64_t n = det.voxel_count();
    double sum = 0.0;
    for (float v : det.data())
        sum += std::log(std::max(v, 1e-6f));
    const double mean = sum / double(n);
    double var = 0.0;
    for (float v : det.data()) {
        const double t = std::log(std::max(v, 1e-6f)) - mean;
        var += t * t;
    }
    return std::sqrt(var / double(n));
}

EndpointError endpoint_error(const DisplacementField& u_est, const DisplacementField& u_true,
                             const Volume* mask)
{
    if (!u_est.volume().same_grid(u_true.volume()))
        throw Error("endpoint_error: fields do not share a grid");
    if (mask && !mask->same_grid(u_est.volume()))
        throw Error("endpoint_error: mask does not share the field grid");

    const IVec3 d = u_est.dims();
    double sum = 0.0, mx = 0.0;
    std::int64_t count = 0;
    for (int x = 0; x < d.x; ++x)
        for (int y = 0; y < d.y; ++y)
            for (int z = 0; z < d.z; ++z) {
                if (mask && mask->at(0, x, y, z) == 0.0f)
                    continue;
                const Vec3 e = u_est.at(x, y, z) - u_true.at(x, y, z);
                const double err = std::sqrt(double(e.x) * e.x + double(e.y) * e.y + double(e.z) * e.z);
                sum += err;
                mx = std::max(mx, err);
                ++count;
            }
    EndpointError out;
    out.mean = count > 0 ? sum / double(count) : 0.0;
    out.max = mx;
    return out;
}

std::vector<int> labels_present(const Volume& labels_a, const Volume& labels_b)
{
    std::set<int> s;
    for (float v : labels_a.data())
        if (std::lround(v) != 0)
            s.insert(int(std::lround(v)));
    for (float v : labels_b.data())
        if (std::lround(v) != 0)
            s.insert(int(std::lround(v)));
    return {s.begin(), s.end()};
}

} // namespace cvreg
