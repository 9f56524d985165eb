#include "cvreg/features.hpp"

#include "cvreg/filters.hpp"
#include "cvreg/io.hpp"
#include "cvreg/kernels.hpp"
#include "cvreg/parallel.hpp"

#include <cmath>

namespace cvreg {

FeatureVolume extract_intensity(const Volume& image)
{
    if (image.kind() == Kind::LabelMap)
        throw Error("extract_intensity: expected a scalar image, got a label map");
    if (image.channels() != 1)
        throw Error("extract_intensity: expected a single-channel image");

    double sum = 0.0;
    for (float v : image.data())
        sum += v;
    const double mean = sum / double(image.voxel_count());
    double var = 0.0;
    for (float v : image.data())
        var += (v - mean) * (v - mean);
    var /= double(image.voxel_count());
    if (var <= 0.0)
        throw Error("extract_intensity: constant image");
    const double inv_std = 1.0 / std::sqrt(var);

    FeatureVolume f;
    f.vol = Volume(image.dims(), 1, Kind::FeatureMap, image.spacing());
    const auto& src = image.data();
    auto& dst = f.vol.data();
    parallel_for(0, std::int64_t(src.size()), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i)
            dst[i] = float((src[i] - mean) * inv_std);
    });
    f.normalized = false;
    return f;
}

FeatureVolume extract_ssd_descriptor(const Volume& image, int patch_radius, float eps)
{
    if (image.kind() == Kind::LabelMap)
        throw Error("extract_ssd_descriptor: expected a scalar image, got a label map");
    if (image.channels() != 1)
        throw Error("extract_ssd_descriptor: expected a single-channel image");
    const IVec3 d = image.dims();
    const int need = 2 * patch_radius + 3;
    if (d.x < need || d.y < need || d.z < need)
        throw Error("extract_ssd_descriptor: dims too small for patch radius");

    static constexpr IVec3 kOffsets[6] = {
        {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1},
    };

    FeatureVolume f;
    f.vol = Volume(d, 6, Kind::FeatureMap, image.spacing());
    const std::int64_t n = image.voxel_count();
    const float* img = image.channel_data(0);

    std::vector<float> diff2(n);
    for (int r = 0; r < 6; ++r) {
        const IVec3 off = kOffsets[r];
        parallel_for(0, d.x, [&](std::int64_t xb, std::int64_t xe) {
            for (int x = int(xb); x < int(xe); ++x)
                for (int y = 0; y < d.y; ++y)
                    for (int z = 0; z < d.z; ++z) {
                        const float a = img[(std::int64_t(x) * d.y + y) * d.z + z];
                        const float b = image.at(0, clamp_index(x + off.x, d.x),
                                                 clamp_index(y + off.y, d.y),
                                                 clamp_index(z + off.z, d.z));
                        const float t = a - b;
                        diff2[(std::int64_t(x) * d.y + y) * d.z + z] = t * t;
                    }
        });
        box_sum3(diff2.data(), f.vol.channel_data(r), d, patch_radius);
    }

    // V = mean of the 6 patch distances, then f_r = exp(-D_r / (V + eps)).
    parallel_for(0, n, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) {
            float v = 0.0f;
            for (int r = 0; r < 6; ++r)
                v += f.vol.channel_data(r)[i];
            v *= (1.0f / 6.0f);
            const float denom = v + eps;
            for (int r = 0; r < 6; ++r) {
                float* ch = f.vol.channel_data(r);
                ch[i] = std::exp(-ch[i] / denom);
            }
        }
    });

    normalize_per_voxel(f);
    return f;
}

FeatureVolume load_embedding(const std::string& path)
{
    Volume v = io::read_volume(path);
    if (v.kind() != Kind::FeatureMap)
        throw io::IoError(io::IoCode::KindDtypeMismatch,
                          path + ": expected a feature-map volume, got kind " +
                              std::to_string(int(v.kind())));
    FeatureVolume f;
    f.vol = std::move(v);
    f.normalized = false;
    return f;
}

Volume resample_trilinear(const Volume& vol, IVec3 target_dims)
{
    const IVec3 s = vol.dims();
    if (target_dims.x <= 0 || target_dims.y <= 0 || target_dims.z <= 0)
        throw Error("resample_trilinear: target dims must be positive");

    auto scale = [](int src, int tgt) {
        return tgt > 1 ? float(src - 1) / float(tgt - 1) : 0.0f;
    };
    const float sx = scale(s.x, target_dims.x);
    const float sy = scale(s.y, target_dims.y);
    const float sz = scale(s.z, target_dims.z);

    const Vec3 sp = vol.spacing();
    const Vec3 osp{
        sp.x * (target_dims.x > 1 ? float(s.x - 1) / float(target_dims.x - 1) : 1.0f),
        sp.y * (target_dims.y > 1 ? float(s.y - 1) / float(target_dims.y - 1) : 1.0f),
        sp.z * (target_dims.z > 1 ? float(s.z - 1) / float(target_dims.z - 1) : 1.0f),
    };
    Volume out(target_dims, vol.channels(), vol.kind(), osp);
    const int C = vol.channels();

    parallel_for(0, target_dims.x, [&](std::int64_t xb, std::int64_t xe) {
        std::vector<float> buf(C);
        for (int x = int(xb); x < int(xe); ++x)
            for (int y = 0; y < target_dims.y; ++y)
                for (int z = 0; z < target_dims.z; ++z) {
                    sample_trilinear(vol, {float(x) * sx, float(y) * sy, float(z) * sz}, buf.data());
                    for (int c = 0; c < C; ++c)
                        out.at(c, x, y, z) = buf[c];
                }
    });
    return out;
}

void normalize_per_voxel(FeatureVolume& f)
{
    const std::int64_t n = f.vol.voxel_count();
    const int C = f.vol.channels();
    const auto& k = kern::ops();

    std::vector<float> sumsq(n, 0.0f);
    for (int c = 0; c < C; ++c)
        k.sq_acc(sumsq.data(), f.vol.channel_data(c), std::size_t(n));

    parallel_for(0, n, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i)
            sumsq[i] = sumsq[i] > 0.0f ? 1.0f / std::sqrt(sumsq[i]) : 0.0f;
    });
    for (int c = 0; c < C; ++c)
        k.vmul(f.vol.channel_data(c), sumsq.data(), std::size_t(n));
    f.normalized = true;
}

FeatureVolume fuse_global_local(const FeatureVolume& f_global, const FeatureVolume& f_local)
{
    const IVec3 gd = f_global.vol.dims();
    const IVec3 ld = f_local.vol.dims();
    if (gd.x > ld.x || gd.y > ld.y || gd.z > ld.z)
        throw Error("fuse_global_local: global grid exceeds local grid");

    FeatureVolume g;
    g.vol = resample_trilinear(f_global.vol, ld);
    normalize_per_voxel(g);
    FeatureVolume l{f_local.vol, false};
    normalize_per_voxel(l);

    const int Cg = g.vol.channels(), Cl = l.vol.channels();
    FeatureVolume out;
    out.vol = Volume(ld, Cg + Cl, Kind::FeatureMap, f_local.vol.spacing());
    const std::int64_t n = out.vol.voxel_count();
    for (int c = 0; c < Cg; ++c)
        std::copy_n(g.vol.channel_data(c), n, out.vol.channel_data(c));
    for (int c = 0; c < Cl; ++c)
        std::copy_n(l.vol.channel_data(c), n, out.vol.channel_data(Cg + c));
    out.normalized = true;
    return out;
}

std::vector<float> pack_interleaved(const Volume& vol)
{
    const std::int64_t n = vol.voxel_count();
    const int C = vol.channels();
    std::vector<float> out(std::size_t(n) * C);
    const float* src = vol.data().data();
    parallel_for(0, n, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t v = b; v < e; ++v)
            for (int c = 0; c < C; ++c)
                out[std::size_t(v) * C + c] = src[std::int64_t(c) * n + v];
    });
    return out;
}

ProviderType provider_from_name(const std::string& name)
{
    if (name == "intensity")
        return ProviderType::Intensity;
    if (name == "ssd-descriptor")
        return ProviderType::SsdDescriptor;
    if (name == "embedded")
        return ProviderType::Embedded;
    throw Error("unknown feature provider '" + name +
                "' (expected intensity, ssd-descriptor or embedded)");
}

const char* provider_name(ProviderType t)
{
    switch (t) {
    case ProviderType::Intensity: return "intensity";
    case ProviderType::SsdDescriptor: return "ssd-descriptor";
    default: return "embedded";
    }
}

FeatureProvider::FeatureProvider(FeatureProviderConfig cfg) : cfg_(std::move(cfg))
{
    if (cfg_.provider == ProviderType::Embedded && cfg_.local_path.empty())
        throw Error("embedded provider needs a local embedding path");
    if (cfg_.provider == ProviderType::SsdDescriptor && cfg_.patch_radius < 1)
        throw Error("ssd-descriptor patch radius must be >= 1");
}

FeatureVolume FeatureProvider::extract(const Volume& image) const
{
    switch (cfg_.provider) {
    case ProviderType::Intensity:
        return extract_intensity(image);
    case ProviderType::SsdDescriptor:
        return extract_ssd_descriptor(image, cfg_.patch_radius, cfg_.eps);
    default:
        throw Error("embedded provider cannot extract features from an image; "
                    "its stored features are warped directly");
    }
}

FeatureVolume FeatureProvider::load_fused(bool moving) const
{
    if (cfg_.provider != ProviderType::Embedded)
        throw Error("load_fused is only meaningful for the embedded provider");
    const std::string& lp = moving ? cfg_.moving_local_path : cfg_.local_path;
    const std::string& gp = moving ? cfg_.moving_global_path : cfg_.global_path;
    if (lp.empty())
        throw Error("embedded provider: no local embedding path for the requested image");
    FeatureVolume local = load_embedding(lp);
    if (!gp.empty()) {
        FeatureVolume global = load_embedding(gp);
        return fuse_global_local(global, local);
    }
    normalize_per_voxel(local);
    return local;
}

} // namespace cvreg
