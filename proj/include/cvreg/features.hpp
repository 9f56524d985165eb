#pragma once

// Per-voxel descriptor volumes and the three providers: raw intensity
// (z-scored), a self-similarity descriptor, and precomputed embedding files.

#include "cvreg/volume.hpp"

#include <string>
#include <vector>

namespace cvreg {

struct FeatureVolume {
    Volume vol;
    // When set, every per-voxel channel vector has unit L2 norm (exactly zero
    // vectors stay zero). Fused volumes set it too; their concatenated vector
    // has norm sqrt(2) and the dot-product similarity is the sum of the two
    // cosines, range [-2, 2].
    bool normalized = false;
};

// Single channel, z-scored over the whole volume. Left unnormalized: a
// normalized 1-vector would collapse to +-1. Throws "constant image" on
// zero variance.
FeatureVolume extract_intensity(const Volume& image);

// 6-channel self-similarity descriptor. For each axis-aligned unit offset r:
//   D_r(x) = sum over the (2p+1)^3 patch q of (I(x+q) - I(x+q+r))^2
//   f_r(x) = exp(-D_r(x) / (V(x) + eps)),  V(x) = mean_r D_r(x)
// then per-voxel L2 normalization. Border windows clamp the patch position
// first, then the pair offset. Invariant to positive affine rescaling of I.
FeatureVolume extract_ssd_descriptor(const Volume& image, int patch_radius = 1,
                                     float eps = 1e-6f);

// Reads a feature-map volume from the native container. normalized stays
// false until normalize_per_voxel or fuse_global_local is applied.
FeatureVolume load_embedding(const std::string& path);

// Trilinearly resamples the global embedding to the local grid, L2-normalizes
// both parts per voxel independently, and concatenates channels (global
// first). The global grid must not exceed the local grid on any axis.
FeatureVolume fuse_global_local(const FeatureVolume& f_global, const FeatureVolume& f_local);

// Per-voxel L2 normalization across channels; all-zero vectors stay zero.
void normalize_per_voxel(FeatureVolume& f);

// Align-corners trilinear resample of every channel to target_dims.
Volume resample_trilinear(const Volume& vol, IVec3 target_dims);

// Voxel-major copy (out[v*C + c]) for contiguous per-voxel dot products.
std::vector<float> pack_interleaved(const Volume& vol);

enum class ProviderType { Intensity, SsdDescriptor, Embedded };

struct FeatureProviderConfig {
    ProviderType provider = ProviderType::SsdDescriptor;
    int patch_radius = 1;
    float eps = 1e-6f;
    std::string local_path;  // embedded
    std::string global_path; // embedded, optional
    // Registration needs embeddings for both images; these name the moving
    // image's files (single-volume uses above leave them empty).
    std::string moving_local_path;
    std::string moving_global_path;
};

ProviderType provider_from_name(const std::string& name); // throws on unknown
const char* provider_name(ProviderType t);

class FeatureProvider {
public:
    explicit FeatureProvider(FeatureProviderConfig cfg);

    const FeatureProviderConfig& config() const { return cfg_; }

    // Computed providers re-extract features from (warped) images; the
    // embedded provider's features can only be warped directly.
    bool reextracts() const { return cfg_.provider != ProviderType::Embedded; }

    // Features at the resolution of the image handed in. Throws for the
    // embedded provider.
    FeatureVolume extract(const Volume& image) const;

    // Embedded only: load the local (and optional global) embedding and
    // return the normalized (fused) feature volume. `moving` selects the
    // moving-image file pair.
    FeatureVolume load_fused(bool moving = false) const;

private:
    FeatureProviderConfig cfg_;
};

} // namespace cvreg
