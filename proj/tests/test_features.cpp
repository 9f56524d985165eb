#include "cvreg/features.hpp"

#include "cvreg/io.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>

using namespace cvreg;

TEST_CASE("intensity features: a spike carries the largest magnitude")
{
    Volume img({6, 6, 6}, 1, Kind::ScalarImage);
    for (auto& v : img.data())
        v = 10.0f;
    img.at(0, 3, 3, 3) = 50.0f;
    FeatureVolume f = extract_intensity(img);
    CHECK_FALSE(f.normalized);
    float best = 0.0f;
    for (float v : f.vol.data())
        best = std::max(best, std::fabs(v));
    CHECK(std::fabs(f.vol.at(0, 3, 3, 3)) == doctest::Approx(best));
}

TEST_CASE("intensity features are invariant to a constant offset")
{
    Volume img = testutil::random_volume({6, 6, 6}, 1, 12, Kind::ScalarImage, 0.0f, 64.0f);
    Volume shifted = img;
    for (auto& v : shifted.data())
        v += 16.0f;
    FeatureVolume a = extract_intensity(img);
    FeatureVolume b = extract_intensity(shifted);
    for (std::size_t i = 0; i < a.vol.data().size(); ++i)
        CHECK(a.vol.data()[i] == doctest::Approx(b.vol.data()[i]).epsilon(1e-5));
}

TEST_CASE("intensity features of a two-value image are +-1")
{
    Volume img({4, 4, 4}, 1, Kind::ScalarImage);
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
            for (int z = 0; z < 4; ++z)
                img.at(0, x, y, z) = x < 2 ? 0.0f : 10.0f;
    FeatureVolume f = extract_intensity(img);
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
            for (int z = 0; z < 4; ++z)
                CHECK(f.vol.at(0, x, y, z) == doctest::Approx(x < 2 ? -1.0f : 1.0f));
}

TEST_CASE("intensity features reject a constant image")
{
    Volume img({5, 5, 5}, 1, Kind::ScalarImage);
    for (auto& v : img.data())
        v = 3.0f;
    CHECK_THROWS_WITH_AS(extract_intensity(img), doctest::Contains("constant image"), Error);
}

TEST_CASE("ssd descriptor of a constant image is the diagonal unit vector")
{
    Volume img({7, 7, 7}, 1, Kind::ScalarImage);
    for (auto& v : img.data())
        v = 42.0f;
    FeatureVolume f = extract_ssd_descriptor(img);
    CHECK(f.vol.channels() == 6);
    CHECK(f.normalized);
    const float expect = 1.0f / std::sqrt(6.0f);
    for (float v : f.vol.data())
        CHECK(v == doctest::Approx(expect));
}

TEST_CASE("ssd descriptor is invariant to positive affine intensity rescaling")
{
    Volume img = testutil::random_volume({8, 8, 8}, 1, 19, Kind::ScalarImage, 0.0f, 8.0f);
    Volume scaled = img;
    for (auto& v : scaled.data())
        v = 2.0f * v + 8.0f; // exact in float
    FeatureVolume a = extract_ssd_descriptor(img);
    FeatureVolume b = extract_ssd_descriptor(scaled);
    float max_diff = 0.0f;
    for (std::size_t i = 0; i < a.vol.data().size(); ++i)
        max_diff = std::max(max_diff, std::fabs(a.vol.data()[i] - b.vol.data()[i]));
    CHECK(max_diff < 1e-6f);
}

TEST_CASE("ssd descriptor commutes with integer shifts on the interior")
{
    Volume img = testutil::random_volume({10, 10, 10}, 1, 23);
    const IVec3 t{2, 1, 0};
    Volume shifted = testutil::shift_volume(img, t);
    FeatureVolume fa = extract_ssd_descriptor(img);
    FeatureVolume fb = extract_ssd_descriptor(shifted);
    // interior needs patch + offset + shift clearance on both sides
    for (int c = 0; c < 6; ++c)
        for (int x = 5; x < 8; ++x)
            for (int y = 4; y < 8; ++y)
                for (int z = 3; z < 7; ++z)
                    CHECK(fb.vol.at(c, x, y, z) == fa.vol.at(c, x - t.x, y - t.y, z - t.z));
}

TEST_CASE("ssd descriptor rejects volumes smaller than the patch support")
{
    Volume img({4, 8, 8}, 1, Kind::ScalarImage);
    CHECK_THROWS_WITH_AS(extract_ssd_descriptor(img), doctest::Contains("too small"), Error);
}

TEST_CASE("normalized feature volumes have unit or zero per-voxel norms")
{
    FeatureVolume f{testutil::random_volume({6, 6, 6}, 5, 31, Kind::FeatureMap), false};
    // plant an exactly zero vector
    for (int c = 0; c < 5; ++c)
        f.vol.at(c, 2, 2, 2) = 0.0f;
    normalize_per_voxel(f);
    const std::int64_t n = f.vol.voxel_count();
    for (std::int64_t v = 0; v < n; ++v) {
        double nn = 0.0;
        for (int c = 0; c < 5; ++c) {
            const float x = f.vol.data()[c * n + v];
            nn += double(x) * x;
        }
        const double norm = std::sqrt(nn);
        CHECK((norm == 0.0 || (norm > 1.0 - 1e-5 && norm < 1.0 + 1e-5)));
    }
    CHECK(f.vol.at(0, 2, 2, 2) == 0.0f);
}

TEST_CASE("embedding round trip through the container is bitwise")
{
    FeatureVolume f = testutil::smooth_features({6, 5, 4}, 3, 17);
    const std::string path = "/tmp/cvreg_test_embedding.cvr";
    io::write_volume(path, f.vol);
    FeatureVolume g = load_embedding(path);
    CHECK_FALSE(g.normalized);
    CHECK(g.vol.data() == f.vol.data());
    CHECK(g.vol.channels() == 3);
    std::remove(path.c_str());
}

TEST_CASE("load_embedding rejects non-feature volumes")
{
    Volume img = testutil::random_volume({5, 5, 5}, 1, 2);
    const std::string path = "/tmp/cvreg_test_notafeature.cvr";
    io::write_volume(path, img);
    CHECK_THROWS_AS(load_embedding(path), io::IoError);
    std::remove(path.c_str());
}

TEST_CASE("fusing a volume with itself doubles the self-similarity")
{
    FeatureVolume f = testutil::smooth_features({6, 6, 6}, 4, 3);
    FeatureVolume fused = fuse_global_local(f, f);
    CHECK(fused.vol.channels() == 8);
    CHECK(fused.normalized);
    const std::int64_t n = fused.vol.voxel_count();
    for (std::int64_t v = 0; v < n; ++v) {
        double dot = 0.0;
        for (int c = 0; c < 8; ++c) {
            const float x = fused.vol.data()[c * n + v];
            dot += double(x) * x;
        }
        CHECK(dot == doctest::Approx(2.0).epsilon(1e-5));
    }
}

TEST_CASE("fusion concatenates channel counts, global first")
{
    FeatureVolume global{testutil::random_volume({4, 4, 4}, 128, 7, Kind::FeatureMap), false};
    FeatureVolume local{testutil::random_volume({8, 8, 8}, 128, 8, Kind::FeatureMap), false};
    FeatureVolume fused = fuse_global_local(global, local);
    CHECK(fused.vol.channels() == 256);
    CHECK(fused.vol.dims() == IVec3{8, 8, 8});
}

TEST_CASE("fusing an all-zero global part reduces similarity to the local cosine")
{
    FeatureVolume local = testutil::smooth_features({6, 6, 6}, 4, 9);
    FeatureVolume zero_global{Volume({6, 6, 6}, 2, Kind::FeatureMap), false};
    FeatureVolume fused = fuse_global_local(zero_global, local);
    const std::int64_t n = fused.vol.voxel_count();
    for (std::int64_t v = 0; v < n; ++v) {
        double dot = 0.0;
        for (int c = 0; c < fused.vol.channels(); ++c) {
            const float x = fused.vol.data()[c * n + v];
            dot += double(x) * x;
        }
        CHECK(dot == doctest::Approx(1.0).epsilon(1e-5)); // local part only
    }
}

TEST_CASE("fusion rejects a global grid larger than the local grid")
{
    FeatureVolume g{Volume({9, 4, 4}, 2, Kind::FeatureMap), false};
    FeatureVolume l{Volume({8, 8, 8}, 2, Kind::FeatureMap), false};
    CHECK_THROWS_AS(fuse_global_local(g, l), Error);
}

TEST_CASE("resample_trilinear to the same dims is a bitwise copy")
{
    Volume v = testutil::random_volume({5, 6, 7}, 3, 13, Kind::FeatureMap, 0.0f, 1.0f);
    Volume r = resample_trilinear(v, v.dims());
    CHECK(r.data() == v.data());
}

TEST_CASE("pack_interleaved transposes channel-major to voxel-major")
{
    Volume v = testutil::random_volume({3, 2, 2}, 4, 1, Kind::FeatureMap);
    const auto packed = pack_interleaved(v);
    const std::int64_t n = v.voxel_count();
    for (std::int64_t i = 0; i < n; ++i)
        for (int c = 0; c < 4; ++c)
            CHECK(packed[std::size_t(i) * 4 + c] == v.data()[c * n + i]);
}

TEST_CASE("provider names parse and reject unknowns")
{
    CHECK(provider_from_name("intensity") == ProviderType::Intensity);
    CHECK(provider_from_name("ssd-descriptor") == ProviderType::SsdDescriptor);
    CHECK(provider_from_name("embedded") == ProviderType::Embedded);
    CHECK_THROWS_AS(provider_from_name("mind"), Error);
}
