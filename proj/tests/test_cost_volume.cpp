#include "cvreg/cost_volume.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace cvreg;

TEST_CASE("self-similarity of normalized features peaks at zero displacement")
{
    FeatureVolume f = testutil::smooth_features({8, 8, 8}, 4, 5);
    CostVolume cv = CostVolume::build(f, f, 1);
    const int k0 = cv.rank({0, 0, 0});
    for (std::int64_t v = 0; v < cv.voxel_count(); ++v) {
        CHECK(cv.value(v, k0) == doctest::Approx(1.0f).epsilon(1e-5));
        for (int k = 0; k < cv.candidate_count(); ++k)
            CHECK(cv.value(v, k) <= cv.value(v, k0) + 1e-6f);
    }
}

TEST_CASE("integer feature shifts are found by the per-voxel argmax")
{
    FeatureVolume f = testutil::smooth_features({12, 12, 12}, 4, 6);
    const IVec3 t{2, -1, 1};
    FeatureVolume g{testutil::shift_volume(f.vol, t), true};
    CostVolume cv = CostVolume::build(f, g, 3);
    for (int x = 4; x < 8; ++x)
        for (int y = 4; y < 8; ++y)
            for (int z = 4; z < 8; ++z) {
                const std::int64_t v = (std::int64_t(x) * 12 + y) * 12 + z;
                int best = 0;
                for (int k = 1; k < cv.candidate_count(); ++k)
                    if (cv.value(v, k) > cv.value(v, best))
                        best = k;
                CHECK(cv.unrank(best) == t);
            }
}

TEST_CASE("materialized size follows the (2N+1)^3 formula")
{
    FeatureVolume f = testutil::smooth_features({10, 10, 10}, 2, 7);
    CostVolume cv = CostVolume::build(f, f, 3);
    CHECK(cv.candidate_count() == 343);
    // 343 candidate values per voxel, all finite
    std::int64_t finite = 0;
    for (std::int64_t v = 0; v < cv.voxel_count(); ++v)
        for (int k = 0; k < cv.candidate_count(); ++k)
            finite += std::isfinite(cv.value(v, k));
    CHECK(finite == 343 * 1000);
}

TEST_CASE("streamed candidates equal materialized values bit for bit")
{
    FeatureVolume a = testutil::smooth_features({9, 8, 7}, 5, 8);
    FeatureVolume b = testutil::smooth_features({9, 8, 7}, 5, 9);
    CostVolume cv = CostVolume::build(a, b, 2);
    CostVolume cs = CostVolume::build(a, b, 2, CostVolume::Mode::Streaming);

    std::mt19937 rng(17);
    std::uniform_int_distribution<int> dx(0, 8), dy(0, 7), dz(0, 6), dk(0, cv.candidate_count() - 1);
    for (int trial = 0; trial < 1000; ++trial) {
        const IVec3 p{dx(rng), dy(rng), dz(rng)};
        const int k = dk(rng);
        const std::int64_t v = (std::int64_t(p.x) * 8 + p.y) * 7 + p.z;
        const float expect = cv.value(v, k);
        CHECK(cs.value(v, k) == expect);
        CHECK(stream_candidate(a, b, p, cv.unrank(k)) == expect);
    }
}

TEST_CASE("out-of-range displacements clamp to the border voxel")
{
    FeatureVolume a = testutil::smooth_features({6, 6, 6}, 3, 10);
    FeatureVolume b = testutil::smooth_features({6, 6, 6}, 3, 11);
    // at x = 0, candidate d = (-2,0,0) sees the same voxel as (-5,0,0)
    const float v1 = stream_candidate(a, b, {0, 3, 3}, {-2, 0, 0});
    const float v2 = stream_candidate(a, b, {0, 3, 3}, {-5, 0, 0});
    CHECK(v1 == v2);
}

TEST_CASE("normalized feature costs stay within the cosine bounds")
{
    FeatureVolume a = testutil::smooth_features({8, 8, 8}, 4, 12);
    FeatureVolume b = testutil::smooth_features({8, 8, 8}, 4, 13);
    CostVolume cv = CostVolume::build(a, b, 2);
    for (std::int64_t v = 0; v < cv.voxel_count(); ++v)
        for (int k = 0; k < cv.candidate_count(); ++k) {
            CHECK(cv.value(v, k) >= -1.0f - 1e-5f);
            CHECK(cv.value(v, k) <= 1.0f + 1e-5f);
        }
}

TEST_CASE("candidate rank and unrank are inverse bijections")
{
    FeatureVolume f = testutil::smooth_features({6, 6, 6}, 2, 14);
    for (int radius : {0, 1, 2, 4}) {
        CostVolume cv = CostVolume::build(f, f, radius, CostVolume::Mode::Streaming);
        const int K = cv.candidate_count();
        CHECK(K == (2 * radius + 1) * (2 * radius + 1) * (2 * radius + 1));
        for (int k = 0; k < K; ++k) {
            const IVec3 d = cv.unrank(k);
            CHECK(d.x >= -radius);
            CHECK(d.x <= radius);
            CHECK(cv.rank(d) == k);
        }
    }
}

TEST_CASE("the materialized-mode memory guard points at streaming")
{
    FeatureVolume f = testutil::smooth_features({6, 6, 6}, 2, 15);
    CHECK_THROWS_WITH_AS(CostVolume::build(f, f, 9), doctest::Contains("streaming"), Error);
    CHECK_NOTHROW(CostVolume::build(f, f, 9, CostVolume::Mode::Streaming));
}

TEST_CASE("grid and channel mismatches are rejected")
{
    FeatureVolume a = testutil::smooth_features({6, 6, 6}, 2, 16);
    FeatureVolume b = testutil::smooth_features({6, 6, 5}, 2, 17);
    FeatureVolume c = testutil::smooth_features({6, 6, 6}, 3, 18);
    CHECK_THROWS_AS(CostVolume::build(a, b, 1), Error);
    CHECK_THROWS_AS(CostVolume::build(a, c, 1), Error);
}
