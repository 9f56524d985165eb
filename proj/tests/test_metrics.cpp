#include "cvreg/metrics.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace cvreg;

namespace {

Volume cube_labels(IVec3 dims, IVec3 lo, IVec3 hi, int label)
{
    Volume v(dims, 1, Kind::LabelMap);
    for (int x = lo.x; x < hi.x; ++x)
        for (int y = lo.y; y < hi.y; ++y)
            for (int z = lo.z; z < hi.z; ++z)
                v.at(0, x, y, z) = float(label);
    return v;
}

} // namespace

TEST_CASE("dice of identical maps is one")
{
    Volume a = cube_labels({8, 8, 8}, {1, 1, 1}, {4, 4, 4}, 2);
    CHECK(dice(a, a, 2) == doctest::Approx(1.0));
}

TEST_CASE("dice of disjoint equal regions is zero")
{
    Volume a = cube_labels({8, 8, 8}, {0, 0, 0}, {2, 2, 2}, 1);
    Volume b = cube_labels({8, 8, 8}, {4, 4, 4}, {6, 6, 6}, 1);
    CHECK(dice(a, b, 1) == doctest::Approx(0.0));
}

TEST_CASE("dice of a cube against its half-overlapping shift is one half")
{
    // 2x2x2 cubes, overlap 1x2x2 = 4 voxels: 2*4 / (8+8) = 0.5
    Volume a = cube_labels({8, 8, 8}, {2, 2, 2}, {4, 4, 4}, 1);
    Volume b = cube_labels({8, 8, 8}, {3, 2, 2}, {5, 4, 4}, 1);
    CHECK(dice(a, b, 1) == doctest::Approx(0.5));
}

TEST_CASE("dice empty-set conventions")
{
    Volume a({4, 4, 4}, 1, Kind::LabelMap);
    Volume b({4, 4, 4}, 1, Kind::LabelMap);
    CHECK(dice(a, b, 3) == doctest::Approx(1.0)); // both empty
    b.at(0, 1, 1, 1) = 3.0f;
    CHECK(dice(a, b, 3) == doctest::Approx(0.0)); // one empty
}

TEST_CASE("dice is symmetric and bounded")
{
    Volume a = cube_labels({8, 8, 8}, {1, 1, 1}, {5, 5, 5}, 1);
    Volume b = cube_labels({8, 8, 8}, {3, 3, 3}, {7, 7, 7}, 1);
    const double ab = dice(a, b, 1);
    CHECK(ab == dice(b, a, 1));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
}

TEST_CASE("mean dice averages the per-label scores")
{
    Volume a({8, 8, 8}, 1, Kind::LabelMap);
    Volume b({8, 8, 8}, 1, Kind::LabelMap);
    // label 1: identical cubes -> 1.0
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int z = 0; z < 2; ++z) {
                a.at(0, x, y, z) = 1.0f;
                b.at(0, x, y, z) = 1.0f;
            }
    // label 2: half-overlap -> 0.5
    for (int x = 4; x < 6; ++x)
        for (int y = 0; y < 2; ++y)
            for (int z = 0; z < 2; ++z)
                a.at(0, x, y, z) = 2.0f;
    for (int x = 5; x < 7; ++x)
        for (int y = 0; y < 2; ++y)
            for (int z = 0; z < 2; ++z)
                b.at(0, x, y, z) = 2.0f;
    CHECK(mean_dice(a, b, {1, 2}) == doctest::Approx(0.75));
    // a label absent from both contributes 1.0
    CHECK(mean_dice(a, b, {1, 2, 9}) == doctest::Approx((1.0 + 0.5 + 1.0) / 3.0));
    CHECK_THROWS_AS(mean_dice(a, b, {}), Error);
}

TEST_CASE("sd_log_j of the zero field is exactly zero")
{
    CHECK(sd_log_j(DisplacementField::zero({6, 6, 6})) == 0.0);
}

TEST_CASE("sd_log_j of a constant-determinant ramp is zero")
{
    DisplacementField u = DisplacementField::zero({6, 6, 6});
    for (int x = 0; x < 6; ++x)
        for (int y = 0; y < 6; ++y)
            for (int z = 0; z < 6; ++z)
                u.set(x, y, z, {0.1f * float(x), 0, 0});
    CHECK(sd_log_j(u) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("sd_log_j of a two-level determinant field approaches the closed form")
{
    // u_x has slope 0 on the low-x half and e-1 on the high-x half, so det is
    // 1 or e away from the two-voxel stencil transition; std of log det over
    // exact halves would be 0.5.
    const int n = 128;
    DisplacementField u = DisplacementField::zero({n, 4, 4});
    const float s = float(std::exp(1.0)) - 1.0f;
    for (int x = 0; x < n; ++x) {
        const float val = x < n / 2 ? 0.0f : s * float(x - n / 2);
        for (int y = 0; y < 4; ++y)
            for (int z = 0; z < 4; ++z)
                u.set(x, y, z, {val, 0, 0});
    }
    CHECK(sd_log_j(u) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("sd_log_j ignores constant offsets away from the border")
{
    DisplacementField u(testutil::random_volume({8, 8, 8}, 3, 3, Kind::VectorField));
    box_average(u.volume(), 1, 1);
    DisplacementField shifted = u;
    for (std::size_t i = 0; i < shifted.volume().data().size(); ++i)
        shifted.volume().data()[i] += 2.5f;
    // interior-only comparison: crop both fields by one voxel per side
    auto crop = [](const DisplacementField& f) {
        const IVec3 d = f.dims();
        DisplacementField out = DisplacementField::zero({d.x - 2, d.y - 2, d.z - 2});
        for (int x = 1; x < d.x - 1; ++x)
            for (int y = 1; y < d.y - 1; ++y)
                for (int z = 1; z < d.z - 1; ++z)
                    out.set(x - 1, y - 1, z - 1, f.at(x, y, z));
        return out;
    };
    CHECK(sd_log_j(crop(u)) == doctest::Approx(sd_log_j(crop(shifted))).epsilon(1e-5));
}

TEST_CASE("endpoint error statistics")
{
    DisplacementField a = DisplacementField::zero({3, 3, 3});
    DisplacementField b = DisplacementField::zero({3, 3, 3});
    EndpointError e = endpoint_error(a, b, nullptr);
    CHECK(e.mean == 0.0);
    CHECK(e.max == 0.0);

    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y)
            for (int z = 0; z < 3; ++z)
                b.set(x, y, z, {1, 0, 0});
    e = endpoint_error(a, b, nullptr);
    CHECK(e.mean == doctest::Approx(1.0));
    CHECK(e.max == doctest::Approx(1.0));

    // random fields against the direct formula
    DisplacementField r1(testutil::random_volume({3, 3, 3}, 3, 7, Kind::VectorField));
    DisplacementField r2(testutil::random_volume({3, 3, 3}, 3, 8, Kind::VectorField));
    double sum = 0.0, mx = 0.0;
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y)
            for (int z = 0; z < 3; ++z) {
                const Vec3 d = r1.at(x, y, z) - r2.at(x, y, z);
                const double err = std::sqrt(double(d.x) * d.x + double(d.y) * d.y + double(d.z) * d.z);
                sum += err;
                mx = std::max(mx, err);
            }
    e = endpoint_error(r1, r2, nullptr);
    CHECK(e.mean == doctest::Approx(sum / 27.0));
    CHECK(e.max == doctest::Approx(mx));
}

TEST_CASE("endpoint error honors the mask")
{
    DisplacementField a = DisplacementField::zero({4, 4, 4});
    DisplacementField b = DisplacementField::zero({4, 4, 4});
    b.set(0, 0, 0, {5, 0, 0});
    Volume mask({4, 4, 4}, 1, Kind::ScalarImage);
    for (auto& v : mask.data())
        v = 1.0f;
    mask.at(0, 0, 0, 0) = 0.0f; // exclude the one deviating voxel
    EndpointError e = endpoint_error(a, b, &mask);
    CHECK(e.mean == 0.0);
    CHECK(e.max == 0.0);
}

TEST_CASE("labels_present lists nonzero labels of both maps")
{
    Volume a = cube_labels({4, 4, 4}, {0, 0, 0}, {1, 1, 1}, 3);
    Volume b = cube_labels({4, 4, 4}, {1, 1, 1}, {2, 2, 2}, 7);
    CHECK(labels_present(a, b) == std::vector<int>{3, 7});
}
