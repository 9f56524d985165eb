#include "cvreg/displacement.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

using namespace cvreg;

namespace {

DisplacementField constant_field(IVec3 dims, Vec3 v)
{
    DisplacementField f = DisplacementField::zero(dims);
    for (int x = 0; x < dims.x; ++x)
        for (int y = 0; y < dims.y; ++y)
            for (int z = 0; z < dims.z; ++z)
            f.set(x, y, z, v);
    return f;
}

} // namespace

TEST_CASE("warp with the zero field is the exact identity")
{
    Volume v = testutil::random_volume({6, 5, 7}, 2, 10, Kind::FeatureMap);
    Volume w = warp(v, DisplacementField::zero(v.dims()));
    CHECK(w.data() == v.data());
}

TEST_CASE("warp by a constant unit field shifts the interior")
{
    Volume v = testutil::random_volume({8, 8, 8}, 1, 4);
    Volume w = warp(v, constant_field(v.dims(), {1, 0, 0}));
    for (int x = 0; x < 7; ++x)
        for (int y = 0; y < 8; ++y)
            for (int z = 0; z < 8; ++z)
                CHECK(w.at(0, x, y, z) == doctest::Approx(v.at(0, x + 1, y, z)));
}

TEST_CASE("warping a label map creates no new labels")
{
    Volume labels({8, 8, 8}, 1, Kind::LabelMap);
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y)
            for (int z = 0; z < 8; ++z)
                labels.at(0, x, y, z) = float((x / 3 + y / 4) % 3);
    std::set<float> before(labels.data().begin(), labels.data().end());

    DisplacementField u = DisplacementField::zero(labels.dims());
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y)
            for (int z = 0; z < 8; ++z)
                u.set(x, y, z, {0.4f * float(x % 2), -0.7f, 0.3f});
    Volume w = warp(labels, u);
    for (float v : w.data()) {
        CHECK(before.count(v) == 1);
        CHECK(v == std::floor(v));
    }
}

TEST_CASE("warp rejects a mismatched grid")
{
    Volume v({6, 6, 6}, 1, Kind::ScalarImage);
    CHECK_THROWS_AS(warp(v, DisplacementField::zero({5, 6, 6})), Error);
}

TEST_CASE("compose with the zero field is the identity element")
{
    DisplacementField u = DisplacementField::zero({6, 6, 6});
    for (int x = 0; x < 6; ++x)
        for (int y = 0; y < 6; ++y)
            for (int z = 0; z < 6; ++z)
                u.set(x, y, z, {0.2f * x, -0.1f * y, 0.05f * z});
    DisplacementField zero = DisplacementField::zero({6, 6, 6});

    DisplacementField a = compose(zero, u);
    DisplacementField b = compose(u, zero);
    for (std::size_t i = 0; i < u.volume().data().size(); ++i) {
        CHECK(a.volume().data()[i] == doctest::Approx(u.volume().data()[i]));
        CHECK(b.volume().data()[i] == doctest::Approx(u.volume().data()[i]));
    }
}

TEST_CASE("composing constant fields adds them")
{
    const IVec3 d{5, 5, 5};
    DisplacementField a = constant_field(d, {1.5f, -0.5f, 0.25f});
    DisplacementField b = constant_field(d, {-0.5f, 1.0f, 0.5f});
    DisplacementField c = compose(a, b);
    for (int x = 1; x < 4; ++x)
        for (int y = 1; y < 4; ++y)
            for (int z = 1; z < 4; ++z) {
                const Vec3 v = c.at(x, y, z);
                CHECK(v.x == doctest::Approx(1.0f));
                CHECK(v.y == doctest::Approx(0.5f));
                CHECK(v.z == doctest::Approx(0.75f));
            }
}

TEST_CASE("double warp equals warp by the composition on smooth fields")
{
    Volume img = testutil::random_volume({16, 16, 16}, 1, 8);
    box_average(img, 2, 2);
    float lo = img.data()[0], hi = img.data()[0];
    for (float v : img.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    auto smooth_field = [](IVec3 dims, unsigned seed, float amp) {
        DisplacementField f(testutil::random_volume(dims, 3, seed, Kind::VectorField));
        box_average(f.volume(), 2, 2);
        for (auto& v : f.volume().data())
            v *= amp;
        return f;
    };
    DisplacementField outer = smooth_field(img.dims(), 31, 2.0f);
    DisplacementField inner = smooth_field(img.dims(), 32, 2.0f);

    Volume two_step = warp(warp(img, outer), inner);
    Volume one_step = warp(img, compose(outer, inner));
    const float tol = 5e-2f * std::max(1e-6f, hi - lo);
    for (int x = 4; x < 12; ++x)
        for (int y = 4; y < 12; ++y)
            for (int z = 4; z < 12; ++z)
                CHECK(std::fabs(two_step.at(0, x, y, z) - one_step.at(0, x, y, z)) <= tol);
}

TEST_CASE("compose is associative up to interpolation error on smooth fields")
{
    const IVec3 d{12, 12, 12};
    auto smooth_field = [&](unsigned seed) {
        DisplacementField f(testutil::random_volume(d, 3, seed, Kind::VectorField));
        box_average(f.volume(), 2, 2);
        return f;
    };
    DisplacementField a = smooth_field(1), b = smooth_field(2), c = smooth_field(3);
    DisplacementField left = compose(compose(a, b), c);
    DisplacementField right = compose(a, compose(b, c));
    float mag = std::max({a.max_abs(), b.max_abs(), c.max_abs(), 1e-6f});
    for (int x = 3; x < 9; ++x)
        for (int y = 3; y < 9; ++y)
            for (int z = 3; z < 9; ++z) {
                const Vec3 e = left.at(x, y, z) - right.at(x, y, z);
                CHECK(e.max_abs() <= 5e-2f * mag);
            }
}

TEST_CASE("upsample2x of the zero field is zero")
{
    DisplacementField u = DisplacementField::zero({4, 4, 4});
    DisplacementField up = upsample2x(u, {8, 8, 8});
    for (float v : up.volume().data())
        CHECK(v == 0.0f);
}

TEST_CASE("upsample2x doubles constant vectors")
{
    DisplacementField u = constant_field({4, 4, 4}, {1, 2, 3});
    DisplacementField up = upsample2x(u, {8, 8, 8});
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y)
            for (int z = 0; z < 8; ++z) {
                const Vec3 v = up.at(x, y, z);
                CHECK(v.x == doctest::Approx(2.0f));
                CHECK(v.y == doctest::Approx(4.0f));
                CHECK(v.z == doctest::Approx(6.0f));
            }
}

TEST_CASE("upsample2x keeps linear fields linear, representing the same map")
{
    // u_x(x) = a*x on the coarse grid; coarse voxel i sits at fine coordinate
    // 2i + 0.5, so the fine field should be a*(j - 0.5) at fine voxel j.
    const float a = 0.25f;
    DisplacementField u = DisplacementField::zero({6, 4, 4});
    for (int x = 0; x < 6; ++x)
        for (int y = 0; y < 4; ++y)
            for (int z = 0; z < 4; ++z)
                u.set(x, y, z, {a * float(x), 0, 0});
    DisplacementField up = upsample2x(u, {12, 8, 8});
    for (int x = 1; x < 11; ++x) // away from the clamped ends
        CHECK(up.at(x, 3, 3).x == doctest::Approx(a * (float(x) - 0.5f)).epsilon(1e-4));
}

TEST_CASE("upsample2x validates the 2x dim relation")
{
    DisplacementField u = DisplacementField::zero({4, 4, 4});
    CHECK_THROWS_AS(upsample2x(u, {12, 8, 8}), Error);
    CHECK_NOTHROW(upsample2x(u, {7, 8, 9}));
}

TEST_CASE("jacobian determinant of the zero field is one")
{
    Volume det = jacobian_determinant(DisplacementField::zero({5, 5, 5}));
    for (float v : det.data())
        CHECK(v == doctest::Approx(1.0f));
}

TEST_CASE("jacobian determinant of a linear ramp is 1 + slope everywhere")
{
    DisplacementField u = DisplacementField::zero({6, 6, 6});
    for (int x = 0; x < 6; ++x)
        for (int y = 0; y < 6; ++y)
            for (int z = 0; z < 6; ++z)
                u.set(x, y, z, {0.1f * float(x), 0, 0});
    Volume det = jacobian_determinant(u);
    for (float v : det.data())
        CHECK(v == doctest::Approx(1.1f).epsilon(1e-5));
}

TEST_CASE("jacobian determinant of u = A x matches det(I + A) on the interior")
{
    std::mt19937 rng(77);
    std::uniform_real_distribution<float> c(-0.08f, 0.08f);
    float A[9];
    for (auto& v : A)
        v = c(rng);
    DisplacementField u = DisplacementField::zero({7, 7, 7});
    for (int x = 0; x < 7; ++x)
        for (int y = 0; y < 7; ++y)
            for (int z = 0; z < 7; ++z)
                u.set(x, y, z, {A[0] * x + A[1] * y + A[2] * z,
                                A[3] * x + A[4] * y + A[5] * z,
                                A[6] * x + A[7] * y + A[8] * z});
    const float expect = (1 + A[0]) * ((1 + A[4]) * (1 + A[8]) - A[5] * A[7]) -
                         A[1] * (A[3] * (1 + A[8]) - A[5] * A[6]) +
                         A[2] * (A[3] * A[7] - (1 + A[4]) * A[6]);
    Volume det = jacobian_determinant(u);
    for (int x = 1; x < 6; ++x)
        for (int y = 1; y < 6; ++y)
            for (int z = 1; z < 6; ++z)
                CHECK(det.at(0, x, y, z) == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("displacement fields must have three finite channels")
{
    CHECK_THROWS_AS(DisplacementField(Volume({4, 4, 4}, 2, Kind::VectorField)), Error);
    Volume bad({4, 4, 4}, 3, Kind::VectorField);
    bad.data()[5] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(DisplacementField(std::move(bad)), Error);
}
