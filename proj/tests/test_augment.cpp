#include <doctest.h>

#include "tempogan/augment.hpp"
#include "tempogan/field.hpp"
#include "tempogan/rng.hpp"

#include <cmath>

using namespace tempogan;

namespace {

GridField random_field(std::vector<int> shape, int channels, uint64_t seed) {
    GridField f(std::move(shape), channels);
    Rng rng(seed);
    for (float& v : f.values()) v = float(rng.uniform(-1.0, 1.0));
    return f;
}

} // namespace

TEST_CASE("identity request with tile == source pins translation to zero") {
    AugmentationTransform t =
        make_transform({8, 8}, {8, 8}, 1.0, 0.0, {false, false, false}, 1);
    CHECK(t.source_center[0] == doctest::Approx(3.5));
    CHECK(t.source_center[1] == doctest::Approx(3.5));
    CHECK(transform_in_bounds(t, {8, 8}, 1));
    // identity maps each tile cell to itself
    double p[2] = {2.0, 5.0}, q[2];
    t.map_position(p, 1, q);
    CHECK(q[0] == doctest::Approx(2.0));
    CHECK(q[1] == doctest::Approx(5.0));
}

TEST_CASE("s=1.15 rotated tile keeps corners inside a 64^2 source") {
    AugmentationTransform t =
        make_transform({16, 16}, {64, 64}, 1.15, 90.0, {false, false, false}, 1);
    for (const auto& corner : t.mapped_corners(1)) {
        CHECK(corner[0] >= 0.0);
        CHECK(corner[0] <= 63.0);
        CHECK(corner[1] >= 0.0);
        CHECK(corner[1] <= 63.0);
    }
}

TEST_CASE("10^4 sampled transforms produce zero out-of-domain corners") {
    Rng rng(2024);
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        AugmentationTransform t = sample_transform(rng, {16, 16}, {64, 64}, 4);
        if (!transform_in_bounds(t, {64, 64}, 1) || !transform_in_bounds(t, {64, 64}, 4))
            ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("infeasible transform throws") {
    CHECK_THROWS_WITH_AS(make_transform({16, 16}, {16, 16}, 1.0, 45.0, {false, false, false}, 1),
                         "tile exceeds source under transform", std::runtime_error);
}

TEST_CASE("apply_passive: identity transform copies the tile region") {
    GridField f = random_field({12, 12}, 1, 5);
    AugmentationTransform t =
        make_transform({12, 12}, {12, 12}, 1.0, 0.0, {false, false, false}, 1);
    GridField out = apply_passive(f, t, 1);
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(out.values()[i] == doctest::Approx(f.values()[i]).epsilon(1e-6));
}

TEST_CASE("apply_passive: integer translation is an exact shifted copy") {
    GridField f = random_field({16, 16}, 1, 7);
    double want[2] = {9.5, 6.5}; // tile center 3.5 -> offset (6, 3)
    AugmentationTransform t = make_transform({8, 8}, {16, 16}, 1.0, 0.0, {false, false, false}, 1,
                                             want);
    GridField out = apply_passive(f, t, 1);
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y)
            CHECK(out.at2(x, y) == doctest::Approx(f.at2(x + 6, y + 3)).epsilon(1e-6));
}

TEST_CASE("apply_passive: 90-degree rotation equals array rotation") {
    const int n = 9;
    GridField f = random_field({n, n}, 1, 11);
    AugmentationTransform t = make_transform({n, n}, {n, n}, 1.0, 90.0, {false, false, false}, 1);
    GridField out = apply_passive(f, t, 1);
    // counter-clockwise rotation: out(x, y) = f(y, n-1-x)
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            CHECK(std::abs(out.at2(x, y) - f.at2(y, n - 1 - x)) < 1e-5f);
}

TEST_CASE("apply_directional: rotation rotates constant vectors") {
    GridField v({8, 8}, 2);
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) v.at2(x, y, 0) = 1.0f;
    AugmentationTransform t = make_transform({4, 4}, {8, 8}, 1.0, 90.0, {false, false, false}, 1);
    GridField out = apply_directional(v, t, 1);
    for (std::size_t i = 0; i < out.cell_count(); ++i) {
        CHECK(out.values()[2 * i + 0] == doctest::Approx(0.0).epsilon(1e-6));
        CHECK(out.values()[2 * i + 1] == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("apply_directional: x reflection flips the x component") {
    GridField v({8, 8}, 2);
    for (std::size_t i = 0; i < v.cell_count(); ++i) {
        v.values()[2 * i + 0] = 1.0f;
        v.values()[2 * i + 1] = 2.0f;
    }
    AugmentationTransform t = make_transform({4, 4}, {8, 8}, 1.0, 0.0, {true, false, false}, 1);
    GridField out = apply_directional(v, t, 1);
    for (std::size_t i = 0; i < out.cell_count(); ++i) {
        CHECK(out.values()[2 * i + 0] == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(out.values()[2 * i + 1] == doctest::Approx(2.0).epsilon(1e-6));
    }
}

TEST_CASE("apply_directional: uniform scale multiplies magnitudes") {
    GridField v({8, 8}, 2);
    for (std::size_t i = 0; i < v.cell_count(); ++i) v.values()[2 * i + 0] = 1.0f;
    AugmentationTransform t = make_transform({4, 4}, {8, 8}, 1.1, 0.0, {false, false, false}, 1);
    GridField out = apply_directional(v, t, 1);
    for (std::size_t i = 0; i < out.cell_count(); ++i)
        CHECK(out.values()[2 * i + 0] == doctest::Approx(1.1).epsilon(1e-6));
}

TEST_CASE("recompute_derived: zero velocity gives zero vorticity") {
    GridField v({6, 6}, 2, 0.0f);
    GridField w = recompute_derived(v);
    for (float x : w.values()) CHECK(x == 0.0f);
}

TEST_CASE("vorticity recompute commutes with passive rotation (interior)") {
    const int n = 32;
    GridField v({n, n}, 2);
    Rng rng(31);
    // smooth random velocity: sum of a few sine modes
    double ax[3], ay[3], kx[3], ky[3];
    for (int m = 0; m < 3; ++m) {
        ax[m] = rng.uniform(-1, 1);
        ay[m] = rng.uniform(-1, 1);
        kx[m] = rng.uniform(0.1, 0.4);
        ky[m] = rng.uniform(0.1, 0.4);
    }
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            double u = 0, w2 = 0;
            for (int m = 0; m < 3; ++m) {
                u += ax[m] * std::sin(kx[m] * x + 0.3) * std::cos(ky[m] * y);
                w2 += ay[m] * std::cos(kx[m] * x) * std::sin(ky[m] * y + 0.7);
            }
            v.at2(x, y, 0) = float(u);
            v.at2(x, y, 1) = float(w2);
        }
    AugmentationTransform t =
        make_transform({16, 16}, {n, n}, 1.0, 90.0, {false, false, false}, 1);
    GridField recomputed = recompute_derived(apply_directional(v, t, 1));
    GridField passive = apply_passive(curl(v), t, 1);
    for (int x = 2; x < 14; ++x)
        for (int y = 2; y < 14; ++y)
            CHECK(std::abs(recomputed.at2(x, y) - passive.at2(x, y)) < 1e-3f);
}

TEST_CASE("reflection flips the sign of recomputed vorticity") {
    const int n = 32;
    GridField v({n, n}, 2);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            v.at2(x, y, 0) = float(std::sin(0.3 * x) * std::cos(0.25 * y));
            v.at2(x, y, 1) = float(std::cos(0.2 * x + 0.4) * std::sin(0.35 * y));
        }
    // reflections combined with random scale: sign flip must hold for any s
    for (double s : {0.9, 1.0, 1.12}) {
        AugmentationTransform t = make_transform({16, 16}, {n, n}, s, 0.0, {true, false, false}, 1);
        GridField recomputed = recompute_derived(apply_directional(v, t, 1));
        GridField passive = apply_passive(curl(v), t, 1);
        for (int x = 2; x < 14; ++x)
            for (int y = 2; y < 14; ++y)
                CHECK(std::abs(recomputed.at2(x, y) + passive.at2(x, y)) < 1e-3f);
    }
}

TEST_CASE("low/high-res tiles of one transform stay registered") {
    const int n = 16, scale = 4;
    // marker field: smooth bump, sampled at both resolutions
    GridField lo({n, n}, 1);
    GridField hi({n * scale, n * scale}, 1);
    auto bump = [&](double x, double y) {
        const double dx = x - 7.1, dy = y - 8.4;
        return std::exp(-(dx * dx + dy * dy) / 6.0);
    };
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) lo.at2(x, y) = float(bump(x, y));
    for (int x = 0; x < n * scale; ++x)
        for (int y = 0; y < n * scale; ++y)
            hi.at2(x, y) = float(bump((x + 0.5) / scale - 0.5, (y + 0.5) / scale - 0.5));

    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        AugmentationTransform t = sample_transform(rng, {8, 8}, {n, n}, scale);
        GridField lo_tile = apply_passive(lo, t, 1);
        GridField hi_tile = apply_passive(hi, t, scale);
        GridField hi_down = downsample(hi_tile, scale, ResampleKind::passive);
        for (int x = 1; x < 7; ++x)
            for (int y = 1; y < 7; ++y)
                CHECK(std::abs(hi_down.at2(x, y) - lo_tile.at2(x, y)) < 1e-2f);
    }
}
