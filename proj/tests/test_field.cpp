#include <doctest.h>

#include "tempogan/field.hpp"
#include "tempogan/field_io.hpp"
#include "tempogan/rng.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace tempogan;

namespace {

GridField random_field(std::vector<int> shape, int channels, uint64_t seed, double lo = -1.0,
                       double hi = 1.0) {
    GridField f(std::move(shape), channels);
    Rng rng(seed);
    for (float& v : f.values()) v = float(rng.uniform(lo, hi));
    return f;
}

// float64 reference interpolator, independent of sample_linear
double ref_interp2(const GridField& f, int c, double qx, double qy) {
    auto clampd = [](double v, double hi) { return v < 0.0 ? 0.0 : (v > hi ? hi : v); };
    qx = clampd(qx, double(f.shape(0) - 1));
    qy = clampd(qy, double(f.shape(1) - 1));
    const int x0 = std::min(int(std::floor(qx)), f.shape(0) - 2);
    const int y0 = std::min(int(std::floor(qy)), f.shape(1) - 2);
    const double wx = qx - x0, wy = qy - y0;
    auto at = [&](int x, int y) { return double(f.at2(x, y, c)); };
    return (1 - wx) * ((1 - wy) * at(x0, y0) + wy * at(x0, y0 + 1)) +
           wx * ((1 - wy) * at(x0 + 1, y0) + wy * at(x0 + 1, y0 + 1));
}

} // namespace

TEST_CASE("sample_linear: constant field returns the constant") {
    GridField f({5, 7}, 1, 3.0f);
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        double p[2] = {rng.uniform(-0.5, 4.5), rng.uniform(-0.5, 6.5)};
        CHECK(sample_linear_scalar(f, p) == doctest::Approx(3.0).epsilon(1e-7));
    }
}

TEST_CASE("sample_linear: midpoint of a two-cell ramp") {
    GridField f({2, 1}, 1);
    f.at2(0, 0) = 0.0f;
    f.at2(1, 0) = 1.0f;
    double p[2] = {0.5, 0.0};
    CHECK(sample_linear_scalar(f, p) == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("sample_linear: matches float64 reference on random fields") {
    GridField f = random_field({8, 8}, 1, 42);
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        double p[2] = {rng.uniform(-1.0, 8.0), rng.uniform(-1.0, 8.0)};
        const double ref = ref_interp2(f, 0, p[0], p[1]);
        const double got = sample_linear_scalar(f, p);
        CHECK(std::abs(got - ref) <= 1e-6 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("sample_linear is exact on affine fields in the interior") {
    GridField f({9, 9}, 1);
    for (int x = 0; x < 9; ++x)
        for (int y = 0; y < 9; ++y) f.at2(x, y) = float(0.3 * x - 0.7 * y + 1.5);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        double p[2] = {rng.uniform(0.0, 8.0), rng.uniform(0.0, 8.0)};
        const double expect = 0.3 * p[0] - 0.7 * p[1] + 1.5;
        CHECK(sample_linear_scalar(f, p) == doctest::Approx(expect).epsilon(1e-5));
    }
}

TEST_CASE("curl: constant vector field has zero curl") {
    GridField v({6, 6}, 2, 1.25f);
    GridField w = curl(v);
    for (float x : w.values()) CHECK(x == 0.0f);
}

TEST_CASE("curl: rigid rotation gives 2*omega in the interior") {
    const double omega = 0.5;
    const int n = 16;
    GridField v({n, n}, 2);
    const double c = (n - 1) / 2.0;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            v.at2(x, y, 0) = float(-omega * (y - c));
            v.at2(x, y, 1) = float(omega * (x - c));
        }
    GridField w = curl(v);
    for (int x = 1; x < n - 1; ++x)
        for (int y = 1; y < n - 1; ++y)
            CHECK(std::abs(w.at2(x, y) - 2 * omega) < 1e-4);
}

TEST_CASE("curl: matches a float64 stencil oracle on random fields") {
    GridField v = random_field({12, 10}, 2, 9);
    GridField w = curl(v);
    for (int x = 1; x < 11; ++x)
        for (int y = 1; y < 9; ++y) {
            const double dvy_dx = 0.5 * (double(v.at2(x + 1, y, 1)) - double(v.at2(x - 1, y, 1)));
            const double dvx_dy = 0.5 * (double(v.at2(x, y + 1, 0)) - double(v.at2(x, y - 1, 0)));
            const double ref = dvy_dx - dvx_dy;
            CHECK(std::abs(double(w.at2(x, y)) - ref) <= 1e-5 * std::max(1.0, std::abs(ref)));
        }
}

TEST_CASE("curl rejects degenerate grids") {
    GridField v({2, 2}, 2);
    CHECK_THROWS_WITH_AS(curl(v), "curl: degenerate grid", std::runtime_error);
}

TEST_CASE("curl of a gradient field vanishes at O(h^2)") {
    // potential phi(x, y) = sin(2 pi x / L) * cos(2 pi y / L), v = grad phi
    auto make = [](int n) {
        GridField v({n, n}, 2);
        const double k = 2.0 * M_PI / n;
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                v.at2(x, y, 0) = float(k * std::cos(k * x) * std::cos(k * y));
                v.at2(x, y, 1) = float(-k * std::sin(k * x) * std::sin(k * y));
            }
        return v;
    };
    auto interior_max = [](const GridField& w) {
        double m = 0.0;
        for (int x = 2; x < w.shape(0) - 2; ++x)
            for (int y = 2; y < w.shape(1) - 2; ++y) m = std::max(m, std::abs(double(w.at2(x, y))));
        return m;
    };
    const double err_coarse = interior_max(curl(make(16)));
    const double err_fine = interior_max(curl(make(32)));
    // halving h divides truncation error by ~4 for the smooth mode; the wave
    // number also halves, contributing another factor, so demand at least 4x
    CHECK(err_fine * 4.0 <= err_coarse * 1.5);
}

TEST_CASE("downsample: block averages and velocity rescale") {
    GridField f({4, 4}, 1, 2.0f);
    GridField d = downsample(f, 4, ResampleKind::passive);
    CHECK(d.shape(0) == 1);
    CHECK(d.values()[0] == doctest::Approx(2.0));

    GridField v({4, 4}, 2);
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) {
            v.at2(x, y, 0) = 4.0f;
            v.at2(x, y, 1) = 0.0f;
        }
    GridField dv = downsample(v, 4, ResampleKind::velocity);
    CHECK(dv.values()[0] == doctest::Approx(1.0));
    CHECK(dv.values()[1] == doctest::Approx(0.0));
}

TEST_CASE("downsample matches a float64 block-mean oracle") {
    GridField f = random_field({16, 16}, 1, 21);
    GridField d = downsample(f, 4, ResampleKind::passive);
    for (int bx = 0; bx < 4; ++bx)
        for (int by = 0; by < 4; ++by) {
            double acc = 0.0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) acc += double(f.at2(bx * 4 + i, by * 4 + j));
            const double ref = acc / 16.0;
            CHECK(std::abs(double(d.at2(bx, by)) - ref) <= 1e-6 * std::max(1.0, std::abs(ref)));
        }
}

TEST_CASE("downsample rejects non-divisible shapes") {
    GridField f({5, 4}, 1);
    CHECK_THROWS_AS(downsample(f, 4, ResampleKind::passive), std::runtime_error);
}

TEST_CASE("upsample_nn: identity at factor 1 and replication") {
    GridField f = random_field({3, 3}, 2, 5);
    GridField u1 = upsample_nn(f, 1, ResampleKind::passive);
    CHECK(u1.values() == f.values());

    GridField one({1, 1}, 1, 5.0f);
    GridField u = upsample_nn(one, 4, ResampleKind::passive);
    CHECK(u.cell_count() == 16);
    for (float v : u.values()) CHECK(v == 5.0f);
}

TEST_CASE("downsample(upsample_nn(f)) round trips passive fields exactly") {
    GridField f = random_field({6, 6}, 1, 77);
    GridField round = downsample(upsample_nn(f, 4, ResampleKind::passive), 4, ResampleKind::passive);
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(std::abs(round.values()[i] - f.values()[i]) <= 1e-6f);
}

TEST_CASE("velocity up/down rescale are inverse") {
    GridField v = random_field({4, 4}, 2, 13);
    GridField round = downsample(upsample_nn(v, 4, ResampleKind::velocity), 4, ResampleKind::velocity);
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(std::abs(round.values()[i] - v.values()[i]) <= 1e-6f);
}

TEST_CASE("TGF1 round trip is bit exact, 2D and 3D") {
    namespace fs = std::filesystem;
    const std::string path = (fs::temp_directory_path() / "tg_roundtrip.tgf").string();
    for (auto shape : std::vector<std::vector<int>>{{7, 5}, {4, 6, 3}}) {
        GridField f = random_field(shape, int(shape.size()), 1234);
        write_tgf(f, path);
        GridField g = read_tgf(path);
        REQUIRE(g.shape() == f.shape());
        REQUIRE(g.channels() == f.channels());
        CHECK(std::memcmp(g.data(), f.data(), f.size() * sizeof(float)) == 0);
    }
    fs::remove(path);
}

TEST_CASE("TGF1 rejects malformed headers") {
    namespace fs = std::filesystem;
    const std::string path = (fs::temp_directory_path() / "tg_bad.tgf").string();
    {
        FILE* fp = std::fopen(path.c_str(), "wb");
        std::fwrite("NOPE", 1, 4, fp);
        std::fclose(fp);
    }
    CHECK_THROWS_AS(read_tgf(path), std::runtime_error);
    fs::remove(path);
}
