#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mildns/grid.hpp"
#include "mildns/snapshot.hpp"

using namespace mildns;

TEST_CASE("make_grid wave vectors and cell volume") {
    auto g = make_grid(2, 4, 2.0 * M_PI);
    std::set<int> modes;
    for (std::size_t i = 0; i < g->point_count(); ++i) {
        modes.insert(g->mode_index(i, 0));
        modes.insert(g->mode_index(i, 1));
    }
    CHECK(modes == std::set<int>{-2, -1, 0, 1});
    CHECK(g->cell_volume() == doctest::Approx(std::pow(M_PI / 2.0, 2)).epsilon(1e-15));

    auto g3 = make_grid(3, 8, 1.0);
    double max_pos = 0.0, max_abs = 0.0;
    for (std::size_t i = 0; i < g3->point_count(); ++i)
        for (int a = 0; a < 3; ++a) {
            max_pos = std::max(max_pos, g3->wave_component(i, a));
            max_abs = std::max(max_abs, std::abs(g3->wave_component(i, a)));
        }
    // largest retained positive component 2*pi*3; |k_j| bounded by pi*n/L
    CHECK(max_pos == doctest::Approx(2.0 * M_PI * 3.0).epsilon(1e-14));
    CHECK(max_abs <= M_PI * 8.0 / 1.0 + 1e-12);

    // cell_volume * n^d = L^d exactly (to roundoff)
    CHECK(g3->cell_volume() * std::pow(8.0, 3) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("make_grid rejects bad arguments") {
    CHECK_THROWS_AS(make_grid(2, 5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(4, 8, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1, 8, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(2, 8, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(2, 8, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(2, 2, 1.0), std::invalid_argument);
}

TEST_CASE("sample_function places spectral mass at the right modes") {
    auto g = make_grid(2, 16, 2.0 * M_PI);
    Field f = sample_scalar(g, [](std::span<const double> x) { return std::sin(x[0]); });
    auto spec = f.spectral(0);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const int m0 = g->mode_index(i, 0);
        const int m1 = g->mode_index(i, 1);
        const bool carrier = (std::abs(m0) == 1 && m1 == 0);
        if (carrier)
            CHECK(std::abs(spec[i]) == doctest::Approx(0.5).epsilon(1e-12));
        else
            CHECK(std::abs(spec[i]) < 1e-13);
    }

    Field one = sample_scalar(g, [](std::span<const double>) { return 1.0; });
    auto spec1 = one.spectral(0);
    for (std::size_t i = 0; i < spec1.size(); ++i) {
        if (g->mode_index(i, 0) == 0 && g->mode_index(i, 1) == 0)
            CHECK(spec1[i].real() == doctest::Approx(1.0).epsilon(1e-13));
        else
            CHECK(std::abs(spec1[i]) < 1e-13);
    }
}

TEST_CASE("sample_function names the offending node for a pole") {
    auto g = make_grid(2, 8, 1.0);
    CHECK_THROWS_WITH_AS(
        sample_scalar(g, [](std::span<const double> x) { return 1.0 / x[0]; }),
        doctest::Contains("node"), std::domain_error);
}

TEST_CASE("transform roundtrip") {
    auto g = make_grid(2, 32, 2.0 * M_PI);
    Field smooth = sample_scalar(g, [](std::span<const double> x) {
        return std::sin(x[0]) * std::cos(2.0 * x[1]) + 0.3 * std::cos(3.0 * x[0]);
    });
    CHECK(transform_roundtrip_check(smooth) <= 1e-12);

    Field zero = Field::zero(g, 1);
    CHECK(transform_roundtrip_check(zero) == 0.0);

    Field noise = random_band_limited(g, 1, 10, 42);
    CHECK(transform_roundtrip_check(noise) <= 1e-12);
}

TEST_CASE("Parseval holds for 100 seeded random fields") {
    auto g = make_grid(2, 16, 3.0);
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        GaussianStream gs(seed);
        std::vector<double> samples(g->point_count());
        for (double& v : samples) v = gs.next();
        Field f = Field::from_physical(g, 1, std::move(samples));
        const double phys = physical_energy(f);
        const double spec = spectral_energy(f);
        CHECK(std::abs(phys - spec) <= 1e-12 * phys);
    }
}

TEST_CASE("translation equivariance: grid shifts are exact cyclic shifts") {
    // L/n exact in binary so shifted arguments are bitwise equal to node
    // coordinates and the sampled values match exactly.
    auto g = make_grid(2, 16, 4.0);
    auto wrap = [](double v) {
        double w = std::fmod(v, 4.0);
        return w < 0.0 ? w + 4.0 : w;
    };
    auto rule = [&](std::span<const double> x) {
        const double x0 = wrap(x[0]);
        return std::sin(2.0 * M_PI * x0 / 4.0) + 0.5 * std::cos(2.0 * M_PI * (x0 + 2.0 * x[1]) / 4.0);
    };
    Field f = sample_scalar(g, rule);
    const int shift = 3;
    const double a = g->spacing() * shift;
    Field shifted = sample_scalar(g, [&](std::span<const double> x) {
        double y[2] = {x[0] - a, x[1]};
        return rule(std::span<const double>(y, 2));
    });
    const int n = 16;
    auto orig = f.physical(0);
    auto sh = shifted.physical(0);
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1) {
            const int j0 = ((i0 - shift) % n + n) % n;
            CHECK(sh[i0 * n + i1] == orig[j0 * n + i1]);
        }
}

TEST_CASE("vector norms combine channels the stated way") {
    auto g = make_grid(2, 8, 2.0 * M_PI);
    std::vector<double> buf(2 * g->point_count());
    for (std::size_t i = 0; i < g->point_count(); ++i) {
        buf[i] = 3.0;
        buf[g->point_count() + i] = 4.0;
    }
    Field f = Field::from_physical(g, 2, std::move(buf));
    CHECK(f.magnitude_at(0) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("from_physical rejects non-finite samples") {
    auto g = make_grid(2, 4, 1.0);
    std::vector<double> samples(g->point_count(), 0.0);
    samples[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Field::from_physical(g, 1, std::move(samples)), std::domain_error);
}

TEST_CASE("trajectory validation") {
    auto g = make_grid(2, 4, 1.0);
    std::vector<Field> fields{Field::zero(g, 2), Field::zero(g, 2)};
    CHECK_THROWS_AS(Trajectory({0.0, 0.0}, std::move(fields)), std::invalid_argument);
    std::vector<Field> ok{Field::zero(g, 2), Field::zero(g, 2)};
    CHECK_NOTHROW(Trajectory({0.0, 1.0}, std::move(ok)));
}

TEST_CASE("snapshot roundtrip preserves fields bit-exactly") {
    auto g = make_grid(3, 8, 2.5);
    Field f = random_band_limited(g, 3, 3, 7);
    const std::string path = "test_snapshot_roundtrip.mnsf";
    write_snapshot(path, f);
    Field r = read_snapshot(path);
    REQUIRE(r.channels() == 3);
    REQUIRE(r.grid()->same_as(*f.grid()));
    for (int c = 0; c < 3; ++c) {
        auto a = f.physical(c);
        auto b = r.physical(c);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
    std::remove(path.c_str());
}

TEST_CASE("read_snapshot rejects garbage") {
    const std::string path = "test_snapshot_bad.mnsf";
    {
        std::FILE* fp = std::fopen(path.c_str(), "wb");
        std::fputs("not a snapshot", fp);
        std::fclose(fp);
    }
    CHECK_THROWS_AS(read_snapshot(path), std::runtime_error);
    std::remove(path.c_str());
}
