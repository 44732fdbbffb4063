#include <cmath>
#include <numbers>

#include "doctest.h"
#include "weakpath/errors.hpp"
#include "weakpath/flow.hpp"

using namespace weakpath;

namespace {

OpticalConfig single_slit() {
    return OpticalConfig::make(1e-6, 500e-6, 100e-6, {1.0, 0.0}, {0.0, 0.0});
}

double slope_of(const OpticalConfig& c, double x, double z) {
    const auto s = weak_momentum_exact(c, x, z);
    REQUIRE(s.valid);
    return s.slope;
}

// Phase gradient from unwrapped central differences of arg(psi).
double phase_gradient_fd(const OpticalConfig& c, double x, double z, double h) {
    const double a = std::arg(evaluate_field(c, x + h, z) / evaluate_field(c, x - h, z));
    return a / (2.0 * h);
}

}  // namespace

TEST_CASE("weak_momentum_exact") {
    const auto c = default_config();

    SUBCASE("vanishes on the symmetry axis") {
        for (double z : {0.0, 0.1, 1.0, 8.2}) {
            const auto s = weak_momentum_exact(c, 0.0, z);
            CHECK(s.valid);
            CHECK(s.kx_weak == 0.0);
        }
    }
    SUBCASE("k * slope equals kx exactly") {
        for (double x : {-3e-3, 1e-4, 2e-3}) {
            const auto s = weak_momentum_exact(c, x, 2.0);
            CHECK(s.kx_weak == c.wavenumber * s.slope);
        }
    }
    SUBCASE("single Gaussian follows the curvature law") {
        const auto s = single_slit();
        const double zr = s.rayleigh_range();
        const double centre = 0.5 * s.slit_separation;
        for (double z : {0.0, 0.01, zr, 5.0}) {
            for (double u : {-2e-4, 0.0, 5e-5, 3e-4}) {
                const double expected = u * z / (z * z + zr * zr);
                CHECK(slope_of(s, centre + u, z) ==
                      doctest::Approx(expected).epsilon(1e-12).scale(1e-18));
            }
        }
    }
    SUBCASE("matches the finite-difference phase gradient") {
        for (double z : {0.05, 1.0, 6.0}) {
            for (double x : {-4e-4, 1.3e-4, 7e-4}) {
                const double h = 1e-9;
                CHECK(weak_momentum_exact(c, x, z).kx_weak ==
                      doctest::Approx(phase_gradient_fd(c, x, z, h)).epsilon(1e-5));
            }
        }
    }
    SUBCASE("far field: slope is x / z at a fringe maximum") {
        const double z = 8.2;
        const double zr = c.rayleigh_range();
        const double D = z * z + zr * zr;
        const double spacing = 2.0 * std::numbers::pi * D / (c.wavenumber * c.slit_separation * z);
        for (int n : {1, 2, 3}) {
            const double x = n * spacing;
            CHECK(weak_momentum_exact(c, x, z).kx_weak ==
                  doctest::Approx(c.wavenumber * x / z).epsilon(0.01));
        }
    }
    SUBCASE("exact node is flagged, not divided") {
        const auto odd = OpticalConfig::make(1e-6, 500e-6, 100e-6, 1.0, -1.0);
        const auto s = weak_momentum_exact(odd, 0.0, 3.0);
        CHECK_FALSE(s.valid);
        CHECK(s.slope == 0.0);
        CHECK(s.kx_weak == 0.0);
    }
    SUBCASE("non-finite input never throws") {
        CHECK_FALSE(weak_momentum_exact(c, std::nan(""), 1.0).valid);
        CHECK_FALSE(weak_momentum_exact(c, 0.0, -1.0).valid);
        CHECK_FALSE(weak_momentum_exact(c, 1.0, 1.0).valid);  // deep tail: below node threshold
    }
}

TEST_CASE("flow satisfies the continuity equation") {
    // d|psi|^2/dz + d(|psi|^2 v)/dx = 0, both derivatives by central differences.
    const auto c = default_config();
    for (double z : {0.2, 1.5, 6.0}) {
        const double w = c.beam_width(z);
        for (double x : {-0.7 * w, 0.1 * w, 0.45 * w}) {
            const double hz = 1e-5 * z;
            const double hx = 1e-4 * c.slit_waist;
            auto u = [&](double xx, double zz) { return std::norm(evaluate_field(c, xx, zz)); };
            auto flux = [&](double xx) { return u(xx, z) * weak_momentum_exact(c, xx, z).slope; };
            const double du_dz = (u(x, z + hz) - u(x, z - hz)) / (2 * hz);
            const double dflux_dx = (flux(x + hx) - flux(x - hx)) / (2 * hx);
            const double scale = std::abs(du_dz) + std::abs(dflux_dx) + 1e-30;
            CHECK(std::abs(du_dz + dflux_dx) / scale < 1e-4);
        }
    }
}

TEST_CASE("trace_trajectory") {
    const auto c = default_config();

    SUBCASE("axis trajectory stays on the axis") {
        const auto t = trace_trajectory(c, 0.0, 0.0, 8.2, 500);
        CHECK(t.complete());
        CHECK(t.points.size() == 501);
        for (const auto& p : t.points) CHECK(p.x == 0.0);
        CHECK(t.back().z == 8.2);
    }
    SUBCASE("single Gaussian: start one waist off centre tracks the beam width") {
        const auto s = single_slit();
        const double centre = 0.5 * s.slit_separation;
        for (double z1 : {s.rayleigh_range(), 2.0, 8.2}) {
            const auto t = trace_trajectory(s, centre + s.slit_waist, 0.0, z1, 2000);
            REQUIRE(t.complete());
            CHECK(t.back().x - centre == doctest::Approx(s.beam_width(z1)).epsilon(1e-4));
        }
    }
    SUBCASE("RK4 error shrinks at fourth order") {
        const double x0 = 0.5 * c.slit_separation + 0.5 * c.slit_waist;
        const double z1 = 0.5;
        const double ref = trace_trajectory(c, x0, 0.0, z1, 10000).back().x;
        const double e200 = std::abs(trace_trajectory(c, x0, 0.0, z1, 200).back().x - ref);
        const double e400 = std::abs(trace_trajectory(c, x0, 0.0, z1, 400).back().x - ref);
        REQUIRE(e200 > 1e-13);
        CHECK(e200 / e400 >= 8.0);
    }
    SUBCASE("starting on a node stops immediately") {
        const auto odd = OpticalConfig::make(1e-6, 500e-6, 100e-6, 1.0, -1.0);
        const auto t = trace_trajectory(odd, 0.0, 1.0, 2.0, 10);
        CHECK(t.status == TrajectoryStatus::node_encountered);
        CHECK(t.points.size() == 1);
    }
    SUBCASE("argument errors") {
        CHECK_THROWS_AS(trace_trajectory(c, 0.0, 1.0, 1.0, 10), ConfigError);
        CHECK_THROWS_AS(trace_trajectory(c, 0.0, 0.0, 1.0, 0), ConfigError);
        CHECK_THROWS_AS(trace_trajectory(c, std::nan(""), 0.0, 1.0, 10), ConfigError);
    }
}

TEST_CASE("trace_through agrees with dense tracing at the knots") {
    const auto c = default_config();
    const double x0 = 0.5 * c.slit_separation - 0.3 * c.slit_waist;
    const std::vector<double> knots{0.0, 1.0, 2.75, 5.0, 8.2};
    const auto coarse = trace_through(c, x0, knots, 2.5e-4);
    REQUIRE(coarse.complete());
    REQUIRE(coarse.points.size() == knots.size());
    for (std::size_t j = 1; j < knots.size(); ++j) {
        CHECK(coarse.points[j].z == knots[j]);
        const double ref = trace_trajectory(c, x0, 0.0, knots[j], 40000).back().x;
        CHECK(coarse.points[j].x == doctest::Approx(ref).epsilon(1e-7));
    }
    const std::vector<double> bad{0.0, 2.0, 2.0};
    CHECK_THROWS_AS(trace_through(c, x0, bad, 0.01), ConfigError);
}

TEST_CASE("trace_bundle") {
    const auto c = default_config();

    SUBCASE("singleton bundle equals the single trajectory") {
        const std::vector<double> x0{1e-4};
        const auto b = trace_bundle(c, x0, 0.0, 2.0, 100);
        const auto t = trace_trajectory(c, 1e-4, 0.0, 2.0, 100);
        REQUIRE(b.size() == 1);
        CHECK(b[0].back().x == t.back().x);
        CHECK(b[0].weight == doctest::Approx(std::norm(evaluate_field(c, 1e-4, 0.0))));
    }
    SUBCASE("flow lines keep their order and their side of the axis") {
        const auto seeds = slit_seed_positions(c, 20);
        REQUIRE(seeds.size() == 40);
        const auto b = trace_bundle(c, seeds, 0.0, 8.2, 2000, 2);
        CHECK(count_order_inversions(b) == 0);
        for (std::size_t i = 0; i < b.size(); ++i) {
            CHECK(b[i].complete());
            CHECK(b[i].points.size() == 2001);
            CHECK(std::signbit(b[i].back().x) == std::signbit(seeds[i]));
        }
    }
    SUBCASE("thread count does not change the result") {
        const auto seeds = slit_seed_positions(c, 5);
        const auto one = trace_bundle(c, seeds, 0.0, 3.0, 300, 1);
        const auto four = trace_bundle(c, seeds, 0.0, 3.0, 300, 4);
        for (std::size_t i = 0; i < one.size(); ++i) {
            CHECK(one[i].back().x == four[i].back().x);
        }
    }
    SUBCASE("starts must increase") {
        const std::vector<double> x0{1e-4, 1e-4};
        CHECK_THROWS_AS(trace_bundle(c, x0, 0.0, 1.0, 10), ConfigError);
    }
}

TEST_CASE("slit_seed_positions and order inversions") {
    const auto c = default_config();
    const auto xs = slit_seed_positions(c, 4);
    REQUIRE(xs.size() == 8);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(xs[i] == doctest::Approx(-xs[xs.size() - 1 - i]));
        if (i > 0) CHECK(xs[i] > xs[i - 1]);
    }
    CHECK(xs.front() == doctest::Approx(-0.5 * c.slit_separation - 2 * c.slit_waist));
    CHECK_THROWS_AS(slit_seed_positions(c, 0), ConfigError);

    Trajectory a;
    a.points = {{0.0, 0.0}, {1.0, 2.0}};
    Trajectory b;
    b.points = {{0.0, 1.0}, {1.0, 1.0}};
    const std::vector<Trajectory> crossed{a, b};
    CHECK(count_order_inversions(crossed) == 1);
}
