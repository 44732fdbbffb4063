#include <cmath>
#include <string>

#include "doctest.h"
#include "weakpath/errors.hpp"
#include "weakpath/reconstruct.hpp"

using namespace weakpath;

namespace {

const OpticalConfig& cfg() {
    static const OpticalConfig c = default_config();
    return c;
}

const UniformGrid& plane_grid() {
    static const UniformGrid g = resolve_grid(cfg(), GridSpec{8192, 0.0}, 8.2);
    return g;
}

Trajectory line(std::initializer_list<TrajectoryPoint> pts) {
    Trajectory t;
    t.points = pts;
    return t;
}

}  // namespace

TEST_CASE("equally_spaced_planes") {
    const auto z = equally_spaced_planes(41, 2.75, 8.2);
    REQUIRE(z.size() == 41);
    CHECK(z.front() == 2.75);
    CHECK(z.back() == 8.2);
    for (std::size_t i = 1; i < z.size(); ++i) CHECK(z[i] - z[i - 1] == doctest::Approx(5.45 / 40));
    CHECK_THROWS_AS(equally_spaced_planes(1, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(equally_spaced_planes(3, 2.0, 1.0), ConfigError);
}

TEST_CASE("build_dataset") {
    const CalciteParams p{0.05, 0.0};

    SUBCASE("one record per plane, in order") {
        const auto z = equally_spaced_planes(41, 2.75, 8.2);
        const auto set = build_dataset(cfg(), z, p, plane_grid(), std::nullopt, 0);
        REQUIRE(set.planes.size() == 41);
        for (std::size_t i = 0; i < z.size(); ++i) {
            CHECK(set.planes[i].z == z[i]);
            CHECK(set.planes[i].stream == i);
            CHECK(set.planes[i].momentum.valid_count() > 0);
        }
        CHECK_NOTHROW(set.validate());
    }
    SUBCASE("two planes are enough; one is not") {
        const std::vector<double> two{3.0, 4.0};
        CHECK(build_dataset(cfg(), two, p, plane_grid(), std::nullopt, 0).planes.size() == 2);
        const std::vector<double> one{3.0};
        CHECK_THROWS_AS(build_dataset(cfg(), one, p, plane_grid(), std::nullopt, 0), ConfigError);
        const std::vector<double> unordered{4.0, 3.0};
        CHECK_THROWS_AS(build_dataset(cfg(), unordered, p, plane_grid(), std::nullopt, 0), ConfigError);
    }
    SUBCASE("noisy datasets do not depend on the thread count") {
        const auto z = equally_spaced_planes(6, 2.75, 8.2);
        const auto a = build_dataset(cfg(), z, p, plane_grid(), 1e7, 123, MomentumSource::extracted, 1);
        const auto b = build_dataset(cfg(), z, p, plane_grid(), 1e7, 123, MomentumSource::extracted, 3);
        for (std::size_t i = 0; i < z.size(); ++i) {
            CHECK(a.planes[i].i_left == b.planes[i].i_left);
            CHECK(a.planes[i].i_right == b.planes[i].i_right);
        }
        CHECK(a.planes[0].i_left != a.planes[1].i_left);
    }
    SUBCASE("a failing plane is named in the error") {
        const std::vector<double> z{1.0, 50.0};
        try {
            build_dataset(cfg(), z, p, plane_grid(), std::nullopt, 0);
            FAIL("expected a diagnostic");
        } catch (const NumericalDiagnostic& e) {
            CHECK(std::string(e.what()).find("imaging plane 1") != std::string::npos);
        }
    }
}

TEST_CASE("reconstruct_trajectories") {
    const CalciteParams p{0.05, 0.0};

    SUBCASE("two planes: one explicit step by hand") {
        const std::vector<double> z{3.0, 3.5};
        const auto set = build_dataset(cfg(), z, p, plane_grid(), std::nullopt, 0, MomentumSource::exact);
        const auto& g = plane_grid();
        const std::vector<double> x0{g.at(g.n / 2 + 40), g.at(g.n / 2 + 300)};
        const auto t = reconstruct_trajectories(set, x0, cfg().wavenumber);
        REQUIRE(t.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            REQUIRE(t[i].points.size() == 2);
            CHECK(t[i].kind == TrajectoryKind::reconstructed);
            CHECK(t[i].complete());
            const double expected = x0[i] + 0.5 * weak_momentum_exact(cfg(), x0[i], 3.0).slope;
            CHECK(t[i].points[1].x == doctest::Approx(expected).epsilon(1e-14));
            CHECK(t[i].points[1].z == 3.5);
        }
    }
    SUBCASE("injected exact momentum on dense planes reproduces the flow lines") {
        const auto z = equally_spaced_planes(400, 2.75, 8.2);
        const auto set = build_dataset(cfg(), z, p, plane_grid(), std::nullopt, 0, MomentumSource::exact);
        const double w = cfg().beam_width(2.75);
        std::vector<double> starts;
        for (int i = -10; i <= 10; ++i) starts.push_back(0.09 * w * i + 1e-7);
        const auto exact = trace_bundle_through(cfg(), starts, z, 8.2 / 4000);
        const auto recon = reconstruct_trajectories(set, starts, cfg().wavenumber);
        const double fringe = far_field_fringe_spacing(cfg(), 8.2);
        const auto report = compare_trajectories(recon, exact, fringe);
        CHECK(report.coverage == 1.0);
        CHECK(report.crossing_count == 0);
        CHECK(report.rms_overall < 1e-3 * fringe);
    }
    SUBCASE("strict policy stops at a masked gap that bridging crosses") {
        const std::vector<double> z{3.0, 3.2, 3.4};
        auto set = build_dataset(cfg(), z, p, plane_grid(), std::nullopt, 0, MomentumSource::exact);
        const auto& g = plane_grid();
        const std::size_t c = g.n / 2 + 100;
        const double start = g.at(c);
        // Mask two cells around where the line lands on the middle plane.
        const double x1 = start + 0.2 * weak_momentum_exact(cfg(), start, 3.0).slope;
        const auto j = static_cast<std::size_t>(std::floor((x1 - g.x_min) / g.dx));
        set.planes[1].momentum.valid[j] = 0;
        set.planes[1].momentum.valid[j + 1] = 0;
        const std::vector<double> x0{start};
        const auto bridged = reconstruct_trajectories(set, x0, cfg().wavenumber, MaskPolicy::bridge);
        const auto strict = reconstruct_trajectories(set, x0, cfg().wavenumber, MaskPolicy::strict);
        CHECK(bridged[0].complete());
        CHECK(bridged[0].points.size() == 3);
        CHECK(strict[0].status == TrajectoryStatus::missing_data);
        CHECK(strict[0].points.size() == 2);
    }
    SUBCASE("walking off the measured range truncates with left_domain") {
        const std::vector<double> z{3.0, 3.2, 3.4};
        auto set = build_dataset(cfg(), z, p, plane_grid(), std::nullopt, 0, MomentumSource::exact);
        const auto& g = plane_grid();
        const std::size_t c = g.n / 2 + 100;
        for (std::size_t i = c - 50; i < g.n; ++i) set.planes[1].momentum.valid[i] = 0;
        const std::vector<double> x0{g.at(c)};
        const auto t = reconstruct_trajectories(set, x0, cfg().wavenumber);
        CHECK(t[0].status == TrajectoryStatus::left_domain);
        CHECK(t[0].points.size() == 2);
    }
    SUBCASE("start outside the first plane is a configuration error") {
        const std::vector<double> z{3.0, 3.2};
        const auto set = build_dataset(cfg(), z, p, plane_grid(), std::nullopt, 0);
        const std::vector<double> x0{10.0};
        CHECK_THROWS_AS(reconstruct_trajectories(set, x0, cfg().wavenumber), ConfigError);
    }
}

TEST_CASE("compare_trajectories") {
    const auto a = line({{1.0, 0.0}, {2.0, 1.0}, {3.0, 2.0}});
    const auto b = line({{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}});

    SUBCASE("identical lists") {
        const std::vector<Trajectory> t{a, b};
        const auto r = compare_trajectories(t, t, 1.0);
        CHECK(r.rms_overall == 0.0);
        CHECK(r.rms_final == 0.0);
        CHECK(r.crossing_count == 0);
        CHECK(r.coverage == 1.0);
        CHECK(r.final_samples == 2);
    }
    SUBCASE("constant offset after the start") {
        const double d = 0.01;
        const auto a2 = line({{1.0, 0.0}, {2.0, 1.0 + d}, {3.0, 2.0 + d}});
        const auto b2 = line({{1.0, 1.0}, {2.0, 2.0 + d}, {3.0, 3.0 + d}});
        const std::vector<Trajectory> recon{a2, b2};
        const std::vector<Trajectory> exact{a, b};
        const auto r = compare_trajectories(recon, exact, 0.5);
        CHECK(r.rms_final == doctest::Approx(d));
        CHECK(r.rms_overall == doctest::Approx(d * std::sqrt(2.0 / 3.0)));
        CHECK(r.max_deviation == doctest::Approx(d));
        CHECK(r.per_trajectory[0].samples == 3);
    }
    SUBCASE("exact lines are interpolated at the reconstructed planes") {
        const auto dense = line({{1.0, 0.0}, {3.0, 2.0}});
        const std::vector<Trajectory> recon{a};
        const std::vector<Trajectory> exact{dense};
        CHECK(compare_trajectories(recon, exact, 1.0).rms_overall == doctest::Approx(0.0).scale(1e-15));
    }
    SUBCASE("crossings and truncated coverage") {
        const auto crossing = line({{1.0, 1.0}, {2.0, 0.5}});
        Trajectory short_b = crossing;
        short_b.status = TrajectoryStatus::missing_data;
        const std::vector<Trajectory> recon{a, short_b};
        const std::vector<Trajectory> exact{a, b};
        const auto r = compare_trajectories(recon, exact, 1.0);
        CHECK(r.crossing_count == 1);
        CHECK(r.coverage == doctest::Approx(3.0 / 4.0));
    }
    SUBCASE("errors") {
        const std::vector<Trajectory> one{a};
        const std::vector<Trajectory> two{a, b};
        CHECK_THROWS_AS(compare_trajectories(one, two, 1.0), ConfigError);
        const std::vector<Trajectory> swapped{b};
        CHECK_THROWS_AS(compare_trajectories(swapped, one, 1.0), ConfigError);
        CHECK_THROWS_AS(compare_trajectories(one, one, 0.0), ConfigError);
    }
}

TEST_CASE("position_at and fringe spacing") {
    const auto a = line({{1.0, 0.0}, {2.0, 1.0}});
    CHECK(*position_at(a, 1.5) == 0.5);
    CHECK(*position_at(a, 2.0) == 1.0);
    CHECK_FALSE(position_at(a, 2.5).has_value());
    CHECK(far_field_fringe_spacing(cfg(), 8.2) == doctest::Approx(1e-6 * 8.2 / 500e-6));
}
