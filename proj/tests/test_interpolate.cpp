#include <cmath>

#include "doctest.h"
#include "weakpath/errors.hpp"
#include "weakpath/interpolate.hpp"

using namespace weakpath;

namespace {

struct Profile {
    UniformGrid grid;
    std::vector<double> y;
    std::vector<unsigned char> valid;
};

template <class F>
Profile sample(F f, std::size_t n = 64) {
    Profile p{UniformGrid{0.0, 1.0 / static_cast<double>(n - 1), n}, {}, std::vector<unsigned char>(n, 1)};
    for (std::size_t i = 0; i < n; ++i) p.y.push_back(f(p.grid.at(i)));
    return p;
}

}  // namespace

TEST_CASE("interpolant passes through the samples") {
    auto p = sample([](double x) { return std::sin(5 * x) + x * x; });
    MaskedInterpolator f(p.grid, p.y, p.valid, 5);
    for (std::size_t i = 0; i < p.grid.n; ++i) CHECK(*f(p.grid.at(i)) == doctest::Approx(p.y[i]).epsilon(1e-14));
    CHECK(f.x_first_valid() == 0.0);
    CHECK(f.x_last_valid() == p.grid.at(p.grid.n - 1));
}

TEST_CASE("linear data is reproduced exactly") {
    auto p = sample([](double x) { return 3.0 * x - 1.0; });
    MaskedInterpolator f(p.grid, p.y, p.valid, 5);
    for (double x : {0.001, 0.3333, 0.5, 0.9999}) CHECK(*f(x) == doctest::Approx(3.0 * x - 1.0).epsilon(1e-13));
}

TEST_CASE("monotone data stays monotone between samples") {
    // A step-like profile where an unconstrained cubic would overshoot.
    auto p = sample([](double x) { return x < 0.5 ? 0.0 : 1.0; }, 20);
    MaskedInterpolator f(p.grid, p.y, p.valid, 5);
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = *f(i / 1000.0);
        CHECK(v >= prev - 1e-15);
        CHECK(v >= -1e-15);
        CHECK(v <= 1.0 + 1e-15);
        prev = v;
    }
}

TEST_CASE("smooth data converges as the grid refines") {
    auto err = [](std::size_t n) {
        auto p = sample([](double x) { return std::sin(4 * x); }, n);
        MaskedInterpolator f(p.grid, p.y, p.valid, 5);
        double worst = 0.0;
        for (int i = 1; i < 2000; ++i) {
            const double x = 0.1 + 0.8 * i / 2000.0;
            worst = std::max(worst, std::abs(*f(x) - std::sin(4 * x)));
        }
        return worst;
    };
    const double coarse = err(33);
    const double fine = err(65);
    CHECK(coarse < 5e-3);
    CHECK(coarse / fine > 3.5);  // at least second order in the interior
}

TEST_CASE("masked gaps") {
    auto p = sample([](double x) { return 2.0 * x; }, 40);

    SUBCASE("short gap is bridged linearly") {
        for (std::size_t i = 10; i < 14; ++i) p.valid[i] = 0;  // four cells
        MaskedInterpolator f(p.grid, p.y, p.valid, 5);
        const double x = p.grid.at(12);
        REQUIRE(f(x).has_value());
        CHECK(*f(x) == doctest::Approx(2.0 * x).epsilon(1e-13));
    }
    SUBCASE("gap of the bridge width is not bridged") {
        for (std::size_t i = 10; i < 15; ++i) p.valid[i] = 0;  // five cells
        MaskedInterpolator f(p.grid, p.y, p.valid, 5);
        CHECK_FALSE(f(p.grid.at(12)).has_value());
        CHECK(f(p.grid.at(9)).has_value());
        CHECK(f(p.grid.at(15)).has_value());
    }
    SUBCASE("strict policy refuses any gap") {
        p.valid[20] = 0;
        MaskedInterpolator f(p.grid, p.y, p.valid, 0);
        CHECK_FALSE(f(p.grid.at(20)).has_value());
        CHECK_FALSE(f(0.5 * (p.grid.at(19) + p.grid.at(20))).has_value());
        CHECK(f(0.5 * (p.grid.at(18) + p.grid.at(19))).has_value());
    }
    SUBCASE("non-finite samples count as masked") {
        p.y[5] = std::nan("");
        MaskedInterpolator f(p.grid, p.y, p.valid, 0);
        CHECK_FALSE(f(p.grid.at(5)).has_value());
    }
}

TEST_CASE("outside the valid range") {
    auto p = sample([](double x) { return x; }, 10);
    p.valid[0] = 0;
    p.valid[9] = 0;
    MaskedInterpolator f(p.grid, p.y, p.valid, 5);
    CHECK_FALSE(f(p.grid.at(0)).has_value());
    CHECK_FALSE(f(p.grid.at(9)).has_value());
    CHECK_FALSE(f(-1.0).has_value());
    CHECK_FALSE(f(std::nan("")).has_value());
    CHECK(f(p.grid.at(8)).has_value());

    std::vector<unsigned char> none(10, 0);
    MaskedInterpolator empty(p.grid, p.y, none, 5);
    CHECK(empty.empty());
    CHECK_FALSE(empty(0.5).has_value());
}

TEST_CASE("size mismatch") {
    auto p = sample([](double x) { return x; }, 10);
    p.y.pop_back();
    CHECK_THROWS_AS(MaskedInterpolator(p.grid, p.y, p.valid, 5), ConfigError);
}
