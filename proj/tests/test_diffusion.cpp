#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "levcross/diffusion.hpp"
#include "levcross/errors.hpp"

using namespace levcross;

namespace {

DiffusionSpec bm() {
    return DiffusionSpec::make([](double) { return 1.0; }, [](double) { return 0.0; },
                               -std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity(),
                               BoundaryKind::open, BoundaryKind::open);
}

DiffusionSpec bm_drift(double mu) {
    return DiffusionSpec::make([](double) { return 1.0; }, [mu](double) { return mu; },
                               -std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity(),
                               BoundaryKind::open, BoundaryKind::open);
}

}  // namespace

TEST_CASE("region indicator half-open convention") {
    auto spec = bm();
    auto levels = LevelSet::make({0.0, 1.0}, spec);
    CHECK(region_of(levels, -0.5) == 0);
    CHECK(region_of(levels, 0.0) == 0);   // level belongs to the lower region
    CHECK(region_of(levels, 0.5) == 1);
    CHECK(region_of(levels, 1.0) == 1);   // right-closed (0,1]
    CHECK(region_of(levels, 1.2) == 2);
}

TEST_CASE("region indicator is a nondecreasing unit-jump staircase") {
    auto spec = bm();
    auto levels = LevelSet::make({-1.0, 0.25, 2.0}, spec);
    int prev = region_of(levels, -5.0);
    CHECK(prev == 0);
    for (double x = -5.0 + 1e-3; x <= 5.0; x += 1e-3) {
        int r = region_of(levels, x);
        CHECK(r >= prev);
        CHECK(r - prev <= 1);
        prev = r;
    }
    CHECK(prev == 3);
    // jumps happen from the left-open side of each level
    for (int i = 0; i < levels.size(); ++i) {
        double xi = levels[i];
        CHECK(region_of(levels, xi) == i);
        CHECK(region_of(levels, std::nextafter(xi, 10.0)) == i + 1);
    }
}

TEST_CASE("construction errors") {
    auto spec = bm();
    CHECK_THROWS_AS(LevelSet::make({1.0, 0.0}, spec), error);
    CHECK_THROWS_AS(LevelSet::make({}, spec), error);
    CHECK_THROWS_AS(DiffusionSpec::make([](double) { return -1.0; }, [](double) { return 0.0; },
                                        -10.0, 10.0, BoundaryKind::open, BoundaryKind::open),
                    error);
    CHECK_THROWS_AS(DiffusionSpec::make([](double) { return 1.0; },
                                        [](double) { return std::nan(""); }, -10.0, 10.0,
                                        BoundaryKind::open, BoundaryKind::open),
                    error);
    // level on the boundary of a finite interval is rejected
    auto fin = DiffusionSpec::make([](double) { return 1.0; }, [](double) { return 0.0; }, 0.0,
                                   1.0, BoundaryKind::absorbing, BoundaryKind::absorbing);
    CHECK_THROWS_AS(LevelSet::make({0.0}, fin), error);
}

TEST_CASE("scale function closed forms") {
    auto spec = bm();
    CHECK(scale_function(spec, 0.0, 2.0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(scale_function(spec, 0.0, 0.0) == 0.0);

    auto drift = bm_drift(-1.0);
    // s(x) = (e^{2x} - 1)/2 for unit diffusion with drift -1
    CHECK(scale_function(drift, 0.0, 1.0) ==
          doctest::Approx((std::exp(2.0) - 1.0) / 2.0).epsilon(1e-9));
    CHECK(scale_function(drift, 0.0, -1.0) ==
          doctest::Approx((std::exp(-2.0) - 1.0) / 2.0).epsilon(1e-9));
}

TEST_CASE("scale function is strictly increasing") {
    auto drift = bm_drift(0.75);
    double prev = scale_function(drift, 0.0, -3.0);
    for (double x = -2.5; x <= 3.0; x += 0.5) {
        double s = scale_function(drift, 0.0, x);
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("hitting probabilities") {
    auto spec = bm();
    auto levels = LevelSet::make({0.0, 1.0}, spec);
    CHECK(hitting_probability(spec, levels, 0, Dir::up) == 1.0);  // recurrence, exact
    CHECK(hitting_probability(spec, levels, 1, Dir::down) == 1.0);

    auto drift = bm_drift(-1.0);
    auto lv = LevelSet::make({0.0, 1.0}, drift);
    // P^0(H_1 < inf) = e^{-2} from the scale-function limit
    CHECK(hitting_probability(drift, lv, 0, Dir::up) ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-6));
    CHECK(hitting_probability(drift, lv, 1, Dir::down) == 1.0);

    // two absorbing barriers: plain ratio, no limit
    auto boxed = DiffusionSpec::make([](double) { return 1.0; }, [](double) { return 0.0; },
                                     -2.0, 3.0, BoundaryKind::absorbing, BoundaryKind::absorbing);
    auto blv = LevelSet::make({0.0, 1.0}, boxed);
    CHECK(hitting_probability(boxed, blv, 0, Dir::up) == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    CHECK(hitting_probability(boxed, blv, 1, Dir::down) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-8));

    CHECK_THROWS_AS(hitting_probability(spec, levels, 1, Dir::up), error);
    CHECK_THROWS_AS(hitting_probability(spec, levels, 0, Dir::down), error);
}
