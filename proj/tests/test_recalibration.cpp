#include <doctest.h>

#include <cmath>

#include "pixcal/recalibration.hpp"
#include "pixcal/rng.hpp"

using namespace pixcal;

namespace {

LaplacianMixture1D single(double mu, double beta) {
    return LaplacianMixture1D({1.0}, {mu}, {beta});
}

IsotonicMap steep_tail_map() {
    return IsotonicMap::from_knots({0.0, 0.05, 0.95, 1.0}, {0.0, 0.25, 0.75, 1.0});
}

} // namespace

TEST_CASE("pool adjacent violators") {
    CHECK(pool_adjacent_violators({0.8, 0.2}, {1.0, 1.0}) == std::vector<double>{0.5, 0.5});
    CHECK(pool_adjacent_violators({0.1, 0.5, 0.9}, {1.0, 1.0, 1.0}) ==
          std::vector<double>{0.1, 0.5, 0.9});
    // weighted pooling
    const auto fitted = pool_adjacent_violators({1.0, 0.0}, {3.0, 1.0});
    CHECK(fitted[0] == doctest::Approx(0.75));
    CHECK(fitted[1] == doctest::Approx(0.75));
}

TEST_CASE("isotonic map evaluation, inversion, derivative") {
    const auto map = IsotonicMap::from_knots({0.0, 0.5, 1.0}, {0.0, 0.25, 1.0});
    CHECK(map(0.0) == 0.0);
    CHECK(map(1.0) == 1.0);
    CHECK(map(0.5) == 0.25);
    CHECK(map(0.25) == doctest::Approx(0.125));
    CHECK(map.invert(0.25) == doctest::Approx(0.5));
    CHECK(map.derivative(0.2) == doctest::Approx(0.5));
    CHECK(map.derivative(0.7) == doctest::Approx(1.5));
    CHECK(map.derivative(1.0) == doctest::Approx(1.5));

    // plateau inversion at the midpoint
    const auto plat = IsotonicMap::from_knots({0.0, 0.3, 0.7, 1.0}, {0.0, 0.25, 0.25, 1.0});
    CHECK(plat.invert(0.25) == doctest::Approx(0.5));

    CHECK_THROWS_AS(map.invert(0.0), std::domain_error);
    CHECK_THROWS_AS(IsotonicMap::from_knots({0.1, 1.0}, {0.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(IsotonicMap::from_knots({0.0, 0.5, 1.0}, {0.0, 1.2, 1.0}), ValidationError);
}

TEST_CASE("predicted confidence") {
    const RayForecast f(single(0.25, 1.0), single(0.5, 1.0), single(0.75, 1.0));
    const auto p = predicted_confidence(f, {0.25, 0.5, 0.75});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK(p[2] == doctest::Approx(0.5));

    const RayForecast g(single(0.0, 1.0), single(0.0, 1.0), single(0.0, 1.0));
    CHECK(predicted_confidence(g, {std::log(2.0), 0.0, 0.0})[0] ==
          doctest::Approx(0.75).epsilon(1e-12));

    const RayForecast far(single(0.9, 0.01), single(0.9, 0.01), single(0.9, 0.01));
    CHECK(predicted_confidence(far, {0.0, 0.0, 0.0})[0] < 1e-10);
}

TEST_CASE("empirical confidence") {
    const std::vector<double> levels{0.1, 0.5, 0.9};
    CHECK(empirical_confidence(levels, 0.5) == doctest::Approx(2.0 / 3.0));
    CHECK(empirical_confidence(levels, 1.0) == doctest::Approx(1.0));
    CHECK(empirical_confidence(levels, 0.05) == doctest::Approx(0.0));
    CHECK_THROWS_AS(empirical_confidence({}, 0.5), ValidationError);
}

TEST_CASE("recalibration pairs") {
    const auto pairs = recalibration_pairs_from_levels({0.4});
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].predicted == doctest::Approx(0.4));
    CHECK(pairs[0].empirical == doctest::Approx(1.0));

    // pairs come out sorted by predicted level
    const auto sorted = recalibration_pairs_from_levels({0.9, 0.1, 0.5});
    CHECK(sorted[0].predicted == doctest::Approx(0.1));
    CHECK(sorted[2].predicted == doctest::Approx(0.9));
    CHECK(sorted[0].empirical == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("perfectly calibrated forecaster stays near the diagonal") {
    // truths drawn from the forecast distribution itself, T = 1e4
    Rng rng(2024);
    const int t = 10000;
    std::vector<double> levels(t);
    for (int i = 0; i < t; ++i) {
        const double x = rng.laplace(0.5, 0.1);
        levels[static_cast<size_t>(i)] = single(0.5, 0.1).cdf(x);
    }
    for (const auto& pair : recalibration_pairs_from_levels(levels))
        CHECK(std::fabs(pair.predicted - pair.empirical) < 0.02);
}

TEST_CASE("fit isotonic") {
    // monotone pairs are reproduced apart from anchors
    const std::vector<ConfidencePair> mono{{0.2, 0.1}, {0.6, 0.7}};
    const auto map = fit_isotonic(mono);
    CHECK(map.inputs() == std::vector<double>{0.0, 0.2, 0.6, 1.0});
    CHECK(map(0.2) == doctest::Approx(0.1));
    CHECK(map(0.6) == doctest::Approx(0.7));

    // violating pair is pooled
    const auto pooled = fit_isotonic({{0.2, 0.8}, {0.8, 0.2}});
    CHECK(pooled(0.2) == doctest::Approx(0.5));
    CHECK(pooled(0.8) == doctest::Approx(0.5));

    // diagonal pairs evaluate to the identity on the knots
    std::vector<ConfidencePair> diag;
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) diag.push_back({p, p});
    const auto id = fit_isotonic(diag);
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9})
        CHECK(id(p) == doctest::Approx(p).epsilon(1e-12));
    CHECK_THROWS_AS(fit_isotonic({}), ValidationError);
}

TEST_CASE("calibrated quantile") {
    const auto mix = single(0.0, 1.0);
    CHECK(calibrated_quantile(IsotonicMap::identity(), mix, 0.75) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-8));

    const auto half = IsotonicMap::from_knots({0.0, 0.5, 1.0}, {0.0, 0.25, 1.0});
    CHECK(calibrated_quantile(half, mix, 0.25) == doctest::Approx(0.0).epsilon(1e-8));

    CHECK(calibrated_quantile(steep_tail_map(), mix, 0.75) ==
          doctest::Approx(-std::log(0.1)).epsilon(1e-8));
    CHECK_THROWS_AS(calibrated_quantile(steep_tail_map(), mix, 1.0), std::domain_error);
}

TEST_CASE("calibrated quantile is nondecreasing in q") {
    Rng rng(404);
    const LaplacianMixture1D mix({0.4, 0.6}, {-0.5, 0.7}, {0.3, 0.08});
    const auto map = steep_tail_map();
    double prev = calibrated_quantile(map, mix, 0.01);
    for (double q = 0.05; q < 1.0; q += 0.05) {
        const double cur = calibrated_quantile(map, mix, q);
        CHECK(cur >= prev - 1e-12);
        prev = cur;
    }
}

TEST_CASE("iqr uncertainty") {
    const std::array<IsotonicMap, 3> identity{IsotonicMap::identity(), IsotonicMap::identity(),
                                              IsotonicMap::identity()};
    const RayForecast f1(single(0, 1), single(0, 1), single(0, 1));
    CHECK(iqr_uncertainty(identity, f1) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-8));

    const RayForecast f2(single(0, 2), single(0, 2), single(0, 2));
    CHECK(iqr_uncertainty(identity, f2) == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-8));

    const std::array<IsotonicMap, 3> steep{steep_tail_map(), steep_tail_map(), steep_tail_map()};
    CHECK(iqr_uncertainty(steep, f1) == doctest::Approx(-2.0 * std::log(0.1)).epsilon(1e-8));
}

TEST_CASE("identity maps reproduce the uncalibrated IQR exactly") {
    const std::array<IsotonicMap, 3> identity{IsotonicMap::identity(), IsotonicMap::identity(),
                                              IsotonicMap::identity()};
    const LaplacianMixture1D mix({0.5, 0.5}, {-0.8, 0.8}, {0.05, 0.05});
    const RayForecast f(mix, mix, mix);
    const double direct = (mix.quantile(0.75) - mix.quantile(0.25));
    CHECK(iqr_uncertainty(identity, f) == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("calibration error") {
    CHECK(calibration_error({1.0 / 3.0, 2.0 / 3.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(calibration_error({0.2, 0.8}) == doctest::Approx(0.065));
    CHECK(calibration_error({0.4}) == doctest::Approx(0.36));
    CHECK_THROWS_AS(calibration_error({}), ValidationError);
}

TEST_CASE("in-sample isotonic fit never increases the calibration error") {
    Rng rng(8080);
    for (int trial = 0; trial < 10; ++trial) {
        const int t = 200 + static_cast<int>(rng.below(400));
        std::vector<double> levels(static_cast<size_t>(t));
        for (double& v : levels) v = std::pow(rng.uniform_open(), rng.uniform(0.4, 2.5));
        const double before = calibration_error(levels);
        const auto map = fit_isotonic(recalibration_pairs_from_levels(levels));
        const double after = calibration_error(apply_map(map, levels));
        CHECK(after <= before + 1e-12);
        // monotone empirical pairs make the in-sample fit exact
        CHECK(after <= 1e-18);
    }
}

TEST_CASE("composition with the forecast CDF is a valid CDF") {
    const auto map = steep_tail_map();
    const LaplacianMixture1D mix({0.3, 0.7}, {-1.0, 0.5}, {0.4, 0.2});
    double prev = 0.0;
    for (double x = -8.0; x <= 8.0; x += 0.05) {
        const double v = map(mix.cdf(x));
        CHECK(v >= prev - 1e-12);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
    CHECK(map(mix.cdf(-60.0)) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(map(mix.cdf(60.0)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("calibration reorders uncertainties (steep-tail construction)") {
    // A: wide unimodal; B: two tight modes. The steep-tail map flips their order.
    const LaplacianMixture1D a({1.0}, {0.0}, {1.0});
    const LaplacianMixture1D b({0.5, 0.5}, {-0.8, 0.8}, {0.05, 0.05});
    const RayForecast fa(a, a, a);
    const RayForecast fb(b, b, b);
    const std::array<IsotonicMap, 3> identity{IsotonicMap::identity(), IsotonicMap::identity(),
                                              IsotonicMap::identity()};
    const std::array<IsotonicMap, 3> steep{steep_tail_map(), steep_tail_map(), steep_tail_map()};

    const double iqr_a_uncal = iqr_uncertainty(identity, fa);
    const double iqr_b_uncal = iqr_uncertainty(identity, fb);
    const double iqr_a_cal = iqr_uncertainty(steep, fa);
    const double iqr_b_cal = iqr_uncertainty(steep, fb);

    CHECK(std::fabs(iqr_a_uncal - 1.386294) < 1e-3);
    CHECK(std::fabs(iqr_b_uncal - 1.600000) < 1e-3);
    CHECK(std::fabs(iqr_a_cal - 4.605170) < 1e-3);
    CHECK(std::fabs(iqr_b_cal - 1.760944) < 1e-3);
    CHECK(iqr_b_uncal > iqr_a_uncal);
    CHECK(iqr_a_cal > iqr_b_cal);
}
