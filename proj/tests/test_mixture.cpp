#include <doctest.h>

#include <cmath>

#include "pixcal/mixture.hpp"
#include "pixcal/rng.hpp"

using namespace pixcal;

namespace {

LaplacianMixture1D single(double mu, double beta) {
    return LaplacianMixture1D({1.0}, {mu}, {beta});
}

RayForecast uniform_forecast(double mu, double beta) {
    return RayForecast(single(mu, beta), single(mu, beta), single(mu, beta));
}

// seeded random mixture for property checks
LaplacianMixture1D random_mixture(Rng& rng) {
    const int m = 1 + static_cast<int>(rng.below(4));
    std::vector<double> w(m), mu(m), beta(m);
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
        w[j] = rng.uniform(0.05, 1.0);
        sum += w[j];
        mu[j] = rng.uniform(-2.0, 2.0);
        beta[j] = rng.uniform(0.02, 1.5);
    }
    for (double& x : w) x /= sum;
    return LaplacianMixture1D(w, mu, beta);
}

} // namespace

TEST_CASE("mixture validation") {
    CHECK_THROWS_AS(LaplacianMixture1D({0.5, 0.6}, {0.0, 1.0}, {1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(LaplacianMixture1D({1.0}, {0.0}, {0.0}), ValidationError);
    CHECK_THROWS_AS(LaplacianMixture1D({1.0}, {0.0, 1.0}, {1.0}), ValidationError);
    CHECK_THROWS_AS(LaplacianMixture1D({}, {}, {}), ValidationError);
    // round-off within 1e-9 is renormalized
    const LaplacianMixture1D m({0.5, 0.5 + 5e-10}, {0.0, 1.0}, {1.0, 1.0});
    CHECK(m.weights()[0] + m.weights()[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mixture cdf closed-form values") {
    CHECK(single(0, 1).cdf(0.0) == doctest::Approx(0.5));
    CHECK(single(0, 1).cdf(std::log(2.0)) == doctest::Approx(0.75).epsilon(1e-12));
    const LaplacianMixture1D two({0.5, 0.5}, {-1.0, 1.0}, {1.0, 1.0});
    CHECK(two.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(two.cdf(1.0) ==
          doctest::Approx(0.5 * (1.0 - 0.5 * std::exp(-2.0)) + 0.25).epsilon(1e-12));
}

TEST_CASE("mixture pdf values and tails") {
    CHECK(single(0, 1).pdf(0.0) == doctest::Approx(0.5));
    CHECK(single(0, 2).pdf(0.0) == doctest::Approx(0.25));
    CHECK(single(0.3, 0.1).pdf(50.0) == doctest::Approx(0.0));
    CHECK(single(0.3, 0.1).pdf(-50.0) == doctest::Approx(0.0));
}

TEST_CASE("mixture quantile") {
    CHECK(single(0, 1).quantile(0.75) == doctest::Approx(std::log(2.0)).epsilon(1e-8));
    CHECK(single(0, 1).quantile(0.25) == doctest::Approx(-std::log(2.0)).epsilon(1e-8));
    CHECK_THROWS_AS(single(0, 1).quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(single(0, 1).quantile(1.0), std::domain_error);
}

TEST_CASE("quantile round trip both directions") {
    Rng rng(991);
    for (int trial = 0; trial < 25; ++trial) {
        const auto mix = random_mixture(rng);
        for (double q : {0.05, 0.25, 0.5, 0.9}) {
            const double x = mix.quantile(q);
            CHECK(mix.cdf(x) == doctest::Approx(q).epsilon(1e-8));
        }
        const double x0 = rng.uniform(-1.5, 1.5);
        CHECK(mix.quantile(mix.cdf(x0)) == doctest::Approx(x0).epsilon(1e-6));
    }
}

TEST_CASE("cdf is nondecreasing") {
    Rng rng(1234);
    for (int trial = 0; trial < 40; ++trial) {
        const auto mix = random_mixture(rng);
        double x1 = rng.uniform(-4.0, 4.0);
        double x2 = rng.uniform(-4.0, 4.0);
        if (x1 > x2) std::swap(x1, x2);
        CHECK(mix.cdf(x1) <= mix.cdf(x2));
    }
}

TEST_CASE("pdf integrates to one") {
    // a 12-scale bracket misses e^-12 ~ 6e-6 of tail mass, more than the 1e-6
    // target, so the bracket uses 16 scales (tail < 2e-7)
    Rng rng(555);
    for (int trial = 0; trial < 5; ++trial) {
        const auto mix = random_mixture(rng);
        double lo = 1e300, hi = -1e300;
        for (size_t j = 0; j < mix.locations().size(); ++j) {
            lo = std::min(lo, mix.locations()[j] - 16.0 * mix.scales()[j]);
            hi = std::max(hi, mix.locations()[j] + 16.0 * mix.scales()[j]);
        }
        const int n = 400000;
        const double dx = (hi - lo) / n;
        double integral = 0.0;
        for (int i = 0; i <= n; ++i)
            integral += mix.pdf(lo + dx * i) * ((i == 0 || i == n) ? 0.5 : 1.0);
        integral *= dx;
        CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("cdf finite difference matches pdf away from kinks") {
    Rng rng(777);
    for (int trial = 0; trial < 20; ++trial) {
        const auto mix = random_mixture(rng);
        const double x = rng.uniform(-3.0, 3.0);
        bool near_kink = false;
        for (double mu : mix.locations())
            if (std::fabs(x - mu) < 1e-3) near_kink = true;
        if (near_kink) continue;
        const double h = 1e-6;
        const double fd = (mix.cdf(x + h) - mix.cdf(x - h)) / (2.0 * h);
        CHECK(fd == doctest::Approx(mix.pdf(x)).epsilon(1e-5));
    }
}

TEST_CASE("mixture moments") {
    CHECK(LaplacianMixture1D({0.3, 0.7}, {0.0, 1.0}, {1.0, 1.0}).moments().first ==
          doctest::Approx(0.7));
    CHECK(LaplacianMixture1D({0.5, 0.5}, {0.0, 1.0}, {1.0, 1.0}).moments().second ==
          doctest::Approx(2.25));
    CHECK(single(5, 1).moments().second == doctest::Approx(2.0));
}

TEST_CASE("sampling: determinism and moment convergence") {
    const auto mix = single(0, 1);
    const auto a = mix.sample(42, 100000);
    const auto b = mix.sample(42, 100000);
    CHECK(a == b);

    double mean = 0.0;
    for (double x : a) mean += x;
    mean /= static_cast<double>(a.size());
    CHECK(std::fabs(mean) < 0.02);

    double var = 0.0;
    for (double x : a) var += (x - mean) * (x - mean);
    var /= static_cast<double>(a.size());
    CHECK(std::fabs(var - 2.0) < 0.1);
}

TEST_CASE("sample variance tracks closed-form moments within 5%") {
    Rng rng(31337);
    for (int trial = 0; trial < 3; ++trial) {
        const auto mix = random_mixture(rng);
        const auto draws = mix.sample(1000 + static_cast<std::uint64_t>(trial), 100000);
        double mean = 0.0;
        for (double x : draws) mean += x;
        mean /= static_cast<double>(draws.size());
        double var = 0.0;
        for (double x : draws) var += (x - mean) * (x - mean);
        var /= static_cast<double>(draws.size());
        CHECK(var == doctest::Approx(mix.moments().second).epsilon(0.05));
    }
}

TEST_CASE("ray forecast weight sharing is enforced") {
    CHECK_THROWS_AS(RayForecast(single(0, 1), single(0, 1),
                                LaplacianMixture1D({0.5, 0.5}, {0.0, 1.0}, {1.0, 1.0})),
                    ValidationError);
}

TEST_CASE("forecast nll") {
    std::vector<RayForecast> forecasts;
    std::vector<Rgb> truths;
    for (int i = 0; i < 4; ++i) {
        forecasts.push_back(uniform_forecast(0.5, 1.0));
        truths.push_back({0.5, 0.5, 0.5});
    }
    CHECK(forecast_nll(forecasts, truths) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // beta = 0.5 at the mode -> density 1 -> NLL 0
    std::vector<RayForecast> sharp{uniform_forecast(0.5, 0.5)};
    std::vector<Rgb> one{{0.5, 0.5, 0.5}};
    CHECK(forecast_nll(sharp, one) == doctest::Approx(0.0));

    // identity calibration leaves the NLL unchanged
    const std::array<IsotonicMap, 3> identity{IsotonicMap::identity(), IsotonicMap::identity(),
                                              IsotonicMap::identity()};
    CHECK(forecast_nll(forecasts, truths, &identity) ==
          doctest::Approx(forecast_nll(forecasts, truths)).epsilon(1e-15));

    truths.pop_back();
    CHECK_THROWS_AS(forecast_nll(forecasts, truths), ValidationError);
}
