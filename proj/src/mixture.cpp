#include "pixcal/mixture.hpp"

#include <algorithm>
#include <cmath>

#include "pixcal/rng.hpp"

namespace pixcal {

namespace {
constexpr double kWeightSumTol = 1e-9;
constexpr double kQuantileCdfTol = 1e-10;
constexpr double kDensityFloor = 1e-12;
constexpr double kTailScales = 40.0; // tail mass beyond 40 scales is < 1e-17
} // namespace

double laplace_cdf(double x, double location, double scale) {
    const double z = (x - location) / scale;
    if (z < 0.0) return 0.5 * std::exp(z);
    return 1.0 - 0.5 * std::exp(-z);
}

double laplace_quantile(double q, double location, double scale) {
    if (q < 0.5) return location + scale * std::log(2.0 * q);
    return location - scale * std::log(2.0 * (1.0 - q));
}

LaplacianMixture1D::LaplacianMixture1D(std::vector<double> weights,
                                       std::vector<double> locations,
                                       std::vector<double> scales)
    : weights_(std::move(weights)), locations_(std::move(locations)), scales_(std::move(scales)) {
    if (weights_.empty() || weights_.size() != locations_.size() ||
        weights_.size() != scales_.size())
        throw ValidationError("mixture: parameter vectors empty or of unequal length");

    double sum = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw ValidationError("mixture: negative or non-finite weight");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > kWeightSumTol)
        throw ValidationError("mixture: weights do not sum to 1");
    if (sum != 1.0) {
        for (double& w : weights_) w /= sum; // absorb serialization round-off
    }
    for (double b : scales_)
        if (!(b > 0.0)) throw ValidationError("mixture: scale must be positive");
}

double LaplacianMixture1D::cdf(double x) const {
    double acc = 0.0;
    for (size_t j = 0; j < weights_.size(); ++j)
        acc += weights_[j] * laplace_cdf(x, locations_[j], scales_[j]);
    return acc;
}

double LaplacianMixture1D::pdf(double x) const {
    double acc = 0.0;
    for (size_t j = 0; j < weights_.size(); ++j)
        acc += weights_[j] / (2.0 * scales_[j]) *
               std::exp(-std::fabs(x - locations_[j]) / scales_[j]);
    return acc;
}

double LaplacianMixture1D::quantile(double q) const {
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("mixture quantile: q must lie in (0,1)");

    double lo = locations_[0] - kTailScales * scales_[0];
    double hi = locations_[0] + kTailScales * scales_[0];
    for (size_t j = 1; j < weights_.size(); ++j) {
        lo = std::min(lo, locations_[j] - kTailScales * scales_[j]);
        hi = std::max(hi, locations_[j] + kTailScales * scales_[j]);
    }

    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::fabs(lo) + std::fabs(hi)); ++it) {
        mid = 0.5 * (lo + hi);
        const double c = cdf(mid);
        if (std::fabs(c - q) <= kQuantileCdfTol) return mid;
        if (c < q)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> LaplacianMixture1D::moments() const {
    double mean = 0.0, second = 0.0;
    for (size_t j = 0; j < weights_.size(); ++j) {
        mean += weights_[j] * locations_[j];
        second += weights_[j] * (2.0 * scales_[j] * scales_[j] + locations_[j] * locations_[j]);
    }
    return {mean, second - mean * mean};
}

std::vector<double> LaplacianMixture1D::sample(std::uint64_t rng_seed, int n) const {
    if (n < 1) throw ValidationError("mixture sample: n must be >= 1");
    std::vector<double> cum(weights_.size());
    double acc = 0.0;
    for (size_t j = 0; j < weights_.size(); ++j) {
        acc += weights_[j];
        cum[j] = acc;
    }
    cum.back() = 1.0;

    Rng rng(rng_seed);
    std::vector<double> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        const size_t j = static_cast<size_t>(
            std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
        out[static_cast<size_t>(i)] = rng.laplace(locations_[j], scales_[j]);
    }
    return out;
}

RayForecast::RayForecast(LaplacianMixture1D r, LaplacianMixture1D g, LaplacianMixture1D b)
    : channels_{std::move(r), std::move(g), std::move(b)} {
    const auto& w0 = channels_[0].weights();
    for (int c = 1; c < 3; ++c) {
        const auto& wc = channels_[c].weights();
        if (wc.size() != w0.size())
            throw ValidationError("forecast: channels must have equal component counts");
        for (size_t j = 0; j < w0.size(); ++j)
            if (std::fabs(wc[j] - w0[j]) > kWeightSumTol)
                throw ValidationError("forecast: channels must share one weight vector");
    }
}

double forecast_nll(const std::vector<RayForecast>& forecasts,
                    const std::vector<Rgb>& truths,
                    const std::array<IsotonicMap, 3>* calibration) {
    if (forecasts.size() != truths.size())
        throw ValidationError("forecast_nll: forecasts and truths differ in length");
    if (forecasts.empty()) throw ValidationError("forecast_nll: empty input");

    double acc = 0.0;
    for (size_t i = 0; i < forecasts.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            const auto& mix = forecasts[i].channel(c);
            const double x = truths[i][c];
            double density = mix.pdf(x);
            if (calibration)
                density *= (*calibration)[c].derivative(mix.cdf(x));
            acc += -std::log(std::max(density, kDensityFloor));
        }
    }
    return acc / (3.0 * static_cast<double>(forecasts.size()));
}

} // namespace pixcal
