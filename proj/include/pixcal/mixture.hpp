#ifndef PIXCAL_MIXTURE_HPP
#define PIXCAL_MIXTURE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pixcal/errors.hpp"
#include "pixcal/grid.hpp"
#include "pixcal/isotonic.hpp"

namespace pixcal {

/// CDF of a single Laplace(location, scale) component.
double laplace_cdf(double x, double location, double scale);

/// Quantile of a single Laplace(location, scale) component, 0 < q < 1.
double laplace_quantile(double q, double location, double scale);

/// One-dimensional mixture of Laplace distributions.
///
/// Invariants are checked on construction: weights nonnegative and summing to
/// one (deviations below 1e-9 are renormalized, larger ones rejected), scales
/// strictly positive, all three parameter vectors of equal length >= 1.
/// Instances are immutable after construction.
class LaplacianMixture1D {
public:
    LaplacianMixture1D(std::vector<double> weights,
                       std::vector<double> locations,
                       std::vector<double> scales);

    int component_count() const { return static_cast<int>(weights_.size()); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& locations() const { return locations_; }
    const std::vector<double>& scales() const { return scales_; }

    double cdf(double x) const;
    double pdf(double x) const;

    /// Inverse CDF by bisection; |cdf(result) - q| <= 1e-10.  Requires 0 < q < 1.
    double quantile(double q) const;

    /// (mean, variance) in closed form.
    std::pair<double, double> moments() const;

    /// n i.i.d. draws, deterministic for a fixed seed.
    std::vector<double> sample(std::uint64_t rng_seed, int n) const;

private:
    std::vector<double> weights_;
    std::vector<double> locations_;
    std::vector<double> scales_;
};

/// Per-ray color forecast: three per-channel mixtures sharing one weight
/// vector (a single set of mixing coefficients per ray).
class RayForecast {
public:
    RayForecast(LaplacianMixture1D r, LaplacianMixture1D g, LaplacianMixture1D b);

    const LaplacianMixture1D& channel(int c) const { return channels_[c]; }
    int component_count() const { return channels_[0].component_count(); }

private:
    std::array<LaplacianMixture1D, 3> channels_;
};

/// Mean negative log predictive density over rays and channels.
///
/// With calibration maps supplied the density of channel c becomes
/// r_c(F_c(x)) * f_c(x), where r_c is the piecewise-constant derivative of the
/// interpolated map.  Densities are floored at 1e-12 before the log so that
/// map plateaus cannot produce infinities.
double forecast_nll(const std::vector<RayForecast>& forecasts,
                    const std::vector<Rgb>& truths,
                    const std::array<IsotonicMap, 3>* calibration = nullptr);

} // namespace pixcal

#endif
