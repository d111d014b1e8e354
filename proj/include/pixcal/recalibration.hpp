#ifndef PIXCAL_RECALIBRATION_HPP
#define PIXCAL_RECALIBRATION_HPP

#include <array>
#include <vector>

#include "pixcal/grid.hpp"
#include "pixcal/isotonic.hpp"
#include "pixcal/mixture.hpp"

namespace pixcal {

/// One point of a recalibration dataset: the forecaster's confidence level at
/// the observed outcome and the matching empirical frequency.
struct ConfidencePair {
    double predicted = 0.0;
    double empirical = 0.0;
};

enum class Channel { R = 0, G = 1, B = 2 };

/// Per-channel CDF of the forecast evaluated at the observed color.
std::array<double, 3> predicted_confidence(const RayForecast& forecast, const Rgb& color);

/// |{t : p_t <= p}| / T over the supplied levels (non-strict comparison).
double empirical_confidence(const std::vector<double>& predicted_levels, double p);

/// Predicted levels of one channel over a forecast/truth set.
std::vector<double> predicted_levels(const std::vector<RayForecast>& forecasts,
                                     const std::vector<Rgb>& truths, Channel channel);

/// Predicted levels of all three channels concatenated (R, then G, then B).
std::vector<double> predicted_levels_pooled(const std::vector<RayForecast>& forecasts,
                                            const std::vector<Rgb>& truths);

/// (p_t, P-hat(p_t)) pairs for one channel, sorted by predicted level.
std::vector<ConfidencePair> build_recalibration_dataset(
    const std::vector<RayForecast>& forecasts, const std::vector<Rgb>& truths, Channel channel);

/// Same construction from a raw list of levels.
std::vector<ConfidencePair> recalibration_pairs_from_levels(const std::vector<double>& levels);

/// Monotone least-squares fit of the pairs with anchors (0,0), (1,1) appended
/// before pooling; duplicate inputs are collapsed by averaging.
IsotonicMap fit_isotonic(const std::vector<ConfidencePair>& pairs);

/// Quantile of the calibrated distribution R ∘ F: inverts the map at q
/// (plateau midpoint rule) and evaluates the mixture quantile there.
double calibrated_quantile(const IsotonicMap& map, const LaplacianMixture1D& mix, double q);

/// Mean over channels of the calibrated interquartile range.
double iqr_uncertainty(const std::array<IsotonicMap, 3>& maps, const RayForecast& forecast);

/// (1/T) * sum_t (p_t - P-hat(p_t))^2 with the empirical frequency computed
/// over the same list.
double calibration_error(const std::vector<double>& predicted_levels);

/// Map applied elementwise to a list of levels.
std::vector<double> apply_map(const IsotonicMap& map, const std::vector<double>& levels);

} // namespace pixcal

#endif
