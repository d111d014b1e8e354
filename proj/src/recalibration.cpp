#include "pixcal/recalibration.hpp"

#include <algorithm>
#include <cmath>

namespace pixcal {

std::array<double, 3> predicted_confidence(const RayForecast& forecast, const Rgb& color) {
    for (double v : color)
        if (!(v >= 0.0 && v <= 1.0))
            throw ValidationError("predicted_confidence: color outside [0,1]");
    return {forecast.channel(0).cdf(color[0]), forecast.channel(1).cdf(color[1]),
            forecast.channel(2).cdf(color[2])};
}

double empirical_confidence(const std::vector<double>& predicted_levels, double p) {
    if (predicted_levels.empty())
        throw ValidationError("empirical_confidence: empty level list");
    size_t count = 0;
    for (double v : predicted_levels)
        if (v <= p) ++count;
    return static_cast<double>(count) / static_cast<double>(predicted_levels.size());
}

std::vector<double> predicted_levels(const std::vector<RayForecast>& forecasts,
                                     const std::vector<Rgb>& truths, Channel channel) {
    if (forecasts.size() != truths.size())
        throw ValidationError("predicted_levels: forecasts and truths differ in length");
    const int c = static_cast<int>(channel);
    std::vector<double> out(forecasts.size());
    for (size_t i = 0; i < forecasts.size(); ++i)
        out[i] = forecasts[i].channel(c).cdf(truths[i][c]);
    return out;
}

std::vector<double> predicted_levels_pooled(const std::vector<RayForecast>& forecasts,
                                            const std::vector<Rgb>& truths) {
    std::vector<double> out;
    out.reserve(forecasts.size() * 3);
    for (Channel ch : {Channel::R, Channel::G, Channel::B}) {
        auto lv = predicted_levels(forecasts, truths, ch);
        out.insert(out.end(), lv.begin(), lv.end());
    }
    return out;
}

std::vector<ConfidencePair> recalibration_pairs_from_levels(const std::vector<double>& levels) {
    if (levels.empty())
        throw ValidationError("recalibration pairs: empty level list");
    std::vector<double> sorted(levels);
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<ConfidencePair> pairs(sorted.size());
    for (size_t i = 0; i < sorted.size(); ++i) {
        // rank of the last element equal to sorted[i] gives |{p <= p_i}|
        const size_t hi = static_cast<size_t>(
            std::upper_bound(sorted.begin(), sorted.end(), sorted[i]) - sorted.begin());
        pairs[i] = {sorted[i], static_cast<double>(hi) / n};
    }
    return pairs;
}

std::vector<ConfidencePair> build_recalibration_dataset(
    const std::vector<RayForecast>& forecasts, const std::vector<Rgb>& truths, Channel channel) {
    return recalibration_pairs_from_levels(predicted_levels(forecasts, truths, channel));
}

IsotonicMap fit_isotonic(const std::vector<ConfidencePair>& pairs) {
    if (pairs.empty()) throw ValidationError("fit_isotonic: empty dataset");

    std::vector<ConfidencePair> sorted(pairs);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ConfidencePair& a, const ConfidencePair& b) {
                         return a.predicted < b.predicted;
                     });

    // collapse duplicate inputs (weighted by multiplicity), then anchor
    std::vector<double> xs, ys, ws;
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i;
        double sum = 0.0;
        while (j < sorted.size() && sorted[j].predicted == sorted[i].predicted) {
            sum += sorted[j].empirical;
            ++j;
        }
        xs.push_back(sorted[i].predicted);
        ys.push_back(sum / static_cast<double>(j - i));
        ws.push_back(static_cast<double>(j - i));
        i = j;
    }
    if (xs.front() > 0.0) {
        xs.insert(xs.begin(), 0.0);
        ys.insert(ys.begin(), 0.0);
        ws.insert(ws.begin(), 1.0);
    }
    if (xs.back() < 1.0) {
        xs.push_back(1.0);
        ys.push_back(1.0);
        ws.push_back(1.0);
    }

    std::vector<double> fitted = pool_adjacent_violators(ys, ws);
    // data lies in [0,1] so pooling cannot move the anchors, but pin them to
    // keep the map a valid CDF transform even for degenerate inputs
    fitted.front() = 0.0;
    fitted.back() = 1.0;
    return IsotonicMap::from_knots(xs, fitted);
}

double calibrated_quantile(const IsotonicMap& map, const LaplacianMixture1D& mix, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("calibrated_quantile: q must lie in (0,1)");
    return mix.quantile(map.invert(q));
}

double iqr_uncertainty(const std::array<IsotonicMap, 3>& maps, const RayForecast& forecast) {
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& mix = forecast.channel(c);
        acc += calibrated_quantile(maps[c], mix, 0.75) - calibrated_quantile(maps[c], mix, 0.25);
    }
    return acc / 3.0;
}

double calibration_error(const std::vector<double>& predicted_levels) {
    if (predicted_levels.empty())
        throw ValidationError("calibration_error: empty level list");
    std::vector<double> sorted(predicted_levels);
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double acc = 0.0;
    for (double p : predicted_levels) {
        const size_t hi = static_cast<size_t>(
            std::upper_bound(sorted.begin(), sorted.end(), p) - sorted.begin());
        const double diff = p - static_cast<double>(hi) / n;
        acc += diff * diff;
    }
    return acc / n;
}

std::vector<double> apply_map(const IsotonicMap& map, const std::vector<double>& levels) {
    std::vector<double> out(levels.size());
    for (size_t i = 0; i < levels.size(); ++i) out[i] = map(levels[i]);
    return out;
}

} // namespace pixcal
