#include "pixcal/view_planner.hpp"

#include <algorithm>
#include <cmath>

#include "pixcal/recalibration.hpp"

namespace pixcal {

double psnr(const ImageRgb& a, const ImageRgb& b) {
    require_congruent(a, b, "psnr");
    if (a.data.empty()) throw ValidationError("psnr: empty images");
    double mse = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse < 1e-10) return 100.0;
    return 10.0 * std::log10(1.0 / mse);
}

std::vector<std::pair<double, double>> information_gain_curve(const ImageRgb& pred,
                                                              const ImageRgb& truth,
                                                              const ScalarImage& umap,
                                                              const std::vector<double>& gammas) {
    require_congruent(pred, truth, "information_gain_curve");
    require_congruent(pred, umap, "information_gain_curve");
    for (double g : gammas)
        if (!(g >= 0.0 && g <= 0.5))
            throw std::domain_error("information_gain_curve: gamma outside [0, 0.5]");

    const int n = umap.pixel_count();
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (umap.data[static_cast<size_t>(a)] != umap.data[static_cast<size_t>(b)])
            return umap.data[static_cast<size_t>(a)] > umap.data[static_cast<size_t>(b)];
        return a < b; // row-major tie-break
    });

    std::vector<std::pair<double, double>> out;
    out.reserve(gammas.size());
    for (double g : gammas) {
        const int replace = static_cast<int>(std::floor(g * n));
        ImageRgb patched = pred;
        for (int r = 0; r < replace; ++r) {
            const int idx = order[static_cast<size_t>(r)];
            for (int c = 0; c < 3; ++c)
                patched.data[static_cast<size_t>(idx) * 3 + c] =
                    truth.data[static_cast<size_t>(idx) * 3 + c];
        }
        out.emplace_back(g, psnr(patched, truth));
    }
    return out;
}

int select_next_view(const std::vector<CandidateView>& candidates,
                     const std::vector<std::array<IsotonicMap, 3>>& maps,
                     const std::vector<std::vector<RayForecast>>& forecasts) {
    if (candidates.empty()) throw ValidationError("select_next_view: no candidates");
    if (maps.size() != candidates.size() || forecasts.size() != candidates.size())
        throw ValidationError("select_next_view: candidates/maps/forecasts length mismatch");

    int best_id = 0;
    double best_mean = -1.0;
    bool first = true;
    for (size_t v = 0; v < candidates.size(); ++v) {
        const auto& fc = forecasts[v];
        if (static_cast<int>(fc.size()) != candidates[v].umap.pixel_count())
            throw ValidationError("select_next_view: forecast grid size mismatch");
        double acc = 0.0;
        for (const RayForecast& f : fc) acc += iqr_uncertainty(maps[v], f);
        const double mean = acc / static_cast<double>(fc.size());
        if (first || mean > best_mean ||
            (mean == best_mean && candidates[v].id < best_id)) {
            best_mean = mean;
            best_id = candidates[v].id;
            first = false;
        }
    }
    return best_id;
}

} // namespace pixcal
