#ifndef PIXCAL_VIEW_PLANNER_HPP
#define PIXCAL_VIEW_PLANNER_HPP

#include <array>
#include <vector>

#include "pixcal/grid.hpp"
#include "pixcal/isotonic.hpp"
#include "pixcal/mixture.hpp"

namespace pixcal {

struct CandidateView {
    int id = 0;
    ImageRgb pred_image;
    ImageRgb truth_image; // evaluation only
    ScalarImage umap;
};

/// 10*log10(1/MSE) with peak 1.0; capped at 100 dB when MSE < 1e-10.
double psnr(const ImageRgb& a, const ImageRgb& b);

/// For each gamma: replace the floor(gamma*H*W) pixels with the largest umap
/// values (ties by row-major index) with the truth pixels, then PSNR against
/// truth.  Requires every gamma in [0, 0.5].
std::vector<std::pair<double, double>> information_gain_curve(const ImageRgb& pred,
                                                              const ImageRgb& truth,
                                                              const ScalarImage& umap,
                                                              const std::vector<double>& gammas);

/// Recomputes each candidate's uncertainty map as the calibrated IQR of its
/// forecasts under its maps, then returns the id with the highest mean;
/// ties go to the lowest id.
int select_next_view(const std::vector<CandidateView>& candidates,
                     const std::vector<std::array<IsotonicMap, 3>>& maps,
                     const std::vector<std::vector<RayForecast>>& forecasts);

} // namespace pixcal

#endif
