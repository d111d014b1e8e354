#ifndef PIXCAL_CURVE_SPACE_HPP
#define PIXCAL_CURVE_SPACE_HPP

#include <vector>

#include "pixcal/isotonic.hpp"
#include "pixcal/recalibration.hpp"

namespace pixcal {

/// Calibration curve sampled on the uniform grid p_i = i / (M-1) over [0,1].
struct CalibrationCurve {
    std::vector<double> values;

    int grid_size() const { return static_cast<int>(values.size()); }
};

/// PCA basis of calibration curves: mean, orthonormal component rows, and
/// explained-variance ratios (nonincreasing, summing to <= 1).
struct PcaCurveBasis {
    std::vector<double> mean;                    // length M
    std::vector<std::vector<double>> components; // n rows of length M
    std::vector<double> explained_variance_ratio;

    int grid_size() const { return static_cast<int>(mean.size()); }
    int component_count() const { return static_cast<int>(components.size()); }
};

/// Coefficients of a curve in a PcaCurveBasis.
struct CurveCoefficients {
    std::vector<double> theta;
};

/// Uniform grid abscissa i / (m-1).
std::vector<double> uniform_grid(int m);

/// Evaluate a fitted map on the uniform grid.
CalibrationCurve discretize_map(const IsotonicMap& map, int m);

/// Fit an isotonic map to the pairs, then sample it on the uniform grid.
CalibrationCurve discretize_curve(const std::vector<ConfidencePair>& pairs, int m);

/// PCA of K curves: column mean, top-n right singular directions of the
/// centered matrix, ratios from squared singular values.  Component signs are
/// fixed so each row's largest-magnitude entry is positive.
PcaCurveBasis fit_pca_basis(const std::vector<CalibrationCurve>& curves, int n);

/// theta = components * (curve - mean).
CurveCoefficients project_curve(const PcaCurveBasis& basis, const CalibrationCurve& curve);

/// mean + sum_i theta_i * u_i.  May leave [0,1] or lose monotonicity;
/// callers must monotonize.
std::vector<double> reconstruct_curve(const PcaCurveBasis& basis, const CurveCoefficients& theta);

/// Clamp to [0,1], pool-adjacent-violators on the uniform grid, anchor the
/// endpoints at (0,0) and (1,1).
IsotonicMap monotonize_curve(const std::vector<double>& raw);

} // namespace pixcal

#endif
