#ifndef PIXCAL_SCENE_HARNESS_HPP
#define PIXCAL_SCENE_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pixcal/curve_space.hpp"
#include "pixcal/grid.hpp"
#include "pixcal/mixture.hpp"

namespace pixcal {

enum class SceneFamily { Scale, ShapeHeterogeneous };

SceneFamily scene_family_from_string(const std::string& s);
std::string to_string(SceneFamily f);

struct SceneConfig {
    int height = 64;
    int width = 64;
    SceneFamily family = SceneFamily::Scale;
    double k = 1.0;           // forecast scale = k * true scale
    double base_scale = 0.1;  // true Laplace scale
    std::uint64_t seed = 0;
    // Independent observed-truth draws of the same scene share field,
    // forecasts and mask; only this stream index changes.
    int truth_stream = 0;
};

/// A synthetic scene: a smooth latent field, one observed ground-truth draw,
/// and a per-pixel forecast whose scales are distorted by the factor k.
///
/// Scale family: per pixel the true distribution is Laplace(field, base_scale)
/// per channel and the forecast is Laplace(field, k * base_scale).
/// Shape-heterogeneous family: a seeded half of the pixels instead carries a
/// two-component distribution with locations field +- 0.15 and component scale
/// 0.05 * base_scale; the forecast again multiplies the scales by k, so k = 1
/// is perfectly calibrated for every pixel in both families.
struct SyntheticScene {
    SceneConfig config;
    ImageRgb field;  // latent truth field (forecast locations)
    ImageRgb truth;  // observed ground-truth colors, one draw per pixel
    std::vector<RayForecast> forecasts; // row-major, height * width
    std::vector<std::uint8_t> bimodal_mask; // empty for the scale family

    int pixel_count() const { return config.height * config.width; }
    std::vector<Rgb> truth_pixels() const;
};

struct SceneCorpus {
    std::vector<SyntheticScene> train_scenes;
    std::vector<SyntheticScene> test_scenes;
};

/// Closed-form calibration curve of a scale-distorted Laplace forecaster:
/// 0.5*(2p)^k below one half, mirrored above.  Verified against Monte Carlo
/// in the test suite before anything relies on it.
double analytic_distortion_curve(double k, double p);

SyntheticScene generate_scene(const SceneConfig& config);

/// (predicted image, uncalibrated uncertainty map): per-channel mixture means
/// clamped to [0,1], and per-pixel IQR under identity maps.
std::pair<ImageRgb, ScalarImage> render_scene_outputs(const SyntheticScene& scene);

/// Kuleshov recalibration pairs over all pixels -> isotonic fit -> grid curve.
CalibrationCurve ground_truth_curve(const SyntheticScene& scene, Channel channel, int m);

/// Same, pooling the three channels into one level list.
CalibrationCurve ground_truth_curve_pooled(const SyntheticScene& scene, int m);

} // namespace pixcal

#endif
