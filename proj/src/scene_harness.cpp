#include "pixcal/scene_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pixcal/recalibration.hpp"
#include "pixcal/rng.hpp"

namespace pixcal {

namespace {

constexpr double kFieldLo = 0.05;
constexpr double kFieldHi = 0.95;
constexpr double kBimodalOffset = 0.15;
constexpr double kBimodalScaleFactor = 0.05;

// substream ids for seed derivation
enum : std::uint64_t { kStreamFieldR = 1, kStreamMask = 11, kStreamTruthBase = 100 };

void fill_channel_field(ImageRgb& img, int c, Rng& rng) {
    struct Wave {
        double amp, fx, fy, phase;
    };
    std::array<Wave, 6> waves;
    for (Wave& w : waves) {
        w.amp = rng.uniform(0.5, 1.0);
        w.fx = rng.uniform(0.5, 3.0);
        w.fy = rng.uniform(0.5, 3.0);
        w.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    double lo = 1e300, hi = -1e300;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double v = 0.0;
            for (const Wave& w : waves)
                v += w.amp * std::sin(2.0 * std::numbers::pi *
                                          (w.fx * x / img.width + w.fy * y / img.height) +
                                      w.phase);
            img.at(y, x, c) = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double span = hi - lo;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            img.at(y, x, c) = span > 0.0
                                  ? kFieldLo + (img.at(y, x, c) - lo) / span * (kFieldHi - kFieldLo)
                                  : 0.5;
}

} // namespace

SceneFamily scene_family_from_string(const std::string& s) {
    if (s == "scale") return SceneFamily::Scale;
    if (s == "shape-heterogeneous") return SceneFamily::ShapeHeterogeneous;
    throw ValidationError("unknown scene family: " + s);
}

std::string to_string(SceneFamily f) {
    return f == SceneFamily::Scale ? "scale" : "shape-heterogeneous";
}

double analytic_distortion_curve(double k, double p) {
    if (!(k > 0.0)) throw ValidationError("analytic_distortion_curve: k must be positive");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("analytic_distortion_curve: p outside [0,1]");
    if (p <= 0.5) return 0.5 * std::pow(2.0 * p, k);
    return 1.0 - 0.5 * std::pow(2.0 * (1.0 - p), k);
}

std::vector<Rgb> SyntheticScene::truth_pixels() const {
    std::vector<Rgb> out(static_cast<size_t>(pixel_count()));
    for (int y = 0; y < config.height; ++y)
        for (int x = 0; x < config.width; ++x)
            out[static_cast<size_t>(y) * config.width + x] = truth.pixel(y, x);
    return out;
}

SyntheticScene generate_scene(const SceneConfig& config) {
    if (config.height < 4 || config.width < 4)
        throw ValidationError("generate_scene: grid must be at least 4x4");
    if (!(config.k > 0.0)) throw ValidationError("generate_scene: k must be positive");
    if (!(config.base_scale > 0.0))
        throw ValidationError("generate_scene: base_scale must be positive");

    SyntheticScene scene;
    scene.config = config;
    scene.field = ImageRgb(config.height, config.width);
    scene.truth = ImageRgb(config.height, config.width);

    for (int c = 0; c < 3; ++c) {
        Rng rng(mix_seed(config.seed, kStreamFieldR + static_cast<std::uint64_t>(c)));
        fill_channel_field(scene.field, c, rng);
    }

    const int n = scene.pixel_count();
    const bool het = config.family == SceneFamily::ShapeHeterogeneous;
    if (het) {
        // seeded mask: shuffle indices, first half bimodal
        scene.bimodal_mask.assign(static_cast<size_t>(n), 0);
        std::vector<int> idx(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
        Rng rng(mix_seed(config.seed, kStreamMask));
        for (int i = n - 1; i > 0; --i)
            std::swap(idx[static_cast<size_t>(i)],
                      idx[static_cast<size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
        for (int i = 0; i < n / 2; ++i) scene.bimodal_mask[static_cast<size_t>(idx[static_cast<size_t>(i)])] = 1;
    }

    const double b = config.base_scale;
    const double s_bi = kBimodalScaleFactor * b;
    Rng truth_rng(mix_seed(config.seed,
                           kStreamTruthBase + static_cast<std::uint64_t>(config.truth_stream)));

    scene.forecasts.reserve(static_cast<size_t>(n));
    for (int y = 0; y < config.height; ++y) {
        for (int x = 0; x < config.width; ++x) {
            const int i = y * config.width + x;
            const bool bim = het && scene.bimodal_mask[static_cast<size_t>(i)] != 0;
            std::vector<LaplacianMixture1D> chans;
            chans.reserve(3);
            for (int c = 0; c < 3; ++c) {
                const double f = scene.field.at(y, x, c);
                double draw;
                if (bim) {
                    const double loc = f + (truth_rng.uniform() < 0.5 ? -kBimodalOffset
                                                                      : kBimodalOffset);
                    draw = truth_rng.laplace(loc, s_bi);
                    chans.emplace_back(std::vector<double>{0.5, 0.5},
                                       std::vector<double>{f - kBimodalOffset, f + kBimodalOffset},
                                       std::vector<double>{s_bi * config.k, s_bi * config.k});
                } else {
                    draw = truth_rng.laplace(f, b);
                    chans.emplace_back(std::vector<double>{1.0}, std::vector<double>{f},
                                       std::vector<double>{b * config.k});
                }
                scene.truth.at(y, x, c) = std::clamp(draw, 0.0, 1.0);
            }
            scene.forecasts.emplace_back(std::move(chans[0]), std::move(chans[1]),
                                         std::move(chans[2]));
        }
    }
    return scene;
}

std::pair<ImageRgb, ScalarImage> render_scene_outputs(const SyntheticScene& scene) {
    ImageRgb pred(scene.config.height, scene.config.width);
    ScalarImage umap(scene.config.height, scene.config.width);
    const std::array<IsotonicMap, 3> identity{IsotonicMap::identity(), IsotonicMap::identity(),
                                              IsotonicMap::identity()};
    for (int y = 0; y < scene.config.height; ++y) {
        for (int x = 0; x < scene.config.width; ++x) {
            const auto& fc = scene.forecasts[static_cast<size_t>(y) * scene.config.width + x];
            for (int c = 0; c < 3; ++c)
                pred.at(y, x, c) = std::clamp(fc.channel(c).moments().first, 0.0, 1.0);
            umap.at(y, x) = iqr_uncertainty(identity, fc);
        }
    }
    return {std::move(pred), std::move(umap)};
}

CalibrationCurve ground_truth_curve(const SyntheticScene& scene, Channel channel, int m) {
    const auto levels = predicted_levels(scene.forecasts, scene.truth_pixels(), channel);
    return discretize_map(fit_isotonic(recalibration_pairs_from_levels(levels)), m);
}

CalibrationCurve ground_truth_curve_pooled(const SyntheticScene& scene, int m) {
    const auto levels = predicted_levels_pooled(scene.forecasts, scene.truth_pixels());
    return discretize_map(fit_isotonic(recalibration_pairs_from_levels(levels)), m);
}

} // namespace pixcal
