#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pixcal/rng.hpp"
#include "pixcal/scene_harness.hpp"

using namespace pixcal;

namespace {

SceneConfig make_config(SceneFamily family, double k, std::uint64_t seed, int hw = 64) {
    SceneConfig c;
    c.height = hw;
    c.width = hw;
    c.family = family;
    c.k = k;
    c.base_scale = 0.1;
    c.seed = seed;
    return c;
}

double curve_sup_deviation(const CalibrationCurve& curve, double k) {
    const auto grid = uniform_grid(curve.grid_size());
    double sup = 0.0;
    for (size_t i = 0; i < grid.size(); ++i)
        sup = std::max(sup,
                       std::fabs(curve.values[i] - analytic_distortion_curve(k, grid[i])));
    return sup;
}

} // namespace

TEST_CASE("analytic distortion curve closed form") {
    for (double p : {0.0, 0.2, 0.5, 0.8, 1.0})
        CHECK(analytic_distortion_curve(1.0, p) == doctest::Approx(p).epsilon(1e-12));
    CHECK(analytic_distortion_curve(2.0, 0.25) == doctest::Approx(0.125));
    CHECK(analytic_distortion_curve(2.0, 0.75) == doctest::Approx(0.875));
    CHECK_THROWS_AS(analytic_distortion_curve(2.0, 1.5), std::domain_error);
    CHECK_THROWS_AS(analytic_distortion_curve(0.0, 0.5), ValidationError);
}

TEST_CASE("analytic distortion curve agrees with Monte Carlo") {
    // draw from the true Laplace, evaluate the scale-distorted CDF, compare
    // empirical frequencies with the closed form
    for (double k : {0.5, 2.0}) {
        Rng rng(k < 1 ? 11u : 22u);
        const int n = 200000;
        std::vector<double> levels(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            levels[static_cast<size_t>(i)] = laplace_cdf(rng.laplace(0.0, 1.0), 0.0, k);
        std::sort(levels.begin(), levels.end());
        for (double p = 0.05; p < 1.0; p += 0.05) {
            const double emp = static_cast<double>(std::upper_bound(levels.begin(),
                                                                    levels.end(), p) -
                                                   levels.begin()) /
                               n;
            CHECK(emp == doctest::Approx(analytic_distortion_curve(k, p)).epsilon(0.02));
        }
    }
}

TEST_CASE("scene generation is deterministic and validates config") {
    const auto config = make_config(SceneFamily::Scale, 2.0, 99, 16);
    const auto a = generate_scene(config);
    const auto b = generate_scene(config);
    CHECK(a.field.data == b.field.data);
    CHECK(a.truth.data == b.truth.data);
    CHECK(a.forecasts.size() == 256);

    SceneConfig bad = config;
    bad.height = 2;
    CHECK_THROWS_AS(generate_scene(bad), ValidationError);
    bad = config;
    bad.k = 0.0;
    CHECK_THROWS_AS(generate_scene(bad), ValidationError);
    bad = config;
    bad.base_scale = -1.0;
    CHECK_THROWS_AS(generate_scene(bad), ValidationError);
}

TEST_CASE("independent truth draws share everything but the truth") {
    auto config = make_config(SceneFamily::Scale, 1.5, 7, 16);
    const auto a = generate_scene(config);
    config.truth_stream = 1;
    const auto b = generate_scene(config);
    CHECK(a.field.data == b.field.data);
    CHECK(a.truth.data != b.truth.data);
}

TEST_CASE("calibrated scene stays near the diagonal") {
    const auto scene = generate_scene(make_config(SceneFamily::Scale, 1.0, 31415, 100));
    const auto pairs = build_recalibration_dataset(scene.forecasts, scene.truth_pixels(),
                                                   Channel::G);
    for (const auto& pr : pairs) CHECK(std::fabs(pr.predicted - pr.empirical) < 0.02);
}

TEST_CASE("scale-distorted scene matches the analytic curve") {
    const auto scene = generate_scene(make_config(SceneFamily::Scale, 2.0, 271828));
    CHECK(curve_sup_deviation(ground_truth_curve(scene, Channel::R, 384), 2.0) <= 0.02);
}

TEST_CASE("ground-truth curve depends only on k") {
    const auto a = generate_scene(make_config(SceneFamily::Scale, 1.7, 1001));
    const auto b = generate_scene(make_config(SceneFamily::Scale, 1.7, 2002));
    const auto ca = ground_truth_curve(a, Channel::B, 256);
    const auto cb = ground_truth_curve(b, Channel::B, 256);
    double sup = 0.0;
    for (size_t i = 0; i < ca.values.size(); ++i)
        sup = std::max(sup, std::fabs(ca.values[i] - cb.values[i]));
    CHECK(sup <= 0.04);
}

TEST_CASE("ground-truth curves are monotone by construction") {
    const auto scene = generate_scene(make_config(SceneFamily::ShapeHeterogeneous, 3.0, 5, 32));
    const auto curve = ground_truth_curve(scene, Channel::R, 128);
    for (size_t i = 0; i + 1 < curve.values.size(); ++i)
        CHECK(curve.values[i] <= curve.values[i + 1] + 1e-15);
}

TEST_CASE("render outputs: means, uncertainty, positivity") {
    const auto scene = generate_scene(make_config(SceneFamily::Scale, 2.0, 77, 16));
    const auto [pred, umap] = render_scene_outputs(scene);

    // single-component forecasts: prediction equals the latent field
    for (size_t i = 0; i < pred.data.size(); ++i)
        CHECK(pred.data[i] == doctest::Approx(scene.field.data[i]).epsilon(1e-12));

    // Laplace IQR scaling: 2 ln2 * k * base_scale
    const double expected = 2.0 * std::log(2.0) * 2.0 * 0.1;
    for (double u : umap.data) {
        CHECK(u == doctest::Approx(expected).epsilon(1e-6));
        CHECK(u > 0.0);
    }
}

TEST_CASE("shape-heterogeneous scenes mix unimodal and bimodal forecasts") {
    const auto scene = generate_scene(make_config(SceneFamily::ShapeHeterogeneous, 3.0, 13, 16));
    REQUIRE(scene.bimodal_mask.size() == 256);
    int bimodal = 0;
    for (int i = 0; i < 256; ++i) {
        const bool bim = scene.bimodal_mask[static_cast<size_t>(i)] != 0;
        bimodal += bim ? 1 : 0;
        CHECK(scene.forecasts[static_cast<size_t>(i)].component_count() == (bim ? 2 : 1));
    }
    CHECK(bimodal == 128);

    // k = 1 shape-heterogeneous forecasts are perfectly calibrated too
    const auto calibrated =
        generate_scene(make_config(SceneFamily::ShapeHeterogeneous, 1.0, 137, 100));
    const auto pairs = build_recalibration_dataset(calibrated.forecasts,
                                                   calibrated.truth_pixels(), Channel::R);
    for (const auto& pr : pairs) CHECK(std::fabs(pr.predicted - pr.empirical) < 0.025);
}

TEST_CASE("scene-estimated curve family is low-dimensional") {
    std::vector<CalibrationCurve> curves;
    for (int i = 0; i < 12; ++i) {
        const double t = static_cast<double>(i) / 11.0;
        const double k = std::exp(std::log(0.3) + t * (std::log(3.0) - std::log(0.3)));
        const auto scene = generate_scene(make_config(SceneFamily::Scale, k, 4000 + i));
        curves.push_back(ground_truth_curve_pooled(scene, 384));
    }
    const auto basis = fit_pca_basis(curves, 3);
    double cum = 0.0;
    for (double r : basis.explained_variance_ratio) cum += r;
    CHECK(cum >= 0.99);
}
