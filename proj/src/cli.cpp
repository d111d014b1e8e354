#include "pixcal/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

#include "pixcal/meta_calibrator.hpp"
#include "pixcal/recalibration.hpp"
#include "pixcal/rng.hpp"
#include "pixcal/serialization.hpp"
#include "pixcal/view_planner.hpp"

namespace pixcal::cli {

using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kTestSeedOffset = 1'000'000; // keeps split seeds disjoint

std::string scene_filename(const std::string& split, int id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%03d.json", split.c_str(), id);
    return buf;
}

double channel_nll(const std::vector<RayForecast>& forecasts, const std::vector<Rgb>& truths,
                   int c, const IsotonicMap* map) {
    double acc = 0.0;
    for (size_t i = 0; i < forecasts.size(); ++i) {
        const auto& mix = forecasts[i].channel(c);
        double density = mix.pdf(truths[i][c]);
        if (map) density *= map->derivative(mix.cdf(truths[i][c]));
        acc += -std::log(std::max(density, 1e-12));
    }
    return acc / static_cast<double>(forecasts.size());
}

} // namespace

Manifest load_manifest(const std::filesystem::path& corpus_dir) {
    std::ifstream in(corpus_dir / "manifest.json");
    if (!in) throw IoError("cannot open manifest in " + corpus_dir.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError(std::string("cannot parse manifest: ") + e.what());
    }
    Manifest m;
    try {
        m.config.seed = j.at("seed").get<std::uint64_t>();
        m.config.train = j.at("train").get<int>();
        m.config.test = j.at("test").get<int>();
        m.config.height = j.at("height").get<int>();
        m.config.width = j.at("width").get<int>();
        m.config.base_scale = j.at("base_scale").get<double>();
        m.config.family = j.at("family").get<std::string>();
        m.config.k_min = j.at("k_min").get<double>();
        m.config.k_max = j.at("k_max").get<double>();
        for (const json& e : j.at("scenes")) {
            ManifestEntry entry;
            entry.file = e.at("file").get<std::string>();
            entry.split = e.at("split").get<std::string>();
            entry.id = e.at("id").get<int>();
            entry.k = e.at("k").get<double>();
            entry.scene_seed = e.at("scene_seed").get<std::uint64_t>();
            m.entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed manifest: ") + e.what());
    }
    m.config.out_dir = corpus_dir;
    return m;
}

std::vector<SyntheticScene> load_split(const std::filesystem::path& corpus_dir,
                                       const std::string& split) {
    const Manifest m = load_manifest(corpus_dir);
    std::vector<SyntheticScene> scenes;
    for (const ManifestEntry& e : m.entries)
        if (e.split == split) scenes.push_back(load_scene(corpus_dir / e.file));
    return scenes;
}

void run_gen_corpus(const GenCorpusConfig& config) {
    if (config.train < 1) throw ValidationError("gen-corpus: --train must be >= 1");
    if (config.test < 0) throw ValidationError("gen-corpus: --test must be >= 0");
    if (!(config.k_min > 0.0 && config.k_max >= config.k_min))
        throw ValidationError("gen-corpus: need 0 < k-min <= k-max");
    const SceneFamily family = scene_family_from_string(config.family);

    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create " + config.out_dir.string());

    json manifest;
    manifest["seed"] = config.seed;
    manifest["train"] = config.train;
    manifest["test"] = config.test;
    manifest["height"] = config.height;
    manifest["width"] = config.width;
    manifest["base_scale"] = config.base_scale;
    manifest["family"] = config.family;
    manifest["k_min"] = config.k_min;
    manifest["k_max"] = config.k_max;
    json scenes = json::array();

    Rng k_rng(mix_seed(config.seed, 0xC0));
    auto emit = [&](const std::string& split, int id, std::uint64_t scene_seed) {
        SceneConfig sc;
        sc.height = config.height;
        sc.width = config.width;
        sc.family = family;
        sc.base_scale = config.base_scale;
        sc.seed = scene_seed;
        sc.k = config.k_min == config.k_max
                   ? config.k_min
                   : std::exp(k_rng.uniform(std::log(config.k_min), std::log(config.k_max)));
        const SyntheticScene scene = generate_scene(sc);
        const std::string file = scene_filename(split, id);
        save_scene(scene, config.out_dir / file);
        scenes.push_back({{"file", file},
                          {"split", split},
                          {"id", id},
                          {"k", sc.k},
                          {"scene_seed", scene_seed}});
    };

    for (int i = 0; i < config.train; ++i)
        emit("train", i, mix_seed(config.seed, static_cast<std::uint64_t>(i)));
    for (int i = 0; i < config.test; ++i)
        emit("test", i, mix_seed(config.seed, kTestSeedOffset + static_cast<std::uint64_t>(i)));

    manifest["scenes"] = std::move(scenes);
    std::ofstream out(config.out_dir / "manifest.json");
    if (!out) throw IoError("cannot write manifest");
    out << manifest.dump(1) << "\n";
}

namespace {

CalibrationCurve scene_curve(const SyntheticScene& scene, const std::string& channel, int m) {
    if (channel == "pooled") return ground_truth_curve_pooled(scene, m);
    if (channel == "R") return ground_truth_curve(scene, Channel::R, m);
    if (channel == "G") return ground_truth_curve(scene, Channel::G, m);
    if (channel == "B") return ground_truth_curve(scene, Channel::B, m);
    throw ValidationError("unknown channel: " + channel);
}

} // namespace

void run_fit_basis(const FitBasisConfig& config) {
    const auto scenes = load_split(config.corpus_dir, "train");
    if (static_cast<int>(scenes.size()) < config.curves)
        throw ValidationError("fit-basis: corpus has fewer train scenes than --curves");
    std::vector<CalibrationCurve> curves;
    curves.reserve(static_cast<size_t>(config.curves));
    for (int i = 0; i < config.curves; ++i)
        curves.push_back(scene_curve(scenes[static_cast<size_t>(i)], config.channel, config.grid));
    save_basis(fit_pca_basis(curves, config.components), config.out_path);
}

void run_train_meta(const TrainMetaConfig& config) {
    const PcaCurveBasis basis = load_basis(config.basis_path);
    const auto scenes = load_split(config.corpus_dir, "train");
    if (scenes.empty()) throw ValidationError("train-meta: corpus has no train scenes");

    std::vector<FeatureVector> features;
    if (config.features_path) {
        features = load_feature_csv(*config.features_path);
        if (features.size() != scenes.size())
            throw ValidationError("train-meta: feature CSV rows != train scene count");
    } else {
        features.reserve(scenes.size());
        for (const auto& s : scenes) {
            const auto [pred, umap] = render_scene_outputs(s);
            features.push_back(extract_baseline_features(pred, umap));
        }
    }

    std::vector<std::pair<FeatureVector, CurveCoefficients>> dataset;
    dataset.reserve(scenes.size());
    for (size_t i = 0; i < scenes.size(); ++i) {
        const CalibrationCurve curve = ground_truth_curve_pooled(scenes[i], basis.grid_size());
        dataset.emplace_back(features[i], project_curve(basis, curve));
    }

    TrainHyper hyper;
    hyper.lr = config.lr;
    hyper.epochs = config.epochs;
    hyper.batch = config.batch;
    hyper.seed = config.seed;
    hyper.leaky_slope = config.leaky_slope;
    MetaTrainResult result = train_meta_calibrator(dataset, basis, hyper);
    save_model(result.model, config.out_path);

    if (config.trace_path) {
        std::vector<std::vector<std::string>> rows;
        for (size_t e = 0; e < result.loss_trace.size(); ++e)
            rows.push_back({std::to_string(e), format_g9(result.loss_trace[e])});
        write_csv(*config.trace_path, {"epoch", "loss"}, rows);
    }
}

void run_predict(const PredictConfig& config) {
    const MetaCalibratorModel model = load_model(config.model_path);
    IsotonicMap map = IsotonicMap::identity();
    if (config.features_path) {
        const auto rows = load_feature_csv(*config.features_path);
        if (config.feature_row < 0 || config.feature_row >= static_cast<int>(rows.size()))
            throw ValidationError("predict: --row outside feature CSV");
        map = predict_calibration_map(model, rows[static_cast<size_t>(config.feature_row)]);
    } else {
        const SyntheticScene scene = load_scene(config.scene_path);
        const auto [pred, umap] = render_scene_outputs(scene);
        map = predict_calibration_map(model, pred, umap);
    }
    save_map(map, config.out_path);
}

void run_eval(const EvalConfig& config) {
    std::vector<std::string> modes = config.modes;
    if (modes.empty()) {
        modes = {"identity", "oracle"};
        if (config.model_path) modes.push_back("meta");
    }
    for (const std::string& m : modes)
        if (m != "identity" && m != "oracle" && m != "meta")
            throw ValidationError("eval: unknown mode " + m);
    const bool wants_meta = std::find(modes.begin(), modes.end(), "meta") != modes.end();
    if (wants_meta && !config.model_path)
        throw ValidationError("eval: meta mode requires --model");

    std::optional<MetaCalibratorModel> model;
    if (wants_meta) model = load_model(*config.model_path);

    const Manifest manifest = load_manifest(config.corpus_dir);
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create " + config.out_dir.string());

    const char* channel_names[3] = {"R", "G", "B"};
    std::vector<std::vector<std::string>> metric_rows;
    std::vector<std::vector<std::string>> summary_rows;
    const std::vector<double> grid = uniform_grid(config.grid);

    for (const ManifestEntry& entry : manifest.entries) {
        if (entry.split != "test") continue;
        const SyntheticScene scene = load_scene(config.corpus_dir / entry.file);
        const auto truths = scene.truth_pixels();

        std::array<std::vector<double>, 3> levels;
        for (int c = 0; c < 3; ++c)
            levels[static_cast<size_t>(c)] =
                predicted_levels(scene.forecasts, truths, static_cast<Channel>(c));

        for (const std::string& mode : modes) {
            std::array<IsotonicMap, 3> maps{IsotonicMap::identity(), IsotonicMap::identity(),
                                            IsotonicMap::identity()};
            if (mode == "oracle") {
                if (config.pooled_fit) {
                    const auto pooled = predicted_levels_pooled(scene.forecasts, truths);
                    const IsotonicMap map =
                        fit_isotonic(recalibration_pairs_from_levels(pooled));
                    maps = {map, map, map};
                } else {
                    for (int c = 0; c < 3; ++c)
                        maps[static_cast<size_t>(c)] = fit_isotonic(
                            recalibration_pairs_from_levels(levels[static_cast<size_t>(c)]));
                }
            } else if (mode == "meta") {
                const auto [pred, umap] = render_scene_outputs(scene);
                const IsotonicMap map = predict_calibration_map(*model, pred, umap);
                maps = {map, map, map};
            }

            std::array<std::vector<double>, 3> cal_levels;
            for (int c = 0; c < 3; ++c)
                cal_levels[static_cast<size_t>(c)] =
                    apply_map(maps[static_cast<size_t>(c)], levels[static_cast<size_t>(c)]);

            double err_mean_uncal = 0.0, err_mean_cal = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double err_uncal = calibration_error(levels[static_cast<size_t>(c)]);
                const double err_cal = calibration_error(cal_levels[static_cast<size_t>(c)]);
                err_mean_uncal += err_uncal / 3.0;
                err_mean_cal += err_cal / 3.0;
                const double nll_uncal = channel_nll(scene.forecasts, truths, c, nullptr);
                const double nll_cal =
                    channel_nll(scene.forecasts, truths, c, &maps[static_cast<size_t>(c)]);
                metric_rows.push_back({std::to_string(entry.id), channel_names[c],
                                       format_g9(err_uncal), format_g9(err_cal),
                                       format_g9(nll_uncal), format_g9(nll_cal), mode});

                if (config.write_curves) {
                    std::vector<double> sorted_uncal = levels[static_cast<size_t>(c)];
                    std::vector<double> sorted_cal = cal_levels[static_cast<size_t>(c)];
                    std::sort(sorted_uncal.begin(), sorted_uncal.end());
                    std::sort(sorted_cal.begin(), sorted_cal.end());
                    const double n = static_cast<double>(sorted_uncal.size());
                    std::vector<std::vector<std::string>> rows;
                    rows.reserve(grid.size());
                    for (double p : grid) {
                        const auto frac = [&](const std::vector<double>& s) {
                            return static_cast<double>(std::upper_bound(s.begin(), s.end(), p) -
                                                       s.begin()) /
                                   n;
                        };
                        rows.push_back({format_g9(p), format_g9(frac(sorted_uncal)),
                                        format_g9(frac(sorted_cal))});
                    }
                    char name[64];
                    std::snprintf(name, sizeof(name), "curves_%03d_%s_%s.csv", entry.id,
                                  channel_names[c], mode.c_str());
                    write_csv(config.out_dir / name,
                              {"p", "p_hat_uncalibrated", "p_hat_calibrated"}, rows);
                }
            }

            // Eq. 5 is ambiguous between per-channel averaging and pooling the
            // channels into one list; report both, labeled.
            std::vector<double> pooled_cal;
            for (int c = 0; c < 3; ++c)
                pooled_cal.insert(pooled_cal.end(), cal_levels[static_cast<size_t>(c)].begin(),
                                  cal_levels[static_cast<size_t>(c)].end());
            const std::array<IsotonicMap, 3>* nll_maps = &maps;
            const double nll_cal_scene = forecast_nll(scene.forecasts, truths, nll_maps);
            summary_rows.push_back({std::to_string(entry.id), mode, format_g9(err_mean_cal),
                                    format_g9(calibration_error(pooled_cal)),
                                    format_g9(nll_cal_scene)});
        }
    }

    write_csv(config.out_dir / "metrics.csv",
              {"scene", "channel", "cal_err_uncal", "cal_err_cal", "nll_uncal", "nll_cal",
               "mode"},
              metric_rows);
    write_csv(config.out_dir / "summary.csv",
              {"scene", "mode", "cal_err_channel_mean", "cal_err_pooled", "nll"}, summary_rows);
}

void run_plan(const PlanConfig& config) {
    const auto scenes = load_split(config.corpus_dir, "test");
    if (scenes.empty()) throw ValidationError("plan: corpus has no test scenes");
    std::optional<MetaCalibratorModel> model;
    if (config.model_path) model = load_model(*config.model_path);

    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create " + config.out_dir.string());

    std::vector<double> gammas;
    for (int i = 0; i <= 10; ++i) gammas.push_back(0.05 * i);

    std::vector<CandidateView> candidates;
    std::vector<std::array<IsotonicMap, 3>> maps;
    std::vector<std::vector<RayForecast>> forecasts;
    std::vector<std::vector<std::string>> ig_rows;

    for (size_t v = 0; v < scenes.size(); ++v) {
        const SyntheticScene& scene = scenes[v];
        auto [pred, umap_uncal] = render_scene_outputs(scene);

        std::array<IsotonicMap, 3> scene_maps{IsotonicMap::identity(), IsotonicMap::identity(),
                                              IsotonicMap::identity()};
        if (model) {
            const IsotonicMap map = predict_calibration_map(*model, pred, umap_uncal);
            scene_maps = {map, map, map};
        } else {
            const auto truths = scene.truth_pixels();
            for (int c = 0; c < 3; ++c)
                scene_maps[static_cast<size_t>(c)] = fit_isotonic(recalibration_pairs_from_levels(
                    predicted_levels(scene.forecasts, truths, static_cast<Channel>(c))));
        }

        ScalarImage umap_cal(scene.config.height, scene.config.width);
        for (int i = 0; i < scene.pixel_count(); ++i)
            umap_cal.data[static_cast<size_t>(i)] =
                iqr_uncertainty(scene_maps, scene.forecasts[static_cast<size_t>(i)]);

        const auto ig_uncal = information_gain_curve(pred, scene.truth, umap_uncal, gammas);
        const auto ig_cal = information_gain_curve(pred, scene.truth, umap_cal, gammas);
        for (size_t g = 0; g < gammas.size(); ++g)
            ig_rows.push_back({std::to_string(v), format_g9(gammas[g]),
                               format_g9(ig_uncal[g].second), format_g9(ig_cal[g].second)});

        CandidateView cand;
        cand.id = static_cast<int>(v);
        cand.pred_image = pred;
        cand.truth_image = scene.truth;
        cand.umap = umap_uncal;
        candidates.push_back(std::move(cand));
        maps.push_back(scene_maps);
        forecasts.push_back(scene.forecasts);
    }

    write_csv(config.out_dir / "information_gain.csv",
              {"scene", "gamma", "psnr_uncalibrated_ranking", "psnr_calibrated_ranking"},
              ig_rows);

    const int selected = select_next_view(candidates, maps, forecasts);
    std::ofstream log(config.out_dir / "selection.txt");
    log << "selected view " << selected << "\n";
    std::cout << "selected view " << selected << "\n";
}

void run_bench_iqr(const BenchIqrConfig& config) {
    if (config.reps < 1 || config.samples < 1 || config.grid_points < 2)
        throw ValidationError("bench-iqr: invalid repetition or sample counts");

    // representative calibrated pixel: bimodal-ish mixture under a curved map
    const LaplacianMixture1D mix({0.6, 0.4}, {0.4, 0.6}, {0.05, 0.12});
    std::vector<double> raw(384);
    for (int i = 0; i < 384; ++i)
        raw[static_cast<size_t>(i)] = analytic_distortion_curve(2.0, i / 383.0);
    const IsotonicMap map = monotonize_curve(raw);

    using clock = std::chrono::steady_clock;
    volatile double sink = 0.0;

    const auto t0 = clock::now();
    for (int r = 0; r < config.reps; ++r)
        sink = calibrated_quantile(map, mix, 0.75) - calibrated_quantile(map, mix, 0.25);
    const auto t1 = clock::now();

    Rng rng(mix_seed(config.seed, 0xBE));
    for (int r = 0; r < config.reps; ++r) {
        double mean = 0.0, second = 0.0;
        for (int s = 0; s < config.samples; ++s) {
            const double x = mix.quantile(map.invert(rng.uniform_open()));
            mean += x;
            second += x * x;
        }
        mean /= config.samples;
        sink = second / config.samples - mean * mean;
    }
    const auto t2 = clock::now();

    // integrate the calibrated density r(F(x)) f(x) on a wide bracket
    const double lo = 0.4 - 40.0 * 0.12, hi = 0.6 + 40.0 * 0.12;
    for (int r = 0; r < config.reps; ++r) {
        const double dx = (hi - lo) / (config.grid_points - 1);
        double mass = 0.0, m1 = 0.0, m2 = 0.0;
        for (int i = 0; i < config.grid_points; ++i) {
            const double x = lo + dx * i;
            const double w = (i == 0 || i == config.grid_points - 1) ? 0.5 : 1.0;
            const double rho = w * map.derivative(mix.cdf(x)) * mix.pdf(x);
            mass += rho;
            m1 += rho * x;
            m2 += rho * x * x;
        }
        sink = m2 / mass - (m1 / mass) * (m1 / mass);
    }
    const auto t3 = clock::now();
    (void)sink;

    const double per_a = std::chrono::duration<double>(t1 - t0).count() / config.reps;
    const double per_b = std::chrono::duration<double>(t2 - t1).count() / config.reps;
    const double per_c = std::chrono::duration<double>(t3 - t2).count() / config.reps;

    std::printf("method,seconds_per_pixel\n");
    std::printf("iqr_interpolation,%.9g\n", per_a);
    std::printf("variance_sampling,%.9g\n", per_b);
    std::printf("variance_integration,%.9g\n", per_c);
    std::printf("ratio_sampling_over_iqr,%.9g\n", per_b / per_a);
    std::printf("ratio_integration_over_iqr,%.9g\n", per_c / per_a);
}

void run_demo_overfit(const DemoOverfitConfig& config) {
    if (config.scenes < 1) throw ValidationError("demo-train-overfit: need at least one scene");
    if (!(config.overfit_factor > 0.0 && config.overfit_factor < 1.0))
        throw ValidationError("demo-train-overfit: overfit factor must lie in (0,1)");

    std::vector<std::vector<std::string>> rows;
    for (int s = 0; s < config.scenes; ++s) {
        // forecast matches the test-pixel distribution (k = 1); training-pixel
        // residuals are shrunk, the analog of a NeRF memorizing its train rays
        SceneConfig sc;
        sc.height = config.height;
        sc.width = config.width;
        sc.family = SceneFamily::Scale;
        sc.k = 1.0;
        sc.base_scale = config.base_scale;
        sc.seed = mix_seed(config.seed, static_cast<std::uint64_t>(s));
        const SyntheticScene scene = generate_scene(sc);

        const int n = scene.pixel_count();
        Rng mask_rng(mix_seed(sc.seed, 0xD1));
        std::vector<int> idx(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
        for (int i = n - 1; i > 0; --i)
            std::swap(idx[static_cast<size_t>(i)],
                      idx[static_cast<size_t>(mask_rng.below(static_cast<std::uint64_t>(i + 1)))]);
        std::vector<bool> is_train(static_cast<size_t>(n), false);
        for (int i = 0; i < n / 2; ++i) is_train[static_cast<size_t>(idx[static_cast<size_t>(i)])] = true;

        Rng train_rng(mix_seed(sc.seed, 0xD2));
        std::array<std::vector<double>, 3> train_levels, test_levels;
        for (int y = 0; y < sc.height; ++y) {
            for (int x = 0; x < sc.width; ++x) {
                const int i = y * sc.width + x;
                const auto& fc = scene.forecasts[static_cast<size_t>(i)];
                for (int c = 0; c < 3; ++c) {
                    if (is_train[static_cast<size_t>(i)]) {
                        const double draw = std::clamp(
                            train_rng.laplace(scene.field.at(y, x, c),
                                              config.overfit_factor * sc.base_scale),
                            0.0, 1.0);
                        train_levels[static_cast<size_t>(c)].push_back(fc.channel(c).cdf(draw));
                    } else {
                        test_levels[static_cast<size_t>(c)].push_back(
                            fc.channel(c).cdf(scene.truth.at(y, x, c)));
                    }
                }
            }
        }

        double err_identity = 0.0, err_trainfit = 0.0;
        for (int c = 0; c < 3; ++c) {
            const IsotonicMap map = fit_isotonic(
                recalibration_pairs_from_levels(train_levels[static_cast<size_t>(c)]));
            err_identity += calibration_error(test_levels[static_cast<size_t>(c)]) / 3.0;
            err_trainfit +=
                calibration_error(apply_map(map, test_levels[static_cast<size_t>(c)])) / 3.0;
        }
        rows.push_back({std::to_string(s), format_g9(err_identity), format_g9(err_trainfit),
                        err_trainfit > err_identity ? "1" : "0"});
    }
    write_csv(config.out_path, {"scene", "cal_err_identity", "cal_err_train_fitted", "worse"},
              rows);
}

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

} // namespace pixcal::cli
