#include <CLI11.hpp>

#include "pixcal/cli.hpp"

int main(int argc, char** argv) {
    using namespace pixcal::cli;

    CLI::App app{"pixcal: calibration toolkit for per-pixel Laplacian-mixture forecasts"};
    app.require_subcommand(1);

    GenCorpusConfig gen;
    auto* cmd_gen = app.add_subcommand("gen-corpus", "generate a synthetic scene corpus");
    cmd_gen->add_option("--train", gen.train, "number of training scenes");
    cmd_gen->add_option("--test", gen.test, "number of test scenes");
    cmd_gen->add_option("--seed", gen.seed, "corpus seed")->required();
    cmd_gen->add_option("--out", gen.out_dir, "output directory")->required();
    cmd_gen->add_option("--height", gen.height, "scene height");
    cmd_gen->add_option("--width", gen.width, "scene width");
    cmd_gen->add_option("--base-scale", gen.base_scale, "true Laplace scale");
    cmd_gen->add_option("--family", gen.family, "scale | shape-heterogeneous");
    cmd_gen->add_option("--k-min", gen.k_min, "lower bound of the log-uniform k draw");
    cmd_gen->add_option("--k-max", gen.k_max, "upper bound of the log-uniform k draw");

    FitBasisConfig fit;
    auto* cmd_fit = app.add_subcommand("fit-basis", "fit a PCA basis of calibration curves");
    cmd_fit->add_option("--corpus", fit.corpus_dir, "corpus directory")->required();
    cmd_fit->add_option("--out", fit.out_path, "basis JSON path")->required();
    cmd_fit->add_option("--curves", fit.curves, "leading train scenes used");
    cmd_fit->add_option("--components", fit.components, "number of PCA components");
    cmd_fit->add_option("--grid", fit.grid, "curve grid size");
    cmd_fit->add_option("--channel", fit.channel, "pooled | R | G | B");

    TrainMetaConfig train;
    auto* cmd_train = app.add_subcommand("train-meta", "train the meta-calibrator MLP");
    cmd_train->add_option("--corpus", train.corpus_dir, "corpus directory")->required();
    cmd_train->add_option("--basis", train.basis_path, "basis JSON")->required();
    cmd_train->add_option("--out", train.out_path, "model JSON path")->required();
    cmd_train->add_option("--seed", train.seed, "training seed")->required();
    std::string trace_path, features_path;
    cmd_train->add_option("--trace", trace_path, "loss trace CSV path");
    cmd_train->add_option("--features", features_path, "external feature CSV (one row per scene)");
    cmd_train->add_option("--lr", train.lr, "learning rate");
    cmd_train->add_option("--epochs", train.epochs, "training epochs");
    cmd_train->add_option("--batch", train.batch, "minibatch size (0 = full batch)");
    cmd_train->add_option("--leaky-slope", train.leaky_slope, "leaky rectifier slope");

    PredictConfig pred;
    auto* cmd_pred = app.add_subcommand("predict", "predict a scene's calibration map");
    cmd_pred->add_option("--model", pred.model_path, "model JSON")->required();
    cmd_pred->add_option("--scene", pred.scene_path, "scene JSON");
    cmd_pred->add_option("--out", pred.out_path, "map JSON path")->required();
    std::string pred_features;
    cmd_pred->add_option("--features", pred_features, "external feature CSV");
    cmd_pred->add_option("--row", pred.feature_row, "row in the feature CSV");

    EvalConfig eval;
    auto* cmd_eval = app.add_subcommand("eval", "evaluate calibration on the test split");
    cmd_eval->add_option("--corpus", eval.corpus_dir, "corpus directory")->required();
    cmd_eval->add_option("--out-dir", eval.out_dir, "output directory")->required();
    std::string eval_model;
    cmd_eval->add_option("--model", eval_model, "meta-calibrator model JSON");
    cmd_eval->add_option("--modes", eval.modes, "subset of identity, oracle, meta");
    cmd_eval->add_flag("--pooled-fit", eval.pooled_fit,
                       "fit one oracle map on all channels instead of per-channel maps");
    cmd_eval->add_option("--grid", eval.grid, "curve grid size");
    bool no_curves = false;
    cmd_eval->add_flag("--no-curves", no_curves, "skip per-scene curve CSVs");

    PlanConfig plan;
    auto* cmd_plan = app.add_subcommand("plan", "next-best-view selection and information gain");
    cmd_plan->add_option("--corpus", plan.corpus_dir, "corpus directory")->required();
    cmd_plan->add_option("--out-dir", plan.out_dir, "output directory")->required();
    std::string plan_model;
    cmd_plan->add_option("--model", plan_model,
                         "meta model JSON (default: oracle maps fit per scene)");

    BenchIqrConfig bench;
    auto* cmd_bench = app.add_subcommand("bench-iqr", "time IQR vs variance estimators");
    cmd_bench->add_option("--reps", bench.reps, "repetitions per method");
    cmd_bench->add_option("--samples", bench.samples, "Monte Carlo samples for the variance");
    cmd_bench->add_option("--grid-points", bench.grid_points, "integration grid points");
    cmd_bench->add_option("--seed", bench.seed, "sampling seed");

    DemoOverfitConfig demo;
    auto* cmd_demo = app.add_subcommand(
        "demo-train-overfit", "show that calibrating on training pixels hurts test calibration");
    cmd_demo->add_option("--seed", demo.seed, "scene seed")->required();
    cmd_demo->add_option("--out", demo.out_path, "report CSV path")->required();
    cmd_demo->add_option("--scenes", demo.scenes, "number of constructed scenes");
    cmd_demo->add_option("--height", demo.height, "scene height");
    cmd_demo->add_option("--width", demo.width, "scene width");
    cmd_demo->add_option("--base-scale", demo.base_scale, "true Laplace scale");
    cmd_demo->add_option("--overfit-factor", demo.overfit_factor,
                         "training residual scale relative to test");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    if (cmd_gen->parsed()) return run_guarded([&] { run_gen_corpus(gen); });
    if (cmd_fit->parsed()) return run_guarded([&] { run_fit_basis(fit); });
    if (cmd_train->parsed())
        return run_guarded([&] {
            if (!trace_path.empty()) train.trace_path = trace_path;
            if (!features_path.empty()) train.features_path = features_path;
            run_train_meta(train);
        });
    if (cmd_pred->parsed())
        return run_guarded([&] {
            if (!pred_features.empty()) pred.features_path = pred_features;
            run_predict(pred);
        });
    if (cmd_eval->parsed())
        return run_guarded([&] {
            if (!eval_model.empty()) eval.model_path = eval_model;
            eval.write_curves = !no_curves;
            run_eval(eval);
        });
    if (cmd_plan->parsed())
        return run_guarded([&] {
            if (!plan_model.empty()) plan.model_path = plan_model;
            run_plan(plan);
        });
    if (cmd_bench->parsed()) return run_guarded([&] { run_bench_iqr(bench); });
    if (cmd_demo->parsed()) return run_guarded([&] { run_demo_overfit(demo); });
    return kExitValidation;
}
