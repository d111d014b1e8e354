#ifndef PIXCAL_CLI_HPP
#define PIXCAL_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pixcal/scene_harness.hpp"

namespace pixcal::cli {

// exit codes: 0 success, 1 validation error, 2 I/O error
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct GenCorpusConfig {
    int train = 30;
    int test = 5;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
    int height = 64;
    int width = 64;
    double base_scale = 0.1;
    std::string family = "scale";
    double k_min = 0.3;
    double k_max = 3.0;
};

struct FitBasisConfig {
    std::filesystem::path corpus_dir;
    std::filesystem::path out_path;
    int curves = 21;      // leading train scenes used for the basis
    int components = 3;
    int grid = 384;
    std::string channel = "pooled"; // pooled | R | G | B
};

struct TrainMetaConfig {
    std::filesystem::path corpus_dir;
    std::filesystem::path basis_path;
    std::filesystem::path out_path;
    std::optional<std::filesystem::path> trace_path;
    std::optional<std::filesystem::path> features_path; // external feature CSV
    double lr = 1e-3;
    int epochs = 2000;
    int batch = 0;
    std::uint64_t seed = 0;
    double leaky_slope = 0.01;
};

struct PredictConfig {
    std::filesystem::path model_path;
    std::filesystem::path scene_path;
    std::filesystem::path out_path;
    std::optional<std::filesystem::path> features_path;
    int feature_row = 0;
};

struct EvalConfig {
    std::filesystem::path corpus_dir;
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> model_path;
    std::vector<std::string> modes; // subset of identity|oracle|meta; empty = defaults
    bool pooled_fit = false;        // one oracle map fit on all channels
    int grid = 384;
    bool write_curves = true;
};

struct PlanConfig {
    std::filesystem::path corpus_dir;
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> model_path; // absent -> oracle maps
};

struct BenchIqrConfig {
    int reps = 1000;
    int samples = 10000;
    int grid_points = 10000;
    std::uint64_t seed = 0;
};

struct DemoOverfitConfig {
    std::uint64_t seed = 0;
    int scenes = 3;
    std::filesystem::path out_path;
    int height = 64;
    int width = 64;
    double base_scale = 0.1;
    double overfit_factor = 0.5; // training residual scale relative to test
};

void run_gen_corpus(const GenCorpusConfig& config);
void run_fit_basis(const FitBasisConfig& config);
void run_train_meta(const TrainMetaConfig& config);
void run_predict(const PredictConfig& config);
void run_eval(const EvalConfig& config);
void run_plan(const PlanConfig& config);
void run_bench_iqr(const BenchIqrConfig& config);
void run_demo_overfit(const DemoOverfitConfig& config);

/// Corpus manifest access (shared by commands and tests).
struct ManifestEntry {
    std::string file;
    std::string split;
    int id = 0;
    double k = 1.0;
    std::uint64_t scene_seed = 0;
};

struct Manifest {
    GenCorpusConfig config;
    std::vector<ManifestEntry> entries;
};

Manifest load_manifest(const std::filesystem::path& corpus_dir);
std::vector<SyntheticScene> load_split(const std::filesystem::path& corpus_dir,
                                       const std::string& split);

/// Maps an exception to the documented exit code, printing to stderr.
int run_guarded(const std::function<void()>& body);

} // namespace pixcal::cli

#endif
