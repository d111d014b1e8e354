#ifndef PIXCAL_META_CALIBRATOR_HPP
#define PIXCAL_META_CALIBRATOR_HPP

#include <cstdint>
#include <vector>

#include "pixcal/curve_space.hpp"
#include "pixcal/grid.hpp"
#include "pixcal/isotonic.hpp"

namespace pixcal {

struct FeatureVector {
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
};

struct FeatureExtractorConfig {
    int image_hist_bins = 16;
    int umap_hist_bins = 16;

    // 2 moments + histogram per image channel, gradient magnitude per channel,
    // 4 umap summaries + umap histogram + log-mean
    int feature_dim() const { return 3 * (2 + image_hist_bins) + 3 + 4 + umap_hist_bins + 1; }
};

/// Deterministic image/uncertainty statistics, concatenated in a fixed order:
///   [0..5]   per-channel image mean and population std (R,G,B)
///   [6..53]  per-channel 16-bin histogram over [0,1], each normalized to sum 1
///   [54..56] per-channel mean absolute finite difference (horizontal+vertical)
///   [57..60] umap mean, std, max, 90th percentile (linear interpolation)
///   [61..76] umap 16-bin histogram over [0, max], normalized to sum 1
///   [77]     umap log-mean log(1 + mean)
/// All entries are averages or normalized counts, so the vector is independent
/// of resolution for constant inputs.
FeatureVector extract_baseline_features(const ImageRgb& image, const ScalarImage& umap,
                                        const FeatureExtractorConfig& config = {});

/// Fully-connected network with leaky-rectified hidden layers and an affine
/// output that is de-standardized with the stored target statistics.
struct MlpModel {
    std::vector<int> layer_dims;                 // {d, 128, 128, n}
    std::vector<std::vector<double>> weights;    // per layer, row-major out x in
    std::vector<std::vector<double>> biases;     // per layer
    double leaky_slope = 0.01;
    std::vector<double> target_mean;             // n
    std::vector<double> target_scale;            // n, > 0

    void validate() const;
};

/// Raw network output in standardized target space.
std::vector<double> mlp_forward_raw(const MlpModel& model, const std::vector<double>& input);

/// De-standardized prediction: raw * target_scale + target_mean.
CurveCoefficients mlp_forward(const MlpModel& model, const FeatureVector& features);

struct TrainHyper {
    double lr = 1e-3;
    int epochs = 2000;
    int batch = 0; // 0 = full batch
    std::uint64_t seed = 0;
    double leaky_slope = 0.01;
};

struct MlpGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

/// Mean squared error of mlp_forward_raw against standardized targets.
double mlp_loss(const MlpModel& model, const std::vector<std::vector<double>>& inputs,
                const std::vector<std::vector<double>>& targets_std);

/// Analytic gradient of mlp_loss by backpropagation.
MlpGradients mlp_loss_gradient(const MlpModel& model,
                               const std::vector<std::vector<double>>& inputs,
                               const std::vector<std::vector<double>>& targets_std,
                               double* loss_out = nullptr);

struct MlpTrainResult {
    MlpModel model;
    std::vector<double> loss_trace; // full-dataset loss after each epoch
};

/// Adam on the MSE of standardized targets.  Targets are standardized to zero
/// mean and unit scale per output dimension (scale floored at 1e-12 -> 1.0 for
/// constant targets) and the statistics are stored in the returned model.
/// Weight init is uniform in +-1/sqrt(fan_in), seeded; training is
/// single-threaded and bit-deterministic for a fixed seed.
MlpTrainResult train_mlp(const std::vector<FeatureVector>& features,
                         const std::vector<std::vector<double>>& targets,
                         const std::vector<int>& hidden_dims, const TrainHyper& hyper);

struct MetaCalibratorModel {
    FeatureExtractorConfig extractor;
    MlpModel mlp;
    PcaCurveBasis basis;

    void validate() const;
};

struct MetaTrainResult {
    MetaCalibratorModel model;
    std::vector<double> loss_trace;
};

/// Supervised fit of features -> PCA coefficients with hidden layers [128,128].
MetaTrainResult train_meta_calibrator(
    const std::vector<std::pair<FeatureVector, CurveCoefficients>>& dataset,
    const PcaCurveBasis& basis, const TrainHyper& hyper);

/// One-shot prediction of a scene's calibration map from rendered outputs.
/// Consumes no ground truth: features -> MLP -> reconstruct -> monotonize.
IsotonicMap predict_calibration_map(const MetaCalibratorModel& model, const ImageRgb& image,
                                    const ScalarImage& umap);

/// Prediction from an externally computed feature vector.
IsotonicMap predict_calibration_map(const MetaCalibratorModel& model,
                                    const FeatureVector& features);

} // namespace pixcal

#endif
