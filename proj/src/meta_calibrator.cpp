#include "pixcal/meta_calibrator.hpp"

#include <algorithm>
#include <cmath>

#include "pixcal/errors.hpp"
#include "pixcal/rng.hpp"

namespace pixcal {

namespace {

void append_histogram(std::vector<double>& out, const std::vector<double>& values, double lo,
                      double hi, int bins) {
    std::vector<double> counts(static_cast<size_t>(bins), 0.0);
    const double span = hi - lo;
    for (double v : values) {
        int b = span > 0.0 ? static_cast<int>((v - lo) / span * bins) : 0;
        b = std::clamp(b, 0, bins - 1);
        counts[static_cast<size_t>(b)] += 1.0;
    }
    const double total = static_cast<double>(values.size());
    for (double c : counts) out.push_back(c / total);
}

std::pair<double, double> mean_and_std(const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return {mean, std::sqrt(std::max(var, 0.0))};
}

double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double rank = q * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(rank);
    if (lo + 1 >= values.size()) return values.back();
    const double t = rank - static_cast<double>(lo);
    return values[lo] * (1.0 - t) + values[lo + 1] * t;
}

} // namespace

FeatureVector extract_baseline_features(const ImageRgb& image, const ScalarImage& umap,
                                        const FeatureExtractorConfig& config) {
    require_congruent(image, umap, "extract_baseline_features");
    if (image.height < 2 || image.width < 2)
        throw ValidationError("extract_baseline_features: grid must be at least 2x2");

    FeatureVector feat;
    feat.values.reserve(static_cast<size_t>(config.feature_dim()));

    std::array<std::vector<double>, 3> channel;
    for (int c = 0; c < 3; ++c) {
        channel[static_cast<size_t>(c)].reserve(static_cast<size_t>(image.pixel_count()));
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x)
                channel[static_cast<size_t>(c)].push_back(image.at(y, x, c));
    }

    for (int c = 0; c < 3; ++c) {
        const auto [m, s] = mean_and_std(channel[static_cast<size_t>(c)]);
        feat.values.push_back(m);
        feat.values.push_back(s);
    }
    for (int c = 0; c < 3; ++c)
        append_histogram(feat.values, channel[static_cast<size_t>(c)], 0.0, 1.0,
                         config.image_hist_bins);
    for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        long count = 0;
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x + 1 < image.width; ++x, ++count)
                acc += std::fabs(image.at(y, x + 1, c) - image.at(y, x, c));
        for (int y = 0; y + 1 < image.height; ++y)
            for (int x = 0; x < image.width; ++x, ++count)
                acc += std::fabs(image.at(y + 1, x, c) - image.at(y, x, c));
        feat.values.push_back(acc / static_cast<double>(count));
    }

    const std::vector<double>& u = umap.data;
    const auto [um, us] = mean_and_std(u);
    const double umax = *std::max_element(u.begin(), u.end());
    feat.values.push_back(um);
    feat.values.push_back(us);
    feat.values.push_back(umax);
    feat.values.push_back(percentile(u, 0.9));
    append_histogram(feat.values, u, 0.0, umax, config.umap_hist_bins);
    feat.values.push_back(std::log1p(um));

    return feat;
}

void MlpModel::validate() const {
    if (layer_dims.size() < 2) throw ValidationError("mlp: need at least input and output dims");
    const size_t layers = layer_dims.size() - 1;
    if (weights.size() != layers || biases.size() != layers)
        throw ValidationError("mlp: layer count mismatch");
    for (size_t l = 0; l < layers; ++l) {
        const size_t rows = static_cast<size_t>(layer_dims[l + 1]);
        const size_t cols = static_cast<size_t>(layer_dims[l]);
        if (weights[l].size() != rows * cols || biases[l].size() != rows)
            throw ValidationError("mlp: weight/bias shape mismatch");
    }
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
        throw ValidationError("mlp: leaky slope must lie in (0,1)");
    const size_t n = static_cast<size_t>(layer_dims.back());
    if (target_mean.size() != n || target_scale.size() != n)
        throw ValidationError("mlp: standardization length mismatch");
    for (double s : target_scale)
        if (!(s > 0.0)) throw ValidationError("mlp: target scale must be positive");
}

namespace {

// forward pass keeping pre-activations and activations for backprop
struct ForwardState {
    std::vector<std::vector<double>> pre;  // per layer
    std::vector<std::vector<double>> act;  // act[0] = input
};

void forward_into(const MlpModel& model, const std::vector<double>& input, ForwardState& st) {
    const size_t layers = model.weights.size();
    st.pre.resize(layers);
    st.act.resize(layers + 1);
    st.act[0] = input;
    for (size_t l = 0; l < layers; ++l) {
        const size_t rows = static_cast<size_t>(model.layer_dims[l + 1]);
        const size_t cols = static_cast<size_t>(model.layer_dims[l]);
        st.pre[l].assign(rows, 0.0);
        const std::vector<double>& in = st.act[l];
        for (size_t r = 0; r < rows; ++r) {
            double z = model.biases[l][r];
            const double* wrow = model.weights[l].data() + r * cols;
            for (size_t c = 0; c < cols; ++c) z += wrow[c] * in[c];
            st.pre[l][r] = z;
        }
        st.act[l + 1] = st.pre[l];
        if (l + 1 < layers) {
            for (double& v : st.act[l + 1])
                if (v < 0.0) v *= model.leaky_slope;
        }
    }
}

} // namespace

std::vector<double> mlp_forward_raw(const MlpModel& model, const std::vector<double>& input) {
    if (static_cast<int>(input.size()) != model.layer_dims.front())
        throw ValidationError("mlp_forward: input dimension mismatch");
    ForwardState st;
    forward_into(model, input, st);
    return st.act.back();
}

CurveCoefficients mlp_forward(const MlpModel& model, const FeatureVector& features) {
    std::vector<double> raw = mlp_forward_raw(model, features.values);
    CurveCoefficients out;
    out.theta.resize(raw.size());
    for (size_t i = 0; i < raw.size(); ++i)
        out.theta[i] = raw[i] * model.target_scale[i] + model.target_mean[i];
    return out;
}

double mlp_loss(const MlpModel& model, const std::vector<std::vector<double>>& inputs,
                const std::vector<std::vector<double>>& targets_std) {
    double acc = 0.0;
    size_t terms = 0;
    ForwardState st;
    for (size_t i = 0; i < inputs.size(); ++i) {
        forward_into(model, inputs[i], st);
        const std::vector<double>& out = st.act.back();
        for (size_t j = 0; j < out.size(); ++j) {
            const double d = out[j] - targets_std[i][j];
            acc += d * d;
            ++terms;
        }
    }
    return acc / static_cast<double>(terms);
}

MlpGradients mlp_loss_gradient(const MlpModel& model,
                               const std::vector<std::vector<double>>& inputs,
                               const std::vector<std::vector<double>>& targets_std,
                               double* loss_out) {
    const size_t layers = model.weights.size();
    MlpGradients grads;
    grads.weights.resize(layers);
    grads.biases.resize(layers);
    for (size_t l = 0; l < layers; ++l) {
        grads.weights[l].assign(model.weights[l].size(), 0.0);
        grads.biases[l].assign(model.biases[l].size(), 0.0);
    }

    const double norm = static_cast<double>(inputs.size()) *
                        static_cast<double>(model.layer_dims.back());
    double loss = 0.0;
    ForwardState st;
    std::vector<double> delta, delta_prev;
    for (size_t i = 0; i < inputs.size(); ++i) {
        forward_into(model, inputs[i], st);
        const std::vector<double>& out = st.act.back();
        delta.resize(out.size());
        for (size_t j = 0; j < out.size(); ++j) {
            const double d = out[j] - targets_std[i][j];
            loss += d * d;
            delta[j] = 2.0 * d / norm;
        }
        for (size_t l = layers; l-- > 0;) {
            const size_t rows = static_cast<size_t>(model.layer_dims[l + 1]);
            const size_t cols = static_cast<size_t>(model.layer_dims[l]);
            const std::vector<double>& in = st.act[l];
            double* gw = grads.weights[l].data();
            for (size_t r = 0; r < rows; ++r) {
                grads.biases[l][r] += delta[r];
                double* gwrow = gw + r * cols;
                for (size_t c = 0; c < cols; ++c) gwrow[c] += delta[r] * in[c];
            }
            if (l == 0) break;
            delta_prev.assign(cols, 0.0);
            for (size_t r = 0; r < rows; ++r) {
                const double* wrow = model.weights[l].data() + r * cols;
                for (size_t c = 0; c < cols; ++c) delta_prev[c] += wrow[c] * delta[r];
            }
            // pull back through the leaky rectifier of layer l-1
            for (size_t c = 0; c < cols; ++c)
                if (st.pre[l - 1][c] < 0.0) delta_prev[c] *= model.leaky_slope;
            delta.swap(delta_prev);
        }
    }
    if (loss_out) *loss_out = loss / norm;
    return grads;
}

MlpTrainResult train_mlp(const std::vector<FeatureVector>& features,
                         const std::vector<std::vector<double>>& targets,
                         const std::vector<int>& hidden_dims, const TrainHyper& hyper) {
    if (features.empty() || features.size() != targets.size())
        throw ValidationError("train_mlp: empty dataset or feature/target length mismatch");
    const int d = features[0].size();
    const int n_out = static_cast<int>(targets[0].size());
    for (const auto& f : features)
        if (f.size() != d) throw ValidationError("train_mlp: inconsistent feature dims");
    for (const auto& t : targets)
        if (static_cast<int>(t.size()) != n_out)
            throw ValidationError("train_mlp: inconsistent target dims");
    if (hyper.epochs < 1) throw ValidationError("train_mlp: epochs must be >= 1");

    MlpModel model;
    model.layer_dims.push_back(d);
    for (int h : hidden_dims) model.layer_dims.push_back(h);
    model.layer_dims.push_back(n_out);
    model.leaky_slope = hyper.leaky_slope;

    // standardize targets per output dimension
    model.target_mean.assign(static_cast<size_t>(n_out), 0.0);
    model.target_scale.assign(static_cast<size_t>(n_out), 1.0);
    for (int j = 0; j < n_out; ++j) {
        double m = 0.0;
        for (const auto& t : targets) m += t[static_cast<size_t>(j)];
        m /= static_cast<double>(targets.size());
        double var = 0.0;
        for (const auto& t : targets) {
            const double dv = t[static_cast<size_t>(j)] - m;
            var += dv * dv;
        }
        var /= static_cast<double>(targets.size());
        const double s = std::sqrt(std::max(var, 0.0));
        model.target_mean[static_cast<size_t>(j)] = m;
        model.target_scale[static_cast<size_t>(j)] = s > 1e-12 ? s : 1.0;
    }
    std::vector<std::vector<double>> y_std(targets.size());
    for (size_t i = 0; i < targets.size(); ++i) {
        y_std[i].resize(static_cast<size_t>(n_out));
        for (int j = 0; j < n_out; ++j)
            y_std[i][static_cast<size_t>(j)] =
                (targets[i][static_cast<size_t>(j)] - model.target_mean[static_cast<size_t>(j)]) /
                model.target_scale[static_cast<size_t>(j)];
    }
    std::vector<std::vector<double>> x(features.size());
    for (size_t i = 0; i < features.size(); ++i) x[i] = features[i].values;

    // init: uniform +-1/sqrt(fan_in), biases zero
    Rng rng(mix_seed(hyper.seed, 0xA11));
    const size_t layers = model.layer_dims.size() - 1;
    model.weights.resize(layers);
    model.biases.resize(layers);
    for (size_t l = 0; l < layers; ++l) {
        const size_t rows = static_cast<size_t>(model.layer_dims[l + 1]);
        const size_t cols = static_cast<size_t>(model.layer_dims[l]);
        const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
        model.weights[l].resize(rows * cols);
        for (double& w : model.weights[l]) w = rng.uniform(-bound, bound);
        model.biases[l].assign(rows, 0.0);
    }

    // Adam state
    MlpGradients m1, m2;
    m1.weights.resize(layers);
    m1.biases.resize(layers);
    m2.weights.resize(layers);
    m2.biases.resize(layers);
    for (size_t l = 0; l < layers; ++l) {
        m1.weights[l].assign(model.weights[l].size(), 0.0);
        m1.biases[l].assign(model.biases[l].size(), 0.0);
        m2.weights[l].assign(model.weights[l].size(), 0.0);
        m2.biases[l].assign(model.biases[l].size(), 0.0);
    }
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    auto adam_update = [&](const MlpGradients& g) {
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (size_t l = 0; l < layers; ++l) {
            for (size_t i = 0; i < model.weights[l].size(); ++i) {
                double& mw = m1.weights[l][i];
                double& vw = m2.weights[l][i];
                const double gr = g.weights[l][i];
                mw = beta1 * mw + (1.0 - beta1) * gr;
                vw = beta2 * vw + (1.0 - beta2) * gr * gr;
                model.weights[l][i] -= hyper.lr * (mw / c1) / (std::sqrt(vw / c2) + eps);
            }
            for (size_t i = 0; i < model.biases[l].size(); ++i) {
                double& mb = m1.biases[l][i];
                double& vb = m2.biases[l][i];
                const double gr = g.biases[l][i];
                mb = beta1 * mb + (1.0 - beta1) * gr;
                vb = beta2 * vb + (1.0 - beta2) * gr * gr;
                model.biases[l][i] -= hyper.lr * (mb / c1) / (std::sqrt(vb / c2) + eps);
            }
        }
    };

    MlpTrainResult result;
    result.loss_trace.reserve(static_cast<size_t>(hyper.epochs));
    const int batch = hyper.batch > 0 ? std::min<int>(hyper.batch, static_cast<int>(x.size()))
                                      : static_cast<int>(x.size());
    Rng shuffle_rng(mix_seed(hyper.seed, 0xB22));
    std::vector<size_t> order(x.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<std::vector<double>> bx, by;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        if (batch == static_cast<int>(x.size())) {
            adam_update(mlp_loss_gradient(model, x, y_std));
        } else {
            for (size_t i = order.size() - 1; i > 0; --i)
                std::swap(order[i], order[shuffle_rng.below(i + 1)]);
            for (size_t start = 0; start < x.size(); start += static_cast<size_t>(batch)) {
                const size_t stop = std::min(x.size(), start + static_cast<size_t>(batch));
                bx.clear();
                by.clear();
                for (size_t i = start; i < stop; ++i) {
                    bx.push_back(x[order[i]]);
                    by.push_back(y_std[order[i]]);
                }
                adam_update(mlp_loss_gradient(model, bx, by));
            }
        }
        const double epoch_loss = mlp_loss(model, x, y_std);
        if (!std::isfinite(epoch_loss))
            throw TrainingDivergedError("train_mlp: non-finite loss at epoch " +
                                        std::to_string(epoch));
        result.loss_trace.push_back(epoch_loss);
    }
    result.model = std::move(model);
    return result;
}

void MetaCalibratorModel::validate() const {
    mlp.validate();
    if (mlp.layer_dims.back() != basis.component_count())
        throw ValidationError("meta model: MLP output dim must equal basis components");
    if (mlp.layer_dims.front() != extractor.feature_dim())
        throw ValidationError("meta model: MLP input dim must equal extractor output");
}

MetaTrainResult train_meta_calibrator(
    const std::vector<std::pair<FeatureVector, CurveCoefficients>>& dataset,
    const PcaCurveBasis& basis, const TrainHyper& hyper) {
    if (dataset.empty()) throw ValidationError("train_meta_calibrator: empty dataset");
    std::vector<FeatureVector> features;
    std::vector<std::vector<double>> targets;
    features.reserve(dataset.size());
    targets.reserve(dataset.size());
    for (const auto& [f, c] : dataset) {
        if (static_cast<int>(c.theta.size()) != basis.component_count())
            throw ValidationError("train_meta_calibrator: coefficient/basis size mismatch");
        features.push_back(f);
        targets.push_back(c.theta);
    }
    MlpTrainResult fit = train_mlp(features, targets, {128, 128}, hyper);

    MetaTrainResult result;
    result.model.mlp = std::move(fit.model);
    result.model.basis = basis;
    result.loss_trace = std::move(fit.loss_trace);
    result.model.validate();
    return result;
}

IsotonicMap predict_calibration_map(const MetaCalibratorModel& model,
                                    const FeatureVector& features) {
    const CurveCoefficients theta = mlp_forward(model.mlp, features);
    return monotonize_curve(reconstruct_curve(model.basis, theta));
}

IsotonicMap predict_calibration_map(const MetaCalibratorModel& model, const ImageRgb& image,
                                    const ScalarImage& umap) {
    return predict_calibration_map(model,
                                   extract_baseline_features(image, umap, model.extractor));
}

} // namespace pixcal
