#include "pixcal/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pixcal {

using json = nlohmann::ordered_json;

namespace {

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError("cannot parse " + path.string() + ": " + e.what());
    }
    return j;
}

void write_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(1) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

json image_to_json(const ImageRgb& img) { return json(img.data); }

ImageRgb image_from_json(const json& j, int h, int w) {
    ImageRgb img(h, w);
    const auto vals = j.get<std::vector<double>>();
    if (vals.size() != img.data.size()) throw IoError("image array has wrong length");
    img.data = vals;
    return img;
}

} // namespace

void save_scene(const SyntheticScene& scene, const std::filesystem::path& path) {
    json j;
    j["width"] = scene.config.width;
    j["height"] = scene.config.height;
    j["family"] = to_string(scene.config.family);
    j["k"] = scene.config.k;
    j["base_scale"] = scene.config.base_scale;
    j["seed"] = scene.config.seed;
    j["truth_stream"] = scene.config.truth_stream;
    j["field"] = image_to_json(scene.field);
    j["truth"] = image_to_json(scene.truth);
    if (!scene.bimodal_mask.empty()) j["bimodal_mask"] = scene.bimodal_mask;

    json fc = json::array();
    for (const RayForecast& f : scene.forecasts) {
        json p;
        p["weights"] = f.channel(0).weights();
        json locs = json::array(), scales = json::array();
        for (int c = 0; c < 3; ++c) {
            locs.push_back(f.channel(c).locations());
            scales.push_back(f.channel(c).scales());
        }
        p["locations"] = locs;
        p["scales"] = scales;
        fc.push_back(std::move(p));
    }
    j["forecasts"] = std::move(fc);
    write_json(j, path);
}

SyntheticScene load_scene(const std::filesystem::path& path) {
    const json j = read_json(path);
    SyntheticScene scene;
    try {
        scene.config.width = j.at("width").get<int>();
        scene.config.height = j.at("height").get<int>();
        scene.config.family = scene_family_from_string(j.at("family").get<std::string>());
        scene.config.k = j.at("k").get<double>();
        scene.config.base_scale = j.at("base_scale").get<double>();
        scene.config.seed = j.at("seed").get<std::uint64_t>();
        scene.config.truth_stream = j.value("truth_stream", 0);
        scene.field = image_from_json(j.at("field"), scene.config.height, scene.config.width);
        scene.truth = image_from_json(j.at("truth"), scene.config.height, scene.config.width);
        if (j.contains("bimodal_mask"))
            scene.bimodal_mask = j.at("bimodal_mask").get<std::vector<std::uint8_t>>();

        for (const json& p : j.at("forecasts")) {
            const auto weights = p.at("weights").get<std::vector<double>>();
            std::vector<LaplacianMixture1D> chans;
            for (int c = 0; c < 3; ++c)
                chans.emplace_back(weights,
                                   p.at("locations").at(c).get<std::vector<double>>(),
                                   p.at("scales").at(c).get<std::vector<double>>());
            scene.forecasts.emplace_back(std::move(chans[0]), std::move(chans[1]),
                                         std::move(chans[2]));
        }
    } catch (const json::exception& e) {
        throw IoError("malformed scene file " + path.string() + ": " + e.what());
    }
    if (static_cast<int>(scene.forecasts.size()) != scene.pixel_count())
        throw IoError("scene forecast count does not match grid in " + path.string());
    return scene;
}

void save_basis(const PcaCurveBasis& basis, const std::filesystem::path& path) {
    json j;
    j["m_grid"] = basis.grid_size();
    j["n_components"] = basis.component_count();
    j["mean"] = basis.mean;
    j["components"] = basis.components;
    j["explained_variance_ratio"] = basis.explained_variance_ratio;
    write_json(j, path);
}

PcaCurveBasis load_basis(const std::filesystem::path& path) {
    const json j = read_json(path);
    PcaCurveBasis basis;
    try {
        basis.mean = j.at("mean").get<std::vector<double>>();
        basis.components = j.at("components").get<std::vector<std::vector<double>>>();
        basis.explained_variance_ratio =
            j.at("explained_variance_ratio").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw IoError("malformed basis file " + path.string() + ": " + e.what());
    }
    return basis;
}

namespace {

json mlp_to_json(const MlpModel& m) {
    json j;
    j["layer_dims"] = m.layer_dims;
    j["weights"] = m.weights;
    j["biases"] = m.biases;
    j["leaky_slope"] = m.leaky_slope;
    j["target_mean"] = m.target_mean;
    j["target_scale"] = m.target_scale;
    return j;
}

MlpModel mlp_from_json(const json& j) {
    MlpModel m;
    m.layer_dims = j.at("layer_dims").get<std::vector<int>>();
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    m.leaky_slope = j.at("leaky_slope").get<double>();
    m.target_mean = j.at("target_mean").get<std::vector<double>>();
    m.target_scale = j.at("target_scale").get<std::vector<double>>();
    return m;
}

} // namespace

void save_model(const MetaCalibratorModel& model, const std::filesystem::path& path) {
    json j;
    j["extractor"] = {{"image_hist_bins", model.extractor.image_hist_bins},
                      {"umap_hist_bins", model.extractor.umap_hist_bins}};
    j["mlp"] = mlp_to_json(model.mlp);
    j["basis"] = {{"m_grid", model.basis.grid_size()},
                  {"n_components", model.basis.component_count()},
                  {"mean", model.basis.mean},
                  {"components", model.basis.components},
                  {"explained_variance_ratio", model.basis.explained_variance_ratio}};
    write_json(j, path);
}

MetaCalibratorModel load_model(const std::filesystem::path& path) {
    const json j = read_json(path);
    MetaCalibratorModel model;
    try {
        model.extractor.image_hist_bins = j.at("extractor").at("image_hist_bins").get<int>();
        model.extractor.umap_hist_bins = j.at("extractor").at("umap_hist_bins").get<int>();
        model.mlp = mlp_from_json(j.at("mlp"));
        model.basis.mean = j.at("basis").at("mean").get<std::vector<double>>();
        model.basis.components =
            j.at("basis").at("components").get<std::vector<std::vector<double>>>();
        model.basis.explained_variance_ratio =
            j.at("basis").at("explained_variance_ratio").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw IoError("malformed model file " + path.string() + ": " + e.what());
    }
    model.validate();
    return model;
}

void save_map(const IsotonicMap& map, const std::filesystem::path& path) {
    json j;
    j["inputs"] = map.inputs();
    j["outputs"] = map.outputs();
    write_json(j, path);
}

IsotonicMap load_map(const std::filesystem::path& path) {
    const json j = read_json(path);
    try {
        return IsotonicMap::from_knots(j.at("inputs").get<std::vector<double>>(),
                                       j.at("outputs").get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw IoError("malformed map file " + path.string() + ": " + e.what());
    }
}

std::vector<FeatureVector> load_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<FeatureVector> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        FeatureVector f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.values.push_back(std::stod(cell));
        if (!out.empty() && f.size() != out.front().size())
            throw IoError("feature CSV rows have inconsistent lengths");
        out.push_back(std::move(f));
    }
    if (out.empty()) throw IoError("feature CSV is empty: " + path.string());
    return out;
}

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows)
        for (size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "\n");
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace pixcal
