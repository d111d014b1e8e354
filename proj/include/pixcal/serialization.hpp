#ifndef PIXCAL_SERIALIZATION_HPP
#define PIXCAL_SERIALIZATION_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "pixcal/curve_space.hpp"
#include "pixcal/meta_calibrator.hpp"
#include "pixcal/scene_harness.hpp"

namespace pixcal {

// Scene JSON: config fields plus row-major flattened grids.  "field" and
// "truth" are H*W*3 arrays (pixel-major, channels innermost); forecasts are
// per-pixel arrays of component parameters per channel.
void save_scene(const SyntheticScene& scene, const std::filesystem::path& path);
SyntheticScene load_scene(const std::filesystem::path& path);

void save_basis(const PcaCurveBasis& basis, const std::filesystem::path& path);
PcaCurveBasis load_basis(const std::filesystem::path& path);

// Model JSON embeds the extractor config, layer dims, row-major weights,
// biases, target standardization, and the PCA basis.
void save_model(const MetaCalibratorModel& model, const std::filesystem::path& path);
MetaCalibratorModel load_model(const std::filesystem::path& path);

void save_map(const IsotonicMap& map, const std::filesystem::path& path);
IsotonicMap load_map(const std::filesystem::path& path);

/// One line per scene, d comma-separated reals.
std::vector<FeatureVector> load_feature_csv(const std::filesystem::path& path);

/// Formats a double with 9 significant digits (CSV convention).
std::string format_g9(double v);

/// Writes rows of preformatted cells with a header line.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

} // namespace pixcal

#endif
