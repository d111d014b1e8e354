#ifndef PIXCAL_GRID_HPP
#define PIXCAL_GRID_HPP

#include <array>
#include <vector>

#include "pixcal/errors.hpp"

namespace pixcal {

using Rgb = std::array<double, 3>;

/// Row-major H x W x 3 image with values nominally in [0, 1].
struct ImageRgb {
    int height = 0;
    int width = 0;
    std::vector<double> data; // height * width * 3

    ImageRgb() = default;
    ImageRgb(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w * 3, 0.0) {}

    double at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    double& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    Rgb pixel(int y, int x) const { return {at(y, x, 0), at(y, x, 1), at(y, x, 2)}; }
    int pixel_count() const { return height * width; }
};

/// Row-major H x W scalar grid (uncertainty maps etc.).
struct ScalarImage {
    int height = 0;
    int width = 0;
    std::vector<double> data; // height * width

    ScalarImage() = default;
    ScalarImage(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w, 0.0) {}

    double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    int pixel_count() const { return height * width; }
};

inline void require_congruent(const ImageRgb& a, const ImageRgb& b, const char* what) {
    if (a.height != b.height || a.width != b.width)
        throw ValidationError(std::string(what) + ": image dimensions differ");
}

inline void require_congruent(const ImageRgb& a, const ScalarImage& b, const char* what) {
    if (a.height != b.height || a.width != b.width)
        throw ValidationError(std::string(what) + ": grid dimensions differ");
}

} // namespace pixcal

#endif
