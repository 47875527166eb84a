#pragma once

#include <string>
#include <vector>

#include "proxemo/gait.hpp"

namespace proxemo {

// Planar float image, channels R,G,B, values in [0, 1].
struct GaitImage {
    int height = 0;
    int width = 0;
    std::vector<double> data;  // [channel][row][col]

    GaitImage() = default;
    GaitImage(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(3) * h * w, 0.0) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
};

// Per-gait min-max normalization of each axis into [0, 1]; an axis with zero
// range maps to 0.5. Removes camera-distance scale before embedding.
Gait normalize_gait(const Gait& gait);

// Raw 75x16 embedding: row = frame, column = joint, R = Z, G = Y, B = X.
// Expects normalized coordinates (all in [0, 1]).
GaitImage embed_gait(const Gait& gait);

// Bilinear resample to size x size, up or down.
GaitImage resample(const GaitImage& image, int size);

// Bilinear upscale to size x size. size must be >= both source dims.
GaitImage upscale(const GaitImage& image, int size);

// normalize + embed + resample in one go. Network inputs smaller than the
// 75-row raw embedding (e.g. 64x64) downscale the time axis bilinearly.
GaitImage gait_to_image(const Gait& gait, int size);

// 8-bit RGB PNG, value = round(255 * v). For inspection only.
void write_image_png(const std::string& path, const GaitImage& image);

// Lossless float64 image ("pxi", documented binary). Round-trips bit-exactly.
void write_image_pxi(const std::string& path, const GaitImage& image);
GaitImage read_image_pxi(const std::string& path);

}  // namespace proxemo
