#include "proxemo/embedding.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>

#include "proxemo/errors.hpp"

namespace proxemo {

Gait normalize_gait(const Gait& gait) {
    double lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
        lo[a] = std::numeric_limits<double>::infinity();
        hi[a] = -std::numeric_limits<double>::infinity();
    }
    for (const auto& frame : gait.frames()) {
        for (const auto& j : frame) {
            lo[0] = std::min(lo[0], j.x); hi[0] = std::max(hi[0], j.x);
            lo[1] = std::min(lo[1], j.y); hi[1] = std::max(hi[1], j.y);
            lo[2] = std::min(lo[2], j.z); hi[2] = std::max(hi[2], j.z);
        }
    }
    double scale[3], shift[3];
    bool constant[3];
    for (int a = 0; a < 3; ++a) {
        constant[a] = (hi[a] - lo[a]) < 1e-12;
        scale[a] = constant[a] ? 0.0 : 1.0 / (hi[a] - lo[a]);
        shift[a] = lo[a];
    }
    std::vector<Pose> frames;
    frames.reserve(gait.frames().size());
    for (const auto& frame : gait.frames()) {
        Pose p;
        for (int j = 0; j < kNumJoints; ++j) {
            const Vec3& v = frame[static_cast<std::size_t>(j)];
            p[static_cast<std::size_t>(j)] = {
                constant[0] ? 0.5 : (v.x - shift[0]) * scale[0],
                constant[1] ? 0.5 : (v.y - shift[1]) * scale[1],
                constant[2] ? 0.5 : (v.z - shift[2]) * scale[2],
            };
        }
        frames.push_back(p);
    }
    return Gait(std::move(frames), gait.frame_rate());
}

GaitImage embed_gait(const Gait& gait) {
    GaitImage img(kNumFrames, kNumJoints);
    for (int t = 0; t < kNumFrames; ++t) {
        const Pose& p = gait.frame(t);
        for (int j = 0; j < kNumJoints; ++j) {
            const Vec3& v = p[static_cast<std::size_t>(j)];
            if (v.x < -1e-9 || v.x > 1.0 + 1e-9 || v.y < -1e-9 || v.y > 1.0 + 1e-9 ||
                v.z < -1e-9 || v.z > 1.0 + 1e-9)
                throw InvalidInputError("embed_gait: gait is not normalized to [0,1]");
            img.at(0, t, j) = v.z;  // R
            img.at(1, t, j) = v.y;  // G
            img.at(2, t, j) = v.x;  // B
        }
    }
    return img;
}

GaitImage resample(const GaitImage& image, int size) {
    if (size < 1) throw InvalidInputError("resample: bad target size");
    if (size == image.height && size == image.width) return image;

    GaitImage out(size, size);
    // Corner-aligned bilinear sampling: source and target corner pixels map
    // onto each other, so upscaling to the source size is the identity.
    const double sy = size > 1 ? static_cast<double>(image.height - 1) / (size - 1) : 0.0;
    const double sx = size > 1 ? static_cast<double>(image.width - 1) / (size - 1) : 0.0;
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < size; ++y) {
            const double fy = y * sy;
            const int y0 = std::min(static_cast<int>(fy), image.height - 1);
            const int y1 = std::min(y0 + 1, image.height - 1);
            const double wy = fy - y0;
            for (int x = 0; x < size; ++x) {
                const double fx = x * sx;
                const int x0 = std::min(static_cast<int>(fx), image.width - 1);
                const int x1 = std::min(x0 + 1, image.width - 1);
                const double wx = fx - x0;
                const double v00 = image.at(c, y0, x0);
                const double v01 = image.at(c, y0, x1);
                const double v10 = image.at(c, y1, x0);
                const double v11 = image.at(c, y1, x1);
                out.at(c, y, x) = (1.0 - wy) * ((1.0 - wx) * v00 + wx * v01) +
                                  wy * ((1.0 - wx) * v10 + wx * v11);
            }
        }
    }
    return out;
}

GaitImage upscale(const GaitImage& image, int size) {
    if (size < image.height || size < image.width)
        throw InvalidInputError("upscale: target size smaller than source");
    return resample(image, size);
}

GaitImage gait_to_image(const Gait& gait, int size) {
    return resample(embed_gait(normalize_gait(gait)), size);
}

// ---------------------------------------------------------------------------
// Lossless float image container

namespace {
constexpr char kPxiMagic[4] = {'P', 'X', 'I', '1'};
}

void write_image_pxi(const std::string& path, const GaitImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot open for writing: " + path);
    out.write(kPxiMagic, 4);
    const std::int32_t dims[3] = {image.height, image.width, 3};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(image.data.data()),
              static_cast<std::streamsize>(image.data.size() * sizeof(double)));
    if (!out) throw FileError("write failed: " + path);
}

GaitImage read_image_pxi(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kPxiMagic, 4) != 0)
        throw FormatError(path + ": not a pxi image");
    std::int32_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in || dims[0] <= 0 || dims[1] <= 0 || dims[2] != 3)
        throw FormatError(path + ": bad pxi dimensions");
    GaitImage img(dims[0], dims[1]);
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size() * sizeof(double)));
    if (!in) throw FormatError(path + ": truncated pxi data");
    return img;
}

}  // namespace proxemo
