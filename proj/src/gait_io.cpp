#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "proxemo/errors.hpp"
#include "proxemo/gait.hpp"

namespace proxemo {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* source_name(GaitSource s) {
    return s == GaitSource::synthetic ? "synthetic" : "file";
}

}  // namespace

void write_gait_csv(const std::string& path, const LabeledGait& g) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    out << "format,proxemo-gait\n";
    out << "version,1\n";
    out << "n_frames," << kNumFrames << "\n";
    out << "n_joints," << kNumJoints << "\n";
    out << "frame_rate," << fmt_double(g.gait.frame_rate()) << "\n";
    out << "emotion," << to_string(g.emotion) << "\n";
    out << "view_group," << to_string(g.view_group) << "\n";
    out << "source," << source_name(g.source) << "\n";
    out << "frame,joint,x,y,z\n";
    for (int t = 0; t < kNumFrames; ++t) {
        const Pose& p = g.gait.frame(t);
        for (int j = 0; j < kNumJoints; ++j) {
            const Vec3& v = p[static_cast<std::size_t>(j)];
            out << t << ',' << j << ',' << fmt_double(v.x) << ',' << fmt_double(v.y) << ','
                << fmt_double(v.z) << "\n";
        }
    }
    if (!out) throw FileError("write failed: " + path);
}

LabeledGait read_gait_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open: " + path);

    std::string line;
    double frame_rate = kDefaultFrameRate;
    EmotionClass emotion = EmotionClass::neutral;
    ViewGroup view = ViewGroup::front;
    GaitSource source = GaitSource::file;
    bool saw_format = false;

    // Header: key,value lines up to the column header.
    while (std::getline(in, line)) {
        if (line == "frame,joint,x,y,z") break;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw FormatError(path + ": malformed header line: " + line);
        const std::string key = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        if (key == "format") {
            if (value != "proxemo-gait") throw FormatError(path + ": not a gait file");
            saw_format = true;
        } else if (key == "version") {
            if (value != "1") throw FormatError(path + ": unsupported gait file version " + value);
        } else if (key == "n_frames") {
            if (std::stoi(value) != kNumFrames)
                throw FormatError(path + ": expected 75 frames, file declares " + value);
        } else if (key == "n_joints") {
            if (std::stoi(value) != kNumJoints)
                throw FormatError(path + ": expected 16 joints, file declares " + value);
        } else if (key == "frame_rate") {
            frame_rate = std::stod(value);
        } else if (key == "emotion") {
            emotion = emotion_from_string(value);
        } else if (key == "view_group") {
            view = view_group_from_string(value);
        } else if (key == "source") {
            source = value == "synthetic" ? GaitSource::synthetic : GaitSource::file;
        }
        // Unknown keys are ignored for forward compatibility.
    }
    if (!saw_format) throw FormatError(path + ": missing format header");

    std::vector<Pose> frames(kNumFrames);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int t, j;
        double x, y, z;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf", &t, &j, &x, &y, &z) != 5)
            throw FormatError(path + ": malformed data row: " + line);
        if (t < 0 || t >= kNumFrames || j < 0 || j >= kNumJoints)
            throw FormatError(path + ": frame/joint index out of range: " + line);
        frames[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] = {x, y, z};
        ++rows;
    }
    if (rows != static_cast<std::size_t>(kNumFrames) * kNumJoints)
        throw FormatError(path + ": expected " + std::to_string(kNumFrames * kNumJoints) +
                          " data rows, got " + std::to_string(rows));

    return LabeledGait{Gait(std::move(frames), frame_rate), emotion, view, source};
}

}  // namespace proxemo
