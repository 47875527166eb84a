#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "proxemo/errors.hpp"
#include "proxemo/navsim.hpp"

namespace proxemo {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_episode_csv(const std::string& path, const EpisodeLog& log) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    out << "ped_count," << log.ped_count << "\n";
    out << "dt," << fmt(log.dt) << "\n";
    out << "collision," << (log.collision ? 1 : 0) << "\n";
    out << "goal_reached," << (log.goal_reached ? 1 : 0) << "\n";
    out << "step,t,x,y,heading,v,w,action";
    for (int i = 0; i < log.ped_count; ++i) {
        out << ",ped" << i << "_x,ped" << i << "_y,ped" << i << "_dist,ped" << i << "_c,ped" << i
            << "_r,ped" << i << "_pred_emotion,ped" << i << "_pred_view,ped" << i
            << "_true_view,ped" << i << "_conf";
    }
    out << "\n";
    for (const auto& s : log.steps) {
        out << s.step << ',' << fmt(s.t) << ',' << fmt(s.x) << ',' << fmt(s.y) << ','
            << fmt(s.heading) << ',' << fmt(s.v) << ',' << fmt(s.w) << ','
            << static_cast<int>(s.action);
        for (const auto& p : s.peds)
            out << ',' << fmt(p.x) << ',' << fmt(p.y) << ',' << fmt(p.distance) << ','
                << fmt(p.comfort) << ',' << fmt(p.inflation) << ',' << p.pred_emotion << ','
                << p.pred_view << ',' << p.true_view << ',' << fmt(p.confidence);
        out << "\n";
    }
    if (!out) throw FileError("write failed: " + path);
}

EpisodeLog read_episode_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open: " + path);
    EpisodeLog log;
    std::string line;
    for (int i = 0; i < 4; ++i) {
        if (!std::getline(in, line)) throw FormatError(path + ": truncated episode header");
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw FormatError(path + ": bad episode header line");
        const std::string key = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        if (key == "ped_count") log.ped_count = std::stoi(value);
        else if (key == "dt") log.dt = std::stod(value);
        else if (key == "collision") log.collision = value == "1";
        else if (key == "goal_reached") log.goal_reached = value == "1";
        else throw FormatError(path + ": unexpected header key " + key);
    }
    if (!std::getline(in, line)) throw FormatError(path + ": missing column header");

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(is, field, ',')) f.push_back(field);
        const std::size_t expect = 8 + static_cast<std::size_t>(log.ped_count) * 9;
        if (f.size() != expect) throw FormatError(path + ": bad episode row: " + line);
        StepRecord s;
        s.step = std::stoi(f[0]);
        s.t = std::stod(f[1]);
        s.x = std::stod(f[2]);
        s.y = std::stod(f[3]);
        s.heading = std::stod(f[4]);
        s.v = std::stod(f[5]);
        s.w = std::stod(f[6]);
        s.action = static_cast<ActionClass>(std::stoi(f[7]));
        s.peds.resize(static_cast<std::size_t>(log.ped_count));
        for (int i = 0; i < log.ped_count; ++i) {
            auto& p = s.peds[static_cast<std::size_t>(i)];
            const std::size_t base = 8 + static_cast<std::size_t>(i) * 9;
            p.x = std::stod(f[base]);
            p.y = std::stod(f[base + 1]);
            p.distance = std::stod(f[base + 2]);
            p.comfort = std::stod(f[base + 3]);
            p.inflation = std::stod(f[base + 4]);
            p.pred_emotion = std::stoi(f[base + 5]);
            p.pred_view = std::stoi(f[base + 6]);
            p.true_view = std::stoi(f[base + 7]);
            p.confidence = std::stod(f[base + 8]);
        }
        log.steps.push_back(std::move(s));
    }
    return log;
}

// ---------------------------------------------------------------------------
// SVG plotting

namespace {

struct SvgMapper {
    double min_x, min_y, max_x, max_y, scale;
    double px(double x) const { return (x - min_x) * scale + 20.0; }
    double py(double y) const { return (max_y - y) * scale + 20.0; }
};

}  // namespace

void write_episode_svg(const std::string& path, const EpisodeLog& log, const World& world) {
    if (log.steps.empty()) throw InvalidInputError("write_episode_svg: empty log");

    double min_x = world.goal.x, max_x = world.goal.x;
    double min_y = world.goal.y, max_y = world.goal.y;
    auto grow = [&](double x, double y) {
        min_x = std::min(min_x, x); max_x = std::max(max_x, x);
        min_y = std::min(min_y, y); max_y = std::max(max_y, y);
    };
    for (const auto& s : log.steps) {
        grow(s.x, s.y);
        for (const auto& p : s.peds) grow(p.x, p.y);
    }
    for (const auto& w : world.walls) {
        grow(w.a.x, w.a.y);
        grow(w.b.x, w.b.y);
    }
    grow(min_x - 1.5, min_y - 1.5);
    grow(max_x + 1.5, max_y + 1.5);

    const double span = std::max(max_x - min_x, max_y - min_y);
    const SvgMapper m{min_x, min_y, max_x, max_y, 760.0 / std::max(span, 1e-6)};
    const double width = (max_x - min_x) * m.scale + 40.0;
    const double height = (max_y - min_y) * m.scale + 40.0;

    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";

    for (const auto& w : world.walls)
        out << "<line x1='" << m.px(w.a.x) << "' y1='" << m.py(w.a.y) << "' x2='" << m.px(w.b.x)
            << "' y2='" << m.py(w.b.y) << "' stroke='black' stroke-width='3'/>\n";

    // comfort circles at regular intervals
    const std::size_t stride = std::max<std::size_t>(1, log.steps.size() / 12);
    for (std::size_t si = 0; si < log.steps.size(); si += stride) {
        for (const auto& p : log.steps[si].peds) {
            if (p.comfort <= 0.0) continue;
            out << "<circle cx='" << m.px(p.x) << "' cy='" << m.py(p.y) << "' r='"
                << p.comfort * m.scale << "' fill='rgba(220,80,80,0.08)' stroke='rgba(220,80,80,0.4)'"
                << " stroke-width='1'/>\n";
        }
    }

    auto polyline = [&](auto get_x, auto get_y, const char* color, int every) {
        out << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
        for (std::size_t i = 0; i < log.steps.size(); i += static_cast<std::size_t>(every))
            out << m.px(get_x(log.steps[i])) << ',' << m.py(get_y(log.steps[i])) << ' ';
        out << "'/>\n";
    };
    polyline([](const StepRecord& s) { return s.x; }, [](const StepRecord& s) { return s.y; },
             "green", 1);
    for (int pi = 0; pi < log.ped_count; ++pi) {
        out << "<polyline fill='none' stroke='orange' stroke-width='2' stroke-dasharray='6,4' points='";
        for (const auto& s : log.steps)
            out << m.px(s.peds[static_cast<std::size_t>(pi)].x) << ','
                << m.py(s.peds[static_cast<std::size_t>(pi)].y) << ' ';
        out << "'/>\n";
    }

    out << "<circle cx='" << m.px(log.steps.front().x) << "' cy='" << m.py(log.steps.front().y)
        << "' r='6' fill='green'/>\n";
    out << "<circle cx='" << m.px(world.goal.x) << "' cy='" << m.py(world.goal.y)
        << "' r='6' fill='blue'/>\n";
    out << "</svg>\n";
    if (!out) throw FileError("write failed: " + path);
}

}  // namespace proxemo
