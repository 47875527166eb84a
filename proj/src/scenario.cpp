#include <fstream>
#include <sstream>

#include "proxemo/errors.hpp"
#include "proxemo/navsim.hpp"

namespace proxemo {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    return out;
}

double num(const std::vector<std::string>& f, std::size_t i, const std::string& line) {
    if (i >= f.size()) throw FormatError("scenario: missing field in: " + line);
    try {
        return std::stod(f[i]);
    } catch (const std::exception&) {
        throw FormatError("scenario: bad number in: " + line);
    }
}

}  // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open: " + path);

    Scenario s;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_csv(line);
        const std::string& key = f[0];
        if (key == "robot") {
            s.world.robot_start = {num(f, 1, line), num(f, 2, line)};
            s.world.robot_heading = num(f, 3, line) * M_PI / 180.0;
        } else if (key == "goal") {
            s.world.goal = {num(f, 1, line), num(f, 2, line)};
        } else if (key == "wall") {
            s.world.walls.push_back({{num(f, 1, line), num(f, 2, line)},
                                     {num(f, 3, line), num(f, 4, line)}});
        } else if (key == "ped") {
            if (f.size() < 7) throw FormatError("scenario: ped needs x,y,heading,speed,emotion,seed");
            Pedestrian p;
            p.position = {num(f, 1, line), num(f, 2, line)};
            p.heading = num(f, 3, line) * M_PI / 180.0;
            p.speed = num(f, 4, line);
            p.emotion = emotion_from_string(f[5]);
            p.seed = static_cast<std::uint64_t>(std::stoull(f[6]));
            if (f.size() > 7) p.noise = num(f, 7, line);
            if (f.size() > 8) p.radius = num(f, 8, line);
            s.world.pedestrians.push_back(p);
        } else if (key == "mode") {
            if (f.size() < 2) throw FormatError("scenario: mode needs a value");
            s.config.mode = sim_mode_from_string(f[1]);
        } else if (key == "dt") {
            s.config.dt = num(f, 1, line);
        } else if (key == "beams") {
            s.config.n_beams = static_cast<int>(num(f, 1, line));
        } else if (key == "max_range") {
            s.config.max_range = num(f, 1, line);
        } else if (key == "sensor_range") {
            s.config.sensor_range = num(f, 1, line);
        } else if (key == "resolution") {
            s.config.resolution = num(f, 1, line);
        } else if (key == "max_steps") {
            s.config.max_steps = static_cast<int>(num(f, 1, line));
        } else if (key == "seed") {
            s.config.seed = static_cast<std::uint64_t>(num(f, 1, line));
        } else if (key == "v_max") {
            s.config.limits.v_max = num(f, 1, line);
        } else if (key == "v_min") {
            s.config.limits.v_min = num(f, 1, line);
        } else if (key == "w_max") {
            s.config.limits.w_max = num(f, 1, line);
        } else if (key == "robot_radius") {
            s.config.limits.radius = num(f, 1, line);
        } else if (key == "goal_tolerance") {
            s.config.limits.goal_tolerance = num(f, 1, line);
        } else if (key == "horizon") {
            s.config.planner.horizon = num(f, 1, line);
        } else {
            throw FormatError("scenario: unknown key '" + key + "' in: " + line);
        }
    }
    if (!(s.config.dt > 0.0)) throw FormatError("scenario: dt must be positive");
    return s;
}

void save_scenario(const std::string& path, const Scenario& s) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    out << "robot," << s.world.robot_start.x << ',' << s.world.robot_start.y << ','
        << s.world.robot_heading * 180.0 / M_PI << "\n";
    out << "goal," << s.world.goal.x << ',' << s.world.goal.y << "\n";
    for (const auto& w : s.world.walls)
        out << "wall," << w.a.x << ',' << w.a.y << ',' << w.b.x << ',' << w.b.y << "\n";
    for (const auto& p : s.world.pedestrians)
        out << "ped," << p.position.x << ',' << p.position.y << ',' << p.heading * 180.0 / M_PI
            << ',' << p.speed << ',' << to_string(p.emotion) << ',' << p.seed << ',' << p.noise
            << ',' << p.radius << "\n";
    out << "mode," << to_string(s.config.mode) << "\n";
    out << "dt," << s.config.dt << "\n";
    out << "beams," << s.config.n_beams << "\n";
    out << "max_range," << s.config.max_range << "\n";
    out << "sensor_range," << s.config.sensor_range << "\n";
    out << "resolution," << s.config.resolution << "\n";
    out << "max_steps," << s.config.max_steps << "\n";
    out << "seed," << s.config.seed << "\n";
    out << "v_max," << s.config.limits.v_max << "\n";
    out << "v_min," << s.config.limits.v_min << "\n";
    out << "w_max," << s.config.limits.w_max << "\n";
    out << "robot_radius," << s.config.limits.radius << "\n";
    out << "goal_tolerance," << s.config.limits.goal_tolerance << "\n";
    if (!out) throw FileError("write failed: " + path);
}

}  // namespace proxemo
