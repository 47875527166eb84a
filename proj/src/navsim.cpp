#include "proxemo/navsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "proxemo/errors.hpp"

namespace proxemo {

const char* to_string(SimMode m) {
    switch (m) {
        case SimMode::proxemo: return "proxemo";
        case SimMode::oracle: return "oracle";
        case SimMode::no_emotion: return "no-emotion";
    }
    return "?";
}

SimMode sim_mode_from_string(const std::string& s) {
    if (s == "proxemo") return SimMode::proxemo;
    if (s == "oracle") return SimMode::oracle;
    if (s == "no-emotion" || s == "no_emotion") return SimMode::no_emotion;
    throw InvalidInputError("unknown sim mode: " + s);
}

const char* to_string(ActionClass a) {
    switch (a) {
        case ActionClass::v_coll: return "v_coll";
        case ActionClass::v_safe: return "v_safe";
        case ActionClass::v_comfort: return "v_comfort";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Raycasting

namespace {

// Distance along the ray to the segment, or +inf.
double ray_segment(const Vec2& origin, const Vec2& dir, const Segment& seg) {
    const Vec2 e = seg.b - seg.a;
    const double denom = dir.cross(e);
    if (std::abs(denom) < 1e-12) return std::numeric_limits<double>::infinity();
    const Vec2 ao = seg.a - origin;
    const double t = ao.cross(e) / denom;
    const double s = ao.cross(dir) / denom;
    if (t < 0.0 || s < 0.0 || s > 1.0) return std::numeric_limits<double>::infinity();
    return t;
}

// Distance along the ray to a circle, or +inf.
double ray_circle(const Vec2& origin, const Vec2& dir, const Vec2& center, double radius) {
    const Vec2 oc = center - origin;
    const double proj = dir.dot(oc);
    const double disc = proj * proj - (oc.dot(oc) - radius * radius);
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    const double sq = std::sqrt(disc);
    const double t_near = proj - sq;
    if (t_near >= 0.0) return t_near;
    const double t_far = proj + sq;
    if (t_far >= 0.0) return 0.0;  // origin inside the disc
    return std::numeric_limits<double>::infinity();
}

double point_segment_distance(const Vec2& p, const Segment& seg) {
    const Vec2 e = seg.b - seg.a;
    const double len2 = e.dot(e);
    if (len2 < 1e-18) return (p - seg.a).norm();
    const double t = std::clamp((p - seg.a).dot(e) / len2, 0.0, 1.0);
    return (p - (seg.a + e * t)).norm();
}

}  // namespace

LidarScan raycast_lidar(const World& world, const RobotState& robot,
                        const std::vector<Vec2>& ped_positions, int n_beams, double max_range) {
    if (n_beams < 1 || !(max_range > 0.0))
        throw InvalidInputError("raycast_lidar: bad beam count or range");
    LidarScan scan;
    scan.max_range = max_range;
    scan.origin = robot.position;
    scan.angles.resize(static_cast<std::size_t>(n_beams));
    scan.ranges.resize(static_cast<std::size_t>(n_beams));
    scan.hit_id.resize(static_cast<std::size_t>(n_beams));

    for (int i = 0; i < n_beams; ++i) {
        const double a = robot.heading + 2.0 * M_PI * i / n_beams;
        const Vec2 dir{std::cos(a), std::sin(a)};
        double best = max_range;
        int id = -1;
        for (const auto& wall : world.walls) {
            const double t = ray_segment(robot.position, dir, wall);
            if (t < best) {
                best = t;
                id = -1;
            }
        }
        for (std::size_t p = 0; p < ped_positions.size(); ++p) {
            const double t =
                ray_circle(robot.position, dir, ped_positions[p], world.pedestrians[p].radius);
            if (t < best) {
                best = t;
                id = static_cast<int>(p);
            }
        }
        scan.angles[static_cast<std::size_t>(i)] = a;
        scan.ranges[static_cast<std::size_t>(i)] = best;
        scan.hit_id[static_cast<std::size_t>(i)] = best < max_range ? id : -1;
    }
    return scan;
}

// ---------------------------------------------------------------------------
// Perception

double relative_view_angle_deg(const Pedestrian& ped, const RobotState& robot) {
    const Vec2 d = ped.position - robot.position;
    const double rho = d.norm();
    if (rho < 1e-9) return 0.0;
    const Vec2 z_axis = d * (1.0 / rho);           // line of sight, robot -> pedestrian
    const Vec2 x_axis{-z_axis.y, z_axis.x};        // up x z
    const Vec2 walk{std::cos(ped.heading), std::sin(ped.heading)};
    const double theta = std::atan2(walk.dot(x_axis), -walk.dot(z_axis));
    return norm_deg(theta * 180.0 / M_PI);
}

namespace {

SoftmaxGrid uniform_grid() {
    SoftmaxGrid g;
    g.p.fill(1.0 / kGridCells);
    return g;
}

SoftmaxGrid one_hot_grid(EmotionClass e, ViewGroup v) {
    SoftmaxGrid g;
    g.p.fill(0.0);
    g.p[static_cast<std::size_t>(grid_cell(static_cast<int>(e), static_cast<int>(v)))] = 1.0;
    return g;
}

}  // namespace

Perception PedestrianTracker::observe(const Pedestrian& ped, int gait_frame,
                                      const RobotState& robot, double sensor_range, SimMode mode,
                                      GaitClassifier* net, int input_size) {
    Perception out;
    const Vec2 d = ped.position - robot.position;
    const double rho = d.norm();
    out.in_range = rho <= sensor_range;
    const double theta = relative_view_angle_deg(ped, robot);
    out.true_view = view_group_of(theta);

    if (!out.in_range) {
        buffer_.clear();
        out.grid = uniform_grid();
        return out;
    }

    if (mode == SimMode::oracle) {
        out.grid = one_hot_grid(ped.emotion, out.true_view);
        out.warmed_up = true;
        out.confidence = 1.0;
        out.pred_emotion = ped.emotion;
        out.pred_view = out.true_view;
        return out;
    }

    // Reconstruct the skeleton in the line-of-sight camera frame: the in-place
    // walk cycle rotated to the relative walking direction and pushed out to
    // the measured range, mirroring how training gaits are augmented.
    const GaitStyle style = perturbed_style(ped.emotion, ped.seed, ped.noise);
    Pose pose = walk_pose(style, gait_frame, gait_noise_key(ped.seed), ped.noise);
    const double drift = -style.speed * static_cast<double>(gait_frame) / kDefaultFrameRate;
    for (auto& j : pose) j.z -= drift;
    pose = rotate_translate_pose(pose, {theta, {0.0, 0.0, rho}});

    buffer_.push_back(pose);
    while (buffer_.size() > kNumFrames) buffer_.pop_front();

    if (buffer_.size() < kNumFrames || net == nullptr) {
        out.grid = uniform_grid();
        return out;
    }

    const Gait observed(std::vector<Pose>(buffer_.begin(), buffer_.end()));
    out.grid = net->forward(gait_to_image(observed, input_size));
    out.warmed_up = true;
    const auto [e, v] = out.grid.argmax();
    out.pred_emotion = static_cast<EmotionClass>(e);
    out.pred_view = static_cast<ViewGroup>(v);
    out.confidence = out.grid.p[static_cast<std::size_t>(grid_cell(e, v))];
    return out;
}

// ---------------------------------------------------------------------------
// Planner

namespace {

struct Candidate {
    double v = 0.0, w = 0.0;
    bool comfort_ok = false;
    bool safe_ok = false;
    double score = 0.0;
};

}  // namespace

PlannerAction plan_step(const RobotState& robot, const Vec2& goal, const AdmissibleSet& comfort,
                        const AdmissibleSet& safe, const std::vector<Vec2>& obstacle_points,
                        const std::vector<MovingObstacle>& humans, const RobotLimits& limits,
                        const PlannerConfig& cfg, double /*dt*/) {
    const double dist_goal = (goal - robot.position).norm();
    if (dist_goal <= limits.goal_tolerance) return {0.0, 0.0, ActionClass::v_comfort};

    const int substeps = std::max(1, static_cast<int>(std::lround(cfg.horizon / cfg.horizon_dt)));

    std::vector<double> v_candidates;
    if (limits.v_min < 0.0) v_candidates.push_back(limits.v_min);
    v_candidates.push_back(0.0);
    for (int vi = 1; vi <= cfg.v_samples; ++vi)
        v_candidates.push_back(limits.v_max * vi / cfg.v_samples);

    std::vector<Candidate> cands;
    cands.reserve(v_candidates.size() * static_cast<std::size_t>(cfg.w_samples));

    for (const double v : v_candidates) {
        for (int wi = 0; wi < cfg.w_samples; ++wi) {
            const double w = cfg.w_samples > 1
                                 ? -limits.w_max + 2.0 * limits.w_max * wi / (cfg.w_samples - 1)
                                 : 0.0;
            Candidate cand;
            cand.v = v;
            cand.w = w;
            cand.comfort_ok = true;
            cand.safe_ok = true;

            Vec2 pos = robot.position;
            double heading = robot.heading;
            double min_clear = cfg.clearance_cap;
            double min_human_norm = 1.0;  // clearance relative to each comfort scale
            bool goal_hit = dist_goal <= limits.goal_tolerance;
            for (int s = 0; s < substeps; ++s) {
                pos.x += v * std::cos(heading) * cfg.horizon_dt;
                pos.y += v * std::sin(heading) * cfg.horizon_dt;
                heading += w * cfg.horizon_dt;
                if (safe.blocked_at(pos)) {
                    cand.safe_ok = false;
                    cand.comfort_ok = false;
                    break;
                }
                if (cand.comfort_ok && comfort.blocked_at(pos)) cand.comfort_ok = false;
                if ((goal - pos).norm() <= limits.goal_tolerance) goal_hit = true;
                if (s % 2 == 0) {
                    if (!obstacle_points.empty())
                        for (const auto& ob : obstacle_points)
                            min_clear = std::min(min_clear, (ob - pos).norm());
                    const double t_ahead = (s + 1) * cfg.horizon_dt;
                    for (const auto& hum : humans) {
                        const Vec2 future = hum.position + hum.velocity * t_ahead;
                        const double clear_h = (future - pos).norm() - hum.radius;
                        const double scale = std::max(0.5, hum.comfort + cfg.human_slack);
                        min_human_norm = std::min(min_human_norm, clear_h / scale);
                    }
                }
            }
            if (!cand.safe_ok) {
                cands.push_back(cand);
                continue;
            }

            const double target = std::atan2(goal.y - pos.y, goal.x - pos.x);
            const double heading_score = (M_PI - std::abs(norm_angle(target - heading))) / M_PI;
            const double clear_score = obstacle_points.empty() ? 1.0 : min_clear / cfg.clearance_cap;
            const double vel_score = v / limits.v_max;
            const double progress_score =
                (dist_goal - (goal - pos).norm()) / (limits.v_max * cfg.horizon);
            const double human_score = std::max(0.0, min_human_norm);
            cand.score = cfg.w_progress * progress_score + cfg.w_heading * heading_score +
                         cfg.w_clearance * clear_score + cfg.w_velocity * vel_score +
                         cfg.w_human * human_score + (goal_hit ? 10.0 : 0.0);
            cands.push_back(cand);
        }
    }

    const Candidate* best = nullptr;
    for (const auto& c : cands)
        if (c.comfort_ok && (best == nullptr || c.score > best->score)) best = &c;
    if (best != nullptr) return {best->v, best->w, ActionClass::v_comfort};
    for (const auto& c : cands)
        if (c.safe_ok && (best == nullptr || c.score > best->score)) best = &c;
    if (best != nullptr) return {best->v, best->w, ActionClass::v_safe};
    return {0.0, 0.0, ActionClass::v_coll};
}

// ---------------------------------------------------------------------------
// Episode loop

EpisodeLog run_episode(const World& world, const SimConfig& cfg, GaitClassifier* net) {
    if (cfg.mode == SimMode::proxemo && net == nullptr)
        throw ConfigError("run_episode: proxemo mode needs a trained classifier");
    const int input_size = net != nullptr ? net->config().input_size : 0;

    EpisodeLog log;
    log.ped_count = static_cast<int>(world.pedestrians.size());
    log.dt = cfg.dt;

    RobotState robot;
    robot.position = world.robot_start;
    robot.heading = world.robot_heading;

    std::vector<Pedestrian> peds = world.pedestrians;
    std::vector<double> ped_speed(peds.size());
    for (std::size_t i = 0; i < peds.size(); ++i) {
        const GaitStyle style = perturbed_style(peds[i].emotion, peds[i].seed, peds[i].noise);
        ped_speed[i] = peds[i].speed >= 0.0 ? peds[i].speed : style.speed;
    }
    std::vector<PedestrianTracker> trackers(peds.size());
    std::vector<Vec2> prev_positions(peds.size());
    for (std::size_t i = 0; i < peds.size(); ++i) prev_positions[i] = peds[i].position;

    const double safe_r = cfg.limits.radius + cfg.planner.margin;

    for (int step = 0; step < cfg.max_steps; ++step) {
        std::vector<Vec2> ped_positions(peds.size());
        for (std::size_t i = 0; i < peds.size(); ++i) ped_positions[i] = peds[i].position;

        const LidarScan scan = raycast_lidar(world, robot, ped_positions, cfg.n_beams, cfg.max_range);

        // Perceive and compute per-pedestrian comfort and inflation.
        std::vector<Perception> perceptions(peds.size());
        std::vector<double> comfort_m(peds.size(), 0.0), inflation_m(peds.size(), 0.0);
        for (std::size_t i = 0; i < peds.size(); ++i) {
            if (cfg.mode == SimMode::no_emotion) continue;
            perceptions[i] = trackers[i].observe(peds[i], step, robot, cfg.sensor_range, cfg.mode,
                                                 net, input_size);
            if (!perceptions[i].in_range) continue;
            comfort_m[i] = comfort_space(perceptions[i].grid);
            std::vector<double> dh;
            for (std::size_t b = 0; b < scan.beam_count(); ++b)
                if (scan.hit_id[b] == static_cast<int>(i)) dh.push_back(scan.ranges[b]);
            // No returns from this pedestrian: fall back to obstacle avoidance.
            inflation_m[i] = dh.empty() ? 0.0 : inflation_radius(comfort_m[i], dh);
        }

        // Fuse. Human points carry their pedestrian's inflation radius in the
        // comfort set; the safe set inflates everything by the robot footprint.
        std::vector<Vec2> points;
        std::vector<double> comfort_radii, safe_radii;
        for (std::size_t b = 0; b < scan.beam_count(); ++b) {
            if (!scan.is_hit(b)) continue;
            points.push_back(scan.point(b));
            const int id = scan.hit_id[b];
            comfort_radii.push_back(id >= 0 ? std::max(inflation_m[static_cast<std::size_t>(id)], safe_r)
                                            : safe_r);
            safe_radii.push_back(safe_r);
        }
        const AdmissibleSet safe_set = inflate_points(points, safe_radii, cfg.resolution);
        const AdmissibleSet comfort_set = cfg.mode == SimMode::no_emotion
                                              ? safe_set
                                              : inflate_points(points, comfort_radii, cfg.resolution);

        std::vector<MovingObstacle> humans;
        for (std::size_t i = 0; i < peds.size(); ++i) {
            if ((peds[i].position - robot.position).norm() > cfg.max_range) continue;
            MovingObstacle m;
            m.position = peds[i].position;
            m.velocity = (peds[i].position - prev_positions[i]) * (1.0 / cfg.dt);
            m.radius = peds[i].radius;
            m.comfort = comfort_m[i];
            humans.push_back(m);
        }
        for (std::size_t i = 0; i < peds.size(); ++i) prev_positions[i] = peds[i].position;

        const PlannerAction action = plan_step(robot, world.goal, comfort_set, safe_set, points,
                                               humans, cfg.limits, cfg.planner, cfg.dt);

        StepRecord rec;
        rec.step = step;
        rec.t = step * cfg.dt;
        rec.x = robot.position.x;
        rec.y = robot.position.y;
        rec.heading = robot.heading;
        rec.v = action.v;
        rec.w = action.w;
        rec.action = action.cls;
        rec.peds.resize(peds.size());
        for (std::size_t i = 0; i < peds.size(); ++i) {
            auto& pr = rec.peds[i];
            pr.distance = (peds[i].position - robot.position).norm();
            pr.comfort = comfort_m[i];
            pr.inflation = inflation_m[i];
            pr.x = peds[i].position.x;
            pr.y = peds[i].position.y;
            pr.true_view = static_cast<int>(perceptions[i].true_view);
            if (perceptions[i].warmed_up) {
                pr.pred_emotion = static_cast<int>(perceptions[i].pred_emotion);
                pr.pred_view = static_cast<int>(perceptions[i].pred_view);
                pr.confidence = perceptions[i].confidence;
            }
        }
        log.steps.push_back(std::move(rec));

        // Integrate (explicit Euler, differential drive).
        robot.position.x += action.v * std::cos(robot.heading) * cfg.dt;
        robot.position.y += action.v * std::sin(robot.heading) * cfg.dt;
        robot.heading = norm_angle(robot.heading + action.w * cfg.dt);
        robot.v = action.v;
        robot.w = action.w;

        for (std::size_t i = 0; i < peds.size(); ++i) {
            peds[i].position.x += ped_speed[i] * std::cos(peds[i].heading) * cfg.dt;
            peds[i].position.y += ped_speed[i] * std::sin(peds[i].heading) * cfg.dt;
        }

        bool collided = false;
        for (std::size_t i = 0; i < peds.size(); ++i)
            if ((peds[i].position - robot.position).norm() < cfg.limits.radius + peds[i].radius)
                collided = true;
        for (const auto& wall : world.walls)
            if (point_segment_distance(robot.position, wall) < cfg.limits.radius) collided = true;
        if (collided) {
            log.collision = true;
            break;
        }
        if ((world.goal - robot.position).norm() <= cfg.limits.goal_tolerance) {
            log.goal_reached = true;
            break;
        }
    }
    return log;
}

// ---------------------------------------------------------------------------
// Reports

ClearanceReport clearance_report(const EpisodeLog& log) {
    if (log.steps.empty()) throw InvalidInputError("clearance_report: empty episode log");
    ClearanceReport r;
    r.steps = static_cast<int>(log.steps.size());
    r.collision = log.collision;
    r.goal_reached = log.goal_reached;

    double min_c = std::numeric_limits<double>::infinity();
    double sum_c = 0.0;
    std::size_t n_c = 0;
    for (const auto& s : log.steps) {
        for (const auto& p : s.peds) {
            min_c = std::min(min_c, p.distance);
            sum_c += p.distance;
            ++n_c;
            if (p.distance < p.comfort) ++r.comfort_violations;
        }
    }
    r.min_clearance = n_c > 0 ? min_c : 0.0;
    r.mean_clearance = n_c > 0 ? sum_c / static_cast<double>(n_c) : 0.0;

    for (std::size_t i = 1; i < log.steps.size(); ++i) {
        const double dx = log.steps[i].x - log.steps[i - 1].x;
        const double dy = log.steps[i].y - log.steps[i - 1].y;
        r.path_length += std::sqrt(dx * dx + dy * dy);
    }
    return r;
}

std::string report_to_string(const ClearanceReport& r) {
    std::string s;
    s += "steps: " + std::to_string(r.steps) + "\n";
    s += "goal_reached: " + std::string(r.goal_reached ? "yes" : "no") + "\n";
    s += "collision: " + std::string(r.collision ? "yes" : "no") + "\n";
    s += "path_length_m: " + std::to_string(r.path_length) + "\n";
    s += "min_clearance_m: " + std::to_string(r.min_clearance) + "\n";
    s += "mean_clearance_m: " + std::to_string(r.mean_clearance) + "\n";
    s += "comfort_violations: " + std::to_string(r.comfort_violations) + "\n";
    return s;
}

double path_deviation(const EpisodeLog& log, const Vec2& start, const Vec2& goal) {
    const Vec2 line = goal - start;
    const double len = line.norm();
    if (len < 1e-9 || log.steps.empty()) return 0.0;
    double max_dev = 0.0;
    for (const auto& s : log.steps) {
        const Vec2 p{s.x - start.x, s.y - start.y};
        max_dev = std::max(max_dev, std::abs(line.cross(p)) / len);
    }
    return max_dev;
}

}  // namespace proxemo
