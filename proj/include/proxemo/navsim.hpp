#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "proxemo/model.hpp"
#include "proxemo/proxemics.hpp"

namespace proxemo {

struct Segment {
    Vec2 a, b;
};

// Straight-line walker replaying a synthetic gait. The 2D footprint is a
// disc; the skeleton drives only perception.
struct Pedestrian {
    Vec2 position{0.0, 0.0};
    double heading = 0.0;  // radians, world frame
    double speed = -1.0;   // m/s; < 0 means "use the gait style's speed"
    double radius = 0.3;
    EmotionClass emotion = EmotionClass::neutral;
    std::uint64_t seed = 0;
    double noise = 0.0;
};

struct RobotLimits {
    double v_max = 0.8;       // m/s
    double v_min = -0.3;      // m/s, reverse capability for yielding
    double w_max = 2.0;       // rad/s
    double radius = 0.2;      // m
    double goal_tolerance = 0.3;
};

struct PlannerConfig {
    int v_samples = 8;           // forward speed steps (plus 0 and reverse)
    int w_samples = 41;
    double horizon = 3.5;        // s
    double horizon_dt = 0.05;    // s, forward-simulation substep
    double margin = 0.05;        // m, added to the robot radius for safety checks
    double w_progress = 2.0;     // reward for closing distance to the goal
    double w_heading = 1.0;
    double w_clearance = 0.6;
    double clearance_cap = 1.5;  // m
    double w_velocity = 0.4;
    // time-aligned clearance to walking pedestrians; makes the robot commit
    // to a passing side well before the fused sets start blocking candidates.
    // Saturation distance per pedestrian: comfort + human_slack.
    double w_human = 2.5;
    double human_slack = 0.3;    // m
};

enum class SimMode { proxemo, oracle, no_emotion };
const char* to_string(SimMode m);
SimMode sim_mode_from_string(const std::string& s);

struct SimConfig {
    double dt = 0.1;             // s; one gait frame per step at 10 Hz
    int n_beams = 360;
    double max_range = 12.0;
    double sensor_range = 12.0;  // perception range for skeletons
    double resolution = 0.02;    // occupancy grid cell size, m
    int max_steps = 1000;
    SimMode mode = SimMode::oracle;
    std::uint64_t seed = 0;
    RobotLimits limits;
    PlannerConfig planner;
};

struct World {
    std::vector<Segment> walls;
    std::vector<Pedestrian> pedestrians;
    Vec2 robot_start{0.0, 0.0};
    double robot_heading = 0.0;
    Vec2 goal{0.0, 0.0};
};

struct RobotState {
    Vec2 position{0.0, 0.0};
    double heading = 0.0;
    double v = 0.0;
    double w = 0.0;
};

enum class ActionClass { v_coll = 0, v_safe = 1, v_comfort = 2 };
const char* to_string(ActionClass a);

struct PlannerAction {
    double v = 0.0;
    double w = 0.0;
    ActionClass cls = ActionClass::v_coll;
};

// Nearest intersection per beam against walls and pedestrian discs. Beams are
// evenly spaced starting at the robot heading; misses return max_range with
// hit_id -1.
LidarScan raycast_lidar(const World& world, const RobotState& robot,
                        const std::vector<Vec2>& ped_positions, int n_beams, double max_range);

// Per-pedestrian perceived softmax grid.
struct Perception {
    SoftmaxGrid grid;       // uniform until 75 frames have accumulated
    bool warmed_up = false;
    bool in_range = false;
    double confidence = 0.0;                  // max grid entry
    EmotionClass pred_emotion = EmotionClass::neutral;
    ViewGroup pred_view = ViewGroup::front;
    ViewGroup true_view = ViewGroup::front;   // from current geometry
};

// Skeleton-frame observation buffer for one pedestrian.
class PedestrianTracker {
public:
    // Appends the current observation and classifies once 75 frames are
    // buffered. Out-of-range pedestrians reset the buffer.
    Perception observe(const Pedestrian& ped, int gait_frame, const RobotState& robot,
                       double sensor_range, SimMode mode, GaitClassifier* net, int input_size);

    std::size_t buffered() const { return buffer_.size(); }

private:
    std::deque<Pose> buffer_;
};

// Rotation angle (degrees) of the pedestrian's walking direction in the
// robot's line-of-sight frame: 0 = walking straight at the robot.
double relative_view_angle_deg(const Pedestrian& ped, const RobotState& robot);

// Pedestrian track fed to the planner's scoring (constant-velocity
// extrapolation over the horizon). comfort scales how wide the planner
// prefers to pass; the hard keep-out stays in the fused sets.
struct MovingObstacle {
    Vec2 position{0.0, 0.0};
    Vec2 velocity{0.0, 0.0};
    double radius = 0.3;
    double comfort = 0.0;  // m
};

// Velocity-sampling local planner. Candidates violating `comfort` are
// discarded; if none survive, `safe` (robot-radius-only inflation) is used
// and the action degrades to v_safe; if still none, stop in place (v_coll).
PlannerAction plan_step(const RobotState& robot, const Vec2& goal, const AdmissibleSet& comfort,
                        const AdmissibleSet& safe, const std::vector<Vec2>& obstacle_points,
                        const std::vector<MovingObstacle>& humans, const RobotLimits& limits,
                        const PlannerConfig& cfg, double dt);

struct PedStepRecord {
    double distance = 0.0;      // robot center to pedestrian center, m
    double comfort = 0.0;       // c in force, m
    double inflation = 0.0;     // r in force, m
    int pred_emotion = -1;      // -1 before warm-up / out of range
    int pred_view = -1;
    int true_view = -1;
    double confidence = 0.0;
    double x = 0.0, y = 0.0;    // pedestrian position
};

struct StepRecord {
    int step = 0;
    double t = 0.0;
    double x = 0.0, y = 0.0, heading = 0.0;
    double v = 0.0, w = 0.0;
    ActionClass action = ActionClass::v_comfort;
    std::vector<PedStepRecord> peds;
};

struct EpisodeLog {
    std::vector<StepRecord> steps;
    bool collision = false;
    bool goal_reached = false;
    int ped_count = 0;
    double dt = 0.1;
};

// raycast -> perceive -> comfort -> inflate -> fuse -> plan -> integrate,
// once per step. Deterministic given the world and config.
EpisodeLog run_episode(const World& world, const SimConfig& cfg, GaitClassifier* net = nullptr);

struct ClearanceReport {
    double min_clearance = 0.0;   // min over steps and pedestrians, m
    double mean_clearance = 0.0;
    int comfort_violations = 0;   // steps with distance < comfort in force
    double path_length = 0.0;
    int steps = 0;
    bool collision = false;
    bool goal_reached = false;
};

ClearanceReport clearance_report(const EpisodeLog& log);
std::string report_to_string(const ClearanceReport& r);

// Maximum perpendicular deviation of the robot path from the straight
// start-goal line.
double path_deviation(const EpisodeLog& log, const Vec2& start, const Vec2& goal);

// Scenario file: line-based key,value records (documented in README).
struct Scenario {
    World world;
    SimConfig config;
};
Scenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Scenario& s);

void write_episode_csv(const std::string& path, const EpisodeLog& log);
EpisodeLog read_episode_csv(const std::string& path);

// Overhead view: walls, robot path, pedestrian paths, comfort circles.
void write_episode_svg(const std::string& path, const EpisodeLog& log, const World& world);

}  // namespace proxemo
