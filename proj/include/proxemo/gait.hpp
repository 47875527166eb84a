#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "proxemo/vec.hpp"

namespace proxemo {

constexpr int kNumJoints = 16;
constexpr int kNumFrames = 75;
constexpr int kNumEmotions = 4;
constexpr int kNumViewGroups = 4;
constexpr double kDefaultFrameRate = 10.0;  // Hz

enum class EmotionClass { angry = 0, sad = 1, happy = 2, neutral = 3 };
enum class ViewGroup { front = 0, right = 1, back = 2, left = 3 };

const char* to_string(EmotionClass e);
const char* to_string(ViewGroup g);
EmotionClass emotion_from_string(const std::string& s);
ViewGroup view_group_from_string(const std::string& s);

// Joint layout. The generator and all tooling assume this topology; it is
// also written into gait files so external consumers can reconstruct bones.
enum JointId : int {
    kPelvis = 0,
    kSpine = 1,
    kNeck = 2,
    kHead = 3,
    kShoulderL = 4,
    kElbowL = 5,
    kHandL = 6,
    kShoulderR = 7,
    kElbowR = 8,
    kHandR = 9,
    kHipL = 10,
    kKneeL = 11,
    kFootL = 12,
    kHipR = 13,
    kKneeR = 14,
    kFootR = 15,
};

constexpr int kNumBones = 15;
// (parent, child) pairs forming the skeleton tree.
const std::array<std::pair<int, int>, kNumBones>& skeleton_edges();

using Pose = std::array<Vec3, kNumJoints>;

bool pose_finite(const Pose& p);

// Fixed-length gait cycle: 75 poses of 16 joints. Non-finite coordinates are
// rejected at construction.
class Gait {
public:
    Gait(std::vector<Pose> frames, double frame_rate = kDefaultFrameRate);

    const std::vector<Pose>& frames() const { return frames_; }
    const Pose& frame(int t) const { return frames_[static_cast<std::size_t>(t)]; }
    double frame_rate() const { return frame_rate_; }

    bool operator==(const Gait& o) const {
        if (frames_.size() != o.frames_.size() || frame_rate_ != o.frame_rate_) return false;
        for (std::size_t t = 0; t < frames_.size(); ++t)
            for (int j = 0; j < kNumJoints; ++j) {
                const Vec3& a = frames_[t][static_cast<std::size_t>(j)];
                const Vec3& b = o.frames_[t][static_cast<std::size_t>(j)];
                if (a.x != b.x || a.y != b.y || a.z != b.z) return false;
            }
        return true;
    }

private:
    std::vector<Pose> frames_;
    double frame_rate_;
};

// Rotation about the Y (vertical) axis in degrees plus a translation.
struct AugmentationParams {
    double theta_deg = 0.0;
    Vec3 translation{0.0, 0.0, 0.0};
};

enum class GaitSource { synthetic, file };

struct LabeledGait {
    Gait gait;
    EmotionClass emotion;
    ViewGroup view_group;
    GaitSource source = GaitSource::synthetic;
};

// y' = y; (x', z') = R(theta) (x, z); then translate.
Pose rotate_translate_pose(const Pose& pose, const AugmentationParams& params);
Gait augment_gait(const Gait& gait, const AugmentationParams& params);

// Which 90-degree arc a rotation angle falls into. Arcs are centered on
// 0/90/180/270 degrees with half-open boundaries, so the mapping is total.
ViewGroup view_group_of(double theta_deg);

// The full view expansion: theta in 5-degree steps (72 angles) crossed with
// T_z in {1, 2, 3, 4} meters, 288 outputs, ordered by (theta, T_z).
std::vector<std::pair<Gait, ViewGroup>> generate_augmentation_set(const Gait& gait);

// Per-emotion walk parameters. Periods are in frames at kDefaultFrameRate.
struct GaitStyle {
    double stride_period;   // frames per stride cycle
    double speed;           // forward drift, m/s
    double arm_swing;       // rad
    double leg_swing;       // rad
    double torso_pitch;     // rad, forward slouch
    double head_pitch;      // rad, added to torso pitch
    double shoulder_roll;   // rad, shoulders drawn forward
    double bob_amplitude;   // m, vertical pelvis oscillation
};

const GaitStyle& emotion_style(EmotionClass e);

// One skeleton pose of an endless walk parameterized by `style`, at integer
// frame index `t`. The walker starts near the origin facing -Z and drifts
// along -Z at style.speed. `noise` adds deterministic per-joint jitter keyed
// on (noise_key, t, joint).
Pose walk_pose(const GaitStyle& style, std::int64_t t, std::uint64_t noise_key, double noise);

// Jitter stream key used by synthesize_gait for a given sample seed.
std::uint64_t gait_noise_key(std::uint64_t seed);

// Deterministic synthetic gait: frames 0..74 of walk_pose with a style
// perturbed slightly by `seed` when noise > 0. View group is front.
LabeledGait synthesize_gait(EmotionClass emotion, std::uint64_t seed, double noise);

// Style actually used by synthesize_gait for a given (emotion, seed, noise).
GaitStyle perturbed_style(EmotionClass emotion, std::uint64_t seed, double noise);

std::array<double, kNumBones> bone_lengths(const Pose& pose);

// Gait file format (CSV, documented in README): header key,value lines
// followed by a frame,joint,x,y,z table. Doubles round-trip exactly.
void write_gait_csv(const std::string& path, const LabeledGait& g);
LabeledGait read_gait_csv(const std::string& path);

}  // namespace proxemo
