#include "proxemo/gait.hpp"

#include <cmath>

#include "proxemo/errors.hpp"
#include "proxemo/rng.hpp"

namespace proxemo {

const char* to_string(EmotionClass e) {
    switch (e) {
        case EmotionClass::angry: return "angry";
        case EmotionClass::sad: return "sad";
        case EmotionClass::happy: return "happy";
        case EmotionClass::neutral: return "neutral";
    }
    return "?";
}

const char* to_string(ViewGroup g) {
    switch (g) {
        case ViewGroup::front: return "front";
        case ViewGroup::right: return "right";
        case ViewGroup::back: return "back";
        case ViewGroup::left: return "left";
    }
    return "?";
}

EmotionClass emotion_from_string(const std::string& s) {
    for (int i = 0; i < kNumEmotions; ++i) {
        auto e = static_cast<EmotionClass>(i);
        if (s == to_string(e)) return e;
    }
    throw InvalidInputError("unknown emotion class: " + s);
}

ViewGroup view_group_from_string(const std::string& s) {
    for (int i = 0; i < kNumViewGroups; ++i) {
        auto g = static_cast<ViewGroup>(i);
        if (s == to_string(g)) return g;
    }
    throw InvalidInputError("unknown view group: " + s);
}

const std::array<std::pair<int, int>, kNumBones>& skeleton_edges() {
    static const std::array<std::pair<int, int>, kNumBones> edges = {{
        {kPelvis, kSpine},
        {kSpine, kNeck},
        {kNeck, kHead},
        {kNeck, kShoulderL},
        {kShoulderL, kElbowL},
        {kElbowL, kHandL},
        {kNeck, kShoulderR},
        {kShoulderR, kElbowR},
        {kElbowR, kHandR},
        {kPelvis, kHipL},
        {kHipL, kKneeL},
        {kKneeL, kFootL},
        {kPelvis, kHipR},
        {kHipR, kKneeR},
        {kKneeR, kFootR},
    }};
    return edges;
}

bool pose_finite(const Pose& p) {
    for (const auto& j : p)
        if (!j.finite()) return false;
    return true;
}

Gait::Gait(std::vector<Pose> frames, double frame_rate)
    : frames_(std::move(frames)), frame_rate_(frame_rate) {
    if (frames_.size() != kNumFrames)
        throw InvalidInputError("gait must have exactly 75 frames, got " +
                                std::to_string(frames_.size()));
    if (!(frame_rate_ > 0.0) || !std::isfinite(frame_rate_))
        throw InvalidInputError("gait frame rate must be positive and finite");
    for (const auto& f : frames_)
        if (!pose_finite(f)) throw InvalidInputError("gait contains non-finite coordinates");
}

Pose rotate_translate_pose(const Pose& pose, const AugmentationParams& params) {
    if (!pose_finite(pose)) throw InvalidInputError("rotate_translate_pose: non-finite pose");
    const double th = params.theta_deg * M_PI / 180.0;
    const double c = std::cos(th);
    const double s = std::sin(th);
    const Vec3& t = params.translation;
    Pose out;
    for (int j = 0; j < kNumJoints; ++j) {
        const Vec3& p = pose[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(j)] = {c * p.x - s * p.z + t.x,
                                            p.y + t.y,
                                            s * p.x + c * p.z + t.z};
    }
    return out;
}

Gait augment_gait(const Gait& gait, const AugmentationParams& params) {
    std::vector<Pose> frames;
    frames.reserve(gait.frames().size());
    for (const auto& f : gait.frames()) frames.push_back(rotate_translate_pose(f, params));
    return Gait(std::move(frames), gait.frame_rate());
}

ViewGroup view_group_of(double theta_deg) {
    if (!std::isfinite(theta_deg)) throw InvalidInputError("view_group_of: non-finite angle");
    const double a = norm_deg(theta_deg);
    if (a < 45.0 || a >= 315.0) return ViewGroup::front;
    if (a < 135.0) return ViewGroup::right;
    if (a < 225.0) return ViewGroup::back;
    return ViewGroup::left;
}

std::vector<std::pair<Gait, ViewGroup>> generate_augmentation_set(const Gait& gait) {
    std::vector<std::pair<Gait, ViewGroup>> out;
    out.reserve(288);
    for (int step = 0; step < 72; ++step) {
        const double theta = 5.0 * step;
        for (int tz = 1; tz <= 4; ++tz) {
            AugmentationParams params{theta, {0.0, 0.0, static_cast<double>(tz)}};
            out.emplace_back(augment_gait(gait, params), view_group_of(theta));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic walker

namespace {

// Segment lengths (m).
constexpr double kPelvisHeight = 0.95;
constexpr double kPelvisToSpine = 0.25;
constexpr double kSpineToNeck = 0.25;
constexpr double kNeckToHead = 0.15;
constexpr double kShoulderHalf = 0.20;
constexpr double kUpperArm = 0.28;
constexpr double kForearm = 0.26;
constexpr double kHipHalf = 0.11;
constexpr double kThigh = 0.42;
constexpr double kShin = 0.42;

// Deterministic jitter in [-1, 1] keyed on (key, frame, joint, axis).
double jitter(std::uint64_t key, std::int64_t t, int joint, int axis) {
    std::uint64_t h = splitmix64(key ^ splitmix64(static_cast<std::uint64_t>(t) * 16451 +
                                                  static_cast<std::uint64_t>(joint) * 31 + axis));
    return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace

const GaitStyle& emotion_style(EmotionClass e) {
    // Qualitative profile per class: angry walks fast with vigorous swings and
    // a forward lean, sad walks slowly, hunched, with limp arms, happy walks
    // briskly and upright, neutral sits between them.
    static const GaitStyle styles[kNumEmotions] = {
        // period speed  arm   leg   torso  head   shoulder bob
        {11.0, 1.45, 0.65, 0.50, 0.18, 0.10, 0.05, 0.035},  // angry
        {18.0, 0.65, 0.15, 0.22, 0.38, 0.35, 0.15, 0.010},  // sad
        {12.0, 1.30, 0.50, 0.45, 0.02, -0.05, 0.00, 0.030},  // happy
        {14.0, 1.10, 0.35, 0.38, 0.08, 0.02, 0.02, 0.020},  // neutral
    };
    return styles[static_cast<std::size_t>(e)];
}

Pose walk_pose(const GaitStyle& style, std::int64_t t, std::uint64_t noise_key, double noise) {
    const double phase = 2.0 * M_PI * static_cast<double>(t) / style.stride_period;
    const double drift = -style.speed * static_cast<double>(t) / kDefaultFrameRate;

    Pose p;
    const double bob = style.bob_amplitude * std::cos(2.0 * phase);
    const double sway = 0.02 * std::sin(phase);
    const Vec3 pelvis{sway, kPelvisHeight + bob, drift};
    p[kPelvis] = pelvis;

    // Torso chain, pitched forward (toward -Z) by the slouch angle.
    const double tp = style.torso_pitch;
    const Vec3 up_t{0.0, std::cos(tp), -std::sin(tp)};
    p[kSpine] = pelvis + up_t * kPelvisToSpine;
    p[kNeck] = p[kSpine] + up_t * kSpineToNeck;
    const double hp = tp + style.head_pitch;
    p[kHead] = p[kNeck] + Vec3{0.0, std::cos(hp), -std::sin(hp)} * kNeckToHead;

    // Shoulders hang off the neck; a hunch rolls them forward and inward.
    const double roll = style.shoulder_roll;
    const double half = kShoulderHalf * (1.0 - 0.3 * roll);
    p[kShoulderL] = p[kNeck] + Vec3{half, -0.03, -kShoulderHalf * roll};
    p[kShoulderR] = p[kNeck] + Vec3{-half, -0.03, -kShoulderHalf * roll};

    // Arms swing opposite their ipsilateral leg; elbows flex slightly more on
    // the forward swing.
    auto arm = [&](int shoulder, int elbow, int hand, double ph) {
        const double swing = style.arm_swing * std::sin(ph);
        const double flex = 0.25 + 0.20 * std::max(0.0, std::sin(ph));
        p[elbow] = p[shoulder] + Vec3{0.0, -std::cos(swing), -std::sin(swing)} * kUpperArm;
        const double a2 = swing + flex;
        p[hand] = p[elbow] + Vec3{0.0, -std::cos(a2), -std::sin(a2)} * kForearm;
    };
    arm(kShoulderL, kElbowL, kHandL, phase + M_PI);
    arm(kShoulderR, kElbowR, kHandR, phase);

    // Legs: thigh swings about the hip; the knee flexes during swing phase.
    auto leg = [&](int hip, int knee, int foot, double side, double ph) {
        p[hip] = pelvis + Vec3{side * kHipHalf, -0.05, 0.0};
        const double swing = style.leg_swing * std::sin(ph);
        const double flex = 0.08 + 0.45 * std::max(0.0, std::cos(ph));
        p[knee] = p[hip] + Vec3{0.0, -std::cos(swing), -std::sin(swing)} * kThigh;
        const double a2 = swing - flex;
        p[foot] = p[knee] + Vec3{0.0, -std::cos(a2), -std::sin(a2)} * kShin;
    };
    leg(kHipL, kKneeL, kFootL, +1.0, phase);
    leg(kHipR, kKneeR, kFootR, -1.0, phase + M_PI);

    if (noise > 0.0) {
        for (int j = 0; j < kNumJoints; ++j) {
            auto& v = p[static_cast<std::size_t>(j)];
            v.x += noise * jitter(noise_key, t, j, 0);
            v.y += noise * jitter(noise_key, t, j, 1);
            v.z += noise * jitter(noise_key, t, j, 2);
        }
    }
    return p;
}

GaitStyle perturbed_style(EmotionClass emotion, std::uint64_t seed, double noise) {
    GaitStyle s = emotion_style(emotion);
    if (noise <= 0.0) return s;
    // Small per-sample spread around the class profile, scaled with the noise
    // level but capped so classes stay separable.
    Rng rng(splitmix64(seed ^ (0xE0A1ULL + static_cast<std::uint64_t>(emotion))));
    const double w = std::min(0.08, 2.0 * noise);
    s.stride_period *= 1.0 + w * rng.uniform(-1.0, 1.0);
    s.speed *= 1.0 + w * rng.uniform(-1.0, 1.0);
    s.arm_swing *= 1.0 + w * rng.uniform(-1.0, 1.0);
    s.leg_swing *= 1.0 + w * rng.uniform(-1.0, 1.0);
    s.torso_pitch += 0.25 * w * rng.uniform(-1.0, 1.0);
    s.head_pitch += 0.25 * w * rng.uniform(-1.0, 1.0);
    s.bob_amplitude *= 1.0 + w * rng.uniform(-1.0, 1.0);
    return s;
}

std::uint64_t gait_noise_key(std::uint64_t seed) {
    return splitmix64(seed * 2654435761ULL + 17);
}

LabeledGait synthesize_gait(EmotionClass emotion, std::uint64_t seed, double noise) {
    if (noise < 0.0) throw InvalidInputError("synthesize_gait: noise must be >= 0");
    const GaitStyle style = perturbed_style(emotion, seed, noise);
    const std::uint64_t noise_key = gait_noise_key(seed);
    std::vector<Pose> frames;
    frames.reserve(kNumFrames);
    for (int t = 0; t < kNumFrames; ++t)
        frames.push_back(walk_pose(style, t, noise_key, noise));
    return LabeledGait{Gait(std::move(frames)), emotion, ViewGroup::front, GaitSource::synthetic};
}

std::array<double, kNumBones> bone_lengths(const Pose& pose) {
    std::array<double, kNumBones> out{};
    const auto& edges = skeleton_edges();
    for (int i = 0; i < kNumBones; ++i) {
        const auto& [a, b] = edges[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] =
            (pose[static_cast<std::size_t>(b)] - pose[static_cast<std::size_t>(a)]).norm();
    }
    return out;
}

}  // namespace proxemo
