#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "proxemo/errors.hpp"
#include "proxemo/gait.hpp"
#include "proxemo/rng.hpp"

using namespace proxemo;

namespace {

Pose random_pose(Rng& rng) {
    Pose p;
    for (auto& j : p) j = {rng.uniform(-1.0, 1.0), rng.uniform(0.0, 2.0), rng.uniform(-1.0, 1.0)};
    return p;
}

Gait random_gait(Rng& rng) {
    std::vector<Pose> frames;
    for (int t = 0; t < kNumFrames; ++t) frames.push_back(random_pose(rng));
    return Gait(std::move(frames));
}

double max_joint_distance(const Pose& a, const Pose& b) {
    double m = 0.0;
    for (int j = 0; j < kNumJoints; ++j)
        m = std::max(m, (a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)]).norm());
    return m;
}

double mean_joint_distance(const Gait& a, const Gait& b) {
    double sum = 0.0;
    for (int t = 0; t < kNumFrames; ++t)
        for (int j = 0; j < kNumJoints; ++j)
            sum += (a.frame(t)[static_cast<std::size_t>(j)] - b.frame(t)[static_cast<std::size_t>(j)]).norm();
    return sum / (kNumFrames * kNumJoints);
}

}  // namespace

TEST_CASE("rotate_translate_pose identity") {
    Rng rng(7);
    const Pose p = random_pose(rng);
    const Pose q = rotate_translate_pose(p, {});
    CHECK(max_joint_distance(p, q) == doctest::Approx(0.0));
}

TEST_CASE("rotate_translate_pose 90 degrees maps +x to +z") {
    Pose p{};
    p[0] = {1.0, 0.0, 0.0};
    const Pose q = rotate_translate_pose(p, {90.0, {0.0, 0.0, 0.0}});
    CHECK(q[0].x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q[0].y == doctest::Approx(0.0));
    CHECK(q[0].z == doctest::Approx(1.0));
}

TEST_CASE("rotate_translate_pose 180 degrees plus translation") {
    Pose p{};
    p[0] = {1.0, 2.0, 3.0};
    const Pose q = rotate_translate_pose(p, {180.0, {0.0, 0.0, 2.0}});
    CHECK(q[0].x == doctest::Approx(-1.0));
    CHECK(q[0].y == doctest::Approx(2.0));
    CHECK(q[0].z == doctest::Approx(-1.0));
}

TEST_CASE("rotate_translate_pose rejects non-finite input") {
    Pose p{};
    p[3].z = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(rotate_translate_pose(p, {}), InvalidInputError);
}

TEST_CASE("rotation preserves bone lengths and y coordinates") {
    Rng rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        const Pose p = random_pose(rng);
        const double theta = rng.uniform(0.0, 360.0);
        const Pose q = rotate_translate_pose(p, {theta, {0.0, 0.0, 0.0}});
        const auto lp = bone_lengths(p);
        const auto lq = bone_lengths(q);
        for (int i = 0; i < kNumBones; ++i)
            CHECK(std::abs(lp[static_cast<std::size_t>(i)] - lq[static_cast<std::size_t>(i)]) < 1e-9);
        for (int j = 0; j < kNumJoints; ++j)
            CHECK(std::abs(p[static_cast<std::size_t>(j)].y - q[static_cast<std::size_t>(j)].y) < 1e-9);
    }
}

TEST_CASE("rotate_translate_pose inverse round trip") {
    Rng rng(22);
    for (int rep = 0; rep < 20; ++rep) {
        const Pose p = random_pose(rng);
        const double theta = rng.uniform(0.0, 360.0);
        const Vec3 t{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
        const Pose q = rotate_translate_pose(p, {theta, t});
        // inverse: rotate by -theta, translate by -R(-theta) t
        const Pose t_pose_in = rotate_translate_pose(Pose{Vec3{t.x, t.y, t.z}}, {-theta, {}});
        const Vec3 t_inv{-t_pose_in[0].x, -t_pose_in[0].y, -t_pose_in[0].z};
        const Pose back = rotate_translate_pose(q, {-theta, t_inv});
        CHECK(max_joint_distance(p, back) < 1e-9);
    }
}

TEST_CASE("augment_gait identity and consistency with per-pose oracle") {
    Rng rng(5);
    const Gait g = random_gait(rng);
    CHECK(augment_gait(g, {}) == g);

    const AugmentationParams params{90.0, {0.0, 0.0, 0.0}};
    const Gait rotated = augment_gait(g, params);
    for (int t = 0; t < kNumFrames; ++t) {
        const Pose expect = rotate_translate_pose(g.frame(t), params);
        CHECK(max_joint_distance(rotated.frame(t), expect) == doctest::Approx(0.0));
        const auto la = bone_lengths(g.frame(t));
        const auto lb = bone_lengths(rotated.frame(t));
        for (int i = 0; i < kNumBones; ++i)
            CHECK(std::abs(la[static_cast<std::size_t>(i)] - lb[static_cast<std::size_t>(i)]) < 1e-9);
    }
}

TEST_CASE("augment_gait matches hand-computed Eq-style transform") {
    Rng rng(6);
    const Gait g = random_gait(rng);
    const Gait aug = augment_gait(g, {45.0, {0.0, 0.0, 3.0}});
    const Vec3 j0 = g.frame(0)[0];
    const double c = std::cos(45.0 * M_PI / 180.0), s = std::sin(45.0 * M_PI / 180.0);
    CHECK(aug.frame(0)[0].x == doctest::Approx(c * j0.x - s * j0.z).epsilon(1e-12));
    CHECK(aug.frame(0)[0].y == doctest::Approx(j0.y).epsilon(1e-12));
    CHECK(aug.frame(0)[0].z == doctest::Approx(s * j0.x + c * j0.z + 3.0).epsilon(1e-12));
}

TEST_CASE("view_group_of quadrants") {
    CHECK(view_group_of(0.0) == ViewGroup::front);
    CHECK(view_group_of(180.0) == ViewGroup::back);
    CHECK(view_group_of(45.0) == ViewGroup::right);
    CHECK(view_group_of(315.0) == ViewGroup::front);
    CHECK(view_group_of(-45.0) == ViewGroup::front);  // wraps to 315

    // total, 360-periodic, constant on each 90-degree arc (5-degree sweep)
    std::map<ViewGroup, int> histogram;
    for (int i = 0; i < 72; ++i) {
        const double theta = 5.0 * i;
        const ViewGroup g = view_group_of(theta);
        CHECK(view_group_of(theta + 360.0) == g);
        CHECK(view_group_of(theta - 720.0) == g);
        // arc membership from the quadrant center
        const double centered = std::fmod(theta + 45.0, 360.0);
        CHECK(static_cast<int>(g) == static_cast<int>(centered / 90.0));
        ++histogram[g];
    }
    for (const auto& [g, count] : histogram) CHECK(count == 18);
}

TEST_CASE("generate_augmentation_set contract") {
    const LabeledGait lg = synthesize_gait(EmotionClass::neutral, 3, 0.0);
    const auto set = generate_augmentation_set(lg.gait);
    REQUIRE(set.size() == 288);

    // element (theta=0, tz=1) is the first one
    CHECK(set[0].first == augment_gait(lg.gait, {0.0, {0.0, 0.0, 1.0}}));
    CHECK(set[0].second == ViewGroup::front);

    int histogram[4] = {0, 0, 0, 0};
    for (const auto& [g, view] : set) ++histogram[static_cast<int>(view)];
    for (int i = 0; i < 4; ++i) CHECK(histogram[i] == 72);

    // ordering by (theta, tz): spot-check element 5 = theta 5 deg, tz 2
    CHECK(set[5].first == augment_gait(lg.gait, {5.0, {0.0, 0.0, 2.0}}));
}

TEST_CASE("synthesize_gait determinism and class separation") {
    const LabeledGait a = synthesize_gait(EmotionClass::happy, 1, 0.0);
    const LabeledGait b = synthesize_gait(EmotionClass::happy, 1, 0.0);
    CHECK(a.gait == b.gait);
    CHECK(a.view_group == ViewGroup::front);

    const GaitStyle& sad = emotion_style(EmotionClass::sad);
    const GaitStyle& happy = emotion_style(EmotionClass::happy);
    CHECK(sad.torso_pitch > happy.torso_pitch);
    CHECK(sad.speed < happy.speed);

    LabeledGait gaits[] = {
        synthesize_gait(EmotionClass::angry, 2, 0.0),
        synthesize_gait(EmotionClass::sad, 2, 0.0),
        synthesize_gait(EmotionClass::happy, 2, 0.0),
        synthesize_gait(EmotionClass::neutral, 2, 0.0),
    };
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            CHECK(mean_joint_distance(gaits[i].gait, gaits[j].gait) > 0.0);

    CHECK_THROWS_AS(synthesize_gait(EmotionClass::sad, 0, -0.5), InvalidInputError);
}

TEST_CASE("synthetic gait is kinematically consistent") {
    // bones keep their length across frames (no noise)
    const LabeledGait lg = synthesize_gait(EmotionClass::angry, 9, 0.0);
    const auto ref = bone_lengths(lg.gait.frame(0));
    for (int t = 1; t < kNumFrames; ++t) {
        const auto len = bone_lengths(lg.gait.frame(t));
        for (int i = 0; i < kNumBones; ++i)
            CHECK(len[static_cast<std::size_t>(i)] ==
                  doctest::Approx(ref[static_cast<std::size_t>(i)]).epsilon(1e-9));
    }
    // forward drift moves the pelvis along -Z
    CHECK(lg.gait.frame(kNumFrames - 1)[kPelvis].z < lg.gait.frame(0)[kPelvis].z);
}

TEST_CASE("bone_lengths basics") {
    Rng rng(11);
    const Pose p = random_pose(rng);
    const auto len = bone_lengths(p);

    Pose doubled = p;
    for (auto& j : doubled) j = j * 2.0;
    const auto len2 = bone_lengths(doubled);
    for (int i = 0; i < kNumBones; ++i)
        CHECK(len2[static_cast<std::size_t>(i)] ==
              doctest::Approx(2.0 * len[static_cast<std::size_t>(i)]).epsilon(1e-12));

    const Pose zero{};
    for (double l : bone_lengths(zero)) CHECK(l == 0.0);
}

TEST_CASE("gait constructor rejects bad input") {
    CHECK_THROWS_AS(Gait(std::vector<Pose>(10)), InvalidInputError);
    std::vector<Pose> frames(kNumFrames);
    frames[40][5].x = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Gait(std::move(frames)), InvalidInputError);
}

TEST_CASE("gait csv round trip is exact") {
    const LabeledGait lg = synthesize_gait(EmotionClass::sad, 77, 0.25);
    const std::string path = "test_gait_roundtrip.csv";
    write_gait_csv(path, lg);
    const LabeledGait back = read_gait_csv(path);
    CHECK(back.gait == lg.gait);
    CHECK(back.emotion == lg.emotion);
    CHECK(back.view_group == lg.view_group);
    CHECK(back.source == lg.source);
    CHECK(back.gait.frame_rate() == lg.gait.frame_rate());
    std::remove(path.c_str());

    CHECK_THROWS_AS(read_gait_csv("does_not_exist_anywhere.csv"), FileError);
}
