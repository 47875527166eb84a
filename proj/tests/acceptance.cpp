#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>

#include "proxemo/embedding.hpp"
#include "proxemo/gait.hpp"
#include "proxemo/model.hpp"
#include "proxemo/navsim.hpp"
#include "proxemo/nn.hpp"
#include "proxemo/proxemics.hpp"
#include "proxemo/rng.hpp"

using namespace proxemo;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int criterion, const char* desc, bool pass) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, desc);
    std::fflush(stdout);
}

// Reference six-loop cross-correlation (same oracle as the unit suite).
Tensor4 conv_reference(const Tensor4& x, const Tensor4& w, const std::vector<double>& bias,
                       int stride, int pad, int groups) {
    const int icg = x.c / groups;
    const int ocg = w.n / groups;
    const int oh = (x.h + 2 * pad - w.h) / stride + 1;
    const int ow = (x.w + 2 * pad - w.w) / stride + 1;
    Tensor4 out(x.n, w.n, oh, ow);
    for (int b = 0; b < x.n; ++b)
        for (int oc = 0; oc < w.n; ++oc)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = bias[static_cast<std::size_t>(oc)];
                    const int g = oc / ocg;
                    for (int ic = 0; ic < icg; ++ic)
                        for (int ky = 0; ky < w.h; ++ky)
                            for (int kx = 0; kx < w.w; ++kx) {
                                const int iy = oy * stride - pad + ky;
                                const int ix = ox * stride - pad + kx;
                                if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                                acc += x.at(b, g * icg + ic, iy, ix) * w.at(oc, ic, ky, kx);
                            }
                    out.at(b, oc, oy, ox) = acc;
                }
    return out;
}

// Balanced synthetic dataset: per (emotion, view) cell, gaits rotated into the
// cell's quadrant at a random distance.
std::vector<LabeledImage> balanced_dataset(int per_cell, int size, double noise,
                                           std::uint64_t seed0) {
    std::vector<LabeledImage> out;
    out.reserve(static_cast<std::size_t>(per_cell) * 16);
    for (int e = 0; e < kNumEmotions; ++e)
        for (int v = 0; v < kNumViewGroups; ++v)
            for (int k = 0; k < per_cell; ++k) {
                const std::uint64_t seed =
                    seed0 + static_cast<std::uint64_t>((e * 4 + v) * 100000 + k);
                Rng rng(splitmix64(seed));
                const LabeledGait lg = synthesize_gait(static_cast<EmotionClass>(e), seed, noise);
                const double theta = 90.0 * v + rng.uniform(-44.0, 44.0);
                const double tz = rng.uniform(1.0, 4.0);
                const Gait aug = augment_gait(lg.gait, {theta, {0.0, 0.0, tz}});
                out.push_back({gait_to_image(aug, size), static_cast<EmotionClass>(e),
                               static_cast<ViewGroup>(v)});
            }
    return out;
}

const char* kCheckpointPath = "acceptance_model.ckpt";
std::optional<GaitClassifier> g_trained;  // produced by criterion 7, reused by 9 and 10

World front_approach_world(EmotionClass emotion, double ped_speed, double ped_x, double goal_x) {
    World w;
    w.robot_start = {0.0, 0.0};
    w.robot_heading = 0.0;
    w.goal = {goal_x, 0.0};
    Pedestrian p;
    p.position = {ped_x, 0.0};
    p.heading = M_PI;
    p.speed = ped_speed;
    p.emotion = emotion;
    p.seed = 11;
    w.pedestrians.push_back(p);
    return w;
}

SimConfig nav_config(SimMode mode) {
    SimConfig cfg;
    cfg.mode = mode;
    cfg.n_beams = 360;
    cfg.max_range = 12.0;
    cfg.sensor_range = 12.0;
    cfg.resolution = 0.01;
    cfg.max_steps = 1000;
    cfg.planner.horizon_dt = 0.025;
    return cfg;
}

}  // namespace

TEST_CASE("criterion 1: group convolution oracle equivalence") {
    const auto t0 = Clock::now();
    Rng rng(0xC1);
    bool pass = true;
    int cases = 0;
    while (cases < 50) {
        for (const int groups : {1, 2, 4}) {
            if (cases >= 50) break;
            const int icg = 1 + rng.below_int(3);
            const int ocg = 1 + rng.below_int(3);
            const int in_ch = groups * icg, out_ch = groups * ocg;
            const int k = rng.below_int(2) == 0 ? 1 : 3;
            const int stride = 1 + rng.below_int(2);
            const int pad = rng.below_int(2);
            const int h = 5 + rng.below_int(5), w = 5 + rng.below_int(5);
            if (h + 2 * pad < k || w + 2 * pad < k) continue;

            Conv2d gconv(in_ch, out_ch, k, stride, pad, groups, rng);
            Tensor4 x(2, in_ch, h, w);
            for (auto& v : x.v) v = rng.uniform(-1.0, 1.0);
            const Tensor4 got = gconv.forward(x, false);

            // concatenation of per-group plain convolutions
            Tensor4 want(got.n, got.c, got.h, got.w);
            for (int g = 0; g < groups; ++g) {
                Conv2d part(icg, ocg, k, stride, pad, 1, rng);
                for (int oc = 0; oc < ocg; ++oc) {
                    part.bias[static_cast<std::size_t>(oc)] =
                        gconv.bias[static_cast<std::size_t>(g * ocg + oc)];
                    for (int ic = 0; ic < icg; ++ic)
                        for (int ky = 0; ky < k; ++ky)
                            for (int kx = 0; kx < k; ++kx)
                                part.weight.at(oc, ic, ky, kx) =
                                    gconv.weight.at(g * ocg + oc, ic, ky, kx);
                }
                Tensor4 slice(x.n, icg, h, w);
                for (int b = 0; b < x.n; ++b)
                    for (int ic = 0; ic < icg; ++ic)
                        std::copy(x.plane(b, g * icg + ic), x.plane(b, g * icg + ic) + h * w,
                                  slice.plane(b, ic));
                const Tensor4 po = part.forward(slice, false);
                for (int b = 0; b < x.n; ++b)
                    for (int oc = 0; oc < ocg; ++oc)
                        std::copy(po.plane(b, oc), po.plane(b, oc) + po.h * po.w,
                                  want.plane(b, g * ocg + oc));
            }
            // independent brute-force reference as well
            const Tensor4 ref = conv_reference(x, gconv.weight, gconv.bias, stride, pad, groups);
            for (std::size_t i = 0; i < got.v.size(); ++i) {
                if (std::abs(got.v[i] - want.v[i]) > 1e-12) pass = false;
                if (std::abs(got.v[i] - ref.v[i]) > 1e-12) pass = false;
            }
            ++cases;
        }
    }
    const double elapsed = seconds_since(t0);
    pass = pass && elapsed < 10.0;
    report(1, "group_conv2d == concatenated per-group conv2d (50 cases, 1e-12)", pass);
    CHECK(pass);
}

TEST_CASE("criterion 2: gradient correctness via finite differences") {
    const auto t0 = Clock::now();
    Rng rng(0xC2);
    Sequential net;
    net.add(std::make_unique<Conv2d>(2, 4, 3, 1, 1, 1, rng));
    net.add(std::make_unique<ReLU>());
    net.add(std::make_unique<MaxPool2d>(2, 2));
    net.add(std::make_unique<BatchNorm2d>(4, 1e-5, 0.1));
    net.add(std::make_unique<Conv2d>(4, 16, 3, 1, 1, 2, rng));
    net.add(std::make_unique<ReLU>());
    net.add(std::make_unique<GlobalAvgPool>());

    Tensor4 x(2, 2, 8, 8);
    for (auto& v : x.v) v = rng.uniform(-1.0, 1.0);
    const std::vector<int> targets = {4, 13};

    auto params = net.params();
    for (auto& p : params) std::fill(p.grad->begin(), p.grad->end(), 0.0);
    const SoftmaxLoss head = softmax_cross_entropy(net.forward(x, true), targets);
    net.backward(head.grad_logits);

    bool pass = true;
    const double h = 1e-5;
    double worst = 0.0;
    for (auto& p : params) {
        for (std::size_t i = 0; i < p.value->size(); ++i) {
            const double orig = (*p.value)[i];
            (*p.value)[i] = orig + h;
            const double lp = softmax_cross_entropy(net.forward(x, true), targets).loss;
            (*p.value)[i] = orig - h;
            const double lm = softmax_cross_entropy(net.forward(x, true), targets).loss;
            (*p.value)[i] = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double an = (*p.grad)[i];
            const double rel = std::abs(an - fd) / std::max(1e-8, std::abs(an) + std::abs(fd));
            worst = std::max(worst, rel);
            if (rel > 1e-4) pass = false;
        }
    }
    const double elapsed = seconds_since(t0);
    pass = pass && elapsed < 30.0;
    std::printf("  (worst relative error %.3g, %.1fs)\n", worst, elapsed);
    report(2, "all layer gradients match central finite differences (rel err <= 1e-4)", pass);
    CHECK(pass);
}

TEST_CASE("criterion 3: softmax grid normalization") {
    Rng rng(0xC3);
    bool pass = true;
    for (int rep = 0; rep < 1000; ++rep) {
        std::array<double, 16> logits{};
        for (auto& v : logits) v = rng.uniform(-30.0, 30.0);
        if (std::abs(softmax_grid(logits).sum() - 1.0) > 1e-12) pass = false;
    }
    const SoftmaxGrid uniform = softmax_grid(std::array<double, 16>{});
    for (double v : uniform.p)
        if (std::abs(v - 1.0 / 16.0) > 1e-12) pass = false;
    report(3, "1000 random grids sum to 1 +- 1e-12; zero logits give the uniform grid", pass);
    CHECK(pass);
}

TEST_CASE("criterion 4: augmentation contract") {
    bool pass = true;
    const LabeledGait lg = synthesize_gait(EmotionClass::happy, 5, 0.02);
    const auto set = generate_augmentation_set(lg.gait);
    if (set.size() != 288) pass = false;

    Rng rng(0xC4);
    for (const auto& [aug, view] : set) {
        (void)view;
        for (int t = 0; t < kNumFrames; t += 25) {
            const auto la = bone_lengths(lg.gait.frame(t));
            const auto lb = bone_lengths(aug.frame(t));
            for (int i = 0; i < kNumBones; ++i)
                if (std::abs(la[static_cast<std::size_t>(i)] - lb[static_cast<std::size_t>(i)]) >
                    1e-9)
                    pass = false;
            // rotation about Y with T_y = 0: y coordinates are invariant
            for (int j = 0; j < kNumJoints; ++j)
                if (std::abs(lg.gait.frame(t)[static_cast<std::size_t>(j)].y -
                             aug.frame(t)[static_cast<std::size_t>(j)].y) > 1e-9)
                    pass = false;
        }
    }

    // inverse-transform round trip on random parameters
    for (int rep = 0; rep < 10; ++rep) {
        const double theta = rng.uniform(0.0, 360.0);
        const Vec3 tr{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(1.0, 4.0)};
        const Gait aug = augment_gait(lg.gait, {theta, tr});
        const Pose t_in = rotate_translate_pose(Pose{Vec3{tr.x, tr.y, tr.z}}, {-theta, {}});
        const Gait back = augment_gait(aug, {-theta, {-t_in[0].x, -t_in[0].y, -t_in[0].z}});
        for (int t = 0; t < kNumFrames; t += 15)
            for (int j = 0; j < kNumJoints; ++j) {
                const Vec3 d = back.frame(t)[static_cast<std::size_t>(j)] -
                               lg.gait.frame(t)[static_cast<std::size_t>(j)];
                if (d.norm() > 1e-9) pass = false;
            }
    }
    report(4, "288 outputs, bone lengths and y preserved to 1e-9, inverse round trip", pass);
    CHECK(pass);
}

TEST_CASE("criterion 5: comfort-space table") {
    bool pass = true;
    auto one_hot = [](EmotionClass e, ViewGroup v) {
        SoftmaxGrid g;
        g.p.fill(0.0);
        g.p[static_cast<std::size_t>(grid_cell(static_cast<int>(e), static_cast<int>(v)))] = 1.0;
        return g;
    };
    if (std::abs(comfort_space(one_hot(EmotionClass::sad, ViewGroup::front)) - 1.1271) > 1e-12)
        pass = false;
    if (std::abs(comfort_space(one_hot(EmotionClass::happy, ViewGroup::front)) - 0.9004) > 1e-12)
        pass = false;
    for (int e = 0; e < 4; ++e)
        if (comfort_space(one_hot(static_cast<EmotionClass>(e), ViewGroup::back)) != 0.0)
            pass = false;
    report(5, "one-hot grids reproduce c_j * v_g (sad/front 1.1271, happy/front 0.9004, back 0)",
           pass);
    CHECK(pass);
}

TEST_CASE("criterion 6: minkowski fusion matches the brute-force oracle") {
    Rng rng(0xC6);
    bool pass = true;
    for (int scan_i = 0; scan_i < 20; ++scan_i) {
        LidarScan scan;
        scan.max_range = 8.0;
        scan.origin = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const int beams = 60 + rng.below_int(60);
        for (int b = 0; b < beams; ++b) {
            scan.angles.push_back(2.0 * M_PI * b / beams);
            const bool hit = rng.uniform() < 0.4;
            scan.ranges.push_back(hit ? rng.uniform(0.5, 5.0) : scan.max_range);
            scan.hit_id.push_back(hit ? rng.below_int(3) - 1 : -1);
        }
        const double r = scan_i == 0 ? 0.0 : rng.uniform(0.0, 1.0);
        const double res = 0.05;
        const AdmissibleSet set = proxemic_fusion(scan, r, res);

        std::vector<Vec2> hits;
        for (std::size_t b = 0; b < scan.beam_count(); ++b)
            if (scan.is_hit(b)) hits.push_back(scan.point(b));

        if (r == 0.0) {
            // raw set: exactly the containing cells of the hit points
            for (const auto& hp : hits)
                if (!set.blocked_at(hp)) pass = false;
            if (set.blocked_count() > hits.size()) pass = false;
        }
        for (int iy = 0; iy < set.ny(); ++iy)
            for (int ix = 0; ix < set.nx(); ++ix) {
                const Vec2 c = set.cell_center(ix, iy);
                double dmin = 1e18;
                for (const auto& hp : hits) dmin = std::min(dmin, (hp - c).norm());
                const bool oracle = dmin <= r;
                if (oracle != set.cell_blocked(ix, iy)) {
                    // any disagreement must sit within one cell of the boundary
                    // (or be a raw hit point marked through its containing cell)
                    const bool near_boundary = std::abs(dmin - r) <= res * std::sqrt(2.0);
                    if (!near_boundary) pass = false;
                }
            }
    }
    report(6, "occupancy fusion == per-cell min-distance within one cell; r=0 is the raw set",
           pass);
    CHECK(pass);
}

TEST_CASE("criterion 7: desk-scale learnability") {
    const auto t0 = Clock::now();

    std::printf("  generating 1600 balanced synthetic samples...\n");
    std::fflush(stdout);
    const auto dataset = balanced_dataset(100, 64, 0.04, 0xDA7A);

    TrainConfig cfg;
    cfg.epochs = 40;
    cfg.batch_size = 32;
    cfg.input_size = 64;
    cfg.val_fraction = 0.1;
    cfg.seed = 12;
    cfg.early_stop_val_acc = 97.5;
    cfg.verbose = true;
    ModelConfig mc;

    TrainResult result = train(dataset, cfg, mc);
    const double val_acc = result.history.back().val_acc;
    const double elapsed = seconds_since(t0);
    std::printf("  val mean accuracy %.2f%% after %zu epochs (%.0fs)\n", val_acc,
                result.history.size(), elapsed);

    result.net.save(kCheckpointPath);
    g_trained.emplace(GaitClassifier::load(kCheckpointPath));

    // 16-sample overfit sanity: one sample per joint class, small inputs
    const auto tiny = balanced_dataset(1, 32, 0.0, 0xF00D);
    TrainConfig overfit_cfg;
    overfit_cfg.epochs = 150;
    overfit_cfg.batch_size = 16;
    overfit_cfg.input_size = 32;
    overfit_cfg.val_fraction = 0.0;
    overfit_cfg.seed = 3;
    overfit_cfg.early_stop_val_acc = 100.0;  // applies to train accuracy (no val split)
    TrainResult overfit = train(tiny, overfit_cfg, mc);
    const double train_acc = overfit.history.back().train_acc;
    std::printf("  16-sample overfit train accuracy %.1f%% after %zu epochs\n", train_acc,
                overfit.history.size());

    const bool pass = val_acc >= 90.0 && elapsed < 1800.0 && train_acc == 100.0;
    report(7, "held-out mean accuracy >= 90% within 30 min; 16-sample overfit reaches 100%", pass);
    CHECK(pass);
}

TEST_CASE("criterion 8: parameter-count sanity") {
    ModelConfig cfg;
    cfg.input_size = 64;
    GaitClassifier net(cfg);
    const std::size_t n = net.parameter_count();
    std::printf("  trainable parameters: %zu\n", n);
    const bool pass = n >= 200000 && n <= 460000;
    report(8, "parameter count within [0.2M, 0.46M] around the reference 0.33M", pass);
    CHECK(pass);
}

TEST_CASE("criterion 9: navigation properties") {
    const auto t0 = Clock::now();
    bool pass_a = true, pass_b = true, pass_c = true, pass_d = true;

    // (a) determinism
    {
        const World w = front_approach_world(EmotionClass::sad, 1.0, 9.0, 10.0);
        const SimConfig cfg = nav_config(SimMode::oracle);
        const EpisodeLog l1 = run_episode(w, cfg);
        const EpisodeLog l2 = run_episode(w, cfg);
        if (l1.steps.size() != l2.steps.size()) pass_a = false;
        for (std::size_t i = 0; pass_a && i < l1.steps.size(); ++i) {
            if (l1.steps[i].x != l2.steps[i].x || l1.steps[i].y != l2.steps[i].y ||
                l1.steps[i].v != l2.steps[i].v || l1.steps[i].w != l2.steps[i].w)
                pass_a = false;
        }
        if (static_cast<int>(l1.steps.size()) > 1000) pass_a = false;
    }

    // (b) oracle-emotion min-clearance ordering on the front approach
    double clearance[4] = {};
    {
        const EmotionClass order[4] = {EmotionClass::sad, EmotionClass::angry,
                                       EmotionClass::neutral, EmotionClass::happy};
        for (int i = 0; i < 4; ++i) {
            const World w = front_approach_world(order[i], 1.0, 9.0, 10.0);
            const EpisodeLog log = run_episode(w, nav_config(SimMode::oracle));
            const ClearanceReport r = clearance_report(log);
            clearance[i] = r.min_clearance;
            if (log.collision) pass_b = false;
        }
        std::printf("  min clearance: sad %.3f angry %.3f neutral %.3f happy %.3f\n", clearance[0],
                    clearance[1], clearance[2], clearance[3]);
        pass_b = pass_b && clearance[0] > clearance[1] && clearance[1] > clearance[2] &&
                 clearance[2] > clearance[3];
    }

    // (c) back approach deviates less than front approach
    {
        World back;
        back.robot_start = {0.0, 0.0};
        back.robot_heading = 0.0;
        back.goal = {10.0, 0.0};
        Pedestrian p;
        p.position = {3.0, 0.0};
        p.heading = 0.0;  // walking away
        p.speed = 0.3;
        p.emotion = EmotionClass::sad;
        back.pedestrians.push_back(p);
        const EpisodeLog back_log = run_episode(back, nav_config(SimMode::oracle));
        const double dev_back = path_deviation(back_log, back.robot_start, back.goal);

        const World front = front_approach_world(EmotionClass::sad, 1.0, 9.0, 10.0);
        const EpisodeLog front_log = run_episode(front, nav_config(SimMode::oracle));
        const double dev_front = path_deviation(front_log, front.robot_start, front.goal);
        std::printf("  path deviation: back %.3f front %.3f\n", dev_back, dev_front);
        pass_c = back_log.goal_reached && front_log.goal_reached && dev_back < dev_front;
    }

    // (d) proxemo mode keeps more clearance than no-emotion mode
    {
        if (!g_trained) g_trained.emplace(GaitClassifier::load(kCheckpointPath));
        World w = front_approach_world(EmotionClass::sad, -1.0, 11.0, 12.0);
        SimConfig cfg = nav_config(SimMode::proxemo);
        cfg.limits.v_max = 0.4;
        const EpisodeLog prox = run_episode(w, cfg, &*g_trained);
        cfg.mode = SimMode::no_emotion;
        const EpisodeLog plain = run_episode(w, cfg);
        const double c_prox = clearance_report(prox).min_clearance;
        const double c_plain = clearance_report(plain).min_clearance;
        std::printf("  min clearance: proxemo %.3f no-emotion %.3f\n", c_prox, c_plain);
        pass_d = !prox.collision && !plain.collision && c_prox > c_plain;
    }

    const double elapsed = seconds_since(t0);
    const bool pass = pass_a && pass_b && pass_c && pass_d && elapsed < 300.0;
    std::printf("  (%.0fs) a=%d b=%d c=%d d=%d\n", elapsed, pass_a, pass_b, pass_c, pass_d);
    report(9, "determinism; clearance ordering; back < front deviation; proxemo > no-emotion",
           pass);
    CHECK(pass);
}

TEST_CASE("criterion 10: end-to-end classification inside the simulator") {
    if (!g_trained) g_trained.emplace(GaitClassifier::load(kCheckpointPath));

    World w = front_approach_world(EmotionClass::sad, -1.0, 11.0, 12.0);
    SimConfig cfg = nav_config(SimMode::proxemo);
    cfg.limits.v_max = 0.4;
    const EpisodeLog log = run_episode(w, cfg, &*g_trained);

    // stability over post-warm-up steps while the pedestrian still approaches
    int considered = 0, correct = 0, confident_correct = 0, c_in_band = 0;
    for (const auto& s : log.steps) {
        const auto& p = s.peds[0];
        if (p.pred_emotion < 0) continue;  // warm-up or out of range
        if (p.true_view != static_cast<int>(ViewGroup::front)) continue;
        ++considered;
        const bool ok = p.pred_emotion == static_cast<int>(EmotionClass::sad) &&
                        p.pred_view == static_cast<int>(ViewGroup::front);
        if (ok) {
            ++correct;
            if (p.confidence >= 0.8) {
                ++confident_correct;
                if (std::abs(p.comfort - 1.1271) <= 0.10 * 1.1271) ++c_in_band;
            }
        }
    }
    const double stability = considered > 0 ? static_cast<double>(correct) / considered : 0.0;
    std::printf("  post-warm-up steps %d, stability %.1f%%, confident steps %d, in-band %d\n",
                considered, 100.0 * stability, confident_correct, c_in_band);

    const bool pass = considered >= 20 && stability >= 0.80 && confident_correct >= 10 &&
                      c_in_band == confident_correct && !log.collision;
    report(10, "trained checkpoint classifies sad/front in-sim (>=80%) with c within 10%", pass);
    CHECK(pass);
}
